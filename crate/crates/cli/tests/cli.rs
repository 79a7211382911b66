use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use jsonschema::{Resource, Validator};
use serde_json::Value;
use tempfile::TempDir;

fn sdsc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdsc"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = sdsc(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schema")
}

fn load(name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(schema_dir().join(name)).unwrap()).unwrap()
}

fn validator(name: &str) -> Validator {
    let eval = load("eval_report.schema.json");
    jsonschema::options()
        .with_resource(
            "json-schema:///eval_report.schema.json",
            Resource::from_contents(eval).unwrap(),
        )
        .build(&load(name))
        .unwrap()
}

fn check(name: &str, doc: &Value) {
    let v = validator(name);
    let errors: Vec<String> = v.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}");
}

fn gen(dir: &Path, extra: &[&str]) {
    let mut args = vec![
        "gen",
        "--subspaces",
        "3",
        "--ambient-dim",
        "12",
        "--sub-dim",
        "2",
        "--points-per",
        "20",
        "--seed",
        "4",
        "--out",
        "d.csv",
        "--labels",
        "l.csv",
    ];
    args.extend_from_slice(extra);
    ok(dir, &args);
}

#[test]
fn gen_paper_setting_and_determinism() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let args = [
        "gen",
        "--subspaces",
        "6",
        "--ambient-dim",
        "10",
        "--sub-dim",
        "6",
        "--points-per",
        "50",
        "--seed",
        "1",
        "--out",
        "a.csv",
        "--labels",
        "al.csv",
    ];
    ok(d, &args);
    let first = fs::read(d.join("a.csv")).unwrap();
    assert_eq!(String::from_utf8_lossy(&first).lines().count(), 300);
    ok(d, &args);
    assert_eq!(fs::read(d.join("a.csv")).unwrap(), first);

    ok(
        d,
        &[
            "gen",
            "--subspaces",
            "1",
            "--ambient-dim",
            "5",
            "--sub-dim",
            "2",
            "--points-per",
            "7",
            "--out",
            "b.csv",
            "--labels",
            "bl.csv",
        ],
    );
    let labels = fs::read_to_string(d.join("bl.csv")).unwrap();
    assert!(labels.lines().all(|l| l == "0"));
}

#[test]
fn cluster_every_dense_method() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    gen(d, &[]);
    for dense in ["none", "pce", "d1", "d2", "d3"] {
        ok(
            d,
            &[
                "cluster",
                "--input",
                "d.csv",
                "--gamma",
                "3",
                "--dense",
                dense,
                "--clusters",
                "3",
                "--seed",
                "1",
                "--truth",
                "l.csv",
                "--out",
                "p.csv",
                "--report",
                "r.json",
                "--affinity-out",
                "w.csv",
                "--conn",
            ],
        );
        let labels = fs::read_to_string(d.join("p.csv")).unwrap();
        assert_eq!(labels.lines().count(), 60);
        let report: Value = serde_json::from_str(&fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
        check("run_report.schema.json", &report);
        assert_eq!(report["config"]["dense"], dense);
        assert!(report["evaluation"]["conn"].is_number());
        assert_eq!(report["ncut"].is_object(), dense != "none");
        assert!(report["nnz_after"].as_u64() >= report["nnz_before"].as_u64());
    }
}

#[test]
fn cluster_report_to_stdout() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    gen(d, &[]);
    let out = ok(
        d,
        &[
            "cluster",
            "--input",
            "d.csv",
            "--gamma",
            "3",
            "--clusters",
            "3",
            "--out",
            "p.csv",
        ],
    );
    let report: Value = serde_json::from_str(&out).unwrap();
    check("run_report.schema.json", &report);
    assert!(report.get("evaluation").is_none());
}

#[test]
fn cluster_errors() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    gen(d, &[]);
    fs::write(d.join("bad.csv"), "1,2,3\n4,5\n").unwrap();
    let out = sdsc(d, &["cluster", "--input", "bad.csv", "--gamma", "1", "--clusters", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let out = sdsc(d, &["cluster", "--input", "d.csv", "--gamma", "60", "--clusters", "3"]);
    assert_eq!(out.status.code(), Some(1));

    let out = sdsc(
        d,
        &["cluster", "--input", "missing.csv", "--gamma", "3", "--clusters", "3"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.csv"));

    let out = sdsc(
        d,
        &[
            "cluster",
            "--input",
            "d.csv",
            "--gamma",
            "3",
            "--clusters",
            "3",
            "--dense",
            "pce",
            "--symmetrization",
            "sum",
        ],
    );
    assert_eq!(out.status.code(), Some(1));

    let out = sdsc(
        d,
        &[
            "cluster",
            "--input",
            "d.csv",
            "--gamma",
            "3",
            "--clusters",
            "3",
            "--theta1",
            "0.5",
            "--theta2",
            "0.6",
        ],
    );
    assert_eq!(out.status.code(), Some(1));

    let out = sdsc(
        d,
        &[
            "cluster",
            "--input",
            "d.csv",
            "--gamma",
            "3",
            "--clusters",
            "3",
            "--max-dense-n",
            "10",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unwritable_output_is_io_error() {
    let tmp = TempDir::new().unwrap();
    let out = sdsc(
        tmp.path(),
        &[
            "gen",
            "--subspaces",
            "1",
            "--ambient-dim",
            "3",
            "--sub-dim",
            "1",
            "--points-per",
            "3",
            "--out",
            "no/such/dir/d.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no/such/dir/d.csv"));
}

#[test]
fn eval_reports() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    fs::write(d.join("p.csv"), "0\n1\n1\n1\n").unwrap();
    fs::write(d.join("t.csv"), "0\n0\n1\n1\n").unwrap();
    let r: Value = serde_json::from_str(&ok(d, &["eval", "--pred", "p.csv", "--truth", "t.csv"])).unwrap();
    check("eval_report.schema.json", &r);
    assert_eq!(r["acc"], 0.75);
    assert!(r.get("conn").is_none());

    let r: Value = serde_json::from_str(&ok(d, &["eval", "--pred", "t.csv", "--truth", "t.csv"])).unwrap();
    assert_eq!(r["acc"], 1.0);
    assert_eq!(r["nmi"], 1.0);

    fs::write(d.join("w.csv"), "0,1,1.0\n2,3,1.0\n").unwrap();
    ok(
        d,
        &[
            "eval",
            "--pred",
            "t.csv",
            "--truth",
            "t.csv",
            "--affinity",
            "w.csv",
            "--out",
            "e.json",
        ],
    );
    let r: Value = serde_json::from_str(&fs::read_to_string(d.join("e.json")).unwrap()).unwrap();
    check("eval_report.schema.json", &r);
    assert!(r["conn"].as_f64().unwrap() <= 1e-8);

    fs::write(d.join("short.csv"), "0\n1\n").unwrap();
    let out = sdsc(d, &["eval", "--pred", "short.csv", "--truth", "t.csv"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bench_and_sweep_reports() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let out = ok(
        d,
        &[
            "--threads",
            "1",
            "bench",
            "--sizes",
            "60,120,240",
            "--full-max-n",
            "120",
            "--csv",
            "b.csv",
            "--json",
            "b.json",
        ],
    );
    assert_eq!(out.lines().count(), 4);
    let r: Value = serde_json::from_str(&fs::read_to_string(d.join("b.json")).unwrap()).unwrap();
    check("bench_report.schema.json", &r);
    assert_eq!(r["rows"].as_array().unwrap().len(), 3);
    assert!(r["rows"][1]["dense_seconds"].is_number());
    assert!(r["rows"][2].get("dense_seconds").is_none());
    assert_eq!(fs::read_to_string(d.join("b.csv")).unwrap().lines().count(), 4);

    ok(d, &["bench", "--sizes", "90", "--json", "one.json"]);
    let r: Value = serde_json::from_str(&fs::read_to_string(d.join("one.json")).unwrap()).unwrap();
    assert_eq!(r["rows"].as_array().unwrap().len(), 1);

    let out = sdsc(d, &["bench", "--sizes", "200,100"]);
    assert_eq!(out.status.code(), Some(1));

    let out = ok(
        d,
        &[
            "sweep",
            "--seeds",
            "1",
            "--points-per",
            "15",
            "--theta1",
            "0.7,0.8",
            "--json",
            "s.json",
        ],
    );
    assert_eq!(out.lines().count(), 3);
    let r: Value = serde_json::from_str(&fs::read_to_string(d.join("s.json")).unwrap()).unwrap();
    check("sweep_report.schema.json", &r);
}

#[test]
fn schemas_reject_bad_reports() {
    let bad_eval = serde_json::json!({ "acc": 1.5, "nmi": 0.2, "mapping": [] });
    assert!(!validator("eval_report.schema.json").is_valid(&bad_eval));
    let bad_nested = serde_json::json!({
        "config": {}, "points": 1, "timings": {}, "nnz_before": 0, "nnz_after": 0, "short_columns": 0,
        "evaluation": { "acc": 0.5 }
    });
    assert!(!validator("run_report.schema.json").is_valid(&bad_nested));
}

#[test]
fn usage_errors_exit_one() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(sdsc(tmp.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(sdsc(tmp.path(), &["--help"]).status.code(), Some(0));
}
