//! Python bindings: data generation, affinity construction and revision,
//! spectral clustering, metrics and the full pipeline.

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use sdsc_core::densify::{self, DenseOptions, TransformKind};
use sdsc_core::imc::{affinity_max, affinity_sum, imc_coefficients};
use sdsc_core::metrics;
use sdsc_core::pce::{pce_densify, Thresholds};
use sdsc_core::pipeline::{self, DenseMethod, PipelineConfig, ReportOptions, Symmetrization};
use sdsc_core::{spectral, AffinityMatrix, DataMatrix, Error, SeededRng, SubspaceSpec};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Validation(_) | Error::Parse { .. } => PyValueError::new_err(e.to_string()),
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        Error::Internal(_) => PyRuntimeError::new_err(e.to_string()),
    }
}

fn data(points: Vec<Vec<f64>>, normalize: bool) -> PyResult<DataMatrix> {
    let x = DataMatrix::from_points(&points).map_err(py_err)?;
    Ok(if normalize { x.normalized() } else { x })
}

/// Symmetric nonnegative similarity graph with zero diagonal.
#[pyclass(name = "Affinity", module = "sdsc", frozen)]
#[derive(Clone)]
struct PyAffinity {
    inner: AffinityMatrix,
}

#[pymethods]
impl PyAffinity {
    /// Builds an affinity from `(i, j, w)` triplets; `(i, j)` and `(j, i)` name the same entry.
    #[new]
    fn new(n: usize, triplets: Vec<(usize, usize, f64)>) -> PyResult<Self> {
        Ok(Self {
            inner: AffinityMatrix::from_triplets(n, triplets).map_err(py_err)?,
        })
    }

    #[getter]
    fn size(&self) -> usize {
        self.inner.size()
    }

    /// Stored nonzeros counting both triangles.
    #[getter]
    fn nnz(&self) -> usize {
        self.inner.nnz()
    }

    fn get(&self, i: usize, j: usize) -> PyResult<f64> {
        if i >= self.inner.size() || j >= self.inner.size() {
            return Err(PyValueError::new_err(format!("index ({i}, {j}) out of range")));
        }
        Ok(self.inner.get(i, j))
    }

    /// Upper-triangle entries `(i, j, w)` with `i < j`.
    fn triplets(&self) -> Vec<(usize, usize, f64)> {
        self.inner.upper_triplets().collect()
    }

    fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.inner.size();
        (0..n).map(|i| (0..n).map(|j| self.inner.get(i, j)).collect()).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.size()
    }

    fn __repr__(&self) -> String {
        format!("Affinity(size={}, nnz={})", self.inner.size(), self.inner.nnz())
    }
}

/// Points on a union of random subspaces; returns `(points, labels)`.
#[pyfunction]
#[pyo3(signature = (subspaces, ambient_dim, sub_dim, points_per, seed=0, noise=0.0))]
fn generate(
    subspaces: usize,
    ambient_dim: usize,
    sub_dim: usize,
    points_per: usize,
    seed: u64,
    noise: f64,
) -> PyResult<(Vec<Vec<f64>>, Vec<usize>)> {
    let spec = SubspaceSpec::uniform(subspaces, ambient_dim, sub_dim, points_per, seed).with_noise(noise);
    let x = sdsc_core::generate(&spec).map_err(py_err)?;
    let labels = x.labels().expect("generated data is labelled").to_vec();
    Ok((x.points().map(<[f64]>::to_vec).collect(), labels))
}

/// Greedy correlation coefficients as `(i, j, value)`: point `i` is expressed by point `j`.
#[pyfunction]
#[pyo3(signature = (points, gamma, normalize=true))]
fn imc(points: Vec<Vec<f64>>, gamma: usize, normalize: bool) -> PyResult<Vec<(usize, usize, f64)>> {
    let c = imc_coefficients(&data(points, normalize)?, gamma).map_err(py_err)?;
    Ok(c.entries().collect())
}

/// Sparse affinity from greedy correlation coefficients.
#[pyfunction]
#[pyo3(signature = (points, gamma, symmetrization="max", normalize=true))]
fn imc_affinity(points: Vec<Vec<f64>>, gamma: usize, symmetrization: &str, normalize: bool) -> PyResult<PyAffinity> {
    let c = imc_coefficients(&data(points, normalize)?, gamma).map_err(py_err)?;
    let inner = match symmetrization.parse::<Symmetrization>().map_err(py_err)? {
        Symmetrization::Max => affinity_max(&c),
        Symmetrization::Sum => affinity_sum(&c),
    };
    Ok(PyAffinity { inner })
}

#[pyfunction]
#[pyo3(signature = (affinity, theta1=0.8, theta2=0.6, theta3=0.3))]
fn pce(affinity: &PyAffinity, theta1: f64, theta2: f64, theta3: f64) -> PyResult<PyAffinity> {
    let t = Thresholds::new(theta1, theta2, theta3).map_err(py_err)?;
    Ok(PyAffinity {
        inner: pce_densify(&affinity.inner, &t).map_err(py_err)?,
    })
}

/// Distance-relaxation dense stage with transform `d1`, `d2` or `d3`.
#[pyfunction]
#[pyo3(signature = (affinity, kind="d3", sparsity_preserving=false, full_apsp=false))]
fn dense_stage(affinity: &PyAffinity, kind: &str, sparsity_preserving: bool, full_apsp: bool) -> PyResult<PyAffinity> {
    let kind: TransformKind = kind.parse().map_err(py_err)?;
    let opts = DenseOptions {
        sparsity_preserving,
        full_apsp,
    };
    Ok(PyAffinity {
        inner: densify::dense_stage(&affinity.inner, kind, opts).map_err(py_err)?,
    })
}

/// `Ncut(after) / Ncut(before)` under `labels`, or None when the baseline is 0 or infinite.
#[pyfunction]
fn ncut_ratio(before: &PyAffinity, after: &PyAffinity, labels: Vec<usize>) -> PyResult<Option<f64>> {
    let labels = spectral::ClusterAssignment::from_labels(labels);
    densify::ncut_gain(&before.inner, &after.inner, &labels).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (affinity, clusters, seed=0))]
fn spectral_clustering(affinity: &PyAffinity, clusters: usize, seed: u64) -> PyResult<Vec<usize>> {
    let mut rng = SeededRng::new(seed);
    Ok(spectral::spectral_clustering(&affinity.inner, clusters, &mut rng)
        .map_err(py_err)?
        .into_labels())
}

#[pyfunction]
fn accuracy(pred: Vec<usize>, truth: Vec<usize>) -> PyResult<f64> {
    metrics::accuracy(&pred, &truth).map_err(py_err)
}

#[pyfunction]
fn nmi(pred: Vec<usize>, truth: Vec<usize>) -> PyResult<f64> {
    metrics::nmi(&pred, &truth).map_err(py_err)
}

#[pyfunction]
fn connectivity(affinity: &PyAffinity) -> PyResult<f64> {
    metrics::connectivity(&affinity.inner).map_err(py_err)
}

/// Full pipeline. Returns `(labels, report)` where `report` is the run report as JSON text.
#[pyfunction]
#[pyo3(signature = (
    points, gamma, clusters, dense="none", theta1=0.8, theta2=0.6, theta3=0.3, seed=0,
    symmetrization="max", truth=None, normalize=true
))]
#[allow(clippy::too_many_arguments)]
fn cluster(
    points: Vec<Vec<f64>>,
    gamma: usize,
    clusters: usize,
    dense: &str,
    theta1: f64,
    theta2: f64,
    theta3: f64,
    seed: u64,
    symmetrization: &str,
    truth: Option<Vec<usize>>,
    normalize: bool,
) -> PyResult<(Vec<usize>, String)> {
    let x = data(points, normalize)?;
    let mut config =
        PipelineConfig::new(gamma, clusters, dense.parse::<DenseMethod>().map_err(py_err)?).with_seed(seed);
    config.thresholds = Thresholds::new(theta1, theta2, theta3).map_err(py_err)?;
    config.symmetrization = symmetrization.parse().map_err(py_err)?;
    let out = pipeline::run_with(&x, &config, truth.as_deref(), ReportOptions::default()).map_err(py_err)?;
    let report = serde_json::to_string(&out.report).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok((out.labels.into_labels(), report))
}

#[pymodule]
fn sdsc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAffinity>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(imc, m)?)?;
    m.add_function(wrap_pyfunction!(imc_affinity, m)?)?;
    m.add_function(wrap_pyfunction!(pce, m)?)?;
    m.add_function(wrap_pyfunction!(dense_stage, m)?)?;
    m.add_function(wrap_pyfunction!(ncut_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_clustering, m)?)?;
    m.add_function(wrap_pyfunction!(accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(nmi, m)?)?;
    m.add_function(wrap_pyfunction!(connectivity, m)?)?;
    m.add_function(wrap_pyfunction!(cluster, m)?)?;
    Ok(())
}
