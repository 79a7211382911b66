#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};

use super::DenseMatrix;

/// The `k` algebraically smallest eigenpairs of a symmetric matrix.
#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// `N x k` matrix whose columns are the matching unit eigenvectors.
    pub vectors: DenseMatrix,
}

const SYMMETRY_TOL: f64 = 1e-9;

/// Dense symmetric eigensolver: Householder tridiagonalization followed by
/// implicit-shift QL iteration, returning the `k` smallest eigenpairs.
pub fn symmetric_eigen(matrix: &DenseMatrix, k: usize) -> Result<SymmetricEigen> {
    let n = matrix.rows();
    if matrix.cols() != n {
        return Err(Error::validation(format!(
            "eigensolver needs a square matrix, got {}x{}",
            n,
            matrix.cols()
        )));
    }
    if k == 0 || k > n {
        return Err(Error::validation(format!("eigenpair count {k} outside 1..={n}")));
    }
    if matrix.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::validation("matrix has non-finite entries"));
    }
    let scale = matrix.max_abs();
    for i in 0..n {
        for j in (i + 1)..n {
            if (matrix[(i, j)] - matrix[(j, i)]).abs() > SYMMETRY_TOL * scale {
                return Err(Error::validation(format!(
                    "matrix not symmetric at ({i}, {j}): {} vs {}",
                    matrix[(i, j)],
                    matrix[(j, i)]
                )));
            }
        }
    }

    // symmetrize so that round-off asymmetry never leaks into the reduction
    let mut v = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            v[i][j] = 0.5 * (matrix[(i, j)] + matrix[(j, i)]);
        }
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e);

    // QL rotates columns of V; hold V transposed so each column is contiguous.
    let mut z: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| v[i][j]).collect()).collect();
    drop(v);
    ql_implicit(&mut d, &mut e, &mut z)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));

    let mut vectors = DenseMatrix::zeros(n, k);
    let mut values = Vec::with_capacity(k);
    for (c, &idx) in order.iter().take(k).enumerate() {
        values.push(d[idx]);
        for r in 0..n {
            vectors[(r, c)] = z[idx][r];
        }
    }
    Ok(SymmetricEigen { values, vectors })
}

/// Householder reduction of `v` (overwritten with the accumulated orthogonal
/// transform) to tridiagonal form with diagonal `d` and sub-diagonal `e[1..]`.
fn tridiagonalize(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    d.copy_from_slice(&v[n - 1]);

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in &d[..i] {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
                v[j][i] = 0.0;
            }
        } else {
            for dk in &mut d[..i] {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in &mut e[..i] {
                *ej = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in (j + 1)..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k][j] -= f * e[k] + g * d[k];
                }
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n - 1 {
        v[n - 1][i] = v[i][i];
        v[i][i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    v[k][j] -= g * d[k];
                }
            }
        }
        for row in v.iter_mut().take(i + 1) {
            row[i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = 0.0;
    }
    v[n - 1][n - 1] = 1.0;
    e[0] = 0.0;
}

/// Implicit-shift QL on the tridiagonal `(d, e)`. `z[c]` holds eigenvector
/// column `c`; on return `d` holds the (unsorted) eigenvalues.
fn ql_implicit(d: &mut [f64], e: &mut [f64], z: &mut [Vec<f64>]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let max_sweeps = 64 * n.max(1);

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }

        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > max_sweeps {
                    return Err(Error::internal("QL iteration did not converge"));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in &mut d[l + 2..] {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    let (lo, hi) = z.split_at_mut(i + 1);
                    let zi = &mut lo[i];
                    let zi1 = &mut hi[0];
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let hb = *b;
                        *b = s * *a + c * hb;
                        *a = c * *a - s * hb;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
