//! Small dense linear-algebra kernels used across the pipeline.
//!
//! Matrices here are at most a few dozen rows (one row per series or per
//! regressor), so straightforward row-major loops are all that is needed.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Pivots below this fraction of the largest diagonal entry count as zero.
const PIVOT_RTOL: f64 = 1e-13;

/// Plain Cholesky factorization `A = L Lᵀ` with `L` lower triangular.
///
/// Fails with the (1-based) index of the first leading minor whose pivot is not
/// positive.
pub fn cholesky(a: ArrayView2<f64>) -> Result<Array2<f64>> {
    let n = square_dim(a)?;
    let scale = (0..n).map(|i| a[[i, i]].abs()).fold(0.0, f64::max);
    let floor = PIVOT_RTOL * scale;
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if !(d > floor) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { minor: j + 1, size: n });
        }
        let d = d.sqrt();
        l[[j, j]] = d;
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / d;
        }
    }
    Ok(l)
}

/// A Cholesky factor together with the ridge that had to be added to obtain it.
#[derive(Debug, Clone)]
pub struct JitteredCholesky {
    pub factor: Array2<f64>,
    /// Amount `ε` such that `factor · factorᵀ = A + ε I`; zero when none was needed.
    pub jitter: f64,
}

/// Cholesky with escalating diagonal jitter.
///
/// Starts at `1e-10·tr(A)/n` and multiplies by ten up to `1e-6·tr(A)/n`.
pub fn cholesky_jittered(a: ArrayView2<f64>) -> Result<JitteredCholesky> {
    let first = match cholesky(a) {
        Ok(factor) => return Ok(JitteredCholesky { factor, jitter: 0.0 }),
        Err(e) => e,
    };
    let n = a.nrows();
    let mean_diag = a.diag().sum() / n as f64;
    if !(mean_diag > 0.0) {
        return Err(first);
    }
    let mut last = first;
    let mut rel = 1e-10;
    while rel <= 1e-6 * (1.0 + 1e-9) {
        let eps = rel * mean_diag;
        let mut shifted = a.to_owned();
        shifted.diag_mut().mapv_inplace(|d| d + eps);
        match cholesky(shifted.view()) {
            Ok(factor) => {
                log::warn!("covariance not positive definite; added jitter {eps:.3e} to the diagonal");
                return Ok(JitteredCholesky { factor, jitter: eps });
            }
            Err(e) => last = e,
        }
        rel *= 10.0;
    }
    Err(last)
}

/// Solves `L X = B` for lower-triangular `L`.
pub fn solve_lower(l: ArrayView2<f64>, b: ArrayView2<f64>) -> Array2<f64> {
    let n = l.nrows();
    let mut x = b.to_owned();
    for c in 0..x.ncols() {
        for i in 0..n {
            let mut s = x[[i, c]];
            for k in 0..i {
                s -= l[[i, k]] * x[[k, c]];
            }
            x[[i, c]] = s / l[[i, i]];
        }
    }
    x
}

/// Solves `Lᵀ X = B` for lower-triangular `L`.
pub fn solve_lower_transpose(l: ArrayView2<f64>, b: ArrayView2<f64>) -> Array2<f64> {
    let n = l.nrows();
    let mut x = b.to_owned();
    for c in 0..x.ncols() {
        for i in (0..n).rev() {
            let mut s = x[[i, c]];
            for k in (i + 1)..n {
                s -= l[[k, i]] * x[[k, c]];
            }
            x[[i, c]] = s / l[[i, i]];
        }
    }
    x
}

/// Solves `A X = B` given the Cholesky factor of `A`.
pub fn cholesky_solve(l: ArrayView2<f64>, b: ArrayView2<f64>) -> Array2<f64> {
    let y = solve_lower(l, b);
    solve_lower_transpose(l, y.view())
}

/// Inverse of a symmetric positive-definite matrix, symmetrized on return.
pub fn spd_inverse(a: ArrayView2<f64>) -> Result<Array2<f64>> {
    let n = square_dim(a)?;
    let l = cholesky(a)?;
    let inv = cholesky_solve(l.view(), Array2::eye(n).view());
    Ok(symmetrize(inv.view()))
}

/// `(A + Aᵀ)/2`, with the upper triangle mirrored so the result is exactly symmetric.
pub fn symmetrize(a: ArrayView2<f64>) -> Array2<f64> {
    let n = a.nrows();
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        out[[i, i]] = a[[i, i]];
        for j in (i + 1)..n {
            let v = 0.5 * (a[[i, j]] + a[[j, i]]);
            out[[i, j]] = v;
            out[[j, i]] = v;
        }
    }
    out
}

/// Inverse of a unit lower-triangular matrix by forward substitution.
pub fn unit_lower_inverse(l: ArrayView2<f64>) -> Array2<f64> {
    let n = l.nrows();
    let mut x = Array2::<f64>::eye(n);
    for c in 0..n {
        for i in (c + 1)..n {
            let mut s = 0.0;
            for k in c..i {
                s -= l[[i, k]] * x[[k, c]];
            }
            x[[i, c]] = s;
        }
    }
    x
}

/// Sample covariance with denominator `rows`, after demeaning each column.
pub fn demeaned_covariance(data: ArrayView2<f64>) -> Array2<f64> {
    let rows = data.nrows();
    let n = data.ncols();
    let mean: Array1<f64> = data.mean_axis(Axis(0)).unwrap_or_else(|| Array1::zeros(n));
    let centered = &data - &mean;
    let mut cov = Array2::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let v = centered.column(i).dot(&centered.column(j)) / rows as f64;
            cov[[i, j]] = v;
            cov[[j, i]] = v;
        }
    }
    cov
}

pub fn max_abs(a: ArrayView2<f64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn square_dim(a: ArrayView2<f64>) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::dim(format!(
            "expected a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(a.nrows())
}
