use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::linalg;

/// Relative ridge used when the normal equations are singular.
pub const RIDGE_FALLBACK: f64 = 1e-6;

/// Least-squares coefficients of `y` on the columns of `x` (no implicit intercept).
///
/// A rank-deficient design falls back to a tiny ridge penalty
/// `1e-6·tr(XᵀX)/K` instead of failing.
pub fn ols_fit(y: ArrayView1<f64>, x: ArrayView2<f64>) -> Result<Array1<f64>> {
    if y.len() != x.nrows() {
        return Err(Error::dim(format!(
            "response has {} rows but design has {}",
            y.len(),
            x.nrows()
        )));
    }
    if x.ncols() == 0 {
        return Err(Error::invalid("design matrix has no columns"));
    }
    let gram = x.t().dot(&x);
    let xty = x.t().dot(&y);
    Ok(solve_normal_equations(&gram, &xty))
}

/// Solves `G b = c`, regularizing `G` when it is not numerically positive definite.
pub(crate) fn solve_normal_equations(gram: &Array2<f64>, xty: &Array1<f64>) -> Array1<f64> {
    let k = gram.nrows();
    let rhs = xty.view().insert_axis(ndarray::Axis(1));
    if let Ok(l) = linalg::cholesky(gram.view()) {
        return linalg::cholesky_solve(l.view(), rhs).column(0).to_owned();
    }
    let trace = gram.diag().sum();
    if !(trace > 0.0) {
        return Array1::zeros(k);
    }
    let ridge = RIDGE_FALLBACK * trace / k as f64;
    log::debug!("singular normal equations; using ridge {ridge:.3e}");
    let mut shifted = gram.clone();
    shifted.diag_mut().mapv_inplace(|d| d + ridge);
    match linalg::cholesky(shifted.view()) {
        Ok(l) => linalg::cholesky_solve(l.view(), rhs).column(0).to_owned(),
        Err(_) => Array1::zeros(k),
    }
}
