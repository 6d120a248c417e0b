//! Penalty selection by contiguous-block K-fold cross-validation.

use ndarray::{Array1, ArrayView1, ArrayView2, Axis};
use serde::Serialize;

use super::elastic_net::{validate_weights, ElasticNetOptions, Standardized};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvOptions {
    pub folds: usize,
    pub n_lambdas: usize,
    /// Smallest grid value as a fraction of `λ_max`.
    pub min_ratio: f64,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self {
            folds: 10,
            n_lambdas: 50,
            min_ratio: 1e-4,
        }
    }
}

/// Outcome of cross-validating one equation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvResult {
    /// Strictly descending penalty grid.
    pub lambdas: Vec<f64>,
    /// Mean squared out-of-fold prediction error at each grid point.
    pub cv_error: Vec<f64>,
    pub chosen_index: usize,
    pub lambda: f64,
}

/// `n` log-spaced values from `lambda_max` down to `min_ratio·lambda_max`.
pub fn lambda_grid(lambda_max: f64, n: usize, min_ratio: f64) -> Vec<f64> {
    let top = if lambda_max > 0.0 && lambda_max.is_finite() {
        lambda_max
    } else {
        1.0
    };
    if n == 1 {
        return vec![top];
    }
    let (hi, lo) = (top.ln(), (top * min_ratio).ln());
    let mut grid: Vec<f64> = (0..n)
        .map(|i| (hi + (lo - hi) * i as f64 / (n - 1) as f64).exp())
        .collect();
    grid[0] = top;
    grid
}

/// Contiguous fold boundaries `[start, end)` in time order.
pub fn fold_bounds(rows: usize, folds: usize) -> Vec<(usize, usize)> {
    (0..folds).map(|f| (f * rows / folds, (f + 1) * rows / folds)).collect()
}

/// Chooses λ on the grid minimizing mean out-of-fold squared error.
///
/// Folds are contiguous blocks in row order; ties go to the larger penalty.
pub fn cross_validate_lambda(
    y: ArrayView1<f64>,
    x: ArrayView2<f64>,
    weights: ArrayView1<f64>,
    enet: &ElasticNetOptions,
    cv: &CvOptions,
) -> Result<CvResult> {
    validate_weights(weights, x.ncols())?;
    let n = x.nrows();
    if y.len() != n {
        return Err(Error::dim(format!("response has {} rows but design has {n}", y.len())));
    }
    if cv.folds < 2 || n < cv.folds {
        return Err(Error::invalid(format!(
            "{n} observations cannot be split into {} folds",
            cv.folds
        )));
    }
    let full = Standardized::new(y, x, enet.fit_intercept)?;
    let lambdas = lambda_grid(full.lambda_max(weights), cv.n_lambdas, cv.min_ratio);

    let mut sse = vec![0.0; lambdas.len()];
    for (start, end) in fold_bounds(n, cv.folds) {
        let train_rows: Vec<usize> = (0..start).chain(end..n).collect();
        let x_train = x.select(Axis(0), &train_rows);
        let y_train = y.select(Axis(0), &train_rows);
        let x_test = x.slice(ndarray::s![start..end, ..]);
        let y_test = y.slice(ndarray::s![start..end]);
        let problem = Standardized::new(y_train.view(), x_train.view(), enet.fit_intercept)?;
        let mut b = Array1::zeros(x.ncols());
        for (slot, &lambda) in sse.iter_mut().zip(&lambdas) {
            let (fit, next) = problem.fit(weights, lambda, b, enet)?;
            b = next;
            let resid = &y_test - &fit.predict(x_test);
            *slot += resid.dot(&resid);
        }
    }
    let cv_error: Vec<f64> = sse.into_iter().map(|s| s / n as f64).collect();
    let mut chosen_index = 0;
    for (i, e) in cv_error.iter().enumerate() {
        if *e < cv_error[chosen_index] {
            chosen_index = i;
        }
    }
    Ok(CvResult {
        lambda: lambdas[chosen_index],
        lambdas,
        cv_error,
        chosen_index,
    })
}
