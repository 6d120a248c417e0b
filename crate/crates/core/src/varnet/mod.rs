//! Equation-by-equation VAR(P) estimation with the adaptive elastic net.
//!
//! Each equation regresses one series on `P` lags of every series plus an
//! unpenalized intercept. The penalty weights come from a least-squares fit on
//! the standardized design, and λ is chosen per equation by contiguous-block
//! cross-validation.

mod cv;
mod elastic_net;
mod ols;

pub use cv::{cross_validate_lambda, fold_bounds, lambda_grid, CvOptions, CvResult};
pub use elastic_net::{
    adaptive_elastic_net_fit, adaptive_weights, lambda_max, soft_threshold, ElasticNetFit, ElasticNetOptions,
};
pub use ols::ols_fit;

use ndarray::{Array1, Array2, ArrayView2};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg;
use crate::returns::ReturnPanel;

use elastic_net::Standardized;

/// Upper bound on adaptive penalty weights.
pub const WEIGHT_CAP: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarOptions {
    pub lags: usize,
    pub enet: ElasticNetOptions,
    pub cv: CvOptions,
}

impl VarOptions {
    pub fn with_lags(lags: usize) -> Self {
        Self {
            lags,
            enet: ElasticNetOptions::default(),
            cv: CvOptions::default(),
        }
    }
}

/// Per-equation penalty selection.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyPath {
    pub equations: Vec<CvResult>,
}

impl PenaltyPath {
    pub fn chosen(&self) -> Vec<f64> {
        self.equations.iter().map(|e| e.lambda).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarModel {
    pub labels: Vec<String>,
    /// `phi[p-1]` is the N×N coefficient matrix on lag `p`.
    pub phi: Vec<Array2<f64>>,
    pub intercept: Array1<f64>,
    /// (T−P)×N reduced-form residuals.
    pub residuals: Array2<f64>,
    /// Residual covariance (denominator T−P, residuals demeaned), exactly symmetric.
    pub sigma: Array2<f64>,
    pub penalty: PenaltyPath,
}

impl VarModel {
    pub fn lags(&self) -> usize {
        self.phi.len()
    }

    pub fn n_series(&self) -> usize {
        self.sigma.nrows()
    }
}

/// Lagged design: row `t−P` holds `[x_{t−1}, …, x_{t−P}]`, lag-major.
pub fn lagged_design(data: ArrayView2<f64>, lags: usize) -> (Array2<f64>, Array2<f64>) {
    let (t, n) = data.dim();
    let rows = t - lags;
    let mut x = Array2::zeros((rows, n * lags));
    for r in 0..rows {
        for p in 1..=lags {
            for j in 0..n {
                x[[r, (p - 1) * n + j]] = data[[r + lags - p, j]];
            }
        }
    }
    let y = data.slice(ndarray::s![lags.., ..]).to_owned();
    (y, x)
}

struct EquationFit {
    intercept: f64,
    coef: Array1<f64>,
    cv: CvResult,
}

fn fit_equation(y: ndarray::ArrayView1<f64>, x: ArrayView2<f64>, opts: &VarOptions) -> Result<EquationFit> {
    let problem = Standardized::new(y, x, true)?;
    let weights = adaptive_weights(problem.ols().view(), WEIGHT_CAP);
    let cv = cross_validate_lambda(y, x, weights.view(), &opts.enet, &opts.cv)?;
    // Walk the grid down to the chosen λ with warm starts.
    let mut b = Array1::zeros(x.ncols());
    let mut last = None;
    for &lambda in &cv.lambdas[..=cv.chosen_index] {
        let (fit, next) = problem.fit(weights.view(), lambda, b, &opts.enet)?;
        b = next;
        last = Some(fit);
    }
    let fit = last.expect("grid is non-empty");
    Ok(EquationFit {
        intercept: fit.intercept,
        coef: fit.coef,
        cv,
    })
}

/// Fits a VAR(`opts.lags`) to the panel.
pub fn fit_var(panel: &ReturnPanel, opts: &VarOptions) -> Result<VarModel> {
    let lags = opts.lags;
    let (t, n) = panel.values().dim();
    if lags == 0 {
        return Err(Error::invalid("lag order must be at least 1"));
    }
    if t <= lags {
        return Err(Error::invalid(format!(
            "{t} observations are too few for a VAR({lags})"
        )));
    }
    let (y, x) = lagged_design(panel.values().view(), lags);
    let fits: Vec<EquationFit> = (0..n)
        .into_par_iter()
        .map(|i| {
            fit_equation(y.column(i), x.view(), opts).map_err(|e| Error::Equation {
                equation: i,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let mut phi = vec![Array2::zeros((n, n)); lags];
    let mut intercept = Array1::zeros(n);
    let mut coef = Array2::zeros((n * lags, n));
    for (i, fit) in fits.iter().enumerate() {
        intercept[i] = fit.intercept;
        coef.column_mut(i).assign(&fit.coef);
        for (p, phi_p) in phi.iter_mut().enumerate() {
            for j in 0..n {
                phi_p[[i, j]] = fit.coef[p * n + j];
            }
        }
    }
    let residuals = &y - &x.dot(&coef) - &intercept;
    let sigma = linalg::demeaned_covariance(residuals.view());
    Ok(VarModel {
        labels: panel.labels().to_vec(),
        phi,
        intercept,
        residuals,
        sigma,
        penalty: PenaltyPath {
            equations: fits.into_iter().map(|f| f.cv).collect(),
        },
    })
}
