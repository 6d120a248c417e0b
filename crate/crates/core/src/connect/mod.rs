//! Scaled impulse responses, variance decompositions, and connectedness measures.

mod kde;
mod measures;

pub use kde::{density_curve, kde_density, silverman_bandwidth, Bandwidth, DensityCurve};
pub use measures::{measures, ConnectednessReport};

use itertools::Itertools;
use ndarray::Array2;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::identify::{clusterizer, make_identification, ClusterSpec, Identification, MaCoefficients, Scheme};

/// Largest cluster count for which every ordering is enumerated (8! = 40 320).
pub const MAX_AVERAGED_CLUSTERS: usize = 8;

/// Responses to one-standard-deviation structural shocks.
#[derive(Debug, Clone, PartialEq)]
pub struct IrfSet {
    /// `responses[h][[i, j]]`: response of series `i` at step `h` to shock `j`.
    pub responses: Vec<Array2<f64>>,
}

/// Which cluster ordering produced a decomposition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VdOrdering {
    /// Not ordering-dependent, or the natural series order.
    Natural,
    /// Clustered scheme under one explicit order of cluster indices.
    Fixed(Vec<usize>),
    /// Average over every cluster ordering.
    Averaged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VdMatrix {
    /// Unnormalized shares `θ̃`.
    pub theta_raw: Array2<f64>,
    /// Row-normalized shares `θ`; each row sums to one.
    pub theta: Array2<f64>,
    pub horizon: usize,
    pub scheme: Scheme,
    pub ordering: VdOrdering,
}

impl VdMatrix {
    pub fn n_series(&self) -> usize {
        self.theta.nrows()
    }
}

/// Impact matrix `Q Ω diag(Ω)^{-1/2}`; column `j` is the step-0 response to shock `j`.
fn scaled_impact(ident: &Identification) -> Result<Array2<f64>> {
    let mut impact = ident.q.dot(&ident.omega);
    for (j, mut col) in impact.columns_mut().into_iter().enumerate() {
        let w = ident.omega[[j, j]];
        if !(w > 0.0) {
            return Err(Error::NonPositiveShockVariance(j));
        }
        col.mapv_inplace(|v| v / w.sqrt());
    }
    Ok(impact)
}

fn check_dims(ma: &MaCoefficients, ident: &Identification) -> Result<()> {
    let n = ma.n_series();
    if ident.q.dim() != (n, n) || ident.omega.dim() != (n, n) {
        return Err(Error::dim(format!(
            "MA coefficients are {n}x{n} but the identification is {:?}",
            ident.q.dim()
        )));
    }
    Ok(())
}

/// `ψ_j(h) = A_h Q Ω e_j / √ω_jj` for every step the MA coefficients cover.
pub fn irf(ma: &MaCoefficients, ident: &Identification) -> Result<IrfSet> {
    check_dims(ma, ident)?;
    let impact = scaled_impact(ident)?;
    Ok(IrfSet {
        responses: ma.iter().map(|a| a.dot(&impact)).collect(),
    })
}

/// H-step forecast-error variance decomposition.
///
/// `θ̃_ij = Σ_{h<H} (A_h Q Ω e_j)_i² / ω_jj  ÷  Σ_{h<H} (A_h Σ A_hᵀ)_ii`, then
/// each row is normalized to sum to one.
pub fn vd(ma: &MaCoefficients, ident: &Identification, horizon: usize) -> Result<VdMatrix> {
    check_dims(ma, ident)?;
    if horizon == 0 || horizon > ma.horizon() {
        return Err(Error::invalid(format!(
            "horizon {horizon} outside 1..={} covered by the MA coefficients",
            ma.horizon()
        )));
    }
    let n = ma.n_series();
    let impact = scaled_impact(ident)?;
    let mut num = Array2::<f64>::zeros((n, n));
    let mut den = vec![0.0; n];
    for a in ma.iter().take(horizon) {
        let resp = a.dot(&impact);
        num.zip_mut_with(&resp, |acc, r| *acc += r * r);
        let a_sigma = a.dot(&ident.sigma);
        for (i, d) in den.iter_mut().enumerate() {
            *d += a_sigma.row(i).dot(&a.row(i));
        }
    }
    let mut theta_raw = num;
    for (i, mut row) in theta_raw.rows_mut().into_iter().enumerate() {
        if !(den[i] > 0.0) {
            return Err(Error::ZeroForecastVariance(i));
        }
        row.mapv_inplace(|v| v / den[i]);
    }
    let theta = row_normalize(&theta_raw);
    let ordering = match (&ident.scheme, &ident.cluster) {
        (Scheme::Clustered, Some(spec)) => VdOrdering::Fixed(spec.order().to_vec()),
        _ => VdOrdering::Natural,
    };
    Ok(VdMatrix {
        theta_raw,
        theta,
        horizon,
        scheme: ident.scheme,
        ordering,
    })
}

fn row_normalize(m: &Array2<f64>) -> Array2<f64> {
    let mut out = m.clone();
    for mut row in out.rows_mut() {
        let s = row.sum();
        row.mapv_inplace(|v| v / s);
    }
    out
}

/// Clustered decomposition averaged entrywise over all `C!` cluster orderings.
///
/// Each ordering's normalized `θ` is averaged (so rows still sum to one);
/// `theta_raw` is the average of the unnormalized matrices. Orderings are
/// evaluated in parallel and summed in lexicographic order.
pub fn vd_ordering_averaged(
    ma: &MaCoefficients,
    sigma: ndarray::ArrayView2<f64>,
    spec: &ClusterSpec,
    horizon: usize,
) -> Result<VdMatrix> {
    let c = spec.n_clusters();
    if c > MAX_AVERAGED_CLUSTERS {
        return Err(Error::TooManyOrderings { clusters: c });
    }
    let orders: Vec<Vec<usize>> = (0..c).permutations(c).collect();
    let parts: Vec<VdMatrix> = orders
        .into_par_iter()
        .map(|order| {
            let ident = clusterizer(sigma, &spec.with_order(order)?)?;
            vd(ma, &ident, horizon)
        })
        .collect::<Result<_>>()?;
    let count = parts.len() as f64;
    let n = ma.n_series();
    let (mut raw, mut theta) = (Array2::<f64>::zeros((n, n)), Array2::<f64>::zeros((n, n)));
    for p in &parts {
        raw += &p.theta_raw;
        theta += &p.theta;
    }
    Ok(VdMatrix {
        theta_raw: raw / count,
        theta: theta / count,
        horizon,
        scheme: Scheme::Clustered,
        ordering: VdOrdering::Averaged,
    })
}

/// How the clustered scheme treats cluster ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderingMode {
    /// Use the cluster spec's own order.
    Fixed,
    /// Average over every order.
    Averaged,
}

/// One decomposition for `scheme`, dispatching to ordering averaging when asked.
pub fn decompose(
    ma: &MaCoefficients,
    sigma: ndarray::ArrayView2<f64>,
    scheme: Scheme,
    spec: &ClusterSpec,
    mode: OrderingMode,
    horizon: usize,
) -> Result<VdMatrix> {
    if scheme == Scheme::Clustered && mode == OrderingMode::Averaged {
        return vd_ordering_averaged(ma, sigma, spec, horizon);
    }
    let ident = make_identification(sigma, scheme, Some(spec))?;
    vd(ma, &ident, horizon)
}
