//! Block-structured VAR data-generating processes for tests and demos.
//!
//! Structural shocks are correlated within clusters and independent across
//! them. Reduced-form shocks load on them through a unit block-lower-triangular
//! impact matrix, so the first cluster in the order can drive the others both
//! on impact and through the lag dynamics.

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::identify::ClusterSpec;
use crate::linalg;
use crate::returns::PricePanel;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockVarDgp {
    pub labels: Vec<String>,
    pub spec: ClusterSpec,
    /// Lag matrices `Φ_1 … Φ_P`.
    pub phi: Vec<Array2<f64>>,
    /// `u_t = impact · ε_t`.
    pub impact: Array2<f64>,
    /// Block-diagonal covariance of `ε_t`.
    pub shock_cov: Array2<f64>,
}

/// Parameters of a one-sender block design: cluster 0 transmits to every other cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct SenderDesign {
    pub cluster_sizes: Vec<usize>,
    /// Correlation of structural shocks inside a cluster.
    pub within_corr: f64,
    pub shock_sd: f64,
    /// Own first-lag coefficient on the diagonal.
    pub own_ar: f64,
    /// Lag-1 loading of every non-sender series on the sender cluster's mean.
    pub cross_lag: f64,
    /// Contemporaneous loading of non-sender shocks on the sender cluster's mean shock.
    pub cross_impact: f64,
}

impl Default for SenderDesign {
    fn default() -> Self {
        Self {
            cluster_sizes: vec![2, 2, 2],
            within_corr: 0.6,
            shock_sd: 0.02,
            own_ar: 0.05,
            cross_lag: 0.15,
            cross_impact: 0.8,
        }
    }
}

fn cluster_name(c: usize) -> String {
    ((b'A' + (c % 26) as u8) as char).to_string()
}

pub fn sender_dgp(design: &SenderDesign) -> BlockVarDgp {
    let n: usize = design.cluster_sizes.iter().sum();
    let mut assignment = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for (c, &size) in design.cluster_sizes.iter().enumerate() {
        for k in 0..size {
            assignment.push(c);
            labels.push(format!("{}{}", cluster_name(c), k + 1));
        }
    }
    let names = (0..design.cluster_sizes.len()).map(cluster_name).collect();
    let spec = ClusterSpec::new(names, assignment.clone(), None).expect("valid design");
    let senders: Vec<usize> = (0..n).filter(|&i| assignment[i] == 0).collect();
    let share = 1.0 / senders.len() as f64;

    let var = design.shock_sd * design.shock_sd;
    let mut shock_cov = Array2::zeros((n, n));
    let mut impact = Array2::<f64>::eye(n);
    let mut phi = Array2::<f64>::eye(n) * design.own_ar;
    for i in 0..n {
        for j in 0..n {
            if assignment[i] == assignment[j] {
                shock_cov[[i, j]] = if i == j { var } else { design.within_corr * var };
            }
        }
        if assignment[i] != 0 {
            for &s in &senders {
                impact[[i, s]] = design.cross_impact * share;
                phi[[i, s]] += design.cross_lag * share;
            }
        }
    }
    BlockVarDgp {
        labels,
        spec,
        phi: vec![phi],
        impact,
        shock_cov,
    }
}

impl BlockVarDgp {
    pub fn n_series(&self) -> usize {
        self.labels.len()
    }

    /// Reduced-form covariance `B Ω Bᵀ`.
    pub fn reduced_covariance(&self) -> Array2<f64> {
        self.impact.dot(&self.shock_cov).dot(&self.impact.t())
    }

    /// Simulates `t` observations after discarding `burn` warm-up draws.
    pub fn simulate<R: Rng>(&self, t: usize, burn: usize, rng: &mut R) -> Result<Array2<f64>> {
        let n = self.n_series();
        let loading = self.impact.dot(&linalg::cholesky(self.shock_cov.view())?);
        let lags = self.phi.len();
        let total = t + burn;
        let mut x = Array2::<f64>::zeros((total + lags, n));
        for r in lags..total + lags {
            let z: Array1<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let mut row = loading.dot(&z);
            for (p, phi_p) in self.phi.iter().enumerate() {
                row += &phi_p.dot(&x.row(r - p - 1));
            }
            x.row_mut(r).assign(&row);
        }
        Ok(x.slice(ndarray::s![burn + lags.., ..]).to_owned())
    }
}

/// Settings for a synthetic daily price panel.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub design: SenderDesign,
    /// Number of weekday rows to emit.
    pub days: usize,
    pub start: NaiveDate,
    /// Probability that an interior price cell is blanked out as a market holiday.
    pub missing_rate: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            design: SenderDesign {
                shock_sd: 0.01,
                ..SenderDesign::default()
            },
            days: 1300,
            start: NaiveDate::from_ymd_opt(2015, 1, 7).expect("valid date"),
            missing_rate: 0.01,
            seed: 7,
        }
    }
}

/// Weekday dates starting at `start` (skipped forward to a weekday).
pub fn business_days(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(count);
    let mut d = start;
    while out.len() < count {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

/// Reproducible daily price panel driven by [`sender_dgp`].
pub fn synthetic_price_panel(cfg: &SynthConfig) -> Result<(PricePanel, ClusterSpec)> {
    let dgp = sender_dgp(&cfg.design);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let returns = dgp.simulate(cfg.days.saturating_sub(1), 200, &mut rng)?;
    let n = dgp.n_series();
    let mut prices = Array2::zeros((cfg.days, n));
    for c in 0..n {
        let mut log_p = 100f64.ln();
        prices[[0, c]] = 100.0;
        for r in 1..cfg.days {
            log_p += returns[[r - 1, c]];
            prices[[r, c]] = log_p.exp();
        }
    }
    for r in 1..cfg.days.saturating_sub(1) {
        for c in 0..n {
            if rng.random::<f64>() < cfg.missing_rate {
                prices[[r, c]] = f64::NAN;
            }
        }
    }
    let panel = PricePanel::new(business_days(cfg.start, cfg.days), dgp.labels.clone(), prices)?;
    Ok((panel, dgp.spec))
}
