//! Rolling-window re-estimation of the full connectedness pipeline.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use rayon::prelude::*;

use crate::connect::{decompose, measures, ConnectednessReport, OrderingMode};
use crate::error::{Error, Result};
use crate::identify::{ClusterSpec, MaCoefficients, Scheme};
use crate::returns::ReturnPanel;
use crate::varnet::{fit_var, VarOptions};

/// Default rolling window, two years of weekly data.
pub const DEFAULT_WINDOW: usize = 104;

#[derive(Debug, Clone, PartialEq)]
pub struct RollingConfig {
    pub window: usize,
    pub step: usize,
    pub horizon: usize,
    pub var: VarOptions,
    pub schemes: Vec<Scheme>,
    pub ordering: OrderingMode,
}

impl RollingConfig {
    /// Weekly step, clustered (ordering-averaged) and generalized schemes.
    pub fn new(window: usize, lags: usize, horizon: usize) -> Self {
        Self {
            window,
            step: 1,
            horizon,
            var: VarOptions::with_lags(lags),
            schemes: vec![Scheme::Clustered, Scheme::Generalized],
            ordering: OrderingMode::Averaged,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window <= self.var.lags + 10 {
            return Err(Error::invalid(format!(
                "window {} must exceed lag order plus 10 ({})",
                self.window,
                self.var.lags + 10
            )));
        }
        if self.step == 0 || self.horizon == 0 {
            return Err(Error::invalid("step and horizon must be at least 1"));
        }
        if self.schemes.is_empty() {
            return Err(Error::invalid("at least one identification scheme is required"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowFailure {
    pub window: usize,
    pub date: NaiveDate,
    pub scheme: Option<Scheme>,
    pub message: String,
}

/// Connectedness measures per window end, one sequence per scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSeries {
    pub dates: Vec<NaiveDate>,
    /// Panel row index of each window's last observation.
    pub end_index: Vec<usize>,
    /// `None` marks a window that could not be estimated for that scheme.
    pub reports: BTreeMap<Scheme, Vec<Option<ConnectednessReport>>>,
    pub failures: Vec<WindowFailure>,
}

impl MeasureSeries {
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn scheme(&self, scheme: Scheme) -> Option<&[Option<ConnectednessReport>]> {
        self.reports.get(&scheme).map(|v| v.as_slice())
    }
}

type WindowOutcome = (Vec<Option<ConnectednessReport>>, Vec<(Option<Scheme>, String)>);

fn estimate_window(panel: &ReturnPanel, spec: &ClusterSpec, cfg: &RollingConfig, end: usize) -> WindowOutcome {
    let missing = || vec![None; cfg.schemes.len()];
    let sub = match panel.slice_rows(end - cfg.window, end) {
        Ok(s) => s,
        Err(e) => return (missing(), vec![(None, e.to_string())]),
    };
    let model = match fit_var(&sub, &cfg.var) {
        Ok(m) => m,
        Err(e) => return (missing(), vec![(None, e.to_string())]),
    };
    let ma = match MaCoefficients::from_model(&model, cfg.horizon) {
        Ok(m) => m,
        Err(e) => return (missing(), vec![(None, e.to_string())]),
    };
    let mut failures = Vec::new();
    let reports = cfg
        .schemes
        .iter()
        .map(|&scheme| {
            decompose(&ma, model.sigma.view(), scheme, spec, cfg.ordering, cfg.horizon)
                .and_then(|vd| measures(&vd, spec))
                .map_err(|e| failures.push((Some(scheme), e.to_string())))
                .ok()
        })
        .collect();
    (reports, failures)
}

/// Estimates every window `(t − window, t]` for `t = window, window + step, …, T`.
///
/// Windows run in parallel; a window that fails is kept as a gap with a
/// diagnostic. Fails only if no window succeeds for any scheme.
pub fn roll(panel: &ReturnPanel, spec: &ClusterSpec, cfg: &RollingConfig) -> Result<MeasureSeries> {
    cfg.validate()?;
    let t = panel.n_obs();
    if t < cfg.window {
        return Err(Error::invalid(format!(
            "panel has {t} rows, fewer than the window of {}",
            cfg.window
        )));
    }
    if spec.n_series() != panel.n_series() {
        return Err(Error::dim("cluster spec does not match the panel's series"));
    }
    let ends: Vec<usize> = (cfg.window..=t).step_by(cfg.step).collect();
    let outcomes: Vec<WindowOutcome> = ends
        .par_iter()
        .map(|&end| estimate_window(panel, spec, cfg, end))
        .collect();

    let mut reports: BTreeMap<Scheme, Vec<Option<ConnectednessReport>>> = cfg
        .schemes
        .iter()
        .map(|&s| (s, Vec::with_capacity(ends.len())))
        .collect();
    let mut failures = Vec::new();
    let mut any = false;
    for (k, (window_reports, window_failures)) in outcomes.into_iter().enumerate() {
        let date = panel.dates()[ends[k] - 1];
        for (scheme, message) in window_failures {
            log::warn!("window ending {date}: {message}");
            failures.push(WindowFailure {
                window: k,
                date,
                scheme,
                message,
            });
        }
        for (&scheme, report) in cfg.schemes.iter().zip(window_reports) {
            any |= report.is_some();
            reports.get_mut(&scheme).expect("scheme registered").push(report);
        }
    }
    if !any {
        return Err(Error::NoWindows);
    }
    Ok(MeasureSeries {
        dates: ends.iter().map(|&e| panel.dates()[e - 1]).collect(),
        end_index: ends.iter().map(|&e| e - 1).collect(),
        reports,
        failures,
    })
}

/// Generalized-minus-clustered differences of the system-wide measures.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceSeries {
    pub dates: Vec<NaiveDate>,
    pub total: Vec<Option<f64>>,
    pub within: Vec<Option<f64>>,
    pub cross: Vec<Option<f64>>,
}

pub fn difference_series(series: &MeasureSeries) -> Result<DifferenceSeries> {
    difference_between(series, Scheme::Generalized, Scheme::Clustered)
}

/// Pointwise `minuend − subtrahend` for system-wide, within, and cross connectedness.
pub fn difference_between(series: &MeasureSeries, minuend: Scheme, subtrahend: Scheme) -> Result<DifferenceSeries> {
    let a = series
        .scheme(minuend)
        .ok_or_else(|| Error::MissingScheme(minuend.to_string()))?;
    let b = series
        .scheme(subtrahend)
        .ok_or_else(|| Error::MissingScheme(subtrahend.to_string()))?;
    let diff = |f: fn(&ConnectednessReport) -> f64| -> Vec<Option<f64>> {
        a.iter()
            .zip(b)
            .map(|(x, y)| match (x, y) {
                (Some(x), Some(y)) => Some(f(x) - f(y)),
                _ => None,
            })
            .collect()
    };
    Ok(DifferenceSeries {
        dates: series.dates.clone(),
        total: diff(|r| r.system_wide),
        within: diff(|r| r.within_cluster),
        cross: diff(|r| r.cross_cluster),
    })
}
