//! Gaussian kernel density estimates of cross-node measure distributions.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Bandwidths below this fraction of the data range are raised to it.
const BANDWIDTH_FLOOR: f64 = 1e-6;

/// Grid half-margin beyond the data, in bandwidths.
const GRID_MARGIN: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    Fixed(f64),
    /// Silverman's rule of thumb, `1.06 σ̂ n^{-1/5}`.
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityCurve {
    pub bandwidth: f64,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
}

/// Silverman bandwidth with a floor of `1e-6` times the data range.
///
/// For all-equal data the range is zero, so the floor falls back to `1e-6`
/// times the magnitude of the common value (or `1e-6` when that is zero).
pub fn silverman_bandwidth(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let h = 1.06 * var.sqrt() * n.powf(-0.2);
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    let range = hi - lo;
    let floor = if range > 0.0 {
        BANDWIDTH_FLOOR * range
    } else {
        BANDWIDTH_FLOOR * mean.abs().max(1.0)
    };
    h.max(floor)
}

fn resolve(values: &[f64], bandwidth: Bandwidth) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::invalid("density estimation needs at least two values"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("density estimation needs finite values"));
    }
    match bandwidth {
        Bandwidth::Fixed(h) if h > 0.0 && h.is_finite() => Ok(h),
        Bandwidth::Fixed(h) => Err(Error::invalid(format!("bandwidth must be positive, got {h}"))),
        Bandwidth::Auto => Ok(silverman_bandwidth(values)),
    }
}

/// Gaussian KDE evaluated at each grid point.
pub fn kde_density(values: &[f64], grid: &[f64], bandwidth: Bandwidth) -> Result<Vec<f64>> {
    let h = resolve(values, bandwidth)?;
    Ok(evaluate(values, grid, h))
}

fn evaluate(values: &[f64], grid: &[f64], h: f64) -> Vec<f64> {
    let norm = 1.0 / (values.len() as f64 * h * (2.0 * PI).sqrt());
    grid.iter()
        .map(|&x| {
            norm * values
                .iter()
                .map(|&v| {
                    let z = (x - v) / h;
                    (-0.5 * z * z).exp()
                })
                .sum::<f64>()
        })
        .collect()
}

/// Density over an evenly spaced grid spanning the data plus five bandwidths each side.
pub fn density_curve(values: &[f64], bandwidth: Bandwidth, points: usize) -> Result<DensityCurve> {
    let h = resolve(values, bandwidth)?;
    if points < 2 {
        return Err(Error::invalid("density grid needs at least two points"));
    }
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min) - GRID_MARGIN * h;
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + GRID_MARGIN * h;
    let step = (hi - lo) / (points - 1) as f64;
    let grid: Vec<f64> = (0..points).map(|i| lo + step * i as f64).collect();
    let density = evaluate(values, &grid, h);
    Ok(DensityCurve {
        bandwidth: h,
        grid,
        density,
    })
}
