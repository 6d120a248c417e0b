//! Price ingestion, weekly Thursday-to-Wednesday log returns, and summary statistics.
//!
//! Missing prices are stored as `NaN`. A daily return is defined only on days
//! the series actually traded; it spans back to the most recent earlier price,
//! which is the same as forward-filling the price before differencing.

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};

/// Weeks per year used for annualization.
pub const WEEKS_PER_YEAR: f64 = 52.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel {
    dates: Vec<NaiveDate>,
    labels: Vec<String>,
    values: Array2<f64>,
}

impl PricePanel {
    /// Builds a panel; `NaN` cells are missing observations.
    pub fn new(dates: Vec<NaiveDate>, labels: Vec<String>, values: Array2<f64>) -> Result<Self> {
        if values.nrows() != dates.len() || values.ncols() != labels.len() {
            return Err(Error::dim(format!(
                "price values are {}x{} but there are {} dates and {} labels",
                values.nrows(),
                values.ncols(),
                dates.len(),
                labels.len()
            )));
        }
        check_increasing(&dates)?;
        for ((r, c), v) in values.indexed_iter() {
            if !v.is_nan() && !(*v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!(
                    "price for {} on {} must be positive, got {v}",
                    labels[c], dates[r]
                )));
            }
        }
        Ok(Self { dates, labels, values })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }
}

/// Daily log returns; `NaN` marks a day without a trade for that series.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyReturns {
    /// Date of the price the first row's returns are measured from.
    base_date: NaiveDate,
    dates: Vec<NaiveDate>,
    labels: Vec<String>,
    values: Array2<f64>,
}

impl DailyReturns {
    pub fn new(base_date: NaiveDate, dates: Vec<NaiveDate>, labels: Vec<String>, values: Array2<f64>) -> Result<Self> {
        if values.nrows() != dates.len() || values.ncols() != labels.len() {
            return Err(Error::dim("daily return values do not match the date/label axes"));
        }
        check_increasing(&dates)?;
        if dates.first().is_some_and(|d| *d <= base_date) {
            return Err(Error::invalid("base date must precede the first return date"));
        }
        Ok(Self {
            base_date,
            dates,
            labels,
            values,
        })
    }

    pub fn base_date(&self) -> NaiveDate {
        self.base_date
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }
}

/// A complete T×N panel of weekly log returns indexed by week-ending Wednesday.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    dates: Vec<NaiveDate>,
    labels: Vec<String>,
    values: Array2<f64>,
}

impl ReturnPanel {
    pub fn new(dates: Vec<NaiveDate>, labels: Vec<String>, values: Array2<f64>) -> Result<Self> {
        if values.nrows() != dates.len() || values.ncols() != labels.len() {
            return Err(Error::dim(format!(
                "return values are {}x{} but there are {} dates and {} labels",
                values.nrows(),
                values.ncols(),
                dates.len(),
                labels.len()
            )));
        }
        if values.is_empty() {
            return Err(Error::invalid("return panel needs at least one row and one series"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("return panel contains missing or non-finite cells"));
        }
        check_increasing(&dates)?;
        Ok(Self { dates, labels, values })
    }

    /// Panel with synthetic consecutive weekly dates, for simulated data.
    pub fn from_values(labels: Vec<String>, values: Array2<f64>) -> Result<Self> {
        let start = NaiveDate::from_ymd_opt(2000, 1, 5).expect("valid date");
        let dates = (0..values.nrows()).map(|i| start + Duration::weeks(i as i64)).collect();
        Self::new(dates, labels, values)
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn n_series(&self) -> usize {
        self.values.ncols()
    }

    pub fn n_obs(&self) -> usize {
        self.values.nrows()
    }

    /// Rows `start..end` as a new panel.
    pub fn slice_rows(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.n_obs() {
            return Err(Error::invalid(format!(
                "row range {start}..{end} outside panel of {} rows",
                self.n_obs()
            )));
        }
        Ok(Self {
            dates: self.dates[start..end].to_vec(),
            labels: self.labels.clone(),
            values: self.values.slice(ndarray::s![start..end, ..]).to_owned(),
        })
    }
}

fn check_increasing(dates: &[NaiveDate]) -> Result<()> {
    if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::invalid(format!(
            "dates must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// `r_t = log P_t − log P_prev`, where `P_prev` is the latest earlier observed price.
pub fn daily_log_returns(prices: &PricePanel) -> Result<DailyReturns> {
    let (rows, cols) = prices.values.dim();
    for (c, label) in prices.labels.iter().enumerate() {
        let observed = prices.values.column(c).iter().filter(|v| !v.is_nan()).count();
        if observed < 2 {
            return Err(Error::invalid(format!(
                "series {label} has {observed} observed prices; at least 2 are required"
            )));
        }
    }
    let mut out = Array2::from_elem((rows - 1, cols), f64::NAN);
    for c in 0..cols {
        let mut last: Option<f64> = None;
        for r in 0..rows {
            let p = prices.values[[r, c]];
            if p.is_nan() {
                continue;
            }
            if let (Some(prev), true) = (last, r > 0) {
                out[[r - 1, c]] = p.ln() - prev.ln();
            }
            last = Some(p);
        }
    }
    DailyReturns::new(prices.dates[0], prices.dates[1..].to_vec(), prices.labels.clone(), out)
}

/// The Wednesday closing the Thursday-to-Wednesday week that contains `date`.
pub fn week_ending(date: NaiveDate) -> NaiveDate {
    let wd = date.weekday().num_days_from_monday() as i64;
    let wed = Weekday::Wed.num_days_from_monday() as i64;
    date + Duration::days((wed - wd).rem_euclid(7))
}

/// Sums daily log returns over Thursday-to-Wednesday weeks.
///
/// A week is kept only if the panel covers it entirely (a price on or before
/// the previous Wednesday and data through its Wednesday) and every series
/// traded at least once in it.
pub fn weekly_aggregate(daily: &DailyReturns) -> Result<ReturnPanel> {
    let cols = daily.labels.len();
    let Some(&last_date) = daily.dates.last() else {
        return Err(Error::invalid("no daily returns to aggregate"));
    };
    let mut week_dates = Vec::new();
    let mut rows: Vec<f64> = Vec::new();

    let mut r = 0;
    while r < daily.dates.len() {
        let wend = week_ending(daily.dates[r]);
        let mut sums = vec![0.0; cols];
        let mut counts = vec![0usize; cols];
        while r < daily.dates.len() && week_ending(daily.dates[r]) == wend {
            for c in 0..cols {
                let v = daily.values[[r, c]];
                if !v.is_nan() {
                    sums[c] += v;
                    counts[c] += 1;
                }
            }
            r += 1;
        }
        let covered = daily.base_date <= wend - Duration::days(7) && last_date >= wend;
        if covered && counts.iter().all(|&k| k > 0) {
            week_dates.push(wend);
            rows.extend_from_slice(&sums);
        }
    }
    if week_dates.is_empty() {
        return Err(Error::invalid(
            "no complete Thursday-to-Wednesday week in the daily panel",
        ));
    }
    let values = Array2::from_shape_vec((week_dates.len(), cols), rows).map_err(|e| Error::dim(e.to_string()))?;
    ReturnPanel::new(week_dates, daily.labels.clone(), values)
}

/// Annualized summary statistics for one series.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesStats {
    pub label: String,
    /// Annualized mean, percent.
    pub mean: f64,
    /// Annualized standard deviation, percent.
    pub std: f64,
    /// `mean / std`; `None` for a constant series.
    pub info: Option<f64>,
    pub skew: Option<f64>,
    /// Raw (not excess) kurtosis.
    pub kurt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStats {
    pub series: Vec<SeriesStats>,
}

pub fn summary_stats(panel: &ReturnPanel) -> Result<SummaryStats> {
    if panel.n_obs() < 4 {
        return Err(Error::invalid(format!(
            "summary statistics need at least 4 weekly observations, got {}",
            panel.n_obs()
        )));
    }
    let series = panel
        .labels
        .iter()
        .zip(panel.values.columns())
        .map(|(label, col)| series_stats(label, col))
        .collect();
    Ok(SummaryStats { series })
}

fn series_stats(label: &str, col: ArrayView1<f64>) -> SeriesStats {
    let n = col.len() as f64;
    let mean = col.sum() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in col {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let sample_var = m2 / (n - 1.0);
    let (m2, m3, m4) = (m2 / n, m3 / n, m4 / n);

    let ann_mean = 100.0 * WEEKS_PER_YEAR * mean;
    let ann_std = 100.0 * WEEKS_PER_YEAR.sqrt() * sample_var.sqrt();
    let degenerate = !(m2 > 0.0) || ann_std == 0.0;
    SeriesStats {
        label: label.to_string(),
        mean: ann_mean,
        std: ann_std,
        info: (!degenerate).then(|| ann_mean / ann_std),
        skew: (!degenerate).then(|| m3 / m2.powf(1.5)),
        kurt: (!degenerate).then(|| m4 / (m2 * m2)),
    }
}
