//! Text formats: price input, result tables, JSON reports, and GEXF networks.
//!
//! Numbers are written with a fixed number of significant digits, `.` as the
//! decimal separator, and LF line endings.

use std::fmt::Write as _;
use std::io::{Read, Write};

use chrono::NaiveDate;
use ndarray::Array2;
use serde::Serialize;

use crate::connect::{ConnectednessReport, DensityCurve, VdMatrix};
use crate::error::{Error, Result};
use crate::identify::ClusterSpec;
use crate::returns::{PricePanel, SummaryStats};
use crate::rolling::{DifferenceSeries, MeasureSeries};
use crate::varnet::VarModel;

/// Significant digits for every numeric output except summary statistics.
pub const DIGITS: usize = 10;
pub const STATS_DIGITS: usize = 6;
/// Edges lighter than this are left out of network files.
pub const DEFAULT_EDGE_THRESHOLD: f64 = 1e-4;

/// `%g`-style formatting with `digits` significant digits and trailing zeros trimmed.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{}", trim_zeros(mantissa), exp)
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn num(x: f64) -> String {
    format_sig(x, DIGITS)
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

/// Reads a `date,<label1>,...` price table. Empty cells are missing prices.
pub fn read_price_csv<R: Read>(reader: R, date_column: &str) -> Result<PricePanel> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let date_idx = headers
        .iter()
        .position(|h| h == date_column)
        .ok_or_else(|| Error::invalid(format!("no `{date_column}` column in price file")))?;
    let labels: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != date_idx)
        .map(|(_, h)| h.to_string())
        .collect();
    if labels.is_empty() {
        return Err(Error::invalid("price file has no series columns"));
    }
    let mut dates = Vec::new();
    let mut cells = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let line = row + 2;
        let date = NaiveDate::parse_from_str(&record[date_idx], "%Y-%m-%d")
            .map_err(|e| Error::invalid(format!("line {line}: bad date `{}`: {e}", &record[date_idx])))?;
        dates.push(date);
        for (i, field) in record.iter().enumerate() {
            if i == date_idx {
                continue;
            }
            let v = if field.is_empty() {
                f64::NAN
            } else {
                field
                    .parse::<f64>()
                    .map_err(|_| Error::invalid(format!("line {line}: `{field}` is not a number")))?
            };
            cells.push(v);
        }
    }
    let values = Array2::from_shape_vec((dates.len(), labels.len()), cells).map_err(|e| Error::dim(e.to_string()))?;
    PricePanel::new(dates, labels, values)
}

pub fn write_price_csv<W: Write>(panel: &PricePanel, w: W) -> Result<()> {
    let mut out = csv_writer(w);
    let mut header = vec!["date".to_string()];
    header.extend(panel.labels().iter().cloned());
    out.write_record(&header)?;
    for (date, row) in panel.dates().iter().zip(panel.values().rows()) {
        let mut rec = vec![date.to_string()];
        rec.extend(row.iter().map(|&v| if v.is_nan() { String::new() } else { num(v) }));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a `label,size` node attribute table.
pub fn read_node_sizes<R: Read>(reader: R) -> Result<Vec<(String, f64)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        if record.len() < 2 {
            return Err(Error::invalid("node attribute rows need `label,size`"));
        }
        let size = record[1]
            .parse::<f64>()
            .map_err(|_| Error::invalid(format!("bad size `{}` for `{}`", &record[1], &record[0])))?;
        out.push((record[0].to_string(), size));
    }
    Ok(out)
}

/// Orders node sizes by `labels`; returns `None` with a warning if any label is missing.
pub fn align_node_sizes(labels: &[String], sizes: &[(String, f64)]) -> Option<Vec<f64>> {
    let aligned: Option<Vec<f64>> = labels
        .iter()
        .map(|l| sizes.iter().find(|(k, _)| k == l).map(|&(_, v)| v))
        .collect();
    if aligned.is_none() {
        log::warn!("node attribute file does not cover every series; size attribute omitted");
    }
    aligned
}

pub fn write_stats_csv<W: Write>(stats: &SummaryStats, w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["label", "mean", "std", "info", "skew", "kurt"])?;
    let opt = |v: Option<f64>| v.map(|x| format_sig(x, STATS_DIGITS)).unwrap_or_default();
    for s in &stats.series {
        out.write_record([
            s.label.clone(),
            format_sig(s.mean, STATS_DIGITS),
            format_sig(s.std, STATS_DIGITS),
            opt(s.info),
            opt(s.skew),
            opt(s.kurt),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Connectedness table in percent: `θ` with a `from` column and `to`/`net` rows.
///
/// The bottom-right cell of the `to` row holds system-wide connectedness.
pub fn write_vd_csv<W: Write>(vd: &VdMatrix, report: &ConnectednessReport, labels: &[String], w: W) -> Result<()> {
    let n = vd.n_series();
    if labels.len() != n {
        return Err(Error::dim("label count does not match the decomposition"));
    }
    let mut out = csv_writer(w);
    let mut header = vec![String::new()];
    header.extend(labels.iter().cloned());
    header.push("from".into());
    out.write_record(&header)?;
    for (i, label) in labels.iter().enumerate() {
        let mut rec = vec![label.clone()];
        rec.extend(vd.theta.row(i).iter().map(|&v| num(100.0 * v)));
        rec.push(num(report.from[i]));
        out.write_record(&rec)?;
    }
    let mut to = vec!["to".to_string()];
    to.extend(report.to.iter().map(|&v| num(v)));
    to.push(num(report.system_wide));
    out.write_record(&to)?;
    let mut net = vec!["net".to_string()];
    net.extend(report.net.iter().map(|&v| num(v)));
    net.push(String::new());
    out.write_record(&net)?;
    out.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize, W: Write>(value: &T, mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}

/// Long-format density table `measure,x,density`.
pub fn write_density_csv<W: Write>(curves: &[(&str, &DensityCurve)], w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["measure", "x", "density"])?;
    for (name, curve) in curves {
        for (x, d) in curve.grid.iter().zip(&curve.density) {
            out.write_record([name.to_string(), num(*x), num(*d)])?;
        }
    }
    out.flush()?;
    Ok(())
}

fn escape_xml(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Directed GEXF 1.3 graph. Edge `j → i` carries weight `θ_ij` and the pair
/// average `(θ_ij + θ_ji)/2`; self-loops and edges below `threshold` are dropped.
pub fn gexf_document(
    vd: &VdMatrix,
    report: &ConnectednessReport,
    labels: &[String],
    spec: &ClusterSpec,
    sizes: Option<&[f64]>,
    threshold: f64,
) -> Result<String> {
    let n = vd.n_series();
    if labels.len() != n || report.net.len() != n || spec.n_series() != n {
        return Err(Error::dim("labels, report, and decomposition disagree on node count"));
    }
    if sizes.is_some_and(|s| s.len() != n) {
        return Err(Error::dim("node size count does not match the decomposition"));
    }
    let theta = &vd.theta;
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str(
        "<gexf xmlns=\"http://gexf.net/1.3\" \
         xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" \
         xsi:schemaLocation=\"http://gexf.net/1.3 http://gexf.net/1.3/gexf.xsd\" version=\"1.3\">\n",
    );
    s.push_str("  <meta>\n    <creator>connectedness</creator>\n");
    let _ = writeln!(
        s,
        "    <description>{} variance decomposition, horizon {}</description>",
        vd.scheme, vd.horizon
    );
    s.push_str("  </meta>\n");
    s.push_str("  <graph defaultedgetype=\"directed\" mode=\"static\">\n");
    s.push_str("    <attributes class=\"node\" mode=\"static\">\n");
    s.push_str("      <attribute id=\"net\" title=\"net\" type=\"double\"/>\n");
    s.push_str("      <attribute id=\"cluster\" title=\"cluster\" type=\"string\"/>\n");
    if sizes.is_some() {
        s.push_str("      <attribute id=\"size\" title=\"size\" type=\"double\"/>\n");
    }
    s.push_str("    </attributes>\n");
    s.push_str("    <attributes class=\"edge\" mode=\"static\">\n");
    s.push_str("      <attribute id=\"pair_avg\" title=\"pair_avg\" type=\"double\"/>\n");
    s.push_str("    </attributes>\n");

    s.push_str("    <nodes>\n");
    for (i, label) in labels.iter().enumerate() {
        let _ = writeln!(s, "      <node id=\"{i}\" label=\"{}\">", escape_xml(label));
        s.push_str("        <attvalues>\n");
        let _ = writeln!(s, "          <attvalue for=\"net\" value=\"{}\"/>", num(report.net[i]));
        let _ = writeln!(
            s,
            "          <attvalue for=\"cluster\" value=\"{}\"/>",
            escape_xml(&spec.names()[spec.cluster_of(i)])
        );
        if let Some(sizes) = sizes {
            let _ = writeln!(s, "          <attvalue for=\"size\" value=\"{}\"/>", num(sizes[i]));
        }
        s.push_str("        </attvalues>\n      </node>\n");
    }
    s.push_str("    </nodes>\n");

    s.push_str("    <edges>\n");
    let mut id = 0usize;
    for j in 0..n {
        for i in 0..n {
            let w = theta[[i, j]];
            if i == j || !(w >= threshold) {
                continue;
            }
            let pair = 0.5 * (theta[[i, j]] + theta[[j, i]]);
            let _ = writeln!(
                s,
                "      <edge id=\"{id}\" source=\"{j}\" target=\"{i}\" weight=\"{}\">",
                num(w)
            );
            let _ = writeln!(
                s,
                "        <attvalues>\n          <attvalue for=\"pair_avg\" value=\"{}\"/>\n        </attvalues>",
                num(pair)
            );
            s.push_str("      </edge>\n");
            id += 1;
        }
    }
    s.push_str("    </edges>\n  </graph>\n</gexf>\n");
    Ok(s)
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Rolling measures for one scheme; failed windows are blank rows.
pub fn write_rolling_csv<W: Write>(
    series: &MeasureSeries,
    scheme: crate::identify::Scheme,
    labels: &[String],
    clusters: &[String],
    w: W,
) -> Result<()> {
    let reports = series
        .scheme(scheme)
        .ok_or_else(|| Error::MissingScheme(scheme.to_string()))?;
    let mut out = csv_writer(w);
    let mut header: Vec<String> = ["date", "system_wide", "within", "cross"].map(String::from).to_vec();
    for l in labels {
        header.extend([format!("{l}_to"), format!("{l}_from"), format!("{l}_net")]);
    }
    header.extend(clusters.iter().map(|c| format!("{c}_net")));
    out.write_record(&header)?;
    let width = header.len();
    for (date, report) in series.dates.iter().zip(reports) {
        let mut rec = Vec::with_capacity(width);
        rec.push(date.to_string());
        match report {
            Some(r) => {
                rec.extend([r.system_wide, r.within_cluster, r.cross_cluster].map(num));
                for i in 0..labels.len() {
                    rec.extend([r.to[i], r.from[i], r.net[i]].map(num));
                }
                rec.extend(r.regional_net.iter().map(|&v| num(v)));
            }
            None => rec.resize(width, String::new()),
        }
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_difference_csv<W: Write>(diff: &DifferenceSeries, w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["date", "total_diff", "within_diff", "cross_diff"])?;
    for k in 0..diff.dates.len() {
        out.write_record([
            diff.dates[k].to_string(),
            opt_num(diff.total[k]),
            opt_num(diff.within[k]),
            opt_num(diff.cross[k]),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ModelDump<'a> {
    labels: &'a [String],
    lags: usize,
    intercept: Vec<f64>,
    phi: Vec<Vec<Vec<f64>>>,
    sigma: Vec<Vec<f64>>,
    residuals: Vec<Vec<f64>>,
    lambda: Vec<f64>,
}

fn rows(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

/// Coefficients, covariance, residuals, and chosen penalties as JSON.
pub fn write_model_json<W: Write>(model: &VarModel, w: W) -> Result<()> {
    let dump = ModelDump {
        labels: &model.labels,
        lags: model.lags(),
        intercept: model.intercept.to_vec(),
        phi: model.phi.iter().map(rows).collect(),
        sigma: rows(&model.sigma),
        residuals: rows(&model.residuals),
        lambda: model.penalty.chosen(),
    };
    write_json(&dump, w)
}
