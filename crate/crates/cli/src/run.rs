use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use connectedness::connect::{density_curve, Bandwidth, VdOrdering};
use connectedness::io;
use connectedness::returns::{daily_log_returns, summary_stats, weekly_aggregate};
use connectedness::rolling::{difference_series, roll, RollingConfig};
use connectedness::{
    decompose, fit_var, measures, ConnectednessReport, MaCoefficients, OrderingMode, Scheme, VarOptions,
};
use serde::Serialize;

use crate::config::{Mode, RunConfig};
use crate::error::CliError;

#[derive(Serialize)]
struct ReportDoc<'a> {
    scheme: Scheme,
    horizon: usize,
    ordering: &'a VdOrdering,
    labels: &'a [String],
    #[serde(flatten)]
    measures: &'a ConnectednessReport,
}

struct Output {
    dir: PathBuf,
    written: Vec<String>,
}

impl Output {
    fn write(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut BufWriter<File>) -> connectedness::Result<()>,
    ) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(path.display(), e))?;
        let mut w = BufWriter::new(file);
        f(&mut w).map_err(|e| CliError::io(path.display(), e))?;
        w.flush().map_err(|e| CliError::io(path.display(), e))?;
        self.written.push(name.to_string());
        Ok(())
    }
}

/// Runs the configured pipeline, writes every output into `out`, and returns the summary text.
pub fn run(cfg: &RunConfig, out: &Path, dump_model: bool) -> Result<String, CliError> {
    cfg.validate()?;
    let input = cfg.input.as_ref().expect("validated");
    let file = File::open(input).map_err(|e| CliError::io(input.display(), e))?;
    let prices = io::read_price_csv(std::io::BufReader::new(file), &cfg.date_column).map_err(CliError::data)?;
    let weekly = weekly_aggregate(&daily_log_returns(&prices).map_err(CliError::data)?).map_err(CliError::data)?;
    let labels = weekly.labels().to_vec();
    if labels.len() < 2 {
        return Err(CliError::Data("at least two series are needed".into()));
    }
    let spec = cfg.cluster_spec(&labels)?;
    let stats = summary_stats(&weekly).map_err(CliError::data)?;

    std::fs::create_dir_all(out).map_err(|e| CliError::io(out.display(), e))?;
    let mut output = Output {
        dir: out.to_path_buf(),
        written: Vec::new(),
    };
    output.write("stats.csv", |w| io::write_stats_csv(&stats, w))?;

    let var = VarOptions::with_lags(cfg.lags);
    let model = fit_var(&weekly, &var).map_err(CliError::estimation)?;
    let ma = MaCoefficients::from_model(&model, cfg.horizon).map_err(CliError::estimation)?;
    if dump_model {
        output.write("model.json", |w| io::write_model_json(&model, w))?;
    }

    let sizes = match &cfg.node_attributes {
        Some(path) => {
            let file = File::open(path).map_err(|e| CliError::io(path.display(), e))?;
            match io::read_node_sizes(std::io::BufReader::new(file)) {
                Ok(table) => io::align_node_sizes(&labels, &table),
                Err(e) => {
                    log::warn!("ignoring node attribute file {}: {e}", path.display());
                    None
                }
            }
        }
        None => None,
    };

    let mode = cfg.ordering_mode();
    let mut summary = String::new();
    let dates = weekly.dates();
    let _ = writeln!(
        summary,
        "{} series in {} clusters, {} weekly returns ({} to {})",
        labels.len(),
        spec.n_clusters(),
        weekly.n_obs(),
        dates[0],
        dates[dates.len() - 1]
    );
    let order_text = match mode {
        OrderingMode::Averaged => format!(
            "averaged over {} cluster orders",
            (1..=spec.n_clusters()).product::<usize>()
        ),
        OrderingMode::Fixed => {
            let names: Vec<&str> = spec.order().iter().map(|&c| spec.names()[c].as_str()).collect();
            format!("cluster order {}", names.join(" > "))
        }
    };
    let _ = writeln!(summary, "VAR({}), horizon {}, {order_text}", cfg.lags, cfg.horizon);
    let _ = writeln!(
        summary,
        "\n{:<16}{:>10}{:>10}{:>10}   top net transmitter",
        "scheme", "total", "within", "cross"
    );

    let mut cluster_lines = String::new();
    for &scheme in &cfg.schemes {
        let vd = decompose(&ma, model.sigma.view(), scheme, &spec, mode, cfg.horizon).map_err(CliError::estimation)?;
        let report = measures(&vd, &spec).map_err(CliError::estimation)?;
        let doc = ReportDoc {
            scheme,
            horizon: cfg.horizon,
            ordering: &vd.ordering,
            labels: &labels,
            measures: &report,
        };
        let curves = [
            ("to", density_curve(&report.to, Bandwidth::Auto, cfg.density_points)),
            ("from", density_curve(&report.from, Bandwidth::Auto, cfg.density_points)),
            ("net", density_curve(&report.net, Bandwidth::Auto, cfg.density_points)),
        ];
        let curves: Vec<(&str, connectedness::connect::DensityCurve)> = curves
            .into_iter()
            .map(|(n, c)| c.map(|c| (n, c)))
            .collect::<connectedness::Result<_>>()
            .map_err(CliError::estimation)?;
        let gexf = io::gexf_document(&vd, &report, &labels, &spec, sizes.as_deref(), cfg.edge_threshold)
            .map_err(CliError::estimation)?;

        output.write(&format!("vd_{scheme}.csv"), |w| {
            io::write_vd_csv(&vd, &report, &labels, w)
        })?;
        output.write(&format!("report_{scheme}.json"), |w| io::write_json(&doc, w))?;
        output.write(&format!("density_{scheme}.csv"), |w| {
            let refs: Vec<(&str, &connectedness::connect::DensityCurve)> =
                curves.iter().map(|(n, c)| (*n, c)).collect();
            io::write_density_csv(&refs, w)
        })?;
        output.write(&format!("network_{scheme}.gexf"), |w| Ok(w.write_all(gexf.as_bytes())?))?;

        let (top, top_net) =
            report.net.iter().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |best, (i, &v)| if v > best.1 { (i, v) } else { best },
            );
        let _ = writeln!(
            summary,
            "{:<16}{:>10.2}{:>10.2}{:>10.2}   {} ({:+.2})",
            scheme.name(),
            report.system_wide,
            report.within_cluster,
            report.cross_cluster,
            labels[top],
            top_net
        );
        if scheme == Scheme::Clustered {
            let _ = writeln!(
                cluster_lines,
                "\n{:<16}{:>10}{:>10}{:>11}{:>14}",
                "cluster", "own", "comove", "contagion", "regional net"
            );
            for (k, name) in report.clusters.iter().enumerate() {
                let _ = writeln!(
                    cluster_lines,
                    "{:<16}{:>10.3}{:>10.3}{:>11.3}{:>14.2}",
                    name, report.own[k], report.comove[k], report.contagion[k], report.regional_net[k]
                );
            }
        }
    }
    summary.push_str(&cluster_lines);

    if cfg.mode == Mode::Rolling {
        let rolling = RollingConfig {
            window: cfg.window,
            step: cfg.step,
            horizon: cfg.horizon,
            var,
            schemes: cfg.schemes.clone(),
            ordering: mode,
        };
        let series = roll(&weekly, &spec, &rolling).map_err(CliError::estimation)?;
        for &scheme in &cfg.schemes {
            output.write(&format!("rolling_{scheme}.csv"), |w| {
                io::write_rolling_csv(&series, scheme, &labels, spec.names(), w)
            })?;
        }
        if cfg.schemes.contains(&Scheme::Generalized) && cfg.schemes.contains(&Scheme::Clustered) {
            let diff = difference_series(&series).map_err(CliError::estimation)?;
            output.write("rolling_diff.csv", |w| io::write_difference_csv(&diff, w))?;
        }
        let _ = writeln!(
            summary,
            "\nrolling: {} windows of {} weeks, step {} ({} failed)",
            series.len(),
            cfg.window,
            cfg.step,
            series.failures.len()
        );
    }

    let effective = cfg.effective_toml()?;
    output.write("effective_config.toml", |w| Ok(w.write_all(effective.as_bytes())?))?;
    let _ = writeln!(summary, "\nwrote {} files to {}", output.written.len(), out.display());
    Ok(summary)
}
