use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use connectedness::io::write_price_csv;
use connectedness::synth::{synthetic_price_panel, SenderDesign, SynthConfig};

use crate::config::RunConfig;
use crate::error::CliError;

/// Writes `prices.csv` and a matching `config.toml` into `out`.
pub fn gen_synth(out: &Path, seed: u64, days: usize, cluster_sizes: Vec<usize>) -> Result<String, CliError> {
    if cluster_sizes.is_empty() || cluster_sizes.contains(&0) {
        return Err(CliError::Config("cluster sizes must be positive".into()));
    }
    if days < 30 {
        return Err(CliError::Config("at least 30 days are needed".into()));
    }
    let defaults = SynthConfig::default();
    let cfg = SynthConfig {
        design: SenderDesign {
            cluster_sizes,
            ..defaults.design
        },
        days,
        seed,
        ..defaults
    };
    let (panel, spec) = synthetic_price_panel(&cfg).map_err(|e| CliError::Data(e.to_string()))?;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out.display(), e))?;

    let path = out.join("prices.csv");
    let file = File::create(&path).map_err(|e| CliError::io(path.display(), e))?;
    let mut w = BufWriter::new(file);
    write_price_csv(&panel, &mut w).map_err(|e| CliError::io(path.display(), e))?;
    w.flush().map_err(|e| CliError::io(path.display(), e))?;

    let mut run = RunConfig {
        input: Some("prices.csv".into()),
        ..RunConfig::default()
    };
    for c in 0..spec.n_clusters() {
        let members = spec.members(c).into_iter().map(|i| panel.labels()[i].clone()).collect();
        run.clusters.insert(spec.names()[c].clone(), members);
    }
    let text = format!(
        "# Synthetic panel: cluster {} transmits to the others.\n{}",
        spec.names()[0],
        run.effective_toml()?
    );
    let path = out.join("config.toml");
    std::fs::write(&path, text).map_err(|e| CliError::io(path.display(), e))?;
    Ok(format!(
        "wrote {} days of prices for {} series ({} clusters) to {}",
        days,
        panel.labels().len(),
        spec.n_clusters(),
        out.display()
    ))
}
