use std::path::{Path, PathBuf};

use connectedness::{ClusterSpec, OrderingMode, Scheme};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Full,
    Rolling,
}

/// Run settings as read from TOML; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    pub date_column: String,
    pub lags: usize,
    pub horizon: usize,
    pub schemes: Vec<Scheme>,
    /// `"average"` or a comma-separated list of cluster names.
    pub order: String,
    pub mode: Mode,
    pub window: usize,
    pub step: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// CSV with `label,size` columns, exported as a GEXF node attribute.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node_attributes: Option<PathBuf>,
    pub edge_threshold: f64,
    pub density_points: usize,
    pub clusters: IndexMap<String, Vec<String>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            date_column: "date".into(),
            lags: 3,
            horizon: 12,
            schemes: Scheme::ALL.to_vec(),
            order: "average".into(),
            mode: Mode::Full,
            window: connectedness::rolling::DEFAULT_WINDOW,
            step: 1,
            out: None,
            node_attributes: None,
            edge_threshold: connectedness::io::DEFAULT_EDGE_THRESHOLD,
            density_points: 512,
            clusters: IndexMap::new(),
        }
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl RunConfig {
    /// Parses a TOML file; relative paths are taken relative to its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.input = cfg.input.map(|p| resolve(base, &p));
        cfg.node_attributes = cfg.node_attributes.map(|p| resolve(base, &p));
        cfg.out = cfg.out.map(|p| resolve(base, &p));
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.input.is_none() {
            return bad("no input price file given".into());
        }
        if self.lags == 0 || self.horizon == 0 {
            return bad("lags and horizon must be at least 1".into());
        }
        if self.schemes.is_empty() {
            return bad("at least one scheme is required".into());
        }
        if self.mode == Mode::Rolling && (self.window <= self.lags + 10 || self.step == 0) {
            return bad(format!(
                "rolling window {} must exceed lags + 10 and step must be positive",
                self.window
            ));
        }
        if !(self.edge_threshold >= 0.0) || self.density_points < 2 {
            return bad("edge_threshold must be non-negative and density_points at least 2".into());
        }
        if self.schemes.contains(&Scheme::Clustered) && self.clusters.is_empty() {
            return bad("the clustered scheme needs a [clusters] table".into());
        }
        self.ordering()?;
        Ok(())
    }

    /// Explicit cluster order, or `None` for averaging over every order.
    pub fn ordering(&self) -> Result<Option<Vec<String>>, CliError> {
        let order = self.order.trim();
        if order.eq_ignore_ascii_case("average") {
            return Ok(None);
        }
        let names: Vec<String> = order.split(',').map(|s| s.trim().to_string()).collect();
        if names.iter().any(String::is_empty) {
            return Err(CliError::Config(format!("cannot parse cluster order `{order}`")));
        }
        Ok(Some(names))
    }

    pub fn ordering_mode(&self) -> OrderingMode {
        match self.ordering() {
            Ok(Some(_)) => OrderingMode::Fixed,
            _ => OrderingMode::Averaged,
        }
    }

    /// Cluster spec for `labels`; one all-inclusive cluster if none is configured.
    pub fn cluster_spec(&self, labels: &[String]) -> Result<ClusterSpec, CliError> {
        if self.clusters.is_empty() {
            return Ok(ClusterSpec::single(labels.len()));
        }
        let groups: Vec<(String, Vec<String>)> = self.clusters.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        let order = self.ordering()?;
        ClusterSpec::from_groups(labels, &groups, order.as_deref()).map_err(|e| CliError::Config(e.to_string()))
    }

    /// TOML for reproducing the run, without the output directory.
    pub fn effective_toml(&self) -> Result<String, CliError> {
        let mut cfg = self.clone();
        cfg.out = None;
        toml::to_string(&cfg).map_err(|e| CliError::Config(e.to_string()))
    }
}
