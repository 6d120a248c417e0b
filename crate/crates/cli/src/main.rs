#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod error;
mod run;
mod synth;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use connectedness::Scheme;

use config::{Mode, RunConfig};
use error::CliError;

#[derive(Parser)]
#[command(
    name = "connectedness",
    version,
    about = "Clustered variance-decomposition connectedness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate connectedness for a daily price panel.
    Run(RunArgs),
    /// Write a reproducible synthetic price panel and a matching config.
    GenSynth(SynthArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Daily price CSV; overrides `input` in the config.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// clustered, generalized, orthogonalized, or all.
    #[arg(long)]
    scheme: Option<String>,
    /// `average` or a comma-separated cluster order.
    #[arg(long)]
    order: Option<String>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    lags: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    step: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the fitted VAR to model.json.
    #[arg(long)]
    dump_model: bool,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Number of weekday price rows.
    #[arg(long, default_value_t = 1300)]
    days: usize,
    /// Comma-separated cluster sizes; the first cluster transmits to the rest.
    #[arg(long, default_value = "2,2,2", value_delimiter = ',')]
    clusters: Vec<usize>,
}

fn parse_schemes(s: &str) -> Result<Vec<Scheme>, CliError> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(Scheme::ALL.to_vec());
    }
    s.split(',')
        .map(|p| p.parse::<Scheme>().map_err(|e| CliError::Config(e.to_string())))
        .collect()
}

fn build_config(args: &RunArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(p) = &args.input {
        cfg.input = Some(p.clone());
    }
    if let Some(m) = args.mode {
        cfg.mode = m;
    }
    if let Some(s) = &args.scheme {
        cfg.schemes = parse_schemes(s)?;
    }
    if let Some(o) = &args.order {
        cfg.order = o.clone();
    }
    if let Some(h) = args.horizon {
        cfg.horizon = h;
    }
    if let Some(p) = args.lags {
        cfg.lags = p;
    }
    if let Some(w) = args.window {
        cfg.window = w;
    }
    if let Some(s) = args.step {
        cfg.step = s;
    }
    if let Some(o) = &args.out {
        cfg.out = Some(o.clone());
    }
    if let Some(input) = &cfg.input {
        cfg.input = Some(std::path::absolute(input).map_err(|e| CliError::io(input.display(), e))?);
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Run(args) => {
            let cfg = build_config(&args)?;
            let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("connectedness-out"));
            run::run(&cfg, &out, args.dump_model)
        }
        Command::GenSynth(args) => synth::gen_synth(&args.out, args.seed, args.days, args.clusters),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(1);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match execute(cli) {
        Ok(summary) => {
            print!("{summary}");
            if !summary.ends_with('\n') {
                println!();
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
