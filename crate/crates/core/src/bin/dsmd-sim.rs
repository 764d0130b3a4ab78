use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dsmd::harness::{run_experiment, Algorithm, ExperimentConfig};
use dsmd::SetKind;

/// Run a Monte Carlo experiment and write metrics.csv and summary.json.
///
/// Flags override values read from `--config`.
#[derive(Parser, Debug)]
#[command(name = "dsmd-sim", version)]
struct Args {
    /// TOML experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// dsmd, epoch-dsmd or dsps.
    #[arg(long)]
    algorithm: Option<Algorithm>,
    /// simplex or box.
    #[arg(long, value_parser = parse_constraint)]
    constraint: Option<SetKind>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    /// Gradient noise standard deviation.
    #[arg(long)]
    sigma: Option<f64>,
    /// Horizon T.
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    activation: Option<f64>,
    #[arg(long = "window-B")]
    window: Option<usize>,
    /// Output directory.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Comma-separated checkpoint rounds.
    #[arg(long, value_delimiter = ',')]
    checkpoints: Option<Vec<usize>>,
}

fn parse_constraint(s: &str) -> Result<SetKind, String> {
    match s {
        "simplex" => Ok(SetKind::Simplex),
        "box" => Ok(SetKind::Box),
        other => Err(format!("unknown constraint `{other}` (simplex, box)")),
    }
}

fn build(args: Args) -> dsmd::Result<ExperimentConfig> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::study(
            args.algorithm.unwrap_or(Algorithm::Dsmd),
            args.constraint.unwrap_or(SetKind::Box),
            args.sigma.unwrap_or(0.25),
            args.iters.unwrap_or(4096),
        ),
    };
    if let Some(v) = args.algorithm {
        config.algorithm = v;
    }
    if let Some(v) = args.constraint {
        config.constraint = v;
    }
    if let Some(v) = args.nodes {
        config.m = v;
    }
    if let Some(v) = args.dim {
        config.d = v;
    }
    if let Some(v) = args.sigma {
        config.sigma = v;
    }
    if let Some(v) = args.iters {
        config.horizon = v;
    }
    if let Some(v) = args.realizations {
        config.realizations = v;
    }
    if let Some(v) = args.seed {
        config.master_seed = v;
    }
    if let Some(v) = args.activation {
        config.activation = v;
    }
    if let Some(v) = args.window {
        config.window = v;
    }
    if args.checkpoints.is_some() {
        config.checkpoints = args.checkpoints;
    }
    config.output = args.output.or(config.output).or_else(|| Some(PathBuf::from("dsmd-out")));
    Ok(config)
}

fn main() -> ExitCode {
    let result = build(Args::parse()).and_then(run_experiment);
    match result {
        Ok(report) => {
            let s = &report.summary;
            let dir = s.config.output.as_deref().unwrap_or_else(|| "".as_ref());
            println!(
                "{} on {} ({} realizations, {:.2}s) -> {}",
                s.config.algorithm.name(),
                s.config.constraint.name(),
                s.config.realizations,
                s.runtime_seconds,
                dir.display()
            );
            for c in &s.checkpoints {
                println!("t = {:>7}  mean = {:.6e}  stderr = {:.2e}", c.t, c.mean, c.stderr);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
