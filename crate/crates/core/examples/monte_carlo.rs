// A reduced Monte Carlo study: metrics.csv and summary.json are written to
// a directory given as the first argument (a temporary one otherwise).

use std::path::PathBuf;

use dsmd::harness::{run_experiment, Algorithm, ExperimentConfig, ExperimentReport};
use dsmd::SetKind;

pub fn run_example(output: PathBuf) -> dsmd::Result<ExperimentReport> {
    let config = ExperimentConfig {
        m: 10,
        realizations: 8,
        output: Some(output),
        ..ExperimentConfig::study(Algorithm::EpochDsmd, SetKind::Box, 0.5, 1024)
    };
    let report = run_experiment(config)?;
    let s = &report.summary;
    println!("sigma_F = {:.4}, G = {:.4}", s.constants.sigma_f, s.constants.g);
    for c in &s.checkpoints {
        println!("t = {:>5}  mean = {:.4e} +/- {:.1e}", c.t, c.mean, c.stderr);
    }
    Ok(report)
}

fn main() -> dsmd::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("dsmd-monte-carlo"));
    run_example(dir.clone())?;
    println!("wrote {}", dir.display());
    Ok(())
}
