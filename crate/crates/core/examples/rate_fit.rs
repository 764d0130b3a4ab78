// Fits the mean error of a run to `a ln(T)/T + b/T` and, for the epoch
// variant, to `a/T`.

use dsmd::harness::{rate_fit, Algorithm, Experiment, ExperimentConfig, RateModel};
use dsmd::SetKind;

pub fn run_example() -> dsmd::Result<Vec<f64>> {
    let mut r2 = Vec::new();
    for (algorithm, model) in [
        (Algorithm::Dsmd, RateModel::LnTOverT),
        (Algorithm::EpochDsmd, RateModel::OneOverT),
    ] {
        let config = ExperimentConfig {
            m: 8,
            d: 4,
            realizations: 4,
            checkpoints: Some(vec![28, 60, 124, 252, 508, 1020]),
            ..ExperimentConfig::study(algorithm, SetKind::Box, 0.25, 1024)
        };
        let report = Experiment::prepare(config)?.run()?;
        let fit = rate_fit(&report.summary.fit_points(), model)?;
        println!(
            "{:>10}: coefficients {:?}, R^2 = {:.3}, max error*T = {:.3}",
            algorithm.name(),
            fit.coefficients,
            fit.r_squared,
            fit.max_error_times_t
        );
        r2.push(fit.r_squared);
    }
    Ok(r2)
}

fn main() -> dsmd::Result<()> {
    run_example().map(|_| ())
}
