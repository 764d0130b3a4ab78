// A 40-node ring with half the links active each round and a full round
// every second round: checks the weight conditions, joint connectivity and
// the geometric mixing bound.

use dsmd::{mixing_bound_check, verify_assumption1, MixingSchedule};

pub fn run_example() -> dsmd::Result<f64> {
    let schedule = MixingSchedule::ring(40, 0.5, 2, 7)?;
    let consts = schedule.constants();
    println!(
        "xi = {:.4}, alpha = {:.6}, beta = {:.8}, links per round = {}",
        schedule.xi(),
        consts.alpha,
        consts.beta,
        schedule.links_per_round()
    );
    let report = verify_assumption1(&schedule, 200)?;
    println!(
        "200 rounds: min diagonal {:.4}, disconnected windows {:?}, passes = {}",
        report.min_diagonal,
        report.disconnected_windows,
        report.passes()
    );
    let bound = mixing_bound_check(&schedule, 200, 100, 1)?;
    println!(
        "{} windows: worst |Phi - 11'/m| - alpha beta^len = {:.3e}",
        bound.windows, bound.max_violation
    );
    Ok(bound.max_violation)
}

fn main() -> dsmd::Result<()> {
    run_example().map(|_| ())
}
