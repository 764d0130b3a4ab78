// Constants of the two convergence bounds for the 40-node ring on the box,
// and the bound values at a few horizons.

use dsmd::{phi_diameter, euclidean_diameter, ConstraintSet, MirrorGeometry, MixingSchedule, TheoremConstants, TheoremInputs};

pub fn run_example() -> dsmd::Result<TheoremConstants> {
    let schedule = MixingSchedule::ring(40, 0.5, 2, 0)?;
    let mixing = schedule.constants();
    let set = ConstraintSet::cube(10, -1.0, 1.0)?;
    let geometry = MirrorGeometry::euclidean();
    let consts = TheoremConstants::evaluate(TheoremInputs {
        alpha: mixing.alpha,
        beta: mixing.beta,
        g: 15.0,
        sigma_f: 1.0,
        sigma_phi: geometry.sigma_phi(),
        m: 40,
        r_x: euclidean_diameter(&set),
        r_phi_x: phi_diameter(&geometry, &set)?,
        initial_norm_sum: 0.0,
    });
    println!("c = {:.4e}  c' = {:.4e}  c_hat = {:.4e}", consts.c, consts.c_prime, consts.c_hat);
    for t in [64.0, 1024.0, 16384.0] {
        println!(
            "T = {t:>6}: diminishing-step bound {:.3e}, epoch bound {:.3e}",
            consts.theorem1_bound(t),
            consts.theorem2_bound(t)
        );
    }
    Ok(consts)
}

fn main() -> dsmd::Result<()> {
    run_example().map(|_| ())
}
