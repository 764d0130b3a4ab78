// Distributed stochastic mirror descent with the Euclidean map on a box:
// a small ring estimating a weighted centroid from noisy gradients.

use dsmd::{
    run_dsmd, ConstraintSet, DataScheme, DsmdRun, MirrorGeometry, MixingSchedule, ProblemInstance,
    RunContext, Setup,
};

pub fn run_example() -> dsmd::Result<f64> {
    let set = ConstraintSet::cube(3, -1.0, 1.0)?;
    let setup = Setup::new(MirrorGeometry::euclidean(), set.clone())?;
    let objectives = DataScheme::default().generate(8, &set, 3)?;
    let instance = ProblemInstance::certified(objectives, set, setup.geometry(), 0.25, 3)?;
    let schedule = MixingSchedule::ring(8, 0.5, 2, 3)?;
    let context = RunContext::new(&setup, &instance, &schedule).with_checkpoints(vec![10, 100, 1000, 2000]);
    let out = run_dsmd(&DsmdRun::new(context, 2000), 11)?;
    let star = instance.global_optimum();
    println!("x* = {:?}", star.coords());
    let mut last = f64::NAN;
    for snap in &out.snapshots {
        last = snap.estimates.iter().map(|x| x.distance_sq(&star)).sum::<f64>() / 8.0;
        println!("t = {:>5}  eta = {:.2e}  mean |x_hat - x*|^2 = {last:.3e}", snap.round, snap.eta);
    }
    Ok(last)
}

fn main() -> dsmd::Result<()> {
    run_example().map(|_| ())
}
