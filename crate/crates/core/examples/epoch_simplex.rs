// The epoch variant with entropic updates on the probability simplex:
// constant steps inside each epoch, halved and doubled in length at each
// restart from the epoch averages.

use dsmd::{
    epoch_schedule, run_epoch_dsmd, ConstraintSet, DataScheme, MirrorGeometry, MixingSchedule,
    ProblemInstance, RunContext, Setup,
};

pub fn run_example() -> dsmd::Result<f64> {
    let set = ConstraintSet::simplex(5)?;
    let setup = Setup::new(MirrorGeometry::negative_entropy(), set.clone())?;
    let objectives = DataScheme::default().generate(6, &set, 5)?;
    let instance = ProblemInstance::certified(objectives, set, setup.geometry(), 0.25, 5)?;
    let schedule = MixingSchedule::ring(6, 0.5, 2, 5)?;
    let epochs = epoch_schedule(1000, instance.sigma_f())?;
    println!(
        "sigma_F = {:.4}, {} epochs covering {} of 1000 rounds",
        instance.sigma_f(),
        epochs.k_dagger(),
        epochs.total_rounds()
    );
    let context = RunContext::new(&setup, &instance, &schedule).with_checkpoints(epochs.epoch_ends());
    let out = run_epoch_dsmd(&context, &epochs, 17)?;
    let star = instance.global_optimum();
    let mut last = f64::NAN;
    for (snap, epoch) in out.snapshots.iter().zip(&out.epochs) {
        last = snap.estimates.iter().map(|x| x.distance_sq(&star)).sum::<f64>();
        println!(
            "epoch {:>2}  T_k = {:>4}  eta_k = {:.3e}  sum_i |x_i - x*|^2 = {last:.3e}",
            epoch.index, epoch.length, epoch.eta
        );
    }
    Ok(last)
}

fn main() -> dsmd::Result<()> {
    run_example().map(|_| ())
}
