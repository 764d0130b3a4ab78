// The multiplicative update on the simplex against the generic
// mirror step (dual shift, inverse gradient, KL projection).

use dsmd::{entropic_step, mirror_step, ConstraintSet, MirrorGeometry, Point};

pub fn run_example() -> dsmd::Result<f64> {
    let set = ConstraintSet::simplex(4)?;
    let x = Point::new(vec![0.4, 0.3, 0.2, 0.1])?;
    let g = [1.0, -2.0, 0.5, 3.0];
    let mut worst: f64 = 0.0;
    for eta in [0.01, 0.1, 1.0, 10.0] {
        let closed = entropic_step(&x, &g, eta)?;
        let generic = mirror_step(&MirrorGeometry::negative_entropy(), &set, &x, &g, eta)?;
        let gap = closed.iter().zip(generic.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(gap);
        println!("eta = {eta:>5}: {:?}  (max gap {gap:.1e})", closed.coords());
    }
    Ok(worst)
}

fn main() -> dsmd::Result<()> {
    run_example().map(|_| ())
}
