//! Local objectives `F_i(x) = a_i ‖x − b_i‖²`, noisy subgradient oracles,
//! and the constants a run needs certified before it starts.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{bregman_divergence, ConstraintSet, GeometryKind, MirrorGeometry, Point};
use crate::seed;

/// Pairs sampled by the numeric strong-convexity certificate.
pub const CERTIFICATE_PAIRS: usize = 10_000;
/// Multiplier applied to the empirical infimum of the divergence ratio.
pub const CERTIFICATE_SAFETY: f64 = 0.9;
/// Certificates below this value reject the instance.
pub const CERTIFICATE_MIN: f64 = 1e-8;
/// Stand-in for a zero second-moment bound.
pub const G_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObjective {
    weight: f64,
    center: Point,
}

impl QuadraticObjective {
    pub fn new(weight: f64, center: Point) -> Result<Self> {
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "objective weight must be positive, got {weight}"
            )));
        }
        Ok(QuadraticObjective { weight, center })
    }

    /// The identically zero objective; its oracle returns pure noise. Used
    /// for consensus-only diagnostics.
    pub fn zero(dim: usize) -> Self {
        QuadraticObjective {
            weight: 0.0,
            center: Point::zeros(dim),
        }
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.weight * crate::geometry::distance(x, &self.center).powi(2)
    }

    /// `2a(x − b)`.
    pub fn subgradient(&self, x: &[f64]) -> Point {
        Point::from_vec_unchecked(
            x.iter()
                .zip(self.center.iter())
                .map(|(xi, bi)| 2.0 * self.weight * (xi - bi))
                .collect(),
        )
    }

    /// `F(x) − F(y) − ⟨∇F(y), x − y⟩`, which equals `a‖x − y‖²` exactly.
    pub fn linearization_gap(&self, x: &[f64], y: &[f64]) -> f64 {
        let g = self.subgradient(y);
        let inner: f64 = g.iter().zip(x.iter().zip(y)).map(|(gi, (a, b))| gi * (a - b)).sum();
        self.value(x) - self.value(y) - inner
    }
}

/// Unbiased Gaussian-noise oracle: `ĝ(x) = 2a(x − b) + w`, `w ~ N(0, σ²I)`.
///
/// The noise of query `q` is drawn from the ChaCha stream `(seed, q)`, so
/// an answer is a pure function of `(seed, q, x)`.
#[derive(Debug, Clone)]
pub struct StochasticOracle {
    objective: QuadraticObjective,
    noise_std: f64,
    seed: u64,
    queries: u64,
}

impl StochasticOracle {
    pub fn new(objective: QuadraticObjective, noise_std: f64, seed: u64) -> Result<Self> {
        if !(noise_std >= 0.0 && noise_std.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise standard deviation must be nonnegative, got {noise_std}"
            )));
        }
        Ok(StochasticOracle {
            objective,
            noise_std,
            seed,
            queries: 0,
        })
    }

    pub fn objective(&self) -> &QuadraticObjective {
        &self.objective
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn query(&mut self, x: &[f64]) -> Point {
        let q = self.queries;
        self.queries += 1;
        self.query_at(q, x)
    }

    /// Answer of query number `q` at `x`, without advancing the counter.
    pub fn query_at(&self, q: u64, x: &[f64]) -> Point {
        let mut g = self.objective.subgradient(x).into_vec();
        if self.noise_std > 0.0 {
            let mut rng = seed::stream(self.seed, q);
            for gi in g.iter_mut() {
                let w: f64 = rng.sample(StandardNormal);
                *gi += self.noise_std * w;
            }
        }
        Point::from_vec_unchecked(g)
    }
}

/// Generation scheme for the local data `(a_i, b_i)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataScheme {
    /// `a_i` is uniform on `[low, high)`.
    pub weight_range: (f64, f64),
}

impl Default for DataScheme {
    fn default() -> Self {
        DataScheme {
            weight_range: (0.5, 1.5),
        }
    }
}

impl DataScheme {
    /// `m` objectives with `b_i` uniform in `set` (normalized exponentials
    /// on the simplex).
    pub fn generate(&self, m: usize, set: &ConstraintSet, seed: u64) -> Result<Vec<QuadraticObjective>> {
        let (low, high) = self.weight_range;
        if !(low > 0.0 && low < high) {
            return Err(Error::InvalidParameter(format!(
                "weight range must satisfy 0 < low < high, got [{low}, {high})"
            )));
        }
        let mut rng = seed::stream(seed, 0);
        (0..m)
            .map(|_| {
                let a = rng.random_range(low..high);
                let b = set.sample_uniform(&mut rng);
                QuadraticObjective::new(a, b)
            })
            .collect()
    }
}

/// `m` local objectives over a shared set with certified `σ_F` and `G`.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    objectives: Vec<QuadraticObjective>,
    set: ConstraintSet,
    noise_std: f64,
    sigma_f: f64,
    g: f64,
}

impl ProblemInstance {
    /// Certifies `σ_F` against `geometry` and `G` from the data and noise.
    pub fn certified(
        objectives: Vec<QuadraticObjective>,
        set: ConstraintSet,
        geometry: &MirrorGeometry,
        noise_std: f64,
        certificate_seed: u64,
    ) -> Result<Self> {
        let sigma_f = certify_sigma_f(&objectives, &set, geometry, certificate_seed)?;
        let g = certify_g(&objectives, &set, noise_std)?;
        Self::with_constants(objectives, set, noise_std, sigma_f, g)
    }

    /// Uses caller-supplied constants; `g = 0` means "certify `G` now".
    pub fn with_constants(
        objectives: Vec<QuadraticObjective>,
        set: ConstraintSet,
        noise_std: f64,
        sigma_f: f64,
        g: f64,
    ) -> Result<Self> {
        if objectives.is_empty() {
            return Err(Error::InvalidParameter("instance needs at least one objective".into()));
        }
        for o in &objectives {
            if o.dim() != set.dim() {
                return Err(Error::DimensionMismatch {
                    expected: set.dim(),
                    found: o.dim(),
                });
            }
        }
        if !(sigma_f > 0.0 && sigma_f.is_finite()) {
            return Err(Error::InvalidParameter(format!("σ_F must be positive, got {sigma_f}")));
        }
        if !(noise_std >= 0.0 && noise_std.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise standard deviation must be nonnegative, got {noise_std}"
            )));
        }
        let g = if g > 0.0 { g } else { certify_g(&objectives, &set, noise_std)? };
        Ok(ProblemInstance {
            objectives,
            set,
            noise_std,
            sigma_f,
            g,
        })
    }

    pub fn objectives(&self) -> &[QuadraticObjective] {
        &self.objectives
    }

    pub fn set(&self) -> &ConstraintSet {
        &self.set
    }

    pub fn nodes(&self) -> usize {
        self.objectives.len()
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_std
    }

    pub fn sigma_f(&self) -> f64 {
        self.sigma_f
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    /// `F(x) = Σ_i F_i(x)`.
    pub fn value(&self, x: &[f64]) -> f64 {
        self.objectives.iter().map(|o| o.value(x)).sum()
    }

    /// One oracle per agent, each on its own stream derived from
    /// `(realization_seed, agent)`.
    pub fn oracles(&self, realization_seed: u64) -> Vec<StochasticOracle> {
        self.objectives
            .iter()
            .enumerate()
            .map(|(i, o)| {
                let s = seed::derive(realization_seed, seed::ORACLE + i as u64);
                StochasticOracle::new(o.clone(), self.noise_std, s).expect("noise validated")
            })
            .collect()
    }

    /// `x* = argmin_X F`. Since `F(x) = (Σa_i)‖x − x̄‖² + const` with
    /// `x̄ = Σ a_i b_i / Σ a_i`, `x*` is the Euclidean projection of `x̄`.
    pub fn global_optimum(&self) -> Point {
        let total: f64 = self.objectives.iter().map(|o| o.weight()).sum();
        let mut mean = vec![0.0; self.dim()];
        if total > 0.0 {
            for o in &self.objectives {
                for (m, b) in mean.iter_mut().zip(o.center().iter()) {
                    *m += o.weight() * b / total;
                }
            }
        }
        self.set
            .euclidean_projection(&mean)
            .expect("weighted mean has the set's dimension")
    }
}

/// Largest `σ_F` with `F_i(x) ≥ F_i(y) + ⟨g_i(y), x − y⟩ + σ_F D_Φ(x‖y)`.
///
/// Euclidean: exactly `2 min_i a_i`. Negative entropy: the minimum of the
/// ratio over [`CERTIFICATE_PAIRS`] random simplex pairs, times
/// [`CERTIFICATE_SAFETY`].
pub fn certify_sigma_f(
    objectives: &[QuadraticObjective],
    set: &ConstraintSet,
    geometry: &MirrorGeometry,
    seed: u64,
) -> Result<f64> {
    let certificate = match geometry.kind() {
        GeometryKind::Euclidean => {
            2.0 * objectives.iter().map(|o| o.weight()).fold(f64::INFINITY, f64::min)
        }
        GeometryKind::NegativeEntropy => {
            let mut rng = seed::stream(seed::derive(seed, seed::CERTIFICATE), 0);
            let mut ratio = f64::INFINITY;
            for _ in 0..CERTIFICATE_PAIRS {
                let x = set.sample_uniform(&mut rng);
                let y = set.sample_uniform(&mut rng);
                let d = bregman_divergence(geometry, &x, &y)?;
                if d <= 1e-14 {
                    continue;
                }
                for o in objectives {
                    ratio = ratio.min(o.linearization_gap(&x, &y) / d);
                }
            }
            CERTIFICATE_SAFETY * ratio
        }
    };
    if !(certificate >= CERTIFICATE_MIN) || !certificate.is_finite() {
        return Err(Error::NotStronglyConvex(certificate));
    }
    Ok(certificate)
}

/// `G = (max_i sup_X ‖2a_i(x − b_i)‖² + dσ²)^{1/2}`, the supremum taken at
/// the vertex of `X` farthest from `b_i`.
pub fn certify_g(objectives: &[QuadraticObjective], set: &ConstraintSet, noise_std: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for o in objectives {
        let far = set.farthest_point_from(o.center())?;
        worst = worst.max(o.subgradient(&far).norm().powi(2));
    }
    let g = (worst + set.dim() as f64 * noise_std * noise_std).sqrt();
    Ok(if g > 0.0 { g } else { G_FLOOR })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pt(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    #[test]
    fn exact_subgradient() {
        let o = QuadraticObjective::new(1.0, pt(&[0.0, 0.0])).unwrap();
        assert_eq!(o.subgradient(&[1.0, 2.0]).coords(), &[2.0, 4.0]);
        assert!(QuadraticObjective::new(0.0, pt(&[0.0])).is_err());
    }

    #[test]
    fn noiseless_oracle_is_exact() {
        let o = QuadraticObjective::new(0.7, pt(&[0.1, -0.3, 0.2])).unwrap();
        let mut oracle = StochasticOracle::new(o.clone(), 0.0, 5).unwrap();
        let x = [0.4, 0.4, -0.9];
        for _ in 0..5 {
            assert_eq!(oracle.query(&x), o.subgradient(&x));
        }
    }

    #[test]
    fn oracle_is_unbiased() {
        let d = 10;
        let sigma = 0.25;
        let n = 100_000;
        let o = QuadraticObjective::new(1.3, Point::uniform(d)).unwrap();
        let mut oracle = StochasticOracle::new(o.clone(), sigma, 42).unwrap();
        let x = vec![0.3; d];
        let mut mean = vec![0.0; d];
        for _ in 0..n {
            for (m, g) in mean.iter_mut().zip(oracle.query(&x).iter()) {
                *m += g / n as f64;
            }
        }
        let exact = o.subgradient(&x);
        let tol = 3.0 * sigma / (n as f64).sqrt();
        for (m, e) in mean.iter().zip(exact.iter()) {
            assert!((m - e).abs() <= tol, "{m} vs {e}");
        }
    }

    #[test]
    fn oracle_is_a_function_of_seed_and_query_index() {
        let o = QuadraticObjective::new(1.0, pt(&[0.0, 0.0])).unwrap();
        let mut a = StochasticOracle::new(o.clone(), 0.5, 8).unwrap();
        let b = StochasticOracle::new(o, 0.5, 8).unwrap();
        let x = [0.1, 0.2];
        let first = a.query(&x);
        let second = a.query(&x);
        assert_ne!(first, second);
        assert_eq!(first, b.query_at(0, &x));
        assert_eq!(second, b.query_at(1, &x));
    }

    #[test]
    fn optimum_examples() {
        let cube = ConstraintSet::cube(2, -1.0, 1.0).unwrap();
        let objectives = vec![
            QuadraticObjective::new(1.0, pt(&[0.0, 0.0])).unwrap(),
            QuadraticObjective::new(1.0, pt(&[1.0, 1.0])).unwrap(),
        ];
        let p = ProblemInstance::with_constants(objectives.clone(), cube.clone(), 0.0, 2.0, 0.0).unwrap();
        assert_eq!(p.global_optimum().coords(), &[0.5, 0.5]);
        let simplex = ConstraintSet::simplex(2).unwrap();
        let p = ProblemInstance::with_constants(objectives, simplex, 0.0, 2.0, 0.0).unwrap();
        assert_eq!(p.global_optimum().coords(), &[0.5, 0.5]);
        let single = vec![QuadraticObjective::new(1.0, pt(&[2.0, 2.0])).unwrap()];
        let p = ProblemInstance::with_constants(single, cube, 0.0, 2.0, 0.0).unwrap();
        assert_eq!(p.global_optimum().coords(), &[1.0, 1.0]);
    }

    #[test]
    fn optimum_beats_random_feasible_points() {
        for set in [
            ConstraintSet::cube(10, -1.0, 1.0).unwrap(),
            ConstraintSet::simplex(10).unwrap(),
        ] {
            let objectives = DataScheme::default().generate(40, &set, 3).unwrap();
            let p = ProblemInstance::with_constants(objectives, set.clone(), 0.0, 1.0, 0.0).unwrap();
            let star = p.global_optimum();
            assert!(set.contains(&star, 1e-12));
            let best = p.value(&star);
            let mut rng = seed::stream(77, 0);
            for _ in 0..1000 {
                let x = set.sample_uniform(&mut rng);
                assert!(best <= p.value(&x) + 1e-12);
            }
        }
    }

    #[test]
    fn euclidean_sigma_f_is_twice_min_weight() {
        let cube = ConstraintSet::cube(2, -1.0, 1.0).unwrap();
        let objectives: Vec<_> = [1.0, 2.0, 3.0]
            .iter()
            .map(|&a| QuadraticObjective::new(a, pt(&[0.0, 0.0])).unwrap())
            .collect();
        let e = MirrorGeometry::euclidean();
        assert_eq!(certify_sigma_f(&objectives, &cube, &e, 0).unwrap(), 2.0);
        let half = vec![QuadraticObjective::new(0.5, pt(&[0.0, 0.0])).unwrap()];
        assert_eq!(certify_sigma_f(&half, &cube, &e, 0).unwrap(), 1.0);
        let zero = vec![QuadraticObjective::zero(2)];
        assert!(matches!(
            certify_sigma_f(&zero, &cube, &e, 0),
            Err(Error::NotStronglyConvex(_))
        ));
    }

    #[test]
    fn entropic_sigma_f_certificate_holds_on_fresh_pairs() {
        let simplex = ConstraintSet::simplex(10).unwrap();
        let objectives: Vec<_> = (0..5)
            .map(|k| {
                let mut rng = seed::stream(k, 1);
                QuadraticObjective::new(1.0, simplex.sample_uniform(&mut rng)).unwrap()
            })
            .collect();
        let geom = MirrorGeometry::negative_entropy();
        let sigma_f = certify_sigma_f(&objectives, &simplex, &geom, 2024).unwrap();
        assert!(sigma_f > 0.0 && sigma_f <= 2.0);
        let mut rng = seed::stream(31337, 0);
        for _ in 0..10_000 {
            let x = simplex.sample_uniform(&mut rng);
            let y = simplex.sample_uniform(&mut rng);
            let d = bregman_divergence(&geom, &x, &y).unwrap();
            for o in &objectives {
                assert!(o.linearization_gap(&x, &y) - sigma_f * d >= -1e-9);
            }
        }
    }

    #[test]
    fn g_examples() {
        let cube = ConstraintSet::cube(2, -1.0, 1.0).unwrap();
        let o = vec![QuadraticObjective::new(1.0, pt(&[0.0, 0.0])).unwrap()];
        assert_abs_diff_eq!(certify_g(&o, &cube, 0.0).unwrap(), 2.0 * 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(certify_g(&o, &cube, 1.0).unwrap(), 10f64.sqrt(), epsilon = 1e-15);
        let zero = vec![QuadraticObjective::zero(2)];
        assert_eq!(certify_g(&zero, &cube, 0.0).unwrap(), G_FLOOR);
        assert_abs_diff_eq!(certify_g(&zero, &cube, 0.5).unwrap(), (2.0f64 * 0.25).sqrt());
    }

    #[test]
    fn g_bounds_the_oracle_second_moment() {
        let set = ConstraintSet::cube(10, -1.0, 1.0).unwrap();
        let objectives = DataScheme::default().generate(8, &set, 12).unwrap();
        let sigma = 0.5;
        let g = certify_g(&objectives, &set, sigma).unwrap();
        let mut rng = seed::stream(4, 4);
        for (i, o) in objectives.iter().enumerate() {
            let mut oracle = StochasticOracle::new(o.clone(), sigma, i as u64).unwrap();
            let x = set.sample_uniform(&mut rng);
            let n = 2000;
            let second: f64 = (0..n).map(|_| oracle.query(&x).norm().powi(2)).sum::<f64>() / n as f64;
            assert!(second <= g * g);
        }
    }
}
