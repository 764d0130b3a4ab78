//! Mirror maps, Bregman divergences and the two-step mirror update.
//!
//! Two distance-generating functions are supported:
//!
//! * Euclidean, `Φ(x) = ½‖x‖²`, whose divergence is `½‖x − y‖²` and whose
//!   mirror step is a projected subgradient step;
//! * negative entropy, `Φ(x) = Σ xᵢ ln xᵢ`, whose divergence on the simplex
//!   is the Kullback-Leibler divergence and whose mirror step has the
//!   multiplicative closed form implemented by [`entropic_step`].
//!
//! Allowed (geometry, set) pairings are Euclidean × Box, Euclidean × Simplex
//! and NegativeEntropy × Simplex. Every function here is pure.

use std::ops::Deref;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default clamp applied to entropy inputs before taking logarithms.
pub const DEFAULT_ENTROPY_FLOOR: f64 = 1e-12;

/// Tolerance used when checking membership of computed iterates.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// A dense decision vector with finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: impl Into<Vec<f64>>) -> Result<Self> {
        let coords = coords.into();
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteInput("point"));
        }
        Ok(Point(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    /// The barycenter `(1/d, …, 1/d)` of the simplex.
    pub fn uniform(dim: usize) -> Self {
        Point(vec![1.0 / dim as f64; dim])
    }

    pub(crate) fn from_vec_unchecked(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn distance(&self, other: &Point) -> f64 {
        distance(&self.0, &other.0)
    }

    pub fn distance_sq(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub(crate) fn add_assign(&mut self, other: &Point) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }

    pub(crate) fn scaled(&self, factor: f64) -> Point {
        Point(self.0.iter().map(|c| c * factor).collect())
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeometryKind {
    Euclidean,
    NegativeEntropy,
}

impl GeometryKind {
    pub fn name(self) -> &'static str {
        match self {
            GeometryKind::Euclidean => "euclidean",
            GeometryKind::NegativeEntropy => "negative-entropy",
        }
    }
}

/// A distance-generating function together with its strong-convexity
/// modulus with respect to the Euclidean norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MirrorGeometry {
    kind: GeometryKind,
    sigma_phi: f64,
    entropy_floor: f64,
}

impl MirrorGeometry {
    pub fn euclidean() -> Self {
        MirrorGeometry {
            kind: GeometryKind::Euclidean,
            sigma_phi: 1.0,
            entropy_floor: DEFAULT_ENTROPY_FLOOR,
        }
    }

    /// Negative entropy on the simplex. It is 1-strongly convex w.r.t. ℓ₁,
    /// and ℓ₁ dominates ℓ₂, so the modulus used for the ℓ₂ bounds is 1.
    pub fn negative_entropy() -> Self {
        MirrorGeometry {
            kind: GeometryKind::NegativeEntropy,
            sigma_phi: 1.0,
            entropy_floor: DEFAULT_ENTROPY_FLOOR,
        }
    }

    pub fn from_kind(kind: GeometryKind) -> Self {
        match kind {
            GeometryKind::Euclidean => Self::euclidean(),
            GeometryKind::NegativeEntropy => Self::negative_entropy(),
        }
    }

    /// Override the clamp used before logarithms; must lie in `(0, 1e-9]`.
    pub fn with_entropy_floor(mut self, floor: f64) -> Result<Self> {
        if !(floor > 0.0 && floor <= 1e-9) {
            return Err(Error::InvalidParameter(format!(
                "entropy floor must lie in (0, 1e-9], got {floor}"
            )));
        }
        self.entropy_floor = floor;
        Ok(self)
    }

    pub fn kind(&self) -> GeometryKind {
        self.kind
    }

    pub fn sigma_phi(&self) -> f64 {
        self.sigma_phi
    }

    pub fn entropy_floor(&self) -> f64 {
        self.entropy_floor
    }

    /// Floors every coordinate at the entropy floor and renormalizes so the
    /// coordinates sum to one. Rejects coordinates below zero.
    fn clean_entropy_input(&self, x: &[f64], what: &str) -> Result<Vec<f64>> {
        if let Some(c) = x.iter().find(|c| **c < 0.0) {
            return Err(Error::InfeasiblePoint(format!(
                "{what} has negative coordinate {c} under negative entropy"
            )));
        }
        let floored: Vec<f64> = x.iter().map(|c| c.max(self.entropy_floor)).collect();
        let total: f64 = floored.iter().sum();
        Ok(floored.into_iter().map(|c| c / total).collect())
    }

    /// `Φ(x)`.
    pub fn phi(&self, x: &[f64]) -> f64 {
        match self.kind {
            GeometryKind::Euclidean => 0.5 * dot(x, x),
            GeometryKind::NegativeEntropy => x
                .iter()
                .map(|&c| if c > 0.0 { c * c.ln() } else { 0.0 })
                .sum(),
        }
    }

    /// `∇Φ(x)`; for negative entropy `1 + ln xᵢ` with `xᵢ` floored.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match self.kind {
            GeometryKind::Euclidean => x.to_vec(),
            GeometryKind::NegativeEntropy => x
                .iter()
                .map(|&c| 1.0 + c.max(self.entropy_floor).ln())
                .collect(),
        }
    }

    /// `(∇Φ)⁻¹(θ)`; for negative entropy `exp(θᵢ − 1)`.
    pub fn gradient_inverse(&self, theta: &[f64]) -> Vec<f64> {
        match self.kind {
            GeometryKind::Euclidean => theta.to_vec(),
            GeometryKind::NegativeEntropy => theta.iter().map(|&t| (t - 1.0).exp()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetKind {
    Simplex,
    Box,
}

impl SetKind {
    pub fn name(self) -> &'static str {
        match self {
            SetKind::Simplex => "simplex",
            SetKind::Box => "box",
        }
    }
}

/// The feasible set: the probability simplex or an axis-aligned box.
#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintSet {
    Simplex { dim: usize },
    Box { lower: Vec<f64>, upper: Vec<f64> },
}

impl ConstraintSet {
    pub fn simplex(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("simplex dimension must be positive".into()));
        }
        Ok(ConstraintSet::Simplex { dim })
    }

    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(Error::InvalidParameter("box dimension must be positive".into()));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::InvalidParameter(format!(
                    "box bounds must satisfy lower < upper, coordinate {i}: [{l}, {u}]"
                )));
            }
        }
        Ok(ConstraintSet::Box { lower, upper })
    }

    /// The cube `[lower, upper]^dim`.
    pub fn cube(dim: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::boxed(vec![lower; dim], vec![upper; dim])
    }

    pub fn kind(&self) -> SetKind {
        match self {
            ConstraintSet::Simplex { .. } => SetKind::Simplex,
            ConstraintSet::Box { .. } => SetKind::Box,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConstraintSet::Simplex { dim } => *dim,
            ConstraintSet::Box { lower, .. } => lower.len(),
        }
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim() || x.iter().any(|c| !c.is_finite()) {
            return false;
        }
        match self {
            ConstraintSet::Simplex { .. } => {
                x.iter().all(|&c| c >= -tol) && (x.iter().sum::<f64>() - 1.0).abs() <= tol
            }
            ConstraintSet::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(&c, (&l, &u))| c >= l - tol && c <= u + tol),
        }
    }

    /// Exact Euclidean projection: clamp for a box, sort-and-threshold for
    /// the simplex.
    pub fn euclidean_projection(&self, y: &[f64]) -> Result<Point> {
        check_dim(self.dim(), y.len())?;
        if y.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteInput("projection input"));
        }
        let z = match self {
            ConstraintSet::Box { lower, upper } => y
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(&c, (&l, &u))| c.clamp(l, u))
                .collect(),
            ConstraintSet::Simplex { .. } => project_onto_simplex(y),
        };
        Ok(Point(z))
    }

    /// A point of the set farthest (in ℓ₂) from `b`. The squared distance is
    /// convex, so the supremum is attained at a vertex.
    pub fn farthest_point_from(&self, b: &[f64]) -> Result<Point> {
        check_dim(self.dim(), b.len())?;
        let z = match self {
            ConstraintSet::Box { lower, upper } => b
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(&c, (&l, &u))| if (c - l).abs() >= (u - c).abs() { l } else { u })
                .collect(),
            ConstraintSet::Simplex { dim } => {
                // ‖e_k − b‖² = ‖b‖² + 1 − 2 b_k, maximized at the smallest b_k.
                let k = b
                    .iter()
                    .enumerate()
                    .min_by(|a, c| a.1.total_cmp(c.1))
                    .map(|(k, _)| k)
                    .unwrap_or(0);
                let mut v = vec![0.0; *dim];
                v[k] = 1.0;
                v
            }
        };
        Ok(Point(z))
    }

    /// A uniformly distributed point of the set.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match self {
            ConstraintSet::Box { lower, upper } => Point(
                lower
                    .iter()
                    .zip(upper)
                    .map(|(&l, &u)| rng.random_range(l..u))
                    .collect(),
            ),
            ConstraintSet::Simplex { dim } => {
                let e: Vec<f64> = (0..*dim).map(|_| Exp1.sample(rng)).collect();
                let total: f64 = e.iter().sum();
                Point(e.into_iter().map(|v| v / total).collect())
            }
        }
    }
}

/// Euclidean projection onto the probability simplex by sorting and
/// thresholding: `θ = (Σ_{j≤ρ} u_j − 1)/ρ` with `ρ` the largest index such
/// that `u_ρ − θ_ρ > 0`, output `max(y − θ, 0)`.
pub fn project_onto_simplex(y: &[f64]) -> Vec<f64> {
    let mut sorted = y.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut threshold = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - 1.0) / (j + 1) as f64;
        if u - candidate > 0.0 {
            threshold = candidate;
        }
    }
    y.iter().map(|&c| (c - threshold).max(0.0)).collect()
}

fn check_pairing(geom: &MirrorGeometry, set: &ConstraintSet) -> Result<()> {
    if geom.kind == GeometryKind::NegativeEntropy && set.kind() == SetKind::Box {
        return Err(Error::UnsupportedPairing {
            geometry: geom.kind.name(),
            set: set.kind().name(),
        });
    }
    Ok(())
}

/// A validated (geometry, set) pairing.
#[derive(Debug, Clone, PartialEq)]
pub struct Setup {
    geometry: MirrorGeometry,
    set: ConstraintSet,
}

impl Setup {
    pub fn new(geometry: MirrorGeometry, set: ConstraintSet) -> Result<Self> {
        check_pairing(&geometry, &set)?;
        Ok(Setup { geometry, set })
    }

    pub fn geometry(&self) -> &MirrorGeometry {
        &self.geometry
    }

    pub fn set(&self) -> &ConstraintSet {
        &self.set
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    pub fn mirror_step(&self, x: &Point, g: &[f64], eta: f64) -> Result<Point> {
        mirror_step(&self.geometry, &self.set, x, g, eta)
    }

    /// `argmin_{x∈X} Φ(x)`, the starting point of the epoch algorithm.
    pub fn phi_minimizer(&self) -> Point {
        match (&self.set, self.geometry.kind) {
            (ConstraintSet::Simplex { dim }, GeometryKind::NegativeEntropy) => Point::uniform(*dim),
            // Euclidean: projection of the origin.
            (set, _) => set
                .euclidean_projection(&vec![0.0; set.dim()])
                .expect("origin has matching dimension"),
        }
    }

    pub fn phi_diameter(&self) -> f64 {
        phi_diameter(&self.geometry, &self.set).expect("pairing validated at construction")
    }

    pub fn euclidean_diameter(&self) -> f64 {
        euclidean_diameter(&self.set)
    }
}

/// `D_Φ(x‖y) = Φ(x) − Φ(y) − ⟨∇Φ(y), x − y⟩`.
pub fn bregman_divergence(geom: &MirrorGeometry, x: &[f64], y: &[f64]) -> Result<f64> {
    check_dim(x.len(), y.len())?;
    if x.iter().chain(y).any(|c| !c.is_finite()) {
        return Err(Error::NonFiniteInput("divergence argument"));
    }
    let d = match geom.kind {
        GeometryKind::Euclidean => 0.5 * distance(x, y).powi(2),
        GeometryKind::NegativeEntropy => {
            let x = geom.clean_entropy_input(x, "x")?;
            let y = geom.clean_entropy_input(y, "y")?;
            // Σ x ln(x/y) − Σ x + Σ y, the entropy divergence on the positive orthant.
            x.iter()
                .zip(&y)
                .map(|(&a, &b)| a * (a / b).ln() - a + b)
                .sum::<f64>()
        }
    };
    Ok(d.max(0.0))
}

/// Bregman projection `argmin_{w∈X} D_Φ(w‖y)`.
pub fn bregman_project(geom: &MirrorGeometry, set: &ConstraintSet, y: &[f64]) -> Result<Point> {
    check_pairing(geom, set)?;
    check_dim(set.dim(), y.len())?;
    match geom.kind {
        GeometryKind::Euclidean => set.euclidean_projection(y),
        GeometryKind::NegativeEntropy => {
            if y.iter().any(|c| !c.is_finite()) {
                return Err(Error::NonFiniteInput("projection input"));
            }
            // KL projection onto the simplex is normalization.
            Ok(Point(geom.clean_entropy_input(y, "y")?))
        }
    }
}

/// One mirror descent step: the dual update `∇Φ(y) = ∇Φ(x) − η g`
/// followed by the Bregman projection of `y` onto `X`.
pub fn mirror_step(
    geom: &MirrorGeometry,
    set: &ConstraintSet,
    x: &[f64],
    g: &[f64],
    eta: f64,
) -> Result<Point> {
    check_pairing(geom, set)?;
    check_dim(set.dim(), x.len())?;
    check_dim(set.dim(), g.len())?;
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidParameter(format!("step size must be positive, got {eta}")));
    }
    if g.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFiniteInput("subgradient"));
    }
    let x_in = match geom.kind {
        GeometryKind::Euclidean => x.to_vec(),
        GeometryKind::NegativeEntropy => geom.clean_entropy_input(x, "x")?,
    };
    let mut dual: Vec<f64> = geom
        .gradient(&x_in)
        .iter()
        .zip(g)
        .map(|(t, gi)| t - eta * gi)
        .collect();
    if geom.kind == GeometryKind::NegativeEntropy {
        // The KL projection onto the simplex is invariant to rescaling y,
        // i.e. to translating the dual point along the all-ones direction.
        let top = dual.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        dual.iter_mut().for_each(|t| *t -= top);
    }
    let y = geom.gradient_inverse(&dual);
    if geom.kind == GeometryKind::NegativeEntropy && y.iter().all(|&c| c == 0.0) {
        return Err(Error::Underflow);
    }
    let z = bregman_project(geom, set, &y)?;
    assert!(z.is_finite(), "mirror step produced a non-finite point");
    Ok(z)
}

/// Closed-form entropic descent step on the simplex:
/// `zⱼ = xⱼ exp(−η gⱼ) / Σ_ℓ x_ℓ exp(−η g_ℓ)`, evaluated with the exponents
/// shifted by their maximum.
pub fn entropic_step(x: &[f64], g: &[f64], eta: f64) -> Result<Point> {
    check_dim(x.len(), g.len())?;
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidParameter(format!("step size must be positive, got {eta}")));
    }
    if x.iter().chain(g).any(|c| !c.is_finite()) {
        return Err(Error::NonFiniteInput("entropic step argument"));
    }
    let x = MirrorGeometry::negative_entropy().clean_entropy_input(x, "x")?;
    let exponents: Vec<f64> = g.iter().map(|gi| -eta * gi).collect();
    let top = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = x
        .iter()
        .zip(&exponents)
        .map(|(xi, e)| xi * (e - top).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Underflow);
    }
    Ok(Point(weights.into_iter().map(|w| w / total).collect()))
}

/// `R_{Φ,X} = (max_X Φ − min_X Φ)^{1/2}`.
pub fn phi_diameter(geom: &MirrorGeometry, set: &ConstraintSet) -> Result<f64> {
    check_pairing(geom, set)?;
    let spread = match (geom.kind, set) {
        (GeometryKind::NegativeEntropy, ConstraintSet::Simplex { dim }) => (*dim as f64).ln(),
        (GeometryKind::Euclidean, ConstraintSet::Simplex { dim }) => 0.5 - 0.5 / *dim as f64,
        (GeometryKind::Euclidean, ConstraintSet::Box { lower, upper }) => lower
            .iter()
            .zip(upper)
            .map(|(&l, &u)| {
                let far = l.abs().max(u.abs());
                let near = 0.0f64.clamp(l, u);
                0.5 * (far * far - near * near)
            })
            .sum(),
        (GeometryKind::NegativeEntropy, ConstraintSet::Box { .. }) => unreachable!(),
    };
    Ok(spread.max(0.0).sqrt())
}

/// `R_X = max_{x,y∈X} ‖x − y‖₂`.
pub fn euclidean_diameter(set: &ConstraintSet) -> f64 {
    match set {
        ConstraintSet::Simplex { dim } => {
            if *dim >= 2 {
                2f64.sqrt()
            } else {
                0.0
            }
        }
        ConstraintSet::Box { lower, upper } => distance(lower, upper),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn euclid() -> MirrorGeometry {
        MirrorGeometry::euclidean()
    }

    fn entropy() -> MirrorGeometry {
        MirrorGeometry::negative_entropy()
    }

    #[test]
    fn euclidean_divergence_is_half_squared_distance() {
        let d = bregman_divergence(&euclid(), &[1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(d, 2.5, epsilon = 1e-15);
    }

    #[test]
    fn entropy_divergence_of_point_to_itself_is_zero() {
        let d = bregman_divergence(&entropy(), &[0.3, 0.7], &[0.3, 0.7]).unwrap();
        assert_abs_diff_eq!(d, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn entropy_divergence_matches_kl_by_hand() {
        let d = bregman_divergence(&entropy(), &[0.5, 0.5], &[0.25, 0.75]).unwrap();
        let expected = 0.5 * 2f64.ln() + 0.5 * (2.0f64 / 3.0).ln();
        assert_abs_diff_eq!(d, expected, epsilon = 1e-14);
        assert_abs_diff_eq!(d, 0.143841, epsilon = 1e-6);
    }

    #[test]
    fn divergence_errors() {
        assert!(matches!(
            bregman_divergence(&euclid(), &[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            bregman_divergence(&entropy(), &[1.2, -0.2], &[0.5, 0.5]),
            Err(Error::InfeasiblePoint(_))
        ));
    }

    #[test]
    fn entropy_floor_bounds() {
        assert!(entropy().with_entropy_floor(1e-10).is_ok());
        assert!(entropy().with_entropy_floor(0.0).is_err());
        assert!(entropy().with_entropy_floor(1e-6).is_err());
    }

    #[test]
    fn euclidean_interior_step_is_unprojected() {
        let set = ConstraintSet::cube(2, -1.0, 1.0).unwrap();
        let z = mirror_step(&euclid(), &set, &[0.0, 0.0], &[1.0, -1.0], 0.5).unwrap();
        assert_eq!(z.coords(), &[-0.5, 0.5]);
    }

    #[test]
    fn entropic_mirror_step_examples() {
        let set = ConstraintSet::simplex(2).unwrap();
        let z = mirror_step(&entropy(), &set, &[0.5, 0.5], &[0.0, 0.0], 3.7).unwrap();
        assert_abs_diff_eq!(z[0], 0.5, epsilon = 1e-15);
        let z = mirror_step(&entropy(), &set, &[0.5, 0.5], &[-(3f64.ln()), 0.0], 1.0).unwrap();
        assert_abs_diff_eq!(z[0], 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(z[1], 0.25, epsilon = 1e-12);
    }

    #[test]
    fn entropic_step_examples() {
        let z = entropic_step(&[0.5, 0.5], &[0.0, 0.0], 1.0).unwrap();
        assert_eq!(z.coords(), &[0.5, 0.5]);
        let z = entropic_step(&[0.5, 0.5], &[-(3f64.ln()), 0.0], 1.0).unwrap();
        assert_abs_diff_eq!(z[0], 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(z[1], 0.25, epsilon = 1e-12);
        for c in [-40.0, 0.0, 2.5, 1e3] {
            let z = entropic_step(&[0.2, 0.8], &[c, c], 1.0).unwrap();
            assert_abs_diff_eq!(z[0], 0.2, epsilon = 1e-12);
            assert_abs_diff_eq!(z[1], 0.8, epsilon = 1e-12);
        }
    }

    #[test]
    fn entropic_step_survives_huge_exponents() {
        let z = entropic_step(&[0.3, 0.7], &[-1e4, 1e4], 1.0).unwrap();
        assert!(z.is_finite());
        assert_abs_diff_eq!(z[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn projection_examples() {
        let cube = ConstraintSet::cube(2, -1.0, 1.0).unwrap();
        let z = bregman_project(&euclid(), &cube, &[2.0, -0.5]).unwrap();
        assert_eq!(z.coords(), &[1.0, -0.5]);
        let simplex = ConstraintSet::simplex(2).unwrap();
        let z = bregman_project(&euclid(), &simplex, &[0.5, 0.5]).unwrap();
        assert_eq!(z.coords(), &[0.5, 0.5]);
        let z = bregman_project(&euclid(), &simplex, &[1.5, 0.5]).unwrap();
        assert_abs_diff_eq!(z[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(z[1], 0.0, epsilon = 1e-15);
        assert!(matches!(
            bregman_project(&entropy(), &cube, &[0.5, 0.5]),
            Err(Error::UnsupportedPairing { .. })
        ));
        assert!(Setup::new(entropy(), cube).is_err());
    }

    /// Brute force over the 1-simplex at resolution 1e-4.
    #[test]
    fn simplex_projection_matches_grid_search() {
        let y = [1.5, 0.5];
        let (best, _) = (0..=10_000)
            .map(|k| {
                let w0 = k as f64 * 1e-4;
                let w = [w0, 1.0 - w0];
                (w0, (w[0] - y[0]).powi(2) + (w[1] - y[1]).powi(2))
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert_abs_diff_eq!(best, 1.0, epsilon = 1e-4);
        let z = project_onto_simplex(&y);
        assert_abs_diff_eq!(z[0], best, epsilon = 1e-4);
        // KKT: y − z = θ·1 − μ with μ ≥ 0 supported on zero coordinates.
        let theta = y[0] - z[0];
        assert!(y[1] - z[1] <= theta + 1e-12);
    }

    #[test]
    fn diameters() {
        let simplex10 = ConstraintSet::simplex(10).unwrap();
        let r = phi_diameter(&entropy(), &simplex10).unwrap();
        assert_abs_diff_eq!(r, 10f64.ln().sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(r, 1.51743, epsilon = 1e-5);
        let cube = ConstraintSet::cube(10, -1.0, 1.0).unwrap();
        assert_abs_diff_eq!(euclidean_diameter(&cube), 2.0 * 10f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(euclidean_diameter(&cube), 6.32456, epsilon = 1e-5);
        let simplex2 = ConstraintSet::simplex(2).unwrap();
        assert_abs_diff_eq!(euclidean_diameter(&simplex2), 2f64.sqrt());
        // ½‖x‖² over [−1,1]^10 ranges over [0, 5].
        assert_abs_diff_eq!(phi_diameter(&euclid(), &cube).unwrap(), 5f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn phi_minimizers() {
        let s = Setup::new(entropy(), ConstraintSet::simplex(4).unwrap()).unwrap();
        assert_eq!(s.phi_minimizer().coords(), &[0.25; 4]);
        let b = Setup::new(euclid(), ConstraintSet::cube(3, -1.0, 1.0).unwrap()).unwrap();
        assert_eq!(b.phi_minimizer().coords(), &[0.0; 3]);
        let shifted = Setup::new(euclid(), ConstraintSet::cube(2, 0.5, 1.0).unwrap()).unwrap();
        assert_eq!(shifted.phi_minimizer().coords(), &[0.5, 0.5]);
    }

    fn random_pairs(n: usize, seed: u64) -> Vec<(ConstraintSet, Point, Point)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|k| {
                let d = 2 + k % 9;
                let set = if k % 2 == 0 {
                    ConstraintSet::simplex(d).unwrap()
                } else {
                    ConstraintSet::cube(d, -1.0, 1.0).unwrap()
                };
                let x = set.sample_uniform(&mut rng);
                let y = set.sample_uniform(&mut rng);
                (set, x, y)
            })
            .collect()
    }

    #[test]
    fn divergence_is_nonnegative_and_strongly_convex() {
        for (set, x, y) in random_pairs(10_000, 11) {
            let geoms: &[MirrorGeometry] = match set.kind() {
                SetKind::Simplex => &[euclid(), entropy()],
                SetKind::Box => &[euclid()],
            };
            for geom in geoms {
                let d = bregman_divergence(geom, &x, &y).unwrap();
                assert!(d >= -1e-12);
                let lower = 0.5 * geom.sigma_phi() * x.distance_sq(&y);
                assert!(d >= lower - 1e-9, "{:?}: {d} < {lower}", geom.kind());
            }
        }
    }

    #[test]
    fn entropic_closed_form_matches_mirror_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in 0..1000 {
            let d = 2 + k % 9;
            let set = ConstraintSet::simplex(d).unwrap();
            let x = set.sample_uniform(&mut rng);
            let g: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
            let eta = rng.random_range(0.01..3.0);
            let a = entropic_step(&x, &g, eta).unwrap();
            let b = mirror_step(&entropy(), &set, &x, &g, eta).unwrap();
            for (u, v) in a.iter().zip(b.iter()) {
                assert_abs_diff_eq!(u, v, epsilon = 1e-10);
            }
        }
    }

    proptest! {
        #[test]
        fn euclidean_step_is_projected_gradient_step(
            coords in prop::collection::vec((-1.0f64..1.0, -10.0f64..10.0), 1..10),
            eta in 0.001f64..5.0,
        ) {
            let set = ConstraintSet::cube(coords.len(), -1.0, 1.0).unwrap();
            let x: Vec<f64> = coords.iter().map(|c| c.0).collect();
            let g: Vec<f64> = coords.iter().map(|c| c.1).collect();
            let z = mirror_step(&euclid(), &set, &x, &g, eta).unwrap();
            let shifted: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - eta * b).collect();
            let p = set.euclidean_projection(&shifted).unwrap();
            for (u, v) in z.iter().zip(p.iter()) {
                prop_assert!((u - v).abs() <= 1e-12);
            }
            prop_assert!(set.contains(&z, 1e-12));
        }

        #[test]
        fn simplex_steps_stay_feasible(
            raw in prop::collection::vec((0.01f64..1.0, -20.0f64..20.0), 2..11),
            eta in 0.001f64..10.0,
        ) {
            let set = ConstraintSet::simplex(raw.len()).unwrap();
            let total: f64 = raw.iter().map(|c| c.0).sum();
            let x: Vec<f64> = raw.iter().map(|c| c.0 / total).collect();
            let g: Vec<f64> = raw.iter().map(|c| c.1).collect();
            for geom in [euclid(), entropy()] {
                let z = mirror_step(&geom, &set, &x, &g, eta).unwrap();
                prop_assert!((z.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
                prop_assert!(z.iter().all(|&c| c >= 0.0));
            }
        }

        #[test]
        fn entropic_step_is_shift_invariant(
            raw in prop::collection::vec((0.01f64..1.0, -5.0f64..5.0), 2..11),
            shift in -50.0f64..50.0,
            eta in 0.01f64..2.0,
        ) {
            let total: f64 = raw.iter().map(|c| c.0).sum();
            let x: Vec<f64> = raw.iter().map(|c| c.0 / total).collect();
            let g: Vec<f64> = raw.iter().map(|c| c.1).collect();
            let g_shifted: Vec<f64> = g.iter().map(|v| v + shift).collect();
            let a = entropic_step(&x, &g, eta).unwrap();
            let b = entropic_step(&x, &g_shifted, eta).unwrap();
            for (u, v) in a.iter().zip(b.iter()) {
                prop_assert!((u - v).abs() <= 1e-12);
            }
        }
    }
}
