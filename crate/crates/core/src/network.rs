//! Time-varying communication graphs and their doubly stochastic mixing
//! matrices.
//!
//! Each round activates a random subset of the base topology's undirected
//! links and weights them with Metropolis-Hastings weights
//! `1/(1 + max(deg_i, deg_j))`, the diagonal absorbing the remainder. The
//! result is symmetric, hence doubly stochastic. When forcing is enabled,
//! every `B`-th round activates the whole base topology so every window of
//! `B` consecutive rounds is strongly connected by construction.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::seed;

pub type MixingMatrix = DMatrix<f64>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    /// A single cycle `0 – 1 – … – (m−1) – 0`.
    Ring,
    Complete,
    /// Undirected edges between zero-based node indices.
    Custom(Vec<(usize, usize)>),
}

impl Topology {
    /// Undirected base edges `(i, j)` with `i < j`, deduplicated.
    pub fn edges(&self, m: usize) -> Result<Vec<(usize, usize)>> {
        let mut edges: Vec<(usize, usize)> = match self {
            Topology::Ring => match m {
                0 | 1 => Vec::new(),
                2 => vec![(0, 1)],
                _ => (0..m).map(|i| (i, (i + 1) % m)).collect(),
            },
            Topology::Complete => (0..m)
                .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
                .collect(),
            Topology::Custom(list) => {
                for &(i, j) in list {
                    if i >= m || j >= m || i == j {
                        return Err(Error::InvalidParameter(format!(
                            "custom edge ({i}, {j}) is not a link between two of {m} nodes"
                        )));
                    }
                }
                list.clone()
            }
        };
        for e in edges.iter_mut() {
            if e.0 > e.1 {
                *e = (e.1, e.0);
            }
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(edges)
    }
}

/// Metropolis-Hastings weights for the undirected edge set `edges` over
/// `m` nodes.
pub fn metropolis_matrix(m: usize, edges: &[(usize, usize)]) -> MixingMatrix {
    let mut degree = vec![0usize; m];
    for &(i, j) in edges {
        degree[i] += 1;
        degree[j] += 1;
    }
    let mut a = DMatrix::zeros(m, m);
    for &(i, j) in edges {
        let w = 1.0 / (1 + degree[i].max(degree[j])) as f64;
        a[(i, j)] = w;
        a[(j, i)] = w;
    }
    for i in 0..m {
        let off: f64 = (0..m).filter(|&j| j != i).map(|j| a[(i, j)]).sum();
        a[(i, i)] = 1.0 - off;
    }
    a
}

/// Generator of the per-round mixing matrices `A(t)`, `t ≥ 1`.
///
/// Immutable after construction; `sample_matrix` is a pure function of the
/// schedule and the round index.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingSchedule {
    m: usize,
    topology: Topology,
    activation: f64,
    window: usize,
    seed: u64,
    forcing: bool,
    edges: Vec<(usize, usize)>,
    xi: f64,
}

impl MixingSchedule {
    pub fn new(
        m: usize,
        topology: Topology,
        activation: f64,
        window: usize,
        seed: u64,
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("node count must be positive".into()));
        }
        if !(activation > 0.0 && activation <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "activation must lie in (0, 1], got {activation}"
            )));
        }
        if window == 0 {
            return Err(Error::InvalidParameter("connectivity window B must be positive".into()));
        }
        let edges = topology.edges(m)?;
        if m > 1 && edges.is_empty() {
            return Err(Error::InvalidParameter(
                "base topology has no links, every round would be disconnected".into(),
            ));
        }
        let max_degree = {
            let mut degree = vec![0usize; m];
            for &(i, j) in &edges {
                degree[i] += 1;
                degree[j] += 1;
            }
            degree.into_iter().max().unwrap_or(0)
        };
        // Metropolis entries are ≥ 1/(1 + Δ) and so is every diagonal
        // entry, since a node of degree d keeps at least 1/(1 + d). A lone
        // node has diagonal 1, and ξ must stay below 1.
        let xi = (1.0 / (1 + max_degree) as f64).min(0.5);
        Ok(MixingSchedule {
            m,
            topology,
            activation,
            window,
            seed,
            forcing: true,
            edges,
            xi,
        })
    }

    /// Ring over `m` nodes with `⌈activation·m⌉` random links per round.
    pub fn ring(m: usize, activation: f64, window: usize, seed: u64) -> Result<Self> {
        Self::new(m, Topology::Ring, activation, window, seed)
    }

    /// Disables the full activation on every `B`-th round.
    pub fn without_forcing(mut self) -> Self {
        self.forcing = false;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn nodes(&self) -> usize {
        self.m
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn activation(&self) -> f64 {
        self.activation
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn forcing(&self) -> bool {
        self.forcing
    }

    pub fn base_edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Declared lower bound ξ on diagonal and activated entries.
    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn constants(&self) -> MixingConstants {
        mixing_constants(self.xi, self.m, self.window)
            .expect("schedule parameters validated at construction")
    }

    /// Number of links activated on an unforced round.
    pub fn links_per_round(&self) -> usize {
        let k = (self.activation * self.edges.len() as f64 - 1e-9).ceil() as usize;
        k.clamp(usize::from(!self.edges.is_empty()), self.edges.len())
    }

    /// Links active in round `t`.
    pub fn active_edges(&self, t: usize) -> Result<Vec<(usize, usize)>> {
        if t == 0 {
            return Err(Error::InvalidParameter("rounds are numbered from 1".into()));
        }
        if self.forcing && t.is_multiple_of(self.window) {
            return Ok(self.edges.clone());
        }
        let k = self.links_per_round();
        if k == self.edges.len() {
            return Ok(self.edges.clone());
        }
        let mut rng = seed::stream(self.seed, t as u64);
        let mut picked = rand::seq::index::sample(&mut rng, self.edges.len(), k).into_vec();
        picked.sort_unstable();
        Ok(picked.into_iter().map(|e| self.edges[e]).collect())
    }

    /// `A(t)`.
    pub fn sample_matrix(&self, t: usize) -> Result<MixingMatrix> {
        Ok(metropolis_matrix(self.m, &self.active_edges(t)?))
    }

    /// `A(t, ℓ) = A(t) A(t−1) ⋯ A(ℓ)`.
    pub fn transition_product(&self, t: usize, l: usize) -> Result<MixingMatrix> {
        if l == 0 || t < l {
            return Err(Error::InvalidParameter(format!(
                "transition product needs t ≥ ℓ ≥ 1, got t = {t}, ℓ = {l}"
            )));
        }
        let mut product = self.sample_matrix(l)?;
        for s in l + 1..=t {
            product = self.sample_matrix(s)? * product;
        }
        Ok(product)
    }
}

/// Applies one mixing round: `x_i = Σ_j A_ij z_j`.
pub fn mix(a: &MixingMatrix, z: &[Point]) -> Vec<Point> {
    let dim = z.first().map_or(0, Point::dim);
    (0..a.nrows())
        .map(|i| {
            let mut out = vec![0.0; dim];
            for (j, zj) in z.iter().enumerate() {
                let w = a[(i, j)];
                if w != 0.0 {
                    for (o, c) in out.iter_mut().zip(zj.iter()) {
                        *o += w * c;
                    }
                }
            }
            Point::from_vec_unchecked(out)
        })
        .collect()
}

/// Constants of the geometric mixing bound
/// `|[A(t,ℓ)]_ij − 1/m| ≤ α β^{t−ℓ+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixingConstants {
    pub alpha: f64,
    pub beta: f64,
}

impl MixingConstants {
    pub fn bound(&self, window_len: usize) -> f64 {
        self.alpha * self.beta.powi(window_len as i32)
    }
}

/// `α = (1 − ξ/(4m²))^{−2}`, `β = (1 − ξ/(4m²))^{1/B}`.
pub fn mixing_constants(xi: f64, m: usize, window: usize) -> Result<MixingConstants> {
    if !(xi > 0.0 && xi < 1.0) || m == 0 || window == 0 {
        return Err(Error::InvalidParameter(format!(
            "mixing constants need 0 < ξ < 1, m ≥ 1, B ≥ 1 (got ξ = {xi}, m = {m}, B = {window})"
        )));
    }
    let q = 1.0 - xi / (4.0 * (m * m) as f64);
    Ok(MixingConstants {
        alpha: q.powi(-2),
        beta: q.powf(1.0 / window as f64),
    })
}

/// Result of sampling a schedule against the network assumptions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assumption1Report {
    pub rounds: usize,
    pub declared_xi: f64,
    pub min_diagonal: f64,
    pub min_positive_entry: f64,
    pub max_stochastic_deviation: f64,
    pub max_asymmetry: f64,
    /// Zero-based indices `s` of windows `sB+1 ..= (s+1)B` whose union graph
    /// is not strongly connected.
    pub disconnected_windows: Vec<usize>,
}

impl Assumption1Report {
    pub fn passes(&self) -> bool {
        let tol = 1e-12;
        self.min_diagonal >= self.declared_xi - tol
            && self.min_positive_entry >= self.declared_xi - tol
            && self.max_stochastic_deviation <= tol
            && self.disconnected_windows.is_empty()
    }
}

fn strongly_connected(m: usize, arcs: &[Vec<bool>]) -> bool {
    let reach = |forward: bool| {
        let mut seen = vec![false; m];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for v in 0..m {
                let linked = if forward { arcs[u][v] } else { arcs[v][u] };
                if linked && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}

/// Samples rounds `1..=horizon` and checks the entry lower bound, double
/// stochasticity and strong connectivity of every complete `B`-window.
pub fn verify_assumption1(sched: &MixingSchedule, horizon: usize) -> Result<Assumption1Report> {
    let b = sched.window();
    if horizon < b {
        return Err(Error::InvalidParameter(format!(
            "horizon {horizon} is shorter than the window B = {b}"
        )));
    }
    let m = sched.nodes();
    let mut report = Assumption1Report {
        rounds: horizon,
        declared_xi: sched.xi(),
        min_diagonal: f64::INFINITY,
        min_positive_entry: f64::INFINITY,
        max_stochastic_deviation: 0.0,
        max_asymmetry: 0.0,
        disconnected_windows: Vec::new(),
    };
    let mut union = vec![vec![false; m]; m];
    for t in 1..=horizon {
        let a = sched.sample_matrix(t)?;
        for i in 0..m {
            let row: f64 = a.row(i).sum();
            let col: f64 = a.column(i).sum();
            report.max_stochastic_deviation = report
                .max_stochastic_deviation
                .max((row - 1.0).abs())
                .max((col - 1.0).abs());
            report.min_diagonal = report.min_diagonal.min(a[(i, i)]);
            for j in 0..m {
                let w = a[(i, j)];
                report.max_asymmetry = report.max_asymmetry.max((w - a[(j, i)]).abs());
                if w > 0.0 {
                    report.min_positive_entry = report.min_positive_entry.min(w);
                    if i != j {
                        // information flows from j to i
                        union[j][i] = true;
                    }
                }
            }
        }
        if t % b == 0 {
            if m > 1 && !strongly_connected(m, &union) {
                report.disconnected_windows.push(t / b - 1);
            }
            union.iter_mut().for_each(|r| r.fill(false));
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixingBoundReport {
    /// `max |[A(t,ℓ)]_ij − 1/m| − α β^{t−ℓ+1}` over the sampled windows.
    pub max_violation: f64,
    /// `(t, ℓ)` of the window attaining the maximum.
    pub worst_window: (usize, usize),
    pub windows: usize,
}

/// Draws `windows` random `(t, ℓ)` pairs with `ℓ ∈ [1, 1000]` and
/// `t − ℓ + 1 ∈ [1, max_len]` and checks the geometric mixing bound.
pub fn mixing_bound_check(
    sched: &MixingSchedule,
    windows: usize,
    max_len: usize,
    seed: u64,
) -> Result<MixingBoundReport> {
    if max_len == 0 {
        return Err(Error::InvalidParameter("window length must be positive".into()));
    }
    let consts = sched.constants();
    let target = 1.0 / sched.nodes() as f64;
    let mut rng = seed::stream(seed, 0);
    let mut report = MixingBoundReport {
        max_violation: f64::NEG_INFINITY,
        worst_window: (1, 1),
        windows,
    };
    for _ in 0..windows {
        let l = rng.random_range(1..=1000usize);
        let len = rng.random_range(1..=max_len);
        let t = l + len - 1;
        let product = sched.transition_product(t, l)?;
        let deviation = product.iter().map(|v| (v - target).abs()).fold(0.0, f64::max);
        let violation = deviation - consts.bound(len);
        if violation > report.max_violation {
            report.max_violation = violation;
            report.worst_window = (t, l);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn full_ring_of_three_is_uniform() {
        let s = MixingSchedule::ring(3, 1.0, 1, 0).unwrap();
        let a = s.sample_matrix(1).unwrap();
        for v in a.iter() {
            assert_abs_diff_eq!(*v, 1.0 / 3.0, epsilon = 1e-15);
        }
        let p = s.transition_product(5, 4).unwrap();
        for v in p.iter() {
            assert_abs_diff_eq!(*v, 1.0 / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn single_node_is_identity() {
        let s = MixingSchedule::ring(1, 0.5, 2, 9).unwrap();
        assert_eq!(s.sample_matrix(3).unwrap(), DMatrix::from_element(1, 1, 1.0));
        assert_eq!(s.transition_product(7, 2).unwrap(), DMatrix::from_element(1, 1, 1.0));
        assert!(verify_assumption1(&s, 4).unwrap().passes());
        let r = mixing_bound_check(&s, 20, 10, 1).unwrap();
        assert!(r.max_violation <= 0.0);
    }

    #[test]
    fn matching_on_ring_of_four_gives_blocks() {
        let a = metropolis_matrix(4, &[(0, 1), (2, 3)]);
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.5, 0.5, 0.0, 0.0, //
                0.5, 0.5, 0.0, 0.0, //
                0.0, 0.0, 0.5, 0.5, //
                0.0, 0.0, 0.5, 0.5,
            ],
        );
        assert_eq!(a, expected);
    }

    #[test]
    fn single_factor_product_is_the_matrix() {
        let s = MixingSchedule::ring(10, 0.5, 2, 3).unwrap();
        assert_eq!(s.transition_product(7, 7).unwrap(), s.sample_matrix(7).unwrap());
        assert!(s.transition_product(3, 4).is_err());
        assert!(s.sample_matrix(0).is_err());
    }

    #[test]
    fn half_activation_picks_ceil_half() {
        let s = MixingSchedule::ring(40, 0.5, 2, 3).unwrap();
        assert_eq!(s.active_edges(1).unwrap().len(), 20);
        assert_eq!(s.active_edges(2).unwrap().len(), 40);
        let odd = MixingSchedule::ring(5, 0.5, 2, 3).unwrap();
        assert_eq!(odd.links_per_round(), 3);
    }

    #[test]
    fn constants_match_formula() {
        let c = mixing_constants(0.5, 2, 1).unwrap();
        assert_abs_diff_eq!(c.beta, 0.96875, epsilon = 1e-15);
        assert_abs_diff_eq!(c.alpha, 0.96875f64.powi(-2), epsilon = 1e-15);
        assert_abs_diff_eq!(c.alpha, 1.0655567, epsilon = 1e-6);
        let c = mixing_constants(0.25, 40, 2).unwrap();
        assert_abs_diff_eq!(c.alpha, 1.0000781, epsilon = 1e-7);
        assert_abs_diff_eq!(c.beta, 0.9999805, epsilon = 1e-7);
        let c = mixing_constants(0.3, 1, 3).unwrap();
        assert_abs_diff_eq!(c.beta, (1.0f64 - 0.3 / 4.0).powf(1.0 / 3.0), epsilon = 1e-15);
        assert!(mixing_constants(1.0, 3, 1).is_err());
    }

    #[test]
    fn declared_xi_for_ring_is_one_third() {
        let s = MixingSchedule::ring(40, 0.5, 2, 3).unwrap();
        assert_abs_diff_eq!(s.xi(), 1.0 / 3.0);
    }

    #[test]
    fn study_ring_passes_assumption_checks() {
        let s = MixingSchedule::ring(40, 0.5, 2, 17).unwrap();
        let r = verify_assumption1(&s, 400).unwrap();
        assert!(r.passes(), "{r:?}");
        assert_eq!(r.max_asymmetry, 0.0);
    }

    #[test]
    fn sparse_unforced_schedule_fails_with_window() {
        let s = MixingSchedule::ring(40, 0.05, 2, 17).unwrap().without_forcing();
        let r = verify_assumption1(&s, 10).unwrap();
        assert!(!r.passes());
        assert_eq!(r.disconnected_windows, vec![0, 1, 2, 3, 4]);
        assert!(verify_assumption1(&s, 1).is_err());
    }

    #[test]
    fn empty_base_topology_is_rejected() {
        assert!(MixingSchedule::new(3, Topology::Custom(vec![]), 0.5, 1, 0).is_err());
        assert!(MixingSchedule::new(3, Topology::Custom(vec![(0, 3)]), 0.5, 1, 0).is_err());
        assert!(MixingSchedule::ring(3, 0.0, 1, 0).is_err());
    }

    #[test]
    fn matrices_are_deterministic_per_round() {
        let s = MixingSchedule::ring(40, 0.5, 2, 99).unwrap();
        let other = s.clone().with_seed(100);
        assert_eq!(s.sample_matrix(13).unwrap(), s.sample_matrix(13).unwrap());
        assert_ne!(s.sample_matrix(13).unwrap(), other.sample_matrix(13).unwrap());
    }

    #[test]
    fn mixing_preserves_network_average() {
        let s = MixingSchedule::ring(12, 0.5, 3, 4).unwrap();
        let z: Vec<Point> = (0..12)
            .map(|i| Point::new(vec![i as f64, (i * i) as f64 * 0.1, -1.0]).unwrap())
            .collect();
        for t in 1..20 {
            let x = mix(&s.sample_matrix(t).unwrap(), &z);
            for k in 0..3 {
                let before: f64 = z.iter().map(|p| p[k]).sum::<f64>() / 12.0;
                let after: f64 = x.iter().map(|p| p[k]).sum::<f64>() / 12.0;
                assert_abs_diff_eq!(before, after, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn complete_graph_mixes_in_one_round() {
        let s = MixingSchedule::new(5, Topology::Complete, 1.0, 1, 0).unwrap();
        let a = s.sample_matrix(1).unwrap();
        for v in a.iter() {
            assert_abs_diff_eq!(*v, 0.2, epsilon = 1e-15);
        }
    }
}
