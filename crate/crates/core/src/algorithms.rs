//! The distributed engines: DSMD with diminishing steps `η_t = 1/(σ_F t)`,
//! its epoch variant with doubling epochs and halving constant steps, and
//! the Euclidean DSPS baseline. Also the closed-form constants and
//! right-hand sides of the convergence bounds.
//!
//! One round of every engine is
//!
//! 1. each agent queries its oracle at `x_{i,t}`;
//! 2. `z_{i,t+1}` is the mirror step from `x_{i,t}` along the noisy
//!    subgradient with the step in force;
//! 3. `x_{i,t+1} = Σ_j [A(t)]_ij z_{j,t+1}`.
//!
//! Round indices are global and start at 1; the epoch engine consumes one
//! schedule sequentially across epochs.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{distance, MirrorGeometry, Point, Setup, FEASIBILITY_TOL};
use crate::network::{mix, MixingSchedule};
use crate::problem::{ProblemInstance, StochasticOracle};
use crate::seed;

/// First epoch length of the epoch algorithm.
pub const FIRST_EPOCH_LENGTH: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// `η_t = 1/(σ_F t)`.
    Harmonic { sigma_f: f64 },
    Constant(f64),
}

impl StepRule {
    pub fn eta(&self, t: usize) -> f64 {
        match *self {
            StepRule::Harmonic { sigma_f } => 1.0 / (sigma_f * t as f64),
            StepRule::Constant(eta) => eta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitialPoints {
    /// `argmin_X Φ` at every node.
    #[default]
    PhiMinimizer,
    /// Independent uniform points, seeded from the realization seed.
    RandomFeasible,
    Given(Vec<Point>),
}

/// Everything a run needs besides its step-size policy.
#[derive(Debug, Clone)]
pub struct RunContext<'a> {
    pub setup: &'a Setup,
    pub instance: &'a ProblemInstance,
    pub schedule: &'a MixingSchedule,
    pub initial: InitialPoints,
    /// Rounds after which a [`Snapshot`] is taken.
    pub checkpoints: Vec<usize>,
    pub record_steps: bool,
}

impl<'a> RunContext<'a> {
    pub fn new(setup: &'a Setup, instance: &'a ProblemInstance, schedule: &'a MixingSchedule) -> Self {
        RunContext {
            setup,
            instance,
            schedule,
            initial: InitialPoints::PhiMinimizer,
            checkpoints: Vec::new(),
            record_steps: false,
        }
    }

    pub fn with_initial(mut self, initial: InitialPoints) -> Self {
        self.initial = initial;
        self
    }

    pub fn with_checkpoints(mut self, checkpoints: impl Into<Vec<usize>>) -> Self {
        self.checkpoints = checkpoints.into();
        self
    }

    pub fn recording_steps(mut self) -> Self {
        self.record_steps = true;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.instance.set() != self.setup.set() {
            return Err(Error::InvalidParameter(
                "problem instance and setup use different constraint sets".into(),
            ));
        }
        if self.instance.nodes() != self.schedule.nodes() {
            return Err(Error::InvalidParameter(format!(
                "instance has {} agents but the schedule has {} nodes",
                self.instance.nodes(),
                self.schedule.nodes()
            )));
        }
        if self.checkpoints.contains(&0) {
            return Err(Error::InvalidParameter("checkpoints are rounds ≥ 1".into()));
        }
        Ok(())
    }

    fn initial_points(&self, realization_seed: u64) -> Result<Vec<Point>> {
        let m = self.instance.nodes();
        let set = self.setup.set();
        let points = match &self.initial {
            InitialPoints::PhiMinimizer => vec![self.setup.phi_minimizer(); m],
            InitialPoints::RandomFeasible => {
                let mut rng = seed::stream(seed::derive(realization_seed, seed::INITIAL), 0);
                (0..m).map(|_| set.sample_uniform(&mut rng)).collect()
            }
            InitialPoints::Given(points) => {
                if points.len() != m {
                    return Err(Error::InvalidParameter(format!(
                        "{} initial points given for {m} agents",
                        points.len()
                    )));
                }
                if let Some(i) = points.iter().position(|p| !set.contains(p, FEASIBILITY_TOL)) {
                    return Err(Error::InfeasiblePoint(format!("initial point of agent {i}")));
                }
                points.clone()
            }
        };
        Ok(points)
    }
}

/// DSMD over a fixed horizon with a given step rule.
#[derive(Debug, Clone)]
pub struct DsmdRun<'a> {
    pub context: RunContext<'a>,
    pub rounds: usize,
    pub step: StepRule,
}

impl<'a> DsmdRun<'a> {
    /// Uses the theoretical step `η_t = 1/(σ_F t)` with the instance's `σ_F`.
    pub fn new(context: RunContext<'a>, rounds: usize) -> Self {
        let sigma_f = context.instance.sigma_f();
        DsmdRun {
            context,
            rounds,
            step: StepRule::Harmonic { sigma_f },
        }
    }

    pub fn with_step(mut self, step: StepRule) -> Self {
        self.step = step;
        self
    }
}

/// Per-agent iterate and running-average accumulator.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub x: Point,
    pub avg_accum: Point,
    pub steps: usize,
}

impl AgentState {
    fn new(x: Point) -> Self {
        let dim = x.dim();
        AgentState {
            x,
            avg_accum: Point::zeros(dim),
            steps: 0,
        }
    }

    fn accumulate(&mut self) {
        self.avg_accum.add_assign(&self.x);
        self.steps += 1;
    }

    fn reset_average(&mut self) {
        self.avg_accum = Point::zeros(self.x.dim());
        self.steps = 0;
    }

    /// Running average of the accumulated iterates; the iterate itself when
    /// nothing has been accumulated.
    pub fn average(&self) -> Point {
        if self.steps == 0 {
            self.x.clone()
        } else {
            self.avg_accum.scaled(1.0 / self.steps as f64)
        }
    }
}

/// One mirror step of one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub round: usize,
    pub node: usize,
    pub x: Point,
    pub gradient: Point,
    pub z: Point,
    pub eta: f64,
}

/// State after `round` rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub round: usize,
    /// Step size used in round `round`.
    pub eta: f64,
    /// The algorithm's output at this point: the running average `x̂_{j,t}`
    /// for DSMD, the latest warm-start point for the epoch algorithm.
    pub estimates: Vec<Point>,
    /// Current iterates `x_{j,t+1}`.
    pub iterates: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunDiagnostics {
    pub rounds: usize,
    /// `max ‖z_{i,t+1} − x_{i,t}‖ − (η_t/σ_Φ)‖ĝ_{i,t}‖` over all steps.
    pub max_step_excess: f64,
    /// Largest change of the network average caused by a mixing round.
    pub max_average_drift: f64,
    /// Per node `j`: `Σ_t Σ_i ‖x_{i,t} − x_{j,t}‖` over the executed rounds.
    pub cumulative_disagreement: Vec<f64>,
    /// `Σ_t η_t` over the executed rounds.
    pub eta_sum: f64,
    /// `Σ_i ‖x_{i,1}‖`.
    pub initial_norm_sum: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochSummary {
    pub index: usize,
    pub length: usize,
    pub eta: f64,
    pub first_round: usize,
    pub last_round: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub initial: Vec<Point>,
    /// Final output: `x̂_{i,T}` for DSMD, `x^{k†+1}_{i,1}` for Epoch-DSMD.
    pub estimates: Vec<Point>,
    /// Final iterates.
    pub iterates: Vec<Point>,
    pub snapshots: Vec<Snapshot>,
    /// Recorded steps in (round, node) order, when requested.
    pub steps: Vec<StepRecord>,
    pub epochs: Vec<EpochSummary>,
    pub diagnostics: RunDiagnostics,
}

struct Engine<'a> {
    geometry: MirrorGeometry,
    setup: &'a Setup,
    schedule: &'a MixingSchedule,
    oracles: Vec<StochasticOracle>,
    agents: Vec<AgentState>,
    round: usize,
    record_steps: bool,
    steps: Vec<StepRecord>,
    diagnostics: RunDiagnostics,
    checkpoints: Vec<usize>,
    next_checkpoint: usize,
    snapshots: Vec<Snapshot>,
}

impl<'a> Engine<'a> {
    fn new(context: &RunContext<'a>, setup: &'a Setup, realization_seed: u64) -> Result<Self> {
        context.validate()?;
        let initial = context.initial_points(realization_seed)?;
        let m = initial.len();
        let mut checkpoints = context.checkpoints.clone();
        checkpoints.sort_unstable();
        checkpoints.dedup();
        Ok(Engine {
            geometry: *setup.geometry(),
            setup,
            schedule: context.schedule,
            oracles: context.instance.oracles(realization_seed),
            diagnostics: RunDiagnostics {
                rounds: 0,
                max_step_excess: f64::NEG_INFINITY,
                max_average_drift: 0.0,
                cumulative_disagreement: vec![0.0; m],
                eta_sum: 0.0,
                initial_norm_sum: initial.iter().map(Point::norm).sum(),
            },
            agents: initial.into_iter().map(AgentState::new).collect(),
            round: 0,
            record_steps: context.record_steps,
            steps: Vec::new(),
            checkpoints,
            next_checkpoint: 0,
            snapshots: Vec::new(),
        })
    }

    /// Folds the current iterates `x_{·,t}` into the running averages and
    /// the disagreement sums.
    fn observe(&mut self) {
        for agent in &mut self.agents {
            agent.accumulate();
        }
        for (j, sum) in self.diagnostics.cumulative_disagreement.iter_mut().enumerate() {
            let xj = &self.agents[j].x;
            *sum += self.agents.iter().map(|a| distance(&a.x, xj)).sum::<f64>();
        }
    }

    /// Executes round `self.round + 1` with step `eta`.
    fn advance(&mut self, eta: f64) -> Result<()> {
        let t = self.round + 1;
        let sigma_phi = self.geometry.sigma_phi();
        let set = self.setup.set();
        let mut z = Vec::with_capacity(self.agents.len());
        for (i, (agent, oracle)) in self.agents.iter().zip(self.oracles.iter_mut()).enumerate() {
            let g = oracle.query(&agent.x);
            if !g.is_finite() {
                return Err(Error::NonFiniteIterate { round: t, node: i });
            }
            let zi = self.setup.mirror_step(&agent.x, &g, eta)?;
            if !zi.is_finite() {
                return Err(Error::NonFiniteIterate { round: t, node: i });
            }
            if !set.contains(&zi, FEASIBILITY_TOL) {
                return Err(Error::InfeasibleIterate { round: t, node: i });
            }
            let excess = zi.distance(&agent.x) - eta / sigma_phi * g.norm();
            self.diagnostics.max_step_excess = self.diagnostics.max_step_excess.max(excess);
            if self.record_steps {
                self.steps.push(StepRecord {
                    round: t,
                    node: i,
                    x: agent.x.clone(),
                    gradient: g,
                    z: zi.clone(),
                    eta,
                });
            }
            z.push(zi);
        }
        let a = self.schedule.sample_matrix(t)?;
        let mixed = mix(&a, &z);
        let m = mixed.len() as f64;
        for k in 0..self.setup.dim() {
            let before: f64 = z.iter().map(|p| p[k]).sum::<f64>() / m;
            let after: f64 = mixed.iter().map(|p| p[k]).sum::<f64>() / m;
            self.diagnostics.max_average_drift =
                self.diagnostics.max_average_drift.max((before - after).abs());
        }
        for (i, (agent, xi)) in self.agents.iter_mut().zip(mixed).enumerate() {
            if !xi.is_finite() {
                return Err(Error::NonFiniteIterate { round: t, node: i });
            }
            if !set.contains(&xi, FEASIBILITY_TOL) {
                return Err(Error::InfeasibleIterate { round: t, node: i });
            }
            agent.x = xi;
        }
        self.round = t;
        self.diagnostics.rounds = t;
        self.diagnostics.eta_sum += eta;
        Ok(())
    }

    /// Whether a checkpoint falls on the round just executed.
    fn checkpoint_due(&mut self) -> bool {
        while self.next_checkpoint < self.checkpoints.len()
            && self.checkpoints[self.next_checkpoint] < self.round
        {
            self.next_checkpoint += 1;
        }
        self.checkpoints.get(self.next_checkpoint) == Some(&self.round)
    }

    fn snapshot(&mut self, eta: f64, estimates: Vec<Point>) {
        self.next_checkpoint += 1;
        let snapshot = Snapshot {
            round: self.round,
            eta,
            estimates,
            iterates: self.iterates(),
        };
        self.snapshots.push(snapshot);
    }

    fn iterates(&self) -> Vec<Point> {
        self.agents.iter().map(|a| a.x.clone()).collect()
    }

    fn averages(&self) -> Vec<Point> {
        self.agents.iter().map(AgentState::average).collect()
    }

    fn finish(self, initial: Vec<Point>, estimates: Vec<Point>, epochs: Vec<EpochSummary>) -> RunOutput {
        let iterates = self.iterates();
        let mut diagnostics = self.diagnostics;
        if diagnostics.rounds == 0 {
            diagnostics.max_step_excess = 0.0;
        }
        RunOutput {
            initial,
            estimates,
            iterates,
            snapshots: self.snapshots,
            steps: self.steps,
            epochs,
            diagnostics,
        }
    }
}

fn run_with_setup(run: &DsmdRun<'_>, setup: &Setup, realization_seed: u64) -> Result<RunOutput> {
    if run.rounds == 0 {
        return Err(Error::InvalidParameter("a run needs at least one round".into()));
    }
    let mut engine = Engine::new(&run.context, setup, realization_seed)?;
    let initial = engine.iterates();
    for t in 1..=run.rounds {
        engine.observe();
        let eta = run.step.eta(t);
        engine.advance(eta)?;
        if engine.checkpoint_due() {
            let averages = engine.averages();
            engine.snapshot(eta, averages);
        }
    }
    let estimates = engine.averages();
    Ok(engine.finish(initial, estimates, Vec::new()))
}

/// Distributed stochastic mirror descent. The output estimates are the
/// running averages `x̂_{i,T} = (1/T) Σ_{t=1}^T x_{i,t}`.
pub fn run_dsmd(run: &DsmdRun<'_>, realization_seed: u64) -> Result<RunOutput> {
    run_with_setup(run, run.context.setup, realization_seed)
}

/// Distributed stochastic projected subgradient: DSMD with the Euclidean
/// mirror map over the same constraint set.
pub fn run_dsps(run: &DsmdRun<'_>, realization_seed: u64) -> Result<RunOutput> {
    let setup = Setup::new(MirrorGeometry::euclidean(), run.context.setup.set().clone())?;
    run_with_setup(run, &setup, realization_seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Epoch {
    pub length: usize,
    pub eta: f64,
}

/// Doubling epoch lengths and halving step sizes that fit in a horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochSchedule {
    pub horizon: usize,
    pub epochs: Vec<Epoch>,
}

impl EpochSchedule {
    /// `T_1 = 4`, `η_1 = 1/σ_F`.
    pub fn new(horizon: usize, sigma_f: f64) -> Result<Self> {
        if !(sigma_f > 0.0 && sigma_f.is_finite()) {
            return Err(Error::InvalidParameter(format!("σ_F must be positive, got {sigma_f}")));
        }
        Self::with_first_epoch(horizon, FIRST_EPOCH_LENGTH, 1.0 / sigma_f)
    }

    /// Epochs `(T_k, η_k)` with `T_{k+1} = 2T_k`, `η_{k+1} = η_k/2`, kept
    /// while `Σ_{ℓ≤k} T_ℓ ≤ horizon`.
    pub fn with_first_epoch(horizon: usize, first_length: usize, first_eta: f64) -> Result<Self> {
        if first_length == 0 || !(first_eta > 0.0 && first_eta.is_finite()) {
            return Err(Error::InvalidParameter(
                "first epoch needs positive length and step size".into(),
            ));
        }
        if horizon < first_length {
            return Err(Error::InvalidParameter(format!(
                "horizon {horizon} is shorter than the first epoch ({first_length} rounds)"
            )));
        }
        let mut epochs = Vec::new();
        let (mut length, mut eta, mut used) = (first_length, first_eta, 0usize);
        while used + length <= horizon {
            epochs.push(Epoch { length, eta });
            used += length;
            length *= 2;
            eta /= 2.0;
        }
        Ok(EpochSchedule { horizon, epochs })
    }

    /// Number of completed epochs `k†`.
    pub fn k_dagger(&self) -> usize {
        self.epochs.len()
    }

    /// `Σ_{ℓ≤k†} T_ℓ`; rounds past it are discarded.
    pub fn total_rounds(&self) -> usize {
        self.epochs.iter().map(|e| e.length).sum()
    }

    /// Rounds at which an epoch ends, i.e. `T_1 (2^k − 1)`.
    pub fn epoch_ends(&self) -> Vec<usize> {
        self.epochs
            .iter()
            .scan(0, |acc, e| {
                *acc += e.length;
                Some(*acc)
            })
            .collect()
    }
}

/// `epoch_schedule(T, σ_F)` with the standard first epoch.
pub fn epoch_schedule(horizon: usize, sigma_f: f64) -> Result<EpochSchedule> {
    EpochSchedule::new(horizon, sigma_f)
}

/// Epoch-DSMD: each epoch runs the DSMD inner loop with a constant step
/// and warm-starts the next epoch from the per-node epoch averages.
///
/// Snapshots report the latest warm-start point as the estimate; a
/// checkpoint on an epoch's last round sees that epoch's average.
pub fn run_epoch_dsmd(
    context: &RunContext<'_>,
    schedule: &EpochSchedule,
    realization_seed: u64,
) -> Result<RunOutput> {
    if schedule.epochs.is_empty() {
        return Err(Error::InvalidParameter("epoch schedule has no complete epoch".into()));
    }
    let mut engine = Engine::new(context, context.setup, realization_seed)?;
    let initial = engine.iterates();
    let mut warm = initial.clone();
    let mut summaries = Vec::with_capacity(schedule.epochs.len());
    for (k, epoch) in schedule.epochs.iter().enumerate() {
        let first_round = engine.round + 1;
        for agent in &mut engine.agents {
            agent.reset_average();
        }
        for s in 1..=epoch.length {
            engine.observe();
            engine.advance(epoch.eta)?;
            if s == epoch.length {
                warm = engine.averages();
                for (agent, start) in engine.agents.iter_mut().zip(&warm) {
                    agent.x = start.clone();
                }
            }
            if engine.checkpoint_due() {
                engine.snapshot(epoch.eta, warm.clone());
            }
        }
        summaries.push(EpochSummary {
            index: k + 1,
            length: epoch.length,
            eta: epoch.eta,
            first_round,
            last_round: engine.round,
        });
    }
    Ok(engine.finish(initial, warm, summaries))
}

/// Largest `‖z_{i,t+1} − x_{i,t}‖ − (η_t/σ_Φ)‖ĝ_{i,t}‖` over recorded steps.
pub fn step_bound_check(steps: &[StepRecord], sigma_phi: f64) -> f64 {
    steps
        .iter()
        .map(|s| s.z.distance(&s.x) - s.eta / sigma_phi * s.gradient.norm())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Inputs of the closed-form bound constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoremInputs {
    pub alpha: f64,
    pub beta: f64,
    #[serde(rename = "G")]
    pub g: f64,
    #[serde(rename = "sigma_F")]
    pub sigma_f: f64,
    #[serde(rename = "sigma_Phi")]
    pub sigma_phi: f64,
    pub m: usize,
    #[serde(rename = "R_X")]
    pub r_x: f64,
    #[serde(rename = "R_PhiX")]
    pub r_phi_x: f64,
    /// `Σ_i E‖x_{i,1}‖`.
    pub initial_norm_sum: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoremConstants {
    pub inputs: TheoremInputs,
    pub c: f64,
    pub c_prime: f64,
    pub c1: f64,
    pub c2: f64,
    pub c_hat: f64,
}

impl TheoremConstants {
    pub fn evaluate(inputs: TheoremInputs) -> Self {
        let TheoremInputs {
            alpha,
            beta,
            g,
            sigma_f,
            sigma_phi,
            m,
            r_x,
            r_phi_x,
            initial_norm_sum,
        } = inputs;
        let m = m as f64;
        let mixing = alpha * beta / (1.0 - beta);
        let c = 2.0 * g * g / (sigma_f * sigma_f * sigma_phi) * (1.0 + 4.0 * mixing * m / sigma_phi);
        // G to the first power, as stated.
        let c_prime = 2.0 * g / (sigma_f * sigma_phi) * (2.0 * mixing + 1.0) * initial_norm_sum;
        let c1 = m * g * (2.0 * mixing + 1.0) * (m * r_x + initial_norm_sum);
        let c2 = m * g * g / 2.0 + 2.0 * mixing * m * m * g * g / sigma_phi;
        let c_hat = ((sigma_f * c1 + 4.0 * c2) / (4.0 * sigma_f * sigma_f * sigma_phi))
            .max(m * r_phi_x * r_phi_x / (4.0 * sigma_phi));
        TheoremConstants {
            inputs,
            c,
            c_prime,
            c1,
            c2,
            c_hat,
        }
    }

    /// `c ln(T)/T + c′/T`; the guarantee covers `T ≥ 3`.
    pub fn theorem1_bound(&self, horizon: f64) -> f64 {
        (self.c * horizon.ln() + self.c_prime) / horizon
    }

    /// `64 ĉ / T`; the guarantee covers `T ≥ 4` and bounds the node sum
    /// `Σ_i E‖x^{k†+1}_{i,1} − x*‖²`.
    pub fn theorem2_bound(&self, horizon: f64) -> f64 {
        64.0 * self.c_hat / horizon
    }

    /// Right-hand side of the disagreement bound:
    /// `m(2αβ/(1−β) + 1) Σ_i E‖x_{i,1}‖ + 2αβm²G/((1−β)σ_Φ) Σ_t η_t`.
    pub fn disagreement_bound(&self, eta_sum: f64) -> f64 {
        let TheoremInputs {
            alpha,
            beta,
            g,
            sigma_phi,
            m,
            initial_norm_sum,
            ..
        } = self.inputs;
        let m = m as f64;
        let mixing = alpha * beta / (1.0 - beta);
        m * (2.0 * mixing + 1.0) * initial_norm_sum + 2.0 * mixing * m * m * g / sigma_phi * eta_sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConstraintSet;
    use crate::problem::QuadraticObjective;
    use approx::assert_abs_diff_eq;

    fn box_setup(d: usize) -> Setup {
        Setup::new(MirrorGeometry::euclidean(), ConstraintSet::cube(d, -1.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn epoch_schedule_examples() {
        let s = epoch_schedule(60, 1.0).unwrap();
        let pairs: Vec<(usize, f64)> = s.epochs.iter().map(|e| (e.length, e.eta)).collect();
        assert_eq!(pairs, vec![(4, 1.0), (8, 0.5), (16, 0.25), (32, 0.125)]);
        assert_eq!(s.k_dagger(), 4);
        assert_eq!(s.total_rounds(), 60);
        let s = epoch_schedule(4, 2.0).unwrap();
        assert_eq!(s.epochs, vec![Epoch { length: 4, eta: 0.5 }]);
        let s = epoch_schedule(59, 1.0).unwrap();
        assert_eq!(s.k_dagger(), 3);
        assert_eq!(s.total_rounds(), 28);
        assert_eq!(s.epoch_ends(), vec![4, 12, 28]);
        assert!(epoch_schedule(3, 1.0).is_err());
    }

    #[test]
    fn harmonic_steps_decrease() {
        let rule = StepRule::Harmonic { sigma_f: 2.0 };
        assert_eq!(rule.eta(1), 0.5);
        assert!((1..100).all(|t| rule.eta(t + 1) < rule.eta(t)));
    }

    #[test]
    fn theorem_bounds_at_special_horizons() {
        let k = TheoremConstants::evaluate(TheoremInputs {
            alpha: 1.2,
            beta: 0.9,
            g: 3.0,
            sigma_f: 0.7,
            sigma_phi: 1.0,
            m: 5,
            r_x: 2.0,
            r_phi_x: 1.5,
            initial_norm_sum: 0.4,
        });
        let e = std::f64::consts::E;
        assert_abs_diff_eq!(k.theorem1_bound(e), (k.c + k.c_prime) / e, epsilon = 1e-12);
        assert_abs_diff_eq!(k.theorem2_bound(64.0), k.c_hat, epsilon = 1e-12);
    }

    #[test]
    fn theorem_constants_by_hand() {
        // α = 1, β = 1/2 ⇒ αβ/(1−β) = 1.
        let k = TheoremConstants::evaluate(TheoremInputs {
            alpha: 1.0,
            beta: 0.5,
            g: 2.0,
            sigma_f: 1.0,
            sigma_phi: 1.0,
            m: 2,
            r_x: 1.0,
            r_phi_x: 1.0,
            initial_norm_sum: 1.0,
        });
        assert_abs_diff_eq!(k.c, 8.0 * (1.0 + 8.0));
        assert_abs_diff_eq!(k.c_prime, 4.0 * 3.0);
        assert_abs_diff_eq!(k.c1, 2.0 * 2.0 * 3.0 * (2.0 + 1.0));
        assert_abs_diff_eq!(k.c2, 4.0 + 2.0 * 4.0 * 4.0);
        assert_abs_diff_eq!(k.c_hat, (36.0 + 4.0 * 36.0) / 4.0);
        assert_abs_diff_eq!(k.disagreement_bound(2.0), 2.0 * 3.0 + 2.0 * 4.0 * 2.0 * 2.0);
    }

    #[test]
    fn single_node_noiseless_run_converges() {
        let setup = box_setup(3);
        let b = Point::new(vec![0.3, -0.2, 0.5]).unwrap();
        let objectives = vec![QuadraticObjective::new(1.0, b.clone()).unwrap()];
        let instance =
            ProblemInstance::certified(objectives, setup.set().clone(), setup.geometry(), 0.0, 0).unwrap();
        assert_eq!(instance.sigma_f(), 2.0);
        let schedule = MixingSchedule::ring(1, 0.5, 2, 0).unwrap();
        let run = DsmdRun::new(RunContext::new(&setup, &instance, &schedule), 10_000);
        let out = run_dsmd(&run, 1).unwrap();
        assert!(out.estimates[0].distance_sq(&b) <= 1e-3);
        let dsps = run_dsps(&run, 1).unwrap();
        assert!(dsps.estimates[0].distance_sq(&b) <= 1e-3);
    }

    #[test]
    fn optimum_is_a_fixed_point_without_noise() {
        let setup = box_setup(4);
        let objectives = crate::problem::DataScheme::default()
            .generate(6, setup.set(), 8)
            .unwrap()
            .into_iter()
            .map(|o| QuadraticObjective::new(o.weight(), Point::new(vec![0.1, 0.2, -0.3, 0.4]).unwrap()).unwrap())
            .collect();
        let instance =
            ProblemInstance::certified(objectives, setup.set().clone(), setup.geometry(), 0.0, 0).unwrap();
        let star = instance.global_optimum();
        let schedule = MixingSchedule::ring(6, 0.5, 2, 5).unwrap();
        let context = RunContext::new(&setup, &instance, &schedule)
            .with_initial(InitialPoints::Given(vec![star.clone(); 6]))
            .with_checkpoints(vec![1, 5, 50]);
        let out = run_dsmd(&DsmdRun::new(context, 50), 3).unwrap();
        for snap in &out.snapshots {
            for x in &snap.iterates {
                assert!(x.distance(&star) <= 1e-14);
            }
        }
        assert_eq!(out.snapshots.len(), 3);
    }

    #[test]
    fn single_epoch_equals_constant_step_dsmd() {
        let setup = Setup::new(MirrorGeometry::negative_entropy(), ConstraintSet::simplex(5).unwrap()).unwrap();
        let objectives = crate::problem::DataScheme::default().generate(7, setup.set(), 2).unwrap();
        let instance =
            ProblemInstance::certified(objectives, setup.set().clone(), setup.geometry(), 0.25, 4).unwrap();
        let schedule = MixingSchedule::ring(7, 0.5, 2, 6).unwrap();
        let context = RunContext::new(&setup, &instance, &schedule).recording_steps();
        let epochs = epoch_schedule(4, instance.sigma_f()).unwrap();
        assert_eq!(epochs.k_dagger(), 1);
        let epoch = run_epoch_dsmd(&context, &epochs, 10).unwrap();
        let dsmd = run_dsmd(
            &DsmdRun::new(context, 4).with_step(StepRule::Constant(1.0 / instance.sigma_f())),
            10,
        )
        .unwrap();
        assert_eq!(epoch.steps, dsmd.steps);
        assert_eq!(epoch.estimates, dsmd.estimates);
    }

    #[test]
    fn rejects_mismatched_inputs() {
        let setup = box_setup(2);
        let objectives = crate::problem::DataScheme::default().generate(3, setup.set(), 2).unwrap();
        let instance =
            ProblemInstance::certified(objectives, setup.set().clone(), setup.geometry(), 0.0, 4).unwrap();
        let schedule = MixingSchedule::ring(4, 0.5, 2, 6).unwrap();
        let run = DsmdRun::new(RunContext::new(&setup, &instance, &schedule), 10);
        assert!(run_dsmd(&run, 0).is_err());
        let schedule = MixingSchedule::ring(3, 0.5, 2, 6).unwrap();
        let run = DsmdRun::new(RunContext::new(&setup, &instance, &schedule), 0);
        assert!(run_dsmd(&run, 0).is_err());
    }

    #[test]
    fn step_bound_check_examples() {
        let x = Point::new(vec![0.2, 0.3]).unwrap();
        let zero_step = StepRecord {
            round: 1,
            node: 0,
            x: x.clone(),
            gradient: Point::zeros(2),
            z: x.clone(),
            eta: 0.5,
        };
        assert_eq!(step_bound_check(&[zero_step], 1.0), 0.0);
        let setup = box_setup(2);
        let g = [0.4, -0.2];
        let z = setup.mirror_step(&x, &g, 0.5).unwrap();
        let record = StepRecord {
            round: 1,
            node: 0,
            x,
            gradient: Point::new(g.to_vec()).unwrap(),
            z,
            eta: 0.5,
        };
        assert_abs_diff_eq!(step_bound_check(&[record], 1.0), 0.0, epsilon = 1e-15);
    }
}
