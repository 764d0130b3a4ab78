//! Monte Carlo experiment runner.
//!
//! An [`ExperimentConfig`] fixes the problem family, network and algorithm.
//! [`Experiment::prepare`] validates it (all problems reported at once),
//! generates the seeded problem data and certifies the constants; `run`
//! executes the independent realizations in parallel and collects one
//! [`MetricRecord`] per (realization, checkpoint, node).
//!
//! Output files:
//!
//! * `metrics.csv` with header
//!   `realization,t,node,avg_error_sq,last_error_sq,disagreement,eta`;
//! * `summary.json` with the config echo, certified constants, per-checkpoint
//!   mean/stderr/bound, rate fit, disagreement report and runtime.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{
    epoch_schedule, run_dsmd, run_dsps, run_epoch_dsmd, DsmdRun, EpochSchedule, InitialPoints,
    RunContext, RunDiagnostics, RunOutput, TheoremConstants, TheoremInputs,
};
use crate::error::{Error, Result};
use crate::geometry::{ConstraintSet, GeometryKind, MirrorGeometry, Point, SetKind, Setup};
use crate::network::{MixingSchedule, Topology};
use crate::problem::{DataScheme, ProblemInstance};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Dsmd,
    EpochDsmd,
    Dsps,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Dsmd => "dsmd",
            Algorithm::EpochDsmd => "epoch-dsmd",
            Algorithm::Dsps => "dsps",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "dsmd" => Ok(Algorithm::Dsmd),
            "epoch-dsmd" => Ok(Algorithm::EpochDsmd),
            "dsps" => Ok(Algorithm::Dsps),
            other => Err(format!("unknown algorithm `{other}` (dsmd, epoch-dsmd, dsps)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyName {
    Ring,
    Complete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialChoice {
    PhiMinimizer,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub topology: TopologyName,
    /// Activate every base link on each `B`-th round.
    pub forced: bool,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            topology: TopologyName::Ring,
            forced: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemConfig {
    /// Mirror map; defaults to negative entropy on the simplex and
    /// Euclidean on the box.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryKind>,
    /// `a_i` is drawn uniformly from this range.
    pub weight_range: [f64; 2],
    pub box_lower: f64,
    pub box_upper: f64,
    pub initial: InitialChoice,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        ProblemConfig {
            geometry: None,
            weight_range: [0.5, 1.5],
            box_lower: -1.0,
            box_upper: 1.0,
            initial: InitialChoice::PhiMinimizer,
        }
    }
}

fn default_realizations() -> usize {
    50
}

fn default_activation() -> f64 {
    0.5
}

fn default_window() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub constraint: SetKind,
    pub m: usize,
    pub d: usize,
    pub sigma: f64,
    #[serde(rename = "T")]
    pub horizon: usize,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    #[serde(default = "default_activation")]
    pub activation: f64,
    #[serde(rename = "B", default = "default_window")]
    pub window: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub network: NetworkConfig,
    #[serde(default)]
    pub problem: ProblemConfig,
}

impl ExperimentConfig {
    /// The simulation study: a 40-node ring with half the links active,
    /// `d = 10`, 50 realizations.
    pub fn study(algorithm: Algorithm, constraint: SetKind, sigma: f64, horizon: usize) -> Self {
        ExperimentConfig {
            algorithm,
            constraint,
            m: 40,
            d: 10,
            sigma,
            horizon,
            realizations: 50,
            activation: 0.5,
            window: 2,
            master_seed: 2018,
            checkpoints: None,
            output: None,
            network: NetworkConfig::default(),
            problem: ProblemConfig::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::ConfigParse(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    pub fn geometry(&self) -> GeometryKind {
        self.problem.geometry.unwrap_or(match (self.algorithm, self.constraint) {
            (Algorithm::Dsps, _) | (_, SetKind::Box) => GeometryKind::Euclidean,
            (_, SetKind::Simplex) => GeometryKind::NegativeEntropy,
        })
    }

    /// Powers of two up to `T` (plus `T`) for the diminishing-step engines,
    /// epoch-end rounds for the epoch engine.
    pub fn resolved_checkpoints(&self) -> Vec<usize> {
        if let Some(c) = &self.checkpoints {
            let mut c = c.clone();
            c.sort_unstable();
            c.dedup();
            return c;
        }
        match self.algorithm {
            Algorithm::EpochDsmd => EpochSchedule::with_first_epoch(self.horizon.max(4), 4, 1.0)
                .map(|s| s.epoch_ends())
                .unwrap_or_default(),
            _ => {
                let mut c: Vec<usize> = std::iter::successors(Some(1usize), |p| p.checked_mul(2))
                    .take_while(|&p| p <= self.horizon)
                    .collect();
                if c.last() != Some(&self.horizon) && self.horizon > 0 {
                    c.push(self.horizon);
                }
                c
            }
        }
    }

    /// Every configuration problem, or `Ok` if there are none.
    pub fn validate(&self) -> Result<()> {
        let mut issues = Vec::new();
        for (name, value) in [
            ("m", self.m),
            ("d", self.d),
            ("T", self.horizon),
            ("realizations", self.realizations),
            ("B", self.window),
        ] {
            if value == 0 {
                issues.push(format!("{name} must be positive"));
            }
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            issues.push(format!("sigma must be a nonnegative number, got {}", self.sigma));
        }
        if !(self.activation > 0.0 && self.activation <= 1.0) {
            issues.push(format!("activation must lie in (0, 1], got {}", self.activation));
        }
        let geometry = self.geometry();
        if geometry == GeometryKind::NegativeEntropy && self.constraint == SetKind::Box {
            issues.push("unsupported pairing: negative-entropy geometry over a box constraint".into());
        }
        if self.algorithm == Algorithm::Dsps && geometry != GeometryKind::Euclidean {
            issues.push(format!(
                "unsupported pairing: dsps is the Euclidean baseline and cannot use the {} geometry \
                 over a {} constraint",
                geometry.name(),
                self.constraint.name()
            ));
        }
        let [low, high] = self.problem.weight_range;
        if !(low > 0.0 && low < high && high.is_finite()) {
            issues.push(format!("problem.weight_range must satisfy 0 < low < high, got [{low}, {high}]"));
        }
        if self.constraint == SetKind::Box
            && !(self.problem.box_lower < self.problem.box_upper
                && self.problem.box_lower.is_finite()
                && self.problem.box_upper.is_finite())
        {
            issues.push("problem.box_lower must be below problem.box_upper".into());
        }
        let limit = match self.algorithm {
            Algorithm::EpochDsmd => {
                if self.horizon < 4 {
                    issues.push(format!(
                        "epoch-dsmd needs T ≥ 4 (the first epoch has 4 rounds), got {}",
                        self.horizon
                    ));
                }
                EpochSchedule::with_first_epoch(self.horizon, 4, 1.0)
                    .map(|s| s.total_rounds())
                    .unwrap_or(0)
            }
            _ => self.horizon,
        };
        let checkpoints = self.resolved_checkpoints();
        if checkpoints.is_empty() {
            issues.push("no checkpoints to record".into());
        }
        for &c in &checkpoints {
            if limit > 0 && (c == 0 || c > limit) {
                issues.push(format!(
                    "checkpoint {c} lies outside the recorded rounds [1, {limit}]"
                ));
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(issues))
        }
    }
}

/// One row of `metrics.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub realization: usize,
    pub t: usize,
    pub node: usize,
    /// `‖x̂_{j,t} − x*‖²` (DSMD) or squared error of the latest warm start.
    pub avg_error_sq: f64,
    /// `‖x_{j,t+1} − x*‖²`, the current iterate.
    pub last_error_sq: f64,
    /// `Σ_i ‖x_{i,t+1} − x_{j,t+1}‖`.
    pub disagreement: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateModel {
    /// `a ln(T)/T + b/T`.
    #[serde(rename = "lnT_over_T")]
    LnTOverT,
    /// `a/T`.
    #[serde(rename = "one_over_T")]
    OneOverT,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub model: RateModel,
    pub coefficients: Vec<f64>,
    pub r_squared: f64,
    /// `error · T` at each checkpoint.
    pub error_times_t: Vec<f64>,
    pub max_error_times_t: f64,
}

/// Least-squares fit of the mean error against a rate model. Needs at
/// least four checkpoints spanning two octaves of `T`.
pub fn rate_fit(points: &[(f64, f64)], model: RateModel) -> Result<FitReport> {
    if points.len() < 4 {
        return Err(Error::InsufficientCheckpoints(format!("{} given", points.len())));
    }
    let t_min = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let t_max = points.iter().map(|p| p.0).fold(0.0, f64::max);
    if !(t_min > 0.0) || t_max < 4.0 * t_min {
        return Err(Error::InsufficientCheckpoints(format!(
            "T spans [{t_min}, {t_max}], less than two octaves"
        )));
    }
    let basis = |t: f64| -> Vec<f64> {
        match model {
            RateModel::LnTOverT => vec![t.ln() / t, 1.0 / t],
            RateModel::OneOverT => vec![1.0 / t],
        }
    };
    let coefficients = match model {
        RateModel::OneOverT => {
            let (num, den) = points.iter().fold((0.0, 0.0), |(n, d), &(t, y)| {
                let u = 1.0 / t;
                (n + u * y, d + u * u)
            });
            vec![num / den]
        }
        RateModel::LnTOverT => {
            // 2×2 normal equations.
            let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for &(t, y) in points {
                let u = basis(t);
                s11 += u[0] * u[0];
                s12 += u[0] * u[1];
                s22 += u[1] * u[1];
                r1 += u[0] * y;
                r2 += u[1] * y;
            }
            let det = s11 * s22 - s12 * s12;
            if det.abs() <= f64::EPSILON * s11 * s22 {
                return Err(Error::InsufficientCheckpoints("degenerate design".into()));
            }
            vec![(r1 * s22 - r2 * s12) / det, (s11 * r2 - s12 * r1) / det]
        }
    };
    let predict = |t: f64| basis(t).iter().zip(&coefficients).map(|(u, c)| u * c).sum::<f64>();
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / points.len() as f64;
    let ss_res: f64 = points.iter().map(|&(t, y)| (y - predict(t)).powi(2)).sum();
    let ss_tot: f64 = points.iter().map(|&(_, y)| (y - mean_y).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        0.0
    };
    let error_times_t: Vec<f64> = points.iter().map(|&(t, y)| y * t).collect();
    let max_error_times_t = error_times_t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(FitReport {
        model,
        coefficients,
        r_squared,
        error_times_t,
        max_error_times_t,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisagreementReport {
    /// Per node `j`, the Monte Carlo mean of `Σ_t Σ_i ‖x_{i,t} − x_{j,t}‖`.
    pub mean_cumulative: Vec<f64>,
    pub max_mean_cumulative: f64,
    pub bound: f64,
    /// `max_j mean_cumulative / bound`; at most 1 when the bound holds.
    pub ratio: f64,
}

/// Compares the Monte Carlo mean of the cumulative disagreement against
/// `m(2αβ/(1−β) + 1) Σ_i E‖x_{i,1}‖ + 2αβm²G/((1−β)σ_Φ) Σ_t η_t`.
pub fn disagreement_report(
    diagnostics: &[RunDiagnostics],
    constants: &TheoremConstants,
) -> Result<DisagreementReport> {
    let first = diagnostics
        .first()
        .ok_or_else(|| Error::InvalidParameter("no runs to report on".into()))?;
    let n = diagnostics.len() as f64;
    let m = first.cumulative_disagreement.len();
    let mut mean_cumulative = vec![0.0; m];
    for d in diagnostics {
        for (acc, v) in mean_cumulative.iter_mut().zip(&d.cumulative_disagreement) {
            *acc += v / n;
        }
    }
    let eta_sum = diagnostics.iter().map(|d| d.eta_sum).sum::<f64>() / n;
    let bound = constants.disagreement_bound(eta_sum);
    let max_mean_cumulative = mean_cumulative.iter().copied().fold(0.0, f64::max);
    let ratio = if bound > 0.0 {
        max_mean_cumulative / bound
    } else if max_mean_cumulative == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(DisagreementReport {
        mean_cumulative,
        max_mean_cumulative,
        bound,
        ratio,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckpointSummary {
    pub t: usize,
    /// Mean over realizations of the node-averaged `avg_error_sq`.
    pub mean: f64,
    /// Standard error of `mean` across realizations.
    pub stderr: f64,
    /// Mean over realizations of the node sum of `avg_error_sq`.
    pub mean_node_sum: f64,
    /// Mean over realizations of the node-averaged `last_error_sq`.
    pub mean_last: f64,
    /// `c ln(t)/t + c'/t` for the diminishing-step engines (`t ≥ 3`),
    /// `64ĉ/t` for the epoch engine (`t ≥ 4`).
    pub theorem_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsSummary {
    #[serde(rename = "sigma_F")]
    pub sigma_f: f64,
    #[serde(rename = "G")]
    pub g: f64,
    pub alpha: f64,
    pub beta: f64,
    pub xi: f64,
    #[serde(rename = "R_X")]
    pub r_x: f64,
    #[serde(rename = "R_PhiX")]
    pub r_phi_x: f64,
    pub c: f64,
    pub c_prime: f64,
    pub c1: f64,
    pub c2: f64,
    pub c_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub config: ExperimentConfig,
    pub geometry: GeometryKind,
    pub optimum: Vec<f64>,
    pub constants: ConstantsSummary,
    pub checkpoints: Vec<CheckpointSummary>,
    pub fit: Option<FitReport>,
    pub disagreement: DisagreementReport,
    pub max_step_excess: f64,
    pub max_average_drift: f64,
    pub runtime_seconds: f64,
}

impl Summary {
    /// `(t, mean)` pairs for [`rate_fit`].
    pub fn fit_points(&self) -> Vec<(f64, f64)> {
        self.checkpoints.iter().map(|c| (c.t as f64, c.mean)).collect()
    }

    pub fn checkpoint(&self, t: usize) -> Option<&CheckpointSummary> {
        self.checkpoints.iter().find(|c| c.t == t)
    }
}

/// A validated configuration with its generated data and certified
/// constants.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub setup: Setup,
    pub instance: ProblemInstance,
    /// Schedule template; each realization re-seeds it.
    pub schedule: MixingSchedule,
    pub checkpoints: Vec<usize>,
    pub epochs: Option<EpochSchedule>,
}

impl Experiment {
    pub fn prepare(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let set = match config.constraint {
            SetKind::Simplex => ConstraintSet::simplex(config.d)?,
            SetKind::Box => ConstraintSet::cube(config.d, config.problem.box_lower, config.problem.box_upper)?,
        };
        let setup = Setup::new(MirrorGeometry::from_kind(config.geometry()), set)?;
        let [low, high] = config.problem.weight_range;
        let scheme = DataScheme {
            weight_range: (low, high),
        };
        let objectives = scheme.generate(
            config.m,
            setup.set(),
            seed::derive(config.master_seed, seed::DATA),
        )?;
        let instance = ProblemInstance::certified(
            objectives,
            setup.set().clone(),
            setup.geometry(),
            config.sigma,
            config.master_seed,
        )?;
        let topology = match config.network.topology {
            TopologyName::Ring => Topology::Ring,
            TopologyName::Complete => Topology::Complete,
        };
        let mut schedule = MixingSchedule::new(config.m, topology, config.activation, config.window, 0)?;
        if !config.network.forced {
            schedule = schedule.without_forcing();
        }
        let epochs = match config.algorithm {
            Algorithm::EpochDsmd => Some(epoch_schedule(config.horizon, instance.sigma_f())?),
            _ => None,
        };
        Ok(Experiment {
            checkpoints: config.resolved_checkpoints(),
            config,
            setup,
            instance,
            schedule,
            epochs,
        })
    }

    pub fn realization_seed(&self, realization: usize) -> u64 {
        seed::derive(self.config.master_seed, seed::REALIZATION + realization as u64)
    }

    /// Bound constants with `Σ_i E‖x_{i,1}‖ = initial_norm_sum`.
    pub fn constants(&self, initial_norm_sum: f64) -> TheoremConstants {
        let mixing = self.schedule.constants();
        TheoremConstants::evaluate(TheoremInputs {
            alpha: mixing.alpha,
            beta: mixing.beta,
            g: self.instance.g(),
            sigma_f: self.instance.sigma_f(),
            sigma_phi: self.setup.geometry().sigma_phi(),
            m: self.config.m,
            r_x: self.setup.euclidean_diameter(),
            r_phi_x: self.setup.phi_diameter(),
            initial_norm_sum,
        })
    }

    pub fn run_realization(&self, realization: usize, record_steps: bool) -> Result<RunOutput> {
        let seed = self.realization_seed(realization);
        let schedule = self.schedule.clone().with_seed(seed::derive(seed, seed::SCHEDULE));
        let mut context = RunContext::new(&self.setup, &self.instance, &schedule)
            .with_checkpoints(self.checkpoints.clone())
            .with_initial(match self.config.problem.initial {
                InitialChoice::PhiMinimizer => InitialPoints::PhiMinimizer,
                InitialChoice::Random => InitialPoints::RandomFeasible,
            });
        context.record_steps = record_steps;
        match self.config.algorithm {
            Algorithm::Dsmd => run_dsmd(&DsmdRun::new(context, self.config.horizon), seed),
            Algorithm::Dsps => run_dsps(&DsmdRun::new(context, self.config.horizon), seed),
            Algorithm::EpochDsmd => {
                let epochs = self.epochs.as_ref().expect("epoch schedule prepared");
                run_epoch_dsmd(&context, epochs, seed)
            }
        }
    }

    /// One record per (checkpoint, node) of a finished realization.
    pub fn records(&self, realization: usize, output: &RunOutput) -> Vec<MetricRecord> {
        let star = self.instance.global_optimum();
        let mut records = Vec::new();
        for snap in &output.snapshots {
            for (node, (estimate, iterate)) in snap.estimates.iter().zip(&snap.iterates).enumerate() {
                records.push(MetricRecord {
                    realization,
                    t: snap.round,
                    node,
                    avg_error_sq: estimate.distance_sq(&star),
                    last_error_sq: iterate.distance_sq(&star),
                    disagreement: snap.iterates.iter().map(|x| x.distance(iterate)).sum(),
                    eta: snap.eta,
                });
            }
        }
        records
    }

    pub fn run(&self) -> Result<ExperimentReport> {
        let started = Instant::now();
        let outcomes: Vec<(Vec<MetricRecord>, RunDiagnostics)> = (0..self.config.realizations)
            .into_par_iter()
            .map(|r| {
                let out = self.run_realization(r, false)?;
                Ok((self.records(r, &out), out.diagnostics))
            })
            .collect::<Result<_>>()?;
        let mut records = Vec::new();
        let mut diagnostics = Vec::new();
        for (r, d) in outcomes {
            records.extend(r);
            diagnostics.push(d);
        }
        records.sort_by_key(|r| (r.realization, r.t, r.node));
        let summary = self.summarize(&records, &diagnostics, started.elapsed().as_secs_f64())?;
        Ok(ExperimentReport {
            records,
            summary,
            diagnostics,
        })
    }

    pub fn summarize(
        &self,
        records: &[MetricRecord],
        diagnostics: &[RunDiagnostics],
        runtime_seconds: f64,
    ) -> Result<Summary> {
        let n = self.config.realizations;
        let m = self.config.m as f64;
        let initial_norm_sum =
            diagnostics.iter().map(|d| d.initial_norm_sum).sum::<f64>() / diagnostics.len().max(1) as f64;
        let constants = self.constants(initial_norm_sum);
        let mut checkpoints = Vec::with_capacity(self.checkpoints.len());
        for &t in &self.checkpoints {
            let mut per_realization = vec![(0.0, 0.0); n];
            for rec in records.iter().filter(|r| r.t == t) {
                per_realization[rec.realization].0 += rec.avg_error_sq;
                per_realization[rec.realization].1 += rec.last_error_sq;
            }
            let sums: Vec<f64> = per_realization.iter().map(|p| p.0).collect();
            let node_means: Vec<f64> = sums.iter().map(|s| s / m).collect();
            let mean = node_means.iter().sum::<f64>() / n as f64;
            let stderr = if n > 1 {
                let var = node_means.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                (var / n as f64).sqrt()
            } else {
                0.0
            };
            let theorem_bound = match self.config.algorithm {
                Algorithm::EpochDsmd if t >= 4 => Some(constants.theorem2_bound(t as f64)),
                Algorithm::Dsmd | Algorithm::Dsps if t >= 3 => Some(constants.theorem1_bound(t as f64)),
                _ => None,
            };
            checkpoints.push(CheckpointSummary {
                t,
                mean,
                stderr,
                mean_node_sum: sums.iter().sum::<f64>() / n as f64,
                mean_last: per_realization.iter().map(|p| p.1 / m).sum::<f64>() / n as f64,
                theorem_bound,
            });
        }
        let model = match self.config.algorithm {
            Algorithm::EpochDsmd => RateModel::OneOverT,
            _ => RateModel::LnTOverT,
        };
        let points: Vec<(f64, f64)> = checkpoints.iter().map(|c| (c.t as f64, c.mean)).collect();
        let fit = rate_fit(&points, model).ok();
        let mixing = self.schedule.constants();
        Ok(Summary {
            config: self.config.clone(),
            geometry: self.setup.geometry().kind(),
            optimum: self.instance.global_optimum().into_vec(),
            constants: ConstantsSummary {
                sigma_f: self.instance.sigma_f(),
                g: self.instance.g(),
                alpha: mixing.alpha,
                beta: mixing.beta,
                xi: self.schedule.xi(),
                r_x: constants.inputs.r_x,
                r_phi_x: constants.inputs.r_phi_x,
                c: constants.c,
                c_prime: constants.c_prime,
                c1: constants.c1,
                c2: constants.c2,
                c_hat: constants.c_hat,
            },
            checkpoints,
            fit,
            disagreement: disagreement_report(diagnostics, &constants)?,
            max_step_excess: diagnostics.iter().map(|d| d.max_step_excess).fold(f64::NEG_INFINITY, f64::max),
            max_average_drift: diagnostics.iter().map(|d| d.max_average_drift).fold(0.0, f64::max),
            runtime_seconds,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    /// Sorted by (realization, t, node).
    pub records: Vec<MetricRecord>,
    pub summary: Summary,
    /// Per realization, in realization order.
    pub diagnostics: Vec<RunDiagnostics>,
}

impl ExperimentReport {
    pub fn write_csv(&self, writer: impl std::io::Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.records {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.summary)?)
    }

    /// Writes `metrics.csv` and `summary.json` into `dir`.
    pub fn write_to_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        self.write_csv(fs::File::create(dir.join("metrics.csv"))?)?;
        fs::write(dir.join("summary.json"), self.summary_json()?)?;
        Ok(())
    }
}

/// Reads `metrics.csv` back.
pub fn read_metrics(reader: impl std::io::Read) -> Result<Vec<MetricRecord>> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

/// Validates, runs and, when the config names an output directory, writes
/// the metrics and summary files.
pub fn run_experiment(config: ExperimentConfig) -> Result<ExperimentReport> {
    let experiment = Experiment::prepare(config)?;
    let report = experiment.run()?;
    if let Some(dir) = &experiment.config.output {
        report.write_to_dir(dir)?;
    }
    Ok(report)
}

/// Squared distance of every estimate to `star`, averaged over nodes.
pub fn mean_error_sq(estimates: &[Point], star: &Point) -> f64 {
    estimates.iter().map(|x| x.distance_sq(star)).sum::<f64>() / estimates.len() as f64
}
