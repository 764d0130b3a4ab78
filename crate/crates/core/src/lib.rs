//! Distributed stochastic mirror descent for strongly convex problems over
//! time-varying networks.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: mirror maps, Bregman divergences and projections;
//! * [`network`]: doubly stochastic mixing schedules and their checks;
//! * [`problem`]: quadratic local objectives and noisy oracles;
//! * [`algorithms`]: the DSMD, Epoch-DSMD and DSPS engines and bound
//!   constants;
//! * [`harness`]: Monte Carlo experiments, metric files and rate fits.

// `!(x > 0.0)` is used on purpose so NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod network;
pub mod problem;
pub mod seed;

pub use algorithms::{
    epoch_schedule, run_dsmd, run_dsps, run_epoch_dsmd, step_bound_check, DsmdRun, EpochSchedule,
    InitialPoints, RunContext, RunOutput, StepRule, TheoremConstants, TheoremInputs,
};
pub use error::{Error, Result};
pub use geometry::{
    bregman_divergence, bregman_project, entropic_step, euclidean_diameter, mirror_step,
    phi_diameter, ConstraintSet, GeometryKind, MirrorGeometry, Point, SetKind, Setup,
};
pub use network::{mixing_bound_check, mixing_constants, verify_assumption1, MixingSchedule, Topology};
pub use problem::{certify_g, certify_sigma_f, DataScheme, ProblemInstance, QuadraticObjective, StochasticOracle};
pub use harness::{rate_fit, run_experiment, Algorithm, Experiment, ExperimentConfig, MetricRecord, RateModel};
