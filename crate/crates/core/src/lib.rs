//! Energy-efficiency maximization for single-cell massive MIMO by joint
//! antenna selection and user scheduling under an RF-chain budget.
//!
//! The crate is organized bottom-up:
//!
//! - [`scenario`]: user drops and large-scale fading.
//! - [`rate`]: closed-form achievable-rate lower bounds (MRC/MRT/ZF,
//!   perfect or MMSE-estimated CSI) and pilot overhead.
//! - [`power`]: power-consumption model, energy efficiency and the
//!   selection objective.
//! - [`optimizer`]: the learning-based selection algorithm with subset
//!   simulation, the exhaustive oracle and a random-selection baseline.
//! - [`harness`]: configuration files, seeded Monte Carlo experiments and
//!   CSV output.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod harness;
pub mod optimizer;
pub mod power;
pub mod rate;
pub mod scenario;

pub use config::{
    Combo, Csi, DownlinkScheme, PowerAntennas, PowerParams, SystemConfig, UplinkScheme,
};
pub use error::{Error, Result};
pub use harness::{
    parse_config, run_experiment, ExperimentKind, ExperimentSpec, PowerScheme, ResultTable,
};
pub use optimizer::{
    exhaustive_search, random_selection_baseline, run_algorithm2, LearnerConfig, LearnerState,
    ObjectiveScale,
};
pub use power::{EvalResult, Problem, UserPowers};
pub use scenario::{Geometry, Scenario};
