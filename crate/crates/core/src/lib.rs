//! Secrecy beamforming for a SWIPT multi-antenna femtocell underlaid on a
//! macrocell.
//!
//! The femto base station serves information receivers while energy
//! receivers harvest power and may eavesdrop. [`sca::sca_solve`] maximizes the
//! sum of logarithmic secrecy rates under harvesting, macro-user interference
//! and power constraints through a semidefinite relaxation solved by
//! successive convex approximation; [`recovery`] turns covariances back into
//! beams and [`zf`] implements the zero-forcing comparison scheme.
//! [`experiment`] drives Monte Carlo studies and [`plot`] renders their CSVs.

pub mod channel;
pub mod config;
pub mod conic;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod metrics;
pub mod plot;
pub mod recovery;
pub mod sca;
pub mod zf;

pub use channel::{generate_channels, ChannelSet};
pub use config::{Homogeneous, SystemConfig};
pub use error::{ConfigError, ConicError, ExperimentError, MetricError, RecoveryError, ScaError, ZfError};
pub use experiment::{
    run_convergence, run_single, run_threshold_sweep, ExperimentRecord, Scheme, Settings, SweepSummary,
};
pub use plot::emit_plots;
pub use zf::{zf_solve, ZfDirections, ZfSolution};
pub use recovery::{recover_beams, RecoveryOptions, Recovered};
pub use sca::{sca_solve, ScaOptions, ScaResult, ScaState};
pub use metrics::{BeamSolution, ConstraintAudit, CovarianceSolution, Metrics};
