//! Simulation, moment estimation, fitting and classification of planar
//! intermittent-search and Lévy-walk trajectories.
//!
//! The pipeline: estimate the empirical second and fourth velocity moments
//! of a trajectory over a lag grid ([`moments`]), fit both model families by
//! matching Monte-Carlo model moments in squared-log distance ([`fitting`]),
//! and label the trajectory by the sign of the adjusted-R² difference
//! ([`classify`]).

pub mod classify;
pub mod cli;
pub mod error;
pub mod fitting;
pub mod io;
pub mod kernels;
pub mod moments;
pub mod rng;
pub mod trajectory;

pub use classify::{classify_trajectory, gamma_score, ClassificationReport, Label};
pub use error::{Error, Result};
pub use fitting::{fit_model, Bound, DataMeta, FitConfig, FitReport, ModelKind};
pub use kernels::{
    sample_flight_time, sample_step_length, simulate_intermittent, simulate_levy, IsParams, LwParams, PhaseLabel,
    StepLenParams,
};
pub use moments::{empirical_moments, model_moments, EnsembleSpec, LagGrid, MomentCurve, ModelParams};
pub use trajectory::Trajectory;
