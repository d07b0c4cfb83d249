//! Random sampling primitives and trajectory simulators.

pub mod intermittent;
pub mod levy;
pub mod params;
pub mod sampling;

pub use intermittent::{simulate_intermittent, simulate_intermittent_traced};
pub use levy::{simulate_levy, simulate_levy_traced, LevySimulation};
pub use params::{IsParams, LwParams, PhaseLabel, StepLenParams};
pub use sampling::{flight_time_cdf, sample_flight_time, sample_step_length};
