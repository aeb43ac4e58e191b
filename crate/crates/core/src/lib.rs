//! Simulation library for a one-dimensional stochastic averaging and
//! merging particle model: forward gap/point dynamics with genealogy,
//! the exact time-reversed integer weight process and its martingale,
//! renewal-trace machinery, and statistical verification routines.

pub mod analysis;
pub mod error;
pub mod exact;
pub mod forward;
pub mod laws;
pub mod literal;
pub mod renewal;
pub mod reverse;
pub mod rng;
pub mod verify;

pub use error::CoreError;
pub use forward::{
    Algorithm, Direction, ForwardState, ForwardTrajectory, Genealogy, IntensityMode,
    PointConfiguration,
};
pub use laws::{GapLaw, GapSequence, RenewalLaw};
pub use renewal::RenewalTrace;
pub use reverse::{ReverseTrajectory, ReverseVariant, StepDistribution, WeightSequence};
pub use rng::RngStream;
pub use verify::{run_all, CheckKind, CheckResult, VerifyOptions};
