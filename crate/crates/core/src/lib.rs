//! Sample size and power for two-arm clinical trials.
//!
//! Continuous, binary, time-to-event and ordinal endpoints; parallel and
//! crossover allocation; equality, noninferiority, superiority and
//! equivalence tests; each generalized for arm noncompliance (treatment
//! switching) and pooled loss of follow-up.

pub mod adjust;
pub mod bioeq;
pub mod cli;
pub mod engines;
pub mod error;
pub mod hypothesis;
pub mod model;
pub mod numerics;
pub mod power;
pub mod sim;

pub use engines::compute_size;
pub use error::{Result, SizeError};
pub use model::{DesignRequest, SizeResult, ValidRequest};
pub use power::{achieved_power, PowerEstimate};
pub use sim::{simulate_power, SimConfig, SimOutcome};
