//! Achieved power of a fixed per-arm size, by inverting the size formula in β.

use crate::engines::raw_n2_at;
use crate::error::{Result, SizeError};
use crate::model::ValidRequest;
use crate::numerics::find_root;

/// Search interval for β.
pub const BETA_MIN: f64 = 0.005;
pub const BETA_MAX: f64 = 0.995;

const BETA_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerEstimate {
    pub power: f64,
    /// True when `n2` exceeds the size needed at β = 0.005 and the power
    /// was clamped to 0.995.
    pub saturated: bool,
}

/// Solve `raw_n2(β) = n2` on the real-valued relaxation and return `1 − β`.
pub fn achieved_power(req: &ValidRequest, n2: u64) -> Result<PowerEstimate> {
    if n2 == 0 {
        return Err(SizeError::invalid("n2", "must be a positive integer"));
    }
    let target = n2 as f64;
    let at_least_power = raw_n2_at(req, BETA_MAX)?;
    if target < at_least_power {
        return Err(SizeError::PowerOutOfRange(format!(
            "n2 = {n2} is below {at_least_power:.3}, the size for power {:.3}",
            1.0 - BETA_MAX
        )));
    }
    let at_most_power = raw_n2_at(req, BETA_MIN)?;
    if target >= at_most_power {
        return Ok(PowerEstimate {
            power: 1.0 - BETA_MIN,
            saturated: true,
        });
    }
    let beta = find_root(
        |b| raw_n2_at(req, b).map(|n| n - target).unwrap_or(f64::NAN),
        BETA_MIN,
        BETA_MAX,
        BETA_TOL,
    )?;
    Ok(PowerEstimate {
        power: 1.0 - beta,
        saturated: false,
    })
}
