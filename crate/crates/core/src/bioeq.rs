//! Rewrites of the two bioequivalence band hypotheses into a symmetric
//! equivalence frame `|θ2' − θ1'| < δ'`, so the equivalence engines apply.
//!
//! Additive band `δ1 < θ2 − θ1 < δ2`: shift both arms by half the band ends.
//! Multiplicative band `δ1 < θ2/θ1 < δ2`: the same shift on the log scale.

use crate::error::{Result, SizeError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BioeqBand {
    pub delta1: f64,
    pub delta2: f64,
}

impl BioeqBand {
    pub fn new(delta1: f64, delta2: f64) -> Result<Self> {
        if !(delta1.is_finite() && delta2.is_finite()) {
            return Err(SizeError::invalid("band", "band ends must be finite"));
        }
        if delta1 >= delta2 {
            return Err(SizeError::invalid(
                "band",
                format!("need delta1 < delta2, got ({delta1}, {delta2})"),
            ));
        }
        Ok(BioeqBand { delta1, delta2 })
    }

    /// Whether an additive difference lies strictly inside the band.
    pub fn contains_difference(&self, diff: f64) -> bool {
        self.delta1 < diff && diff < self.delta2
    }

    /// Whether a ratio lies strictly inside the band.
    pub fn contains_ratio(&self, ratio: f64) -> bool {
        self.delta1 < ratio && ratio < self.delta2
    }
}

/// Arm parameters and margin after mapping onto the equivalence frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceImage {
    pub theta1: f64,
    pub theta2: f64,
    pub delta: f64,
}

impl EquivalenceImage {
    /// `|θ2 − θ1| < δ`.
    pub fn in_alternative(&self) -> bool {
        (self.theta2 - self.theta1).abs() < self.delta
    }
}

/// `θ2* = θ2 − δ2/2`, `θ1* = θ1 + δ1/2`, `δ* = (δ2 − δ1)/2`.
pub fn additive_to_equivalence(theta1: f64, theta2: f64, band: BioeqBand) -> Result<EquivalenceImage> {
    let delta = (band.delta2 - band.delta1) / 2.0;
    if !(delta > 0.0) {
        return Err(SizeError::invalid("band", "transformed margin must be > 0"));
    }
    Ok(EquivalenceImage {
        theta1: theta1 + band.delta1 / 2.0,
        theta2: theta2 - band.delta2 / 2.0,
        delta,
    })
}

/// `θ2** = log(θ2/√δ2)`, `θ1** = log(θ1·√δ1)`, `δ** = ½·log(δ2/δ1)`.
pub fn multiplicative_to_equivalence(
    theta1: f64,
    theta2: f64,
    band: BioeqBand,
) -> Result<EquivalenceImage> {
    if !(theta1 > 0.0 && theta2 > 0.0) {
        return Err(SizeError::invalid(
            "theta",
            "multiplicative band needs positive arm parameters",
        ));
    }
    if !(band.delta1 > 0.0) {
        return Err(SizeError::invalid(
            "band",
            "multiplicative band needs 0 < delta1 < delta2",
        ));
    }
    Ok(EquivalenceImage {
        theta1: (theta1 * band.delta1.sqrt()).ln(),
        theta2: (theta2 / band.delta2.sqrt()).ln(),
        delta: 0.5 * (band.delta2 / band.delta1).ln(),
    })
}
