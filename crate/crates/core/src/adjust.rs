//! Noncompliance mixing, the compliance × CACE decomposition and attrition
//! inflation.
//!
//! Under treatment switching a control subject receives the treatment
//! regimen with probability ρ1 and a treatment subject receives the control
//! regimen with probability ρ2, so the observed arm parameters are mixtures
//! of the ideal ones. The observed difference is then exactly
//! `(1 − ρ1 − ρ2)` times the complier average causal effect.

use crate::error::{Result, SizeError};

/// Secondary-ITT arm parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedParams {
    pub theta1_star: f64,
    pub theta2_star: f64,
    /// Probability of compliance, `1 − ρ1 − ρ2`.
    pub compliance_prob: f64,
    /// Complier average causal effect `θ2 − θ1`.
    pub cace: f64,
}

impl MixedParams {
    pub fn itt_effect(&self) -> f64 {
        self.theta2_star - self.theta1_star
    }
}

/// `θ1* = (1−ρ1)θ1 + ρ1θ2`, `θ2* = ρ2θ1 + (1−ρ2)θ2`.
pub fn mix_noncompliance(theta1: f64, theta2: f64, rho1: f64, rho2: f64) -> MixedParams {
    MixedParams {
        theta1_star: (1.0 - rho1) * theta1 + rho1 * theta2,
        theta2_star: rho2 * theta1 + (1.0 - rho2) * theta2,
        compliance_prob: 1.0 - rho1 - rho2,
        cace: theta2 - theta1,
    }
}

/// Pooled category probabilities under noncompliance,
/// `p̄ᵢ* = ((1 − ρ1 + ρ2)·p1ᵢ + (1 + ρ1 − ρ2)·p2ᵢ) / 2`.
pub fn pooled_category_probs(probs1: &[f64], probs2: &[f64], rho1: f64, rho2: f64) -> Vec<f64> {
    probs1
        .iter()
        .zip(probs2)
        .map(|(a, b)| ((1.0 - rho1 + rho2) * a + (1.0 + rho1 - rho2) * b) / 2.0)
        .collect()
}

/// Inflate a size for pooled loss of follow-up: `n / (1 − r)`.
pub fn inflate_for_attrition(raw_n: f64, r: f64) -> Result<f64> {
    if !(r.is_finite() && (0.0..1.0).contains(&r)) {
        return Err(SizeError::invalid("r", format!("{r} is not in [0, 1)")));
    }
    Ok(raw_n / (1.0 - r))
}
