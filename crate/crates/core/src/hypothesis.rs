//! Resolution of a hypothesis frame into the tail probability `U(α)`, the
//! effect functional `V(θ1, θ2, δ)` and the power level `W(β)` that
//! parameterize every size formula.

use crate::error::Result;
use crate::model::{HypothesisFrame, HypothesisKind, SignificanceSpec};
use crate::numerics::{normal_upper_quantile, Probability};

/// Sign of the noninferiority margin inside `V`.
///
/// `Standard` uses `θ2 − θ1 + δ`, consistent with `H1: θ2 − θ1 > −δ`.
/// `StrictPaper` reuses the superiority form `θ2 − θ1 − δ`, as some
/// reference tables list it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MarginConvention {
    #[default]
    Standard,
    StrictPaper,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedFrame {
    pub kind: HypothesisKind,
    pub delta: f64,
    pub convention: MarginConvention,
    /// `U(α)`: α/2 for equality, α otherwise.
    pub tail_prob: Probability,
    /// `W(β)`: 1 − β/2 for equivalence, 1 − β otherwise.
    pub power_level: f64,
    /// `1 − W(β)`, the argument of the β-side normal quantile.
    pub beta_quantile_arg: Probability,
}

impl ResolvedFrame {
    /// `V(θ1, θ2, δ)`.
    pub fn effect(&self, theta1: f64, theta2: f64) -> f64 {
        let diff = theta2 - theta1;
        match self.kind {
            HypothesisKind::Equality => diff.abs(),
            HypothesisKind::Superiority => diff - self.delta,
            HypothesisKind::Noninferiority => diff - self.null_shift(),
            HypothesisKind::Equivalence => self.delta - diff.abs(),
        }
    }

    /// Location of the one-sided null boundary for noninferiority and
    /// superiority (the value subtracted from θ2 − θ1); 0 otherwise.
    pub fn null_shift(&self) -> f64 {
        match (self.kind, self.convention) {
            (HypothesisKind::Superiority, _) => self.delta,
            (HypothesisKind::Noninferiority, MarginConvention::Standard) => -self.delta,
            (HypothesisKind::Noninferiority, MarginConvention::StrictPaper) => self.delta,
            _ => 0.0,
        }
    }

    /// `z_{U(α)} + z_{1−W(β)}`.
    pub fn z_sum(&self) -> f64 {
        normal_upper_quantile(self.tail_prob) + normal_upper_quantile(self.beta_quantile_arg)
    }
}

/// Resolve a frame at the given error rates. Only the individual rates are
/// range-checked here, so power inversion can evaluate β across (0, 1).
pub fn resolve(
    frame: &HypothesisFrame,
    sig: &SignificanceSpec,
    convention: MarginConvention,
) -> Result<ResolvedFrame> {
    frame.validate()?;
    let alpha = Probability::new(sig.alpha)?;
    let beta = Probability::new(sig.beta)?;
    let (tail, beta_arg) = match frame.kind {
        HypothesisKind::Equality => (alpha.value() / 2.0, beta.value()),
        HypothesisKind::Noninferiority | HypothesisKind::Superiority => {
            (alpha.value(), beta.value())
        }
        HypothesisKind::Equivalence => (alpha.value(), beta.value() / 2.0),
    };
    Ok(ResolvedFrame {
        kind: frame.kind,
        delta: frame.delta,
        convention,
        tail_prob: Probability::new(tail)?,
        power_level: 1.0 - beta_arg,
        beta_quantile_arg: Probability::new(beta_arg)?,
    })
}
