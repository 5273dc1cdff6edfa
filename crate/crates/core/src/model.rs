//! Vocabulary of a trial design request and its result.
//!
//! A [`DesignRequest`] bundles layout, hypothesis frame, error rates,
//! endpoint and noncompliance/attrition profile. [`DesignRequest::validate`]
//! checks every type invariant plus the scenario gate and yields a
//! [`ValidRequest`], which is what the engines consume.

use std::fmt;

use crate::error::{Result, SizeError};
use crate::hypothesis::MarginConvention;

/// Tolerance on the sum of an ordinal category simplex.
pub const SIMPLEX_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Design {
    Parallel,
    Crossover,
}

impl Design {
    pub fn name(self) -> &'static str {
        match self {
            Design::Parallel => "parallel",
            Design::Crossover => "crossover",
        }
    }
}

impl fmt::Display for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Allocation design, ratio `k = n1 / n2` and crossover sequence count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialLayout {
    pub design: Design,
    pub k: f64,
    pub seq_count: u32,
}

impl TrialLayout {
    pub fn parallel(k: f64) -> Self {
        TrialLayout {
            design: Design::Parallel,
            k,
            seq_count: 0,
        }
    }

    pub fn crossover(k: f64, seq_count: u32) -> Self {
        TrialLayout {
            design: Design::Crossover,
            k,
            seq_count,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(SizeError::invalid("k", format!("must be > 0, got {}", self.k)));
        }
        match self.design {
            Design::Parallel if self.seq_count != 0 => Err(SizeError::invalid(
                "seqnumber",
                "must be 0 for a parallel design",
            )),
            Design::Crossover if self.seq_count == 0 => Err(SizeError::invalid(
                "seqnumber",
                "must be at least 1 for a crossover design",
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HypothesisKind {
    Equality,
    Noninferiority,
    Superiority,
    Equivalence,
}

impl HypothesisKind {
    pub const ALL: [HypothesisKind; 4] = [
        HypothesisKind::Equality,
        HypothesisKind::Noninferiority,
        HypothesisKind::Superiority,
        HypothesisKind::Equivalence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HypothesisKind::Equality => "equality",
            HypothesisKind::Noninferiority => "noninferiority",
            HypothesisKind::Superiority => "superiority",
            HypothesisKind::Equivalence => "equivalence",
        }
    }

    fn index(self) -> u8 {
        match self {
            HypothesisKind::Equality => 0,
            HypothesisKind::Noninferiority => 1,
            HypothesisKind::Superiority => 2,
            HypothesisKind::Equivalence => 3,
        }
    }
}

impl fmt::Display for HypothesisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Test kind plus its margin δ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisFrame {
    pub kind: HypothesisKind,
    pub delta: f64,
}

impl HypothesisFrame {
    pub fn new(kind: HypothesisKind, delta: f64) -> Self {
        HypothesisFrame { kind, delta }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.delta.is_finite() {
            return Err(SizeError::invalid("delta", "must be finite"));
        }
        match self.kind {
            HypothesisKind::Equality if self.delta != 0.0 => Err(SizeError::invalid(
                "delta",
                "must be 0 for an equality test",
            )),
            HypothesisKind::Equivalence if self.delta <= 0.0 => Err(SizeError::invalid(
                "delta",
                "must be > 0 for an equivalence test",
            )),
            HypothesisKind::Noninferiority | HypothesisKind::Superiority if self.delta < 0.0 => {
                Err(SizeError::invalid("delta", "margin must be >= 0"))
            }
            _ => Ok(()),
        }
    }
}

/// Significance level α and type II error β.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignificanceSpec {
    pub alpha: f64,
    pub beta: f64,
}

impl SignificanceSpec {
    pub fn new(alpha: f64, beta: f64) -> Self {
        SignificanceSpec { alpha, beta }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(SizeError::invalid("alpha", format!("{} is not in (0, 1)", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(SizeError::invalid("beta", format!("{} is not in (0, 1)", self.beta)));
        }
        if self.alpha + self.beta >= 1.0 {
            return Err(SizeError::invalid("beta", "alpha + beta must be < 1"));
        }
        Ok(())
    }
}

/// Arm noncompliance rates (ρ1 control, ρ2 treatment) and pooled loss of follow-up `r`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AdjustmentProfile {
    pub rho1: f64,
    pub rho2: f64,
    pub r: f64,
}

impl AdjustmentProfile {
    pub fn new(rho1: f64, rho2: f64, r: f64) -> Self {
        AdjustmentProfile { rho1, rho2, r }
    }

    /// Perfect compliance, no attrition.
    pub fn none() -> Self {
        AdjustmentProfile::default()
    }

    pub fn compliance(&self) -> f64 {
        1.0 - self.rho1 - self.rho2
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("rho", self.rho1), ("rho", self.rho2), ("r", self.r)] {
            if !(v.is_finite() && (0.0..1.0).contains(&v)) {
                return Err(SizeError::invalid(name, format!("{v} is not in [0, 1)")));
            }
        }
        if self.rho1 + self.rho2 >= 1.0 {
            return Err(SizeError::invalid("rho", "rho1 + rho2 must be < 1"));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Endpoints
// ---------------------------------------------------------------------------

/// Pooled SD σ and target effect ε = μ2 − μ1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousEndpoint {
    pub sigma: f64,
    pub effect: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BinaryEndpoint {
    /// Per-arm response probabilities (parallel designs). The effect is
    /// `p2 - p1`; a separately stated effect is kept only for a consistency warning.
    Proportions {
        p1: f64,
        p2: f64,
        stated_effect: Option<f64>,
    },
    /// SD of the within-subject arm difference (crossover designs).
    SdOfDifference { sigma_d: f64, effect: f64 },
}

/// Exponential hazards with uniform accrual over `[0, t_accrual]`, total
/// duration `t_total` and exponential dropout rate `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalEndpoint {
    pub lambda1: f64,
    pub lambda2: f64,
    pub t_total: f64,
    pub t_accrual: f64,
    pub gamma: f64,
}

/// Category probabilities per arm and log odds ratio θ.
#[derive(Debug, Clone, PartialEq)]
pub struct OrdinalEndpoint {
    pub probs1: Vec<f64>,
    pub probs2: Vec<f64>,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EndpointKind {
    Continuous,
    Binary,
    Survival,
    Ordinal,
}

impl EndpointKind {
    pub const ALL: [EndpointKind; 4] = [
        EndpointKind::Continuous,
        EndpointKind::Binary,
        EndpointKind::Survival,
        EndpointKind::Ordinal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EndpointKind::Continuous => "continuous",
            EndpointKind::Binary => "binary",
            EndpointKind::Survival => "time-to-event",
            EndpointKind::Ordinal => "ordinal",
        }
    }

    fn scenario_base(self) -> u8 {
        match self {
            EndpointKind::Continuous => 0,
            EndpointKind::Binary => 8,
            EndpointKind::Survival => 16,
            EndpointKind::Ordinal => 24,
        }
    }
}

impl fmt::Display for EndpointKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EndpointSpec {
    Continuous(ContinuousEndpoint),
    Binary(BinaryEndpoint),
    Survival(SurvivalEndpoint),
    Ordinal(OrdinalEndpoint),
}

impl EndpointSpec {
    pub fn kind(&self) -> EndpointKind {
        match self {
            EndpointSpec::Continuous(_) => EndpointKind::Continuous,
            EndpointSpec::Binary(_) => EndpointKind::Binary,
            EndpointSpec::Survival(_) => EndpointKind::Survival,
            EndpointSpec::Ordinal(_) => EndpointKind::Ordinal,
        }
    }

    fn validate(&self, design: Design) -> Result<()> {
        match self {
            EndpointSpec::Continuous(c) => {
                positive("sigma", c.sigma)?;
                finite("TTE", c.effect)
            }
            EndpointSpec::Binary(b) => match (b, design) {
                (BinaryEndpoint::Proportions { p1, p2, stated_effect }, Design::Parallel) => {
                    open_unit("varsigma", *p1)?;
                    open_unit("varsigma", *p2)?;
                    if let Some(e) = stated_effect {
                        finite("TTE", *e)?;
                    }
                    Ok(())
                }
                (BinaryEndpoint::SdOfDifference { sigma_d, effect }, Design::Crossover) => {
                    positive("varsigma", *sigma_d)?;
                    finite("TTE", *effect)
                }
                (BinaryEndpoint::Proportions { .. }, Design::Crossover) => {
                    Err(SizeError::InvalidCombination(
                        "crossover binary sizing takes the SD of the arm difference, not proportions"
                            .into(),
                    ))
                }
                (BinaryEndpoint::SdOfDifference { .. }, Design::Parallel) => {
                    Err(SizeError::InvalidCombination(
                        "parallel binary sizing takes per-arm proportions, not an SD".into(),
                    ))
                }
            },
            EndpointSpec::Survival(s) => {
                positive("varlambda", s.lambda1)?;
                positive("varlambda", s.lambda2)?;
                positive("ttotal", s.t_total)?;
                positive("taccrual", s.t_accrual)?;
                if s.t_accrual > s.t_total {
                    return Err(SizeError::invalid("taccrual", "must not exceed ttotal"));
                }
                if !(s.gamma.is_finite() && s.gamma >= 0.0) {
                    return Err(SizeError::invalid("gamma", "must be >= 0"));
                }
                Ok(())
            }
            EndpointSpec::Ordinal(o) => {
                finite("theta", o.theta)?;
                if o.probs1.len() != o.probs2.len() {
                    return Err(SizeError::invalid(
                        "varcatprob",
                        "both arms need the same number of categories",
                    ));
                }
                if o.probs1.len() < 2 {
                    return Err(SizeError::invalid("varcatprob", "need at least 2 categories"));
                }
                for probs in [&o.probs1, &o.probs2] {
                    if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                        return Err(SizeError::invalid(
                            "varcatprob",
                            "category probabilities must be >= 0",
                        ));
                    }
                    let sum: f64 = probs.iter().sum();
                    if (sum - 1.0).abs() > SIMPLEX_TOL {
                        return Err(SizeError::invalid(
                            "varcatprob",
                            format!("category probabilities sum to {sum}, not 1"),
                        ));
                    }
                }
                Ok(())
            }
        }
    }
}

fn finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(SizeError::invalid(name, "must be finite"))
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(SizeError::invalid(name, format!("must be > 0, got {v}")))
    }
}

fn open_unit(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(SizeError::invalid(name, format!("{v} is not a probability in (0, 1)")))
    }
}

// ---------------------------------------------------------------------------
// Requests
// ---------------------------------------------------------------------------

/// How the continuous engine solves the power condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveMode {
    #[default]
    NormalApprox,
    ExactT,
}

/// Small-sample continuity correction for the binary engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Correction {
    #[default]
    None,
    Continuity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SizeOptions {
    pub mode: SolveMode,
    pub correction: Correction,
    pub convention: MarginConvention,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignRequest {
    pub layout: TrialLayout,
    pub frame: HypothesisFrame,
    pub significance: SignificanceSpec,
    pub endpoint: EndpointSpec,
    pub adjustment: AdjustmentProfile,
    pub options: SizeOptions,
}

/// A request that passed every invariant and the scenario gate.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidRequest {
    request: DesignRequest,
    scenario: u8,
    warnings: Vec<String>,
}

impl ValidRequest {
    pub fn request(&self) -> &DesignRequest {
        &self.request
    }

    /// Row number of the supported scenario (1–20, 25–28).
    pub fn scenario(&self) -> u8 {
        self.scenario
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn into_inner(self) -> DesignRequest {
        self.request
    }

    /// Same request with a different noncompliance/attrition profile.
    pub fn with_adjustment(&self, adjustment: AdjustmentProfile) -> Result<ValidRequest> {
        let mut request = self.request.clone();
        request.adjustment = adjustment;
        request.validate()
    }
}

/// Scenario gate: checks layout, frame and endpoint invariants and maps the
/// combination to its scenario number. Crossover with time-to-event or
/// ordinal endpoints is rejected.
pub fn validate_request(
    layout: &TrialLayout,
    frame: &HypothesisFrame,
    endpoint: &EndpointSpec,
) -> Result<u8> {
    layout.validate()?;
    frame.validate()?;
    let kind = endpoint.kind();
    if layout.design == Design::Crossover
        && matches!(kind, EndpointKind::Survival | EndpointKind::Ordinal)
    {
        return Err(SizeError::UnsupportedScenario {
            design: layout.design.name(),
            endpoint: kind.name(),
        });
    }
    endpoint.validate(layout.design)?;
    let design_offset = match layout.design {
        Design::Parallel => 0,
        Design::Crossover => 4,
    };
    Ok(kind.scenario_base() + design_offset + frame.kind.index() + 1)
}

impl DesignRequest {
    pub fn validate(mut self) -> Result<ValidRequest> {
        let scenario = validate_request(&self.layout, &self.frame, &self.endpoint)?;
        self.significance.validate()?;
        self.adjustment.validate()?;

        let mut warnings = Vec::new();
        if self.options.correction == Correction::Continuity
            && !matches!(self.endpoint, EndpointSpec::Binary(BinaryEndpoint::Proportions { .. }))
        {
            return Err(SizeError::InvalidCombination(
                "continuity correction applies only to parallel binary proportions".into(),
            ));
        }
        if self.options.mode == SolveMode::ExactT && self.endpoint.kind() != EndpointKind::Continuous
        {
            return Err(SizeError::InvalidCombination(
                "exact-t mode is available for continuous endpoints only".into(),
            ));
        }
        if self.layout.design == Design::Crossover
            && self.endpoint.kind() == EndpointKind::Continuous
            && self.layout.k != 1.0
        {
            warnings.push(format!(
                "crossover continuous design fixes k = 1; supplied k = {} ignored",
                self.layout.k
            ));
            self.layout.k = 1.0;
        }
        if let EndpointSpec::Binary(BinaryEndpoint::Proportions {
            p1,
            p2,
            stated_effect: Some(e),
        }) = self.endpoint
        {
            if (e - (p2 - p1)).abs() > 1e-9 {
                warnings.push(format!(
                    "TTE = {e} differs from p2 - p1 = {}; using p2 - p1",
                    p2 - p1
                ));
            }
        }
        Ok(ValidRequest {
            request: self,
            scenario,
            warnings,
        })
    }
}

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

/// Per-arm sizes. `raw_n2` is the real-valued solution after attrition
/// inflation; `unadjusted_n2` is the size with ρ = 0 and r = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeResult {
    pub n2: u64,
    pub n1: u64,
    pub total: u64,
    pub raw_n2: f64,
    pub unadjusted_n2: u64,
    pub warnings: Vec<String>,
}
