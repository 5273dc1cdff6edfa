//! Per-arm sample size solvers for continuous, binary, time-to-event and
//! ordinal endpoints.
//!
//! Every engine follows the same pipeline: mix the arm parameters for
//! noncompliance, resolve the effect functional `V` at the mixed values,
//! solve the real-valued relaxation for `n2`, inflate by `1/(1 − r)` and
//! take the ceiling once. `n1` is `ceil(k · raw_n2)`.

use crate::adjust::{inflate_for_attrition, mix_noncompliance, pooled_category_probs};
use crate::error::{Result, SizeError};
use crate::hypothesis::{resolve, ResolvedFrame};
use crate::model::{
    AdjustmentProfile, BinaryEndpoint, ContinuousEndpoint, Correction, Design, DesignRequest,
    EndpointSpec, HypothesisFrame, HypothesisKind, OrdinalEndpoint, SignificanceSpec, SizeOptions,
    SizeResult, SolveMode, SurvivalEndpoint, TrialLayout, ValidRequest,
};
use crate::numerics::{
    central_t_upper_quantile, integer_infimum, noncentral_t_cdf, NoncentralTParams,
};

/// Design multiplier `s` and variance term of a size formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignConstants {
    pub s: f64,
    pub variance_term: f64,
}

/// Real-valued solution (already inflated for attrition) plus any warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSize {
    pub value: f64,
    pub warnings: Vec<String>,
}

// ---------------------------------------------------------------------------
// Public entry points
// ---------------------------------------------------------------------------

/// Size a validated request: adjusted result plus the unadjusted size.
pub fn compute_size(req: &ValidRequest) -> Result<SizeResult> {
    let r = req.request();
    let adjusted = raw_n2(r, &r.adjustment, r.significance.beta)?;
    let unadjusted = raw_n2(r, &AdjustmentProfile::none(), r.significance.beta)?;

    let mut warnings: Vec<String> = req.warnings().to_vec();
    for w in adjusted.warnings.into_iter().chain(unadjusted.warnings) {
        if !warnings.contains(&w) {
            warnings.push(w);
        }
    }
    let raw = adjusted.value;
    let n2 = ceil_count(raw)?;
    let n1 = ceil_count(r.layout.k * raw)?;
    Ok(SizeResult {
        n2,
        n1,
        total: n1 + n2,
        raw_n2: raw,
        unadjusted_n2: ceil_count(unadjusted.value)?,
        warnings,
    })
}

/// Real-valued adjusted `n2` of a request evaluated at an arbitrary β.
///
/// Only β's own range is checked, not `α + β < 1`, so the power inversion
/// can sweep the whole interval.
pub fn raw_n2_at(req: &ValidRequest, beta: f64) -> Result<f64> {
    let r = req.request();
    raw_n2(r, &r.adjustment, beta).map(|s| s.value)
}

pub fn size_mean(
    layout: TrialLayout,
    frame: HypothesisFrame,
    sig: SignificanceSpec,
    endpoint: ContinuousEndpoint,
    adj: AdjustmentProfile,
    mode: SolveMode,
) -> Result<SizeResult> {
    let options = SizeOptions {
        mode,
        ..SizeOptions::default()
    };
    size_request(layout, frame, sig, EndpointSpec::Continuous(endpoint), adj, options)
}

pub fn size_prop(
    layout: TrialLayout,
    frame: HypothesisFrame,
    sig: SignificanceSpec,
    endpoint: BinaryEndpoint,
    adj: AdjustmentProfile,
    correction: Correction,
) -> Result<SizeResult> {
    let options = SizeOptions {
        correction,
        ..SizeOptions::default()
    };
    size_request(layout, frame, sig, EndpointSpec::Binary(endpoint), adj, options)
}

pub fn size_tte(
    layout: TrialLayout,
    frame: HypothesisFrame,
    sig: SignificanceSpec,
    endpoint: SurvivalEndpoint,
    adj: AdjustmentProfile,
) -> Result<SizeResult> {
    let options = SizeOptions::default();
    size_request(layout, frame, sig, EndpointSpec::Survival(endpoint), adj, options)
}

pub fn size_ord(
    layout: TrialLayout,
    frame: HypothesisFrame,
    sig: SignificanceSpec,
    endpoint: OrdinalEndpoint,
    adj: AdjustmentProfile,
) -> Result<SizeResult> {
    let options = SizeOptions::default();
    size_request(layout, frame, sig, EndpointSpec::Ordinal(endpoint), adj, options)
}

fn size_request(
    layout: TrialLayout,
    frame: HypothesisFrame,
    significance: SignificanceSpec,
    endpoint: EndpointSpec,
    adjustment: AdjustmentProfile,
    options: SizeOptions,
) -> Result<SizeResult> {
    let req = DesignRequest {
        layout,
        frame,
        significance,
        endpoint,
        adjustment,
        options,
    }
    .validate()?;
    compute_size(&req)
}

// ---------------------------------------------------------------------------
// Survival variance
// ---------------------------------------------------------------------------

/// Probability that a subject's event is observed: exponential survival with
/// hazard `lambda`, exponential dropout `gamma`, entry uniform over
/// `[0, T0]` and administrative censoring at `T`.
pub fn expected_event_probability(lambda: f64, endpoint: &SurvivalEndpoint) -> f64 {
    let rate = lambda + endpoint.gamma;
    let t0 = endpoint.t_accrual;
    // e^{-a(T-T0)} - e^{-aT} = -e^{-a(T-T0)} * expm1(-a T0)
    let gap = -(-rate * (endpoint.t_total - t0)).exp() * (-rate * t0).exp_m1();
    lambda / rate * (1.0 - gap / (rate * t0))
}

/// Asymptotic variance of the hazard estimate per subject, `λ² / E(λ)`.
pub fn survival_variance(lambda: f64, endpoint: &SurvivalEndpoint) -> f64 {
    lambda * lambda / expected_event_probability(lambda, endpoint)
}

// ---------------------------------------------------------------------------
// Engines
// ---------------------------------------------------------------------------

fn raw_n2(req: &DesignRequest, adj: &AdjustmentProfile, beta: f64) -> Result<RawSize> {
    let sig = SignificanceSpec::new(req.significance.alpha, beta);
    let frame = resolve(&req.frame, &sig, req.options.convention)?;
    let mut warnings = Vec::new();
    let unadjusted = match &req.endpoint {
        EndpointSpec::Continuous(c) => {
            raw_mean(&req.layout, &frame, c, adj, req.options.mode, &mut warnings)?
        }
        EndpointSpec::Binary(b) => {
            raw_prop(&req.layout, &frame, b, adj, req.options.correction, &mut warnings)?
        }
        EndpointSpec::Survival(s) => raw_tte(&req.layout, &frame, s, adj, &mut warnings)?,
        EndpointSpec::Ordinal(o) => raw_ord(&req.layout, &frame, o, adj, &mut warnings)?,
    };
    let value = inflate_for_attrition(unadjusted, adj.r)?;
    if !(value.is_finite() && value > 0.0) {
        return Err(SizeError::NoFiniteSize(format!("size evaluates to {value}")));
    }
    Ok(RawSize { value, warnings })
}

/// Reject effects with no finite size; warn when a one-sided alternative
/// points the other way (the size then uses V²).
fn check_effect(frame: &ResolvedFrame, v: f64, warnings: &mut Vec<String>) -> Result<()> {
    if !v.is_finite() {
        return Err(SizeError::NoFiniteSize("effect is not finite".into()));
    }
    match frame.kind {
        HypothesisKind::Equality if v == 0.0 => Err(SizeError::NoFiniteSize(
            "zero effect under an equality test".into(),
        )),
        HypothesisKind::Equivalence if v <= 0.0 => Err(SizeError::NoFiniteSize(format!(
            "true difference lies outside the equivalence margin (V = {v})"
        ))),
        HypothesisKind::Noninferiority | HypothesisKind::Superiority if v == 0.0 => Err(
            SizeError::NoFiniteSize("effect sits exactly on the null boundary".into()),
        ),
        HypothesisKind::Noninferiority | HypothesisKind::Superiority if v < 0.0 => {
            warnings.push(format!(
                "V = {v} is negative: the {} alternative is not satisfied; sizing with V^2",
                frame.kind
            ));
            Ok(())
        }
        _ => Ok(()),
    }
}

pub fn continuous_constants(layout: &TrialLayout, sigma: f64) -> DesignConstants {
    let k = layout.k;
    DesignConstants {
        s: match layout.design {
            Design::Parallel => 1.0,
            Design::Crossover => 4.0,
        },
        variance_term: sigma * sigma * (1.0 + 1.0 / k),
    }
}

fn raw_mean(
    layout: &TrialLayout,
    frame: &ResolvedFrame,
    ep: &ContinuousEndpoint,
    adj: &AdjustmentProfile,
    mode: SolveMode,
    warnings: &mut Vec<String>,
) -> Result<f64> {
    let mixed = mix_noncompliance(0.0, ep.effect, adj.rho1, adj.rho2);
    let v = frame.effect(mixed.theta1_star, mixed.theta2_star);
    check_effect(frame, v, warnings)?;
    let dc = continuous_constants(layout, ep.sigma);
    let closed_form = dc.variance_term * frame.z_sum().powi(2) / (dc.s * v * v);
    match mode {
        SolveMode::NormalApprox => Ok(closed_form),
        SolveMode::ExactT => exact_t_size(layout.k, &dc, frame, v.abs(), closed_form),
    }
}

/// Least integer `m` whose noncentral-t power reaches `W(β)`.
fn exact_t_size(
    k: f64,
    dc: &DesignConstants,
    frame: &ResolvedFrame,
    abs_v: f64,
    hint: f64,
) -> Result<f64> {
    let mut failure = None;
    let mut reaches = |m: u64| -> bool {
        let mf = m as f64;
        let df = (1.0 + k) * mf - 2.0;
        if df <= 0.0 {
            return false;
        }
        let ncp = (dc.s * mf / dc.variance_term).sqrt() * abs_v;
        let power = central_t_upper_quantile(frame.tail_prob, df)
            .and_then(|t| noncentral_t_cdf(t, NoncentralTParams::new(df, ncp)?))
            .map(|cdf| 1.0 - cdf);
        match power {
            Ok(p) => p >= frame.power_level,
            Err(e) => {
                failure.get_or_insert(e);
                true
            }
        }
    };
    let hint = if hint.is_finite() { hint.ceil().max(1.0) as u64 } else { 1 };
    let m = integer_infimum(&mut reaches, hint)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(m as f64),
    }
}

pub fn binary_constants(
    layout: &TrialLayout,
    endpoint: &BinaryEndpoint,
    adj: &AdjustmentProfile,
) -> DesignConstants {
    match *endpoint {
        BinaryEndpoint::Proportions { p1, p2, .. } => {
            let m = mix_noncompliance(p1, p2, adj.rho1, adj.rho2);
            let (a, b) = (m.theta1_star, m.theta2_star);
            DesignConstants {
                s: 1.0,
                variance_term: a * (1.0 - a) / layout.k + b * (1.0 - b),
            }
        }
        BinaryEndpoint::SdOfDifference { sigma_d, .. } => DesignConstants {
            s: 2.0,
            variance_term: sigma_d * sigma_d,
        },
    }
}

fn raw_prop(
    layout: &TrialLayout,
    frame: &ResolvedFrame,
    ep: &BinaryEndpoint,
    adj: &AdjustmentProfile,
    correction: Correction,
    warnings: &mut Vec<String>,
) -> Result<f64> {
    let mixed = match *ep {
        BinaryEndpoint::Proportions { p1, p2, .. } => mix_noncompliance(p1, p2, adj.rho1, adj.rho2),
        BinaryEndpoint::SdOfDifference { effect, .. } => {
            mix_noncompliance(0.0, effect, adj.rho1, adj.rho2)
        }
    };
    let v = frame.effect(mixed.theta1_star, mixed.theta2_star);
    check_effect(frame, v, warnings)?;
    let dc = binary_constants(layout, ep, adj);
    let z = frame.z_sum();
    match correction {
        Correction::None => Ok(dc.variance_term * z * z / (dc.s * v * v)),
        Correction::Continuity => {
            let a = (1.0 + 1.0 / layout.k) / 2.0;
            let bc = dc.variance_term.sqrt() * z;
            let d = v.abs();
            let root = (bc + (bc * bc + 4.0 * a * d).sqrt()) / (2.0 * d);
            Ok(root * root)
        }
    }
}

fn raw_tte(
    layout: &TrialLayout,
    frame: &ResolvedFrame,
    ep: &SurvivalEndpoint,
    adj: &AdjustmentProfile,
    warnings: &mut Vec<String>,
) -> Result<f64> {
    let mixed = mix_noncompliance(ep.lambda1, ep.lambda2, adj.rho1, adj.rho2);
    let (l1, l2) = (mixed.theta1_star, mixed.theta2_star);
    // the frame is stated on θ = −λ, so θ2 − θ1 = λ1 − λ2
    let v = frame.effect(-l1, -l2);
    check_effect(frame, v, warnings)?;
    let variance = survival_variance(l1, ep) / layout.k + survival_variance(l2, ep);
    Ok(variance * frame.z_sum().powi(2) / (v * v))
}

fn raw_ord(
    layout: &TrialLayout,
    frame: &ResolvedFrame,
    ep: &OrdinalEndpoint,
    adj: &AdjustmentProfile,
    warnings: &mut Vec<String>,
) -> Result<f64> {
    let mixed = mix_noncompliance(0.0, ep.theta, adj.rho1, adj.rho2);
    let v = frame.effect(mixed.theta1_star, mixed.theta2_star);
    check_effect(frame, v, warnings)?;
    let pooled = pooled_category_probs(&ep.probs1, &ep.probs2, adj.rho1, adj.rho2);
    let information = 1.0 - pooled.iter().map(|p| p.powi(3)).sum::<f64>();
    if information <= 1e-12 {
        return Err(SizeError::NoFiniteSize(
            "pooled category probabilities are concentrated on one category".into(),
        ));
    }
    let k = layout.k;
    Ok(3.0 * (k + 1.0) * frame.z_sum().powi(2) / (k * v * v * information))
}

fn ceil_count(raw: f64) -> Result<u64> {
    let c = raw.ceil();
    if !(c.is_finite() && (1.0..1e18).contains(&c)) {
        return Err(SizeError::NoFiniteSize(format!("size evaluates to {raw}")));
    }
    Ok(c as u64)
}
