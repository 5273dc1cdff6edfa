//! Special functions and generic solvers shared by the size engines.
//!
//! `erfc` comes from `libm`; the inverse erfc, regularized incomplete beta
//! and log-gamma come from `statrs`. The noncentral t CDF, the bracketed
//! root finder and the integer infimum search are implemented here.

use libm::erfc;
use statrs::function::beta::beta_reg;
use statrs::function::erf::erfc_inv;
use statrs::function::gamma::ln_gamma;

use crate::error::{Result, SizeError};

/// Default upper bound for [`integer_infimum`].
pub const DEFAULT_SEARCH_CAP: u64 = 1_000_000_000;

const MAX_ROOT_ITER: usize = 1000;
const SERIES_TAIL_TOL: f64 = 1e-15;
const MAX_SERIES_TERMS: usize = 200_000;

/// A probability strictly inside (0, 1), the domain of the quantile functions.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 && value < 1.0 {
            Ok(Probability(value))
        } else {
            Err(SizeError::invalid(
                "probability",
                format!("{value} is not in (0, 1)"),
            ))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Degrees of freedom and noncentrality of a noncentral t distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoncentralTParams {
    pub df: f64,
    pub ncp: f64,
}

impl NoncentralTParams {
    pub fn new(df: f64, ncp: f64) -> Result<Self> {
        let params = NoncentralTParams { df, ncp };
        params.validate()?;
        Ok(params)
    }

    pub fn central(df: f64) -> Result<Self> {
        Self::new(df, 0.0)
    }

    fn validate(&self) -> Result<()> {
        if !(self.df.is_finite() && self.df > 0.0) {
            return Err(SizeError::invalid(
                "df",
                format!("degrees of freedom must be positive, got {}", self.df),
            ));
        }
        if !self.ncp.is_finite() {
            return Err(SizeError::invalid("ncp", "noncentrality must be finite"));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Normal distribution
// ---------------------------------------------------------------------------

#[inline]
pub(crate) fn phi(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

#[inline]
fn phi_upper(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

#[inline]
fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(SizeError::invalid("x", "normal_cdf needs a finite argument"));
    }
    Ok(phi(x))
}

/// Upper-tail quantile `z_q`, i.e. the `z` with `1 - Φ(z) = q`.
pub fn normal_upper_quantile(q: Probability) -> f64 {
    let q = q.value();
    if q == 0.5 {
        return 0.0;
    }
    let mut z = std::f64::consts::SQRT_2 * erfc_inv(2.0 * q);
    // one Newton polish against our own CDF keeps the round trip tight
    let dens = normal_pdf(z);
    if dens > 0.0 {
        z += (phi_upper(z) - q) / dens;
    }
    z
}

// ---------------------------------------------------------------------------
// Noncentral t distribution
// ---------------------------------------------------------------------------

/// CDF of the noncentral t distribution.
///
/// Evaluated as Φ(-δ) plus a Poisson-weighted series of regularized
/// incomplete beta functions in `x = t²/(t²+ν)`. The series is summed
/// forward from the first term until the geometric bound on the remaining
/// Poisson mass falls below 1e-15.
pub fn noncentral_t_cdf(t: f64, params: NoncentralTParams) -> Result<f64> {
    params.validate()?;
    if t.is_nan() {
        return Err(SizeError::invalid("t", "noncentral_t_cdf got NaN"));
    }
    if t == f64::INFINITY {
        return Ok(1.0);
    }
    if t == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let value = if t >= 0.0 {
        nct_cdf_nonnegative(t, params.df, params.ncp)
    } else {
        1.0 - nct_cdf_nonnegative(-t, params.df, -params.ncp)
    };
    Ok(value.clamp(0.0, 1.0))
}

fn nct_cdf_nonnegative(t: f64, df: f64, ncp: f64) -> f64 {
    let base = phi(-ncp);
    if t == 0.0 {
        return base;
    }
    let t2 = t * t;
    let x = t2 / (t2 + df);
    let half_df = 0.5 * df;
    let lambda = 0.5 * ncp * ncp;

    if lambda == 0.0 {
        return base + 0.5 * beta_reg(0.5, half_df, x);
    }

    let ln_lambda = lambda.ln();
    let ln_abs_ncp = ncp.abs().ln();
    let sign = ncp.signum();
    let mut sum = 0.0;
    for j in 0..MAX_SERIES_TERMS {
        let jf = j as f64;
        let ln_common = -lambda + jf * ln_lambda;
        let p_j = (ln_common - ln_gamma(jf + 1.0)).exp();
        let q_j = sign
            * (ln_common + ln_abs_ncp - 0.5 * std::f64::consts::LN_2 - ln_gamma(jf + 1.5)).exp();
        if p_j != 0.0 || q_j != 0.0 {
            sum += p_j * beta_reg(jf + 0.5, half_df, x) + q_j * beta_reg(jf + 1.0, half_df, x);
        }
        if jf + 1.0 > lambda {
            let ratio = lambda / (jf + 1.0);
            let tail = (p_j + q_j.abs()) * ratio / (1.0 - ratio);
            if tail < SERIES_TAIL_TOL {
                break;
            }
        }
    }
    base + 0.5 * sum
}

/// Upper-tail quantile of the central t distribution with `df` degrees of freedom.
pub fn central_t_upper_quantile(q: Probability, df: f64) -> Result<f64> {
    let params = NoncentralTParams::central(df)?;
    let qv = q.value();
    if qv == 0.5 {
        return Ok(0.0);
    }
    if qv > 0.5 {
        return Ok(-central_t_upper_quantile(Probability::new(1.0 - qv)?, df)?);
    }
    let target = 1.0 - qv;
    let cdf = |t: f64| noncentral_t_cdf(t, params).map(|p| p - target).unwrap_or(f64::NAN);

    // t quantiles sit outside the normal ones; grow the bracket from there
    let lo = normal_upper_quantile(q).max(0.0);
    let mut hi = 2.0 * lo + 1.0;
    let mut guard = 0;
    while cdf(hi) < 0.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 1100 || !hi.is_finite() {
            return Err(SizeError::NoSignChange { lo, hi });
        }
    }
    find_root(cdf, lo, hi, 1e-13 * hi.max(1.0))
}

// ---------------------------------------------------------------------------
// Solvers
// ---------------------------------------------------------------------------

/// Bracketed scalar root finder (Brent–Dekker).
///
/// Inverse quadratic and secant steps are only accepted while they stay
/// inside the bracket and shrink it fast enough; otherwise the step is a
/// bisection. Works for step functions: the result is then a sign-change
/// location to within `tol`.
pub fn find_root<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(lo < hi) || !(tol > 0.0) {
        return Err(SizeError::invalid(
            "bracket",
            format!("need lo < hi and tol > 0, got [{lo}, {hi}], tol {tol}"),
        ));
    }
    let mut eval = |x: f64| -> Result<f64> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(SizeError::NonFinite(x))
        }
    };

    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (eval(a)?, eval(b)?);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(SizeError::NoSignChange { lo, hi });
    }

    let (mut c, mut fc) = (b, fb);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ROOT_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = eval(b)?;
    }
    Ok(b)
}

/// Least positive integer `m` with `pred(m)`, for a predicate that is false
/// and then true. Searches geometrically from `hint`, then bisects.
pub fn integer_infimum<P>(pred: P, hint: u64) -> Result<u64>
where
    P: FnMut(u64) -> bool,
{
    integer_infimum_capped(pred, hint, DEFAULT_SEARCH_CAP)
}

/// [`integer_infimum`] with an explicit search cap.
pub fn integer_infimum_capped<P>(mut pred: P, hint: u64, cap: u64) -> Result<u64>
where
    P: FnMut(u64) -> bool,
{
    let cap = cap.max(1);
    let hint = hint.clamp(1, cap);

    // invariant: pred(lo) is false (lo = 0 stands for "below the domain"),
    // pred(hi) is true
    let (mut lo, mut hi);
    if pred(hint) {
        hi = hint;
        lo = hint / 2;
        while lo > 0 && pred(lo) {
            hi = lo;
            lo /= 2;
        }
    } else {
        lo = hint;
        hi = hint;
        loop {
            if hi >= cap {
                return Err(SizeError::SearchCapExceeded(cap));
            }
            hi = hi.saturating_mul(2).min(cap);
            if pred(hi) {
                break;
            }
            lo = hi;
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
