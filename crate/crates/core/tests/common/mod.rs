#![allow(dead_code)]

//! Independent reference computations and golden requests shared by the
//! integration tests. Nothing here calls into the library's numerics.

use std::process::{Command, Output};

use trialsize::model::*;

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

/// Standard normal density.
pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Φ(x) from the Taylor series `½ + φ(x)·Σ x^{2n+1}/(2n+1)!!` for |x| ≤ 5,
/// and the Laplace continued fraction for the Mills ratio beyond.
pub fn oracle_phi(x: f64) -> f64 {
    if x.abs() <= 5.0 {
        let mut term = x;
        let mut sum = x;
        let mut n = 1.0;
        while term.abs() > 1e-17 * sum.abs().max(1e-300) {
            term *= x * x / (2.0 * n + 1.0);
            sum += term;
            n += 1.0;
        }
        0.5 + pdf(x) * sum
    } else {
        let z = x.abs();
        // Mills ratio R(z) = 1/(z + 1/(z + 2/(z + 3/(z + ...)))), evaluated bottom-up.
        let mut frac = z;
        for k in (1..=200).rev() {
            frac = z + k as f64 / frac;
        }
        let tail = pdf(z) / frac;
        if x > 0.0 {
            1.0 - tail
        } else {
            tail
        }
    }
}

/// ln Γ(x) for x > 0, Lanczos (g = 7, 9 terms).
pub fn oracle_ln_gamma(x: f64) -> f64 {
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - oracle_ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + 7.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Noncentral t CDF by quadrature of the chi-scaled representation
/// `P(T ≤ t) = ∫ Φ(t·s/√ν − δ) f_χν(s) ds`.
pub fn oracle_nct_cdf(t: f64, df: f64, ncp: f64) -> f64 {
    let log_norm = (df / 2.0 - 1.0) * 2f64.ln() + oracle_ln_gamma(df / 2.0);
    let density = |s: f64| {
        if s <= 0.0 {
            return 0.0;
        }
        ((df - 1.0) * s.ln() - 0.5 * s * s - log_norm).exp()
    };
    let integrand = |s: f64| oracle_phi(t * s / df.sqrt() - ncp) * density(s);
    let mode = (df - 1.0).max(0.0).sqrt();
    let hi = mode + 40.0;
    // Split at the chi mode so the peak is resolved on both sides.
    let split = mode.max(1.0);
    adaptive_simpson(&integrand, 0.0, split, 1e-14) + adaptive_simpson(&integrand, split, hi, 1e-14)
}

/// Size formula evaluated directly for a continuous parallel request.
pub fn oracle_continuous_raw(
    sigma: f64,
    k: f64,
    v: f64,
    z_alpha: f64,
    z_beta: f64,
    r: f64,
) -> f64 {
    sigma * sigma * (1.0 + 1.0 / k) * (z_alpha + z_beta).powi(2) / (v * v) / (1.0 - r)
}

/// Upper normal quantile by bisection on the oracle Φ.
pub fn oracle_upper_quantile(q: f64) -> f64 {
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if 1.0 - oracle_phi(mid) > q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Analytic power of two one-sided z tests at level α for a normal
/// estimate with mean `d`, standard error `se` and margin `delta`.
pub fn tost_power(d: f64, se: f64, delta: f64, alpha: f64) -> f64 {
    let z = oracle_upper_quantile(alpha);
    (oracle_phi((delta - d) / se - z) + oracle_phi((delta + d) / se - z) - 1.0).max(0.0)
}

// ---------------------------------------------------------------------------
// Golden requests
// ---------------------------------------------------------------------------

pub fn example1() -> DesignRequest {
    DesignRequest {
        layout: TrialLayout::parallel(1.0),
        frame: HypothesisFrame::new(HypothesisKind::Equivalence, 0.05),
        significance: SignificanceSpec::new(0.05, 0.2),
        endpoint: EndpointSpec::Continuous(ContinuousEndpoint {
            sigma: 0.1,
            effect: 0.01,
        }),
        adjustment: AdjustmentProfile::new(0.05, 0.07, 0.1),
        options: SizeOptions::default(),
    }
}

pub fn example2() -> DesignRequest {
    DesignRequest {
        layout: TrialLayout::crossover(1.0, 2),
        frame: HypothesisFrame::new(HypothesisKind::Superiority, 0.1),
        significance: SignificanceSpec::new(0.05, 0.2),
        endpoint: EndpointSpec::Binary(BinaryEndpoint::SdOfDifference {
            sigma_d: 0.5,
            effect: 0.0,
        }),
        adjustment: AdjustmentProfile::new(0.05, 0.07, 0.1),
        options: SizeOptions::default(),
    }
}

pub fn example3() -> DesignRequest {
    DesignRequest {
        layout: TrialLayout::parallel(1.0),
        frame: HypothesisFrame::new(HypothesisKind::Equality, 0.0),
        significance: SignificanceSpec::new(0.05, 0.2),
        endpoint: EndpointSpec::Survival(SurvivalEndpoint {
            lambda1: 1.0,
            lambda2: 2.0,
            t_total: 3.0,
            t_accrual: 1.0,
            gamma: 1e-5,
        }),
        adjustment: AdjustmentProfile::new(0.05, 0.07, 0.1),
        options: SizeOptions::default(),
    }
}

pub fn example4() -> DesignRequest {
    DesignRequest {
        layout: TrialLayout::parallel(1.0),
        frame: HypothesisFrame::new(HypothesisKind::Equality, 0.0),
        significance: SignificanceSpec::new(0.05, 0.1),
        endpoint: EndpointSpec::Ordinal(OrdinalEndpoint {
            probs1: vec![0.2, 0.5, 0.2, 0.1],
            probs2: vec![0.378, 0.472, 0.106, 0.044],
            theta: 0.887,
        }),
        adjustment: AdjustmentProfile::new(0.05, 0.07, 0.1),
        options: SizeOptions::default(),
    }
}

/// Binary superiority base, p = (0.79, 0.86), (δ = 0).
pub fn binary_base(rho1: f64, rho2: f64, r: f64) -> DesignRequest {
    DesignRequest {
        layout: TrialLayout::parallel(1.0),
        frame: HypothesisFrame::new(HypothesisKind::Superiority, 0.0),
        significance: SignificanceSpec::new(0.05, 0.2),
        endpoint: EndpointSpec::Binary(BinaryEndpoint::Proportions {
            p1: 0.79,
            p2: 0.86,
            stated_effect: None,
        }),
        adjustment: AdjustmentProfile::new(rho1, rho2, r),
        options: SizeOptions::default(),
    }
}

pub const EXAMPLE1_FLAGS: &[&str] = &[
    "--design", "parallel", "--test", "equivalence", "--alpha", "0.05", "--beta", "0.2",
    "--sigma", "0.1", "--k", "1", "--delta", "0.05", "--TTE", "0.01", "--rho", "0.05,0.07",
    "--r", "0.1",
];

pub const EXAMPLE4_FLAGS: &[&str] = &[
    "--design", "parallel", "--test", "equality", "--alpha", "0.05", "--beta", "0.1",
    "--varcatprob", "0.2,0.5,0.2,0.1;0.378,0.472,0.106,0.044", "--k", "1", "--theta", "0.887",
    "--rho", "0.05,0.07", "--r", "0.1",
];

pub const BINARY_FLAGS: &[&str] = &[
    "--design", "parallel", "--test", "superiority", "--alpha", "0.05", "--beta", "0.2",
    "--varsigma", "0.79,0.86", "--delta", "0", "--r", "0.1",
];

// ---------------------------------------------------------------------------
// CLI
// ---------------------------------------------------------------------------

pub fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trialsize"))
        .args(args)
        .output()
        .expect("spawn trialsize")
}

pub fn cli_ok(args: &[&str]) -> String {
    let out = cli(args);
    assert!(
        out.status.success(),
        "trialsize {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 output")
}

/// Collapse runs of whitespace so table rows compare independent of padding.
pub fn squash(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// `flags` minus one `--name value` pair.
pub fn without<'a>(flags: &[&'a str], name: &str) -> Vec<&'a str> {
    let mut out = Vec::new();
    let mut skip = false;
    for f in flags {
        if skip {
            skip = false;
        } else if *f == name {
            skip = true;
        } else {
            out.push(*f);
        }
    }
    out
}

pub fn concat<'a>(a: &[&'a str], b: &[&'a str]) -> Vec<&'a str> {
    a.iter().chain(b).copied().collect()
}
