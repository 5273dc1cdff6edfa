//! Monte Carlo trial simulator: empirical power of a design at a given size
//! under treatment switching and loss of follow-up.
//!
//! Each replicate enrolls `n2` treatment and `ceil(k·n2)` control subjects.
//! A subject receives the other arm's regimen with its arm's noncompliance
//! probability and is dropped from the analysis with probability `r`. The
//! analysis is by randomized arm and uses a frame-matched Wald test:
//!
//! - equality: two-sided at α;
//! - noninferiority/superiority: one-sided at α against the null boundary,
//!   oriented toward the side where the design's effect lies;
//! - equivalence: two one-sided tests, each at α.
//!
//! Crossover designs are simulated as one within-subject treatment
//! difference per subject; a noncompliant subject takes the regimens in
//! swapped order, which flips the sign of its difference.
//!
//! Replicate `i` draws from its own generator seeded by
//! [`derive_replicate_seed`], and rejections are summed as integers, so the
//! estimate does not depend on thread count or scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adjust::mix_noncompliance;
use crate::error::{Result, SizeError};
use crate::hypothesis::{resolve, ResolvedFrame};
use crate::model::{
    BinaryEndpoint, Design, EndpointSpec, HypothesisKind, ValidRequest,
};
use crate::numerics::normal_upper_quantile;

pub const DEFAULT_REPLICATES: usize = 10_000;
pub const MIN_REPLICATES: usize = 100;

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub replicates: usize,
    pub master_seed: u64,
    pub request: ValidRequest,
    pub n2: u64,
}

impl SimConfig {
    pub fn new(request: ValidRequest, n2: u64, replicates: usize, master_seed: u64) -> Result<Self> {
        let cfg = SimConfig {
            replicates,
            master_seed,
            request,
            n2,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.replicates < MIN_REPLICATES {
            return Err(SizeError::invalid(
                "replicates",
                format!("need at least {MIN_REPLICATES}, got {}", self.replicates),
            ));
        }
        if self.n2 == 0 {
            return Err(SizeError::invalid("n2", "must be a positive integer"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub power: f64,
    #[serde(rename = "mc_se")]
    pub mc_standard_error: f64,
    pub replicates: usize,
    pub seed: u64,
}

/// Counter-based seed for replicate `index`: a bijective 64-bit mix of
/// `mix(master) + index·φ`, so distinct indices never collide for a fixed master.
pub fn derive_replicate_seed(master_seed: u64, replicate_index: u64) -> u64 {
    const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
    mix64(mix64(master_seed).wrapping_add(replicate_index.wrapping_mul(GOLDEN)))
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Empirical power on the current rayon pool.
pub fn simulate_power(cfg: &SimConfig) -> Result<SimOutcome> {
    cfg.validate()?;
    let plan = Plan::build(cfg)?;
    let rejections: u64 = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_replicate_seed(cfg.master_seed, i));
            u64::from(plan.run(&mut rng))
        })
        .sum();
    let p = rejections as f64 / cfg.replicates as f64;
    Ok(SimOutcome {
        power: p,
        mc_standard_error: (p * (1.0 - p) / cfg.replicates as f64).sqrt(),
        replicates: cfg.replicates,
        seed: cfg.master_seed,
    })
}

/// [`simulate_power`] on a dedicated pool with `threads` workers.
pub fn simulate_power_with_threads(cfg: &SimConfig, threads: usize) -> Result<SimOutcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| SizeError::invalid("threads", e.to_string()))?;
    pool.install(|| simulate_power(cfg))
}

// ---------------------------------------------------------------------------
// Replicate plan
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum OutcomeModel {
    /// Arm means (control, treatment) and common SD.
    Normal { means: [f64; 2], sigma: f64 },
    Bernoulli { probs: [f64; 2] },
    /// Within-subject difference `±effect + sigma·Z`.
    PairedNormal { effect: f64, sigma: f64 },
    /// Within-subject binary difference in {−1, 0, +1} with
    /// P(+1) = `up`, P(−1) = `down` for a subject on the planned order.
    PairedDiscordant { up: f64, down: f64 },
    Exponential {
        hazards: [f64; 2],
        t_total: f64,
        t_accrual: f64,
        gamma: f64,
    },
    /// Cumulative category probabilities per arm.
    Categorical { cumulative: [Vec<f64>; 2] },
}

#[derive(Debug, Clone, Copy)]
struct TestRule {
    kind: HypothesisKind,
    critical: f64,
    shift: f64,
    delta: f64,
    direction: f64,
}

impl TestRule {
    fn new(frame: &ResolvedFrame, design_effect: f64) -> Self {
        TestRule {
            kind: frame.kind,
            critical: normal_upper_quantile(frame.tail_prob),
            shift: frame.null_shift(),
            delta: frame.delta,
            direction: if design_effect < 0.0 { -1.0 } else { 1.0 },
        }
    }

    fn rejects(&self, est: f64, se: f64) -> bool {
        if !(se > 0.0 && se.is_finite() && est.is_finite()) {
            return false;
        }
        match self.kind {
            HypothesisKind::Equality => (est / se).abs() > self.critical,
            HypothesisKind::Noninferiority | HypothesisKind::Superiority => {
                self.direction * (est - self.shift) / se > self.critical
            }
            HypothesisKind::Equivalence => {
                (est + self.delta) / se > self.critical && (est - self.delta) / se < -self.critical
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Plan {
    /// Enrolled subjects per arm: index 0 control, 1 treatment.
    sizes: [usize; 2],
    rho: [f64; 2],
    r: f64,
    model: OutcomeModel,
    rule: TestRule,
}

impl Plan {
    fn build(cfg: &SimConfig) -> Result<Plan> {
        let req = cfg.request.request();
        let frame = resolve(&req.frame, &req.significance, req.options.convention)?;
        let adj = req.adjustment;
        let n2 = cfg.n2 as usize;
        let n1 = (req.layout.k * cfg.n2 as f64).ceil() as usize;

        // design effect V at the mixed parameters, on the frame's θ scale
        let (model, theta1, theta2) = match (&req.endpoint, req.layout.design) {
            (EndpointSpec::Continuous(c), Design::Parallel) => (
                OutcomeModel::Normal {
                    means: [0.0, c.effect],
                    sigma: c.sigma,
                },
                0.0,
                c.effect,
            ),
            (EndpointSpec::Continuous(c), Design::Crossover) => (
                OutcomeModel::PairedNormal {
                    effect: c.effect,
                    sigma: c.sigma,
                },
                0.0,
                c.effect,
            ),
            (EndpointSpec::Binary(BinaryEndpoint::Proportions { p1, p2, .. }), _) => {
                (OutcomeModel::Bernoulli { probs: [*p1, *p2] }, *p1, *p2)
            }
            (EndpointSpec::Binary(BinaryEndpoint::SdOfDifference { sigma_d, effect }), _) => {
                let second_moment = sigma_d * sigma_d + effect * effect;
                let up = (second_moment + effect) / 2.0;
                let down = (second_moment - effect) / 2.0;
                if up < 0.0 || down < 0.0 || up + down > 1.0 {
                    return Err(SizeError::InvalidCombination(format!(
                        "sigma_d = {sigma_d} and effect = {effect} admit no paired binary distribution"
                    )));
                }
                (OutcomeModel::PairedDiscordant { up, down }, 0.0, *effect)
            }
            (EndpointSpec::Survival(s), Design::Parallel) => (
                OutcomeModel::Exponential {
                    hazards: [s.lambda1, s.lambda2],
                    t_total: s.t_total,
                    t_accrual: s.t_accrual,
                    gamma: s.gamma,
                },
                -s.lambda1,
                -s.lambda2,
            ),
            (EndpointSpec::Ordinal(o), Design::Parallel) => {
                let cum = |p: &[f64]| {
                    p.iter()
                        .scan(0.0, |acc, x| {
                            *acc += x;
                            Some(*acc)
                        })
                        .collect::<Vec<_>>()
                };
                (
                    OutcomeModel::Categorical {
                        cumulative: [cum(&o.probs1), cum(&o.probs2)],
                    },
                    0.0,
                    o.theta,
                )
            }
            (endpoint, design) => {
                return Err(SizeError::UnsupportedScenario {
                    design: design.name(),
                    endpoint: endpoint.kind().name(),
                })
            }
        };
        let mixed = mix_noncompliance(theta1, theta2, adj.rho1, adj.rho2);
        let design_effect = frame.effect(mixed.theta1_star, mixed.theta2_star);
        Ok(Plan {
            sizes: [n1, n2],
            rho: [adj.rho1, adj.rho2],
            r: adj.r,
            model,
            rule: TestRule::new(&frame, design_effect),
        })
    }

    /// One simulated trial; true when the null is rejected.
    fn run<R: Rng>(&self, rng: &mut R) -> bool {
        let (est, se) = match &self.model {
            OutcomeModel::Normal { means, sigma } => {
                let mut acc = [Welford::default(), Welford::default()];
                self.enroll(rng, |rng, arm, regimen| {
                    let z: f64 = rng.sample(StandardNormal);
                    acc[arm].push(means[regimen] + sigma * z);
                });
                two_sample_wald(&acc)
            }
            OutcomeModel::Bernoulli { probs } => {
                let mut n = [0u64; 2];
                let mut hits = [0u64; 2];
                self.enroll(rng, |rng, arm, regimen| {
                    n[arm] += 1;
                    if rng.random::<f64>() < probs[regimen] {
                        hits[arm] += 1;
                    }
                });
                if n[0] == 0 || n[1] == 0 {
                    return false;
                }
                let p = [hits[0] as f64 / n[0] as f64, hits[1] as f64 / n[1] as f64];
                let var = p[0] * (1.0 - p[0]) / n[0] as f64 + p[1] * (1.0 - p[1]) / n[1] as f64;
                (p[1] - p[0], var.sqrt())
            }
            OutcomeModel::PairedNormal { effect, sigma } => {
                let mut acc = Welford::default();
                self.enroll(rng, |rng, arm, regimen| {
                    let sign = if arm == regimen { 1.0 } else { -1.0 };
                    let z: f64 = rng.sample(StandardNormal);
                    acc.push(sign * effect + sigma * z);
                });
                acc.mean_and_se()
            }
            OutcomeModel::PairedDiscordant { up, down } => {
                let mut acc = Welford::default();
                self.enroll(rng, |rng, arm, regimen| {
                    let (u, d) = if arm == regimen { (*up, *down) } else { (*down, *up) };
                    let x = rng.random::<f64>();
                    let diff = if x < u {
                        1.0
                    } else if x < u + d {
                        -1.0
                    } else {
                        0.0
                    };
                    acc.push(diff);
                });
                acc.mean_and_se()
            }
            OutcomeModel::Exponential {
                hazards,
                t_total,
                t_accrual,
                gamma,
            } => {
                let mut events = [0u64; 2];
                let mut exposure = [0.0f64; 2];
                self.enroll(rng, |rng, arm, regimen| {
                    let entry = rng.random::<f64>() * t_accrual;
                    let e1: f64 = rng.sample(Exp1);
                    let event = e1 / hazards[regimen];
                    let dropout = if *gamma > 0.0 {
                        let e2: f64 = rng.sample(Exp1);
                        e2 / gamma
                    } else {
                        f64::INFINITY
                    };
                    let censor = dropout.min(t_total - entry);
                    if event <= censor {
                        events[arm] += 1;
                        exposure[arm] += event;
                    } else {
                        exposure[arm] += censor;
                    }
                });
                if events[0] == 0 || events[1] == 0 {
                    return false;
                }
                let h = [
                    events[0] as f64 / exposure[0],
                    events[1] as f64 / exposure[1],
                ];
                let var = h[0] * h[0] / events[0] as f64 + h[1] * h[1] / events[1] as f64;
                // θ = −λ, so θ2 − θ1 = λ1 − λ2
                (h[0] - h[1], var.sqrt())
            }
            OutcomeModel::Categorical { cumulative } => {
                let categories = cumulative[0].len();
                let mut counts = [vec![0u64; categories], vec![0u64; categories]];
                self.enroll(rng, |rng, arm, regimen| {
                    let x = rng.random::<f64>();
                    let cum = &cumulative[regimen];
                    let j = cum.iter().position(|&c| x < c).unwrap_or(categories - 1);
                    counts[arm][j] += 1;
                });
                rank_score_log_odds(&counts[0], &counts[1])
            }
        };
        self.rule.rejects(est, se)
    }

    /// Enroll both arms; `observe(rng, arm, regimen)` is called for each
    /// subject that stays in follow-up.
    fn enroll<R: Rng, F>(&self, rng: &mut R, mut observe: F)
    where
        F: FnMut(&mut R, usize, usize),
    {
        for arm in 0..2 {
            for _ in 0..self.sizes[arm] {
                let regimen = if rng.random::<f64>() < self.rho[arm] { 1 - arm } else { arm };
                let lost = rng.random::<f64>() < self.r;
                if !lost {
                    observe(rng, arm, regimen);
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn variance(&self) -> f64 {
        if self.n < 2 {
            f64::NAN
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    fn mean_and_se(&self) -> (f64, f64) {
        (self.mean, (self.variance() / self.n as f64).sqrt())
    }
}

fn two_sample_wald(acc: &[Welford; 2]) -> (f64, f64) {
    let var = acc[0].variance() / acc[0].n as f64 + acc[1].variance() / acc[1].n as f64;
    (acc[1].mean - acc[0].mean, var.sqrt())
}

/// Rank-sum (Wilcoxon) score statistic for ordered categories, scaled to a
/// log odds ratio estimate `Z/V` with standard error `1/√V`. Positive when
/// the treatment arm sits in lower-index categories.
fn rank_score_log_odds(control: &[u64], treatment: &[u64]) -> (f64, f64) {
    let n1: u64 = control.iter().sum();
    let n2: u64 = treatment.iter().sum();
    let n = (n1 + n2) as f64;
    if n1 == 0 || n2 == 0 {
        return (f64::NAN, f64::NAN);
    }
    let totals: Vec<u64> = control.iter().zip(treatment).map(|(a, b)| a + b).collect();
    let mut below = 0u64;
    let mut score = 0.0;
    let mut cube_sum = 0.0;
    for (j, &t) in totals.iter().enumerate() {
        let above = (n1 + n2) - below - t;
        score += treatment[j] as f64 * (above as f64 - below as f64);
        cube_sum += (t as f64 / n).powi(3);
        below += t;
    }
    let z = score / (n + 1.0);
    let v = n1 as f64 * n2 as f64 * n / (3.0 * (n + 1.0).powi(2)) * (1.0 - cube_sum);
    if v <= 0.0 {
        return (f64::NAN, f64::NAN);
    }
    (z / v, 1.0 / v.sqrt())
}
