//! Request schema shared by the command-line flags and the JSON config file.
//!
//! Field names follow the flag names, so a config file, the `request` object
//! echoed in JSON output and the command line are interchangeable.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SizeError};
use crate::hypothesis::MarginConvention;
use crate::model::{
    AdjustmentProfile, BinaryEndpoint, ContinuousEndpoint, Correction, DesignRequest,
    EndpointSpec, HypothesisFrame, HypothesisKind, OrdinalEndpoint, SignificanceSpec, SizeOptions,
    SolveMode, SurvivalEndpoint, TrialLayout, ValidRequest,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EndpointArg {
    Mean,
    Prop,
    Tte,
    Ord,
}

impl EndpointArg {
    pub fn name(self) -> &'static str {
        match self {
            EndpointArg::Mean => "mean",
            EndpointArg::Prop => "prop",
            EndpointArg::Tte => "tte",
            EndpointArg::Ord => "ord",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignArg {
    Parallel,
    Crossover,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestArg {
    Equality,
    Noninferiority,
    Superiority,
    Equivalence,
}

impl From<TestArg> for HypothesisKind {
    fn from(t: TestArg) -> Self {
        match t {
            TestArg::Equality => HypothesisKind::Equality,
            TestArg::Noninferiority => HypothesisKind::Noninferiority,
            TestArg::Superiority => HypothesisKind::Superiority,
            TestArg::Equivalence => HypothesisKind::Equivalence,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    NormalApprox,
    ExactT,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrectionArg {
    None,
    Continuity,
}

/// Two category-probability vectors, written `a,b,c;d,e,f` on the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatProbs(pub Vec<f64>, pub Vec<f64>);

impl FromStr for CatProbs {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(';')
            .ok_or_else(|| "expected two ';'-separated lists".to_string())?;
        Ok(CatProbs(parse_list(a)?, parse_list(b)?))
    }
}

impl fmt::Display for CatProbs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        write!(f, "{};{}", join(&self.0), join(&self.1))
    }
}

pub fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad number {x:?}: {e}"))
        })
        .collect()
}

/// Sweep axes. Absent axes hold the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho1: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho2: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<f64>>,
    /// Zip the axes instead of taking their product.
    #[serde(default)]
    pub paired: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequestConfig {
    /// Endpoint family (implied by the mean/prop/tte/ord subcommands)
    #[arg(long, global = true, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<EndpointArg>,

    /// Allocation design [default: parallel]
    #[arg(long, global = true, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignArg>,

    /// Hypothesis test [default: equality]
    #[arg(long, global = true, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test: Option<TestArg>,

    /// Significance level [default: 0.05]
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,

    /// Type II error, 1 - power [default: 0.2]
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,

    /// Pooled standard deviation (continuous)
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,

    /// Binary: p1,p2 (parallel) or sd,sd of the arm difference (crossover)
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub varsigma: Option<Vec<f64>>,

    /// Hazard rates lambda1,lambda2 (time-to-event)
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub varlambda: Option<Vec<f64>>,

    /// Category probabilities "p11,p12,...;p21,p22,..." (ordinal)
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub varcatprob: Option<CatProbs>,

    /// Allocation ratio n1/n2 [default: 1]
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,

    /// Crossover sequence count [default: 0 parallel, 1 crossover]
    #[arg(long, global = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seqnumber: Option<u32>,

    /// Total trial time
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ttotal: Option<f64>,

    /// Accrual period
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taccrual: Option<f64>,

    /// Exponential dropout rate [default: 0]
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,

    /// Hypothesis margin [default: 0]
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,

    /// Target treatment effect
    #[arg(long = "TTE", alias = "tte", global = true, allow_negative_numbers = true)]
    #[serde(default, rename = "TTE", skip_serializing_if = "Option::is_none")]
    pub tte: Option<f64>,

    /// Log odds ratio (ordinal)
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,

    /// Noncompliance rates rho1,rho2 [default: 0,0]
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<Vec<f64>>,

    /// Pooled loss of follow-up [default: 0]
    #[arg(long, global = true, allow_negative_numbers = true)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,

    /// Continuous solver [default: normal-approx]
    #[arg(long, global = true, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ModeArg>,

    /// Binary continuity correction [default: none]
    #[arg(long, global = true, value_enum)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correction: Option<CorrectionArg>,

    /// Noninferiority effect as theta2 - theta1 - delta, the superiority form
    #[arg(long = "strict-paper", global = true)]
    #[serde(default, rename = "strict_paper", skip_serializing_if = "is_false")]
    pub strict_paper: bool,

    #[arg(skip)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl RequestConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SizeError::invalid("config", format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| SizeError::invalid("config", format!("{}: {e}", path.display())))
    }

    /// Fields set in `flags` replace those of `self`.
    pub fn overlay(mut self, flags: &RequestConfig) -> Self {
        overlay!(self, flags; endpoint, design, test, alpha, beta, sigma, varsigma, varlambda,
            varcatprob, k, seqnumber, ttotal, taccrual, gamma, delta, tte, theta, rho, r, mode,
            correction, grid);
        self.strict_paper |= flags.strict_paper;
        self
    }

    pub fn endpoint(&self) -> Result<EndpointArg> {
        self.endpoint
            .ok_or_else(|| SizeError::invalid("endpoint", "missing; pass --endpoint or use a sizing subcommand"))
    }

    pub fn rho_pair(&self) -> Result<(f64, f64)> {
        match self.rho.as_deref() {
            None => Ok((0.0, 0.0)),
            Some([a, b]) => Ok((*a, *b)),
            Some(_) => Err(SizeError::invalid("rho", "expected two values rho1,rho2")),
        }
    }

    /// Same request with every default spelled out, as echoed in JSON output.
    pub fn normalized(&self) -> Result<RequestConfig> {
        let mut c = self.clone();
        let design = c.design.unwrap_or(DesignArg::Parallel);
        c.design = Some(design);
        c.test.get_or_insert(TestArg::Equality);
        c.alpha.get_or_insert(0.05);
        c.beta.get_or_insert(0.2);
        c.k.get_or_insert(1.0);
        c.seqnumber.get_or_insert(match design {
            DesignArg::Parallel => 0,
            DesignArg::Crossover => 1,
        });
        c.delta.get_or_insert(0.0);
        let (rho1, rho2) = c.rho_pair()?;
        c.rho = Some(vec![rho1, rho2]);
        c.r.get_or_insert(0.0);
        c.mode.get_or_insert(ModeArg::NormalApprox);
        c.correction.get_or_insert(CorrectionArg::None);
        if c.endpoint()? == EndpointArg::Tte {
            c.gamma.get_or_insert(0.0);
        }
        c.grid = None;
        Ok(c)
    }

    /// Build and validate the design request.
    pub fn to_request(&self) -> Result<ValidRequest> {
        let c = self.normalized()?;
        let endpoint_arg = c.endpoint()?;
        let k = c.k.unwrap_or(1.0);
        let seq = c.seqnumber.unwrap_or(0);
        let design = c.design.unwrap_or(DesignArg::Parallel);
        // seqnumber is passed through for parallel too, so a nonzero value is rejected.
        let mut layout = match design {
            DesignArg::Parallel => TrialLayout::parallel(k),
            DesignArg::Crossover => TrialLayout::crossover(k, seq),
        };
        layout.seq_count = seq;
        let frame = HypothesisFrame::new(
            c.test.unwrap_or(TestArg::Equality).into(),
            c.delta.unwrap_or(0.0),
        );
        let significance = SignificanceSpec::new(c.alpha.unwrap_or(0.05), c.beta.unwrap_or(0.2));
        let (rho1, rho2) = c.rho_pair()?;
        let adjustment = AdjustmentProfile::new(rho1, rho2, c.r.unwrap_or(0.0));

        let endpoint = match endpoint_arg {
            EndpointArg::Mean => EndpointSpec::Continuous(ContinuousEndpoint {
                sigma: need(c.sigma, "sigma")?,
                effect: need(c.tte, "TTE")?,
            }),
            EndpointArg::Prop => {
                let vs = need(c.varsigma.clone(), "varsigma")?;
                match design {
                    DesignArg::Parallel => {
                        let [p1, p2] = vs[..] else {
                            return Err(SizeError::invalid(
                                "varsigma",
                                "parallel design needs two proportions p1,p2",
                            ));
                        };
                        EndpointSpec::Binary(BinaryEndpoint::Proportions {
                            p1,
                            p2,
                            stated_effect: c.tte,
                        })
                    }
                    DesignArg::Crossover => {
                        let sigma_d = vs[0];
                        if vs.iter().any(|v| *v != sigma_d) {
                            return Err(SizeError::invalid(
                                "varsigma",
                                "crossover design takes one SD of the arm difference",
                            ));
                        }
                        EndpointSpec::Binary(BinaryEndpoint::SdOfDifference {
                            sigma_d,
                            effect: need(c.tte, "TTE")?,
                        })
                    }
                }
            }
            EndpointArg::Tte => {
                let lam = need(c.varlambda.clone(), "varlambda")?;
                let [lambda1, lambda2] = lam[..] else {
                    return Err(SizeError::invalid("varlambda", "expected two hazard rates"));
                };
                EndpointSpec::Survival(SurvivalEndpoint {
                    lambda1,
                    lambda2,
                    t_total: need(c.ttotal, "ttotal")?,
                    t_accrual: need(c.taccrual, "taccrual")?,
                    gamma: c.gamma.unwrap_or(0.0),
                })
            }
            EndpointArg::Ord => {
                let CatProbs(probs1, probs2) = need(c.varcatprob.clone(), "varcatprob")?;
                EndpointSpec::Ordinal(OrdinalEndpoint {
                    probs1,
                    probs2,
                    theta: need(c.theta, "theta")?,
                })
            }
        };

        let options = SizeOptions {
            mode: match c.mode {
                Some(ModeArg::ExactT) => SolveMode::ExactT,
                _ => SolveMode::NormalApprox,
            },
            correction: match c.correction {
                Some(CorrectionArg::Continuity) => Correction::Continuity,
                _ => Correction::None,
            },
            convention: if c.strict_paper {
                MarginConvention::StrictPaper
            } else {
                MarginConvention::Standard
            },
        };
        DesignRequest {
            layout,
            frame,
            significance,
            endpoint,
            adjustment,
            options,
        }
        .validate()
    }
}

fn need<T>(v: Option<T>, name: &'static str) -> Result<T> {
    v.ok_or_else(|| SizeError::invalid(name, "required for this endpoint"))
}
