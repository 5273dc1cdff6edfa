//! Command-line front end.
//!
//! `mean`, `prop`, `tte` and `ord` size one request; `power` inverts a size,
//! `sweep` sizes a noncompliance/attrition grid, `simulate` runs the Monte
//! Carlo oracle and `bioeq-map` rewrites a bioequivalence band.

pub mod config;
pub mod sweep;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::bioeq::{additive_to_equivalence, multiplicative_to_equivalence, BioeqBand};
use crate::engines::compute_size;
use crate::error::{Result, SizeError};
use crate::model::SizeResult;
use crate::power::achieved_power;
use crate::sim::{simulate_power, simulate_power_with_threads, SimConfig, DEFAULT_REPLICATES};

use config::{EndpointArg, RequestConfig};
use sweep::{run_sweep, SweepRow};

pub const DEFAULT_SEED: u64 = 20_220_517;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BandForm {
    Additive,
    Multiplicative,
}

#[derive(Debug, Parser)]
#[command(name = "trialsize", version, about = "Two-arm trial sample size under noncompliance and loss of follow-up")]
pub struct Cli {
    /// Output format [default: table; csv for sweep; json for simulate]
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// JSON request file; flags override its fields
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Master seed for simulate
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Monte Carlo replicates for simulate
    #[arg(long, global = true, default_value_t = DEFAULT_REPLICATES)]
    pub replicates: usize,

    #[command(flatten)]
    pub request: RequestConfig,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Continuous endpoint
    Mean,
    /// Binary endpoint
    Prop,
    /// Time-to-event endpoint
    Tte,
    /// Ordinal endpoint
    Ord,
    /// Achieved power of a given treatment-arm size
    Power {
        #[arg(long)]
        n2: u64,
    },
    /// Size a grid of noncompliance rates and loss of follow-up
    Sweep {
        #[arg(long = "grid-rho1", value_delimiter = ',')]
        grid_rho1: Option<Vec<f64>>,
        #[arg(long = "grid-rho2", value_delimiter = ',')]
        grid_rho2: Option<Vec<f64>>,
        #[arg(long = "grid-r", value_delimiter = ',')]
        grid_r: Option<Vec<f64>>,
        /// Zip the grid axes instead of taking their product
        #[arg(long)]
        paired: bool,
        /// Also report the power of each grid point at this n2
        #[arg(long = "power-at")]
        power_at: Option<u64>,
    },
    /// Monte Carlo power at a given size (default: the analytic size)
    Simulate {
        #[arg(long)]
        n2: Option<u64>,
        /// Worker threads [default: all cores]
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Rewrite a bioequivalence band as a symmetric equivalence test
    BioeqMap {
        #[arg(long, value_enum)]
        form: BandForm,
        #[arg(long, allow_negative_numbers = true)]
        theta1: f64,
        #[arg(long, allow_negative_numbers = true)]
        theta2: f64,
        /// Band ends d1,d2
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        band: Vec<f64>,
    },
}

/// Parse `args`, run, and return the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let mut req = match &cli.config {
        Some(path) => RequestConfig::from_file(path)?,
        None => RequestConfig::default(),
    }
    .overlay(&cli.request);

    let implied = match cli.command {
        Command::Mean => Some(EndpointArg::Mean),
        Command::Prop => Some(EndpointArg::Prop),
        Command::Tte => Some(EndpointArg::Tte),
        Command::Ord => Some(EndpointArg::Ord),
        _ => None,
    };
    if let Some(e) = implied {
        if req.endpoint.is_some_and(|given| given != e) {
            return Err(SizeError::InvalidCombination(format!(
                "--endpoint conflicts with the `{}` subcommand",
                e.name()
            )));
        }
        req.endpoint = Some(e);
    }

    match &cli.command {
        Command::Mean | Command::Prop | Command::Tte | Command::Ord => {
            let valid = req.to_request()?;
            let result = compute_size(&valid)?;
            warn(err, &result.warnings);
            let row = SweepRow {
                rho1: valid.request().adjustment.rho1,
                rho2: valid.request().adjustment.rho2,
                r: valid.request().adjustment.r,
                result,
                power_at_base_n: None,
            };
            render_size(out, cli.format.unwrap_or(Format::Table), &req.normalized()?, &row)
        }
        Command::Power { n2 } => {
            let valid = req.to_request()?;
            warn(err, valid.warnings());
            let est = achieved_power(&valid, *n2)?;
            match cli.format.unwrap_or(Format::Table) {
                Format::Table => writeln!(out, "Power {:.5}", est.power).map_err(io)?,
                Format::Json => {
                    let doc = json!({
                        "request": req.normalized()?,
                        "n2": n2,
                        "power": est.power,
                        "saturated": est.saturated,
                    });
                    writeln!(out, "{}", to_json(&doc)?).map_err(io)?
                }
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    w.write_record(["n2", "power", "saturated"]).map_err(io)?;
                    w.write_record([n2.to_string(), est.power.to_string(), est.saturated.to_string()])
                        .map_err(io)?;
                    out.write_all(&w.into_inner().map_err(io)?).map_err(io)?;
                }
            }
            Ok(())
        }
        Command::Sweep {
            grid_rho1,
            grid_rho2,
            grid_r,
            paired,
            power_at,
        } => {
            let mut grid = req.grid.clone().unwrap_or_default();
            if grid_rho1.is_some() {
                grid.rho1 = grid_rho1.clone();
            }
            if grid_rho2.is_some() {
                grid.rho2 = grid_rho2.clone();
            }
            if grid_r.is_some() {
                grid.r = grid_r.clone();
            }
            grid.paired |= *paired;
            req.grid = Some(grid);
            let rows = run_sweep(&req, *power_at)?;
            let base = req.normalized()?;
            match cli.format.unwrap_or(Format::Csv) {
                Format::Json => {
                    let doc = json!({
                        "request": base,
                        "rows": rows.iter().map(row_json).collect::<Vec<_>>(),
                    });
                    writeln!(out, "{}", to_json(&doc)?).map_err(io)
                }
                _ => write_csv(out, &base, &rows, power_at.is_some()),
            }
        }
        Command::Simulate { n2, threads } => {
            let valid = req.to_request()?;
            warn(err, valid.warnings());
            let n2 = match n2 {
                Some(n) => *n,
                None => compute_size(&valid)?.n2,
            };
            let cfg = SimConfig::new(valid, n2, cli.replicates, cli.seed)?;
            let outcome = match threads {
                Some(t) => simulate_power_with_threads(&cfg, *t)?,
                None => simulate_power(&cfg)?,
            };
            match cli.format.unwrap_or(Format::Json) {
                Format::Table => writeln!(
                    out,
                    "Power {:.5} (MC s.e. {:.5}, {} replicates, seed {})",
                    outcome.power, outcome.mc_standard_error, outcome.replicates, outcome.seed
                )
                .map_err(io),
                _ => writeln!(out, "{}", to_json(&outcome)?).map_err(io),
            }
        }
        Command::BioeqMap {
            form,
            theta1,
            theta2,
            band,
        } => {
            let [d1, d2] = band[..] else {
                return Err(SizeError::invalid("band", "expected two values d1,d2"));
            };
            let band = BioeqBand::new(d1, d2)?;
            let img = match form {
                BandForm::Additive => additive_to_equivalence(*theta1, *theta2, band)?,
                BandForm::Multiplicative => multiplicative_to_equivalence(*theta1, *theta2, band)?,
            };
            match cli.format.unwrap_or(Format::Table) {
                Format::Table => writeln!(
                    out,
                    "theta1 {}\ntheta2 {}\ndelta  {}\nin_alternative {}",
                    img.theta1,
                    img.theta2,
                    img.delta,
                    img.in_alternative()
                )
                .map_err(io),
                _ => {
                    let doc = json!({
                        "theta1": img.theta1,
                        "theta2": img.theta2,
                        "delta": img.delta,
                        "in_alternative": img.in_alternative(),
                    });
                    writeln!(out, "{}", to_json(&doc)?).map_err(io)
                }
            }
        }
    }
}

fn warn(err: &mut dyn Write, warnings: &[String]) {
    for w in warnings {
        let _ = writeln!(err, "warning: {w}");
    }
}

fn io(e: impl std::fmt::Display) -> SizeError {
    SizeError::invalid("output", e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(io)
}

fn result_json(r: &SizeResult) -> serde_json::Value {
    json!({
        "n2": r.n2,
        "n1": r.n1,
        "total": r.total,
        "raw_n2": r.raw_n2,
        "unadjusted_n2": r.unadjusted_n2,
        "warnings": r.warnings,
    })
}

fn row_json(row: &SweepRow) -> serde_json::Value {
    let mut v = json!({ "rho1": row.rho1, "rho2": row.rho2, "r": row.r });
    let obj = v.as_object_mut().expect("object literal");
    if let serde_json::Value::Object(res) = result_json(&row.result) {
        obj.extend(res);
    }
    if let Some(p) = row.power_at_base_n {
        obj.insert("power_at_base_n".into(), json!(p));
    }
    v
}

fn render_size(out: &mut dyn Write, format: Format, req: &RequestConfig, row: &SweepRow) -> Result<()> {
    let r = &row.result;
    match format {
        Format::Table => {
            writeln!(out, "{:<6}{:>6}{:>6}", "", "n_2", "n_1").map_err(io)?;
            writeln!(out, "{:<6}{:>6}{:>6}", "Size", r.n2, r.n1).map_err(io)
        }
        Format::Json => {
            let doc = json!({ "request": req, "result": result_json(r) });
            writeln!(out, "{}", to_json(&doc)?).map_err(io)
        }
        Format::Csv => write_csv(out, req, std::slice::from_ref(row), false),
    }
}

pub const CSV_COLUMNS: [&str; 12] = [
    "endpoint", "design", "test", "alpha", "beta", "rho1", "rho2", "r", "n2", "n1", "total", "raw_n2",
];

fn write_csv(out: &mut dyn Write, base: &RequestConfig, rows: &[SweepRow], with_power: bool) -> Result<()> {
    let label = |v: serde_json::Value| v.as_str().unwrap_or_default().to_string();
    let endpoint = label(json!(base.endpoint));
    let design = label(json!(base.design));
    let test = label(json!(base.test));
    let alpha = base.alpha.unwrap_or_default().to_string();
    let beta = base.beta.unwrap_or_default().to_string();

    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = CSV_COLUMNS.to_vec();
    if with_power {
        header.push("power_at_base_n");
    }
    w.write_record(&header).map_err(io)?;
    for row in rows {
        let r = &row.result;
        let mut rec = vec![
            endpoint.clone(),
            design.clone(),
            test.clone(),
            alpha.clone(),
            beta.clone(),
            row.rho1.to_string(),
            row.rho2.to_string(),
            row.r.to_string(),
            r.n2.to_string(),
            r.n1.to_string(),
            r.total.to_string(),
            r.raw_n2.to_string(),
        ];
        if with_power {
            rec.push(row.power_at_base_n.map(|p| p.to_string()).unwrap_or_default());
        }
        w.write_record(&rec).map_err(io)?;
    }
    out.write_all(&w.into_inner().map_err(io)?).map_err(io)
}
