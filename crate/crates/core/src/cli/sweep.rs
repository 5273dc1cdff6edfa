//! Noncompliance/attrition grids over one base request.

use rayon::prelude::*;

use super::config::{GridConfig, RequestConfig};
use crate::engines::compute_size;
use crate::error::{Result, SizeError};
use crate::model::{AdjustmentProfile, SizeResult, ValidRequest};
use crate::power::achieved_power;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub rho1: f64,
    pub rho2: f64,
    pub r: f64,
    pub result: SizeResult,
    /// Power at the fixed `--power-at` size; `None` below the invertible range.
    pub power_at_base_n: Option<f64>,
}

/// Grid points in lexicographic `(ρ1, ρ2, r)` order, duplicates removed.
pub fn grid_points(grid: &GridConfig, base: AdjustmentProfile) -> Result<Vec<AdjustmentProfile>> {
    let axis = |v: &Option<Vec<f64>>, b: f64, name: &'static str| -> Result<Vec<f64>> {
        match v {
            None => Ok(vec![b]),
            Some(v) if v.is_empty() => Err(SizeError::invalid(name, "empty grid axis")),
            Some(v) => Ok(v.clone()),
        }
    };
    let rho1 = axis(&grid.rho1, base.rho1, "grid-rho1")?;
    let rho2 = axis(&grid.rho2, base.rho2, "grid-rho2")?;
    let r = axis(&grid.r, base.r, "grid-r")?;

    let mut points = Vec::new();
    if grid.paired {
        let len = rho1.len().max(rho2.len()).max(r.len());
        for v in [&rho1, &rho2, &r] {
            if v.len() != 1 && v.len() != len {
                return Err(SizeError::invalid(
                    "grid",
                    "paired axes need equal lengths (or a single value)",
                ));
            }
        }
        let at = |v: &Vec<f64>, i: usize| if v.len() == 1 { v[0] } else { v[i] };
        for i in 0..len {
            points.push(AdjustmentProfile::new(at(&rho1, i), at(&rho2, i), at(&r, i)));
        }
    } else {
        for &a in &rho1 {
            for &b in &rho2 {
                for &c in &r {
                    points.push(AdjustmentProfile::new(a, b, c));
                }
            }
        }
    }
    points.sort_by(|x, y| {
        x.rho1
            .total_cmp(&y.rho1)
            .then(x.rho2.total_cmp(&y.rho2))
            .then(x.r.total_cmp(&y.r))
    });
    points.dedup();
    Ok(points)
}

/// Size every grid point. All points are validated before any is computed.
pub fn run_sweep(base: &RequestConfig, power_at: Option<u64>) -> Result<Vec<SweepRow>> {
    let base_req = base.to_request()?;
    let grid = base.grid.clone().unwrap_or_default();
    let points = grid_points(&grid, base_req.request().adjustment)?;
    let requests: Vec<ValidRequest> = points
        .iter()
        .map(|p| base_req.with_adjustment(*p))
        .collect::<Result<_>>()?;

    requests
        .par_iter()
        .zip(points.par_iter())
        .map(|(req, p)| {
            let result = compute_size(req)?;
            let power_at_base_n = match power_at {
                None => None,
                Some(n) => match achieved_power(req, n) {
                    Ok(est) => Some(est.power),
                    Err(SizeError::PowerOutOfRange(_)) => None,
                    Err(e) => return Err(e),
                },
            };
            Ok(SweepRow {
                rho1: p.rho1,
                rho2: p.rho2,
                r: p.r,
                result,
                power_at_base_n,
            })
        })
        .collect()
}
