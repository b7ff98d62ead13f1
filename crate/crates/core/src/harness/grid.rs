use std::cmp::Ordering;
use std::str::FromStr;

use super::HarnessError;
use crate::theory::{ExtReal, LimitProfile, StepSurvival};

pub const DEFAULT_GRID_POINTS: usize = 64;
/// Relative distance by which default grid points are pushed off breakpoints.
pub const NUDGE: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub enum GridSpec {
    /// 64 log-spaced points over `[0.5, γ_4]` (or `[0.5, 8]`), nudged off breakpoints.
    Default,
    Log { lo: f64, hi: f64, n: usize },
    List(Vec<f64>),
}

impl FromStr for GridSpec {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |msg: &str| HarnessError::Config(format!("grid '{s}': {msg}"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad(&format!("'{t}' is not a number")));
        let s = s.trim();
        if s == "default" {
            return Ok(GridSpec::Default);
        }
        if let Some(rest) = s.strip_prefix("log:") {
            let parts: Vec<&str> = rest.split(':').collect();
            let [lo, hi, n] = parts.as_slice() else {
                return Err(bad("expected log:lo:hi:n"));
            };
            let (lo, hi) = (num(lo)?, num(hi)?);
            let n = n.trim().parse::<usize>().map_err(|_| bad("point count must be an integer"))?;
            if !(lo > 0.0 && hi > lo && lo.is_finite() && hi.is_finite()) || n < 2 {
                return Err(bad("need 0 < lo < hi and at least two points"));
            }
            return Ok(GridSpec::Log { lo, hi, n });
        }
        if let Some(rest) = s.strip_prefix("list:") {
            let ys = rest.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
            if ys.is_empty() {
                return Err(bad("empty list"));
            }
            return Ok(GridSpec::List(ys));
        }
        Err(bad("expected 'default', 'log:lo:hi:n' or 'list:y1,y2,...'"))
    }
}

fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

fn hits(g: &ExtReal, y: f64) -> bool {
    !matches!(g.cmp_f64(y), Some(Ordering::Less) | Some(Ordering::Greater))
}

/// The default grid: log-spaced over `[0.5, γ_4]` (or `[0.5, 8]` when `γ_4`
/// is infinite), every point within `NUDGE` relative distance of a
/// breakpoint moved just to its right.
pub fn default_grid(profile: &LimitProfile, survival: &StepSurvival) -> Vec<f64> {
    let top = profile
        .gamma(4)
        .filter(|g| g.is_finite())
        .map(|g| g.to_f64())
        .filter(|&g| g > 1.0)
        .unwrap_or(8.0);
    let breaks = survival.breakpoints_upto(top * (1.0 + 2.0 * NUDGE));
    let mut ys = log_spaced(0.5, top, DEFAULT_GRID_POINTS);
    for y in ys.iter_mut() {
        for g in &breaks {
            let gv = g.to_f64();
            if (*y - gv).abs() <= NUDGE * gv || hits(g, *y) {
                *y = gv * (1.0 + NUDGE);
            }
        }
    }
    ys.dedup();
    ys
}

impl GridSpec {
    /// The grid for a run. Explicit grids must be increasing, positive and
    /// free of breakpoints of `H`.
    pub fn resolve(&self, profile: &LimitProfile, survival: &StepSurvival) -> Result<Vec<f64>, HarnessError> {
        let ys = match self {
            GridSpec::Default => return Ok(default_grid(profile, survival)),
            GridSpec::Log { lo, hi, n } => log_spaced(*lo, *hi, *n),
            GridSpec::List(ys) => ys.clone(),
        };
        if ys.iter().any(|y| !(y.is_finite() && *y > 0.0)) {
            return Err(HarnessError::Config("grid values must be positive and finite".into()));
        }
        if ys.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HarnessError::Config("grid must be strictly increasing".into()));
        }
        let top = ys[ys.len() - 1];
        for g in survival.breakpoints_upto(top * 2.0) {
            if let Some(y) = ys.iter().find(|&&y| hits(&g, y)) {
                return Err(HarnessError::Config(format!(
                    "grid point {y} is a breakpoint of the limit law"
                )));
            }
        }
        Ok(ys)
    }
}
