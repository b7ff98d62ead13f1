//! The limiting survival function `H(y) = P(M > y)`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::FromPrimitive;

use super::ext::ExtReal;
use super::profile::{purely_periodic_value, LimitProfile};
use super::TheoryError;
use crate::quadratic::Quadratic;

/// What happens past the last stored breakpoint.
#[derive(Clone, Debug, PartialEq)]
pub enum Tail {
    /// The last plateau extends to infinity.
    Final,
    /// `γ_{j+L} = γ_j · scale` and `v_{j+L} = v_j · decay`.
    SelfSimilar {
        period: usize,
        scale: ExtReal,
        decay: ExtReal,
    },
    /// Unknown beyond the last breakpoint.
    Truncated,
}

/// Right-continuous, non-increasing step function equal to 1 below
/// `breakpoints[0] = 1` and to `values[j]` on `[breakpoints[j], breakpoints[j+1])`.
///
/// `breakpoints` has one more entry than `values`; the last one is `∞` for a
/// `Final` tail. Equal consecutive breakpoints give empty plateaus, which
/// evaluation skips.
#[derive(Clone, Debug, PartialEq)]
pub struct StepSurvival {
    pub breakpoints: Vec<ExtReal>,
    pub values: Vec<ExtReal>,
    pub tail: Tail,
}

fn ge(a: &ExtReal, b: &ExtReal) -> bool {
    // Unresolvable numeric ties are read at face value.
    match a.partial_cmp_ext(b) {
        Some(o) => o != Ordering::Less,
        None => a.to_f64() >= b.to_f64(),
    }
}

impl StepSurvival {
    /// The indicator of `y < 1`.
    pub fn indicator() -> Self {
        Self {
            breakpoints: vec![ExtReal::one(), ExtReal::Infinite],
            values: vec![ExtReal::zero()],
            tail: Tail::Final,
        }
    }

    pub fn is_indicator(&self) -> bool {
        if self.tail != Tail::Final {
            return false;
        }
        let live: Vec<usize> = (0..self.values.len())
            .filter(|&j| self.breakpoints[j + 1].partial_cmp_ext(&self.breakpoints[j]) == Some(Ordering::Greater))
            .collect();
        matches!(live.as_slice(), [j]
            if self.values[*j].is_zero()
                && self.breakpoints[*j].partial_cmp_ext(&ExtReal::one()) == Some(Ordering::Equal))
    }

    /// `γ_j`, expanding a self-similar tail; `None` past a truncated or final end.
    pub fn breakpoint(&self, j: usize) -> Option<ExtReal> {
        if j < self.breakpoints.len() {
            return Some(self.breakpoints[j].clone());
        }
        match &self.tail {
            Tail::SelfSimilar { period, scale, .. } => Some(self.breakpoint(j - period)?.mul(scale)),
            _ => None,
        }
    }

    /// `v_j`, expanding a self-similar tail.
    pub fn value(&self, j: usize) -> Option<ExtReal> {
        if j < self.values.len() {
            return Some(self.values[j].clone());
        }
        match &self.tail {
            Tail::SelfSimilar { period, decay, .. } => Some(self.value(j - period)?.mul(decay)),
            _ => None,
        }
    }

    /// `H(y)` at an exact point.
    pub fn eval_ext(&self, y: &ExtReal) -> Result<ExtReal, TheoryError> {
        if !ge(y, &self.breakpoints[0]) {
            return Ok(ExtReal::one());
        }
        let n = self.values.len();
        let mut y = y.clone();
        let mut factor = ExtReal::one();
        while ge(&y, &self.breakpoints[n]) {
            match &self.tail {
                Tail::Final => unreachable!("final tail ends at infinity"),
                Tail::Truncated => {
                    return Err(TheoryError::ProfileIncomplete(format!(
                        "y = {} lies beyond the last known breakpoint {}",
                        y, self.breakpoints[n]
                    )))
                }
                Tail::SelfSimilar { scale, decay, .. } => {
                    y = y.div(scale);
                    factor = factor.mul(decay);
                }
            }
        }
        let j = (0..n)
            .rev()
            .find(|&j| ge(&y, &self.breakpoints[j]))
            .expect("y is at least the first breakpoint");
        Ok(self.values[j].mul(&factor))
    }

    pub fn eval(&self, y: f64) -> Result<ExtReal, TheoryError> {
        if y.is_nan() {
            return Err(TheoryError::OutOfScope("y is NaN".into()));
        }
        if y.is_infinite() {
            return Ok(ExtReal::zero());
        }
        let r = BigRational::from_f64(y).expect("finite");
        self.eval_ext(&ExtReal::rational(r))
    }

    pub fn eval_f64(&self, y: f64) -> Result<f64, TheoryError> {
        Ok(self.eval(y)?.to_f64())
    }

    /// The distinct finite breakpoints at or below `upto`.
    pub fn breakpoints_upto(&self, upto: f64) -> Vec<ExtReal> {
        let mut out: Vec<ExtReal> = Vec::new();
        let mut j = 0;
        while let Some(g) = self.breakpoint(j) {
            if g.is_infinite() || g.to_f64() > upto {
                break;
            }
            if out.last().map_or(true, |l| l.partial_cmp_ext(&g) != Some(Ordering::Equal)) {
                out.push(g);
            }
            j += 1;
        }
        out
    }
}

/// `H` from a profile: 1 below 1, then `v_j = (δ_j + δ_{j+1})/(γ_1 + δ_1)` on
/// `[γ_j, γ_{j+1})`.
pub fn limiting_survival(profile: &LimitProfile) -> Result<StepSurvival, TheoryError> {
    let gamma1 = profile
        .gamma(1)
        .ok_or_else(|| TheoryError::ProfileIncomplete("γ_1 is missing".into()))?;
    if gamma1.is_infinite() {
        return Ok(StepSurvival::indicator());
    }
    let delta = |j: usize| {
        profile
            .delta(j)
            .ok_or_else(|| TheoryError::ProfileIncomplete(format!("δ_{j} is missing")))
    };
    let norm = gamma1.add(&delta(1)?);
    let plateau = |j: usize| -> Result<ExtReal, TheoryError> { Ok(delta(j)?.add(&delta(j + 1)?).div(&norm)) };

    if let Some(n) = profile.first_infinite() {
        let values: Vec<ExtReal> = (0..n).map(plateau).collect::<Result<_, _>>()?;
        let last = values.last().expect("n ≥ 2 here");
        if last.is_exact() && !last.is_zero() {
            return Err(TheoryError::InconsistentProfile(format!(
                "γ_{n} = ∞ but the final plateau v_{} = {} is not zero",
                n - 1,
                last
            )));
        }
        let breakpoints = (0..=n).map(|j| profile.gamma[j].clone()).collect();
        return Ok(StepSurvival {
            breakpoints,
            values,
            tail: Tail::Final,
        });
    }

    let n = profile.jmax;
    let values: Vec<ExtReal> = (0..n).map(plateau).collect::<Result<_, _>>()?;
    let breakpoints: Vec<ExtReal> = (0..=n).map(|j| profile.gamma[j].clone()).collect();
    let tail = match profile.period {
        Some(l) if l < n => Tail::SelfSimilar {
            period: l,
            scale: profile.gamma[l].clone(),
            decay: profile.delta[l].clone(),
        },
        _ => Tail::Truncated,
    };
    Ok(StepSurvival {
        breakpoints,
        values,
        tail,
    })
}

/// `α = (√(c²+4) − c)/2` for `[c, c, c, ...]`.
pub fn constant_type_alpha(c: u64) -> Quadratic {
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    Quadratic::new(
        BigRational::from_integer(BigInt::from(c)) * -&half,
        half,
        &BigInt::from(c * c + 4),
    )
}

/// Closed form for `[c, c, c, ...]`: breakpoints `α^{-j}` and plateaus
/// `α^j (α + α²)/(1 + α²)`.
pub fn constant_type_survival(c: u64) -> Result<StepSurvival, TheoryError> {
    if c == 0 {
        return Err(TheoryError::UnsupportedSpec("c must be at least 1".into()));
    }
    let alpha = ExtReal::Exact(constant_type_alpha(c));
    debug_assert_eq!(alpha, ExtReal::Exact(purely_periodic_value(&[c])));
    let a2 = alpha.mul(&alpha);
    let v0 = alpha.add(&a2).div(&ExtReal::one().add(&a2));
    let n = 2;
    Ok(StepSurvival {
        breakpoints: (0..=n).map(|j| alpha.pow(-(j as i32))).collect(),
        values: (0..n).map(|j| v0.mul(&alpha.pow(j as i32))).collect(),
        tail: Tail::SelfSimilar {
            period: 1,
            scale: alpha.recip(),
            decay: alpha,
        },
    })
}
