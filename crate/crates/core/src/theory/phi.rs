//! `g(y)`, the piecewise-linear entry-time law `φ_y`, and the fixed-point
//! relation `φ_y(g(y)) = g(y)`.

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::FromPrimitive;
use serde::Serialize;

use super::ext::ExtReal;
use super::profile::{LimitProfile, Provenance};
use super::TheoryError;

/// Tolerance on `|φ_y(g(y)) − g(y)|` for analytic profiles.
pub const FIXED_POINT_TOL: f64 = 1e-10;

/// Continuous CDF interpolating its knots linearly, 0 before the first and 1
/// after the last.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinearCDF {
    pub knots: Vec<(ExtReal, ExtReal)>,
}

impl PiecewiseLinearCDF {
    pub fn eval(&self, x: &ExtReal) -> ExtReal {
        let le = |a: &ExtReal, b: &ExtReal| {
            a.partial_cmp_ext(b)
                .map_or(a.to_f64() <= b.to_f64(), |o| o != Ordering::Greater)
        };
        let (x0, _) = &self.knots[0];
        if le(x, x0) {
            return self.knots[0].1.clone();
        }
        for w in self.knots.windows(2) {
            let ((xa, fa), (xb, fb)) = (&w[0], &w[1]);
            if le(x, xb) {
                let span = xb.sub(xa);
                if span.is_zero() {
                    return fb.clone();
                }
                let t = x.sub(xa).div(&span);
                return fa.add(&t.mul(&fb.sub(fa)));
            }
        }
        self.knots.last().expect("knots").1.clone()
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        match BigRational::from_f64(x) {
            Some(r) => self.eval(&ExtReal::rational(r)).to_f64(),
            None => f64::NAN,
        }
    }
}

/// Plateau index `j` with `γ_j < y < γ_{j+1}`, rejecting breakpoints, `y ≤ 1`
/// and infinite right ends.
fn plateau_index(profile: &LimitProfile, y: f64) -> Result<usize, TheoryError> {
    let mut j = 0;
    loop {
        let g = profile
            .gamma(j)
            .ok_or_else(|| TheoryError::ProfileIncomplete(format!("γ_{j} is unknown")))?;
        match g.cmp_f64(y) {
            Some(Ordering::Equal) => return Err(TheoryError::BreakpointHit { y, j }),
            Some(Ordering::Greater) if j == 0 => {
                return Err(TheoryError::OutOfScope(format!("y = {y} is below γ_0 = 1")))
            }
            Some(Ordering::Greater) => return Ok(j - 1),
            Some(Ordering::Less) => {}
            None => return Err(TheoryError::BreakpointHit { y, j }),
        }
        if g.is_infinite() {
            unreachable!("an infinite γ compares greater than any finite y");
        }
        j += 1;
        if j > profile.jmax + 100_000 {
            return Err(TheoryError::ProfileIncomplete(format!("no plateau found for y = {y}")));
        }
    }
}

/// `g(y) = (δ_j + δ_{j+1})/(γ_1 + δ_1)` for `y ∈ (γ_j, γ_{j+1})` with `γ_{j+1}` finite.
pub fn g_value(profile: &LimitProfile, y: f64) -> Result<ExtReal, TheoryError> {
    let j = plateau_index(profile, y)?;
    let upper = profile.gamma(j + 1).expect("found by plateau_index");
    if upper.is_infinite() {
        return Err(TheoryError::OutOfScope(format!(
            "y = {y} lies on the last plateau [γ_{j}, ∞), where g need not exist"
        )));
    }
    let d = |i: usize| {
        profile
            .delta(i)
            .ok_or_else(|| TheoryError::ProfileIncomplete(format!("δ_{i} is unknown")))
    };
    let norm = profile.gamma(1).expect("γ_1").add(&d(1)?);
    Ok(d(j)?.add(&d(j + 1)?).div(&norm))
}

/// The three-knot CDF `(0,0)`, `(x₁, x₁)`, `(x₂, 1)` with
/// `x₁ = (1+θ)ν/(1+θν)` and `x₂ = (1+θ)/(1+θν)`, where `ν = ν_{j+1}`, `θ = θ_{j+1}`.
pub fn phi_y(profile: &LimitProfile, j: usize) -> Result<PiecewiseLinearCDF, TheoryError> {
    let nu = profile
        .nu(j + 1)
        .ok_or_else(|| TheoryError::ProfileIncomplete(format!("ν_{} is unknown", j + 1)))?;
    let theta = profile
        .theta(j + 1)
        .ok_or_else(|| TheoryError::ProfileIncomplete(format!("θ_{} is unknown", j + 1)))?;
    if nu.is_infinite() || nu.is_zero() || theta.is_infinite() {
        return Err(TheoryError::ProfileIncomplete(format!(
            "φ needs finite positive ν_{} and finite θ_{}",
            j + 1,
            j + 1
        )));
    }
    let one = ExtReal::one();
    let one_theta = one.add(&theta);
    let den = one.add(&theta.mul(&nu));
    let x1 = one_theta.mul(&nu).div(&den);
    let x2 = one_theta.div(&den);
    Ok(PiecewiseLinearCDF {
        knots: vec![(ExtReal::zero(), ExtReal::zero()), (x1.clone(), x1), (x2, one)],
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedPointReport {
    pub y: f64,
    pub j: usize,
    pub g: f64,
    pub phi_of_g: f64,
    pub first_knot: f64,
    pub difference: f64,
    pub bound: f64,
    /// `φ_y(g(y)) = g(y)` holds exactly in the field of the profile.
    pub exact: bool,
    /// `g(y) ≤ x₁`.
    pub below_first_knot: bool,
    pub passed: bool,
}

/// Checks `φ_y(g(y)) = g(y)` and `g(y) ≤ x₁` at `y`.
pub fn fixed_point_check(profile: &LimitProfile, y: f64) -> Result<FixedPointReport, TheoryError> {
    let j = plateau_index(profile, y)?;
    let g = g_value(profile, y)?;
    let phi = phi_y(profile, j)?;
    let fg = phi.eval(&g);
    let x1 = phi.knots[1].0.clone();
    let diff = fg.sub(&g);
    let exact = diff.is_exact() && diff.is_zero();
    let bound = match profile.provenance {
        Provenance::Analytic => FIXED_POINT_TOL,
        Provenance::Numeric => FIXED_POINT_TOL + g.err() + fg.err(),
    };
    let difference = diff.to_f64().abs();
    let below_first_knot = match g.partial_cmp_ext(&x1) {
        Some(o) => o != Ordering::Greater,
        None => g.to_f64() <= x1.to_f64() + g.err() + x1.err(),
    };
    Ok(FixedPointReport {
        y,
        j,
        g: g.to_f64(),
        phi_of_g: fg.to_f64(),
        first_knot: x1.to_f64(),
        difference,
        bound,
        exact,
        below_first_knot,
        passed: difference <= bound && below_first_knot,
    })
}

/// `lim q_k η_k = 1/(γ_1 + δ_1)`, zero when `γ_1 = ∞`.
pub fn qk_eta_limit(profile: &LimitProfile) -> Result<ExtReal, TheoryError> {
    let g1 = profile
        .gamma(1)
        .ok_or_else(|| TheoryError::ProfileIncomplete("γ_1 is unknown".into()))?;
    if g1.is_infinite() {
        return Ok(ExtReal::zero());
    }
    let d1 = profile
        .delta(1)
        .ok_or_else(|| TheoryError::ProfileIncomplete("δ_1 is unknown".into()))?;
    Ok(g1.add(&d1).recip())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::CfSpec;
    use crate::theory::profile::profile_analytic;
    use crate::theory::survival::limiting_survival;

    fn golden() -> LimitProfile {
        profile_analytic(&CfSpec::constant(1), 6).unwrap()
    }

    #[test]
    fn g_examples() {
        let p = golden();
        assert!((g_value(&p, 1.2).unwrap().to_f64() - 0.7236067977499790).abs() < 1e-12);
        assert!((g_value(&p, 2.0).unwrap().to_f64() - 0.4472135954999579).abs() < 1e-12);
        let b3 = profile_analytic(&CfSpec::block(3), 3).unwrap();
        assert_eq!(
            g_value(&b3, 1.5).unwrap(),
            ExtReal::rational(BigRational::new(1.into(), 2.into()))
        );
        assert!(matches!(g_value(&b3, 1.0), Err(TheoryError::BreakpointHit { .. })));
        assert!(matches!(g_value(&b3, 2.5), Err(TheoryError::OutOfScope(_))));
        assert!(matches!(g_value(&b3, 0.5), Err(TheoryError::OutOfScope(_))));
    }

    #[test]
    fn g_matches_plateaus() {
        let p = golden();
        let h = limiting_survival(&p).unwrap();
        for y in [1.1, 1.7, 2.5, 4.0, 6.0, 10.0] {
            assert_eq!(g_value(&p, y).unwrap(), h.eval(y).unwrap(), "y={y}");
        }
    }

    #[test]
    fn golden_knots() {
        let phi = phi_y(&golden(), 0).unwrap();
        assert!((phi.knots[1].0.to_f64() - 0.7236067977).abs() < 1e-9);
        assert_eq!(phi.knots[1].0, phi.knots[1].1);
        assert!((phi.knots[2].0.to_f64() - 1.1708203932).abs() < 1e-9);
        assert_eq!(phi.eval_f64(0.0), 0.0);
        assert_eq!(phi.eval(&phi.knots[2].0), ExtReal::one());
        assert_eq!(phi.eval_f64(5.0), 1.0);
    }

    #[test]
    fn fixed_points() {
        let r = fixed_point_check(&golden(), 1.3).unwrap();
        assert!(r.passed && r.exact);
        assert!((r.g - 0.7236067977).abs() < 1e-9);
        let c2 = profile_analytic(&CfSpec::constant(2), 4).unwrap();
        let r = fixed_point_check(&c2, 1.5).unwrap();
        assert!(r.passed && r.exact);
        assert_eq!(r.g, 0.5);
        let b3 = profile_analytic(&CfSpec::block(3), 3).unwrap();
        let r = fixed_point_check(&b3, 1.5).unwrap();
        assert!(r.passed && r.exact);
        assert_eq!(r.phi_of_g, 0.5);
    }

    #[test]
    fn qk_eta_limits() {
        assert!((qk_eta_limit(&golden()).unwrap().to_f64() - 0.4472135955).abs() < 1e-9);
        let c2 = profile_analytic(&CfSpec::constant(2), 2).unwrap();
        assert!((qk_eta_limit(&c2).unwrap().to_f64() - 0.3535533906).abs() < 1e-9);
        let aff = profile_analytic(&CfSpec::affine(1, 1), 2).unwrap();
        assert!(qk_eta_limit(&aff).unwrap().is_zero());
    }
}
