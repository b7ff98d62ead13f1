//! Entry-time distributions: the closed form, two arc-union oracles built
//! from the definition, and the finite-k survival function built on them.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive};

use super::circle::{b_arc, ArcSet};
use super::SimError;
use crate::cf::{AlphaForm, CfError, ConvergentTable, RatInterval};

/// Environment variable overriding [`DEFAULT_ORACLE_BUDGET`].
pub const ORACLE_BUDGET_ENV: &str = "ROTATION_EVL_ORACLE_BUDGET";

/// Largest number of arcs the oracles will place.
pub const DEFAULT_ORACLE_BUDGET: u64 = 10_000_000;

pub fn oracle_budget() -> u64 {
    std::env::var(ORACLE_BUDGET_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_ORACLE_BUDGET)
}

/// `μ(τ_{B_k} ≤ s)` as an exact form:
/// `1` for `s ≥ q_{k+1}`, `q_k η_{k+1} + η_k ⌊s⌋` on `[q_k, q_{k+1})`, and
/// `(η_k + η_{k+1}) ⌊s⌋` on `[0, q_k)`.
pub fn entry_cdf_form(table: &ConvergentTable, k: usize, s: &BigRational) -> Result<AlphaForm, SimError> {
    if s.is_negative() {
        return Err(SimError::InvalidInput(format!("entry time bound {s} is negative")));
    }
    let qk = BigRational::from_integer(table.q(k)?.clone());
    let qk1 = BigRational::from_integer(table.q(k + 1)?.clone());
    let eta_k = table.eta_form(k)?;
    let eta_k1 = table.eta_form(k + 1)?;
    let fl = s.floor().to_integer();
    Ok(if s >= &qk1 {
        AlphaForm::from_integer(1)
    } else if s >= &qk {
        &eta_k1.scale_int(table.q(k)?) + &eta_k.scale_int(&fl)
    } else {
        (&eta_k + &eta_k1).scale_int(&fl)
    })
}

pub fn entry_cdf_exact(table: &ConvergentTable, k: usize, s: &BigRational) -> Result<RatInterval, SimError> {
    Ok(entry_cdf_form(table, k, s)?.enclosure(table.alpha()))
}

/// Measure of `⋃_{j=1..n} T^{-j} B_k`, by reducing each translate mod 1,
/// sorting, merging and summing lengths.
pub fn arcset_entry_oracle(table: &ConvergentTable, k: usize, n: u64) -> Result<RatInterval, SimError> {
    Ok(arcset_entry_form(table, k, n)?.enclosure(table.alpha()))
}

/// [`arcset_entry_oracle`] as an exact form.
pub fn arcset_entry_form(table: &ConvergentTable, k: usize, n: u64) -> Result<AlphaForm, SimError> {
    let budget = oracle_budget();
    if n > budget {
        return Err(SimError::BudgetExceeded { needed: n as u128, budget });
    }
    let b = b_arc(table, k)?;
    let arcs: Vec<_> = (1..=n)
        .map(|j| b.translate(&AlphaForm::alpha().scale_int(&-BigInt::from(j))))
        .collect();
    Ok(ArcSet::from_arcs(table, &arcs)?.measure_form())
}

/// `a + b·α` with machine-integer coefficients.
type Lattice = (i128, i128);

fn to_form(v: Lattice) -> AlphaForm {
    AlphaForm::integer_affine(BigInt::from(v.0), BigInt::from(v.1))
}

/// Incremental arc-union oracle for every `s` at once.
///
/// All translates of `B_k` have the same length `ℓ`, so the union of `s` of
/// them has measure `Σ min(g, ℓ)` over the cyclic gaps `g` between their left
/// endpoints. Endpoints are kept in a map keyed by a 128-bit fixed-point image
/// of their position; every decision the keys cannot settle with certainty
/// falls back to an exact comparison against convergents.
pub struct EntrySweep {
    table: ConvergentTable,
    alpha_fix: u128,
    alpha_f64: f64,
    /// Error of `alpha_fix` against `α·2^128`, in units of the last place.
    alpha_err: u128,
    start: Lattice,
    len: Lattice,
    len_key: Option<u128>,
    points: BTreeMap<u128, (i64, i64)>,
    total: Lattice,
    placed: u64,
}

impl EntrySweep {
    pub fn new(table: &ConvergentTable, k: usize) -> Result<Self, SimError> {
        let table = table.refine_until(|t| t.qs()[t.precision()].bits() >= 200)?;
        let top = table.precision();
        let two128: BigInt = BigInt::one() << 128;
        let alpha_fix_big: BigInt = (&table.ps()[top] * &two128) / &table.qs()[top];
        let alpha_fix = alpha_fix_big.to_u128().ok_or(CfError::PrecisionExhausted)?;
        let width = table.alpha().width() * BigRational::from_integer(two128.clone());
        let alpha_err = width.ceil().to_integer().to_u128().ok_or(CfError::PrecisionExhausted)? + 2;
        let arc = b_arc(&table, k)?;
        let lat = |f: &AlphaForm| -> Result<Lattice, SimError> {
            let a = f.rational.to_integer().to_i128();
            let b = f.coeff.to_i128();
            match (f.rational.is_integer(), a, b) {
                (true, Some(a), Some(b)) => Ok((a, b)),
                _ => Err(SimError::InvalidInput("arc endpoints exceed machine range".into())),
            }
        };
        let start = lat(&arc.left)?;
        let len = lat(&arc.length())?;
        let len_key = if len == (1, 0) {
            None
        } else {
            let key = (BigInt::from(len.0) * &two128 + BigInt::from(len.1) * &alpha_fix_big).to_u128();
            Some(key.ok_or(CfError::PrecisionExhausted)?)
        };
        Ok(Self {
            alpha_f64: table.alpha_f64(),
            table,
            alpha_fix,
            alpha_err,
            start,
            len,
            len_key,
            points: BTreeMap::new(),
            total: (0, 0),
            placed: 0,
        })
    }

    /// Measure of the union of the translates placed so far.
    pub fn measure(&self) -> AlphaForm {
        to_form(self.total)
    }

    pub fn placed(&self) -> u64 {
        self.placed
    }

    fn sign(&self, v: Lattice) -> Result<Ordering, SimError> {
        Ok(self.table.sign_int_affine(&BigInt::from(v.0), &BigInt::from(v.1))?)
    }

    fn key_err(&self, b: i64) -> u128 {
        (b.unsigned_abs() as u128).saturating_mul(self.alpha_err) + 1
    }

    /// `floor(b α)`.
    fn floor_b_alpha(&self, b: i64, key: u128) -> Result<i128, SimError> {
        if b == 0 {
            return Ok(0);
        }
        let err = self.key_err(b);
        let frac = key as f64 / 2f64.powi(128);
        let mut m = (b as f64 * self.alpha_f64 - frac).round() as i128;
        if key < err || key > u128::MAX - err {
            // Too close to an integer for the fixed-point image; settle exactly.
            while self.sign((-m, b as i128))? == Ordering::Less {
                m -= 1;
            }
            while self.sign((-m - 1, b as i128))? != Ordering::Less {
                m += 1;
            }
            // The key must sit on the same side of 0 as the true fractional part.
            let frac_small = self.sign((-2 * m - 1, 2 * b as i128))? == Ordering::Less;
            if frac_small != (key < u128::MAX / 2) {
                return Err(SimError::Cf(CfError::PrecisionExhausted));
            }
        }
        Ok(m)
    }

    /// Exact `min(gap, ℓ)` for the gap between two stored points.
    fn clipped_gap(&self, from: (u128, (i64, i64)), to: (u128, (i64, i64))) -> Result<Lattice, SimError> {
        if from.0 == to.0 {
            // A lone point: the gap is the whole circle.
            return Ok(self.len);
        }
        let wraps = to.0 < from.0;
        let gap = (
            to.1 .0 as i128 - from.1 .0 as i128 + wraps as i128,
            to.1 .1 as i128 - from.1 .1 as i128,
        );
        let Some(len_key) = self.len_key else {
            return Ok(gap);
        };
        let gap_key = to.0.wrapping_sub(from.0);
        let err = self.key_err(from.1 .1) + self.key_err(to.1 .1) + self.key_err(self.len.1 as i64);
        let shorter = if gap_key.saturating_add(err) < len_key {
            true
        } else if gap_key > len_key.saturating_add(err) {
            false
        } else {
            self.sign((gap.0 - self.len.0, gap.1 - self.len.1))? == Ordering::Less
        };
        Ok(if shorter { gap } else { self.len })
    }

    fn check_order(&self, lo: (u128, (i64, i64)), hi: (u128, (i64, i64))) -> Result<(), SimError> {
        let err = self.key_err(lo.1 .1) + self.key_err(hi.1 .1);
        if hi.0 - lo.0 <= err {
            let diff = (hi.1 .0 as i128 - lo.1 .0 as i128, hi.1 .1 as i128 - lo.1 .1 as i128);
            if self.sign(diff)? != Ordering::Greater {
                return Err(SimError::Cf(CfError::PrecisionExhausted));
            }
        }
        Ok(())
    }

    /// Places the next translate `T^{-(s+1)} B_k` and returns the new measure.
    pub fn step(&mut self) -> Result<AlphaForm, SimError> {
        let j = self.placed as i128 + 1;
        let b = i64::try_from(self.start.1 - j)
            .map_err(|_| SimError::InvalidInput("translate index exceeds machine range".into()))?;
        let key = (b as i128 as u128).wrapping_mul(self.alpha_fix);
        // start − jα = start.0 + bα with start.0 an integer, so its
        // fractional part is bα − floor(bα).
        let a = -self.floor_b_alpha(b, key)?;
        let a = i64::try_from(a).map_err(|_| SimError::InvalidInput("translate exceeds machine range".into()))?;
        self.insert((key, (a, b)))?;
        self.placed += 1;
        Ok(self.measure())
    }

    fn insert(&mut self, p: (u128, (i64, i64))) -> Result<(), SimError> {
        if self.points.is_empty() {
            self.points.insert(p.0, p.1);
            self.total = self.len;
            return Ok(());
        }
        if self.points.contains_key(&p.0) {
            return Err(SimError::Cf(CfError::PrecisionExhausted));
        }
        let pred = self
            .points
            .range(..p.0)
            .next_back()
            .or_else(|| self.points.iter().next_back())
            .map(|(k, v)| (*k, *v))
            .expect("non-empty");
        let succ = self
            .points
            .range(p.0..)
            .next()
            .or_else(|| self.points.iter().next())
            .map(|(k, v)| (*k, *v))
            .expect("non-empty");
        if pred.0 < p.0 {
            self.check_order(pred, p)?;
        }
        if p.0 < succ.0 {
            self.check_order(p, succ)?;
        }
        let old = self.clipped_gap(pred, succ)?;
        let g1 = self.clipped_gap(pred, p)?;
        let g2 = self.clipped_gap(p, succ)?;
        self.total.0 += g1.0 + g2.0 - old.0;
        self.total.1 += g1.1 + g2.1 - old.1;
        self.points.insert(p.0, p.1);
        Ok(())
    }
}

/// Measures of `⋃_{j=1..s} T^{-j} B_k` for every `s = 0..=n_max`.
pub fn arcset_entry_sweep(table: &ConvergentTable, k: usize, n_max: u64) -> Result<Vec<AlphaForm>, SimError> {
    let budget = oracle_budget();
    if n_max > budget {
        return Err(SimError::BudgetExceeded {
            needed: n_max as u128,
            budget,
        });
    }
    let mut sweep = EntrySweep::new(table, k)?;
    let mut out = Vec::with_capacity(n_max as usize + 1);
    out.push(AlphaForm::zero());
    for _ in 0..n_max {
        out.push(sweep.step()?);
    }
    Ok(out)
}

/// `H_{q_k}(y) = μ(M_{q_k} > q_k y)` as an exact form.
///
/// With `t = q_k y`: `1` when `t < 1`; otherwise `μ(τ_{B_m} ≤ q_k)` for the
/// `m` with `q_m < t < q_{m+1}`.
pub fn finite_k_survival_form(table: &ConvergentTable, k: usize, y: &BigRational) -> Result<AlphaForm, SimError> {
    let qk = table.q(k)?.clone();
    let t = y * BigRational::from_integer(qk.clone());
    let one = BigRational::one();
    if t < one {
        return Ok(AlphaForm::from_integer(1));
    }
    let mut m = 0;
    loop {
        if m + 1 > table.depth() {
            return Err(SimError::Cf(CfError::DepthExceeded {
                requested: m + 2,
                available: table.depth(),
            }));
        }
        let next = BigRational::from_integer(table.q(m + 1)?.clone());
        if next == t || (m == 0 && t == one) {
            return Err(SimError::BreakpointHit {
                y: y.to_f64().unwrap_or(f64::NAN),
                m: if next == t { m + 1 } else { 0 },
            });
        }
        if next > t {
            break;
        }
        m += 1;
    }
    entry_cdf_form(table, m, &BigRational::from_integer(qk))
}

pub fn finite_k_survival(table: &ConvergentTable, k: usize, y: f64) -> Result<RatInterval, SimError> {
    let y = BigRational::from_f64(y).ok_or_else(|| SimError::InvalidInput(format!("y = {y} is not finite")))?;
    Ok(finite_k_survival_form(table, k, &y)?.enclosure(table.alpha()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::{build_table, CfSpec};

    fn golden(k: usize) -> ConvergentTable {
        ConvergentTable::with_precision(&CfSpec::constant(1), k, 4 * k + 40).unwrap()
    }

    fn int(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn golden_entry_values() {
        let t = golden(10);
        let e1 = entry_cdf_exact(&t, 2, &int(1)).unwrap();
        assert!((e1.to_f64() - 0.3819660113).abs() < 1e-9);
        let e2 = entry_cdf_exact(&t, 2, &int(2)).unwrap();
        assert!((e2.to_f64() - 0.7639320225).abs() < 1e-9);
        for k in 0..6 {
            let q = t.q(k + 1).unwrap().clone();
            assert_eq!(entry_cdf_form(&t, k, &BigRational::from_integer(q)).unwrap(), AlphaForm::from_integer(1));
            assert!(entry_cdf_form(&t, k, &int(0)).unwrap().is_zero());
        }
    }

    #[test]
    fn arcset_oracle_examples() {
        let t = golden(10);
        let three = arcset_entry_oracle(&t, 3, 3).unwrap();
        let expected = (&t.eta_form(3).unwrap() + &t.eta_form(4).unwrap()).scale_int(&3.into());
        assert!(three.overlaps(&expected.enclosure(t.alpha())));
        assert_eq!(arcset_entry_form(&t, 3, 3).unwrap(), expected);
        let one = arcset_entry_form(&t, 4, 1).unwrap();
        assert_eq!(one, &t.eta_form(4).unwrap() + &t.eta_form(5).unwrap());
        let q = t.q(5).unwrap().to_u64().unwrap();
        assert_eq!(arcset_entry_form(&t, 4, q).unwrap(), AlphaForm::from_integer(1));
    }

    #[test]
    fn sweep_agrees_with_sorting_oracle_and_formula() {
        for spec in [CfSpec::constant(1), CfSpec::constant(3), CfSpec::block(3), CfSpec::affine(1, 1)] {
            let t = ConvergentTable::with_precision(&spec, 8, 60).unwrap();
            for k in 0..5 {
                let n = t.q(k + 1).unwrap().to_u64().unwrap();
                let sweep = arcset_entry_sweep(&t, k, n).unwrap();
                for s in 0..=n {
                    let formula = entry_cdf_form(&t, k, &int(s as i64)).unwrap();
                    assert_eq!(sweep[s as usize], formula, "{spec} k={k} s={s}");
                    if s <= 12 {
                        assert_eq!(arcset_entry_form(&t, k, s).unwrap(), formula, "{spec} k={k} s={s}");
                    }
                }
            }
        }
    }

    #[test]
    fn finite_k_examples() {
        let t = golden(20);
        let h = finite_k_survival(&t, 12, 1.3).unwrap().to_f64();
        assert!((h - 0.7236068).abs() < 1e-3);
        let h = finite_k_survival(&t, 12, 2.0).unwrap().to_f64();
        assert!((h - 0.4472136).abs() < 1e-3);
        assert_eq!(finite_k_survival(&t, 12, 0.5).unwrap().to_f64(), 1.0);
        // q_12 · y = q_13 exactly.
        let y = BigRational::new(t.q(13).unwrap().clone(), t.q(12).unwrap().clone());
        assert!(matches!(finite_k_survival_form(&t, 12, &y), Err(SimError::BreakpointHit { .. })));
        let shallow = build_table(&CfSpec::constant(1), 13).unwrap();
        assert!(finite_k_survival(&shallow, 12, 30.0).is_err());
    }
}
