//! Points and arcs on the circle `[0, 1)`, the intervals `B_k`, the
//! observable `X` and return times.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One};

use super::SimError;
use crate::cf::{AlphaForm, ConvergentTable, RatInterval};

/// Exact `floor` of a form, decided by comparisons against α's convergents.
pub fn floor_form(table: &ConvergentTable, f: &AlphaForm) -> Result<BigInt, SimError> {
    let guess = f.enclosure(table.alpha()).midpoint().floor().to_integer();
    let mut m = guess;
    loop {
        let below = f.add_rational(&BigRational::from_integer(-&m));
        if table.decide_sign(&below)? == Ordering::Less {
            m -= 1;
            continue;
        }
        let above = below.add_rational(&-BigRational::one());
        if table.decide_sign(&above)? != Ordering::Less {
            m += 1;
            continue;
        }
        return Ok(m);
    }
}

/// A point of the circle held exactly as `r + c·α ∈ [0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CirclePoint {
    pos: AlphaForm,
}

impl CirclePoint {
    /// The rational point `r mod 1`.
    pub fn from_rational(r: BigRational) -> Self {
        let frac = &r - r.floor();
        Self {
            pos: AlphaForm::from_rational(frac),
        }
    }

    /// `u / 2^64`.
    pub fn from_dyadic(u: u64) -> Self {
        Self::from_rational(BigRational::new(BigInt::from(u), BigInt::one() << 64))
    }

    /// The binary rational denoted by `x`, reduced mod 1.
    pub fn from_f64(x: f64) -> Result<Self, SimError> {
        BigRational::from_f64(x)
            .map(Self::from_rational)
            .ok_or_else(|| SimError::InvalidInput(format!("{x} is not a finite number")))
    }

    /// Reduces an arbitrary form mod 1.
    pub fn from_form(table: &ConvergentTable, f: AlphaForm) -> Result<Self, SimError> {
        let m = floor_form(table, &f)?;
        Ok(Self {
            pos: f.add_rational(&BigRational::from_integer(-m)),
        })
    }

    pub fn position(&self) -> &AlphaForm {
        &self.pos
    }

    pub fn is_origin(&self) -> bool {
        self.pos.is_zero()
    }

    pub fn enclosure(&self, table: &ConvergentTable) -> RatInterval {
        self.pos.enclosure(table.alpha())
    }

    /// `T^j x = x + jα mod 1`.
    pub fn rotate(&self, table: &ConvergentTable, j: i64) -> Result<Self, SimError> {
        let f = &self.pos + &AlphaForm::alpha().scale_int(&BigInt::from(j));
        Self::from_form(table, f)
    }
}

/// An open arc `(left, right)` of the circle with `0 < right − left ≤ 1`,
/// endpoints given in lifted coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arc {
    pub left: AlphaForm,
    pub right: AlphaForm,
}

impl Arc {
    pub fn new(table: &ConvergentTable, left: AlphaForm, right: AlphaForm) -> Result<Self, SimError> {
        let len = &right - &left;
        let positive = table.decide_sign(&len)? == Ordering::Greater;
        let at_most_one = table.decide_sign(&len.add_rational(&-BigRational::one()))? != Ordering::Greater;
        if !(positive && at_most_one) {
            return Err(SimError::InvalidInput("arc length must lie in (0, 1]".into()));
        }
        Ok(Self { left, right })
    }

    pub fn length(&self) -> AlphaForm {
        &self.right - &self.left
    }

    pub fn measure(&self, table: &ConvergentTable) -> RatInterval {
        self.length().enclosure(table.alpha())
    }

    /// The arc moved by `t` (a rotation by `t` when `t` is a multiple of α).
    pub fn translate(&self, t: &AlphaForm) -> Self {
        Self {
            left: &self.left + t,
            right: &self.right + t,
        }
    }

    /// The lift `x + m` lying strictly inside `(left, right)`, if any.
    pub fn lift(&self, table: &ConvergentTable, x: &CirclePoint) -> Result<Option<AlphaForm>, SimError> {
        let gap = &self.right - x.position();
        let mut m = floor_form(table, &gap)?;
        let lifted = |m: &BigInt| x.position().add_rational(&BigRational::from_integer(m.clone()));
        // x + m < right must be strict.
        if table.decide_sign(&(&self.right - &lifted(&m)))? != Ordering::Greater {
            m -= 1;
        }
        let y = lifted(&m);
        if table.decide_sign(&(&y - &self.left))? == Ordering::Greater {
            Ok(Some(y))
        } else {
            Ok(None)
        }
    }

    pub fn contains(&self, table: &ConvergentTable, x: &CirclePoint) -> Result<bool, SimError> {
        Ok(self.lift(table, x)?.is_some())
    }

    /// `self ⊆ other` as sets of lifts near zero, decided exactly.
    pub fn is_within(&self, table: &ConvergentTable, other: &Arc) -> Result<bool, SimError> {
        Ok(table.cmp_forms(&other.left, &self.left)? != Ordering::Greater
            && table.cmp_forms(&self.right, &other.right)? != Ordering::Greater)
    }
}

/// `B_k = (−η_{k+1}, η_k)` for even `k` and `(−η_k, η_{k+1})` for odd `k`.
pub fn b_arc(table: &ConvergentTable, k: usize) -> Result<Arc, SimError> {
    let a = table.eta_form(k)?;
    let b = table.eta_form(k + 1)?;
    Ok(if k % 2 == 0 {
        Arc { left: -b, right: a }
    } else {
        Arc { left: -a, right: b }
    })
}

/// Disjoint pieces `[l, r) ⊆ [0, 1)`, sorted, covering a union of arcs.
#[derive(Clone, Debug)]
pub struct ArcSet {
    pieces: Vec<(AlphaForm, AlphaForm)>,
}

impl ArcSet {
    /// Reduces every arc mod 1, splits at 0, sorts and merges.
    pub fn from_arcs(table: &ConvergentTable, arcs: &[Arc]) -> Result<Self, SimError> {
        let one = AlphaForm::from_integer(1);
        let mut raw = Vec::with_capacity(arcs.len() + 1);
        for arc in arcs {
            let m = floor_form(table, &arc.left)?;
            let shift = BigRational::from_integer(-m);
            let l = arc.left.add_rational(&shift);
            let r = arc.right.add_rational(&shift);
            if table.cmp_forms(&r, &one)? == Ordering::Greater {
                raw.push((l, one.clone()));
                raw.push((AlphaForm::zero(), &r - &one));
            } else {
                raw.push((l, r));
            }
        }
        // Sort on midpoints of the enclosures, then confirm neighbours exactly.
        let alpha = table.alpha().clone();
        raw.sort_by(|a, b| {
            a.0.enclosure(&alpha)
                .midpoint()
                .cmp(&b.0.enclosure(&alpha).midpoint())
        });
        for i in 1..raw.len() {
            let mut j = i;
            while j > 0 && table.cmp_forms(&raw[j - 1].0, &raw[j].0)? == Ordering::Greater {
                raw.swap(j - 1, j);
                j -= 1;
            }
        }
        let mut pieces: Vec<(AlphaForm, AlphaForm)> = Vec::new();
        for (l, r) in raw {
            if let Some(last) = pieces.last_mut() {
                if table.cmp_forms(&l, &last.1)? != Ordering::Greater {
                    if table.cmp_forms(&r, &last.1)? == Ordering::Greater {
                        last.1 = r;
                    }
                    continue;
                }
            }
            pieces.push((l, r));
        }
        Ok(Self { pieces })
    }

    pub fn pieces(&self) -> &[(AlphaForm, AlphaForm)] {
        &self.pieces
    }

    /// Exact total length.
    pub fn measure_form(&self) -> AlphaForm {
        self.pieces
            .iter()
            .fold(AlphaForm::zero(), |acc, (l, r)| &acc + &(r - l))
    }

    pub fn measure(&self, table: &ConvergentTable) -> RatInterval {
        self.measure_form().enclosure(table.alpha())
    }
}

/// `min{ℓ : x ∉ B_ℓ}`.
pub fn exit_level(table: &ConvergentTable, x: &CirclePoint) -> Result<usize, SimError> {
    if x.is_origin() {
        return Err(SimError::AtOrigin);
    }
    for l in 0..=table.depth() {
        if !b_arc(table, l)?.contains(table, x)? {
            return Ok(l);
        }
    }
    Err(SimError::Cf(crate::cf::CfError::DepthExceeded {
        requested: table.depth() + 1,
        available: table.depth(),
    }))
}

/// `X(x) = q_m` with `m = min{ℓ : x ∉ B_ℓ}`, so that `{X ≥ q_{m+1}} = B_m`.
pub fn observable_x(table: &ConvergentTable, x: &CirclePoint) -> Result<BigInt, SimError> {
    let m = exit_level(table, x)?;
    Ok(table.q(m)?.clone())
}

/// First return time of `x ∈ B_k` to `B_k`: `q_{k+1}` on the side of length
/// `η_k` and `q_k` on the side of length `η_{k+1}`.
pub fn return_time(table: &ConvergentTable, k: usize, x: &CirclePoint) -> Result<BigInt, SimError> {
    let arc = b_arc(table, k)?;
    let y = arc.lift(table, x)?.ok_or(SimError::NotInArc { k })?;
    if y.is_zero() {
        return Err(SimError::AtOrigin);
    }
    // The long side (0, η_k) carries the sign of q_k α − p_k.
    let oriented = if k.is_even() { y } else { -y };
    match table.decide_sign(&oriented)? {
        Ordering::Greater => Ok(table.q(k + 1)?.clone()),
        _ => Ok(table.q(k)?.clone()),
    }
}
