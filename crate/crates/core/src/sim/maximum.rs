//! Exact maxima `M_n(x) = max_{1≤j≤n} X(T^j x)`.
//!
//! `M_n ≥ q_{ℓ+1}` exactly when the orbit enters `B_ℓ` by time `n`, and the
//! arcs are nested, so `M_n` is read off the successive first entry times
//! `τ_0 ≤ τ_1 ≤ …`. Inside `B_ℓ` the first return map is an exchange of two
//! intervals with return times `q_ℓ` and `q_{ℓ+1}`, which gives `τ_{ℓ+1}`
//! from `τ_ℓ` and the entry point in a number of exact comparisons
//! logarithmic in the partial quotient.

use std::cmp::Ordering;
use std::sync::{Arc as Shared, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{CirclePoint, SimError};
use crate::cf::{CfError, CfSpec, ConvergentTable};

/// The outcome of one maximum: `M_n = q_index`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxSample {
    pub index: usize,
    pub value: BigInt,
}

/// A point `(num + coeff·α) / den` with integer data and `den > 0`.
#[derive(Clone, Debug)]
struct Lattice {
    num: BigInt,
    coeff: BigInt,
    den: BigInt,
}

impl Lattice {
    fn of(x: &CirclePoint) -> Self {
        let pos = x.position();
        let den = pos.rational.denom().clone();
        Self {
            num: pos.rational.numer().clone(),
            coeff: &pos.coeff * &den,
            den,
        }
    }

    /// Sign of `self − (a + bα)`.
    fn cmp_affine(&self, table: &ConvergentTable, a: &BigInt, b: &BigInt) -> Result<Ordering, SimError> {
        let n = &self.num - &self.den * a;
        let m = &self.coeff - &self.den * b;
        Ok(table.sign_int_affine(&n, &m)?)
    }

    fn shift(&mut self, a: &BigInt, b: &BigInt) {
        self.num += &self.den * a;
        self.coeff += &self.den * b;
    }

    fn negate(&mut self) {
        self.num = -&self.num;
        self.coeff = -&self.coeff;
    }
}

fn eta_parts(table: &ConvergentTable, k: usize) -> Result<(BigInt, BigInt), SimError> {
    let f = table.eta_form(k)?;
    Ok((f.rational.to_integer(), f.coeff))
}

/// Smallest `r ∈ [1, hi]` with `pred(r)`, given `pred(hi)` and monotonicity.
fn first_true(hi: u64, mut pred: impl FnMut(u64) -> Result<bool, SimError>) -> Result<u64, SimError> {
    let (mut lo, mut hi) = (1u64, hi);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// `M_n(x)` for `n ≥ 1`, using the table as given.
///
/// Fails with `DepthExceeded` or `PrecisionExhausted` when the table is too
/// shallow or too coarse; [`MaximumSampler`] retries with a larger table.
pub fn sample_maximum(table: &ConvergentTable, x: &CirclePoint, n: &BigInt) -> Result<MaxSample, SimError> {
    if n < &BigInt::one() {
        return Err(SimError::InvalidInput("n must be at least 1".into()));
    }
    let zero = BigInt::zero();
    let one = BigInt::one();
    let mut u = Lattice::of(x);

    // y_1 = x + α mod 1.
    u.shift(&zero, &one);
    if u.cmp_affine(table, &one, &zero)? != Ordering::Less {
        u.shift(&-&one, &zero);
    }
    if u.cmp_affine(table, &zero, &zero)? == Ordering::Equal {
        return Err(SimError::AtOrigin);
    }

    // First entry into B_0 = (c_1α − 1, α): the orbit skips [α, c_1α].
    let c1 = table.term(1)?;
    let c1_big = BigInt::from(c1);
    let mut t = BigInt::one();
    if u.cmp_affine(table, &zero, &one)? == Ordering::Less {
        // Already in B_0.
    } else if u.cmp_affine(table, &zero, &c1_big)? == Ordering::Greater {
        u.shift(&-&one, &zero);
    } else {
        let r = first_true(c1, |r| {
            let b = BigInt::from(c1) - BigInt::from(r);
            Ok(u.cmp_affine(table, &zero, &b)? == Ordering::Greater)
        })?;
        u.shift(&-&one, &BigInt::from(r));
        t += r;
    }
    if &t > n {
        return Ok(MaxSample {
            index: 0,
            value: table.q(0)?.clone(),
        });
    }

    // u is the entry point of B_ℓ in oriented coordinates, B_ℓ = (−η_{ℓ+1}, η_ℓ).
    let mut level = 0usize;
    loop {
        if level + 2 > table.depth() {
            return Err(SimError::Cf(CfError::DepthExceeded {
                requested: level + 2,
                available: table.depth(),
            }));
        }
        let (a1, b1) = eta_parts(table, level + 1)?;
        let (a2, b2) = eta_parts(table, level + 2)?;
        if u.cmp_affine(table, &a2, &b2)? != Ordering::Less {
            // Long side: each return subtracts η_{ℓ+1} and costs q_{ℓ+1}.
            let c = table.term(level + 2)?;
            let r = first_true(c, |r| {
                let r = BigInt::from(r);
                Ok(u.cmp_affine(table, &(&a2 + &r * &a1), &(&b2 + &r * &b1))? == Ordering::Less)
            })?;
            let r = BigInt::from(r);
            u.shift(&-(&r * &a1), &-(&r * &b1));
            t += &r * table.q(level + 1)?;
        }
        if &t > n {
            return Ok(MaxSample {
                index: level + 1,
                value: table.q(level + 1)?.clone(),
            });
        }
        if u.num.is_zero() && u.coeff.is_zero() {
            return Err(SimError::AtOrigin);
        }
        u.negate();
        level += 1;
    }
}

/// Sizes and, on demand, enlarges the table behind [`sample_maximum`] for a
/// fixed horizon `n`. Safe to share across threads.
#[derive(Debug)]
pub struct MaximumSampler {
    spec: CfSpec,
    n: BigInt,
    table: RwLock<Shared<ConvergentTable>>,
}

const MAX_ESCALATIONS: usize = 6;

impl MaximumSampler {
    pub fn new(spec: &CfSpec, n: BigInt) -> Result<Self, SimError> {
        if n < BigInt::one() {
            return Err(SimError::InvalidInput("n must be at least 1".into()));
        }
        let table = sized_table(spec, &n)?;
        Ok(Self {
            spec: spec.clone(),
            n,
            table: RwLock::new(Shared::new(table)),
        })
    }

    pub fn n(&self) -> &BigInt {
        &self.n
    }

    pub fn table(&self) -> Shared<ConvergentTable> {
        self.table.read().expect("table lock poisoned").clone()
    }

    pub fn sample(&self, x: &CirclePoint) -> Result<MaxSample, SimError> {
        let mut last = None;
        for _ in 0..=MAX_ESCALATIONS {
            let t = self.table();
            match sample_maximum(&t, x, &self.n) {
                Err(e) if e.is_precision() => {
                    last = Some(e);
                    self.escalate(&t)?;
                }
                r => return r,
            }
        }
        Err(last.unwrap_or(SimError::Cf(CfError::PrecisionExhausted)))
    }

    fn escalate(&self, used: &Shared<ConvergentTable>) -> Result<(), SimError> {
        let mut guard = self.table.write().expect("table lock poisoned");
        if !Shared::ptr_eq(&guard, used) {
            return Ok(());
        }
        let avail = self.spec.available_terms();
        let precision = (2 * used.precision()).min(avail);
        let depth = (2 * used.depth()).min(precision.saturating_sub(2));
        if precision <= used.precision() && depth <= used.depth() {
            return Err(SimError::Cf(CfError::PrecisionExhausted));
        }
        *guard = Shared::new(ConvergentTable::with_precision(&self.spec, depth.max(used.depth()), precision)?);
        Ok(())
    }
}

/// Depth with `q_depth` well past `n`, precision fine enough for 64-bit dyadic
/// starting points at that depth.
fn sized_table(spec: &CfSpec, n: &BigInt) -> Result<ConvergentTable, SimError> {
    let avail = spec.available_terms();
    let want_depth = n.bits() + 70;
    let mut q_prev = BigInt::one();
    let mut q = BigInt::from(spec.term(1)?);
    let mut k = 1usize;
    let mut depth = None;
    let mut target_bits = None;
    while k < avail {
        if depth.is_none() && q.bits() >= want_depth && k >= 2 {
            depth = Some(k);
        }
        if let Some(d) = depth {
            if k == d + 2 {
                target_bits = Some(2 * (q.bits() + 64) + 64);
            }
        }
        if let Some(b) = target_bits {
            if q.bits() >= b {
                break;
            }
        }
        k += 1;
        let next = BigInt::from(spec.term(k)?) * &q + &q_prev;
        q_prev = std::mem::replace(&mut q, next);
    }
    let precision = k.min(avail);
    let depth = depth.unwrap_or(precision).min(precision.saturating_sub(2));
    if depth < 2 {
        return Err(SimError::Cf(CfError::DepthExceeded {
            requested: 4,
            available: avail,
        }));
    }
    Ok(ConvergentTable::with_precision(spec, depth, precision)?)
}
