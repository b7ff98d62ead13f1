//! Convergents, the α enclosure they induce, and the η_k built on it.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::form::AlphaForm;
use super::interval::RatInterval;
use super::spec::CfSpec;
use super::CfError;

/// `c_i` for the spec, 1-based.
pub fn term(spec: &CfSpec, i: usize) -> Result<u64, CfError> {
    spec.term(i)
}

/// Exact value of the finite continued fraction `[a_1, ..., a_n] = 1/(a_1 + 1/(a_2 + ...))`.
/// The empty fraction is zero.
pub fn finite_cf(terms: &[u64]) -> BigRational {
    let mut v = BigRational::zero();
    for &a in terms.iter().rev() {
        v = (BigRational::from_integer(BigInt::from(a)) + v).recip();
    }
    v
}

/// Enclosure of the tail `[c_{j+1}, c_{j+2}, ...]` from its two deepest
/// convergents using `depth` terms.
pub fn tail_enclosure(spec: &CfSpec, j: usize, depth: usize) -> Result<RatInterval, CfError> {
    if depth == 0 {
        return Err(CfError::IndexOutOfRange { index: 0, limit: 1 });
    }
    let available = spec.available_terms();
    if j + depth > available {
        return Err(CfError::DepthExceeded {
            requested: j + depth,
            available,
        });
    }
    let (mut p0, mut q0) = (BigInt::zero(), BigInt::one());
    let (mut p1, mut q1) = (BigInt::one(), BigInt::from(spec.term(j + 1)?));
    for i in 2..=depth {
        let c = BigInt::from(spec.term(j + i)?);
        let p2 = &c * &p1 + &p0;
        let q2 = &c * &q1 + &q0;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
    }
    Ok(RatInterval::spanning(
        BigRational::new(p0, q0),
        BigRational::new(p1, q1),
    ))
}

/// `p_k`, `q_k` and the α enclosure for a spec, indexed up to `depth()`.
///
/// Convergents are kept to a working precision `P ≥ depth + 2`, and α is
/// enclosed by `p_{P-1}/q_{P-1}` and `p_P/q_P`.
#[derive(Clone, Debug)]
pub struct ConvergentTable {
    spec: CfSpec,
    k_max: usize,
    terms: Vec<u64>,
    p: Vec<BigInt>,
    q: Vec<BigInt>,
    alpha: RatInterval,
    eta: Vec<RatInterval>,
}

/// Builds a table with the minimal working precision `k_max + 2`.
pub fn build_table(spec: &CfSpec, k_max: usize) -> Result<ConvergentTable, CfError> {
    ConvergentTable::with_precision(spec, k_max, k_max + 2)
}

impl ConvergentTable {
    pub fn with_precision(spec: &CfSpec, k_max: usize, precision: usize) -> Result<Self, CfError> {
        let precision = precision.max(k_max + 2);
        let available = spec.available_terms();
        if precision > available {
            return Err(CfError::DepthExceeded {
                requested: precision,
                available,
            });
        }
        let terms = spec.terms(precision)?;
        let mut p = Vec::with_capacity(precision + 1);
        let mut q = Vec::with_capacity(precision + 1);
        p.push(BigInt::zero());
        q.push(BigInt::one());
        p.push(BigInt::one());
        q.push(BigInt::from(terms[0]));
        for k in 2..=precision {
            let c = BigInt::from(terms[k - 1]);
            p.push(&c * &p[k - 1] + &p[k - 2]);
            q.push(&c * &q[k - 1] + &q[k - 2]);
        }
        let alpha = RatInterval::spanning(
            BigRational::new(p[precision - 1].clone(), q[precision - 1].clone()),
            BigRational::new(p[precision].clone(), q[precision].clone()),
        );
        let mut table = Self {
            spec: spec.clone(),
            k_max,
            terms,
            p,
            q,
            alpha,
            eta: Vec::new(),
        };
        table.eta = (0..=k_max).map(|k| table.eta_uncached(k)).collect();
        Ok(table)
    }

    /// Same indices, roughly doubled working precision (capped by the spec).
    pub fn refined(&self) -> Result<Self, CfError> {
        let cap = self.spec.available_terms();
        let next = (2 * self.precision()).min(cap);
        if next <= self.precision() {
            return Err(CfError::PrecisionExhausted);
        }
        Self::with_precision(&self.spec, self.k_max, next)
    }

    /// Refines until `done` holds, failing with `PrecisionExhausted` at the cap.
    pub fn refine_until(&self, done: impl Fn(&Self) -> bool) -> Result<Self, CfError> {
        let mut t = self.clone();
        while !done(&t) {
            t = t.refined()?;
        }
        Ok(t)
    }

    pub fn spec(&self) -> &CfSpec {
        &self.spec
    }

    /// Largest index `k` with cached η enclosures.
    pub fn depth(&self) -> usize {
        self.k_max
    }

    /// Index of the deepest convergent.
    pub fn precision(&self) -> usize {
        self.q.len() - 1
    }

    pub fn term(&self, i: usize) -> Result<u64, CfError> {
        if i == 0 || i > self.terms.len() {
            return Err(CfError::IndexOutOfRange {
                index: i,
                limit: self.terms.len(),
            });
        }
        Ok(self.terms[i - 1])
    }

    fn check(&self, k: usize) -> Result<(), CfError> {
        if k > self.precision() {
            Err(CfError::IndexOutOfRange {
                index: k,
                limit: self.precision(),
            })
        } else {
            Ok(())
        }
    }

    pub fn p(&self, k: usize) -> Result<&BigInt, CfError> {
        self.check(k)?;
        Ok(&self.p[k])
    }

    pub fn q(&self, k: usize) -> Result<&BigInt, CfError> {
        self.check(k)?;
        Ok(&self.q[k])
    }

    pub fn qs(&self) -> &[BigInt] {
        &self.q
    }

    pub fn ps(&self) -> &[BigInt] {
        &self.p
    }

    pub fn alpha(&self) -> &RatInterval {
        &self.alpha
    }

    pub fn alpha_f64(&self) -> f64 {
        self.alpha.to_f64()
    }

    /// `η_k` as an exact form `(-1)^k (q_k α − p_k)`.
    pub fn eta_form(&self, k: usize) -> Result<AlphaForm, CfError> {
        self.check(k)?;
        let (r, c) = if k % 2 == 0 {
            (-&self.p[k], self.q[k].clone())
        } else {
            (self.p[k].clone(), -&self.q[k])
        };
        Ok(AlphaForm::integer_affine(r, c))
    }

    fn eta_uncached(&self, k: usize) -> RatInterval {
        let signed = self
            .alpha
            .scale_int(&self.q[k])
            .shift(&BigRational::from_integer(-&self.p[k]));
        if k % 2 == 0 {
            signed
        } else {
            -signed
        }
    }

    /// Enclosure of `η_k = |q_k α − p_k|`, strictly positive.
    pub fn eta_enclosure(&self, k: usize) -> Result<RatInterval, CfError> {
        let e = if k <= self.k_max {
            self.eta[k].clone()
        } else if k < self.precision() {
            self.eta_uncached(k)
        } else {
            return Err(CfError::IndexOutOfRange {
                index: k,
                limit: self.precision() - 1,
            });
        };
        if !e.lo().is_positive() {
            return Err(CfError::PrecisionExhausted);
        }
        Ok(e)
    }

    pub fn eta_f64(&self, k: usize) -> f64 {
        self.eta_enclosure(k).map(|e| e.to_f64()).unwrap_or(f64::NAN)
    }

    /// Enclosure of `q_{k+1} η_k + q_k η_{k+1}`, which equals 1.
    pub fn kac_enclosure(&self, k: usize) -> Result<RatInterval, CfError> {
        let a = self.eta_enclosure(k)?.scale_int(self.q(k + 1)?);
        let b = self.eta_enclosure(k + 1)?.scale_int(self.q(k)?);
        Ok(&a + &b)
    }

    /// `q_{k-1}/q_k`.
    pub fn reversed_quotient(&self, k: usize) -> Result<BigRational, CfError> {
        if k == 0 {
            return Err(CfError::IndexOutOfRange { index: 0, limit: self.precision() });
        }
        self.check(k)?;
        Ok(BigRational::new(self.q[k - 1].clone(), self.q[k].clone()))
    }

    /// Sign of a form, decided by the current α enclosure.
    pub fn sign(&self, form: &AlphaForm) -> Result<Ordering, CfError> {
        form.sign_with(&self.alpha).ok_or(CfError::PrecisionExhausted)
    }

    /// Sign of a form, refining the α enclosure as needed up to the spec's budget.
    pub fn decide_sign(&self, form: &AlphaForm) -> Result<Ordering, CfError> {
        if let Ok(s) = self.sign(form) {
            return Ok(s);
        }
        let mut t = self.refined()?;
        loop {
            if let Ok(s) = t.sign(form) {
                return Ok(s);
            }
            t = t.refined()?;
        }
    }

    /// Exact comparison of two forms.
    pub fn cmp_forms(&self, a: &AlphaForm, b: &AlphaForm) -> Result<Ordering, CfError> {
        self.decide_sign(&(a - b))
    }

    /// Sign of the integer-affine quantity `n + m·α`, using the tightest
    /// convergent bracket that is needed.
    ///
    /// Consecutive convergents straddle α and the quantity is monotone in α,
    /// so equal signs at both ends of a bracket decide it.
    pub fn sign_int_affine(&self, n: &BigInt, m: &BigInt) -> Result<Ordering, CfError> {
        if m.is_zero() {
            return Ok(n.sign_cmp());
        }
        let bits = m.bits();
        let top = self.precision();
        let start = self.q.partition_point(|q| q.bits() < bits).min(top - 1);
        let at = |j: usize| (n * &self.q[j] + m * &self.p[j]).sign_cmp();
        let mut prev = at(start);
        for j in start + 1..=top {
            let cur = at(j);
            if cur == prev && cur != Ordering::Equal {
                return Ok(cur);
            }
            prev = cur;
        }
        Err(CfError::PrecisionExhausted)
    }
}

trait SignCmp {
    fn sign_cmp(&self) -> Ordering;
}

impl SignCmp for BigInt {
    fn sign_cmp(&self) -> Ordering {
        if self.is_positive() {
            Ordering::Greater
        } else if self.is_negative() {
            Ordering::Less
        } else {
            Ordering::Equal
        }
    }
}

impl ConvergentTable {
    /// `q_k` as `f64` (saturating to infinity).
    pub fn q_f64(&self, k: usize) -> f64 {
        self.q.get(k).and_then(|q| q.to_f64()).unwrap_or(f64::INFINITY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::{compare, Comparison};

    fn golden() -> CfSpec {
        CfSpec::constant(1)
    }

    fn ints(v: &[BigInt]) -> Vec<i64> {
        v.iter().map(|x| x.to_i64().unwrap()).collect()
    }

    #[test]
    fn fibonacci_denominators() {
        let t = build_table(&golden(), 6).unwrap();
        assert_eq!(ints(&t.qs()[..=6]), vec![1, 1, 2, 3, 5, 8, 13]);
    }

    #[test]
    fn base_cases_and_affine() {
        let t = build_table(&CfSpec::affine(1, 1), 1).unwrap();
        assert_eq!(ints(&t.ps()[..=1]), vec![0, 1]);
        assert_eq!(ints(&t.qs()[..=1]), vec![1, 2]);
        let t = build_table(&CfSpec::affine(1, 1), 3).unwrap();
        assert_eq!(ints(&t.qs()[..=3]), vec![1, 2, 7, 30]);
    }

    #[test]
    fn explicit_needs_two_extra_terms() {
        let s = CfSpec::explicit(&[1, 2, 3, 4]).unwrap();
        assert!(build_table(&s, 2).is_ok());
        assert!(matches!(build_table(&s, 3), Err(CfError::DepthExceeded { .. })));
    }

    #[test]
    fn golden_etas() {
        let t = build_table(&golden(), 10).unwrap().refined().unwrap();
        let alpha = (5f64.sqrt() - 1.0) / 2.0;
        assert!((t.eta_f64(0) - alpha).abs() < 1e-9);
        assert!((t.eta_f64(1) - alpha * alpha).abs() < 1e-9);
        assert!((t.eta_f64(3) - alpha.powi(4)).abs() < 1e-9);
        assert_eq!(
            compare(&t.eta_enclosure(3).unwrap(), &t.eta_enclosure(2).unwrap()),
            Comparison::Less
        );
    }

    #[test]
    fn reversed_quotients() {
        let t = build_table(&golden(), 6).unwrap();
        assert_eq!(t.reversed_quotient(4).unwrap(), BigRational::new(3.into(), 5.into()));
        let t = build_table(&CfSpec::block(3), 4).unwrap();
        assert_eq!(t.reversed_quotient(3).unwrap(), BigRational::new(2.into(), 5.into()));
        let t = build_table(&CfSpec::constant(7), 2).unwrap();
        assert_eq!(t.reversed_quotient(1).unwrap(), BigRational::new(1.into(), 7.into()));
    }

    #[test]
    fn tails() {
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let e = tail_enclosure(&golden(), 4, 30).unwrap();
        assert!(e.lo().to_f64().unwrap() <= phi && phi <= e.hi().to_f64().unwrap());
        let aff = CfSpec::affine(1, 1);
        let mut last = f64::INFINITY;
        for d in [2, 4, 8, 16] {
            let e = tail_enclosure(&aff, 0, d).unwrap();
            assert!(e.hi().to_f64().unwrap() <= 0.5);
            assert!(e.width_f64() < last);
            last = e.width_f64();
        }
        let e = tail_enclosure(&CfSpec::block(3), 1, 30).unwrap();
        assert!(e.lo().is_positive() && e.hi() < &BigRational::one());
    }

    #[test]
    fn straddle_width() {
        let t = build_table(&CfSpec::block(3), 8).unwrap();
        let m = t.precision() - 1;
        let expected = BigRational::new(BigInt::one(), t.q(m).unwrap() * t.q(m + 1).unwrap());
        assert_eq!(t.alpha().width(), expected);
    }

    #[test]
    fn integer_affine_sign() {
        let t = build_table(&golden(), 40).unwrap();
        // 0.618... - 0.6 > 0, written as (-3 + 5α)/5.
        assert_eq!(
            t.sign_int_affine(&BigInt::from(-3), &BigInt::from(5)).unwrap(),
            Ordering::Greater
        );
        // F_30 α − F_29 alternates in sign with index.
        let (p, q) = (t.p(30).unwrap().clone(), t.q(30).unwrap().clone());
        assert_eq!(t.sign_int_affine(&-p, &q).unwrap(), Ordering::Greater);
    }
}
