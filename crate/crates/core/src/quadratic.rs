//! Exact arithmetic in a real quadratic field `Q(√d)`.
//!
//! Purely periodic continued fractions are quadratic irrationals, and every
//! limit attached to one periodic pattern lives in the same field, so
//! closed-form laws for constant-type numbers can be compared exactly.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::cf::RatInterval;

/// `a + b√d` with `d` squarefree and at least 2, or `d = 1` and `b = 0` for a rational.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Quadratic {
    a: BigRational,
    b: BigRational,
    d: BigInt,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Splits `n > 0` as `s² · d`; `d` is squarefree whenever `n` has no repeated
/// prime factor above the trial-division bound.
pub fn square_free_split(n: &BigInt) -> (BigInt, BigInt) {
    let mut s = BigInt::one();
    let mut d = n.clone();
    let mut p = BigInt::from(2u32);
    let bound = BigInt::from(1_000_000u32);
    while &p * &p <= d && p <= bound {
        let pp = &p * &p;
        while (&d % &pp).is_zero() {
            d /= &pp;
            s *= &p;
        }
        p += 1;
    }
    let r = d.sqrt();
    if &r * &r == d {
        s *= r;
        d = BigInt::one();
    }
    (s, d)
}

impl Quadratic {
    pub fn rational(a: BigRational) -> Self {
        Self {
            a,
            b: BigRational::zero(),
            d: BigInt::one(),
        }
    }

    pub fn from_integer(n: i64) -> Self {
        Self::rational(rat(n))
    }

    pub fn zero() -> Self {
        Self::from_integer(0)
    }

    pub fn one() -> Self {
        Self::from_integer(1)
    }

    /// `a + b√n` for any positive integer `n`; square factors are absorbed.
    pub fn new(a: BigRational, b: BigRational, n: &BigInt) -> Self {
        assert!(n.is_positive(), "radicand must be positive");
        let (s, d) = square_free_split(n);
        let b = b * BigRational::from_integer(s);
        if d.is_one() {
            return Self::rational(a + b);
        }
        Self::normalized(a, b, d)
    }

    /// `√n`.
    pub fn sqrt(n: u64) -> Self {
        Self::new(BigRational::zero(), BigRational::one(), &BigInt::from(n))
    }

    fn normalized(a: BigRational, b: BigRational, d: BigInt) -> Self {
        if b.is_zero() {
            Self::rational(a)
        } else {
            Self { a, b, d }
        }
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn radical_coeff(&self) -> &BigRational {
        &self.b
    }

    pub fn radicand(&self) -> &BigInt {
        &self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        self.is_rational().then_some(&self.a)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn common_field(&self, o: &Self) -> Option<BigInt> {
        match (self.is_rational(), o.is_rational()) {
            (true, true) => Some(BigInt::one()),
            (true, false) => Some(o.d.clone()),
            (false, true) => Some(self.d.clone()),
            (false, false) => (self.d == o.d).then(|| self.d.clone()),
        }
    }

    pub fn add(&self, o: &Self) -> Option<Self> {
        let d = self.common_field(o)?;
        Some(Self::normalized(&self.a + &o.a, &self.b + &o.b, d))
    }

    pub fn sub(&self, o: &Self) -> Option<Self> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        Self {
            a: -self.a.clone(),
            b: -self.b.clone(),
            d: self.d.clone(),
        }
    }

    pub fn mul(&self, o: &Self) -> Option<Self> {
        let d = self.common_field(o)?;
        let dr = BigRational::from_integer(d.clone());
        let a = &self.a * &o.a + &self.b * &o.b * dr;
        let b = &self.a * &o.b + &self.b * &o.a;
        Some(Self::normalized(a, b, d))
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        Self::normalized(&self.a * k, &self.b * k, self.d.clone())
    }

    /// `1/x`, `None` for zero.
    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let dr = BigRational::from_integer(self.d.clone());
        let norm = &self.a * &self.a - &self.b * &self.b * dr;
        Some(Self::normalized(
            &self.a / &norm,
            -(&self.b / &norm),
            self.d.clone(),
        ))
    }

    pub fn div(&self, o: &Self) -> Option<Self> {
        self.mul(&o.recip()?)
    }

    pub fn pow(&self, e: i32) -> Option<Self> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let mut out = Self::one();
        for _ in 0..e.unsigned_abs() {
            out = out.mul(&base)?;
        }
        Some(out)
    }

    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&BigRational::zero());
        let sb = self.b.cmp(&BigRational::zero());
        match (sa, sb) {
            (_, Ordering::Equal) => sa,
            (Ordering::Equal, _) => sb,
            _ if sa == sb => sa,
            _ => {
                let a2 = &self.a * &self.a;
                let b2d = &self.b * &self.b * BigRational::from_integer(self.d.clone());
                if a2 > b2d {
                    sa
                } else {
                    sb
                }
            }
        }
    }

    /// Exact comparison; `None` when the values lie in different fields.
    pub fn cmp_exact(&self, o: &Self) -> Option<Ordering> {
        Some(self.sub(o)?.signum())
    }

    /// Exact comparison with a rational.
    pub fn cmp_rational(&self, r: &BigRational) -> Ordering {
        Self::normalized(&self.a - r, self.b.clone(), self.d.clone()).signum()
    }

    /// Rigorous enclosure with `√d` pinned to `2^-bits`.
    pub fn enclose(&self, bits: u32) -> RatInterval {
        if self.is_rational() {
            return RatInterval::point(self.a.clone());
        }
        let scale = BigInt::one() << (2 * bits as usize);
        let r = (&self.d * &scale).sqrt();
        let den = BigInt::one() << bits as usize;
        let root = RatInterval::spanning(
            BigRational::new(r.clone(), den.clone()),
            BigRational::new(r + 1, den),
        );
        root.scale(&self.b).shift(&self.a)
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_rational() {
            return self.a.to_f64().unwrap_or(f64::NAN);
        }
        // An irrational value is nonzero, so the relative width can always be met.
        let mut bits = 96 + self.a.numer().bits().max(self.b.numer().bits()) as u32;
        loop {
            let e = self.enclose(bits);
            let mid = e.midpoint().abs();
            if e.width() * BigRational::from_integer(BigInt::one() << 64usize) <= mid {
                return e.to_f64();
            }
            bits *= 2;
        }
    }
}

impl fmt::Display for Quadratic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            write!(f, "{}", self.a)
        } else if self.a.is_zero() {
            write!(f, "({})√{}", self.b, self.d)
        } else {
            write!(f, "{} + ({})√{}", self.a, self.b, self.d)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> Quadratic {
        Quadratic::new(rat(-1) / rat(2), rat(1) / rat(2), &BigInt::from(5))
    }

    #[test]
    fn golden_identities() {
        let a = golden();
        let a2 = a.mul(&a).unwrap();
        assert_eq!(a.add(&a2).unwrap(), Quadratic::one());
        assert!((a.to_f64() - 0.6180339887498949).abs() < 1e-15);
        let inv = a.recip().unwrap();
        assert_eq!(inv.sub(&a).unwrap(), Quadratic::one());
    }

    #[test]
    fn square_factors_absorbed() {
        let q = Quadratic::new(rat(0), rat(1), &BigInt::from(8));
        assert_eq!(q.radicand(), &BigInt::from(2));
        assert_eq!(q.radical_coeff(), &rat(2));
        assert!(Quadratic::new(rat(1), rat(1), &BigInt::from(9)).is_rational());
    }

    #[test]
    fn signs_and_order() {
        let s2 = Quadratic::sqrt(2);
        let x = Quadratic::new(rat(-1), rat(1), &BigInt::from(2));
        assert_eq!(x.signum(), Ordering::Greater);
        assert_eq!(s2.cmp_rational(&(rat(141) / rat(100))), Ordering::Greater);
        assert_eq!(s2.cmp_rational(&(rat(142) / rat(100))), Ordering::Less);
        assert!(s2.add(&Quadratic::sqrt(3)).is_none());
        let e = x.enclose(40);
        assert!(e.width_f64() < 1e-11);
    }

    #[test]
    fn silver_plateau_is_half() {
        // α = √2 − 1, (α + α²)/(1 + α²) = 1/2.
        let a = Quadratic::new(rat(-1), rat(1), &BigInt::from(2));
        let a2 = a.mul(&a).unwrap();
        let v = a.add(&a2).unwrap().div(&Quadratic::one().add(&a2).unwrap()).unwrap();
        assert_eq!(v, Quadratic::rational(rat(1) / rat(2)));
    }

    #[test]
    fn high_powers_convert_accurately() {
        let a = golden();
        let small = a.pow(240).unwrap().to_f64();
        let expect = 0.6180339887498949f64.powi(240);
        assert!((small / expect - 1.0).abs() < 1e-12, "{small} vs {expect}");
        let large = a.pow(-240).unwrap().to_f64();
        assert!((large * expect - 1.0).abs() < 1e-12);
    }
}
