//! Numbers of the form `r + c·α` with `r` rational and `c` an integer.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use super::interval::RatInterval;

/// `rational + coeff·α`. Every η_k, arc endpoint and entry probability used
/// by the simulator has this shape, which keeps comparisons exact.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AlphaForm {
    pub rational: BigRational,
    pub coeff: BigInt,
}

impl AlphaForm {
    pub fn new(rational: BigRational, coeff: BigInt) -> Self {
        Self { rational, coeff }
    }

    pub fn zero() -> Self {
        Self::new(BigRational::zero(), BigInt::zero())
    }

    pub fn from_rational(r: BigRational) -> Self {
        Self::new(r, BigInt::zero())
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// `α` itself.
    pub fn alpha() -> Self {
        Self::new(BigRational::zero(), BigInt::from(1))
    }

    /// `a + b·α` with integer `a`, `b`.
    pub fn integer_affine(a: BigInt, b: BigInt) -> Self {
        Self::new(BigRational::from_integer(a), b)
    }

    pub fn is_rational(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.coeff.is_zero()
    }

    /// The value at an exact rational `α`.
    pub fn eval(&self, alpha: &BigRational) -> BigRational {
        &self.rational + alpha * BigRational::from_integer(self.coeff.clone())
    }

    /// Enclosure of the value given an enclosure of `α`.
    pub fn enclosure(&self, alpha: &RatInterval) -> RatInterval {
        let at = |a: &BigRational| {
            let (rn, rd) = (self.rational.numer(), self.rational.denom());
            BigRational::new(rn * a.denom() + &self.coeff * a.numer() * rd, rd * a.denom())
        };
        let (lo, hi) = (at(alpha.lo()), at(alpha.hi()));
        if self.coeff.is_negative() {
            RatInterval::ordered(hi, lo)
        } else {
            RatInterval::ordered(lo, hi)
        }
    }

    /// Sign of the value, decided from an enclosure of `α`; `None` when the
    /// enclosure straddles zero.
    pub fn sign_with(&self, alpha: &RatInterval) -> Option<Ordering> {
        if self.coeff.is_zero() {
            return Some(self.rational.cmp(&BigRational::zero()));
        }
        let e = self.enclosure(alpha);
        if e.lo().is_positive() {
            Some(Ordering::Greater)
        } else if e.hi().is_negative() {
            Some(Ordering::Less)
        } else {
            None
        }
    }

    pub fn scale_int(&self, k: &BigInt) -> Self {
        Self::new(&self.rational * BigRational::from_integer(k.clone()), &self.coeff * k)
    }

    pub fn add_rational(&self, r: &BigRational) -> Self {
        Self::new(&self.rational + r, self.coeff.clone())
    }

    pub fn to_f64(&self, alpha: f64) -> f64 {
        self.rational.to_f64().unwrap_or(f64::NAN) + self.coeff.to_f64().unwrap_or(f64::NAN) * alpha
    }
}

impl fmt::Display for AlphaForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}·α", self.rational, self.coeff)
    }
}

impl Add<&AlphaForm> for &AlphaForm {
    type Output = AlphaForm;

    fn add(self, o: &AlphaForm) -> AlphaForm {
        AlphaForm::new(&self.rational + &o.rational, &self.coeff + &o.coeff)
    }
}

impl Sub<&AlphaForm> for &AlphaForm {
    type Output = AlphaForm;

    fn sub(self, o: &AlphaForm) -> AlphaForm {
        AlphaForm::new(&self.rational - &o.rational, &self.coeff - &o.coeff)
    }
}

impl Neg for AlphaForm {
    type Output = AlphaForm;

    fn neg(self) -> AlphaForm {
        AlphaForm::new(-self.rational, -self.coeff)
    }
}

impl Neg for &AlphaForm {
    type Output = AlphaForm;

    fn neg(self) -> AlphaForm {
        -self.clone()
    }
}
