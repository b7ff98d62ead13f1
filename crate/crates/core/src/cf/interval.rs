//! Closed intervals with exact rational endpoints.
//!
//! Every operation is exact, so an interval computed from rigorous inputs is
//! itself a rigorous enclosure. There is no rounding to widen against.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::CfError;

/// Outcome of comparing two enclosures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Comparison {
    Less,
    Greater,
    /// The enclosures overlap; the caller must refine and retry.
    Undecided,
}

/// A closed interval `[lo, hi]` with arbitrary-precision rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatInterval {
    lo: BigRational,
    hi: BigRational,
}

impl RatInterval {
    /// Builds `[lo, hi]`, returning an error when `lo > hi`.
    pub fn new(lo: BigRational, hi: BigRational) -> Result<Self, CfError> {
        if lo > hi {
            return Err(CfError::InvalidInterval);
        }
        Ok(Self { lo, hi })
    }

    /// Builds the interval spanned by two endpoints given in either order.
    pub fn spanning(a: BigRational, b: BigRational) -> Self {
        if a <= b {
            Self { lo: a, hi: b }
        } else {
            Self { lo: b, hi: a }
        }
    }

    /// `[lo, hi]` for endpoints already known to be in order.
    pub(crate) fn ordered(lo: BigRational, hi: BigRational) -> Self {
        debug_assert!(lo <= hi);
        Self { lo, hi }
    }

    pub fn point(x: BigRational) -> Self {
        Self {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn from_integer(n: i64) -> Self {
        Self::point(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Self::point(BigRational::zero())
    }

    pub fn one() -> Self {
        Self::point(BigRational::one())
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(BigInt::from(2))
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn overlaps(&self, other: &RatInterval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// `Less` iff `self.hi < other.lo`, `Greater` iff `self.lo > other.hi`.
    pub fn compare(&self, other: &RatInterval) -> Comparison {
        if self.hi < other.lo {
            Comparison::Less
        } else if self.lo > other.hi {
            Comparison::Greater
        } else {
            Comparison::Undecided
        }
    }

    pub fn abs(&self) -> Self {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            -self.clone()
        } else {
            let m = if -&self.lo > self.hi {
                -&self.lo
            } else {
                self.hi.clone()
            };
            Self {
                lo: BigRational::zero(),
                hi: m,
            }
        }
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        Self::spanning(&self.lo * k, &self.hi * k)
    }

    pub fn scale_int(&self, k: &BigInt) -> Self {
        self.scale(&BigRational::from_integer(k.clone()))
    }

    pub fn shift(&self, k: &BigRational) -> Self {
        Self {
            lo: &self.lo + k,
            hi: &self.hi + k,
        }
    }

    /// Interval quotient; fails when the divisor encloses zero.
    pub fn checked_div(&self, other: &RatInterval) -> Result<Self, CfError> {
        if other.contains_zero() {
            return Err(CfError::DivisionByZero);
        }
        let inv = Self::spanning(other.lo.recip(), other.hi.recip());
        Ok(self * &inv)
    }

    pub fn to_f64(&self) -> f64 {
        self.midpoint().to_f64().unwrap_or(f64::NAN)
    }

    pub fn width_f64(&self) -> f64 {
        self.width().to_f64().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for RatInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{:.17e}, {:.17e}]",
            self.lo.to_f64().unwrap_or(f64::NAN),
            self.hi.to_f64().unwrap_or(f64::NAN)
        )
    }
}

impl Neg for RatInterval {
    type Output = RatInterval;

    fn neg(self) -> RatInterval {
        RatInterval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Add<&RatInterval> for &RatInterval {
    type Output = RatInterval;

    fn add(self, other: &RatInterval) -> RatInterval {
        RatInterval {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }
}

impl Sub<&RatInterval> for &RatInterval {
    type Output = RatInterval;

    fn sub(self, other: &RatInterval) -> RatInterval {
        RatInterval {
            lo: &self.lo - &other.hi,
            hi: &self.hi - &other.lo,
        }
    }
}

impl Mul<&RatInterval> for &RatInterval {
    type Output = RatInterval;

    fn mul(self, other: &RatInterval) -> RatInterval {
        let products = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let mut lo = products[0].clone();
        let mut hi = products[0].clone();
        for p in &products[1..] {
            if *p < lo {
                lo = p.clone();
            }
            if *p > hi {
                hi = p.clone();
            }
        }
        RatInterval { lo, hi }
    }
}

/// Compares two enclosures.
pub fn compare(a: &RatInterval, b: &RatInterval) -> Comparison {
    a.compare(b)
}
