//! Nonnegative extended reals: exact quadratic values, numeric estimates
//! with an error bar, or `+∞`.

use std::cmp::Ordering;
use std::fmt;

use num_rational::BigRational;
use num_traits::{FromPrimitive, Zero};

use crate::quadratic::Quadratic;

#[derive(Clone, Debug, PartialEq)]
pub enum ExtReal {
    Exact(Quadratic),
    Approx { value: f64, err: f64 },
    Infinite,
}

impl ExtReal {
    pub fn zero() -> Self {
        ExtReal::Exact(Quadratic::zero())
    }

    pub fn one() -> Self {
        ExtReal::Exact(Quadratic::one())
    }

    pub fn rational(r: BigRational) -> Self {
        ExtReal::Exact(Quadratic::rational(r))
    }

    pub fn approx(value: f64, err: f64) -> Self {
        ExtReal::Approx { value, err: err.abs() }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtReal::Infinite)
    }

    pub fn is_finite(&self) -> bool {
        !self.is_infinite()
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ExtReal::Exact(_))
    }

    /// True for an exact zero or a numeric estimate that is exactly zero.
    pub fn is_zero(&self) -> bool {
        match self {
            ExtReal::Exact(q) => q.is_zero(),
            ExtReal::Approx { value, err } => *value == 0.0 && *err == 0.0,
            ExtReal::Infinite => false,
        }
    }

    pub fn as_exact(&self) -> Option<&Quadratic> {
        match self {
            ExtReal::Exact(q) => Some(q),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtReal::Exact(q) => q.to_f64(),
            ExtReal::Approx { value, .. } => *value,
            ExtReal::Infinite => f64::INFINITY,
        }
    }

    /// Error bar; zero for exact values and `+∞`.
    pub fn err(&self) -> f64 {
        match self {
            ExtReal::Approx { err, .. } => *err,
            _ => 0.0,
        }
    }

    fn demote(&self) -> (f64, f64) {
        match self {
            ExtReal::Exact(q) => {
                let v = q.to_f64();
                (v, if q.is_rational() { 0.0 } else { v.abs() * 1e-16 })
            }
            ExtReal::Approx { value, err } => (*value, *err),
            ExtReal::Infinite => (f64::INFINITY, 0.0),
        }
    }

    fn exact_or(
        a: &Self,
        b: &Self,
        exact: impl Fn(&Quadratic, &Quadratic) -> Option<Quadratic>,
        approx: impl Fn((f64, f64), (f64, f64)) -> (f64, f64),
    ) -> Self {
        if let (ExtReal::Exact(x), ExtReal::Exact(y)) = (a, b) {
            if let Some(z) = exact(x, y) {
                return ExtReal::Exact(z);
            }
        }
        let (v, e) = approx(a.demote(), b.demote());
        ExtReal::approx(v, e)
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.is_infinite() || o.is_infinite() {
            return ExtReal::Infinite;
        }
        Self::exact_or(self, o, |x, y| x.add(y), |(a, ea), (b, eb)| (a + b, ea + eb))
    }

    pub fn sub(&self, o: &Self) -> Self {
        debug_assert!(o.is_finite(), "subtracting infinity");
        if self.is_infinite() {
            return ExtReal::Infinite;
        }
        Self::exact_or(self, o, |x, y| x.sub(y), |(a, ea), (b, eb)| (a - b, ea + eb))
    }

    /// Product with `∞ · 0 = 0`.
    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return ExtReal::zero();
        }
        if self.is_infinite() || o.is_infinite() {
            return ExtReal::Infinite;
        }
        Self::exact_or(self, o, |x, y| x.mul(y), |(a, ea), (b, eb)| {
            (a * b, a.abs() * eb + b.abs() * ea + ea * eb)
        })
    }

    /// Reciprocal with `0⁻¹ = ∞` and `∞⁻¹ = 0`.
    pub fn recip(&self) -> Self {
        match self {
            ExtReal::Infinite => ExtReal::zero(),
            ExtReal::Exact(q) => q.recip().map_or(ExtReal::Infinite, ExtReal::Exact),
            ExtReal::Approx { value, err } => {
                if *value == 0.0 {
                    ExtReal::Infinite
                } else if value.abs() <= *err {
                    ExtReal::approx(1.0 / value, f64::INFINITY)
                } else {
                    ExtReal::approx(1.0 / value, err / (value.abs() * (value.abs() - err)))
                }
            }
        }
    }

    pub fn div(&self, o: &Self) -> Self {
        self.mul(&o.recip())
    }

    /// Order against another extended real. Exact values in one field are
    /// compared exactly; anything else falls back to `f64` and reports
    /// `None` when the error bars overlap.
    pub fn partial_cmp_ext(&self, o: &Self) -> Option<Ordering> {
        match (self, o) {
            (ExtReal::Infinite, ExtReal::Infinite) => Some(Ordering::Equal),
            (ExtReal::Infinite, _) => Some(Ordering::Greater),
            (_, ExtReal::Infinite) => Some(Ordering::Less),
            (ExtReal::Exact(a), ExtReal::Exact(b)) if a.cmp_exact(b).is_some() => a.cmp_exact(b),
            _ => {
                let (a, ea) = self.demote();
                let (b, eb) = o.demote();
                if (a - b).abs() <= ea + eb {
                    if ea + eb == 0.0 {
                        Some(Ordering::Equal)
                    } else {
                        None
                    }
                } else {
                    a.partial_cmp(&b)
                }
            }
        }
    }

    /// Order against a rational; exact values compare exactly.
    pub fn cmp_rational(&self, r: &BigRational) -> Option<Ordering> {
        match self {
            ExtReal::Exact(q) => Some(q.cmp_rational(r)),
            other => other.partial_cmp_ext(&ExtReal::rational(r.clone())),
        }
    }

    /// Order against an `f64`, taken as the exact binary rational it denotes.
    pub fn cmp_f64(&self, y: f64) -> Option<Ordering> {
        if y.is_infinite() {
            return Some(if self.is_infinite() { Ordering::Equal } else { Ordering::Less });
        }
        let r = BigRational::from_f64(y)?;
        self.cmp_rational(&r)
    }

    pub fn pow(&self, e: i32) -> Self {
        let mut out = ExtReal::one();
        let base = if e < 0 { self.recip() } else { self.clone() };
        for _ in 0..e.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }
}

impl From<Quadratic> for ExtReal {
    fn from(q: Quadratic) -> Self {
        ExtReal::Exact(q)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Infinite => write!(f, "inf"),
            ExtReal::Exact(q) if q.is_rational() && q.rational_part().is_zero() => write!(f, "0"),
            other => write!(f, "{:.12}", other.to_f64()),
        }
    }
}
