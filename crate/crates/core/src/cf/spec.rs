//! Rules that generate partial quotients, and their text form.
//!
//! Grammar (whitespace is ignored):
//!
//! ```text
//! spec    := kind ':' args ( ';' option )*
//! kind    := "periodic" | "block" | "explicit" | "affine"
//! periodic args := [ list '/' ] list      preperiod / period, e.g. "1" or "3,1/1,2"
//! block args    := N                      N-1 ones then 2, N-1 ones then 3, ...
//! explicit args := list                   a finite prefix, e.g. "1,1,2,1,1,3"
//! affine args   := a ',' b                c_n = a*n + b
//! option  := "K=" kset | "depth=" integer
//! kset    := "all" | "ap:" step ':' offset | "list:" list
//! list    := integer ( ',' integer )*
//! ```
//!
//! Without a `K=` option the subsequence defaults to the one along which the
//! built-in families have limits: multiples of the period for periodic specs,
//! multiples of `N` for `block:N`, and every index otherwise.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::CfError;

/// Default budget on generated partial quotients.
pub const DEFAULT_MAX_DEPTH: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CfKind {
    /// A finite prefix of an (unknown) irrational expansion.
    Explicit(Vec<u64>),
    EventuallyPeriodic { preperiod: Vec<u64>, period: Vec<u64> },
    /// `N-1` ones then 2, `N-1` ones then 3, and so on.
    BlockFamily(u64),
    /// `c_n = slope * n + offset`.
    Affine { slope: u64, offset: u64 },
}

/// The index set `K` along which limits are taken.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KSubsequence {
    All,
    Arithmetic { step: usize, offset: usize },
    List(Vec<usize>),
}

impl KSubsequence {
    pub fn contains(&self, k: usize) -> bool {
        match self {
            KSubsequence::All => true,
            KSubsequence::Arithmetic { step, offset } => k >= *offset && (k - offset) % step == 0,
            KSubsequence::List(ks) => ks.contains(&k),
        }
    }

    /// Members of `K` in `lo..=hi`, ascending.
    pub fn members_in(&self, lo: usize, hi: usize) -> Vec<usize> {
        if lo > hi {
            return Vec::new();
        }
        match self {
            KSubsequence::List(ks) => {
                let mut v: Vec<usize> = ks.iter().copied().filter(|k| (lo..=hi).contains(k)).collect();
                v.sort_unstable();
                v.dedup();
                v
            }
            _ => (lo..=hi).filter(|&k| self.contains(k)).collect(),
        }
    }
}

impl fmt::Display for KSubsequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KSubsequence::All => write!(f, "all"),
            KSubsequence::Arithmetic { step, offset } => write!(f, "ap:{step}:{offset}"),
            KSubsequence::List(ks) => write!(f, "list:{}", join(ks)),
        }
    }
}

/// A partial-quotient rule together with its limit subsequence and depth budget.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CfSpec {
    pub kind: CfKind,
    pub k_subsequence: KSubsequence,
    pub max_depth: usize,
}

impl CfSpec {
    /// Builds a spec with the default subsequence and depth budget for `kind`.
    pub fn new(kind: CfKind) -> Result<Self, CfError> {
        let k_subsequence = default_subsequence(&kind);
        let spec = Self {
            kind,
            k_subsequence,
            max_depth: DEFAULT_MAX_DEPTH,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn periodic(period: &[u64]) -> Self {
        Self::new(CfKind::EventuallyPeriodic {
            preperiod: Vec::new(),
            period: period.to_vec(),
        })
        .expect("periodic spec with positive quotients")
    }

    /// `[c, c, c, ...]`.
    pub fn constant(c: u64) -> Self {
        Self::periodic(&[c])
    }

    pub fn block(n: u64) -> Self {
        Self::new(CfKind::BlockFamily(n)).expect("block length at least one")
    }

    pub fn affine(slope: u64, offset: u64) -> Self {
        Self::new(CfKind::Affine { slope, offset }).expect("affine rule with positive quotients")
    }

    pub fn explicit(terms: &[u64]) -> Result<Self, CfError> {
        Self::new(CfKind::Explicit(terms.to_vec()))
    }

    pub fn with_subsequence(mut self, k: KSubsequence) -> Result<Self, CfError> {
        self.k_subsequence = k;
        self.validate()?;
        Ok(self)
    }

    pub fn with_max_depth(mut self, depth: usize) -> Result<Self, CfError> {
        self.max_depth = depth;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<(), CfError> {
        if self.max_depth == 0 {
            return Err(CfError::InvalidSpec("max depth must be positive".into()));
        }
        match &self.kind {
            CfKind::Explicit(terms) => {
                if terms.is_empty() {
                    return Err(CfError::InvalidSpec("explicit list must not be empty".into()));
                }
                if terms.contains(&0) {
                    return Err(CfError::InvalidSpec("partial quotients must be positive".into()));
                }
            }
            CfKind::EventuallyPeriodic { preperiod, period } => {
                if period.is_empty() {
                    return Err(CfError::InvalidSpec("period must not be empty".into()));
                }
                if preperiod.contains(&0) || period.contains(&0) {
                    return Err(CfError::InvalidSpec("partial quotients must be positive".into()));
                }
            }
            CfKind::BlockFamily(n) => {
                if *n == 0 {
                    return Err(CfError::InvalidSpec("block length must be at least 1".into()));
                }
            }
            CfKind::Affine { slope, offset } => {
                if *slope == 0 && *offset == 0 {
                    return Err(CfError::InvalidSpec("affine rule with slope 0 needs offset >= 1".into()));
                }
            }
        }
        match &self.k_subsequence {
            KSubsequence::Arithmetic { step, .. } if *step == 0 => {
                Err(CfError::InvalidSpec("subsequence step must be positive".into()))
            }
            KSubsequence::List(ks) if ks.is_empty() => {
                Err(CfError::InvalidSpec("subsequence list must not be empty".into()))
            }
            _ => Ok(()),
        }
    }

    /// Number of partial quotients this spec can supply.
    pub fn available_terms(&self) -> usize {
        match &self.kind {
            CfKind::Explicit(terms) => terms.len().min(self.max_depth),
            _ => self.max_depth,
        }
    }

    /// The partial quotient `c_i`, 1-based.
    pub fn term(&self, i: usize) -> Result<u64, CfError> {
        if i == 0 {
            return Err(CfError::IndexOutOfRange { index: 0, limit: self.available_terms() });
        }
        if i > self.available_terms() {
            return Err(CfError::DepthExceeded {
                requested: i,
                available: self.available_terms(),
            });
        }
        let c = match &self.kind {
            CfKind::Explicit(terms) => terms[i - 1],
            CfKind::EventuallyPeriodic { preperiod, period } => {
                if i <= preperiod.len() {
                    preperiod[i - 1]
                } else {
                    period[(i - 1 - preperiod.len()) % period.len()]
                }
            }
            CfKind::BlockFamily(n) => {
                let n = *n as usize;
                let block = (i - 1) / n;
                if (i - 1) % n < n - 1 {
                    1
                } else {
                    block as u64 + 2
                }
            }
            CfKind::Affine { slope, offset } => slope
                .checked_mul(i as u64)
                .and_then(|v| v.checked_add(*offset))
                .ok_or(CfError::Overflow)?,
        };
        Ok(c)
    }

    /// `c_1..=c_n`.
    pub fn terms(&self, n: usize) -> Result<Vec<u64>, CfError> {
        (1..=n).map(|i| self.term(i)).collect()
    }
}

fn default_subsequence(kind: &CfKind) -> KSubsequence {
    match kind {
        CfKind::EventuallyPeriodic { period, .. } if period.len() > 1 => KSubsequence::Arithmetic {
            step: period.len(),
            offset: 0,
        },
        CfKind::BlockFamily(n) if *n > 1 => KSubsequence::Arithmetic {
            step: *n as usize,
            offset: 0,
        },
        _ => KSubsequence::All,
    }
}

fn join<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for CfSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            CfKind::Explicit(terms) => write!(f, "explicit:{}", join(terms))?,
            CfKind::EventuallyPeriodic { preperiod, period } => {
                if preperiod.is_empty() {
                    write!(f, "periodic:{}", join(period))?
                } else {
                    write!(f, "periodic:{}/{}", join(preperiod), join(period))?
                }
            }
            CfKind::BlockFamily(n) => write!(f, "block:{n}")?,
            CfKind::Affine { slope, offset } => write!(f, "affine:{slope},{offset}")?,
        }
        if self.k_subsequence != default_subsequence(&self.kind) {
            write!(f, ";K={}", self.k_subsequence)?;
        }
        if self.max_depth != DEFAULT_MAX_DEPTH {
            write!(f, ";depth={}", self.max_depth)?;
        }
        Ok(())
    }
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, CfError> {
    s.split(',')
        .map(|t| {
            t.parse::<T>()
                .map_err(|_| CfError::Parse(format!("expected an integer, found '{t}'")))
        })
        .collect()
}

fn parse_subsequence(s: &str) -> Result<KSubsequence, CfError> {
    if s == "all" {
        return Ok(KSubsequence::All);
    }
    if let Some(rest) = s.strip_prefix("ap:") {
        let parts: Vec<usize> = rest
            .split(':')
            .map(|t| t.parse().map_err(|_| CfError::Parse(format!("bad subsequence '{s}'"))))
            .collect::<Result<_, _>>()?;
        return match parts.as_slice() {
            [step] => Ok(KSubsequence::Arithmetic { step: *step, offset: 0 }),
            [step, offset] => Ok(KSubsequence::Arithmetic {
                step: *step,
                offset: *offset,
            }),
            _ => Err(CfError::Parse(format!("bad subsequence '{s}'"))),
        };
    }
    if let Some(rest) = s.strip_prefix("list:") {
        return Ok(KSubsequence::List(parse_list(rest)?));
    }
    Err(CfError::Parse(format!("unknown subsequence '{s}'")))
}

impl FromStr for CfSpec {
    type Err = CfError;

    fn from_str(text: &str) -> Result<Self, CfError> {
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut sections = compact.split(';');
        let head = sections.next().unwrap_or_default();
        let (kind, args) = head
            .split_once(':')
            .ok_or_else(|| CfError::Parse(format!("expected '<kind>:<args>', found '{head}'")))?;
        let kind = match kind {
            "periodic" => match args.split_once('/') {
                Some((pre, period)) => CfKind::EventuallyPeriodic {
                    preperiod: parse_list(pre)?,
                    period: parse_list(period)?,
                },
                None => CfKind::EventuallyPeriodic {
                    preperiod: Vec::new(),
                    period: parse_list(args)?,
                },
            },
            "block" => CfKind::BlockFamily(
                args.parse()
                    .map_err(|_| CfError::Parse(format!("bad block length '{args}'")))?,
            ),
            "explicit" => CfKind::Explicit(parse_list(args)?),
            "affine" => match parse_list::<u64>(args)?.as_slice() {
                [slope, offset] => CfKind::Affine {
                    slope: *slope,
                    offset: *offset,
                },
                _ => return Err(CfError::Parse("affine needs 'slope,offset'".into())),
            },
            other => return Err(CfError::Parse(format!("unknown kind '{other}'"))),
        };
        let mut spec = CfSpec::new(kind)?;
        for option in sections.filter(|s| !s.is_empty()) {
            if let Some(k) = option.strip_prefix("K=") {
                spec = spec.with_subsequence(parse_subsequence(k)?)?;
            } else if let Some(d) = option.strip_prefix("depth=") {
                let d = d
                    .parse()
                    .map_err(|_| CfError::Parse(format!("bad depth '{d}'")))?;
                spec = spec.with_max_depth(d)?;
            } else {
                return Err(CfError::Parse(format!("unknown option '{option}'")));
            }
        }
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn term_examples() {
        assert_eq!(CfSpec::constant(1).term(5).unwrap(), 1);
        let b3 = CfSpec::block(3);
        assert_eq!(b3.term(3).unwrap(), 2);
        assert_eq!(b3.term(6).unwrap(), 3);
        assert_eq!(b3.terms(9).unwrap(), vec![1, 1, 2, 1, 1, 3, 1, 1, 4]);
        assert_eq!(CfSpec::affine(1, 1).term(1).unwrap(), 2);
        assert_eq!(CfSpec::block(1).terms(4).unwrap(), vec![2, 3, 4, 5]);
    }

    #[test]
    fn explicit_queries_past_the_list_fail() {
        let s = CfSpec::explicit(&[1, 2, 3]).unwrap();
        assert_eq!(s.term(3).unwrap(), 3);
        assert!(matches!(s.term(4), Err(CfError::DepthExceeded { requested: 4, available: 3 })));
        assert!(CfSpec::explicit(&[]).is_err());
        assert!(CfSpec::explicit(&[1, 0]).is_err());
    }

    #[test]
    fn preperiod_then_period() {
        let s: CfSpec = "periodic:3,1/1,2".parse().unwrap();
        assert_eq!(s.terms(7).unwrap(), vec![3, 1, 1, 2, 1, 2, 1]);
        assert_eq!(s.k_subsequence, KSubsequence::Arithmetic { step: 2, offset: 0 });
    }

    #[test]
    fn parse_and_display() {
        for text in [
            "periodic:1",
            "periodic:2",
            "block:3",
            "explicit:1,1,2,1,1,3",
            "affine:1,1",
            "periodic:1;K=ap:2:1",
            "block:4;K=list:4,8,12;depth=100",
        ] {
            let spec: CfSpec = text.parse().unwrap();
            assert_eq!(spec.to_string(), text);
        }
        assert_eq!(
            "block:3".parse::<CfSpec>().unwrap().k_subsequence,
            KSubsequence::Arithmetic { step: 3, offset: 0 }
        );
        assert!("affine:0,0".parse::<CfSpec>().is_err());
        assert!("block:0".parse::<CfSpec>().is_err());
        assert!("spiral:1".parse::<CfSpec>().is_err());
        assert!("periodic:1;K=ap:0".parse::<CfSpec>().is_err());
    }

    #[test]
    fn subsequence_members() {
        let k = KSubsequence::Arithmetic { step: 3, offset: 0 };
        assert_eq!(k.members_in(1, 10), vec![3, 6, 9]);
        assert_eq!(KSubsequence::List(vec![9, 2, 5]).members_in(3, 9), vec![5, 9]);
    }
}
