//! Exact continued-fraction arithmetic.
//!
//! An irrational `α = [c_1, c_2, ...]` is never stored as a number. It is a
//! term stream ([`CfSpec`]) plus the rational interval between two
//! consecutive convergents ([`ConvergentTable`]). Quantities that are affine
//! in `α` with rational coefficients ([`AlphaForm`]) can be compared exactly
//! by deepening that interval until the answer is decided.

mod form;
mod interval;
mod spec;
mod table;

pub use form::AlphaForm;
pub use interval::{compare, Comparison, RatInterval};
pub use spec::{CfKind, CfSpec, KSubsequence, DEFAULT_MAX_DEPTH};
pub use table::{build_table, finite_cf, tail_enclosure, term, ConvergentTable};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CfError {
    #[error("requested term {requested} but only {available} are available")]
    DepthExceeded { requested: usize, available: usize },
    #[error("precision exhausted: enclosure still undecided at maximal depth")]
    PrecisionExhausted,
    #[error("invalid continued-fraction spec: {0}")]
    InvalidSpec(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("interval lower endpoint exceeds upper endpoint")]
    InvalidInterval,
    #[error("division by an interval containing zero")]
    DivisionByZero,
    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },
    #[error("partial quotient overflows 64 bits")]
    Overflow,
}
