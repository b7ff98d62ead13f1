//! Limit profiles and the limiting extreme value law.

mod ext;
mod phi;
mod profile;
mod survival;

pub use ext::ExtReal;
pub use phi::{
    fixed_point_check, g_value, phi_y, qk_eta_limit, FixedPointReport, PiecewiseLinearCDF, FIXED_POINT_TOL,
};
pub use profile::{
    profile_analytic, profile_numeric, purely_periodic_value, LimitProfile, NumericDiagnostics, Provenance,
    DEFAULT_NUMERIC_TOL,
};
pub use survival::{constant_type_alpha, constant_type_survival, limiting_survival, StepSurvival, Tail};

use thiserror::Error;

use crate::cf::CfError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TheoryError {
    #[error("unsupported spec: {0}")]
    UnsupportedSpec(String),
    #[error("insufficient depth: {0}")]
    InsufficientDepth(String),
    #[error("profile incomplete: {0}")]
    ProfileIncomplete(String),
    #[error("inconsistent profile: {0}")]
    InconsistentProfile(String),
    #[error("y = {y} coincides with the breakpoint γ_{j}")]
    BreakpointHit { y: f64, j: usize },
    #[error("out of scope: {0}")]
    OutOfScope(String),
    #[error(transparent)]
    Cf(#[from] CfError),
}
