//! The rotation `x ↦ x + α mod 1`: arcs `B_k`, the observable, entry times,
//! finite-k laws and Monte Carlo maxima.

mod circle;
mod empirical;
mod entry;
mod maximum;

pub use circle::{b_arc, exit_level, floor_form, observable_x, return_time, Arc, ArcSet, CirclePoint};
pub use empirical::{empirical_survival, sample_point, EmpiricalSurvival, SamplingOptions};
pub use entry::{
    arcset_entry_form, arcset_entry_oracle, arcset_entry_sweep, entry_cdf_exact, entry_cdf_form, finite_k_survival,
    finite_k_survival_form, oracle_budget, EntrySweep, DEFAULT_ORACLE_BUDGET, ORACLE_BUDGET_ENV,
};
pub use maximum::{sample_maximum, MaxSample, MaximumSampler};

use thiserror::Error;

use crate::cf::CfError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Cf(#[from] CfError),
    #[error("x = 0 lies in every B_l; the observable is undefined there")]
    AtOrigin,
    #[error("point is not in B_{k}")]
    NotInArc { k: usize },
    #[error("q_k * y = q_{m} for y = {y}: a breakpoint of the finite-k law")]
    BreakpointHit { y: f64, m: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("oracle budget exceeded: {needed} arcs needed, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl SimError {
    /// Whether the error stems from running out of precision or depth.
    pub fn is_precision(&self) -> bool {
        matches!(
            self,
            SimError::Cf(CfError::PrecisionExhausted) | SimError::Cf(CfError::DepthExceeded { .. })
        )
    }
}
