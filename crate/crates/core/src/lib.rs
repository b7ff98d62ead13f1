//! Extreme value laws of irrational circle rotations.
//!
//! * [`cf`]: continued fractions with rigorous rational enclosures.
//! * [`quadratic`]: exact arithmetic in real quadratic fields.
//! * [`theory`]: limit profiles, the limiting step law and its companions.
//! * [`sim`]: the rotation itself: arcs `B_k`, the observable, entry times,
//!   finite-k laws and a Monte Carlo maximum sampler.
//! * [`harness`]: run configuration, comparisons and file output for the CLI.

pub mod cf;
pub mod harness;
pub mod quadratic;
pub mod sim;
pub mod theory;
