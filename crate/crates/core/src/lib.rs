//! Numerical laboratory for relevant random sampling in shift-invariant spaces.
//!
//! Builds V(Φ) from a catalog of generators, computes the frame, sup-norm,
//! Plancherel–Polya and decay constants, the spectrum of the localization
//! operator `P_Φ Q_R P_Φ`, and runs seeded Monte Carlo checks of the sampling
//! inequality and its concentration bounds.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli_report;
pub mod constants;
pub mod error;
pub mod localization;
pub mod par;
pub mod rng;
pub mod sampling;
pub mod si_space;

pub use error::{Error, Result};
pub use par::Execution;
