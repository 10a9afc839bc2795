//! Exact Lebesgue-exponent bookkeeping for the space-time estimates behind
//! the solver.
//!
//! Scattering arguments for the focusing nonlinear Schrödinger equation lean
//! on a small zoo of space-time exponent pairs: mass-level admissible pairs,
//! critical-regularity admissible pairs, their duals, and Hölder splits that
//! factor the nonlinearity across them. Every one of those relations is an
//! identity between rationals, so this crate checks them in exact arithmetic
//! — no floats anywhere. `Rational`/`Exponent` carry the numbers (including
//! an explicit infinity, which genuinely participates: `1/∞ = 0` and the
//! conjugate of 1 is ∞), `pairs` holds the admissibility and acceptability
//! predicates with their per-dimension validity windows, and `catalog`
//! certifies the named pairs and splits for given `(d, p)`.

mod catalog;
mod pairs;
mod rational;

pub use catalog::{
    catalog_pairs, verify_holder_split, CatalogReport, CatalogRow, ClaimedClass, SplitCheck,
    SplitSide,
};
pub use pairs::{
    dual_hs_window, dual_l2_window, hs_window, is_acceptable, is_hs_admissible, is_l2_admissible,
    scaling_matches, ExponentPair, WindowCheck,
};
pub use rational::{Exponent, Rational};

/// Errors from exponent construction and catalog evaluation.
#[derive(Debug, thiserror::Error)]
pub enum ExponentError {
    /// A named exponent's denominator vanishes at the given `(d, p)`, so the
    /// pair it belongs to has no finite value there.
    #[error("degenerate exponent: {0}")]
    DegenerateExponent(String),
    /// Parameters outside the intercritical range the exponent algebra needs.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}
