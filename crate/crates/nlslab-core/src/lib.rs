//! Numerical laboratory for the focusing nonlinear Schrödinger equation
//!
//! ```text
//!     i u_t + Δu + |u|^(p-1) u = 0,    u : R_t × R^d -> C,  d = 1, 2, 3,
//! ```
//!
//! in the intercritical regime where the scaling index s = d/2 - 2/(p-1)
//! lies strictly between 0 and 1.
//!
//! The crate provides, on periodic grids large enough to hold decaying data:
//!
//! * exact parameter bookkeeping for (d, p) and the derived constants
//!   ([`PhysicalParams`]),
//! * ground-state profiles computed by spectrally discretized fixed-point
//!   iteration, with equation and Pohozhaev residuals ([`ground`]),
//! * conserved quantities, renormalized threshold functionals and the
//!   region classifier built on them ([`invariants`], [`classify`]),
//! * a Strang splitting propagator with adaptive stepping and blowup
//!   detection ([`evolve`]),
//! * localized virial quantities, blowup-time bounds, scattering probes and
//!   distance-to-soliton fits ([`diagnostics`]).
//!
//! Fields are stored row-major on uniform periodic grids; all spectral
//! work goes through cached FFT plans in [`spectral::SpectralWorkspace`].

mod classify;
mod error;
mod field;
mod grid;
mod params;
mod random;

pub mod diagnostics;
pub mod evolve;
pub mod ground;
pub mod invariants;
pub mod spectral;

pub use classify::{classify, Classification, ThresholdTolerance};
pub use error::Error;
pub use field::ComplexField;
pub use grid::Grid;
pub use params::PhysicalParams;
pub use random::random_smooth_field;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
