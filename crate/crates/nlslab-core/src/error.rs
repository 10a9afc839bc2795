use thiserror::Error;

/// Everything that can go wrong in this crate.
///
/// Numerical routines return these instead of panicking; panics are reserved
/// for internal indexing bugs.
#[derive(Debug, Error)]
pub enum Error {
    /// A field contained NaN or infinity where finite data was required.
    #[error("field contains non-finite samples ({context})")]
    NonFiniteField { context: String },

    /// An operation needed strictly positive mass.
    #[error("field has zero (or numerically vanishing) mass")]
    ZeroMass,

    /// Two objects built for different (d, p) or different grids were mixed.
    #[error("parameter mismatch: {0}")]
    ParamMismatch(String),

    /// The exponent pair (d, p) sits at or below the mass-critical point,
    /// i.e. the scaling index satisfies s <= 0.
    #[error("(d, p) = ({d}, {p}) is mass-critical or subcritical: s = {s} <= 0")]
    SubcriticalOrCritical { d: usize, p: f64, s: f64 },

    /// The exponent pair (d, p) sits at or above the energy-critical point,
    /// i.e. the scaling index satisfies s >= 1.
    #[error("(d, p) = ({d}, {p}) is energy-critical or supercritical: s = {s} >= 1")]
    EnergyCriticalOrSuper { d: usize, p: f64, s: f64 },

    /// Invalid grid construction request.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// An iteration (ground-state fixed point, time stepping, root search)
    /// ran out of its budget before meeting its target.
    #[error("did not converge within {iterations} iterations (progress {last_update:.3e}, target {tolerance:.3e})")]
    NoConvergence {
        iterations: usize,
        last_update: f64,
        tolerance: f64,
    },

    /// Fixed-point iteration collapsed to the zero solution.
    #[error("ground-state iteration collapsed towards zero after {iterations} iterations")]
    DivergedToZero { iterations: usize },

    /// A cutoff of radius R needs support [-2R, 2R] inside the box.
    #[error("cutoff radius {radius} needs half-width {needed} but domain half-width is {available}")]
    CutoffExceedsDomain {
        radius: f64,
        needed: f64,
        available: f64,
    },

    /// An operation defined only for nonnegative energy was asked to run on
    /// a negative-energy state.
    #[error("energy {energy:.6e} is negative; quantity undefined")]
    NegativeEnergy { energy: f64 },

    /// The virial-bound modulation parameter left its admissible interval.
    #[error("kappa = {kappa} outside (0, {max}) required by lambda = {lambda}")]
    KappaOutOfRange { kappa: f64, max: f64, lambda: f64 },

    /// The denominator of the blowup-time bound vanished.
    #[error("blowup-bound denominator degenerate: {value:.3e} (lambda = {lambda}, kappa = {kappa})")]
    DegenerateDenominator { value: f64, lambda: f64, kappa: f64 },

    /// A diagnostic that assumes trapping below the soliton threshold was
    /// invoked on data that does not satisfy the hypothesis.
    #[error("threshold hypothesis violated: {0}")]
    HypothesisViolated(String),

    /// A parameter search was given an empty or inverted range.
    #[error("search range empty: {0}")]
    SearchRangeEmpty(String),

    /// A time series had no rows (or lacked the needed column).
    #[error("time series empty or missing required column: {0}")]
    EmptySeries(String),
}
