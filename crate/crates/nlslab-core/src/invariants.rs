//! Conserved quantities of the flow and the renormalized functionals used
//! to compare a state against the soliton threshold.
//!
//! The three conserved quantities are
//!
//! * mass `M = ∫ |u|^2`,
//! * energy `E = 1/2 ∫ |∇u|^2 - 1/(p+1) ∫ |u|^{p+1}`,
//! * momentum `P = Im ∫ conj(u) ∇u`.
//!
//! Renormalized functionals divide out the corresponding soliton values so
//! that the soliton itself sits exactly at 1. The *reduced* variants first
//! remove the center-of-mass motion (`E -> E - |P|^2 / 2M`,
//! `‖∇u‖^2 -> ‖∇u‖^2 - |P|^2 / M`), which makes them invariant under
//! Galilean boosts; classification decisions use only those.

use crate::spectral::SpectralWorkspace;
use crate::{C64, ComplexField, Error, PhysicalParams, Result};

/// Soliton reference values entering every renormalized functional:
/// mass, energy and gradient of the orbit profile at its moment of
/// vanishing phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonNorms {
    pub mass: f64,
    pub energy: f64,
    pub grad_sq: f64,
}

/// `∫ |u|^2`.
pub fn mass(u: &ComplexField) -> f64 {
    u.l2_sq()
}

/// `Im ∫ conj(u) ∇u`, one component per axis.
pub fn momentum(u: &ComplexField, ws: &mut SpectralWorkspace) -> Vec<f64> {
    ws.momentum(u)
}

/// Total energy `1/2 ‖∇u‖^2 - 1/(p+1) ∫ |u|^{p+1}`.
pub fn energy(u: &ComplexField, params: &PhysicalParams, ws: &mut SpectralWorkspace) -> f64 {
    0.5 * ws.grad_l2_sq(u) - u.abs_power_integral(params.p + 1.0) / (params.p + 1.0)
}

/// Everything worth knowing about one state at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantReport {
    pub time_tag: f64,
    pub mass: f64,
    pub energy: f64,
    pub momentum: Vec<f64>,
    /// Euclidean length of the momentum vector.
    pub momentum_norm: f64,
    pub grad_l2_sq: f64,
    /// `∫ |u|^{p+1}` (the potential part of the energy before its prefactor).
    pub potential_integral: f64,
    pub sup_abs: f64,
    /// `‖u‖^{1-s} ‖∇u‖^s` over the same product for the soliton.
    pub renorm_gradient: f64,
    /// `|P|^s ‖u‖^{1-2s}` over the soliton's `‖u_Q‖^{1-s} ‖∇u_Q‖^s`.
    pub renorm_momentum: f64,
    /// `(M/M_Q)^{1-s} (E/E_Q)^s`; `None` when the energy is negative.
    pub renorm_mass_energy: Option<f64>,
    /// Boost-invariant threshold value
    /// `(M/M_Q)^{(1-s)/s} (E - |P|^2/2M) / E_Q`, compared against 1.
    pub reduced_mass_energy: f64,
    /// Boost-invariant gradient value
    /// `(M/M_Q)^{(1-s)/s} (‖∇u‖^2 - |P|^2/M) / ‖∇u_Q‖^2`, compared against 1.
    pub reduced_gradient: f64,
}

/// Compute the full report. Fails on non-finite data, on numerically zero
/// mass, and on a non-positive reference mass.
pub fn invariant_report(
    u: &ComplexField,
    params: &PhysicalParams,
    norms: &SolitonNorms,
    ws: &mut SpectralWorkspace,
) -> Result<InvariantReport> {
    u.ensure_finite("invariant_report")?;
    if u.grid().ndim() != params.d {
        return Err(Error::ParamMismatch(format!(
            "field is {}-dimensional but params say d = {}",
            u.grid().ndim(),
            params.d
        )));
    }
    if !(norms.mass > 0.0 && norms.grad_sq > 0.0 && norms.energy > 0.0) {
        return Err(Error::ParamMismatch(
            "soliton reference norms must be positive".into(),
        ));
    }
    let m = mass(u);
    if m < 1e-300 {
        return Err(Error::ZeroMass);
    }
    let grad = ws.grad_l2_sq(u);
    let pot = u.abs_power_integral(params.p + 1.0);
    let e = 0.5 * grad - pot / (params.p + 1.0);
    let p_vec = ws.momentum(u);
    let p_norm = p_vec.iter().map(|x| x * x).sum::<f64>().sqrt();
    let s = params.s;

    let mass_ratio = m / norms.mass;
    // denominator ‖u_Q‖^{1-s} ‖∇u_Q‖^s shared by the scale-free functionals
    let renorm_gradient =
        mass_ratio.powf((1.0 - s) / 2.0) * (grad / norms.grad_sq).powf(s / 2.0);
    let renorm_momentum = p_norm.powf(s) * m.powf((1.0 - 2.0 * s) / 2.0)
        / (norms.mass.powf((1.0 - s) / 2.0) * norms.grad_sq.powf(s / 2.0));
    let renorm_mass_energy = if e >= 0.0 {
        Some(mass_ratio.powf(1.0 - s) * (e / norms.energy).powf(s))
    } else {
        None
    };
    let reduction = mass_ratio.powf((1.0 - s) / s);
    let reduced_mass_energy = reduction * (e - p_norm * p_norm / (2.0 * m)) / norms.energy;
    let reduced_gradient = reduction * (grad - p_norm * p_norm / m) / norms.grad_sq;

    Ok(InvariantReport {
        time_tag: u.time_tag(),
        mass: m,
        energy: e,
        momentum: p_vec,
        momentum_norm: p_norm,
        grad_l2_sq: grad,
        potential_integral: pot,
        sup_abs: u.sup_abs(),
        renorm_gradient,
        renorm_momentum,
        renorm_mass_energy,
        reduced_mass_energy,
        reduced_gradient,
    })
}

/// The two-sided bound that every state must satisfy: with
/// `g = reduced_gradient` and `e = reduced_mass_energy`,
///
/// ```text
///     line(g^{s/2}) <= e <= (d/2s) g,
/// ```
///
/// where `line` is the threshold line [`crate::diagnostics::mass_energy_line`].
/// The lower bound is the sharp interpolation inequality (soliton rescalings
/// saturate it); the upper is `E <= ‖∇u‖^2 / 2`. Violations beyond quadrature
/// error mean the report is inconsistent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdBounds {
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
}

impl ThresholdBounds {
    /// Largest violation of `lower <= value <= upper`, relative to the
    /// scale of the three numbers; exactly 0 when the chain holds.
    pub fn violation(&self) -> f64 {
        let scale = self
            .lower
            .abs()
            .max(self.value.abs())
            .max(self.upper.abs())
            .max(1.0);
        ((self.lower - self.value).max(0.0)).max((self.value - self.upper).max(0.0)) / scale
    }
}

/// Evaluate the two-sided threshold bound for a report.
pub fn threshold_bounds(report: &InvariantReport, params: &PhysicalParams) -> ThresholdBounds {
    let g = report.reduced_gradient.max(0.0);
    let lambda = g.powf(params.s / 2.0);
    ThresholdBounds {
        lower: crate::diagnostics::mass_energy_line(lambda, params),
        value: report.reduced_mass_energy,
        upper: params.d_over_2s() * g,
    }
}

/// Apply the Galilean boost `u -> e^{i x·xi} u`: mass is unchanged,
/// momentum gains `xi M`, energy gains `|xi|^2 M / 2 + xi·P`.
///
/// On the periodic box the multiplier is smooth across the boundary only
/// for lattice frequencies `xi_a ∈ (pi / L_a) Z`; other values are allowed
/// but introduce a wrap-around discontinuity weighted by the field's decay
/// at the boundary.
pub fn galilean_boost(u: &ComplexField, xi: &[f64]) -> Result<ComplexField> {
    if xi.len() != u.grid().ndim() {
        return Err(Error::ParamMismatch(format!(
            "boost has {} components for a {}-dimensional field",
            xi.len(),
            u.grid().ndim()
        )));
    }
    let mut out = u.clone();
    u.grid().for_each_point(|flat, x| {
        let phase: f64 = x.iter().zip(xi).map(|(a, b)| a * b).sum();
        out.values_mut()[flat] = u.values()[flat] * C64::from_polar(1.0, phase);
    });
    Ok(out)
}

/// Boost to the rest frame: `xi = -P/M`, killing the momentum and lowering
/// the energy by exactly `|P|^2 / 2M`. Returns the boosted field and the
/// boost frequency used.
pub fn zero_momentum_boost(
    u: &ComplexField,
    ws: &mut SpectralWorkspace,
) -> Result<(ComplexField, Vec<f64>)> {
    u.ensure_finite("zero_momentum_boost")?;
    let m = mass(u);
    if m < 1e-300 {
        return Err(Error::ZeroMass);
    }
    let p = ws.momentum(u);
    let xi: Vec<f64> = p.iter().map(|pa| -pa / m).collect();
    let boosted = galilean_boost(u, &xi)?;
    Ok((boosted, xi))
}
