//! Localized virial quantities, the threshold line, blowup-time bounds and
//! distance-to-soliton modulation fits.
//!
//! The virial machinery rests on a radial cutoff `φ` that equals `r^2` on
//! the unit ball, decreases C²-smoothly across `1 < r < 2` and vanishes
//! beyond. Its weights are returned *exactly* (`0`, `2`, `2d`, ...) inside
//! the ball, so the localized second derivative decomposes into the
//! full-space identity plus a remainder supported strictly outside radius
//! `R` — to rounding, not just to quadrature error.

use crate::evolve::TimeSeries;
use crate::ground::GroundStateProfile;
use crate::invariants::InvariantReport;
use crate::spectral::SpectralWorkspace;
use crate::{C64, ComplexField, Error, Grid, PhysicalParams, Result};

/// Largest admissible modulation parameter in the blowup-time bound.
pub const DEFAULT_KAPPA_CAP: f64 = 0.1;

/// Radial cutoff for localized variance: `φ(ρ) = ρ^2` for `ρ <= 1`, a
/// quintic shoulder `h(ρ-1) = (2-ρ)^3 (13(ρ-1)^2 + 5(ρ-1) + 1)` on
/// `1 < ρ < 2`, and `0` beyond. The factored form makes `φ >= 0` obvious;
/// values and first two derivatives match at both joins.
pub struct CutoffFunction;

impl CutoffFunction {
    /// Outer edge of the support, in units of the cutoff radius.
    pub const SUPPORT: f64 = 2.0;

    // shoulder polynomial h(t) = 1 + 2t + t^2 - 25t^3 + 34t^4 - 13t^5 and
    // its derivatives, t = ρ - 1 ∈ (0, 1)
    fn h(t: f64) -> f64 {
        let w = 1.0 - t;
        w * w * w * (13.0 * t * t + 5.0 * t + 1.0)
    }
    fn h1(t: f64) -> f64 {
        2.0 + t * (2.0 + t * (-75.0 + t * (136.0 - 65.0 * t)))
    }
    fn h2(t: f64) -> f64 {
        2.0 + t * (-150.0 + t * (408.0 - 260.0 * t))
    }
    fn h3(t: f64) -> f64 {
        -150.0 + t * (816.0 - 780.0 * t)
    }
    fn h4(t: f64) -> f64 {
        816.0 - 1560.0 * t
    }

    pub fn value(rho: f64) -> f64 {
        if rho <= 1.0 {
            rho * rho
        } else if rho < 2.0 {
            Self::h(rho - 1.0)
        } else {
            0.0
        }
    }

    pub fn deriv(rho: f64) -> f64 {
        if rho <= 1.0 {
            2.0 * rho
        } else if rho < 2.0 {
            Self::h1(rho - 1.0)
        } else {
            0.0
        }
    }

    pub fn second_deriv(rho: f64) -> f64 {
        if rho <= 1.0 {
            2.0
        } else if rho < 2.0 {
            Self::h2(rho - 1.0)
        } else {
            0.0
        }
    }

    /// Hessian weights of `x -> R^2 φ(|x|/R)`: the quadratic form on a
    /// gradient splits as `c_off |x̂·∇u|^2 + c_diag |∇u|^2` with
    /// `c_off = φ'' - φ'/ρ` and `c_diag = φ'/ρ`. Exactly `(0, 2)` on the
    /// unit ball.
    pub fn hessian_factors(rho: f64) -> (f64, f64) {
        if rho <= 1.0 {
            (0.0, 2.0)
        } else if rho < 2.0 {
            let t = rho - 1.0;
            let fp = Self::h1(t);
            (Self::h2(t) - fp / rho, fp / rho)
        } else {
            (0.0, 0.0)
        }
    }

    /// `Δ_x [φ(|x|)] = φ'' + (d-1) φ'/ρ`; exactly `2d` on the unit ball.
    pub fn laplacian(rho: f64, d: usize) -> f64 {
        if rho <= 1.0 {
            2.0 * d as f64
        } else if rho < 2.0 {
            let t = rho - 1.0;
            Self::h2(t) + (d as f64 - 1.0) * Self::h1(t) / rho
        } else {
            0.0
        }
    }

    /// `Δ^2_x [φ(|x|)]`; exactly `0` on the unit ball and outside the support.
    pub fn bilaplacian(rho: f64, d: usize) -> f64 {
        if rho <= 1.0 || rho >= 2.0 {
            0.0
        } else {
            let t = rho - 1.0;
            let df = d as f64;
            Self::h4(t)
                + 2.0 * (df - 1.0) * Self::h3(t) / rho
                + (df - 1.0) * (df - 3.0) * (Self::h2(t) / (rho * rho) - Self::h1(t) / (rho * rho * rho))
        }
    }
}

fn check_cutoff_fits(grid: &Grid, radius: f64) -> Result<()> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::ParamMismatch(format!(
            "cutoff radius must be positive and finite, got {radius}"
        )));
    }
    let needed = CutoffFunction::SUPPORT * radius;
    let available = grid.min_extent();
    if needed > available {
        return Err(Error::CutoffExceedsDomain {
            radius,
            needed,
            available,
        });
    }
    Ok(())
}

/// The scaled mass-energy of the soliton family along the gradient axis:
///
/// ```text
///     line(λ) = λ^{2/s} ( (d/2s)(1 - λ^{p-1}) + λ^{p-1} ).
/// ```
///
/// Its maximum over λ > 0 is exactly 1, attained at λ = 1 (the soliton);
/// the value is strictly decreasing for λ > 1 and runs off to -∞.
pub fn mass_energy_line(lambda: f64, params: &PhysicalParams) -> f64 {
    let lp = lambda.powf(params.p - 1.0);
    lambda.powf(2.0 / params.s) * (params.d_over_2s() * (1.0 - lp) + lp)
}

/// The unique `λ >= 1` with `mass_energy_line(λ) = ratio`, for `ratio <= 1`.
/// Bisection on the strictly decreasing branch; the result inverts the line
/// to about machine precision.
pub fn lambda_for_energy_ratio(ratio: f64, params: &PhysicalParams) -> Result<f64> {
    if !ratio.is_finite() || ratio > 1.0 {
        return Err(Error::SearchRangeEmpty(format!(
            "energy ratio {ratio} is above the line maximum 1 (or not finite)"
        )));
    }
    let mut hi = 2.0;
    while mass_energy_line(hi, params) > ratio {
        hi *= 1.5;
        if hi > 1e9 {
            return Err(Error::SearchRangeEmpty(format!(
                "no λ <= 1e9 reaches energy ratio {ratio}"
            )));
        }
    }
    let mut lo = 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass_energy_line(mid, params) > ratio {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `z = R^2 ∫ φ(x/R) |u|^2` and its flow derivative
/// `z' = 2 Im ∫ conj(u) ∇[R^2 φ(x/R)]·∇u`. Inside radius `R` the weights
/// are exactly `r^2` and `2x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizedVariance {
    pub z: f64,
    pub z_prime: f64,
}

pub fn localized_variance(
    u: &ComplexField,
    radius: f64,
    ws: &mut SpectralWorkspace,
) -> Result<LocalizedVariance> {
    u.ensure_finite("localized variance")?;
    check_cutoff_fits(u.grid(), radius)?;
    let grads = ws.gradient(u);
    let gvals: Vec<&[C64]> = grads.iter().map(|g| g.values()).collect();
    let uv = u.values();
    let mut z = 0.0f64;
    let mut zp = 0.0f64;
    u.grid().for_each_point(|flat, x| {
        let r2: f64 = x.iter().map(|a| a * a).sum();
        let r = r2.sqrt();
        if r >= CutoffFunction::SUPPORT * radius {
            return;
        }
        let a2 = uv[flat].norm_sqr();
        if r <= radius {
            z += r2 * a2;
            for (xa, g) in x.iter().zip(&gvals) {
                zp += 4.0 * xa * (uv[flat].conj() * g[flat]).im;
            }
        } else {
            let rho = r / radius;
            z += radius * radius * CutoffFunction::value(rho) * a2;
            let w = 2.0 * radius * CutoffFunction::deriv(rho) / r;
            for (xa, g) in x.iter().zip(&gvals) {
                zp += w * xa * (uv[flat].conj() * g[flat]).im;
            }
        }
    });
    let cell = u.grid().cell_volume();
    Ok(LocalizedVariance {
        z: z * cell,
        z_prime: zp * cell,
    })
}

/// The localized virial right-hand side, split so the localization cost is
/// visible:
///
/// ```text
///     z'' = 8 ‖∇u‖^2 - (4d(p-1)/(p+1)) ∫|u|^{p+1} + A_R,
/// ```
///
/// where `A_R` (the `remainder`) collects every cutoff correction and is
/// supported strictly outside radius `R` — its weights vanish identically
/// on the ball, so a state supported inside sees the full-space identity
/// exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VirialDecomposition {
    pub z_dprime: f64,
    /// `8 ‖∇u‖^2`.
    pub gradient_part: f64,
    /// `-(4d(p-1)/(p+1)) ∫ |u|^{p+1}`.
    pub potential_part: f64,
    /// Everything the cutoff changes relative to full space.
    pub remainder: f64,
}

pub fn virial_rhs(
    u: &ComplexField,
    params: &PhysicalParams,
    radius: f64,
    ws: &mut SpectralWorkspace,
) -> Result<VirialDecomposition> {
    u.ensure_finite("virial identity")?;
    if u.grid().ndim() != params.d {
        return Err(Error::ParamMismatch(format!(
            "field is {}-dimensional but params say d = {}",
            u.grid().ndim(),
            params.d
        )));
    }
    check_cutoff_fits(u.grid(), radius)?;
    let grads = ws.gradient(u);
    let gvals: Vec<&[C64]> = grads.iter().map(|g| g.values()).collect();
    let uv = u.values();
    let d = params.d as f64;
    let p = params.p;
    let half_pot_exp = (p + 1.0) / 2.0;

    let mut grad_full = 0.0f64;
    let mut corr_grad = 0.0f64;
    let mut corr_bi = 0.0f64;
    let mut corr_pot = 0.0f64;
    u.grid().for_each_point(|flat, x| {
        let mut g2 = 0.0f64;
        for g in &gvals {
            g2 += g[flat].norm_sqr();
        }
        grad_full += g2;
        let r2: f64 = x.iter().map(|a| a * a).sum();
        let r = r2.sqrt();
        if r <= radius {
            return; // every correction weight is exactly zero here
        }
        let a2 = uv[flat].norm_sqr();
        let rho = r / radius;
        if rho < CutoffFunction::SUPPORT {
            let (c_off, c_diag) = CutoffFunction::hessian_factors(rho);
            let mut rad = C64::ZERO;
            for (xa, g) in x.iter().zip(&gvals) {
                rad += g[flat] * (xa / r);
            }
            corr_grad += c_off * rad.norm_sqr() + (c_diag - 2.0) * g2;
            corr_bi += CutoffFunction::bilaplacian(rho, params.d) * a2;
            corr_pot += (CutoffFunction::laplacian(rho, params.d) - 2.0 * d)
                * a2.powf(half_pot_exp);
        } else {
            corr_grad -= 2.0 * g2;
            corr_pot -= 2.0 * d * a2.powf(half_pot_exp);
        }
    });

    let cell = u.grid().cell_volume();
    let gradient_part = 8.0 * grad_full * cell;
    let potential_part = -params.virial_potential_coeff() * u.abs_power_integral(p + 1.0);
    let remainder = (4.0 * corr_grad
        - corr_bi / (radius * radius)
        - 2.0 * (p - 1.0) / (p + 1.0) * corr_pot)
        * cell;
    Ok(VirialDecomposition {
        z_dprime: gradient_part + potential_part + remainder,
        gradient_part,
        potential_part,
        remainder,
    })
}

/// Certified upper bound on the remaining lifespan of a state whose
/// localized variance obeys `z'' <= ceiling < 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupBoundReport {
    /// The solution cannot extend past this time (measured from the moment
    /// `z0`, `z0_prime` were taken).
    pub t_bound: f64,
    /// `z0 / |ceiling|`.
    pub r0: f64,
    /// `z0' / |ceiling|`.
    pub r0_prime: f64,
    /// The (negative) concavity ceiling itself.
    pub denominator: f64,
    pub lambda: f64,
    pub kappa: f64,
}

/// Concavity bound on the blowup time.
///
/// With `λ > 1` the modulation parameter `κ ∈ (0, min(λ-1, 0.1))` buys
/// room for localization errors; the localized variance then satisfies
///
/// ```text
///     z'' <= 32 α^2 E_ref ( line(λ) - (d/2s) λ^{2/s} κ )
/// ```
///
/// for states whose energy sits on the line at `λ` (take `λ` from
/// [`lambda_for_energy_ratio`] on `E[u]/E_ref`). When that ceiling is
/// negative, `z(t) <= z0 + z0' t + ceiling t^2/2` forces `z` to zero — and
/// the solution to end — no later than `r0' + sqrt(r0'^2 + 2 r0)`.
pub fn blowup_time_bound(
    z0: f64,
    z0_prime: f64,
    params: &PhysicalParams,
    lambda: f64,
    kappa: f64,
    reference_energy: f64,
) -> Result<BlowupBoundReport> {
    if !(lambda.is_finite() && lambda > 1.0) {
        return Err(Error::HypothesisViolated(format!(
            "blowup-time bound needs lambda > 1, got {lambda}"
        )));
    }
    let kappa_max = (lambda - 1.0).min(DEFAULT_KAPPA_CAP);
    if !(kappa > 0.0 && kappa < kappa_max) {
        return Err(Error::KappaOutOfRange {
            kappa,
            max: kappa_max,
            lambda,
        });
    }
    if !(reference_energy.is_finite() && reference_energy > 0.0) {
        return Err(Error::ParamMismatch(format!(
            "reference energy must be positive, got {reference_energy}"
        )));
    }
    if !(z0.is_finite() && z0 > 0.0 && z0_prime.is_finite()) {
        return Err(Error::ParamMismatch(format!(
            "localized variance must be positive and finite (z = {z0}, z' = {z0_prime})"
        )));
    }
    let scale = 32.0 * params.alpha_sq() * reference_energy;
    let ceiling = scale
        * (mass_energy_line(lambda, params)
            - params.d_over_2s() * lambda.powf(2.0 / params.s) * kappa);
    if ceiling >= 0.0 {
        return Err(Error::HypothesisViolated(format!(
            "concavity ceiling {ceiling:.3e} is not negative at lambda = {lambda}, kappa = {kappa}"
        )));
    }
    if ceiling.abs() < 1e-12 * scale {
        return Err(Error::DegenerateDenominator {
            value: ceiling,
            lambda,
            kappa,
        });
    }
    let den = ceiling.abs();
    let r0 = z0 / den;
    let r0_prime = z0_prime / den;
    Ok(BlowupBoundReport {
        t_bound: r0_prime + (r0_prime * r0_prime + 2.0 * r0).sqrt(),
        r0,
        r0_prime,
        denominator: ceiling,
        lambda,
        kappa,
    })
}

/// Did a sampled quantity stay inside a window for the whole run?
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowReport {
    pub held: bool,
    /// Time and value of the first sample outside the window.
    pub first_exit: Option<(f64, f64)>,
}

/// Check that the renormalized gradient column of a series stays inside
/// `[lower, upper]` — the orbital-stability window around 1 for soliton
/// initial data.
pub fn gradient_window(series: &TimeSeries, lower: f64, upper: f64) -> Result<WindowReport> {
    if !(lower.is_finite() && upper.is_finite() && lower <= upper) {
        return Err(Error::SearchRangeEmpty(format!(
            "window [{lower}, {upper}] is inverted or not finite"
        )));
    }
    if series.rows.is_empty() {
        return Err(Error::EmptySeries("no rows to check".into()));
    }
    for row in &series.rows {
        let g = row.renorm_gradient.ok_or_else(|| {
            Error::EmptySeries(
                "rows carry no renormalized gradient (run with reference norms)".into(),
            )
        })?;
        if g < lower || g > upper {
            return Ok(WindowReport {
                held: false,
                first_exit: Some((row.t, g)),
            });
        }
    }
    Ok(WindowReport {
        held: true,
        first_exit: None,
    })
}

/// The three quantities of the trapping chain, see [`convexity_bound_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityCheck {
    /// `sqrt` of the renormalized mass-energy.
    pub omega: f64,
    /// `16 (1 - ω^{p-1}) E`.
    pub lhs: f64,
    /// `8 (1 - ω^{p-1}) ‖∇u‖^2`.
    pub mid: f64,
    /// `8 ‖∇u‖^2 - (4d(p-1)/(p+1)) ∫|u|^{p+1}`, the full-space virial RHS.
    pub rhs: f64,
    pub holds: bool,
}

/// For a state trapped below the threshold (both renormalized functionals
/// under 1), the full-space virial right-hand side dominates the chain
///
/// ```text
///     16 (1 - ω^{p-1}) E  <=  8 (1 - ω^{p-1}) ‖∇u‖^2  <=  z''_∞,
/// ```
///
/// with `ω = sqrt(renorm mass-energy)`: the first step is `2E <= ‖∇u‖^2`,
/// the second is the sharp-interpolation control of the potential. `holds`
/// records whether the chain is satisfied to rounding.
pub fn convexity_bound_check(
    report: &InvariantReport,
    params: &PhysicalParams,
) -> Result<ConvexityCheck> {
    if report.energy < 0.0 {
        return Err(Error::NegativeEnergy {
            energy: report.energy,
        });
    }
    let me = report.renorm_mass_energy.ok_or_else(|| {
        Error::HypothesisViolated("report carries no renormalized mass-energy".into())
    })?;
    if report.renorm_gradient >= 1.0 || me >= 1.0 {
        return Err(Error::HypothesisViolated(format!(
            "trapping requires both renormalized functionals below 1, got gradient {} and mass-energy {}",
            report.renorm_gradient, me
        )));
    }
    let omega = me.sqrt();
    let fac = 1.0 - omega.powf(params.p - 1.0);
    let lhs = 16.0 * fac * report.energy;
    let mid = 8.0 * fac * report.grad_l2_sq;
    let rhs =
        8.0 * report.grad_l2_sq - params.virial_potential_coeff() * report.potential_integral;
    let slack = 1e-12 * lhs.abs().max(mid.abs()).max(rhs.abs()).max(1.0);
    Ok(ConvexityCheck {
        omega,
        lhs,
        mid,
        rhs,
        holds: lhs <= mid + slack && mid <= rhs + slack,
    })
}

/// Search box for [`soliton_distance`]: a geometric grid of scales times a
/// uniform grid of center shifts, refined by coordinate descent. The phase
/// is never searched — it is optimal in closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulationSearch {
    pub scale_range: (f64, f64),
    pub scale_samples: usize,
    /// Largest |shift| per axis tried in the coarse pass.
    pub shift_extent: f64,
    pub shift_samples: usize,
    /// Coordinate-descent rounds after the coarse pass.
    pub refine_steps: usize,
}

impl Default for ModulationSearch {
    fn default() -> Self {
        Self {
            scale_range: (0.7, 1.4),
            scale_samples: 15,
            shift_extent: 2.0,
            shift_samples: 9,
            refine_steps: 60,
        }
    }
}

/// Best H^1 match of `u` against the modulated soliton family
/// `e^{iθ} λ^{2/(p-1)} u_Q(λ (x - x0))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulationFit {
    pub theta: f64,
    pub shift: Vec<f64>,
    pub scale: f64,
    /// `‖u - candidate‖_{H^1}` at the optimum.
    pub residual_h1: f64,
    /// The same divided by `‖u‖_{H^1}`.
    pub relative_residual: f64,
}

/// Distance from `u` to the soliton orbit, minimizing over phase, center
/// and scale.
///
/// For fixed `(λ, x0)` the optimal phase is analytic: with the unrotated
/// candidate `c0` and `I = ∫ (u c0 + ∇u·∇c0)`, the best phase is `arg I`
/// and the squared distance is `‖u‖^2 + ‖c0‖^2 - 2|I|` (H^1 norms). Only
/// `(λ, x0)` are searched.
pub fn soliton_distance(
    u: &ComplexField,
    profile: &GroundStateProfile,
    search: &ModulationSearch,
) -> Result<ModulationFit> {
    u.ensure_finite("modulation fit")?;
    let nd = u.grid().ndim();
    if nd != profile.params.d {
        return Err(Error::ParamMismatch(format!(
            "field is {}-dimensional but the profile has d = {}",
            nd, profile.params.d
        )));
    }
    let (lo, hi) = search.scale_range;
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi >= lo) {
        return Err(Error::SearchRangeEmpty(format!("scale range [{lo}, {hi}]")));
    }
    if search.scale_samples == 0 || search.shift_samples == 0 {
        return Err(Error::SearchRangeEmpty(
            "need at least one sample per search axis".into(),
        ));
    }
    if !(search.shift_extent.is_finite() && search.shift_extent >= 0.0) {
        return Err(Error::SearchRangeEmpty(format!(
            "shift extent {}",
            search.shift_extent
        )));
    }

    let mut ws = SpectralWorkspace::new(u.grid());
    let grads = ws.gradient(u);
    let gvals: Vec<&[C64]> = grads.iter().map(|g| g.values()).collect();
    let uv = u.values();
    let cell = u.grid().cell_volume();
    let mut unorm_sq = 0.0f64;
    for (flat, zu) in uv.iter().enumerate() {
        let mut s = zu.norm_sqr();
        for g in &gvals {
            s += g[flat].norm_sqr();
        }
        unorm_sq += s;
    }
    unorm_sq *= cell;
    if unorm_sq < 1e-300 {
        return Err(Error::ZeroMass);
    }

    let amp_exp = 2.0 / (profile.params.p - 1.0);
    // squared residual and H^1 pairing for one candidate (scale, shift)
    let eval = |scale: f64, shift: &[f64]| -> (f64, C64) {
        let amp = scale.powf(amp_exp);
        let mut ip = C64::ZERO;
        let mut cnorm = 0.0f64;
        u.grid().for_each_point(|flat, x| {
            let mut r2 = 0.0f64;
            for (xa, sa) in x.iter().zip(shift) {
                let dx = xa - sa;
                r2 += dx * dx;
            }
            let r = r2.sqrt();
            let cval = amp * profile.profile_value(scale * r);
            ip += uv[flat] * cval;
            cnorm += cval * cval;
            if r > 1e-12 {
                let dval = amp * scale * profile.profile_deriv(scale * r) / r;
                for ((xa, sa), g) in x.iter().zip(shift).zip(&gvals) {
                    let cg = dval * (xa - sa);
                    ip += g[flat] * cg;
                    cnorm += cg * cg;
                }
            }
        });
        let ip = ip * cell;
        let cnorm = cnorm * cell;
        (unorm_sq + cnorm - 2.0 * ip.norm(), ip)
    };

    // coarse pass
    let scales: Vec<f64> = if search.scale_samples == 1 {
        vec![(lo * hi).sqrt()]
    } else {
        (0..search.scale_samples)
            .map(|i| lo * (hi / lo).powf(i as f64 / (search.scale_samples - 1) as f64))
            .collect()
    };
    let shifts_axis: Vec<f64> = if search.shift_samples == 1 || search.shift_extent == 0.0 {
        vec![0.0]
    } else {
        (0..search.shift_samples)
            .map(|i| {
                -search.shift_extent
                    + 2.0 * search.shift_extent * i as f64 / (search.shift_samples - 1) as f64
            })
            .collect()
    };
    let mut best_res = f64::INFINITY;
    let mut best_scale = scales[0];
    let mut best_shift = vec![0.0f64; nd];
    let mut idx = vec![0usize; nd];
    'coarse: loop {
        let shift: Vec<f64> = idx.iter().map(|&i| shifts_axis[i]).collect();
        for &sc in &scales {
            let (res_sq, _) = eval(sc, &shift);
            if res_sq < best_res {
                best_res = res_sq;
                best_scale = sc;
                best_shift = shift.clone();
            }
        }
        let mut a = 0;
        loop {
            if a == nd {
                break 'coarse;
            }
            idx[a] += 1;
            if idx[a] < shifts_axis.len() {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }

    // coordinate descent with shrinking steps
    let mut dscale = if search.scale_samples > 1 {
        ((hi - lo) / (search.scale_samples - 1) as f64).max(1e-6)
    } else {
        0.05 * best_scale
    };
    let mut dshift = if shifts_axis.len() > 1 {
        shifts_axis[1] - shifts_axis[0]
    } else {
        u.grid().spacing(0)
    };
    for _ in 0..search.refine_steps {
        let mut improved = false;
        for cand in [best_scale - dscale, best_scale + dscale] {
            if cand > 1e-3 {
                let (res_sq, _) = eval(cand, &best_shift);
                if res_sq < best_res {
                    best_res = res_sq;
                    best_scale = cand;
                    improved = true;
                }
            }
        }
        for a in 0..nd {
            for sgn in [-1.0, 1.0] {
                let mut cand = best_shift.clone();
                cand[a] += sgn * dshift;
                let (res_sq, _) = eval(best_scale, &cand);
                if res_sq < best_res {
                    best_res = res_sq;
                    best_shift = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            dscale *= 0.5;
            dshift *= 0.5;
            if dscale < 1e-12 && dshift < 1e-12 {
                break;
            }
        }
    }

    let (res_sq, ip) = eval(best_scale, &best_shift);
    let residual_h1 = res_sq.max(0.0).sqrt();
    Ok(ModulationFit {
        theta: ip.arg(),
        shift: best_shift,
        scale: best_scale,
        residual_h1,
        relative_residual: residual_h1 / unorm_sq.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::SeriesRow;
    use crate::ground::{solve_ground_state, GroundSolveOptions};
    use crate::invariants::invariant_report;
    use std::f64::consts::PI;

    fn d1p7() -> PhysicalParams {
        PhysicalParams::new(1, 7.0).unwrap()
    }
    fn d3p3() -> PhysicalParams {
        PhysicalParams::new(3, 3.0).unwrap()
    }

    #[test]
    fn cutoff_joins_are_smooth_and_inner_weights_exact() {
        // exact branches on the ball
        assert_eq!(CutoffFunction::value(0.5), 0.25);
        assert_eq!(CutoffFunction::hessian_factors(0.7), (0.0, 2.0));
        assert_eq!(CutoffFunction::laplacian(0.9, 3), 6.0);
        assert_eq!(CutoffFunction::bilaplacian(0.3, 2), 0.0);
        // joins: value, slope and curvature agree on both sides
        let eps = 1e-9;
        assert!((CutoffFunction::value(1.0 + eps) - 1.0).abs() < 1e-8);
        assert!((CutoffFunction::deriv(1.0 + eps) - 2.0).abs() < 1e-7);
        assert!((CutoffFunction::second_deriv(1.0 + eps) - 2.0).abs() < 1e-6);
        assert!(CutoffFunction::value(2.0 - eps).abs() < 1e-15);
        assert!(CutoffFunction::deriv(2.0 - eps).abs() < 1e-12);
        assert!(CutoffFunction::second_deriv(2.0 - eps).abs() < 1e-6);
        assert_eq!(CutoffFunction::value(2.0), 0.0);
        assert_eq!(CutoffFunction::value(2.5), 0.0);
        // nonnegative along the shoulder
        for i in 0..=250 {
            let rho = i as f64 * 0.01;
            assert!(CutoffFunction::value(rho) >= 0.0, "negative at rho={rho}");
        }
        // derivative chain consistency by central differences
        let h = 1e-6;
        for rho in [1.3, 1.55, 1.9] {
            let fd = (CutoffFunction::value(rho + h) - CutoffFunction::value(rho - h)) / (2.0 * h);
            assert!((fd - CutoffFunction::deriv(rho)).abs() < 1e-6, "rho={rho}");
            let fd2 =
                (CutoffFunction::deriv(rho + h) - CutoffFunction::deriv(rho - h)) / (2.0 * h);
            let (off, diag) = CutoffFunction::hessian_factors(rho);
            assert!((fd2 - (off + diag)).abs() < 1e-5, "rho={rho}");
            // laplacian assembles from the same factors
            let lap = CutoffFunction::laplacian(rho, 3);
            assert!((lap - (off + 3.0 * diag)).abs() < 1e-12);
        }
        // d=1 bilaplacian is the plain fourth derivative: 816 - 1560 t
        assert!((CutoffFunction::bilaplacian(1.25, 1) - 426.0).abs() < 1e-9);
        // d=3 bilaplacian against second differences of the laplacian
        let rho = 1.4;
        let h = 1e-3;
        let g = |r: f64| CutoffFunction::laplacian(r, 3);
        let fd = (g(rho + h) - 2.0 * g(rho) + g(rho - h)) / (h * h)
            + (g(rho + h) - g(rho - h)) / (2.0 * h) * 2.0 / rho;
        assert!(
            (fd - CutoffFunction::bilaplacian(rho, 3)).abs() < 1e-3,
            "{fd} vs {}",
            CutoffFunction::bilaplacian(rho, 3)
        );
    }

    #[test]
    fn gaussian_sees_the_full_space_virial_identity() {
        // u = e^{-x^2/2}, d=1, p=7: z'' = 8 ∫x^2 e^{-x^2} ... = 5 sqrt(pi)/2
        let params = d1p7();
        let grid = Grid::cubic(1, 1024, 15.0).unwrap();
        let u = ComplexField::from_fn(&grid, |x| C64::new((-0.5 * x[0] * x[0]).exp(), 0.0));
        let mut ws = SpectralWorkspace::new(&grid);
        let v = virial_rhs(&u, &params, 6.0, &mut ws).unwrap();
        let exact = 5.0 * PI.sqrt() / 2.0;
        assert!((v.z_dprime - exact).abs() < 1e-10, "{} vs {exact}", v.z_dprime);
        assert!(v.remainder.abs() < 1e-12, "remainder {}", v.remainder);

        let lv = localized_variance(&u, 6.0, &mut ws).unwrap();
        // plain variance ∫ x^2 e^{-x^2} = sqrt(pi)/2; real data has z' = 0
        assert!((lv.z - PI.sqrt() / 2.0).abs() < 1e-10);
        assert!(lv.z_prime.abs() < 1e-14);
    }

    #[test]
    fn decomposition_matches_the_direct_quadrature() {
        let params = PhysicalParams::new(2, 5.0).unwrap();
        let grid = Grid::cubic(2, 96, 8.0).unwrap();
        let u = crate::random_smooth_field(&grid, 3, 0.8, 14);
        let mut ws = SpectralWorkspace::new(&grid);
        let radius = 3.0;
        let v = virial_rhs(&u, &params, radius, &mut ws).unwrap();

        // same quantity assembled the straightforward way, all points
        let grads = ws.gradient(&u);
        let mut direct = 0.0f64;
        grid.for_each_point(|flat, x| {
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            let rho = r / radius;
            let (off, diag) = CutoffFunction::hessian_factors(rho);
            let mut g2 = 0.0f64;
            let mut rad = C64::ZERO;
            for (a, g) in grads.iter().enumerate() {
                let z = g.values()[flat];
                g2 += z.norm_sqr();
                if r > 1e-12 {
                    rad += z * (x[a] / r);
                }
            }
            let a2 = u.values()[flat].norm_sqr();
            direct += 4.0 * (off * rad.norm_sqr() + diag * g2);
            direct -= CutoffFunction::bilaplacian(rho, 2) * a2 / (radius * radius);
            direct -= 2.0 * (params.p - 1.0) / (params.p + 1.0)
                * CutoffFunction::laplacian(rho, 2)
                * a2.powf((params.p + 1.0) / 2.0);
        });
        direct *= grid.cell_volume();
        assert!(
            (direct - v.z_dprime).abs() < 1e-10 * (1.0 + v.z_dprime.abs()),
            "{direct} vs {}",
            v.z_dprime
        );
        assert!((v.z_dprime - (v.gradient_part + v.potential_part + v.remainder)).abs() < 1e-12);
    }

    #[test]
    fn remainder_vanishes_for_data_supported_inside_the_ball() {
        let params = d1p7();
        let grid = Grid::cubic(1, 512, 20.0).unwrap();
        let u = ComplexField::from_fn(&grid, |x| C64::new((-0.5 * x[0] * x[0]).exp(), 0.0));
        let mut ws = SpectralWorkspace::new(&grid);
        let v = virial_rhs(&u, &params, 8.0, &mut ws).unwrap();
        assert!(v.remainder.abs() < 1e-24, "remainder {}", v.remainder);
        // and z is the plain variance, point for point
        let lv = localized_variance(&u, 8.0, &mut ws).unwrap();
        let mut plain = 0.0f64;
        grid.for_each_point(|flat, x| {
            plain += x[0] * x[0] * u.values()[flat].norm_sqr();
        });
        plain *= grid.cell_volume();
        assert!((lv.z - plain).abs() < 1e-20);
        // a cutoff that does not fit is refused
        assert!(matches!(
            localized_variance(&u, 11.0, &mut ws),
            Err(Error::CutoffExceedsDomain { .. })
        ));
    }

    #[test]
    fn threshold_line_peaks_at_one() {
        assert_eq!(mass_energy_line(1.0, &d1p7()), 1.0);
        assert_eq!(mass_energy_line(1.0, &d3p3()), 1.0);
        // d=3, p=3: line(λ) = 3λ^4 - 2λ^6
        assert!((mass_energy_line(1.1, &d3p3()) - 0.849178).abs() < 1e-6);
        for lam in [0.9, 0.95, 0.99, 1.01, 1.05, 1.2] {
            assert!(mass_energy_line(lam, &d3p3()) < 1.0, "line >= 1 at {lam}");
        }
        let mut prev = 1.0;
        for i in 1..=30 {
            let v = mass_energy_line(1.0 + 0.05 * i as f64, &d3p3());
            assert!(v < prev, "not decreasing at step {i}");
            prev = v;
        }
    }

    #[test]
    fn lambda_solver_inverts_the_line() {
        let params = d1p7();
        let lam = lambda_for_energy_ratio(-4.28, &params).unwrap();
        assert!(lam > 1.12 && lam < 1.13, "lambda = {lam}");
        assert!((mass_energy_line(lam, &params) + 4.28).abs() < 1e-10);
        let at_one = lambda_for_energy_ratio(1.0, &params).unwrap();
        assert!((at_one - 1.0).abs() < 1e-12);
        assert!(lambda_for_energy_ratio(1.5, &params).is_err());
        let lam2 = lambda_for_energy_ratio(0.5, &d3p3()).unwrap();
        assert!(lam2 > 1.0);
        assert!((mass_energy_line(lam2, &d3p3()) - 0.5).abs() < 1e-10);
    }

    #[test]
    fn blowup_bound_solves_its_own_quadratic() {
        let params = d1p7();
        let (lam, kap, e_ref) = (1.125, 0.05, 0.47764);
        let rep = blowup_time_bound(0.02, 0.0, &params, lam, kap, e_ref).unwrap();
        assert!(rep.t_bound > 0.0);
        assert!(rep.denominator < 0.0);
        // z0 + z0' t - |ceiling| t^2 / 2 vanishes exactly at the bound
        let den = rep.denominator.abs();
        let z_at = 0.02 - 0.5 * den * rep.t_bound * rep.t_bound;
        assert!(z_at.abs() < 1e-12, "z({}) = {z_at}", rep.t_bound);
        // monotonicity in the data
        let later = blowup_time_bound(0.04, 0.0, &params, lam, kap, e_ref).unwrap();
        assert!(later.t_bound > rep.t_bound);
        let outgoing = blowup_time_bound(0.02, 0.01, &params, lam, kap, e_ref).unwrap();
        let infalling = blowup_time_bound(0.02, -0.01, &params, lam, kap, e_ref).unwrap();
        assert!(outgoing.t_bound > rep.t_bound && infalling.t_bound < rep.t_bound);
        // guards
        assert!(matches!(
            blowup_time_bound(0.02, 0.0, &params, 1.0, 0.05, e_ref),
            Err(Error::HypothesisViolated(_))
        ));
        assert!(matches!(
            blowup_time_bound(0.02, 0.0, &params, 1.125, 0.2, e_ref),
            Err(Error::KappaOutOfRange { .. })
        ));
        assert!(matches!(
            blowup_time_bound(0.02, 0.0, &params, 1.03, 0.05, e_ref),
            Err(Error::KappaOutOfRange { .. })
        ));
        // too close to the peak: the ceiling is not negative
        assert!(matches!(
            blowup_time_bound(0.02, 0.0, &params, 1.01, 0.005, e_ref),
            Err(Error::HypothesisViolated(_))
        ));
    }

    #[test]
    fn window_check_reports_the_first_exit() {
        let row = |t: f64, g: Option<f64>| SeriesRow {
            t,
            mass: 1.0,
            energy: 0.1,
            momentum: vec![0.0],
            grad_l2_sq: 1.0,
            potential_integral: 1.0,
            sup_abs: 1.0,
            renorm_gradient: g,
            renorm_mass_energy: None,
            extra: vec![],
        };
        let series = TimeSeries {
            extra_columns: vec![],
            rows: vec![
                row(0.0, Some(1.0)),
                row(0.5, Some(1.00003)),
                row(1.0, Some(0.9999)),
            ],
        };
        let ok = gradient_window(&series, 0.999, 1.001).unwrap();
        assert!(ok.held && ok.first_exit.is_none());
        let bad = gradient_window(&series, 0.99995, 1.00001).unwrap();
        assert!(!bad.held);
        let (t, g) = bad.first_exit.unwrap();
        assert_eq!(t, 0.5);
        assert!((g - 1.00003).abs() < 1e-12);
        assert!(matches!(
            gradient_window(&TimeSeries::default(), 0.9, 1.1),
            Err(Error::EmptySeries(_))
        ));
        let noref = TimeSeries {
            extra_columns: vec![],
            rows: vec![row(0.0, None)],
        };
        assert!(matches!(
            gradient_window(&noref, 0.9, 1.1),
            Err(Error::EmptySeries(_))
        ));
        assert!(matches!(
            gradient_window(&series, 1.1, 0.9),
            Err(Error::SearchRangeEmpty(_))
        ));
    }

    #[test]
    fn trapping_chain_holds_below_threshold_and_refuses_above() {
        let params = d1p7();
        let grid = Grid::cubic(1, 1024, 20.0).unwrap();
        let prof = solve_ground_state(&params, &grid, &GroundSolveOptions::default()).unwrap();
        let norms = prof.soliton_norms();
        let mut ws = SpectralWorkspace::new(&grid);

        let trapped = prof.uq_field.scaled(C64::new(0.5, 0.0));
        let rep = invariant_report(&trapped, &params, &norms, &mut ws).unwrap();
        let chk = convexity_bound_check(&rep, &params).unwrap();
        assert!(chk.holds, "lhs {} mid {} rhs {}", chk.lhs, chk.mid, chk.rhs);
        assert!((chk.omega * chk.omega - rep.renorm_mass_energy.unwrap()).abs() < 1e-14);

        // slightly above the soliton: positive energy but not trapped
        let above = prof.uq_field.scaled(C64::new(1.05, 0.0));
        let rep2 = invariant_report(&above, &params, &norms, &mut ws).unwrap();
        assert!(matches!(
            convexity_bound_check(&rep2, &params),
            Err(Error::HypothesisViolated(_))
        ));

        // well above: the energy itself goes negative
        let negative = prof.uq_field.scaled(C64::new(1.2, 0.0));
        let rep3 = invariant_report(&negative, &params, &norms, &mut ws).unwrap();
        assert!(rep3.energy < 0.0);
        assert!(matches!(
            convexity_bound_check(&rep3, &params),
            Err(Error::NegativeEnergy { .. })
        ));
    }

    #[test]
    fn modulation_fit_recovers_phase_scale_and_shift() {
        let params = d1p7();
        let grid = Grid::cubic(1, 2048, 25.0).unwrap();
        let prof = solve_ground_state(&params, &grid, &GroundSolveOptions::default()).unwrap();

        // exact orbit member: pure phase rotation
        let u = prof.uq_field.scaled(C64::from_polar(1.0, 0.7));
        let fit = soliton_distance(&u, &prof, &ModulationSearch::default()).unwrap();
        assert!((fit.theta - 0.7).abs() < 1e-6, "theta {}", fit.theta);
        assert!((fit.scale - 1.0).abs() < 1e-3, "scale {}", fit.scale);
        assert!(fit.shift[0].abs() < 1e-3, "shift {}", fit.shift[0]);
        // floor set by the finite-difference derivative table, not the search
        assert!(fit.relative_residual < 1e-4, "residual {}", fit.relative_residual);

        // rescaled, shifted, rotated member synthesized off-node
        let (lam, x0, th) = (1.1f64, 0.3, -0.4);
        let amp = lam.powf(1.0 / 3.0);
        let v = ComplexField::from_fn(&grid, |x| {
            C64::from_polar(amp * prof.profile_value(lam * (x[0] - x0).abs()), th)
        });
        let fit2 = soliton_distance(&v, &prof, &ModulationSearch::default()).unwrap();
        assert!((fit2.scale - lam).abs() < 1e-3, "scale {}", fit2.scale);
        assert!((fit2.shift[0] - x0).abs() < 1e-3, "shift {}", fit2.shift[0]);
        assert!((fit2.theta - th).abs() < 1e-6, "theta {}", fit2.theta);
        assert!(fit2.relative_residual < 1e-3, "residual {}", fit2.relative_residual);

        // a field far from the orbit keeps a large residual
        let far = ComplexField::from_fn(&grid, |x| {
            C64::new(0.5 * (-0.02 * x[0] * x[0]).exp(), 0.0)
        });
        let fit3 = soliton_distance(&far, &prof, &ModulationSearch::default()).unwrap();
        assert!(fit3.relative_residual > 0.3, "residual {}", fit3.relative_residual);

        // inverted range refused
        assert!(matches!(
            soliton_distance(
                &u,
                &prof,
                &ModulationSearch {
                    scale_range: (0.0, 1.0),
                    ..Default::default()
                }
            ),
            Err(Error::SearchRangeEmpty(_))
        ));
    }
}
