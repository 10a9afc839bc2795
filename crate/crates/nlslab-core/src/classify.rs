use crate::invariants::{threshold_bounds, InvariantReport};
use crate::PhysicalParams;

/// Where a state sits relative to the soliton threshold.
///
/// All decisions are made from the boost-invariant reduced functionals, so
/// the verdict does not change under Galilean boosts of the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    /// Below threshold with reduced gradient below 1: global existence and
    /// scattering regime.
    ScatterRegion,
    /// Below threshold with reduced gradient above 1, for data known to
    /// have finite variance or radial symmetry: finite-time blowup regime.
    BlowupRegionFiniteVarianceOrRadial,
    /// Below threshold with reduced gradient above 1 but without a decay
    /// hypothesis: blowup or escape to infinite gradient in infinite time.
    BlowupRegionWeak,
    /// Reduced energy (after removing center-of-mass motion) is negative;
    /// the convexity argument alone forces finite-time breakdown for
    /// finite-variance or radial data.
    NegativeEnergyBlowup,
    /// Reduced mass-energy above 1: outside the regime the threshold
    /// dichotomy controls.
    AboveThreshold,
    /// Within tolerance of the threshold itself (mass-energy at 1, or
    /// mass-energy below 1 with gradient pinned at 1).
    AtThreshold,
    /// The report violates the unconditional two-sided threshold bound by
    /// more than the stated tolerance: the numbers cannot belong to a
    /// single H^1 state and indicate a corrupted or inconsistent report.
    ForbiddenInconsistent,
}

/// Tolerances for the knife-edge and consistency decisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdTolerance {
    /// Half-width of the band around 1 reported as [`Classification::AtThreshold`].
    pub at_threshold: f64,
    /// Maximal relative violation of the two-sided bound tolerated before
    /// declaring the report inconsistent.
    pub consistency: f64,
}

impl Default for ThresholdTolerance {
    fn default() -> Self {
        Self {
            at_threshold: 1e-8,
            consistency: 1e-6,
        }
    }
}

/// Classify a state from its invariant report.
///
/// `finite_variance_or_radial` records an a-priori property of the data
/// (it cannot be decided from the report) and only selects between the two
/// blowup-side verdicts.
pub fn classify(
    report: &InvariantReport,
    params: &PhysicalParams,
    tol: ThresholdTolerance,
    finite_variance_or_radial: bool,
) -> Classification {
    let e = report.reduced_mass_energy;
    let g = report.reduced_gradient;

    if e < 0.0 {
        return Classification::NegativeEnergyBlowup;
    }
    let bounds = threshold_bounds(report, params);
    if bounds.violation() > tol.consistency {
        return Classification::ForbiddenInconsistent;
    }
    if (e - 1.0).abs() <= tol.at_threshold {
        return Classification::AtThreshold;
    }
    if e > 1.0 {
        return Classification::AboveThreshold;
    }
    // strictly below threshold: the gradient side decides
    if (g - 1.0).abs() <= tol.at_threshold {
        return Classification::AtThreshold;
    }
    if g < 1.0 {
        Classification::ScatterRegion
    } else if finite_variance_or_radial {
        Classification::BlowupRegionFiniteVarianceOrRadial
    } else {
        Classification::BlowupRegionWeak
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::InvariantReport;

    // A synthetic report with prescribed reduced values and a consistent
    // two-sided bound (the raw entries are not used by `classify`).
    fn report_with(e: f64, g: f64) -> InvariantReport {
        InvariantReport {
            time_tag: 0.0,
            mass: 1.0,
            energy: e,
            momentum: vec![0.0],
            momentum_norm: 0.0,
            grad_l2_sq: g,
            potential_integral: 0.0,
            sup_abs: 1.0,
            renorm_gradient: g.sqrt(),
            renorm_momentum: 0.0,
            renorm_mass_energy: if e >= 0.0 { Some(e) } else { None },
            reduced_mass_energy: e,
            reduced_gradient: g,
        }
    }

    fn params() -> PhysicalParams {
        PhysicalParams::new(1, 7.0).unwrap()
    }

    #[test]
    fn negative_energy_short_circuits() {
        let rep = report_with(-0.3, 5.0);
        assert_eq!(
            classify(&rep, &params(), ThresholdTolerance::default(), false),
            Classification::NegativeEnergyBlowup
        );
    }

    #[test]
    fn scatter_and_blowup_sides() {
        let p = params();
        let tol = ThresholdTolerance::default();
        // small in both; e must sit inside the consistent band
        // [line(g^{s/2}), 3g] = [0.571, 0.9] for g = 0.3
        let low = report_with(0.7, 0.3);
        assert_eq!(classify(&low, &p, tol, false), Classification::ScatterRegion);
        // below threshold but steep gradient: verdict depends on the decay flag
        let steep = report_with(0.5, 2.5);
        assert_eq!(
            classify(&steep, &p, tol, true),
            Classification::BlowupRegionFiniteVarianceOrRadial
        );
        assert_eq!(
            classify(&steep, &p, tol, false),
            Classification::BlowupRegionWeak
        );
        // above threshold wins regardless of gradient
        let high = report_with(1.4, 0.9);
        assert_eq!(classify(&high, &p, tol, false), Classification::AboveThreshold);
    }

    #[test]
    fn threshold_band() {
        let p = params();
        let tol = ThresholdTolerance::default();
        assert_eq!(
            classify(&report_with(1.0 + 1e-10, 0.4), &p, tol, false),
            Classification::AtThreshold
        );
        // gradient pinned at 1 forces mass-energy into a hairline below 1
        // (the lower bound equals 1 at g = 1), so only near-threshold
        // energies survive the consistency gate here
        assert_eq!(
            classify(&report_with(1.0 - 1e-7, 1.0 - 1e-10), &p, tol, false),
            Classification::AtThreshold
        );
    }

    #[test]
    fn impossible_reports_flagged() {
        let p = params();
        let tol = ThresholdTolerance::default();
        // reduced energy far above what any state with this gradient can
        // have (upper bound is (d/2s) g = 3 g)
        let impossible = report_with(0.9, 0.1);
        assert_eq!(
            classify(&impossible, &p, tol, false),
            Classification::ForbiddenInconsistent
        );
        // reduced energy below the sharp interpolation floor
        let too_low = report_with(0.0, 0.9);
        assert_eq!(
            classify(&too_low, &p, tol, false),
            Classification::ForbiddenInconsistent
        );
    }
}
