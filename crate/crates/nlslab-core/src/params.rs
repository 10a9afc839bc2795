use crate::{Error, Result};

/// Model parameters for i u_t + Δu + |u|^(p-1) u = 0 on R^d together with
/// the derived constants used everywhere else.
///
/// * `s = d/2 - 2/(p-1)` — scaling index of the critical Sobolev space.
///   Construction succeeds only for `0 < s < 1` (intercritical window).
/// * `alpha = sqrt(d (p-1)) / 2` — rescaling that sends the unit-frequency
///   ground state to the soliton profile of the equation itself.
/// * `beta = 1 - (d-2)(p-1)/4` — frequency of that soliton; `s < 1` forces
///   `beta > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub d: usize,
    pub p: f64,
    pub s: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl PhysicalParams {
    /// Validate (d, p) and derive the constants.
    ///
    /// `d` may exceed 3 here — exponent bookkeeping is dimension-agnostic —
    /// but grids and solvers accept only d = 1, 2, 3.
    pub fn new(d: usize, p: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::ParamMismatch("dimension must be >= 1".into()));
        }
        if !p.is_finite() || p <= 1.0 {
            return Err(Error::ParamMismatch(format!(
                "nonlinearity power must be finite and > 1, got {p}"
            )));
        }
        let df = d as f64;
        let s = df / 2.0 - 2.0 / (p - 1.0);
        if s <= 0.0 {
            return Err(Error::SubcriticalOrCritical { d, p, s });
        }
        if s >= 1.0 {
            return Err(Error::EnergyCriticalOrSuper { d, p, s });
        }
        let alpha = (df * (p - 1.0)).sqrt() / 2.0;
        let beta = 1.0 - (df - 2.0) * (p - 1.0) / 4.0;
        Ok(Self { d, p, s, alpha, beta })
    }

    /// `alpha^2 = d (p-1) / 4`, computed without squaring a square root.
    pub fn alpha_sq(&self) -> f64 {
        self.d as f64 * (self.p - 1.0) / 4.0
    }

    /// `d / (2 s)`, the coefficient in front of the threshold line.
    pub fn d_over_2s(&self) -> f64 {
        self.d as f64 / (2.0 * self.s)
    }

    /// `(1 - s) / s`, the mass exponent in momentum-reduced functionals.
    pub fn mass_exponent(&self) -> f64 {
        (1.0 - self.s) / self.s
    }

    /// Potential-term coefficient `4 d (p-1) / (p+1)` from the virial identity.
    pub fn virial_potential_coeff(&self) -> f64 {
        4.0 * self.d as f64 * (self.p - 1.0) / (self.p + 1.0)
    }

    /// True when `other` describes the same equation.
    pub fn same_equation(&self, other: &PhysicalParams) -> bool {
        self.d == other.d && self.p == other.p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_constants_for_the_standard_pairs() {
        let m = PhysicalParams::new(1, 7.0).unwrap();
        assert!((m.s - 1.0 / 6.0).abs() < 1e-15);
        assert!((m.alpha - 6f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((m.beta - 2.5).abs() < 1e-15);

        let m = PhysicalParams::new(2, 5.0).unwrap();
        assert!((m.s - 0.5).abs() < 1e-15);
        assert!((m.alpha - 2f64.sqrt()).abs() < 1e-15);
        assert!((m.beta - 1.0).abs() < 1e-15);

        let m = PhysicalParams::new(3, 3.0).unwrap();
        assert!((m.s - 0.5).abs() < 1e-15);
        assert!((m.alpha - 1.5f64.sqrt()).abs() < 1e-15);
        assert!((m.beta - 0.5).abs() < 1e-15);

        let m = PhysicalParams::new(4, 7.0 / 3.0).unwrap();
        assert!((m.s - 0.5).abs() < 1e-15);
        assert!((m.beta - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn saturation_identity_links_alpha_and_s() {
        // (d / 2s) (1 - 1/alpha^2) = 1 for every intercritical pair: the
        // threshold line takes the value 1 exactly at the soliton.
        for (d, p) in [(1, 7.0), (1, 5.5), (2, 5.0), (2, 3.7), (3, 3.0), (3, 2.5), (4, 7.0 / 3.0)] {
            let m = PhysicalParams::new(d, p).unwrap();
            let lhs = m.d_over_2s() * (1.0 - 1.0 / m.alpha_sq());
            assert!(
                (lhs - 1.0).abs() < 1e-12,
                "saturation identity broken for d={d} p={p}: {lhs}"
            );
        }
    }

    #[test]
    fn intercritical_window_guards() {
        // d=1 needs p > 5 for s > 0.
        assert!(matches!(
            PhysicalParams::new(1, 5.0),
            Err(Error::SubcriticalOrCritical { .. })
        ));
        assert!(matches!(
            PhysicalParams::new(1, 3.0),
            Err(Error::SubcriticalOrCritical { .. })
        ));
        // d=3 cubic is fine, quintic is energy-critical.
        assert!(PhysicalParams::new(3, 3.0).is_ok());
        assert!(matches!(
            PhysicalParams::new(3, 5.0),
            Err(Error::EnergyCriticalOrSuper { .. })
        ));
        // d=2: every p > 3 is intercritical (s -> 1 only as p -> inf).
        assert!(PhysicalParams::new(2, 100.0).is_ok());
        assert!(matches!(
            PhysicalParams::new(2, 3.0),
            Err(Error::SubcriticalOrCritical { .. })
        ));
        // nonsense powers
        assert!(PhysicalParams::new(3, 1.0).is_err());
        assert!(PhysicalParams::new(3, f64::NAN).is_err());
        assert!(PhysicalParams::new(0, 3.0).is_err());
    }

    #[test]
    fn beta_positive_throughout_the_window() {
        // s < 1 is equivalent to (d-2)(p-1) < 4, i.e. beta > 0.
        for d in 1..=4usize {
            for k in 1..200 {
                let p = 1.0 + 0.05 * k as f64;
                if let Ok(m) = PhysicalParams::new(d, p) {
                    assert!(m.beta > 0.0, "beta <= 0 inside window at d={d} p={p}");
                }
            }
        }
    }
}
