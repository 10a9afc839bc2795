use crate::{C64, Error, Grid, Result};

/// A complex scalar field sampled on a [`Grid`], tagged with the physical
/// time it represents.
///
/// Values are stored row-major and indexed exactly like the grid. The time
/// tag rides along through propagation and serialization; it has no effect
/// on algebraic operations.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: Grid,
    values: Vec<C64>,
    time_tag: f64,
}

impl ComplexField {
    /// Zero field at time 0.
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![C64::ZERO; grid.len()],
            time_tag: 0.0,
        }
    }

    /// Sample `f(x)` at every grid point (time 0).
    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> C64) -> Self {
        let mut values = vec![C64::ZERO; grid.len()];
        grid.for_each_point(|flat, x| values[flat] = f(x));
        Self {
            grid: grid.clone(),
            values,
            time_tag: 0.0,
        }
    }

    /// Wrap raw values (must match the grid size).
    pub fn from_values(grid: &Grid, values: Vec<C64>, time_tag: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ParamMismatch(format!(
                "value buffer has {} samples, grid has {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            values,
            time_tag,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn time_tag(&self) -> f64 {
        self.time_tag
    }

    pub fn set_time_tag(&mut self, t: f64) {
        self.time_tag = t;
    }

    /// Err(NonFiniteField) if any sample is NaN/inf. `context` names the caller.
    pub fn ensure_finite(&self, context: &str) -> Result<()> {
        if self
            .values
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
        {
            Ok(())
        } else {
            Err(Error::NonFiniteField {
                context: context.to_string(),
            })
        }
    }

    /// Supremum of |u| over the grid.
    pub fn sup_abs(&self) -> f64 {
        self.values
            .iter()
            .map(|z| z.norm_sqr())
            .fold(0.0f64, f64::max)
            .sqrt()
    }

    /// `∫ |u|^2` by the trapezoid-on-torus rule (exact for band-limited data).
    pub fn l2_sq(&self) -> f64 {
        let w = self.grid.cell_volume();
        w * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// `∫ |u|^q` for arbitrary real q > 0.
    pub fn abs_power_integral(&self, q: f64) -> f64 {
        let w = self.grid.cell_volume();
        let half = 0.5 * q;
        w * self
            .values
            .iter()
            .map(|z| z.norm_sqr().powf(half))
            .sum::<f64>()
    }

    /// Pointwise map, preserving grid and time tag.
    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&z| f(z)).collect(),
            time_tag: self.time_tag,
        }
    }

    /// Multiply by a complex constant.
    pub fn scaled(&self, c: C64) -> Self {
        self.map(|z| c * z)
    }

    /// Pointwise difference `self - other` (grids must match).
    pub fn difference(&self, other: &ComplexField) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::ParamMismatch(
                "fields live on different grids".into(),
            ));
        }
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
            time_tag: self.time_tag,
        })
    }

    /// Weighted accumulation over points with coordinates:
    /// `acc = f(acc, x, u(x))`, multiplied by nothing — callers apply the
    /// quadrature weight themselves via [`Grid::cell_volume`].
    pub fn fold_points<A>(&self, init: A, mut f: impl FnMut(A, &[f64], C64) -> A) -> A {
        let mut acc = Some(init);
        self.grid.for_each_point(|flat, x| {
            let a = acc.take().expect("fold accumulator");
            acc = Some(f(a, x, self.values[flat]));
        });
        acc.expect("fold accumulator")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize, l: f64) -> Grid {
        Grid::cubic(1, n, l).unwrap()
    }

    #[test]
    fn gaussian_mass_matches_closed_form() {
        // ∫ e^{-2 x^2} dx = sqrt(pi/2); periodic truncation error is far
        // below double precision at L = 12.
        let g = line(1024, 12.0);
        let u = ComplexField::from_fn(&g, |x| C64::new((-x[0] * x[0]).exp(), 0.0));
        let exact = (std::f64::consts::PI / 2.0).sqrt();
        assert!(
            (u.l2_sq() - exact).abs() < 1e-12 * exact,
            "mass {} vs {}",
            u.l2_sq(),
            exact
        );
    }

    #[test]
    fn abs_power_integral_matches_gaussian_moments() {
        // For u = e^{-x^2/2}: ∫ |u|^q = ∫ e^{-q x^2 / 2} = sqrt(2 pi / q).
        let g = line(2048, 16.0);
        let u = ComplexField::from_fn(&g, |x| C64::new((-0.5 * x[0] * x[0]).exp(), 0.0));
        for q in [2.0, 3.5, 8.0] {
            let exact = (2.0 * std::f64::consts::PI / q).sqrt();
            let got = u.abs_power_integral(q);
            assert!(
                (got - exact).abs() < 1e-12 * exact,
                "q={q}: {got} vs {exact}"
            );
        }
    }

    #[test]
    fn sup_abs_sees_complex_modulus() {
        let g = line(8, 1.0);
        let mut u = ComplexField::zeros(&g);
        u.values_mut()[3] = C64::new(3.0, 4.0);
        assert!((u.sup_abs() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn finiteness_guard_reports_context() {
        let g = line(8, 1.0);
        let mut u = ComplexField::zeros(&g);
        u.values_mut()[0] = C64::new(f64::NAN, 0.0);
        let err = u.ensure_finite("unit test").unwrap_err();
        assert!(err.to_string().contains("unit test"));
    }

    #[test]
    fn difference_requires_matching_grids() {
        let a = ComplexField::zeros(&line(8, 1.0));
        let b = ComplexField::zeros(&line(16, 1.0));
        assert!(a.difference(&b).is_err());
    }
}
