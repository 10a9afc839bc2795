use crate::{Error, Result};

/// Uniform periodic grid on the box `prod_a [-L_a, L_a)`, stored row-major.
///
/// Axis `a` has `n_a` points `x_j = -L_a + j * dx_a` with `dx_a = 2 L_a / n_a`.
/// Frequencies are the usual signed DFT wavenumbers `xi_k = (pi / L_a) * k~`
/// with `k~` the signed index in `[-n/2, n/2)` (Nyquist mapped to `+n/2`).
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dims: Vec<usize>,
    extents: Vec<f64>,
}

impl Grid {
    /// Build a grid with `dims[a]` points on axis `a` over `[-extents[a], extents[a])`.
    ///
    /// Powers of two are not required here (the FFT backend handles any
    /// length), but sizes must be even and at least 8 so the signed-frequency
    /// layout and dealiasing masks are well defined.
    pub fn new(dims: &[usize], extents: &[f64]) -> Result<Self> {
        if dims.is_empty() || dims.len() > 3 {
            return Err(Error::InvalidGrid(format!(
                "need 1 to 3 axes, got {}",
                dims.len()
            )));
        }
        if dims.len() != extents.len() {
            return Err(Error::InvalidGrid(format!(
                "{} axis sizes but {} extents",
                dims.len(),
                extents.len()
            )));
        }
        for (a, (&n, &l)) in dims.iter().zip(extents).enumerate() {
            if n < 8 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "axis {a}: size {n} must be even and >= 8"
                )));
            }
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!(
                    "axis {a}: half-width {l} must be finite and positive"
                )));
            }
        }
        Ok(Self {
            dims: dims.to_vec(),
            extents: extents.to_vec(),
        })
    }

    /// Square grid: `n` points per axis, common half-width `l`, dimension `d`.
    pub fn cubic(d: usize, n: usize, l: f64) -> Result<Self> {
        Self::new(&vec![n; d], &vec![l; d])
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn extents(&self) -> &[f64] {
        &self.extents
    }

    /// Total number of points.
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing on axis `a`.
    pub fn spacing(&self, a: usize) -> f64 {
        2.0 * self.extents[a] / self.dims[a] as f64
    }

    /// Smallest half-width over all axes.
    pub fn min_extent(&self) -> f64 {
        self.extents.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Quadrature weight of one cell, `prod_a dx_a`.
    pub fn cell_volume(&self) -> f64 {
        (0..self.ndim()).map(|a| self.spacing(a)).product()
    }

    /// Physical coordinate of index `j` on axis `a`.
    pub fn coord(&self, a: usize, j: usize) -> f64 {
        -self.extents[a] + j as f64 * self.spacing(a)
    }

    /// Signed integer frequency of DFT bin `k` on an axis of size `n`.
    #[inline]
    pub fn signed_index(n: usize, k: usize) -> i64 {
        if k <= n / 2 {
            k as i64
        } else {
            k as i64 - n as i64
        }
    }

    /// Wavenumber of bin `k` on axis `a` (Nyquist kept at `+pi n / (2 L)`),
    /// appropriate for even multipliers such as `|xi|^2`.
    #[inline]
    pub fn wavenumber(&self, a: usize, k: usize) -> f64 {
        let n = self.dims[a];
        std::f64::consts::PI / self.extents[a] * Self::signed_index(n, k) as f64
    }

    /// Wavenumber used in first-derivative multipliers: identical to
    /// [`wavenumber`](Self::wavenumber) except the unpaired Nyquist bin is
    /// sent to zero, keeping derivatives of real data real.
    #[inline]
    pub fn deriv_wavenumber(&self, a: usize, k: usize) -> f64 {
        let n = self.dims[a];
        if n % 2 == 0 && k == n / 2 {
            0.0
        } else {
            self.wavenumber(a, k)
        }
    }

    /// Row-major strides.
    pub fn strides(&self) -> Vec<usize> {
        let nd = self.ndim();
        let mut s = vec![1usize; nd];
        for a in (0..nd.saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.dims[a + 1];
        }
        s
    }

    /// Visit every point: `f(flat_index, coords)` with `coords.len() == ndim`.
    pub fn for_each_point(&self, mut f: impl FnMut(usize, &[f64])) {
        let mut flat = 0usize;
        match self.ndim() {
            1 => {
                let n0 = self.dims[0];
                for i in 0..n0 {
                    let x = [self.coord(0, i)];
                    f(flat, &x);
                    flat += 1;
                }
            }
            2 => {
                let (n0, n1) = (self.dims[0], self.dims[1]);
                for i in 0..n0 {
                    let xi = self.coord(0, i);
                    for j in 0..n1 {
                        let x = [xi, self.coord(1, j)];
                        f(flat, &x);
                        flat += 1;
                    }
                }
            }
            3 => {
                let (n0, n1, n2) = (self.dims[0], self.dims[1], self.dims[2]);
                for i in 0..n0 {
                    let xi = self.coord(0, i);
                    for j in 0..n1 {
                        let xj = self.coord(1, j);
                        for k in 0..n2 {
                            let x = [xi, xj, self.coord(2, k)];
                            f(flat, &x);
                            flat += 1;
                        }
                    }
                }
            }
            _ => unreachable!("grids are 1- to 3-dimensional"),
        }
    }

    /// Visit every DFT bin: `f(flat_index, wavenumbers, deriv_wavenumbers)`.
    pub fn for_each_mode(&self, mut f: impl FnMut(usize, &[f64], &[f64])) {
        let mut flat = 0usize;
        match self.ndim() {
            1 => {
                for i in 0..self.dims[0] {
                    f(flat, &[self.wavenumber(0, i)], &[self.deriv_wavenumber(0, i)]);
                    flat += 1;
                }
            }
            2 => {
                for i in 0..self.dims[0] {
                    let (wi, di) = (self.wavenumber(0, i), self.deriv_wavenumber(0, i));
                    for j in 0..self.dims[1] {
                        f(
                            flat,
                            &[wi, self.wavenumber(1, j)],
                            &[di, self.deriv_wavenumber(1, j)],
                        );
                        flat += 1;
                    }
                }
            }
            3 => {
                for i in 0..self.dims[0] {
                    let (wi, di) = (self.wavenumber(0, i), self.deriv_wavenumber(0, i));
                    for j in 0..self.dims[1] {
                        let (wj, dj) = (self.wavenumber(1, j), self.deriv_wavenumber(1, j));
                        for k in 0..self.dims[2] {
                            f(
                                flat,
                                &[wi, wj, self.wavenumber(2, k)],
                                &[di, dj, self.deriv_wavenumber(2, k)],
                            );
                            flat += 1;
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coords_and_spacing() {
        let g = Grid::cubic(1, 16, 4.0).unwrap();
        assert_eq!(g.len(), 16);
        assert!((g.spacing(0) - 0.5).abs() < 1e-15);
        assert!((g.coord(0, 0) + 4.0).abs() < 1e-15);
        assert!((g.coord(0, 8) - 0.0).abs() < 1e-15);
        // last point stops one cell short of +L
        assert!((g.coord(0, 15) - 3.5).abs() < 1e-15);
        assert!((g.cell_volume() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn signed_frequencies_wrap_at_nyquist() {
        let g = Grid::cubic(1, 8, std::f64::consts::PI).unwrap();
        // L = pi makes xi_k = k~ exactly
        let xs: Vec<f64> = (0..8).map(|k| g.wavenumber(0, k)).collect();
        let expect = [0.0, 1.0, 2.0, 3.0, 4.0, -3.0, -2.0, -1.0];
        for (a, b) in xs.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
        // derivative multiplier zeroes the unpaired bin
        assert_eq!(g.deriv_wavenumber(0, 4), 0.0);
        assert!((g.deriv_wavenumber(0, 3) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn row_major_strides() {
        let g = Grid::new(&[8, 10, 12], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(g.strides(), vec![120, 12, 1]);
        let mut count = 0usize;
        let mut last = None;
        g.for_each_point(|flat, x| {
            assert_eq!(flat, count);
            assert_eq!(x.len(), 3);
            count += 1;
            last = Some(x[2]);
        });
        assert_eq!(count, 960);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Grid::new(&[], &[]).is_err());
        assert!(Grid::new(&[8, 8, 8, 8], &[1.0; 4]).is_err());
        assert!(Grid::new(&[7], &[1.0]).is_err());
        assert!(Grid::new(&[4], &[1.0]).is_err());
        assert!(Grid::new(&[8], &[0.0]).is_err());
        assert!(Grid::new(&[8], &[f64::INFINITY]).is_err());
        assert!(Grid::new(&[8, 8], &[1.0]).is_err());
    }
}
