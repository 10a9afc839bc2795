use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::spectral::SpectralWorkspace;
use crate::{C64, ComplexField, Grid};

/// Deterministic smooth random field: a band-limited Fourier sum with
/// Gaussian-damped coefficients, localized by a Gaussian envelope so the
/// result decays at the box boundary like physical data.
///
/// `max_mode` caps the signed index per axis (spectral support), `seed`
/// fixes the stream (same bits on every platform), and the field is scaled
/// so `sup |u| = amplitude`.
pub fn random_smooth_field(grid: &Grid, seed: u64, amplitude: f64, max_mode: usize) -> ComplexField {
    assert!(amplitude > 0.0, "amplitude must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ws = SpectralWorkspace::new(grid);
    let dims = grid.dims().to_vec();
    let strides = grid.strides();
    let mut spec = vec![C64::ZERO; grid.len()];

    // Fill low modes in a fixed flat order so the stream is reproducible.
    let sigma2 = (max_mode.max(1) as f64 / 2.0).powi(2);
    for (flat, slot) in spec.iter_mut().enumerate() {
        let mut inside = true;
        let mut k2 = 0.0f64;
        for (&n, &stride) in dims.iter().zip(&strides) {
            let idx = (flat / stride) % n;
            let signed = Grid::signed_index(n, idx);
            if signed.unsigned_abs() as usize > max_mode {
                inside = false;
                break;
            }
            k2 += (signed * signed) as f64;
        }
        if inside {
            let damp = (-k2 / (2.0 * sigma2)).exp();
            let re: f64 = rng.random_range(-1.0..1.0);
            let im: f64 = rng.random_range(-1.0..1.0);
            *slot = C64::new(re, im) * damp;
        }
    }

    let mut u = ws.synthesize(spec, 0.0);
    // localize: half-width L/4 keeps boundary values below e^{-8}
    let widths: Vec<f64> = grid.extents().iter().map(|l| l / 4.0).collect();
    grid.for_each_point(|flat, x| {
        let arg: f64 = x
            .iter()
            .zip(&widths)
            .map(|(a, w)| (a / w) * (a / w))
            .sum();
        u.values_mut()[flat] *= (-0.5 * arg).exp();
    });
    let sup = u.sup_abs();
    assert!(sup > 0.0, "random field degenerated to zero");
    let scale = amplitude / sup;
    for v in u.values_mut() {
        *v *= scale;
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_normalized() {
        let g = Grid::cubic(1, 256, 10.0).unwrap();
        let a = random_smooth_field(&g, 42, 0.7, 12);
        let b = random_smooth_field(&g, 42, 0.7, 12);
        assert_eq!(a.values(), b.values());
        assert!((a.sup_abs() - 0.7).abs() < 1e-12);
        let c = random_smooth_field(&g, 43, 0.7, 12);
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn decays_at_the_boundary() {
        let g = Grid::cubic(1, 256, 10.0).unwrap();
        let u = random_smooth_field(&g, 7, 1.0, 12);
        let edge = u.values()[0].norm();
        assert!(
            edge < 1e-3,
            "field should be localized; boundary value {edge}"
        );
    }

    #[test]
    fn two_dimensional_variant() {
        let g = Grid::cubic(2, 64, 6.0).unwrap();
        let u = random_smooth_field(&g, 11, 0.5, 8);
        u.ensure_finite("random 2d").unwrap();
        assert!((u.sup_abs() - 0.5).abs() < 1e-12);
    }
}
