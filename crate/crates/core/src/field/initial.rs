use num_complex::Complex64;

use super::{FieldError, Grid, SpectralField, Wavevector};

/// A single real Fourier pair `u_hat(k) = u_hat(-k) = amplitude`.
///
/// `amplitude` must be orthogonal to `k` and `k` must be resolvable on `grid`.
pub fn single_mode(grid: Grid, k: Wavevector, amplitude: [f64; 3]) -> Result<SpectralField, FieldError> {
    if k == [0, 0, 0] || grid.is_nyquist(k) || k.iter().any(|&c| 2 * c.unsigned_abs() as usize >= grid.n()) {
        return Err(FieldError::InvalidSpectrum(format!("wavevector {k:?} not representable on n = {}", grid.n())));
    }
    let dot: f64 = (0..3).map(|i| k[i] as f64 * amplitude[i]).sum();
    if dot.abs() > 1e-14 * amplitude.iter().map(|a| a.abs()).sum::<f64>() {
        return Err(FieldError::InvalidSpectrum("amplitude not orthogonal to k".into()));
    }
    let mut f = SpectralField::zeros(grid);
    f.set_mode_pair(k, amplitude.map(|a| Complex64::new(a, 0.0)));
    Ok(f)
}

/// Taylor-Green vortex
/// `u = A (sin x cos y cos z, -cos x sin y cos z, 0)` with `x` scaled by `2 pi / L`.
pub fn taylor_green(grid: Grid, amplitude: f64) -> SpectralField {
    let mut f = SpectralField::zeros(grid);
    let i = Complex64::i();
    let zero = Complex64::default();
    for sx in [-1i64, 1] {
        for sy in [-1i64, 1] {
            for sz in [-1i64, 1] {
                let ux = -i * (sx as f64 * amplitude / 8.0);
                let uy = i * (sy as f64 * amplitude / 8.0);
                f.set_mode([sx, sy, sz], [ux, uy, zero]);
            }
        }
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fft::Fft3;
    use std::f64::consts::PI;

    #[test]
    fn taylor_green_matches_physical_formula() {
        let grid = Grid::periodic(8).unwrap();
        let f = taylor_green(grid, 1.5);
        f.check_invariants().unwrap();
        let u = f.to_physical(&Fft3::new(8));
        let h = 2.0 * PI / 8.0;
        for ((a, b, c), &v) in u[0].indexed_iter() {
            let (x, y, z) = (a as f64 * h, b as f64 * h, c as f64 * h);
            assert!((v - 1.5 * x.sin() * y.cos() * z.cos()).abs() < 1e-12);
            assert!((u[1][[a, b, c]] + 1.5 * x.cos() * y.sin() * z.cos()).abs() < 1e-12);
            assert!(u[2][[a, b, c]].abs() < 1e-12);
        }
        // <|u|^2> = A^2 / 4
        let expected = (2.0 * PI).powi(3) * 1.5 * 1.5 / 4.0;
        assert!((f.energy() - expected).abs() < 1e-12 * expected);
        assert!((f.enstrophy() - 3.0 * expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn single_mode_rejects_compressive_amplitude() {
        let grid = Grid::periodic(8).unwrap();
        assert!(single_mode(grid, [1, 0, 0], [1.0, 0.0, 0.0]).is_err());
        assert!(single_mode(grid, [4, 0, 0], [0.0, 1.0, 0.0]).is_err());
        assert!(single_mode(grid, [0, 0, 0], [0.0, 1.0, 0.0]).is_err());
    }
}
