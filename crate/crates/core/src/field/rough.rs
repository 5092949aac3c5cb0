//! Finite-energy, rough initial data with a power-law spectrum.
//!
//! Each mode draws its direction from its own ChaCha8 stream: the generator is
//! seeded with `seed` and the stream number encodes the wavevector (see
//! [`mode_stream`]). A mode therefore gets the same direction on every grid
//! and for every `kmax` that contains it.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::grid::norm2;
use super::{vec_norm, FieldError, Grid, SpectralField, Vec3c, Wavevector};

/// Power-law amplitude spectrum `|u_hat(k)| = amplitude * |k|^(-gamma)` for `1 <= |k| <= kmax`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumSpec {
    pub gamma: f64,
    pub amplitude: f64,
    pub kmax: usize,
    pub seed: u64,
}

impl SpectrumSpec {
    pub fn validate(&self) -> Result<(), FieldError> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(FieldError::InvalidSpectrum(format!("gamma = {} must be positive", self.gamma)));
        }
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(FieldError::InvalidSpectrum(format!(
                "amplitude = {} must be non-negative",
                self.amplitude
            )));
        }
        if self.kmax == 0 {
            return Err(FieldError::InvalidSpectrum("kmax must be at least 1".into()));
        }
        Ok(())
    }
}

/// Stream number for wavevector `k`: three 21-bit offset-binary fields.
pub fn mode_stream(k: Wavevector) -> u64 {
    const OFFSET: i64 = 1 << 20;
    let f = |c: i64| ((c + OFFSET) as u64) & ((1 << 21) - 1);
    (f(k[0]) << 42) | (f(k[1]) << 21) | f(k[2])
}

fn in_half_space(k: Wavevector) -> bool {
    k[2] > 0 || (k[2] == 0 && (k[1] > 0 || (k[1] == 0 && k[0] > 0)))
}

/// Unit complex 3-vector orthogonal to `k`, drawn isotropically.
fn random_direction(seed: u64, k: Wavevector) -> Vec3c {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(mode_stream(k));
    let kf = k.map(|c| c as f64);
    let k2 = kf[0] * kf[0] + kf[1] * kf[1] + kf[2] * kf[2];
    loop {
        let mut d: Vec3c = [Complex64::default(); 3];
        for z in d.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *z = Complex64::new(re, im);
        }
        let dot = (kf[0] * d[0] + kf[1] * d[1] + kf[2] * d[2]) / k2;
        for i in 0..3 {
            d[i] -= kf[i] * dot;
        }
        let norm = vec_norm(&d);
        if norm > 1e-8 {
            return d.map(|z| z / norm);
        }
    }
}

/// Builds `u_hat(k) = amplitude |k|^(-gamma) d(k)` on the ball `1 <= |k| <= kmax`.
pub fn rough_field(spec: &SpectrumSpec, grid: Grid) -> Result<SpectralField, FieldError> {
    spec.validate()?;
    if spec.kmax as f64 > grid.dealias_limit() {
        return Err(FieldError::SpecExceedsGrid {
            kmax: spec.kmax,
            limit: grid.dealias_limit(),
        });
    }
    let mut f = SpectralField::zeros(grid);
    if spec.amplitude == 0.0 {
        return Ok(f);
    }
    let kmax = spec.kmax as i64;
    for kz in 0..=kmax {
        for ky in -kmax..=kmax {
            for kx in -kmax..=kmax {
                let k = [kx, ky, kz];
                let q = norm2(k);
                if q == 0 || q > kmax * kmax || !in_half_space(k) {
                    continue;
                }
                let mag = spec.amplitude * (q as f64).powf(-0.5 * spec.gamma);
                let d = random_direction(spec.seed, k);
                f.set_mode_pair(k, d.map(|z| z * mag));
            }
        }
    }
    Ok(f)
}

/// `sum |k|^power` over integer triples with `1 <= |k| <= kmax`.
pub fn lattice_shell_sum(kmax: usize, power: f64) -> f64 {
    let kmax = kmax as i64;
    let mut s = 0.0;
    for kx in -kmax..=kmax {
        for ky in -kmax..=kmax {
            for kz in -kmax..=kmax {
                let q = norm2([kx, ky, kz]);
                if q > 0 && q <= kmax * kmax {
                    s += (q as f64).powf(0.5 * power);
                }
            }
        }
    }
    s
}
