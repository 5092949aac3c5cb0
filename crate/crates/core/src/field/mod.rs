//! Periodic, zero-mean, divergence-free velocity fields in Fourier space.
//!
//! A [`SpectralField`] stores the full cube of coefficients `u_hat(k)` for the
//! integer wavevectors `k` with components in `[-n/2, n/2)`. The physical
//! field is `u(x) = sum_k u_hat(k) exp(i (2 pi / L) k . x)` and all norms carry
//! the `L^3` volume factor so that they match integrals over the box.

mod grid;
mod initial;
mod rough;
mod snapshot;

use ndarray::Array3;
use num_complex::Complex64;
use thiserror::Error;

use crate::fft::Fft3;

pub use grid::{Grid, Wavevector};
pub use initial::{single_mode, taylor_green};
pub use rough::{lattice_shell_sum, rough_field, SpectrumSpec};
pub use snapshot::{read_snapshot, write_snapshot};

/// Relative tolerance for the divergence-free and Hermitian invariants.
pub const INVARIANT_RTOL: f64 = 1e-12;

pub type Vec3c = [Complex64; 3];

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),
    #[error("kmax = {kmax} exceeds n/3 = {limit} for this grid")]
    SpecExceedsGrid { kmax: usize, limit: f64 },
    #[error("Hermitian symmetry violated at k = {k:?} (defect {defect:e})")]
    NotHermitian { k: Wavevector, defect: f64 },
    #[error("mean mode is nonzero ({0:e})")]
    NonZeroMean(f64),
    #[error("divergence k . u_hat = {defect:e} at k = {k:?}")]
    NotDivergenceFree { k: Wavevector, defect: f64 },
    #[error("non-finite coefficient at k = {0:?}")]
    NonFinite(Wavevector),
    #[error("snapshot line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Velocity Fourier coefficients on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    comps: [Array3<Complex64>; 3],
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        let n = grid.n();
        let z = Array3::<Complex64>::zeros((n, n, n));
        Self {
            grid,
            comps: [z.clone(), z.clone(), z],
        }
    }

    /// Wraps raw coefficient arrays without checking any invariant.
    ///
    /// Use [`SpectralField::leray_project`] and [`SpectralField::check_invariants`]
    /// to turn arbitrary coefficients into a valid field.
    pub fn from_components(grid: Grid, comps: [Array3<Complex64>; 3]) -> Self {
        let n = grid.n();
        for c in &comps {
            assert_eq!(c.dim(), (n, n, n), "component shape does not match grid");
        }
        Self { grid, comps }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn components(&self) -> &[Array3<Complex64>; 3] {
        &self.comps
    }

    pub fn components_mut(&mut self) -> &mut [Array3<Complex64>; 3] {
        &mut self.comps
    }

    pub fn into_components(self) -> [Array3<Complex64>; 3] {
        self.comps
    }

    pub fn mode(&self, k: Wavevector) -> Vec3c {
        let idx = self.grid.index_of(k);
        [self.comps[0][idx], self.comps[1][idx], self.comps[2][idx]]
    }

    pub fn set_mode(&mut self, k: Wavevector, v: Vec3c) {
        let idx = self.grid.index_of(k);
        for (c, z) in self.comps.iter_mut().zip(v) {
            c[idx] = z;
        }
    }

    /// Sets `u_hat(k) = v` and `u_hat(-k) = conj(v)`.
    pub fn set_mode_pair(&mut self, k: Wavevector, v: Vec3c) {
        self.set_mode(k, v);
        self.set_mode([-k[0], -k[1], -k[2]], v.map(|z| z.conj()));
    }

    /// Iterates `(k, u_hat(k))` over the whole cube.
    pub fn modes(&self) -> impl Iterator<Item = (Wavevector, Vec3c)> + '_ {
        self.comps[0].indexed_iter().map(move |(idx, &x)| {
            let k = self.grid.wavevector(idx);
            (k, [x, self.comps[1][idx], self.comps[2][idx]])
        })
    }

    /// Kinetic energy `L^3 sum_k |u_hat(k)|^2`.
    pub fn energy(&self) -> f64 {
        let s: f64 = self
            .comps
            .iter()
            .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum();
        self.grid.volume() * s
    }

    /// Enstrophy `L^3 sum_k |k'|^2 |u_hat(k)|^2` with `k' = (2 pi / L) k`.
    pub fn enstrophy(&self) -> f64 {
        let scale = self.grid.kscale() * self.grid.kscale();
        let n = self.grid.n();
        let k2: Vec<f64> = (0..n).map(|i| (self.grid.wavenumber(i) as f64).powi(2)).collect();
        let [x, y, z] = self.comps.each_ref().map(|c| c.as_slice().expect("standard layout"));
        let mut s = 0.0;
        let mut p = 0;
        for &a in &k2 {
            for &b in &k2 {
                for &c in &k2 {
                    s += (a + b + c) * (x[p].norm_sqr() + y[p].norm_sqr() + z[p].norm_sqr());
                    p += 1;
                }
            }
        }
        self.grid.volume() * scale * s
    }

    /// Curl, coefficient-wise `i k' x u_hat(k)`.
    pub fn vorticity(&self) -> SpectralField {
        let kscale = self.grid.kscale();
        let mut out = SpectralField::zeros(self.grid);
        let [ux, uy, uz] = &self.comps;
        let [wx, wy, wz] = &mut out.comps;
        for (idx, wxv) in wx.indexed_iter_mut() {
            let k = self.grid.wavevector(idx).map(|c| c as f64 * kscale);
            let (a, b, c) = (ux[idx], uy[idx], uz[idx]);
            let i = Complex64::i();
            *wxv = i * (k[1] * c - k[2] * b);
            wy[idx] = i * (k[2] * a - k[0] * c);
            wz[idx] = i * (k[0] * b - k[1] * a);
        }
        out
    }

    /// Leray projection: removes the component of each coefficient parallel
    /// to its wavevector, zeroes the mean and the unpaired Nyquist modes.
    pub fn leray_project(&self) -> SpectralField {
        let mut out = self.clone();
        out.leray_project_in_place();
        out
    }

    pub fn leray_project_in_place(&mut self) {
        let n = self.grid.n();
        let half = n as i64 / 2;
        let wn: Vec<i64> = (0..n).map(|i| self.grid.wavenumber(i)).collect();
        let [vx, vy, vz] = self.comps.each_mut().map(|c| c.as_slice_mut().expect("standard layout"));
        let zero = Complex64::default();
        let mut p = 0;
        for &a in &wn {
            for &b in &wn {
                for &c in &wn {
                    if a == -half || b == -half || c == -half || p == 0 {
                        vx[p] = zero;
                        vy[p] = zero;
                        vz[p] = zero;
                    } else {
                        let (kx, ky, kz) = (a as f64, b as f64, c as f64);
                        let dot = (kx * vx[p] + ky * vy[p] + kz * vz[p]) / (kx * kx + ky * ky + kz * kz);
                        vx[p] -= kx * dot;
                        vy[p] -= ky * dot;
                        vz[p] -= kz * dot;
                    }
                    p += 1;
                }
            }
        }
    }

    /// Zeroes every mode with some `|k_i| > n/3`.
    pub fn dealias_in_place(&mut self) {
        let grid = self.grid;
        for c in self.comps.iter_mut() {
            for (idx, z) in c.indexed_iter_mut() {
                if !grid.survives_dealias(grid.wavevector(idx)) {
                    *z = Complex64::default();
                }
            }
        }
    }

    /// Replaces `u_hat(k)` by `(u_hat(k) + conj(u_hat(-k))) / 2`.
    pub fn symmetrize_in_place(&mut self) {
        let grid = self.grid;
        for c in self.comps.iter_mut() {
            let src = c.clone();
            for (idx, z) in c.indexed_iter_mut() {
                let mirror = grid.mirror_index(idx);
                *z = (src[idx] + src[mirror].conj()) * 0.5;
            }
        }
    }

    pub fn scaled(&self, a: f64) -> SpectralField {
        let mut out = self.clone();
        for c in out.comps.iter_mut() {
            c.mapv_inplace(|z| z * a);
        }
        out
    }

    /// Largest `|k_hat . u_hat(k)|` over all modes (absolute).
    pub fn max_divergence(&self) -> f64 {
        self.modes()
            .filter(|(k, _)| *k != [0, 0, 0])
            .map(|(k, v)| divergence_defect(k, &v))
            .fold(0.0, f64::max)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Checks Hermitian symmetry, zero mean, divergence-freeness and finiteness.
    ///
    /// Defects are measured against the largest coefficient, so rounding left
    /// in nearly empty modes is not flagged.
    pub fn check_invariants(&self) -> Result<(), FieldError> {
        for (k, v) in self.modes() {
            if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(FieldError::NonFinite(k));
            }
        }
        let tol = INVARIANT_RTOL * self.max_abs_coeff().max(f64::MIN_POSITIVE);
        let mean = self.mode([0, 0, 0]).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if mean > tol {
            return Err(FieldError::NonZeroMean(mean));
        }
        for (k, v) in self.modes() {
            let mk = [-k[0], -k[1], -k[2]];
            let w = self.mode(mk);
            let defect = (0..3).map(|i| (w[i] - v[i].conj()).norm()).fold(0.0, f64::max);
            if defect > tol {
                return Err(FieldError::NotHermitian { k, defect });
            }
            if k != [0, 0, 0] {
                let div = divergence_defect(k, &v);
                if div > tol {
                    return Err(FieldError::NotDivergenceFree { k, defect: div });
                }
            }
        }
        Ok(())
    }

    /// Inverse transform to real collocation values on the `n^3` grid.
    pub fn to_physical(&self, fft: &Fft3) -> [Array3<f64>; 3] {
        self.comps.clone().map(|mut c| {
            fft.inverse(&mut c);
            c.mapv(|z| z.re)
        })
    }

    /// Forward transform of real collocation values. The result is not
    /// projected; call [`SpectralField::leray_project`] if needed.
    pub fn from_physical(grid: Grid, fft: &Fft3, values: &[Array3<f64>; 3]) -> SpectralField {
        let comps = [0, 1, 2].map(|i| {
            let mut c = values[i].mapv(|x| Complex64::new(x, 0.0));
            fft.forward(&mut c);
            c
        });
        SpectralField { grid, comps }
    }
}

pub(crate) fn vec_norm(v: &Vec3c) -> f64 {
    (v[0].norm_sqr() + v[1].norm_sqr() + v[2].norm_sqr()).sqrt()
}

fn divergence_defect(k: Wavevector, v: &Vec3c) -> f64 {
    let kf = k.map(|c| c as f64);
    let kn = (kf[0] * kf[0] + kf[1] * kf[1] + kf[2] * kf[2]).sqrt();
    ((kf[0] * v[0] + kf[1] * v[1] + kf[2] * v[2]) / kn).norm()
}
