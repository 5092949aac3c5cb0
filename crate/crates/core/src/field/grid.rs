use std::f64::consts::PI;

use super::FieldError;

/// Integer wavevector, components in `[-n/2, n/2)`.
pub type Wavevector = [i64; 3];

pub(crate) fn norm2(k: Wavevector) -> i64 {
    k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
}

/// Periodic box `[0, L)^3` resolved by `n` modes per dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    length: f64,
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Self, FieldError> {
        if n < 4 || n % 2 != 0 {
            return Err(FieldError::InvalidGrid(format!("n = {n} must be even and >= 4")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(FieldError::InvalidGrid(format!("L = {length} must be positive")));
        }
        Ok(Self { n, length })
    }

    /// The `2 pi`-periodic box.
    pub fn periodic(n: usize) -> Result<Self, FieldError> {
        Self::new(n, 2.0 * PI)
    }

    /// Smallest even `n >= 4` with `kmax <= n / 3`.
    pub fn min_modes_for(kmax: usize) -> usize {
        let n = (3 * kmax).max(4);
        n + n % 2
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(3)
    }

    /// Physical wavenumber of the unit index, `2 pi / L`.
    pub fn kscale(&self) -> f64 {
        2.0 * PI / self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// `n / 3`, the two-thirds-rule cutoff.
    pub fn dealias_limit(&self) -> f64 {
        self.n as f64 / 3.0
    }

    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    pub fn wavevector(&self, idx: (usize, usize, usize)) -> Wavevector {
        [self.wavenumber(idx.0), self.wavenumber(idx.1), self.wavenumber(idx.2)]
    }

    /// Array index of `k`, wrapping components modulo `n`.
    pub fn index_of(&self, k: Wavevector) -> (usize, usize, usize) {
        let n = self.n as i64;
        let w = |c: i64| c.rem_euclid(n) as usize;
        (w(k[0]), w(k[1]), w(k[2]))
    }

    pub fn mirror_index(&self, idx: (usize, usize, usize)) -> (usize, usize, usize) {
        let n = self.n;
        ((n - idx.0) % n, (n - idx.1) % n, (n - idx.2) % n)
    }

    /// True when some component sits on `-n/2`, which has no distinct partner `-k`.
    pub fn is_nyquist(&self, k: Wavevector) -> bool {
        let half = self.n as i64 / 2;
        k.iter().any(|&c| c == -half)
    }

    /// True when every `|k_i| <= n/3`.
    pub fn survives_dealias(&self, k: Wavevector) -> bool {
        let n = self.n as i64;
        k.iter().all(|&c| 3 * c.abs() <= n)
    }
}
