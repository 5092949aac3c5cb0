//! Cubic 3D complex FFT on `n x n x n` arrays.
//!
//! Convention: `u(x) = sum_k u_hat(k) exp(i (2 pi / L) k . x)` on the collocation
//! points `x_j = j L / n`, so [`Fft3::forward`] divides by `n^3` and
//! [`Fft3::inverse`] does not.

use std::sync::Arc;

use ndarray::Array3;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Planned forward and inverse transforms for one cube size.
#[derive(Clone)]
pub struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("n", &self.n).finish()
    }
}

impl Fft3 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Physical values to Fourier coefficients, in place.
    pub fn forward(&self, data: &mut Array3<Complex64>) {
        self.transform(data, &self.forward);
        let scale = 1.0 / (self.n * self.n * self.n) as f64;
        data.mapv_inplace(|z| z * scale);
    }

    /// Fourier coefficients to physical values, in place.
    pub fn inverse(&self, data: &mut Array3<Complex64>) {
        self.transform(data, &self.inverse);
    }

    fn transform(&self, data: &mut Array3<Complex64>, fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        assert_eq!(data.dim(), (n, n, n), "array shape does not match planned size");
        let s = data.as_slice_mut().expect("standard layout");
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];

        // Last axis is contiguous: every row is one transform.
        fft.process_with_scratch(s, &mut scratch);

        let plane = n * n;
        let mut buf = vec![Complex64::default(); plane];
        // Axis 1: transpose each i-plane so lanes a[i, :, l] become rows.
        for p in s.chunks_exact_mut(plane) {
            for j in 0..n {
                for l in 0..n {
                    buf[l * n + j] = p[j * n + l];
                }
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for j in 0..n {
                for l in 0..n {
                    p[j * n + l] = buf[l * n + j];
                }
            }
        }

        // Axis 0: for each j gather lanes a[:, j, l] into rows.
        for j in 0..n {
            for i in 0..n {
                let src = i * plane + j * n;
                for l in 0..n {
                    buf[l * n + i] = s[src + l];
                }
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for i in 0..n {
                let dst = i * plane + j * n;
                for l in 0..n {
                    s[dst + l] = buf[l * n + i];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn single_mode_lands_on_its_wavevector() {
        let n = 8;
        let fft = Fft3::new(n);
        // u(x) = exp(i (k . x)) with k = (1, -2, 3) on [0, 2 pi)^3
        let k = [1.0, -2.0, 3.0];
        let h = 2.0 * PI / n as f64;
        let mut a = Array3::from_shape_fn((n, n, n), |(i, j, l)| {
            let phase = k[0] * i as f64 * h + k[1] * j as f64 * h + k[2] * l as f64 * h;
            Complex64::from_polar(1.0, phase)
        });
        fft.forward(&mut a);
        for ((i, j, l), z) in a.indexed_iter() {
            let expected = if (i, j, l) == (1, n - 2, 3) { 1.0 } else { 0.0 };
            assert!((z.re - expected).abs() < 1e-12 && z.im.abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_undoes_forward() {
        let n = 6;
        let fft = Fft3::new(n);
        let orig = Array3::from_shape_fn((n, n, n), |(i, j, l)| {
            Complex64::new((i * 7 + j * 3 + l) as f64 % 5.0, (i + 2 * j) as f64 * 0.1)
        });
        let mut a = orig.clone();
        fft.forward(&mut a);
        fft.inverse(&mut a);
        for (x, y) in a.iter().zip(orig.iter()) {
            assert!((x - y).norm() < 1e-12);
        }
    }
}
