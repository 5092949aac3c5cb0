//! Pseudo-spectral time integration of the unforced incompressible
//! Navier-Stokes equations on the periodic box.
//!
//! Advection is taken in rotational form `u x omega`; the gradient part is
//! removed by the Leray projection together with the pressure. The viscous
//! term is integrated exactly by the factor `exp(-nu |k'|^2 t)` (Lawson RK4).
//!
//! The running integrals of `||Du||^2` and `||Du||^4` are advanced with the
//! same RK4 weights, using the enstrophy of the physical stage states. This
//! keeps them fourth-order accurate, so the discrete energy balance
//! `E(t) + 2 nu int_0^t ||Du||^2 = E(0)` closes to the time-stepping error.

mod timeseries;

use ndarray::{Array3, Zip};
use num_complex::Complex64;
use thiserror::Error;

use crate::fft::Fft3;
use crate::field::{Grid, SpectralField};

pub use timeseries::{Sample, Timeseries, CSV_HEADER};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver config: {0}")]
    InvalidConfig(String),
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("timeseries is empty")]
    EmptySeries,
    #[error("invalid timeseries: {0}")]
    InvalidSeries(String),
    #[error("csv: {0}")]
    Csv(String),
}

/// How the step size is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStep {
    Fixed(f64),
    /// Courant number on `max(|u_x| + |u_y| + |u_z|)`, re-evaluated every sample interval.
    Cfl(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub nu: f64,
    pub time_step: TimeStep,
    pub t_end: f64,
    pub sample_interval: f64,
    pub dealias: bool,
    /// Off gives the pure heat equation; used for verification.
    pub nonlinear: bool,
}

impl SolverConfig {
    pub fn new(nu: f64, time_step: TimeStep, t_end: f64, sample_interval: f64) -> Self {
        Self {
            nu,
            time_step,
            t_end,
            sample_interval,
            dealias: true,
            nonlinear: true,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: String| Err(SolverError::InvalidConfig(m));
        if !(self.nu.is_finite() && self.nu > 0.0) {
            return bad(format!("nu = {} must be positive", self.nu));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return bad(format!("t_end = {} must be positive", self.t_end));
        }
        if !(self.sample_interval.is_finite() && self.sample_interval > 0.0) {
            return bad(format!("sample_interval = {} must be positive", self.sample_interval));
        }
        match self.time_step {
            TimeStep::Fixed(dt) => {
                if !(dt.is_finite() && dt > 0.0) {
                    return bad(format!("dt = {dt} must be positive"));
                }
                if self.sample_interval < dt {
                    return bad(format!("sample_interval = {} is below dt = {dt}", self.sample_interval));
                }
            }
            TimeStep::Cfl(c) => {
                if !(c.is_finite() && c > 0.0) {
                    return bad(format!("cfl = {c} must be positive"));
                }
            }
        }
        Ok(())
    }
}

/// Stage-weighted increments of the two running integrals over one step.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepIntegrals {
    pub diss: f64,
    pub ens4: f64,
}

/// Owns the FFT plans for one grid and configuration.
#[derive(Debug, Clone)]
pub struct Solver {
    grid: Grid,
    cfg: SolverConfig,
    fft: Fft3,
    /// `|k'|^2` per mode.
    k2: Array3<f64>,
    axis: AxisTables,
}

/// Per-axis lookup tables indexed by array position.
#[derive(Debug, Clone)]
struct AxisTables {
    wn: Vec<i64>,
    mirror: Vec<usize>,
    /// Survives the two-thirds rule.
    keep: Vec<bool>,
    /// Sits on `-n/2`.
    nyquist: Vec<bool>,
}

impl AxisTables {
    fn new(grid: &Grid) -> Self {
        let n = grid.n();
        let wn: Vec<i64> = (0..n).map(|i| grid.wavenumber(i)).collect();
        Self {
            mirror: (0..n).map(|i| (n - i) % n).collect(),
            keep: wn.iter().map(|&k| 3 * k.abs() <= n as i64).collect(),
            nyquist: wn.iter().map(|&k| k == -(n as i64) / 2).collect(),
            wn,
        }
    }
}

fn flat<T>(a: &Array3<T>) -> &[T] {
    a.as_slice().expect("standard layout")
}

fn flat_mut<T>(a: &mut Array3<T>) -> &mut [T] {
    a.as_slice_mut().expect("standard layout")
}

impl Solver {
    pub fn new(grid: Grid, cfg: SolverConfig) -> Result<Self, SolverError> {
        cfg.validate()?;
        let n = grid.n();
        let s2 = grid.kscale() * grid.kscale();
        let k2 = Array3::from_shape_fn((n, n, n), |idx| {
            let k = grid.wavevector(idx);
            s2 * (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64
        });
        Ok(Self {
            grid,
            cfg,
            fft: Fft3::new(n),
            k2,
            axis: AxisTables::new(&grid),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn fft(&self) -> &Fft3 {
        &self.fft
    }

    /// Projected, dealiased `u x omega`, i.e. `-(u . grad) u` up to a gradient.
    ///
    /// Real fields travel in pairs through one complex transform (`a + i b`),
    /// so this costs three inverse and two forward FFTs.
    pub fn nonlinear_term(&self, f: &SpectralField) -> SpectralField {
        if !self.cfg.nonlinear {
            return SpectralField::zeros(self.grid);
        }
        let n = self.grid.n();
        let kscale = self.grid.kscale();
        let kf: Vec<f64> = self.axis.wn.iter().map(|&k| k as f64 * kscale).collect();
        let i = Complex64::i();

        // (ux, uy), (uz, wx), (wy, wz)
        let mut packed = [(); 3].map(|_| Array3::<Complex64>::zeros((n, n, n)));
        {
            let [ux, uy, uz] = f.components().each_ref().map(flat);
            let [p0, p1, p2] = &mut packed;
            let (p0, p1, p2) = (flat_mut(p0), flat_mut(p1), flat_mut(p2));
            let mut p = 0;
            for &kx in &kf {
                for &ky in &kf {
                    for &kz in &kf {
                        let (a, b, c) = (ux[p], uy[p], uz[p]);
                        let wx = i * (ky * c - kz * b);
                        let wy = i * (kz * a - kx * c);
                        let wz = i * (kx * b - ky * a);
                        p0[p] = a + i * b;
                        p1[p] = c + i * wx;
                        p2[p] = wy + i * wz;
                        p += 1;
                    }
                }
            }
        }
        for z in packed.iter_mut() {
            self.fft.inverse(z);
        }

        // (cx, cy) packed, cz alone
        let mut cxy = Array3::<Complex64>::zeros((n, n, n));
        let mut cz = Array3::<Complex64>::zeros((n, n, n));
        {
            let [p0, p1, p2] = packed.each_ref().map(flat);
            let (oxy, oz) = (flat_mut(&mut cxy), flat_mut(&mut cz));
            for p in 0..oxy.len() {
                let (ux, uy) = (p0[p].re, p0[p].im);
                let (uz, wx) = (p1[p].re, p1[p].im);
                let (wy, wz) = (p2[p].re, p2[p].im);
                oxy[p] = Complex64::new(uy * wz - uz * wy, uz * wx - ux * wz);
                oz[p] = Complex64::new(ux * wy - uy * wx, 0.0);
            }
        }
        self.fft.forward(&mut cxy);
        self.fft.forward(&mut cz);

        // Split the pair and take Hermitian parts, then dealias and project.
        let mut out = SpectralField::zeros(self.grid);
        {
            let (zxy, zz) = (flat(&cxy), flat(&cz));
            let [ox, oy, oz] = out.components_mut();
            let (ox, oy, oz) = (flat_mut(ox), flat_mut(oy), flat_mut(oz));
            let ax = &self.axis;
            let dealias = self.cfg.dealias;
            let mut p = 0;
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        let skip = ax.nyquist[a] || ax.nyquist[b] || ax.nyquist[c] || p == 0;
                        let cut = dealias && !(ax.keep[a] && ax.keep[b] && ax.keep[c]);
                        if skip || cut {
                            p += 1;
                            continue;
                        }
                        let m = (ax.mirror[a] * n + ax.mirror[b]) * n + ax.mirror[c];
                        let (zp, zm) = (zxy[p], zxy[m].conj());
                        let vx = (zp + zm) * 0.5;
                        let vy = (zp - zm) * Complex64::new(0.0, -0.5);
                        let vz = (zz[p] + zz[m].conj()) * 0.5;
                        let k = [kf[a], kf[b], kf[c]];
                        let dot = (k[0] * vx + k[1] * vy + k[2] * vz) / (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
                        ox[p] = vx - k[0] * dot;
                        oy[p] = vy - k[1] * dot;
                        oz[p] = vz - k[2] * dot;
                        p += 1;
                    }
                }
            }
        }
        out
    }

    fn viscous_factor(&self, h: f64) -> Array3<f64> {
        let nu = self.cfg.nu;
        self.k2.mapv(|k2| (-nu * k2 * h).exp())
    }

    /// One integrating-factor RK4 step of size `h`.
    pub fn step(&self, f: &SpectralField, h: f64) -> Result<SpectralField, SolverError> {
        self.step_with_integrals(f, h).map(|(u, _)| u)
    }

    /// As [`Solver::step`], also returning the RK4-weighted increments of
    /// `int ||Du||^2` and `int ||Du||^4` over the step.
    pub fn step_with_integrals(&self, f: &SpectralField, h: f64) -> Result<(SpectralField, StepIntegrals), SolverError> {
        if !(h.is_finite() && h > 0.0) {
            return Err(SolverError::InvalidConfig(format!("step size {h} must be positive")));
        }
        let e1 = self.viscous_factor(0.5 * h);
        let e2 = e1.mapv(|x| x * x);

        let a = self.nonlinear_term(f);
        // u2 = E (u + h/2 a)
        let u2 = combine(&[(f, 1.0), (&a, 0.5 * h)], Some(&e1));
        let b = self.nonlinear_term(&u2);
        // u3 = E u + h/2 b
        let mut u3 = combine(&[(f, 1.0)], Some(&e1));
        add_scaled(&mut u3, &b, 0.5 * h, None);
        let c = self.nonlinear_term(&u3);
        // u4 = E^2 u + h E c
        let mut u4 = combine(&[(f, 1.0)], Some(&e2));
        add_scaled(&mut u4, &c, h, Some(&e1));
        let d = self.nonlinear_term(&u4);

        // u_new = E^2 u + h/6 (E^2 a + 2 E (b + c) + d)
        let mut next = combine(&[(f, 1.0), (&a, h / 6.0)], Some(&e2));
        let bc = combine(&[(&b, h / 3.0), (&c, h / 3.0)], Some(&e1));
        add_scaled(&mut next, &bc, 1.0, None);
        add_scaled(&mut next, &d, h / 6.0, None);
        next.leray_project_in_place();

        let z = [f.enstrophy(), u2.enstrophy(), u3.enstrophy(), u4.enstrophy()];
        let integrals = StepIntegrals {
            diss: h / 6.0 * (z[0] + 2.0 * z[1] + 2.0 * z[2] + z[3]),
            ens4: h / 6.0 * (z[0] * z[0] + 2.0 * z[1] * z[1] + 2.0 * z[2] * z[2] + z[3] * z[3]),
        };
        let energy = next.energy();
        if !energy.is_finite() || !integrals.diss.is_finite() || !integrals.ens4.is_finite() {
            return Err(SolverError::NonFinite { t: f64::NAN });
        }
        Ok((next, integrals))
    }

    /// Largest `|u_x| + |u_y| + |u_z|` over the collocation points.
    pub fn max_velocity(&self, f: &SpectralField) -> f64 {
        let u = f.to_physical(&self.fft);
        let mut m = 0.0f64;
        Zip::from(&u[0]).and(&u[1]).and(&u[2]).for_each(|a, b, c| {
            m = m.max(a.abs() + b.abs() + c.abs());
        });
        m
    }

    fn max_step(&self, f: &SpectralField, span: f64) -> f64 {
        match self.cfg.time_step {
            TimeStep::Fixed(dt) => dt,
            TimeStep::Cfl(cfl) => {
                let umax = self.max_velocity(f);
                if umax > 0.0 {
                    cfl * self.grid.spacing() / umax
                } else {
                    span
                }
            }
        }
    }

    /// Integrates from `t = 0` to `t_end`, sampling every `sample_interval`
    /// (plus `t = 0` and `t_end`). Each sample interval is split into equal
    /// steps no longer than the configured step.
    pub fn run(&self, u0: &SpectralField) -> Result<Timeseries, SolverError> {
        let mut ts = Timeseries::new();
        self.run_with(u0, |s, _| ts.push(s))?;
        Ok(ts)
    }

    /// As [`Solver::run`], handing each sample and the field at that time to `visit`.
    pub fn run_with<F>(&self, u0: &SpectralField, mut visit: F) -> Result<SpectralField, SolverError>
    where
        F: FnMut(Sample, &SpectralField),
    {
        let cfg = &self.cfg;
        let mut u = u0.clone();
        let mut t = 0.0;
        let mut diss = 0.0;
        let mut ens4 = 0.0;
        visit(
            Sample {
                t,
                energy: u.energy(),
                enstrophy: u.enstrophy(),
                diss_integral: 0.0,
                ens4_integral: 0.0,
            },
            &u,
        );
        let intervals = (cfg.t_end / cfg.sample_interval * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        for k in 1..=intervals {
            let target = if k == intervals {
                cfg.t_end
            } else {
                k as f64 * cfg.sample_interval
            };
            let span = target - t;
            let max_h = self.max_step(&u, span);
            let steps = (span / max_h * (1.0 - 1e-12)).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            for s in 0..steps {
                let (next, inc) = self.step_with_integrals(&u, h).map_err(|e| match e {
                    SolverError::NonFinite { .. } => SolverError::NonFinite { t: t + s as f64 * h },
                    other => other,
                })?;
                u = next;
                diss += inc.diss;
                ens4 += inc.ens4;
            }
            t = target;
            visit(
                Sample {
                    t,
                    energy: u.energy(),
                    enstrophy: u.enstrophy(),
                    diss_integral: diss,
                    ens4_integral: ens4,
                },
                &u,
            );
        }
        Ok(u)
    }
}

fn combine(terms: &[(&SpectralField, f64)], factor: Option<&Array3<f64>>) -> SpectralField {
    let mut out = SpectralField::zeros(*terms[0].0.grid());
    for (f, a) in terms {
        add_scaled(&mut out, f, *a, None);
    }
    if let Some(e) = factor {
        for c in out.components_mut().iter_mut() {
            Zip::from(c).and(e).for_each(|z, &e| *z *= e);
        }
    }
    out
}

/// `out += a * factor * f`
fn add_scaled(out: &mut SpectralField, f: &SpectralField, a: f64, factor: Option<&Array3<f64>>) {
    for (o, c) in out.components_mut().iter_mut().zip(f.components()) {
        match factor {
            Some(e) => Zip::from(o).and(c).and(e).for_each(|o, &z, &e| *o += z * (a * e)),
            None => Zip::from(o).and(c).for_each(|o: &mut Complex64, &z| *o += z * a),
        }
    }
}

/// `max_t |E(t) + 2 nu D(t) - E0| / E0`, with `D` the running dissipation integral.
///
/// Returns the absolute residual when `E0 = 0`.
pub fn energy_balance_residual(ts: &Timeseries, nu: f64, e0: f64) -> Result<f64, SolverError> {
    if ts.is_empty() {
        return Err(SolverError::EmptySeries);
    }
    let scale = if e0 > 0.0 { e0 } else { 1.0 };
    Ok(ts
        .rows()
        .iter()
        .map(|r| (r.energy + 2.0 * nu * r.diss_integral - e0).abs() / scale)
        .fold(0.0, f64::max))
}
