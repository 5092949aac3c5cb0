//! Riccati envelopes for the enstrophy `Y = ||Du||^2`.
//!
//! The comparison equation is `Y' = (c/2) Y^3`, whose solution through
//! `Y(s) = Y_s` is `Y_s / sqrt(1 - c (t - s) Y_s^2)`. Read forwards it bounds
//! growth; read backwards it gives the lower bound
//! `Y(s) >= 1 / sqrt(Y(t)^-2 + c (t - s))`, which stays valid when `Y(t)` is
//! infinite. Along a sampled trajectory the backward bound holds for every
//! pair `s < t` exactly when `W(t) = Y(t)^-2 + c t` is non-decreasing, so the
//! certification is a single pass over consecutive samples.

use std::io::Write;

use thiserror::Error;

use crate::solver::Timeseries;

/// Relative slack on `W` differences when certifying.
pub const W_RTOL: f64 = 1e-12;
/// Relative quadrature slack for the integrated `||Du||^4` bound.
pub const L4_RTOL: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum BoundsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("interval [{s}, {t}) is empty")]
    InvalidInterval { s: f64, t: f64 },
    #[error("zero enstrophy sample at t = {0}")]
    ZeroEnstrophySample(f64),
    #[error("points must be strictly decreasing (index {0})")]
    Unsorted(usize),
}

/// The Riccati constant `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    c: f64,
}

impl BoundParams {
    pub fn new(c: f64) -> Result<Self, BoundsError> {
        if !(c.is_finite() && c > 0.0) {
            return Err(BoundsError::InvalidArgument(format!("c = {c} must be positive and finite")));
        }
        Ok(Self { c })
    }

    pub fn c(&self) -> f64 {
        self.c
    }
}

/// Outcome of propagating the forward envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Envelope {
    Finite(f64),
    /// `c dt Y_s^2 >= 1`: the envelope has blown up before `dt`.
    HorizonExceeded,
}

impl Envelope {
    pub fn value(self) -> Option<f64> {
        match self {
            Envelope::Finite(y) => Some(y),
            Envelope::HorizonExceeded => None,
        }
    }
}

fn check_finite_nonneg(name: &str, x: f64) -> Result<(), BoundsError> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(BoundsError::InvalidArgument(format!("{name} = {x} must be finite and non-negative")))
    }
}

/// `Y_s / sqrt(1 - c dt Y_s^2)` while `c dt Y_s^2 < 1`.
pub fn forward_envelope(y_s: f64, c: f64, dt: f64) -> Result<Envelope, BoundsError> {
    check_finite_nonneg("Y_s", y_s)?;
    check_finite_nonneg("c", c)?;
    check_finite_nonneg("dt", dt)?;
    if dt == 0.0 {
        return Ok(Envelope::Finite(y_s));
    }
    let q = c * dt * y_s * y_s;
    if q >= 1.0 {
        Ok(Envelope::HorizonExceeded)
    } else {
        Ok(Envelope::Finite(y_s / (1.0 - q).sqrt()))
    }
}

/// `1 / (c Y_0^2)`; infinite for `Y_0 = 0`.
pub fn regularity_horizon(y0: f64, c: f64) -> Result<f64, BoundsError> {
    check_finite_nonneg("Y_0", y0)?;
    BoundParams::new(c)?;
    if y0 == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / (c * y0 * y0))
}

/// `1 / sqrt(Y_t^-2 + c dt)`; `Y_t` may be `+inf`.
pub fn backward_envelope(y_t: f64, c: f64, dt: f64) -> Result<f64, BoundsError> {
    if y_t.is_nan() || y_t <= 0.0 {
        return Err(BoundsError::InvalidArgument(format!("Y_t = {y_t} must be positive or +inf")));
    }
    check_finite_nonneg("c", c)?;
    check_finite_nonneg("dt", dt)?;
    if dt == 0.0 {
        return Ok(y_t);
    }
    let inv2 = if y_t.is_infinite() { 0.0 } else { 1.0 / (y_t * y_t) };
    Ok(1.0 / (inv2 + c * dt).sqrt())
}

/// `int_{t-eps}^{t} backward_envelope(Y_t, c, t - s) ds = (2/c) (sqrt(Y_t^-2 + c eps) - Y_t^-1)`.
pub fn backward_envelope_integral(y_t: f64, c: f64, eps: f64) -> Result<f64, BoundsError> {
    backward_envelope(y_t, c, eps)?;
    BoundParams::new(c)?;
    let inv = if y_t.is_infinite() { 0.0 } else { 1.0 / y_t };
    Ok(2.0 / c * ((inv * inv + c * eps).sqrt() - inv))
}

/// Leray's bound `1 / sqrt(c (T - s))` before a blowup at `T`.
pub fn leray_lower(blowup: f64, s: f64, c: f64) -> Result<f64, BoundsError> {
    BoundParams::new(c)?;
    if !(s.is_finite() && blowup.is_finite()) || s >= blowup || s < 0.0 {
        return Err(BoundsError::InvalidInterval { s, t: blowup });
    }
    Ok(1.0 / (c * (blowup - s)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertRow {
    pub t: f64,
    /// `Y(t)^-2 + c t`
    pub w: f64,
    /// `max(0, W(t_prev) - W(t))`, zero on the first row.
    pub violation_margin: f64,
}

/// A consecutive sample pair where `W` decreased.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub s: f64,
    pub t: f64,
    pub drop: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certification {
    pub c: f64,
    pub passed: bool,
    pub rows: Vec<CertRow>,
    pub violations: Vec<Violation>,
    /// Smallest `W(t_i) - W(t_{i-1})`; negative when some pair violates.
    pub worst_margin: f64,
}

impl Certification {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,W,violation_margin")?;
        for r in &self.rows {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", r.t, r.w, r.violation_margin)?;
        }
        Ok(())
    }
}

fn inverse_squares(ts: &Timeseries) -> Result<Vec<(f64, f64)>, BoundsError> {
    ts.rows()
        .iter()
        .map(|r| {
            if r.enstrophy > 0.0 {
                Ok((r.t, 1.0 / (r.enstrophy * r.enstrophy)))
            } else {
                Err(BoundsError::ZeroEnstrophySample(r.t))
            }
        })
        .collect()
}

/// Checks that `W(t) = Y(t)^-2 + c t` is non-decreasing over consecutive samples.
///
/// `c = 0` is accepted as the limiting case.
pub fn certify_trajectory(ts: &Timeseries, c: f64) -> Result<Certification, BoundsError> {
    check_finite_nonneg("c", c)?;
    let inv = inverse_squares(ts)?;
    let mut rows = Vec::with_capacity(inv.len());
    let mut violations = Vec::new();
    let mut worst = f64::INFINITY;
    let mut prev: Option<(f64, f64)> = None;
    for &(t, y_inv2) in &inv {
        let w = y_inv2 + c * t;
        let mut violation_margin = 0.0;
        if let Some((s, w_prev)) = prev {
            let diff = w - w_prev;
            worst = worst.min(diff);
            if -diff > W_RTOL * w.abs().max(w_prev.abs()) {
                violation_margin = -diff;
                violations.push(Violation { s, t, drop: -diff });
            }
        }
        rows.push(CertRow { t, w, violation_margin });
        prev = Some((t, w));
    }
    Ok(Certification {
        c,
        passed: violations.is_empty(),
        rows,
        violations,
        worst_margin: if worst.is_finite() { worst } else { 0.0 },
    })
}

/// Smallest `c >= 0` for which [`certify_trajectory`] passes on these samples.
pub fn calibrate_c(ts: &Timeseries) -> Result<f64, BoundsError> {
    let inv = inverse_squares(ts)?;
    Ok(inv
        .windows(2)
        .map(|p| (p[0].1 - p[1].1) / (p[1].0 - p[0].0))
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L4Check {
    pub passed: bool,
    /// Smallest `(lhs - rhs) / rhs` over samples with `rhs > 0`; zero when there are none.
    pub worst_margin: f64,
    /// Time of the worst margin.
    pub worst_t: f64,
}

/// Right side of the integrated bound, `(1/c) ln(1 + c t Y^2)`, with its `c -> 0` limit `t Y^2`.
pub fn l4_log_rhs(t: f64, y: f64, c: f64) -> f64 {
    let x = t * y * y;
    if c == 0.0 {
        x
    } else {
        (c * x).ln_1p() / c
    }
}

/// Checks `int_0^t ||Du||^4 >= (1/c) ln(1 + c t Y(t)^2)` at every sample,
/// allowing a relative quadrature slack of [`L4_RTOL`].
pub fn l4_log_bound_check(ts: &Timeseries, c: f64) -> Result<L4Check, BoundsError> {
    check_finite_nonneg("c", c)?;
    let mut out = L4Check {
        passed: true,
        worst_margin: f64::INFINITY,
        worst_t: 0.0,
    };
    for r in ts.rows() {
        let rhs = l4_log_rhs(r.t, r.enstrophy, c);
        let lhs = r.ens4_integral;
        if rhs <= 0.0 {
            continue;
        }
        let margin = (lhs - rhs) / rhs;
        if margin < out.worst_margin {
            out.worst_margin = margin;
            out.worst_t = r.t;
        }
        if lhs < rhs * (1.0 - L4_RTOL) {
            out.passed = false;
        }
    }
    if !out.worst_margin.is_finite() {
        out.worst_margin = 0.0;
    }
    Ok(out)
}

/// `sup_t sqrt(t) Y(t)` over the samples.
pub fn l4_decay_constant(ts: &Timeseries) -> f64 {
    ts.rows().iter().map(|r| r.t.sqrt() * r.enstrophy).fold(0.0, f64::max)
}

/// `sum_n sqrt(t_n - t_{n+1})` for `t_1 > t_2 > ...`.
pub fn gap_sqrt_sum(points: &[f64]) -> Result<f64, BoundsError> {
    let mut s = 0.0;
    for (i, p) in points.windows(2).enumerate() {
        if !(p[0] > p[1]) {
            return Err(BoundsError::Unsorted(i + 1));
        }
        s += (p[0] - p[1]).sqrt();
    }
    Ok(s)
}

/// `floor(2 sqrt(c) E / sqrt(eps))`: how many disjoint `eps`-balls around
/// Leray-saturating singular times a dissipation budget `E` can pay for.
pub fn packing_budget(e: f64, c: f64, eps: f64) -> Result<u64, BoundsError> {
    check_finite_nonneg("E", e)?;
    BoundParams::new(c)?;
    if !(eps.is_finite() && eps > 0.0) {
        return Err(BoundsError::InvalidArgument(format!("eps = {eps} must be positive")));
    }
    Ok((2.0 * c.sqrt() * e / eps.sqrt()).floor() as u64)
}

/// Minimal enstrophy profile with blowups at `singular_times`: on each
/// left neighbourhood `[T_i - eps, T_i)` it equals Leray's bound, elsewhere zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LerayProfile {
    singular_times: Vec<f64>,
    c: f64,
    eps: f64,
}

impl LerayProfile {
    pub fn new(mut singular_times: Vec<f64>, c: f64, eps: f64) -> Result<Self, BoundsError> {
        BoundParams::new(c)?;
        if !(eps.is_finite() && eps > 0.0) {
            return Err(BoundsError::InvalidArgument(format!("eps = {eps} must be positive")));
        }
        if singular_times.iter().any(|t| !t.is_finite()) {
            return Err(BoundsError::InvalidArgument("singular times must be finite".into()));
        }
        singular_times.sort_by(f64::total_cmp);
        Ok(Self { singular_times, c, eps })
    }

    pub fn singular_times(&self) -> &[f64] {
        &self.singular_times
    }

    pub fn value(&self, s: f64) -> f64 {
        self.singular_times
            .iter()
            .filter(|&&t| s < t && t - s <= self.eps)
            .map(|&t| 1.0 / (self.c * (t - s)).sqrt())
            .fold(0.0, f64::max)
    }
}
