//! Packing counts and box-counting dimension of finite point sets on the line.
//!
//! `N(X, eps)` is the largest number of points of `X` whose open `eps`-balls
//! are pairwise disjoint, i.e. whose pairwise distances are all `>= 2 eps`.
//! Touching balls count as disjoint. In one dimension a left-to-right greedy
//! sweep attains the maximum.

use std::io::{BufRead, Write};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DimensionError {
    #[error("invalid point {0}: points must be finite and non-negative")]
    InvalidPoint(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("fit range holds {rows} usable rows, need at least 4 with count >= 2")]
    InsufficientRange { rows: usize },
    #[error("summation range is empty: first term {first} > last term {last}")]
    EmptyRange { first: u64, last: u64 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Sorted, de-duplicated, finite, non-negative points.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointSet1D {
    points: Vec<f64>,
}

impl PointSet1D {
    pub fn new(mut points: Vec<f64>) -> Result<Self, DimensionError> {
        if let Some(&bad) = points.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(DimensionError::InvalidPoint(bad));
        }
        points.sort_by(f64::total_cmp);
        points.dedup();
        Ok(Self { points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn diameter(&self) -> f64 {
        match (self.points.first(), self.points.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    /// One float per line; blank lines and `#` comments are skipped.
    pub fn read_text<R: BufRead>(input: R) -> Result<Self, DimensionError> {
        let mut pts = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line.map_err(|e| DimensionError::Parse { line: i + 1, msg: e.to_string() })?;
            let s = line.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            let v: f64 = s.parse().map_err(|e| DimensionError::Parse {
                line: i + 1,
                msg: format!("{e}"),
            })?;
            pts.push(v);
        }
        Self::new(pts)
    }

    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for p in &self.points {
            writeln!(out, "{p:.16e}")?;
        }
        Ok(())
    }
}

fn check_eps(eps: f64) -> Result<(), DimensionError> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(DimensionError::InvalidArgument(format!("eps = {eps} must be positive")))
    }
}

/// Greedy maximum packing: keep a point when it is at least `2 eps` to the
/// right of the last kept one.
pub fn packing_count(x: &PointSet1D, eps: f64) -> Result<usize, DimensionError> {
    check_eps(eps)?;
    let pts = x.points();
    let mut count = 0;
    let mut i = 0;
    while i < pts.len() {
        count += 1;
        let last = pts[i];
        let rest = &pts[i + 1..];
        i += 1 + rest.partition_point(|&p| p - last < 2.0 * eps);
    }
    Ok(count)
}

/// `(eps, N(X, eps))` rows with `eps` strictly decreasing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PackingCurve {
    rows: Vec<(f64, usize)>,
}

impl PackingCurve {
    pub fn rows(&self) -> &[(f64, usize)] {
        &self.rows
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "eps,count")?;
        for (eps, n) in &self.rows {
            writeln!(out, "{eps:.16e},{n}")?;
        }
        Ok(())
    }
}

pub fn packing_curve(x: &PointSet1D, eps_list: &[f64]) -> Result<PackingCurve, DimensionError> {
    if eps_list.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(DimensionError::InvalidArgument("eps list must be strictly decreasing".into()));
    }
    let rows = eps_list
        .iter()
        .map(|&eps| packing_count(x, eps).map(|n| (eps, n)))
        .collect::<Result<_, _>>()?;
    Ok(PackingCurve { rows })
}

/// `eps_max, eps_max / 2, eps_max / 4, ...` down to `eps_min`.
pub fn dyadic_eps(eps_min: f64, eps_max: f64) -> Result<Vec<f64>, DimensionError> {
    check_eps(eps_min)?;
    check_eps(eps_max)?;
    if eps_min > eps_max {
        return Err(DimensionError::InvalidArgument(format!("eps_min = {eps_min} exceeds eps_max = {eps_max}")));
    }
    let mut out = Vec::new();
    let mut e = eps_max;
    while e >= eps_min * (1.0 - 1e-12) {
        out.push(e);
        e *= 0.5;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxDimFit {
    pub dimension: f64,
    /// RMS deviation of `log N` from the fitted line.
    pub residual: f64,
    pub eps_min: f64,
    pub eps_max: f64,
}

impl BoxDimFit {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "dimension,residual,eps_min,eps_max")?;
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            self.dimension, self.residual, self.eps_min, self.eps_max
        )
    }
}

/// Least-squares slope of `log N(eps)` against `-log eps` over rows with
/// `eps_lo <= eps <= eps_hi`.
pub fn boxdim_fit(curve: &PackingCurve, eps_lo: f64, eps_hi: f64) -> Result<BoxDimFit, DimensionError> {
    let rows: Vec<(f64, usize)> = curve
        .rows()
        .iter()
        .copied()
        .filter(|&(e, _)| e >= eps_lo * (1.0 - 1e-12) && e <= eps_hi * (1.0 + 1e-12))
        .collect();
    if rows.len() < 4 || rows.iter().any(|&(_, n)| n < 2) {
        return Err(DimensionError::InsufficientRange { rows: rows.len() });
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|&(e, n)| (-e.ln(), (n as f64).ln())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(BoxDimFit {
        dimension: slope,
        residual: (rss / m).sqrt(),
        eps_min: rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min),
        eps_max: rows.iter().map(|r| r.0).fold(0.0, f64::max),
    })
}

/// `t_n = (n / c)^(-1/alpha)`, `1 <= n <= n_max`: the times at which a
/// profile `Y(t) = c t^(-alpha)` reaches `Y = n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSequenceSpec {
    pub alpha: f64,
    pub c: f64,
    pub n_max: usize,
}

pub fn power_sequence(spec: &PowerSequenceSpec) -> Result<PointSet1D, DimensionError> {
    if !(spec.alpha.is_finite() && spec.alpha > 0.0) {
        return Err(DimensionError::InvalidArgument(format!("alpha = {} must be positive", spec.alpha)));
    }
    if !(spec.c.is_finite() && spec.c > 0.0) {
        return Err(DimensionError::InvalidArgument(format!("c = {} must be positive", spec.c)));
    }
    if spec.n_max == 0 {
        return Err(DimensionError::InvalidArgument("n_max must be at least 1".into()));
    }
    let p = -1.0 / spec.alpha;
    PointSet1D::new((1..=spec.n_max).map(|n| (n as f64 / spec.c).powf(p)).collect())
}

/// Box-counting dimension `alpha / (1 + alpha)` of `{n^(-1/alpha)}`.
pub fn expected_dim(alpha: f64) -> f64 {
    alpha / (1.0 + alpha)
}

/// `sum_{n=1}^{M} 1 / (sqrt(2) (n + 1))`, which grows like `ln(M) / sqrt(2)`.
pub fn forn_partial_sum(m: u64) -> f64 {
    // smallest terms first
    let s: f64 = (1..=m).rev().map(|n| 1.0 / (n + 1) as f64).sum();
    s / std::f64::consts::SQRT_2
}

/// `sqrt(X^2 + c eps) - X`; decreasing in `X`, and above `sqrt(c eps) / 2`
/// whenever `X < sqrt(c eps) / 2`.
pub fn sqrt_shift_gap(x: f64, c: f64, eps: f64) -> f64 {
    let ce = c * eps;
    // same value as sqrt(x^2 + ce) - x without cancellation for large x
    ce / ((x * x + ce).sqrt() + x)
}

/// The truncated sum in the dimension argument together with its lower bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PackingSumLower {
    /// `ceil(2 (c eps)^(-1/2))`
    pub first: u64,
    /// `floor(eps^(-delta))`
    pub last: u64,
    /// `sum_{n=first}^{last} [sqrt(n^-2 + c eps) - 1/n]`
    pub sum: f64,
    /// `(1/2) sqrt(c eps) (last - first + 1)`
    pub term_bound: f64,
    /// `(1/2) sqrt(c eps) (eps^-delta - 2 (c eps)^(-1/2) - 1)`
    pub closed_form_bound: f64,
}

pub fn packing_sum_lower(eps: f64, c: f64, delta: f64) -> Result<PackingSumLower, DimensionError> {
    check_eps(eps)?;
    if !(c.is_finite() && c > 0.0) {
        return Err(DimensionError::InvalidArgument(format!("c = {c} must be positive")));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(DimensionError::InvalidArgument(format!("delta = {delta} must be positive")));
    }
    let ce = c * eps;
    let lo = 2.0 / ce.sqrt();
    let hi = eps.powf(-delta);
    let first = lo.ceil() as u64;
    let last = hi.floor() as u64;
    if !(lo < hi) || first > last {
        return Err(DimensionError::EmptyRange { first, last });
    }
    let sum: f64 = (first..=last)
        .rev()
        .map(|n| sqrt_shift_gap(1.0 / n as f64, c, eps))
        .sum();
    let half = 0.5 * ce.sqrt();
    Ok(PackingSumLower {
        first,
        last,
        sum,
        term_bound: half * (last - first + 1) as f64,
        closed_form_bound: half * (hi - lo - 1.0),
    })
}

/// `(1 / (2c)) sum_{n=1}^{count} [sqrt(n^-2 + c eps) - 1/n]`: the lower bound
/// on `int ||Du||^2` forced by `count` disjoint `eps`-balls centred at times
/// where `||Du||^2 >= n` for the `n`-th ball.
pub fn envelope_sum_lower_bound(count: usize, c: f64, eps: f64) -> f64 {
    let s: f64 = (1..=count)
        .rev()
        .map(|n| sqrt_shift_gap(1.0 / n as f64, c, eps))
        .sum();
    s / (2.0 * c)
}
