//! Sampled diagnostics along a trajectory, and their CSV form.
//!
//! CSV header: `t,energy,enstrophy,diss_integral,ens4_integral`, floats written
//! with 17 significant digits.

use std::io::{Read, Write};

use super::SolverError;

pub const CSV_HEADER: &str = "t,energy,enstrophy,diss_integral,ens4_integral";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    /// `||u(t)||^2`
    pub energy: f64,
    /// `||Du(t)||^2`
    pub enstrophy: f64,
    /// running `int_0^t ||Du||^2`
    pub diss_integral: f64,
    /// running `int_0^t ||Du||^4`
    pub ens4_integral: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Timeseries {
    rows: Vec<Sample>,
}

impl Timeseries {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a series from rows, checking the ordering and sign invariants.
    pub fn from_rows(rows: Vec<Sample>) -> Result<Self, SolverError> {
        let ts = Self { rows };
        ts.validate()?;
        Ok(ts)
    }

    /// Builds a series from sampled `(t, energy, enstrophy)` triples,
    /// accumulating both running integrals with the trapezoid rule.
    pub fn from_samples(samples: &[(f64, f64, f64)]) -> Result<Self, SolverError> {
        let mut rows: Vec<Sample> = Vec::with_capacity(samples.len());
        for &(t, energy, enstrophy) in samples {
            let (diss_integral, ens4_integral) = match rows.last() {
                None => (0.0, 0.0),
                Some(p) => {
                    let h = t - p.t;
                    (
                        p.diss_integral + 0.5 * h * (p.enstrophy + enstrophy),
                        p.ens4_integral + 0.5 * h * (p.enstrophy * p.enstrophy + enstrophy * enstrophy),
                    )
                }
            };
            rows.push(Sample {
                t,
                energy,
                enstrophy,
                diss_integral,
                ens4_integral,
            });
        }
        Self::from_rows(rows)
    }

    pub(crate) fn push(&mut self, s: Sample) {
        self.rows.push(s);
    }

    pub fn rows(&self) -> &[Sample] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn first(&self) -> Option<&Sample> {
        self.rows.first()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.rows.last()
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |i: usize, why: &str| SolverError::InvalidSeries(format!("row {i}: {why}"));
        for (i, r) in self.rows.iter().enumerate() {
            let vals = [r.t, r.energy, r.enstrophy, r.diss_integral, r.ens4_integral];
            if vals.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(bad(i, "values must be finite and non-negative"));
            }
            if i > 0 {
                let p = &self.rows[i - 1];
                if r.t <= p.t {
                    return Err(bad(i, "t must be strictly increasing"));
                }
                if r.diss_integral < p.diss_integral || r.ens4_integral < p.ens4_integral {
                    return Err(bad(i, "running integrals must be non-decreasing"));
                }
            }
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.t, r.energy, r.enstrophy, r.diss_integral, r.ens4_integral
            )?;
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, SolverError> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers = reader.headers().map_err(|e| SolverError::Csv(e.to_string()))?;
        let names: Vec<&str> = headers.iter().collect();
        let expected: Vec<&str> = CSV_HEADER.split(',').collect();
        if names != expected {
            return Err(SolverError::Csv(format!("unexpected header {:?}", names.join(","))));
        }
        let mut rows = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| SolverError::Csv(e.to_string()))?;
            let mut v = [0.0; 5];
            for (j, field) in rec.iter().enumerate().take(5) {
                v[j] = field
                    .parse()
                    .map_err(|e| SolverError::Csv(format!("row {}: {e}", i + 1)))?;
            }
            if rec.len() != 5 {
                return Err(SolverError::Csv(format!("row {}: expected 5 columns", i + 1)));
            }
            rows.push(Sample {
                t: v[0],
                energy: v[1],
                enstrophy: v[2],
                diss_integral: v[3],
                ens4_integral: v[4],
            });
        }
        Self::from_rows(rows)
    }
}
