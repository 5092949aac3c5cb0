use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use super::config::{ExperimentConfig, ExperimentKind, InitialShape};
use super::{Check, LabError, Summary};
use crate::bounds::{calibrate_c, certify_trajectory, l4_decay_constant, l4_log_bound_check, Certification};
use crate::dimension::{
    boxdim_fit, dyadic_eps, expected_dim, packing_curve, power_sequence, BoxDimFit, PackingCurve, PointSet1D,
    PowerSequenceSpec,
};
use crate::field::{
    lattice_shell_sum, rough_field, single_mode, taylor_green, FieldError, Grid, SpectralField, SpectrumSpec,
};
use crate::solver::{energy_balance_residual, Solver, SolverConfig, Timeseries};

pub const SCAN_CSV_HEADER: &str = "kmax,n,sup_enstrophy,energy_at_t_small";

/// Relative slack for "energy never increases" between samples.
const ENERGY_MONOTONE_RTOL: f64 = 1e-12;

/// One row of a backward-blowup scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub kmax: usize,
    pub n: usize,
    /// `sup` of the sampled enstrophy over `(0, t_small]`.
    pub sup_enstrophy: f64,
    pub energy_at_t_small: f64,
}

/// Runs the experiment described by `cfg`, writing outputs under
/// `cfg.experiment.output_dir`. Identical configs give byte-identical files.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Summary, LabError> {
    cfg.validate()?;
    let dir = cfg.experiment.output_dir.as_path();
    fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    let summary = match cfg.kind() {
        ExperimentKind::Simulate => simulate(cfg, dir, false)?,
        ExperimentKind::BoundsCertify => simulate(cfg, dir, true)?,
        ExperimentKind::BackwardBlowup => backward_blowup(cfg, dir)?,
        ExperimentKind::DimensionStudy => dimension_study(cfg, dir)?,
        ExperimentKind::RoughdataScaling => roughdata_scaling(cfg, dir)?,
    };
    write_file(&dir.join("summary.txt"), |w| summary.write(w))?;
    Ok(summary)
}

fn write_file<F>(path: &Path, body: F) -> Result<(), LabError>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let file = File::create(path).map_err(|e| LabError::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(|e| LabError::io(path, e))
}

fn kmax_error(e: FieldError) -> LabError {
    match e {
        FieldError::SpecExceedsGrid { .. } => LabError::Config {
            path: "initial.kmax".into(),
            msg: e.to_string(),
        },
        other => other.into(),
    }
}

/// Initial velocity described by `[initial]` on `grid`.
pub fn initial_field(cfg: &ExperimentConfig, grid: Grid) -> Result<SpectralField, LabError> {
    let init = cfg.initial_section()?;
    match init.shape {
        InitialShape::Rough => rough_field(&cfg.spectrum()?, grid).map_err(kmax_error),
        InitialShape::TaylorGreen => Ok(taylor_green(grid, init.amplitude)),
        InitialShape::SingleMode => Ok(single_mode(grid, [1, 0, 0], [0.0, init.amplitude, 0.0])?),
    }
}

fn max_energy_increase(ts: &Timeseries) -> f64 {
    ts.rows()
        .windows(2)
        .map(|p| (p[1].energy - p[0].energy) / p[0].energy.max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

fn simulate(cfg: &ExperimentConfig, dir: &Path, certify: bool) -> Result<Summary, LabError> {
    let grid = cfg.grid()?;
    let scfg = cfg.solver_config()?;
    let u0 = initial_field(cfg, grid)?;
    let solver = Solver::new(grid, scfg)?;
    let mut ts = Timeseries::new();
    let mut worst_div: f64 = 0.0;
    let mut worst_scale: f64 = 0.0;
    let u_end = solver.run_with(&u0, |s, u| {
        ts.push(s);
        worst_div = worst_div.max(u.max_divergence());
        worst_scale = worst_scale.max(u.max_abs_coeff());
    })?;
    write_file(&dir.join("timeseries.csv"), |w| ts.write_csv(w))?;
    write_file(&dir.join("final.snapshot"), |w| {
        crate::field::write_snapshot(&u_end, &mut *w).map_err(|e| std::io::Error::new(std::io::ErrorKind::Other, e))
    })?;

    let kind = cfg.kind();
    let mut summary = Summary::new(kind);
    let e0 = u0.energy();
    let rise = max_energy_increase(&ts);
    summary.check(
        "energy_non_increasing",
        rise <= ENERGY_MONOTONE_RTOL,
        format!("max relative rise {rise:.3e} (tol {ENERGY_MONOTONE_RTOL:.0e})"),
    );
    let tol = cfg.checks.balance_tol;
    let residual = energy_balance_residual(&ts, scfg.nu, e0)?;
    summary.check(
        "energy_balance",
        residual <= tol,
        format!("residual {residual:.3e} (tol {tol:.0e})"),
    );
    let div_tol = 1e-10 * worst_scale.max(1.0);
    summary.check(
        "divergence_free",
        worst_div <= div_tol,
        format!("max |k . u_hat| {worst_div:.3e} (tol {div_tol:.0e})"),
    );

    if certify {
        certify_checks(cfg, &ts, dir, &mut summary)?;
    }
    Ok(summary)
}

fn certify_checks(cfg: &ExperimentConfig, ts: &Timeseries, dir: &Path, summary: &mut Summary) -> Result<(), LabError> {
    let (cert, checks) = certification_report(ts, cfg.bounds.c)?;
    write_file(&dir.join("certification.csv"), |w| cert.write_csv(w))?;
    summary.checks.extend(checks);
    Ok(())
}

/// Certifies `ts` with `c`, or with the calibrated `c*` when `c` is `None`,
/// and runs the integrated fourth-power check with the same constant.
pub fn certification_report(ts: &Timeseries, c: Option<f64>) -> Result<(Certification, Vec<Check>), LabError> {
    let c_star = calibrate_c(ts)?;
    let c = c.unwrap_or(c_star);
    let cert = certify_trajectory(ts, c)?;
    let mut checks = Vec::new();
    let mut check = |name: &str, passed: bool, detail: String| {
        checks.push(Check {
            name: name.into(),
            passed,
            detail,
        })
    };
    check(
        "w_monotone",
        cert.passed,
        format!(
            "c {c:.16e}, calibrated c* {c_star:.16e}, {} violations, worst margin {:.3e}",
            cert.violations.len(),
            cert.worst_margin
        ),
    );
    let l4 = l4_log_bound_check(ts, c)?;
    check(
        "l4_log_bound",
        l4.passed,
        format!("worst relative margin {:.3e} at t = {}", l4.worst_margin, l4.worst_t),
    );
    let decay = l4_decay_constant(ts);
    check("l4_decay_constant", decay.is_finite(), format!("sup sqrt(t) Y(t) = {decay:.6e}"));
    Ok((cert, checks))
}

/// Packing curve over dyadic `eps` in `[eps_min, eps_max]`, its dimension
/// fit, and a check against `expected` when given.
pub fn dimension_report(
    points: &PointSet1D,
    eps_min: f64,
    eps_max: f64,
    expected: Option<f64>,
    tolerance: f64,
) -> Result<(PackingCurve, BoxDimFit, Check), LabError> {
    let eps = dyadic_eps(eps_min, eps_max)?;
    let curve = packing_curve(points, &eps)?;
    let fit = boxdim_fit(&curve, eps_min, eps_max)?;
    let check = match expected {
        Some(e) => Check {
            name: "box_dimension".into(),
            passed: (fit.dimension - e).abs() <= tolerance,
            detail: format!(
                "fitted {:.6} expected {e:.6} (tol {tolerance}) residual {:.3e}",
                fit.dimension, fit.residual
            ),
        },
        None => Check {
            name: "box_dimension".into(),
            passed: fit.dimension.is_finite(),
            detail: format!("fitted {:.6} residual {:.3e}", fit.dimension, fit.residual),
        },
    };
    Ok((curve, fit, check))
}

/// Integrates rough data for each `kmax` up to `t_small` and records the
/// sampled enstrophy peak and the energy at `t_small`.
///
/// `spec.kmax` is ignored. `grid_n` fixes one grid for all entries; otherwise
/// each entry uses the smallest grid that resolves its `kmax`.
pub fn backward_blowup_scan(
    spec: &SpectrumSpec,
    kmax_list: &[usize],
    grid_n: Option<usize>,
    length: f64,
    solver_cfg: &SolverConfig,
    t_small: f64,
) -> Result<Vec<(ScanRow, Timeseries)>, LabError> {
    let cfg = SolverConfig {
        t_end: t_small,
        ..*solver_cfg
    };
    let mut out = Vec::with_capacity(kmax_list.len());
    for &kmax in kmax_list {
        let n = grid_n.unwrap_or_else(|| Grid::min_modes_for(kmax));
        let grid = Grid::new(n, length)?;
        let u0 = rough_field(&SpectrumSpec { kmax, ..*spec }, grid)?;
        let ts = Solver::new(grid, cfg)?.run(&u0)?;
        let sup_enstrophy = ts
            .rows()
            .iter()
            .filter(|r| r.t > 0.0)
            .map(|r| r.enstrophy)
            .fold(0.0, f64::max);
        let energy_at_t_small = ts.last().map(|r| r.energy).unwrap_or(0.0);
        out.push((
            ScanRow {
                kmax,
                n,
                sup_enstrophy,
                energy_at_t_small,
            },
            ts,
        ));
    }
    Ok(out)
}

fn backward_blowup(cfg: &ExperimentConfig, dir: &Path) -> Result<Summary, LabError> {
    let scan = cfg.scan_section()?;
    let t_small = scan.t_small.unwrap_or_default();
    let solver_section = cfg.solver_section()?;
    let scfg = cfg.solver_config_from(solver_section, t_small)?;
    let spec = cfg.spectrum()?;
    for &k in &scan.kmax_list {
        cfg.grid_for_kmax(k)?;
    }
    let results = backward_blowup_scan(&spec, &scan.kmax_list, cfg.grid.n, cfg.grid.length, &scfg, t_small)
        .map_err(|e| match e {
            LabError::Field(f) => kmax_error(f),
            other => other,
        })?;
    for (row, ts) in &results {
        let sub = dir.join(format!("kmax_{}", row.kmax));
        fs::create_dir_all(&sub).map_err(|e| LabError::io(&sub, e))?;
        write_file(&sub.join("timeseries.csv"), |w| ts.write_csv(w))?;
    }
    write_file(&dir.join("scan.csv"), |w| {
        writeln!(w, "{SCAN_CSV_HEADER}")?;
        for (r, _) in &results {
            writeln!(
                w,
                "{},{},{:.16e},{:.16e}",
                r.kmax, r.n, r.sup_enstrophy, r.energy_at_t_small
            )?;
        }
        Ok(())
    })?;

    let rows: Vec<ScanRow> = results.iter().map(|(r, _)| *r).collect();
    let mut summary = Summary::new(cfg.kind());
    let increasing = rows.windows(2).all(|p| p[1].sup_enstrophy > p[0].sup_enstrophy);
    let sups: Vec<String> = rows.iter().map(|r| format!("{:.6e}", r.sup_enstrophy)).collect();
    summary.check(
        "sup_enstrophy_increasing",
        increasing,
        format!("sup enstrophy by kmax [{}]", sups.join(", ")),
    );
    let e_max = rows.iter().map(|r| r.energy_at_t_small).fold(0.0, f64::max);
    let e_min = rows.iter().map(|r| r.energy_at_t_small).fold(f64::INFINITY, f64::min);
    let spread = if e_max > 0.0 { (e_max - e_min) / e_max } else { 0.0 };
    summary.check(
        "energy_bounded",
        spread <= scan.energy_tolerance,
        format!("relative spread of energy at t_small {spread:.3e} (tol {:.3e})", scan.energy_tolerance),
    );
    Ok(summary)
}

fn dimension_study(cfg: &ExperimentConfig, dir: &Path) -> Result<Summary, LabError> {
    let d = cfg
        .dimension
        .as_ref()
        .ok_or_else(|| LabError::Config {
            path: "dimension".into(),
            msg: "section missing".into(),
        })?;
    let points = power_sequence(&PowerSequenceSpec {
        alpha: d.alpha,
        c: d.c,
        n_max: d.n_max,
    })?;
    let (curve, fit, check) = dimension_report(&points, d.eps_min, d.eps_max, Some(expected_dim(d.alpha)), d.tolerance)?;
    write_file(&dir.join("points.txt"), |w| points.write_text(w))?;
    write_file(&dir.join("packing.csv"), |w| curve.write_csv(w))?;
    write_file(&dir.join("fit.csv"), |w| fit.write_csv(w))?;
    let mut summary = Summary::new(cfg.kind());
    summary.checks.push(check);
    Ok(summary)
}

/// Rough initial data on one grid, next to its shell-sum oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoughRow {
    pub kmax: usize,
    pub n: usize,
    pub energy: f64,
    pub enstrophy: f64,
    /// `L^3 A^2 sum |k|^(-2 gamma)`
    pub energy_oracle: f64,
    /// `L^3 A^2 (2 pi / L)^2 sum |k|^(2 - 2 gamma)`
    pub enstrophy_oracle: f64,
}

pub const ROUGH_CSV_HEADER: &str = "kmax,n,energy,enstrophy,energy_oracle,enstrophy_oracle";

impl RoughRow {
    pub fn write_csv_row<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.kmax, self.n, self.energy, self.enstrophy, self.energy_oracle, self.enstrophy_oracle
        )
    }
}

/// Builds the rough field for `spec` on `grid` and measures it against the oracles.
pub fn rough_report(spec: &SpectrumSpec, grid: Grid) -> Result<(SpectralField, RoughRow), LabError> {
    let u = rough_field(spec, grid).map_err(kmax_error)?;
    let a2 = spec.amplitude * spec.amplitude;
    let row = RoughRow {
        kmax: spec.kmax,
        n: grid.n(),
        energy: u.energy(),
        enstrophy: u.enstrophy(),
        energy_oracle: grid.volume() * a2 * lattice_shell_sum(spec.kmax, -2.0 * spec.gamma),
        enstrophy_oracle: grid.volume() * a2 * grid.kscale().powi(2) * lattice_shell_sum(spec.kmax, 2.0 - 2.0 * spec.gamma),
    };
    Ok((u, row))
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

/// Relative tolerance for matching the shell-sum oracles.
const ORACLE_RTOL: f64 = 1e-10;

/// Energy and enstrophy against their oracles, worst over `rows`.
pub fn rough_oracle_checks(rows: &[RoughRow]) -> Vec<Check> {
    let e_err = rows.iter().map(|r| rel(r.energy, r.energy_oracle)).fold(0.0, f64::max);
    let z_err = rows.iter().map(|r| rel(r.enstrophy, r.enstrophy_oracle)).fold(0.0, f64::max);
    vec![
        Check {
            name: "energy_matches_shell_sum".into(),
            passed: e_err <= ORACLE_RTOL,
            detail: format!("max relative error {e_err:.3e} (tol {ORACLE_RTOL:.0e})"),
        },
        Check {
            name: "enstrophy_matches_shell_sum".into(),
            passed: z_err <= ORACLE_RTOL,
            detail: format!("max relative error {z_err:.3e} (tol {ORACLE_RTOL:.0e})"),
        },
    ]
}

fn roughdata_scaling(cfg: &ExperimentConfig, dir: &Path) -> Result<Summary, LabError> {
    let scan = cfg.scan_section()?;
    let base = cfg.spectrum()?;
    let mut rows = Vec::with_capacity(scan.kmax_list.len());
    for &kmax in &scan.kmax_list {
        let grid = cfg.grid_for_kmax(kmax)?;
        rows.push(rough_report(&SpectrumSpec { kmax, ..base }, grid)?.1);
    }
    write_file(&dir.join("scaling.csv"), |w| {
        writeln!(w, "{ROUGH_CSV_HEADER}")?;
        rows.iter().try_for_each(|r| r.write_csv_row(&mut *w))
    })?;

    let mut summary = Summary::new(cfg.kind());
    summary.checks.extend(rough_oracle_checks(&rows));
    for p in rows.windows(2).filter(|p| p[1].kmax == 2 * p[0].kmax) {
        let (a, b) = (&p[0], &p[1]);
        let de = rel(b.energy, a.energy);
        summary.check(
            &format!("energy_doubling_{}_{}", a.kmax, b.kmax),
            de < scan.doubling_energy_tolerance,
            format!("relative change {de:.4e} (tol {})", scan.doubling_energy_tolerance),
        );
        let ratio = if a.enstrophy > 0.0 { b.enstrophy / a.enstrophy } else { f64::NAN };
        summary.check(
            &format!("enstrophy_doubling_{}_{}", a.kmax, b.kmax),
            (ratio - scan.enstrophy_ratio).abs() <= scan.enstrophy_ratio_tolerance,
            format!(
                "ratio {ratio:.4} (expected {} +- {})",
                scan.enstrophy_ratio, scan.enstrophy_ratio_tolerance
            ),
        );
    }
    Ok(summary)
}
