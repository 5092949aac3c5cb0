//! `lab`: command-line front end for the experiments and the standalone checks.
//!
//! Exit status: 0 when every check passes, 1 when some check fails or a run
//! aborts, 2 on invalid configuration or input.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nslab::dimension::{expected_dim, power_sequence, PointSet1D, PowerSequenceSpec};
use nslab::field::{write_snapshot, Grid, SpectrumSpec};
use nslab::lab::{
    certification_report, dimension_report, rough_oracle_checks, rough_report, run_experiment, Check,
    ExperimentConfig, ExperimentKind, LabError, ROUGH_CSV_HEADER,
};
use nslab::solver::Timeseries;

#[derive(Parser)]
#[command(name = "lab", version, about = "Enstrophy-envelope laboratory for 3D periodic Navier-Stokes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulate or bounds-certify experiment.
    Simulate(ConfigArg),
    /// Run a backward-blowup experiment.
    BlowupScan(ConfigArg),
    /// Run any experiment kind.
    Run(ConfigArg),
    /// Certify a timeseries CSV against the backward enstrophy envelope.
    Bounds(BoundsArgs),
    /// Packing curve and box-counting dimension of a point set.
    Dimension(DimensionArgs),
    /// Generate rough initial data and compare it with the shell-sum oracles.
    Roughdata(RoughArgs),
}

#[derive(Args)]
struct ConfigArg {
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct BoundsArgs {
    /// Timeseries CSV written by the solver.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, conflicts_with = "calibrate")]
    c: Option<f64>,
    /// Use the smallest constant the samples allow (the default).
    #[arg(long)]
    calibrate: bool,
    /// Write the certification CSV here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DimensionArgs {
    /// Text file with one point per line.
    #[arg(long, conflicts_with_all = ["alpha", "nmax"], required_unless_present = "alpha")]
    points: Option<PathBuf>,
    /// Use the points `(n / c)^(-1/alpha)`, `n = 1..=nmax`.
    #[arg(long, requires = "nmax")]
    alpha: Option<f64>,
    #[arg(long)]
    nmax: Option<usize>,
    #[arg(long = "c", default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 2f64.powi(-18))]
    eps_min: f64,
    #[arg(long, default_value_t = 2f64.powi(-6))]
    eps_max: f64,
    /// Dimension to check against; defaults to `alpha / (1 + alpha)` with `--alpha`.
    #[arg(long)]
    expected: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    tolerance: f64,
    /// Directory for `packing.csv` and `fit.csv`; otherwise both go to standard output.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct RoughArgs {
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    kmax: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
    /// Grid size; defaults to the smallest grid that resolves `kmax`.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 2.0 * PI)]
    length: f64,
    /// Write the spectral snapshot here.
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Failure of a command, mapped to the exit status.
enum Failure {
    Input(String),
    Run(String),
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        if e.is_config() {
            Failure::Input(e.to_string())
        } else {
            Failure::Run(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

fn input_err(e: impl std::fmt::Display) -> Failure {
    Failure::Input(e.to_string())
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Run(format!("{}: {e}", path.display())))
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn report(checks: &[Check]) -> io::Result<bool> {
    let mut out = io::stdout().lock();
    for c in checks {
        writeln!(out, "{c}")?;
    }
    Ok(checks.iter().all(|c| c.passed))
}

fn experiment(arg: &ConfigArg, allowed: &[ExperimentKind]) -> Result<bool, Failure> {
    let cfg = ExperimentConfig::load(&arg.config)?;
    if !allowed.is_empty() && !allowed.contains(&cfg.kind()) {
        let names: Vec<_> = allowed.iter().map(|k| k.name()).collect();
        return Err(Failure::Input(format!(
            "config error at experiment.kind: {} is not one of {}",
            cfg.kind().name(),
            names.join(", ")
        )));
    }
    let summary = run_experiment(&cfg)?;
    summary.write(io::stdout().lock())?;
    Ok(summary.all_passed())
}

fn bounds(args: &BoundsArgs) -> Result<bool, Failure> {
    let ts = Timeseries::read_csv(open(&args.input)?).map_err(input_err)?;
    if let Some(c) = args.c {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Failure::Input(format!("--c {c} must be finite and non-negative")));
        }
    }
    let (cert, checks) = certification_report(&ts, args.c).map_err(|e| match e {
        LabError::Bounds(b) => Failure::Input(b.to_string()),
        other => other.into(),
    })?;
    match &args.output {
        Some(path) => {
            let mut w = create(path)?;
            cert.write_csv(&mut w)?;
            w.flush()?;
        }
        None => cert.write_csv(io::stdout().lock())?,
    }
    Ok(report(&checks)?)
}

fn dimension(args: &DimensionArgs) -> Result<bool, Failure> {
    let (points, expected) = match (&args.points, args.alpha, args.nmax) {
        (Some(path), _, _) => (PointSet1D::read_text(open(path)?).map_err(input_err)?, args.expected),
        (None, Some(alpha), Some(n_max)) => {
            let spec = PowerSequenceSpec { alpha, c: args.c, n_max };
            let points = power_sequence(&spec).map_err(input_err)?;
            (points, args.expected.or(Some(expected_dim(alpha))))
        }
        _ => return Err(Failure::Input("give --points, or --alpha with --nmax".into())),
    };
    let (curve, fit, check) =
        dimension_report(&points, args.eps_min, args.eps_max, expected, args.tolerance).map_err(|e| match e {
            LabError::Dimension(d) => Failure::Input(d.to_string()),
            other => other.into(),
        })?;
    match &args.output_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let mut w = create(&dir.join("packing.csv"))?;
            curve.write_csv(&mut w)?;
            w.flush()?;
            let mut w = create(&dir.join("fit.csv"))?;
            fit.write_csv(&mut w)?;
            w.flush()?;
        }
        None => {
            let mut out = io::stdout().lock();
            curve.write_csv(&mut out)?;
            fit.write_csv(&mut out)?;
        }
    }
    Ok(report(&[check])?)
}

fn roughdata(args: &RoughArgs) -> Result<bool, Failure> {
    let spec = SpectrumSpec {
        gamma: args.gamma,
        amplitude: args.amplitude,
        kmax: args.kmax,
        seed: args.seed,
    };
    spec.validate().map_err(input_err)?;
    let n = args.n.unwrap_or_else(|| Grid::min_modes_for(args.kmax));
    let grid = Grid::new(n, args.length).map_err(input_err)?;
    let (u, row) = rough_report(&spec, grid)?;
    if let Some(path) = &args.output {
        let mut w = create(path)?;
        write_snapshot(&u, &mut w).map_err(|e| Failure::Run(e.to_string()))?;
        w.flush()?;
    }
    {
        let mut out = io::stdout().lock();
        writeln!(out, "{ROUGH_CSV_HEADER}")?;
        row.write_csv_row(&mut out)?;
    }
    Ok(report(&rough_oracle_checks(&[row]))?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(a) => experiment(a, &[ExperimentKind::Simulate, ExperimentKind::BoundsCertify]),
        Command::BlowupScan(a) => experiment(a, &[ExperimentKind::BackwardBlowup]),
        Command::Run(a) => experiment(a, &[]),
        Command::Bounds(a) => bounds(a),
        Command::Dimension(a) => dimension(a),
        Command::Roughdata(a) => roughdata(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
