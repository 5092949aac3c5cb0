//! Experiment configuration.
//!
//! A config file is TOML restricted to flat `[section]` tables of `key = value`
//! pairs (arrays of integers are the only compound values). Sections:
//!
//! ```toml
//! [experiment]
//! kind = "simulate"        # simulate | backward-blowup | bounds-certify | dimension-study | roughdata-scaling
//! seed = 7
//! output_dir = "out/sim"
//!
//! [grid]
//! n = 32                   # optional for backward-blowup / roughdata-scaling
//! length = 6.283185307179586
//!
//! [initial]
//! shape = "rough"          # rough | taylor-green | single-mode
//! amplitude = 0.25
//! gamma = 2.0
//! kmax = 8
//!
//! [solver]
//! nu = 0.02
//! cfl = 0.4                # or dt = 0.01
//! t_end = 0.5
//! sample_interval = 0.01
//! dealias = true
//!
//! [bounds]
//! c = 1.0                  # omit to calibrate
//!
//! [checks]
//! balance_tol = 1e-6
//!
//! [dimension]
//! alpha = 1.0
//! c = 1.0
//! n_max = 1000000
//! eps_min = 3.814697265625e-6
//! eps_max = 0.015625
//! tolerance = 0.05
//!
//! [scan]                   # backward-blowup and roughdata-scaling
//! kmax_list = [8, 16, 32]
//! t_small = 0.01
//! energy_tolerance = 0.1
//! ```

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::LabError;
use crate::field::{Grid, SpectrumSpec};
use crate::solver::{SolverConfig, TimeStep};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Simulate,
    BackwardBlowup,
    BoundsCertify,
    DimensionStudy,
    RoughdataScaling,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::BackwardBlowup => "backward-blowup",
            ExperimentKind::BoundsCertify => "bounds-certify",
            ExperimentKind::DimensionStudy => "dimension-study",
            ExperimentKind::RoughdataScaling => "roughdata-scaling",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: Option<usize>,
    #[serde(default = "two_pi")]
    pub length: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { n: None, length: two_pi() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialShape {
    Rough,
    TaylorGreen,
    /// `u_hat(+-(1,0,0)) = (0, amplitude, 0)`
    SingleMode,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub shape: InitialShape,
    pub amplitude: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    pub kmax: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub nu: f64,
    pub dt: Option<f64>,
    pub cfl: Option<f64>,
    pub t_end: f64,
    pub sample_interval: f64,
    #[serde(default = "yes")]
    pub dealias: bool,
    #[serde(default = "yes")]
    pub nonlinear: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    pub c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksSection {
    #[serde(default = "default_balance_tol")]
    pub balance_tol: f64,
}

impl Default for ChecksSection {
    fn default() -> Self {
        Self {
            balance_tol: default_balance_tol(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionSection {
    pub alpha: f64,
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_eps_min")]
    pub eps_min: f64,
    #[serde(default = "default_eps_max")]
    pub eps_max: f64,
    #[serde(default = "default_dim_tol")]
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub kmax_list: Vec<usize>,
    pub t_small: Option<f64>,
    #[serde(default = "default_scan_energy_tol")]
    pub energy_tolerance: f64,
    /// Allowed relative energy change per kmax doubling (roughdata-scaling).
    #[serde(default = "default_doubling_energy_tol")]
    pub doubling_energy_tolerance: f64,
    /// Expected enstrophy ratio per doubling and its half-width (roughdata-scaling).
    #[serde(default = "default_enstrophy_ratio")]
    pub enstrophy_ratio: f64,
    #[serde(default = "default_enstrophy_ratio_tol")]
    pub enstrophy_ratio_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub grid: GridSection,
    pub initial: Option<InitialSection>,
    pub solver: Option<SolverSection>,
    #[serde(default)]
    pub bounds: BoundsSection,
    #[serde(default)]
    pub checks: ChecksSection,
    pub dimension: Option<DimensionSection>,
    pub scan: Option<ScanSection>,
}

fn two_pi() -> f64 {
    2.0 * PI
}
fn default_gamma() -> f64 {
    2.0
}
fn yes() -> bool {
    true
}
fn one() -> f64 {
    1.0
}
fn default_balance_tol() -> f64 {
    1e-6
}
fn default_n_max() -> usize {
    1_000_000
}
fn default_eps_min() -> f64 {
    2f64.powi(-18)
}
fn default_eps_max() -> f64 {
    2f64.powi(-6)
}
fn default_dim_tol() -> f64 {
    0.05
}
fn default_scan_energy_tol() -> f64 {
    0.1
}
fn default_doubling_energy_tol() -> f64 {
    0.02
}
fn default_enstrophy_ratio() -> f64 {
    2.0
}
fn default_enstrophy_ratio_tol() -> f64 {
    0.3
}

fn config_err(path: &str, msg: impl Into<String>) -> LabError {
    LabError::Config {
        path: path.to_string(),
        msg: msg.into(),
    }
}

fn require_positive(path: &str, x: f64) -> Result<(), LabError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(config_err(path, format!("{x} must be positive")))
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, LabError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
            let path = e
                .span()
                .and_then(|span| key_at(text, span.start))
                .unwrap_or_else(|| "<root>".into());
            config_err(&path, e.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err("<file>", format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn kind(&self) -> ExperimentKind {
        self.experiment.kind
    }

    /// Checks that every section the chosen kind needs is present and valid.
    pub fn validate(&self) -> Result<(), LabError> {
        require_positive("grid.length", self.grid.length)?;
        if let Some(n) = self.grid.n {
            Grid::new(n, self.grid.length).map_err(|e| config_err("grid.n", e.to_string()))?;
        }
        if let Some(s) = &self.solver {
            self.solver_config_from(s, s.t_end)?;
        }
        if let Some(i) = &self.initial {
            if !(i.amplitude.is_finite() && i.amplitude >= 0.0) {
                return Err(config_err("initial.amplitude", "must be non-negative"));
            }
            require_positive("initial.gamma", i.gamma)?;
        }
        require_positive("checks.balance_tol", self.checks.balance_tol)?;
        if let Some(c) = self.bounds.c {
            require_positive("bounds.c", c)?;
        }
        match self.kind() {
            ExperimentKind::Simulate | ExperimentKind::BoundsCertify => {
                self.grid()?;
                self.initial_section()?;
                self.solver_section()?;
                let init = self.initial_section()?;
                if init.shape == InitialShape::Rough {
                    self.spectrum()?;
                }
            }
            ExperimentKind::BackwardBlowup => {
                let scan = self.scan_section()?;
                self.check_kmax_list(scan)?;
                let t_small = scan.t_small.ok_or_else(|| config_err("scan.t_small", "missing"))?;
                require_positive("scan.t_small", t_small)?;
                let init = self.initial_section()?;
                if init.shape != InitialShape::Rough {
                    return Err(config_err("initial.shape", "backward-blowup needs rough data"));
                }
                let s = self.solver_section()?;
                if s.sample_interval > t_small {
                    return Err(config_err("solver.sample_interval", "must not exceed scan.t_small"));
                }
                self.solver_config_from(s, t_small)?;
                require_positive("scan.energy_tolerance", scan.energy_tolerance)?;
            }
            ExperimentKind::RoughdataScaling => {
                let scan = self.scan_section()?;
                self.check_kmax_list(scan)?;
                let init = self.initial_section()?;
                if init.shape != InitialShape::Rough {
                    return Err(config_err("initial.shape", "roughdata-scaling needs rough data"));
                }
            }
            ExperimentKind::DimensionStudy => {
                let d = self
                    .dimension
                    .as_ref()
                    .ok_or_else(|| config_err("dimension", "section missing"))?;
                require_positive("dimension.alpha", d.alpha)?;
                require_positive("dimension.c", d.c)?;
                require_positive("dimension.eps_min", d.eps_min)?;
                require_positive("dimension.eps_max", d.eps_max)?;
                require_positive("dimension.tolerance", d.tolerance)?;
                if d.n_max == 0 {
                    return Err(config_err("dimension.n_max", "must be at least 1"));
                }
                if d.eps_min > d.eps_max {
                    return Err(config_err("dimension.eps_min", "exceeds dimension.eps_max"));
                }
            }
        }
        Ok(())
    }

    fn check_kmax_list(&self, scan: &ScanSection) -> Result<(), LabError> {
        if scan.kmax_list.is_empty() {
            return Err(config_err("scan.kmax_list", "must not be empty"));
        }
        if scan.kmax_list.contains(&0) || scan.kmax_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(config_err("scan.kmax_list", "must be positive and strictly increasing"));
        }
        if let Some(n) = self.grid.n {
            let limit = n as f64 / 3.0;
            if scan.kmax_list.iter().any(|&k| k as f64 > limit) {
                return Err(config_err("scan.kmax_list", format!("entries must be <= n/3 = {limit}")));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid, LabError> {
        let n = self.grid.n.ok_or_else(|| config_err("grid.n", "missing"))?;
        Grid::new(n, self.grid.length).map_err(|e| config_err("grid.n", e.to_string()))
    }

    /// Grid for a scan entry: `grid.n` when given, else the smallest grid holding `kmax`.
    pub fn grid_for_kmax(&self, kmax: usize) -> Result<Grid, LabError> {
        let n = self.grid.n.unwrap_or_else(|| Grid::min_modes_for(kmax));
        Grid::new(n, self.grid.length).map_err(|e| config_err("grid.n", e.to_string()))
    }

    pub fn initial_section(&self) -> Result<&InitialSection, LabError> {
        self.initial.as_ref().ok_or_else(|| config_err("initial", "section missing"))
    }

    pub fn solver_section(&self) -> Result<&SolverSection, LabError> {
        self.solver.as_ref().ok_or_else(|| config_err("solver", "section missing"))
    }

    pub fn scan_section(&self) -> Result<&ScanSection, LabError> {
        self.scan.as_ref().ok_or_else(|| config_err("scan", "section missing"))
    }

    /// Rough-data spectrum from `[initial]`, seeded by `experiment.seed`.
    pub fn spectrum(&self) -> Result<SpectrumSpec, LabError> {
        let init = self.initial_section()?;
        let kmax = match self.kind() {
            ExperimentKind::BackwardBlowup | ExperimentKind::RoughdataScaling => init.kmax.unwrap_or(1),
            _ => init.kmax.ok_or_else(|| config_err("initial.kmax", "missing"))?,
        };
        let spec = SpectrumSpec {
            gamma: init.gamma,
            amplitude: init.amplitude,
            kmax,
            seed: self.experiment.seed,
        };
        spec.validate().map_err(|e| config_err("initial", e.to_string()))?;
        Ok(spec)
    }

    pub fn solver_config(&self) -> Result<SolverConfig, LabError> {
        let s = self.solver_section()?;
        self.solver_config_from(s, s.t_end)
    }

    pub(crate) fn solver_config_from(&self, s: &SolverSection, t_end: f64) -> Result<SolverConfig, LabError> {
        let time_step = match (s.dt, s.cfl) {
            (Some(dt), None) => TimeStep::Fixed(dt),
            (None, Some(c)) => TimeStep::Cfl(c),
            (None, None) => TimeStep::Cfl(0.4),
            (Some(_), Some(_)) => return Err(config_err("solver.dt", "give either dt or cfl, not both")),
        };
        let cfg = SolverConfig {
            nu: s.nu,
            time_step,
            t_end,
            sample_interval: s.sample_interval,
            dealias: s.dealias,
            nonlinear: s.nonlinear,
        };
        cfg.validate().map_err(|e| {
            let msg = e.to_string();
            let key = ["nu", "t_end", "sample_interval", "dt", "cfl"]
                .into_iter()
                .find(|k| msg.contains(&format!("{k} =")))
                .unwrap_or("solver");
            config_err(&format!("solver.{key}"), msg)
        })?;
        Ok(cfg)
    }
}

/// Best-effort `section.key` for a byte offset in the source text.
fn key_at(text: &str, offset: usize) -> Option<String> {
    let mut section = String::new();
    let mut pos = 0;
    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.starts_with('[') {
            section = trimmed.trim_matches(|c| c == '[' || c == ']').to_string();
        }
        let end = pos + line.len();
        if offset <= end {
            let key = trimmed.split('=').next().map(str::trim).unwrap_or("");
            if trimmed.starts_with('[') || key.is_empty() {
                return Some(section);
            }
            return Some(if section.is_empty() {
                key.to_string()
            } else {
                format!("{section}.{key}")
            });
        }
        pos = end + 1;
    }
    if section.is_empty() {
        None
    } else {
        Some(section)
    }
}
