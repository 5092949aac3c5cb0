use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nslab::field::SpectrumSpec;
use nslab::lab::{backward_blowup_scan, run_experiment, ExperimentConfig, LabError};
use nslab::solver::{SolverConfig, TimeStep, Timeseries};

fn lab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lab"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("run lab")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn certify_config(out: &str, seed: u64) -> String {
    format!(
        r#"
[experiment]
kind = "bounds-certify"
seed = {seed}
output_dir = "{out}"

[grid]
n = 16

[initial]
shape = "rough"
amplitude = 0.5
kmax = 5

[solver]
nu = 0.02
cfl = 0.4
t_end = 0.3
sample_interval = 0.01
"#
    )
}

fn blowup_config(out: &str) -> String {
    format!(
        r#"
[experiment]
kind = "backward-blowup"
seed = 3
output_dir = "{out}"

[initial]
shape = "rough"
amplitude = 0.25
gamma = 2.0

[solver]
nu = 0.02
cfl = 0.4
t_end = 0.01
sample_interval = 0.002

[scan]
kmax_list = [2, 4]
t_small = 0.01
# low kmax has not converged in energy yet
energy_tolerance = 0.5
"#
    )
}

fn files_under(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                out.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn zero_amplitude_simulation_gives_zero_timeseries() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("zero");
    let cfg = ExperimentConfig::parse(&format!(
        r#"
[experiment]
kind = "simulate"
output_dir = "{}"
[grid]
n = 8
[initial]
shape = "rough"
amplitude = 0.0
kmax = 2
[solver]
nu = 0.1
dt = 0.01
t_end = 0.05
sample_interval = 0.01
"#,
        out.display()
    ))
    .unwrap();
    let summary = run_experiment(&cfg).unwrap();
    assert!(summary.all_passed());
    let ts = Timeseries::read_csv(fs::File::open(out.join("timeseries.csv")).unwrap()).unwrap();
    assert_eq!(ts.len(), 6);
    for r in ts.rows() {
        assert_eq!((r.energy, r.enstrophy, r.diss_integral, r.ens4_integral), (0.0, 0.0, 0.0, 0.0));
    }
}

#[test]
fn dimension_study_reports_one_half_for_harmonic_times() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("dim");
    let cfg = ExperimentConfig::parse(&format!(
        "[experiment]\nkind = \"dimension-study\"\noutput_dir = \"{}\"\n[dimension]\nalpha = 1.0\n",
        out.display()
    ))
    .unwrap();
    let summary = run_experiment(&cfg).unwrap();
    assert!(summary.all_passed());
    let text = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(text.contains("PASS box_dimension: fitted 0.50"), "{text}");

    // the fit is recomputable from the emitted points
    let o = lab(
        &[
            "dimension",
            "--points",
            "points.txt",
            "--expected",
            "0.5",
            "--eps-min",
            &format!("{:e}", 2f64.powi(-18)),
            "--eps-max",
            &format!("{:e}", 2f64.powi(-6)),
            "--output-dir",
            "again",
        ],
        &out,
    );
    assert_eq!(o.status.code(), Some(0));
    let line = stdout(&o).lines().last().unwrap().to_string();
    assert!(text.lines().any(|l| l == line), "{line}");
    assert_eq!(fs::read(out.join("packing.csv")).unwrap(), fs::read(out.join("again/packing.csv")).unwrap());
    assert_eq!(fs::read(out.join("fit.csv")).unwrap(), fs::read(out.join("again/fit.csv")).unwrap());
}

#[test]
fn runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    for (name, make) in [("cert", certify_config(".", 7)), ("scan", blowup_config("."))] {
        let mut runs = Vec::new();
        for i in 0..2 {
            let dir = tmp.path().join(format!("{name}{i}"));
            fs::create_dir_all(&dir).unwrap();
            fs::write(dir.join("cfg.toml"), &make).unwrap();
            let o = lab(&["run", "--config", "cfg.toml"], &dir);
            assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
            runs.push(files_under(&dir));
        }
        assert!(runs[0].len() >= 3);
        assert_eq!(runs[0], runs[1]);
    }
}

#[test]
fn certification_is_recomputable_from_the_timeseries() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("cfg.toml"), certify_config("out", 1)).unwrap();
    let o = lab(&["simulate", "--config", "cfg.toml"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let summary = fs::read_to_string(tmp.path().join("out/summary.txt")).unwrap();

    let o = lab(
        &["bounds", "--input", "out/timeseries.csv", "--calibrate", "--output", "cert.csv"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    for line in stdout(&o).lines() {
        assert!(summary.lines().any(|l| l == line), "{line} not in\n{summary}");
    }
    assert_eq!(
        fs::read(tmp.path().join("cert.csv")).unwrap(),
        fs::read(tmp.path().join("out/certification.csv")).unwrap()
    );

    // c = 0 cannot certify a trajectory whose enstrophy grows
    let o = lab(&["bounds", "--input", "out/timeseries.csv", "--c", "0"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("t,W,violation_margin\n"));
    assert!(stdout(&o).contains("FAIL w_monotone"));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    fs::write(d.join("bad_nu.toml"), certify_config("o", 1).replace("nu = 0.02", "nu = 0.0")).unwrap();
    fs::write(d.join("unknown.toml"), certify_config("o", 1).replace("[grid]", "[grid]\nsize = 3")).unwrap();
    fs::write(d.join("kmax.toml"), certify_config("o", 1).replace("kmax = 5", "kmax = 9")).unwrap();
    fs::write(d.join("wrong_kind.toml"), blowup_config("o")).unwrap();
    for (file, key) in [
        ("bad_nu.toml", "solver.nu"),
        ("unknown.toml", "grid"),
        ("kmax.toml", "initial.kmax"),
        ("wrong_kind.toml", "experiment.kind"),
    ] {
        let o = lab(&["simulate", "--config", file], d);
        assert_eq!(o.status.code(), Some(2), "{file}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(&format!("config error at {key}")), "{file}: {err}");
    }
    assert_eq!(lab(&["simulate", "--config", "missing.toml"], d).status.code(), Some(2));
    fs::write(d.join("ts.csv"), "t,energy\n0,1\n").unwrap();
    assert_eq!(lab(&["bounds", "--input", "ts.csv"], d).status.code(), Some(2));
    assert_eq!(lab(&["roughdata", "--gamma", "2", "--kmax", "9", "--seed", "1", "--n", "16"], d).status.code(), Some(2));

    let o = lab(&["roughdata", "--gamma", "2", "--kmax", "4", "--seed", "1", "--output", "r.snap"], d);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PASS energy_matches_shell_sum"));
    assert!(fs::read_to_string(d.join("r.snap")).unwrap().starts_with("12 "));

    let o = lab(&["dimension", "--alpha", "1", "--nmax", "100000", "--expected", "0.9"], d);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn blowup_scan_cli_writes_table() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("scan.toml"), blowup_config("scan")).unwrap();
    let o = lab(&["blowup-scan", "--config", "scan.toml"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let table = fs::read_to_string(tmp.path().join("scan/scan.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "kmax,n,sup_enstrophy,energy_at_t_small");
    assert!(lines[1].starts_with("2,6,") && lines[2].starts_with("4,12,"));
    assert!(tmp.path().join("scan/kmax_4/timeseries.csv").exists());
}

fn scan_cfg() -> SolverConfig {
    SolverConfig::new(0.02, TimeStep::Cfl(0.4), 0.01, 0.002)
}

#[test]
fn finite_enstrophy_data_gives_a_converging_scan() {
    let spec = SpectrumSpec {
        gamma: 3.0,
        amplitude: 0.25,
        kmax: 1,
        seed: 5,
    };
    let rows = backward_blowup_scan(&spec, &[2, 4, 8], None, 2.0 * std::f64::consts::PI, &scan_cfg(), 0.01).unwrap();
    let sup: Vec<f64> = rows.iter().map(|(r, _)| r.sup_enstrophy).collect();
    assert!((sup[2] - sup[1]).abs() < (sup[1] - sup[0]).abs());

    let single = backward_blowup_scan(&spec, &[3], Some(12), 2.0 * std::f64::consts::PI, &scan_cfg(), 0.01).unwrap();
    assert_eq!(single.len(), 1);
    assert_eq!(single[0].0.n, 12);
}

#[test]
fn roughdata_scaling_experiment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("rs");
    let cfg = ExperimentConfig::parse(&format!(
        r#"
[experiment]
kind = "roughdata-scaling"
seed = 4
output_dir = "{}"
[initial]
shape = "rough"
amplitude = 1.0
gamma = 3.0
[scan]
kmax_list = [4, 8, 16]
enstrophy_ratio = 1.08
enstrophy_ratio_tolerance = 0.06
"#,
        out.display()
    ))
    .unwrap();
    let summary = run_experiment(&cfg).unwrap();
    assert!(summary.all_passed(), "{summary:?}");
    assert_eq!(summary.checks.len(), 6);
    let csv = fs::read_to_string(out.join("scaling.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn config_errors_carry_field_paths() {
    let err = ExperimentConfig::parse(&blowup_config("o").replace("t_small = 0.01", "t_small = -1.0")).unwrap_err();
    assert!(matches!(err, LabError::Config { ref path, .. } if path == "scan.t_small"), "{err}");
    let err = ExperimentConfig::parse(&blowup_config("o").replace("[2, 4]", "[4, 2]")).unwrap_err();
    assert!(matches!(err, LabError::Config { ref path, .. } if path == "scan.kmax_list"), "{err}");
    let err = ExperimentConfig::parse("[experiment]\nkind = \"other\"\noutput_dir = \"o\"\n").unwrap_err();
    assert!(matches!(err, LabError::Config { ref path, .. } if path == "experiment.kind"), "{err}");
}
