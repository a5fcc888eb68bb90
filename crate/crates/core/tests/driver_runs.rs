use std::fs;
use std::path::Path;
use std::process::Command;

use landau_core::diagnostics::moments;
use landau_core::driver::{
    build_initial_condition, run, ConfigOverrides, ExperimentConfig, Preset, CSV_HEADER, TWO_GAUSSIANS_SIGMA,
};
use landau_core::integrator::Scheme;
use landau_core::io::load_field;
use landau_core::oracle::symmetric_mixture_moments;
use landau_core::VelocityGrid;

/// `4π S⁻² ∫₀^∞ r² exp(-S (r-σ)²/σ²) dr` and the matching temperature, by
/// one-dimensional adaptive quadrature.
const ROSENBLUTH_MASS: f64 = 0.001_996_815_122_586_254_4;
const ROSENBLUTH_TEMP: f64 = 0.037_357_143_408_157_22;

fn config(preset: Preset, out: &Path, tweak: impl FnOnce(&mut ConfigOverrides)) -> ExperimentConfig {
    let mut o = ConfigOverrides { preset: Some(preset), out: Some(out.to_path_buf()), ..Default::default() };
    tweak(&mut o);
    ExperimentConfig::resolve(o).unwrap()
}

#[test]
fn rosenbluth_initial_moments() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(Preset::Rosenbluth, dir.path(), |_| {});
    let g = c.grid().unwrap();
    assert_eq!((g.n(), g.half_width()), (32, 1.0));
    let (f, _) = build_initial_condition(&c, &g).unwrap();
    let m = moments(&f).unwrap();
    assert!((m.rho - ROSENBLUTH_MASS).abs() <= 1e-5 * ROSENBLUTH_MASS, "{}", m.rho);
    assert!((m.temp - ROSENBLUTH_TEMP).abs() <= 1e-5 * ROSENBLUTH_TEMP, "{}", m.temp);
    assert!(m.u.iter().all(|c| c.abs() < 1e-12));
}

#[test]
fn two_gaussian_initial_moments() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(Preset::TwoGaussians, dir.path(), |_| {});
    let g = c.grid().unwrap();
    let (f, _) = build_initial_condition(&c, &g).unwrap();
    let m = moments(&f).unwrap();
    let (rho, u, temp, diag) = symmetric_mixture_moments(TWO_GAUSSIANS_SIGMA, 2.0);
    let s2 = TWO_GAUSSIANS_SIGMA * TWO_GAUSSIANS_SIGMA;
    assert!((temp - 7.0 * s2 / 3.0).abs() < 1e-15);
    assert!((m.rho - rho).abs() < 1e-9);
    for a in 0..3 {
        assert!((m.u[a] - u[a]).abs() < 1e-9);
        assert!((m.pressure[a][a] - diag[a]).abs() < 1e-9);
    }
    assert!((m.temp - temp).abs() < 1e-9);
    assert!((m.temp - 0.230_290_769_358_751_67).abs() < 1e-9);
}

#[test]
fn maxwellian_run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(Preset::MaxwellianAccuracy, dir.path(), |o| {
        o.n = Some(8);
        o.t_final = Some(0.05);
        o.kernel_fine = Some(64);
        o.diag_every = Some(2);
        o.dump_every = Some(5);
    });
    let out = run(&c).unwrap();
    assert_eq!(out.steps, 10);
    assert_eq!(out.rows.len(), 6);
    assert!(out.max_mass_drift() <= 1e-12);
    assert!(out.rows.iter().all(|r| r.errors.is_some()));

    let csv = fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert_eq!(lines.count(), 6);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("run.json")).unwrap()).unwrap();
    assert_eq!(manifest["preset"], "maxwellian-accuracy");
    assert_eq!(manifest["n"], 8);
    assert_eq!(manifest["scheme"], "plain");
    assert!(dir.path().join("dump_000005.lspf").exists());
    assert!(dir.path().join("dump_000010.lspf").exists());
    let last = load_field(dir.path().join("final.lspf")).unwrap();
    assert_eq!(last.field, out.final_field);
    assert!((last.t - 0.05).abs() < 1e-15);
}

#[test]
fn restart_reproduces_the_continuous_run() {
    let dir = tempfile::tempdir().unwrap();
    let full_dir = dir.path().join("full");
    let full = run(&config(Preset::TwoGaussians, &full_dir, |o| {
        o.n = Some(12);
        o.scheme = Some(Scheme::Plain);
        o.t_final = Some(0.05);
        o.kernel_fine = Some(64);
        o.dump_every = Some(10);
    }))
    .unwrap();
    assert_eq!(full.steps, 20);

    let restarted = run(&config(Preset::Custom, &dir.path().join("restart"), |o| {
        o.ic_file = Some(full_dir.join("dump_000010.lspf"));
        o.dt = Some(0.0025);
        o.t_final = Some(0.05);
        o.kernel_fine = Some(64);
    }))
    .unwrap();
    assert_eq!(restarted.steps, 10);
    let (a, b) = (full.rows.last().unwrap().moments, restarted.rows.last().unwrap().moments);
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1e-300);
    assert!(close(a.t, b.t));
    assert!(close(a.rho, b.rho) && close(a.temp, b.temp) && close(a.m4, b.m4));
    assert!(close(a.entropy, b.entropy) && close(a.rel_entropy, b.rel_entropy));
    for i in 0..3 {
        assert!((a.u[i] - b.u[i]).abs() <= 1e-12 * a.temp.sqrt());
    }
    assert_eq!(full.final_field, restarted.final_field);
}

#[test]
fn blow_up_keeps_earlier_rows() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(Preset::TwoGaussians, dir.path(), |o| {
        o.n = Some(16);
        o.dt = Some(0.5);
        o.t_final = Some(100.0);
        o.kernel_fine = Some(64);
        // Skip intermediate rows so the integrator, not the moments, trips first.
        o.diag_every = Some(1000);
    });
    let err = run(&c).unwrap_err();
    assert!(matches!(err, landau_core::LandauError::BlowUp { .. }), "{err}");
    let csv = fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
    assert!(csv.lines().count() >= 2);
    assert!(!dir.path().join("final.lspf").exists());
}

#[test]
fn custom_preset_checks_the_lattice() {
    let dir = tempfile::tempdir().unwrap();
    let g = VelocityGrid::new(8, 2.0).unwrap();
    let path = dir.path().join("ic.lspf");
    let f = landau_core::maxwellian_field(1.0, [0.0; 3], 0.5, &g).unwrap();
    landau_core::io::store_field(&f, 0.25, &path).unwrap();
    let o = ConfigOverrides { preset: Some(Preset::Custom), ic_file: Some(path.clone()), ..Default::default() };
    let c = ExperimentConfig::resolve(o.clone()).unwrap();
    assert_eq!((c.n, c.r), (8, 2.0));
    assert_eq!(build_initial_condition(&c, &g).unwrap(), (f, 0.25));
    assert!(ExperimentConfig::resolve(ConfigOverrides { n: Some(16), ..o }).is_err());
    let missing = ConfigOverrides { preset: Some(Preset::Custom), ..Default::default() };
    assert!(ExperimentConfig::resolve(missing).is_err());
}

fn landau() -> Command {
    Command::new(env!("CARGO_BIN_EXE_landau"))
}

#[test]
fn cli_missing_config_file() {
    let out = landau().args(["run", "--config", "/nonexistent/landau.cfg"]).output().unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("cannot read config file"), "{stderr}");
    assert!(stderr.contains("Usage"), "{stderr}");
}

#[test]
fn cli_requires_a_preset() {
    let out = landau().arg("run").output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    let out = landau().args(["run", "--preset", "nonsense"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn cli_config_file_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out_dir = dir.path().join("out");
    fs::write(
        &cfg,
        format!("preset = maxwellian-accuracy\nn = 16\nt_final = 0.01\nkernel-fine = 64\nout = {}\n", out_dir.display()),
    )
    .unwrap();
    let status = landau()
        .args(["run", "--config", cfg.to_str().unwrap(), "--n", "8"])
        .env("LANDAU_THREADS", "1")
        .env("RUST_LOG", "warn")
        .status()
        .unwrap();
    assert!(status.success());
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("run.json")).unwrap()).unwrap();
    assert_eq!(manifest["n"], 8);
    assert_eq!(manifest["kernel_fine"], 64);
}

#[test]
fn cli_kernel_command() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.lskt");
    let out = landau()
        .args(["kernel", "--n", "8", "--R", "1", "--fine", "64", "--out", path.to_str().unwrap()])
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    assert!(out.status.success());
    let g = VelocityGrid::new(8, 1.0).unwrap();
    let table =
        landau_core::kernel::load_kernel(&path, landau_core::kernel::KernelKey::for_grid(&g, Some(64))).unwrap();
    assert_eq!(table.fine(), 64);
}
