//! End-to-end acceptance checks. Every criterion prints one PASS/FAIL line to
//! stdout (uncaptured, so the lines show up in plain `cargo test` output);
//! the test fails if any criterion does.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use landau_core::diagnostics::moments;
use landau_core::driver::{run, ConfigOverrides, ExperimentConfig, Preset, RunOutcome};
use landau_core::integrator::ssp_rk3_step;
use landau_core::kernel::{compute_kernel_table, compute_kernel_table_with, Quadrature};
use landau_core::oracle::{dense_collision, smooth_random_field, GAUSSIAN_FOURTH_MOMENT};
use landau_core::{maxwellian_field, CollisionWorkspace, Result, Scheme, VelocityGrid};

const MAXWELLIAN_L2_TARGETS: [(usize, f64); 3] = [(8, 1.66e-2), (16, 5.73e-5), (32, 4.46e-9)];
const EIGHT_B3: f64 = 7.6847;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: String) -> Self {
        Verdict { pass, detail }
    }
}

fn report(id: usize, name: &str, verdict: &Result<Verdict>) -> bool {
    let (pass, detail) = match verdict {
        Ok(v) => (v.pass, v.detail.clone()),
        Err(e) => (false, format!("error: {e}")),
    };
    let line = format!("criterion {id} [{name}]: {} ({detail})\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
    pass
}

fn launch(out: &Path, overrides: ConfigOverrides) -> Result<RunOutcome> {
    let o = ConfigOverrides { out: Some(out.to_path_buf()), ..overrides };
    run(&ExperimentConfig::resolve(o)?)
}

fn preset(p: Preset) -> ConfigOverrides {
    ConfigOverrides { preset: Some(p), ..Default::default() }
}

/// Collects the mass drift of every run made here for criterion 2.
#[derive(Default)]
struct Runs {
    drifts: Vec<(String, f64)>,
}

impl Runs {
    fn launch(&mut self, label: &str, out: &Path, o: ConfigOverrides) -> Result<RunOutcome> {
        let outcome = launch(out, o)?;
        self.drifts.push((label.to_string(), outcome.max_mass_drift()));
        Ok(outcome)
    }
}

fn spectral_accuracy(runs: &mut Runs, dir: &Path) -> Result<Verdict> {
    let mut errors = Vec::new();
    for (n, _) in MAXWELLIAN_L2_TARGETS {
        let o = ConfigOverrides { n: Some(n), kernel_fine: Some(1024), ..preset(Preset::MaxwellianAccuracy) };
        let out = runs.launch(&format!("maxwellian n={n}"), &dir.join(format!("maxwellian_{n}")), o)?;
        let last = out.rows.last().unwrap();
        assert!((last.moments.t - 1.0).abs() < 1e-12);
        errors.push(last.errors.unwrap().l2);
    }
    let within = MAXWELLIAN_L2_TARGETS.iter().zip(&errors).all(|(&(_, e), &x)| x >= e / 10.0 && x <= e * 10.0);
    let (r1, r2) = (errors[1] / errors[0], errors[2] / errors[1]);
    Ok(Verdict::new(
        within && r1 <= 1e-2 && r2 <= 1e-3,
        format!("L2 errors {:.3e} {:.3e} {:.3e}, ratios {r1:.2e} {r2:.2e}", errors[0], errors[1], errors[2]),
    ))
}

fn rosenbluth_drift(runs: &mut Runs, dir: &Path) -> Result<Verdict> {
    let o = ConfigOverrides { n: Some(24), dt: Some(0.1), t_final: Some(50.0), ..preset(Preset::Rosenbluth) };
    let out = runs.launch("rosenbluth n=24", &dir.join("rosenbluth"), o)?;
    let t0 = out.rows[0].moments.temp;
    let mut momentum = 0.0f64;
    let mut temp = 0.0f64;
    for r in &out.rows {
        let p = r.moments.momentum();
        momentum = momentum.max((p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt());
        temp = temp.max((r.moments.temp - t0).abs());
    }
    Ok(Verdict::new(
        momentum <= 1e-4 && temp <= 1e-4,
        format!("max |rho u| = {momentum:.3e}, max |T - T0| = {temp:.3e}, t_end = {}", out.t),
    ))
}

fn steady_preservation(runs: &mut Runs, dir: &Path) -> Result<Verdict> {
    let o = ConfigOverrides {
        n: Some(16),
        scheme: Some(Scheme::SteadyPreserving),
        dt: Some(0.005),
        t_final: Some(5.0),
        ..preset(Preset::MaxwellianAccuracy)
    };
    let out = runs.launch("steady maxwellian n=16", &dir.join("steady"), o)?;
    let grid = *out.final_field.grid();
    let f0 = maxwellian_field(1.0, [0.0; 3], 1.0, &grid)?;
    let dev = out.final_field.values().iter().zip(f0.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(Verdict::new(out.steps >= 1000 && dev <= 1e-13, format!("{} steps, max deviation {dev:.3e}", out.steps)))
}

fn entropy_decay(runs: &mut Runs, dir: &Path) -> Result<Verdict> {
    let launch = |runs: &mut Runs, scheme: Scheme, label: &str| {
        let o = ConfigOverrides { n: Some(32), scheme: Some(scheme), ..preset(Preset::TwoGaussians) };
        runs.launch(label, &dir.join(label), o)
    };
    let steady = launch(runs, Scheme::SteadyPreserving, "two-gaussians-steady")?;
    let plain = launch(runs, Scheme::Plain, "two-gaussians-plain")?;

    let h: Vec<f64> = steady.rows.iter().map(|r| r.moments.rel_entropy).collect();
    let peak = (0..h.len()).fold(0, |best, i| if h[i] > h[best] { i } else { best });
    let worst_rise = h[peak..].windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let end = *h.last().unwrap();
    let floor = |o: &RunOutcome| {
        o.rows.iter().filter(|r| r.moments.t >= 1.5).map(|r| r.moments.rel_entropy).fold(f64::INFINITY, f64::min)
    };
    let (fs, fp) = (floor(&steady), floor(&plain));
    Ok(Verdict::new(
        worst_rise <= 1e-8 && end < 1e-2 && fp > fs && steady.t == 5.0,
        format!(
            "steady: peak at step {peak}, largest rise after it {worst_rise:.2e}, H(5) = {end:.3e}; \
             floor for t >= 1.5: plain {fp:.3e} vs steady {fs:.3e}"
        ),
    ))
}

fn dense_equivalence() -> Result<Verdict> {
    let grid = VelocityGrid::new(8, 3.0)?;
    let kernel = Arc::new(compute_kernel_table(&grid, 256)?);
    let mut ws = CollisionWorkspace::new(grid, kernel.clone())?;
    let mut worst = 0.0f64;
    for seed in 0..20 {
        let f = smooth_random_field(&grid, seed);
        let fast = ws.collision_operator(&f)?;
        let dense = dense_collision(&f, &kernel)?;
        let scale = dense.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let diff = fast.iter().zip(&dense).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(diff / scale);
    }
    Ok(Verdict::new(worst <= 1e-11, format!("20 fields, max relative difference {worst:.2e}")))
}

fn rk3_order() -> Result<Verdict> {
    let error = |dt: f64| -> Result<f64> {
        let steps = (0.5 / dt).round() as usize;
        let mut y = vec![1.0];
        for s in 0..steps {
            y = ssp_rk3_step(&y, dt, s as f64 * dt, |v| Ok(vec![v[0] * v[0]]))?;
        }
        Ok((y[0] - 2.0).abs())
    };
    let e = [error(0.05)?, error(0.025)?, error(0.0125)?];
    let orders = [(e[0] / e[1]).log2(), (e[1] / e[2]).log2()];
    Ok(Verdict::new(
        orders.iter().all(|&p| p >= 2.9),
        format!("observed orders {:.3} {:.3}", orders[0], orders[1]),
    ))
}

fn kernel_table() -> Result<Verdict> {
    let grid = VelocityGrid::new(8, 1.0)?;
    let t = grid.extended_half_width();
    let table = compute_kernel_table(&grid, 256)?;
    let origin = table.get([0; 3])? / t.powi(4);

    let half = grid.n() as i64;
    let mut even = true;
    for a in 1 - half..half {
        for b in 1 - half..half {
            for c in 1 - half..half {
                even &= table.get([a, b, c])?.to_bits() == table.get([-a, -b, -c])?.to_bits();
            }
        }
    }
    // The full-cube transform rejects tables whose imaginary part exceeds
    // the realness tolerance.
    let real = compute_kernel_table_with(&grid, 128, Quadrature::FullCube).is_ok();
    Ok(Verdict::new(
        (origin - EIGHT_B3).abs() <= 1e-3 && even && real,
        format!("psi(0)/T^4 = {origin:.6}, even = {even}, real = {real}"),
    ))
}

fn moment_identities() -> Result<Verdict> {
    let grid = VelocityGrid::new(32, 7.0)?;
    let m = moments(&maxwellian_field(1.0, [0.0; 3], 1.0, &grid)?)?;
    let u = m.u.iter().map(|c| c * c).sum::<f64>().sqrt();
    let mut p = 0.0f64;
    for a in 0..3 {
        for b in 0..3 {
            let id = if a == b { 1.0 } else { 0.0 };
            p = p.max((m.pressure[a][b] - id).abs());
        }
    }
    let errs = [(m.rho - 1.0).abs(), u, (m.temp - 1.0).abs(), p, (m.m4 - GAUSSIAN_FOURTH_MOMENT).abs()];
    Ok(Verdict::new(
        errs.iter().all(|&e| e <= 1e-8),
        format!(
            "|rho-1| {:.2e}, |u| {:.2e}, |T-1| {:.2e}, |P-I| {:.2e}, |m4-15| {:.2e}",
            errs[0], errs[1], errs[2], errs[3], errs[4]
        ),
    ))
}

#[test]
fn acceptance_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let mut runs = Runs::default();

    let c1 = spectral_accuracy(&mut runs, dir.path());
    let c3 = rosenbluth_drift(&mut runs, dir.path());
    let c4 = steady_preservation(&mut runs, dir.path());
    let c6 = entropy_decay(&mut runs, dir.path());
    let c2 = if runs.drifts.is_empty() {
        Ok(Verdict::new(false, "no completed runs".into()))
    } else {
        let (label, worst) =
            runs.drifts.iter().cloned().fold((String::new(), 0.0), |a, b| if b.1 >= a.1 { b } else { a });
        Ok(Verdict::new(
            worst <= 1e-12,
            format!("{} runs, largest drift {worst:.2e} ({label})", runs.drifts.len()),
        ))
    };

    let results = [
        report(1, "spectral accuracy", &c1),
        report(2, "mass conservation", &c2),
        report(3, "momentum and temperature drift", &c3),
        report(4, "steady-state preservation", &c4),
        report(5, "dense equivalence", &dense_equivalence()),
        report(6, "entropy decay", &c6),
        report(7, "RK3 order", &rk3_order()),
        report(8, "kernel table", &kernel_table()),
        report(9, "moment identities", &moment_identities()),
    ];
    let failed: Vec<usize> = (1..=9).filter(|&i| !results[i - 1]).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
