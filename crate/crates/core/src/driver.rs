//! Experiment presets, configuration and the time loop behind `landau run`.
//!
//! A run writes into its output directory:
//! - `diagnostics.csv`, one row every `diag_every` steps plus the first and
//!   last step,
//! - `dump_<step>.lspf` every `dump_every` steps (0 disables) and
//!   `final.lspf`, in the [`crate::io`] format,
//! - `run.json`, the resolved configuration.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::collision::{maxwellian_field, CollisionWorkspace};
use crate::diagnostics::{self, ErrorNorms, MomentSet};
use crate::error::{LandauError, Result};
use crate::field::DistributionField;
use crate::grid::VelocityGrid;
use crate::integrator::{rk3_step, LandauRhs, Scheme, StepperConfig};
use crate::io::{load_field, store_field};
use crate::kernel::{self, KernelKey, KernelTable};

/// Width of the Rosenbluth shell.
pub const ROSENBLUTH_SIGMA: f64 = 0.3;
/// Sharpness of the Rosenbluth shell.
pub const ROSENBLUTH_S: f64 = 10.0;
/// Standard deviation of each Gaussian in the two-Gaussian preset.
pub const TWO_GAUSSIANS_SIGMA: f64 = std::f64::consts::PI / 10.0;

pub const CSV_HEADER: &str = "t,rho,ux,uy,uz,temp,Pxx,Pxy,Pxz,Pyy,Pyz,Pzz,m4,entropy,rel_entropy,nonpos_count,mass_drift,l1_err,l2_err,linf_err";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// `f₀ = M_{1,0,1}`; the exact solution is stationary.
    MaxwellianAccuracy,
    /// `f₀ = S⁻² exp(-S (|v| - σ)²/σ²)`.
    Rosenbluth,
    /// Half-sum of unit-mass Gaussians centred at `±2σe₁`.
    TwoGaussians,
    /// Initial condition read from a field dump.
    Custom,
}

impl FromStr for Preset {
    type Err = LandauError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "maxwellian-accuracy" => Ok(Preset::MaxwellianAccuracy),
            "rosenbluth" => Ok(Preset::Rosenbluth),
            "two-gaussians" => Ok(Preset::TwoGaussians),
            "custom" => Ok(Preset::Custom),
            other => Err(LandauError::UnknownPreset(other.to_string())),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::MaxwellianAccuracy => "maxwellian-accuracy",
            Preset::Rosenbluth => "rosenbluth",
            Preset::TwoGaussians => "two-gaussians",
            Preset::Custom => "custom",
        })
    }
}

/// Parameters a preset fixes unless overridden.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PresetDefaults {
    pub n: usize,
    pub r: f64,
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
}

impl Preset {
    /// `None` for [`Preset::Custom`], whose lattice comes from the dump.
    pub fn defaults(self) -> Option<PresetDefaults> {
        match self {
            Preset::MaxwellianAccuracy => Some(PresetDefaults {
                n: 32,
                r: 7.0,
                dt: 0.005,
                t_final: 1.0,
                scheme: Scheme::Plain,
            }),
            Preset::Rosenbluth => Some(PresetDefaults {
                n: 32,
                r: 1.0,
                dt: 0.1,
                t_final: 50.0,
                scheme: Scheme::SteadyPreserving,
            }),
            // dt = 0.005 is past the explicit stability limit at n = 32.
            Preset::TwoGaussians => Some(PresetDefaults {
                n: 32,
                r: 2.75,
                dt: 0.0025,
                t_final: 5.0,
                scheme: Scheme::SteadyPreserving,
            }),
            Preset::Custom => None,
        }
    }
}

/// Optional settings from a config file or the command line.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigOverrides {
    pub preset: Option<Preset>,
    pub n: Option<usize>,
    pub r: Option<f64>,
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub scheme: Option<Scheme>,
    pub diag_every: Option<usize>,
    pub dump_every: Option<usize>,
    pub kernel_cache: Option<PathBuf>,
    pub kernel_fine: Option<usize>,
    pub out: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub ic_file: Option<PathBuf>,
}

impl ConfigOverrides {
    /// Fields set in `other` win.
    pub fn merge(self, other: ConfigOverrides) -> ConfigOverrides {
        ConfigOverrides {
            preset: other.preset.or(self.preset),
            n: other.n.or(self.n),
            r: other.r.or(self.r),
            dt: other.dt.or(self.dt),
            t_final: other.t_final.or(self.t_final),
            scheme: other.scheme.or(self.scheme),
            diag_every: other.diag_every.or(self.diag_every),
            dump_every: other.dump_every.or(self.dump_every),
            kernel_cache: other.kernel_cache.or(self.kernel_cache),
            kernel_fine: other.kernel_fine.or(self.kernel_fine),
            out: other.out.or(self.out),
            reference: other.reference.or(self.reference),
            ic_file: other.ic_file.or(self.ic_file),
        }
    }

    /// Parses `key = value` lines. Keys mirror the CLI flags without the
    /// leading dashes; `_` and `-` are interchangeable and `#` starts a
    /// comment.
    pub fn parse(text: &str) -> Result<ConfigOverrides> {
        let mut out = ConfigOverrides::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| LandauError::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim().replace('_', "-");
            let value = value.trim().trim_matches('"');
            let bad = |what: &str| LandauError::Config(format!("line {}: invalid {what} `{value}`", lineno + 1));
            match key.as_str() {
                "preset" => out.preset = Some(value.parse()?),
                "n" => out.n = Some(value.parse().map_err(|_| bad("n"))?),
                "R" | "r" => out.r = Some(value.parse().map_err(|_| bad("R"))?),
                "dt" => out.dt = Some(value.parse().map_err(|_| bad("dt"))?),
                "t-final" => out.t_final = Some(value.parse().map_err(|_| bad("t-final"))?),
                "scheme" => out.scheme = Some(value.parse()?),
                "diag-every" => out.diag_every = Some(value.parse().map_err(|_| bad("diag-every"))?),
                "dump-every" => out.dump_every = Some(value.parse().map_err(|_| bad("dump-every"))?),
                "kernel-cache" => out.kernel_cache = Some(value.into()),
                "kernel-fine" => out.kernel_fine = Some(value.parse().map_err(|_| bad("kernel-fine"))?),
                "out" => out.out = Some(value.into()),
                "reference" => out.reference = Some(value.into()),
                "ic-file" => out.ic_file = Some(value.into()),
                other => {
                    return Err(LandauError::Config(format!("line {}: unknown key `{other}`", lineno + 1)))
                }
            }
        }
        Ok(out)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<ConfigOverrides> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| LandauError::Config(format!("cannot read config file {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Fully resolved run parameters.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub n: usize,
    #[serde(rename = "R")]
    pub r: f64,
    pub dt: f64,
    pub t_final: f64,
    pub scheme: Scheme,
    pub diag_every: usize,
    pub dump_every: usize,
    pub kernel_cache: Option<PathBuf>,
    pub kernel_fine: usize,
    pub out: PathBuf,
    pub reference: Option<PathBuf>,
    pub ic_file: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Preset defaults for everything not set in `o`.
    ///
    /// When `n` is overridden but `dt` is not, the preset step is scaled by
    /// `min(1, (n_preset/n)²)`, the empirical parabolic stability law.
    pub fn resolve(o: ConfigOverrides) -> Result<Self> {
        let preset = o.preset.ok_or_else(|| LandauError::Config("no preset given".into()))?;
        let (n, r, dt_default, t_final_default, scheme_default) = match preset.defaults() {
            Some(d) => {
                let n = o.n.unwrap_or(d.n);
                let scale = (d.n as f64 / n as f64).powi(2).min(1.0);
                if o.dt.is_none() && scale < 1.0 {
                    log::info!("rescaling dt from {} to {} for n = {n}", d.dt, d.dt * scale);
                }
                (n, o.r.unwrap_or(d.r), d.dt * scale, d.t_final, d.scheme)
            }
            None => {
                let path = o
                    .ic_file
                    .as_ref()
                    .ok_or_else(|| LandauError::Config("the custom preset needs --ic-file".into()))?;
                let dump = load_field(path)?;
                let g = dump.field.grid();
                if o.n.is_some_and(|n| n != g.n()) || o.r.is_some_and(|r| r != g.half_width()) {
                    return Err(LandauError::Config(format!(
                        "--n/--R disagree with the initial condition (n = {}, R = {})",
                        g.n(),
                        g.half_width()
                    )));
                }
                (g.n(), g.half_width(), 0.005, dump.t + 1.0, Scheme::Plain)
            }
        };
        VelocityGrid::new(n, r)?;
        let config = ExperimentConfig {
            preset,
            n,
            r,
            dt: o.dt.unwrap_or(dt_default),
            t_final: o.t_final.unwrap_or(t_final_default),
            scheme: o.scheme.unwrap_or(scheme_default),
            diag_every: o.diag_every.unwrap_or(1).max(1),
            dump_every: o.dump_every.unwrap_or(0),
            kernel_cache: o.kernel_cache,
            kernel_fine: o.kernel_fine.unwrap_or_else(|| kernel::default_fine(n)),
            out: o.out.unwrap_or_else(|| PathBuf::from("landau-out")),
            reference: o.reference,
            ic_file: o.ic_file,
        };
        StepperConfig::new(config.dt, config.scheme, config.t_final)?;
        Ok(config)
    }

    /// Preset defaults only.
    pub fn for_preset(preset: Preset) -> Result<Self> {
        Self::resolve(ConfigOverrides { preset: Some(preset), ..Default::default() })
    }

    pub fn grid(&self) -> Result<VelocityGrid> {
        VelocityGrid::new(self.n, self.r)
    }
}

/// Initial field and start time for `config` on `grid`.
pub fn build_initial_condition(config: &ExperimentConfig, grid: &VelocityGrid) -> Result<(DistributionField, f64)> {
    let field = match config.preset {
        Preset::MaxwellianAccuracy => maxwellian_field(1.0, [0.0; 3], 1.0, grid)?,
        Preset::Rosenbluth => {
            let (s, sigma) = (ROSENBLUTH_S, ROSENBLUTH_SIGMA);
            DistributionField::from_fn(*grid, |v| {
                let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                (-s * (r - sigma).powi(2) / (sigma * sigma)).exp() / (s * s)
            })
        }
        Preset::TwoGaussians => {
            let s2 = TWO_GAUSSIANS_SIGMA * TWO_GAUSSIANS_SIGMA;
            let c = 2.0 * TWO_GAUSSIANS_SIGMA;
            let norm = 0.5 / (2.0 * std::f64::consts::PI * s2).powf(1.5);
            DistributionField::from_fn(*grid, |v| {
                let tail = v[1] * v[1] + v[2] * v[2];
                let plus = (-((v[0] - c).powi(2) + tail) / (2.0 * s2)).exp();
                let minus = (-((v[0] + c).powi(2) + tail) / (2.0 * s2)).exp();
                norm * (plus + minus)
            })
        }
        Preset::Custom => {
            let path = config
                .ic_file
                .as_ref()
                .ok_or_else(|| LandauError::Config("the custom preset needs --ic-file".into()))?;
            let dump = load_field(path)?;
            if !dump.field.grid().same_lattice(grid) {
                return Err(LandauError::GridMismatch(format!(
                    "initial condition is n = {}, R = {}",
                    dump.field.grid().n(),
                    dump.field.grid().half_width()
                )));
            }
            return Ok((dump.field, dump.t));
        }
    };
    Ok((field, 0.0))
}

/// Loads the cached table when present, otherwise computes it and, if a
/// cache path is set, stores it there.
pub fn obtain_kernel(grid: &VelocityGrid, fine: usize, cache: Option<&Path>) -> Result<KernelTable> {
    if let Some(path) = cache {
        if path.exists() {
            log::info!("loading kernel table from {}", path.display());
            return kernel::load_kernel(path, KernelKey::for_grid(grid, Some(fine)));
        }
    }
    log::info!("computing kernel table: n = {}, fine = {fine}", grid.n());
    let table = kernel::compute_kernel_table(grid, fine)?;
    if let Some(path) = cache {
        kernel::store_kernel(&table, path)?;
    }
    Ok(table)
}

/// One line of `diagnostics.csv`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsRow {
    pub step: usize,
    pub moments: MomentSet,
    pub mass_drift: f64,
    pub errors: Option<ErrorNorms>,
}

impl DiagnosticsRow {
    pub fn to_csv(&self) -> String {
        let m = &self.moments;
        let p = &m.pressure;
        let mut cols = vec![
            m.t, m.rho, m.u[0], m.u[1], m.u[2], m.temp, p[0][0], p[0][1], p[0][2], p[1][1], p[1][2], p[2][2], m.m4,
            m.entropy, m.rel_entropy,
        ]
        .into_iter()
        .map(|v| format!("{v:e}"))
        .collect::<Vec<_>>();
        cols.push(m.nonpos_count.to_string());
        cols.push(format!("{:e}", self.mass_drift));
        match self.errors {
            Some(e) => cols.extend([e.l1, e.l2, e.linf].map(|v| format!("{v:e}"))),
            None => cols.extend(["", "", ""].map(String::from)),
        }
        cols.join(",")
    }
}

/// What a completed run produced.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub config: ExperimentConfig,
    pub rows: Vec<DiagnosticsRow>,
    pub final_field: DistributionField,
    pub t: f64,
    pub steps: usize,
    /// Errors against `--reference` on the shared nodes.
    pub reference_error: Option<ErrorNorms>,
}

impl RunOutcome {
    pub fn max_mass_drift(&self) -> f64 {
        self.rows.iter().map(|r| r.mass_drift).fold(0.0, f64::max)
    }
}

struct Recorder {
    csv: BufWriter<File>,
    rows: Vec<DiagnosticsRow>,
    rho0: f64,
    exact: Option<DistributionField>,
}

impl Recorder {
    fn record(&mut self, step: usize, t: f64, f: &DistributionField) -> Result<()> {
        let mut moments = diagnostics::moments(f)?.with_entropies(f)?;
        moments.t = t;
        let errors = match &self.exact {
            Some(e) => Some(diagnostics::error_norms(f, e)?),
            None => None,
        };
        let row = DiagnosticsRow { step, moments, mass_drift: (moments.rho - self.rho0).abs() / self.rho0, errors };
        writeln!(self.csv, "{}", row.to_csv())?;
        self.rows.push(row);
        Ok(())
    }
}

/// Runs `config` to completion, writing outputs into `config.out`.
///
/// A non-finite state aborts with [`LandauError::BlowUp`] after the last
/// valid diagnostics row has been flushed.
pub fn run(config: &ExperimentConfig) -> Result<RunOutcome> {
    let grid = config.grid()?;
    let stepper = StepperConfig::new(config.dt, config.scheme, config.t_final)?;
    if let Some(d) = config.preset.defaults() {
        stepper.check_parabolic(config.n, d.n, d.dt);
    }
    fs::create_dir_all(&config.out)?;
    fs::write(
        config.out.join("run.json"),
        serde_json::to_string_pretty(config).map_err(|e| LandauError::Config(e.to_string()))?,
    )?;

    let (mut f, t0) = build_initial_condition(config, &grid)?;
    let kernel = Arc::new(obtain_kernel(&grid, config.kernel_fine, config.kernel_cache.as_deref())?);
    let workspace = CollisionWorkspace::new(grid, kernel)?;
    let exact = match config.preset {
        Preset::MaxwellianAccuracy => Some(maxwellian_field(1.0, [0.0; 3], 1.0, &grid)?),
        _ => None,
    };
    let mut rhs = match config.scheme {
        Scheme::Plain => LandauRhs::plain(workspace),
        // A Maxwellian start keeps its own parameters so that it is an exact
        // fixed point; anything else uses its quadrature moments.
        Scheme::SteadyPreserving => match &exact {
            Some(m) => LandauRhs::steady(workspace, m.clone())?,
            _ => {
                let m = diagnostics::moments(&f)?;
                LandauRhs::steady(workspace, maxwellian_field(m.rho, m.u, m.temp, &grid)?)?
            }
        },
    };

    let mut csv = BufWriter::new(File::create(config.out.join("diagnostics.csv"))?);
    writeln!(csv, "{CSV_HEADER}")?;
    let rho0 = diagnostics::moments(&f)?.rho;
    let mut rec = Recorder { csv, rows: Vec::new(), rho0, exact };
    rec.record(0, t0, &f)?;

    let steps = stepper.steps_from(t0);
    log::info!("{} steps of dt = {} from t = {t0}", steps, config.dt);
    let mut t = t0;
    let mut advance = |rec: &mut Recorder, f: &mut DistributionField, t: &mut f64| -> Result<()> {
        for step in 1..=steps {
            *f = rk3_step(f, &mut rhs, config.dt, *t)?;
            *t = t0 + step as f64 * config.dt;
            if step % config.diag_every == 0 || step == steps {
                rec.record(step, *t, f)?;
            }
            if config.dump_every > 0 && step % config.dump_every == 0 {
                store_field(f, *t, config.out.join(format!("dump_{step:06}.lspf")))?;
            }
        }
        Ok(())
    };
    let result = advance(&mut rec, &mut f, &mut t);
    rec.csv.flush()?;
    result?;
    store_field(&f, t, config.out.join("final.lspf"))?;

    let reference_error = match &config.reference {
        Some(path) => {
            let reference = load_field(path)?.field;
            let e = compare_with_reference(&f, &reference)?;
            log::info!("reference errors: L1 {:e}, L2 {:e}, Linf {:e}", e.l1, e.l2, e.linf);
            Some(e)
        }
        None => None,
    };
    Ok(RunOutcome { config: config.clone(), rows: rec.rows, final_field: f, t, steps, reference_error })
}

/// Restricts a finer reference onto the nodes of `f` and returns the error
/// norms there. The reference lattice must contain every node of `f`:
/// same `R` and `n_ref` a multiple of `n`.
pub fn compare_with_reference(f: &DistributionField, reference: &DistributionField) -> Result<ErrorNorms> {
    let g = *f.grid();
    let rg = *reference.grid();
    if rg.half_width() != g.half_width() || rg.n() % g.n() != 0 {
        return Err(LandauError::GridMismatch(format!(
            "reference n = {}, R = {} does not contain the nodes of n = {}, R = {}",
            rg.n(),
            rg.half_width(),
            g.n(),
            g.half_width()
        )));
    }
    let ratio = (rg.n() / g.n()) as i64;
    let restricted: Vec<f64> = (0..g.len())
        .map(|o| {
            let j = g.node_index(o).map(|c| c * ratio);
            reference.get(j)
        })
        .collect::<Result<_>>()?;
    diagnostics::error_norms(f, &DistributionField::new(g, restricted)?)
}
