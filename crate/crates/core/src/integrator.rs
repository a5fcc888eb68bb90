//! Fixed-step SSP-RK3 (Shu–Osher) time stepping for `df/dt = Op(f)`.
//!
//! ```text
//! f¹ = f + dt·Op(f)
//! f² = ¾ f + ¼ (f¹ + dt·Op(f¹))
//! f⁺ = ⅓ f + ⅔ (f² + dt·Op(f²))
//! ```
//!
//! Every stage is a convex combination of forward-Euler updates, so a
//! right-hand side with zero discrete sum leaves `Σ f` unchanged up to
//! roundoff.

use std::str::FromStr;

use crate::collision::{CollisionWorkspace, SteadyStateOperator};
use crate::error::{LandauError, Result};
use crate::field::DistributionField;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// `df/dt = C_n(f, f)`.
    Plain,
    /// `df/dt = C_n(f, f) - C_n(M_n, M_n)`.
    #[serde(rename = "steady")]
    SteadyPreserving,
}

impl FromStr for Scheme {
    type Err = LandauError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(Scheme::Plain),
            "steady" | "steady-preserving" => Ok(Scheme::SteadyPreserving),
            other => Err(LandauError::Config(format!("unknown scheme `{other}`"))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Plain => "plain",
            Scheme::SteadyPreserving => "steady",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepperConfig {
    pub dt: f64,
    pub scheme: Scheme,
    pub t_final: f64,
}

impl StepperConfig {
    pub fn new(dt: f64, scheme: Scheme, t_final: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(LandauError::Config(format!("time step must be positive, got {dt}")));
        }
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(LandauError::Config(format!("final time must be positive, got {t_final}")));
        }
        Ok(Self { dt, scheme, t_final })
    }

    /// Number of steps to advance from `t0` to `t_final`.
    pub fn steps_from(&self, t0: f64) -> usize {
        ((self.t_final - t0) / self.dt).round().max(0.0) as usize
    }

    /// Logs a warning when `dt` exceeds the empirically stable step for `n`,
    /// extrapolated from `(n_ref, dt_ref)` with the parabolic law `dt ∝ 1/n²`.
    pub fn check_parabolic(&self, n: usize, n_ref: usize, dt_ref: f64) -> bool {
        let limit = dt_ref * (n_ref as f64 / n as f64).powi(2);
        let ok = self.dt <= limit * (1.0 + 1e-12);
        if !ok {
            log::warn!(
                "dt = {} exceeds {limit:.3e}, the parabolic extrapolation of dt = {dt_ref} at n = {n_ref}",
                self.dt
            );
        }
        ok
    }
}

/// One SSP-RK3 step on a plain state vector. `t` is only used to label a
/// blow-up.
pub fn ssp_rk3_step(
    state: &[f64],
    dt: f64,
    t: f64,
    mut rate: impl FnMut(&[f64]) -> Result<Vec<f64>>,
) -> Result<Vec<f64>> {
    let finite = |v: &[f64], stage| {
        if v.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(LandauError::BlowUp { t, stage })
        }
    };

    let k0 = rate(state)?;
    let stage1: Vec<f64> = state.iter().zip(&k0).map(|(f, k)| f + dt * k).collect();
    finite(&stage1, 1)?;

    let k1 = rate(&stage1)?;
    let stage2: Vec<f64> = state
        .iter()
        .zip(stage1.iter().zip(&k1))
        .map(|(f, (s, k))| 0.75 * f + 0.25 * (s + dt * k))
        .collect();
    finite(&stage2, 2)?;

    let k2 = rate(&stage2)?;
    let next: Vec<f64> = state
        .iter()
        .zip(stage2.iter().zip(&k2))
        .map(|(f, (s, k))| f / 3.0 + 2.0 / 3.0 * (s + dt * k))
        .collect();
    finite(&next, 3)?;
    Ok(next)
}

/// Right-hand side of the semi-discrete Landau equation.
pub trait CollisionRhs {
    fn rate(&mut self, f: &DistributionField) -> Result<Vec<f64>>;
}

/// `C_n(f, f)` or `C_n(f, f) - C_n(M_n, M_n)` on one workspace.
pub struct LandauRhs {
    pub workspace: CollisionWorkspace,
    pub steady: Option<SteadyStateOperator>,
}

impl LandauRhs {
    pub fn plain(workspace: CollisionWorkspace) -> Self {
        Self { workspace, steady: None }
    }

    pub fn steady(mut workspace: CollisionWorkspace, equilibrium: DistributionField) -> Result<Self> {
        let op = SteadyStateOperator::new(&mut workspace, equilibrium)?;
        Ok(Self { workspace, steady: Some(op) })
    }
}

impl CollisionRhs for LandauRhs {
    fn rate(&mut self, f: &DistributionField) -> Result<Vec<f64>> {
        match &self.steady {
            Some(op) => op.apply(&mut self.workspace, f),
            None => self.workspace.collision_operator(f),
        }
    }
}

impl<F> CollisionRhs for F
where
    F: FnMut(&DistributionField) -> Result<Vec<f64>>,
{
    fn rate(&mut self, f: &DistributionField) -> Result<Vec<f64>> {
        self(f)
    }
}

/// Advances `f` by one SSP-RK3 step of size `dt`.
pub fn rk3_step(
    f: &DistributionField,
    rhs: &mut dyn CollisionRhs,
    dt: f64,
    t: f64,
) -> Result<DistributionField> {
    if !(dt > 0.0) {
        return Err(LandauError::Config(format!("time step must be positive, got {dt}")));
    }
    let grid = *f.grid();
    let next = ssp_rk3_step(f.values(), dt, t, |v| {
        rhs.rate(&DistributionField::from_parts_unchecked(grid, v.to_vec()))
    })?;
    Ok(DistributionField::from_parts_unchecked(grid, next))
}
