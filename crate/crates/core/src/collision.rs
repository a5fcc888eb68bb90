//! Discrete Landau operator at the collocation nodes.
//!
//! One evaluation of `C_n(f, f)`:
//!
//! 1. zero-extend `f` to the `2n` lattice and transform it once; multiply by
//!    `ψ̃` to get the Rosenbluth potential `g̃`,
//! 2. sample the six Hessian entries of `g` and the three components of
//!    `∇Δg` at the inner nodes (nine pruned inverse transforms),
//! 3. differentiate `f` on the inner lattice (half-width `R`),
//! 4. form the flux `F_a = Σ_b ∂_a∂_b g ∂_b f − ∂_a Δg f` pointwise,
//! 5. interpolate the flux on the inner lattice and take its spectral
//!    divergence.
//!
//! Step 5 makes the zero mode of the output vanish, so the discrete mass
//! `h³ Σ C_n(f)` is zero up to roundoff for any `f`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{LandauError, Result};
use crate::field::DistributionField;
use crate::grid::VelocityGrid;
use crate::kernel::KernelTable;
use crate::spectral::{
    analyze_with, axis_factors, for_each_mode, normalize_forward, take_real, SpectralCoeffs,
    Transform3,
};

/// Number of transforms performed since the last reset.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TransformStats {
    pub extended_forward: usize,
    pub extended_inverse: usize,
    pub inner_forward: usize,
    pub inner_inverse: usize,
}

/// Unique Hessian entries in storage order; `HESSIAN_SLOT[a][b]` indexes them.
const HESSIAN_PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];
const HESSIAN_SLOT: [[usize; 3]; 3] = [[0, 3, 4], [3, 1, 5], [4, 5, 2]];

/// Second and third derivatives of the potential sampled at the inner nodes.
#[derive(Clone, Debug)]
pub struct PotentialDerivatives {
    hessian: [Vec<f64>; 6],
    grad_laplacian: [Vec<f64>; 3],
}

impl PotentialDerivatives {
    /// `∂_a ∂_b g` at the inner nodes; `(a, b)` and `(b, a)` share storage.
    pub fn hessian(&self, a: usize, b: usize) -> &[f64] {
        &self.hessian[HESSIAN_SLOT[a][b]]
    }

    /// `∂_a Δg` at the inner nodes.
    pub fn grad_laplacian(&self, a: usize) -> &[f64] {
        &self.grad_laplacian[a]
    }
}

/// Per-axis multiplier tables for one lattice.
#[derive(Clone, Debug)]
struct Factors {
    /// `πk/L`, Nyquist zeroed.
    first: Vec<f64>,
    /// `(πk/L)²`.
    second: Vec<f64>,
}

impl Factors {
    fn new(size: usize, half_width: f64) -> Self {
        Self {
            first: axis_factors(size, half_width, 1),
            second: axis_factors(size, half_width, 2),
        }
    }
}

/// Scratch and plans for evaluating the collision operator on one grid.
///
/// Single-user; concurrent evaluations need separate workspaces, which may
/// share one kernel table.
#[derive(Clone, Debug)]
pub struct CollisionWorkspace {
    grid: VelocityGrid,
    kernel: Arc<KernelTable>,
    kernel_fft: Vec<f64>,
    extended: Transform3,
    inner: Transform3,
    extended_factors: Factors,
    inner_factors: Factors,
    stats: TransformStats,
}

impl CollisionWorkspace {
    pub fn new(grid: VelocityGrid, kernel: Arc<KernelTable>) -> Result<Self> {
        if !kernel.matches(&grid) {
            return Err(LandauError::GridMismatch(format!(
                "kernel table for (n={}, T={}) used with (n={}, T={})",
                kernel.n(),
                kernel.half_width(),
                grid.n(),
                grid.extended_half_width()
            )));
        }
        let n = grid.n();
        Ok(Self {
            kernel_fft: kernel.fft_ordered(),
            kernel,
            extended: Transform3::new(2 * n),
            inner: Transform3::new(n),
            extended_factors: Factors::new(2 * n, grid.extended_half_width()),
            inner_factors: Factors::new(n, grid.half_width()),
            grid,
            stats: TransformStats::default(),
        })
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn kernel(&self) -> &Arc<KernelTable> {
        &self.kernel
    }

    pub fn stats(&self) -> TransformStats {
        self.stats
    }

    pub fn reset_stats(&mut self) {
        self.stats = TransformStats::default();
    }

    /// Coefficients of `g_2n = ψ * f_2n` on the extended lattice.
    pub fn rosenbluth_potential(&mut self, f: &DistributionField) -> Result<SpectralCoeffs> {
        f.check_grid(&self.grid)?;
        let data = self.potential_raw(f);
        Ok(SpectralCoeffs::from_raw(2 * self.grid.n(), self.grid.extended_half_width(), data))
    }

    fn potential_raw(&mut self, f: &DistributionField) -> Vec<Complex64> {
        let m = 2 * self.grid.n();
        let mut data = self.extended.forward_zero_padded(f.values(), self.grid.n());
        self.stats.extended_forward += 1;
        normalize_forward(&mut data, m);
        for (c, &psi) in data.iter_mut().zip(&self.kernel_fft) {
            *c *= psi;
        }
        data
    }

    /// Hessian and `∇Δ` of the potential of `f`, sampled at the inner nodes.
    pub fn potential_derivatives(&mut self, f: &DistributionField) -> Result<PotentialDerivatives> {
        f.check_grid(&self.grid)?;
        let g = self.potential_raw(f);
        self.derivatives_of(&g)
    }

    fn derivatives_of(&mut self, g: &[Complex64]) -> Result<PotentialDerivatives> {
        let m = 2 * self.grid.n();
        let n = self.grid.n();
        let fac = &self.extended_factors;
        let tr = &self.extended;
        let mut sampled: Vec<Vec<f64>> = (0..9)
            .into_par_iter()
            .map(|q| {
                let multiplier = |p: [usize; 3]| -> Complex64 {
                    if q < 6 {
                        // (iπ/T)² k_a k_b
                        let (a, b) = HESSIAN_PAIRS[q];
                        let v = if a == b {
                            fac.second[p[a]]
                        } else {
                            fac.first[p[a]] * fac.first[p[b]]
                        };
                        Complex64::new(-v, 0.0)
                    } else {
                        // (iπ/T)³ k_a |k|²
                        let a = q - 6;
                        let lap = fac.second[p[0]] + fac.second[p[1]] + fac.second[p[2]];
                        Complex64::new(0.0, -fac.first[p[a]] * lap)
                    }
                };
                let (mut data, l1) = multiply(g, m, multiplier);
                take_real(tr.inverse_restricted(&mut data, n), l1)
            })
            .collect::<Result<_>>()?;
        self.stats.extended_inverse += 9;
        let grad_laplacian = [sampled.pop().unwrap(), sampled.pop().unwrap(), sampled.pop().unwrap()];
        let [dz, dy, dx] = grad_laplacian;
        let hessian: [Vec<f64>; 6] = sampled.try_into().expect("six Hessian entries");
        Ok(PotentialDerivatives { hessian, grad_laplacian: [dx, dy, dz] })
    }

    /// `C_n(f, f)` at the inner nodes.
    pub fn collision_operator(&mut self, f: &DistributionField) -> Result<Vec<f64>> {
        f.check_grid(&self.grid)?;
        let n = self.grid.n();
        let len = self.grid.len();
        let g = self.potential_raw(f);
        let pot = self.derivatives_of(&g)?;
        drop(g);

        let fc = analyze_with(&self.inner, f.values(), self.grid.half_width());
        self.stats.inner_forward += 1;
        let fac = &self.inner_factors;
        let tr = &self.inner;
        let grad: Vec<Vec<f64>> = (0..3)
            .into_par_iter()
            .map(|a| {
                let (mut data, l1) = multiply(fc.as_slice(), n, |p| Complex64::new(0.0, fac.first[p[a]]));
                tr.inverse(&mut data);
                take_real(data, l1)
            })
            .collect::<Result<_>>()?;
        self.stats.inner_inverse += 3;

        let values = f.values();
        let fluxes: Vec<SpectralCoeffs> = (0..3)
            .into_par_iter()
            .map(|a| {
                let mut flux = vec![0.0; len];
                for (i, out) in flux.iter_mut().enumerate() {
                    let diffusion = pot.hessian(a, 0)[i] * grad[0][i]
                        + pot.hessian(a, 1)[i] * grad[1][i]
                        + pot.hessian(a, 2)[i] * grad[2][i];
                    *out = diffusion - pot.grad_laplacian(a)[i] * values[i];
                }
                analyze_with(tr, &flux, self.grid.half_width())
            })
            .collect();
        self.stats.inner_forward += 3;

        let mut div = vec![Complex64::new(0.0, 0.0); len];
        let mut l1 = 0.0;
        for_each_mode(n, |o, p, sign| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, flux) in fluxes.iter().enumerate() {
                acc += flux.as_slice()[o] * Complex64::new(0.0, fac.first[p[a]]);
            }
            l1 += acc.re.abs() + acc.im.abs();
            div[o] = acc * sign;
        });
        self.inner.inverse(&mut div);
        self.stats.inner_inverse += 1;
        take_real(div, l1)
    }
}

/// `src[p]·multiplier(p)` over a `size³` FFT-ordered array, signed for a raw
/// inverse transform, with the ℓ¹ norm of the real and imaginary parts.
fn multiply(
    src: &[Complex64],
    size: usize,
    multiplier: impl Fn([usize; 3]) -> Complex64,
) -> (Vec<Complex64>, f64) {
    let mut l1 = 0.0;
    let mut out = vec![Complex64::new(0.0, 0.0); src.len()];
    for_each_mode(size, |o, p, sign| {
        let v = src[o] * multiplier(p);
        l1 += v.re.abs() + v.im.abs();
        out[o] = v * sign;
    });
    (out, l1)
}

/// Nodal values of `M_{ρ,u,T}(v) = ρ (2πT)^{-3/2} exp(-|v-u|²/(2T))`.
pub fn maxwellian_field(
    rho: f64,
    u: [f64; 3],
    temp: f64,
    grid: &VelocityGrid,
) -> Result<DistributionField> {
    if !(rho > 0.0) || !(temp > 0.0) || !rho.is_finite() || !temp.is_finite() {
        return Err(LandauError::Config(format!(
            "Maxwellian needs positive density and temperature, got rho={rho}, T={temp}"
        )));
    }
    let peak = rho / (2.0 * std::f64::consts::PI * temp).powf(1.5);
    Ok(DistributionField::from_fn(*grid, |v| {
        let d2 = (v[0] - u[0]).powi(2) + (v[1] - u[1]).powi(2) + (v[2] - u[2]).powi(2);
        peak * (-d2 / (2.0 * temp)).exp()
    }))
}

/// `L_n(f) = C_n(f, f) - C_n(M_n, M_n)` with the equilibrium term cached.
#[derive(Clone, Debug)]
pub struct SteadyStateOperator {
    equilibrium: DistributionField,
    equilibrium_term: Vec<f64>,
}

impl SteadyStateOperator {
    pub fn new(ws: &mut CollisionWorkspace, equilibrium: DistributionField) -> Result<Self> {
        let equilibrium_term = ws.collision_operator(&equilibrium)?;
        Ok(Self { equilibrium, equilibrium_term })
    }

    pub fn equilibrium(&self) -> &DistributionField {
        &self.equilibrium
    }

    /// Cached `C_n(M_n, M_n)`.
    pub fn equilibrium_term(&self) -> &[f64] {
        &self.equilibrium_term
    }

    pub fn apply(&self, ws: &mut CollisionWorkspace, f: &DistributionField) -> Result<Vec<f64>> {
        f.check_grid(self.equilibrium.grid())?;
        let mut out = ws.collision_operator(f)?;
        for (o, m) in out.iter_mut().zip(&self.equilibrium_term) {
            *o -= m;
        }
        Ok(out)
    }
}

/// Uncached `C_n(f, f) - C_n(M_n, M_n)`.
pub fn steady_state_operator(
    f: &DistributionField,
    equilibrium: &DistributionField,
    ws: &mut CollisionWorkspace,
) -> Result<Vec<f64>> {
    f.check_grid(equilibrium.grid())?;
    let op = SteadyStateOperator::new(ws, equilibrium.clone())?;
    op.apply(ws, f)
}
