//! Reference implementations for tests. Only compiled with the `oracle`
//! feature (enabled for the test targets).
//!
//! - [`dense_collision`] runs the same algebra as the fast operator with
//!   direct quadratic-cost Fourier sums,
//! - [`direct_landau`] discretizes the original integro-differential form
//!   with a rectangle-rule double sum and centred differences,
//! - [`landau_matrix`] is the Coulomb collision kernel `A(z)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{LandauError, Result};
use crate::field::DistributionField;
use crate::grid::{MultiIndex, VelocityGrid};
use crate::kernel::KernelTable;

/// `A(z) = |z|⁻¹ (I - z⊗z/|z|²)`; zero at `z = 0`.
pub fn landau_matrix(z: [f64; 3]) -> [[f64; 3]; 3] {
    let r2 = z[0] * z[0] + z[1] * z[1] + z[2] * z[2];
    let mut a = [[0.0; 3]; 3];
    if r2 == 0.0 {
        return a;
    }
    let r = r2.sqrt();
    for i in 0..3 {
        for j in 0..3 {
            let id = if i == j { 1.0 } else { 0.0 };
            a[i][j] = (id - z[i] * z[j] / r2) / r;
        }
    }
    a
}

fn indices(size: usize) -> Vec<MultiIndex> {
    let half = (size / 2) as i64;
    let mut out = Vec::with_capacity(size * size * size);
    for x in -half..half {
        for y in -half..half {
            for z in -half..half {
                out.push([x, y, z]);
            }
        }
    }
    out
}

/// `exp(sign·2πi r/size)` for `r ∈ [0, size)`.
fn phase_table(size: usize, sign: f64) -> Vec<Complex64> {
    (0..size)
        .map(|r| Complex64::from_polar(1.0, sign * 2.0 * PI * r as f64 / size as f64))
        .collect()
}

fn phase_index(k: MultiIndex, j: MultiIndex, size: usize) -> usize {
    (k[0] * j[0] + k[1] * j[1] + k[2] * j[2]).rem_euclid(size as i64) as usize
}

/// `c(k) = size⁻³ Σ_j f_j exp(-2πi k·j/size)` for every `k ∈ J_size`, summing
/// only over the listed nodes.
fn dense_analyze(nodes: &[(MultiIndex, f64)], size: usize) -> Vec<(MultiIndex, Complex64)> {
    let table = phase_table(size, -1.0);
    let scale = 1.0 / (size * size * size) as f64;
    indices(size)
        .into_iter()
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(j, v) in nodes {
                acc += table[phase_index(k, j, size)] * v;
            }
            (k, acc * scale)
        })
        .collect()
}

/// `Σ_k c(k) exp(2πi k·j/size)` at the requested nodes, real part.
fn dense_synthesize(coeffs: &[(MultiIndex, Complex64)], at: &[MultiIndex], size: usize) -> Vec<f64> {
    let table = phase_table(size, 1.0);
    at.iter()
        .map(|&j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(k, c) in coeffs {
                acc += c * table[phase_index(k, j, size)];
            }
            acc.re
        })
        .collect()
}

/// `πk/L` with the Nyquist mode zeroed.
fn first(k: i64, size: usize, half_width: f64) -> f64 {
    if k == -((size / 2) as i64) {
        0.0
    } else {
        PI * k as f64 / half_width
    }
}

fn second(k: i64, half_width: f64) -> f64 {
    (PI * k as f64 / half_width).powi(2)
}

/// Largest lattice accepted by [`dense_collision`].
pub const DENSE_MAX_N: usize = 12;

/// The fast collision operator's algebra evaluated with direct Fourier sums.
pub fn dense_collision(f: &DistributionField, kernel: &KernelTable) -> Result<Vec<f64>> {
    let grid = *f.grid();
    let n = grid.n();
    if n > DENSE_MAX_N {
        return Err(LandauError::TooLarge { n, max: DENSE_MAX_N });
    }
    if !kernel.matches(&grid) {
        return Err(LandauError::GridMismatch("kernel table does not match the field".into()));
    }
    let m = 2 * n;
    let r = grid.half_width();
    let t = grid.extended_half_width();
    let inner = indices(n);
    let nodes: Vec<(MultiIndex, f64)> = inner.iter().copied().zip(f.values().iter().copied()).collect();

    let potential: Vec<(MultiIndex, Complex64)> = dense_analyze(&nodes, m)
        .into_iter()
        .map(|(k, c)| Ok((k, c * kernel.get(k)?)))
        .collect::<Result<_>>()?;

    let pairs = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
    let mut hessian = [[Vec::new(), Vec::new(), Vec::new()], [Vec::new(), Vec::new(), Vec::new()], [Vec::new(), Vec::new(), Vec::new()]];
    for &(a, b) in &pairs {
        let scaled: Vec<_> = potential
            .iter()
            .map(|&(k, c)| {
                let v = if a == b { second(k[a], t) } else { first(k[a], m, t) * first(k[b], m, t) };
                (k, -c * v)
            })
            .collect();
        let values = dense_synthesize(&scaled, &inner, m);
        hessian[a][b] = values.clone();
        hessian[b][a] = values;
    }
    let grad_lap: Vec<Vec<f64>> = (0..3)
        .map(|a| {
            let scaled: Vec<_> = potential
                .iter()
                .map(|&(k, c)| {
                    let lap = second(k[0], t) + second(k[1], t) + second(k[2], t);
                    (k, c * Complex64::new(0.0, -first(k[a], m, t) * lap))
                })
                .collect();
            dense_synthesize(&scaled, &inner, m)
        })
        .collect();

    let fc = dense_analyze(&nodes, n);
    let grad: Vec<Vec<f64>> = (0..3)
        .map(|a| {
            let scaled: Vec<_> = fc
                .iter()
                .map(|&(k, c)| (k, c * Complex64::new(0.0, first(k[a], n, r))))
                .collect();
            dense_synthesize(&scaled, &inner, n)
        })
        .collect();

    let values = f.values();
    let mut divergence: Vec<(MultiIndex, Complex64)> =
        indices(n).into_iter().map(|k| (k, Complex64::new(0.0, 0.0))).collect();
    for a in 0..3 {
        let flux: Vec<(MultiIndex, f64)> = (0..inner.len())
            .map(|i| {
                let diff: f64 = (0..3).map(|b| hessian[a][b][i] * grad[b][i]).sum();
                (inner[i], diff - grad_lap[a][i] * values[i])
            })
            .collect();
        for (slot, (k, c)) in divergence.iter_mut().zip(dense_analyze(&flux, n)) {
            slot.1 += c * Complex64::new(0.0, first(k[a], n, r));
        }
    }
    Ok(dense_synthesize(&divergence, &inner, n))
}

/// Largest lattice accepted by [`direct_landau`].
pub const DIRECT_MAX_N: usize = 10;

/// Low-order discretization of
/// `div ∫ A(v - v*) [∇f(v) f(v*) - ∇f(v*) f(v)] dv*`: rectangle rule over all
/// node pairs with the singular diagonal omitted, centred differences for
/// both gradients and the outer divergence, zero outside the cube.
pub fn direct_landau(f: &DistributionField) -> Result<Vec<f64>> {
    let grid = *f.grid();
    let n = grid.n();
    if n > DIRECT_MAX_N {
        return Err(LandauError::TooLarge { n, max: DIRECT_MAX_N });
    }
    let h = grid.spacing();
    let vol = grid.cell_volume();
    let inner = indices(n);
    let values = f.values();
    let at = |field: &[f64], j: MultiIndex| -> f64 {
        if grid.contains(j) {
            field[grid.linear_index(j).unwrap()]
        } else {
            0.0
        }
    };
    let centred = |field: &[f64], j: MultiIndex, a: usize| -> f64 {
        let mut fwd = j;
        let mut back = j;
        fwd[a] += 1;
        back[a] -= 1;
        (at(field, fwd) - at(field, back)) / (2.0 * h)
    };
    let grad: Vec<[f64; 3]> = inner
        .iter()
        .map(|&j| [centred(values, j, 0), centred(values, j, 1), centred(values, j, 2)])
        .collect();
    let coords: Vec<[f64; 3]> = inner.iter().map(|&j| grid.coordinate(j).unwrap()).collect();

    let mut flux = [vec![0.0; inner.len()], vec![0.0; inner.len()], vec![0.0; inner.len()]];
    for i in 0..inner.len() {
        let mut acc = [0.0; 3];
        for s in 0..inner.len() {
            if s == i {
                continue;
            }
            let z = [coords[i][0] - coords[s][0], coords[i][1] - coords[s][1], coords[i][2] - coords[s][2]];
            let a = landau_matrix(z);
            let w = [
                grad[i][0] * values[s] - grad[s][0] * values[i],
                grad[i][1] * values[s] - grad[s][1] * values[i],
                grad[i][2] * values[s] - grad[s][2] * values[i],
            ];
            for r in 0..3 {
                acc[r] += a[r][0] * w[0] + a[r][1] * w[1] + a[r][2] * w[2];
            }
        }
        for r in 0..3 {
            flux[r][i] = vol * acc[r];
        }
    }
    Ok(inner
        .iter()
        .map(|&j| (0..3).map(|a| centred(&flux[a], j, a)).sum())
        .collect())
}

/// Moments of `½[N(+cσe₁, σ²I) + N(-cσe₁, σ²I)]`: `(ρ, u, T, diag P)`.
pub fn symmetric_mixture_moments(sigma: f64, offset: f64) -> (f64, [f64; 3], f64, [f64; 3]) {
    let s2 = sigma * sigma;
    let shift = (offset * sigma).powi(2);
    let p = [s2 + shift, s2, s2];
    (1.0, [0.0; 3], (p[0] + p[1] + p[2]) / 3.0, p)
}

/// Unit-variance three-dimensional Gaussian: `E|v|² = 3`, `E|v|⁴ = 15`.
pub const GAUSSIAN_SECOND_MOMENT: f64 = 3.0;
pub const GAUSSIAN_FOURTH_MOMENT: f64 = 15.0;

/// Convenience for tests: grid with a random smooth field of compact support.
pub fn smooth_random_field(grid: &VelocityGrid, seed: u64) -> DistributionField {
    // Sum of a few anisotropic Gaussians with seeded centres and widths.
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let r = grid.half_width();
    let bumps: Vec<([f64; 3], [f64; 3], f64)> = (0..3)
        .map(|_| {
            let c = [0.0; 3].map(|_| (next() - 0.5) * 0.4 * r);
            let w = [0.0; 3].map(|_| (0.12 + 0.1 * next()) * r);
            (c, w, 0.2 + next())
        })
        .collect();
    DistributionField::from_fn(*grid, |v| {
        bumps
            .iter()
            .map(|(c, w, amp)| {
                let q: f64 = (0..3).map(|a| ((v[a] - c[a]) / w[a]).powi(2)).sum();
                amp * (-0.5 * q).exp()
            })
            .sum()
    })
}
