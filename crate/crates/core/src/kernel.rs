//! Fourier coefficients of the truncated Coulomb kernel `ψ(z) = |z|`.
//!
//! On the extended cube `[-T, T]³` the convolution `g = ψ * f` becomes a
//! modewise product `g̃(k) = f̃(k) ψ̃(k)` with
//!
//! ```text
//! ψ̃(k) = (T/π)⁴ ∫_{[-π,π]³} |z| exp(-i k·z) dz,    k ∈ ⟦-n, n-1⟧³.
//! ```
//!
//! The integral is evaluated by the rectangle rule on a uniform `fine³`
//! lattice of `[-π, π)³`. `|z|` is only Lipschitz at the origin, so `fine`
//! must be large (the default is `max(256, 8n)`) and the table is usually
//! computed once and cached on disk.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{LandauError, Result};
use crate::grid::{linear_index, MultiIndex, VelocityGrid};
use crate::io::{self, Reader};
use crate::spectral;

const MAGIC: &[u8; 4] = b"LSKT";
const VERSION: u32 = 1;

/// Tolerance on `max |Im ψ̃| / max |Re ψ̃|` for the full-cube quadrature.
pub const REALNESS_TOLERANCE: f64 = 1e-8;

/// `max(256, 8n)`.
pub fn default_fine(n: usize) -> usize {
    (8 * n).max(256)
}

/// How the quadrature sum is organized. Both compute the same rectangle rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quadrature {
    /// Samples the first octant only and folds the sum into a separable
    /// cosine transform restricted to the retained modes. Memory is
    /// `O(fine·n²)`, which is what makes `fine = 1024` practical.
    Folded,
    /// Samples the whole cube and runs one `fine³` FFT.
    FullCube,
}

/// Precomputed `ψ̃(k)` for `k ∈ J_2n`, in centred storage order.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelTable {
    n: usize,
    half_width: f64,
    fine: usize,
    values: Vec<f64>,
}

impl KernelTable {
    /// Inner lattice size the table was built for.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Extended half-width `T`.
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn fine(&self) -> usize {
        self.fine
    }

    /// Values over `J_2n` in centred storage order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, k: MultiIndex) -> Result<f64> {
        let size = 2 * self.n;
        let half = self.n as i64;
        if k.iter().any(|&c| !(-half..half).contains(&c)) {
            return Err(LandauError::IndexOutOfRange { index: k, size });
        }
        Ok(self.values[linear_index(size, k)])
    }

    pub fn matches(&self, grid: &VelocityGrid) -> bool {
        self.n == grid.n() && self.half_width == grid.extended_half_width()
    }

    /// Values rearranged into FFT order, ready for modewise products.
    pub(crate) fn fft_ordered(&self) -> Vec<f64> {
        let size = 2 * self.n;
        let mut out = vec![0.0; self.values.len()];
        for (o, &v) in self.values.iter().enumerate() {
            let k = crate::grid::multi_index(size, o);
            out[spectral::wrapped_offset(size, k)] = v;
        }
        out
    }
}

/// Builds the table for `grid` with the folded quadrature.
pub fn compute_kernel_table(grid: &VelocityGrid, fine: usize) -> Result<KernelTable> {
    compute_kernel_table_with(grid, fine, Quadrature::Folded)
}

pub fn compute_kernel_table_with(
    grid: &VelocityGrid,
    fine: usize,
    quadrature: Quadrature,
) -> Result<KernelTable> {
    let n = grid.n();
    if fine < 2 * n || fine % 2 != 0 {
        return Err(LandauError::KernelResolution { fine, min: 2 * n });
    }
    let unit = match quadrature {
        Quadrature::Folded => folded_unit_integrals(n, fine),
        Quadrature::FullCube => full_cube_unit_integrals(n, fine)?,
    };
    let t = grid.extended_half_width();
    let prefactor = (t / PI).powi(4);
    Ok(KernelTable {
        n,
        half_width: t,
        fine,
        values: unit.into_iter().map(|v| v * prefactor).collect(),
    })
}

/// Rectangle-rule values of `∫_{[-π,π]³} |z| exp(-i k·z) dz` over `J_2n`,
/// centred storage, from a full `fine³` transform.
fn full_cube_unit_integrals(n: usize, fine: usize) -> Result<Vec<f64>> {
    let delta = 2.0 * PI / fine as f64;
    let half = (fine / 2) as i64;
    let mut samples = Vec::with_capacity(fine * fine * fine);
    for x in -half..half {
        for y in -half..half {
            for z in -half..half {
                let r2 = (x * x + y * y + z * z) as f64;
                samples.push(delta * r2.sqrt());
            }
        }
    }
    // analyze() divides by fine³; the rectangle rule multiplies by δ³.
    let coeffs = spectral::analyze(&samples, fine, PI)?;
    drop(samples);
    let volume = (2.0 * PI).powi(3);
    let size = 2 * n;
    let mut re = Vec::with_capacity(size * size * size);
    let mut max_re = 0.0f64;
    let mut max_im = 0.0f64;
    for o in 0..size * size * size {
        let k = crate::grid::multi_index(size, o);
        let c = coeffs.get(k)? * volume;
        max_re = max_re.max(c.re.abs());
        max_im = max_im.max(c.im.abs());
        re.push(c.re);
    }
    let ratio = max_im / max_re;
    if !(ratio <= REALNESS_TOLERANCE) {
        return Err(LandauError::KernelQuadrature { ratio });
    }
    Ok(re)
}

/// Same sum as [`full_cube_unit_integrals`], folded onto the first octant.
///
/// Nodes `z = mδ`, `m = 0..=fine/2`, carry weight 1 at `m = 0` and
/// `m = fine/2` (the node at `-π` is its own mirror) and 2 elsewhere; the
/// exponential reduces to a product of cosines. The contraction runs one
/// axis at a time and each `m₁` plane is reduced in a fixed order, so the
/// result does not depend on the thread count.
fn folded_unit_integrals(n: usize, fine: usize) -> Vec<f64> {
    let half = fine / 2;
    let nodes = half + 1;
    let modes = n + 1;
    let delta = 2.0 * PI / fine as f64;

    // cos_table[k][m] = w_m cos(k m δ), angle reduced modulo 2π exactly.
    let cos_table: Vec<Vec<f64>> = (0..modes)
        .map(|k| {
            (0..nodes)
                .map(|m| {
                    let w = if m == 0 || m == half { 1.0 } else { 2.0 };
                    let r = (k * m) % fine;
                    w * (2.0 * PI * r as f64 / fine as f64).cos()
                })
                .collect()
        })
        .collect();

    let planes: Vec<Vec<f64>> = (0..nodes)
        .into_par_iter()
        .map(|m1| {
            let z1 = (m1 * m1) as f64;
            let mut row = vec![0.0; nodes];
            // partial[m2][k3]
            let mut partial = vec![0.0; nodes * modes];
            for m2 in 0..nodes {
                let z12 = z1 + (m2 * m2) as f64;
                for (m3, r) in row.iter_mut().enumerate() {
                    *r = delta * (z12 + (m3 * m3) as f64).sqrt();
                }
                for k3 in 0..modes {
                    partial[m2 * modes + k3] = dot(&cos_table[k3], &row);
                }
            }
            // plane[k2][k3]
            let mut plane = vec![0.0; modes * modes];
            for k2 in 0..modes {
                let c2 = &cos_table[k2];
                let out = &mut plane[k2 * modes..(k2 + 1) * modes];
                for m2 in 0..nodes {
                    let w = c2[m2];
                    for (o, p) in out.iter_mut().zip(&partial[m2 * modes..(m2 + 1) * modes]) {
                        *o += w * p;
                    }
                }
            }
            plane
        })
        .collect();

    let mut folded = vec![0.0; modes * modes * modes];
    for (m1, plane) in planes.iter().enumerate() {
        for k1 in 0..modes {
            let w = cos_table[k1][m1];
            let out = &mut folded[k1 * modes * modes..(k1 + 1) * modes * modes];
            for (o, p) in out.iter_mut().zip(plane) {
                *o += w * p;
            }
        }
    }

    let cell = delta * delta * delta;
    let size = 2 * n;
    (0..size * size * size)
        .map(|o| {
            let k = crate::grid::multi_index(size, o).map(|c| c.unsigned_abs() as usize);
            cell * folded[(k[0] * modes + k[1]) * modes + k[2]]
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for i in 0..4 {
            acc[i] += x[i] * y[i];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Header fields a cached table must match.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelKey {
    pub n: usize,
    pub half_width: f64,
    /// `None` accepts any quadrature resolution.
    pub fine: Option<usize>,
}

impl KernelKey {
    pub fn for_grid(grid: &VelocityGrid, fine: Option<usize>) -> Self {
        Self { n: grid.n(), half_width: grid.extended_half_width(), fine }
    }
}

/// Writes the table as `LSKT | version | n | fine | T | values | crc32`,
/// little-endian, CRC over the value block.
pub fn store_kernel(table: &KernelTable, path: impl AsRef<Path>) -> Result<()> {
    let mut bytes = Vec::with_capacity(24 + 8 * table.values.len() + 4);
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&VERSION.to_le_bytes());
    bytes.extend_from_slice(&(table.n as u32).to_le_bytes());
    bytes.extend_from_slice(&(table.fine as u32).to_le_bytes());
    bytes.extend_from_slice(&table.half_width.to_le_bytes());
    io::append_values_with_crc(&mut bytes, &table.values);
    fs::write(path, bytes)?;
    Ok(())
}

pub fn load_kernel(path: impl AsRef<Path>, expected: KernelKey) -> Result<KernelTable> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    let mut r = Reader::new(path, &bytes);
    r.magic(MAGIC)?;
    r.version(VERSION)?;
    let n = r.u32()? as usize;
    let fine = r.u32()? as usize;
    let half_width = r.f64()?;

    let fine_ok = expected.fine.map_or(true, |f| f == fine);
    if n != expected.n || half_width != expected.half_width || !fine_ok {
        return Err(LandauError::HeaderMismatch {
            path: path.to_path_buf(),
            expected: format!(
                "n={}, T={}, fine={}",
                expected.n,
                expected.half_width,
                expected.fine.map_or("any".to_string(), |f| f.to_string())
            ),
            found: format!("n={n}, T={half_width}, fine={fine}"),
        });
    }
    let values = r.values_with_crc((2 * n).pow(3))?;
    r.finish()?;
    Ok(KernelTable { n, half_width, fine, values })
}
