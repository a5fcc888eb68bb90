//! Discrete Fourier analysis and synthesis on periodic lattices, zero
//! extension to the doubled lattice, and spectral differentiation.
//!
//! A lattice of `size` points per direction on `[-L, L)³` has nodes
//! `v_j = j·2L/size`, `j ∈ ⟦-size/2, size/2-1⟧³`, and modes `k` in the same
//! index set. Analysis computes
//!
//! ```text
//! c(k) = size⁻³ Σ_j f(v_j) exp(-iπ k·v_j / L)
//! ```
//!
//! and synthesis evaluates `Σ_k c(k) exp(iπ k·v / L)` at the nodes.
//!
//! Coefficients are stored in FFT order (`p = k mod size` per axis), while
//! nodal arrays use the centred storage of [`crate::grid`]. Because
//! `exp(-2πi k·(s - size/2)/size) = (-1)^{k_x+k_y+k_z} exp(-2πi k·s/size)`,
//! switching between the two amounts to a checkerboard sign on the modes.

use std::ops::Range;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{LandauError, Result};
use crate::field::DistributionField;
use crate::grid::MultiIndex;

/// Imaginary residue allowed after synthesizing a real quantity, relative to
/// the ℓ¹ norm of the coefficients (a bound on any synthesized value).
pub const REALNESS_TOLERANCE: f64 = 1e-10;

/// Complex Fourier coefficients over `J_size` for a cube of half-width `L`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralCoeffs {
    size: usize,
    half_width: f64,
    data: Vec<Complex64>,
}

impl SpectralCoeffs {
    pub fn zeros(size: usize, half_width: f64) -> Self {
        Self { size, half_width, data: vec![Complex64::new(0.0, 0.0); size * size * size] }
    }

    pub(crate) fn from_raw(size: usize, half_width: f64, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), size * size * size);
        Self { size, half_width, data }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Coefficients in FFT order.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn get(&self, k: MultiIndex) -> Result<Complex64> {
        Ok(self.data[self.offset(k)?])
    }

    pub fn set(&mut self, k: MultiIndex, value: Complex64) -> Result<()> {
        let o = self.offset(k)?;
        self.data[o] = value;
        Ok(())
    }

    fn offset(&self, k: MultiIndex) -> Result<usize> {
        let half = (self.size / 2) as i64;
        if k.iter().any(|&c| !(-half..half).contains(&c)) {
            return Err(LandauError::IndexOutOfRange { index: k, size: self.size });
        }
        Ok(wrapped_offset(self.size, k))
    }

    /// Mode index stored at FFT-order offset `offset`.
    pub fn mode(&self, offset: usize) -> MultiIndex {
        let m = self.size;
        let p = [offset / (m * m), (offset / m) % m, offset % m];
        p.map(|q| mode_number(m, q))
    }

    /// `Σ_k |c(k)|²`.
    pub fn energy(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn l1_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).sum()
    }

    /// Largest violation of `c(-k) = conj(c(k))` over modes whose mirror lies in
    /// `J_size`, relative to the largest coefficient modulus.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.data.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let half = (self.size / 2) as i64;
        let mut worst = 0.0f64;
        for (o, c) in self.data.iter().enumerate() {
            let k = self.mode(o);
            if k.iter().any(|&c| c == -half) {
                continue;
            }
            let mirror = self.data[wrapped_offset(self.size, k.map(|c| -c))];
            worst = worst.max((mirror - c.conj()).norm());
        }
        worst / scale
    }
}

pub(crate) fn mode_number(size: usize, p: usize) -> i64 {
    if p < size / 2 {
        p as i64
    } else {
        p as i64 - size as i64
    }
}

pub(crate) fn wrapped_offset(size: usize, k: MultiIndex) -> usize {
    let w = |c: i64| c.rem_euclid(size as i64) as usize;
    (w(k[0]) * size + w(k[1])) * size + w(k[2])
}

/// Visits the modes of a `size³` FFT-ordered array in storage order with
/// their axis positions and checkerboard sign `(-1)^(px+py+pz)`.
pub(crate) fn for_each_mode(size: usize, mut visit: impl FnMut(usize, [usize; 3], f64)) {
    let mut o = 0;
    for x in 0..size {
        for y in 0..size {
            for z in 0..size {
                let sign = if (x + y + z) % 2 == 0 { 1.0 } else { -1.0 };
                visit(o, [x, y, z], sign);
                o += 1;
            }
        }
    }
}

/// Planned three-dimensional complex FFT on a `size³` row-major array.
///
/// Holds only immutable plans; scratch space is allocated per call so one
/// value can serve several threads at once.
#[derive(Clone)]
pub struct Transform3 {
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Transform3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transform3").field("size", &self.size).finish()
    }
}

impl Transform3 {
    pub fn new(size: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            size,
            forward: planner.plan_fft_forward(size),
            inverse: planner.plan_fft_inverse(size),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Unnormalized forward DFT along all three axes.
    pub fn forward(&self, data: &mut [Complex64]) {
        let m = self.size;
        self.pass_z(data, &*self.forward, 0..m, 0..m);
        self.pass_y(data, &*self.forward, 0..m);
        self.pass_x(data, &*self.forward, 0..m);
    }

    /// Unnormalized inverse DFT along all three axes.
    pub fn inverse(&self, data: &mut [Complex64]) {
        let m = self.size;
        self.pass_x(data, &*self.inverse, 0..m);
        self.pass_y(data, &*self.inverse, 0..m);
        self.pass_z(data, &*self.inverse, 0..m, 0..m);
    }

    /// Forward DFT of an `inner³` centred block embedded at the centre of an
    /// otherwise zero `size³` array. Lines that are identically zero are
    /// skipped.
    pub fn forward_zero_padded(&self, inner: &[f64], inner_size: usize) -> Vec<Complex64> {
        let m = self.size;
        let n = inner_size;
        debug_assert_eq!(inner.len(), n * n * n);
        let lo = (m - n) / 2;
        let mut data = vec![Complex64::new(0.0, 0.0); m * m * m];
        for (row, chunk) in inner.chunks_exact(n).enumerate() {
            let x = row / n + lo;
            let y = row % n + lo;
            let start = (x * m + y) * m + lo;
            for (dst, &v) in data[start..start + n].iter_mut().zip(chunk) {
                *dst = Complex64::new(v, 0.0);
            }
        }
        self.pass_z(&mut data, &*self.forward, lo..lo + n, lo..lo + n);
        self.pass_y(&mut data, &*self.forward, lo..lo + n);
        self.pass_x(&mut data, &*self.forward, 0..m);
        data
    }

    /// Inverse DFT of `data` returning only the centred `inner³` block.
    /// `data` is used as scratch.
    pub fn inverse_restricted(&self, data: &mut [Complex64], inner_size: usize) -> Vec<Complex64> {
        let m = self.size;
        let n = inner_size;
        let lo = (m - n) / 2;
        self.pass_x(data, &*self.inverse, lo..lo + n);
        self.pass_y(data, &*self.inverse, lo..lo + n);
        self.pass_z(data, &*self.inverse, lo..lo + n, lo..lo + n);
        let mut out = Vec::with_capacity(n * n * n);
        for x in lo..lo + n {
            for y in lo..lo + n {
                let start = (x * m + y) * m + lo;
                out.extend_from_slice(&data[start..start + n]);
            }
        }
        out
    }

    fn pass_z(&self, data: &mut [Complex64], fft: &dyn Fft<f64>, xs: Range<usize>, ys: Range<usize>) {
        let m = self.size;
        let plane = m * m;
        let scratch_len = fft.get_inplace_scratch_len();
        data[xs.start * plane..xs.end * plane].par_chunks_mut(plane).for_each_init(
            || vec![Complex64::new(0.0, 0.0); scratch_len],
            |scratch, p| fft.process_with_scratch(&mut p[ys.start * m..ys.end * m], scratch),
        );
    }

    fn pass_y(&self, data: &mut [Complex64], fft: &dyn Fft<f64>, xs: Range<usize>) {
        let m = self.size;
        let plane = m * m;
        let scratch_len = fft.get_inplace_scratch_len();
        data[xs.start * plane..xs.end * plane].par_chunks_mut(plane).for_each_init(
            || (vec![Complex64::new(0.0, 0.0); plane], vec![Complex64::new(0.0, 0.0); scratch_len]),
            |(buf, scratch), p| {
                transpose(p, buf, m);
                fft.process_with_scratch(buf, scratch);
                transpose(buf, p, m);
            },
        );
    }

    /// FFT along x for every (y, z); only x-planes in `x_out` are written back.
    fn pass_x(&self, data: &mut [Complex64], fft: &dyn Fft<f64>, x_out: Range<usize>) {
        let m = self.size;
        let plane = m * m;
        let scratch_len = fft.get_inplace_scratch_len();
        // Lines along x laid out contiguously as [y][z][x].
        let mut lines = vec![Complex64::new(0.0, 0.0); m * plane];
        {
            let src: &[Complex64] = data;
            lines.par_chunks_mut(plane).enumerate().for_each(|(y, block)| {
                for z in 0..m {
                    let line = &mut block[z * m..(z + 1) * m];
                    for (x, dst) in line.iter_mut().enumerate() {
                        *dst = src[(x * m + y) * m + z];
                    }
                }
            });
        }
        lines.par_chunks_mut(plane).for_each_init(
            || vec![Complex64::new(0.0, 0.0); scratch_len],
            |scratch, block| fft.process_with_scratch(block, scratch),
        );
        let lines = &lines;
        data[x_out.start * plane..x_out.end * plane]
            .par_chunks_mut(plane)
            .enumerate()
            .for_each(|(i, p)| {
                let x = x_out.start + i;
                for (yz, dst) in p.iter_mut().enumerate() {
                    *dst = lines[yz * m + x];
                }
            });
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], m: usize) {
    for r in 0..m {
        for c in 0..m {
            dst[c * m + r] = src[r * m + c];
        }
    }
}

/// Scales raw forward-DFT output into coefficients `c(k)`.
pub(crate) fn normalize_forward(data: &mut [Complex64], size: usize) {
    let scale = 1.0 / (size * size * size) as f64;
    for_each_mode(size, |o, _, sign| data[o] *= scale * sign);
}

/// Applies the checkerboard sign so a raw inverse DFT yields centred nodal values.
pub(crate) fn prepare_inverse(data: &mut [Complex64], size: usize) {
    for_each_mode(size, |o, _, sign| {
        if sign < 0.0 {
            data[o] = -data[o];
        }
    });
}

/// Takes the real part of synthesized values after bounding the imaginary
/// residue by `REALNESS_TOLERANCE · l1`.
pub(crate) fn take_real(values: Vec<Complex64>, l1: f64) -> Result<Vec<f64>> {
    let residue = values.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    let tolerance = REALNESS_TOLERANCE * l1;
    if residue > tolerance {
        return Err(LandauError::Realness { residue, tolerance });
    }
    Ok(values.into_iter().map(|c| c.re).collect())
}

fn check_cube(len: usize, size: usize) -> Result<()> {
    if size == 0 || size % 2 != 0 || len != size * size * size {
        return Err(LandauError::Shape { size, found: len });
    }
    Ok(())
}

pub(crate) fn analyze_with(tr: &Transform3, values: &[f64], half_width: f64) -> SpectralCoeffs {
    let size = tr.size();
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    tr.forward(&mut data);
    normalize_forward(&mut data, size);
    SpectralCoeffs::from_raw(size, half_width, data)
}

pub(crate) fn synthesize_with(tr: &Transform3, coeffs: &SpectralCoeffs) -> Result<Vec<f64>> {
    let mut data = coeffs.data.clone();
    prepare_inverse(&mut data, coeffs.size);
    tr.inverse(&mut data);
    take_real(data, coeffs.l1_norm())
}

/// Fourier coefficients of real nodal values on a `size³` lattice over `[-L, L)³`.
pub fn analyze(values: &[f64], size: usize, half_width: f64) -> Result<SpectralCoeffs> {
    check_cube(values.len(), size)?;
    Ok(analyze_with(&Transform3::new(size), values, half_width))
}

/// Nodal values of the trigonometric polynomial with coefficients `coeffs`.
/// Fails if the result is not real to [`REALNESS_TOLERANCE`].
pub fn synthesize(coeffs: &SpectralCoeffs) -> Result<Vec<f64>> {
    synthesize_with(&Transform3::new(coeffs.size), coeffs)
}

/// Copies `f` onto the extended `2n` lattice, zero outside the inner cube.
pub fn zero_extend(f: &DistributionField) -> Vec<f64> {
    let n = f.grid().n();
    let m = 2 * n;
    let lo = n / 2;
    let mut out = vec![0.0; m * m * m];
    for (row, chunk) in f.values().chunks_exact(n).enumerate() {
        let x = row / n + lo;
        let y = row % n + lo;
        let start = (x * m + y) * m + lo;
        out[start..start + n].copy_from_slice(chunk);
    }
    out
}

/// Per-axis factors `(π k / L)^order` in FFT order; the Nyquist mode is
/// zeroed for odd orders so that odd derivatives of real fields stay real.
pub(crate) fn axis_factors(size: usize, half_width: f64, order: u32) -> Vec<f64> {
    let w = std::f64::consts::PI / half_width;
    (0..size)
        .map(|p| {
            if order % 2 == 1 && p == size / 2 {
                0.0
            } else {
                (w * mode_number(size, p) as f64).powi(order as i32)
            }
        })
        .collect()
}

/// Spectral derivative `∂^α`: multiplies `c(k)` by `(iπ/L)^{|α|} k^α`.
pub fn derive(coeffs: &SpectralCoeffs, alpha: [u32; 3]) -> Result<SpectralCoeffs> {
    let order: u32 = alpha.iter().sum();
    if order > 3 {
        return Err(LandauError::DerivativeOrder(order));
    }
    let m = coeffs.size;
    let fx = axis_factors(m, coeffs.half_width, alpha[0]);
    let fy = axis_factors(m, coeffs.half_width, alpha[1]);
    let fz = axis_factors(m, coeffs.half_width, alpha[2]);
    let unit = Complex64::i().powu(order);
    let mut out = coeffs.clone();
    for (o, c) in out.data.iter_mut().enumerate() {
        let factor = fx[o / (m * m)] * fy[(o / m) % m] * fz[o % m];
        *c *= unit * factor;
    }
    Ok(out)
}

/// Synthesizes extended-lattice coefficients and keeps the inner nodes.
pub fn sample_inner(coeffs: &SpectralCoeffs) -> Result<Vec<f64>> {
    let m = coeffs.size;
    if m % 4 != 0 {
        return Err(LandauError::Shape { size: m, found: coeffs.data.len() });
    }
    sample_inner_with(&Transform3::new(m), coeffs.data.clone(), m / 2, coeffs.l1_norm())
}

pub(crate) fn sample_inner_with(
    tr: &Transform3,
    mut data: Vec<Complex64>,
    inner_size: usize,
    l1: f64,
) -> Result<Vec<f64>> {
    prepare_inverse(&mut data, tr.size());
    let inner = tr.inverse_restricted(&mut data, inner_size);
    take_real(inner, l1)
}
