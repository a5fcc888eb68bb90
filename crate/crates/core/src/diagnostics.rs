//! Observables of a nodal distribution: moments, pressure tensor, fourth
//! moment, entropies, error norms, projections and cross sections.
//!
//! Every integral is the rectangle rule `h³ Σ_j w(v_j) f(v_j)` on the inner
//! lattice, accumulated in storage order.

use crate::collision::maxwellian_field;
use crate::error::{LandauError, Result};
use crate::field::DistributionField;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MomentSet {
    pub t: f64,
    pub rho: f64,
    pub u: [f64; 3],
    pub temp: f64,
    /// Pressure tensor `∫ (v-u)⊗(v-u) f dv`, stored symmetric.
    pub pressure: [[f64; 3]; 3],
    /// `∫ |v|⁴ f dv`.
    pub m4: f64,
    pub entropy: f64,
    pub rel_entropy: f64,
    /// Nodes with `f ≤ 0`, skipped by the entropy sums.
    pub nonpos_count: usize,
}

impl MomentSet {
    pub fn momentum(&self) -> [f64; 3] {
        self.u.map(|c| self.rho * c)
    }

    /// Fills `entropy`, `rel_entropy` and `nonpos_count` for `f`, taking the
    /// Maxwellian with this set's `(ρ, u, T)` as reference. `rel_entropy` is
    /// NaN when no such Maxwellian exists (`T ≤ 0`) or it underflows at some
    /// node.
    pub fn with_entropies(mut self, f: &DistributionField) -> Result<Self> {
        let (entropy, nonpos) = entropy(f);
        self.rel_entropy = match maxwellian_field(self.rho, self.u, self.temp, f.grid()) {
            Ok(m) => match relative_entropy(f, &m) {
                Ok((rel, _)) => rel,
                Err(LandauError::InvalidReference { .. }) => f64::NAN,
                Err(e) => return Err(e),
            },
            Err(LandauError::Config(_)) => f64::NAN,
            Err(e) => return Err(e),
        };
        self.entropy = entropy;
        self.nonpos_count = nonpos;
        Ok(self)
    }
}

/// Mass, mean velocity, temperature, pressure tensor and fourth moment.
pub fn moments(f: &DistributionField) -> Result<MomentSet> {
    let grid = f.grid();
    let vol = grid.cell_volume();
    let values = f.values();

    let mut mass = 0.0;
    let mut first = [0.0; 3];
    let mut fourth = 0.0;
    grid.for_each_node(|o, v| {
        let w = values[o];
        mass += w;
        for a in 0..3 {
            first[a] += v[a] * w;
        }
        let r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        fourth += r2 * r2 * w;
    });
    let rho = vol * mass;
    if !(rho > 0.0) {
        return Err(LandauError::DegenerateState(rho));
    }
    let u = first.map(|s| vol * s / rho);

    let mut second = [[0.0; 3]; 3];
    let mut spread = 0.0;
    grid.for_each_node(|o, v| {
        let w = values[o];
        let d = [v[0] - u[0], v[1] - u[1], v[2] - u[2]];
        spread += (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) * w;
        for a in 0..3 {
            for b in a..3 {
                second[a][b] += d[a] * d[b] * w;
            }
        }
    });
    let mut pressure = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in a..3 {
            pressure[a][b] = vol * second[a][b];
            pressure[b][a] = pressure[a][b];
        }
    }
    Ok(MomentSet {
        rho,
        u,
        temp: vol * spread / (3.0 * rho),
        pressure,
        m4: vol * fourth,
        ..MomentSet::default()
    })
}

/// `h³ Σ f log f` over nodes with `f > 0`, and the number of skipped nodes.
pub fn entropy(f: &DistributionField) -> (f64, usize) {
    let mut sum = 0.0;
    let mut skipped = 0;
    for &v in f.values() {
        if v > 0.0 {
            sum += v * v.ln();
        } else {
            skipped += 1;
        }
    }
    (f.grid().cell_volume() * sum, skipped)
}

/// `h³ Σ f log(f/m)` over nodes with `f > 0`; `m` must be positive everywhere.
pub fn relative_entropy(f: &DistributionField, m: &DistributionField) -> Result<(f64, usize)> {
    f.check_grid(m.grid())?;
    if let Some(o) = m.values().iter().position(|&v| !(v > 0.0)) {
        return Err(LandauError::InvalidReference {
            index: m.grid().node_index(o),
            value: m.values()[o],
        });
    }
    let mut sum = 0.0;
    let mut skipped = 0;
    for (&v, &r) in f.values().iter().zip(m.values()) {
        if v > 0.0 {
            sum += v * (v / r).ln();
        } else {
            skipped += 1;
        }
    }
    Ok((f.grid().cell_volume() * sum, skipped))
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorNorms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

pub fn error_norms(f: &DistributionField, reference: &DistributionField) -> Result<ErrorNorms> {
    f.check_grid(reference.grid())?;
    let vol = f.grid().cell_volume();
    let mut out = ErrorNorms::default();
    let mut sq = 0.0;
    for (a, b) in f.values().iter().zip(reference.values()) {
        let d = (a - b).abs();
        out.l1 += d;
        sq += d * d;
        out.linf = out.linf.max(d);
    }
    out.l1 *= vol;
    out.l2 = (vol * sq).sqrt();
    Ok(out)
}

/// `F(v_x, v_y) = h Σ_z f`, an `n × n` array in storage order.
pub fn projection_xy(f: &DistributionField) -> Vec<f64> {
    let n = f.grid().n();
    let h = f.grid().spacing();
    f.values().chunks_exact(n).map(|line| h * line.iter().sum::<f64>()).collect()
}

/// `f(0, 0, v_z)` along the z axis.
pub fn cross_section_z(f: &DistributionField) -> Vec<f64> {
    let n = f.grid().n();
    let start = (n / 2 * n + n / 2) * n;
    f.values()[start..start + n].to_vec()
}
