//! Collocation lattice in `[-R, R]³` and its extension to `[-T, T]³`, `T = 2R`.
//!
//! Nodes carry signed multi-indices. The inner lattice uses `j ∈ ⟦-n/2, n/2-1⟧³`
//! and the extended one `j ∈ ⟦-n, n-1⟧³`; both have the same spacing
//! `h = 2R/n`, so node `j` sits at `j·h` on either lattice.
//!
//! Arrays over a lattice of `size` points per direction are stored row-major
//! in axis order `(x, y, z)`, with storage index `s = j + size/2` per axis.

use crate::error::{LandauError, Result};

/// Signed node (or mode) index `(j_x, j_y, j_z)`.
pub type MultiIndex = [i64; 3];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VelocityGrid {
    n: usize,
    r: f64,
    h: f64,
}

impl VelocityGrid {
    pub fn new(n: usize, r: f64) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(LandauError::Config(format!(
                "points per direction must be even and at least 4, got {n}"
            )));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(LandauError::Config(format!(
                "half-width R must be positive and finite, got {r}"
            )));
        }
        Ok(Self { n, r, h: 2.0 * r / n as f64 })
    }

    /// Points per direction on the inner lattice.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Points per direction on the extended lattice (`2n`).
    pub fn extended_n(&self) -> usize {
        2 * self.n
    }

    /// Half-width `R` of the inner cube.
    pub fn half_width(&self) -> f64 {
        self.r
    }

    /// Half-width `T = 2R` of the extended cube.
    pub fn extended_half_width(&self) -> f64 {
        2.0 * self.r
    }

    /// Node spacing, shared by both lattices.
    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn cell_volume(&self) -> f64 {
        self.h * self.h * self.h
    }

    /// Number of inner nodes, `n³`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, j: MultiIndex) -> bool {
        in_range(j, self.n)
    }

    pub fn contains_extended(&self, j: MultiIndex) -> bool {
        in_range(j, 2 * self.n)
    }

    /// Coordinate `v_j = j·h` of an inner node.
    pub fn coordinate(&self, j: MultiIndex) -> Result<[f64; 3]> {
        if !self.contains(j) {
            return Err(LandauError::IndexOutOfRange { index: j, size: self.n });
        }
        Ok(self.coord_unchecked(j))
    }

    /// Coordinate of a node of the extended lattice.
    pub fn extended_coordinate(&self, j: MultiIndex) -> Result<[f64; 3]> {
        if !self.contains_extended(j) {
            return Err(LandauError::IndexOutOfRange { index: j, size: 2 * self.n });
        }
        Ok(self.coord_unchecked(j))
    }

    fn coord_unchecked(&self, j: MultiIndex) -> [f64; 3] {
        [j[0] as f64 * self.h, j[1] as f64 * self.h, j[2] as f64 * self.h]
    }

    /// Index on the extended lattice of the inner node `j`. Both lattices
    /// share spacing and origin, so the multi-index is unchanged.
    pub fn embed_index(&self, j: MultiIndex) -> Result<MultiIndex> {
        if !self.contains(j) {
            return Err(LandauError::IndexOutOfRange { index: j, size: self.n });
        }
        Ok(j)
    }

    /// Coordinates of the inner nodes along one axis, in storage order.
    pub fn axis(&self) -> Vec<f64> {
        let half = (self.n / 2) as i64;
        (-half..half).map(|j| j as f64 * self.h).collect()
    }

    /// Storage offset of inner node `j`.
    pub fn linear_index(&self, j: MultiIndex) -> Result<usize> {
        if !self.contains(j) {
            return Err(LandauError::IndexOutOfRange { index: j, size: self.n });
        }
        Ok(linear_index(self.n, j))
    }

    /// Multi-index of the inner node stored at `offset`.
    pub fn node_index(&self, offset: usize) -> MultiIndex {
        multi_index(self.n, offset)
    }

    /// Calls `visit(offset, v)` for every inner node in storage order.
    pub fn for_each_node(&self, mut visit: impl FnMut(usize, [f64; 3])) {
        let axis = self.axis();
        let mut offset = 0;
        for &x in &axis {
            for &y in &axis {
                for &z in &axis {
                    visit(offset, [x, y, z]);
                    offset += 1;
                }
            }
        }
    }

    /// Whether two grids describe the same lattice.
    pub fn same_lattice(&self, other: &VelocityGrid) -> bool {
        self.n == other.n && self.r == other.r
    }
}

fn in_range(j: MultiIndex, size: usize) -> bool {
    let half = (size / 2) as i64;
    j.iter().all(|&c| (-half..half).contains(&c))
}

/// Row-major storage offset of index `j` on a lattice of `size` points per axis.
/// The caller guarantees `j` is in range.
pub(crate) fn linear_index(size: usize, j: MultiIndex) -> usize {
    let half = (size / 2) as i64;
    let s = |c: i64| (c + half) as usize;
    (s(j[0]) * size + s(j[1])) * size + s(j[2])
}

pub(crate) fn multi_index(size: usize, offset: usize) -> MultiIndex {
    let half = (size / 2) as i64;
    let z = offset % size;
    let y = (offset / size) % size;
    let x = offset / (size * size);
    [x as i64 - half, y as i64 - half, z as i64 - half]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_coordinates() {
        let g = VelocityGrid::new(8, 7.0).unwrap();
        assert_eq!(g.spacing(), 1.75);
        assert_eq!(g.coordinate([-4, 0, 3]).unwrap(), [-7.0, 0.0, 5.25]);
        assert_eq!(g.extended_half_width(), 14.0);
    }

    #[test]
    fn extended_lattice_of_unit_cube() {
        let g = VelocityGrid::new(4, 1.0).unwrap();
        assert_eq!(g.extended_half_width(), 2.0);
        let xs: Vec<f64> = (-4..4)
            .map(|j| g.extended_coordinate([j, 0, 0]).unwrap()[0])
            .collect();
        assert_eq!(xs, vec![-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5]);
        assert!(g.extended_coordinate([4, 0, 0]).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(VelocityGrid::new(7, 1.0), Err(LandauError::Config(_))));
        assert!(VelocityGrid::new(2, 1.0).is_err());
        assert!(VelocityGrid::new(8, 0.0).is_err());
        assert!(VelocityGrid::new(8, -1.0).is_err());
        assert!(VelocityGrid::new(8, f64::NAN).is_err());
    }

    #[test]
    fn embedding() {
        let g = VelocityGrid::new(8, 7.0).unwrap();
        assert_eq!(g.embed_index([0, 0, 0]).unwrap(), [0, 0, 0]);
        let j = g.embed_index([-4, -4, -4]).unwrap();
        assert_eq!(g.extended_coordinate(j).unwrap(), [-7.0, -7.0, -7.0]);
        assert!(matches!(
            g.embed_index([4, 0, 0]),
            Err(LandauError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn embedded_coordinates_are_bit_exact() {
        let g = VelocityGrid::new(10, 2.75).unwrap();
        for offset in 0..g.len() {
            let j = g.node_index(offset);
            let inner = g.coordinate(j).unwrap();
            let outer = g.extended_coordinate(g.embed_index(j).unwrap()).unwrap();
            assert_eq!(inner.map(f64::to_bits), outer.map(f64::to_bits));
        }
    }

    #[test]
    fn one_sided_symmetry() {
        let g = VelocityGrid::new(6, 1.3).unwrap();
        let axis = g.axis();
        assert_eq!(axis[0], -1.3);
        // -n/2 has no mirror partner; the rest are symmetric about 0.
        for (j, &x) in axis.iter().enumerate().skip(1) {
            assert_eq!(x, -axis[axis.len() - j]);
        }
    }

    #[test]
    fn storage_round_trip() {
        let g = VelocityGrid::new(6, 1.0).unwrap();
        for offset in 0..g.len() {
            let j = g.node_index(offset);
            assert_eq!(g.linear_index(j).unwrap(), offset);
        }
        assert_eq!(g.linear_index([-3, -3, -2]).unwrap(), 1);
    }
}
