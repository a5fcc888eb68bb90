use crate::error::{LandauError, Result};
use crate::grid::{MultiIndex, VelocityGrid};

/// Nodal values of a distribution function on the inner lattice.
///
/// Values must be finite. Negative values are allowed: the spectral
/// discretization does not preserve positivity.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionField {
    grid: VelocityGrid,
    values: Vec<f64>,
}

impl DistributionField {
    pub fn new(grid: VelocityGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LandauError::Shape { size: grid.n(), found: values.len() });
        }
        if let Some(offset) = values.iter().position(|v| !v.is_finite()) {
            return Err(LandauError::Config(format!(
                "non-finite value at node {:?}",
                grid.node_index(offset)
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: VelocityGrid) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    /// Samples `f(v)` at every inner node.
    pub fn from_fn(grid: VelocityGrid, mut f: impl FnMut([f64; 3]) -> f64) -> Self {
        let mut values = vec![0.0; grid.len()];
        grid.for_each_node(|offset, v| values[offset] = f(v));
        Self { grid, values }
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, j: MultiIndex) -> Result<f64> {
        Ok(self.values[self.grid.linear_index(j)?])
    }

    /// Plain sum of nodal values, in storage order.
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Rectangle-rule mass `h³ Σ f`.
    pub fn mass(&self) -> f64 {
        self.grid.cell_volume() * self.sum()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub(crate) fn from_parts_unchecked(grid: VelocityGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub(crate) fn check_grid(&self, other: &VelocityGrid) -> Result<()> {
        if self.grid.same_lattice(other) {
            Ok(())
        } else {
            Err(LandauError::GridMismatch(format!(
                "field on (n={}, R={}) used with (n={}, R={})",
                self.grid.n(),
                self.grid.half_width(),
                other.n(),
                other.half_width()
            )))
        }
    }
}
