//! Spectral collocation solver for the space-homogeneous Landau equation
//! with Coulomb interactions.
//!
//! The collision operator is written in Rosenbluth form,
//!
//! ```text
//! g = |z| * f,    C(f, f) = div( ∇²g ∇f − ∇Δg f ),
//! ```
//!
//! so a single zero-padded FFT convolution produces the potential `g`, and
//! every remaining term is a pointwise product of spectral derivatives taken
//! at the collocation nodes of the velocity cube `[-R, R]³`.
//!
//! Module map:
//! - [`grid`]: collocation lattice and its doubled extension,
//! - [`kernel`]: Fourier coefficients of the truncated `|z|` kernel,
//! - [`spectral`]: discrete Fourier analysis, synthesis and differentiation,
//! - [`field`]: nodal distribution functions,
//! - [`collision`]: the discrete collision operator and its
//!   steady-state-preserving variant,
//! - [`integrator`]: SSP-RK3 time stepping,
//! - [`diagnostics`]: moments, entropies, error norms and projections,
//! - [`io`]: binary field dumps,
//! - [`driver`]: experiment presets and the time loop behind the CLI.

pub mod collision;
pub mod diagnostics;
pub mod driver;
pub mod error;
pub mod field;
pub mod grid;
pub mod integrator;
pub mod io;
pub mod kernel;
#[cfg(any(test, feature = "oracle"))]
pub mod oracle;
pub mod spectral;

pub use collision::{maxwellian_field, CollisionWorkspace, SteadyStateOperator, TransformStats};
pub use diagnostics::{MomentSet, ErrorNorms};
pub use error::{LandauError, Result};
pub use field::DistributionField;
pub use grid::{MultiIndex, VelocityGrid};
pub use integrator::{Scheme, StepperConfig};
pub use kernel::KernelTable;
pub use spectral::SpectralCoeffs;
