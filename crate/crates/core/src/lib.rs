//! Spectral solver for Sturm-Liouville problems
//! `(p v')' - q v + λ r v = 0` built on transmutation operators and the
//! Liouville transformation.
//!
//! The pipeline samples the coefficients on a uniform grid, maps the
//! problem to Schrödinger form, fits Fourier-Legendre type coefficients of
//! the transmutation kernel against a basis of formal powers, and then
//! evaluates solutions for any spectral parameter in closed form.
//! Eigenvalues are located on the resulting characteristic function.

pub mod error;
pub mod expr;
pub mod formal_powers;
pub mod kernel_fit;
pub mod liouville;
pub mod mesh;
pub mod moments;
pub mod oracle;
pub mod problem;
pub mod solution;
pub mod spectrum;

pub use error::{Error, ExprError, Result};
pub use expr::Expr;
pub use mesh::{Grid, SampledFunction};
pub use num_complex::Complex64;
pub use problem::{BoundaryConditions, CoefficientSamples, SlProblem};
