#![allow(dead_code)]

pub mod quadrature;

use std::f64::consts::PI;

use sturmian::liouville::MapMode;
use sturmian::solution::{SolverConfig, SolverState};
use sturmian::spectrum::Rect;
use sturmian::{BoundaryConditions, Complex64, SlProblem};

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `p = r = y`, `q = 1/(4y) + 2y/(y - 1/2)²` on `[1, 2]`, Dirichlet.
pub fn ex1() -> (SlProblem, BoundaryConditions) {
    (
        SlProblem::new(1.0, 2.0, "y", "1/(4*y)+2*y/(y-1/2)^2", "y").unwrap(),
        BoundaryConditions::dirichlet(),
    )
}

/// Example 1 with `y₀ = 3/2` and `g'(y₀)/g(y₀) = 5/3`, which gives `h = 2`.
pub fn ex1_config() -> SolverConfig {
    SolverConfig {
        mode: MapMode::Symmetric,
        g_slope: Some(c(5.0 / 3.0)),
        ..SolverConfig::default()
    }
}

/// Bessel problem `(yu')' + yu = -λu/y`, `u'(1) = u(4) = 0`.
pub fn ex2() -> (SlProblem, BoundaryConditions) {
    (
        SlProblem::new(1.0, 4.0, "y", "-y", "1/y").unwrap(),
        BoundaryConditions::from_real([[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]]).unwrap(),
    )
}

/// `p = e^{-2y}`, `q = -e^{-2y}`, `r = (y² + 1)e^{-2y}` on `[0, 2]`,
/// `u(0) - u'(0) = 0`, `u(2) + u'(2) = 0`.
pub fn ex3() -> (SlProblem, BoundaryConditions) {
    (
        SlProblem::new(0.0, 2.0, "exp(-2*y)", "-exp(-2*y)", "(y^2+1)*exp(-2*y)").unwrap(),
        BoundaryConditions::from_real([[1.0, -1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 1.0]]).unwrap(),
    )
}

/// `u'' = -λ e^{iy} u`, `u'(0) = 0`, `u(π) + u'(π) = 0`.
pub fn ex4() -> (SlProblem, BoundaryConditions) {
    (
        SlProblem::new(0.0, PI, "1", "0", "exp(i*y)").unwrap(),
        BoundaryConditions::from_real([[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 1.0]]).unwrap(),
    )
}

/// `ω` rectangle covering `|Re ω| ≤ 50` for Example 4 up to the `±ω` symmetry.
pub fn ex4_rect() -> Rect {
    Rect::new((-0.25, 50.0), (-55.0, 5.0)).unwrap()
}

/// `p = r = eʸ`, `q = 2eʸ` on `[0, 2]`.
pub fn exponential() -> SlProblem {
    SlProblem::new(0.0, 2.0, "exp(y)", "2*exp(y)", "exp(y)").unwrap()
}

pub fn endpoint() -> SolverConfig {
    SolverConfig {
        mode: MapMode::Endpoint,
        ..SolverConfig::default()
    }
}

pub fn build(problem: &SlProblem, config: SolverConfig) -> SolverState {
    SolverState::build(problem, config).expect("solver state")
}

pub fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}
