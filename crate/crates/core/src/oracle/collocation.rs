//! Chebyshev collocation for `-(pv')' + qv = λ r v` along a parametrised
//! path `y = γ(s)`, `s ∈ [0, 1]`, with the two boundary forms eliminated.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::path::coefficients;
use crate::error::{Error, Result};
use crate::problem::{BoundaryConditions, SlProblem};

/// Differentiation matrix on `x_j = cos(πj/n)`, `j = 0..=n`.
pub fn cheb_matrix(n: usize) -> (Vec<f64>, DMatrix<f64>) {
    let x: Vec<f64> = (0..=n).map(|j| (PI * j as f64 / n as f64).cos()).collect();
    let c = |j: usize| {
        let w = if j == 0 || j == n { 2.0 } else { 1.0 };
        if j.is_multiple_of(2) {
            w
        } else {
            -w
        }
    };
    let mut d = DMatrix::zeros(n + 1, n + 1);
    for i in 0..=n {
        let mut row = 0.0;
        for j in 0..=n {
            if i != j {
                let v = c(i) / c(j) / (x[i] - x[j]);
                d[(i, j)] = v;
                row += v;
            }
        }
        d[(i, i)] = -row;
    }
    (x, d)
}

/// Parameters `s_j = (1 - x_j)/2`, ascending from 0 to 1.
pub fn parameters(n: usize) -> Vec<f64> {
    cheb_matrix(n).0.iter().map(|x| 0.5 * (1.0 - x)).collect()
}

/// Eigenvalues `λ` of the collocated problem. `nodes` holds `(γ(s_j), γ'(s_j))`
/// at the points returned by [`parameters`].
pub fn eigenvalues(
    problem: &SlProblem,
    bc: &BoundaryConditions,
    nodes: &[(Complex64, Complex64)],
) -> Result<Vec<Complex64>> {
    let n = nodes.len().saturating_sub(1);
    if n < 4 {
        return Err(Error::InvalidInput(format!("collocation size {n} too small")));
    }
    let (_, dx) = cheb_matrix(n);
    // d/ds = -2 d/dx
    let d = dx.map(|v| Complex64::new(-2.0 * v, 0.0));
    let mut coef = Vec::with_capacity(n + 1);
    for &(y, _) in nodes {
        coef.push(
            coefficients(problem, y).ok_or_else(|| Error::Integration(format!("coefficients undefined at y = {y}")))?,
        );
    }
    // v_y = D v / γ'
    let dy = DMatrix::from_fn(n + 1, n + 1, |i, j| d[(i, j)] / nodes[i].1);
    let flux = DMatrix::from_fn(n + 1, n + 1, |i, j| coef[i].0 * dy[(i, j)]);
    let second = &dy * &flux;
    let l = DMatrix::from_fn(n + 1, n + 1, |i, j| {
        let mut v = -second[(i, j)];
        if i == j {
            v += coef[i].1;
        }
        v / coef[i].2
    });
    let (ja, jb) = (0, n);
    let form = |k: usize, j: usize| {
        let row = &bc.rows[k];
        let mut v = row[1] * dy[(ja, j)] + row[3] * dy[(jb, j)];
        if j == ja {
            v += row[0];
        }
        if j == jb {
            v += row[2];
        }
        v
    };
    let m = [[form(0, ja), form(0, jb)], [form(1, ja), form(1, jb)]];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let size = m.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    if det.norm() <= 1e-12 * size * size {
        return Err(Error::InvalidInput(
            "boundary forms cannot be eliminated at the collocation endpoints".into(),
        ));
    }
    let inv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
    let interior: Vec<usize> = (1..n).collect();
    let ni = interior.len();
    // boundary values = T · interior values
    let t = DMatrix::from_fn(2, ni, |row, c| {
        let j = interior[c];
        -(inv[row][0] * form(0, j) + inv[row][1] * form(1, j))
    });
    let reduced = DMatrix::from_fn(ni, ni, |r, c| {
        let i = interior[r];
        l[(i, interior[c])] + l[(i, ja)] * t[(0, c)] + l[(i, jb)] * t[(1, c)]
    });
    let vals = reduced
        .schur()
        .eigenvalues()
        .ok_or_else(|| Error::Integration("Schur decomposition did not converge".into()))?;
    Ok(vals.iter().copied().collect())
}

/// Straight nodes `γ(s) = A + s(B - A)`.
pub fn straight_nodes(problem: &SlProblem, n: usize) -> Vec<(Complex64, Complex64)> {
    let len = Complex64::new(problem.b - problem.a, 0.0);
    parameters(n)
        .into_iter()
        .map(|s| (Complex64::new(problem.a, 0.0) + s * len, len))
        .collect()
}
