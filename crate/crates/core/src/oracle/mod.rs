//! Reference eigenvalues from direct integration of the equation in
//! first-order form `v' = w/p`, `w' = (q - λr) v`, independent of the
//! transmutation pipeline.

mod collocation;
pub mod dop853;
mod path;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::problem::{BoundaryConditions, SlProblem};
use crate::spectrum::{canonical_omega, Rect, DUPLICATE_TOL};

pub use collocation::cheb_matrix;
pub use dop853::{StepFailure, Tolerances};
pub use path::{liouville_length, LiouvillePath};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            rtol: 1e-12,
            atol: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

impl OracleConfig {
    fn tolerances(&self) -> Tolerances {
        Tolerances {
            rtol: self.rtol,
            atol: self.atol,
            max_steps: self.max_steps,
        }
    }
}

fn failure(e: StepFailure) -> Error {
    Error::Integration(match e {
        StepFailure::Underflow { t } => format!("step size underflow at y = {t}"),
        StepFailure::TooManySteps { t } => format!("step limit reached at y = {t}"),
        StepFailure::NonFinite { t } => format!("non-finite right-hand side near y = {t}"),
    })
}

fn rhs(problem: &SlProblem, lambda: Complex64, y: f64, v: Complex64, w: Complex64) -> Option<[Complex64; 2]> {
    let (p, q, r) = problem.coefficients_at(y).ok()?;
    Some([w / p, (q - lambda * r) * v])
}

/// `(v, v')` at each of `points` (ascending, inside `[A, B]`) for the
/// solution with `v(A) = v0`, `v'(A) = dv0`.
pub fn solve_ivp(
    problem: &SlProblem,
    lambda: Complex64,
    v0: Complex64,
    dv0: Complex64,
    points: &[f64],
    config: &OracleConfig,
) -> Result<Vec<(Complex64, Complex64)>> {
    let (p0, _, _) = problem.coefficients_at(problem.a)?;
    let mut state = [v0, p0 * dv0];
    let mut t = problem.a;
    let tol = config.tolerances();
    let mut out = Vec::with_capacity(points.len());
    for &y in points {
        if y < t || y > problem.b {
            return Err(Error::OutOfRange {
                y,
                a: problem.a,
                b: problem.b,
            });
        }
        state = dop853::integrate(
            |s, u: &[Complex64; 2]| rhs(problem, lambda, s, u[0], u[1]),
            t,
            state,
            y,
            &tol,
        )
        .map_err(failure)?;
        t = y;
        let (p, _, _) = problem.coefficients_at(y)?;
        out.push((state[0], state[1] / p));
    }
    Ok(out)
}

/// Shooting setup for one problem: integrates over real `y` when `r/p` is
/// real and positive, otherwise along a [`LiouvillePath`].
#[derive(Debug, Clone)]
pub struct Shooting<'a> {
    problem: &'a SlProblem,
    config: OracleConfig,
    path: Option<LiouvillePath>,
}

impl<'a> Shooting<'a> {
    pub fn new(problem: &'a SlProblem, config: &OracleConfig) -> Result<Self> {
        let path = if path::real_positive_ratio(problem)? {
            None
        } else {
            Some(LiouvillePath::new(problem)?)
        };
        Ok(Shooting {
            problem,
            config: *config,
            path,
        })
    }

    pub fn uses_complex_path(&self) -> bool {
        self.path.is_some()
    }

    /// Boundary data `[v(A), v'(A), v(B), v'(B)]` of the solutions with
    /// `(v, v')(A) = (1, 0)` and `(0, 1)`.
    pub fn boundary_data(&self, lambda: Complex64) -> Result<[[Complex64; 4]; 2]> {
        let problem = self.problem;
        let (p0, _, _) = problem.coefficients_at(problem.a)?;
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let tol = self.config.tolerances();
        let end = match &self.path {
            None => dop853::integrate(
                |s, u: &[Complex64; 4]| {
                    let a = rhs(problem, lambda, s, u[0], u[1])?;
                    let b = rhs(problem, lambda, s, u[2], u[3])?;
                    Some([a[0], a[1], b[0], b[1]])
                },
                problem.a,
                [one, zero, zero, p0],
                problem.b,
                &tol,
            )
            .map_err(failure)?,
            Some(path) => self.along_path(path, lambda, [one, zero, zero, p0], &tol)?,
        };
        let (pb, _, _) = problem.coefficients_at(problem.b)?;
        Ok([[one, zero, end[0], end[1] / pb], [zero, one, end[2], end[3] / pb]])
    }

    fn along_path(
        &self,
        path: &LiouvillePath,
        lambda: Complex64,
        init: [Complex64; 4],
        tol: &Tolerances,
    ) -> Result<[Complex64; 4]> {
        let problem = self.problem;
        let mut branch = path.branch();
        let start = [Complex64::new(problem.a, 0.0), init[0], init[1], init[2], init[3]];
        let out = dop853::integrate(
            |_, u: &[Complex64; 5]| {
                let speed = path.speed(problem, &mut branch, u[0])?;
                let (p, q, r) = path::coefficients(problem, u[0])?;
                let k = (q - lambda * r) * speed;
                Some([speed, u[2] / p * speed, k * u[1], u[4] / p * speed, k * u[3]])
            },
            0.0,
            start,
            1.0,
            tol,
        )
        .map_err(failure)?;
        let b = Complex64::new(problem.b, 0.0);
        let gap = b - out[0];
        if gap.norm() > 1e-6 * (1.0 + problem.b.abs()) {
            return Err(Error::Integration(format!(
                "integration path ends at {} instead of B",
                out[0]
            )));
        }
        // close the remaining gap along a straight segment
        let y0 = out[0];
        dop853::integrate(
            |t, u: &[Complex64; 4]| {
                let (p, q, r) = path::coefficients(problem, y0 + t * gap)?;
                let k = (q - lambda * r) * gap;
                Some([u[1] / p * gap, k * u[0], u[3] / p * gap, k * u[2]])
            },
            0.0,
            [out[1], out[2], out[3], out[4]],
            1.0,
            tol,
        )
        .map_err(failure)
    }

    /// Characteristic determinant as a function of `λ`.
    pub fn char_lambda(&self, bc: &BoundaryConditions, lambda: Complex64) -> Result<Complex64> {
        let data = self.boundary_data(lambda)?;
        let u = |i: usize, j: usize| bc.apply(i, data[j]);
        Ok(u(0, 0) * u(1, 1) - u(0, 1) * u(1, 0))
    }

    /// Characteristic determinant as a function of `ω = √λ`.
    pub fn char_omega(&self, bc: &BoundaryConditions, omega: Complex64) -> Result<Complex64> {
        self.char_lambda(bc, omega * omega)
    }

    /// Collocation nodes `(γ, γ')` for `n + 1` Chebyshev points.
    fn collocation_nodes(&self, n: usize) -> Result<Vec<(Complex64, Complex64)>> {
        match &self.path {
            None => Ok(collocation::straight_nodes(self.problem, n)),
            Some(path) => path.nodes(self.problem, &collocation::parameters(n), &self.config.tolerances()),
        }
    }

    /// `|∫√(r/p)|` along the integration path.
    fn length(&self) -> Result<f64> {
        match &self.path {
            None => optical_length(self.problem),
            Some(path) => Ok(path.length.norm()),
        }
    }
}

/// Characteristic determinant as a function of `λ`.
pub fn char_lambda(
    problem: &SlProblem,
    bc: &BoundaryConditions,
    lambda: Complex64,
    config: &OracleConfig,
) -> Result<Complex64> {
    Shooting::new(problem, config)?.char_lambda(bc, lambda)
}

/// Characteristic determinant as a function of `ω = √λ`.
pub fn char_omega(
    problem: &SlProblem,
    bc: &BoundaryConditions,
    omega: Complex64,
    config: &OracleConfig,
) -> Result<Complex64> {
    char_lambda(problem, bc, omega * omega, config)
}

/// `(4 + 3ω²) sin ω - 4ω cos ω`, whose zeros are the `ω` of the Dirichlet
/// problem `p = r = y`, `q = 1/(4y) + 2y/(y - 1/2)²` on `[1, 2]`.
pub fn exact_char_ex1(omega: f64) -> f64 {
    (4.0 + 3.0 * omega * omega) * omega.sin() - 4.0 * omega * omega.cos()
}

/// Roots of [`exact_char_ex1`] on `[lo, hi]` by scanning and bisection.
pub fn exact_roots_ex1(lo: f64, hi: f64) -> Vec<f64> {
    let step = 0.05;
    let n = ((hi - lo) / step).ceil() as usize;
    let mut roots = Vec::new();
    for i in 0..n {
        let (mut a, mut b) = (lo + i as f64 * step, (lo + (i + 1) as f64 * step).min(hi));
        let (mut fa, fb) = (exact_char_ex1(a), exact_char_ex1(b));
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa * fb >= 0.0 {
            continue;
        }
        while b - a > 4.0 * f64::EPSILON * b.abs() {
            let m = 0.5 * (a + b);
            let fm = exact_char_ex1(m);
            if fm == 0.0 {
                a = m;
                b = m;
                break;
            }
            if fa * fm < 0.0 {
                b = m;
            } else {
                a = m;
                fa = fm;
            }
        }
        roots.push(0.5 * (a + b));
    }
    roots
}

/// Illinois false position on a sign-change bracket.
fn illinois<F: Fn(f64) -> Result<f64>>(f: F, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> Result<f64> {
    let mut side = 0i8;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        let c = if c.is_finite() && c > a.min(b) && c < a.max(b) {
            c
        } else {
            0.5 * (a + b)
        };
        if (b - a).abs() <= 1e-15 * (1.0 + c.abs()) {
            return Ok(c);
        }
        let fc = f(c)?;
        if fc == 0.0 {
            return Ok(c);
        }
        if fc * fb < 0.0 {
            a = b;
            fa = fb;
            side = 0;
        } else {
            fa *= if side == 1 { 0.5 } else { 1.0 };
            side = 1;
        }
        b = c;
        fb = fc;
    }
    Ok(0.5 * (a + b))
}

fn real_roots<F>(f: F, lo: f64, hi: f64, step: f64) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let n = ((hi - lo) / step).ceil().max(1.0) as usize;
    let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let fs = xs.par_iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
    let mut roots = Vec::new();
    for i in 0..=n {
        if fs[i] == 0.0 {
            roots.push(xs[i]);
        } else if i < n && fs[i] * fs[i + 1] < 0.0 {
            roots.push(illinois(&f, xs[i], xs[i + 1], fs[i], fs[i + 1])?);
        }
    }
    Ok(roots)
}

/// `∫ |√(r/p)|` over `[A, B]` by composite Simpson.
pub fn optical_length(problem: &SlProblem) -> Result<f64> {
    let n = 2000;
    let h = (problem.b - problem.a) / n as f64;
    let mut sum = 0.0;
    for i in 0..=n {
        let y = problem.a + i as f64 * h;
        let (p, _, r) = problem.coefficients_at(y)?;
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += w * (r / p).sqrt().norm();
    }
    Ok(sum * h / 3.0)
}

/// Eigenvalues with `|λ| ≤ cut²` for a real problem, from sign changes of
/// the `λ`-characteristic function. Returns `(ω, |char(ω)|)`.
pub fn near_origin_real(
    problem: &SlProblem,
    bc: &BoundaryConditions,
    cut: f64,
    config: &OracleConfig,
) -> Result<Vec<(Complex64, f64)>> {
    let shooting = Shooting::new(problem, config)?;
    let lmax = cut * cut;
    let f = |l: f64| Ok(shooting.char_lambda(bc, Complex64::new(l, 0.0))?.re);
    let roots = real_roots(f, -lmax, lmax, lmax / 32.0)?;
    roots
        .into_iter()
        .map(|l| {
            let w = if l >= 0.0 {
                Complex64::new(l.sqrt(), 0.0)
            } else {
                Complex64::new(0.0, (-l).sqrt())
            };
            Ok((w, shooting.char_lambda(bc, Complex64::new(l, 0.0))?.norm()))
        })
        .collect()
}

/// Reference eigenvalues of a real problem: `ω ∈ [cut, ω_max]`,
/// `ω = iτ` with `τ ∈ [cut, τ_max]`, and `|λ| ≤ cut²`.
pub fn eigenvalues_real(
    problem: &SlProblem,
    bc: &BoundaryConditions,
    omega_max: f64,
    tau_max: f64,
    cut: f64,
    config: &OracleConfig,
) -> Result<Vec<Complex64>> {
    let shooting = Shooting::new(problem, config)?;
    let spacing = PI / shooting.length()?.max(1e-12);
    let step = (spacing / 10.0).min(0.1);
    let mut out = Vec::new();
    if omega_max > cut {
        let f = |w: f64| Ok(shooting.char_omega(bc, Complex64::new(w, 0.0))?.re);
        out.extend(
            real_roots(f, cut, omega_max, step)?
                .into_iter()
                .map(|w| Complex64::new(w, 0.0)),
        );
    }
    if tau_max > cut {
        let f = |t: f64| Ok(shooting.char_lambda(bc, Complex64::new(-t * t, 0.0))?.re);
        out.extend(
            real_roots(f, cut, tau_max, step)?
                .into_iter()
                .map(|t| Complex64::new(0.0, t)),
        );
    }
    out.extend(near_origin_real(problem, bc, cut, config)?.into_iter().map(|(w, _)| w));
    Ok(dedupe(out))
}

fn dedupe(roots: Vec<Complex64>) -> Vec<Complex64> {
    let mut kept: Vec<Complex64> = Vec::new();
    for w in roots.into_iter().map(canonical_omega) {
        if !kept.iter().any(|v| (v - w).norm() <= DUPLICATE_TOL * (1.0 + w.norm())) {
            kept.push(w);
        }
    }
    kept.sort_by(|a, b| {
        let (la, lb) = (a * a, b * b);
        la.re.total_cmp(&lb.re).then(la.im.total_cmp(&lb.im))
    });
    kept
}

/// Secant iteration on `char(ω)`.
pub fn polish(shooting: &Shooting<'_>, bc: &BoundaryConditions, omega0: Complex64) -> Result<Complex64> {
    let f = |w: Complex64| shooting.char_omega(bc, w);
    let mut w0 = omega0;
    let mut w1 = omega0 + 1e-6 * (1.0 + omega0.norm());
    let (mut f0, mut f1) = (f(w0)?, f(w1)?);
    for _ in 0..60 {
        if f1.norm() == 0.0 {
            return Ok(w1);
        }
        let step = f1 * (w1 - w0) / (f1 - f0);
        if !(step.re.is_finite() && step.im.is_finite()) {
            break;
        }
        w0 = w1;
        f0 = f1;
        w1 -= step;
        if step.norm() <= 1e-14 * (1.0 + w1.norm()) {
            return Ok(w1);
        }
        f1 = f(w1)?;
    }
    Err(Error::NoConvergence { start: omega0 })
}

/// Reference eigenvalues with `ω` in `rect`: collocation estimates polished
/// by secant iteration on the shooting determinant. Returns `(ω, |char|)`.
pub fn eigenvalues_in_rect(
    problem: &SlProblem,
    bc: &BoundaryConditions,
    rect: Rect,
    config: &OracleConfig,
) -> Result<Vec<(Complex64, f64)>> {
    let corner = [rect.re.0, rect.re.1]
        .iter()
        .flat_map(|&x| [rect.im.0, rect.im.1].map(|y| Complex64::new(x, y).norm()))
        .fold(0.0, f64::max);
    let shooting = Shooting::new(problem, config)?;
    let n = ((3.0 * corner * shooting.length()?) as usize + 48).min(600);
    let lambdas = collocation::eigenvalues(problem, bc, &shooting.collocation_nodes(n)?)?;
    let margin = 0.5 + 0.05 * corner;
    let mut candidates = Vec::new();
    for l in lambdas {
        let w = l.sqrt();
        for c in [w, -w] {
            if rect.contains(c, margin) {
                candidates.push(c);
            }
        }
    }
    let polished: Vec<Option<Complex64>> = candidates.par_iter().map(|&c| polish(&shooting, bc, c).ok()).collect();
    let mut out: Vec<(Complex64, f64)> = Vec::new();
    for w in polished.into_iter().flatten() {
        if !rect.contains(w, 1e-9 * (1.0 + w.norm())) {
            continue;
        }
        if out
            .iter()
            .any(|(v, _)| (v - w).norm() <= DUPLICATE_TOL * (1.0 + w.norm()))
        {
            continue;
        }
        out.push((w, shooting.char_omega(bc, w)?.norm()));
    }
    Ok(out)
}
