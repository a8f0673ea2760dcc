//! A path `γ(s)`, `s ∈ [0, 1]`, from `A` to `B` in the complex `y` plane on
//! which `∫_A^γ √(r/p) dy = s · L` with `L = ∫_A^B √(r/p) dy`. For real
//! positive `r/p` this is a reparametrisation of `[A, B]`; for complex
//! coefficients it keeps the solutions free of the interior growth that real
//! `y` would see.

use num_complex::Complex64;

use super::dop853::{self, Tolerances};
use crate::error::{Error, Result};
use crate::problem::SlProblem;

/// Square root continued from the previous call.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Branch {
    prev: Complex64,
}

impl Branch {
    pub(crate) fn new(start: Complex64) -> Self {
        Branch { prev: start }
    }

    pub(crate) fn sqrt(&mut self, z: Complex64) -> Complex64 {
        let s = z.sqrt();
        let s = if (s * self.prev.conj()).re < 0.0 { -s } else { s };
        self.prev = s;
        s
    }
}

pub(crate) fn coefficients(problem: &SlProblem, y: Complex64) -> Option<(Complex64, Complex64, Complex64)> {
    let p = problem.p.eval(y).ok()?;
    let q = problem.q.eval(y).ok()?;
    let r = problem.r.eval(y).ok()?;
    (p.norm() > 0.0 && r.norm() > 0.0).then_some((p, q, r))
}

/// True when `r/p` is real and positive on a sample of `[A, B]`.
pub fn real_positive_ratio(problem: &SlProblem) -> Result<bool> {
    let n = 256;
    for i in 0..=n {
        let y = problem.a + (problem.b - problem.a) * i as f64 / n as f64;
        let (p, q, r) = problem.coefficients_at(y)?;
        let ratio = r / p;
        if ratio.im != 0.0 || ratio.re <= 0.0 || p.im != 0.0 || q.im != 0.0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `L = ∫_A^B √(r/p) dy` along real `y` by composite Simpson, with the root
/// continued from its principal value at `A`.
pub fn liouville_length(problem: &SlProblem) -> Result<Complex64> {
    let n = 4000;
    let h = (problem.b - problem.a) / n as f64;
    let (p0, _, r0) = problem.coefficients_at(problem.a)?;
    let mut branch = Branch::new((r0 / p0).sqrt());
    let mut sum = Complex64::new(0.0, 0.0);
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
        sum += w * branch.sqrt(r / p);
    }
    Ok(sum * h / 3.0)
}

/// Path data shared by shooting and collocation.
#[derive(Debug, Clone, Copy)]
pub struct LiouvillePath {
    pub length: Complex64,
    start_root: Complex64,
}

impl LiouvillePath {
    pub fn new(problem: &SlProblem) -> Result<Self> {
        let (p0, _, r0) = problem.coefficients_at(problem.a)?;
        Ok(LiouvillePath {
            length: liouville_length(problem)?,
            start_root: (p0 / r0).sqrt(),
        })
    }

    pub(crate) fn branch(&self) -> Branch {
        Branch::new(self.start_root)
    }

    /// `dγ/ds` at `γ`.
    pub(crate) fn speed(&self, problem: &SlProblem, branch: &mut Branch, y: Complex64) -> Option<Complex64> {
        let (p, _, r) = coefficients(problem, y)?;
        Some(self.length * branch.sqrt(p / r))
    }

    /// `(γ, γ')` at ascending parameters `s`.
    pub fn nodes(&self, problem: &SlProblem, s: &[f64], tol: &Tolerances) -> Result<Vec<(Complex64, Complex64)>> {
        let mut branch = self.branch();
        let mut y = [Complex64::new(problem.a, 0.0)];
        let mut t = 0.0;
        let mut out = Vec::with_capacity(s.len());
        for &sj in s {
            y = dop853::integrate(
                |_, u: &[Complex64; 1]| Some([self.speed(problem, &mut branch, u[0])?]),
                t,
                y,
                sj,
                tol,
            )
            .map_err(|e| Error::Integration(format!("{e:?}")))?;
            t = sj;
            let mut probe = branch;
            let speed = self
                .speed(problem, &mut probe, y[0])
                .ok_or_else(|| Error::Integration(format!("coefficients undefined at y = {}", y[0])))?;
            out.push((y[0], speed));
        }
        Ok(out)
    }
}
