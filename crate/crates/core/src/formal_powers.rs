//! Particular solution `g` of `(p g')' = q g` and the formal powers
//! `Φ_k`, `Ψ_k` generated from it.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mesh::SampledFunction;
use crate::problem::CoefficientSamples;

const MAX_TERMS: usize = 200;

/// Nonvanishing solution of `(p g')' = q g` with `g(y₀) = ρ(y₀)⁻¹`.
#[derive(Debug, Clone)]
pub struct ParticularSolution {
    pub g: SampledFunction,
    /// `g'`.
    pub dg: SampledFunction,
    /// `min |g| / max |g|` before normalisation, measured along the
    /// piecewise linear path through the samples.
    pub min_ratio: f64,
}

impl ParticularSolution {
    /// `g'/g` on the grid.
    pub fn log_derivative(&self) -> SampledFunction {
        self.dg.zip_with(&self.g, |d, g| d / g)
    }
}

fn sup(f: &SampledFunction) -> f64 {
    f.sup_norm()
}

/// Distance from the origin to the polygon through the samples of `f`,
/// relative to `max |f|`.
fn vanishing_ratio(f: &SampledFunction) -> f64 {
    let v = f.values();
    let mut min = v[0].norm();
    for w in v.windows(2) {
        let d = w[1] - w[0];
        let len2 = d.norm_sqr();
        let t = if len2 > 0.0 {
            (-(w[0].conj() * d).re / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        min = min.min((w[0] + d * t).norm());
    }
    min / sup(f)
}

const VANISHING: f64 = 1e-12;

/// Two solutions by the power series in the spectral parameter at `λ = 0`:
/// `u₁(y₀) = 1, (p u₁')(y₀) = 0` and `u₂(y₀) = 0, (p u₂')(y₀) = 1`.
/// Returns `(u₁, p u₁', u₂, p u₂')`.
pub fn spps_pair(c: &CoefficientSamples, y0: f64) -> Result<[SampledFunction; 4]> {
    let grid = *c.grid();
    let inv_p = c.p.map(|p| 1.0 / p);
    let one = SampledFunction::constant(grid, Complex64::new(1.0, 0.0));
    let mut u1 = one.clone();
    let mut w1 = SampledFunction::constant(grid, Complex64::new(0.0, 0.0));
    let mut u2 = inv_p.cumulative_integral_from(y0)?;
    let mut w2 = one.clone();
    let mut c_prev = one;
    let mut d_prev = u2.clone();
    for k in 1..=MAX_TERMS {
        let wc = c.q.zip_with(&c_prev, |q, v| q * v).cumulative_integral_from(y0)?;
        let ct = wc.zip_with(&inv_p, |w, ip| w * ip).cumulative_integral_from(y0)?;
        let wd = c.q.zip_with(&d_prev, |q, v| q * v).cumulative_integral_from(y0)?;
        let dt = wd.zip_with(&inv_p, |w, ip| w * ip).cumulative_integral_from(y0)?;
        if !(ct.is_finite() && dt.is_finite() && wc.is_finite() && wd.is_finite()) {
            return Err(Error::SeriesDivergence { terms: k });
        }
        u1 = u1.zip_with(&ct, |a, b| a + b);
        w1 = w1.zip_with(&wc, |a, b| a + b);
        u2 = u2.zip_with(&dt, |a, b| a + b);
        w2 = w2.zip_with(&wd, |a, b| a + b);
        let small = |term: &SampledFunction, total: &SampledFunction, tol: f64| sup(term) <= tol * sup(total);
        let converged =
            small(&ct, &u1, 1e-17) && small(&wc, &w1, 1e-17) && small(&dt, &u2, 1e-17) && small(&wd, &w2, 1e-17);
        if converged {
            return Ok([u1, w1, u2, w2]);
        }
        if k == MAX_TERMS && !(small(&ct, &u1, 1e-8) && small(&dt, &u2, 1e-8)) {
            return Err(Error::SeriesDivergence { terms: k });
        }
        c_prev = ct;
        d_prev = dt;
    }
    Ok([u1, w1, u2, w2])
}

/// Particular solution normalised by `g(y₀) = 1/ρ₀`.
///
/// With `slope = Some(s)` the solution satisfies `g'(y₀)/g(y₀) = s`.
/// Otherwise the first series solution is used, or `u₁ + i p(y₀) u₂` when
/// that one vanishes somewhere on `[A, B]`.
pub fn spps_homogeneous_solution(
    c: &CoefficientSamples,
    y0: f64,
    slope: Option<Complex64>,
    rho0: Complex64,
) -> Result<ParticularSolution> {
    let [u1, w1, u2, w2] = spps_pair(c, y0)?;
    let p0 = c.p.interpolate(y0)?;
    let combine = |k: Complex64| (u1.zip_with(&u2, |a, b| a + k * b), w1.zip_with(&w2, |a, b| a + k * b));
    let (u, w) = match slope {
        Some(s) => combine(s * p0),
        None if vanishing_ratio(&u1) > VANISHING => (u1.clone(), w1.clone()),
        None => combine(Complex64::i() * p0),
    };
    let min_ratio = vanishing_ratio(&u);
    if !(min_ratio > VANISHING) {
        return Err(Error::VanishingSolution { ratio: min_ratio });
    }
    let factor = 1.0 / (rho0 * u.interpolate(y0)?);
    let g = u.scale(factor);
    let dg = w.zip_with(&c.p, |w, p| w / p).scale(factor);
    Ok(ParticularSolution { g, dg, min_ratio })
}

/// `h = (1/l'(y₀)) (g'/g + ρ'/ρ)(y₀)`.
pub fn compute_h(sol: &ParticularSolution, map: &crate::liouville::LiouvilleMap) -> Result<Complex64> {
    let y0 = map.y0;
    let gl = sol.dg.interpolate(y0)? / sol.g.interpolate(y0)?;
    Ok((gl + map.rho_log_deriv.interpolate(y0)?) / map.dl.interpolate(y0)?)
}

/// `Φ_k` and `Ψ_k` for `k = 0..=n`.
#[derive(Debug, Clone)]
pub struct FormalPowers {
    pub phi: Vec<SampledFunction>,
    pub psi: Vec<SampledFunction>,
}

impl FormalPowers {
    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }
}

/// Recursive integrals with weights `g² r` and `1/(g² p)`:
///
/// ```text
/// Ỹ⁽ᵏ⁾ = k ∫ Ỹ⁽ᵏ⁻¹⁾ · (g² r  if k odd, 1/(g² p) if k even)
/// Y⁽ᵏ⁾  = k ∫ Y⁽ᵏ⁻¹⁾  · (1/(g² p) if k odd, g² r  if k even)
/// Φ_k = g · (Y⁽ᵏ⁾ if k odd, Ỹ⁽ᵏ⁾ if k even)
/// Ψ_k = g⁻¹ · (Ỹ⁽ᵏ⁾ if k odd, Y⁽ᵏ⁾ if k even)
/// ```
pub fn build_formal_powers(g: &SampledFunction, c: &CoefficientSamples, y0: f64, n: usize) -> Result<FormalPowers> {
    let grid = *c.grid();
    let g2 = g.map(|v| v * v);
    let wa = g2.zip_with(&c.r, |g2, r| g2 * r);
    let wb = g2.zip_with(&c.p, |g2, p| 1.0 / (g2 * p));
    let inv_g = g.map(|v| 1.0 / v);
    let one = SampledFunction::constant(grid, Complex64::new(1.0, 0.0));
    let (mut y, mut yt) = (one.clone(), one);
    let mut phi = vec![g.clone()];
    let mut psi = vec![inv_g.clone()];
    for k in 1..=n {
        let kf = Complex64::new(k as f64, 0.0);
        let (wy, wyt) = if k % 2 == 1 { (&wb, &wa) } else { (&wa, &wb) };
        y = y.zip_with(wy, |a, w| a * w).cumulative_integral_from(y0)?.scale(kf);
        yt = yt.zip_with(wyt, |a, w| a * w).cumulative_integral_from(y0)?.scale(kf);
        if !(y.is_finite() && yt.is_finite()) {
            return Err(Error::FormalPowerOverflow { k });
        }
        let (for_phi, for_psi) = if k % 2 == 1 { (&y, &yt) } else { (&yt, &y) };
        phi.push(for_phi.zip_with(g, |a, g| a * g));
        psi.push(for_psi.zip_with(&inv_g, |a, ig| a * ig));
    }
    Ok(FormalPowers { phi, psi })
}
