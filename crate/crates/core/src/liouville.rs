//! Liouville transformation: `x = l(y)`, `u = ρ v` with `ρ = (p r)^{1/4}`
//! turns the problem into `-u_xx + Q u = λ u`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mesh::SampledFunction;
use crate::problem::CoefficientSamples;

/// Placement of the origin `y₀` of the new variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MapMode {
    /// `y₀` chosen so that `l(A) = -l(B)`; needs real positive `r/p`.
    #[default]
    Symmetric,
    /// `y₀ = A`, so `l` runs from `0` to `b`.
    Endpoint,
}

/// Sampled Liouville map and transformation factor.
#[derive(Debug, Clone)]
pub struct LiouvilleMap {
    pub mode: MapMode,
    pub y0: f64,
    /// Half-width of the image interval (`Symmetric`) or its length (`Endpoint`).
    pub b: Complex64,
    /// `l(y) = ∫_{y₀}^{y} (r/p)^{1/2}`.
    pub l: SampledFunction,
    /// `l'(y) = ρ² / p`.
    pub dl: SampledFunction,
    pub rho: SampledFunction,
    /// `ρ'/ρ`.
    pub rho_log_deriv: SampledFunction,
}

/// Smallest relative jump between neighbouring samples treated as a branch
/// change of a principal root.
const JUMP_RATIO: f64 = 0.5;

fn check_continuity(f: &SampledFunction, what: &'static str) -> Result<()> {
    let v = f.values();
    for i in 1..v.len() {
        let scale = v[i].norm() + v[i - 1].norm();
        if (v[i] - v[i - 1]).norm() > JUMP_RATIO * scale {
            return Err(Error::BranchJump {
                what,
                y: f.grid().node(i),
            });
        }
    }
    Ok(())
}

/// `ρ = (p r)^{1/4}` on the principal branch together with `ρ'/ρ`.
pub fn compute_rho(c: &CoefficientSamples) -> Result<(SampledFunction, SampledFunction)> {
    let pr = c.p.zip_with(&c.r, |p, r| p * r);
    let rho = pr.map(|v| v.sqrt().sqrt());
    check_continuity(&rho, "rho")?;
    let vals = (0..pr.values().len())
        .map(|i| (c.dp[i] * c.r[i] + c.p[i] * c.dr[i]) / (4.0 * pr[i]))
        .collect();
    let log_deriv = SampledFunction::new(*c.grid(), vals)?;
    Ok((rho, log_deriv))
}

/// Builds the map `l` for the requested mode.
pub fn compute_l(c: &CoefficientSamples, mode: MapMode) -> Result<LiouvilleMap> {
    let grid = *c.grid();
    let (rho, rho_log_deriv) = compute_rho(c)?;
    let dl = rho.zip_with(&c.p, |rho, p| rho * rho / p);
    if !dl.is_finite() {
        return Err(Error::BadCoefficient {
            what: "r/p",
            y: grid.a(),
        });
    }
    let total = dl.cumulative_integral(0)?;
    let (y0, b, l) = match mode {
        MapMode::Endpoint => (grid.a(), total[grid.len() - 1], total),
        MapMode::Symmetric => {
            for (i, y) in grid.nodes().enumerate() {
                let s = dl[i];
                if !(s.re > 0.0 && s.im.abs() <= 1e-14 * s.re) {
                    return Err(Error::NotRealPositive { y });
                }
            }
            let y0 = symmetric_origin(&total)?;
            let l = dl.cumulative_integral_from(y0)?;
            let b = Complex64::new(0.5 * total[grid.len() - 1].re, 0.0);
            (y0, b, l)
        }
    };
    Ok(LiouvilleMap {
        mode,
        y0,
        b,
        l,
        dl,
        rho,
        rho_log_deriv,
    })
}

/// Solves `L(y₀) = L(B)/2` for the increasing cumulative integral `L`,
/// snapping to a node when within `1e-9` grid steps.
fn symmetric_origin(total: &SampledFunction) -> Result<f64> {
    let grid = *total.grid();
    let half = 0.5 * total[grid.len() - 1].re;
    let v = total.values();
    let k = v.partition_point(|c| c.re < half).clamp(1, grid.len() - 1);
    if v[k].re == half {
        return Ok(grid.node(k));
    }
    let (mut lo, mut hi) = (grid.node(k - 1), grid.node(k));
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if total.interpolate(mid)?.re < half {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let y0 = 0.5 * (lo + hi);
    Ok(match grid.node_index(y0) {
        Some(i) => grid.node(i),
        None => y0,
    })
}

/// Potential of the transformed equation, as a function of `y`:
/// `Q = q/r + (1/l') d/dy[(ρ'/ρ)/l'] + ((ρ'/ρ)/l')²`.
pub fn compute_q(c: &CoefficientSamples, map: &LiouvilleMap) -> Result<SampledFunction> {
    let p4 = map.rho_log_deriv.zip_with(&map.dl, |a, b| a / b);
    let dp4 = p4.derivative();
    let n = c.p.values().len();
    let vals = (0..n)
        .map(|i| c.q[i] / c.r[i] + dp4[i] / map.dl[i] + p4[i] * p4[i])
        .collect();
    SampledFunction::new(*c.grid(), vals)
}

/// `∫_0^x Q(s) ds` as a function of `y`, integrated by parts so that only
/// first derivatives of the coefficients enter:
/// `∫ q/r l' dy + [(ρ'/ρ)/l']_{y₀}^{y} + ∫ ((ρ'/ρ)/l')² l' dy`.
pub fn integrated_potential(c: &CoefficientSamples, map: &LiouvilleMap) -> Result<SampledFunction> {
    let p4 = map.rho_log_deriv.zip_with(&map.dl, |a, b| a / b);
    let n = p4.values().len();
    let integrand: Vec<Complex64> = (0..n)
        .map(|i| c.q[i] / c.r[i] * map.dl[i] + p4[i] * p4[i] * map.dl[i])
        .collect();
    let integral = SampledFunction::new(*c.grid(), integrand)?.cumulative_integral_from(map.y0)?;
    let p4_0 = p4.interpolate(map.y0)?;
    Ok(integral.zip_with(&p4, |a, b| a + b - p4_0))
}

/// Kernel targets `G₂ = ¼∫_0^x Q` and `G₁ = G₂ + h/2`.
#[derive(Debug, Clone)]
pub struct KernelTargets {
    pub g1: SampledFunction,
    pub g2: SampledFunction,
}

pub fn compute_g(c: &CoefficientSamples, map: &LiouvilleMap, h: Complex64) -> Result<KernelTargets> {
    let g2 = integrated_potential(c, map)?.scale(Complex64::new(0.25, 0.0));
    let g1 = g2.map(|v| v + 0.5 * h);
    Ok(KernelTargets { g1, g2 })
}
