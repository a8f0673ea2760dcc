//! Solver state and closed-form evaluation of solutions for any `ω`.

use std::borrow::Cow;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::formal_powers::{
    build_formal_powers, compute_h, spps_homogeneous_solution, FormalPowers, ParticularSolution,
};
use crate::kernel_fit::{binomials, build_basis, FitResult, KernelFitter, LADDER_MAX};
use crate::liouville::{compute_g, compute_l, KernelTargets, LiouvilleMap, MapMode};
use crate::mesh::{Grid, DEFAULT_NODES};
use crate::moments::trig_moments;
use crate::problem::{CoefficientSamples, SlProblem};

/// Smallest `|ω|` accepted by the closed-form evaluation.
pub const OMEGA_MIN: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub grid_points: usize,
    pub mode: MapMode,
    /// Highest truncation considered by the ladder.
    pub max_order: usize,
    /// Fixed truncation; `None` walks the ladder.
    pub n_fit: Option<usize>,
    /// Prescribed `g'/g` at `y₀`.
    pub g_slope: Option<Complex64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            grid_points: DEFAULT_NODES,
            mode: MapMode::Symmetric,
            max_order: LADDER_MAX,
            n_fit: None,
            g_slope: None,
        }
    }
}

/// Values, `y`-derivatives and `ω`-derivatives of a pair of solutions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolutionSample {
    pub v: [Complex64; 2],
    pub dv: [Complex64; 2],
    pub v_omega: [Complex64; 2],
    pub dv_omega: [Complex64; 2],
}

/// Everything needed to evaluate solutions, fixed once per problem.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub config: SolverConfig,
    pub coefficients: CoefficientSamples,
    pub map: LiouvilleMap,
    pub particular: ParticularSolution,
    pub h: Complex64,
    pub targets: KernelTargets,
    pub formal_powers: FormalPowers,
    pub fit: FitResult,
    /// Fits evaluated by the ladder, in order.
    pub ladder: Vec<FitResult>,
    /// The coefficients and map are real.
    pub is_real: bool,
    stride: usize,
    phi_sums: Vec<Complex64>,
    psi_sums: Vec<Complex64>,
    gl: Vec<Complex64>,
}

/// Per-point data feeding the closed-form evaluation.
struct NodeView<'a> {
    x: Complex64,
    dl: Complex64,
    rho: Complex64,
    p: Complex64,
    gl: Complex64,
    phi: Cow<'a, [Complex64]>,
    psi: Cow<'a, [Complex64]>,
}

impl SolverState {
    pub fn build(problem: &SlProblem, config: SolverConfig) -> Result<SolverState> {
        let grid = Grid::new(problem.a, problem.b, config.grid_points)?;
        let coefficients = problem.sample(&grid)?;
        let map = compute_l(&coefficients, config.mode)?;
        let rho0 = map.rho.interpolate(map.y0)?;
        let particular = spps_homogeneous_solution(&coefficients, map.y0, config.g_slope, rho0)?;
        let h = compute_h(&particular, &map)?;
        let targets = compute_g(&coefficients, &map, h)?;
        let order = match config.n_fit {
            Some(n) => n,
            None => config.max_order.min(LADDER_MAX),
        };
        let formal_powers = build_formal_powers(&particular.g, &coefficients, map.y0, order)?;
        let basis = build_basis(&map, &formal_powers, order)?;
        let fitter = KernelFitter::new(&targets, &basis, h);
        let (fit, ladder) = match config.n_fit {
            Some(n) => {
                let fit = fitter.fit(n)?;
                (fit.clone(), vec![fit])
            }
            None => fitter.fit_ladder()?,
        };
        log::debug!(
            "kernel fit: N = {}, eps1 = {:.3e}, eps2 = {:.3e}, cond = {:.3e}",
            fit.n_fit,
            fit.eps1,
            fit.eps2,
            fit.condition
        );
        let is_real = coefficients.is_real() && map.l.values().iter().all(|v| v.im == 0.0);
        let gl = particular.log_derivative().into_values();
        let mut state = SolverState {
            config,
            coefficients,
            map,
            particular,
            h,
            targets,
            formal_powers,
            fit,
            ladder,
            is_real,
            stride: 0,
            phi_sums: Vec::new(),
            psi_sums: Vec::new(),
            gl,
        };
        state.precompute_sums();
        Ok(state)
    }

    pub fn grid(&self) -> &Grid {
        self.coefficients.grid()
    }

    pub fn n_fit(&self) -> usize {
        self.fit.n_fit
    }

    /// `Σ_n a_n C(n,k) Φ_{n-k}` (even `k`) or with `b_n` (odd `k`), and the
    /// same with `Ψ` and the roles of `a`, `b` swapped.
    fn precompute_sums(&mut self) {
        let n = self.fit.n_fit;
        let stride = n + 1;
        let binom = binomials(n);
        let len = self.grid().len();
        let mut phi_sums = vec![Complex64::new(0.0, 0.0); len * stride];
        let mut psi_sums = vec![Complex64::new(0.0, 0.0); len * stride];
        let (a, b) = (&self.fit.a, &self.fit.b);
        let fp = &self.formal_powers;
        for i in 0..len {
            let row_phi = &mut phi_sums[i * stride..(i + 1) * stride];
            let row_psi = &mut psi_sums[i * stride..(i + 1) * stride];
            for k in 0..=n {
                let (for_phi, for_psi) = if k % 2 == 0 { (a, b) } else { (b, a) };
                let mut sp = Complex64::new(0.0, 0.0);
                let mut ss = Complex64::new(0.0, 0.0);
                for m in k..=n {
                    let cb = binom[m][k];
                    sp += for_phi[m] * cb * fp.phi[m - k][i];
                    ss += for_psi[m] * cb * fp.psi[m - k][i];
                }
                row_phi[k] = sp;
                row_psi[k] = ss;
            }
        }
        self.stride = stride;
        self.phi_sums = phi_sums;
        self.psi_sums = psi_sums;
    }

    fn node_view(&self, y: f64) -> Result<NodeView<'_>> {
        let grid = self.grid();
        let stride = self.stride;
        if let Some(i) = grid.node_index(y).filter(|&i| grid.node(i) == y) {
            return Ok(NodeView {
                x: self.map.l[i],
                dl: self.map.dl[i],
                rho: self.map.rho[i],
                p: self.coefficients.p[i],
                gl: self.gl[i],
                phi: Cow::Borrowed(&self.phi_sums[i * stride..(i + 1) * stride]),
                psi: Cow::Borrowed(&self.psi_sums[i * stride..(i + 1) * stride]),
            });
        }
        let (start, w) = grid.interpolation_weights(y)?;
        let combine = |f: &dyn Fn(usize) -> Complex64| -> Complex64 { (0..6).map(|j| w[j] * f(start + j)).sum() };
        let mut phi = vec![Complex64::new(0.0, 0.0); stride];
        let mut psi = vec![Complex64::new(0.0, 0.0); stride];
        for j in 0..6 {
            let i = start + j;
            for k in 0..stride {
                phi[k] += w[j] * self.phi_sums[i * stride + k];
                psi[k] += w[j] * self.psi_sums[i * stride + k];
            }
        }
        Ok(NodeView {
            x: combine(&|i| self.map.l[i]),
            dl: combine(&|i| self.map.dl[i]),
            rho: combine(&|i| self.map.rho[i]),
            p: combine(&|i| self.coefficients.p[i]),
            gl: combine(&|i| self.gl[i]),
            phi: Cow::Owned(phi),
            psi: Cow::Owned(psi),
        })
    }

    /// The pair `v₁, v₂` of solutions with
    /// `v₁(y₀) = 1/ρ(y₀)`, `v₂(y₀) = 0`, at any `y ∈ [A, B]`.
    pub fn eval_solutions(&self, omega: Complex64, y: f64) -> Result<SolutionSample> {
        if omega.norm() < OMEGA_MIN {
            return Err(Error::OmegaTooSmall(omega.norm()));
        }
        let node = self.node_view(y)?;
        Ok(evaluate(&node, omega))
    }

    /// Coefficients `(α, β, γ)` of `V₁ = α v₁ + β v₂`, `V₂ = γ v₂`.
    fn normalization(&self) -> Result<(Complex64, Complex64, Complex64)> {
        let y0 = self.map.y0;
        let rho0 = self.map.rho.interpolate(y0)?;
        let rld0 = self.map.rho_log_deriv.interpolate(y0)?;
        let dl0 = self.map.dl.interpolate(y0)?;
        let alpha = rho0;
        let beta = rho0 * rld0 / dl0 - self.h * rho0;
        let gamma = rho0 / dl0;
        Ok((alpha, beta, gamma))
    }

    /// Solutions with `V₁(y₀) = 1, V₁'(y₀) = 0, V₂(y₀) = 0, V₂'(y₀) = 1`.
    pub fn normalized_pair(&self, omega: Complex64, y: f64) -> Result<SolutionSample> {
        let s = self.eval_solutions(omega, y)?;
        let (alpha, beta, gamma) = self.normalization()?;
        let t = |x: [Complex64; 2]| [alpha * x[0] + beta * x[1], gamma * x[1]];
        Ok(SolutionSample {
            v: t(s.v),
            dv: t(s.dv),
            v_omega: t(s.v_omega),
            dv_omega: t(s.dv_omega),
        })
    }
}

fn evaluate(node: &NodeView<'_>, omega: Complex64) -> SolutionSample {
    let n = node.phi.len() - 1;
    let x = node.x;
    let (ic, is) = trig_moments(omega, x, n + 1);
    let wx = omega * x;
    let (sin, cos) = (wx.sin(), wx.cos());
    let zero = Complex64::new(0.0, 0.0);
    let (mut s_v1, mut s_v2, mut s_dv1, mut s_dv2) = (zero, zero, zero, zero);
    let (mut s_w1, mut s_w2, mut s_wd1, mut s_wd2) = (zero, zero, zero, zero);
    for k in 0..=n {
        let (phi, psi) = (node.phi[k], node.psi[k]);
        if k % 2 == 0 {
            s_v1 += phi * ic[k];
            s_w1 += phi * is[k + 1];
            s_dv2 += psi * ic[k];
            s_wd2 += psi * is[k + 1];
        } else {
            s_v2 += phi * is[k];
            s_w2 += phi * ic[k + 1];
            s_dv1 += psi * is[k];
            s_wd1 += psi * (is[k] + omega * ic[k + 1]);
        }
    }
    let (rho, p, dl, gl) = (node.rho, node.p, node.dl, node.gl);
    let v1 = cos / rho + 2.0 * s_v1;
    let v2 = (sin / rho + 2.0 * s_v2) / omega;
    let dv1 = -(omega / rho) * dl * sin + gl * v1 + 2.0 * omega / p * s_dv1;
    let dv2 = dl / rho * cos + gl * v2 - 2.0 / p * s_dv2;
    let w1 = -(x / rho) * sin - 2.0 * s_w1;
    let w2 = (x * cos / rho - v2 + 2.0 * s_w2) / omega;
    let wd1 = -(dl / rho) * (sin + wx * cos) + gl * w1 + 2.0 / p * s_wd1;
    let wd2 = -(dl / rho) * x * sin + gl * w2 + 2.0 / p * s_wd2;
    SolutionSample {
        v: [v1, v2],
        dv: [dv1, dv2],
        v_omega: [w1, w2],
        dv_omega: [wd1, wd2],
    }
}
