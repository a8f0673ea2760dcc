//! Least-squares representation of the kernel targets in the basis
//!
//! ```text
//! c̃_m = ρ Σ_{even k ≤ m} C(m,k) l^k Φ_{m-k}
//! s̃_m = ρ Σ_{odd  k ≤ m} C(m,k) l^k Φ_{m-k}
//! ```
//!
//! `G₁ ≈ Σ a_n c̃_n` and `G₂ ≈ Σ b_n s̃_n`. `s̃_0 = 0`, so `b_0 = h/2` is
//! fixed rather than fitted.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::formal_powers::FormalPowers;
use crate::liouville::{KernelTargets, LiouvilleMap};
use crate::mesh::SampledFunction;

/// Rungs at which the truncation is tried when it is not fixed.
pub const LADDER_START: usize = 8;
pub const LADDER_STEP: usize = 4;
pub const LADDER_MAX: usize = 40;
/// Condition estimate above which a rung is treated as rank deficient.
pub const MAX_CONDITION: f64 = 1e15;

/// Pascal triangle `C(n, k)` for `n ≤ max`, rounded once to `f64`.
pub fn binomials(max: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<u128>> = vec![vec![1]];
    for n in 1..=max {
        let prev = &rows[n - 1];
        let mut row = vec![1u128; n + 1];
        for k in 1..n {
            row[k] = prev[k - 1] + prev[k];
        }
        rows.push(row);
    }
    rows.into_iter()
        .map(|r| r.into_iter().map(|v| v as f64).collect())
        .collect()
}

#[derive(Debug, Clone)]
pub struct KernelBasis {
    pub c: Vec<SampledFunction>,
    /// `s[0]` is identically zero.
    pub s: Vec<SampledFunction>,
}

pub fn build_basis(map: &LiouvilleMap, fp: &FormalPowers, n: usize) -> Result<KernelBasis> {
    if fp.len() <= n {
        return Err(Error::InvalidInput(format!(
            "basis of order {n} needs {} formal powers, have {}",
            n + 1,
            fp.len()
        )));
    }
    let grid = *map.l.grid();
    let binom = binomials(n);
    let len = grid.len();
    let mut c = Vec::with_capacity(n + 1);
    let mut s = Vec::with_capacity(n + 1);
    let mut lpow = vec![vec![Complex64::new(1.0, 0.0); len]];
    for k in 1..=n {
        let next = lpow[k - 1].iter().zip(map.l.values()).map(|(a, l)| a * l).collect();
        lpow.push(next);
    }
    for m in 0..=n {
        let mut even = vec![Complex64::new(0.0, 0.0); len];
        let mut odd = vec![Complex64::new(0.0, 0.0); len];
        for k in 0..=m {
            let target = if k % 2 == 0 { &mut even } else { &mut odd };
            let phi = fp.phi[m - k].values();
            let coef = binom[m][k];
            for i in 0..len {
                target[i] += coef * lpow[k][i] * phi[i];
            }
        }
        for i in 0..len {
            even[i] *= map.rho[i];
            odd[i] *= map.rho[i];
        }
        c.push(SampledFunction::new(grid, even)?);
        s.push(SampledFunction::new(grid, odd)?);
    }
    Ok(KernelBasis { c, s })
}

/// One least-squares fit at a fixed truncation.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub n_fit: usize,
    /// `a_0..=a_N`.
    pub a: Vec<Complex64>,
    /// `b_0..=b_N`, with `b_0 = h/2`.
    pub b: Vec<Complex64>,
    /// `sup |G₁ - Σ a_n c̃_n|` over the grid.
    pub eps1: f64,
    pub eps2: f64,
    /// Root-mean-square residuals.
    pub rms1: f64,
    pub rms2: f64,
    pub condition: f64,
}

impl FitResult {
    pub fn max_error(&self) -> f64 {
        self.eps1.max(self.eps2)
    }
}

/// Column-scaled Householder factorisation of a set of basis columns.
/// Leading columns are factorised independently of later ones, so every
/// truncation reuses one factorisation.
struct Factored {
    qr: nalgebra::linalg::QR<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
    norms: Vec<f64>,
    columns: usize,
}

impl Factored {
    fn new(columns: &[&SampledFunction]) -> Factored {
        let rows = columns[0].values().len();
        let norms: Vec<f64> = columns
            .iter()
            .map(|c| {
                let n = c.values().iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
                if n > 0.0 {
                    n
                } else {
                    1.0
                }
            })
            .collect();
        let m = DMatrix::from_fn(rows, columns.len(), |i, j| columns[j][i] / norms[j]);
        Factored {
            qr: m.qr(),
            norms,
            columns: columns.len(),
        }
    }

    /// Solves for the first `n` columns. Returns coefficients and the
    /// condition estimate `max |R_ii| / min |R_ii|`.
    fn solve(&self, rhs: &DVector<Complex64>, n: usize) -> (Vec<Complex64>, f64) {
        debug_assert!(n <= self.columns);
        let mut z = rhs.clone();
        self.qr.q_tr_mul(&mut z);
        let r = self.qr.r();
        let diag: Vec<f64> = (0..n).map(|i| r[(i, i)].norm()).collect();
        let max = diag.iter().cloned().fold(0.0, f64::max);
        let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for i in (0..n).rev() {
            let mut acc = z[i];
            for j in i + 1..n {
                acc -= r[(i, j)] * x[j];
            }
            x[i] = acc / r[(i, i)];
        }
        for (xi, norm) in x.iter_mut().zip(&self.norms) {
            *xi /= *norm;
        }
        (x, condition)
    }
}

fn residual(target: &SampledFunction, columns: &[&SampledFunction], coef: &[Complex64]) -> (f64, f64) {
    let len = target.values().len();
    let mut sup = 0.0f64;
    let mut sq = 0.0;
    for i in 0..len {
        let mut v = target[i];
        for (c, k) in columns.iter().zip(coef) {
            v -= k * c[i];
        }
        sup = sup.max(v.norm());
        sq += v.norm_sqr();
    }
    (sup, (sq / len as f64).sqrt())
}

/// Precomputed factorisations for truncations up to `n_max`.
pub struct KernelFitter<'a> {
    targets: &'a KernelTargets,
    basis: &'a KernelBasis,
    h: Complex64,
    even: Factored,
    odd: Option<Factored>,
    g1: DVector<Complex64>,
    g2: DVector<Complex64>,
}

impl<'a> KernelFitter<'a> {
    pub fn new(targets: &'a KernelTargets, basis: &'a KernelBasis, h: Complex64) -> Self {
        let n_max = basis.c.len() - 1;
        let c_cols: Vec<&SampledFunction> = basis.c.iter().collect();
        let s_cols: Vec<&SampledFunction> = basis.s[1..].iter().collect();
        let to_vec = |f: &SampledFunction| DVector::from_column_slice(f.values());
        KernelFitter {
            targets,
            basis,
            h,
            even: Factored::new(&c_cols),
            odd: (n_max > 0).then(|| Factored::new(&s_cols)),
            g1: to_vec(&targets.g1),
            g2: to_vec(&targets.g2),
        }
    }

    pub fn n_max(&self) -> usize {
        self.basis.c.len() - 1
    }

    /// Fit with `a_0..=a_n`, `b_1..=b_n`.
    pub fn fit(&self, n: usize) -> Result<FitResult> {
        if n > self.n_max() {
            return Err(Error::InvalidInput(format!(
                "truncation {n} exceeds basis order {}",
                self.n_max()
            )));
        }
        let (a, cond_a) = self.even.solve(&self.g1, n + 1);
        let c_cols: Vec<&SampledFunction> = self.basis.c[..=n].iter().collect();
        let (eps1, rms1) = residual(&self.targets.g1, &c_cols, &a);
        let mut b = vec![0.5 * self.h];
        let (eps2, rms2, cond_b) = match &self.odd {
            Some(odd) if n > 0 => {
                let (fitted, cond) = odd.solve(&self.g2, n);
                let s_cols: Vec<&SampledFunction> = self.basis.s[1..=n].iter().collect();
                let (sup, rms) = residual(&self.targets.g2, &s_cols, &fitted);
                b.extend(fitted);
                (sup, rms, cond)
            }
            _ => {
                let (sup, rms) = residual(&self.targets.g2, &[], &[]);
                (sup, rms, 1.0)
            }
        };
        let condition = cond_a.max(cond_b);
        if !(condition <= MAX_CONDITION) {
            return Err(Error::RankDeficient { condition });
        }
        Ok(FitResult {
            n_fit: n,
            a,
            b,
            eps1,
            eps2,
            rms1,
            rms2,
            condition,
        })
    }

    /// Truncations tried by [`KernelFitter::fit_ladder`].
    pub fn ladder(&self) -> Vec<usize> {
        let top = self.n_max().min(LADDER_MAX);
        if top < LADDER_START {
            return vec![top];
        }
        (LADDER_START..=top).step_by(LADDER_STEP).collect()
    }

    /// Walks the ladder until the residual stops improving by at least 10 %
    /// or the system becomes rank deficient; returns the best fit and every
    /// fit evaluated on the way.
    pub fn fit_ladder(&self) -> Result<(FitResult, Vec<FitResult>)> {
        let mut history: Vec<FitResult> = Vec::new();
        for n in self.ladder() {
            let fit = match self.fit(n) {
                Ok(fit) => fit,
                Err(Error::RankDeficient { .. }) if !history.is_empty() => break,
                Err(e) => return Err(e),
            };
            let stop = history
                .last()
                .is_some_and(|prev: &FitResult| prev.max_error() == 0.0 || fit.max_error() > 0.9 * prev.max_error());
            history.push(fit);
            if stop {
                break;
            }
        }
        let best = history
            .iter()
            .min_by(|x, y| x.max_error().total_cmp(&y.max_error()))
            .cloned()
            .expect("ladder has at least one rung");
        Ok((best, history))
    }
}
