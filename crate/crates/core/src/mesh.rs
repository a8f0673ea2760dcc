//! Uniform grids, cumulative panel quadrature and local interpolation.
//!
//! The grid is split into panels of six nodes. Inside a panel the sampled
//! function is replaced by its degree-5 interpolating polynomial, which is
//! integrated from the panel start to every node of the panel; panel sums are
//! then accumulated. This yields antiderivative samples at every node and is
//! exact for polynomials of degree five.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Nodes per panel minus one.
pub const PANEL: usize = 5;

/// Default node count.
pub const DEFAULT_NODES: usize = 4001;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

// ∫_0^i ℓ_m(s) ds for the Lagrange basis on nodes 0..5, scaled by 1440.
const PARTIAL_WEIGHTS: [[f64; 6]; 5] = [
    [475.0, 1427.0, -798.0, 482.0, -173.0, 27.0],
    [448.0, 2064.0, 224.0, 224.0, -96.0, 16.0],
    [459.0, 1971.0, 1026.0, 1026.0, -189.0, 27.0],
    [448.0, 2048.0, 768.0, 2048.0, 448.0, 0.0],
    [475.0, 1875.0, 1250.0, 1250.0, 1875.0, 475.0],
];
const PARTIAL_SCALE: f64 = 1440.0;

// ℓ_m'(j) on nodes 0..5, scaled by 60.
const DERIVATIVE_WEIGHTS: [[f64; 6]; 6] = [
    [-137.0, 300.0, -300.0, 200.0, -75.0, 12.0],
    [-12.0, -65.0, 120.0, -60.0, 20.0, -3.0],
    [3.0, -30.0, -20.0, 60.0, -15.0, 2.0],
    [-2.0, 15.0, -60.0, 20.0, 30.0, -3.0],
    [3.0, -20.0, 60.0, -120.0, 65.0, 12.0],
    [-12.0, 75.0, -200.0, 300.0, -300.0, 137.0],
];
const DERIVATIVE_SCALE: f64 = 60.0;

// Π_{j≠m} (m - j)
const LAGRANGE_DENOMINATORS: [f64; 6] = [-120.0, 24.0, -12.0, 12.0, -24.0, 120.0];

/// Uniform grid `y_i = a + i (b - a) / (m - 1)` with `m ≡ 1 (mod 5)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    a: f64,
    b: f64,
    len: usize,
}

impl Grid {
    pub fn new(a: f64, b: f64, len: usize) -> Result<Grid> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidGrid(format!("empty interval [{a}, {b}]")));
        }
        if len < PANEL + 1 || !(len - 1).is_multiple_of(PANEL) {
            return Err(Error::InvalidGrid(format!(
                "node count {len} must be at least 6 and congruent to 1 mod 5"
            )));
        }
        Ok(Grid { a, b, len })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        (self.b - self.a) / (self.len - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.len - 1 {
            self.b
        } else {
            self.a + i as f64 * self.step()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|i| self.node(i))
    }

    pub fn contains(&self, y: f64) -> bool {
        y >= self.a && y <= self.b
    }

    /// Index of the node that coincides with `y` (within `1e-9` of a step).
    pub fn node_index(&self, y: f64) -> Option<usize> {
        let t = (y - self.a) / self.step();
        let i = t.round();
        if i >= 0.0 && i < self.len as f64 && (t - i).abs() <= 1e-9 {
            Some(i as usize)
        } else {
            None
        }
    }

    fn check(&self, y: f64) -> Result<()> {
        if self.contains(y) {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                y,
                a: self.a,
                b: self.b,
            })
        }
    }

    fn stencil_start(&self, i: usize) -> usize {
        i.saturating_sub(2).min(self.len - PANEL - 1)
    }

    /// First node of the six-point stencil used at `y` and the Lagrange
    /// weights for that stencil.
    pub(crate) fn interpolation_weights(&self, y: f64) -> Result<(usize, [f64; 6])> {
        self.check(y)?;
        let t = (y - self.a) / self.step();
        let start = self.stencil_start(t.floor() as usize);
        let s = t - start as f64;
        let mut weights = [0.0; 6];
        for (m, w) in weights.iter_mut().enumerate() {
            let mut num = 1.0;
            for j in 0..=PANEL {
                if j != m {
                    num *= s - j as f64;
                }
            }
            *w = num / LAGRANGE_DENOMINATORS[m];
        }
        Ok((start, weights))
    }
}

/// Complex samples of a function at every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<Complex64>,
}

impl SampledFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(SampledFunction { grid, values })
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64) -> Complex64) -> Self {
        let values = grid.nodes().map(&mut f).collect();
        SampledFunction { grid, values }
    }

    pub fn try_from_fn<E>(
        grid: Grid,
        mut f: impl FnMut(f64) -> std::result::Result<Complex64, E>,
    ) -> std::result::Result<Self, E> {
        let values = grid.nodes().map(&mut f).collect::<std::result::Result<_, E>>()?;
        Ok(SampledFunction { grid, values })
    }

    pub fn constant(grid: Grid, value: Complex64) -> Self {
        SampledFunction {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        SampledFunction {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &SampledFunction, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        SampledFunction {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Antiderivative samples `F(y_i) = ∫_{y_anchor}^{y_i} f`.
    pub fn cumulative_integral(&self, anchor: usize) -> Result<Self> {
        if anchor >= self.grid.len() {
            return Err(Error::InvalidInput(format!(
                "anchor index {anchor} outside grid of {} nodes",
                self.grid.len()
            )));
        }
        let mut out = self.integral_from_start();
        let shift = out[anchor];
        if shift != ZERO {
            for v in &mut out {
                *v -= shift;
            }
        }
        Ok(SampledFunction {
            grid: self.grid,
            values: out,
        })
    }

    /// Antiderivative anchored at an arbitrary point; when `y0` is not a node
    /// the anchor value is taken from the local interpolant.
    pub fn cumulative_integral_from(&self, y0: f64) -> Result<Self> {
        self.grid.check(y0)?;
        if let Some(i) = self.grid.node_index(y0) {
            return self.cumulative_integral(i);
        }
        let mut out = SampledFunction {
            grid: self.grid,
            values: self.integral_from_start(),
        };
        let shift = out.interpolate(y0)?;
        for v in &mut out.values {
            *v -= shift;
        }
        Ok(out)
    }

    fn integral_from_start(&self) -> Vec<Complex64> {
        let h = self.grid.step() / PARTIAL_SCALE;
        let mut out = vec![ZERO; self.values.len()];
        for start in (0..self.values.len() - 1).step_by(PANEL) {
            let panel = &self.values[start..=start + PANEL];
            let base = out[start];
            for (i, weights) in PARTIAL_WEIGHTS.iter().enumerate() {
                let sum: Complex64 = weights.iter().zip(panel).map(|(w, f)| f * *w).sum();
                out[start + i + 1] = base + sum * h;
            }
        }
        out
    }

    /// Local degree-5 interpolation; reproduces node values exactly.
    pub fn interpolate(&self, y: f64) -> Result<Complex64> {
        if let Some(i) = self.grid.node_index(y) {
            if (self.grid.node(i) - y).abs() == 0.0 {
                return Ok(self.values[i]);
            }
        }
        let (start, w) = self.grid.interpolation_weights(y)?;
        Ok(w.iter()
            .zip(&self.values[start..=start + PANEL])
            .map(|(w, f)| f * *w)
            .sum())
    }

    /// Nodal derivative from the six-point stencil around each node.
    pub fn derivative(&self) -> Self {
        let scale = 1.0 / (DERIVATIVE_SCALE * self.grid.step());
        let values = (0..self.values.len())
            .map(|i| {
                let start = self.grid.stencil_start(i);
                let row = &DERIVATIVE_WEIGHTS[i - start];
                let sum: Complex64 = row
                    .iter()
                    .zip(&self.values[start..=start + PANEL])
                    .map(|(w, f)| f * *w)
                    .sum();
                sum * scale
            })
            .collect();
        SampledFunction {
            grid: self.grid,
            values,
        }
    }
}

impl std::ops::Index<usize> for SampledFunction {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.values[i]
    }
}
