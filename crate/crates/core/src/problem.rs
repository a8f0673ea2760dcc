//! Problem definition: coefficients of `(p v')' - q v + λ r v = 0` on
//! `[A, B]` and two boundary forms.

use num_complex::Complex64;

use crate::error::{Error, ExprError, Result};
use crate::expr::Expr;
use crate::mesh::{Grid, SampledFunction};

/// Sturm-Liouville problem `(p v')' - q v + λ r v = 0` on `[a, b]`.
///
/// `p'` and `r'` are derived symbolically at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SlProblem {
    pub a: f64,
    pub b: f64,
    pub p: Expr,
    pub q: Expr,
    pub r: Expr,
    dp: Expr,
    dr: Expr,
}

impl SlProblem {
    pub fn new(a: f64, b: f64, p: &str, q: &str, r: &str) -> Result<Self> {
        Self::from_exprs(a, b, Expr::parse(p)?, Expr::parse(q)?, Expr::parse(r)?)
    }

    pub fn from_exprs(a: f64, b: f64, p: Expr, q: Expr, r: Expr) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidInput(format!("empty interval [{a}, {b}]")));
        }
        let dp = p.differentiate()?;
        let dr = r.differentiate()?;
        Ok(SlProblem { a, b, p, q, r, dp, dr })
    }

    pub fn dp(&self) -> &Expr {
        &self.dp
    }

    pub fn dr(&self) -> &Expr {
        &self.dr
    }

    /// `(p, q, r)` at a real point.
    pub fn coefficients_at(&self, y: f64) -> Result<(Complex64, Complex64, Complex64), ExprError> {
        Ok((self.p.eval_real(y)?, self.q.eval_real(y)?, self.r.eval_real(y)?))
    }

    /// Samples `p, q, r, p', r'` on `grid`.
    pub fn sample(&self, grid: &Grid) -> Result<CoefficientSamples> {
        let sample = |e: &Expr| SampledFunction::try_from_fn(*grid, |y| e.eval_real(y));
        let samples = CoefficientSamples {
            p: sample(&self.p)?,
            q: sample(&self.q)?,
            r: sample(&self.r)?,
            dp: sample(&self.dp)?,
            dr: sample(&self.dr)?,
        };
        for (i, y) in grid.nodes().enumerate() {
            if samples.p[i].norm() == 0.0 {
                return Err(Error::BadCoefficient { what: "p", y });
            }
            if samples.r[i].norm() == 0.0 {
                return Err(Error::BadCoefficient { what: "r", y });
            }
        }
        Ok(samples)
    }
}

/// Coefficients sampled on a grid.
#[derive(Debug, Clone)]
pub struct CoefficientSamples {
    pub p: SampledFunction,
    pub q: SampledFunction,
    pub r: SampledFunction,
    pub dp: SampledFunction,
    pub dr: SampledFunction,
}

impl CoefficientSamples {
    pub fn grid(&self) -> &Grid {
        self.p.grid()
    }

    /// True when every sample of `p`, `q`, `r` is real.
    pub fn is_real(&self) -> bool {
        [&self.p, &self.q, &self.r]
            .iter()
            .all(|f| f.values().iter().all(|v| v.im == 0.0))
    }
}

/// Two boundary forms
/// `a_i1 v(A) + a_i2 v'(A) + a_i3 v(B) + a_i4 v'(B) = 0`, `i = 1, 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryConditions {
    pub rows: [[Complex64; 4]; 2],
}

impl BoundaryConditions {
    pub fn new(rows: [[Complex64; 4]; 2]) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if row.iter().all(|c| c.norm() == 0.0) {
                return Err(Error::InvalidInput(format!("boundary row {} is zero", i + 1)));
            }
        }
        Ok(BoundaryConditions { rows })
    }

    pub fn from_real(rows: [[f64; 4]; 2]) -> Result<Self> {
        Self::new(rows.map(|row| row.map(|v| Complex64::new(v, 0.0))))
    }

    /// `v(A) = v(B) = 0`.
    pub fn dirichlet() -> Self {
        Self::from_real([[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]]).unwrap()
    }

    /// The first form involves only values at `A`.
    pub fn first_is_separated(&self) -> bool {
        self.rows[0][2].norm() == 0.0 && self.rows[0][3].norm() == 0.0
    }

    pub fn is_real(&self) -> bool {
        self.rows.iter().flatten().all(|c| c.im == 0.0)
    }

    /// Applies row `i` to boundary data `[v(A), v'(A), v(B), v'(B)]`.
    pub fn apply(&self, i: usize, data: [Complex64; 4]) -> Complex64 {
        self.rows[i].iter().zip(data).map(|(a, v)| a * v).sum()
    }
}

/// Parses a complex scalar such as `1`, `-2`, `0.5+0.5i`, `3i`, `-i` or any
/// constant expression (`5/3`, `2*pi`, `1 + 2*i`).
pub fn parse_complex(text: &str) -> Result<Complex64, ExprError> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(c) = parse_rectangular(&t) {
        return Ok(c);
    }
    let e = Expr::parse(text)?;
    if e.depends_on_y() {
        return Err(ExprError::Syntax {
            offset: 0,
            message: "a constant is required here".into(),
        });
    }
    e.eval(Complex64::new(0.0, 0.0))
}

fn parse_rectangular(t: &str) -> Option<Complex64> {
    if let Ok(v) = t.parse::<f64>() {
        return Some(Complex64::new(v, 0.0));
    }
    let body = t.strip_suffix('i')?;
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        s => s.parse::<f64>().ok()?,
    };
    Some(Complex64::new(re.parse::<f64>().ok()?, im))
}
