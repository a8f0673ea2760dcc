//! Characteristic function and eigenvalue search.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::oracle::{self, OracleConfig};
use crate::problem::{BoundaryConditions, SlProblem};
use crate::solution::{SolutionSample, SolverState};

/// How an eigenvalue was located.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Sign change of the reference characteristic function near the origin.
    Scan,
    /// Safeguarded Newton iteration from a scan bracket.
    Newton,
    /// Newton iteration inside a rectangle isolated by the argument principle.
    ArgumentPrinciple,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Scan => "scan",
            Method::Newton => "newton",
            Method::ArgumentPrinciple => "argument-principle",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenvalue {
    pub index: usize,
    pub omega: Complex64,
    pub lambda: Complex64,
    /// `|char(ω)|` of the method that produced the root.
    pub residual: f64,
    pub method: Method,
}

/// Eigenvalues sorted by `Re λ`, then `Im λ`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Spectrum {
    pub entries: Vec<Eigenvalue>,
}

/// Relative distance below which two roots are the same eigenvalue.
pub const DUPLICATE_TOL: f64 = 1e-9;

/// Representative of `±ω` with `Re ω > 0`, or `Im ω ≥ 0` on the imaginary axis.
pub fn canonical_omega(omega: Complex64) -> Complex64 {
    if omega.re < 0.0 || (omega.re == 0.0 && omega.im < 0.0) {
        -omega
    } else {
        omega
    }
}

impl Spectrum {
    /// Canonicalises, merges duplicates (first occurrence wins), sorts and
    /// numbers the roots.
    pub fn from_roots(roots: impl IntoIterator<Item = (Complex64, f64, Method)>) -> Spectrum {
        let mut kept: Vec<Eigenvalue> = Vec::new();
        for (omega, residual, method) in roots {
            let omega = canonical_omega(omega);
            let dup = kept
                .iter()
                .any(|e| (e.omega - omega).norm() <= DUPLICATE_TOL * (1.0 + omega.norm()));
            if !dup {
                kept.push(Eigenvalue {
                    index: 0,
                    omega,
                    lambda: omega * omega,
                    residual,
                    method,
                });
            }
        }
        kept.sort_by(|a, b| {
            a.lambda
                .re
                .total_cmp(&b.lambda.re)
                .then(a.lambda.im.total_cmp(&b.lambda.im))
        });
        for (i, e) in kept.iter_mut().enumerate() {
            e.index = i;
        }
        Spectrum { entries: kept }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lambdas(&self) -> Vec<Complex64> {
        self.entries.iter().map(|e| e.lambda).collect()
    }

    pub fn truncate(&mut self, len: usize) {
        self.entries.truncate(len);
    }
}

/// `char(ω)` and `d char/dω`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharValue {
    pub value: Complex64,
    pub derivative: Complex64,
}

fn initial_data() -> SolutionSample {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    SolutionSample {
        v: [one, zero],
        dv: [zero, one],
        v_omega: [zero, zero],
        dv_omega: [zero, zero],
    }
}

/// Determinant of the boundary forms applied to `V₁`, `V₂`, or with `y₀ = A`
/// and a first form living at `A`, the second form applied to
/// `v = -a₁₂ V₁ + a₁₁ V₂`.
pub fn characteristic(state: &SolverState, bc: &BoundaryConditions, omega: Complex64) -> Result<CharValue> {
    let grid = state.grid();
    let at_origin = state.map.y0 == grid.a();
    let sa = if at_origin {
        initial_data()
    } else {
        state.normalized_pair(omega, grid.a())?
    };
    let sb = state.normalized_pair(omega, grid.b())?;
    let data = |j: usize| [sa.v[j], sa.dv[j], sb.v[j], sb.dv[j]];
    let d_data = |j: usize| [sa.v_omega[j], sa.dv_omega[j], sb.v_omega[j], sb.dv_omega[j]];
    let mut out = if at_origin && bc.first_is_separated() {
        let (c1, c2) = (-bc.rows[0][1], bc.rows[0][0]);
        let combine =
            |x: [Complex64; 4], y: [Complex64; 4]| -> [Complex64; 4] { std::array::from_fn(|k| c1 * x[k] + c2 * y[k]) };
        CharValue {
            value: bc.apply(1, combine(data(0), data(1))),
            derivative: bc.apply(1, combine(d_data(0), d_data(1))),
        }
    } else {
        let u = |i: usize, j: usize| bc.apply(i, data(j));
        let du = |i: usize, j: usize| bc.apply(i, d_data(j));
        CharValue {
            value: u(0, 0) * u(1, 1) - u(0, 1) * u(1, 0),
            derivative: du(0, 0) * u(1, 1) + u(0, 0) * du(1, 1) - du(0, 1) * u(1, 0) - u(0, 1) * du(1, 0),
        }
    };
    if state.is_real && bc.is_real() && omega.im == 0.0 {
        if out.value.im.abs() > 1e-8 * out.value.norm() {
            log::debug!(
                "characteristic function at real omega = {} has imaginary part {:e}",
                omega.re,
                out.value.im
            );
        }
        out.value.im = 0.0;
        out.derivative.im = 0.0;
    }
    Ok(out)
}

pub fn characteristic_function(state: &SolverState, bc: &BoundaryConditions, omega: Complex64) -> Result<Complex64> {
    Ok(characteristic(state, bc, omega)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketKind {
    SignChange,
    /// `|char|` dips close to zero without a sign change.
    Minimum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub kind: BracketKind,
}

/// Samples of a real function on a uniform grid and the brackets found.
#[derive(Debug, Clone)]
pub struct Scan {
    pub points: Vec<f64>,
    pub values: Vec<f64>,
    pub brackets: Vec<Bracket>,
}

impl Scan {
    pub fn median_abs(&self) -> f64 {
        let mut v: Vec<f64> = self.values.iter().map(|x| x.abs()).collect();
        if v.is_empty() {
            return 0.0;
        }
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    }
}

/// Threshold relative to the median `|f|` for a minimum bracket.
const DIP: f64 = 1e-3;

fn lagrange(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let mut sum = 0.0;
    for i in 0..xs.len() {
        let mut w = 1.0;
        for j in 0..xs.len() {
            if i != j {
                w *= (x - xs[j]) / (xs[i] - xs[j]);
            }
        }
        sum += w * ys[i];
    }
    sum
}

/// Samples `f` on `[lo, hi]` with spacing at most `step` and returns
/// sign-change brackets plus dips of a local quintic interpolant.
pub fn scan_function<F>(f: F, lo: f64, hi: f64, step: f64) -> Result<Scan>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if !(lo < hi && step > 0.0) {
        return Err(Error::InvalidInput(format!("bad scan range [{lo}, {hi}] / {step}")));
    }
    let n = ((hi - lo) / step).ceil() as usize;
    let points: Vec<f64> = (0..=n)
        .map(|i| if i == n { hi } else { lo + i as f64 * step })
        .collect();
    let values = points.par_iter().map(|&x| f(x)).collect::<Result<Vec<f64>>>()?;
    let mut scan = Scan {
        points,
        values,
        brackets: Vec::new(),
    };
    let median = scan.median_abs();
    let (xs, ys) = (&scan.points, &scan.values);
    let mut brackets = Vec::new();
    for i in 0..=n {
        if ys[i] == 0.0 {
            brackets.push(Bracket {
                lo: xs[i],
                hi: xs[i],
                kind: BracketKind::SignChange,
            });
        }
        if i < n && ys[i] * ys[i + 1] < 0.0 {
            brackets.push(Bracket {
                lo: xs[i],
                hi: xs[i + 1],
                kind: BracketKind::SignChange,
            });
        }
    }
    for i in 1..n {
        let local_min = ys[i].abs() <= ys[i - 1].abs() && ys[i].abs() <= ys[i + 1].abs();
        let sign_change = ys[i - 1] * ys[i] <= 0.0 || ys[i] * ys[i + 1] <= 0.0;
        if !local_min || sign_change || n < 5 {
            continue;
        }
        let start = (i.saturating_sub(2)).min(n - 5);
        let (wx, wy) = (&xs[start..start + 6], &ys[start..start + 6]);
        let sub = 24;
        let (a, b) = (xs[i - 1], xs[i + 1]);
        let mut prev = (a, ys[i - 1]);
        let mut dip = f64::INFINITY;
        let mut found = false;
        for k in 1..=sub {
            let x = a + (b - a) * k as f64 / sub as f64;
            let y = if k == sub { ys[i + 1] } else { lagrange(wx, wy, x) };
            dip = dip.min(y.abs());
            if prev.1 * y < 0.0 {
                found = true;
                let fl = f(prev.0)?;
                let fh = f(x)?;
                let kind = if fl * fh < 0.0 {
                    BracketKind::SignChange
                } else {
                    BracketKind::Minimum
                };
                brackets.push(Bracket {
                    lo: prev.0,
                    hi: x,
                    kind,
                });
            }
            prev = (x, y);
        }
        if !found && dip < DIP * median {
            brackets.push(Bracket {
                lo: a,
                hi: b,
                kind: BracketKind::Minimum,
            });
        }
    }
    brackets.sort_by(|p, q| p.lo.total_cmp(&q.lo));
    scan.brackets = brackets;
    Ok(scan)
}

/// Convergence threshold on Newton steps.
pub const NEWTON_TOL: f64 = 1e-13;
pub const NEWTON_MAX_ITER: usize = 30;

/// Safeguarded Newton on a real bracket with a sign change: Newton steps
/// that leave the bracket are replaced by bisection.
pub fn refine_bracket<F>(f: F, lo: f64, hi: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<(f64, f64)>,
{
    if lo == hi {
        return Ok(lo);
    }
    let (mut a, mut b) = (lo, hi);
    let (mut fa, _) = f(a)?;
    let (fb, _) = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 {
        return Err(Error::NoConvergence {
            start: Complex64::new(0.5 * (a + b), 0.0),
        });
    }
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let (fx, dfx) = f(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if fa * fx < 0.0 {
            b = x;
        } else {
            a = x;
            fa = fx;
        }
        let newton = x - fx / dfx;
        let next = if newton.is_finite() && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        let tol = NEWTON_TOL * (1.0 + next.abs());
        if (next - x).abs() <= tol || (b - a) <= tol {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::NoConvergence {
        start: Complex64::new(0.5 * (lo + hi), 0.0),
    })
}

/// Newton iteration on the characteristic function from `omega0`, with a
/// secant step when the derivative underflows.
pub fn refine_newton(state: &SolverState, bc: &BoundaryConditions, omega0: Complex64) -> Result<Complex64> {
    newton_complex(|w| characteristic(state, bc, w), omega0)
}

fn newton_complex<F>(f: F, omega0: Complex64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<CharValue>,
{
    let mut w = omega0;
    let mut prev: Option<(Complex64, Complex64)> = None;
    for _ in 0..NEWTON_MAX_ITER {
        let c = f(w)?;
        if c.value.norm() == 0.0 {
            return Ok(w);
        }
        let slope = if c.derivative.norm() > 1e-300 {
            c.derivative
        } else if let Some((pw, pv)) = prev {
            (c.value - pv) / (w - pw)
        } else {
            return Err(Error::NoConvergence { start: omega0 });
        };
        let step = c.value / slope;
        if !(step.re.is_finite() && step.im.is_finite()) {
            return Err(Error::NoConvergence { start: omega0 });
        }
        prev = Some((w, c.value));
        w -= step;
        if step.norm() <= NEWTON_TOL * (1.0 + w.norm()) {
            return Ok(w);
        }
    }
    Err(Error::NoConvergence { start: omega0 })
}

/// Brackets of the characteristic function on `[omega_min, omega_max]`.
pub fn scan_real(
    state: &SolverState,
    bc: &BoundaryConditions,
    omega_min: f64,
    omega_max: f64,
    step: f64,
) -> Result<Scan> {
    scan_function(
        |w| Ok(characteristic(state, bc, Complex64::new(w, 0.0))?.value.re),
        omega_min,
        omega_max,
        step,
    )
}

/// Axis-parallel rectangle in the `ω` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl Rect {
    pub fn new(re: (f64, f64), im: (f64, f64)) -> Result<Rect> {
        if !(re.0 < re.1 && im.0 < im.1) {
            return Err(Error::InvalidInput(format!("empty rectangle {re:?} x {im:?}")));
        }
        Ok(Rect { re, im })
    }

    pub fn width(&self) -> f64 {
        self.re.1 - self.re.0
    }

    pub fn height(&self) -> f64 {
        self.im.1 - self.im.0
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re.0 + self.re.1), 0.5 * (self.im.0 + self.im.1))
    }

    pub fn contains(&self, z: Complex64, slack: f64) -> bool {
        z.re >= self.re.0 - slack && z.re <= self.re.1 + slack && z.im >= self.im.0 - slack && z.im <= self.im.1 + slack
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re.0, self.im.0),
            Complex64::new(self.re.1, self.im.0),
            Complex64::new(self.re.1, self.im.1),
            Complex64::new(self.re.0, self.im.1),
        ]
    }

    /// The parts of `self` outside the open square `|Re|, |Im| < c`.
    pub fn minus_square(&self, c: f64) -> Vec<Rect> {
        let sq = Rect {
            re: (-c, c),
            im: (-c, c),
        };
        let overlap = self.re.0 < sq.re.1 && self.re.1 > sq.re.0 && self.im.0 < sq.im.1 && self.im.1 > sq.im.0;
        if !overlap {
            return vec![*self];
        }
        let mut out = Vec::new();
        let mut push = |re: (f64, f64), im: (f64, f64)| {
            if re.0 < re.1 && im.0 < im.1 {
                out.push(Rect { re, im });
            }
        };
        push((self.re.0, -c), self.im);
        push((c, self.re.1), self.im);
        let mid = (self.re.0.max(-c), self.re.1.min(c));
        push(mid, (self.im.0, -c));
        push(mid, (c, self.im.1));
        out
    }
}

/// Largest rectangle side accepted for a final Newton start.
pub const FINAL_SIDE: f64 = 0.1;
const MIN_SIDE: f64 = 1e-7;
const MAX_SHIFTS: usize = 5;
/// Phase steps must stay below this between accepted boundary samples.
const MAX_PHASE_STEP: f64 = PI / 2.0;
/// Initial boundary spacing in radians of the dominant oscillation.
const PHASE_RESOLUTION: f64 = 0.3;
const HIT_RATIO: f64 = 1e-6;

/// Result of an argument-principle search.
#[derive(Debug, Clone, Default)]
pub struct ComplexSearch {
    pub roots: Vec<(Complex64, f64)>,
    /// Accumulated phase / 2π for every rectangle whose count was taken.
    pub windings: Vec<f64>,
}

struct Contour<'a> {
    f: &'a (dyn Fn(Complex64) -> Result<Complex64> + Sync),
    /// Boundary spacing before refinement.
    h0: f64,
}

impl Contour<'_> {
    fn eval(&self, z: Complex64) -> Result<Complex64> {
        let v = (self.f)(z)?;
        if v.norm() == 0.0 || !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::ContourHit);
        }
        Ok(v)
    }

    /// Phase change of `f` along the segment, refined until every step is
    /// below `MAX_PHASE_STEP` and consistent with its midpoint.
    fn segment(&self, za: Complex64, fa: Complex64, zb: Complex64, fb: Complex64, depth: usize) -> Result<f64> {
        let direct = (fb / fa).arg();
        let zm = 0.5 * (za + zb);
        let fm = self.eval(zm)?;
        // a zero this close to the segment makes the phase step ambiguous
        if fm.norm() < HIT_RATIO * fa.norm().min(fb.norm()) {
            return Err(Error::ContourHit);
        }
        let (d1, d2) = ((fm / fa).arg(), (fb / fm).arg());
        if d1.abs() < MAX_PHASE_STEP && d2.abs() < MAX_PHASE_STEP && (d1 + d2 - direct).abs() < 1e-3 {
            return Ok(d1 + d2);
        }
        if depth >= 48 || (zb - za).norm() < 1e-10 {
            return Err(Error::ContourHit);
        }
        Ok(self.segment(za, fa, zm, fm, depth + 1)? + self.segment(zm, fm, zb, fb, depth + 1)?)
    }

    fn edge(&self, za: Complex64, zb: Complex64) -> Result<f64> {
        let n = ((zb - za).norm() / self.h0).ceil().max(1.0) as usize;
        let mut total = 0.0;
        let mut prev_z = za;
        let mut prev_f = self.eval(za)?;
        for k in 1..=n {
            let z = za + (zb - za) * (k as f64 / n as f64);
            let fz = self.eval(z)?;
            total += self.segment(prev_z, prev_f, z, fz, 0)?;
            prev_z = z;
            prev_f = fz;
        }
        Ok(total)
    }

    /// Accumulated phase / 2π around the rectangle, counterclockwise.
    fn winding(&self, r: &Rect) -> Result<f64> {
        let c = r.corners();
        let mut total = 0.0;
        for k in 0..4 {
            total += self.edge(c[k], c[(k + 1) % 4])?;
        }
        Ok(total / (2.0 * PI))
    }

    /// Winding number, moving the rectangle by `1e-3` of its sides on a hit.
    fn count(&self, r: &Rect, windings: &mut Vec<f64>) -> Result<(Rect, usize)> {
        let mut rect = *r;
        for attempt in 0..=MAX_SHIFTS {
            match self.winding(&rect) {
                Ok(w) => {
                    let n = w.round();
                    if (w - n).abs() < 0.05 && n >= 0.0 {
                        windings.push(w);
                        return Ok((rect, n as usize));
                    }
                    log::debug!("non-integer winding {w} on {rect:?}");
                }
                Err(Error::ContourHit) => {}
                Err(e) => return Err(e),
            }
            let s = 1e-3 * (attempt as f64 + 1.0);
            let (dx, dy) = (s * r.width(), s * r.height());
            rect = Rect {
                re: (r.re.0 - dx, r.re.1 + dx),
                im: (r.im.0 - dy, r.im.1 + dy),
            };
        }
        Err(Error::ContourHit)
    }
}

/// Splits the longer side, nudging the cut off zeros of the function.
fn split(contour: &Contour<'_>, r: &Rect, windings: &mut Vec<f64>) -> Result<Vec<(Rect, usize)>> {
    let horizontal = r.width() >= r.height();
    for attempt in 0..=MAX_SHIFTS {
        let shift = if attempt == 0 {
            0.0
        } else {
            let sign = if attempt % 2 == 1 { 1.0 } else { -1.0 };
            sign * 1e-3 * attempt.div_ceil(2) as f64
        };
        let t = 0.5 + shift;
        let (a, b) = if horizontal {
            let m = r.re.0 + t * r.width();
            (
                Rect {
                    re: (r.re.0, m),
                    im: r.im,
                },
                Rect {
                    re: (m, r.re.1),
                    im: r.im,
                },
            )
        } else {
            let m = r.im.0 + t * r.height();
            (
                Rect {
                    re: r.re,
                    im: (r.im.0, m),
                },
                Rect {
                    re: r.re,
                    im: (m, r.im.1),
                },
            )
        };
        let mut local = Vec::new();
        let counted = contour.winding(&a).and_then(|wa| Ok((wa, contour.winding(&b)?)));
        match counted {
            Ok((wa, wb)) if (wa - wa.round()).abs() < 0.05 && (wb - wb.round()).abs() < 0.05 => {
                local.push(wa);
                local.push(wb);
                windings.extend(local);
                return Ok(vec![
                    (a, wa.round().max(0.0) as usize),
                    (b, wb.round().max(0.0) as usize),
                ]);
            }
            Ok(_) | Err(Error::ContourHit) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::ContourHit)
}

fn isolate(
    contour: &Contour<'_>,
    newton: &(dyn Fn(Complex64) -> Result<Complex64> + Sync),
    rect: Rect,
    count: usize,
    out: &mut ComplexSearch,
) -> Result<()> {
    if count == 0 {
        return Ok(());
    }
    let side = rect.width().max(rect.height());
    if count == 1 && side < FINAL_SIDE {
        if let Ok(w) = newton(rect.center()) {
            if rect.contains(w, 1e-9 * (1.0 + w.norm())) {
                let residual = (contour.f)(w).map(|v| v.norm()).unwrap_or(f64::NAN);
                out.roots.push((w, residual));
                return Ok(());
            }
        }
    }
    if side < MIN_SIDE {
        // a cluster the subdivision cannot separate; report its centre
        let w = newton(rect.center()).unwrap_or_else(|_| rect.center());
        log::warn!("unresolved cluster of {count} zeros near {w}");
        let residual = (contour.f)(w).map(|v| v.norm()).unwrap_or(f64::NAN);
        out.roots.push((w, residual));
        return Ok(());
    }
    for (child, n) in split(contour, &rect, &mut out.windings)? {
        isolate(contour, newton, child, n, out)?;
    }
    Ok(())
}

/// Zeros of the characteristic function inside `rect` by the argument
/// principle, isolated by bisection and polished by Newton's method.
pub fn find_complex(state: &SolverState, bc: &BoundaryConditions, rect: Rect) -> Result<ComplexSearch> {
    let f = |w: Complex64| characteristic_function(state, bc, w);
    let newton = |w: Complex64| refine_newton(state, bc, w);
    let scale = state.map.b.norm().max(state.map.l.sup_norm()).max(1e-3);
    find_zeros(&f, &newton, rect, PHASE_RESOLUTION / (2.0 * scale))
}

/// Argument-principle search for an analytic `f` with Newton polishing.
/// `h0` is the initial boundary spacing; the domain is cut into tiles of
/// side at most 50 h0 processed in parallel.
pub fn find_zeros(
    f: &(dyn Fn(Complex64) -> Result<Complex64> + Sync),
    newton: &(dyn Fn(Complex64) -> Result<Complex64> + Sync),
    rect: Rect,
    h0: f64,
) -> Result<ComplexSearch> {
    let contour = Contour { f, h0 };
    let tile = (50.0 * h0).max(FINAL_SIDE);
    let nx = (rect.width() / tile).ceil().max(1.0) as usize;
    let ny = (rect.height() / tile).ceil().max(1.0) as usize;
    let tiles: Vec<Rect> = (0..ny)
        .flat_map(|j| {
            (0..nx).map(move |i| {
                let x = |k: usize| rect.re.0 + rect.width() * k as f64 / nx as f64;
                let y = |k: usize| rect.im.0 + rect.height() * k as f64 / ny as f64;
                Rect {
                    re: (x(i), x(i + 1)),
                    im: (y(j), y(j + 1)),
                }
            })
        })
        .collect();
    let parts = tiles
        .par_iter()
        .map(|t| {
            let mut out = ComplexSearch::default();
            let (moved, n) = contour.count(t, &mut out.windings)?;
            isolate(&contour, newton, moved, n, &mut out)?;
            Ok(out)
        })
        .collect::<Result<Vec<ComplexSearch>>>()?;
    let mut all = ComplexSearch::default();
    for p in parts {
        all.windings.extend(p.windings);
        for (w, res) in p.roots {
            let dup = all
                .roots
                .iter()
                .any(|(v, _)| (v - w).norm() <= DUPLICATE_TOL * (1.0 + w.norm()));
            if !dup && rect.contains(w, 1e-9 * (1.0 + w.norm())) {
                all.roots.push((w, res));
            }
        }
    }
    Ok(all)
}

/// Search parameters for [`compute_spectrum`].
#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub omega_min: f64,
    pub omega_max: f64,
    pub scan_step: f64,
    pub omega_cut: f64,
    /// Upper end of the imaginary-axis scan `ω = iτ`.
    pub tau_max: f64,
    /// Rectangle for the argument-principle search; `None` scans the real
    /// and imaginary axes.
    pub rect: Option<Rect>,
    /// Keep only the first eigenvalues.
    pub max_count: Option<usize>,
    pub oracle: OracleConfig,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            omega_min: 0.5,
            omega_max: 50.0,
            scan_step: 0.02,
            omega_cut: 0.5,
            tau_max: 20.0,
            rect: None,
            max_count: None,
            oracle: OracleConfig::default(),
        }
    }
}

/// `max(20, √max(0, -min q/r) + 1)` over a sample of `[A, B]`; bounds `τ`
/// for negative eigenvalues of problems with positive `p` and `r`.
pub fn default_tau_max(problem: &SlProblem) -> Result<f64> {
    let n = 512;
    let mut lowest = f64::INFINITY;
    for i in 0..=n {
        let y = problem.a + (problem.b - problem.a) * i as f64 / n as f64;
        let (_, q, r) = problem.coefficients_at(y)?;
        lowest = lowest.min((q / r).re);
    }
    Ok(20f64.max((-lowest).max(0.0).sqrt() + 1.0))
}

/// Spectrum together with search diagnostics.
#[derive(Debug, Clone, Default)]
pub struct SpectrumReport {
    pub spectrum: Spectrum,
    /// Median `|char|` over the real scan (zero when no scan ran).
    pub scan_median: f64,
    pub windings: Vec<f64>,
    /// Brackets that could not be refined to a root.
    pub failed_brackets: Vec<Bracket>,
}

/// Eigenvalues with `ω` in the configured range.
///
/// Real problems: real-axis scan on `[max(ω_min, ω_cut), ω_max]`, and when
/// `ω_min ≤ ω_cut` an imaginary-axis scan on `(ω_cut, τ_max]` plus the
/// reference solver on `|λ| ≤ ω_cut²`. With a rectangle: argument principle
/// outside the square `|Re ω|, |Im ω| < ω_cut`, reference solver inside it.
pub fn compute_spectrum(
    problem: &SlProblem,
    state: &SolverState,
    bc: &BoundaryConditions,
    search: &SearchConfig,
) -> Result<SpectrumReport> {
    let mut report = SpectrumReport::default();
    let mut roots: Vec<(Complex64, f64, Method)> = Vec::new();
    let cut = search.omega_cut;
    match search.rect {
        None => {
            if !(state.is_real && bc.is_real()) {
                return Err(Error::InvalidInput("complex problems need a search rectangle".into()));
            }
            let lo = search.omega_min.max(cut);
            if lo < search.omega_max {
                let scan = scan_real(state, bc, lo, search.omega_max, search.scan_step)?;
                report.scan_median = scan.median_abs();
                let f = |w: f64| {
                    let c = characteristic(state, bc, Complex64::new(w, 0.0))?;
                    Ok((c.value.re, c.derivative.re))
                };
                let refined: Vec<_> = scan
                    .brackets
                    .par_iter()
                    .map(|br| refine_real(state, bc, &f, br))
                    .collect();
                for (br, r) in scan.brackets.iter().zip(refined) {
                    match r {
                        Some(w) => roots.push((w, residual(state, bc, w), Method::Newton)),
                        None if br.kind == BracketKind::SignChange => {
                            log::warn!("bracket [{}, {}] did not converge", br.lo, br.hi);
                            report.failed_brackets.push(*br);
                        }
                        None => {}
                    }
                }
            }
            if search.omega_min <= cut {
                if cut < search.tau_max {
                    let g = |t: f64| {
                        let c = characteristic(state, bc, Complex64::new(0.0, t))?;
                        Ok((c.value.re, (Complex64::i() * c.derivative).re))
                    };
                    let scan = scan_function(|t| Ok(g(t)?.0), cut, search.tau_max, search.scan_step)?;
                    for br in scan.brackets.iter().filter(|b| b.kind == BracketKind::SignChange) {
                        match refine_bracket(g, br.lo, br.hi) {
                            Ok(t) => {
                                let w = Complex64::new(0.0, t);
                                roots.push((w, residual(state, bc, w), Method::Newton));
                            }
                            Err(_) => report.failed_brackets.push(*br),
                        }
                    }
                }
                let near = oracle::near_origin_real(problem, bc, cut, &search.oracle)?;
                roots.extend(near.into_iter().map(|(w, r)| (w, r, Method::Scan)));
            }
        }
        Some(rect) => {
            for piece in rect.minus_square(cut) {
                let found = find_complex(state, bc, piece)?;
                report.windings.extend(found.windings);
                roots.extend(found.roots.into_iter().map(|(w, r)| (w, r, Method::ArgumentPrinciple)));
            }
            let square = Rect {
                re: (rect.re.0.max(-cut), rect.re.1.min(cut)),
                im: (rect.im.0.max(-cut), rect.im.1.min(cut)),
            };
            if square.re.0 < square.re.1 && square.im.0 < square.im.1 {
                let near = oracle::eigenvalues_in_rect(problem, bc, square, &search.oracle)?;
                roots.extend(near.into_iter().map(|(w, r)| (w, r, Method::Scan)));
            }
        }
    }
    let mut spectrum = Spectrum::from_roots(roots);
    if let Some(n) = search.max_count {
        spectrum.truncate(n);
    }
    report.spectrum = spectrum;
    Ok(report)
}

fn residual(state: &SolverState, bc: &BoundaryConditions, w: Complex64) -> f64 {
    characteristic_function(state, bc, w)
        .map(|v| v.norm())
        .unwrap_or(f64::NAN)
}

fn refine_real<F>(state: &SolverState, bc: &BoundaryConditions, f: &F, br: &Bracket) -> Option<Complex64>
where
    F: Fn(f64) -> Result<(f64, f64)>,
{
    match br.kind {
        BracketKind::SignChange => refine_bracket(f, br.lo, br.hi).ok().map(|w| Complex64::new(w, 0.0)),
        BracketKind::Minimum => {
            let w = refine_newton(state, bc, Complex64::new(0.5 * (br.lo + br.hi), 0.0)).ok()?;
            (w.im.abs() <= 1e-8 * w.norm() && w.re >= br.lo && w.re <= br.hi).then(|| Complex64::new(w.re, 0.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::MapMode;
    use crate::solution::SolverConfig;

    fn free_state() -> (SlProblem, SolverState) {
        let problem = SlProblem::new(0.0, PI, "1", "0", "1").unwrap();
        let config = SolverConfig {
            grid_points: 501,
            mode: MapMode::Endpoint,
            ..SolverConfig::default()
        };
        let state = SolverState::build(&problem, config).unwrap();
        (problem, state)
    }

    #[test]
    fn free_characteristic_function() {
        let (_, state) = free_state();
        let bc = BoundaryConditions::dirichlet();
        for w in [0.7, 1.5, 3.3, 10.25] {
            let c = characteristic_function(&state, &bc, Complex64::new(w, 0.0)).unwrap();
            assert!((c.re - (w * PI).sin() / w).abs() < 1e-12);
            assert_eq!(c.im, 0.0);
        }
    }

    #[test]
    fn free_brackets_and_newton() {
        let (_, state) = free_state();
        let bc = BoundaryConditions::dirichlet();
        let scan = scan_real(&state, &bc, 0.5, 10.5, 0.02).unwrap();
        let signs: Vec<_> = scan
            .brackets
            .iter()
            .filter(|b| b.kind == BracketKind::SignChange)
            .collect();
        assert_eq!(signs.len(), 10);
        for (k, b) in signs.iter().enumerate() {
            assert!(b.lo <= (k + 1) as f64 && (k + 1) as f64 <= b.hi);
        }
        let w = refine_newton(&state, &bc, Complex64::new(3.07, 0.0)).unwrap();
        assert!((w - 3.0).norm() < 1e-12);
    }

    #[test]
    fn free_rectangles() {
        let (_, state) = free_state();
        let bc = BoundaryConditions::dirichlet();
        let rect = Rect::new((2.5, 3.5), (-0.5, 0.5)).unwrap();
        let found = find_complex(&state, &bc, rect).unwrap();
        assert_eq!(found.roots.len(), 1);
        assert!((found.roots[0].0 - 3.0).norm() < 1e-12);
        let empty = Rect::new((3.2, 3.8), (0.2, 0.8)).unwrap();
        let found = find_complex(&state, &bc, empty).unwrap();
        assert!(found.roots.is_empty());
        assert!(found.windings.iter().all(|w| w.abs() < 0.05));
    }

    #[test]
    fn spectrum_is_canonical_and_deduplicated() {
        let roots = vec![
            (Complex64::new(-2.0, 0.0), 0.0, Method::Newton),
            (Complex64::new(2.0 + 1e-12, 0.0), 0.0, Method::Scan),
            (Complex64::new(0.0, -1.0), 0.0, Method::Newton),
            (Complex64::new(1.0, 0.0), 0.0, Method::Newton),
        ];
        let s = Spectrum::from_roots(roots);
        let l: Vec<f64> = s.entries.iter().map(|e| e.lambda.re).collect();
        assert_eq!(l, vec![-1.0, 1.0, 4.0]);
        assert_eq!(s.entries[0].omega, Complex64::new(0.0, 1.0));
        assert_eq!(s.entries[2].method, Method::Newton);
        assert_eq!(s.entries.iter().map(|e| e.index).collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn rectangle_minus_square() {
        let r = Rect::new((-1.0, 3.0), (-2.0, 2.0)).unwrap();
        let parts = r.minus_square(0.5);
        assert_eq!(parts.len(), 4);
        let area: f64 = parts.iter().map(|p| p.width() * p.height()).sum();
        assert!((area - (16.0 - 1.0)).abs() < 1e-12);
        let far = Rect::new((1.0, 2.0), (1.0, 2.0)).unwrap();
        assert_eq!(far.minus_square(0.5), vec![far]);
    }

    #[test]
    fn safeguarded_newton_on_a_bracket() {
        let f = |x: f64| Ok((x.powi(3) - 2.0, 3.0 * x * x));
        let r = refine_bracket(f, 0.0, 5.0).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
        assert!(refine_bracket(f, 2.0, 5.0).is_err());
    }
}
