//! Trigonometric moments `∫_0^x t^k cos(ωt) dt` and `∫_0^x t^k sin(ωt) dt`
//! for complex `ω` and `x`.
//!
//! Both are written as `x^{k+1} C_k(z)`, `x^{k+1} S_k(z)` with `z = ωx` and
//! `C_k(z) = ∫_0^1 s^k cos(zs) ds`, `S_k(z) = ∫_0^1 s^k sin(zs) ds`.
//! A power series serves `|z| < 1`; otherwise `E_k(z) = ∫_0^1 s^k e^{izs} ds`
//! is computed by recurrence, upward for `k ≤ |z|` and downward above.

use num_complex::Complex64;

const SERIES_RADIUS: f64 = 1.0;
const MILLER_EPS: f64 = 1e-17;

/// `(C_k(z), S_k(z))` for `k = 0..=n`.
pub fn moment_factors(z: Complex64, n: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    if z.norm() < SERIES_RADIUS {
        series_factors(z, n)
    } else {
        recurrence_factors(z, n)
    }
}

/// Power-series branch.
pub fn series_factors(z: Complex64, n: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let z2 = z * z;
    let mut c = Vec::with_capacity(n + 1);
    let mut s = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let kf = k as f64;
        // term_j = (-1)^j z^{2j} / (2j)!
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum_c = term / (kf + 1.0);
        let mut sum_s = z / (kf + 2.0);
        for j in 1..40 {
            let jf = j as f64;
            term = -term * z2 / ((2.0 * jf - 1.0) * (2.0 * jf));
            let tc = term / (kf + 2.0 * jf + 1.0);
            let ts = term * z / ((2.0 * jf + 1.0) * (kf + 2.0 * jf + 2.0));
            sum_c += tc;
            sum_s += ts;
            if tc.norm() <= 1e-18 * sum_c.norm() && ts.norm() <= 1e-18 * sum_s.norm().max(1e-300) {
                break;
            }
        }
        c.push(sum_c);
        s.push(sum_s);
    }
    (c, s)
}

/// `E_k(z)` for `k = 0..=n`, `z ≠ 0`.
fn exponential_moments(z: Complex64, n: usize) -> Vec<Complex64> {
    let iz = Complex64::i() * z;
    let e = iz.exp();
    let r = z.norm();
    let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
    let up_to = (r.floor() as usize).min(n);
    out[0] = (e - 1.0) / iz;
    for k in 1..=up_to {
        out[k] = (e - k as f64 * out[k - 1]) / iz;
    }
    if up_to < n {
        // start error is damped by ∏ |z|/j on the way down to index n
        let mut start = n;
        let mut damp = 1.0;
        while damp > MILLER_EPS {
            start += 1;
            damp *= r / start as f64;
        }
        let mut ek = e / (start as f64 + iz);
        for k in (up_to + 2..=start).rev() {
            ek = (e - iz * ek) / k as f64;
            if k - 1 <= n {
                out[k - 1] = ek;
            }
        }
    }
    out
}

/// Recurrence branch.
pub fn recurrence_factors(z: Complex64, n: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let plus = exponential_moments(z, n);
    let minus = exponential_moments(-z, n);
    let minus_half_i = Complex64::new(0.0, -0.5);
    let c = plus.iter().zip(&minus).map(|(p, m)| 0.5 * (p + m)).collect();
    let s = plus.iter().zip(&minus).map(|(p, m)| (p - m) * minus_half_i).collect();
    (c, s)
}

/// `Ic_k = ∫_0^x t^k cos(ωt) dt` and `Is_k` for `k = 0..=n`.
pub fn trig_moments(omega: Complex64, x: Complex64, n: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    if x == Complex64::new(0.0, 0.0) {
        let zero = vec![Complex64::new(0.0, 0.0); n + 1];
        return (zero.clone(), zero);
    }
    let (mut c, mut s) = moment_factors(omega * x, n);
    let mut xp = x;
    for k in 0..=n {
        c[k] *= xp;
        s[k] *= xp;
        xp *= x;
    }
    (c, s)
}
