//! Adaptive Gauss-Kronrod reference for the trigonometric moments.

use sturmian::Complex64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Gauss-Kronrod 7/15 on `[a, b]`: (Kronrod value, |Kronrod - Gauss|).
fn gk15(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64) -> (Complex64, f64) {
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    let centre = f(m);
    let mut k = centre * WGK[7];
    let mut g = centre * WG[3];
    for j in 0..7 {
        let s = f(m - h * XGK[j]) + f(m + h * XGK[j]);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Globally adaptive: bisects the panel with the largest error estimate
/// until the total estimate reaches `tol` or 4000 panels are in use.
pub fn adaptive(f: &dyn Fn(f64) -> Complex64, a: f64, b: f64, tol: f64) -> Complex64 {
    let mut panels = vec![(a, b, gk15(f, a, b))];
    while panels.len() < 4000 {
        let total: f64 = panels.iter().map(|p| p.2 .1).sum();
        if total <= tol {
            break;
        }
        let (i, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .unwrap();
        let (lo, hi, _) = panels.swap_remove(i);
        let m = 0.5 * (lo + hi);
        panels.push((lo, m, gk15(f, lo, m)));
        panels.push((m, hi, gk15(f, m, hi)));
    }
    panels.iter().map(|p| p.2 .0).sum()
}

/// `∫_0^x t^k cos(ωt) dt` and the sine analogue along the segment `t = xs`.
pub fn reference(k: usize, omega: Complex64, x: Complex64) -> (Complex64, Complex64) {
    let cosf = |s: f64| {
        let t = x * s;
        t.powu(k as u32) * (omega * t).cos() * x
    };
    let sinf = |s: f64| {
        let t = x * s;
        t.powu(k as u32) * (omega * t).sin() * x
    };
    let scale = |f: &dyn Fn(f64) -> Complex64| (0..=64).map(|i| f(i as f64 / 64.0).norm()).fold(0.0, f64::max);
    (
        adaptive(&cosf, 0.0, 1.0, 1e-16 * scale(&cosf)),
        adaptive(&sinf, 0.0, 1.0, 1e-16 * scale(&sinf)),
    )
}
