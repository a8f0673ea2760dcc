//! Dormand-Prince 8(5,3) explicit Runge-Kutta pair with the error estimate
//! of Hairer's DOP853, on complex state vectors over a real variable.

use num_complex::Complex64;

const N_STAGES: usize = 12;
const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const ERROR_EXPONENT: f64 = -1.0 / 8.0;

const C: [f64; N_STAGES] = [
    0.0,
    0.05260015195876773,
    0.0789002279381516,
    0.1183503419072274,
    0.2816496580927726,
    0.3333333333333333,
    0.25,
    0.3076923076923077,
    0.6512820512820513,
    0.6,
    0.8571428571428571,
    1.0,
];

const A: [[f64; N_STAGES]; N_STAGES] = [
    [0.0; N_STAGES],
    [
        0.05260015195876773,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.0197250569845379,
        0.0591751709536137,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.02958758547680685,
        0.0,
        0.08876275643042054,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.2413651341592667,
        0.0,
        -0.8845494793282861,
        0.924834003261792,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.037037037037037035,
        0.0,
        0.0,
        0.17082860872947386,
        0.12546768756682242,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.037109375,
        0.0,
        0.0,
        0.17025221101954405,
        0.06021653898045596,
        -0.017578125,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.03709200011850479,
        0.0,
        0.0,
        0.17038392571223998,
        0.10726203044637328,
        -0.015319437748624402,
        0.008273789163814023,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.6241109587160757,
        0.0,
        0.0,
        -3.3608926294469414,
        -0.868219346841726,
        27.59209969944671,
        20.154067550477894,
        -43.48988418106996,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.47766253643826434,
        0.0,
        0.0,
        -2.4881146199716677,
        -0.590290826836843,
        21.230051448181193,
        15.279233632882423,
        -33.28821096898486,
        -0.020331201708508627,
        0.0,
        0.0,
        0.0,
    ],
    [
        -0.9371424300859873,
        0.0,
        0.0,
        5.186372428844064,
        1.0914373489967295,
        -8.149787010746927,
        -18.52006565999696,
        22.739487099350505,
        2.4936055526796523,
        -3.0467644718982196,
        0.0,
        0.0,
    ],
    [
        2.273310147516538,
        0.0,
        0.0,
        -10.53449546673725,
        -2.0008720582248625,
        -17.9589318631188,
        27.94888452941996,
        -2.8589982771350235,
        -8.87285693353063,
        12.360567175794303,
        0.6433927460157636,
        0.0,
    ],
];

const B: [f64; N_STAGES] = [
    0.054293734116568765,
    0.0,
    0.0,
    0.0,
    0.0,
    4.450312892752409,
    1.8915178993145003,
    -5.801203960010585,
    0.3111643669578199,
    -0.1521609496625161,
    0.20136540080403034,
    0.04471061572777259,
];

const E3: [f64; N_STAGES + 1] = [
    -0.18980075407240762,
    0.0,
    0.0,
    0.0,
    0.0,
    4.450312892752409,
    1.8915178993145003,
    -5.801203960010585,
    -0.4226823213237919,
    -0.1521609496625161,
    0.20136540080403034,
    0.02265179219836082,
    0.0,
];

const E5: [f64; N_STAGES + 1] = [
    0.01312004499419488,
    0.0,
    0.0,
    0.0,
    0.0,
    -1.2251564463762044,
    -0.4957589496572502,
    1.6643771824549864,
    -0.35032884874997366,
    0.3341791187130175,
    0.08192320648511571,
    -0.022355307863886294,
    0.0,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepFailure {
    /// The step size fell below the spacing of floating point numbers.
    Underflow {
        t: f64,
    },
    TooManySteps {
        t: f64,
    },
    NonFinite {
        t: f64,
    },
}

type State<const N: usize> = [Complex64; N];

fn rms<const N: usize>(v: &[f64; N]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / N as f64).sqrt()
}

fn finite<const N: usize>(y: &State<N>) -> bool {
    y.iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

fn initial_step<const N: usize, F>(
    f: &mut F,
    t0: f64,
    y0: &State<N>,
    f0: &State<N>,
    dir: f64,
    tol: &Tolerances,
) -> Result<f64, StepFailure>
where
    F: FnMut(f64, &State<N>) -> Option<State<N>>,
{
    let scale: [f64; N] = std::array::from_fn(|i| tol.atol + y0[i].norm() * tol.rtol);
    let d0 = rms::<N>(&std::array::from_fn(|i| y0[i].norm() / scale[i]));
    let d1 = rms::<N>(&std::array::from_fn(|i| f0[i].norm() / scale[i]));
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: State<N> = std::array::from_fn(|i| y0[i] + h0 * dir * f0[i]);
    let f1 = f(t0 + h0 * dir, &y1).ok_or(StepFailure::NonFinite { t: t0 })?;
    let d2 = rms::<N>(&std::array::from_fn(|i| (f1[i] - f0[i]).norm() / scale[i])) / h0;
    let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 8.0)
    };
    Ok((100.0 * h0).min(h1))
}

/// Integrates `y' = f(t, y)` from `t0` to `t1`. `f` returns `None` where
/// the right-hand side cannot be evaluated.
pub fn integrate<const N: usize, F>(
    mut f: F,
    t0: f64,
    y0: State<N>,
    t1: f64,
    tol: &Tolerances,
) -> Result<State<N>, StepFailure>
where
    F: FnMut(f64, &State<N>) -> Option<State<N>>,
{
    if t1 == t0 {
        return Ok(y0);
    }
    let dir = (t1 - t0).signum();
    let mut t = t0;
    let mut y = y0;
    let mut fy = f(t, &y).ok_or(StepFailure::NonFinite { t })?;
    let mut h = initial_step(&mut f, t, &y, &fy, dir, tol)?.min((t1 - t0).abs());
    let mut k = [[Complex64::new(0.0, 0.0); N]; N_STAGES + 1];
    let mut steps = 0;
    let mut rejected = false;
    while (t1 - t) * dir > 0.0 {
        steps += 1;
        if steps > tol.max_steps {
            return Err(StepFailure::TooManySteps { t });
        }
        let min_step = 10.0 * (f64::EPSILON * t.abs()).max(f64::MIN_POSITIVE);
        if h < min_step {
            return Err(StepFailure::Underflow { t });
        }
        let mut t_new = t + dir * h;
        if (t_new - t1) * dir > 0.0 {
            t_new = t1;
        }
        let step = t_new - t;
        k[0] = fy;
        let mut ok = true;
        for s in 1..N_STAGES {
            let ys: State<N> = std::array::from_fn(|i| {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..s {
                    acc += A[s][j] * k[j][i];
                }
                y[i] + step * acc
            });
            match f(t + C[s] * step, &ys) {
                Some(v) => k[s] = v,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        let y_new: State<N> = std::array::from_fn(|i| {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..N_STAGES {
                acc += B[j] * k[j][i];
            }
            y[i] + step * acc
        });
        let f_new = if ok && finite(&y_new) { f(t_new, &y_new) } else { None };
        let Some(f_new) = f_new else {
            h *= 0.5;
            rejected = true;
            continue;
        };
        k[N_STAGES] = f_new;
        let scale: [f64; N] = std::array::from_fn(|i| tol.atol + y[i].norm().max(y_new[i].norm()) * tol.rtol);
        let mut err5 = 0.0;
        let mut err3 = 0.0;
        for i in 0..N {
            let mut e5 = Complex64::new(0.0, 0.0);
            let mut e3 = Complex64::new(0.0, 0.0);
            for j in 0..=N_STAGES {
                e5 += E5[j] * k[j][i];
                e3 += E3[j] * k[j][i];
            }
            err5 += (e5.norm() / scale[i]).powi(2);
            err3 += (e3.norm() / scale[i]).powi(2);
        }
        let denom = err5 + 0.01 * err3;
        let error = if denom > 0.0 {
            step.abs() * err5 / (denom * N as f64).sqrt()
        } else {
            0.0
        };
        if error <= 1.0 {
            let mut factor = if error == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * error.powf(ERROR_EXPONENT)).min(MAX_FACTOR)
            };
            if rejected {
                factor = factor.min(1.0);
            }
            t = t_new;
            y = y_new;
            fy = f_new;
            h = step.abs() * factor;
            rejected = false;
        } else {
            h = step.abs() * (SAFETY * error.powf(ERROR_EXPONENT)).max(MIN_FACTOR);
            rejected = true;
        }
    }
    Ok(y)
}
