//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! with status 1 when any criterion fails.

mod common;

use std::time::{Duration, Instant};

use common::quadrature::reference;
use common::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use sturmian::formal_powers::build_formal_powers;
use sturmian::liouville::compute_rho;
use sturmian::moments::trig_moments;
use sturmian::oracle::{self, OracleConfig};
use sturmian::solution::{SolutionSample, SolverConfig, SolverState};
use sturmian::spectrum::{compute_spectrum, default_tau_max, Method, SearchConfig};
use sturmian::{Complex64, Grid, SampledFunction};

type Check = Result<String, String>;

struct Line {
    name: &'static str,
    passed: bool,
    detail: String,
    elapsed: Duration,
}

fn run(name: &'static str, limit: Option<f64>, check: impl FnOnce() -> Check) -> Line {
    let start = Instant::now();
    let outcome = check();
    let elapsed = start.elapsed();
    let over = limit.is_some_and(|l| elapsed.as_secs_f64() > l);
    let (mut passed, mut detail) = match outcome {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    if over {
        passed = false;
        detail = format!("{detail}; runtime over {} s", limit.unwrap());
    }
    let line = Line {
        name,
        passed,
        detail,
        elapsed,
    };
    println!(
        "{} {:<44} {:>8.2} s  {}",
        if line.passed { "PASS" } else { "FAIL" },
        line.name,
        line.elapsed.as_secs_f64(),
        line.detail
    );
    line
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

// 1. fitted coefficients of Example 1
fn example_one_coefficients() -> Check {
    let (problem, _) = ex1();
    let s = SolverState::build(&problem, ex1_config()).map_err(err)?;
    let want_a = [1.0, -1.5, -0.75, 0.75];
    let want_b = [0.5, -0.75];
    let mut worst: f64 = 0.0;
    for (n, w) in want_a.iter().enumerate() {
        worst = worst.max((s.fit.a[n] - w).norm());
    }
    for (n, w) in want_b.iter().enumerate() {
        worst = worst.max((s.fit.b[n + 1] - w).norm());
    }
    let higher = s.fit.a[want_a.len()..]
        .iter()
        .chain(&s.fit.b[want_b.len() + 1..])
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    ensure(
        worst <= 1e-9 && higher <= 1e-8,
        format!(
            "max |Δ| = {worst:.2e} (≤ 1e-9), max higher = {higher:.2e} (≤ 1e-8), N_fit = {}",
            s.fit.n_fit
        ),
    )
}

// 2. eigenvalues of Example 1
fn example_one_eigenvalues() -> Check {
    let (problem, bc) = ex1();
    let s = SolverState::build(&problem, ex1_config()).map_err(err)?;
    let search = SearchConfig {
        omega_min: 1.0,
        omega_max: 101.0,
        ..SearchConfig::default()
    };
    let report = compute_spectrum(&problem, &s, &bc, &search).map_err(err)?;
    let exact = oracle::exact_roots_ex1(1.0, 101.0);
    let found: Vec<f64> = report.spectrum.entries.iter().map(|e| e.omega.re).collect();
    if found.len() != exact.len() {
        return Err(format!("found {} roots, expected {}", found.len(), exact.len()));
    }
    let worst = found
        .iter()
        .zip(&exact)
        .map(|(w, x)| (w - x).abs() / x)
        .fold(0.0, f64::max);
    ensure(
        worst <= 1e-10,
        format!("{} roots, max rel err {worst:.2e} (≤ 1e-10)", found.len()),
    )
}

/// For each reference value, the relative distance to the nearest candidate.
fn nearest(reference: &[Complex64], candidates: &[Complex64]) -> Vec<f64> {
    reference
        .iter()
        .map(|r| candidates.iter().map(|c| rel(*c, *r)).fold(f64::INFINITY, f64::min))
        .collect()
}

// 3. Bessel-type Example 2
fn example_two(reference: &[Complex64]) -> Check {
    let (problem, bc) = ex2();
    let s = SolverState::build(&problem, endpoint()).map_err(err)?;
    let search = SearchConfig {
        omega_max: 200.0,
        tau_max: default_tau_max(&problem).map_err(err)?,
        ..SearchConfig::default()
    };
    let report = compute_spectrum(&problem, &s, &bc, &search).map_err(err)?;
    let ours: Vec<Complex64> = report
        .spectrum
        .entries
        .iter()
        .filter(|e| e.method != Method::Scan)
        .map(|e| e.lambda)
        .collect();
    let positive: Vec<Complex64> = reference
        .iter()
        .map(|w| w * w)
        .filter(|l| l.re > 0.0 && l.re <= 200.0 * 200.0)
        .collect();
    let matched = nearest(&positive, &ours).into_iter().filter(|e| *e <= 1e-8).count();
    let negative_ref: Vec<Complex64> = reference.iter().map(|w| w * w).filter(|l| l.re < 0.0).collect();
    let negative_ours: Vec<_> = report.spectrum.entries.iter().filter(|e| e.lambda.re < 0.0).collect();
    let negative_ok = negative_ref.len() == 1
        && negative_ours.len() == 1
        && negative_ours[0].method == Method::Newton
        && negative_ours[0].omega.re == 0.0
        && rel(negative_ours[0].lambda, negative_ref[0]) <= 1e-8;
    let worst = nearest(&positive, &ours).into_iter().fold(0.0, f64::max);
    ensure(
        matched >= 85 && negative_ok,
        format!(
            "{matched}/{} positive λ ≤ 200² matched at 1e-8 (need ≥ 85, worst {worst:.2e}); negative λ = {} ({})",
            positive.len(),
            negative_ours
                .first()
                .map_or("none".to_string(), |e| format!("{:.12}", e.lambda.re)),
            if negative_ok { "ok" } else { "mismatch" }
        ),
    )
}

// 4. Example 3
fn example_three(reference: &[Complex64]) -> Check {
    let (problem, bc) = ex3();
    let s = SolverState::build(&problem, endpoint()).map_err(err)?;
    let search = SearchConfig {
        omega_max: 60.0,
        tau_max: default_tau_max(&problem).map_err(err)?,
        max_count: Some(50),
        ..SearchConfig::default()
    };
    let report = compute_spectrum(&problem, &s, &bc, &search).map_err(err)?;
    if report.spectrum.len() < 50 || reference.len() < 50 {
        return Err(format!(
            "{} eigenvalues found, {} in reference",
            report.spectrum.len(),
            reference.len()
        ));
    }
    let worst = report
        .spectrum
        .entries
        .iter()
        .zip(reference)
        .map(|(e, w)| rel(e.lambda, w * w))
        .fold(0.0, f64::max);
    ensure(worst <= 1e-6, format!("first 50 λ, max rel err {worst:.2e} (≤ 1e-6)"))
}

// 5. Example 4
fn example_four(reference: &[Complex64]) -> Check {
    let (problem, bc) = ex4();
    let s = SolverState::build(&problem, endpoint()).map_err(err)?;
    let search = SearchConfig {
        rect: Some(ex4_rect()),
        ..SearchConfig::default()
    };
    let report = compute_spectrum(&problem, &s, &bc, &search).map_err(err)?;
    let ours = report.spectrum.lambdas();
    let theirs: Vec<Complex64> = reference.iter().map(|w| w * w).collect();
    let dist = |a: &[Complex64], b: &[Complex64]| {
        a.iter()
            .map(|x| b.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    let (fwd, back) = (dist(&theirs, &ours), dist(&ours, &theirs));
    let winding = report
        .windings
        .iter()
        .map(|w| (w - w.round()).abs())
        .fold(0.0, f64::max);
    let complex = ours.iter().filter(|l| l.im.abs() > 1e-6).count();
    ensure(
        ours.len() == theirs.len() && fwd <= 1e-6 && back <= 1e-6 && winding < 0.05 && complex > 0,
        format!(
            "{} found / {} reference ({complex} non-real), max |Δλ| {:.2e} (≤ 1e-6), max winding deviation {winding:.1e} over {} contours (< 0.05)",
            ours.len(),
            theirs.len(),
            fwd.max(back),
            report.windings.len()
        ),
    )
}

// 6. property suite
fn formal_powers_closed_form() -> Check {
    let problem = exponential();
    let grid = Grid::new(0.0, 2.0, 4001).map_err(err)?;
    let c = problem.sample(&grid).map_err(err)?;
    let g = SampledFunction::from_fn(grid, |y| Complex64::new(y.exp(), 0.0));
    let fp = build_formal_powers(&g, &c, 1.0, 2).map_err(err)?;
    let (rho, _) = compute_rho(&c).map_err(err)?;
    let phi = [
        |y: f64| (1.5 * y).exp() * ((-3.0f64).exp() - (-3.0 * y).exp()) / 3.0,
        |y: f64| (1.5 * y).exp() * 2.0 / 9.0 * ((3.0 * (1.0 - y)).exp() + 3.0 * (y - 1.0) - 1.0),
    ];
    let mut worst: f64 = 0.0;
    for (n, f) in phi.iter().enumerate() {
        let want = SampledFunction::from_fn(grid, |y| Complex64::new(f(y), 0.0));
        let diff = (0..grid.len())
            .map(|i| (rho[i] * fp.phi[n + 1][i] - want[i]).norm())
            .fold(0.0, f64::max);
        worst = worst.max(diff / want.sup_norm());
    }
    ensure(worst <= 1e-10, format!("n = 1, 2: max rel err {worst:.2e} (≤ 1e-10)"))
}

fn states() -> Result<Vec<(&'static str, SolverState)>, String> {
    let (p1, _) = ex1();
    let (p3, _) = ex3();
    Ok(vec![
        ("ex1 symmetric", SolverState::build(&p1, ex1_config()).map_err(err)?),
        ("ex1 endpoint", SolverState::build(&p1, endpoint()).map_err(err)?),
        ("ex3 endpoint", SolverState::build(&p3, endpoint()).map_err(err)?),
    ])
}

fn formal_powers_at_origin(states: &[(&str, SolverState)]) -> Check {
    let mut nonzero = 0;
    let mut product: f64 = 0.0;
    for (_, s) in states {
        let i0 = s.grid().node_index(s.map.y0).ok_or("y₀ off the grid")?;
        let fp = &s.formal_powers;
        for k in 1..fp.len() {
            nonzero += usize::from(fp.phi[k][i0] != c(0.0)) + usize::from(fp.psi[k][i0] != c(0.0));
        }
        for i in 0..s.grid().len() {
            product = product.max((fp.phi[0][i] * fp.psi[0][i] - 1.0).norm());
        }
    }
    ensure(
        nonzero == 0 && product <= 4.0 * f64::EPSILON,
        format!("{nonzero} nonzero Φₖ(y₀), Ψₖ(y₀); max |Φ₀Ψ₀ - 1| = {product:.1e} (≤ 4 ulp)"),
    )
}

fn initial_values(states: &[(&str, SolverState)]) -> Check {
    let mut worst: f64 = 0.0;
    for (_, s) in states {
        let y0 = s.map.y0;
        let rho0 = s.map.rho.interpolate(y0).map_err(err)?;
        let drho0 = s.map.rho_log_deriv.interpolate(y0).map_err(err)? * rho0;
        let p0 = s.coefficients.p.interpolate(y0).map_err(err)?;
        let r0 = s.coefficients.r.interpolate(y0).map_err(err)?;
        let root = (r0 / p0).sqrt();
        for w in [0.7, 3.0, 25.0] {
            let v = s.eval_solutions(c(w), y0).map_err(err)?;
            let want = [
                1.0 / rho0,
                c(0.0),
                -drho0 / (rho0 * rho0) + s.h / rho0 * root,
                root / rho0,
            ];
            for (got, want) in [v.v[0], v.v[1], v.dv[0], v.dv[1]].into_iter().zip(want) {
                worst = worst.max((got - want).norm() / (1.0 + want.norm()));
            }
            let n = s.normalized_pair(c(w), y0).map_err(err)?;
            for (got, want) in [n.v[0], n.dv[0], n.v[1], n.dv[1]].into_iter().zip([1.0, 0.0, 0.0, 1.0]) {
                worst = worst.max((got - want).norm());
            }
        }
    }
    ensure(worst <= 1e-12, format!("max err {worst:.2e} (≤ 1e-12)"))
}

fn wronskian(states: &[(&str, SolverState)]) -> Check {
    let mut worst: f64 = 0.0;
    for (_, s) in states {
        let p0 = s.coefficients.p.interpolate(s.map.y0).map_err(err)?;
        for w in [1.0, 10.0, 40.0] {
            for i in 0..s.grid().len() {
                let n = s.normalized_pair(c(w), s.grid().node(i)).map_err(err)?;
                let wr = s.coefficients.p[i] * (n.v[0] * n.dv[1] - n.dv[0] * n.v[1]);
                worst = worst.max(rel(wr, p0));
            }
        }
    }
    ensure(
        worst <= 1e-6,
        format!("ω ∈ {{1, 10, 40}}, max rel deviation {worst:.2e} (≤ 1e-6)"),
    )
}

fn omega_derivatives(states: &[(&str, SolverState)]) -> Check {
    let fields = |s: &SolutionSample| [s.v[0], s.v[1], s.dv[0], s.dv[1]];
    let derivs = |s: &SolutionSample| [s.v_omega[0], s.v_omega[1], s.dv_omega[0], s.dv_omega[1]];
    let mut worst: f64 = 0.0;
    let mut points = 0;
    for (_, s) in states.iter().filter(|(n, _)| *n != "ex1 endpoint") {
        let (a, b) = (s.grid().a(), s.grid().b());
        for w in [1.0f64, 5.0, 25.0] {
            for y in [a + 0.25 * (b - a), a + 0.5 * (b - a), a + 0.8 * (b - a)] {
                points += 1;
                let step = 1e-5 * w.max(1.0);
                let plus = s.normalized_pair(c(w + step), y).map_err(err)?;
                let minus = s.normalized_pair(c(w - step), y).map_err(err)?;
                let at = s.normalized_pair(c(w), y).map_err(err)?;
                for k in 0..4 {
                    let fd = (fields(&plus)[k] - fields(&minus)[k]) / (2.0 * step);
                    let scale = derivs(&at)[k].norm().max(fields(&at)[k].norm()).max(1e-3);
                    worst = worst.max((fd - derivs(&at)[k]).norm() / scale);
                }
            }
        }
    }
    ensure(
        worst <= 1e-6,
        format!("{points} points, max rel err {worst:.2e} (≤ 1e-6)"),
    )
}

fn moments_vs_quadrature() -> Check {
    let mut rng = StdRng::seed_from_u64(0x5eed_0f7a11);
    let mut worst: f64 = 0.0;
    for case in 0..200 {
        let k = rng.random_range(0..=20usize);
        let omega = Complex64::from_polar(
            rng.random_range(0.0..100.0f64),
            rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
        );
        let omega = if omega.norm() < 1e-8 { c(1e-3) } else { omega };
        let x = if case % 4 == 3 {
            Complex64::from_polar(rng.random_range(0.0..2.0), rng.random_range(-1.0..1.0))
        } else {
            c(rng.random_range(-2.0..2.0))
        };
        let (ic, is) = trig_moments(omega, x, k);
        let (wc, ws) = reference(k, omega, x);
        worst = worst.max(rel(ic[k], wc)).max(rel(is[k], ws));
    }
    ensure(worst <= 1e-12, format!("200 cases, max rel err {worst:.2e} (≤ 1e-12)"))
}

fn h_invariance() -> Check {
    let (problem, bc) = ex1();
    let search = SearchConfig {
        omega_min: 1.0,
        omega_max: 101.0,
        ..SearchConfig::default()
    };
    let base = SolverState::build(&problem, ex1_config()).map_err(err)?;
    // g(y₀) = √(2/3), so raising g'(y₀) by one raises g'/g by √(3/2).
    let config = SolverConfig {
        g_slope: Some(c(5.0 / 3.0 + 1.5f64.sqrt())),
        ..ex1_config()
    };
    let moved = SolverState::build(&problem, config).map_err(|e| format!("g'(y₀) + 1: {e}"))?;
    let a = compute_spectrum(&problem, &base, &bc, &search).map_err(err)?;
    let b = compute_spectrum(&problem, &moved, &bc, &search).map_err(err)?;
    if a.spectrum.len() != b.spectrum.len() {
        return Err(format!("{} vs {} eigenvalues", a.spectrum.len(), b.spectrum.len()));
    }
    let worst = a
        .spectrum
        .entries
        .iter()
        .zip(&b.spectrum.entries)
        .map(|(x, y)| rel(y.lambda, x.lambda))
        .fold(0.0, f64::max);
    ensure(
        worst <= 1e-8,
        format!("h {} → {}, max rel shift {worst:.2e} (≤ 1e-8)", base.h, moved.h),
    )
}

fn quadrature_order() -> Check {
    let error = |m: usize| -> Result<f64, String> {
        let g = Grid::new(0.0, 1.0, m).map_err(err)?;
        let f = SampledFunction::from_fn(g, |y| c(y.exp()));
        let integral = f.cumulative_integral(0).map_err(err)?;
        Ok(g.nodes()
            .enumerate()
            .map(|(i, y)| (integral[i].re - (y.exp() - 1.0)).abs())
            .fold(0.0, f64::max))
    };
    let (coarse, fine) = (error(11)?, error(21)?);
    let order = (coarse / fine).log2();
    ensure(order >= 6.0, format!("h = 0.1 → 0.05: order {order:.2} (≥ 6)"))
}

/// Reference spectra are computed outside the timed criteria.
fn reference_run<T>(name: &str, f: impl FnOnce() -> sturmian::Result<Vec<T>>) -> sturmian::Result<Vec<T>> {
    let start = Instant::now();
    let out = f();
    match &out {
        Ok(v) => println!(
            "     reference for {name}: {} roots in {:.2} s",
            v.len(),
            start.elapsed().as_secs_f64()
        ),
        Err(e) => println!("     reference for {name} failed: {e}"),
    }
    out
}

fn main() {
    println!("acceptance suite");
    let mut lines = Vec::new();
    lines.push(run("1 example 1 coefficients", Some(10.0), example_one_coefficients));
    lines.push(run("2 example 1 eigenvalues", Some(30.0), example_one_eigenvalues));

    let config = OracleConfig::default();
    let (p2, bc2) = ex2();
    let ex2_ref = reference_run("example 2", || {
        default_tau_max(&p2).and_then(|tau| oracle::eigenvalues_real(&p2, &bc2, 200.0, tau, 0.5, &config))
    });
    lines.push(run("3 example 2 vs reference", Some(60.0), || {
        example_two(&ex2_ref.map_err(err)?)
    }));

    let (p3, bc3) = ex3();
    let ex3_ref = reference_run("example 3", || {
        default_tau_max(&p3).and_then(|tau| oracle::eigenvalues_real(&p3, &bc3, 60.0, tau, 0.5, &config))
    });
    lines.push(run("4 example 3 vs reference", Some(60.0), || {
        example_three(&ex3_ref.map_err(err)?)
    }));

    let (p4, bc4) = ex4();
    let ex4_ref = reference_run("example 4", || {
        oracle::eigenvalues_in_rect(&p4, &bc4, ex4_rect(), &config)
    });
    lines.push(run("5 example 4 argument principle", Some(120.0), || {
        let roots: Vec<Complex64> = ex4_ref.map_err(err)?.into_iter().map(|(w, _)| w).collect();
        example_four(&roots)
    }));

    let suite = Instant::now();
    let states = states();
    let with_states = |f: fn(&[(&str, SolverState)]) -> Check| match &states {
        Ok(s) => f(s),
        Err(e) => Err(e.clone()),
    };
    let props = [
        run("6a ρΦₙ = φₙ closed forms", None, formal_powers_closed_form),
        run("6b formal powers at y₀", None, || {
            with_states(formal_powers_at_origin)
        }),
        run("6c initial values at y₀", None, || with_states(initial_values)),
        run("6d Wronskian", None, || with_states(wronskian)),
        run("6e ∂ω vs central differences", None, || {
            with_states(omega_derivatives)
        }),
        run("6f trig moments vs quadrature", None, moments_vs_quadrature),
        run("6g h-invariance, g'(y₀) + 1", None, h_invariance),
        run("6h quadrature order on e^y", None, quadrature_order),
    ];
    let elapsed = suite.elapsed().as_secs_f64();
    let failed: Vec<&str> = props.iter().filter(|l| !l.passed).map(|l| l.name).collect();
    let ok = failed.is_empty() && elapsed <= 300.0;
    println!(
        "{} {:<44} {:>8.2} s  {}",
        if ok { "PASS" } else { "FAIL" },
        "6 property suite",
        elapsed,
        if failed.is_empty() {
            "all properties hold (≤ 300 s)".to_string()
        } else {
            format!("failing: {}", failed.join(", "))
        }
    );
    lines.extend(props);

    let criteria_failed = lines.iter().take(5).filter(|l| !l.passed).count() + usize::from(!ok);
    println!("{} of 6 criteria passed", 6 - criteria_failed);
    if criteria_failed > 0 {
        std::process::exit(1);
    }
}
