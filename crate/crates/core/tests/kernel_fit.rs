mod common;

use common::*;
use sturmian::kernel_fit::{build_basis, KernelFitter};
use sturmian::liouville::MapMode;
use sturmian::solution::SolverConfig;
use sturmian::{Complex64, SlProblem};

fn free() -> SlProblem {
    SlProblem::new(0.0, 1.0, "1", "0", "1").unwrap()
}

#[test]
fn example_one_coefficients_are_exact() {
    let (problem, _) = ex1();
    let s = build(&problem, ex1_config());
    assert!((s.h - c(2.0)).norm() < 1e-12, "h = {}", s.h);
    let a = [1.0, -1.5, -0.75, 0.75];
    let b = [1.0, 0.5, -0.75];
    for (n, want) in a.iter().enumerate() {
        assert!((s.fit.a[n] - want).norm() <= 1e-9, "a{n} = {}", s.fit.a[n]);
    }
    for (n, want) in b.iter().enumerate() {
        assert!((s.fit.b[n] - want).norm() <= 1e-9, "b{n} = {}", s.fit.b[n]);
    }
    for (n, v) in s.fit.a.iter().enumerate().skip(a.len()) {
        assert!(v.norm() <= 1e-9, "a{n} = {v}");
    }
    for (n, v) in s.fit.b.iter().enumerate().skip(b.len()) {
        assert!(v.norm() <= 1e-9, "b{n} = {v}");
    }
}

#[test]
fn example_one_targets_in_closed_form() {
    let (problem, _) = ex1();
    let s = build(&problem, ex1_config());
    let grid = *s.grid();
    for i in (0..grid.len()).step_by(50) {
        let x = grid.node(i) - 1.5;
        let want = 1.0 + x / (2.0 * (x + 1.0));
        assert!((s.targets.g1[i] - want).norm() < 1e-10, "G1 at y = {}", grid.node(i));
    }
}

#[test]
fn targets_are_anchored_and_differ_by_half_h() {
    for (problem, config) in [
        (ex1().0, ex1_config()),
        (ex3().0, endpoint()),
        (exponential(), SolverConfig::default()),
    ] {
        let s = build(&problem, config);
        let i0 = s.grid().node_index(s.map.y0).expect("y0 on the grid");
        assert!((s.targets.g1[i0] - s.h / 2.0).norm() <= 1e-15 * (1.0 + s.h.norm()));
        assert_eq!(s.targets.g2[i0], c(0.0));
        for i in 0..s.grid().len() {
            let (g1, g2) = (s.targets.g1[i], s.targets.g2[i]);
            // one rounding in forming h/2 + G₂
            assert!((g1 - g2 - s.h / 2.0).norm() <= f64::EPSILON * (g1.norm() + g2.norm()));
        }
    }
}

#[test]
fn free_problem_fits_to_zero() {
    let s = build(&free(), endpoint());
    assert_eq!(s.h, c(0.0));
    assert!(s.fit.a.iter().chain(&s.fit.b).all(|v| v.norm() == 0.0));
    assert_eq!((s.fit.eps1, s.fit.eps2), (0.0, 0.0));
}

#[test]
fn free_problem_basis_is_binomial() {
    let s = build(&free(), endpoint());
    let basis = build_basis(&s.map, &s.formal_powers, 10).unwrap();
    for m in 1..=10 {
        for i in (0..s.grid().len()).step_by(400) {
            let y = s.grid().node(i);
            let want = 2f64.powi(m as i32 - 1) * y.powi(m as i32);
            assert!((basis.c[m][i] - want).norm() <= 1e-12 * (1.0 + want.abs()));
            assert!((basis.s[m][i] - want).norm() <= 1e-12 * (1.0 + want.abs()));
        }
    }
}

#[test]
fn basis_structure() {
    for (problem, config) in [(ex1().0, ex1_config()), (ex3().0, endpoint()), (ex4().0, endpoint())] {
        let s = build(&problem, config);
        let basis = build_basis(&s.map, &s.formal_powers, 20).unwrap();
        let i0 = s.grid().node_index(s.map.y0).unwrap();
        for i in 0..s.grid().len() {
            let rho_g = s.map.rho[i] * s.particular.g[i];
            assert!((basis.c[0][i] - rho_g).norm() <= 1e-14 * rho_g.norm());
            let want = rho_g * s.map.l[i];
            assert!((basis.s[1][i] - want).norm() <= 1e-14 * (1.0 + want.norm()));
        }
        for m in 1..=20 {
            assert_eq!(basis.s[m][i0], c(0.0), "s̃{m}(y₀)");
        }
    }
}

#[test]
fn exponential_example_fits_g2() {
    let s = build(&exponential(), SolverConfig::default());
    assert!((s.map.y0 - 1.0).abs() < 1e-12);
    for i in (0..s.grid().len()).step_by(100) {
        let want = 9.0 * s.map.l[i] / 16.0;
        assert!((s.targets.g2[i] - want).norm() < 1e-10);
    }
    assert!(s.fit.n_fit <= 20, "N_fit = {}", s.fit.n_fit);
    assert!(s.fit.eps2 <= 1e-9, "eps2 = {:e}", s.fit.eps2);
}

#[test]
fn residuals_do_not_grow_along_the_ladder() {
    let problems = [
        (ex1().0, ex1_config()),
        (ex2().0, endpoint()),
        (ex3().0, endpoint()),
        (ex4().0, endpoint()),
        (exponential(), SolverConfig::default()),
    ];
    for (problem, config) in problems {
        let s = build(&problem, config);
        let basis = build_basis(&s.map, &s.formal_powers, s.formal_powers.len() - 1).unwrap();
        let fitter = KernelFitter::new(&s.targets, &basis, s.h);
        let fits: Vec<_> = fitter.ladder().into_iter().map_while(|n| fitter.fit(n).ok()).collect();
        assert!(fits.len() >= 2);
        let floor = 1e-13 * (1.0 + s.targets.g1.sup_norm() + s.targets.g2.sup_norm());
        for w in fits.windows(2) {
            let (prev, next) = (&w[0], &w[1]);
            assert!(
                next.max_error() <= (1.1 * prev.max_error()).max(floor),
                "sup residual grew at N = {}: {:e} -> {:e}",
                next.n_fit,
                prev.max_error(),
                next.max_error()
            );
            for (p, n) in [(prev.rms1, next.rms1), (prev.rms2, next.rms2)] {
                assert!(
                    n <= p.max(floor),
                    "rms residual grew at N = {}: {p:e} -> {n:e}",
                    next.n_fit
                );
            }
        }
    }
}

#[test]
fn reconstruction_at_the_origin() {
    for (problem, config) in [(ex1().0, ex1_config()), (ex2().0, endpoint()), (ex3().0, endpoint())] {
        let s = build(&problem, config);
        let basis = build_basis(&s.map, &s.formal_powers, s.fit.n_fit).unwrap();
        let i0 = s.grid().node_index(s.map.y0).unwrap();
        let sum: Complex64 = s.fit.a.iter().zip(&basis.c).map(|(a, c)| a * c[i0]).sum();
        assert!((sum - s.fit.a[0] * basis.c[0][i0]).norm() <= 1e-14 * (1.0 + sum.norm()));
        assert!(
            (sum - s.h / 2.0).norm() <= s.fit.eps1 + 1e-15,
            "{sum} vs h/2 = {}",
            s.h / 2.0
        );
    }
}

#[test]
fn mode_is_respected() {
    let (problem, _) = ex1();
    assert_eq!(build(&problem, endpoint()).map.mode, MapMode::Endpoint);
    assert_eq!(build(&problem, endpoint()).map.y0, 1.0);
}
