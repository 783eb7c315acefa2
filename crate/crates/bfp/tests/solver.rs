use std::time::Instant;

use hhk_bfp::io::{read_grid, write_grid, GridFile};
use hhk_bfp::metric_report::{tod_grid, EdgeForm};
use hhk_bfp::{discrete_residual, solve, Boundary, GridSolution, GridSpec, Init, SolveOptions};
use hhk_core::{Error, Expr, Params};
use proptest::prelude::*;

fn spec(e: &Expr, bounds: [[f64; 2]; 3], n: usize) -> GridSpec {
    GridSpec::new(bounds, n, Boundary::Expr { expr: e.clone(), params: Params::new() }).unwrap()
}

fn max_err(sol: &GridSolution, e: &Expr) -> f64 {
    let exact = sol.spec.sample(e, &Params::new()).unwrap();
    exact.iter().zip(&sol.u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

#[test]
fn manufactured_quadratic() {
    let e = Expr::coord(1).square() - Expr::coord(2).square();
    let s = spec(&e, [[1.0, 2.0], [-1.0, 1.0], [-1.0, 1.0]], 17);
    for init in [Init::BcHarmonicExtension, Init::Zero] {
        let sol = solve(&s, &SolveOptions { init, ..Default::default() }).unwrap();
        assert!(sol.newton_iters <= 5, "{init:?}: {} iterations", sol.newton_iters);
        assert!(max_err(&sol, &e) < 1e-10, "{init:?}: error {:e}", max_err(&sol, &e));
    }
}

#[test]
fn boundary_values_are_kept() {
    let e = Expr::coord(0).ln() + Expr::coord(1) * 0.2;
    let s = spec(&e, [[1.0, 2.0], [0.0, 1.0], [0.0, 1.0]], 7);
    let sol = solve(&s, &SolveOptions::default()).unwrap();
    let exact = s.sample(&e, &Params::new()).unwrap();
    for p in 0..s.len() {
        let (i, j, k) = s.ijk(p);
        if s.is_boundary(i, j, k) {
            assert_eq!(sol.u[p], exact[p]);
        }
    }
    assert_eq!(discrete_residual(&s, &sol.u).1, sol.residual_norm);
}

#[test]
fn harmonic_convergence_is_second_order() {
    let e = Expr::coord(1).exp() * Expr::coord(2).cos();
    let start = Instant::now();
    let errs: Vec<f64> = [9, 17, 33]
        .iter()
        .map(|&n| {
            let s = spec(&e, [[1.0, 2.0], [0.0, 1.0], [0.0, 1.0]], n);
            let sol = solve(&s, &SolveOptions::default()).unwrap();
            max_err(&sol, &e)
        })
        .collect();
    let elapsed = start.elapsed().as_secs_f64();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.2..=4.8).contains(&ratio), "errors {errs:?}");
    }
    eprintln!("errors {errs:?} in {elapsed:.2}s");
}

#[test]
fn max_iters_reports_best_iterate() {
    let e = Expr::coord(1).exp() * Expr::coord(2).cos() * 2.0;
    let s = spec(&e, [[1.0, 2.0], [0.0, 1.0], [0.0, 1.0]], 7);
    let opts = SolveOptions { init: Init::Zero, max_iters: 1, tol: 1e-14, ..Default::default() };
    let f = solve(&s, &opts).unwrap_err();
    assert!(matches!(f.error, Error::NoConvergence(_)));
    assert_eq!(f.best.newton_iters, 1);
    assert!(f.best.residual_norm < f.best.history[0]);
}

#[test]
fn invalid_specs() {
    let b = || Boundary::Expr { expr: Expr::zero(), params: Params::new() };
    assert!(GridSpec::new([[0.0, 1.0], [0.0, 1.0], [0.0, 1.0]], 9, b()).is_err());
    assert!(GridSpec::new([[1.0, 2.0], [0.0, 1.0], [0.0, 1.0]], 4, b()).is_err());
    let s = spec(&Expr::zero(), [[1.0, 2.0], [0.0, 1.0], [0.0, 1.0]], 5);
    assert!(solve(&s, &SolveOptions { tol: 0.0, ..Default::default() }).is_err());
}

#[test]
fn grid_file_round_trip() {
    let e = Expr::coord(1).square() - Expr::coord(2).square();
    let s = spec(&e, [[1.0, 2.0], [-1.0, 1.0], [-1.0, 1.0]], 6);
    let sol = solve(&s, &SolveOptions::default()).unwrap();
    let g = GridFile { dims: [6; 3], bounds: s.bounds, values: sol.u.clone() };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.csv");
    write_grid(std::fs::File::create(&path).unwrap(), &g).unwrap();
    let back = read_grid(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(back, g);
    let tab = GridSpec::new(back.bounds, 6, Boundary::Table(back.values)).unwrap();
    let again = solve(&tab, &SolveOptions::default()).unwrap();
    assert_eq!(again.u, sol.u);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn accepted_steps_descend(a in -0.8f64..0.8, b in -0.8f64..0.8, c in 0.1f64..0.9) {
        let e = Expr::coord(0).ln() * c + Expr::coord(1) * a + Expr::coord(2).square() * b;
        let s = spec(&e, [[1.0, 2.0], [0.0, 1.0], [0.0, 1.0]], 7);
        let opts = SolveOptions { init: Init::Zero, ..Default::default() };
        let sol = match solve(&s, &opts) {
            Ok(s) => s,
            Err(f) => *f.best,
        };
        prop_assert!(sol.history.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn gauge_shift_keeps_circulations(seed in proptest::collection::vec(-1.0f64..1.0, 216), c in 0.1f64..0.9) {
        let e = Expr::coord(0).ln() * c + Expr::coord(1).exp() * Expr::coord(2).cos() * 0.3;
        let s = spec(&e, [[1.0, 2.0], [0.0, 1.0], [0.0, 1.0]], 6);
        let u = s.sample(&e, &Params::new()).unwrap();
        let (_, r) = discrete_residual(&s, &u);
        let sol = GridSolution { spec: s.clone(), u, residual_norm: r, newton_iters: 0, history: vec![r] };
        let tg = tod_grid(&sol, -2.0).unwrap();
        let before = tg.alpha.circulations();
        let mut shifted: EdgeForm = tg.alpha.clone();
        shifted.gauge_shift(&seed);
        let after = shifted.circulations();
        for (x, y) in before.tx.iter().chain(&before.ty).chain(&before.xy).zip(after.tx.iter().chain(&after.ty).chain(&after.xy)) {
            prop_assert!((x - y).abs() < 1e-12);
        }
        let d0 = tg.alpha.max_defect(&tg.fluxes, &s);
        let d1 = shifted.max_defect(&tg.fluxes, &s);
        prop_assert!((d0 - d1).abs() < 1e-9 * d0.max(1.0));
    }
}
