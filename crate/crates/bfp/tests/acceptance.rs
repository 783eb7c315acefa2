use std::process::ExitCode;
use std::time::Instant;

use hhk_bfp::{solve, Boundary, GridSolution, GridSpec, Init, SolveOptions};
use hhk_core::{Expr, Params};

fn spec(e: &Expr, bounds: [[f64; 2]; 3], n: usize) -> GridSpec {
    GridSpec::new(bounds, n, Boundary::Expr { expr: e.clone(), params: Params::new() }).unwrap()
}

fn max_err(sol: &GridSolution, e: &Expr) -> f64 {
    let exact = sol.spec.sample(e, &Params::new()).unwrap();
    exact.iter().zip(&sol.u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn main() -> ExitCode {
    let start = Instant::now();
    let (x, y) = (Expr::coord(1), Expr::coord(2));
    let quad = x.square() - y.square();
    let s = spec(&quad, [[1.0, 2.0], [-1.0, 1.0], [-1.0, 1.0]], 17);
    let sol = solve(&s, &SolveOptions { init: Init::Zero, ..Default::default() }).unwrap();
    let (qerr, qiters) = (max_err(&sol, &quad), sol.newton_iters);

    let harm = x.exp() * y.cos();
    let errs: Vec<f64> = [9, 17, 33]
        .iter()
        .map(|&n| max_err(&solve(&spec(&harm, [[1.0, 2.0], [0.0, 1.0], [0.0, 1.0]], n), &SolveOptions::default()).unwrap(), &harm))
        .collect();
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let secs = start.elapsed().as_secs_f64();

    let pass = qerr < 1e-10 && qiters <= 5 && orders.iter().all(|o| (1.6..=2.4).contains(o)) && secs < 60.0;
    println!(
        "{} 8: x^2-y^2 on 17^3: error {qerr:.1e} in {qiters} Newton iterations; e^x cos y errors {:.2e}/{:.2e}/{:.2e}, orders {:.3}/{:.3}; {secs:.1}s",
        if pass { "PASS" } else { "FAIL" },
        errs[0],
        errs[1],
        errs[2],
        orders[0],
        orders[1]
    );
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
