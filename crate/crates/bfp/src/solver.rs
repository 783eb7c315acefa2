use hhk_core::Error;
use serde::Serialize;

use crate::grid::GridSpec;
use crate::linear::{solve_linear, Stencil};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    Zero,
    BcHarmonicExtension,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub init: Init,
    /// Initial Newton step length; halved until the residual decreases.
    pub damping: f64,
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { init: Init::BcHarmonicExtension, damping: 1.0, tol: 1e-8, max_iters: 50 }
    }
}

/// Smallest accepted step length.
pub const DAMPING_FLOOR: f64 = 1.0 / (1u64 << 20) as f64;

#[derive(Debug, Clone)]
pub struct GridSolution {
    pub spec: GridSpec,
    pub u: Vec<f64>,
    pub residual_norm: f64,
    pub newton_iters: usize,
    /// Residual max-norm of every accepted iterate, starting with the initial one.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("{error}")]
pub struct SolveFailure {
    pub error: Error,
    pub best: Box<GridSolution>,
}

/// `D_tt e^U + D_xx U + D_yy U` at every node (zero on the boundary) and its
/// max-norm over interior nodes.
pub fn discrete_residual(spec: &GridSpec, u: &[f64]) -> (Vec<f64>, f64) {
    let n = spec.n;
    let (it2, ix2, iy2) = (spec.h(0).powi(-2), spec.h(1).powi(-2), spec.h(2).powi(-2));
    let e: Vec<f64> = u.iter().map(|x| x.exp()).collect();
    let mut r = vec![0.0; u.len()];
    let mut max: f64 = 0.0;
    for i in 1..n - 1 {
        for j in 1..n - 1 {
            for k in 1..n - 1 {
                let p = spec.idx(i, j, k);
                let st = n * n;
                let v = (e[p + st] - 2.0 * e[p] + e[p - st]) * it2
                    + (u[p + n] - 2.0 * u[p] + u[p - n]) * ix2
                    + (u[p + 1] - 2.0 * u[p] + u[p - 1]) * iy2;
                r[p] = v;
                max = max.max(v.abs());
            }
        }
    }
    (r, max)
}

fn interior(spec: &GridSpec) -> Vec<usize> {
    let n = spec.n;
    let mut out = Vec::with_capacity((n - 2).pow(3));
    for i in 1..n - 1 {
        for j in 1..n - 1 {
            for k in 1..n - 1 {
                out.push(spec.idx(i, j, k));
            }
        }
    }
    out
}

/// Jacobian of the discrete operator on interior unknowns, with `t`-weights
/// `w` (`e^U` for Newton, all ones for the Laplacian).
fn jacobian(spec: &GridSpec, w: &[f64]) -> Stencil {
    let n = spec.n;
    let m = n - 2;
    let st = n * n;
    let (it2, ix2, iy2) = (spec.h(0).powi(-2), spec.h(1).powi(-2), spec.h(2).powi(-2));
    let nodes = interior(spec);
    let mut diag = Vec::with_capacity(nodes.len());
    let mut t_lo = Vec::with_capacity(nodes.len());
    let mut t_hi = Vec::with_capacity(nodes.len());
    for &p in &nodes {
        diag.push(-2.0 * w[p] * it2 - 2.0 * ix2 - 2.0 * iy2);
        t_lo.push(w[p - st] * it2);
        t_hi.push(w[p + st] * it2);
    }
    Stencil { m, diag, t_lo, t_hi, cx: ix2, cy: iy2 }
}

/// Solves the linear Laplace problem with the grid's boundary values.
pub fn harmonic_extension(spec: &GridSpec, bc: &[f64]) -> hhk_core::Result<Vec<f64>> {
    let ones = vec![1.0; spec.len()];
    let a = jacobian(spec, &ones);
    let mut u = bc.to_vec();
    let (r, _) = laplacian(spec, &u);
    let nodes = interior(spec);
    let rhs: Vec<f64> = nodes.iter().map(|&p| -r[p]).collect();
    let x = solve_linear(&a, &rhs)?;
    for (q, &p) in nodes.iter().enumerate() {
        u[p] += x[q];
    }
    Ok(u)
}

fn laplacian(spec: &GridSpec, u: &[f64]) -> (Vec<f64>, f64) {
    let n = spec.n;
    let (it2, ix2, iy2) = (spec.h(0).powi(-2), spec.h(1).powi(-2), spec.h(2).powi(-2));
    let st = n * n;
    let mut r = vec![0.0; u.len()];
    let mut max: f64 = 0.0;
    for p in interior(spec) {
        let v = (u[p + st] - 2.0 * u[p] + u[p - st]) * it2
            + (u[p + n] - 2.0 * u[p] + u[p - n]) * ix2
            + (u[p + 1] - 2.0 * u[p] + u[p - 1]) * iy2;
        r[p] = v;
        max = max.max(v.abs());
    }
    (r, max)
}

/// Damped Newton iteration for the elliptic Toda equation.
pub fn solve(spec: &GridSpec, opts: &SolveOptions) -> Result<GridSolution, SolveFailure> {
    let fail = |error: Error, best: GridSolution| SolveFailure { error, best: Box::new(best) };
    let empty = |spec: &GridSpec| GridSolution {
        spec: spec.clone(),
        u: vec![0.0; spec.len()],
        residual_norm: f64::INFINITY,
        newton_iters: 0,
        history: Vec::new(),
    };
    if !(opts.tol > 0.0) || !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(fail(Error::Invalid("tol must be positive and damping in (0, 1]".into()), empty(spec)));
    }
    let bc = spec.boundary_values().map_err(|e| fail(e, empty(spec)))?;
    let mut u = match opts.init {
        Init::Zero => bc,
        Init::BcHarmonicExtension => harmonic_extension(spec, &bc).map_err(|e| fail(e, empty(spec)))?,
    };
    let (mut r, mut norm) = discrete_residual(spec, &u);
    let mut sol = GridSolution { spec: spec.clone(), u: Vec::new(), residual_norm: norm, newton_iters: 0, history: vec![norm] };
    let nodes = interior(spec);
    while !(norm < opts.tol) {
        if !norm.is_finite() {
            sol.u = u;
            return Err(fail(Error::NoConvergence("residual is not finite".into()), sol));
        }
        if sol.newton_iters >= opts.max_iters {
            sol.u = u;
            return Err(fail(
                Error::NoConvergence(format!("{} Newton iterations, residual {norm:.3e}", opts.max_iters)),
                sol,
            ));
        }
        let w: Vec<f64> = u.iter().map(|x| x.exp()).collect();
        let a = jacobian(spec, &w);
        let rhs: Vec<f64> = nodes.iter().map(|&p| -r[p]).collect();
        let du = match solve_linear(&a, &rhs) {
            Ok(d) => d,
            Err(e) => {
                sol.u = u;
                return Err(fail(e, sol));
            }
        };
        let mut step = opts.damping;
        loop {
            let mut trial = u.clone();
            for (q, &p) in nodes.iter().enumerate() {
                trial[p] += step * du[q];
            }
            let (tr, tn) = discrete_residual(spec, &trial);
            if tn < norm {
                u = trial;
                r = tr;
                norm = tn;
                break;
            }
            step *= 0.5;
            if step < DAMPING_FLOOR {
                sol.u = u;
                return Err(fail(
                    Error::NoConvergence(format!("damping floor reached at residual {norm:.3e}")),
                    sol,
                ));
            }
        }
        sol.newton_iters += 1;
        sol.residual_norm = norm;
        sol.history.push(norm);
    }
    sol.u = u;
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Boundary;
    use hhk_core::{Expr, Params};

    fn spec(e: Expr, n: usize) -> GridSpec {
        GridSpec::new([[1.0, 2.0], [-0.5, 0.5], [-0.5, 0.5]], n, Boundary::Expr { expr: e, params: Params::new() })
            .unwrap()
    }

    #[test]
    fn zero_is_a_solution() {
        let s = spec(Expr::zero(), 7);
        let (r, m) = discrete_residual(&s, &vec![0.0; s.len()]);
        assert!(r.iter().all(|x| *x == 0.0) && m == 0.0);
        let sol = solve(&s, &SolveOptions::default()).unwrap();
        assert!(sol.newton_iters <= 1);
        assert!(sol.u.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn quadratic_is_exact() {
        let (x, y) = (Expr::coord(1), Expr::coord(2));
        let s = spec(x.square() - y.square(), 9);
        let u = s.sample(&(x.square() - y.square()), &Params::new()).unwrap();
        assert!(discrete_residual(&s, &u).1 < 1e-11);
        let bumped: Vec<f64> = u
            .iter()
            .enumerate()
            .map(|(p, v)| {
                let (i, j, k) = s.ijk(p);
                v + if s.is_boundary(i, j, k) { 0.0 } else { 0.1 * s.coord(1, j).sin() }
            })
            .collect();
        assert!(discrete_residual(&s, &bumped).1 > 1e-3);
    }

    #[test]
    fn newton_from_zero_descends() {
        let (t, x) = (Expr::coord(0), Expr::coord(1));
        let s = spec(t.ln() * 0.5 + x * 0.3, 9);
        let opts = SolveOptions { init: Init::Zero, ..Default::default() };
        let sol = solve(&s, &opts).unwrap();
        assert!(sol.history.windows(2).all(|w| w[1] < w[0]));
        assert!(sol.residual_norm < 1e-8);
    }
}
