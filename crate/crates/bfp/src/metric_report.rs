//! Discrete Tod metric built from a grid potential and its finite-difference
//! curvature.

use hhk_core::curvature::bundle_from_point;
use hhk_core::metric::{from_matrix, to_matrix, Mat4, MetricPoint};
use hhk_core::report::{Check, Sci};
use hhk_core::{Error, Result, C};
use serde::Serialize;

use crate::grid::GridSpec;
use crate::solver::GridSolution;

const ZERO: C = C::new(0.0, 0.0);

/// Nodal scalar field on a grid with `dims = [nt, nx, ny]`.
#[derive(Debug, Clone)]
struct Field<'a> {
    spec: &'a GridSpec,
    v: Vec<f64>,
}

impl<'a> Field<'a> {
    fn new(spec: &'a GridSpec, v: Vec<f64>) -> Self {
        Self { spec, v }
    }

    fn step(&self, axis: usize) -> usize {
        [self.spec.n * self.spec.n, self.spec.n, 1][axis]
    }

    fn pos(&self, p: usize, axis: usize) -> usize {
        let (i, j, k) = self.spec.ijk(p);
        [i, j, k][axis]
    }

    /// First derivative, central inside and one-sided second order at the ends.
    fn d1(&self, axis: usize) -> Self {
        let (s, h, n) = (self.step(axis), self.spec.h(axis), self.spec.n);
        let f = &self.v;
        let out = (0..f.len())
            .map(|p| match self.pos(p, axis) {
                0 => (-3.0 * f[p] + 4.0 * f[p + s] - f[p + 2 * s]) / (2.0 * h),
                q if q == n - 1 => (3.0 * f[p] - 4.0 * f[p - s] + f[p - 2 * s]) / (2.0 * h),
                _ => (f[p + s] - f[p - s]) / (2.0 * h),
            })
            .collect();
        Self::new(self.spec, out)
    }

    /// Second derivative along one axis.
    fn d2(&self, axis: usize) -> Self {
        let (s, h, n) = (self.step(axis), self.spec.h(axis), self.spec.n);
        let f = &self.v;
        let h2 = h * h;
        let out = (0..f.len())
            .map(|p| match self.pos(p, axis) {
                0 => (2.0 * f[p] - 5.0 * f[p + s] + 4.0 * f[p + 2 * s] - f[p + 3 * s]) / h2,
                q if q == n - 1 => (2.0 * f[p] - 5.0 * f[p - s] + 4.0 * f[p - 2 * s] - f[p - 3 * s]) / h2,
                _ => (f[p + s] - 2.0 * f[p] + f[p - s]) / h2,
            })
            .collect();
        Self::new(self.spec, out)
    }
}

/// Edge integrals of a 1-form: `at` on t-edges, `ax` on x-edges, `ay` on
/// y-edges, each indexed by the edge's lower node.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeForm {
    pub n: usize,
    pub at: Vec<f64>,
    pub ax: Vec<f64>,
    pub ay: Vec<f64>,
}

/// Fluxes of a 2-form through plaquettes, indexed by the lower corner.
#[derive(Debug, Clone)]
pub struct Fluxes {
    pub tx: Vec<f64>,
    pub ty: Vec<f64>,
    pub xy: Vec<f64>,
}

impl EdgeForm {
    fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    pub fn zeros(n: usize) -> Self {
        let z = vec![0.0; n * n * n];
        Self { n, at: z.clone(), ax: z.clone(), ay: z }
    }

    /// Adds the edge differences of a nodal function.
    pub fn gauge_shift(&mut self, lambda: &[f64]) {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let p = self.idx(i, j, k);
                    if i + 1 < n {
                        self.at[p] += lambda[self.idx(i + 1, j, k)] - lambda[p];
                    }
                    if j + 1 < n {
                        self.ax[p] += lambda[self.idx(i, j + 1, k)] - lambda[p];
                    }
                    if k + 1 < n {
                        self.ay[p] += lambda[self.idx(i, j, k + 1)] - lambda[p];
                    }
                }
            }
        }
    }

    /// Circulations around every `tx`, `ty` and `xy` plaquette.
    pub fn circulations(&self) -> Fluxes {
        let n = self.n;
        let len = n * n * n;
        let mut f = Fluxes { tx: vec![0.0; len], ty: vec![0.0; len], xy: vec![0.0; len] };
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let p = self.idx(i, j, k);
                    if i + 1 < n && j + 1 < n {
                        f.tx[p] = self.at[p] + self.ax[self.idx(i + 1, j, k)] - self.at[self.idx(i, j + 1, k)] - self.ax[p];
                    }
                    if i + 1 < n && k + 1 < n {
                        f.ty[p] = self.at[p] + self.ay[self.idx(i + 1, j, k)] - self.at[self.idx(i, j, k + 1)] - self.ay[p];
                    }
                    if j + 1 < n && k + 1 < n {
                        f.xy[p] = self.ax[p] + self.ay[self.idx(i, j + 1, k)] - self.ax[self.idx(i, j, k + 1)] - self.ay[p];
                    }
                }
            }
        }
        f
    }

    /// Largest plaquette mismatch against `target`, divided by plaquette area.
    pub fn max_defect(&self, target: &Fluxes, spec: &GridSpec) -> f64 {
        let c = self.circulations();
        let n = self.n;
        let (ht, hx, hy) = (spec.h(0), spec.h(1), spec.h(2));
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let p = self.idx(i, j, k);
                    if i + 1 < n && j + 1 < n {
                        worst = worst.max((c.tx[p] - target.tx[p]).abs() / (ht * hx));
                    }
                    if i + 1 < n && k + 1 < n {
                        worst = worst.max((c.ty[p] - target.ty[p]).abs() / (ht * hy));
                    }
                    if j + 1 < n && k + 1 < n {
                        worst = worst.max((c.xy[p] - target.xy[p]).abs() / (hx * hy));
                    }
                }
            }
        }
        worst
    }
}

fn sci<S: serde::Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    Sci(*x).serialize(s)
}

fn sci_vec<S: serde::Serializer>(x: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    x.iter().map(|v| Sci(*v)).collect::<Vec<_>>().serialize(s)
}

#[derive(Debug, Clone, Serialize)]
pub struct GridMetricReport {
    #[serde(serialize_with = "sci")]
    pub lambda: f64,
    #[serde(serialize_with = "sci")]
    pub h_max: f64,
    pub points_evaluated: usize,
    #[serde(serialize_with = "sci")]
    pub min_abs_v: f64,
    #[serde(serialize_with = "sci")]
    pub max_abs_alpha: f64,
    /// Largest plaquette mismatch between the circulation of alpha and the
    /// flux of its prescribed exterior derivative.
    #[serde(serialize_with = "sci")]
    pub alpha_loop_defect: f64,
    #[serde(serialize_with = "sci")]
    pub max_einstein_residual: f64,
    #[serde(serialize_with = "sci")]
    pub max_scalar_deviation: f64,
    #[serde(serialize_with = "sci")]
    pub max_asd_weyl: f64,
    #[serde(serialize_with = "sci")]
    pub max_sd_weyl: f64,
    #[serde(serialize_with = "sci_vec")]
    pub worst_point: Vec<f64>,
}

impl GridMetricReport {
    /// Checks against a discretization tolerance.
    pub fn checks(&self, tol: f64) -> Vec<Check> {
        let wp = self.worst_point.clone();
        vec![
            Check::at_most("grid.alpha_loop_defect", self.alpha_loop_defect, tol),
            Check::at_most("grid.einstein_residual", self.max_einstein_residual, tol).at(wp.clone()),
            Check::at_most("grid.scalar_deviation", self.max_scalar_deviation, tol),
            Check::at_most("grid.asd_weyl", self.max_asd_weyl, tol).at(wp),
        ]
    }
}

/// Everything derived from the grid potential.
pub struct TodGrid<'a> {
    pub spec: &'a GridSpec,
    pub lambda: f64,
    pub v: Vec<f64>,
    pub eu: Vec<f64>,
    pub alpha: EdgeForm,
    pub fluxes: Fluxes,
}

/// `V = (t U_t - 2)/(4 Lambda)` and the connection 1-form in the gauge
/// `alpha_t = 0`, integrated along t-edges from a base plane `t = t0` on
/// which `alpha_x = 0`.
pub fn tod_grid<'a>(sol: &'a GridSolution, lambda: f64) -> Result<TodGrid<'a>> {
    let spec = &sol.spec;
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::Invalid(format!("Lambda must be finite and nonzero, got {lambda}")));
    }
    let n = spec.n;
    let u = Field::new(spec, sol.u.clone());
    let ut = u.d1(0);
    let eu = Field::new(spec, sol.u.iter().map(|x| x.exp()).collect());
    let eut = eu.d1(0);
    let (uxx, uyy) = (u.d2(1), u.d2(2));
    let (uxt, uyt) = (u.d1(1).d1(0), u.d1(2).d1(0));
    let mut v = vec![0.0; spec.len()];
    for p in 0..spec.len() {
        let (i, j, k) = spec.ijk(p);
        let t = spec.coord(0, i);
        let w = t * ut.v[p] - 2.0;
        if w.abs() < 1e-8 {
            return Err(Error::DegenerateV(format!("t U_t - 2 = {w:.3e} at {:?}", spec.point(i, j, k))));
        }
        v[p] = w / (4.0 * lambda);
    }
    // -4 Lambda d alpha = (e^U)_t dx^dy + t dx^dU_y + t dU_x^dy
    let k4 = 4.0 * lambda;
    let mut f_tx = vec![0.0; spec.len()];
    let mut f_ty = vec![0.0; spec.len()];
    let mut f_xy = vec![0.0; spec.len()];
    for p in 0..spec.len() {
        let t = spec.coord(0, spec.ijk(p).0);
        f_tx[p] = t * uyt.v[p] / k4;
        f_ty[p] = -t * uxt.v[p] / k4;
        f_xy[p] = -(eut.v[p] + t * uyy.v[p] + t * uxx.v[p]) / k4;
    }
    let (ht, hx, hy) = (spec.h(0), spec.h(1), spec.h(2));
    let avg = |f: &[f64], a: usize, b: usize, c: usize, d: usize| 0.25 * (f[a] + f[b] + f[c] + f[d]);
    let mut fl = Fluxes { tx: vec![0.0; spec.len()], ty: vec![0.0; spec.len()], xy: vec![0.0; spec.len()] };
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let p = spec.idx(i, j, k);
                if i + 1 < n && j + 1 < n {
                    let q = [p, spec.idx(i + 1, j, k), spec.idx(i, j + 1, k), spec.idx(i + 1, j + 1, k)];
                    fl.tx[p] = ht * hx * avg(&f_tx, q[0], q[1], q[2], q[3]);
                }
                if i + 1 < n && k + 1 < n {
                    let q = [p, spec.idx(i + 1, j, k), spec.idx(i, j, k + 1), spec.idx(i + 1, j, k + 1)];
                    fl.ty[p] = ht * hy * avg(&f_ty, q[0], q[1], q[2], q[3]);
                }
                if j + 1 < n && k + 1 < n {
                    let q = [p, spec.idx(i, j + 1, k), spec.idx(i, j, k + 1), spec.idx(i, j + 1, k + 1)];
                    fl.xy[p] = hx * hy * avg(&f_xy, q[0], q[1], q[2], q[3]);
                }
            }
        }
    }
    let mut a = EdgeForm::zeros(n);
    for j in 0..n - 1 {
        for k in 0..n - 1 {
            let p = spec.idx(0, j, k);
            a.ay[spec.idx(0, j + 1, k)] = a.ay[p] + fl.xy[p];
        }
    }
    for i in 0..n - 1 {
        for j in 0..n {
            for k in 0..n {
                let p = spec.idx(i, j, k);
                let q = spec.idx(i + 1, j, k);
                if j + 1 < n {
                    a.ax[q] = a.ax[p] + fl.tx[p];
                }
                if k + 1 < n {
                    a.ay[q] = a.ay[p] + fl.ty[p];
                }
            }
        }
    }
    Ok(TodGrid { spec, lambda, v, eu: eu.v, alpha: a, fluxes: fl })
}

impl TodGrid<'_> {
    /// Nodal `(alpha_x, alpha_y)` from the mean of the adjacent edge integrals.
    pub fn nodal_alpha(&self) -> (Vec<f64>, Vec<f64>) {
        let s = self.spec;
        let n = s.n;
        let mut ax = vec![0.0; s.len()];
        let mut ay = vec![0.0; s.len()];
        for p in 0..s.len() {
            let (i, j, k) = s.ijk(p);
            let mean = |edges: &[f64], lo: Option<usize>, hi: Option<usize>, h: f64| {
                let v: Vec<f64> = [lo, hi].into_iter().flatten().map(|e| edges[e] / h).collect();
                v.iter().sum::<f64>() / v.len() as f64
            };
            let xlo = (j > 0).then(|| s.idx(i, j - 1, k));
            let xhi = (j + 1 < n).then_some(p);
            let ylo = (k > 0).then(|| s.idx(i, j, k - 1));
            let yhi = (k + 1 < n).then_some(p);
            ax[p] = mean(&self.alpha.ax, xlo, xhi, s.h(1));
            ay[p] = mean(&self.alpha.ay, ylo, yhi, s.h(2));
        }
        (ax, ay)
    }
}

/// Builds the Tod metric on the grid and measures its curvature at nodes at
/// least two steps from the boundary.
pub fn grid_to_metric_report(sol: &GridSolution, lambda: f64) -> Result<GridMetricReport> {
    let tg = tod_grid(sol, lambda)?;
    let spec = &sol.spec;
    let n = spec.n;
    let (ax, ay) = tg.nodal_alpha();
    // packed components over (t, x, y, z)
    let pairs: Vec<(usize, usize)> = (0..4).flat_map(|a| (a..4).map(move |b| (a, b))).collect();
    let mut comps: Vec<Field> = pairs.iter().map(|_| Field::new(spec, vec![0.0; spec.len()])).collect();
    for p in 0..spec.len() {
        let t = spec.coord(0, spec.ijk(p).0);
        let v = tg.v[p];
        let (a_, b_) = (v / (t * t), 1.0 / (v * t * t));
        let al = [0.0, ax[p], ay[p], 1.0];
        for (c, &(a, b)) in pairs.iter().enumerate() {
            let base = match (a, b) {
                (0, 0) => a_,
                (1, 1) | (2, 2) => a_ * tg.eu[p],
                _ => 0.0,
            };
            comps[c].v[p] = base + b_ * al[a] * al[b];
        }
    }
    let d1: Vec<[Field; 3]> = comps.iter().map(|f| [f.d1(0), f.d1(1), f.d1(2)]).collect();
    let d2: Vec<[[Field; 3]; 3]> = d1
        .iter()
        .map(|d| std::array::from_fn(|e| std::array::from_fn(|f| d[e].d1(f))))
        .collect();
    let orientation = hhk_core::calibration::sd_orientation() as f64;
    let r_expected = -24.0 * lambda;
    let mut rep = GridMetricReport {
        lambda,
        h_max: (0..3).map(|a| spec.h(a)).fold(0.0, f64::max),
        points_evaluated: 0,
        min_abs_v: tg.v.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min),
        max_abs_alpha: ax.iter().chain(&ay).map(|x| x.abs()).fold(0.0, f64::max),
        alpha_loop_defect: tg.alpha.max_defect(&tg.fluxes, spec),
        max_einstein_residual: 0.0,
        max_scalar_deviation: 0.0,
        max_asd_weyl: 0.0,
        max_sd_weyl: 0.0,
        worst_point: Vec::new(),
    };
    let c = |x: f64| C::new(x, 0.0);
    for i in 2..n - 2 {
        for j in 2..n - 2 {
            for k in 2..n - 2 {
                let p = spec.idx(i, j, k);
                let mut g: Mat4 = [[ZERO; 4]; 4];
                let mut dg = [[[ZERO; 4]; 4]; 4];
                let mut ddg = [[[[ZERO; 4]; 4]; 4]; 4];
                for (q, &(a, b)) in pairs.iter().enumerate() {
                    for (x, y) in [(a, b), (b, a)] {
                        g[x][y] = c(comps[q].v[p]);
                        for e in 0..3 {
                            dg[e][x][y] = c(d1[q][e].v[p]);
                            for f in 0..3 {
                                ddg[e][f][x][y] = c(0.5 * (d2[q][e][f].v[p] + d2[q][f][e].v[p]));
                            }
                        }
                    }
                }
                let m = to_matrix(&g);
                let det = m.determinant();
                let inv = m
                    .try_inverse()
                    .ok_or_else(|| Error::DegenerateMetric(format!("grid metric singular at {:?}", spec.point(i, j, k))))?;
                let t = spec.coord(0, i);
                let vol = c(-tg.v[p] * tg.eu[p] / t.powi(4) * orientation);
                let scale = g.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
                let mp = MetricPoint { g, dg, ddg, g_inv: from_matrix(&inv), det, vol, scale };
                let b = bundle_from_point(&mp);
                rep.points_evaluated += 1;
                if b.einstein_residual > rep.max_einstein_residual || rep.worst_point.is_empty() {
                    let [tt, xx, yy] = spec.point(i, j, k);
                    rep.worst_point = vec![tt, xx, yy, 0.0];
                }
                rep.max_einstein_residual = rep.max_einstein_residual.max(b.einstein_residual);
                rep.max_scalar_deviation =
                    rep.max_scalar_deviation.max((b.scalar - c(r_expected)).norm() / r_expected.abs());
                rep.max_asd_weyl = rep.max_asd_weyl.max(b.asd_residual);
                rep.max_sd_weyl = rep.max_sd_weyl.max(b.sd_residual);
            }
        }
    }
    if rep.points_evaluated == 0 {
        return Err(Error::Invalid("grid too small for finite-difference curvature".into()));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Boundary;
    use crate::solver::discrete_residual;
    use hhk_core::{Expr, Params};

    fn sampled(e: Expr, n: usize) -> GridSolution {
        let spec = GridSpec::new([[1.0, 2.0], [-0.5, 0.5], [-0.5, 0.5]], n, Boundary::Expr { expr: e.clone(), params: Params::new() })
            .unwrap();
        let u = spec.sample(&e, &Params::new()).unwrap();
        let (_, r) = discrete_residual(&spec, &u);
        GridSolution { spec, u, residual_norm: r, newton_iters: 0, history: vec![r] }
    }

    #[test]
    fn flat_potential() {
        let sol = sampled(Expr::zero(), 9);
        let tg = tod_grid(&sol, 3.0).unwrap();
        assert!(tg.v.iter().all(|v| (v + 1.0 / 6.0).abs() < 1e-15));
        let (ax, ay) = tg.nodal_alpha();
        assert!(ax.iter().chain(&ay).all(|a| *a == 0.0));
        let coarse = grid_to_metric_report(&sol, 3.0).unwrap();
        let fine = grid_to_metric_report(&sampled(Expr::zero(), 17), 3.0).unwrap();
        assert!(coarse.alpha_loop_defect == 0.0 && fine.max_asd_weyl < 1e-12);
        let ratio = coarse.max_einstein_residual / fine.max_einstein_residual;
        assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
        let ratio = coarse.max_scalar_deviation / fine.max_scalar_deviation;
        assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn einstein_residual_is_second_order() {
        let e = Expr::coord(1).square() - Expr::coord(2).square();
        let coarse = grid_to_metric_report(&sampled(e.clone(), 9), 3.0).unwrap();
        let fine = grid_to_metric_report(&sampled(e, 17), 3.0).unwrap();
        assert!(coarse.alpha_loop_defect < 1e-10 && fine.alpha_loop_defect < 1e-10);
        let ratio = coarse.max_einstein_residual / fine.max_einstein_residual;
        assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn degenerate_v() {
        let sol = sampled(Expr::coord(0) * (4.0 / 3.0), 9);
        assert!(matches!(grid_to_metric_report(&sol, 3.0), Err(Error::DegenerateV(_))));
    }
}
