//! Explicit coordinate maps between the charts of the catalog.

use serde::Serialize;

use super::w::{lambda, tau};
use crate::chart::{Chart, FieldTag, LocusKind};
use crate::error::Result;
use crate::expr::{Evaluator, Expr, Params};
use crate::jet::{C, DIM};
use crate::metric::{compare_at, pullback_metric, MetricField};

pub const CONFORMAL_NAMES: [&str; DIM] = ["xi", "zeta", "u", "v"];
pub const LORENTZ_NAMES: [&str; DIM] = ["x", "y", "z", "t"];

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PullbackCheck {
    pub points_evaluated: usize,
    /// Max relative deviation of the components.
    pub max_metric_deviation: f64,
    /// Max relative deviation of the oriented volume densities.
    pub max_volume_deviation: f64,
}

/// Compares `source` with the pullback of `target` along `map`, which gives
/// target coordinates in terms of source coordinates.
pub fn pullback_compare(
    source: &MetricField,
    target: &MetricField,
    map: &[Expr; DIM],
    points: &[[C; DIM]],
) -> Result<PullbackCheck> {
    let mut params = target.params.clone();
    params.extend(source.params.iter().map(|(k, v)| (k.clone(), *v)));
    let pulled = pullback_metric(target, map, source.chart.clone()).with_params(params);
    let mut out = PullbackCheck { points_evaluated: 0, max_metric_deviation: 0.0, max_volume_deviation: 0.0 };
    for p in points {
        out.max_metric_deviation = out.max_metric_deviation.max(compare_at(source, &pulled, p)?);
        let a = source.metric_at(p)?.vol;
        let b = pulled.metric_at(p)?.vol;
        let dev = (a - b).norm() / a.norm().max(b.norm()).max(1e-300);
        out.max_volume_deviation = out.max_volume_deviation.max(dev);
        out.points_evaluated += 1;
    }
    Ok(out)
}

/// W-chart coordinates in terms of U-chart coordinates for the
/// `W_eta_eta = 0` branch.
pub fn case_ii_map() -> [Expr; DIM] {
    let (t, x, y, z) = (Expr::coord(0), Expr::coord(1), Expr::coord(2), Expr::coord(3));
    let k = Expr::c(3.0) * tau() / lambda();
    [
        t.clone(),
        k.clone() / 2.0 * (x.clone() - y.clone()),
        tau() * z + k * t,
        -(x + y),
    ]
}

/// `(2 dxi dzeta + 2 du dv) / Phi^2` on `(xi, zeta, u, v)`.
pub fn conformal_metric(phi: Expr, params: Params) -> MetricField {
    let chart = Chart::new(CONFORMAL_NAMES, FieldTag::Complex).with_locus("Phi", phi.clone(), LocusKind::General);
    let inv2 = phi.powi(-2);
    MetricField::from_fn(chart, params, |i, j| match (i, j) {
        (0, 1) | (2, 3) => inv2.clone(),
        _ => Expr::zero(),
    })
    .with_volume(phi.powi(-4))
    .with_orientation(crate::calibration::sd_orientation())
}

/// `alpha0 (xi zeta + u v) + beta0 zeta + mu0 xi + gamma0 u + delta0 v + epsilon0`.
pub fn conformal_factor() -> Expr {
    let (xi, zeta, u, v) = (Expr::coord(0), Expr::coord(1), Expr::coord(2), Expr::coord(3));
    let p = Expr::param;
    p("alpha0") * (xi.clone() * zeta.clone() + u.clone() * v.clone())
        + p("beta0") * zeta
        + p("mu0") * xi
        + p("gamma0") * u
        + p("delta0") * v
        + p("epsilon0")
}

/// `Lambda/6 - (alpha0 epsilon0 - beta0 mu0 - gamma0 delta0)`, zero on admissible constants.
pub fn conformal_constraint(params: &Params) -> Result<C> {
    let p = Expr::param;
    let e = lambda() / 6.0 - (p("alpha0") * p("epsilon0") - p("beta0") * p("mu0") - p("gamma0") * p("delta0"));
    Evaluator::new([C::new(0.0, 0.0); DIM], params).value(&e)
}

/// Unprimed conformal coordinates in terms of the primed ones.
pub fn primed_map() -> [Expr; DIM] {
    let p = Expr::param;
    let k = lambda() / (Expr::c(6.0) * p("alpha0"));
    let shift = |name: &str| p(name) / p("alpha0");
    [
        k.clone() * Expr::coord(0) - shift("beta0"),
        k.clone() * Expr::coord(1) - shift("mu0"),
        k.clone() * Expr::coord(2) - shift("delta0"),
        k * Expr::coord(3) - shift("gamma0"),
    ]
}

/// `1 + (Lambda/6)(xi zeta + u v)`.
pub fn simple_factor() -> Expr {
    let (xi, zeta, u, v) = (Expr::coord(0), Expr::coord(1), Expr::coord(2), Expr::coord(3));
    Expr::one() + lambda() / 6.0 * (xi * zeta + u * v)
}

/// `(Lambda/6) u - v`.
pub fn simple_v_factor() -> Expr {
    lambda() / 6.0 * Expr::coord(2) - Expr::coord(3)
}

/// W-chart coordinates in terms of `(xi, zeta, u, v)`:
/// `tau eta = xi`, `w = zeta`, `t = u`, `tau phi = (Lambda/6) u - v`.
pub fn w0_to_simple_v_map() -> [Expr; DIM] {
    [simple_v_factor() / tau(), Expr::coord(0) / tau(), Expr::coord(2), Expr::coord(1)]
}

/// `(dx^2 + dy^2 + dz^2 - dt^2) / (1 + (Lambda/12)(x^2 + y^2 + z^2 - t^2))^2`.
pub fn lorentz_simple_metric(params: Params) -> MetricField {
    let [x, y, z, t] = std::array::from_fn(Expr::coord);
    let den = Expr::one() + lambda() / 12.0 * (x.square() + y.square() + z.square() - t.square());
    lorentz_diagonal(den, params)
}

/// `2(dx^2 + dy^2 + dz^2 - dt^2) / ((Lambda/6)(z + t) - (z - t))^2`.
pub fn lorentz_chain_target(params: Params) -> MetricField {
    let [_, _, z, t] = std::array::from_fn(Expr::coord);
    let den = lambda() / 6.0 * (z.clone() + t.clone()) - (z - t);
    let m = lorentz_diagonal(den, params);
    let s = Expr::c(2.0);
    let g = m.g.clone().map(|c| s.clone() * c);
    MetricField { g, ..m }
}

fn lorentz_diagonal(den: Expr, params: Params) -> MetricField {
    let chart = Chart::new(LORENTZ_NAMES, FieldTag::Real).with_locus("denominator", den.clone(), LocusKind::General);
    let w = den.powi(-2);
    MetricField::diagonal(chart, params, [w.clone(), w.clone(), w.clone(), -w])
        .with_orientation(crate::calibration::sd_orientation())
}

/// Conformal coordinates in terms of `(x, y, z, t)`.
pub fn lorentz_to_conformal_map() -> [Expr; DIM] {
    let [x, y, z, t] = std::array::from_fn(Expr::coord);
    let r2 = Expr::c(std::f64::consts::SQRT_2);
    [
        (x.clone() + Expr::i() * y.clone()) / r2.clone(),
        (x - Expr::i() * y) / r2.clone(),
        (z.clone() + t.clone()) / r2.clone(),
        (z - t) / r2,
    ]
}
