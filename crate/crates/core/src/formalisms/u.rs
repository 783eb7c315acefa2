//! U-formalism: Toda potential, connection 1-form and the metric built from
//! them on the chart `(T, X, Y, Z)`.

use serde::{Deserialize, Serialize};

use crate::chart::{Chart, FieldTag, LocusKind};
use crate::error::{Error, Result};
use crate::expr::{Evaluator, Expr, Params};
use crate::jet::{C, DIM};
use crate::metric::MetricField;

pub const U_NAMES: [&str; DIM] = ["T", "X", "Y", "Z"];
pub const SLICE_NAMES: [&str; DIM] = ["t", "x", "y", "z"];

const T: usize = 0;
const X: usize = 1;
const Y: usize = 2;

#[derive(Debug, Clone)]
pub struct UData {
    pub u: Expr,
    /// Components along `dT, dX, dY, dZ`; the last one is always zero.
    pub alpha: [Expr; DIM],
    pub lambda: Expr,
    pub params: Params,
    pub chart: Chart,
    /// `Sigma_TT - U_X - U_Y` when the data came from a Sigma potential.
    pub link: Option<Expr>,
}

impl UData {
    /// Complex data on the standard chart with `Lambda` as cosmological constant.
    pub fn new(u: Expr, alpha: [Expr; 3], params: Params) -> Self {
        let [a0, a1, a2] = alpha;
        let mut d = Self {
            u,
            alpha: [a0, a1, a2, Expr::zero()],
            lambda: Expr::param("Lambda"),
            params,
            chart: Chart::new(U_NAMES, FieldTag::Complex),
            link: None,
        };
        d.chart = d.default_chart(U_NAMES, FieldTag::Complex);
        d
    }

    pub fn default_chart(&self, names: [&str; DIM], tag: FieldTag) -> Chart {
        Chart::new(names, tag)
            .with_locus(names[0], Expr::coord(T), LocusKind::General)
            .with_locus("V", self.v(), LocusKind::V)
    }

    /// `V = (3/2)(T U_T - 2) / Lambda`
    pub fn v(&self) -> Expr {
        Expr::c(1.5) * (Expr::coord(T) * self.u.diff(T) - 2.0) / self.lambda.clone()
    }
}

/// Shared constructor for the family of metrics
/// `(V/T^2)(c_T dT^2 + e^U (c_X dX^2 + c_Y dY^2)) + s_Z/(V T^2) (dZ + alpha)^2`.
pub(crate) fn toda_type_metric(
    chart: Chart,
    params: Params,
    u: &Expr,
    v: &Expr,
    alpha: &[Expr; DIM],
    c: [f64; 3],
    s_z: f64,
) -> MetricField {
    let t2 = Expr::coord(T).square();
    let eu = u.exp();
    let base = v.clone() / t2.clone();
    let fiber = Expr::c(s_z) / (v.clone() * t2);
    let mut diag = [Expr::zero(), Expr::zero(), Expr::zero(), Expr::zero()];
    diag[T] = base.clone() * c[0];
    diag[X] = base.clone() * eu.clone() * c[1];
    diag[Y] = base * eu * c[2];
    let mut a = alpha.clone();
    a[3] = Expr::one();
    MetricField::from_fn(chart, params, |i, j| {
        let f = fiber.clone() * a[i].clone() * a[j].clone();
        if i == j {
            diag[i].clone() + f
        } else {
            f
        }
    })
}

pub fn build_u_metric(u: &UData) -> MetricField {
    build_u_metric_oriented(u, crate::calibration::sd_orientation())
}

pub(crate) fn build_u_metric_oriented(u: &UData, orientation: i8) -> MetricField {
    let v = u.v();
    let m = toda_type_metric(u.chart.clone(), u.params.clone(), &u.u, &v, &u.alpha, [1.0, 1.0, -1.0], -1.0);
    let vol = v * u.u.exp() / Expr::coord(T).powi(4);
    m.with_volume(vol).with_orientation(orientation)
}

/// Sign pattern of the Toda-type equation `(e^U)_TT + a U_XX + b U_YY`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BfpVariant {
    Complex,
    NeutralUpper,
    NeutralLower,
    Euclidean,
}

impl BfpVariant {
    pub fn signs(self) -> (f64, f64) {
        match self {
            BfpVariant::Complex => (1.0, -1.0),
            BfpVariant::NeutralUpper => (-1.0, -1.0),
            BfpVariant::NeutralLower => (1.0, -1.0),
            BfpVariant::Euclidean => (1.0, 1.0),
        }
    }
}

pub fn bfp_lhs(u: &Expr, variant: BfpVariant, params: &Params, point: &[C; DIM]) -> Result<C> {
    let j = Evaluator::new(*point, params).jet(u)?;
    let eu = j.value.exp();
    let ett = eu * (j.dd(T, T) + j.d(T) * j.d(T));
    let (a, b) = variant.signs();
    Ok(ett + a * j.dd(X, X) + b * j.dd(Y, Y))
}

pub fn bfp_residual(u: &Expr, variant: BfpVariant, params: &Params, point: &[C; DIM]) -> Result<f64> {
    Ok(bfp_lhs(u, variant, params, point)?.norm())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct AlphaCheck {
    /// Max deviation over the `TX`, `TY`, `XY` components of the 2-form identity.
    pub two_form: f64,
    /// Max size of the components involving `dZ`, which must vanish.
    pub z_part: f64,
    /// Complex BFP residual, the integrability condition.
    pub bfp: f64,
}

/// Checks `-(2 Lambda / 3) d alpha = (e^U)_T dX^dY - T dX^dU_Y + T dU_X^dY`.
pub fn alpha_residual(u: &UData, point: &[C; DIM]) -> Result<AlphaCheck> {
    u.chart.check_point(point, &u.params)?;
    let mut ev = Evaluator::new(*point, &u.params);
    let j = ev.jet(&u.u)?;
    let lam = ev.value(&u.lambda)?;
    let a: Vec<_> = u.alpha.iter().map(|e| ev.jet(e)).collect::<Result<_>>()?;
    let d = |p: usize, q: usize| a[q].d(p) - a[p].d(q);
    let t = point[T];
    let eut = j.value.exp() * j.d(T);
    let rhs_xy = eut - t * j.dd(Y, Y) + t * j.dd(X, X);
    let rhs_tx = t * j.dd(Y, T);
    let rhs_ty = t * j.dd(X, T);
    let k = -2.0 * lam / 3.0;
    let two_form = [(k * d(T, X) - rhs_tx), (k * d(T, Y) - rhs_ty), (k * d(X, Y) - rhs_xy)]
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    let z_part = (0..3).map(|p| d(p, 3).norm()).fold(0.0, f64::max);
    let eu = j.value.exp();
    let bfp = (eu * (j.dd(T, T) + j.d(T) * j.d(T)) + j.dd(X, X) - j.dd(Y, Y)).norm();
    Ok(AlphaCheck { two_form, z_part, bfp })
}

/// Real form of the metric on `(t, x, y, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RealForm {
    HognerUpper,
    HognerLower,
    Tod,
}

impl RealForm {
    pub fn bfp_variant(self) -> BfpVariant {
        match self {
            RealForm::HognerUpper => BfpVariant::NeutralUpper,
            RealForm::HognerLower => BfpVariant::NeutralLower,
            RealForm::Tod => BfpVariant::Euclidean,
        }
    }
}

/// Max deviation of the real 1-form identity:
/// neutral `2 Lambda d alpha = (e^U)_t dx^dy - t dx^dU_y ∓ t dU_x^dy`,
/// Riemannian `-4 Lambda d alpha = (e^U)_t dx^dy + t dx^dU_y + t dU_x^dy`.
pub fn real_alpha_residual(u: &Expr, alpha: &[Expr; 3], params: &Params, form: RealForm, point: &[C; DIM]) -> Result<f64> {
    let mut ev = Evaluator::new(*point, params);
    let j = ev.jet(u)?;
    let lam = ev.value(&Expr::param("Lambda"))?;
    let a: Vec<_> = alpha.iter().map(|e| ev.jet(e)).collect::<Result<_>>()?;
    let d = |p: usize, q: usize| a[q].d(p) - a[p].d(q);
    let t = point[T];
    let eut = j.value.exp() * j.d(T);
    let (k, s_yy, s_xx, s_tx, s_ty) = match form {
        RealForm::HognerUpper => (2.0 * lam, -1.0, -1.0, 1.0, -1.0),
        RealForm::HognerLower => (2.0 * lam, -1.0, 1.0, 1.0, 1.0),
        RealForm::Tod => (-4.0 * lam, 1.0, 1.0, -1.0, 1.0),
    };
    let rhs_xy = eut + s_yy * t * j.dd(Y, Y) + s_xx * t * j.dd(X, X);
    let rhs_tx = s_tx * t * j.dd(Y, T);
    let rhs_ty = s_ty * t * j.dd(X, T);
    Ok([k * d(T, X) - rhs_tx, k * d(T, Y) - rhs_ty, k * d(X, Y) - rhs_xy]
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max))
}

/// `|Sigma_TT - U_X - U_Y|` for Sigma-derived data.
pub fn link_residual(u: &UData, point: &[C; DIM]) -> Result<Option<f64>> {
    match &u.link {
        Some(l) => Ok(Some(l.eval(point, &u.params)?.norm())),
        None => Ok(None),
    }
}

/// Real neutral metric with the upper (`upper = true`) or lower sign choice,
/// `(V/t^2)(e^U(dx^2 ± dy^2) ∓ dt^2) - (dz + alpha)^2/(V t^2)`,
/// `V = ±(t U_t - 2)/(2 Lambda)`.
pub fn build_hogner_metric(u: &Expr, alpha: [Expr; 3], params: Params, upper: bool) -> MetricField {
    let s = if upper { 1.0 } else { -1.0 };
    let lam = Expr::param("Lambda");
    let v = Expr::c(s) * (Expr::coord(T) * u.diff(T) - 2.0) / (Expr::c(2.0) * lam);
    let [a0, a1, a2] = alpha;
    let alpha = [a0, a1, a2, Expr::zero()];
    let chart = Chart::new(SLICE_NAMES, FieldTag::Real)
        .with_locus("t", Expr::coord(T), LocusKind::General)
        .with_locus("V", v.clone(), LocusKind::V);
    let m = toda_type_metric(chart, params, u, &v, &alpha, [-s, 1.0, s], -1.0);
    let vol = v * u.exp() / Expr::coord(T).powi(4);
    m.with_volume(vol).with_orientation(crate::calibration::sd_orientation())
}

/// Real Riemannian metric
/// `(V/t^2)(e^U(dx^2 + dy^2) + dt^2) + (dz + alpha)^2/(V t^2)`,
/// `V = (t U_t - 2)/(4 Lambda)`.
pub fn build_tod_metric(u: &Expr, alpha: [Expr; 3], params: Params) -> MetricField {
    let lam = Expr::param("Lambda");
    let v = (Expr::coord(T) * u.diff(T) - 2.0) / (Expr::c(4.0) * lam);
    let [a0, a1, a2] = alpha;
    let alpha = [a0, a1, a2, Expr::zero()];
    let chart = Chart::new(SLICE_NAMES, FieldTag::Real)
        .with_locus("t", Expr::coord(T), LocusKind::General)
        .with_locus("V", v.clone(), LocusKind::V);
    let m = toda_type_metric(chart, params, u, &v, &alpha, [1.0, 1.0, 1.0], 1.0);
    let vol = -(v * u.exp()) / Expr::coord(T).powi(4);
    m.with_volume(vol).with_orientation(crate::calibration::sd_orientation())
}

/// Requires `V` to stay away from zero on the given points.
pub fn check_v(u: &UData, points: &[[C; DIM]]) -> Result<()> {
    let v = u.v();
    for p in points {
        let x = v.eval(p, &u.params)?;
        if x.norm() < 1e-8 {
            return Err(Error::DegenerateV(format!("V = {:.3e} at {:?}", x.norm(), crate::curvature::point_label(p))));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(l: f64) -> Params {
        let mut p = Params::new();
        p.insert("Lambda".into(), C::new(l, 0.0));
        p
    }

    fn pt(a: [f64; 4]) -> [C; 4] {
        a.map(|x| C::new(x, 0.0))
    }

    #[test]
    fn de_sitter_form() {
        let u = UData::new(Expr::zero(), [Expr::zero(), Expr::zero(), Expr::zero()], params(3.0));
        let m = build_u_metric_oriented(&u, 1);
        let g = m.values_at(&pt([2.0, 0.1, 0.2, 0.3])).unwrap();
        // T^-2 (-(3/L)(dX^2 - dY^2 + dT^2) + (L/3) dZ^2)
        assert!((g[0][0] + C::new(0.25, 0.0)).norm() < 1e-15);
        assert!((g[1][1] + C::new(0.25, 0.0)).norm() < 1e-15);
        assert!((g[2][2] - C::new(0.25, 0.0)).norm() < 1e-15);
        assert!((g[3][3] - C::new(0.25, 0.0)).norm() < 1e-15);
        let a = alpha_residual(&u, &pt([2.0, 0.1, 0.2, 0.3])).unwrap();
        assert_eq!(a.two_form, 0.0);
    }

    #[test]
    fn log_t_alpha_identity() {
        let (t, x, y) = (Expr::coord(0), Expr::coord(1), Expr::coord(2));
        let lam = Expr::param("Lambda");
        let v = Expr::c(-1.5) / lam.clone();
        let ax = Expr::c(0.75) / lam * (y - x);
        let good = UData::new(t.clone().ln(), [-v, ax.clone(), ax], params(3.0));
        let p = pt([1.5, 0.3, -0.4, 0.0]);
        assert!(alpha_residual(&good, &p).unwrap().two_form < 1e-12);
        let bad = UData::new(t.ln(), [Expr::zero(), Expr::zero(), Expr::zero()], params(3.0));
        assert!((alpha_residual(&bad, &p).unwrap().two_form - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bfp_examples() {
        let (x, y) = (Expr::coord(1), Expr::coord(2));
        let p = pt([1.2, 0.3, 0.7, 0.0]);
        let none = Params::new();
        for v in [BfpVariant::Complex, BfpVariant::NeutralUpper, BfpVariant::NeutralLower, BfpVariant::Euclidean] {
            assert_eq!(bfp_residual(&Expr::zero(), v, &none, &p).unwrap(), 0.0);
        }
        let s = (x.clone() + y.clone()).square();
        assert!(bfp_residual(&s, BfpVariant::Complex, &none, &p).unwrap() < 1e-14);
        let h = x.square() - y.square();
        assert!(bfp_residual(&h, BfpVariant::Euclidean, &none, &p).unwrap() < 1e-14);
        assert!(bfp_residual(&h, BfpVariant::Complex, &none, &p).unwrap() > 1.0);
    }
}
