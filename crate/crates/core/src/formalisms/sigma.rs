//! Sigma formalism on the chart `(phi, xi, rho, v)` and its conversion to
//! U-formalism data.

use serde::Serialize;

use super::u::{UData, U_NAMES};
use super::w::{lambda, tau};
use crate::chart::{Chart, FieldTag, Locus, LocusKind};
use crate::error::{Error, Result};
use crate::expr::{Evaluator, Expr, Params};
use crate::jet::{C, DIM};
use crate::metric::MetricField;

pub const SIGMA_NAMES: [&str; DIM] = ["phi", "xi", "rho", "v"];

const PHI: usize = 0;
const XI: usize = 1;
const V: usize = 3;

#[derive(Debug, Clone)]
pub struct SigmaData {
    pub sigma: Expr,
    pub params: Params,
}

impl SigmaData {
    pub fn new(sigma: Expr, params: Params) -> Self {
        Self { sigma, params }
    }

    /// `Omega = 2 Sigma - phi Sigma_phi`
    pub fn omega(&self) -> Expr {
        Expr::c(2.0) * self.sigma.clone() - Expr::coord(PHI) * self.sigma.diff(PHI)
    }

    pub fn chart(&self) -> Chart {
        let s_xi = self.sigma.diff(XI);
        Chart::new(SIGMA_NAMES, FieldTag::Complex)
            .with_locus("phi", Expr::coord(PHI), LocusKind::General)
            .with_locus("Sigma_phixi", s_xi.diff(PHI), LocusKind::Sigma)
            .with_locus("Omega_xi", self.omega().diff(XI), LocusKind::Sigma)
            .with_locus("Sigma_xi", s_xi, LocusKind::Sigma)
    }
}

/// `Sigma = -f_v phi^2 / 2 + e^f (a phi + b)` with slots on the Sigma chart.
pub fn sigma_family_1(f: &Expr, a: &Expr, b: &Expr) -> Expr {
    let phi = Expr::coord(PHI);
    -(f.diff(V) * phi.square()) / 2.0 + f.exp() * (a.clone() * phi + b.clone())
}

/// `Sigma = -f_v phi^2 / 2 + a e^f (phi + g) - g_v (phi + g) ln(phi + g)`.
pub fn sigma_family_2(f: &Expr, g: &Expr, a: &Expr) -> Expr {
    let phi = Expr::coord(PHI);
    let pg = phi.clone() + g.clone();
    -(f.diff(V) * phi.square()) / 2.0 + a.clone() * f.exp() * pg.clone() - g.diff(V) * pg.clone() * pg.ln()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SigmaCheck {
    pub residual: f64,
    pub sigma_phixi: f64,
    pub omega_xi: f64,
}

/// Residual of `Sigma_xi v + Sigma_xi Sigma_phi phi = 0` together with the
/// nondegeneracy quantities.
pub fn sigma_residual(s: &SigmaData, point: &[C; DIM]) -> Result<SigmaCheck> {
    let mut ev = Evaluator::new(*point, &s.params);
    let j = ev.jet(&s.sigma)?;
    let om = ev.jet(&s.omega())?;
    let residual = (j.dd(XI, V) + j.d(XI) * j.dd(PHI, PHI)).norm();
    Ok(SigmaCheck { residual, sigma_phixi: j.dd(PHI, XI).norm(), omega_xi: om.d(XI).norm() })
}

pub fn build_sigma_metric(s: &SigmaData) -> MetricField {
    build_sigma_metric_oriented(s, crate::calibration::sd_orientation())
}

pub(crate) fn build_sigma_metric_oriented(s: &SigmaData, orientation: i8) -> MetricField {
    let phi = Expr::coord(PHI);
    let inv2 = phi.powi(-2);
    let om = s.omega();
    let (om_f, om_x) = (om.diff(PHI), om.diff(XI));
    let s_x = s.sigma.diff(XI);
    let ratio = s_x / om_x.clone();
    let (l, t) = (lambda(), tau());
    // phi^-2 { -(2/tau) dphi drho + (2L/3tau^2)(S_x/O_x) drho^2 + (4/tau)(S_x O_f/O_x) dv drho
    //          + (6/L)(S_x O_f^2/O_x) dv^2 - (6/L) O_f dphi dv - (6/L) O_x dxi dv }
    let m = MetricField::from_fn(s.chart(), s.params.clone(), |i, j| {
        let c = match (i, j) {
            (0, 2) => -t.recip(),
            (2, 2) => Expr::c(2.0) * l.clone() / (Expr::c(3.0) * t.square()) * ratio.clone(),
            (2, 3) => Expr::c(2.0) / t.clone() * ratio.clone() * om_f.clone(),
            (3, 3) => Expr::c(6.0) / l.clone() * ratio.clone() * om_f.square(),
            (0, 3) => -(Expr::c(3.0) / l.clone()) * om_f.clone(),
            (1, 3) => -(Expr::c(3.0) / l.clone()) * om_x.clone(),
            _ => return Expr::zero(),
        };
        inv2.clone() * c
    });
    let vol = -(Expr::c(3.0) * om_x) / (t * l * phi.powi(4));
    m.with_volume(vol).with_orientation(orientation)
}

/// Chart change `phi = T`, `xi = (Y - X)/2`, `rho = -tau Z`, `v = -(X + Y)/2`,
/// expressing Sigma-chart coordinates in U-chart coordinates.
pub fn step4_map() -> [Expr; DIM] {
    let (t, x, y, z) = (Expr::coord(0), Expr::coord(1), Expr::coord(2), Expr::coord(3));
    [t, (y.clone() - x.clone()) / 2.0, -(tau() * z), -(x + y) / 2.0]
}

/// U-formalism data equivalent to `s`.
pub fn sigma_to_u(s: &SigmaData) -> Result<UData> {
    let s_xi = s.sigma.diff(XI);
    if s_xi.is_zero() {
        return Err(Error::DegenerateSigma("Sigma_xi vanishes identically".into()));
    }
    let map = step4_map();
    let sig = s.sigma.subst_coords(&map);
    let u = s_xi.subst_coords(&map).ln();
    let t = Expr::coord(0);
    let s_t = sig.diff(0);
    let s_tt = s_t.diff(0);
    let mut data = UData::new(u.clone(), [Expr::zero(), Expr::zero(), Expr::zero()], s.params.clone());
    let v = data.v();
    let axy = Expr::c(1.5) / lambda() * (s_t - t * s_tt.clone());
    data.alpha = [-v, axy.clone(), axy, Expr::zero()];
    data.link = Some(s_tt - u.diff(1) - u.diff(2));
    let mut chart = data.default_chart(U_NAMES, FieldTag::Complex);
    for l in s.chart().singular_loci.into_iter().skip(1) {
        chart.singular_loci.push(Locus { expr: l.expr.subst_coords(&map), ..l });
    }
    data.chart = chart;
    Ok(data)
}
