//! Key-function (W) formalism on the chart `(phi, eta, t, w)`.

use crate::chart::{Chart, FieldTag, LocusKind};
use crate::error::Result;
use crate::expr::{Evaluator, Expr, Params};
use crate::jet::{C, DIM};
use crate::metric::MetricField;

pub const W_NAMES: [&str; DIM] = ["phi", "eta", "t", "w"];
pub const RESCALED_NAMES: [&str; DIM] = ["phi", "eta", "rho", "v"];

const PHI: usize = 0;
const ETA: usize = 1;
const W: usize = 3;

pub fn lambda() -> Expr {
    Expr::param("Lambda")
}

pub fn tau() -> Expr {
    Expr::param("tau")
}

/// Which form of the heavenly equation the key function obeys.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WForm {
    /// Chart `(phi, eta, t, w)` with free `tau` and `Lambda`.
    Original,
    /// Chart `(phi, eta, rho, v)` after the constant rescaling.
    Rescaled,
}

#[derive(Debug, Clone)]
pub struct WData {
    pub w: Expr,
    pub params: Params,
    pub form: WForm,
}

impl WData {
    pub fn new(w: Expr, params: Params) -> Self {
        Self { w, params, form: WForm::Original }
    }

    pub fn rescaled(w: Expr, params: Params) -> Self {
        Self { w, params, form: WForm::Rescaled }
    }

    pub fn chart(&self) -> Chart {
        let names = match self.form {
            WForm::Original => W_NAMES,
            WForm::Rescaled => RESCALED_NAMES,
        };
        Chart::new(names, FieldTag::Complex).with_locus("phi", Expr::coord(PHI), LocusKind::General)
    }

    /// `phi = s phi~`, `w = (s / 2 tau) v`, `t = s rho` with `s = Lambda / 6 tau^2`.
    pub fn to_rescaled(&self) -> WData {
        if self.form == WForm::Rescaled {
            return self.clone();
        }
        let s = lambda() / (Expr::c(6.0) * tau().square());
        let map = [
            s.clone() * Expr::coord(0),
            Expr::coord(1),
            s.clone() * Expr::coord(2),
            s / (Expr::c(2.0) * tau()) * Expr::coord(3),
        ];
        WData::rescaled(self.w.subst_coords(&map), self.params.clone())
    }
}

/// Left-hand side of the heavenly equation at `point`.
pub fn heavenly_lhs(w: &WData, point: &[C; DIM]) -> Result<C> {
    w.chart().check_point(point, &w.params)?;
    let mut ev = Evaluator::new(*point, &w.params);
    let j = ev.jet(&w.w)?;
    let phi = point[PHI];
    let (we, wf) = (j.d(ETA), j.d(PHI));
    let (wee, wef, wff, wew) = (j.dd(ETA, ETA), j.dd(ETA, PHI), j.dd(PHI, PHI), j.dd(ETA, W));
    let core = phi * (wee * wff - wef * wef) + 2.0 * (we * wef - wf * wee);
    Ok(match w.form {
        WForm::Original => {
            let t = ev.value(&tau())?;
            let l = ev.value(&lambda())?;
            core + wew / t - l / (6.0 * t * t) * wff
        }
        WForm::Rescaled => core + 2.0 * wew - wff,
    })
}

pub fn heavenly_residual(w: &WData, point: &[C; DIM]) -> Result<f64> {
    Ok(heavenly_lhs(w, point)?.norm())
}

/// Metric generated by a key function on the original chart.
pub fn build_w_metric(w: &WData) -> MetricField {
    let orientation = crate::calibration::sd_orientation();
    build_w_metric_oriented(w, orientation)
}

pub(crate) fn build_w_metric_oriented(w: &WData, orientation: i8) -> MetricField {
    let phi = Expr::coord(PHI);
    let inv2 = phi.powi(-2);
    let wv = &w.w;
    let we = wv.diff(ETA);
    let wf = wv.diff(PHI);
    let wee = we.diff(ETA);
    let wef = we.diff(PHI);
    let wff = wf.diff(PHI);
    let (l, t) = (lambda(), tau());
    // phi^-2 { 2/tau (deta dw - dphi dt) + 2(-phi W_ee + L/6tau^2) dt^2
    //          + 4(-phi W_ef + W_e) dw dt + 2(-phi W_ff + 2 W_f) dw^2 }
    let gtt = Expr::c(2.0) * (-(phi.clone() * wee) + l / (Expr::c(6.0) * t.square()));
    let gwt = Expr::c(2.0) * (we - phi.clone() * wef);
    let gww = Expr::c(2.0) * (Expr::c(2.0) * wf - phi.clone() * wff);
    let m = MetricField::from_fn(w.chart(), w.params.clone(), |i, j| {
        let c = match (i, j) {
            (1, 3) => t.recip(),
            (0, 2) => -t.recip(),
            (2, 2) => gtt.clone(),
            (2, 3) => gwt.clone(),
            (3, 3) => gww.clone(),
            _ => return Expr::zero(),
        };
        inv2.clone() * c
    });
    m.with_volume(-(t.square() * phi.powi(4)).recip()).with_orientation(orientation)
}

/// The general solution with `W_eta_eta = 0`; `f` holds four functions of `w`.
pub fn case_ii_key_function(f: &[Expr; 4]) -> Expr {
    let phi = Expr::coord(PHI);
    let eta = Expr::coord(ETA);
    let (l, t) = (lambda(), tau());
    let df1 = f[0].diff(W);
    let df2 = f[1].diff(W);
    let t2l = t.square() / l;
    (f[0].clone() * phi.clone() + f[1].clone()) * eta
        + t2l.clone() * (f[0].square() + df1 / t.clone()) * phi.powi(3)
        + Expr::c(3.0) * t2l * (Expr::c(2.0) * f[0].clone() * f[1].clone() + df2 / t) * phi.square()
        + f[2].clone() * phi
        + f[3].clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(l: f64, t: f64) -> Params {
        let mut p = Params::new();
        p.insert("Lambda".into(), C::new(l, 0.0));
        p.insert("tau".into(), C::new(t, 0.0));
        p
    }

    fn pt(a: [f64; 4]) -> [C; 4] {
        a.map(|x| C::new(x, 0.0))
    }

    #[test]
    fn zero_key_function_solves() {
        let w = WData::new(Expr::zero(), params(3.0, 1.0));
        assert_eq!(heavenly_residual(&w, &pt([1.0, 0.3, 0.0, 0.2])).unwrap(), 0.0);
    }

    #[test]
    fn eta_squared_phi_squared_residual() {
        let phi = Expr::coord(0);
        let eta = Expr::coord(1);
        let w = WData::new(eta.square() * phi.square(), params(3.0, 2.0));
        let (f, e) = (1.3, 0.7);
        let lhs = heavenly_lhs(&w, &pt([f, e, 0.0, 0.0])).unwrap();
        let want = -4.0 * e * e * f * f * f - 3.0 * e * e / (3.0 * 4.0);
        assert!((lhs.re - want).abs() < 1e-12);
    }

    #[test]
    fn de_sitter_components() {
        let m = build_w_metric_oriented(&WData::new(Expr::zero(), params(3.0, 1.0)), 1);
        let g = m.values_at(&pt([1.0, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!(g[1][3], C::new(1.0, 0.0));
        assert_eq!(g[0][2], C::new(-1.0, 0.0));
        assert_eq!(g[2][2], C::new(1.0, 0.0));
        assert_eq!(g[3][3], C::new(0.0, 0.0));
        assert_eq!(g[0][0], C::new(0.0, 0.0));
    }

    #[test]
    fn case_ii_example_solves() {
        let p = params(3.0, 1.0);
        let f = [Expr::coord(3), Expr::one(), Expr::zero(), Expr::zero()];
        let w = WData::new(case_ii_key_function(&f), p);
        for q in [[1.0, 0.3, 0.1, 0.4], [0.6, -0.2, 0.0, 1.1]] {
            assert!(heavenly_residual(&w, &pt(q)).unwrap() < 1e-12);
        }
    }
}
