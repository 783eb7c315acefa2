//! Numeric Legendre transform from the rescaled key function to `P`.

use serde::Serialize;

use super::w::WData;
use crate::chart::{Chart, FieldTag, LocusKind};
use crate::error::{Error, Result};
use crate::expr::{Evaluator, Expr, Params};
use crate::jet::{C, DIM};

pub const P_NAMES: [&str; DIM] = ["phi", "z", "rho", "v"];

pub const NEWTON_MAX_STEPS: usize = 50;
pub const NEWTON_TOL: f64 = 1e-12;
pub const DEGENERATE_WEE: f64 = 1e-10;

const PHI: usize = 0;
const ETA: usize = 1;
const Z: usize = 1;
const V: usize = 3;

#[derive(Debug, Clone)]
pub struct PData {
    pub p: Expr,
    pub params: Params,
}

impl PData {
    pub fn chart() -> Chart {
        Chart::new(P_NAMES, FieldTag::Complex).with_locus("phi", Expr::coord(PHI), LocusKind::General)
    }
}

/// `P` and its derivatives at one `(phi, z, v)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PJet {
    pub p: C,
    pub p_phi: C,
    pub p_z: C,
    pub p_v: C,
    pub p_zz: C,
    pub p_phiz: C,
    pub p_phiphi: C,
    pub p_zv: C,
    pub p_phiv: C,
    pub p_vv: C,
}

#[derive(Debug, Clone, Copy)]
pub struct LegendreResult {
    pub eta: C,
    pub iterations: usize,
    /// `|W_eta - z|` at the returned `eta`.
    pub inversion_residual: f64,
    pub w_eta_eta: C,
    pub pjet: PJet,
}

fn p_lhs(phi: C, j: &PJet) -> C {
    j.p_phiphi * j.p_zz - j.p_phiz * j.p_phiz + phi * j.p_phiphi - j.p_phi + j.p_zv
}

/// Left-hand side of the `P` equation for derivatives obtained elsewhere.
pub fn p_equation(phi: C, j: &PJet) -> C {
    p_lhs(phi, j)
}

/// Residual of the `P` equation for a closed-form `P` on `(phi, z, rho, v)`.
pub fn p_residual(p: &PData, point: &[C; DIM]) -> Result<f64> {
    PData::chart().check_point(point, &p.params)?;
    let j = Evaluator::new(*point, &p.params).jet(&p.p)?;
    let pj = PJet {
        p: j.value,
        p_phi: j.d(PHI),
        p_z: j.d(Z),
        p_v: j.d(V),
        p_zz: j.dd(Z, Z),
        p_phiz: j.dd(PHI, Z),
        p_phiphi: j.dd(PHI, PHI),
        p_zv: j.dd(Z, V),
        p_phiv: j.dd(PHI, V),
        p_vv: j.dd(V, V),
    };
    Ok(p_lhs(point[PHI], &pj).norm())
}

/// Solves `W_eta(phi, eta, v) = z` by Newton's method from `eta0` and maps
/// the key-function derivatives onto those of `P`.
pub fn legendre_to_p(w: &WData, phi: C, z: C, v: C, eta0: C) -> Result<LegendreResult> {
    let w = w.to_rescaled();
    let we = w.w.diff(ETA);
    let mut eta = eta0;
    let mut iterations = 0;
    loop {
        let point = [phi, eta, C::new(0.0, 0.0), v];
        let j = Evaluator::new(point, &w.params).jet(&we)?;
        let f = j.value - z;
        if f.norm() < NEWTON_TOL {
            break;
        }
        let wee = j.d(ETA);
        if wee.norm() < DEGENERATE_WEE {
            return Err(Error::DegenerateLegendre(wee.norm()));
        }
        if iterations == NEWTON_MAX_STEPS {
            return Err(Error::NoConvergence(format!(
                "Legendre inversion: |W_eta - z| = {:.3e} after {NEWTON_MAX_STEPS} steps",
                f.norm()
            )));
        }
        eta -= f / wee;
        iterations += 1;
    }
    let point = [phi, eta, C::new(0.0, 0.0), v];
    let j = Evaluator::new(point, &w.params).jet(&w.w)?;
    let wee = j.dd(ETA, ETA);
    if wee.norm() < DEGENERATE_WEE {
        return Err(Error::DegenerateLegendre(wee.norm()));
    }
    let (wf, wv) = (j.d(PHI), j.d(V));
    let (wef, wev) = (j.dd(ETA, PHI), j.dd(ETA, V));
    let (wff, wfv, wvv) = (j.dd(PHI, PHI), j.dd(PHI, V), j.dd(V, V));
    let pjet = PJet {
        p: 0.5 * (j.value - z * eta - 0.5 * phi * z * z),
        p_phi: 0.5 * (wf - 0.5 * z * z),
        p_z: -0.5 * (eta + phi * z),
        p_v: 0.5 * wv,
        p_zz: -0.5 / wee - 0.5 * phi,
        p_phiz: 0.5 * (wef / wee - z),
        p_phiphi: 0.5 * (wff - wef * wef / wee),
        p_zv: 0.5 * wev / wee,
        p_phiv: 0.5 * (wfv - wev * wef / wee),
        p_vv: 0.5 * (wvv - wev * wev / wee),
    };
    Ok(LegendreResult {
        eta,
        iterations,
        inversion_residual: (j.d(ETA) - z).norm(),
        w_eta_eta: wee,
        pjet,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C {
        C::new(x, 0.0)
    }

    #[test]
    fn quadratic_key_function() {
        let eta = Expr::coord(1);
        let w = WData::rescaled(eta.square() / 2.0, Params::new());
        let (phi, z) = (c(0.7), c(1.3));
        let r = legendre_to_p(&w, phi, z, c(0.2), c(0.0)).unwrap();
        assert_eq!(r.iterations, 1);
        assert!((r.eta - z).norm() < 1e-15);
        let want = -z * z * (1.0 + phi) / 4.0;
        assert!((r.pjet.p - want).norm() < 1e-14);
        assert!(p_equation(phi, &r.pjet).norm() < 1e-14);
    }

    #[test]
    fn linear_in_eta_is_degenerate() {
        let w = WData::rescaled(Expr::coord(0) * Expr::coord(1) * 2.0, Params::new());
        let e = legendre_to_p(&w, c(1.0), c(0.5), c(0.0), c(0.0)).unwrap_err();
        assert!(matches!(e, Error::DegenerateLegendre(_)));
    }

    #[test]
    fn dictionary_matches_finite_differences() {
        let (phi, eta, v) = (Expr::coord(0), Expr::coord(1), Expr::coord(3));
        let w = WData::rescaled(
            eta.square() / 2.0 + eta.powi(3) * phi.clone() / 5.0 + eta.clone() * v.square() + phi * v,
            Params::new(),
        );
        let at = |f: f64, z: f64, v: f64| legendre_to_p(&w, c(f), c(z), c(v), c(0.3)).unwrap().pjet;
        let (f0, z0, v0) = (0.8, 0.4, 0.3);
        let base = at(f0, z0, v0);
        let h = 1e-5;
        let d = |a: PJet, b: PJet, sel: fn(&PJet) -> C| (sel(&a) - sel(&b)) / (2.0 * h);
        let fd_zz = d(at(f0, z0 + h, v0), at(f0, z0 - h, v0), |p| p.p_z);
        let fd_phiz = d(at(f0 + h, z0, v0), at(f0 - h, z0, v0), |p| p.p_z);
        let fd_phiphi = d(at(f0 + h, z0, v0), at(f0 - h, z0, v0), |p| p.p_phi);
        let fd_zv = d(at(f0, z0, v0 + h), at(f0, z0, v0 - h), |p| p.p_z);
        let fd_vv = d(at(f0, z0, v0 + h), at(f0, z0, v0 - h), |p| p.p_v);
        let fd_phiv = d(at(f0, z0, v0 + h), at(f0, z0, v0 - h), |p| p.p_phi);
        let fd_z = d(at(f0, z0 + h, v0), at(f0, z0 - h, v0), |p| p.p);
        for (a, b) in [
            (fd_zz, base.p_zz),
            (fd_phiz, base.p_phiz),
            (fd_phiphi, base.p_phiphi),
            (fd_zv, base.p_zv),
            (fd_vv, base.p_vv),
            (fd_phiv, base.p_phiv),
            (fd_z, base.p_z),
        ] {
            assert!((a - b).norm() < 1e-7, "{a} vs {b}");
        }
    }
}
