//! Constants fixed once from reference metrics: the orientation that makes
//! the vanishing Weyl half the `+` half, and the invariant normalization.

use std::sync::OnceLock;

use crate::curvature::curvature_bundle;
use crate::expr::{Expr, Params};
use crate::formalisms::sigma::{sigma_family_1, sigma_to_u, SigmaData};
use crate::formalisms::u::{build_u_metric_oriented, UData};
use crate::jet::C;
use crate::killing::{killing_point, KillingField};
use crate::sampling::{sample_points, SampleBox};

static ORIENTATION: OnceLock<i8> = OnceLock::new();
static KAPPA: OnceLock<f64> = OnceLock::new();

fn params(lambda: f64, tau: f64) -> Params {
    let mut p = Params::new();
    p.insert("Lambda".into(), C::new(lambda, 0.0));
    p.insert("tau".into(), C::new(tau, 0.0));
    p
}

fn compute_orientation() -> i8 {
    let (xi, v) = (Expr::coord(1), Expr::coord(3));
    let s = SigmaData::new(sigma_family_1(&v, &xi, &xi.square()), params(3.0, 2.0));
    let u = sigma_to_u(&s).expect("reference Sigma data");
    let m = build_u_metric_oriented(&u, 1);
    let bx = SampleBox::new([0.8, -0.9, -0.9, -0.5], [1.6, 0.9, 0.9, 0.5]);
    let p = sample_points(&m.chart, &m.params, &bx, 1).expect("reference point")[0];
    let b = curvature_bundle(&m, &p).expect("reference curvature");
    let (plus, minus) = (b.asd_residual, b.sd_residual);
    if plus < 1e-8 && minus > 1e-3 {
        1
    } else if minus < 1e-8 && plus > 1e-3 {
        -1
    } else {
        panic!("orientation calibration failed: halves {plus:e}, {minus:e}");
    }
}

/// Orientation sign attached to every metric built from a potential.
pub fn sd_orientation() -> i8 {
    *ORIENTATION.get_or_init(compute_orientation)
}

fn compute_kappa() -> f64 {
    let lambda = 3.0;
    let t = 2.0;
    let u = UData::new(Expr::zero(), std::array::from_fn(|_| Expr::zero()), params(lambda, 1.0));
    let m = build_u_metric_oriented(&u, sd_orientation());
    let p = [t, 0.1, 0.2, 0.3].map(|x| C::new(x, 0.0));
    let kp = killing_point(&m, &KillingField::coordinate("d_Z", 3), &p).expect("reference Killing data");
    let want = -2.0 * lambda * lambda / (9.0 * t * t);
    want / kp.raw_plus.re
}

/// Factor turning `F+_ab F+^ab` into the undotted invariant.
pub fn kappa() -> f64 {
    *KAPPA.get_or_init(compute_kappa)
}
