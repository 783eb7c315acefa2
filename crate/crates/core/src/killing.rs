//! Killing residuals, the duality-half invariants of `∇K` and the
//! null/nonnull classification.

use serde::{Deserialize, Serialize};

use crate::curvature::{attach_point, connection, epsilon_mixed, point_label, star_eigenvalue};
use crate::error::{Error, Result};
use crate::expr::{Evaluator, Expr};
use crate::jet::{C, DIM};
use crate::metric::{Mat4, MetricField};

/// Threshold for the Killing precondition and for null tests.
pub const KILLING_TOL: f64 = 1e-8;

const ZERO: C = C::new(0.0, 0.0);

/// Contravariant components `K^a` in the chart of the metric.
#[derive(Debug, Clone)]
pub struct KillingField {
    pub name: String,
    pub components: [Expr; DIM],
}

impl KillingField {
    pub fn new(name: &str, components: [Expr; DIM]) -> Self {
        Self { name: name.to_string(), components }
    }

    /// The coordinate vector `∂_k`.
    pub fn coordinate(name: &str, k: usize) -> Self {
        Self::new(name, std::array::from_fn(|a| if a == k { Expr::one() } else { Expr::zero() }))
    }
}

/// `∇K` and derived quantities at one point.
#[derive(Debug, Clone)]
pub struct KillingPoint {
    /// `f[a][b] = ∇_a K_b`
    pub f: Mat4,
    pub residual: f64,
    pub k_norm: C,
    /// `K_a K^a` relative to the metric scale and the size of `K`.
    pub k_norm_rel: f64,
    /// Uncalibrated `F±_ab F±^ab`.
    pub raw_plus: C,
    pub raw_minus: C,
    /// `Σ |F_ab| |F^ab|`, bounds both raw contractions.
    pub f_scale: f64,
}

pub fn killing_point(m: &MetricField, k: &KillingField, point: &[C; DIM]) -> Result<KillingPoint> {
    m.chart.check_point(point, &m.params)?;
    let mp = m.metric_at(point)?;
    let (gamma, _) = connection(&mp);
    let mut ev = Evaluator::new(*point, &m.params);
    let kj: Vec<_> = k.components.iter().map(|c| ev.jet(c)).collect::<Result<_>>()?;
    let kup: [C; DIM] = std::array::from_fn(|a| kj[a].value);
    let klow: [C; DIM] = std::array::from_fn(|b| (0..DIM).map(|c| mp.g[b][c] * kup[c]).sum());
    let mut f = [[ZERO; DIM]; DIM];
    let mut size: f64 = 0.0;
    for a in 0..DIM {
        for b in 0..DIM {
            let mut d = ZERO;
            for c in 0..DIM {
                d += mp.dg[a][b][c] * kup[c] + mp.g[b][c] * kj[c].d(a);
            }
            let conn: C = (0..DIM).map(|c| gamma[c][a][b] * klow[c]).sum();
            size = size.max(d.norm()).max(conn.norm());
            f[a][b] = d - conn;
        }
    }
    let mut sym: f64 = 0.0;
    for a in 0..DIM {
        for b in 0..DIM {
            sym = sym.max((f[a][b] + f[b][a]).norm());
        }
    }
    let residual = if size == 0.0 { 0.0 } else { sym / size };
    let k_norm: C = (0..DIM).map(|a| klow[a] * kup[a]).sum();
    let kmax = kup.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let k_norm_rel = if kmax == 0.0 { 0.0 } else { k_norm.norm() / (mp.scale * kmax * kmax) };

    // antisymmetric part, duality halves and their squares
    let fa: Mat4 = std::array::from_fn(|a| std::array::from_fn(|b| 0.5 * (f[a][b] - f[b][a])));
    let eps = epsilon_mixed(&mp);
    let lam = star_eigenvalue(&mp);
    let mut plus = [[ZERO; DIM]; DIM];
    let mut minus = [[ZERO; DIM]; DIM];
    for a in 0..DIM {
        for b in 0..DIM {
            let mut s = ZERO;
            for e in 0..DIM {
                for g in 0..DIM {
                    s += eps[a][b][e][g] * fa[e][g];
                }
            }
            let star = 0.5 * s / lam;
            plus[a][b] = 0.5 * (fa[a][b] + star);
            minus[a][b] = 0.5 * (fa[a][b] - star);
        }
    }
    let gi = &mp.g_inv;
    let raise = |t: &Mat4| -> Mat4 {
        std::array::from_fn(|a| {
            std::array::from_fn(|b| {
                let mut s = ZERO;
                for c in 0..DIM {
                    for d in 0..DIM {
                        s += gi[a][c] * gi[b][d] * t[c][d];
                    }
                }
                s
            })
        })
    };
    let contract = |x: &Mat4, y: &Mat4| -> C {
        let mut s = ZERO;
        for a in 0..DIM {
            for b in 0..DIM {
                s += x[a][b] * y[a][b];
            }
        }
        s
    };
    let fa_up = raise(&fa);
    let mut f_scale = 0.0;
    for a in 0..DIM {
        for b in 0..DIM {
            f_scale += fa[a][b].norm() * fa_up[a][b].norm();
        }
    }
    Ok(KillingPoint {
        raw_plus: contract(&plus, &raise(&plus)),
        raw_minus: contract(&minus, &raise(&minus)),
        f,
        residual,
        k_norm,
        k_norm_rel,
        f_scale,
    })
}

pub fn killing_residual(m: &MetricField, k: &KillingField, point: &[C; DIM]) -> Result<f64> {
    Ok(killing_point(m, k, point)?.residual)
}

/// Calibrated `(inv_plus, inv_minus)`; `inv_plus` is the undotted invariant.
pub fn l_invariants(m: &MetricField, k: &KillingField, point: &[C; DIM]) -> Result<(C, C)> {
    let kp = killing_point(m, k, point)?;
    if kp.residual > KILLING_TOL {
        return Err(Error::NotKilling { residual: kp.residual, tol: KILLING_TOL });
    }
    let kappa = crate::calibration::kappa();
    Ok((kappa * kp.raw_plus, kappa * kp.raw_minus))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Null,
    Nonnull,
    NotKilling,
}

#[derive(Debug, Clone, Serialize)]
pub struct KillingReport {
    pub name: String,
    pub points_evaluated: usize,
    pub killing_residual: f64,
    /// `K_a K^a` at the first point.
    pub k_norm: f64,
    /// Real parts of the calibrated invariants at the first point.
    pub inv_plus: f64,
    pub inv_minus: f64,
    pub kappa: f64,
    pub classification: Classification,
}

/// Classifies `k` over `points`, asserting the null/invariant equivalence
/// when `Lambda` is nonzero.
pub fn classify_killing(m: &MetricField, k: &KillingField, points: &[[C; DIM]]) -> Result<KillingReport> {
    if points.is_empty() {
        return Err(Error::Invalid("classify_killing needs at least one point".into()));
    }
    let lambda = m.params.get("Lambda").copied().unwrap_or(ZERO);
    let kappa = crate::calibration::kappa();
    let mut report = KillingReport {
        name: k.name.clone(),
        points_evaluated: points.len(),
        killing_residual: 0.0,
        k_norm: 0.0,
        inv_plus: 0.0,
        inv_minus: 0.0,
        kappa,
        classification: Classification::Nonnull,
    };
    let (mut any_null, mut any_nonnull) = (false, false);
    for (i, p) in points.iter().enumerate() {
        let kp = killing_point(m, k, p).map_err(|e| attach_point(e, p))?;
        report.killing_residual = report.killing_residual.max(kp.residual);
        if kp.residual > KILLING_TOL {
            return Err(Error::NotKilling { residual: kp.residual, tol: KILLING_TOL });
        }
        let scale = kp.f_scale.max(1e-300);
        let inv_null = kp.raw_plus.norm() / scale < KILLING_TOL && kp.raw_minus.norm() / scale < KILLING_TOL;
        let k_null = kp.k_norm_rel < KILLING_TOL;
        if lambda.norm() > 0.0 && k_null != inv_null {
            return Err(Error::TheoremViolation(format!(
                "|K.K| = {:.3e} but invariants ({:.3e}, {:.3e}) at {:?}",
                kp.k_norm.norm(),
                kp.raw_plus.norm() * kappa.abs(),
                kp.raw_minus.norm() * kappa.abs(),
                point_label(p)
            )));
        }
        if k_null {
            any_null = true;
        } else {
            any_nonnull = true;
        }
        if i == 0 {
            report.k_norm = kp.k_norm.re;
            report.inv_plus = (kappa * kp.raw_plus).re;
            report.inv_minus = (kappa * kp.raw_minus).re;
        }
    }
    report.classification = match (any_null, any_nonnull) {
        (true, false) => Classification::Null,
        (false, true) => Classification::Nonnull,
        _ => {
            return Err(Error::TheoremViolation(format!("{} is null at some points only", k.name)));
        }
    };
    Ok(report)
}
