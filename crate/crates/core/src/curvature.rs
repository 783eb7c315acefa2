//! Levi-Civita connection, curvature tensors and the duality split of Weyl.
//!
//! Sign convention: `R^a_bcd = ∂_d Γ^a_cb − ∂_c Γ^a_db + Γ^a_de Γ^e_cb − Γ^a_ce Γ^e_db`
//! with `R_bd = R^a_bad`, which gives `R = −4Λ` for Einstein spaces with
//! `R_ab = −Λ g_ab`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jet::{C, DIM};
use crate::metric::{Mat4, MetricField, MetricPoint};

const ZERO: C = C::new(0.0, 0.0);

pub type T3 = [[[C; DIM]; DIM]; DIM];
pub type T4 = [[[[C; DIM]; DIM]; DIM]; DIM];

pub fn zero3() -> T3 {
    [[[ZERO; DIM]; DIM]; DIM]
}

pub fn zero4() -> T4 {
    [[[[ZERO; DIM]; DIM]; DIM]; DIM]
}

#[derive(Debug, Clone)]
pub struct CurvatureBundle {
    /// `gamma[a][b][c] = Γ^a_bc`
    pub gamma: T3,
    /// `riemann[a][b][c][d] = R^a_bcd`
    pub riemann: T4,
    /// Fully covariant `R_abcd`.
    pub riemann_lower: T4,
    pub ricci: Mat4,
    pub scalar: C,
    pub weyl: T4,
    pub weyl_plus: T4,
    pub weyl_minus: T4,
    pub einstein_residual: f64,
    /// Size of the half that must vanish for ASD metrics (`weyl_plus`).
    pub asd_residual: f64,
    /// Size of the other half (`weyl_minus`).
    pub sd_residual: f64,
    pub weyl_norm: f64,
    pub scale: f64,
}

/// Christoffel symbols and their first derivatives,
/// `dgamma[e][a][b][c] = ∂_e Γ^a_bc`.
pub fn connection(mp: &MetricPoint) -> (T3, T4) {
    let gi = &mp.g_inv;
    let mut low = zero3();
    let mut dlow = zero4();
    for d in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                low[d][b][c] = 0.5 * (mp.dg[b][d][c] + mp.dg[c][d][b] - mp.dg[d][b][c]);
                for e in 0..DIM {
                    dlow[e][d][b][c] =
                        0.5 * (mp.ddg[e][b][d][c] + mp.ddg[e][c][d][b] - mp.ddg[e][d][b][c]);
                }
            }
        }
    }
    // ∂_e g^ad = −g^ap ∂_e g_pq g^qd
    let mut dgi = zero3();
    for e in 0..DIM {
        for a in 0..DIM {
            for d in 0..DIM {
                let mut s = ZERO;
                for p in 0..DIM {
                    for q in 0..DIM {
                        s += gi[a][p] * mp.dg[e][p][q] * gi[q][d];
                    }
                }
                dgi[e][a][d] = -s;
            }
        }
    }
    let mut gamma = zero3();
    let mut dgamma = zero4();
    for a in 0..DIM {
        for b in 0..DIM {
            for c in b..DIM {
                let mut s = ZERO;
                for d in 0..DIM {
                    s += gi[a][d] * low[d][b][c];
                }
                gamma[a][b][c] = s;
                gamma[a][c][b] = s;
                for e in 0..DIM {
                    let mut s = ZERO;
                    for d in 0..DIM {
                        s += dgi[e][a][d] * low[d][b][c] + gi[a][d] * dlow[e][d][b][c];
                    }
                    dgamma[e][a][b][c] = s;
                    dgamma[e][a][c][b] = s;
                }
            }
        }
    }
    (gamma, dgamma)
}

pub fn christoffel(m: &MetricField, point: &[C; DIM]) -> Result<T3> {
    Ok(connection(&m.metric_at(point)?).0)
}

/// Levi-Civita tensor with the first two indices down and the last two up.
pub fn epsilon_mixed(mp: &MetricPoint) -> T4 {
    let mut low = zero4();
    for a in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                for d in 0..DIM {
                    low[a][b][c][d] = mp.vol * perm_sign([a, b, c, d]);
                }
            }
        }
    }
    let gi = &mp.g_inv;
    let mut out = zero4();
    for a in 0..DIM {
        for b in 0..DIM {
            if a == b {
                continue;
            }
            for e in 0..DIM {
                for f in 0..DIM {
                    let mut s = ZERO;
                    for p in 0..DIM {
                        for q in 0..DIM {
                            s += low[a][b][p][q] * gi[p][e] * gi[q][f];
                        }
                    }
                    out[a][b][e][f] = s;
                }
            }
        }
    }
    out
}

fn perm_sign(p: [usize; 4]) -> f64 {
    let mut s = 1.0;
    for i in 0..4 {
        for j in i + 1..4 {
            if p[i] == p[j] {
                return 0.0;
            }
            if p[i] > p[j] {
                s = -s;
            }
        }
    }
    s
}

/// `√(vol²/det)`: the eigenvalue of the Hodge star on its "+" eigenspace.
pub fn star_eigenvalue(mp: &MetricPoint) -> C {
    (mp.vol * mp.vol / mp.det).sqrt()
}

/// Hodge dual on the first index pair of a 2-form-valued tensor.
pub fn dual_first_pair(eps: &T4, t: &T4) -> T4 {
    let mut out = zero4();
    for a in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                for d in 0..DIM {
                    let mut s = ZERO;
                    for e in 0..DIM {
                        for f in 0..DIM {
                            s += eps[a][b][e][f] * t[e][f][c][d];
                        }
                    }
                    out[a][b][c][d] = 0.5 * s;
                }
            }
        }
    }
    out
}

/// Duality halves `½(T ± *T/λ)` of a tensor antisymmetric in its first pair.
pub fn split4(eps: &T4, lambda: C, t: &T4) -> (T4, T4) {
    let st = dual_first_pair(eps, t);
    let mut plus = zero4();
    let mut minus = zero4();
    for a in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                for d in 0..DIM {
                    let x = st[a][b][c][d] / lambda;
                    plus[a][b][c][d] = 0.5 * (t[a][b][c][d] + x);
                    minus[a][b][c][d] = 0.5 * (t[a][b][c][d] - x);
                }
            }
        }
    }
    (plus, minus)
}

pub fn max_norm4(t: &T4) -> f64 {
    t.iter().flatten().flatten().flatten().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn bundle_from_point(mp: &MetricPoint) -> CurvatureBundle {
    let (gamma, dgamma) = connection(mp);
    let mut riemann = zero4();
    for a in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                for d in 0..DIM {
                    let mut s = dgamma[d][a][c][b] - dgamma[c][a][d][b];
                    for e in 0..DIM {
                        s += gamma[a][d][e] * gamma[e][c][b] - gamma[a][c][e] * gamma[e][d][b];
                    }
                    riemann[a][b][c][d] = s;
                }
            }
        }
    }
    let g = &mp.g;
    let mut ricci = [[ZERO; DIM]; DIM];
    for b in 0..DIM {
        for d in 0..DIM {
            ricci[b][d] = (0..DIM).map(|a| riemann[a][b][a][d]).sum();
        }
    }
    let mut scalar = ZERO;
    for b in 0..DIM {
        for d in 0..DIM {
            scalar += mp.g_inv[b][d] * ricci[b][d];
        }
    }
    let mut lower = zero4();
    for a in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                for d in 0..DIM {
                    lower[a][b][c][d] = (0..DIM).map(|e| g[a][e] * riemann[e][b][c][d]).sum();
                }
            }
        }
    }
    let mut weyl = zero4();
    for a in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                for d in 0..DIM {
                    weyl[a][b][c][d] = lower[a][b][c][d]
                        - 0.5
                            * (g[a][c] * ricci[b][d] - g[a][d] * ricci[b][c] - g[b][c] * ricci[a][d]
                                + g[b][d] * ricci[a][c])
                        + scalar / 6.0 * (g[a][c] * g[b][d] - g[a][d] * g[b][c]);
                }
            }
        }
    }
    let eps = epsilon_mixed(mp);
    let (weyl_plus, weyl_minus) = split4(&eps, star_eigenvalue(mp), &weyl);
    let scale = mp.scale;
    let mut einstein: f64 = 0.0;
    for a in 0..DIM {
        for b in 0..DIM {
            einstein = einstein.max((ricci[a][b] - scalar / 4.0 * g[a][b]).norm());
        }
    }
    CurvatureBundle {
        gamma,
        riemann,
        riemann_lower: lower,
        ricci,
        scalar,
        einstein_residual: einstein / scale,
        asd_residual: max_norm4(&weyl_plus) / scale,
        sd_residual: max_norm4(&weyl_minus) / scale,
        weyl_norm: max_norm4(&weyl) / scale,
        weyl,
        weyl_plus,
        weyl_minus,
        scale,
    }
}

pub fn curvature_bundle(m: &MetricField, point: &[C; DIM]) -> Result<CurvatureBundle> {
    Ok(bundle_from_point(&m.metric_at(point)?))
}

/// Formats a point for error messages and reports.
pub fn point_label(p: &[C; DIM]) -> Vec<f64> {
    p.iter().map(|c| c.re).collect()
}

pub fn attach_point(e: Error, p: &[C; DIM]) -> Error {
    let at = format!(" at {:?}", point_label(p));
    match e {
        Error::SingularPoint(s) => Error::SingularPoint(s + &at),
        Error::DegenerateMetric(s) => Error::DegenerateMetric(s + &at),
        Error::BranchAmbiguity(s) => Error::BranchAmbiguity(s + &at),
        Error::DegenerateSigma(s) => Error::DegenerateSigma(s + &at),
        Error::DegenerateV(s) => Error::DegenerateV(s + &at),
        other => other,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EinsteinCertificate {
    pub points_evaluated: usize,
    pub max_einstein_residual: f64,
    pub max_scalar_deviation: f64,
    pub max_sd_weyl: f64,
    pub max_asd_weyl: f64,
    pub max_weyl: f64,
    pub worst_point: Vec<f64>,
}

/// Aggregates curvature over `points`; `max_sd_weyl` tracks `weyl_plus`.
pub fn einstein_certificate(m: &MetricField, lambda: f64, points: &[[C; DIM]]) -> Result<EinsteinCertificate> {
    if points.is_empty() {
        return Err(Error::Invalid("einstein_certificate needs at least one point".into()));
    }
    let bundles: Vec<Result<CurvatureBundle>> =
        points.par_iter().map(|p| curvature_bundle(m, p).map_err(|e| attach_point(e, p))).collect();
    let mut cert = EinsteinCertificate {
        points_evaluated: points.len(),
        max_einstein_residual: 0.0,
        max_scalar_deviation: 0.0,
        max_sd_weyl: 0.0,
        max_asd_weyl: 0.0,
        max_weyl: 0.0,
        worst_point: point_label(&points[0]),
    };
    let mut worst = -1.0;
    for (p, b) in points.iter().zip(bundles) {
        let b = b?;
        let dev = if lambda == 0.0 {
            b.scalar.norm()
        } else {
            (b.scalar + 4.0 * lambda).norm() / lambda.abs()
        };
        cert.max_einstein_residual = cert.max_einstein_residual.max(b.einstein_residual);
        cert.max_scalar_deviation = cert.max_scalar_deviation.max(dev);
        cert.max_sd_weyl = cert.max_sd_weyl.max(b.asd_residual);
        cert.max_asd_weyl = cert.max_asd_weyl.max(b.sd_residual);
        cert.max_weyl = cert.max_weyl.max(b.weyl_norm);
        let badness = b.einstein_residual.max(dev).max(b.asd_residual);
        if badness > worst {
            worst = badness;
            cert.worst_point = point_label(p);
        }
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{Chart, FieldTag};
    use crate::expr::{Expr, Params};

    fn pt(a: [f64; 4]) -> [C; 4] {
        a.map(|x| C::new(x, 0.0))
    }

    #[test]
    fn flat_has_no_curvature() {
        let m = MetricField::diagonal(
            Chart::new(["x", "y", "z", "t"], FieldTag::Real),
            Params::new(),
            [Expr::c(1.0), Expr::c(1.0), Expr::c(1.0), Expr::c(-1.0)],
        );
        let b = curvature_bundle(&m, &pt([0.1, 0.2, 0.3, 0.4])).unwrap();
        assert_eq!(max_norm4(&b.riemann), 0.0);
        assert_eq!(b.einstein_residual, 0.0);
        assert_eq!(b.asd_residual, 0.0);
        let cert = einstein_certificate(&m, 0.0, &[pt([0.0; 4])]).unwrap();
        assert_eq!(cert.max_scalar_deviation, 0.0);
    }

    #[test]
    fn round_sphere_times_plane() {
        // S^2 of radius 1 times R^2: R = 2 in the usual sign, so -2 here
        let th = Expr::coord(0);
        let sin = (Expr::i() * th.clone()).exp() - (-(Expr::i() * th)).exp();
        let sin2 = -(sin.square()) / 4.0;
        let m = MetricField::diagonal(
            Chart::new(["th", "ph", "x", "y"], FieldTag::Real),
            Params::new(),
            [Expr::c(1.0), sin2, Expr::c(1.0), Expr::c(1.0)],
        );
        let b = curvature_bundle(&m, &pt([1.1, 0.3, 0.0, 0.0])).unwrap();
        assert!((b.scalar + C::new(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn constant_rescaling_keeps_christoffels() {
        let x = Expr::coord(0);
        let comps = [x.clone().exp(), Expr::c(1.0) + x.square(), Expr::c(2.0), Expr::coord(1) + 3.0];
        let chart = Chart::new(["a", "b", "c", "d"], FieldTag::Complex);
        let m1 = MetricField::diagonal(chart.clone(), Params::new(), comps.clone());
        let m2 = MetricField::diagonal(chart, Params::new(), comps.map(|e| e * 7.5));
        let p = pt([0.3, 0.2, 0.0, 0.0]);
        let g1 = christoffel(&m1, &p).unwrap();
        let g2 = christoffel(&m2, &p).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    assert!((g1[a][b][c] - g2[a][b][c]).norm() < 1e-14);
                }
            }
        }
    }
}
