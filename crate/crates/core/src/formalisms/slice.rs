//! Real slices of the complex U-formalism metric.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::pullback::LORENTZ_NAMES;
use super::u::{build_u_metric, UData, SLICE_NAMES};
use crate::chart::{Chart, FieldTag, Locus};
use crate::error::{Error, Result};
use crate::expr::{Evaluator, Expr, Params};
use crate::jet::{C, DIM};
use crate::metric::{pullback_metric, MetricField};


#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SliceVariant {
    Neutral1,
    Neutral2,
    Euclidean,
    Lorentzian,
}

impl SliceVariant {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "neutral_1" | "neutral1" => Ok(Self::Neutral1),
            "neutral_2" | "neutral2" => Ok(Self::Neutral2),
            "euclidean" => Ok(Self::Euclidean),
            "lorentzian" => Ok(Self::Lorentzian),
            _ => Err(Error::Invalid(format!("unknown slice variant `{s}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Neutral1 => "neutral_1",
            Self::Neutral2 => "neutral_2",
            Self::Euclidean => "euclidean",
            Self::Lorentzian => "lorentzian",
        }
    }

    /// Expected `(positive, negative)` eigenvalue counts.
    pub fn signature(self) -> (usize, usize) {
        match self {
            Self::Neutral1 | Self::Neutral2 => (2, 2),
            Self::Euclidean => (4, 0),
            Self::Lorentzian => (3, 1),
        }
    }

    /// Sign of the Killing invariant on the slice, when fixed.
    pub fn invariant_sign(self) -> Option<i8> {
        match self {
            Self::Neutral1 => Some(-1),
            Self::Neutral2 | Self::Euclidean => Some(1),
            Self::Lorentzian => None,
        }
    }

    /// Upper (`Some(true)`) or lower sign choice of the neutral form.
    pub fn upper(self) -> Option<bool> {
        match self {
            Self::Neutral1 => Some(false),
            Self::Neutral2 => Some(true),
            _ => None,
        }
    }

    /// Factor applied to the cosmological constant.
    pub fn lambda_factor(self) -> f64 {
        match self {
            Self::Neutral1 | Self::Neutral2 => -3.0,
            Self::Euclidean => 6.0,
            Self::Lorentzian => 1.0,
        }
    }

    /// Factors `s_k` with complex coordinate `= s_k *` real coordinate.
    fn scales(self) -> [C; DIM] {
        let (one, i) = (C::new(1.0, 0.0), C::new(0.0, 1.0));
        match self {
            Self::Neutral1 | Self::Lorentzian => [one; DIM],
            Self::Neutral2 => [i, one, i, one],
            Self::Euclidean => [i, i, one, one],
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SliceSpec {
    pub variant: SliceVariant,
}

#[derive(Debug, Clone)]
pub struct SliceResult {
    pub metric: MetricField,
    pub variant: SliceVariant,
    /// Real potential on the slice, `None` for the Lorentzian case.
    pub u_real: Option<Expr>,
    /// The V-formula of the target real form.
    pub v_formula: Option<Expr>,
}

fn scale_lambda(e: &Expr, f: f64) -> Expr {
    let mut m = BTreeMap::new();
    m.insert("Lambda".to_string(), Expr::param("Lambda") * f);
    e.subst_params(&m)
}

/// Builds complex U-data whose slice is the given real data on `(t, x, y, z)`.
pub fn complexify(u_real: &Expr, alpha_real: &[Expr; 3], params: Params, variant: SliceVariant) -> Result<UData> {
    if variant == SliceVariant::Lorentzian {
        return Err(Error::Invalid("the Lorentzian slice has no complexified seed".into()));
    }
    let s = variant.scales();
    let inv: [Expr; DIM] = std::array::from_fn(|k| Expr::coord(k) / Expr::constant(s[k]));
    let f = 1.0 / variant.lambda_factor();
    let u = scale_lambda(&u_real.subst_coords(&inv), f);
    let alpha: [Expr; 3] =
        std::array::from_fn(|k| scale_lambda(&(alpha_real[k].clone() / Expr::constant(s[k])).subst_coords(&inv), f));
    Ok(UData::new(u, alpha, params))
}

/// U-chart coordinates in terms of real `(x, y, z, t)`.
pub fn lorentz_map() -> [Expr; DIM] {
    let [xi, zeta, u, v] = super::pullback::lorentz_to_conformal_map();
    let (lam, tau) = (Expr::param("Lambda"), Expr::param("tau"));
    let big_t = (lam.clone() / 6.0 * u.clone() - v.clone()) / tau.clone();
    let big_z = (u / 2.0 + Expr::c(3.0) * v / lam.clone()) / tau.clone();
    let k = lam * xi / (Expr::c(3.0) * tau.square());
    let big_x = k.clone() - zeta.clone() / 2.0;
    let big_y = -k - zeta / 2.0;
    [big_t, big_x, big_y, big_z]
}

/// Fails with `ComplexLeak` when a component has an imaginary part above
/// `1e-10` relative to the component scale.
pub fn check_real(m: &MetricField, points: &[[C; DIM]]) -> Result<()> {
    for p in points {
        let g = m.values_at(p)?;
        let scale = g.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
        let leak = g.iter().flatten().map(|c| c.im.abs()).fold(0.0, f64::max);
        if leak > 1e-10 * scale {
            return Err(Error::ComplexLeak(leak));
        }
    }
    Ok(())
}

fn obstruction(u: &UData, points: &[[C; DIM]]) -> Result<()> {
    let mut worst: f64 = 0.0;
    for p in points {
        let mut ev = Evaluator::new(*p, &u.params);
        worst = worst.max(ev.value(&u.u)?.norm());
        for a in &u.alpha {
            worst = worst.max(ev.value(a)?.norm());
        }
    }
    if worst > 1e-12 {
        return Err(Error::LorentzianObstruction(format!("max |U|, |alpha| = {worst:.3e}")));
    }
    Ok(())
}

/// Applies the slice substitution to complex data; `points` live on the real
/// target chart (`complex_points` for the obstruction check are derived).
pub fn slice_transform(u: &UData, spec: SliceSpec, points: &[[C; DIM]]) -> Result<SliceResult> {
    let variant = spec.variant;
    let complex = build_u_metric(u);
    if variant == SliceVariant::Lorentzian {
        let map = lorentz_map();
        let cpoints: Vec<[C; DIM]> = points
            .iter()
            .map(|p| {
                let mut ev = Evaluator::new(*p, &u.params);
                let mut q = [C::new(0.0, 0.0); DIM];
                for k in 0..DIM {
                    q[k] = ev.value(&map[k])?;
                }
                Ok(q)
            })
            .collect::<Result<_>>()?;
        obstruction(u, &cpoints)?;
        if !u.u.is_zero() {
            return Err(Error::LorentzianObstruction("U is not identically zero".into()));
        }
        if u.alpha.iter().any(|a| !a.is_zero()) {
            return Err(Error::LorentzianObstruction("alpha is not identically zero".into()));
        }
        let m = pullback_metric(&complex, &map, Chart::new(LORENTZ_NAMES, FieldTag::Real));
        check_real(&m, points)?;
        return Ok(SliceResult { metric: m, variant, u_real: None, v_formula: None });
    }
    let s = variant.scales();
    let map: [Expr; DIM] = std::array::from_fn(|k| Expr::constant(s[k]) * Expr::coord(k));
    let f = variant.lambda_factor();
    let pulled = pullback_metric(&complex, &map, Chart::new(SLICE_NAMES, FieldTag::Real));
    let mut m = pulled.clone();
    for k in 0..m.g.len() {
        m.g[k] = scale_lambda(&pulled.g[k], f);
    }
    m.volume = pulled.volume.as_ref().map(|v| scale_lambda(v, f));
    m.chart.singular_loci = pulled
        .chart
        .singular_loci
        .iter()
        .map(|l| Locus { expr: scale_lambda(&l.expr, f), ..l.clone() })
        .collect();
    check_real(&m, points)?;
    let u_real = scale_lambda(&u.u.subst_coords(&map), f);
    let t = Expr::coord(0);
    let lam = Expr::param("Lambda");
    let core = t * u_real.diff(0) - 2.0;
    let v_formula = match variant {
        SliceVariant::Neutral1 => -core / (Expr::c(2.0) * lam),
        SliceVariant::Neutral2 => core / (Expr::c(2.0) * lam),
        _ => core / (Expr::c(4.0) * lam),
    };
    Ok(SliceResult { metric: m, variant, u_real: Some(u_real), v_formula: Some(v_formula) })
}

/// `|V_measured - V_formula|` with `V_measured` read off `g_zz`.
pub fn v_formula_residual(r: &SliceResult, point: &[C; DIM]) -> Result<f64> {
    let Some(vf) = &r.v_formula else {
        return Ok(0.0);
    };
    let g = r.metric.values_at(point)?;
    let t = point[0];
    let sign = if r.variant == SliceVariant::Euclidean { 1.0 } else { -1.0 };
    let measured = sign / (t * t * g[3][3]);
    let want = vf.eval(point, &r.metric.params)?;
    Ok((measured - want).norm())
}
