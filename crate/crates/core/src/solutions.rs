//! Catalog of exact solution families and their self-checks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::calibration::kappa;
use crate::chart::{Chart, FieldTag, LocusKind};
use crate::curvature::{attach_point, einstein_certificate, point_label};
use crate::error::{Error, Result};
use crate::expr::{Expr, Params};
use crate::formalisms::pullback::{
    case_ii_map, conformal_constraint, conformal_factor, conformal_metric, lorentz_chain_target,
    lorentz_simple_metric, lorentz_to_conformal_map, primed_map, pullback_compare, simple_factor,
    w0_to_simple_v_map, CONFORMAL_NAMES, LORENTZ_NAMES,
};
use crate::formalisms::sigma::{
    build_sigma_metric, sigma_family_1, sigma_family_2, sigma_residual, sigma_to_u, step4_map, SigmaData,
    SIGMA_NAMES,
};
use crate::formalisms::slice::{slice_transform, SliceSpec, SliceVariant};
use crate::formalisms::u::{
    alpha_residual, bfp_residual, build_hogner_metric, build_tod_metric, build_u_metric, check_v, link_residual,
    real_alpha_residual, RealForm, UData, SLICE_NAMES, U_NAMES,
};
use crate::formalisms::w::{build_w_metric, case_ii_key_function, heavenly_residual, WData, W_NAMES};
use crate::jet::{C, DIM};
use crate::killing::{classify_killing, killing_point, Classification, KillingField};
use crate::metric::{compare_at, MetricField};
use crate::report::{Check, Report, Sci};
use crate::sampling::{sample_points, SampleBox};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formalism {
    W,
    Sigma,
    U,
    ExplicitMetric,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpectedKilling {
    pub name: String,
    /// Contravariant components in the record's chart.
    pub components: [String; DIM],
    #[serde(default)]
    pub classification: Option<Classification>,
    /// Closed form of the undotted invariant.
    #[serde(default)]
    pub undotted: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Expected {
    /// Einstein constant of the metric divided by the `Lambda` parameter.
    #[serde(default = "one")]
    pub einstein_factor: f64,
    pub sd_weyl_zero: bool,
    pub full_weyl_zero: bool,
    #[serde(default)]
    pub signature: Option<(usize, usize)>,
    #[serde(default)]
    pub killing: Vec<ExpectedKilling>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub id: String,
    #[serde(default)]
    pub description: String,
    pub formalism: Formalism,
    /// Real form for U-type metrics on `(t, x, y, z)`.
    #[serde(default)]
    pub real_form: Option<RealForm>,
    /// Named payload expressions in the grammar of the record's chart.
    pub slots: BTreeMap<String, String>,
    pub params: BTreeMap<String, f64>,
    pub sample_box: SampleBox,
    pub expected: Expected,
    /// Payload constructed here rather than printed in closed form upstream.
    #[serde(default)]
    pub derived: bool,
}

impl SolutionRecord {
    /// Coordinate names of the chart the slots are written in.
    pub fn chart_names(&self) -> [&'static str; DIM] {
        match (self.formalism, self.real_form) {
            (Formalism::W, _) => W_NAMES,
            (Formalism::Sigma, _) => SIGMA_NAMES,
            (Formalism::U, None) => U_NAMES,
            (Formalism::U, Some(_)) => SLICE_NAMES,
            (Formalism::ExplicitMetric, _) => {
                if self.id == "desitter_lorentzian" {
                    LORENTZ_NAMES
                } else {
                    CONFORMAL_NAMES
                }
            }
        }
    }

    pub fn field_tag(&self) -> FieldTag {
        match (self.formalism, self.real_form) {
            (Formalism::U, Some(_)) => FieldTag::Real,
            (Formalism::ExplicitMetric, _) if self.id == "desitter_lorentzian" => FieldTag::Real,
            _ => FieldTag::Complex,
        }
    }

    pub fn from_json(src: &str) -> Result<Self> {
        serde_json::from_str(src).map_err(|e| Error::Invalid(format!("family file: {e}")))
    }
}

/// Parameter and slot overrides.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub params: BTreeMap<String, f64>,
    pub slots: BTreeMap<String, String>,
}

pub const CATALOG: [&str; 13] = [
    "desitter_w0",
    "caseII_key_function",
    "desitter_conformal",
    "desitter_simple_v",
    "desitter_u_form",
    "sigma_xi_phi",
    "sigma_family_1",
    "sigma_family_2",
    "u_harmonic_complex",
    "u_confflat_1",
    "tod_harmonic",
    "hogner_log",
    "desitter_lorentzian",
];

pub fn catalog() -> Vec<&'static str> {
    CATALOG.to_vec()
}

fn slots(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

fn nums(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn kv(name: &str, c: [&str; DIM], class: Option<Classification>, undotted: Option<&str>) -> ExpectedKilling {
    ExpectedKilling {
        name: name.to_string(),
        components: c.map(String::from),
        classification: class,
        undotted: undotted.map(String::from),
    }
}

const W_INVARIANT: &str = "-2*(Lambda/(3*tau*phi))^2";
const U_INVARIANT: &str = "-2*Lambda^2/(9*T^2)";

fn asd(killing: Vec<ExpectedKilling>) -> Expected {
    Expected { einstein_factor: 1.0, sd_weyl_zero: true, full_weyl_zero: false, signature: None, killing }
}

fn conformally_flat(killing: Vec<ExpectedKilling>) -> Expected {
    Expected { full_weyl_zero: true, ..asd(killing) }
}

fn ten_killing_vectors() -> Vec<ExpectedKilling> {
    use Classification::{Nonnull, Null};
    // chart order (phi, eta, t, w)
    vec![
        kv("d_t", ["0", "0", "1", "0"], Some(Nonnull), Some(W_INVARIANT)),
        kv("d_w", ["0", "0", "0", "1"], Some(Null), None),
        kv("d_eta", ["0", "1", "0", "0"], Some(Null), None),
        kv("dilation", ["phi", "2*eta", "t", "0"], None, None),
        kv("boost", ["0", "-eta", "0", "w"], None, None),
        kv("k6", ["0", "0", "eta", "phi - Lambda*t/(3*tau)"], None, None),
        kv("k7", ["0", "phi - Lambda*t/(3*tau)", "w", "0"], None, None),
        kv("k8", ["phi*w", "phi*t - Lambda*t^2/(6*tau)", "t*w", "w^2"], None, None),
        kv("k9", ["eta*phi", "eta^2", "t*eta", "t*phi - Lambda*t^2/(6*tau)"], None, None),
        kv(
            "k10",
            [
                "phi^2 - Lambda*phi*t/(3*tau)",
                "eta*phi - Lambda*eta*t/(3*tau)",
                "w*eta - Lambda*t^2/(6*tau)",
                "w*phi - Lambda*t*w/(3*tau)",
            ],
            None,
            None,
        ),
    ]
}

/// Catalog record with default payload and parameters.
pub fn record(id: &str) -> Result<SolutionRecord> {
    use Classification::{Nonnull, Null};
    let w_box = SampleBox::new([0.5, -1.0, -1.0, -1.0], [1.5, 1.0, 1.0, 1.0]);
    let sigma_box = SampleBox::new([0.5, -0.9, -1.0, -0.9], [1.5, 0.9, 1.0, 0.9]);
    let u_box = SampleBox::new([0.5, -0.9, -0.9, -1.0], [1.5, 0.9, 0.9, 1.0]);
    let d_rho = || vec![kv("d_rho", ["0", "0", "1", "0"], Some(Nonnull), Some(W_INVARIANT))];
    let d_z = || vec![kv("d_Z", ["0", "0", "0", "1"], Some(Nonnull), Some(U_INVARIANT))];
    let lt = [("Lambda", 3.0), ("tau", 1.0)];
    let r = |id: &str, description: &str, formalism, s: BTreeMap<String, String>, p, b, e| SolutionRecord {
        id: id.to_string(),
        description: description.to_string(),
        formalism,
        real_form: None,
        slots: s,
        params: p,
        sample_box: b,
        expected: e,
        derived: false,
    };
    let rec = match id {
        "desitter_w0" => r(
            id,
            "de Sitter space from the zero key function",
            Formalism::W,
            slots(&[("W", "0")]),
            nums(&lt),
            w_box,
            conformally_flat(ten_killing_vectors()),
        ),
        "caseII_key_function" => r(
            id,
            "general key function with W_eta_eta = 0; f1..f4 are functions of w",
            Formalism::W,
            slots(&[("f1", "w"), ("f2", "1"), ("f3", "0"), ("f4", "0")]),
            nums(&lt),
            w_box,
            asd(vec![kv("d_t", ["0", "0", "1", "0"], Some(Nonnull), Some(W_INVARIANT))]),
        ),
        "desitter_conformal" => r(
            id,
            "conformally flat de Sitter form (2 dxi dzeta + 2 du dv)/Phi^2; epsilon0 defaults to the constrained value",
            Formalism::ExplicitMetric,
            BTreeMap::new(),
            nums(&[("Lambda", 3.0), ("alpha0", 1.0), ("beta0", 0.1), ("mu0", 0.2), ("gamma0", 0.1), ("delta0", -0.2)]),
            SampleBox::cube(-0.3, 0.3),
            conformally_flat(vec![]),
        ),
        "desitter_simple_v" => r(
            id,
            "de Sitter form with denominator (Lambda/6) u - v",
            Formalism::ExplicitMetric,
            BTreeMap::new(),
            nums(&lt),
            SampleBox::new([-1.0, -1.0, 0.2, -1.0], [1.0, 1.0, 1.0, -0.2]),
            conformally_flat(vec![
                kv("d_xi", ["1", "0", "0", "0"], Some(Null), None),
                kv("d_zeta", ["0", "1", "0", "0"], Some(Null), None),
            ]),
        ),
        "desitter_u_form" => r(
            id,
            "de Sitter space in the U formalism, U = 0 and alpha = 0",
            Formalism::U,
            slots(&[("U", "0"), ("alpha_T", "0"), ("alpha_X", "0"), ("alpha_Y", "0")]),
            nums(&lt),
            u_box,
            conformally_flat(d_z()),
        ),
        "sigma_xi_phi" => r(
            id,
            "Sigma = phi xi, equivalent to U = ln T",
            Formalism::Sigma,
            slots(&[("Sigma", "phi*xi")]),
            nums(&[("Lambda", 3.0), ("tau", 2.0)]),
            sigma_box,
            asd(d_rho()),
        ),
        "sigma_family_1" => r(
            id,
            "Sigma = -f_v phi^2/2 + e^f (a phi + b); f = f(v), a and b functions of (xi, v) with a_xi != 0",
            Formalism::Sigma,
            slots(&[("f", "v"), ("a", "xi"), ("b", "xi^2")]),
            nums(&[("Lambda", 3.0), ("tau", 2.0)]),
            sigma_box,
            asd(d_rho()),
        ),
        "sigma_family_2" => r(
            id,
            "Sigma = -f_v phi^2/2 + a e^f (phi + g) - g_v (phi + g) ln(phi + g); f, g functions of v, a of (xi, v)",
            Formalism::Sigma,
            slots(&[("f", "v"), ("g", "v"), ("a", "xi")]),
            nums(&[("Lambda", 3.0), ("tau", 2.0)]),
            sigma_box,
            asd(d_rho()),
        ),
        "u_harmonic_complex" => r(
            id,
            "U = f(X + Y) with alpha = 0",
            Formalism::U,
            slots(&[("f", "(X+Y)^2")]),
            nums(&lt),
            u_box,
            conformally_flat(d_z()),
        ),
        "u_confflat_1" => SolutionRecord {
            derived: true,
            ..r(
                id,
                "U = ln(6bT^2 + 2cT - 1) + ln(2/(3b)) - 2 ln(1 + X^2 - Y^2), alpha = 0; separable only for c = 0",
                Formalism::U,
                BTreeMap::new(),
                nums(&[("Lambda", 3.0), ("tau", 1.0), ("b", 1.0), ("c", 0.0)]),
                SampleBox::new([0.8, -0.5, -0.5, -1.0], [1.5, 0.5, 0.5, 1.0]),
                conformally_flat(d_z()),
            )
        },
        "tod_harmonic" => SolutionRecord {
            real_form: Some(RealForm::Tod),
            ..r(
                id,
                "Riemannian metric from the t-independent harmonic U = x^2 - y^2",
                Formalism::U,
                slots(&[("U", "x^2 - y^2"), ("alpha_t", "0"), ("alpha_x", "0"), ("alpha_y", "0")]),
                nums(&[("Lambda", -3.0)]),
                SampleBox::new([0.5, -1.0, -1.0, -1.0], [1.5, 1.0, 1.0, 1.0]),
                Expected {
                    einstein_factor: 6.0,
                    signature: Some((4, 0)),
                    ..asd(vec![kv("d_z", ["0", "0", "0", "1"], Some(Nonnull), Some("8*Lambda^2/t^2"))])
                },
            )
        },
        "hogner_log" => SolutionRecord {
            real_form: Some(RealForm::HognerUpper),
            ..r(
                id,
                "neutral metric with U = ln t and alpha = (x dy - y dx)/(4 Lambda)",
                Formalism::U,
                slots(&[("U", "ln(t)"), ("alpha_t", "0"), ("alpha_x", "-y/(4*Lambda)"), ("alpha_y", "x/(4*Lambda)")]),
                nums(&[("Lambda", 3.0)]),
                SampleBox::new([0.5, -1.0, -1.0, -1.0], [1.5, 1.0, 1.0, 1.0]),
                Expected {
                    einstein_factor: -3.0,
                    signature: Some((2, 2)),
                    ..asd(vec![kv("d_z", ["0", "0", "0", "1"], Some(Nonnull), Some("2*Lambda^2/t^2"))])
                },
            )
        },
        "desitter_lorentzian" => r(
            id,
            "real de Sitter spacetime (dx^2 + dy^2 + dz^2 - dt^2)/(1 + (Lambda/12)(x^2 + y^2 + z^2 - t^2))^2",
            Formalism::ExplicitMetric,
            BTreeMap::new(),
            nums(&lt),
            SampleBox::cube(-0.5, 0.5),
            Expected {
                signature: Some((3, 1)),
                ..conformally_flat(vec![kv("rotation", ["-y", "x", "0", "0"], Some(Nonnull), None)])
            },
        ),
        _ => return Err(Error::UnknownFamily(id.to_string())),
    };
    Ok(rec)
}

/// Formalism-specific data kept next to the metric.
#[derive(Debug, Clone)]
pub enum Payload {
    W(WData),
    Sigma(SigmaData),
    U(UData),
    Real { u: Expr, alpha: [Expr; 3], form: RealForm },
    Explicit,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub record: SolutionRecord,
    pub params: Params,
    pub slots: BTreeMap<String, Expr>,
    pub metric: MetricField,
    pub payload: Payload,
}

fn merged_record(mut rec: SolutionRecord, ov: &Overrides) -> Result<SolutionRecord> {
    for (k, v) in &ov.slots {
        if !rec.slots.contains_key(k) {
            return Err(Error::Invalid(format!("family `{}` has no slot `{k}`", rec.id)));
        }
        rec.slots.insert(k.clone(), v.clone());
    }
    for (k, v) in &ov.params {
        rec.params.insert(k.clone(), *v);
    }
    Ok(rec)
}

fn to_params(p: &BTreeMap<String, f64>) -> Params {
    p.iter().map(|(k, v)| (k.clone(), C::new(*v, 0.0))).collect()
}

fn parse_slots(rec: &SolutionRecord) -> Result<BTreeMap<String, Expr>> {
    let chart = Chart::new(rec.chart_names(), rec.field_tag());
    rec.slots.iter().map(|(k, v)| Ok((k.clone(), chart.parse(v)?))).collect()
}

fn slot(s: &BTreeMap<String, Expr>, name: &str) -> Result<Expr> {
    s.get(name).cloned().ok_or_else(|| Error::Invalid(format!("missing slot `{name}`")))
}

fn alpha_slots(s: &BTreeMap<String, Expr>, names: [&str; 3]) -> Result<[Expr; 3]> {
    Ok([slot(s, names[0])?, slot(s, names[1])?, slot(s, names[2])?])
}

fn confflat_u(params: &Params) -> Result<Expr> {
    let c = params.get("c").copied().unwrap_or_default();
    if c.norm() != 0.0 {
        return Err(Error::ConstraintViolation(
            "the separable Liouville reduction needs c = 0; for c != 0 the T-part of U is not ln(6bT^2 + 2cT - 1)".into(),
        ));
    }
    let (t, x, y) = (Expr::coord(0), Expr::coord(1), Expr::coord(2));
    let b = Expr::param("b");
    Ok((Expr::c(6.0) * b.clone() * t.square() - 1.0).ln() + (Expr::c(2.0) / (Expr::c(3.0) * b)).ln()
        - Expr::c(2.0) * (Expr::one() + x.square() - y.square()).ln())
}

fn conformal_params(params: &mut Params, user: &Overrides) -> Result<()> {
    let get = |p: &Params, k: &str| p.get(k).copied().unwrap_or_default();
    if !user.params.contains_key("epsilon0") {
        let a0 = get(params, "alpha0");
        if a0.norm() == 0.0 {
            return Err(Error::ConstraintViolation("alpha0 = 0 leaves epsilon0 undetermined".into()));
        }
        let e = (get(params, "Lambda") / 6.0 + get(params, "beta0") * get(params, "mu0")
            + get(params, "gamma0") * get(params, "delta0"))
            / a0;
        params.insert("epsilon0".into(), e);
    }
    let dev = conformal_constraint(params)?;
    if dev.norm() > 1e-12 {
        return Err(Error::ConstraintViolation(format!(
            "Lambda/6 - (alpha0 epsilon0 - beta0 mu0 - gamma0 delta0) = {:.3e}",
            dev.norm()
        )));
    }
    Ok(())
}

/// Builds the metric of a record with overrides applied.
pub fn instantiate_record(rec: SolutionRecord, ov: &Overrides) -> Result<Instance> {
    let rec = merged_record(rec, ov)?;
    let mut params = to_params(&rec.params);
    let s = parse_slots(&rec)?;
    let (metric, payload) = match (rec.formalism, rec.id.as_str()) {
        (Formalism::W, "caseII_key_function") => {
            let f = [slot(&s, "f1")?, slot(&s, "f2")?, slot(&s, "f3")?, slot(&s, "f4")?];
            let w = WData::new(case_ii_key_function(&f), params.clone());
            (build_w_metric(&w), Payload::W(w))
        }
        (Formalism::W, _) => {
            let w = WData::new(slot(&s, "W")?, params.clone());
            (build_w_metric(&w), Payload::W(w))
        }
        (Formalism::Sigma, id) => {
            let sigma = match id {
                "sigma_family_1" => sigma_family_1(&slot(&s, "f")?, &slot(&s, "a")?, &slot(&s, "b")?),
                "sigma_family_2" => sigma_family_2(&slot(&s, "f")?, &slot(&s, "g")?, &slot(&s, "a")?),
                _ => slot(&s, "Sigma")?,
            };
            let d = SigmaData::new(sigma, params.clone());
            (build_sigma_metric(&d), Payload::Sigma(d))
        }
        (Formalism::U, id) if rec.real_form.is_none() => {
            let data = match id {
                "u_harmonic_complex" => UData::new(slot(&s, "f")?, std::array::from_fn(|_| Expr::zero()), params.clone()),
                "u_confflat_1" => {
                    let mut d = UData::new(confflat_u(&params)?, std::array::from_fn(|_| Expr::zero()), params.clone());
                    let (t, x, y) = (Expr::coord(0), Expr::coord(1), Expr::coord(2));
                    d.chart = d
                        .chart
                        .with_locus("6bT^2-1", Expr::c(6.0) * Expr::param("b") * t.square() - 1.0, LocusKind::General)
                        .with_locus("1+X^2-Y^2", Expr::one() + x.square() - y.square(), LocusKind::General);
                    d
                }
                _ => UData::new(slot(&s, "U")?, alpha_slots(&s, ["alpha_T", "alpha_X", "alpha_Y"])?, params.clone()),
            };
            (build_u_metric(&data), Payload::U(data))
        }
        (Formalism::U, _) => {
            let form = rec.real_form.expect("real form");
            let u = slot(&s, "U")?;
            let alpha = alpha_slots(&s, ["alpha_t", "alpha_x", "alpha_y"])?;
            let m = match form {
                RealForm::Tod => build_tod_metric(&u, alpha.clone(), params.clone()),
                RealForm::HognerUpper => build_hogner_metric(&u, alpha.clone(), params.clone(), true),
                RealForm::HognerLower => build_hogner_metric(&u, alpha.clone(), params.clone(), false),
            };
            (m, Payload::Real { u, alpha, form })
        }
        (Formalism::ExplicitMetric, "desitter_conformal") => {
            conformal_params(&mut params, ov)?;
            (conformal_metric(conformal_factor(), params.clone()), Payload::Explicit)
        }
        (Formalism::ExplicitMetric, "desitter_simple_v") => {
            let phi = crate::formalisms::pullback::simple_v_factor();
            (conformal_metric(phi, params.clone()), Payload::Explicit)
        }
        (Formalism::ExplicitMetric, "desitter_lorentzian") => (lorentz_simple_metric(params.clone()), Payload::Explicit),
        (Formalism::ExplicitMetric, id) => {
            return Err(Error::Invalid(format!("explicit metric `{id}` is not constructible from a file")));
        }
    };
    Ok(Instance { record: rec, params, slots: s, metric, payload })
}

pub fn instantiate(id: &str, ov: &Overrides) -> Result<Instance> {
    instantiate_record(record(id)?, ov)
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyConfig {
    pub points: usize,
    pub sample_box: Option<SampleBox>,
    pub tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { points: 20, sample_box: None, tol: 1e-8 }
    }
}

/// Configuration problems, as opposed to failed checks.
pub fn is_config_error(e: &Error) -> bool {
    matches!(e, Error::UnknownFamily(_) | Error::Parse { .. } | Error::Invalid(_))
}

/// Runs every expected check of `id`; configuration errors are returned,
/// model failures are recorded in the report.
pub fn verify_family(id: &str, ov: &Overrides, cfg: &VerifyConfig) -> Result<Report> {
    verify_record(record(id)?, ov, cfg)
}

pub fn verify_record(rec: SolutionRecord, ov: &Overrides, cfg: &VerifyConfig) -> Result<Report> {
    if cfg.points == 0 || !(cfg.tol > 0.0) {
        return Err(Error::Invalid("need at least one point and a positive tolerance".into()));
    }
    let merged = merged_record(rec.clone(), ov)?;
    let mut report = Report::new("verify", Some(&rec.id), &to_params(&merged.params));
    if merged.derived {
        report.tags.push("derived".into());
    }
    let inst = match instantiate_record(rec, ov) {
        Ok(i) => i,
        Err(e) if is_config_error(&e) => return Err(e),
        Err(e) => {
            report.fail_with(&e);
            return Ok(report);
        }
    };
    report.params = crate::report::ParamMap(inst.params.clone());
    if let Err(e) = run_checks(&inst, cfg, &mut report) {
        if matches!(e, Error::Parse { .. } | Error::UnknownFamily(_)) {
            return Err(e);
        }
        report.fail_with(&e);
    }
    Ok(report)
}

/// Runs the Sigma to U to metric chain of a Sigma-formalism family.
pub fn pipeline_family(id: &str, ov: &Overrides, cfg: &VerifyConfig) -> Result<Report> {
    pipeline_record(record(id)?, ov, cfg)
}

pub fn pipeline_record(rec: SolutionRecord, ov: &Overrides, cfg: &VerifyConfig) -> Result<Report> {
    if rec.formalism != Formalism::Sigma {
        return Err(Error::Invalid(format!("pipeline needs a Sigma family, `{}` is {:?}", rec.id, rec.formalism)));
    }
    let mut report = verify_record(rec, ov, cfg)?;
    report.command = "pipeline".into();
    Ok(report)
}

/// Slices a U-type family and certifies the real metric. Real-form families
/// are first complexified for the requested variant.
pub fn slice_family(id: &str, ov: &Overrides, cfg: &VerifyConfig, variant: SliceVariant) -> Result<Report> {
    slice_record(record(id)?, ov, cfg, variant)
}

pub fn slice_record(rec: SolutionRecord, ov: &Overrides, cfg: &VerifyConfig, variant: SliceVariant) -> Result<Report> {
    if cfg.points == 0 || !(cfg.tol > 0.0) {
        return Err(Error::Invalid("need at least one point and a positive tolerance".into()));
    }
    if !matches!(rec.formalism, Formalism::U | Formalism::Sigma) {
        return Err(Error::Invalid(format!("slice needs a U or Sigma family, `{}` is {:?}", rec.id, rec.formalism)));
    }
    let mut ov = ov.clone();
    let mut tags = Vec::new();
    let flip = variant == SliceVariant::Euclidean
        && rec.real_form.is_none()
        && !ov.params.contains_key("Lambda")
        && rec.params.get("Lambda").is_some_and(|l| *l > 0.0);
    if flip {
        ov.params.insert("Lambda".into(), -rec.params["Lambda"]);
        tags.push("euclidean_negative_lambda".to_string());
    }
    let merged = merged_record(rec.clone(), &ov)?;
    let mut report = Report::new("slice", Some(&rec.id), &to_params(&merged.params));
    report.tags = tags;
    report.tags.push(format!("variant:{}", variant.name()));
    if let Err(e) = slice_checks(rec, &ov, cfg, variant, &mut report) {
        if is_config_error(&e) {
            return Err(e);
        }
        report.fail_with(&e);
    }
    Ok(report)
}

fn slice_checks(rec: SolutionRecord, ov: &Overrides, cfg: &VerifyConfig, variant: SliceVariant, report: &mut Report) -> Result<()> {
    let inst = instantiate_record(rec, ov)?;
    let params = inst.params.clone();
    let (u, default_box) = match &inst.payload {
        Payload::U(d) => (d.clone(), inst.record.sample_box),
        Payload::Sigma(s) => (sigma_to_u(s)?, SIGMA_U_BOX),
        Payload::Real { u, alpha, form } => {
            if variant != SliceVariant::Lorentzian && form.bfp_variant() != slice_form(variant)?.bfp_variant() {
                return Err(Error::Invalid(format!("`{}` is a {form:?} metric, not a {} slice", inst.record.id, variant.name())));
            }
            (crate::formalisms::slice::complexify(u, alpha, params.clone(), variant)?, inst.record.sample_box)
        }
        _ => unreachable!("formalism checked by the caller"),
    };
    let bx = cfg.sample_box.unwrap_or(default_box);
    let plain = Chart::new(SLICE_NAMES, FieldTag::Real);
    let seed = sample_points(&plain, &params, &bx, cfg.points)?;
    let r = slice_transform(&u, SliceSpec { variant }, &seed)?;
    let m = &r.metric;
    let points = sample_points(&m.chart, &params, &bx, cfg.points)?;
    crate::formalisms::slice::check_real(m, &points)?;
    let lam = lambda_of(&params);
    let expected = if variant == SliceVariant::Lorentzian { conformally_flat(Vec::new()) } else { asd(Vec::new()) };
    curvature_checks(m, variant.lambda_factor() * lam, &expected, &points, cfg.tol, "", report)?;
    signature_check(m, variant.signature(), &points, "", report)?;
    if variant == SliceVariant::Lorentzian {
        let target = lorentz_chain_target(params.clone());
        let worst = max_over(&points, |p| compare_at(m, &target, p))?;
        report.push(Check::at_most("lorentz_chain", worst.0, cfg.tol).at(worst.1));
        return Ok(());
    }
    let vf = max_over(&points, |p| crate::formalisms::slice::v_formula_residual(&r, p))?;
    report.push(Check::at_most("v_formula", vf.0, cfg.tol).at(vf.1));
    let form = slice_form(variant)?;
    let ur = r.u_real.as_ref().expect("real potential");
    let b = max_over(&points, |p| bfp_residual(ur, form.bfp_variant(), &params, p))?;
    report.push(Check::at_most("bfp_residual", b.0, cfg.tol).at(b.1));
    let inv = match variant {
        SliceVariant::Neutral1 => "-2*Lambda^2/t^2",
        SliceVariant::Neutral2 => "2*Lambda^2/t^2",
        _ => "8*Lambda^2/t^2",
    };
    let dz = kv("d_z", ["0", "0", "0", "1"], Some(Classification::Nonnull), Some(inv));
    killing_checks(m, &[dz], &points, cfg.tol, "", report)?;
    Ok(())
}

fn slice_form(variant: SliceVariant) -> Result<RealForm> {
    match variant {
        SliceVariant::Neutral1 => Ok(RealForm::HognerLower),
        SliceVariant::Neutral2 => Ok(RealForm::HognerUpper),
        SliceVariant::Euclidean => Ok(RealForm::Tod),
        SliceVariant::Lorentzian => Err(Error::Invalid("the Lorentzian slice has no Toda form".into())),
    }
}

fn lambda_of(p: &Params) -> f64 {
    p.get("Lambda").map(|c| c.re).unwrap_or(0.0)
}

fn run_checks(inst: &Instance, cfg: &VerifyConfig, report: &mut Report) -> Result<()> {
    let rec = &inst.record;
    let m = &inst.metric;
    let tol = cfg.tol;
    let bx = cfg.sample_box.unwrap_or(rec.sample_box);
    let points = sample_points(&m.chart, &inst.params, &bx, cfg.points)?;
    curvature_checks(m, rec.expected.einstein_factor * lambda_of(&inst.params), &rec.expected, &points, tol, "", report)?;
    if let Some(sig) = rec.expected.signature {
        signature_check(m, sig, &points, "", report)?;
    }
    killing_checks(m, &rec.expected.killing, &points, tol, "", report)?;
    match &inst.payload {
        Payload::W(w) => {
            let r = max_over(&points, |p| heavenly_residual(w, p))?;
            report.push(Check::at_most("heavenly_residual", r.0, tol).at(r.1));
        }
        Payload::Sigma(s) => sigma_checks(s, cfg, &points, report)?,
        Payload::U(u) => u_checks(u, &points, tol, "", report)?,
        Payload::Real { u, alpha, form } => {
            let r = max_over(&points, |p| real_alpha_residual(u, alpha, &inst.params, *form, p))?;
            report.push(Check::at_most("alpha_residual", r.0, tol).at(r.1));
            let b = max_over(&points, |p| bfp_residual(u, form.bfp_variant(), &inst.params, p))?;
            report.push(Check::at_most("bfp_residual", b.0, tol).at(b.1));
        }
        Payload::Explicit => explicit_checks(inst, &points, tol, report)?,
    }
    Ok(())
}

/// Largest value of `f` over `points` and where it occurs.
pub fn max_over(points: &[[C; DIM]], mut f: impl FnMut(&[C; DIM]) -> Result<f64>) -> Result<(f64, Vec<f64>)> {
    let mut best = (f64::NEG_INFINITY, point_label(&points[0]));
    for p in points {
        let v = f(p).map_err(|e| attach_point(e, p))?;
        if v > best.0 || v.is_nan() {
            best = (v, point_label(p));
        }
    }
    Ok(best)
}

pub fn curvature_checks(
    m: &MetricField,
    lambda: f64,
    expected: &Expected,
    points: &[[C; DIM]],
    tol: f64,
    prefix: &str,
    report: &mut Report,
) -> Result<()> {
    let cert = einstein_certificate(m, lambda, points)?;
    let wp = cert.worst_point.clone();
    report.push(Check::at_most(format!("{prefix}einstein_residual"), cert.max_einstein_residual, tol).at(wp.clone()));
    report.push(Check::at_most(format!("{prefix}scalar_deviation"), cert.max_scalar_deviation, tol).at(wp.clone()));
    if expected.sd_weyl_zero {
        report.push(Check::at_most(format!("{prefix}sd_weyl"), cert.max_sd_weyl, tol).at(wp.clone()));
    }
    if expected.full_weyl_zero {
        report.push(Check::at_most(format!("{prefix}full_weyl"), cert.max_weyl, tol).at(wp));
    }
    #[derive(Serialize)]
    struct Section {
        points_evaluated: usize,
        einstein_constant: Sci,
        scalar_curvature: Sci,
        max_asd_weyl: Sci,
        max_weyl: Sci,
    }
    report.section(
        &format!("{prefix}curvature"),
        &Section {
            points_evaluated: cert.points_evaluated,
            einstein_constant: Sci(lambda),
            scalar_curvature: Sci(-4.0 * lambda),
            max_asd_weyl: Sci(cert.max_asd_weyl),
            max_weyl: Sci(cert.max_weyl),
        },
    );
    Ok(())
}

pub fn signature_check(
    m: &MetricField,
    want: (usize, usize),
    points: &[[C; DIM]],
    prefix: &str,
    report: &mut Report,
) -> Result<()> {
    let mut bad = 0usize;
    let mut first_bad = None;
    for p in points {
        let s = m.signature_at(p, 1e-10).map_err(|e| attach_point(e, p))?;
        if s != want {
            bad += 1;
            first_bad.get_or_insert((s, point_label(p)));
        }
    }
    let detail = format!("expected ({}+, {}-) at {} points", want.0, want.1, points.len());
    let mut c = Check::at_most(format!("{prefix}signature_mismatches"), bad as f64, 0.0).with_detail(detail);
    if let Some((s, p)) = first_bad {
        c = c.at(p).with_detail(format!("found ({}+, {}-)", s.0, s.1));
    }
    report.push(c);
    Ok(())
}

pub fn killing_checks(
    m: &MetricField,
    list: &[ExpectedKilling],
    points: &[[C; DIM]],
    tol: f64,
    prefix: &str,
    report: &mut Report,
) -> Result<()> {
    let kap = kappa();
    for ek in list {
        let comps: [Expr; DIM] = {
            let v: Vec<Expr> = ek.components.iter().map(|c| m.chart.parse(c)).collect::<Result<_>>()?;
            v.try_into().expect("four components")
        };
        let k = KillingField::new(&ek.name, comps);
        let res = max_over(points, |p| Ok(killing_point(m, &k, p)?.residual))?;
        report.push(Check::at_most(format!("{prefix}killing_residual[{}]", ek.name), res.0, tol).at(res.1));
        if let Some(want) = ek.classification {
            let c = match classify_killing(m, &k, points) {
                Ok(r) => Check::flag(
                    format!("{prefix}classification[{}]", ek.name),
                    r.classification == want,
                    format!("{:?}", r.classification).to_lowercase(),
                ),
                Err(e @ (Error::TheoremViolation(_) | Error::NotKilling { .. })) => {
                    Check::flag(format!("{prefix}classification[{}]", ek.name), false, e.to_string())
                }
                Err(e) => return Err(e),
            };
            report.push(c);
        }
        if let Some(f) = &ek.undotted {
            let formula = m.chart.parse(f)?;
            let dev = max_over(points, |p| {
                let kp = killing_point(m, &k, p)?;
                let want = formula.eval(p, &m.params)?;
                Ok((kap * kp.raw_plus - want).norm() / want.norm().max(1e-300))
            })?;
            report.push(Check::at_most(format!("{prefix}undotted_invariant[{}]", ek.name), dev.0, tol).at(dev.1));
        }
    }
    Ok(())
}

fn u_checks(u: &UData, points: &[[C; DIM]], tol: f64, prefix: &str, report: &mut Report) -> Result<()> {
    check_v(u, points)?;
    let mut worst = [(0.0f64, Vec::new()), (0.0, Vec::new()), (0.0, Vec::new())];
    for p in points {
        let a = alpha_residual(u, p).map_err(|e| attach_point(e, p))?;
        for (slot, v) in worst.iter_mut().zip([a.two_form, a.z_part, a.bfp]) {
            if v >= slot.0 {
                *slot = (v, point_label(p));
            }
        }
    }
    let [two, z, bfp] = worst;
    report.push(Check::at_most(format!("{prefix}alpha_residual"), two.0, tol).at(two.1));
    report.push(Check::at_most(format!("{prefix}alpha_z_part"), z.0, tol).at(z.1));
    report.push(Check::at_most(format!("{prefix}bfp_residual"), bfp.0, tol).at(bfp.1));
    if u.link.is_some() {
        let l = max_over(points, |p| Ok(link_residual(u, p)?.unwrap_or(0.0)))?;
        report.push(Check::at_most(format!("{prefix}link_residual"), l.0, tol).at(l.1));
    }
    Ok(())
}

/// Box on the U chart used for Sigma-derived data.
pub const SIGMA_U_BOX: SampleBox = SampleBox { lo: [0.6, -0.9, -0.9, -0.5], hi: [1.4, 0.9, 0.9, 0.5] };

fn sigma_checks(s: &SigmaData, cfg: &VerifyConfig, points: &[[C; DIM]], report: &mut Report) -> Result<()> {
    let tol = cfg.tol;
    let r = max_over(points, |p| Ok(sigma_residual(s, p)?.residual))?;
    report.push(Check::at_most("crucial_residual", r.0, tol).at(r.1));
    let u = sigma_to_u(s)?;
    let um = build_u_metric(&u);
    let upoints = sample_points(&um.chart, &u.params, &SIGMA_U_BOX, cfg.points)?;
    u_checks(&u, &upoints, tol, "u.", report)?;
    let exp = asd(vec![kv("d_Z", ["0", "0", "0", "1"], Some(Classification::Nonnull), Some(U_INVARIANT))]);
    curvature_checks(&um, lambda_of(&u.params), &exp, &upoints, tol, "u.", report)?;
    killing_checks(&um, &exp.killing, &upoints, tol, "u.", report)?;
    let sm = build_sigma_metric(s);
    let c = pullback_compare(&um, &sm, &step4_map(), &upoints)?;
    report.push(Check::at_most("step4_pullback", c.max_metric_deviation, tol));
    report.push(Check::at_most("step4_volume", c.max_volume_deviation, tol));
    Ok(())
}

fn explicit_checks(inst: &Instance, points: &[[C; DIM]], tol: f64, report: &mut Report) -> Result<()> {
    let p = &inst.params;
    let mut with_tau = p.clone();
    with_tau.entry("tau".into()).or_insert(C::new(1.0, 0.0));
    let w0 = || build_w_metric(&WData::new(Expr::zero(), with_tau.clone()));
    match inst.record.id.as_str() {
        "desitter_conformal" => {
            report.push(Check::at_most("conformal_constraint", conformal_constraint(p)?.norm(), 1e-12));
            let simple = conformal_metric(simple_factor(), p.clone());
            let primed = sample_points(&simple.chart, p, &SampleBox::cube(-0.5, 0.5), points.len())?;
            let c = pullback_compare(&simple, &inst.metric, &primed_map(), &primed)?;
            report.push(Check::at_most("primed_pullback", c.max_metric_deviation, tol));
            report.push(Check::at_most("primed_volume", c.max_volume_deviation, tol));
        }
        "desitter_simple_v" => {
            let c = pullback_compare(&inst.metric, &w0(), &w0_to_simple_v_map(), points)?;
            report.push(Check::at_most("w0_pullback", c.max_metric_deviation, tol));
            report.push(Check::at_most("w0_volume", c.max_volume_deviation, tol));
        }
        "desitter_lorentzian" => {
            let simple = conformal_metric(simple_factor(), p.clone());
            let mut worst: f64 = 0.0;
            let pulled = crate::metric::pullback_metric(&simple, &lorentz_to_conformal_map(), inst.metric.chart.clone());
            for q in points {
                worst = worst.max(compare_at(&inst.metric, &pulled, q)?);
            }
            report.push(Check::at_most("conformal_pullback", worst, tol));
            let u0 = UData::new(Expr::zero(), std::array::from_fn(|_| Expr::zero()), with_tau.clone());
            let target = lorentz_chain_target(with_tau.clone());
            let tpoints = sample_points(&target.chart, &with_tau, &SampleBox::cube(-0.5, 0.5), points.len())?;
            let r = slice_transform(&u0, SliceSpec { variant: SliceVariant::Lorentzian }, &tpoints)?;
            let mut chain: f64 = 0.0;
            for q in &tpoints {
                chain = chain.max(compare_at(&r.metric, &target, q)?);
            }
            report.push(Check::at_most("lorentzian_chain", chain, tol));
        }
        _ => {}
    }
    Ok(())
}

/// Pairwise agreement of the U and W de Sitter forms under the case-II map.
pub fn case_ii_comparison(params: &Params, points: &[[C; DIM]]) -> Result<crate::formalisms::pullback::PullbackCheck> {
    let w = build_w_metric(&WData::new(Expr::zero(), params.clone()));
    let u = build_u_metric(&UData::new(Expr::zero(), std::array::from_fn(|_| Expr::zero()), params.clone()));
    pullback_compare(&u, &w, &case_ii_map(), points)
}
