use std::process::ExitCode;
use std::time::Instant;

use hhk_core::calibration::kappa;
use hhk_core::curvature::{curvature_bundle, einstein_certificate, T3};
use hhk_core::formalisms::legendre::{legendre_to_p, p_equation, PData};
use hhk_core::formalisms::slice::{slice_transform, SliceSpec, SliceVariant};
use hhk_core::formalisms::w::{heavenly_lhs, WData};
use hhk_core::jet::DIM;
use hhk_core::killing::{classify_killing, killing_point, Classification, KillingField};
use hhk_core::metric::MetricField;
use hhk_core::report::Report;
use hhk_core::sampling::{sample_points, SampleBox};
use hhk_core::solutions::{
    case_ii_comparison, instantiate, pipeline_family, record, slice_family, verify_family, Overrides, VerifyConfig,
};
use hhk_core::{Error, Expr, Params, C};
use nalgebra::Matrix4;

type Pt = [C; DIM];

struct Outcome {
    pass: bool,
    summary: String,
}

fn outcome(pass: bool, summary: impl Into<String>) -> Outcome {
    Outcome { pass, summary: summary.into() }
}

fn check(r: &Report, name: &str) -> f64 {
    r.checks.iter().find(|c| c.name == name).unwrap_or_else(|| panic!("{}: no check {name}", r.command)).value.0
}

fn params(pairs: &[(&str, f64)]) -> Params {
    pairs.iter().map(|(k, v)| (k.to_string(), C::new(*v, 0.0))).collect()
}

fn c1_de_sitter() -> Outcome {
    let start = Instant::now();
    let mut ov = Overrides::default();
    ov.params.insert("Lambda".into(), 3.0);
    ov.params.insert("tau".into(), 1.0);
    let inst = instantiate("desitter_w0", &ov).unwrap();
    let pts = sample_points(&inst.metric.chart, &inst.params, &inst.record.sample_box, 100).unwrap();
    let cert = einstein_certificate(&inst.metric, 3.0, &pts).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let pass = cert.points_evaluated == 100
        && cert.max_weyl < 1e-9
        && cert.max_scalar_deviation < 1e-9
        && cert.max_einstein_residual < 1e-9
        && secs < 2.0;
    outcome(
        pass,
        format!(
            "de Sitter W=0: weyl {:.2e}, |R+4L|/|L| {:.2e}, einstein {:.2e}, {secs:.2}s",
            cert.max_weyl, cert.max_scalar_deviation, cert.max_einstein_residual
        ),
    )
}

fn c2_ten_killing() -> Outcome {
    let cfg = VerifyConfig { points: 50, tol: 1e-9, ..Default::default() };
    let r = verify_family("desitter_w0", &Overrides::default(), &cfg).unwrap();
    let rec = record("desitter_w0").unwrap();
    let mut worst_res: f64 = 0.0;
    for k in &rec.expected.killing {
        worst_res = worst_res.max(check(&r, &format!("killing_residual[{}]", k.name)));
    }
    let inst = instantiate("desitter_w0", &Overrides::default()).unwrap();
    let m = &inst.metric;
    let pts = sample_points(&m.chart, &inst.params, &rec.sample_box, 50).unwrap();
    let fields: Vec<KillingField> = rec
        .expected
        .killing
        .iter()
        .map(|k| {
            let c: Vec<Expr> = k.components.iter().map(|s| m.chart.parse(s).unwrap()).collect();
            KillingField::new(&k.name, c.try_into().unwrap())
        })
        .collect();
    let theorem = fields.iter().all(|k| !matches!(classify_killing(m, k, &pts), Err(Error::TheoremViolation(_))));
    let d_eta = KillingField::coordinate("d_eta", 1);
    let eta_class = classify_killing(m, &d_eta, &pts).unwrap().classification;
    let kap = kappa().abs();
    let mut eta_inv: f64 = 0.0;
    for p in &pts {
        let kp = killing_point(m, &d_eta, p).unwrap();
        eta_inv = eta_inv.max(kap * kp.raw_plus.norm()).max(kap * kp.raw_minus.norm());
    }
    let d_t = KillingField::coordinate("d_t", 2);
    let t_class = classify_killing(m, &d_t, &pts).unwrap().classification;
    let t_dev = check(&r, "undotted_invariant[d_t]");
    let pass = worst_res < 1e-9
        && theorem
        && eta_class == Classification::Null
        && eta_inv < 1e-10
        && t_class == Classification::Nonnull
        && t_dev < 1e-8;
    outcome(
        pass,
        format!(
            "{} Killing fields: residual {worst_res:.2e}; d_eta {eta_class:?} inv {eta_inv:.2e}; d_t {t_class:?} dev {t_dev:.2e}",
            fields.len()
        ),
    )
}

fn invariant_deviation(id: &str, k: usize, formula: &str) -> f64 {
    let inst = instantiate(id, &Overrides::default()).unwrap();
    let m = &inst.metric;
    let f = m.chart.parse(formula).unwrap();
    let pts = sample_points(&m.chart, &inst.params, &inst.record.sample_box, 30).unwrap();
    let kf = KillingField::coordinate("k", k);
    pts.iter()
        .map(|p| {
            let got = kappa() * killing_point(m, &kf, p).unwrap().raw_plus;
            let want = f.eval(p, &m.params).unwrap();
            (got - want).norm() / want.norm()
        })
        .fold(0.0, f64::max)
}

fn c3_calibration() -> Outcome {
    let u = invariant_deviation("desitter_u_form", 3, "-2*Lambda^2/(9*T^2)");
    let w = invariant_deviation("desitter_w0", 2, "-2*(Lambda/(3*tau*phi))^2");
    outcome(u < 1e-8 && w < 1e-8, format!("kappa {:.12e}: U-form dev {u:.2e}, W-form dev {w:.2e}", kappa()))
}

fn c4_pipeline() -> Outcome {
    let start = Instant::now();
    let cfg = VerifyConfig { points: 50, tol: 1e-8, ..Default::default() };
    let mut pass = true;
    let mut parts = Vec::new();
    for id in ["sigma_xi_phi", "sigma_family_1", "sigma_family_2"] {
        let r = pipeline_family(id, &Overrides::default(), &cfg).unwrap();
        let tight = ["crucial_residual", "u.bfp_residual", "u.alpha_residual", "u.alpha_z_part"]
            .iter()
            .map(|n| check(&r, n))
            .fold(0.0, f64::max);
        let curv = ["u.einstein_residual", "u.scalar_deviation", "u.sd_weyl"].iter().map(|n| check(&r, n)).fold(0.0, f64::max);
        let step4 = check(&r, "step4_pullback").max(check(&r, "step4_volume"));
        pass &= r.pass && tight < 1e-10 && curv < 1e-8 && step4 < 1e-8;
        parts.push(format!("{id} {tight:.1e}/{curv:.1e}/{step4:.1e}"));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 30.0;
    outcome(pass, format!("pipeline {}; {secs:.2}s", parts.join(", ")))
}

fn c5_case_ii() -> Outcome {
    let p = params(&[("Lambda", 3.0), ("tau", 1.0)]);
    let pts = sample_points(&hhk_core::Chart::new(["T", "X", "Y", "Z"], hhk_core::FieldTag::Complex), &p, &SampleBox::new([0.5, -0.9, -0.9, -1.0], [1.5, 0.9, 0.9, 1.0]), 20)
        .unwrap();
    let c = case_ii_comparison(&p, &pts).unwrap();
    let case_ii = c.max_metric_deviation.max(c.max_volume_deviation);
    let cfg = VerifyConfig { tol: 1e-10, ..Default::default() };
    let r = slice_family("desitter_u_form", &Overrides::default(), &cfg, SliceVariant::Lorentzian).unwrap();
    let chain = check(&r, "lorentz_chain");
    let v = verify_family("desitter_lorentzian", &Overrides::default(), &cfg).unwrap();
    let chain2 = check(&v, "lorentzian_chain");
    outcome(
        case_ii < 1e-10 && chain < 1e-10 && chain2 < 1e-10,
        format!("case II {case_ii:.2e}, Lorentzian chain {chain:.2e} / {chain2:.2e}"),
    )
}

fn c6_slices() -> Outcome {
    let cfg = VerifyConfig { points: 20, tol: 1e-8, ..Default::default() };
    let mut pass = true;
    let mut parts = Vec::new();
    for v in [SliceVariant::Neutral1, SliceVariant::Neutral2, SliceVariant::Euclidean] {
        let r = slice_family("desitter_u_form", &Overrides::default(), &cfg, v).unwrap();
        let sig = check(&r, "signature_mismatches");
        let ein = check(&r, "einstein_residual");
        let vf = check(&r, "v_formula");
        pass &= r.pass && sig == 0.0 && ein < 1e-8 && vf < 1e-10;
        parts.push(format!("{} sig {sig} ein {ein:.1e} V {vf:.1e}", v.name()));
    }
    let inst = instantiate("desitter_u_form", &Overrides::default()).unwrap();
    let hhk_core::solutions::Payload::U(mut u) = inst.payload else { unreachable!() };
    u.params.insert("Lambda".into(), C::new(-3.0, 0.0));
    let chart = hhk_core::Chart::new(["t", "x", "y", "z"], hhk_core::FieldTag::Real);
    let bx = SampleBox::new([0.5, -0.9, -0.9, -1.0], [1.5, 0.9, 0.9, 1.0]);
    let pts = sample_points(&chart, &u.params, &bx, 20).unwrap();
    let s = slice_transform(&u, SliceSpec { variant: SliceVariant::Euclidean }, &pts).unwrap();
    let dz = KillingField::coordinate("d_z", 3);
    let mut min_inv = f64::INFINITY;
    let mut max_dev: f64 = 0.0;
    for p in &pts {
        let inv = kappa() * killing_point(&s.metric, &dz, p).unwrap().raw_plus;
        let want = 8.0 * 9.0 / (p[0].re * p[0].re);
        min_inv = min_inv.min(inv.re);
        max_dev = max_dev.max((inv.re - want).abs() / want);
    }
    pass &= min_inv > 0.0 && max_dev < 1e-8;
    outcome(pass, format!("{}; euclidean invariant min {min_inv:.3e} (dev {max_dev:.1e})", parts.join(", ")))
}

fn c7_legendre() -> (Outcome, bool) {
    let (phi, eta) = (Expr::coord(0), Expr::coord(1));
    let w = WData::rescaled(eta.square() / 2.0 + eta.clone() * phi.clone(), Params::new());
    let genuine = WData::rescaled(eta.square() / 2.0, Params::new());
    let bx = SampleBox::new([0.5, -1.0, 0.0, -1.0], [1.5, 1.0, 0.0, 1.0]);
    let pts = sample_points(&PData::chart(), &Params::new(), &bx, 50).unwrap();
    let (mut iters, mut inv, mut p_res, mut faithful, mut heav) = (0usize, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut genuine_res: f64 = 0.0;
    for p in &pts {
        let (f, z, v) = (p[0], p[1], p[3]);
        let r = legendre_to_p(&w, f, z, v, C::new(0.0, 0.0)).unwrap();
        iters = iters.max(r.iterations);
        inv = inv.max(r.inversion_residual);
        let e = p_equation(f, &r.pjet).norm();
        p_res = p_res.max(e);
        faithful = faithful.max((e - f.norm() / 4.0).abs());
        heav = heav.max((heavenly_lhs(&w, &[f, r.eta, C::new(0.0, 0.0), v]).unwrap() - f).norm());
        let g = legendre_to_p(&genuine, f, z, v, C::new(0.0, 0.0)).unwrap();
        genuine_res = genuine_res.max(p_equation(f, &g.pjet).norm());
    }
    let degenerate = matches!(
        legendre_to_p(&WData::rescaled(phi * eta * 2.0, Params::new()), C::new(1.0, 0.0), C::new(0.5, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0)),
        Err(Error::DegenerateLegendre(_))
    );
    let pass = iters <= 10 && inv < 1e-12 && p_res < 1e-8 && degenerate;
    // The prescribed key function is not a solution of the heavenly equation;
    // its P residual is asserted to be exactly phi/4 instead.
    let known = !pass && iters <= 10 && inv < 1e-12 && faithful < 1e-12 && heav < 1e-12 && genuine_res < 1e-12 && degenerate;
    let summary = format!(
        "Legendre: {iters} iterations, |W_eta - z| {inv:.1e}, P residual {p_res:.3e} (= phi/4 to {faithful:.1e}; \
         key function has heavenly residual phi to {heav:.1e}); W = eta^2/2 gives P residual {genuine_res:.1e}; \
         degenerate {degenerate}"
    );
    (outcome(pass, summary), known)
}

fn fd_oracle(m: &MetricField, p: &Pt) -> (f64, f64, f64) {
    let h = 3e-4;
    let shifted = |q: &Pt, k: usize, s: f64| {
        let mut r = *q;
        r[k] += C::new(s * h, 0.0);
        r
    };
    let stencil = |f: &dyn Fn(f64) -> C| (f(-2.0) - 8.0 * f(-1.0) + 8.0 * f(1.0) - f(2.0)) / (12.0 * h);
    let gmat = |q: &Pt| Matrix4::from_fn(|a, b| m.values_at(q).unwrap()[a][b]);
    let christoffel = |q: &Pt| -> T3 {
        let gi = gmat(q).try_inverse().unwrap();
        let dg: Vec<Matrix4<C>> = (0..DIM)
            .map(|k| {
                let vals: Vec<Matrix4<C>> = [-2.0, -1.0, 1.0, 2.0].iter().map(|&s| gmat(&shifted(q, k, s))).collect();
                (vals[0] - vals[1] * C::new(8.0, 0.0) + vals[2] * C::new(8.0, 0.0) - vals[3]) / C::new(12.0 * h, 0.0)
            })
            .collect();
        let mut g3 = [[[C::new(0.0, 0.0); DIM]; DIM]; DIM];
        for a in 0..DIM {
            for b in 0..DIM {
                for c in 0..DIM {
                    g3[a][b][c] = (0..DIM)
                        .map(|d| gi[(a, d)] * (dg[b][(d, c)] + dg[c][(d, b)] - dg[d][(b, c)]) * 0.5)
                        .sum();
                }
            }
        }
        g3
    };
    let gam = christoffel(p);
    let around: Vec<[T3; 4]> =
        (0..DIM).map(|k| [-2.0, -1.0, 1.0, 2.0].map(|s| christoffel(&shifted(p, k, s)))).collect();
    let dgam = |k: usize, a: usize, b: usize, c: usize| {
        let vals = &around[k];
        stencil(&|s: f64| {
            let i = match s as i32 {
                -2 => 0,
                -1 => 1,
                1 => 2,
                _ => 3,
            };
            vals[i][a][b][c]
        })
    };
    let b = curvature_bundle(m, p).unwrap();
    let rel = |x: f64, scale: f64| x / scale.max(1e-300);
    let gscale = gam.iter().flatten().flatten().map(|c| c.norm()).fold(0.0, f64::max);
    let gdev = (0..DIM)
        .flat_map(|a| (0..DIM).flat_map(move |b| (0..DIM).map(move |c| (a, b, c))))
        .map(|(a, bb, c)| (b.gamma[a][bb][c] - gam[a][bb][c]).norm())
        .fold(0.0, f64::max);
    let mut rdev: f64 = 0.0;
    let mut rscale: f64 = 0.0;
    let mut ricci = [[C::new(0.0, 0.0); DIM]; DIM];
    for a in 0..DIM {
        for bb in 0..DIM {
            for c in 0..DIM {
                for d in 0..DIM {
                    let mut r = dgam(d, a, c, bb) - dgam(c, a, d, bb);
                    for e in 0..DIM {
                        r += gam[a][d][e] * gam[e][c][bb] - gam[a][c][e] * gam[e][d][bb];
                    }
                    rscale = rscale.max(r.norm());
                    rdev = rdev.max((r - b.riemann[a][bb][c][d]).norm());
                    if a == c {
                        ricci[bb][d] += r;
                    }
                }
            }
        }
    }
    let gi = gmat(p).try_inverse().unwrap();
    let scalar: C = (0..DIM).flat_map(|i| (0..DIM).map(move |j| (i, j))).map(|(i, j)| gi[(i, j)] * ricci[i][j]).sum();
    let sdev = (scalar - b.scalar).norm() / scalar.norm().max(rscale);
    (rel(gdev, gscale), rel(rdev, rscale), sdev)
}

fn c9_oracle() -> Outcome {
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    let ids = ["desitter_w0", "sigma_family_1", "hogner_log"];
    for id in ids {
        let inst = instantiate(id, &Overrides::default()).unwrap();
        let pts = sample_points(&inst.metric.chart, &inst.params, &inst.record.sample_box, 5).unwrap();
        for p in &pts {
            let (g, r, s) = fd_oracle(&inst.metric, p);
            worst = (worst.0.max(g), worst.1.max(r), worst.2.max(s));
        }
    }
    let pass = worst.0 < 1e-6 && worst.1 < 1e-6 && worst.2 < 1e-6;
    outcome(
        pass,
        format!(
            "finite-difference oracle on {}: christoffel {:.1e}, riemann {:.1e}, scalar {:.1e}",
            ids.join(", "),
            worst.0,
            worst.1,
            worst.2
        ),
    )
}

fn c10_confflat() -> Outcome {
    let cfg = VerifyConfig { points: 20, tol: 1e-8, ..Default::default() };
    let r = verify_family("u_confflat_1", &Overrides::default(), &cfg).unwrap();
    let weyl = check(&r, "full_weyl");
    let derived = r.tags.iter().any(|t| t == "derived");
    outcome(r.pass && weyl < 1e-8 && derived, format!("conformally flat U family: full weyl {weyl:.2e}, derived tag {derived}"))
}

fn main() -> ExitCode {
    let plain = |o: Outcome| (o, false);
    let runs: Vec<(u32, (Outcome, bool))> = vec![
        (1, plain(c1_de_sitter())),
        (2, plain(c2_ten_killing())),
        (3, plain(c3_calibration())),
        (4, plain(c4_pipeline())),
        (5, plain(c5_case_ii())),
        (6, plain(c6_slices())),
        (7, c7_legendre()),
        (9, plain(c9_oracle())),
        (10, plain(c10_confflat())),
    ];
    let mut unexpected = 0;
    for (n, (o, known)) in &runs {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let note = if *known { " [known: prescribed key function is not a heavenly solution]" } else { "" };
        println!("{tag} {n}: {}{note}", o.summary);
        if !o.pass && !known {
            unexpected += 1;
        }
    }
    println!("criterion 8 is reported by the hhk-bfp acceptance target");
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
