use hhk_core::formalisms::slice::SliceVariant::{self, *};
use hhk_core::report::Report;
use hhk_core::solutions::{slice_family, Overrides, VerifyConfig};
use hhk_core::Error;

fn run(id: &str, v: SliceVariant) -> Report {
    slice_family(id, &Overrides::default(), &VerifyConfig::default(), v).unwrap()
}

fn value(r: &Report, name: &str) -> f64 {
    r.checks.iter().find(|c| c.name == name).unwrap_or_else(|| panic!("no check {name}")).value.0
}

#[test]
fn de_sitter_slices() {
    for v in [Neutral1, Neutral2, Euclidean] {
        let r = run("desitter_u_form", v);
        assert!(r.pass, "{}", r.to_json());
        assert!(value(&r, "v_formula") < 1e-10);
        assert!(value(&r, "signature_mismatches") == 0.0);
    }
    let r = run("desitter_u_form", Lorentzian);
    assert!(r.pass && value(&r, "lorentz_chain") < 1e-10, "{}", r.to_json());
}

#[test]
fn euclidean_default_flips_lambda() {
    let r = run("desitter_u_form", Euclidean);
    assert!(r.tags.iter().any(|t| t == "euclidean_negative_lambda"));
    assert!(r.params.0["Lambda"].re < 0.0);
}

#[test]
fn real_seeds() {
    for (id, v) in [("tod_harmonic", Euclidean), ("hogner_log", Neutral2), ("sigma_xi_phi", Neutral1)] {
        let r = run(id, v);
        assert!(r.pass, "{id}: {}", r.to_json());
    }
}

#[test]
fn obstructions() {
    let r = run("u_harmonic_complex", Euclidean);
    assert_eq!(r.error.as_ref().unwrap().kind, "ComplexLeak");
    let r = run("u_harmonic_complex", Lorentzian);
    assert_eq!(r.error.as_ref().unwrap().kind, "LorentzianObstruction");
    let e = slice_family("hogner_log", &Overrides::default(), &VerifyConfig::default(), Neutral1).unwrap_err();
    assert!(matches!(e, Error::Invalid(_)));
    let e = slice_family("desitter_w0", &Overrides::default(), &VerifyConfig::default(), Neutral1).unwrap_err();
    assert!(matches!(e, Error::Invalid(_)));
}
