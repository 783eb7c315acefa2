use std::process::{Command, Output};

fn hhk(args: &[&str]) -> Output {
    hhk_env(args, &[])
}

fn hhk_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_hhk"));
    c.args(args).env_remove("HH_THREADS");
    for (k, v) in env {
        c.env(k, v);
    }
    c.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn de_sitter_certificate() {
    let o = hhk(&["verify", "--family", "desitter_w0", "--lambda", "3", "--points", "100", "--tol", "1e-9"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.contains("\"schema\": 1"));
    assert!(s.contains("\"scalar_curvature\":-1.2000000000000000e1"), "{s}");
    assert!(s.trim_end().ends_with("\"pass\": true\n}") || s.contains("\"pass\": true\n}"));
}

#[test]
fn exit_code_contract() {
    let cases: &[(&[&str], i32)] = &[
        (&["verify", "--family", "sigma_family_1", "--tol", "1e-8"], 0),
        (&["verify", "--family", "sigma_family_1", "--set", "a=1"], 1),
        (&["verify", "--family", "desitter_w0", "--set", "W=eta^3"], 1),
        (&["verify", "--family", "no_such_family"], 2),
        (&["verify", "--family", "desitter_w0", "--set", "nonsense"], 2),
        (&["verify", "--family", "desitter_w0", "--set", "W=eta^^"], 2),
        (&["verify", "--family", "desitter_w0", "--points", "0"], 2),
        (&["verify", "--family", "desitter_w0", "--tol", "-1"], 2),
        (&["verify", "--family", "desitter_w0", "--box", "0:1"], 2),
        (&["verify"], 2),
        (&["verify", "--flag-that-does-not-exist"], 2),
        (&["pipeline", "--family", "sigma_xi_phi"], 0),
        (&["pipeline", "--family", "sigma_family_1", "--set", "a=1"], 1),
        (&["pipeline", "--family", "desitter_w0"], 2),
        (&["slice", "--family", "desitter_u_form", "--variant", "neutral_2"], 0),
        (&["slice", "--family", "desitter_u_form", "--variant", "lorentzian"], 0),
        (&["slice", "--family", "u_harmonic_complex", "--variant", "lorentzian"], 1),
        (&["slice", "--family", "desitter_u_form", "--variant", "sideways"], 2),
        (&["solve-bfp", "--grid", "7"], 0),
        (&["solve-bfp", "--grid", "7", "--set", "U=4*t/3"], 1),
        (&["solve-bfp", "--grid", "3"], 2),
        (&["solve-bfp", "--grid", "7", "--box", "0:1,0:1,0:1"], 2),
        (&["catalog"], 0),
        (&["no-such-command"], 2),
    ];
    for (args, want) in cases {
        let o = hhk(args);
        assert_eq!(code(&o), *want, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        if *want == 1 {
            assert!(stdout(&o).contains("\"pass\": false"), "{args:?}");
        }
    }
}

#[test]
fn degenerate_sigma_is_reported() {
    let o = hhk(&["verify", "--family", "sigma_family_1", "--set", "a=1"]);
    assert!(stdout(&o).contains("\"kind\": \"DegenerateSigma\""));
}

#[test]
fn reports_are_byte_identical() {
    let args = ["verify", "--family", "sigma_family_2", "--points", "12"];
    let a = hhk(&args);
    let b = hhk_env(&args, &[("HH_THREADS", "1")]);
    let c = hhk_env(&args, &[("HH_THREADS", "3")]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let s = ["slice", "--family", "tod_harmonic", "--variant", "euclidean"];
    assert_eq!(hhk(&s).stdout, hhk(&s).stdout);
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let o = hhk_env(&["catalog"], &[("HH_THREADS", "zero")]);
    assert_eq!(code(&o), 2);
}

#[test]
fn family_file_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let fam = dir.path().join("fam.json");
    std::fs::write(
        &fam,
        r#"{
  "id": "user_sigma",
  "formalism": "sigma",
  "slots": {"Sigma": "phi*xi + xi^2"},
  "params": {"Lambda": 3.0, "tau": 2.0},
  "sample_box": {"lo": [0.5, -0.9, -1.0, -0.9], "hi": [1.5, 0.9, 1.0, 0.9]},
  "expected": {"einstein_factor": 1.0, "sd_weyl_zero": true, "full_weyl_zero": false}
}"#,
    )
    .unwrap();
    let out = dir.path().join("r.json");
    let o = hhk(&["pipeline", "--file", fam.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("\"command\": \"pipeline\""));
    assert!(text.contains("crucial_residual"));
    assert!(o.stdout.is_empty());
    assert!([0, 1].contains(&code(&o)));

    let rep = dir.path().join("bfp.json");
    let o = hhk(&["solve-bfp", "--grid", "9", "--out", rep.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let grid = dir.path().join("bfp.csv");
    assert!(std::fs::read_to_string(&grid).unwrap().starts_with("# dims 9 9 9\n# box "));
    let o = hhk(&["solve-bfp", "--file", grid.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("\"boundary\":\"table\""));
}
