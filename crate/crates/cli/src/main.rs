use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hhk_bfp::io::{read_grid, write_grid, GridFile};
use hhk_bfp::metric_report::grid_to_metric_report;
use hhk_bfp::{solve, Boundary, GridSpec, SolveOptions};
use hhk_core::formalisms::slice::SliceVariant;
use hhk_core::formalisms::u::SLICE_NAMES;
use hhk_core::report::{Check, Report, Sci};
use hhk_core::sampling::SampleBox;
use hhk_core::solutions::{
    catalog, pipeline_record, record, slice_record, verify_record, Overrides, SolutionRecord, VerifyConfig,
};
use hhk_core::{Chart, Error, FieldTag, Params, C};
use serde::Serialize;

/// Verification engine and BFP solver for anti-self-dual Einstein metrics.
#[derive(Parser, Debug)]
#[command(name = "hhk", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Certify a catalog family or a family file.
    Verify(FamilyArgs),
    /// Run the Sigma to U to metric chain with all intermediate residuals.
    Pipeline(FamilyArgs),
    /// Apply a real-slice transformation and certify the real metric.
    Slice(SliceArgs),
    /// Solve the elliptic Toda equation on a Dirichlet box.
    SolveBfp(BfpArgs),
    /// List the catalog.
    Catalog(OutArgs),
}

#[derive(Args, Debug)]
struct OutArgs {
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FamilyArgs {
    #[arg(long, conflicts_with = "file")]
    family: Option<String>,
    /// JSON family file.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Slot expression or numeric parameter, `name=value`.
    #[arg(long = "set", value_name = "K=V")]
    set: Vec<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, default_value_t = 20)]
    points: usize,
    /// `lo:hi,lo:hi,lo:hi,lo:hi`
    #[arg(long = "box", value_name = "BOX")]
    sample_box: Option<String>,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct SliceArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// neutral_1, neutral_2, euclidean or lorentzian
    #[arg(long)]
    variant: String,
}

#[derive(Args, Debug)]
struct BfpArgs {
    /// Family whose `U` slot supplies the boundary data (default `tod_harmonic`).
    #[arg(long, conflicts_with = "file")]
    family: Option<String>,
    /// Grid CSV with tabulated boundary values.
    #[arg(long)]
    file: Option<PathBuf>,
    #[arg(long = "set", value_name = "K=V")]
    set: Vec<String>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Points per axis.
    #[arg(long, default_value_t = 17)]
    grid: usize,
    /// `t0:t1,x0:x1,y0:y1`
    #[arg(long = "box", value_name = "BOX")]
    grid_box: Option<String>,
    /// Newton tolerance on the residual max-norm.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Report path; the grid is written next to it with a `.csv` extension.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn config(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}

fn split_set(s: &str) -> Result<(&str, &str), Error> {
    s.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .filter(|(k, _)| !k.is_empty())
        .ok_or_else(|| config(format!("--set expects name=value, got `{s}`")))
}

fn load_record(family: Option<&str>, file: Option<&Path>) -> Result<SolutionRecord, Error> {
    match (family, file) {
        (Some(id), None) => record(id),
        (None, Some(p)) => {
            let src = std::fs::read_to_string(p).map_err(|e| config(format!("{}: {e}", p.display())))?;
            SolutionRecord::from_json(&src)
        }
        _ => Err(config("exactly one of --family or --file is required")),
    }
}

fn overrides(rec: &SolutionRecord, set: &[String], lambda: Option<f64>, tau: Option<f64>) -> Result<Overrides, Error> {
    let mut ov = Overrides::default();
    for s in set {
        let (k, v) = split_set(s)?;
        if rec.slots.contains_key(k) {
            ov.slots.insert(k.to_string(), v.to_string());
        } else {
            let x: f64 = v.parse().map_err(|_| {
                config(format!("`{k}` is not a slot of `{}` and `{v}` is not a number", rec.id))
            })?;
            ov.params.insert(k.to_string(), x);
        }
    }
    if let Some(l) = lambda {
        ov.params.insert("Lambda".into(), l);
    }
    if let Some(t) = tau {
        ov.params.insert("tau".into(), t);
    }
    Ok(ov)
}

fn verify_config(a: &FamilyArgs) -> Result<VerifyConfig, Error> {
    if a.points == 0 {
        return Err(config("--points must be at least 1"));
    }
    if !(a.tol > 0.0) {
        return Err(config("--tol must be positive"));
    }
    let sample_box = a.sample_box.as_deref().map(SampleBox::parse).transpose()?;
    Ok(VerifyConfig { points: a.points, sample_box, tol: a.tol })
}

fn family_report(a: &FamilyArgs, variant: Option<SliceVariant>, pipeline: bool) -> Result<Report, Error> {
    let rec = load_record(a.family.as_deref(), a.file.as_deref())?;
    let ov = overrides(&rec, &a.set, a.lambda, a.tau)?;
    let cfg = verify_config(a)?;
    match variant {
        Some(v) => slice_record(rec, &ov, &cfg, v),
        None if pipeline => pipeline_record(rec, &ov, &cfg),
        None => verify_record(rec, &ov, &cfg),
    }
}

#[derive(Serialize)]
struct CatalogEntry {
    id: String,
    formalism: hhk_core::solutions::Formalism,
    description: String,
    derived: bool,
}

fn catalog_report() -> Result<Report, Error> {
    let mut r = Report::new("catalog", None, &Params::new());
    let entries = catalog()
        .into_iter()
        .map(|id| {
            let rec = record(id)?;
            Ok(CatalogEntry { id: rec.id, formalism: rec.formalism, description: rec.description, derived: rec.derived })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    r.section("families", &entries);
    Ok(r)
}

fn parse_grid_box(s: &str) -> Result<[[f64; 2]; 3], Error> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(config(format!("grid box needs 3 intervals, got `{s}`")));
    }
    let mut out = [[0.0; 2]; 3];
    for (slot, p) in out.iter_mut().zip(parts) {
        let (a, b) = p.split_once(':').ok_or_else(|| config(format!("interval `{p}` is not lo:hi")))?;
        for (v, t) in slot.iter_mut().zip([a, b]) {
            *v = t.trim().parse().map_err(|_| config(format!("bad bound `{t}`")))?;
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct SolveSection {
    n: usize,
    newton_iters: usize,
    residual_norm: Sci,
    history: Vec<Sci>,
    boundary: &'static str,
    grid_file: Option<String>,
}

fn bfp_report(a: &BfpArgs) -> Result<Report, Error> {
    if !(a.tol > 0.0) {
        return Err(config("--tol must be positive"));
    }
    let (spec, family, mut params) = match &a.file {
        Some(p) => {
            let f = std::fs::File::open(p).map_err(|e| config(format!("{}: {e}", p.display())))?;
            let g = read_grid(f)?;
            let [n, nx, ny] = g.dims;
            if nx != n || ny != n {
                return Err(config(format!("grid file must be cubic, got {:?}", g.dims)));
            }
            let bounds = match &a.grid_box {
                Some(b) => parse_grid_box(b)?,
                None => g.bounds,
            };
            (GridSpec::new(bounds, n, Boundary::Table(g.values))?, None, Params::new())
        }
        None => {
            let id = a.family.as_deref().unwrap_or("tod_harmonic");
            let rec = record(id)?;
            let ov = overrides(&rec, &a.set, a.lambda, None)?;
            let mut slots = rec.slots.clone();
            slots.extend(ov.slots.clone());
            let src = slots.get("U").ok_or_else(|| config(format!("family `{id}` has no `U` slot")))?;
            let expr = Chart::new(SLICE_NAMES, FieldTag::Real).parse(src)?;
            let mut params: Params = rec.params.iter().map(|(k, v)| (k.clone(), C::new(*v, 0.0))).collect();
            params.extend(ov.params.iter().map(|(k, v)| (k.clone(), C::new(*v, 0.0))));
            let bounds = match &a.grid_box {
                Some(b) => parse_grid_box(b)?,
                None => [[1.0, 2.0], [0.0, 1.0], [0.0, 1.0]],
            };
            let spec = GridSpec::new(bounds, a.grid, Boundary::Expr { expr, params: params.clone() })?;
            (spec, Some(id.to_string()), params)
        }
    };
    if let Some(l) = a.lambda {
        params.insert("Lambda".into(), C::new(l, 0.0));
    }
    let lambda = params.get("Lambda").map(|c| c.re).unwrap_or(-3.0);
    params.insert("Lambda".into(), C::new(lambda, 0.0));
    // validate boundary data before any work
    spec.boundary_values()?;
    let mut r = Report::new("solve-bfp", family.as_deref(), &params);
    r.tags.push("dirichlet_box".into());
    let opts = SolveOptions { tol: a.tol, ..Default::default() };
    let (sol, err) = match solve(&spec, &opts) {
        Ok(s) => (s, None),
        Err(f) => (*f.best, Some(f.error)),
    };
    let grid_file = match &a.out {
        Some(p) if !sol.u.is_empty() => {
            let path = p.with_extension("csv");
            let f = std::fs::File::create(&path).map_err(|e| config(format!("{}: {e}", path.display())))?;
            write_grid(
                std::io::BufWriter::new(f),
                &GridFile { dims: [spec.n; 3], bounds: spec.bounds, values: sol.u.clone() },
            )?;
            Some(path.display().to_string())
        }
        _ => None,
    };
    r.push(Check::at_most("residual_norm", sol.residual_norm, a.tol));
    r.section(
        "solve",
        &SolveSection {
            n: spec.n,
            newton_iters: sol.newton_iters,
            residual_norm: Sci(sol.residual_norm),
            history: sol.history.iter().map(|h| Sci(*h)).collect(),
            boundary: match spec.bc {
                Boundary::Expr { .. } => "expression",
                Boundary::Table(_) => "table",
            },
            grid_file,
        },
    );
    if let Some(e) = err {
        r.fail_with(&e);
        return Ok(r);
    }
    match grid_to_metric_report(&sol, lambda) {
        Ok(m) => r.section("metric", &m),
        Err(e) => r.fail_with(&e),
    }
    Ok(r)
}

fn init_threads() -> Result<(), Error> {
    if let Ok(v) = std::env::var("HH_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| config(format!("HH_THREADS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn emit(r: &Report, out: Option<&Path>) -> Result<(), Error> {
    let mut json = r.to_json();
    json.push('\n');
    match out {
        Some(p) => std::fs::write(p, json).map_err(|e| config(format!("{}: {e}", p.display()))),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<Report, Error> {
    init_threads()?;
    let (report, out) = match &cli.command {
        Command::Verify(a) => (family_report(a, None, false), a.out.out.clone()),
        Command::Pipeline(a) => (family_report(a, None, true), a.out.out.clone()),
        Command::Slice(a) => {
            let r = SliceVariant::parse(&a.variant).and_then(|v| family_report(&a.family, Some(v), false));
            (r, a.family.out.out.clone())
        }
        Command::SolveBfp(a) => (bfp_report(a), a.out.clone()),
        Command::Catalog(a) => (catalog_report(), a.out.clone()),
    };
    let report = report?;
    emit(&report, out.as_deref())?;
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(r) if r.pass => ExitCode::SUCCESS,
        Ok(r) => {
            for c in r.failed_checks() {
                eprintln!("FAIL {}: {:e} (tol {:e})", c.name, c.value.0, c.tol.0);
            }
            if let Some(e) = &r.error {
                eprintln!("FAIL {}: {}", e.kind, e.message);
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
