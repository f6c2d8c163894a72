use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use fracsym::energy::{
    fractional_perimeter, gagliardo_seminorm, heat_slice_energy, riesz_dirichlet_energy, subordinated_seminorm,
    LogGrid, RieszOptions,
};
use fracsym::extension::{
    calibrate_cs, extend_cs, extension_energies, partial_symmetrization_experiment, perimeter_mesh,
    perimeter_via_extension, ExtensionMesh, Grading,
};
use fracsym::fourier::{
    bochner_apply, fractional_laplacian_singular, fractional_laplacian_spectral, relative_l2,
};
use fracsym::geometry::{shapes, stability_scan, Family, FIT_WINDOW};
use fracsym::grid as io;
use fracsym::rearrange::{schwarz_function, steiner_function};
use fracsym::report::{to_json, Cell, CsvTable};
use fracsym::spectral::{assemble_stiffness, first_eigenpair, rayleigh_descent_p, sobolev_quotient, talenti_pair};
use fracsym::suites::{run_suite, SUITES};
use fracsym::{measure, Error, FracParams, Grid, GridFunction, IndicatorSet, KernelSpec, NearField, Norm};

const SUBCOMMANDS: [&str; 11] = [
    "rearrange",
    "energy",
    "perimeter",
    "fraclap",
    "eigen",
    "talenti",
    "extend",
    "ps-extension-experiment",
    "stability",
    "sobolev-quotient",
    "verify",
];

#[derive(Parser)]
#[command(name = "fracsym", version, about = "Fractional rearrangement inequalities on uniform grids")]
struct Cli {
    /// JSON object of flag values for the subcommand; command-line flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Schwarz or Steiner rearrangement of a grid function.
    Rearrange(RearrangeArgs),
    /// Nonlocal energy of a grid function or mask.
    Energy(EnergyArgs),
    /// Fractional perimeter of a built-in shape or a mask.
    Perimeter(PerimeterArgs),
    /// Fractional Laplacian by one of its realizations.
    Fraclap(FraclapArgs),
    /// First Dirichlet eigenvalue of a shape.
    Eigen(EigenArgs),
    /// Mass-concentration comparison of Dirichlet solutions.
    Talenti(TalentiArgs),
    /// Extension energies of a datum.
    Extend(ExtendArgs),
    /// Partial symmetrization of the extension.
    PsExtensionExperiment(PsArgs),
    /// Deficit against asymmetry over a shape family (CSV).
    Stability(StabilityArgs),
    /// Sobolev quotient of a grid function.
    SobolevQuotient(SobolevArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Schwarz,
    Steiner,
}

#[derive(Args)]
struct RearrangeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "schwarz")]
    mode: Mode,
    #[arg(long, default_value_t = 0)]
    axis: usize,
    /// Replace u by |u| before rearranging.
    #[arg(long)]
    abs: bool,
    /// Where to write the rearranged function.
    #[arg(long)]
    dump: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnergyKind {
    Seminorm,
    Perimeter,
    HeatSlice,
    Subordinated,
    RieszGrad,
}

#[derive(Clone, Copy, ValueEnum)]
enum NearArg {
    Refined,
    Smooth,
    Midpoint,
}

impl From<NearArg> for NearField {
    fn from(n: NearArg) -> Self {
        match n {
            NearArg::Refined => NearField::Refined,
            NearArg::Smooth => NearField::Smooth,
            NearArg::Midpoint => NearField::Midpoint,
        }
    }
}

#[derive(Args)]
struct EnergyArgs {
    #[arg(long, value_enum)]
    kind: EnergyKind,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    s: f64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// iso, lq:<q> or matrix:<file>.
    #[arg(long, default_value = "iso")]
    kernel: String,
    #[arg(long, value_enum, default_value = "refined")]
    near_field: NearArg,
    /// Heat-slice time.
    #[arg(long)]
    t: Option<f64>,
    /// t_min,t_max for the subordinated seminorm.
    #[arg(long)]
    t_range: Option<String>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long, default_value_t = 1e-2)]
    tol: f64,
    /// Riesz-gradient constant.
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
}

#[derive(Args)]
struct PerimeterArgs {
    /// interval, disk, square, rect, lshape or mask:<file>.
    #[arg(long)]
    shape: String,
    #[arg(long)]
    s: f64,
    /// Interval length.
    #[arg(long = "L", default_value_t = 2.0)]
    length: f64,
    /// Area of 2D shapes.
    #[arg(long, default_value_t = PI)]
    area: f64,
    #[arg(long, default_value_t = 1.0 / 256.0)]
    h: f64,
    /// Also compute the perimeter from the extension on a torus.
    #[arg(long)]
    via_extension: bool,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Method {
    Spectral,
    Singular,
    Bochner,
}

#[derive(Args)]
struct FraclapArgs {
    #[arg(long, value_enum, default_value = "spectral")]
    method: Method,
    #[arg(long)]
    s: f64,
    /// Periodic input function; cos(k x) on 512 points of [0, 2π) otherwise.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// t_min,t_max of the Bochner grid.
    #[arg(long, default_value = "1e-6,1e3")]
    t_range: String,
    #[arg(long, default_value_t = 200)]
    nodes: usize,
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Args)]
struct EigenArgs {
    /// disk, square, rect, lshape or mask:<file>.
    #[arg(long, default_value = "disk")]
    shape: String,
    #[arg(long)]
    s: f64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 1.0 / 32.0)]
    h: f64,
    #[arg(long, default_value_t = PI)]
    area: f64,
    /// Half-width of the square box around a built-in shape.
    #[arg(long, default_value_t = 1.5)]
    box_half_width: f64,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Args)]
struct TalentiArgs {
    #[arg(long)]
    mask: PathBuf,
    #[arg(long)]
    rhs: PathBuf,
    #[arg(long)]
    s: f64,
    #[arg(long)]
    dump_u: Option<PathBuf>,
    #[arg(long)]
    dump_v: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct MeshArgs {
    /// Truncation height.
    #[arg(long = "Y")]
    y_max: Option<f64>,
    /// Number of y-intervals.
    #[arg(long = "M", default_value_t = 200)]
    m: usize,
    /// auto, power:<γ> or geometric:<first step>.
    #[arg(long, default_value = "auto")]
    grading: String,
}

#[derive(Args)]
struct ExtendArgs {
    #[arg(long)]
    s: f64,
    /// Periodic datum; cos(k x) on 128 points of [0, 2π) otherwise.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    k: u32,
    #[command(flatten)]
    mesh: MeshArgs,
}

#[derive(Args)]
struct PsArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    s: f64,
    #[command(flatten)]
    mesh: MeshArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Ellipse,
    Dumbbell,
    Ball,
}

#[derive(Args)]
struct StabilityArgs {
    #[arg(long, value_enum, default_value = "ellipse")]
    family: FamilyArg,
    #[arg(long, default_value_t = 0.5)]
    s: f64,
    #[arg(long, default_value_t = 12)]
    count: usize,
    #[arg(long, default_value_t = 1.0 / 64.0)]
    h: f64,
    #[arg(long, default_value_t = 0.6)]
    max_eccentricity: f64,
    #[arg(long, default_value_t = 0.3)]
    min_neck: f64,
}

#[derive(Args)]
struct SobolevArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    s: f64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
}

#[derive(Args)]
struct VerifyArgs {
    /// One of the suite names.
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Failure of a run: validation (exit 2) or a failed suite (exit 1).
enum Failure {
    Invalid { kind: String, message: String },
    Unmet,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid { kind: e.kind().to_string(), message: e.to_string() }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure::Invalid { kind: "invalid_parameter".into(), message: message.into() }
}

type Run<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    match run(argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Unmet) => ExitCode::from(1),
        Err(Failure::Invalid { kind, message }) => {
            eprintln!("{}", json!({"error": kind, "message": message}));
            ExitCode::from(2)
        }
    }
}

fn run(argv: Vec<String>) -> Run<()> {
    configure_threads()?;
    let argv = merge_config(argv)?;
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return Ok(());
            }
            let text = e.to_string();
            let message = text.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ").to_string();
            return Err(Failure::Invalid { kind: "usage".into(), message });
        }
    };
    let out = cli.output.as_deref();
    match cli.command {
        Command::Rearrange(a) => rearrange(a, out),
        Command::Energy(a) => energy(a, out),
        Command::Perimeter(a) => perimeter(a, out),
        Command::Fraclap(a) => fraclap(a, out),
        Command::Eigen(a) => eigen(a, out),
        Command::Talenti(a) => talenti(a, out),
        Command::Extend(a) => extend(a, out),
        Command::PsExtensionExperiment(a) => ps_experiment(a, out),
        Command::Stability(a) => stability(a, out),
        Command::SobolevQuotient(a) => sobolev(a, out),
        Command::Verify(a) => verify(a, out),
    }
}

fn configure_threads() -> Run<()> {
    let Ok(raw) = std::env::var("FRACSYM_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| invalid(format!("FRACSYM_THREADS must be an integer, got '{raw}'")))?;
    if n > 0 {
        // a second initialization in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Splices `--config` values into argv right after the subcommand, dropping
/// any key that also appears on the command line.
fn merge_config(argv: Vec<String>) -> Run<Vec<String>> {
    let pos = argv.iter().position(|a| a == "--config" || a.starts_with("--config="));
    let Some(pos) = pos else {
        return Ok(argv);
    };
    let (path, consumed) = if let Some(p) = argv[pos].strip_prefix("--config=") {
        (p.to_string(), 1)
    } else {
        let p = argv.get(pos + 1).ok_or_else(|| invalid("--config needs a file"))?;
        (p.clone(), 2)
    };
    let mut rest: Vec<String> = argv[..pos].iter().chain(argv[pos + consumed..].iter()).cloned().collect();
    let text = fs::read_to_string(&path).map_err(|e| invalid(format!("cannot read config {path}: {e}")))?;
    let cfg: Value = serde_json::from_str(&text).map_err(|e| invalid(format!("config {path} is not JSON: {e}")))?;
    let Value::Object(map) = cfg else {
        return Err(invalid("the config file must hold a JSON object"));
    };
    let sub = rest.iter().position(|a| SUBCOMMANDS.contains(&a.as_str()));
    let at = match sub {
        Some(i) => i + 1,
        None => match map.get("command").and_then(Value::as_str) {
            Some(c) => {
                rest.insert(1, c.to_string());
                2
            }
            None => return Err(invalid("no subcommand given on the command line or in the config")),
        },
    };
    let mut injected = Vec::new();
    for (key, value) in &map {
        if key == "command" {
            continue;
        }
        if key == "suite" {
            if let Some(v) = value.as_str() {
                if !rest[at..].iter().any(|a| !a.starts_with('-')) {
                    injected.push(v.to_string());
                }
            }
            continue;
        }
        let flag = format!("--{key}");
        let given = rest.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if given {
            continue;
        }
        match value {
            Value::Bool(true) => injected.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::String(v) => injected.extend([flag, v.clone()]),
            Value::Number(n) => injected.extend([flag, n.to_string()]),
            _ => return Err(invalid(format!("config key '{key}' must be a scalar"))),
        }
    }
    rest.splice(at..at, injected);
    Ok(rest)
}

fn emit(text: &str, out: Option<&Path>) -> Run<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::from(Error::Io(e))),
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()) {
                // a closed reader (`| head`) is not an error
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::from(Error::Io(e))),
                _ => Ok(()),
            }
        }
    }
}

fn emit_json(value: &impl Serialize, out: Option<&Path>) -> Run<()> {
    emit(&to_json(value)?, out)
}

fn check_s(s: f64) -> Run<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("s out of (0,1): {s}")))
    }
}

fn positive(name: &str, v: f64) -> Run<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("--{name} must be positive, got {v}")))
    }
}

fn parse_range(text: &str) -> Run<(f64, f64)> {
    let parts: Vec<&str> = text.split(',').collect();
    let bad = || invalid(format!("expected t_min,t_max, got '{text}'"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let a = parts[0].trim().parse().map_err(|_| bad())?;
    let b = parts[1].trim().parse().map_err(|_| bad())?;
    Ok((a, b))
}

fn parse_kernel(text: &str, near: NearField) -> Run<KernelSpec> {
    let spec = if text == "iso" {
        KernelSpec::isotropic()
    } else if let Some(q) = text.strip_prefix("lq:") {
        let q: f64 = if q == "inf" { f64::INFINITY } else { q.parse().map_err(|_| invalid(format!("bad ℓ^q exponent '{q}'")))? };
        KernelSpec::anisotropic(Norm::Lq(q))
    } else if let Some(file) = text.strip_prefix("matrix:") {
        let raw = fs::read_to_string(file).map_err(|e| invalid(format!("cannot read matrix {file}: {e}")))?;
        let entries = raw
            .split(|c: char| c.is_whitespace() || c == ',' || c == '[' || c == ']')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>().map_err(|_| invalid(format!("bad matrix entry '{t}'"))))
            .collect::<Run<Vec<f64>>>()?;
        KernelSpec::anisotropic(Norm::Matrix(entries))
    } else {
        return Err(invalid(format!("unknown kernel '{text}' (iso, lq:<q>, matrix:<file>)")));
    };
    Ok(spec.with_near_field(near))
}

fn parse_mesh(m: &MeshArgs) -> Run<ExtensionMesh> {
    let grading = if m.grading == "auto" {
        Grading::Auto
    } else if let Some(g) = m.grading.strip_prefix("power:") {
        Grading::Power(g.parse().map_err(|_| invalid(format!("bad grading exponent '{g}'")))?)
    } else if let Some(g) = m.grading.strip_prefix("geometric:") {
        Grading::Geometric(g.parse().map_err(|_| invalid(format!("bad first step '{g}'")))?)
    } else {
        return Err(invalid(format!("unknown grading '{}' (auto, power:<γ>, geometric:<step>)", m.grading)));
    };
    Ok(ExtensionMesh { m: m.m, y_max: m.y_max, grading })
}

fn rearrange(a: RearrangeArgs, out: Option<&Path>) -> Run<()> {
    let mut u = io::load(&a.input)?.into_function();
    if a.abs {
        u = u.abs();
    }
    let r = match a.mode {
        Mode::Schwarz => schwarz_function(&u)?,
        Mode::Steiner => steiner_function(&u, a.axis)?,
    };
    io::save_function(&r, &a.dump)?;
    emit_json(
        &json!({
            "command": "rearrange",
            "mode": match a.mode { Mode::Schwarz => "schwarz", Mode::Steiner => "steiner" },
            "output": a.dump.display().to_string(),
            "l1_norm": fracsym::lp_norm(&r, 1.0)?,
            "l2_norm": fracsym::lp_norm(&r, 2.0)?,
            "max": r.max(),
        }),
        out,
    )
}

fn energy(a: EnergyArgs, out: Option<&Path>) -> Run<()> {
    check_s(a.s)?;
    let data = io::load(&a.input)?;
    let u = data.clone().into_function();
    let kernel = parse_kernel(&a.kernel, a.near_field.into())?;
    let report = match a.kind {
        EnergyKind::Seminorm => {
            let params = FracParams::new(u.grid().dim(), a.s, a.p)?;
            serde_json::to_value(gagliardo_seminorm(&u, &params, &kernel)?).unwrap_or(Value::Null)
        }
        EnergyKind::Perimeter => {
            let e = match data {
                io::GridData::Mask(m) => m,
                io::GridData::Function(f) => IndicatorSet::from_function(&f)?,
            };
            json!({"value": fracsym::energy::fractional_perimeter_with(&e, a.s, &kernel)?, "measure": measure(&e)})
        }
        EnergyKind::HeatSlice => {
            let t = a.t.ok_or_else(|| invalid("heat-slice needs --t"))?;
            json!({"value": heat_slice_energy(&u, t, a.p)?, "t": t})
        }
        EnergyKind::Subordinated => {
            let params = FracParams::new(u.grid().dim(), a.s, a.p)?;
            let t_grid = match &a.t_range {
                Some(r) => {
                    let (lo, hi) = parse_range(r)?;
                    LogGrid::new(lo, hi, a.nodes.unwrap_or(200))?
                }
                None => LogGrid::for_grid(u.grid()),
            };
            serde_json::to_value(subordinated_seminorm(&u, &params, &t_grid, a.tol)?).unwrap_or(Value::Null)
        }
        EnergyKind::RieszGrad => {
            let opts = RieszOptions { mu: a.mu, ..Default::default() };
            json!({"value": riesz_dirichlet_energy(&u, a.s, a.p, &opts)?, "mu": a.mu})
        }
    };
    emit_json(&json!({"command": "energy", "s": a.s, "p": a.p, "kernel": a.kernel, "report": report}), out)
}

/// A built-in shape on a square box, or a mask file.
fn shape_domain(name: &str, area: f64, h: f64, half_width: f64) -> Run<IndicatorSet> {
    if let Some(file) = name.strip_prefix("mask:") {
        return Ok(io::load_mask(file)?);
    }
    positive("h", h)?;
    positive("area", area)?;
    let n = (2.0 * half_width / h).round() as usize;
    let grid = Grid::centered(&[n, n], h, false)?;
    Ok(shapes::by_name(&grid, name, area)?)
}

fn perimeter(a: PerimeterArgs, out: Option<&Path>) -> Run<()> {
    check_s(a.s)?;
    positive("h", a.h)?;
    let e = if a.shape == "interval" {
        positive("L", a.length)?;
        let n = (2.0 * a.length / a.h).round() as usize;
        let grid = Grid::centered(&[n], a.h, false)?;
        shapes::by_name(&grid, "interval", a.length)?
    } else {
        let half = 1.5 * (a.area / PI).sqrt();
        shape_domain(&a.shape, a.area, a.h, half)?
    };
    let value = fractional_perimeter(&e, a.s)?;
    let mut report = json!({
        "command": "perimeter", "shape": a.shape, "s": a.s, "h": a.h,
        "measure": measure(&e), "value": value,
    });
    if a.via_extension {
        // the same set on a torus 8× (1D) or 4× (2D) wider than its box,
        // so periodic images barely touch the value
        let widen = if e.grid().dim() == 1 { 8 } else { 4 };
        let pad = (widen - 1) * e.grid().shape().iter().copied().max().unwrap_or(1) / 2;
        let mask = e.embedded(pad, true)?;
        let torus = mask.grid().clone();
        let ext = perimeter_via_extension(&mask, a.s, &perimeter_mesh(&torus))?;
        report["via_extension"] = serde_json::to_value(ext).unwrap_or(Value::Null);
    }
    emit_json(&report, out)
}

fn default_mode_input(k: u32, n: usize) -> Run<GridFunction> {
    let grid = Grid::new(&[n], &[0.0], 2.0 * PI / n as f64, true)?;
    Ok(GridFunction::from_fn(grid, |x| (f64::from(k) * x[0]).cos())?)
}

fn fraclap(a: FraclapArgs, out: Option<&Path>) -> Run<()> {
    check_s(a.s)?;
    let u = match &a.input {
        Some(p) => io::load_function(p)?,
        None => default_mode_input(a.k, 512)?,
    };
    let spectral = fractional_laplacian_spectral(&u, a.s)?;
    let mut report = json!({"command": "fraclap", "s": a.s});
    let field = match a.method {
        Method::Spectral => spectral.clone(),
        Method::Singular => fractional_laplacian_singular(&u, a.s)?,
        Method::Bochner => {
            let (lo, hi) = parse_range(&a.t_range)?;
            let r = bochner_apply(&u, a.s, &LogGrid::new(lo, hi, a.nodes)?, a.tol)?;
            report["truncation_estimate"] = json!(r.truncation_estimate);
            r.field
        }
    };
    report["method"] = json!(match a.method {
        Method::Spectral => "spectral",
        Method::Singular => "singular",
        Method::Bochner => "bochner",
    });
    report["relative_l2_vs_spectral"] = json!(relative_l2(&field, &spectral));
    report["l2_norm"] = json!(fracsym::lp_norm(&field, 2.0)?);
    if let Some(p) = &a.dump {
        io::save_function(&field, p)?;
    }
    emit_json(&report, out)
}

fn eigen(a: EigenArgs, out: Option<&Path>) -> Run<()> {
    check_s(a.s)?;
    if !(a.p > 1.0 && a.p.is_finite()) {
        return Err(invalid(format!("p must be finite and > 1, got {}", a.p)));
    }
    let omega = shape_domain(&a.shape, a.area, a.h, a.box_half_width)?;
    let n = omega.grid().dim() as f64;
    if a.s * a.p >= n {
        return Err(invalid(format!("sp = {} >= N = {n} is outside the supported range 1 < p < N/s", a.s * a.p)));
    }
    let result = if a.p == 2.0 {
        first_eigenpair(&assemble_stiffness(&omega, a.s)?, a.tol.unwrap_or(1e-8))?
    } else {
        rayleigh_descent_p(&omega, a.s, a.p, a.tol.unwrap_or(1e-6))?
    };
    if let Some(p) = &a.dump {
        io::save_function(&result.eigenfunction, p)?;
    }
    let m = measure(&omega);
    emit_json(
        &json!({
            "command": "eigen", "shape": a.shape, "s": a.s, "p": a.p, "h": omega.grid().spacing(),
            "measure": m, "cells": omega.count(),
            "lambda1": result.lambda1,
            "scaled_lambda1": m.powf(a.s * a.p / n) * result.lambda1,
            "residual": result.residual, "iterations": result.iterations,
        }),
        out,
    )
}

fn talenti(a: TalentiArgs, out: Option<&Path>) -> Run<()> {
    check_s(a.s)?;
    let omega = io::load_mask(&a.mask)?;
    let f = io::load_function(&a.rhs)?;
    let r = talenti_pair(&omega, &f, a.s)?;
    if let Some(p) = &a.dump_u {
        io::save_function(&r.u, p)?;
    }
    if let Some(p) = &a.dump_v {
        io::save_function(&r.v, p)?;
    }
    emit_json(&json!({"command": "talenti", "s": a.s, "report": r}), out)
}

fn extend(a: ExtendArgs, out: Option<&Path>) -> Run<()> {
    check_s(a.s)?;
    let mesh = parse_mesh(&a.mesh)?;
    let u = match &a.input {
        Some(p) => io::load_function(p)?,
        None => default_mode_input(a.k, 128)?,
    };
    let field = extend_cs(&u, a.s, &mesh)?;
    let e = extension_energies(&field);
    let calibration = calibrate_cs(u.grid(), a.s, &mesh)?;
    emit_json(
        &json!({
            "command": "extend", "s": a.s, "rows": field.rows(),
            "y_max": field.y_nodes.last().copied().unwrap_or(0.0),
            "i1": e.i1, "i2": e.i2, "total": e.total(),
            "solver_form": field.solver_form(), "top_flux": field.top_flux,
            "calibration": calibration, "seminorm_squared": calibration * e.total(),
        }),
        out,
    )
}

fn ps_experiment(a: PsArgs, out: Option<&Path>) -> Run<()> {
    check_s(a.s)?;
    let mesh = parse_mesh(&a.mesh)?;
    let u = io::load_function(&a.input)?;
    let r = partial_symmetrization_experiment(&u, a.s, &mesh)?;
    emit_json(&r, out)
}

fn stability(a: StabilityArgs, out: Option<&Path>) -> Run<()> {
    check_s(a.s)?;
    positive("h", a.h)?;
    let family = match a.family {
        FamilyArg::Ellipse => Family::Ellipse { max_eccentricity: a.max_eccentricity },
        FamilyArg::Dumbbell => Family::Dumbbell { min_neck: a.min_neck },
        FamilyArg::Ball => Family::Ball,
    };
    let half = match a.family {
        FamilyArg::Dumbbell => 2.5,
        _ => 1.5,
    };
    let n = (2.0 * half / a.h).round() as usize;
    let grid = Grid::centered(&[n, n], a.h, false)?;
    let scan = stability_scan(family, &grid, PI, a.count, a.s)?;
    let mut table = CsvTable::new(&["shape_id", "asymmetry", "deficit"]);
    for r in &scan.records {
        table.push(vec![r.shape_id.clone().into(), r.asymmetry.into(), r.deficit.into()]);
    }
    match scan.slope {
        Some(k) => table.push(vec!["slope".into(), k.into(), Cell::Empty]),
        None => table.push(vec![
            "slope".into(),
            Cell::Empty,
            Cell::Text(format!("no fit in window [{}, {}]", FIT_WINDOW.0, FIT_WINDOW.1)),
        ]),
    }
    emit(&table.render(), out)
}

fn sobolev(a: SobolevArgs, out: Option<&Path>) -> Run<()> {
    check_s(a.s)?;
    let u = io::load_function(&a.input)?;
    let params = FracParams::new(u.grid().dim(), a.s, a.p)?;
    let q = sobolev_quotient(&u, &params)?;
    emit_json(&json!({"command": "sobolev-quotient", "s": a.s, "p": a.p, "p_star": params.p_star()?, "quotient": q}), out)
}

fn verify(a: VerifyArgs, out: Option<&Path>) -> Run<()> {
    if !SUITES.contains(&a.suite.as_str()) {
        return Err(invalid(format!("unknown suite '{}' (expected one of {})", a.suite, SUITES.join(", "))));
    }
    let report = run_suite(&a.suite, a.seed)?;
    emit_json(&report, out)?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Unmet)
    }
}
