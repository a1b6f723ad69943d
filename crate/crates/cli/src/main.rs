//! `jumpconj`: decide, build and check conjugacies between jump maps.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{debug, info};
use serde::Serialize;

use jumpconj::corpus;
use jumpconj::orbit::boundary_orbit;
use jumpconj::plot::{curve, pin_rows};
use jumpconj::verify::residual_samples;
use jumpconj::{
    build_conjugacy, check_smoothness, decide_pair, initial_homeo_from_spec, verify_homeomorphism,
    Conjugacy, ConjugacyHandle, Error, EvalParams, InitSpec, JumpMap, MapSpec, SmoothnessParams,
    SmoothnessReport, ValidationParams, VerificationReport, VerifyParams,
};

#[derive(Parser, Debug)]
#[command(name = "jumpconj", version, about = "Conjugacies between monotone interval maps with one jump")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args, Debug)]
struct Opts {
    /// Grid size for verify, smoothness samples and plot
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Truncation depth of the orbit partitions
    #[arg(long, global = true)]
    n_max: Option<usize>,
    /// Points this close to an endpoint take the endpoint image
    #[arg(long, global = true)]
    endpoint_eps: Option<f64>,
    /// Tolerance of non-affine branch inversions
    #[arg(long, global = true)]
    inv_tol: Option<f64>,
    /// Output file (a directory for `examples`)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Per-sample dump (orbit rows, residuals or products)
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// Initial homeomorphism spec (JSON)
    #[arg(long, global = true)]
    init: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check that a map file describes a valid map
    Validate { map: PathBuf },
    /// Report the family and jump type of a map
    Classify { map: PathBuf },
    /// Decide whether two maps are conjugate
    Decide { f: PathBuf, g: PathBuf },
    /// Build a conjugacy and write its handle
    Build { f: PathBuf, g: PathBuf },
    /// Evaluate a conjugacy handle at x values given as flags or on stdin
    Eval {
        handle: PathBuf,
        #[arg(long = "x", allow_negative_numbers = true)]
        xs: Vec<f64>,
        /// Evaluate the inverse instead
        #[arg(long)]
        inverse: bool,
    },
    /// Check the conjugacy equation, monotonicity and forced values
    Verify {
        /// A handle, or two map files
        #[arg(num_args = 1..=2, required = true)]
        inputs: Vec<PathBuf>,
        /// Largest acceptable residual
        #[arg(long, default_value_t = 1e-9)]
        bound: f64,
    },
    /// Check the C¹ criteria
    Smoothness {
        #[arg(num_args = 1..=2, required = true)]
        inputs: Vec<PathBuf>,
        /// Truncation of the products
        #[arg(long, default_value_t = 60)]
        depth: usize,
    },
    /// Write the curve and the forced points as CSV
    Plot {
        #[arg(num_args = 1..=2, required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Write the bundled examples and run the pipeline on them
    Examples,
}

#[derive(Debug)]
enum CliError {
    Lib(Error),
    Io(PathBuf, io::Error),
    Parse(String),
    /// A check ran and came back negative.
    Failed(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(..) | CliError::Parse(_) => 2,
            CliError::Failed(_) => 1,
            CliError::Lib(e) => match e {
                Error::Spec(_) | Error::Argument(_) => 2,
                Error::DepthExceeded { .. }
                | Error::NonFinite(_)
                | Error::Domain { .. }
                | Error::Range { .. }
                | Error::ConstructionDomain(_) => 3,
                _ => 1,
            },
        }
    }

    fn kind(&self) -> String {
        match self {
            CliError::Io(..) => "Io".into(),
            CliError::Parse(_) => "Parse".into(),
            CliError::Failed(_) => "CheckFailed".into(),
            CliError::Lib(e) => format!("{e:?}")
                .split(|c: char| !c.is_alphanumeric())
                .next()
                .unwrap_or("Error")
                .to_string(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Parse(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Parse(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CONJ_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let body = serde_json::json!({
                "error": e.kind(),
                "message": e.to_string(),
                "exit_code": e.code(),
            });
            eprintln!("{body}");
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let opts = &cli.opts;
    if let Some(n) = opts.grid {
        if n < 2 {
            return Err(Error::Argument(format!("--grid {n} must be at least 2")).into());
        }
    }
    for (name, v) in [("--endpoint-eps", opts.endpoint_eps), ("--inv-tol", opts.inv_tol)] {
        if let Some(v) = v {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Argument(format!("{name} {v} must be positive")).into());
            }
        }
    }
    match &cli.command {
        Command::Validate { map } => validate(map, opts),
        Command::Classify { map } => classify(map, opts),
        Command::Decide { f, g } => decide(f, g, opts),
        Command::Build { f, g } => {
            let phi = build_from_maps(f, g, opts)?;
            let handle = ConjugacyHandle::from_conjugacy(&phi)?;
            emit(opts.out.as_deref(), &pretty(&handle))
        }
        Command::Eval { handle, xs, inverse } => eval(handle, xs, *inverse, opts),
        Command::Verify { inputs, bound } => {
            let phi = load(inputs, opts)?;
            let rep = verify(&phi, opts)?;
            emit(opts.out.as_deref(), &pretty(&rep))?;
            if rep.passes(*bound) {
                Ok(())
            } else {
                Err(Error::NotConjugate(format!(
                    "verification failed: max residual {:e} (bound {:e})",
                    rep.max_residual, bound
                ))
                .into())
            }
        }
        Command::Smoothness { inputs, depth } => {
            let phi = load(inputs, opts)?;
            let rep = smoothness(&phi, *depth, opts)?;
            emit(opts.out.as_deref(), &pretty(&rep))
        }
        Command::Plot { inputs } => {
            let phi = load(inputs, opts)?;
            let out = opts.out.clone().unwrap_or_else(|| PathBuf::from("phi.csv"));
            plot(&phi, opts.grid.unwrap_or(1000), &out)
        }
        Command::Examples => examples(opts),
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn write(path: &Path, body: &str) -> CliResult<()> {
    fs::write(path, body).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn emit(out: Option<&Path>, body: &str) -> CliResult<()> {
    match out {
        Some(p) => write(p, body),
        None => {
            let mut stdout = io::stdout().lock();
            writeln!(stdout, "{body}").map_err(|e| CliError::Io("<stdout>".into(), e))
        }
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize")
}

fn read_map(path: &Path) -> CliResult<JumpMap> {
    let spec = MapSpec::parse(&read(path)?)?;
    debug!("parsed {}", path.display());
    Ok(spec.to_map()?)
}

fn eval_params(opts: &Opts, base: EvalParams) -> EvalParams {
    EvalParams {
        inv_tol: opts.inv_tol.unwrap_or(base.inv_tol),
        n_max: opts.n_max.unwrap_or(base.n_max),
        endpoint_eps: opts.endpoint_eps.unwrap_or(base.endpoint_eps),
    }
}

fn build_from_maps(f: &Path, g: &Path, opts: &Opts) -> CliResult<Conjugacy> {
    let (f, g) = (read_map(f)?, read_map(g)?);
    let params = eval_params(opts, EvalParams::default());
    let init = match &opts.init {
        None => None,
        Some(p) => {
            let spec: InitSpec =
                serde_json::from_str(&read(p)?).map_err(|e| CliError::Parse(e.to_string()))?;
            let decision = decide_pair(&f, &g)?;
            let orientation = decision.orientation.ok_or_else(|| {
                Error::NotConjugate(format!("case pair {:?}", decision.case_pair))
            })?;
            Some(initial_homeo_from_spec(&f, &g, orientation, &spec)?)
        }
    };
    let phi = build_conjugacy(&f, &g, init, params)?;
    info!("built a {:?} conjugacy", phi.orientation());
    Ok(phi)
}

fn load_handle(path: &Path, opts: &Opts) -> CliResult<Conjugacy> {
    let mut handle = ConjugacyHandle::parse(&read(path)?)?;
    handle.params = eval_params(opts, handle.params);
    Ok(handle.build()?)
}

fn load(inputs: &[PathBuf], opts: &Opts) -> CliResult<Conjugacy> {
    match inputs {
        [h] => load_handle(h, opts),
        [f, g] => build_from_maps(f, g, opts),
        _ => unreachable!("clap limits the inputs to one or two"),
    }
}

fn validate(path: &Path, opts: &Opts) -> CliResult<()> {
    let spec = MapSpec::parse(&read(path)?)?;
    let report = match spec.to_map() {
        Ok(m) => m.validate(&ValidationParams::default()),
        Err(Error::Invalid(r)) => *r,
        Err(e) => return Err(e.into()),
    };
    emit(opts.out.as_deref(), &pretty(&report))?;
    if report.is_valid() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("{} violation(s)", report.violations.len())))
    }
}

#[derive(Serialize)]
struct Classification {
    family: jumpconj::Family,
    kind: jumpconj::JumpKind,
    t: f64,
    value_at_t: f64,
    left_limit: f64,
    right_limit: f64,
}

#[derive(Serialize)]
struct OrbitRow {
    n: usize,
    point: f64,
    side: jumpconj::Side,
}

fn classify(path: &Path, opts: &Opts) -> CliResult<()> {
    let m = read_map(path)?;
    let (left_limit, right_limit) = m.one_sided_limits();
    let c = Classification {
        family: m.family(),
        kind: m.classify(),
        t: m.t(),
        value_at_t: m.value_at_t(),
        left_limit,
        right_limit,
    };
    if let Some(csv_path) = &opts.csv {
        let params = eval_params(opts, EvalParams::default());
        let orbit = boundary_orbit(&m, params.n_max, params.endpoint_eps)?;
        let mut w = csv_writer(csv_path)?;
        for (n, point, side) in orbit.rows() {
            w.serialize(OrbitRow { n, point, side })?;
        }
        w.flush().map_err(|e| CliError::Io(csv_path.clone(), e))?;
    }
    emit(opts.out.as_deref(), &serde_json::to_string(&c).expect("serializes"))
}

fn decide(f: &Path, g: &Path, opts: &Opts) -> CliResult<()> {
    let d = decide_pair(&read_map(f)?, &read_map(g)?)?;
    emit(opts.out.as_deref(), &serde_json::to_string(&d).expect("serializes"))?;
    if d.conjugate {
        Ok(())
    } else {
        Err(CliError::Failed(format!("not conjugate ({:?})", d.case_pair)))
    }
}

#[derive(Serialize)]
struct EvalRow {
    x: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    phi_x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    phi_inv_x: Option<f64>,
}

fn eval(handle: &Path, xs: &[f64], inverse: bool, opts: &Opts) -> CliResult<()> {
    let phi = load_handle(handle, opts)?;
    let xs = if xs.is_empty() {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Io("<stdin>".into(), e))?;
        s.split(|c: char| c.is_whitespace() || c == ',')
            .filter(|w| !w.is_empty())
            .map(|w| w.parse::<f64>().map_err(|e| CliError::Parse(format!("{w:?}: {e}"))))
            .collect::<CliResult<Vec<_>>>()?
    } else {
        xs.to_vec()
    };
    let rows = xs
        .iter()
        .map(|&x| {
            Ok(if inverse {
                EvalRow {
                    x,
                    phi_x: None,
                    phi_inv_x: Some(phi.evaluate_inverse(x, phi.params().inv_tol)?),
                }
            } else {
                EvalRow {
                    x,
                    phi_x: Some(phi.evaluate(x)?),
                    phi_inv_x: None,
                }
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    emit(opts.out.as_deref(), &pretty(&rows))
}

fn csv_writer(path: &Path) -> CliResult<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    Ok(csv::Writer::from_writer(file))
}

#[derive(Serialize)]
struct ResidualRow {
    x: f64,
    residual: f64,
}

fn verify(phi: &Conjugacy, opts: &Opts) -> CliResult<VerificationReport> {
    let params = VerifyParams {
        grid_n: opts.grid.unwrap_or(VerifyParams::default().grid_n),
        endpoint_eps: phi.params().endpoint_eps,
        ..VerifyParams::default()
    };
    let rep = verify_homeomorphism(phi, phi.f(), phi.g(), &params);
    info!("max residual {:e} at x = {}", rep.max_residual, rep.residual_argmax);
    if let Some(path) = &opts.csv {
        let mut w = csv_writer(path)?;
        for (x, residual) in residual_samples(phi, phi.f(), phi.g(), params.grid_n, params.endpoint_eps) {
            w.serialize(ResidualRow { x, residual })?;
        }
        w.flush().map_err(|e| CliError::Io(path.clone(), e))?;
    }
    Ok(rep)
}

#[derive(Serialize)]
struct ProductRow {
    x: f64,
    #[serde(rename = "N")]
    n: usize,
    product: f64,
}

fn smoothness(phi: &Conjugacy, depth: usize, opts: &Opts) -> CliResult<SmoothnessReport> {
    let defaults = SmoothnessParams::default();
    let params = SmoothnessParams {
        n: depth,
        samples: opts.grid.unwrap_or(defaults.samples),
        eval: phi.params(),
    };
    let rep = check_smoothness(phi.f(), phi.g(), phi.init(), &params)?;
    if let Some(path) = &opts.csv {
        let mut w = csv_writer(path)?;
        for p in &rep.product_samples {
            w.serialize(ProductRow {
                x: p.x,
                n: p.n,
                product: p.product,
            })?;
        }
        w.flush().map_err(|e| CliError::Io(path.clone(), e))?;
    }
    Ok(rep)
}

/// `phi.csv` → `phi_pins.csv`
fn pins_path(curve_path: &Path) -> PathBuf {
    let stem = curve_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "phi".into());
    curve_path.with_file_name(format!("{stem}_pins.csv"))
}

fn plot(phi: &Conjugacy, grid_n: usize, out: &Path) -> CliResult<()> {
    let mut w = csv_writer(out)?;
    for p in curve(phi, grid_n)? {
        w.serialize(p)?;
    }
    w.flush().map_err(|e| CliError::Io(out.to_path_buf(), e))?;
    let pins = pins_path(out);
    let mut w = csv_writer(&pins)?;
    for r in pin_rows(phi, VerifyParams::default().orbit_depth)? {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| CliError::Io(pins.clone(), e))?;
    info!("wrote {} and {}", out.display(), pins.display());
    Ok(())
}

#[derive(Serialize)]
struct ExampleSummary {
    name: String,
    decision: jumpconj::PairDecision,
    verification: VerificationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    smoothness: Option<SmoothnessReport>,
}

fn examples(opts: &Opts) -> CliResult<()> {
    let dir = opts.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| CliError::Io(dir.clone(), e))?;
    let grid = opts.grid.unwrap_or(2000);
    let mut summaries = Vec::new();
    for (name, (f, g)) in [("ex1", corpus::example_one()), ("ex2", corpus::example_two())] {
        let (fp, gp) = (dir.join(format!("{name}_f.json")), dir.join(format!("{name}_g.json")));
        write(&fp, &f.to_json())?;
        write(&gp, &g.to_json())?;
        let (fm, gm) = (f.to_map()?, g.to_map()?);
        let decision = decide_pair(&fm, &gm)?;
        let phi = build_conjugacy(&fm, &gm, None, eval_params(opts, EvalParams::default()))?;
        let handle = ConjugacyHandle::from_conjugacy(&phi)?;
        write(&dir.join(format!("{name}_handle.json")), &pretty(&handle))?;
        let params = VerifyParams {
            grid_n: grid,
            endpoint_eps: phi.params().endpoint_eps,
            ..VerifyParams::default()
        };
        let verification = verify_homeomorphism(&phi, &fm, &gm, &params);
        plot(&phi, grid, &dir.join(format!("{name}_phi.csv")))?;
        let smoothness = match check_smoothness(&fm, &gm, phi.init(), &SmoothnessParams::default()) {
            Ok(r) => Some(r),
            Err(Error::Scope(m)) => {
                debug!("{name}: smoothness skipped ({m})");
                None
            }
            Err(e) => return Err(e.into()),
        };
        summaries.push(ExampleSummary {
            name: name.into(),
            decision,
            verification,
            smoothness,
        });
    }
    write(&dir.join("summary.json"), &pretty(&summaries))?;
    let failed: Vec<&str> = summaries
        .iter()
        .filter(|s| !s.verification.passes(1e-9))
        .map(|s| s.name.as_str())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("verification failed for {}", failed.join(", "))))
    }
}
