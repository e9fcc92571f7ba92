//! Command-line front end for the `ncho` library.
//!
//! Exit codes: 0 success, 2 usage or schema error, 3 contract violation,
//! 4 solver failure. Errors from the library are written to stderr as
//! `{"error": kind, "message": text}`.

pub mod problem_file;

use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use ncho::covariance::standardize_p2;
use ncho::fuchsian::{build_fuchsian, verify_fuchs_theorem};
use ncho::heun::{
    apparent_singularity_check, computed_scheme, heun_like_parameters, quantization_check, RabiParameters,
};
use ncho::pencil::{decompose_pencil, positivity_margin, verify_pencil_lemma_seeded};
use ncho::spectral::profile::{uniform_grid, DEFAULT_PROFILE_ORDER};
use ncho::spectral::{
    confluence_sweep, eigenfunction_profile, spectrum_connection, spectrum_truncated, SpectrumResult,
};
use ncho::{NchoError, C64};

use problem_file::{parse_problem, ParseError, ProblemFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONTRACT: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;

const LEMMA_TOL: f64 = 1e-9;
const THEOREM_TOL: f64 = 1e-8;
const MARGIN_GRID: usize = 4096;

#[derive(Debug, Parser)]
#[command(name = "ncho", version, about = "Spectral analysis of non-commutative harmonic oscillators")]
pub struct Cli {
    /// Write the result here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Seed for random sample points; defaults to a hash of the input.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON indentation width; 0 gives compact output.
    #[arg(long, global = true, default_value_t = 2)]
    json_indent: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Trunc,
    Connect,
    Both,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the partial-fraction identities of the pencil.
    VerifyPencil { problem: String },
    /// Least eigenvalue of the symbol on the unit circle.
    Positivity { problem: String },
    /// Reduce a p = 2 problem to standard form.
    Standardize { problem: String },
    /// Fuchsian system at λ and its structural checks.
    Fuchsian {
        problem: String,
        /// λ as `re` or `re,im`; falls back to the problem file.
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
    },
    /// Scalar Heun-type parameters after standardization (p = 2).
    HeunParams {
        problem: String,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
    },
    /// Lowest eigenvalues.
    Spectrum {
        problem: String,
        #[arg(long, value_enum, default_value = "trunc")]
        method: MethodArg,
        #[arg(long, default_value_t = 5)]
        count: usize,
        /// Defaults to the problem file's `tol`, then 1e-10.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Eigenfunction samples on [0, tmax] as CSV.
    Eigenfunction {
        problem: String,
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long, default_value_t = 10.0)]
        tmax: f64,
        #[arg(long, default_value_t = 101)]
        samples: usize,
        /// Truncation order; defaults to the problem file's `M`, then 128.
        #[arg(long)]
        order: Option<usize>,
    },
    /// Confluence of rescaled spectra towards the two-level Rabi model, as CSV.
    Confluence {
        #[arg(long, default_value_t = 1.0)]
        omega: f64,
        #[arg(long, default_value_t = 0.3)]
        g: f64,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        eps: f64,
        #[arg(long, value_delimiter = ',', default_value = "40,160,640")]
        mu_list: Vec<f64>,
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
}

/// Failure of one invocation, mapped onto an exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Schema(problem_file::SchemaError),
    Io(String),
    Library(NchoError),
}

impl From<NchoError> for Failure {
    fn from(e: NchoError) -> Self {
        Failure::Library(e)
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        match e {
            ParseError::Schema(s) => Failure::Schema(s),
            ParseError::Contract(c) => Failure::Library(c),
        }
    }
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) | Failure::Schema(_) | Failure::Io(_) => EXIT_USAGE,
            Failure::Library(e) if e.is_solver_failure() || matches!(e, NchoError::Unsupported(_)) => {
                EXIT_SOLVER
            }
            Failure::Library(_) => EXIT_CONTRACT,
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Failure::Usage(m) => json!({"error": "usage", "message": m}),
            Failure::Io(m) => json!({"error": "io", "message": m}),
            Failure::Schema(s) => json!({"error": "schema", "path": s.path, "message": s.message}),
            Failure::Library(e) => json!({"error": e.kind(), "message": e.to_string()}),
        }
    }
}

/// Output of a subcommand: JSON documents are formatted by the caller,
/// tables are passed through.
enum Output {
    Json(Value),
    Csv(String),
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn format_json(v: &Value, indent: usize) -> String {
    if indent == 0 {
        return serde_json::to_string(v).expect("values serialize");
    }
    let pad = vec![b' '; indent];
    let mut buf = Vec::new();
    let formatter = serde_json::ser::PrettyFormatter::with_indent(&pad);
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, formatter);
    v.serialize(&mut ser).expect("values serialize");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

fn load(path: &str, stdin: &mut dyn Read) -> Result<ProblemFile, Failure> {
    let mut text = String::new();
    if path == "-" {
        stdin
            .read_to_string(&mut text)
            .map_err(|e| Failure::Io(format!("stdin: {e}")))?;
    } else {
        text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{path}: {e}")))?;
    }
    Ok(parse_problem(&text)?)
}

/// Parses `re` or `re,im`.
fn parse_lambda(text: &str) -> Result<C64, Failure> {
    let bad = || Failure::Usage(format!("--lambda expects `re` or `re,im`, got `{text}`"));
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
    match parts.as_slice() {
        [re] => Ok(C64::new(num(re)?, 0.0)),
        [re, im] => Ok(C64::new(num(re)?, num(im)?)),
        _ => Err(bad()),
    }
}

fn resolve_lambda(flag: Option<&str>, file: &ProblemFile) -> Result<C64, Failure> {
    match (flag, file.lambda) {
        (Some(text), _) => parse_lambda(text),
        (None, Some(l)) => Ok(l),
        (None, None) => Err(Failure::Usage("λ is required: pass --lambda or set `lambda` in the problem file".into())),
    }
}

fn pair(z: C64) -> Value {
    json!([z.re, z.im])
}

fn spectrum_json(result: &SpectrumResult) -> Value {
    to_value(result)
}

fn execute(cli: &Cli, stdin: &mut dyn Read) -> Result<Output, Failure> {
    match &cli.command {
        Command::VerifyPencil { problem } => {
            let file = load(problem, stdin)?;
            let dec = decompose_pencil(&file.problem)?;
            let seed = cli.seed.unwrap_or_else(|| file.problem.input_hash());
            let report = verify_pencil_lemma_seeded(&dec, &file.problem, LEMMA_TOL, seed)?;
            Ok(Output::Json(json!({
                "command": "verify-pencil",
                "seed": seed,
                "all_passed": report.all_passed,
                "lines": report.lines(),
                "report": to_value(&report),
                "decomposition": to_value(&dec),
            })))
        }
        Command::Positivity { problem } => {
            let file = load(problem, stdin)?;
            let margin = positivity_margin(&file.problem, MARGIN_GRID);
            Ok(Output::Json(json!({
                "command": "positivity",
                "positive": margin.is_positive(),
                "certified": margin.is_certified(),
                "margin": to_value(&margin),
            })))
        }
        Command::Standardize { problem } => {
            let file = load(problem, stdin)?;
            let st = standardize_p2(&file.problem)?;
            Ok(Output::Json(json!({"command": "standardize", "standardization": to_value(&st)})))
        }
        Command::Fuchsian { problem, lambda } => {
            let file = load(problem, stdin)?;
            let lambda = resolve_lambda(lambda.as_deref(), &file)?;
            let system = build_fuchsian(&file.problem, lambda)?;
            let report = verify_fuchs_theorem(&system, &file.problem)?;
            Ok(Output::Json(json!({
                "command": "fuchsian",
                "lambda": pair(lambda),
                "passed": report.passed(THEOREM_TOL),
                "system": to_value(&system),
                "theorem": to_value(&report),
            })))
        }
        Command::HeunParams { problem, lambda } => {
            let file = load(problem, stdin)?;
            let lambda = resolve_lambda(lambda.as_deref(), &file)?;
            let st = standardize_p2(&file.problem)?;
            let params = heun_like_parameters(&st.problem, lambda)?;
            let scheme = computed_scheme(&params)?;
            let apparent = match params.epsilon {
                Some(_) => Some(to_value(&apparent_singularity_check(&params)?)),
                None => None,
            };
            Ok(Output::Json(json!({
                "command": "heun-params",
                "lambda": pair(lambda),
                "standardization": to_value(&st),
                "parameters": to_value(&params),
                "computed_scheme": to_value(&scheme),
                "fuchs_defect": params.fuchs_defect(),
                "quantization": to_value(&quantization_check(&params)),
                "apparent": apparent,
            })))
        }
        Command::Spectrum { problem, method, count, tol } => {
            let file = load(problem, stdin)?;
            let tol = tol.or(file.tol).unwrap_or(1e-10);
            if *count == 0 {
                return Err(Failure::Usage("--count must be positive".into()));
            }
            let doc = match method {
                MethodArg::Trunc => spectrum_json(&spectrum_truncated(&file.problem, *count, tol)?),
                MethodArg::Connect => spectrum_json(&spectrum_connection(&file.problem, *count, tol)?),
                MethodArg::Both => {
                    let trunc = spectrum_truncated(&file.problem, *count, tol)?;
                    let conn = spectrum_connection(&file.problem, *count, tol)?;
                    let rows: Vec<Value> = trunc
                        .eigenvalues
                        .iter()
                        .zip(&conn.eigenvalues)
                        .enumerate()
                        .map(|(k, (a, b))| json!({"index": k, "truncation": a, "connection": b, "difference": (a - b).abs()}))
                        .collect();
                    let max_difference = trunc
                        .eigenvalues
                        .iter()
                        .zip(&conn.eigenvalues)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    json!({
                        "agreement": rows,
                        "max_difference": max_difference,
                        "truncation": spectrum_json(&trunc),
                        "connection": spectrum_json(&conn),
                    })
                }
            };
            Ok(Output::Json(json!({"command": "spectrum", "tol": tol, "result": doc})))
        }
        Command::Eigenfunction { problem, index, tmax, samples, order } => {
            let file = load(problem, stdin)?;
            if *samples < 2 || !(*tmax > 0.0) {
                return Err(Failure::Usage("need --samples ≥ 2 and --tmax > 0".into()));
            }
            let order = order.or(file.order).unwrap_or(DEFAULT_PROFILE_ORDER);
            let spectrum = spectrum_truncated(&file.problem, index + 1, 1e-10)?;
            let lambda = spectrum.eigenvalues[*index];
            let profile = eigenfunction_profile(&file.problem, lambda, order, &uniform_grid(*tmax, *samples))?;
            Ok(Output::Csv(profile.to_csv()))
        }
        Command::Confluence { omega, g, delta, eps, mu_list, count, tol } => {
            if mu_list.is_empty() || *count == 0 {
                return Err(Failure::Usage("need a non-empty --mu-list and a positive --count".into()));
            }
            let model = RabiParameters {
                omega: *omega,
                g_coupling: *g,
                delta: *delta,
                eps_bias: *eps,
                lambda: 0.0,
            };
            let sweep = confluence_sweep(&model, mu_list, *count, *tol)?;
            Ok(Output::Csv(confluence_csv(&sweep)))
        }
    }
}

fn confluence_csv(sweep: &ncho::spectral::ConfluenceSweep) -> String {
    let count = sweep.rabi_spectrum.len();
    let mut out = String::from("mu,deviation,ratio");
    for k in 0..count {
        out.push_str(&format!(",level_{k}"));
    }
    out.push('\n');
    out.push_str("rabi,0,");
    for v in &sweep.rabi_spectrum {
        out.push_str(&format!(",{v}"));
    }
    out.push('\n');
    for (i, row) in sweep.rows.iter().enumerate() {
        let ratio = if i == 0 {
            String::new()
        } else {
            sweep.ratios[i - 1].to_string()
        };
        out.push_str(&format!("{},{},{}", row.mu, row.deviation, ratio));
        for v in &row.scaled_spectrum {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

/// Runs one invocation. `args` includes the program name.
pub fn run<I, S>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let target: &mut dyn Write = if code == EXIT_OK { stdout } else { stderr };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let text = match execute(&cli, stdin) {
        Ok(Output::Json(v)) => format_json(&v, cli.json_indent) + "\n",
        Ok(Output::Csv(s)) => s,
        Err(failure) => {
            let _ = writeln!(stderr, "{}", format_json(&failure.to_json(), 0));
            return failure.exit_code();
        }
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                let failure = Failure::Io(format!("{}: {e}", path.display()));
                let _ = writeln!(stderr, "{}", format_json(&failure.to_json(), 0));
                return failure.exit_code();
            }
        }
        None => {
            if stdout.write_all(text.as_bytes()).is_err() {
                return EXIT_USAGE;
            }
        }
    }
    EXIT_OK
}
