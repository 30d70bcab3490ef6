//! Command-line front end. Every command prints one JSON document on standard
//! output; `--verbose` adds a one-line summary on standard error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::conditions::DEFAULT_TOL;
use crate::discmap::DiscMap;
use crate::domains::{in_g, in_spectral_ball};
use crate::error::LiftError;
use crate::generate::generate;
use crate::linalg::{classify, sigma, CMatrix};
use crate::phi::Phi;
use crate::phi_builder::build_phi_with;
use crate::problem::{GridConfig, Problem, ProblemFile, ProblemKind};
use crate::verifier::VerifyConfig;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CONDITIONS: i32 = 2;
pub const EXIT_CONSTRUCTION: i32 = 3;
pub const EXIT_INVALID: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "spectral-lift", version, about = "Lift analytic discs from the symmetrized polydisc to the spectral ball")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Problem file (JSON); standard input when omitted.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Relative tolerance for condition and verification residuals.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Number of radii in the verification grid.
    #[arg(long, global = true)]
    grid_radii: Option<usize>,
    /// Number of angles per radius in the verification grid.
    #[arg(long, global = true)]
    grid_angles: Option<usize>,
    /// Degree of the constructed φ.
    #[arg(long, global = true)]
    degree: Option<usize>,
    /// Seed for generation and randomized checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// One-line summary on standard error.
    #[arg(long, global = true)]
    verbose: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Similarity class of every matrix in the problem.
    Classify,
    /// Symmetrization σ of every matrix in the problem.
    Sigma,
    /// Spectral-ball membership of the matrices, and G_n membership of φ on the grid.
    Member,
    /// Evaluate the interpolation conditions on the supplied φ.
    Check,
    /// Check, construct and verify a lift of the supplied φ.
    Lift,
    /// Verify a previously constructed lift.
    Verify {
        /// DiscMap JSON produced by `lift`.
        #[arg(long)]
        map: PathBuf,
    },
    /// Build φ, then check, construct and verify.
    Solve,
    /// Emit a random problem file.
    Gen {
        /// Problem kind.
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Matrix dimension, 2 or 3.
        #[arg(long)]
        n: usize,
        /// Comma-separated strata (snp) or case tags (scf).
        #[arg(long, value_delimiter = ',')]
        strata: Vec<String>,
    },
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum KindArg {
    Snp,
    Scf,
}

/// Failure carried to the exit code.
struct Failure {
    code: i32,
    body: Value,
}

type Outcome = std::result::Result<(i32, Value), Failure>;

fn exit_code(e: &LiftError) -> i32 {
    match e {
        LiftError::InvalidInput(_) | LiftError::DimensionMismatch { .. } => EXIT_INVALID,
        LiftError::ConditionsFailed(_) => EXIT_CONDITIONS,
        _ => EXIT_CONSTRUCTION,
    }
}

fn error_kind(e: &LiftError) -> &'static str {
    match e {
        LiftError::DimensionMismatch { .. } => "dimension_mismatch",
        LiftError::Singular => "singular",
        LiftError::IllConditioned(_) => "ill_conditioned",
        LiftError::NotDivisible { .. } => "not_divisible",
        LiftError::UnsupportedBase(_) => "unsupported_base",
        LiftError::InvalidInput(_) => "invalid_input",
        LiftError::Infeasible { .. } => "infeasible",
        LiftError::RetriesExhausted { .. } => "retries_exhausted",
        LiftError::ConditionsFailed(_) => "conditions_failed",
    }
}

pub fn error_json(e: &LiftError) -> Value {
    let mut v = json!({ "kind": error_kind(e), "message": e.to_string() });
    match e {
        LiftError::NotDivisible { label, residual, .. } => {
            v["label"] = json!(label);
            v["residual"] = json!(residual);
        }
        LiftError::RetriesExhausted { best_margin } => v["best_margin"] = json!(best_margin),
        LiftError::Infeasible { min_degree, .. } => v["min_degree"] = json!(min_degree),
        _ => {}
    }
    json!({ "error": v })
}

impl From<LiftError> for Failure {
    fn from(e: LiftError) -> Self {
        Failure {
            code: exit_code(&e),
            body: error_json(&e),
        }
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    LiftError::InvalidInput(msg.into()).into()
}

struct Context {
    file: ProblemFile,
    tol: f64,
    degree: Option<usize>,
    seed: u64,
    verify: VerifyConfig,
}

fn read_input(path: &Option<PathBuf>) -> std::result::Result<String, Failure> {
    match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| invalid(format!("{}: {e}", p.display()))),
        None => std::io::read_to_string(std::io::stdin()).map_err(|e| invalid(format!("stdin: {e}"))),
    }
}

/// Problem file plus effective settings; flags override the file's config.
fn context(cli: &Cli) -> std::result::Result<Context, Failure> {
    let file = ProblemFile::from_json(&read_input(&cli.input)?)?;
    let cfg = &file.config;
    let tol = cli.tol.or(cfg.tol).unwrap_or(DEFAULT_TOL);
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(invalid("--tol: must be positive"));
    }
    let grid = cfg.grid.unwrap_or(GridConfig { radii: 8, angles: 32 });
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let verify = VerifyConfig {
        tol,
        grid_radii: cli.grid_radii.unwrap_or(grid.radii),
        grid_angles: cli.grid_angles.unwrap_or(grid.angles),
        seed: Some(seed),
        ..VerifyConfig::default()
    };
    if verify.grid_radii == 0 || verify.grid_angles == 0 {
        return Err(invalid("grid: radii and angles must be positive"));
    }
    Ok(Context {
        tol,
        degree: cli.degree.or(cfg.degree),
        seed,
        verify,
        file,
    })
}

/// Matrices named as in the input file.
fn named_matrices(file: &ProblemFile) -> Vec<(String, CMatrix)> {
    match (&file.nodes, &file.pair) {
        (Some(nodes), _) => nodes
            .iter()
            .enumerate()
            .map(|(j, nd)| (format!("nodes[{j}].matrix"), nd.matrix))
            .collect(),
        (_, Some(p)) => vec![("pair.A".into(), p.a), ("pair.B".into(), p.b)],
        _ => Vec::new(),
    }
}

fn supplied_phi(ctx: &Context) -> std::result::Result<&Phi, Failure> {
    ctx.file.phi.as_ref().ok_or_else(|| invalid("phi: required by this command"))
}

fn per_matrix(ctx: &Context, f: impl Fn(&CMatrix) -> Value) -> Value {
    Value::Array(
        named_matrices(&ctx.file)
            .iter()
            .map(|(name, m)| json!({ "path": name, "result": f(m) }))
            .collect(),
    )
}

/// Check, construct, verify.
fn lift_pipeline(ctx: &Context, problem: &Problem, phi: &Phi) -> Outcome {
    let report = problem.check(phi, ctx.tol)?;
    if !report.pass {
        return Ok((EXIT_CONDITIONS, json!({ "report": report })));
    }
    let map = match problem.lift(phi, ctx.tol) {
        Ok(m) => m,
        Err(e) => {
            let mut body = error_json(&e);
            body["report"] = json!(report);
            return Err(Failure {
                code: exit_code(&e),
                body,
            });
        }
    };
    let cert = problem.verify(&map, phi, &ctx.verify);
    let code = if cert.pass { EXIT_PASS } else { EXIT_CONSTRUCTION };
    Ok((code, json!({ "report": report, "map": map, "certificate": cert })))
}

fn execute(cli: &Cli) -> Outcome {
    if let Command::Gen { kind, n, strata } = &cli.command {
        let kind = match kind {
            KindArg::Snp => ProblemKind::Snp,
            KindArg::Scf => ProblemKind::Scf,
        };
        let file = generate(kind, *n, strata, cli.seed.unwrap_or(0))?;
        return Ok((EXIT_PASS, serde_json::to_value(&file).expect("problem files serialize")));
    }
    let ctx = context(cli)?;
    match &cli.command {
        Command::Classify => Ok((EXIT_PASS, json!({ "matrices": per_matrix(&ctx, |m| json!(classify(m))) }))),
        Command::Sigma => Ok((EXIT_PASS, json!({ "matrices": per_matrix(&ctx, |m| json!(sigma(m))) }))),
        Command::Member => {
            let mut out = json!({ "matrices": per_matrix(&ctx, |m| json!(in_spectral_ball(m))) });
            if let Some(phi) = &ctx.file.phi {
                let grid = ctx.verify.grid();
                let worst = grid
                    .iter()
                    .map(|&z| in_g(&phi.eval(z)))
                    .min_by(|a, b| a.margin.total_cmp(&b.margin))
                    .expect("nonempty grid");
                out["phi"] = json!({ "samples": grid.len(), "worst": worst });
            }
            Ok((EXIT_PASS, out))
        }
        Command::Check => {
            let problem = ctx.file.problem()?;
            let report = problem.check(supplied_phi(&ctx)?, ctx.tol)?;
            let code = if report.pass { EXIT_PASS } else { EXIT_CONDITIONS };
            Ok((code, json!(report)))
        }
        Command::Lift => {
            let problem = ctx.file.problem()?;
            lift_pipeline(&ctx, &problem, supplied_phi(&ctx)?)
        }
        Command::Verify { map } => {
            let problem = ctx.file.problem()?;
            let phi = supplied_phi(&ctx)?;
            let text = std::fs::read_to_string(map).map_err(|e| invalid(format!("{}: {e}", map.display())))?;
            let map: DiscMap =
                serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", map.display())))?;
            if map.n != problem.n() {
                return Err(LiftError::DimensionMismatch {
                    expected: problem.n(),
                    got: map.n,
                }
                .into());
            }
            let cert = problem.verify(&map, phi, &ctx.verify);
            let code = if cert.pass { EXIT_PASS } else { EXIT_CONSTRUCTION };
            Ok((code, json!(cert)))
        }
        Command::Solve => {
            let problem = ctx.file.problem()?;
            let phi = build_phi_with(&problem, ctx.degree, ctx.seed, &ctx.verify)?;
            let (code, mut body) = lift_pipeline(&ctx, &problem, &phi)?;
            body["phi"] = json!(phi);
            Ok((code, body))
        }
        Command::Gen { .. } => unreachable!("handled above"),
    }
}

fn summary(code: i32, body: &Value) -> String {
    let what = match code {
        EXIT_PASS => "pass",
        EXIT_CONDITIONS => "conditions failed",
        EXIT_CONSTRUCTION => "construction failed",
        _ => "invalid input",
    };
    match body.get("error").and_then(|e| e.get("message")) {
        Some(m) => format!("{what}: {}", m.as_str().unwrap_or_default()),
        None => what.to_string(),
    }
}

/// Runs one command, writing JSON to `out` and the `--verbose` summary to
/// `err`. Returns the exit code.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_PASS };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    let (code, body) = match execute(&cli) {
        Ok(r) => r,
        Err(f) => (f.code, f.body),
    };
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(&body).expect("JSON values serialize"));
    if cli.verbose {
        let _ = writeln!(err, "{}", summary(code, &body));
    }
    code
}

/// [`run_with`] on the process's standard streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
