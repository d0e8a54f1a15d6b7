//! `fbasis`: batch verification of the algebraic Bethe ansatz library.
//!
//! Every run prints one JSON line (`"schema":"1"`) and exits 0 iff all of its
//! checks passed. Errors exit 2.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fbasis_core::algebra::all_relations;
use fbasis_core::bethe::{solve_bae, SolveOptions};
use fbasis_core::chain::ChainSpecJson;
use fbasis_core::fbasis::{o_hat_from_b, o_hat_product, verify_factorization, FactorizingOperator};
use fbasis_core::field::{from_rational, parse_scalar, scalar_into, ParsedScalar};
use fbasis_core::fixtures::{fixture_gen, Bounds, Method, Sampler};
use fbasis_core::identities::{run_all, run_identity, IdentityReport, IDENTITY_IDS};
use fbasis_core::partition::{phi_m_det, phi_m_direct};
use fbasis_core::scalar_products::{
    ensure_on_shell, gaudin_norm, norm_direct, sp_direct, sp_fbasis, sp_slavnov, sp_slavnov_jacobian, sp_subset_sum,
    JacobianSign,
};
use fbasis_core::{ChainSpec, ComplexFloat, Field, Rational, Regime, DEFAULT_TOLERANCE};
use serde_json::{json, Value};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] fbasis_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "fbasis", version, about = "Exact algebraic Bethe ansatz checks on small spin chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    chain: ChainArgs,
}

#[derive(Args, Debug, Clone)]
struct ChainArgs {
    /// Chain length; with no --xi, inhomogeneities are drawn from --seed.
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true, default_value = "1")]
    eta: String,
    /// Comma-separated inhomogeneities, e.g. "0,2" or "0,1/3,-5/2".
    #[arg(long, global = true, allow_hyphen_values = true)]
    xi: Option<String>,
    #[arg(long, global = true, value_enum, default_value = "xxx")]
    regime: RegimeArg,
    /// Relative tolerance for float mode (exact mode always compares exactly).
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Append the JSON report line to this file as well.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum RegimeArg {
    Xxx,
    Xxz,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq)]
enum MethodArg {
    Direct,
    SubsetSum,
    Fbasis,
    Slavnov,
    Jacobian,
    All,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Direct => Method::Direct,
            MethodArg::SubsetSum => Method::SubsetSum,
            MethodArg::Fbasis => Method::Fbasis,
            MethodArg::Slavnov => Method::Slavnov,
            MethodArg::Jacobian => Method::Jacobian,
            MethodArg::All => Method::All,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Chain-level commands.
    Chain {
        #[command(subcommand)]
        action: ChainAction,
    },
    /// Ô by both constructions, Õ Ô = f̂, and the exchange factorization.
    VerifyFactorization,
    /// Domain-wall partition function: determinant against contraction.
    Phi {
        #[arg(long, allow_hyphen_values = true)]
        t: String,
    },
    /// Scalar product <0|C(lambda)..B(t)..|0>.
    Sp {
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        #[arg(long, value_enum, default_value = "all")]
        method: MethodArg,
    },
    /// Norm of an on-shell Bethe vector.
    Norm {
        #[arg(long, allow_hyphen_values = true)]
        t: String,
    },
    /// Solve the Bethe equations for M roots.
    SolveBae {
        #[arg(long)]
        m: usize,
        /// Seed root sets, e.g. "0.5,1.5;2,3.5".
        #[arg(long, allow_hyphen_values = true)]
        seeds: Option<String>,
    },
    /// Run every identity at random rational points.
    Identities {
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Identity lab: emits a JSON array of identity reports.
    IdentityLab {
        #[command(subcommand)]
        action: LabAction,
    },
    /// Factorization, algebra relations, Phi, scalar products and identities.
    All {
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Emit random valid run configurations as JSON lines.
    Fixtures {
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 6)]
        n_max: usize,
    },
}

#[derive(Subcommand, Debug)]
enum ChainAction {
    /// Check the chain invariants and echo the canonical spec.
    Validate,
}

#[derive(Subcommand, Debug)]
enum LabAction {
    Run {
        #[arg(long)]
        all: bool,
        #[arg(long)]
        id: Option<String>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
}

/// Accumulates checks and values for one report line.
struct Report {
    command: &'static str,
    mode: &'static str,
    inputs: Value,
    checks: Vec<Value>,
    values: serde_json::Map<String, Value>,
}

impl Report {
    fn new(command: &'static str, mode: &'static str, inputs: Value) -> Self {
        Report { command, mode, inputs, checks: vec![], values: serde_json::Map::new() }
    }

    fn check(&mut self, name: impl Into<String>, pass: bool, detail: Value) {
        self.checks.push(json!({"name": name.into(), "pass": pass, "detail": detail}));
    }

    fn value(&mut self, key: &str, v: Value) {
        self.values.insert(key.to_string(), v);
    }

    fn pass(&self) -> bool {
        self.checks.iter().all(|c| c["pass"] == Value::Bool(true))
    }
}

fn parse_list(s: &str) -> CliResult<Vec<ParsedScalar>> {
    if s.trim().is_empty() {
        return Ok(vec![]);
    }
    s.split(',').map(|p| Ok(parse_scalar(p.trim())?)).collect()
}

fn into_field<T: Field>(v: &[ParsedScalar]) -> CliResult<Vec<T>> {
    v.iter().map(|p| Ok(scalar_into(p)?)).collect()
}

fn values_json<T: Field>(v: &[T]) -> Value {
    Value::Array(v.iter().map(Field::to_json).collect())
}

/// Chain spec from the flags; inhomogeneities drawn from the seed when absent.
fn chain_spec(args: &ChainArgs) -> CliResult<ChainSpecJson> {
    let regime = match args.regime {
        RegimeArg::Xxx => Regime::Xxx,
        RegimeArg::Xxz => Regime::Xxz,
    };
    let eta = parse_scalar(&args.eta)?;
    let xi = match &args.xi {
        Some(s) => parse_list(s)?,
        None => {
            let n = args.n.ok_or_else(|| CliError::Usage("give --xi or --n".into()))?;
            let eta_q = eta.to_rational().ok_or_else(|| CliError::Usage("random xi needs a rational --eta".into()))?;
            let mut sampler = Sampler::new(args.seed, Bounds::default());
            sampler.generic(n, &[], &eta_q, &[1])?.into_iter().map(ParsedScalar::Rational).collect()
        }
    };
    if let Some(n) = args.n {
        if n != xi.len() {
            return Err(CliError::Usage(format!("--n {n} but {} inhomogeneities given", xi.len())));
        }
    }
    let to_json = |p: &ParsedScalar| match p {
        ParsedScalar::Rational(q) => q.to_json(),
        ParsedScalar::Float(z) => z.to_json(),
    };
    Ok(ChainSpecJson { regime, n: xi.len(), eta: to_json(&eta), xi: xi.iter().map(to_json).collect() })
}

/// Parameter lists a command reads, so that any decimal switches the run to floats.
fn command_inputs(cmd: &Command) -> CliResult<Vec<ParsedScalar>> {
    Ok(match cmd {
        Command::Phi { t } | Command::Norm { t } => parse_list(t)?,
        Command::Sp { lambda, t, .. } => [parse_list(lambda)?, parse_list(t)?].concat(),
        _ => vec![],
    })
}

fn tolerance<T: Field>(args: &ChainArgs) -> f64 {
    if T::EXACT {
        0.0
    } else {
        args.tol.unwrap_or(DEFAULT_TOLERANCE)
    }
}

fn run<T: Field>(cmd: &Command, args: &ChainArgs, spec: &ChainSpecJson) -> CliResult<Report> {
    let chain: ChainSpec<T> = spec.build()?;
    let tol = tolerance::<T>(args);
    let inputs = json!({"chain": chain.to_json()});
    match cmd {
        Command::Chain { action: ChainAction::Validate } => {
            let mut r = Report::new("chain validate", T::NAME, inputs);
            r.check("invariants", true, Value::Null);
            r.value("dim", json!(chain.dim()));
            Ok(r)
        }
        Command::VerifyFactorization => {
            let mut r = Report::new("verify-factorization", T::NAME, inputs);
            factorization_checks(&chain, tol, &mut r)?;
            Ok(r)
        }
        Command::Phi { t } => {
            let t: Vec<T> = into_field(&parse_list(t)?)?;
            let mut r = Report::new("phi", T::NAME, json!({"chain": chain.to_json(), "t": values_json(&t)}));
            phi_check(&chain, &t, tol, &mut r)?;
            Ok(r)
        }
        Command::Sp { lambda, t, method } => {
            let l: Vec<T> = into_field(&parse_list(lambda)?)?;
            let t: Vec<T> = into_field(&parse_list(t)?)?;
            let inputs = json!({"chain": chain.to_json(), "lambda": values_json(&l), "t": values_json(&t), "method": Method::from(*method)});
            let mut r = Report::new("sp", T::NAME, inputs);
            sp_checks(&chain, &l, &t, *method, tol, &mut r)?;
            Ok(r)
        }
        Command::Norm { t } => {
            let t: Vec<T> = into_field(&parse_list(t)?)?;
            let mut r = Report::new("norm", T::NAME, json!({"chain": chain.to_json(), "t": values_json(&t)}));
            norm_checks(&chain, &t, tol, &mut r)?;
            Ok(r)
        }
        Command::SolveBae { m, seeds } => {
            let seeds: Vec<Vec<ComplexFloat>> = match seeds {
                Some(s) => s
                    .split(';')
                    .map(|set| Ok(parse_list(set)?.iter().map(ParsedScalar::to_c64).collect()))
                    .collect::<CliResult<_>>()?,
                None => vec![],
            };
            let mut r = Report::new("solve-bae", T::NAME, json!({"chain": chain.to_json(), "m": m, "seeds": seeds.len()}));
            let report = solve_bae(&chain, *m, &seeds, SolveOptions::default())?;
            for (k, s) in report.solutions.iter().enumerate() {
                r.check(format!("certified[{k}]"), s.certified(), Value::Null);
            }
            r.check("found", !report.solutions.is_empty(), Value::Null);
            r.value("root_sets", Value::Array(report.solutions.iter().map(|s| s.to_json()).collect()));
            r.value(
                "failed_seeds",
                Value::Array(report.failures.iter().map(|(s, e)| json!({"seed": values_json(s), "error": e.to_string()})).collect()),
            );
            Ok(r)
        }
        Command::Identities { samples } => {
            let mut r = Report::new("identities", "exact-rational", json!({"samples": samples}));
            identity_checks(run_all(args.seed, *samples)?, &mut r);
            Ok(r)
        }
        Command::All { samples } => {
            let mut r = Report::new("all", T::NAME, inputs);
            factorization_checks(&chain, tol, &mut r)?;
            all_checks(&chain, args.seed, tol, &mut r)?;
            identity_checks(run_all(args.seed, *samples)?, &mut r);
            Ok(r)
        }
        Command::IdentityLab { .. } | Command::Fixtures { .. } => unreachable!("handled before chain construction"),
    }
}

fn factorization_checks<T: Field>(chain: &ChainSpec<T>, tol: f64, r: &mut Report) -> CliResult<()> {
    let product = o_hat_product(chain)?;
    let from_b = o_hat_from_b(chain)?;
    r.check("o_hat_product = o_hat_from_b", product.approx_eq(&from_b, tol), json!(product.max_abs_diff(&from_b)));
    let op = FactorizingOperator::new(chain)?;
    let lhs = op.o_tilde.mul(&op.o_hat)?;
    let diag = fbasis_core::Matrix::diagonal(op.f_hat.clone());
    r.check("o_tilde o_hat = f_hat", lhs.approx_eq(&diag, tol), json!(lhs.max_abs_diff(&diag)));
    for c in verify_factorization(chain, tol)?.checks {
        r.check(format!("exchange({},{})", c.i, c.i + 1), c.pass, json!(c.max_abs_diff));
    }
    r.value("f_hat", values_json(&op.f_hat));
    Ok(())
}

fn phi_check<T: Field>(chain: &ChainSpec<T>, t: &[T], tol: f64, r: &mut Report) -> CliResult<()> {
    let xi = &chain.xi()[..t.len().min(chain.n())];
    let det = phi_m_det(chain.weights(), xi, t)?;
    let direct = phi_m_direct(chain.weights(), xi, t)?;
    r.check("phi_m_det = phi_m_direct", det.approx_eq(&direct, tol), Value::Null);
    r.value("phi", det.to_json());
    Ok(())
}

fn sp_checks<T: Field>(chain: &ChainSpec<T>, l: &[T], t: &[T], method: MethodArg, tol: f64, r: &mut Report) -> CliResult<()> {
    let direct = sp_direct(chain, l, t)?;
    r.value("direct", direct.to_json());
    let want = |m: MethodArg| method == MethodArg::All || method == m;
    let mut routes: Vec<(&str, fbasis_core::Result<T>)> = vec![];
    if want(MethodArg::SubsetSum) {
        routes.push(("subset-sum", sp_subset_sum(chain, l, t)));
    }
    if want(MethodArg::Fbasis) {
        routes.push(("fbasis", sp_fbasis(chain, l, t)));
    }
    match ensure_on_shell(chain, t) {
        Ok(res) => {
            r.value("onshell_residuals", values_json(&res));
            if want(MethodArg::Slavnov) {
                routes.push(("slavnov", sp_slavnov(chain, l, t)));
            }
            if want(MethodArg::Jacobian) {
                routes.push(("jacobian", sp_slavnov_jacobian(chain, l, t, JacobianSign::Explicit)));
            }
        }
        Err(e) if method == MethodArg::Slavnov || method == MethodArg::Jacobian => return Err(e.into()),
        Err(_) => r.value("onshell", json!(false)),
    }
    if routes.is_empty() {
        r.check("direct", true, Value::Null);
    }
    for (name, v) in routes {
        match v {
            Ok(v) => {
                r.check(format!("{name} = direct"), v.approx_eq(&direct, tol), Value::Null);
                r.value(name, v.to_json());
            }
            Err(e) => r.check(format!("{name} = direct"), false, json!({"error": e.to_string()})),
        }
    }
    Ok(())
}

fn norm_checks<T: Field>(chain: &ChainSpec<T>, t: &[T], tol: f64, r: &mut Report) -> CliResult<()> {
    let norm = gaudin_norm(chain, t, tol)?;
    let direct = norm_direct(chain, t)?;
    r.check("gaudin = contraction", norm.value.approx_eq(&direct, tol), json!({"contraction": direct.to_json()}));
    r.check("log form = explicit form", norm.forms_agree, Value::Null);
    r.check("N = L D", norm.factorization_holds, Value::Null);
    r.value("norm", norm.value.to_json());
    r.value("onshell_residuals", values_json(&chain.bae_residual(t)?));
    Ok(())
}

/// Algebra relations, Phi and a random off-shell scalar product for `all`.
fn all_checks<T: Field>(chain: &ChainSpec<T>, seed: u64, tol: f64, r: &mut Report) -> CliResult<()> {
    let mut sampler = Sampler::new(seed, Bounds::default());
    let m = chain.n().min(2);
    // Points away from xi and xi - eta; the exact lattice is only known for rational chains.
    let avoid: Vec<Rational> = chain.xi().iter().filter_map(|x| Rational::from_c64(x.to_c64())).collect();
    let eta = Rational::from_c64(chain.eta().to_c64()).unwrap_or_else(|| Rational::from_ratio(1, 1));
    let points: Vec<T> = sampler.generic(2 + 2 * m, &avoid, &eta, &[1])?.iter().map(from_rational).collect();
    for c in all_relations(chain, &points[0], &points[1], tol)? {
        r.check(c.name, c.pass, json!(c.max_abs_diff));
    }
    let (t, l) = (&points[2..2 + m], &points[2 + m..]);
    r.value("random_t", values_json(t));
    r.value("random_lambda", values_json(l));
    phi_check(chain, t, tol, r)?;
    sp_checks(chain, l, t, MethodArg::All, tol, r)
}

fn identity_checks(reports: Vec<IdentityReport>, r: &mut Report) {
    for id in IDENTITY_IDS {
        let of_id: Vec<&IdentityReport> = reports.iter().filter(|x| x.id.split('.').next() == Some(id)).collect();
        let failures = of_id.iter().filter(|x| !x.pass).count();
        r.check(
            format!("identity {id}"),
            failures == 0,
            json!({"evaluated": of_id.len(), "failed": failures, "first_failure": of_id.iter().find(|x| !x.pass)}),
        );
    }
}

fn write_line(text: &str, out: &Option<PathBuf>) -> CliResult<()> {
    // A closed pipe (e.g. `| head`) is not an error for a report writer.
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
        _ => {}
    }
    if let Some(path) = out {
        let mut f = OpenOptions::new().create(true).append(true).open(path)?;
        writeln!(f, "{text}")?;
    }
    Ok(())
}

fn emit(line: &Value, out: &Option<PathBuf>) -> CliResult<()> {
    write_line(&serde_json::to_string(line).expect("report serializes"), out)
}

fn execute(cli: &Cli, started: Instant) -> CliResult<bool> {
    let args = &cli.chain;
    match &cli.command {
        Command::IdentityLab { action: LabAction::Run { all, id, samples } } => {
            let reports = match (all, id) {
                (true, _) | (false, None) => run_all(args.seed, *samples)?,
                (false, Some(id)) => run_identity(id, args.seed, *samples)?,
            };
            let pass = reports.iter().all(|r| r.pass);
            write_line(&serde_json::to_string(&reports).expect("reports serialize"), &args.out)?;
            return Ok(pass);
        }
        Command::Fixtures { count, n_min, n_max } => {
            let bounds = Bounds::default().with_n(*n_min, *n_max);
            for config in fixture_gen(args.seed, *count, bounds)? {
                emit(&serde_json::to_value(&config).expect("config serializes"), &args.out)?;
            }
            return Ok(true);
        }
        _ => {}
    }
    let spec = chain_spec(args)?;
    let exact = spec.is_exact()? && command_inputs(&cli.command)?.iter().all(ParsedScalar::is_exact);
    let report = if exact { run::<Rational>(&cli.command, args, &spec)? } else { run::<ComplexFloat>(&cli.command, args, &spec)? };
    let pass = report.pass();
    let line = json!({
        "schema": "1",
        "command": report.command,
        "mode": report.mode,
        "inputs": report.inputs,
        "checks": report.checks,
        "values": report.values,
        "pass": pass,
        "seed": args.seed,
        "wall_time_ms": started.elapsed().as_secs_f64() * 1e3,
    });
    emit(&line, &args.out)?;
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    match execute(&cli, started) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let line = json!({"schema": "1", "error": e.to_string(), "pass": false, "seed": cli.chain.seed});
            println!("{line}");
            ExitCode::from(2)
        }
    }
}
