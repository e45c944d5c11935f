//! Command-line front end: four subcommands over the library's checks,
//! one JSON envelope per run on stdout, and exit codes that separate "the
//! claim fails" from "the run could not be completed".
//!
//! Exit codes: 0 — the check ran and nothing was flagged; 1 — the check
//! ran and found a violation or mismatch; 2 — the request itself was
//! unusable (bad flags, bad expressions, bad configuration); 3 — a
//! numerical failure (divergent integral, unevaluable point, output I/O).
//!
//! `HMCX_THREADS` caps the worker pool. Results are independent of the
//! thread count either way; with `--deterministic` the output is
//! byte-identical across runs as well.

mod config;
mod report;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use crate::convexity::{
    self, check_membership, ConvexityError, Direction, Domain, HMParams, MembershipReport,
    Verdict,
};
use crate::expr::{FunctionExpr, Kernel};
use crate::inequalities::{
    self, audit, AuditError, AuditSpec, InequalityId, InequalityReport, Overall, ToleranceSpec,
};
use crate::reductions::{self, verify_reduction, ReductionError, ReductionInput, ReductionReport};

use config::{JobConfig, OutputFormat, SuiteConfig};
use report::{render_csv, CsvRow, Envelope, JobEntry};

const EXIT_OK: i32 = 0;
const EXIT_FLAGGED: i32 = 1;
const EXIT_USAGE: i32 = 2;
const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "hmcx",
    version,
    about = "Numerical auditor for (h,m)-convexity claims",
    disable_help_subcommand = true
)]
struct Cli {
    /// Omit the run timestamp so identical runs emit identical bytes.
    #[arg(long, global = true)]
    deterministic: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Search for a membership violation and print a certificate if found.
    Check(CheckArgs),
    /// Evaluate one inequality chain and judge every adjacent link.
    Audit(AuditArgs),
    /// Verify one specialization case from the catalog.
    Reduce(ReduceArgs),
    /// Run a batch of jobs described by a JSON config file.
    Suite(SuiteArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DirectionArg {
    Convex,
    Concave,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Direction {
        match d {
            DirectionArg::Convex => Direction::Convex,
            DirectionArg::Concave => Direction::Concave,
        }
    }
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Function of x, e.g. "x^2" or "exp(x) - 1".
    #[arg(long)]
    f: String,
    /// Kernel: identity, one, reciprocal, power:S, or custom:EXPR in t.
    #[arg(long, default_value = "identity")]
    h: String,
    #[arg(long, default_value_t = 1.0)]
    m: f64,
    /// Search domain as LO,HI; the class is anchored at 0, so LO must be 0.
    #[arg(long, value_name = "LO,HI")]
    domain: String,
    /// Total evaluation budget for the search.
    #[arg(long, default_value_t = 100_000)]
    budget: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = DirectionArg::Convex)]
    direction: DirectionArg,
}

#[derive(Debug, Args)]
struct AuditArgs {
    /// Chain id: thm4, thm5, thm8, m1, m2, m3, s, q, p, or h1.
    #[arg(long)]
    ineq: String,
    #[arg(long)]
    f: String,
    #[arg(long, default_value = "identity")]
    h: String,
    #[arg(long, default_value_t = 1.0)]
    m: f64,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    b: f64,
    /// Exponent for the s chain (equivalent to --h power:S).
    #[arg(long)]
    s: Option<f64>,
    #[arg(long, default_value_t = 1e-9)]
    tol_abs: f64,
    #[arg(long, default_value_t = 1e-9)]
    tol_rel: f64,
}

#[derive(Debug, Args)]
struct ReduceArgs {
    /// Case id from the catalog, e.g. thm4-to-m1.
    #[arg(long)]
    case: String,
    #[arg(long)]
    f: String,
    #[arg(long, default_value_t = 1.0)]
    m: f64,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    b: f64,
    /// Exponent, for cases that specialize to a power kernel.
    #[arg(long)]
    s: Option<f64>,
    /// Kernel, for cases that take a caller-chosen one.
    #[arg(long)]
    h: Option<String>,
}

#[derive(Debug, Args)]
struct SuiteArgs {
    #[arg(long)]
    config: std::path::PathBuf,
}

/// Parse real argv and run. The process exit code is the return value.
pub fn run() -> i32 {
    run_args(std::env::args_os())
}

pub(crate) fn run_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    if let Err(message) = init_threads() {
        eprintln!("error: {message}");
        return EXIT_USAGE;
    }
    match &cli.command {
        Command::Check(args) => finish(do_check(args), cli.deterministic),
        Command::Audit(args) => finish(do_audit(args), cli.deterministic),
        Command::Reduce(args) => finish(do_reduce(args), cli.deterministic),
        Command::Suite(args) => match do_suite(args, cli.deterministic) {
            Ok((text, output, exit)) => {
                if let Some(path) = output {
                    if let Err(e) = std::fs::write(&path, &text) {
                        eprintln!("error: writing {path}: {e}");
                        return EXIT_NUMERICAL;
                    }
                    eprintln!("wrote {path}");
                } else {
                    print!("{text}");
                }
                exit
            }
            Err(failure) => {
                eprintln!("error: {}", failure.message);
                failure.code
            }
        },
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn numerical(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_NUMERICAL,
            message: message.into(),
        }
    }
}

fn finish(result: Result<(Envelope, i32), Failure>, deterministic: bool) -> i32 {
    match result {
        Ok((mut env, exit)) => {
            if !deterministic {
                env.timestamp = Some(report::now_unix());
            }
            print!("{}", env.to_json());
            exit
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}

fn init_threads() -> Result<(), String> {
    let raw = match std::env::var("HMCX_THREADS") {
        Ok(v) => v,
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(e) => return Err(format!("HMCX_THREADS: {e}")),
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("HMCX_THREADS must be a positive integer, got `{raw}`"))?;
    if n == 0 {
        return Err("HMCX_THREADS must be at least 1".to_string());
    }
    static INIT: std::sync::Once = std::sync::Once::new();
    INIT.call_once(|| {
        // A second initialization in the same process is harmless: results
        // never depend on the pool size.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    });
    Ok(())
}

fn parse_domain(text: &str) -> Result<f64, String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("--domain expects LO,HI, got `{text}`"));
    }
    let lo: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| format!("--domain: `{}` is not a number", parts[0].trim()))?;
    let hi: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| format!("--domain: `{}` is not a number", parts[1].trim()))?;
    if lo != 0.0 {
        return Err(format!(
            "--domain must start at 0 (the compressed arguments x/m anchor the class there), \
             got LO = {lo}"
        ));
    }
    Ok(hi)
}

/// Reconcile `--s` with `--h` for the s chain: either flag alone works,
/// both together must agree.
fn resolve_audit_kernel(
    ineq: InequalityId,
    h_spec: &str,
    s: Option<f64>,
) -> Result<Kernel, Failure> {
    let kernel =
        Kernel::parse_spec(h_spec).map_err(|e| Failure::usage(format!("--h: {e}")))?;
    if ineq != InequalityId::S {
        if s.is_some() {
            return Err(Failure::usage(format!(
                "--s only applies to the s chain, not {ineq}"
            )));
        }
        return Ok(kernel);
    }
    match (s, kernel) {
        (None, k @ Kernel::Power { .. }) => Ok(k),
        (None, _) => Err(Failure::usage(
            "the s chain needs an exponent: pass --s S or --h power:S",
        )),
        (Some(sv), Kernel::Power { s: ks }) => {
            if sv == ks {
                Ok(Kernel::Power { s: ks })
            } else {
                Err(Failure::usage(format!(
                    "--s {sv} contradicts --h power:{ks}"
                )))
            }
        }
        (Some(sv), Kernel::Identity) => {
            Kernel::power(sv).map_err(|e| Failure::usage(format!("--s: {e}")))
        }
        (Some(sv), other) => Err(Failure::usage(format!(
            "--s {sv} conflicts with --h {}; use a power kernel or drop --h",
            other.descriptor()
        ))),
    }
}

fn membership_failure(e: ConvexityError) -> Failure {
    match e {
        ConvexityError::Eval(_) => Failure::numerical(e.to_string()),
        _ => Failure::usage(e.to_string()),
    }
}

fn audit_failure(e: AuditError) -> Failure {
    match e {
        AuditError::InvalidInterval { .. }
        | AuditError::MOutOfRange { .. }
        | AuditError::InvalidTolerance { .. }
        | AuditError::Orientation { .. }
        | AuditError::PowerKernelRequired
        | AuditError::NonPositiveKernelHalf { .. } => Failure::usage(e.to_string()),
        AuditError::RequiredPoint { .. }
        | AuditError::KernelValue { .. }
        | AuditError::Moments(_)
        | AuditError::Integrand { .. }
        | AuditError::IntegralDivergent { .. }
        | AuditError::IntegralNoConvergence { .. } => Failure::numerical(e.to_string()),
    }
}

fn reduction_failure(e: ReductionError) -> Failure {
    match e {
        ReductionError::Audit(inner) => audit_failure(inner),
        ReductionError::UnknownCase { .. } => {
            let ids: Vec<&str> = reductions::catalog().iter().map(|c| c.id).collect();
            Failure::usage(format!("{e}; known cases: {}", ids.join(", ")))
        }
        other => Failure::usage(other.to_string()),
    }
}

fn check_envelope(
    f: &FunctionExpr,
    params: &HMParams,
    domain: &Domain,
    budget: u64,
    seed: u64,
    report: &MembershipReport,
) -> Envelope {
    let mut env = Envelope::new(
        "check",
        json!({
            "f": f.source_text(),
            "h": params.h.descriptor(),
            "m": params.m,
            "domain": [0.0, domain.b_cap()],
            "budget": budget,
            "direction": params.direction,
        }),
        json!({ "pass_margin": convexity::PASS_MARGIN }),
    );
    env.seed = Some(seed);
    env.verdict = Some(report.verdict);
    env.certificate = report.worst;
    env.max_defect_seen = Some(report.max_defect_seen);
    env.samples_used = Some(report.samples_used);
    env
}

fn audit_envelope(ineq: InequalityId, tol: ToleranceSpec, report: InequalityReport) -> Envelope {
    let mut env = Envelope::new(
        "audit",
        json!({
            "ineq": ineq,
            "f": report.inputs.function,
            "h": report.inputs.kernel,
            "m": report.inputs.m,
            "a": report.inputs.a,
            "b": report.inputs.b,
        }),
        json!({ "abs": tol.abs, "rel": tol.rel }),
    );
    env.quadrature_errors = Some(report.terms.iter().map(|t| t.quad_error).collect());
    env.terms = Some(report.terms);
    env.pair_verdicts = Some(report.pair_verdicts);
    env.min_branch = report.min_branch;
    env.overall = Some(report.overall);
    env
}

fn reduce_envelope(input: &ReductionInput, report: ReductionReport) -> Envelope {
    let mut inputs = json!({
        "case": report.case,
        "f": input.f.source_text(),
        "m": input.m,
        "a": input.a,
        "b": input.b,
    });
    if let Some(s) = input.s {
        inputs["s"] = json!(s);
    }
    if let Some(h) = &input.h {
        inputs["h"] = json!(h.descriptor());
    }
    let mut env = Envelope::new(
        "reduce",
        inputs,
        json!({ "pair_slack": reductions::PAIR_SLACK }),
    );
    env.quadrature_errors = Some(
        report
            .source
            .terms
            .iter()
            .chain(&report.target.terms)
            .map(|t| t.quad_error)
            .collect(),
    );
    env.source = Some(report.source);
    env.target = Some(report.target);
    env.pairs = Some(report.pairs);
    env.matches = Some(report.matches);
    env
}

fn do_check(args: &CheckArgs) -> Result<(Envelope, i32), Failure> {
    let f = FunctionExpr::parse(&args.f, "x")
        .map_err(|e| Failure::usage(format!("--f: {e}")))?;
    let h = Kernel::parse_spec(&args.h).map_err(|e| Failure::usage(format!("--h: {e}")))?;
    let b_cap = parse_domain(&args.domain).map_err(Failure::usage)?;
    let domain =
        Domain::new(b_cap).map_err(|e| Failure::usage(format!("--domain: {e}")))?;
    let params = HMParams::new(h, args.m, args.direction.into())
        .map_err(|e| Failure::usage(e.to_string()))?;
    let report = check_membership(&f, &params, &domain, args.budget, args.seed)
        .map_err(membership_failure)?;
    let exit = if report.verdict == Verdict::Violated {
        EXIT_FLAGGED
    } else {
        EXIT_OK
    };
    Ok((
        check_envelope(&f, &params, &domain, args.budget, args.seed, &report),
        exit,
    ))
}

fn do_audit(args: &AuditArgs) -> Result<(Envelope, i32), Failure> {
    let ineq: InequalityId = args
        .ineq
        .parse()
        .map_err(|e: String| Failure::usage(format!("--ineq: {e}")))?;
    let f = FunctionExpr::parse(&args.f, "x")
        .map_err(|e| Failure::usage(format!("--f: {e}")))?;
    let kernel = resolve_audit_kernel(ineq, &args.h, args.s)?;
    let tol = ToleranceSpec {
        abs: args.tol_abs,
        rel: args.tol_rel,
    };
    let spec = AuditSpec {
        f,
        params: HMParams {
            h: kernel,
            m: args.m,
            direction: Direction::Convex,
        },
        a: args.a,
        b: args.b,
        tol,
    };
    let report = audit(&spec, ineq).map_err(audit_failure)?;
    let exit = if report.overall == Overall::Violated {
        EXIT_FLAGGED
    } else {
        EXIT_OK
    };
    Ok((audit_envelope(ineq, tol, report), exit))
}

fn do_reduce(args: &ReduceArgs) -> Result<(Envelope, i32), Failure> {
    let f = FunctionExpr::parse(&args.f, "x")
        .map_err(|e| Failure::usage(format!("--f: {e}")))?;
    let h = match &args.h {
        Some(spec) => {
            Some(Kernel::parse_spec(spec).map_err(|e| Failure::usage(format!("--h: {e}")))?)
        }
        None => None,
    };
    let input = ReductionInput {
        f,
        m: args.m,
        a: args.a,
        b: args.b,
        s: args.s,
        h,
    };
    let report = verify_reduction(&args.case, &input).map_err(reduction_failure)?;
    let exit = if report.matches { EXIT_OK } else { EXIT_FLAGGED };
    Ok((reduce_envelope(&input, report), exit))
}

enum TypedJob {
    Check {
        id: String,
        f: FunctionExpr,
        params: HMParams,
        domain: Domain,
        budget: u64,
        seed: u64,
    },
    Audit {
        id: String,
        ineq: InequalityId,
        spec: AuditSpec,
    },
    Reduce {
        id: String,
        case: String,
        input: ReductionInput,
    },
}

#[derive(PartialEq, Eq, Clone, Copy)]
enum JobStatus {
    Clean,
    Flagged,
    Errored,
}

struct JobResult {
    entry: JobEntry,
    row: CsvRow,
    status: JobStatus,
}

fn typecheck_job(index: usize, job: &JobConfig, suite_seed: u64) -> Result<TypedJob, Failure> {
    let id = job.job_id(index);
    let at = |message: String| Failure::usage(format!("job {index} ({id}): {message}"));
    match job {
        JobConfig::Check {
            f,
            h,
            m,
            domain,
            budget,
            seed,
            direction,
            ..
        } => {
            let f = FunctionExpr::parse(f, "x").map_err(|e| at(format!("f: {e}")))?;
            let kernel = Kernel::parse_spec(h).map_err(|e| at(format!("h: {e}")))?;
            if domain[0] != 0.0 {
                return Err(at(format!(
                    "domain must start at 0, got [{}, {}]",
                    domain[0], domain[1]
                )));
            }
            let dom = Domain::new(domain[1]).map_err(|e| at(format!("domain: {e}")))?;
            let params =
                HMParams::new(kernel, *m, *direction).map_err(|e| at(e.to_string()))?;
            if *budget < convexity::MIN_BUDGET {
                return Err(at(format!(
                    "budget {budget} is below the minimum {}",
                    convexity::MIN_BUDGET
                )));
            }
            let seed = seed.unwrap_or_else(|| derive_seed(suite_seed, index as u64));
            Ok(TypedJob::Check {
                id,
                f,
                params,
                domain: dom,
                budget: *budget,
                seed,
            })
        }
        JobConfig::Audit {
            ineq,
            f,
            h,
            m,
            a,
            b,
            s,
            tol_abs,
            tol_rel,
            ..
        } => {
            let ineq: InequalityId =
                ineq.parse().map_err(|e: String| at(format!("ineq: {e}")))?;
            let f = FunctionExpr::parse(f, "x").map_err(|e| at(format!("f: {e}")))?;
            let kernel = resolve_audit_kernel(ineq, h, *s)
                .map_err(|failure| at(failure.message))?;
            let spec = AuditSpec {
                f,
                params: HMParams {
                    h: kernel,
                    m: *m,
                    direction: Direction::Convex,
                },
                a: *a,
                b: *b,
                tol: ToleranceSpec {
                    abs: *tol_abs,
                    rel: *tol_rel,
                },
            };
            inequalities::prevalidate(&spec, ineq).map_err(|e| at(e.to_string()))?;
            Ok(TypedJob::Audit { id, ineq, spec })
        }
        JobConfig::Reduce {
            case,
            f,
            m,
            a,
            b,
            s,
            h,
            ..
        } => {
            let f = FunctionExpr::parse(f, "x").map_err(|e| at(format!("f: {e}")))?;
            let h = match h {
                Some(spec) => {
                    Some(Kernel::parse_spec(spec).map_err(|e| at(format!("h: {e}")))?)
                }
                None => None,
            };
            let input = ReductionInput {
                f,
                m: *m,
                a: *a,
                b: *b,
                s: *s,
                h,
            };
            reductions::case_checks(case, &input).map_err(|e| at(e.to_string()))?;
            Ok(TypedJob::Reduce {
                id,
                case: case.clone(),
                input,
            })
        }
    }
}

fn job_error(
    id: &str,
    kind: &'static str,
    inequality_id: String,
    seed: Option<u64>,
    error: String,
) -> JobResult {
    JobResult {
        entry: JobEntry::Err {
            job_id: id.to_string(),
            kind,
            error: error.clone(),
        },
        row: CsvRow {
            job_id: id.to_string(),
            kind,
            inequality_id,
            overall: "error".to_string(),
            worst_slack: None,
            seed,
        },
        status: JobStatus::Errored,
        }
}

fn run_job(job: &TypedJob) -> JobResult {
    match job {
        TypedJob::Check {
            id,
            f,
            params,
            domain,
            budget,
            seed,
        } => match check_membership(f, params, domain, *budget, *seed) {
            Ok(rep) => {
                let flagged = rep.verdict == Verdict::Violated;
                let overall = match rep.verdict {
                    Verdict::Violated => "violated",
                    Verdict::NoViolationFound => "no-violation-found",
                };
                let mut env = check_envelope(f, params, domain, *budget, *seed, &rep);
                env.job_id = Some(id.clone());
                JobResult {
                    entry: JobEntry::Ok(Box::new(env)),
                    row: CsvRow {
                        job_id: id.clone(),
                        kind: "check",
                        inequality_id: String::new(),
                        overall: overall.to_string(),
                        worst_slack: Some(rep.max_defect_seen),
                        seed: Some(*seed),
                    },
                    status: if flagged {
                        JobStatus::Flagged
                    } else {
                        JobStatus::Clean
                    },
                }
            }
            Err(e) => job_error(id, "check", String::new(), Some(*seed), e.to_string()),
        },
        TypedJob::Audit { id, ineq, spec } => match audit(spec, *ineq) {
            Ok(rep) => {
                let flagged = rep.overall == Overall::Violated;
                let overall = match rep.overall {
                    Overall::Holds => "holds",
                    Overall::Violated => "violated",
                };
                let worst = rep
                    .pair_verdicts
                    .iter()
                    .map(|p| p.slack)
                    .fold(f64::INFINITY, f64::min);
                let mut env = audit_envelope(*ineq, spec.tol, rep);
                env.job_id = Some(id.clone());
                JobResult {
                    entry: JobEntry::Ok(Box::new(env)),
                    row: CsvRow {
                        job_id: id.clone(),
                        kind: "audit",
                        inequality_id: ineq.name().to_string(),
                        overall: overall.to_string(),
                        worst_slack: Some(worst),
                        seed: None,
                    },
                    status: if flagged {
                        JobStatus::Flagged
                    } else {
                        JobStatus::Clean
                    },
                }
            }
            Err(e) => job_error(id, "audit", ineq.name().to_string(), None, e.to_string()),
        },
        TypedJob::Reduce { id, case, input } => match verify_reduction(case, input) {
            Ok(rep) => {
                let flagged = !rep.matches;
                let overall = if rep.matches { "matches" } else { "mismatch" };
                let worst = rep
                    .pairs
                    .iter()
                    .map(|p| p.discrepancy.abs())
                    .fold(0.0_f64, f64::max);
                let mut env = reduce_envelope(input, rep);
                env.job_id = Some(id.clone());
                JobResult {
                    entry: JobEntry::Ok(Box::new(env)),
                    row: CsvRow {
                        job_id: id.clone(),
                        kind: "reduce",
                        inequality_id: case.clone(),
                        overall: overall.to_string(),
                        worst_slack: Some(worst),
                        seed: None,
                    },
                    status: if flagged {
                        JobStatus::Flagged
                    } else {
                        JobStatus::Clean
                    },
                }
            }
            Err(e) => job_error(id, "reduce", case.clone(), None, e.to_string()),
        },
    }
}

fn do_suite(
    args: &SuiteArgs,
    deterministic: bool,
) -> Result<(String, Option<String>, i32), Failure> {
    let raw = std::fs::read_to_string(&args.config).map_err(|e| {
        Failure::usage(format!("--config {}: {e}", args.config.display()))
    })?;
    let config: SuiteConfig = serde_json::from_str(&raw).map_err(|e| {
        Failure::usage(format!("--config {}: {e}", args.config.display()))
    })?;

    // Reject every malformed job before running any of them.
    let typed: Vec<TypedJob> = config
        .jobs
        .iter()
        .enumerate()
        .map(|(i, job)| typecheck_job(i, job, config.seed))
        .collect::<Result<_, _>>()?;

    let results: Vec<JobResult> = typed.par_iter().map(run_job).collect();

    let exit = if results.iter().any(|r| r.status == JobStatus::Errored) {
        EXIT_NUMERICAL
    } else if results.iter().any(|r| r.status == JobStatus::Flagged) {
        EXIT_FLAGGED
    } else {
        EXIT_OK
    };

    let text = match config.format {
        OutputFormat::Csv => {
            let rows: Vec<CsvRow> = results.into_iter().map(|r| r.row).collect();
            render_csv(&rows)
        }
        OutputFormat::Json => {
            let format_name = "json";
            let mut env = Envelope::new(
                "suite",
                json!({
                    "config": args.config.display().to_string(),
                    "jobs": config.jobs.len(),
                    "format": format_name,
                }),
                json!({}),
            );
            env.seed = Some(config.seed);
            if !deterministic {
                env.timestamp = Some(report::now_unix());
            }
            env.jobs = Some(results.into_iter().map(|r| r.entry).collect());
            env.to_json()
        }
    };
    Ok((text, config.output, exit))
}

/// splitmix64 over a seed-offset counter: distinct, stable per-job seeds
/// for jobs that don't pin their own.
fn derive_seed(suite_seed: u64, index: u64) -> u64 {
    let mut z = suite_seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_parsing() {
        assert_eq!(parse_domain("0,2"), Ok(2.0));
        assert_eq!(parse_domain(" 0 , 1.5 "), Ok(1.5));
        assert!(parse_domain("1,2").unwrap_err().contains("must start at 0"));
        assert!(parse_domain("0").unwrap_err().contains("LO,HI"));
        assert!(parse_domain("0,two").unwrap_err().contains("not a number"));
        assert!(parse_domain("0,1,2").unwrap_err().contains("LO,HI"));
    }

    #[test]
    fn s_and_kernel_reconciliation() {
        let s_id = InequalityId::S;
        assert!(matches!(
            resolve_audit_kernel(s_id, "power:0.5", None),
            Ok(Kernel::Power { s }) if s == 0.5
        ));
        assert!(matches!(
            resolve_audit_kernel(s_id, "identity", Some(0.5)),
            Ok(Kernel::Power { s }) if s == 0.5
        ));
        assert!(matches!(
            resolve_audit_kernel(s_id, "power:0.5", Some(0.5)),
            Ok(Kernel::Power { .. })
        ));
        assert!(resolve_audit_kernel(s_id, "power:0.5", Some(0.7)).is_err());
        assert!(resolve_audit_kernel(s_id, "identity", None).is_err());
        assert!(resolve_audit_kernel(s_id, "one", Some(0.5)).is_err());
        // Other chains refuse --s outright.
        assert!(resolve_audit_kernel(InequalityId::Thm4, "identity", Some(0.5)).is_err());
        assert!(resolve_audit_kernel(InequalityId::Thm4, "identity", None).is_ok());
    }

    #[test]
    fn derived_seeds_are_stable_and_distinct() {
        let a = derive_seed(0, 0);
        let b = derive_seed(0, 1);
        let c = derive_seed(1, 0);
        assert_eq!(a, derive_seed(0, 0));
        assert_ne!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn usage_errors_exit_2() {
        // Missing required flags.
        assert_eq!(run_args(["hmcx", "check"]), EXIT_USAGE);
        // Unknown subcommand.
        assert_eq!(run_args(["hmcx", "frobnicate"]), EXIT_USAGE);
        // Help is not an error.
        assert_eq!(run_args(["hmcx", "--help"]), EXIT_OK);
    }

    #[test]
    fn error_classification() {
        assert_eq!(
            membership_failure(ConvexityError::MOutOfRange { m: 2.0 }).code,
            EXIT_USAGE
        );
        assert_eq!(
            audit_failure(AuditError::Orientation { a: 1.0, mb: 1.0 }).code,
            EXIT_USAGE
        );
        assert_eq!(
            audit_failure(AuditError::IntegralDivergent {
                label: "∫".to_string()
            })
            .code,
            EXIT_NUMERICAL
        );
        let unknown = reduction_failure(ReductionError::UnknownCase {
            case: "nope".to_string(),
        });
        assert_eq!(unknown.code, EXIT_USAGE);
        assert!(unknown.message.contains("thm4-to-m1"));
    }
}
