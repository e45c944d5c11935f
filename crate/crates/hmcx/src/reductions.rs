//! Specialization checks: substituting a concrete kernel and/or `m = 1`
//! into one of the general chains must reproduce a classical chain term by
//! term. Each catalog case pins down the substitution, the target chain,
//! and which source terms map onto which target terms at what scale; the
//! verifier evaluates both sides numerically and reports the per-pair
//! discrepancy against a tolerance built from the propagated quadrature
//! errors.
//!
//! A case that fails here means the claimed specialization does not hold as
//! stated — the report is the evidence, not an assertion to be silenced.

use serde::Serialize;

use crate::convexity::{Direction, HMParams};
use crate::expr::{FunctionExpr, Kernel, KernelError};
use crate::inequalities::{
    self, audit, AuditError, AuditSpec, InequalityId, Term, ToleranceSpec,
};
use crate::quadrature;

/// Extra absolute slack allowed on every pair beyond the propagated
/// quadrature error of both sides.
pub const PAIR_SLACK: f64 = 1e-9;

/// Which kernel the source chain is run with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SourceKernel {
    Identity,
    Flat,
    PowerS,
    /// Caller supplies the kernel; the target chain reuses it.
    Provided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MRule {
    Free,
    One,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TargetChain {
    Audit(InequalityId),
    FlatThm4,
    FlatThm5,
    FlatThm8,
    RescaledPower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScaleRule {
    One,
    Two,
    /// `2^(s-1)` — undoes the power kernel's value at `1/2`.
    TwoPowSMinusOne,
    /// `m·b − a` — converts split-interval means back to plain integrals.
    MbMinusA,
}

/// One entry of the specialization catalog. Non-runnable entries document
/// substitutions that produce nothing independently checkable.
#[derive(Debug, Clone, Copy)]
pub struct CatalogEntry {
    pub id: &'static str,
    /// The general chain being specialized.
    pub source: InequalityId,
    pub runnable: bool,
    /// Why a non-runnable entry cannot be checked.
    pub skip_reason: Option<&'static str>,
    /// Case needs an `s` exponent from the caller.
    pub needs_s: bool,
    /// Case needs a caller-provided kernel.
    pub needs_kernel: bool,
    pub description: &'static str,
    source_kernel: SourceKernel,
    m_rule: MRule,
    target: TargetChain,
    pairs: &'static [(usize, usize, ScaleRule)],
}

const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        id: "thm4-to-m1",
        source: InequalityId::Thm4,
        runnable: true,
        skip_reason: None,
        needs_s: false,
        needs_kernel: false,
        description: "identity kernel turns the moment-weighted bound into the m1 chain",
        source_kernel: SourceKernel::Identity,
        m_rule: MRule::Free,
        target: TargetChain::Audit(InequalityId::M1),
        pairs: &[(0, 0, ScaleRule::One), (1, 1, ScaleRule::One)],
    },
    CatalogEntry {
        id: "thm4-to-flat-bound",
        source: InequalityId::Thm4,
        runnable: true,
        skip_reason: None,
        needs_s: false,
        needs_kernel: false,
        description: "flat kernel makes both moments 1, leaving the undamped endpoint bound",
        source_kernel: SourceKernel::Flat,
        m_rule: MRule::Free,
        target: TargetChain::FlatThm4,
        pairs: &[(0, 0, ScaleRule::One), (1, 1, ScaleRule::One)],
    },
    CatalogEntry {
        id: "thm4-to-h1-rhs",
        source: InequalityId::Thm4,
        runnable: true,
        skip_reason: None,
        needs_s: false,
        needs_kernel: true,
        description: "at m = 1 the minimum collapses and the bound is the h1 upper term \
                      whenever the forward and reflected moments agree",
        source_kernel: SourceKernel::Provided,
        m_rule: MRule::One,
        target: TargetChain::Audit(InequalityId::H1),
        pairs: &[(0, 1, ScaleRule::One), (1, 2, ScaleRule::One)],
    },
    CatalogEntry {
        id: "thm4-to-hadamard-rhs",
        source: InequalityId::Thm4,
        runnable: true,
        skip_reason: None,
        needs_s: false,
        needs_kernel: false,
        description: "identity kernel at m = 1 recovers the upper half of the classical chain",
        source_kernel: SourceKernel::Identity,
        m_rule: MRule::One,
        target: TargetChain::Audit(InequalityId::H1),
        pairs: &[(0, 1, ScaleRule::One), (1, 2, ScaleRule::One)],
    },
    CatalogEntry {
        id: "thm4-to-p-rhs",
        source: InequalityId::Thm4,
        runnable: true,
        skip_reason: None,
        needs_s: false,
        needs_kernel: false,
        description: "flat kernel at m = 1, doubled, gives the P-function upper terms",
        source_kernel: SourceKernel::Flat,
        m_rule: MRule::One,
        target: TargetChain::Audit(InequalityId::P),
        pairs: &[(0, 1, ScaleRule::Two), (1, 2, ScaleRule::Two)],
    },
    CatalogEntry {
        id: "thm4-to-s-rhs",
        source: InequalityId::Thm4,
        runnable: true,
        skip_reason: None,
        needs_s: true,
        needs_kernel: false,
        description: "power kernel at m = 1 gives the s-chain's mean and endpoint terms",
        source_kernel: SourceKernel::PowerS,
        m_rule: MRule::One,
        target: TargetChain::Audit(InequalityId::S),
        pairs: &[(0, 1, ScaleRule::One), (1, 2, ScaleRule::One)],
    },
    CatalogEntry {
        id: "thm5-to-m2",
        source: InequalityId::Thm5,
        runnable: true,
        skip_reason: None,
        needs_s: false,
        needs_kernel: false,
        description: "identity kernel against the m2 chain; the endpoint terms genuinely \
                      disagree for m < 1 and the report shows by how much",
        source_kernel: SourceKernel::Identity,
        m_rule: MRule::Free,
        target: TargetChain::Audit(InequalityId::M2),
        pairs: &[
            (0, 0, ScaleRule::One),
            (1, 1, ScaleRule::One),
            (2, 2, ScaleRule::One),
        ],
    },
    CatalogEntry {
        id: "thm5-to-hadamard",
        source: InequalityId::Thm5,
        runnable: true,
        skip_reason: None,
        needs_s: false,
        needs_kernel: false,
        description: "identity kernel at m = 1 reproduces the classical three-term chain",
        source_kernel: SourceKernel::Identity,
        m_rule: MRule::One,
        target: TargetChain::Audit(InequalityId::H1),
        pairs: &[
            (0, 0, ScaleRule::One),
            (1, 1, ScaleRule::One),
            (2, 2, ScaleRule::One),
        ],
    },
    CatalogEntry {
        id: "thm5-to-flat-bound",
        source: InequalityId::Thm5,
        runnable: true,
        skip_reason: None,
        needs_s: false,
        needs_kernel: false,
        description: "flat kernel removes the h(1/2) damping from every term",
        source_kernel: SourceKernel::Flat,
        m_rule: MRule::Free,
        target: TargetChain::FlatThm5,
        pairs: &[
            (0, 0, ScaleRule::One),
            (1, 1, ScaleRule::One),
            (2, 2, ScaleRule::One),
        ],
    },
    CatalogEntry {
        id: "thm5-to-scaled-s-chain",
        source: InequalityId::Thm5,
        runnable: true,
        skip_reason: None,
        needs_s: true,
        needs_kernel: false,
        description: "power kernel at m = 1 rescales by 2^(s-1) onto the halved-endpoint chain",
        source_kernel: SourceKernel::PowerS,
        m_rule: MRule::One,
        target: TargetChain::RescaledPower,
        pairs: &[
            (0, 0, ScaleRule::TwoPowSMinusOne),
            (1, 1, ScaleRule::TwoPowSMinusOne),
            (2, 2, ScaleRule::TwoPowSMinusOne),
        ],
    },
    CatalogEntry {
        id: "thm8-to-m3",
        source: InequalityId::Thm8,
        runnable: true,
        skip_reason: None,
        needs_s: false,
        needs_kernel: false,
        description: "identity kernel; multiplying by m·b − a converts the averaged means \
                      into the m3 weighted integrals",
        source_kernel: SourceKernel::Identity,
        m_rule: MRule::Free,
        target: TargetChain::Audit(InequalityId::M3),
        pairs: &[(0, 0, ScaleRule::MbMinusA), (1, 1, ScaleRule::MbMinusA)],
    },
    CatalogEntry {
        id: "thm8-to-hadamard-rhs",
        source: InequalityId::Thm8,
        runnable: true,
        skip_reason: None,
        needs_s: false,
        needs_kernel: false,
        description: "identity kernel at m = 1: both split means collapse to the plain mean",
        source_kernel: SourceKernel::Identity,
        m_rule: MRule::One,
        target: TargetChain::Audit(InequalityId::H1),
        pairs: &[(0, 1, ScaleRule::One), (1, 2, ScaleRule::One)],
    },
    CatalogEntry {
        id: "thm8-to-p-rhs",
        source: InequalityId::Thm8,
        runnable: true,
        skip_reason: None,
        needs_s: false,
        needs_kernel: false,
        description: "flat kernel at m = 1, doubled, gives the P-function upper terms",
        source_kernel: SourceKernel::Flat,
        m_rule: MRule::One,
        target: TargetChain::Audit(InequalityId::P),
        pairs: &[(0, 1, ScaleRule::Two), (1, 2, ScaleRule::Two)],
    },
    CatalogEntry {
        id: "thm8-to-s-rhs",
        source: InequalityId::Thm8,
        runnable: true,
        skip_reason: None,
        needs_s: true,
        needs_kernel: false,
        description: "power kernel at m = 1: moment sum 2/(s+1) gives the s-chain bound",
        source_kernel: SourceKernel::PowerS,
        m_rule: MRule::One,
        target: TargetChain::Audit(InequalityId::S),
        pairs: &[(0, 1, ScaleRule::One), (1, 2, ScaleRule::One)],
    },
    CatalogEntry {
        id: "thm8-to-flat-bound",
        source: InequalityId::Thm8,
        runnable: true,
        skip_reason: None,
        needs_s: false,
        needs_kernel: false,
        description: "flat kernel makes the moment sum 2, leaving the plain endpoint sum",
        source_kernel: SourceKernel::Flat,
        m_rule: MRule::Free,
        target: TargetChain::FlatThm8,
        pairs: &[(0, 0, ScaleRule::One), (1, 1, ScaleRule::One)],
    },
    CatalogEntry {
        id: "m-one-verbatim",
        source: InequalityId::Thm4,
        runnable: false,
        skip_reason: Some(
            "substituting m = 1 while keeping the kernel free leaves the chain formula \
             unchanged; there is no independent target to compare against",
        ),
        needs_s: false,
        needs_kernel: false,
        description: "m = 1 alone reproduces the source chain verbatim",
        source_kernel: SourceKernel::Provided,
        m_rule: MRule::One,
        target: TargetChain::Audit(InequalityId::Thm4),
        pairs: &[],
    },
];

/// The full specialization catalog, in a stable order.
pub fn catalog() -> &'static [CatalogEntry] {
    CATALOG
}

/// Inputs for one reduction run. `s` is only consumed by cases marked
/// `needs_s`, `h` only by cases marked `needs_kernel`; supplying either to
/// a case that does not take it is rejected rather than ignored.
#[derive(Debug, Clone)]
pub struct ReductionInput {
    pub f: FunctionExpr,
    pub m: f64,
    pub a: f64,
    pub b: f64,
    pub s: Option<f64>,
    pub h: Option<Kernel>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainSummary {
    pub chain: String,
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairCheck {
    pub source_term: usize,
    pub target_term: usize,
    pub scale: f64,
    pub scaled_source: f64,
    pub target_value: f64,
    /// `scale·source − target`.
    pub discrepancy: f64,
    pub tolerance: f64,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionReport {
    pub case: String,
    pub source: ChainSummary,
    pub target: ChainSummary,
    pub pairs: Vec<PairCheck>,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReductionError {
    #[error("unknown reduction case `{case}`")]
    UnknownCase { case: String },
    #[error("case `{case}` is not runnable: {reason}")]
    NotRunnable { case: String, reason: &'static str },
    #[error("case `{case}` fixes m = 1, got m = {m}")]
    FixedM { case: String, m: f64 },
    #[error("case `{case}` needs an exponent s")]
    MissingS { case: String },
    #[error("case `{case}` does not take an exponent s")]
    StrayS { case: String },
    #[error("case `{case}` needs a kernel")]
    MissingKernel { case: String },
    #[error("case `{case}` fixes its own kernel and does not take one")]
    StrayKernel { case: String },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Audit(#[from] AuditError),
}

/// Everything about a case and its inputs that can be rejected without
/// evaluating anything: existence, runnability, the m rule, and the s /
/// kernel argument discipline, plus the interval, `m`, and orientation
/// checks the chain evaluation would otherwise only hit mid-run. Returns
/// the catalog entry so callers don't look it up twice.
pub(crate) fn case_checks(
    case: &str,
    input: &ReductionInput,
) -> Result<&'static CatalogEntry, ReductionError> {
    let entry = CATALOG
        .iter()
        .find(|e| e.id == case)
        .ok_or_else(|| ReductionError::UnknownCase {
            case: case.to_string(),
        })?;
    if !entry.runnable {
        return Err(ReductionError::NotRunnable {
            case: entry.id.to_string(),
            reason: entry.skip_reason.unwrap_or("no reason recorded"),
        });
    }
    if entry.m_rule == MRule::One && input.m != 1.0 {
        return Err(ReductionError::FixedM {
            case: entry.id.to_string(),
            m: input.m,
        });
    }
    if entry.needs_s && input.s.is_none() {
        return Err(ReductionError::MissingS {
            case: entry.id.to_string(),
        });
    }
    if !entry.needs_s && input.s.is_some() {
        return Err(ReductionError::StrayS {
            case: entry.id.to_string(),
        });
    }
    if entry.needs_kernel && input.h.is_none() {
        return Err(ReductionError::MissingKernel {
            case: entry.id.to_string(),
        });
    }
    if !entry.needs_kernel && input.h.is_some() {
        return Err(ReductionError::StrayKernel {
            case: entry.id.to_string(),
        });
    }
    if let Some(s) = input.s {
        // Validates the exponent range without keeping the kernel.
        Kernel::power(s)?;
    }
    let (a, b, m) = (input.a, input.b, input.m);
    if !(a.is_finite() && b.is_finite() && a >= 0.0 && a < b) {
        return Err(AuditError::InvalidInterval { a, b }.into());
    }
    if !(m.is_finite() && m > 0.0 && m <= 1.0) {
        return Err(AuditError::MOutOfRange { m }.into());
    }
    if entry.source == InequalityId::Thm8 && a >= m * b {
        return Err(AuditError::Orientation { a, mb: m * b }.into());
    }
    Ok(entry)
}

/// Run one catalog case: evaluate the specialized source chain and the
/// target chain, compare the mapped term pairs, and report.
pub fn verify_reduction(
    case: &str,
    input: &ReductionInput,
) -> Result<ReductionReport, ReductionError> {
    let entry = case_checks(case, input)?;

    let source_kernel = match entry.source_kernel {
        SourceKernel::Identity => Kernel::Identity,
        SourceKernel::Flat => Kernel::One,
        SourceKernel::PowerS => Kernel::power(input.s.unwrap())?,
        SourceKernel::Provided => input.h.clone().unwrap(),
    };

    let source_report = run_chain(&input.f, source_kernel.clone(), input.m, input.a, input.b,
        entry.source)?;
    let source = ChainSummary {
        chain: format!(
            "{} [h = {}, m = {}]",
            entry.source,
            source_kernel.descriptor(),
            input.m
        ),
        terms: source_report,
    };

    let qtol = ToleranceSpec::default().abs.min(quadrature::DEFAULT_TOL);
    let target = match entry.target {
        TargetChain::Audit(id) => {
            let kernel = match entry.source_kernel {
                SourceKernel::PowerS => Kernel::power(input.s.unwrap())?,
                SourceKernel::Provided => source_kernel.clone(),
                _ => Kernel::Identity,
            };
            let terms = run_chain(&input.f, kernel.clone(), input.m, input.a, input.b, id)?;
            ChainSummary {
                chain: format!("{} [h = {}, m = {}]", id, kernel.descriptor(), input.m),
                terms,
            }
        }
        TargetChain::FlatThm4 => ChainSummary {
            chain: "flat-kernel endpoint bound".to_string(),
            terms: flat_thm4_chain(&input.f, input.m, input.a, input.b, qtol)?,
        },
        TargetChain::FlatThm5 => ChainSummary {
            chain: "flat-kernel midpoint chain".to_string(),
            terms: flat_thm5_chain(&input.f, input.m, input.a, input.b, qtol)?,
        },
        TargetChain::FlatThm8 => ChainSummary {
            chain: "flat-kernel split-mean bound".to_string(),
            terms: flat_thm8_chain(&input.f, input.m, input.a, input.b, qtol)?,
        },
        TargetChain::RescaledPower => ChainSummary {
            chain: "halved-endpoint power chain".to_string(),
            terms: rescaled_power_chain(&input.f, input.s.unwrap(), input.a, input.b, qtol)?,
        },
    };

    let pairs: Vec<PairCheck> = entry
        .pairs
        .iter()
        .map(|&(si, ti, rule)| {
            let scale = match rule {
                ScaleRule::One => 1.0,
                ScaleRule::Two => 2.0,
                ScaleRule::TwoPowSMinusOne => 2f64.powf(input.s.unwrap() - 1.0),
                ScaleRule::MbMinusA => input.m * input.b - input.a,
            };
            let src = &source.terms[si];
            let tgt = &target.terms[ti];
            let scaled = scale * src.value;
            let discrepancy = scaled - tgt.value;
            let tolerance = scale.abs() * src.quad_error + tgt.quad_error + PAIR_SLACK;
            PairCheck {
                source_term: si,
                target_term: ti,
                scale,
                scaled_source: scaled,
                target_value: tgt.value,
                discrepancy,
                tolerance,
                matches: discrepancy.abs() <= tolerance,
            }
        })
        .collect();
    let matches = pairs.iter().all(|p| p.matches);

    Ok(ReductionReport {
        case: entry.id.to_string(),
        source,
        target,
        pairs,
        matches,
    })
}

fn run_chain(
    f: &FunctionExpr,
    h: Kernel,
    m: f64,
    a: f64,
    b: f64,
    id: InequalityId,
) -> Result<Vec<Term>, ReductionError> {
    let spec = AuditSpec {
        f: f.clone(),
        params: HMParams {
            h,
            m,
            direction: Direction::Convex,
        },
        a,
        b,
        tol: ToleranceSpec::default(),
    };
    Ok(audit(&spec, id)?.terms)
}

// [mean, min(f(a) + m·f(b/m), f(b) + m·f(a/m))] — the bound with both
// kernel moments equal to 1.
fn flat_thm4_chain(
    f: &FunctionExpr,
    m: f64,
    a: f64,
    b: f64,
    qtol: f64,
) -> Result<Vec<Term>, AuditError> {
    let fa = inequalities::point_value(f, "f(a)", a)?;
    let fb = inequalities::point_value(f, "f(b)", b)?;
    let fbm = inequalities::point_value(f, "f(b/m)", b / m)?;
    let fam = inequalities::point_value(f, "f(a/m)", a / m)?;
    let integral =
        inequalities::converged_integral(|x| f.evaluate(x), "∫ f over [a, b]", a, b, qtol)?;
    let bound = (fa + m * fbm).min(fb + m * fam);
    Ok(vec![
        inequalities::term("integral_mean", integral.value / (b - a),
            integral.error_estimate / (b - a)),
        inequalities::term("undamped_endpoint_bound", bound, 0.0),
    ])
}

// [f(mid), (1/(b-a))·∫[f(x) + m·f(x/m)], (f(a) + m·f(b/m) + m·f(a/m) + m²·f(b/m²))/2]
fn flat_thm5_chain(
    f: &FunctionExpr,
    m: f64,
    a: f64,
    b: f64,
    qtol: f64,
) -> Result<Vec<Term>, AuditError> {
    let mid = inequalities::point_value(f, "f((a+b)/2)", 0.5 * (a + b))?;
    let fa = inequalities::point_value(f, "f(a)", a)?;
    let fbm = inequalities::point_value(f, "f(b/m)", b / m)?;
    let fam = inequalities::point_value(f, "f(a/m)", a / m)?;
    let fbm2 = inequalities::point_value(f, "f(b/m^2)", b / (m * m))?;
    let integral = inequalities::converged_integral(
        |x| Ok(f.evaluate(x)? + m * f.evaluate(x / m)?),
        "∫ [f(x) + m·f(x/m)] over [a, b]",
        a,
        b,
        qtol,
    )?;
    Ok(vec![
        inequalities::term("midpoint_value", mid, 0.0),
        inequalities::term(
            "compressed_integral_mean",
            integral.value / (b - a),
            integral.error_estimate / (b - a),
        ),
        inequalities::term(
            "undamped_endpoint_bound",
            (fa + m * fbm + m * fam + m * m * fbm2) / 2.0,
            0.0,
        ),
    ])
}

// [averaged split means, f(a) + f(b)] — the bound with moment sum 2.
fn flat_thm8_chain(
    f: &FunctionExpr,
    m: f64,
    a: f64,
    b: f64,
    qtol: f64,
) -> Result<Vec<Term>, AuditError> {
    if a >= m * b {
        return Err(AuditError::Orientation { a, mb: m * b });
    }
    let fa = inequalities::point_value(f, "f(a)", a)?;
    let fb = inequalities::point_value(f, "f(b)", b)?;
    let first =
        inequalities::converged_integral(|x| f.evaluate(x), "∫ f over [a, m·b]", a, m * b, qtol)?;
    let second =
        inequalities::converged_integral(|x| f.evaluate(x), "∫ f over [m·a, b]", m * a, b, qtol)?;
    let lhs = (first.value / (m * b - a) + second.value / (b - m * a)) / (m + 1.0);
    let lhs_err = (first.error_estimate / (m * b - a) + second.error_estimate / (b - m * a))
        / (m + 1.0);
    Ok(vec![
        inequalities::term("averaged_split_means", lhs, lhs_err),
        inequalities::term("endpoint_sum", fa + fb, 0.0),
    ])
}

// [2^(s-1)·f(mid), mean, (f(a)+f(b))/2] — what the power-kernel chain at
// m = 1 becomes after multiplying through by 2^(s-1).
fn rescaled_power_chain(
    f: &FunctionExpr,
    s: f64,
    a: f64,
    b: f64,
    qtol: f64,
) -> Result<Vec<Term>, AuditError> {
    let mid = inequalities::point_value(f, "f((a+b)/2)", 0.5 * (a + b))?;
    let fa = inequalities::point_value(f, "f(a)", a)?;
    let fb = inequalities::point_value(f, "f(b)", b)?;
    let integral =
        inequalities::converged_integral(|x| f.evaluate(x), "∫ f over [a, b]", a, b, qtol)?;
    Ok(vec![
        inequalities::term("scaled_midpoint_value", 2f64.powf(s - 1.0) * mid, 0.0),
        inequalities::term(
            "integral_mean",
            integral.value / (b - a),
            integral.error_estimate / (b - a),
        ),
        inequalities::term("halved_endpoint_sum", (fa + fb) / 2.0, 0.0),
    ])
}
