//! Hadamard-type inequality chains for `(h, m)`-convex functions.
//!
//! Each audit evaluates the terms of one inequality chain exactly as the
//! chain is stated — integral means by adaptive quadrature, endpoint terms
//! by direct evaluation — and then judges every adjacent pair with an
//! explicit tolerance that folds in the propagated quadrature error. The
//! audit takes no position on whether `f` actually belongs to the class the
//! chain assumes: it reports what the numbers say about the stated
//! inequality for the given inputs, which is exactly what makes it able to
//! expose a stated chain that fails.
//!
//! Three general chains are covered (`thm4`, `thm5`, `thm8`) along with the
//! seven classical specializations they collapse to (`m1`, `m2`, `m3`, `s`,
//! `q`, `p`, `h1`).

use serde::{Deserialize, Serialize};

use crate::convexity::HMParams;
use crate::expr::{EvalError, FunctionExpr, Kernel};
use crate::quadrature::{self, integrate, kernel_moments, MomentsError, QuadError, QuadResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InequalityId {
    Thm4,
    Thm5,
    Thm8,
    M1,
    M2,
    M3,
    S,
    Q,
    P,
    H1,
}

impl InequalityId {
    pub const ALL: [InequalityId; 10] = [
        InequalityId::Thm4,
        InequalityId::Thm5,
        InequalityId::Thm8,
        InequalityId::M1,
        InequalityId::M2,
        InequalityId::M3,
        InequalityId::S,
        InequalityId::Q,
        InequalityId::P,
        InequalityId::H1,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            InequalityId::Thm4 => "thm4",
            InequalityId::Thm5 => "thm5",
            InequalityId::Thm8 => "thm8",
            InequalityId::M1 => "m1",
            InequalityId::M2 => "m2",
            InequalityId::M3 => "m3",
            InequalityId::S => "s",
            InequalityId::Q => "q",
            InequalityId::P => "p",
            InequalityId::H1 => "h1",
        }
    }
}

impl std::fmt::Display for InequalityId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for InequalityId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        InequalityId::ALL
            .iter()
            .copied()
            .find(|id| id.name() == s)
            .ok_or_else(|| {
                let known: Vec<&str> = InequalityId::ALL.iter().map(|i| i.name()).collect();
                format!("unknown inequality `{s}`; expected one of {}", known.join(", "))
            })
    }
}

/// Per-pair acceptance tolerances. A pair `tᵢ ≤ tᵢ₊₁` is accepted when
/// `tᵢ ≤ tᵢ₊₁ + abs + rel·max(|tᵢ|, |tᵢ₊₁|) + (quadrature error of both)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSpec {
    pub abs: f64,
    pub rel: f64,
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        ToleranceSpec { abs: 1e-9, rel: 1e-9 }
    }
}

/// Everything needed to audit one chain: the function, the class
/// parameters, the interval `[a, b]`, and the pair tolerances.
#[derive(Debug, Clone)]
pub struct AuditSpec {
    pub f: FunctionExpr,
    pub params: HMParams,
    pub a: f64,
    pub b: f64,
    pub tol: ToleranceSpec,
}

/// One evaluated term of a chain, in statement order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term {
    pub label: String,
    pub value: f64,
    /// Propagated quadrature error; 0 for terms built only from point
    /// evaluations and closed-form moments.
    pub quad_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairVerdict {
    pub holds: bool,
    /// `tᵢ₊₁ − tᵢ`; negative slack beyond tolerance is a violation.
    pub slack: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Overall {
    Holds,
    Violated,
}

/// Which branch of a two-sided minimum produced the bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MinBranch {
    First,
    Second,
}

/// Inputs echoed into every report so a result is interpretable on its own.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditInputs {
    pub function: String,
    pub kernel: String,
    pub m: f64,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub inequality_id: InequalityId,
    pub terms: Vec<Term>,
    /// Verdict for each adjacent pair, `terms.len() - 1` entries.
    pub pair_verdicts: Vec<PairVerdict>,
    pub overall: Overall,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_branch: Option<MinBranch>,
    pub inputs: AuditInputs,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AuditError {
    #[error("audit interval must satisfy 0 ≤ a < b with both finite, got a = {a}, b = {b}")]
    InvalidInterval { a: f64, b: f64 },
    #[error("audits require m in (0, 1], got {m}")]
    MOutOfRange { m: f64 },
    #[error("tolerances must be finite with abs > 0 and rel ≥ 0, got abs = {abs}, rel = {rel}")]
    InvalidTolerance { abs: f64, rel: f64 },
    #[error("orientation error: the split-interval chain needs a < m·b, got a = {a}, m·b = {mb}")]
    Orientation { a: f64, mb: f64 },
    #[error("required point {label} = {point} cannot be evaluated: {source}")]
    RequiredPoint {
        label: String,
        point: f64,
        source: EvalError,
    },
    #[error("kernel value h({t}) cannot be evaluated: {source}")]
    KernelValue { t: f64, source: EvalError },
    #[error("this chain needs h(1/2) > 0, got h(1/2) = {value}")]
    NonPositiveKernelHalf { value: f64 },
    #[error(transparent)]
    Moments(#[from] MomentsError),
    #[error("integrand of {label} failed: {source}")]
    Integrand { label: String, source: EvalError },
    #[error("integral {label} diverges")]
    IntegralDivergent { label: String },
    #[error("integral {label} did not converge to tolerance {tol}")]
    IntegralNoConvergence { label: String, tol: f64 },
    #[error("the s-parameterized chain requires a power kernel (h(t) = t^s)")]
    PowerKernelRequired,
}

/// Evaluate one inequality chain and judge every adjacent pair.
///
/// The `direction` field of `spec.params` is ignored: the chains are
/// statements about the convex direction. Validation failures (interval,
/// `m`, tolerances, orientation) are distinguished from numerical failures
/// (unevaluable points, divergent kernels or integrals) by error variant.
pub fn audit(spec: &AuditSpec, id: InequalityId) -> Result<InequalityReport, AuditError> {
    validate(spec)?;
    let qtol = spec.tol.abs.min(quadrature::DEFAULT_TOL);
    let terms = match id {
        InequalityId::Thm4 => audit_thm4(spec, qtol)?,
        InequalityId::Thm5 => audit_thm5(spec, qtol)?,
        InequalityId::Thm8 => audit_thm8(spec, qtol)?,
        InequalityId::M1 => audit_m1(spec, qtol)?,
        InequalityId::M2 => audit_m2(spec, qtol)?,
        InequalityId::M3 => audit_m3(spec, qtol)?,
        InequalityId::S => audit_s(spec, qtol)?,
        InequalityId::Q => audit_q(spec, qtol)?,
        InequalityId::P => audit_p(spec, qtol)?,
        InequalityId::H1 => audit_h1(spec, qtol)?,
    };
    Ok(assemble(spec, id, terms))
}

struct ChainTerms {
    terms: Vec<Term>,
    min_branch: Option<MinBranch>,
}

/// All validation `audit` would reject before evaluating anything, usable
/// up front by batch runners that must separate bad inputs from numerical
/// failures.
pub(crate) fn prevalidate(spec: &AuditSpec, id: InequalityId) -> Result<(), AuditError> {
    validate(spec)?;
    let mb = spec.params.m * spec.b;
    if matches!(id, InequalityId::Thm8 | InequalityId::M3) && spec.a >= mb {
        return Err(AuditError::Orientation { a: spec.a, mb });
    }
    if id == InequalityId::S && !matches!(spec.params.h, Kernel::Power { .. }) {
        return Err(AuditError::PowerKernelRequired);
    }
    Ok(())
}

fn validate(spec: &AuditSpec) -> Result<(), AuditError> {
    let (a, b, m) = (spec.a, spec.b, spec.params.m);
    if !(a.is_finite() && b.is_finite() && a >= 0.0 && a < b) {
        return Err(AuditError::InvalidInterval { a, b });
    }
    if !(m.is_finite() && m > 0.0 && m <= 1.0) {
        return Err(AuditError::MOutOfRange { m });
    }
    let tol = spec.tol;
    if !(tol.abs.is_finite() && tol.abs > 0.0 && tol.rel.is_finite() && tol.rel >= 0.0) {
        return Err(AuditError::InvalidTolerance {
            abs: tol.abs,
            rel: tol.rel,
        });
    }
    Ok(())
}

fn assemble(spec: &AuditSpec, id: InequalityId, chain: ChainTerms) -> InequalityReport {
    let tol = spec.tol;
    let pair_verdicts: Vec<PairVerdict> = chain
        .terms
        .windows(2)
        .map(|pair| {
            let (lo, hi) = (&pair[0], &pair[1]);
            let slack = hi.value - lo.value;
            let budget = tol.abs
                + tol.rel * lo.value.abs().max(hi.value.abs())
                + lo.quad_error
                + hi.quad_error;
            PairVerdict {
                holds: lo.value <= hi.value + budget,
                slack,
            }
        })
        .collect();
    let overall = if pair_verdicts.iter().all(|p| p.holds) {
        Overall::Holds
    } else {
        Overall::Violated
    };
    InequalityReport {
        inequality_id: id,
        terms: chain.terms,
        pair_verdicts,
        overall,
        min_branch: chain.min_branch,
        inputs: AuditInputs {
            function: spec.f.source_text().to_string(),
            kernel: spec.params.h.descriptor(),
            m: spec.params.m,
            a: spec.a,
            b: spec.b,
        },
    }
}

pub(crate) fn point_value(f: &FunctionExpr, label: &str, point: f64) -> Result<f64, AuditError> {
    f.evaluate(point).map_err(|source| AuditError::RequiredPoint {
        label: label.to_string(),
        point,
        source,
    })
}

fn kernel_value(h: &Kernel, t: f64) -> Result<f64, AuditError> {
    h.evaluate(t)
        .map_err(|source| AuditError::KernelValue { t, source })
}

pub(crate) fn converged_integral<F>(
    g: F,
    label: &str,
    lo: f64,
    hi: f64,
    qtol: f64,
) -> Result<QuadResult, AuditError>
where
    F: FnMut(f64) -> Result<f64, EvalError>,
{
    let result = integrate(g, lo, hi, qtol).map_err(|e| match e {
        QuadError::Eval(source) => AuditError::Integrand {
            label: label.to_string(),
            source,
        },
        QuadError::BadInterval { .. } | QuadError::BadTolerance { .. } => {
            unreachable!("interval and tolerance are validated before integrating")
        }
    })?;
    if result.divergent {
        return Err(AuditError::IntegralDivergent {
            label: label.to_string(),
        });
    }
    if !result.converged {
        return Err(AuditError::IntegralNoConvergence {
            label: label.to_string(),
            tol: qtol,
        });
    }
    Ok(result)
}

pub(crate) fn term(label: &str, value: f64, quad_error: f64) -> Term {
    Term {
        label: label.to_string(),
        value,
        quad_error,
    }
}

// mean ≤ min{ f(a)·c0 + m·f(b/m)·c1 , f(b)·c0 + m·f(a/m)·c1 }
fn audit_thm4(spec: &AuditSpec, qtol: f64) -> Result<ChainTerms, AuditError> {
    let (f, h, m, a, b) = (&spec.f, &spec.params.h, spec.params.m, spec.a, spec.b);
    let moments = kernel_moments(h, qtol)?;
    let (c0, c1) = (moments.c0, moments.c1);

    let fa = point_value(f, "f(a)", a)?;
    let fb = point_value(f, "f(b)", b)?;
    let fbm = point_value(f, "f(b/m)", b / m)?;
    let fam = point_value(f, "f(a/m)", a / m)?;

    let integral = converged_integral(|x| f.evaluate(x), "∫ f over [a, b]", a, b, qtol)?;
    let mean = integral.value / (b - a);
    let mean_err = integral.error_estimate / (b - a);

    let branch1 = fa * c0.value + m * fbm * c1.value;
    let branch1_err = fa.abs() * c0.error_estimate + m * fbm.abs() * c1.error_estimate;
    let branch2 = fb * c0.value + m * fam * c1.value;
    let branch2_err = fb.abs() * c0.error_estimate + m * fam.abs() * c1.error_estimate;

    // Ties go to the first branch.
    let (bound, bound_err, branch) = if branch1 <= branch2 {
        (branch1, branch1_err, MinBranch::First)
    } else {
        (branch2, branch2_err, MinBranch::Second)
    };

    Ok(ChainTerms {
        terms: vec![
            term("integral_mean", mean, mean_err),
            term("min_kernel_endpoint_bound", bound, bound_err),
        ],
        min_branch: Some(branch),
    })
}

// f((a+b)/2) ≤ h(1/2)/(b-a) · ∫ [f(x) + m·f(x/m)] dx
//            ≤ h(1/2) · [f(a) + m·f(b/m) + m·f(a/m) + m²·f(b/m²)] / 2
fn audit_thm5(spec: &AuditSpec, qtol: f64) -> Result<ChainTerms, AuditError> {
    let (f, h, m, a, b) = (&spec.f, &spec.params.h, spec.params.m, spec.a, spec.b);
    let h_half = kernel_value(h, 0.5)?;

    let mid = point_value(f, "f((a+b)/2)", 0.5 * (a + b))?;
    let fa = point_value(f, "f(a)", a)?;
    let fbm = point_value(f, "f(b/m)", b / m)?;
    let fam = point_value(f, "f(a/m)", a / m)?;
    let fbm2 = point_value(f, "f(b/m^2)", b / (m * m))?;

    let integral = converged_integral(
        |x| Ok(f.evaluate(x)? + m * f.evaluate(x / m)?),
        "∫ [f(x) + m·f(x/m)] over [a, b]",
        a,
        b,
        qtol,
    )?;
    let weighted_mean = h_half * integral.value / (b - a);
    let weighted_mean_err = h_half.abs() * integral.error_estimate / (b - a);

    let endpoint_bound = h_half * (fa + m * fbm + m * fam + m * m * fbm2) / 2.0;

    Ok(ChainTerms {
        terms: vec![
            term("midpoint_value", mid, 0.0),
            term("kernel_weighted_integral_mean", weighted_mean, weighted_mean_err),
            term("kernel_endpoint_bound", endpoint_bound, 0.0),
        ],
        min_branch: None,
    })
}

// (1/(m+1)) · [ mean over [a, m·b] + mean over [m·a, b] ]
//     ≤ (f(a)+f(b))/2 · (c0 + c1)
fn audit_thm8(spec: &AuditSpec, qtol: f64) -> Result<ChainTerms, AuditError> {
    let (f, h, m, a, b) = (&spec.f, &spec.params.h, spec.params.m, spec.a, spec.b);
    if a >= m * b {
        return Err(AuditError::Orientation { a, mb: m * b });
    }
    let moments = kernel_moments(h, qtol)?;

    let fa = point_value(f, "f(a)", a)?;
    let fb = point_value(f, "f(b)", b)?;

    let first = converged_integral(|x| f.evaluate(x), "∫ f over [a, m·b]", a, m * b, qtol)?;
    let second = converged_integral(|x| f.evaluate(x), "∫ f over [m·a, b]", m * a, b, qtol)?;

    let lhs = (first.value / (m * b - a) + second.value / (b - m * a)) / (m + 1.0);
    let lhs_err = (first.error_estimate / (m * b - a) + second.error_estimate / (b - m * a))
        / (m + 1.0);

    let rhs = 0.5 * (fa + fb) * (moments.c0.value + moments.c1.value);
    let rhs_err =
        0.5 * (fa + fb).abs() * (moments.c0.error_estimate + moments.c1.error_estimate);

    Ok(ChainTerms {
        terms: vec![
            term("averaged_split_means", lhs, lhs_err),
            term("endpoint_mean_times_moment_sum", rhs, rhs_err),
        ],
        min_branch: None,
    })
}

// mean ≤ min{ (f(a) + m·f(b/m))/2 , (f(b) + m·f(a/m))/2 }
fn audit_m1(spec: &AuditSpec, qtol: f64) -> Result<ChainTerms, AuditError> {
    let (f, m, a, b) = (&spec.f, spec.params.m, spec.a, spec.b);
    let fa = point_value(f, "f(a)", a)?;
    let fb = point_value(f, "f(b)", b)?;
    let fbm = point_value(f, "f(b/m)", b / m)?;
    let fam = point_value(f, "f(a/m)", a / m)?;

    let integral = converged_integral(|x| f.evaluate(x), "∫ f over [a, b]", a, b, qtol)?;
    let mean = integral.value / (b - a);
    let mean_err = integral.error_estimate / (b - a);

    let branch1 = (fa + m * fbm) / 2.0;
    let branch2 = (fb + m * fam) / 2.0;
    let (bound, branch) = if branch1 <= branch2 {
        (branch1, MinBranch::First)
    } else {
        (branch2, MinBranch::Second)
    };

    Ok(ChainTerms {
        terms: vec![
            term("integral_mean", mean, mean_err),
            term("min_endpoint_average", bound, 0.0),
        ],
        min_branch: Some(branch),
    })
}

// f((a+b)/2) ≤ (1/(b-a)) ∫ [f(x) + m·f(x/m)]/2 dx
//            ≤ ((m+1)/4) · [ (f(a)+f(b))/2 + m·(f(a/m)+f(b/m))/2 ]
fn audit_m2(spec: &AuditSpec, qtol: f64) -> Result<ChainTerms, AuditError> {
    let (f, m, a, b) = (&spec.f, spec.params.m, spec.a, spec.b);
    let mid = point_value(f, "f((a+b)/2)", 0.5 * (a + b))?;
    let fa = point_value(f, "f(a)", a)?;
    let fb = point_value(f, "f(b)", b)?;
    let fam = point_value(f, "f(a/m)", a / m)?;
    let fbm = point_value(f, "f(b/m)", b / m)?;

    let integral = converged_integral(
        |x| Ok((f.evaluate(x)? + m * f.evaluate(x / m)?) / 2.0),
        "∫ [f(x) + m·f(x/m)]/2 over [a, b]",
        a,
        b,
        qtol,
    )?;
    let mean = integral.value / (b - a);
    let mean_err = integral.error_estimate / (b - a);

    let weighted = ((m + 1.0) / 4.0) * ((fa + fb) / 2.0 + m * (fam + fbm) / 2.0);

    Ok(ChainTerms {
        terms: vec![
            term("midpoint_value", mid, 0.0),
            term("symmetrized_integral_mean", mean, mean_err),
            term("weighted_endpoint_average", weighted, 0.0),
        ],
        min_branch: None,
    })
}

// (1/(m+1)) · [ ∫_a^{m·b} f + ((m·b-a)/(b-m·a)) ∫_{m·a}^b f ]
//     ≤ (m·b-a) · (f(a)+f(b))/2
fn audit_m3(spec: &AuditSpec, qtol: f64) -> Result<ChainTerms, AuditError> {
    let (f, m, a, b) = (&spec.f, spec.params.m, spec.a, spec.b);
    if a >= m * b {
        return Err(AuditError::Orientation { a, mb: m * b });
    }
    let fa = point_value(f, "f(a)", a)?;
    let fb = point_value(f, "f(b)", b)?;

    let first = converged_integral(|x| f.evaluate(x), "∫ f over [a, m·b]", a, m * b, qtol)?;
    let second = converged_integral(|x| f.evaluate(x), "∫ f over [m·a, b]", m * a, b, qtol)?;

    let ratio = (m * b - a) / (b - m * a);
    let lhs = (first.value + ratio * second.value) / (m + 1.0);
    let lhs_err = (first.error_estimate + ratio * second.error_estimate) / (m + 1.0);
    let rhs = (m * b - a) * (fa + fb) / 2.0;

    Ok(ChainTerms {
        terms: vec![
            term("weighted_split_integrals", lhs, lhs_err),
            term("scaled_endpoint_average", rhs, 0.0),
        ],
        min_branch: None,
    })
}

// 2^{s-1}·f((a+b)/2) ≤ mean ≤ (f(a)+f(b))/(s+1)
fn audit_s(spec: &AuditSpec, qtol: f64) -> Result<ChainTerms, AuditError> {
    let (f, a, b) = (&spec.f, spec.a, spec.b);
    let s = match spec.params.h {
        Kernel::Power { s } => s,
        _ => return Err(AuditError::PowerKernelRequired),
    };
    let mid = point_value(f, "f((a+b)/2)", 0.5 * (a + b))?;
    let fa = point_value(f, "f(a)", a)?;
    let fb = point_value(f, "f(b)", b)?;

    let integral = converged_integral(|x| f.evaluate(x), "∫ f over [a, b]", a, b, qtol)?;
    let mean = integral.value / (b - a);
    let mean_err = integral.error_estimate / (b - a);

    Ok(ChainTerms {
        terms: vec![
            term("scaled_midpoint_value", 2f64.powf(s - 1.0) * mid, 0.0),
            term("integral_mean", mean, mean_err),
            term("endpoint_sum_scaled", (fa + fb) / (s + 1.0), 0.0),
        ],
        min_branch: None,
    })
}

// f((a+b)/2) ≤ (4/(b-a)) ∫ f
fn audit_q(spec: &AuditSpec, qtol: f64) -> Result<ChainTerms, AuditError> {
    let (f, a, b) = (&spec.f, spec.a, spec.b);
    let mid = point_value(f, "f((a+b)/2)", 0.5 * (a + b))?;
    let integral = converged_integral(|x| f.evaluate(x), "∫ f over [a, b]", a, b, qtol)?;

    Ok(ChainTerms {
        terms: vec![
            term("midpoint_value", mid, 0.0),
            term(
                "quadruple_integral_mean",
                4.0 * integral.value / (b - a),
                4.0 * integral.error_estimate / (b - a),
            ),
        ],
        min_branch: None,
    })
}

// f((a+b)/2) ≤ (2/(b-a)) ∫ f ≤ 2·[f(a)+f(b)]
fn audit_p(spec: &AuditSpec, qtol: f64) -> Result<ChainTerms, AuditError> {
    let (f, a, b) = (&spec.f, spec.a, spec.b);
    let mid = point_value(f, "f((a+b)/2)", 0.5 * (a + b))?;
    let fa = point_value(f, "f(a)", a)?;
    let fb = point_value(f, "f(b)", b)?;
    let integral = converged_integral(|x| f.evaluate(x), "∫ f over [a, b]", a, b, qtol)?;

    Ok(ChainTerms {
        terms: vec![
            term("midpoint_value", mid, 0.0),
            term(
                "double_integral_mean",
                2.0 * integral.value / (b - a),
                2.0 * integral.error_estimate / (b - a),
            ),
            term("double_endpoint_sum", 2.0 * (fa + fb), 0.0),
        ],
        min_branch: None,
    })
}

// f((a+b)/2)/(2·h(1/2)) ≤ mean ≤ (f(a)+f(b))·c0
fn audit_h1(spec: &AuditSpec, qtol: f64) -> Result<ChainTerms, AuditError> {
    let (f, h, a, b) = (&spec.f, &spec.params.h, spec.a, spec.b);
    let h_half = kernel_value(h, 0.5)?;
    if !(h_half > 0.0) {
        return Err(AuditError::NonPositiveKernelHalf { value: h_half });
    }
    let moments = kernel_moments(h, qtol)?;

    let mid = point_value(f, "f((a+b)/2)", 0.5 * (a + b))?;
    let fa = point_value(f, "f(a)", a)?;
    let fb = point_value(f, "f(b)", b)?;

    let integral = converged_integral(|x| f.evaluate(x), "∫ f over [a, b]", a, b, qtol)?;
    let mean = integral.value / (b - a);
    let mean_err = integral.error_estimate / (b - a);

    let upper = (fa + fb) * moments.c0.value;
    let upper_err = (fa + fb).abs() * moments.c0.error_estimate;

    Ok(ChainTerms {
        terms: vec![
            term("scaled_midpoint_value", mid / (2.0 * h_half), 0.0),
            term("integral_mean", mean, mean_err),
            term("endpoint_sum_times_moment", upper, upper_err),
        ],
        min_branch: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convexity::Direction;
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn spec(f: &str, h: Kernel, m: f64, a: f64, b: f64) -> AuditSpec {
        AuditSpec {
            f: FunctionExpr::parse(f, "x").unwrap(),
            params: HMParams::new(h, m, Direction::Convex).unwrap(),
            a,
            b,
            tol: ToleranceSpec::default(),
        }
    }

    #[test]
    fn thm4_square_half_compression() {
        let report = audit(&spec("x^2", Kernel::Identity, 0.5, 1.0, 2.0), InequalityId::Thm4)
            .unwrap();
        assert_eq!(report.terms.len(), 2);
        assert_abs_diff_eq!(report.terms[0].value, 7.0 / 3.0, epsilon = 1e-8);
        // Branches: 1·0.5 + 0.5·16·0.5 = 4.5 and 4·0.5 + 0.5·4·0.5 = 3.
        assert_abs_diff_eq!(report.terms[1].value, 3.0, epsilon = 1e-12);
        assert_eq!(report.min_branch, Some(MinBranch::Second));
        assert_eq!(report.overall, Overall::Holds);
    }

    #[test]
    fn thm4_tie_goes_to_first_branch() {
        let report =
            audit(&spec("x^2", Kernel::One, 1.0, 0.0, 1.0), InequalityId::Thm4).unwrap();
        assert_abs_diff_eq!(report.terms[0].value, 1.0 / 3.0, epsilon = 1e-8);
        assert_abs_diff_eq!(report.terms[1].value, 1.0, epsilon = 1e-12);
        assert_eq!(report.min_branch, Some(MinBranch::First));
        assert_eq!(report.overall, Overall::Holds);
    }

    #[test]
    fn thm5_square_classical() {
        let report = audit(&spec("x^2", Kernel::Identity, 1.0, 0.0, 1.0), InequalityId::Thm5)
            .unwrap();
        let values: Vec<f64> = report.terms.iter().map(|t| t.value).collect();
        assert_abs_diff_eq!(values[0], 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(values[1], 1.0 / 3.0, epsilon = 1e-8);
        assert_abs_diff_eq!(values[2], 0.5, epsilon = 1e-12);
        assert_eq!(report.overall, Overall::Holds);
    }

    #[test]
    fn thm5_sqrt_with_matching_power_kernel_fails_second_pair() {
        // The stated bound's second link fails for f = √x with h = √t on
        // [0, 1]: the middle term is 4/(3√2) ≈ 0.9428 while the right term
        // is 1/√2 ≈ 0.7071.
        let report = audit(
            &spec("sqrt(x)", Kernel::power(0.5).unwrap(), 1.0, 0.0, 1.0),
            InequalityId::Thm5,
        )
        .unwrap();
        assert_abs_diff_eq!(report.terms[0].value, 1.0 / 2f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(report.terms[1].value, 4.0 / (3.0 * 2f64.sqrt()), epsilon = 1e-8);
        assert_abs_diff_eq!(report.terms[2].value, 1.0 / 2f64.sqrt(), epsilon = 1e-12);
        assert!(report.pair_verdicts[0].holds);
        assert!(!report.pair_verdicts[1].holds);
        assert_abs_diff_eq!(
            report.pair_verdicts[1].slack,
            -0.2357022603955158,
            epsilon = 1e-8
        );
        assert_eq!(report.overall, Overall::Violated);
    }

    #[test]
    fn thm8_square_half_compression() {
        let report = audit(&spec("x^2", Kernel::Identity, 0.5, 0.5, 2.0), InequalityId::Thm8)
            .unwrap();
        assert_abs_diff_eq!(report.terms[0].value, 707.0 / 504.0, epsilon = 1e-8);
        assert_abs_diff_eq!(report.terms[1].value, 2.125, epsilon = 1e-12);
        assert_eq!(report.overall, Overall::Holds);
    }

    #[test]
    fn thm8_rejects_bad_orientation() {
        match audit(&spec("x^2", Kernel::Identity, 0.5, 1.0, 2.0), InequalityId::Thm8) {
            Err(AuditError::Orientation { a, mb }) => {
                assert_eq!(a, 1.0);
                assert_eq!(mb, 1.0);
            }
            other => panic!("expected orientation error, got {other:?}"),
        }
    }

    #[test]
    fn m1_square_half_compression() {
        let report = audit(&spec("x^2", Kernel::Identity, 0.5, 1.0, 2.0), InequalityId::M1)
            .unwrap();
        assert_abs_diff_eq!(report.terms[0].value, 7.0 / 3.0, epsilon = 1e-8);
        assert_abs_diff_eq!(report.terms[1].value, 3.0, epsilon = 1e-12);
        assert_eq!(report.min_branch, Some(MinBranch::Second));
        assert_eq!(report.overall, Overall::Holds);
    }

    #[test]
    fn m2_second_link_fails_as_stated() {
        // (2.25, 3.5, 2.8125): the first link holds, the second does not —
        // the stated right-hand term undercuts the symmetrized mean.
        let report =
            audit(&spec("x^2", Kernel::Identity, 0.5, 1.0, 2.0), InequalityId::M2).unwrap();
        let values: Vec<f64> = report.terms.iter().map(|t| t.value).collect();
        assert_abs_diff_eq!(values[0], 2.25, epsilon = 1e-12);
        assert_abs_diff_eq!(values[1], 3.5, epsilon = 1e-8);
        assert_abs_diff_eq!(values[2], 2.8125, epsilon = 1e-12);
        assert!(report.pair_verdicts[0].holds);
        assert!(!report.pair_verdicts[1].holds);
        assert_abs_diff_eq!(report.pair_verdicts[1].slack, -0.6875, epsilon = 1e-8);
        assert_eq!(report.overall, Overall::Violated);
    }

    #[test]
    fn m3_square_half_compression() {
        let report = audit(&spec("x^2", Kernel::Identity, 0.5, 0.5, 2.0), InequalityId::M3)
            .unwrap();
        assert_abs_diff_eq!(report.terms[0].value, 101.0 / 144.0, epsilon = 1e-8);
        assert_abs_diff_eq!(report.terms[1].value, 1.0625, epsilon = 1e-12);
        assert_eq!(report.overall, Overall::Holds);
    }

    #[test]
    fn s_chain_is_sharp_for_sqrt() {
        let report = audit(
            &spec("sqrt(x)", Kernel::power(0.5).unwrap(), 1.0, 0.0, 1.0),
            InequalityId::S,
        )
        .unwrap();
        let values: Vec<f64> = report.terms.iter().map(|t| t.value).collect();
        assert_abs_diff_eq!(values[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(values[1], 2.0 / 3.0, epsilon = 1e-8);
        assert_abs_diff_eq!(values[2], 2.0 / 3.0, epsilon = 1e-12);
        assert_eq!(report.overall, Overall::Holds);
    }

    #[test]
    fn s_requires_power_kernel() {
        assert!(matches!(
            audit(&spec("x^2", Kernel::Identity, 1.0, 0.0, 1.0), InequalityId::S),
            Err(AuditError::PowerKernelRequired)
        ));
    }

    #[test]
    fn q_and_p_chains() {
        let q = audit(&spec("x^2", Kernel::Reciprocal, 1.0, 1.0, 2.0), InequalityId::Q)
            .unwrap();
        assert_abs_diff_eq!(q.terms[0].value, 2.25, epsilon = 1e-12);
        assert_abs_diff_eq!(q.terms[1].value, 28.0 / 3.0, epsilon = 1e-8);
        assert_eq!(q.overall, Overall::Holds);

        let p = audit(&spec("x^2", Kernel::One, 1.0, 0.0, 1.0), InequalityId::P).unwrap();
        let values: Vec<f64> = p.terms.iter().map(|t| t.value).collect();
        assert_abs_diff_eq!(values[0], 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(values[1], 2.0 / 3.0, epsilon = 1e-8);
        assert_abs_diff_eq!(values[2], 2.0, epsilon = 1e-12);
        assert_eq!(p.overall, Overall::Holds);
    }

    #[test]
    fn h1_with_identity_kernel_is_classical_hadamard() {
        let report = audit(&spec("x^2", Kernel::Identity, 1.0, 0.0, 1.0), InequalityId::H1)
            .unwrap();
        let values: Vec<f64> = report.terms.iter().map(|t| t.value).collect();
        assert_abs_diff_eq!(values[0], 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(values[1], 1.0 / 3.0, epsilon = 1e-8);
        assert_abs_diff_eq!(values[2], 0.5, epsilon = 1e-12);
        assert_eq!(report.overall, Overall::Holds);
    }

    #[test]
    fn divergent_kernels_are_rejected_where_moments_matter() {
        assert!(matches!(
            audit(&spec("x^2", Kernel::Reciprocal, 1.0, 1.0, 2.0), InequalityId::Thm4),
            Err(AuditError::Moments(MomentsError::Divergent { .. }))
        ));
        assert!(matches!(
            audit(&spec("x^2", Kernel::Reciprocal, 0.5, 0.5, 2.0), InequalityId::Thm8),
            Err(AuditError::Moments(MomentsError::Divergent { .. }))
        ));
        assert!(matches!(
            audit(&spec("x^2", Kernel::Reciprocal, 1.0, 0.0, 1.0), InequalityId::H1),
            Err(AuditError::Moments(MomentsError::Divergent { .. }))
        ));
        // thm5 only needs h(1/2), so the reciprocal kernel is fine there.
        assert!(audit(&spec("x^2", Kernel::Reciprocal, 1.0, 0.0, 1.0), InequalityId::Thm5)
            .is_ok());
    }

    #[test]
    fn unevaluable_compressed_point_names_itself() {
        // b/m² = 6 falls outside where sqrt(5 - x) lives; everything else
        // along the chain is fine, so the error must name exactly f(b/m^2).
        let report = audit(
            &spec("sqrt(5 - x)", Kernel::Identity, 0.5, 1.0, 1.5),
            InequalityId::Thm5,
        );
        match report {
            Err(AuditError::RequiredPoint { label, point, .. }) => {
                assert_eq!(label, "f(b/m^2)");
                assert_eq!(point, 6.0);
            }
            other => panic!("expected required-point error, got {other:?}"),
        }
    }

    #[test]
    fn interval_and_m_validation() {
        assert!(matches!(
            audit(&spec("x^2", Kernel::Identity, 1.0, 2.0, 1.0), InequalityId::Q),
            Err(AuditError::InvalidInterval { .. })
        ));
        assert!(matches!(
            audit(&spec("x^2", Kernel::Identity, 1.0, -1.0, 1.0), InequalityId::Q),
            Err(AuditError::InvalidInterval { .. })
        ));
        let mut bad_m = spec("x^2", Kernel::Identity, 1.0, 0.0, 1.0);
        bad_m.params.m = 0.0;
        assert!(matches!(
            audit(&bad_m, InequalityId::Q),
            Err(AuditError::MOutOfRange { .. })
        ));
        let mut bad_tol = spec("x^2", Kernel::Identity, 1.0, 0.0, 1.0);
        bad_tol.tol.abs = 0.0;
        assert!(matches!(
            audit(&bad_tol, InequalityId::Q),
            Err(AuditError::InvalidTolerance { .. })
        ));
    }

    // Bookkeeping invariants over randomized, well-behaved specs: pair count,
    // slack arithmetic, and the overall verdict as the conjunction of pairs.
    #[test]
    fn report_bookkeeping_is_consistent() {
        let mut rng = StdRng::seed_from_u64(2024);
        for trial in 0..100 {
            let c2: f64 = rng.random_range(0.1..3.0);
            let c1: f64 = rng.random_range(0.0..3.0);
            let c0: f64 = rng.random_range(0.0..3.0);
            let f = format!("{c2:?} * x^2 + {c1:?} * x + {c0:?}");
            let a: f64 = rng.random_range(0.1..2.0);
            let b: f64 = a + rng.random_range(0.5..2.0);
            let id = InequalityId::ALL[trial % InequalityId::ALL.len()];
            let (m, kernel) = match id {
                InequalityId::S => (1.0, Kernel::power(rng.random_range(0.2..1.0)).unwrap()),
                InequalityId::Thm8 | InequalityId::M3 => {
                    // Orientation needs a < m·b.
                    let m = rng.random_range((a / b + 0.05).min(0.9)..1.0);
                    (m, Kernel::Identity)
                }
                _ => (rng.random_range(0.3..1.0), Kernel::Identity),
            };
            let spec = AuditSpec {
                f: FunctionExpr::parse(&f, "x").unwrap(),
                params: HMParams::new(kernel, m, Direction::Convex).unwrap(),
                a,
                b,
                tol: ToleranceSpec::default(),
            };
            let report = audit(&spec, id).unwrap();
            assert_eq!(report.pair_verdicts.len(), report.terms.len() - 1);
            for (i, pair) in report.pair_verdicts.iter().enumerate() {
                assert_eq!(
                    pair.slack,
                    report.terms[i + 1].value - report.terms[i].value,
                    "slack bookkeeping broke for {id} trial {trial}"
                );
            }
            let expect_overall = if report.pair_verdicts.iter().all(|p| p.holds) {
                Overall::Holds
            } else {
                Overall::Violated
            };
            assert_eq!(report.overall, expect_overall);
            for term in &report.terms {
                assert!(term.value.is_finite());
                assert!(term.quad_error >= 0.0);
            }
        }
    }

    // Positive scaling of f scales every term and flips no verdicts on
    // generically-positioned specs.
    #[test]
    fn chains_are_covariant_under_positive_scaling() {
        let mut rng = StdRng::seed_from_u64(77);
        for trial in 0..20 {
            let c2: f64 = rng.random_range(0.1..2.0);
            let c1: f64 = rng.random_range(0.0..2.0);
            let f = FunctionExpr::parse(&format!("{c2:?} * x^2 + {c1:?} * x"), "x").unwrap();
            let a: f64 = rng.random_range(0.1..1.0);
            let b: f64 = a + rng.random_range(0.5..1.5);
            let id = [InequalityId::Thm4, InequalityId::Thm5, InequalityId::Q, InequalityId::P]
                [trial % 4];
            let base = AuditSpec {
                f: f.clone(),
                params: HMParams::new(Kernel::Identity, 0.5, Direction::Convex).unwrap(),
                a,
                b,
                tol: ToleranceSpec::default(),
            };
            let scaled = AuditSpec {
                f: f.scaled(3.0),
                ..base.clone()
            };
            let r1 = audit(&base, id).unwrap();
            let r3 = audit(&scaled, id).unwrap();
            for (t1, t3) in r1.terms.iter().zip(&r3.terms) {
                assert_abs_diff_eq!(
                    t3.value,
                    3.0 * t1.value,
                    epsilon = 1e-12 * t1.value.abs().max(1.0)
                );
            }
            assert_eq!(r1.overall, r3.overall);
            for (p1, p3) in r1.pair_verdicts.iter().zip(&r3.pair_verdicts) {
                assert_eq!(p1.holds, p3.holds);
            }
        }
    }
}
