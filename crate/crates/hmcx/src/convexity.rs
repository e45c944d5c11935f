//! Membership testing for `(h, m)`-convexity classes.
//!
//! A function `f ≥ 0` belongs to the class when
//!
//! ```text
//! f(αx + m(1-α)y)  ≤  h(α)·f(x) + m·h(1-α)·f(y)
//! ```
//!
//! for all `x, y` in the domain and `α` in (0, 1). The *defect* is the
//! left side minus the right side at one triple; a positive defect is a
//! counterexample to convex-direction membership (for the concave direction
//! the sign flips). Membership cannot be proven numerically, so the checker
//! is a falsifier: it spends a configurable evaluation budget hunting for a
//! positive defect and reports either a concrete violating triple or
//! "no violation found" together with the largest defect it saw.
//!
//! Everything is deterministic for a fixed seed: each sampled triple derives
//! from its own counter-based RNG stream, so results are identical no matter
//! how many threads the sampling phase runs on.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::expr::{EvalError, FunctionExpr, Kernel};

/// A defect must exceed this margin before it is called a violation;
/// below it, honest roundoff could be responsible.
pub const PASS_MARGIN: f64 = 1e-7;

/// Sampled weights stay this far inside the open interval (0, 1).
pub const ALPHA_MARGIN: f64 = 1e-9;

/// Minimum falsification budget; below this the two-phase search cannot do
/// meaningful work.
pub const MIN_BUDGET: u64 = 1000;

const STRATA_PER_AXIS: u64 = 8;
const RESTARTS: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Convex,
    Concave,
}

impl Default for Direction {
    fn default() -> Self {
        Direction::Convex
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Direction::Convex => f.write_str("convex"),
            Direction::Concave => f.write_str("concave"),
        }
    }
}

/// Class parameters: the kernel `h`, the compression factor `m`, and which
/// direction of the defining inequality is under test.
#[derive(Debug, Clone, PartialEq)]
pub struct HMParams {
    pub h: Kernel,
    pub m: f64,
    pub direction: Direction,
}

impl HMParams {
    /// `m` must lie in [0, 1]. (`m = 0` is legal for membership testing;
    /// the integral audits additionally require `m > 0`.)
    pub fn new(h: Kernel, m: f64, direction: Direction) -> Result<Self, ConvexityError> {
        if !(m.is_finite() && (0.0..=1.0).contains(&m)) {
            return Err(ConvexityError::MOutOfRange { m });
        }
        Ok(HMParams { h, m, direction })
    }
}

/// Sampling domain `[0, b_cap]` for both `x` and `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    b_cap: f64,
}

impl Domain {
    pub fn new(b_cap: f64) -> Result<Self, ConvexityError> {
        if !(b_cap.is_finite() && b_cap > 0.0) {
            return Err(ConvexityError::BadDomain { b_cap });
        }
        Ok(Domain { b_cap })
    }

    pub fn b_cap(&self) -> f64 {
        self.b_cap
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConvexityError {
    #[error("m must lie in [0, 1], got {m}")]
    MOutOfRange { m: f64 },
    #[error("domain cap must be positive and finite, got {b_cap}")]
    BadDomain { b_cap: f64 },
    #[error("budget {budget} is below the minimum of {min}")]
    BudgetTooSmall { budget: u64, min: u64 },
    #[error("need at least {min} trials, got {got}")]
    TooFewTrials { got: u64, min: u64 },
    #[error("scaling factor must be positive and finite, got {lambda}")]
    BadLambda { lambda: f64 },
    #[error("expressions use different variables (`{left}` vs `{right}`)")]
    VariableMismatch { left: String, right: String },
    #[error(
        "membership requires f ≥ 0 on the domain, but f({point}) = {value}"
    )]
    NegativeFunctionValue { point: f64, value: f64 },
    #[error(
        "kernel domination hypothesis fails at t = {t}: h2(t) = {h2_value} > h1(t) = {h1_value}"
    )]
    DominationHypothesisFailed { t: f64, h2_value: f64, h1_value: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Raw convex-direction defect `f(αx + m(1-α)y) − h(α)f(x) − m·h(1-α)f(y)`.
///
/// Positive means the convex-direction inequality is violated at this
/// triple. Callers are responsible for keeping `x`, `y` inside the domain
/// and `α` inside (0, 1); evaluation errors surface as-is.
pub fn defect(
    f: &FunctionExpr,
    params: &HMParams,
    x: f64,
    y: f64,
    alpha: f64,
) -> Result<f64, EvalError> {
    let parts = defect_parts(f, params, x, y, alpha)?;
    Ok(parts.lhs - parts.rhs)
}

struct DefectParts {
    combined: f64,
    lhs: f64,
    rhs: f64,
    fx: f64,
    fy: f64,
}

fn defect_parts(
    f: &FunctionExpr,
    params: &HMParams,
    x: f64,
    y: f64,
    alpha: f64,
) -> Result<DefectParts, EvalError> {
    let combined = alpha * x + params.m * (1.0 - alpha) * y;
    let lhs = f.evaluate(combined)?;
    let fx = f.evaluate(x)?;
    let fy = f.evaluate(y)?;
    let h_alpha = params.h.evaluate(alpha)?;
    let h_complement = params.h.evaluate(1.0 - alpha)?;
    let rhs = h_alpha * fx + params.m * h_complement * fy;
    Ok(DefectParts {
        combined,
        lhs,
        rhs,
        fx,
        fy,
    })
}

fn oriented(direction: Direction, raw_defect: f64) -> f64 {
    match direction {
        Direction::Convex => raw_defect,
        Direction::Concave => -raw_defect,
    }
}

/// A concrete triple at which the tested inequality fails, with both sides
/// evaluated. `gap` is the oriented excess: `lhs − rhs` for the convex
/// direction, `rhs − lhs` for the concave one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ViolationCertificate {
    pub x: f64,
    pub y: f64,
    pub alpha: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    NoViolationFound,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipReport {
    pub verdict: Verdict,
    /// The worst triple found, present exactly when `verdict` is `Violated`.
    pub worst: Option<ViolationCertificate>,
    /// Largest oriented defect seen anywhere in the search, violation or not.
    pub max_defect_seen: f64,
    /// Sampled triples plus refinement evaluations actually spent.
    pub samples_used: u64,
    pub seed: u64,
}

// One stratified sample. The stratum index cycles through an 8×8×8 grid of
// (x, y, α) cells; the position inside the cell comes from a ChaCha stream
// keyed by the item index, so sample i is the same no matter which thread
// draws it.
fn sample_triple(seed: u64, index: u64, b_cap: f64) -> (f64, f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    let u_x: f64 = rng.random();
    let u_y: f64 = rng.random();
    let u_alpha: f64 = rng.random();

    let cells = STRATA_PER_AXIS as f64;
    let sx = index % STRATA_PER_AXIS;
    let sy = (index / STRATA_PER_AXIS) % STRATA_PER_AXIS;
    let sa = (index / (STRATA_PER_AXIS * STRATA_PER_AXIS)) % STRATA_PER_AXIS;

    let x = (sx as f64 + u_x) / cells * b_cap;
    let y = (sy as f64 + u_y) / cells * b_cap;
    let span = 1.0 - 2.0 * ALPHA_MARGIN;
    let alpha = ALPHA_MARGIN + (sa as f64 + u_alpha) / cells * span;
    (x, y, alpha)
}

struct Sample {
    x: f64,
    y: f64,
    alpha: f64,
    combined: f64,
    fx: f64,
    fy: f64,
    f_combined: f64,
    oriented_defect: f64,
}

/// Search for a violation of `(h, m)`-membership within `budget` function
/// probes: 80% on stratified sampling over the whole box, 20% on
/// coordinate-wise golden-section refinement from the most promising
/// starting points. Deterministic in `(seed, budget)`.
pub fn check_membership(
    f: &FunctionExpr,
    params: &HMParams,
    domain: &Domain,
    budget: u64,
    seed: u64,
) -> Result<MembershipReport, ConvexityError> {
    if budget < MIN_BUDGET {
        return Err(ConvexityError::BudgetTooSmall {
            budget,
            min: MIN_BUDGET,
        });
    }
    let b_cap = domain.b_cap;

    // The hypothesis is f ≥ 0 on [0, b_cap]; screen the endpoints first and
    // every sampled point below, rejecting with a distinct error rather than
    // reporting a meaningless verdict.
    for point in [0.0, b_cap] {
        let value = f.evaluate(point)?;
        if value < 0.0 {
            return Err(ConvexityError::NegativeFunctionValue { point, value });
        }
    }

    let phase1 = budget * 4 / 5;
    let outcomes: Vec<Result<Sample, EvalError>> = (0..phase1)
        .into_par_iter()
        .map(|index| {
            let (x, y, alpha) = sample_triple(seed, index, b_cap);
            defect_parts(f, params, x, y, alpha).map(|parts| Sample {
                x,
                y,
                alpha,
                combined: parts.combined,
                fx: parts.fx,
                fy: parts.fy,
                f_combined: parts.lhs,
                oriented_defect: oriented(params.direction, parts.lhs - parts.rhs),
            })
        })
        .collect();

    // Serial scan in index order keeps error reporting deterministic.
    let mut samples = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        let sample = outcome?;
        for (point, value) in [
            (sample.x, sample.fx),
            (sample.y, sample.fy),
            (sample.combined, sample.f_combined),
        ] {
            if value < 0.0 {
                return Err(ConvexityError::NegativeFunctionValue { point, value });
            }
        }
        samples.push(sample);
    }

    // Ranked starting points for refinement: best oriented defect first,
    // index order breaking ties.
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by(|&i, &j| {
        samples[j]
            .oriented_defect
            .partial_cmp(&samples[i].oriented_defect)
            .unwrap()
            .then(i.cmp(&j))
    });

    let mut best = {
        let s = &samples[order[0]];
        (s.x, s.y, s.alpha, s.oriented_defect)
    };

    let phase2 = budget - phase1;
    let per_restart = phase2 / RESTARTS;
    let mut refinement_evals = 0u64;
    for &start_idx in order.iter().take(RESTARTS as usize) {
        let start = &samples[start_idx];
        let (point, value, used) = refine(
            f,
            params,
            b_cap,
            (start.x, start.y, start.alpha),
            start.oriented_defect,
            per_restart,
        )?;
        refinement_evals += used;
        if value > best.3 {
            best = (point.0, point.1, point.2, value);
        }
    }

    let max_defect_seen = best.3;
    let samples_used = phase1 + refinement_evals;

    if max_defect_seen > PASS_MARGIN {
        let parts = defect_parts(f, params, best.0, best.1, best.2)?;
        let gap = oriented(params.direction, parts.lhs - parts.rhs);
        Ok(MembershipReport {
            verdict: Verdict::Violated,
            worst: Some(ViolationCertificate {
                x: best.0,
                y: best.1,
                alpha: best.2,
                lhs: parts.lhs,
                rhs: parts.rhs,
                gap,
            }),
            max_defect_seen,
            samples_used,
            seed,
        })
    } else {
        Ok(MembershipReport {
            verdict: Verdict::NoViolationFound,
            worst: None,
            max_defect_seen,
            samples_used,
            seed,
        })
    }
}

// Coordinate-wise ascent: golden-section maximization along each axis in
// turn until the evaluation allowance runs out or a sweep stops improving.
fn refine(
    f: &FunctionExpr,
    params: &HMParams,
    b_cap: f64,
    start: (f64, f64, f64),
    start_value: f64,
    eval_budget: u64,
) -> Result<((f64, f64, f64), f64, u64), EvalError> {
    let mut current = start;
    let mut current_value = start_value;
    let mut used = 0u64;

    loop {
        let mut improved = false;
        for axis in 0..3 {
            let remaining = eval_budget.saturating_sub(used);
            if remaining < 8 {
                return Ok((current, current_value, used));
            }
            let (lo, hi) = if axis < 2 {
                (0.0, b_cap)
            } else {
                (ALPHA_MARGIN, 1.0 - ALPHA_MARGIN)
            };
            let objective = |v: f64| {
                let (x, y, alpha) = match axis {
                    0 => (v, current.1, current.2),
                    1 => (current.0, v, current.2),
                    _ => (current.0, current.1, v),
                };
                defect(f, params, x, y, alpha).map(|d| oriented(params.direction, d))
            };
            let (v_best, value_best, evals) =
                golden_max(objective, lo, hi, remaining.min(60))?;
            used += evals;
            if value_best > current_value {
                match axis {
                    0 => current.0 = v_best,
                    1 => current.1 = v_best,
                    _ => current.2 = v_best,
                }
                current_value = value_best;
                improved = true;
            }
        }
        if !improved {
            return Ok((current, current_value, used));
        }
    }
}

// Golden-section maximization on [lo, hi], tracking the best evaluated
// point. Unimodality is not assumed — this is a local polish step, with the
// caller keeping whatever start it came from if no improvement shows up.
fn golden_max<F>(mut g: F, lo: f64, hi: f64, max_evals: u64) -> Result<(f64, f64, u64), EvalError>
where
    F: FnMut(f64) -> Result<f64, EvalError>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut a = lo;
    let mut b = hi;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = g(c)?;
    let mut fd = g(d)?;
    let mut evals = 2u64;
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };

    while evals < max_evals && (b - a) > 1e-12 * (hi - lo) {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = g(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = g(d)?;
        }
        evals += 1;
        let (p, v) = if fc >= fd { (c, fc) } else { (d, fd) };
        if v > best.1 {
            best = (p, v);
        }
    }
    Ok((best.0, best.1, evals))
}

/// Outcome of checking that defects behave linearly under pointwise sum and
/// positive scaling, the numerical face of closure of the class under those
/// operations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosureReport {
    pub trials: u64,
    pub lambda: f64,
    /// max over trials of |defect(f+g) − defect(f) − defect(g)|.
    pub max_additivity_discrepancy: f64,
    /// max over trials of |defect(λf) − λ·defect(f)|.
    pub max_scaling_discrepancy: f64,
    /// True when every trial satisfied both identities to 1e-10 relative.
    pub holds: bool,
    pub seed: u64,
}

const CLOSURE_REL_TOL: f64 = 1e-10;

/// Check `defect(f+g) = defect(f) + defect(g)` and `defect(λf) = λ·defect(f)`
/// on `trials` sampled triples. These identities are exact in real
/// arithmetic for any kernel; the check quantifies how well floating point
/// preserves them on these particular expressions.
pub fn verify_closure(
    f: &FunctionExpr,
    g: &FunctionExpr,
    params: &HMParams,
    domain: &Domain,
    lambda: f64,
    trials: u64,
    seed: u64,
) -> Result<ClosureReport, ConvexityError> {
    if trials < 100 {
        return Err(ConvexityError::TooFewTrials { got: trials, min: 100 });
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(ConvexityError::BadLambda { lambda });
    }
    let sum = f
        .try_sum(g)
        .ok_or_else(|| ConvexityError::VariableMismatch {
            left: f.variable().to_string(),
            right: g.variable().to_string(),
        })?;
    let scaled = f.scaled(lambda);

    let mut max_additivity = 0.0f64;
    let mut max_scaling = 0.0f64;
    let mut holds = true;
    for index in 0..trials {
        let (x, y, alpha) = sample_triple(seed, index, domain.b_cap);
        let d_f = defect(f, params, x, y, alpha)?;
        let d_g = defect(g, params, x, y, alpha)?;
        let d_sum = defect(&sum, params, x, y, alpha)?;
        let d_scaled = defect(&scaled, params, x, y, alpha)?;

        let additivity = (d_sum - (d_f + d_g)).abs();
        let additivity_scale = 1.0f64.max(d_f.abs()).max(d_g.abs()).max(d_sum.abs());
        let scaling = (d_scaled - lambda * d_f).abs();
        let scaling_scale = 1.0f64.max((lambda * d_f).abs()).max(d_scaled.abs());

        max_additivity = max_additivity.max(additivity);
        max_scaling = max_scaling.max(scaling);
        if additivity > CLOSURE_REL_TOL * additivity_scale
            || scaling > CLOSURE_REL_TOL * scaling_scale
        {
            holds = false;
        }
    }

    Ok(ClosureReport {
        trials,
        lambda,
        max_additivity_discrepancy: max_additivity,
        max_scaling_discrepancy: max_scaling,
        holds,
        seed,
    })
}

/// Outcome of the kernel-domination check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DominationReport {
    pub samples_used: u64,
    /// max over samples of `defect_h1 − defect_h2`; ≤ 0 means the expected
    /// ordering held everywhere.
    pub max_ordering_gap: f64,
    /// Number of samples where the ordering failed beyond 1e-12.
    pub violations: u64,
    pub seed: u64,
}

const DOMINATION_SLACK: f64 = 1e-12;

/// With `h2 ≤ h1` on (0, 1) and `f ≥ 0`, the defect against the larger
/// kernel can only be smaller: `defect_h1 ≤ defect_h2` pointwise. This is
/// what makes the `h2`-class a subset of the `h1`-class. The hypothesis
/// `h2 ≤ h1` is verified on a 1000-point grid up front (error if it fails),
/// then the defect ordering is checked at `trials` sampled triples.
pub fn compare_kernels(
    h2: &Kernel,
    h1: &Kernel,
    f: &FunctionExpr,
    m: f64,
    domain: &Domain,
    trials: u64,
    seed: u64,
) -> Result<DominationReport, ConvexityError> {
    if !(m.is_finite() && (0.0..=1.0).contains(&m)) {
        return Err(ConvexityError::MOutOfRange { m });
    }
    const GRID: u64 = 1000;
    for j in 1..=GRID {
        let t = j as f64 / (GRID + 1) as f64;
        let v2 = h2.evaluate(t)?;
        let v1 = h1.evaluate(t)?;
        if v2 > v1 + 1e-12 * v1.abs().max(1.0) {
            return Err(ConvexityError::DominationHypothesisFailed {
                t,
                h2_value: v2,
                h1_value: v1,
            });
        }
    }

    let params1 = HMParams::new(h1.clone(), m, Direction::Convex)?;
    let params2 = HMParams::new(h2.clone(), m, Direction::Convex)?;

    let outcomes: Vec<Result<(f64, f64, f64, f64), EvalError>> = (0..trials)
        .into_par_iter()
        .map(|index| {
            let (x, y, alpha) = sample_triple(seed, index, domain.b_cap);
            let fx = f.evaluate(x)?;
            let fy = f.evaluate(y)?;
            let d1 = defect(f, &params1, x, y, alpha)?;
            let d2 = defect(f, &params2, x, y, alpha)?;
            Ok((fx.min(fy), if fx < fy { x } else { y }, d1, d2))
        })
        .collect();

    let mut max_gap = f64::NEG_INFINITY;
    let mut violations = 0u64;
    for outcome in outcomes {
        let (min_value, min_point, d1, d2) = outcome?;
        if min_value < 0.0 {
            return Err(ConvexityError::NegativeFunctionValue {
                point: min_point,
                value: min_value,
            });
        }
        let gap = d1 - d2;
        max_gap = max_gap.max(gap);
        if gap > DOMINATION_SLACK {
            violations += 1;
        }
    }

    Ok(DominationReport {
        samples_used: trials,
        max_ordering_gap: max_gap,
        violations,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::FunctionExpr;

    fn fx(src: &str) -> FunctionExpr {
        FunctionExpr::parse(src, "x").unwrap()
    }

    fn params(h: Kernel, m: f64) -> HMParams {
        HMParams::new(h, m, Direction::Convex).unwrap()
    }

    #[test]
    fn defect_is_zero_for_linear_f_identity_kernel_m1() {
        let f = fx("2 * x + 0");
        let p = params(Kernel::Identity, 1.0);
        for (x, y, alpha) in [(0.0, 1.0, 0.5), (0.3, 0.9, 0.25), (2.0, 5.0, 0.75)] {
            let d = defect(&f, &p, x, y, alpha).unwrap();
            assert!(d.abs() < 1e-12, "linear defect {d} at ({x},{y},{alpha})");
        }
    }

    #[test]
    fn defect_signs_match_convexity() {
        let p = params(Kernel::Identity, 1.0);
        // x² is convex: defect ≤ 0. sqrt is concave: defect ≥ 0 somewhere.
        let square = fx("x^2");
        assert!(defect(&square, &p, 0.0, 1.0, 0.5).unwrap() <= 0.0);
        let root = fx("sqrt(x)");
        assert!(defect(&root, &p, 0.0, 1.0, 0.25).unwrap() > 0.0);
    }

    #[test]
    fn membership_accepts_convex_function_with_identity_kernel() {
        let f = fx("x^2");
        let p = params(Kernel::Identity, 1.0);
        let domain = Domain::new(1.0).unwrap();
        let report = check_membership(&f, &p, &domain, 20_000, 7).unwrap();
        assert_eq!(report.verdict, Verdict::NoViolationFound);
        assert!(report.worst.is_none());
        assert!(report.max_defect_seen <= PASS_MARGIN);
    }

    #[test]
    fn membership_finds_concavity_violation() {
        // sqrt against the identity kernel: max defect is 1/4, attained as
        // x → 0, y = 1, α = 3/4 (or the mirrored corner).
        let f = fx("sqrt(x)");
        let p = params(Kernel::Identity, 1.0);
        let domain = Domain::new(1.0).unwrap();
        let report = check_membership(&f, &p, &domain, 100_000, 42).unwrap();
        assert_eq!(report.verdict, Verdict::Violated);
        let worst = report.worst.unwrap();
        assert!(worst.gap > 0.24, "expected near-maximal gap, got {}", worst.gap);
        assert!(worst.gap <= 0.25 + 1e-9);
        // The certificate recomputes: gap really is lhs − rhs at the triple.
        let recomputed = defect(&f, &p, worst.x, worst.y, worst.alpha).unwrap();
        assert_eq!(worst.gap.to_bits(), recomputed.to_bits());
        assert_eq!(worst.lhs - worst.rhs, worst.gap);
    }

    #[test]
    fn membership_respects_direction() {
        // sqrt is perfectly at home in the concave direction.
        let f = fx("sqrt(x)");
        let p = HMParams::new(Kernel::Identity, 1.0, Direction::Concave).unwrap();
        let domain = Domain::new(1.0).unwrap();
        let report = check_membership(&f, &p, &domain, 20_000, 3).unwrap();
        assert_eq!(report.verdict, Verdict::NoViolationFound);

        // And x² is violated there.
        let f = fx("x^2");
        let report = check_membership(&f, &p, &domain, 20_000, 3).unwrap();
        assert_eq!(report.verdict, Verdict::Violated);
    }

    #[test]
    fn membership_flags_kernel_mismatch() {
        // x² is convex but not (t², 1)-convex: at x = y = 1, α = 1/2 the
        // right side is 2·(1/4)·1 = 1/2 < 1 = f(1). Max defect 1/2.
        let f = fx("x^2");
        let h = Kernel::custom(FunctionExpr::parse("t^2", "t").unwrap()).unwrap();
        let p = params(h, 1.0);
        let domain = Domain::new(1.0).unwrap();
        let report = check_membership(&f, &p, &domain, 50_000, 11).unwrap();
        assert_eq!(report.verdict, Verdict::Violated);
        assert!(report.worst.unwrap().gap > 0.45);
    }

    #[test]
    fn zero_function_is_everywhere_a_member() {
        let f = fx("0");
        let domain = Domain::new(1.0).unwrap();
        for h in [Kernel::Identity, Kernel::One, Kernel::Reciprocal] {
            for m in [0.0, 0.5, 1.0] {
                let p = params(h.clone(), m);
                let report = check_membership(&f, &p, &domain, 2_000, 1).unwrap();
                assert_eq!(report.verdict, Verdict::NoViolationFound);
                assert_eq!(report.max_defect_seen, 0.0);
            }
        }
    }

    #[test]
    fn negative_function_is_rejected_distinctly() {
        let f = fx("x - 0.5");
        let p = params(Kernel::Identity, 1.0);
        let domain = Domain::new(1.0).unwrap();
        match check_membership(&f, &p, &domain, 2_000, 0) {
            Err(ConvexityError::NegativeFunctionValue { point, value }) => {
                assert!(value < 0.0);
                assert!(point < 0.5);
            }
            other => panic!("expected non-negativity rejection, got {other:?}"),
        }
    }

    #[test]
    fn budget_floor_is_enforced() {
        let f = fx("x^2");
        let p = params(Kernel::Identity, 1.0);
        let domain = Domain::new(1.0).unwrap();
        assert!(matches!(
            check_membership(&f, &p, &domain, 999, 0),
            Err(ConvexityError::BudgetTooSmall { .. })
        ));
    }

    #[test]
    fn same_seed_same_report() {
        let f = fx("sqrt(x)");
        let p = params(Kernel::Identity, 1.0);
        let domain = Domain::new(1.0).unwrap();
        let r1 = check_membership(&f, &p, &domain, 10_000, 99).unwrap();
        let r2 = check_membership(&f, &p, &domain, 10_000, 99).unwrap();
        assert_eq!(r1, r2);
        let r3 = check_membership(&f, &p, &domain, 10_000, 100).unwrap();
        // A different seed may land elsewhere; the verdict must still agree.
        assert_eq!(r1.verdict, r3.verdict);
    }

    #[test]
    fn closure_identities_hold_for_smooth_pairs() {
        let f = fx("x^2 + 1");
        let g = fx("exp(x)");
        let p = params(Kernel::power(0.5).unwrap(), 0.5);
        let domain = Domain::new(2.0).unwrap();
        let report = verify_closure(&f, &g, &p, &domain, 3.0, 200, 5).unwrap();
        assert!(report.holds, "closure drifted: {report:?}");
        assert!(report.max_additivity_discrepancy < 1e-9);
        assert!(report.max_scaling_discrepancy < 1e-9);
    }

    #[test]
    fn closure_validates_inputs() {
        let f = fx("x");
        let g = fx("x^2");
        let p = params(Kernel::Identity, 1.0);
        let domain = Domain::new(1.0).unwrap();
        assert!(matches!(
            verify_closure(&f, &g, &p, &domain, 2.0, 50, 0),
            Err(ConvexityError::TooFewTrials { .. })
        ));
        assert!(matches!(
            verify_closure(&f, &g, &p, &domain, 0.0, 100, 0),
            Err(ConvexityError::BadLambda { .. })
        ));
        let t = FunctionExpr::parse("t", "t").unwrap();
        assert!(matches!(
            verify_closure(&f, &t, &p, &domain, 2.0, 100, 0),
            Err(ConvexityError::VariableMismatch { .. })
        ));
    }

    #[test]
    fn kernel_domination_ordering_holds() {
        // t ≤ √t on (0, 1): the identity class sits inside the power:0.5
        // class, so identity defects dominate power defects from below.
        let h2 = Kernel::Identity;
        let h1 = Kernel::power(0.5).unwrap();
        let f = fx("x^2");
        let domain = Domain::new(1.0).unwrap();
        let report = compare_kernels(&h2, &h1, &f, 1.0, &domain, 2_000, 13).unwrap();
        assert_eq!(report.violations, 0);
        assert!(report.max_ordering_gap <= DOMINATION_SLACK);
    }

    #[test]
    fn kernel_domination_hypothesis_is_screened() {
        // √t is NOT ≤ t on (0, 1), so swapping the arguments must error.
        let report = compare_kernels(
            &Kernel::power(0.5).unwrap(),
            &Kernel::Identity,
            &fx("x^2"),
            1.0,
            &Domain::new(1.0).unwrap(),
            100,
            0,
        );
        assert!(matches!(
            report,
            Err(ConvexityError::DominationHypothesisFailed { .. })
        ));
    }

    #[test]
    fn stratified_sampler_is_deterministic_and_in_bounds() {
        for index in 0..2_000 {
            let (x, y, alpha) = sample_triple(17, index, 2.5);
            let (x2, y2, alpha2) = sample_triple(17, index, 2.5);
            assert_eq!((x.to_bits(), y.to_bits(), alpha.to_bits()),
                       (x2.to_bits(), y2.to_bits(), alpha2.to_bits()));
            assert!((0.0..=2.5).contains(&x));
            assert!((0.0..=2.5).contains(&y));
            assert!(alpha > 0.0 && alpha < 1.0);
        }
        // Different seeds decorrelate.
        let a = sample_triple(1, 0, 1.0);
        let b = sample_triple(2, 0, 1.0);
        assert_ne!(a, b);
    }
}
