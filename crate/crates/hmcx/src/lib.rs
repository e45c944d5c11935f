//! Numerical auditing of generalized convexity.
//!
//! The crate tests whether a function behaves like a member of an
//! `(h, m)`-convexity class on a bounded domain, evaluates the Hadamard-type
//! inequality chains that hold for such classes, and verifies that the general
//! chains collapse onto their classical special cases under parameter
//! substitution.
//!
//! Everything works pointwise on parsed expressions: there is no symbolic
//! algebra, only deterministic sampling and adaptive quadrature with explicit
//! error accounting. Results either come with a numeric certificate (a
//! concrete violating triple, a signed slack per inequality pair, a scaled
//! discrepancy per reduction) or with an error naming exactly which input
//! assumption failed.

pub mod cli;
pub mod convexity;
pub mod expr;
pub mod inequalities;
pub mod quadrature;
pub mod reductions;

pub use convexity::{
    check_membership, compare_kernels, defect, verify_closure, Direction, Domain, HMParams,
    MembershipReport, Verdict, ViolationCertificate,
};
pub use expr::{EvalError, FunctionExpr, Kernel};
pub use inequalities::{audit, AuditSpec, InequalityId, InequalityReport, ToleranceSpec};
pub use quadrature::{integrate, kernel_moments, KernelMoments, QuadResult};
pub use reductions::{catalog, verify_reduction, ReductionInput, ReductionReport};
