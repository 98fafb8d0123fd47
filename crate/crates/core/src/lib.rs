//! Hermite–Hadamard type error bounds for functions whose derivatives are
//! s-convex (or s-concave), certified composite quadrature, the classical
//! two-argument means, and an audit engine that checks every bound against a
//! high-accuracy quadrature oracle.
//!
//! The modules mirror the layers of the library:
//!
//! * [`fnmodel`] – catalog of functions with closed-form derivatives and a
//!   lattice checker for s-convexity / s-concavity.
//! * [`special`] – log-Gamma, Euler Beta and the Jagers sandwich for the
//!   midpoint constant of s-convex functions.
//! * [`means`] – arithmetic, geometric, harmonic, logarithmic, identric and
//!   p-logarithmic means.
//! * [`quadrature`] – reference integrator, composite midpoint/trapezoid rules
//!   and their a-priori error certificates.
//! * [`hhbounds`] – the n-th order identity residual and the bound family.
//! * [`audit`] – case grids, verdicts and summaries.

pub mod audit;
pub mod error;
pub mod fnmodel;
pub mod hhbounds;
pub mod means;
pub mod quadrature;
pub mod special;

pub use audit::{
    audit_all, audit_claim, audit_summary, evaluate_case, AuditCase, AuditRecord, AuditSummary, CasePayload, ClaimId,
    ClaimSummary, GridSize, GridSpec, Variant, Verdict,
};
pub use error::{Error, Result};
pub use fnmodel::{
    catalog_get, check_concavity, check_s_convexity, ConvexityReport, DifferentiableFunction,
    Domain, FnSpec, Interval, Witness,
};
pub use hhbounds::{BoundInput, BoundResult, Conjugate, Hypothesis, TheoremId};
pub use means::{MeanKind, MeanValue, PositivePair};
pub use quadrature::{Partition, QuadratureResult, Rule, StudyRow};
pub use special::{beta, jagers_bounds, log_gamma, JagersBounds};
