//! Audits optimizer iteration histories against the refined
//! telescoping-sum complexity bound, and builds the univariate piecewise
//! cubic on which steepest descent converges at exactly the predicted
//! `o(eps^-2)` rate.
//!
//! * [`trace`]: iteration records and the `.trc` file format.
//! * [`theorem`]: hypothesis checks, `k(eps)`, refined bounds, exponent fits.
//! * [`optimizers`]: instrumented linesearch, trust-region, cubic
//!   regularization and direct-search methods plus test problems.
//! * [`hard_instance`]: the slow-convergence Hermite construction and the
//!   Riemann zeta function it starts from.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod hard_instance;
pub mod optimizers;
pub mod summation;
pub mod theorem;
pub mod trace;

#[cfg(test)]
mod test_support;

pub use hard_instance::{HardInstance, HardInstanceParams};
pub use optimizers::{Algorithm, Problem, RunOutcome, RunParams};
pub use theorem::{audit, AuditReport, EpsilonGrid};
pub use trace::{
    load_trace, save_trace, IterationRecord, OptimizationTrace, TheoremConstants, TraceMeta,
};
