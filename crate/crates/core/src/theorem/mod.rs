//! Executable form of the refined telescoping-sum argument.
//!
//! Given a trace `{x_k, f_k, omega_k}` the auditor checks the three
//! hypotheses (no movement once `omega_k = 0`, sufficient decrease on
//! successful iterations, growth of `k` in terms of the successful count),
//! then evaluates the refined first-hit bound
//!
//! ```text
//! k(eps) <= kappa_a max[1, 2 (f_{l(k(eps)-1)} - f_{k(eps)}) / (kappa_d eps^beta)]
//!           + kappa_b |ln eps| + kappa_a + kappa_c
//! ```
//!
//! where `l(k)` is the median anchor of the successful indices up to `k`.
//! Because the numerator is a tail of a convergent telescoping sum it tends
//! to zero, which turns the classical `O(eps^-beta)` count into
//! `o(eps^-beta)`. On a finite trace this shows up as a shrinking
//! [`limdiff_trend`] and a fitted log-log exponent below `beta`.
//!
//! Index sets `S_k` are read as `S ∩ {0, ..., k}` (inclusive). Under the
//! exclusive reading `|S_k|` changes by at most one, which `kappa_c` absorbs.

mod fit;
mod registry;

use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::trace::OptimizationTrace;
pub use crate::trace::TheoremConstants;
pub use fit::{fit_complexity_exponent, ExponentFit};
pub use registry::{exponent_registry, lookup_exponent, ComplexityClass, ExponentFormula};

/// Relative slack for every inequality check.
pub const REL_SLACK: f64 = 1e-12;
/// Absolute slack floor for values near zero.
pub const ABS_SLACK: f64 = 1e-30;

#[derive(Debug, Error, PartialEq)]
pub enum TheoremError {
    #[error("index {k} outside trace of length {len}")]
    IndexOutOfRange { k: usize, len: usize },
    #[error("median anchor needs at least two successful indices, found {0}")]
    TooFewSuccesses(usize),
    #[error("no record reaches omega <= {0}")]
    NotReached(f64),
    #[error("k(eps) = 0 for eps = {0}; the bound needs k(eps) >= 1")]
    HitAtStart(f64),
    #[error("trace is empty")]
    EmptyTrace,
    #[error("epsilon grid: {0}")]
    Grid(String),
    #[error("exponent fit: {0}")]
    Fit(String),
}

fn slack(a: f64, b: f64) -> f64 {
    (REL_SLACK * a.abs().max(b.abs())).max(ABS_SLACK)
}

/// `lhs <= rhs` up to the audit slack.
pub fn approx_le(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + slack(lhs, rhs)
}

// ---------------------------------------------------------------------------
// Grids

/// Strictly decreasing tolerances `eps_1 > eps_2 > ... > 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonGrid {
    values: Vec<f64>,
}

impl EpsilonGrid {
    pub fn new(values: Vec<f64>) -> Result<Self, TheoremError> {
        if values.is_empty() {
            return Err(TheoremError::Grid("empty grid".into()));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(TheoremError::Grid(format!("{v} is not a positive real")));
        }
        if let Some(w) = values.windows(2).find(|w| w[1] >= w[0]) {
            return Err(TheoremError::Grid(format!(
                "values must strictly decrease ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Self { values })
    }

    /// `n` points `10^a, ..., 10^b` equispaced in the exponent.
    pub fn logspace(a: f64, b: f64, n: usize) -> Result<Self, TheoremError> {
        match n {
            0 => Err(TheoremError::Grid("logspace needs n >= 1".into())),
            1 => Self::new(vec![10f64.powf(a)]),
            _ => Self::new(
                (0..n)
                    .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
                    .collect(),
            ),
        }
    }

    /// Parses `1e-1,1e-2,...` or `logspace:a:b:n`.
    pub fn parse(text: &str) -> Result<Self, TheoremError> {
        let text = text.trim();
        if let Some(rest) = text.strip_prefix("logspace:") {
            let parts: Vec<&str> = rest.split(':').collect();
            let [a, b, n] = parts.as_slice() else {
                return Err(TheoremError::Grid(format!("bad logspace text {text:?}")));
            };
            let bad = |_| TheoremError::Grid(format!("bad logspace text {text:?}"));
            return Self::logspace(
                a.parse().map_err(bad)?,
                b.parse().map_err(bad)?,
                n.parse()
                    .map_err(|_| TheoremError::Grid(format!("bad logspace text {text:?}")))?,
            );
        }
        let values = text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| TheoremError::Grid(format!("{s:?}: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

// ---------------------------------------------------------------------------
// Index sets

/// Indices flagged successful, ascending.
pub fn success_set(trace: &OptimizationTrace) -> Vec<usize> {
    trace
        .records()
        .iter()
        .filter(|r| r.successful)
        .map(|r| r.k)
        .collect()
}

/// `S ∩ {0, ..., k}`.
pub fn success_set_upto(trace: &OptimizationTrace, k: usize) -> Result<Vec<usize>, TheoremError> {
    if k >= trace.len() {
        return Err(TheoremError::IndexOutOfRange {
            k,
            len: trace.len(),
        });
    }
    Ok(trace.records()[..=k]
        .iter()
        .filter(|r| r.successful)
        .map(|r| r.k)
        .collect())
}

/// `k(eps)`: the first index whose optimality measure is at most `eps`.
pub fn first_hit_index(trace: &OptimizationTrace, eps: f64) -> Option<usize> {
    trace.records().iter().position(|r| r.omega <= eps)
}

/// Largest member of `indices` not exceeding their median.
///
/// `indices` must be strictly increasing. For an even count the median is
/// the mean of the two middle members, so the anchor is always the lower
/// middle element.
pub fn median_anchor_of(indices: &[usize]) -> Result<usize, TheoremError> {
    if indices.len() < 2 {
        return Err(TheoremError::TooFewSuccesses(indices.len()));
    }
    Ok(indices[(indices.len() - 1) / 2])
}

/// `l(k)` computed from the successful indices up to `k`.
pub fn median_anchor(trace: &OptimizationTrace, k: usize) -> Result<usize, TheoremError> {
    median_anchor_of(&success_set_upto(trace, k)?)
}

// ---------------------------------------------------------------------------
// Hypotheses

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub ok: bool,
    pub first_violation: Option<usize>,
}

impl CheckOutcome {
    fn from_violation(first_violation: Option<usize>) -> Self {
        Self {
            ok: first_violation.is_none(),
            first_violation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecreaseOutcome {
    pub ok: bool,
    pub first_violation: Option<usize>,
    /// Smallest observed `(f_k - f_{k+1}) / omega_k^beta` over successful
    /// iterations with a successor; the sharpest certifiable `kappa_d`.
    pub kappa_d_hat: Option<f64>,
}

/// No successful iteration starts from an exact critical point.
pub fn check_kstop(trace: &OptimizationTrace) -> CheckOutcome {
    CheckOutcome::from_violation(
        trace
            .records()
            .iter()
            .position(|r| r.omega == 0.0 && r.successful),
    )
}

/// `f_k - f_{k+1} >= kappa_d omega_k^beta` on every successful `k` that has a
/// successor.
pub fn check_sufficient_decrease(
    trace: &OptimizationTrace,
    constants: &TheoremConstants,
) -> DecreaseOutcome {
    let beta = constants.beta();
    let mut first_violation = None;
    let mut kappa_d_hat: Option<f64> = None;
    for pair in trace.records().windows(2) {
        let (cur, next) = (&pair[0], &pair[1]);
        if !cur.successful {
            continue;
        }
        let decrease = cur.f - next.f;
        let scale = cur.omega.powf(beta);
        let required = constants.kappa_d() * scale;
        let tol = (REL_SLACK * cur.f.abs()).max(ABS_SLACK);
        if decrease < required - tol && first_violation.is_none() {
            first_violation = Some(cur.k);
        }
        if scale > 0.0 {
            let ratio = decrease / scale;
            kappa_d_hat = Some(kappa_d_hat.map_or(ratio, |m| m.min(ratio)));
        }
    }
    DecreaseOutcome {
        ok: first_violation.is_none(),
        first_violation,
        kappa_d_hat,
    }
}

/// `k <= kappa_a |S_k| + kappa_b |ln omega_k| + kappa_c` wherever `omega_k > 0`.
pub fn check_growth(trace: &OptimizationTrace, constants: &TheoremConstants) -> CheckOutcome {
    let mut successes = 0usize;
    let mut violation = None;
    for r in trace.records() {
        if r.successful {
            successes += 1;
        }
        if r.omega > 0.0 {
            let rhs = constants.kappa_a() * successes as f64
                + constants.kappa_b() * r.omega.ln().abs()
                + constants.kappa_c();
            if !approx_le(r.k as f64, rhs) {
                violation = Some(r.k);
                break;
            }
        }
    }
    CheckOutcome::from_violation(violation)
}

// ---------------------------------------------------------------------------
// Bounds

/// Quantities entering the refined bound at one tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Anchor {
    pub k_eps: usize,
    /// `l(k(eps) - 1)`.
    pub ell: usize,
    /// `|S_{k(eps)-1}|`.
    pub successes: usize,
    /// `f_{l(k(eps)-1)} - f_{k(eps)}`.
    pub f_gap: f64,
}

pub fn anchor_at(trace: &OptimizationTrace, eps: f64) -> Result<Anchor, TheoremError> {
    let k_eps = first_hit_index(trace, eps).ok_or(TheoremError::NotReached(eps))?;
    if k_eps == 0 {
        return Err(TheoremError::HitAtStart(eps));
    }
    let s = success_set_upto(trace, k_eps - 1)?;
    let ell = median_anchor_of(&s)?;
    Ok(Anchor {
        k_eps,
        ell,
        successes: s.len(),
        f_gap: trace.f(ell) - trace.f(k_eps),
    })
}

/// Right-hand side of the refined bound for a given tail decrease `f_gap`.
pub fn refined_bound_value(constants: &TheoremConstants, f_gap: f64, eps: f64) -> f64 {
    let ka = constants.kappa_a();
    let ratio = 2.0 * f_gap / (constants.kappa_d() * eps.powf(constants.beta()));
    ka * ratio.max(1.0) + constants.kappa_b() * eps.ln().abs() + ka + constants.kappa_c()
}

/// The refined upper bound on `k(eps)` evaluated on the trace.
pub fn refined_bound_rhs(
    trace: &OptimizationTrace,
    constants: &TheoremConstants,
    eps: f64,
) -> Result<f64, TheoremError> {
    let a = anchor_at(trace, eps)?;
    Ok(refined_bound_value(constants, a.f_gap, eps))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CardinalityOutcome {
    pub ok: bool,
    /// `|S_{k(eps)-1}|`.
    pub lhs: usize,
    /// `2 (f_{l(k(eps)-1)} - f_{k(eps)}) / (kappa_d eps^beta)`.
    pub rhs: f64,
}

/// Bound on the number of successful iterations before `k(eps)`.
pub fn check_cardinality_bound(
    trace: &OptimizationTrace,
    constants: &TheoremConstants,
    eps: f64,
) -> Result<CardinalityOutcome, TheoremError> {
    let a = anchor_at(trace, eps)?;
    let rhs = 2.0 * a.f_gap / (constants.kappa_d() * eps.powf(constants.beta()));
    Ok(CardinalityOutcome {
        ok: approx_le(a.successes as f64, rhs),
        lhs: a.successes,
        rhs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimdiffEntry {
    pub eps: f64,
    /// `f_{l(k(eps)-1)} - f_{k(eps)-1}`, absent when the anchor is undefined.
    pub gap: Option<f64>,
}

/// Tail decreases `f_{l(k(eps)-1)} - f_{k(eps)-1}` along the grid. These
/// should shrink towards zero as `eps` does.
pub fn limdiff_trend(trace: &OptimizationTrace, grid: &EpsilonGrid) -> Vec<LimdiffEntry> {
    grid.values()
        .iter()
        .map(|&eps| LimdiffEntry {
            eps,
            gap: anchor_at(trace, eps)
                .ok()
                .map(|a| trace.f(a.ell) - trace.f(a.k_eps - 1)),
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Audit

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KEpsRow {
    pub eps: f64,
    pub k_eps: Option<usize>,
    pub ell: Option<usize>,
    pub f_gap: Option<f64>,
    pub bound_rhs: Option<f64>,
    pub bound_ok: Option<bool>,
    pub card_lhs: Option<usize>,
    pub card_rhs: Option<f64>,
    pub card_ok: Option<bool>,
    /// Why the bound columns are empty, if they are.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub algorithm: String,
    pub problem: String,
    pub constants: TheoremConstants,
    pub kstop_ok: bool,
    pub kstop_violation: Option<usize>,
    pub succ_ok: bool,
    pub succ_violation: Option<usize>,
    pub growth_ok: bool,
    pub growth_violation: Option<usize>,
    pub kappa_d_hat: Option<f64>,
    pub k_eps_table: Vec<KEpsRow>,
    pub fitted_exponent: Option<ExponentFit>,
    pub fit_note: Option<String>,
    pub limdiff_trend: Vec<LimdiffEntry>,
}

impl AuditReport {
    pub fn hypotheses_ok(&self) -> bool {
        self.kstop_ok && self.succ_ok && self.growth_ok
    }

    /// Every evaluable grid point satisfies both bounds. Grid points where
    /// the bound is undefined (not reached, `k(eps) = 0`, fewer than two
    /// successes) are noted but do not count as failures.
    pub fn bounds_ok(&self) -> bool {
        self.k_eps_table
            .iter()
            .all(|r| r.bound_ok != Some(false) && r.card_ok != Some(false))
    }

    pub fn passed(&self) -> bool {
        self.hypotheses_ok() && self.bounds_ok()
    }

    /// `(eps, k(eps))` pairs with `k(eps) >= 1`.
    pub fn k_eps_pairs(&self) -> Vec<(f64, usize)> {
        self.k_eps_table
            .iter()
            .filter_map(|r| r.k_eps.filter(|&k| k > 0).map(|k| (r.eps, k)))
            .collect()
    }

    /// CSV `eps,k_eps,ell,f_gap,bound_rhs,card_lhs,card_rhs`; absent values
    /// are empty fields.
    pub fn write_k_eps_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "eps",
            "k_eps",
            "ell",
            "f_gap",
            "bound_rhs",
            "card_lhs",
            "card_rhs",
        ])?;
        fn opt<T: ToString>(v: Option<T>) -> String {
            v.map(|v| v.to_string()).unwrap_or_default()
        }
        for r in &self.k_eps_table {
            w.write_record([
                r.eps.to_string(),
                opt(r.k_eps),
                opt(r.ell),
                opt(r.f_gap),
                opt(r.bound_rhs),
                opt(r.card_lhs),
                opt(r.card_rhs),
            ])?;
        }
        w.flush()
    }
}

/// Runs every check on one trace. Hypothesis failures are recorded rather
/// than aborting, so the `k(eps)` table is always produced.
pub fn audit(
    trace: &OptimizationTrace,
    constants: &TheoremConstants,
    grid: &EpsilonGrid,
) -> Result<AuditReport, TheoremError> {
    if trace.is_empty() {
        return Err(TheoremError::EmptyTrace);
    }
    let kstop = check_kstop(trace);
    let succ = check_sufficient_decrease(trace, constants);
    let growth = check_growth(trace, constants);

    let k_eps_table: Vec<KEpsRow> = grid
        .values()
        .iter()
        .map(|&eps| {
            let k_eps = first_hit_index(trace, eps);
            let mut row = KEpsRow {
                eps,
                k_eps,
                ell: None,
                f_gap: None,
                bound_rhs: None,
                bound_ok: None,
                card_lhs: None,
                card_rhs: None,
                card_ok: None,
                note: None,
            };
            match anchor_at(trace, eps) {
                Ok(a) => {
                    let rhs = refined_bound_value(constants, a.f_gap, eps);
                    let card_rhs =
                        2.0 * a.f_gap / (constants.kappa_d() * eps.powf(constants.beta()));
                    row.ell = Some(a.ell);
                    row.f_gap = Some(a.f_gap);
                    row.bound_rhs = Some(rhs);
                    row.bound_ok = Some(approx_le(a.k_eps as f64, rhs));
                    row.card_lhs = Some(a.successes);
                    row.card_rhs = Some(card_rhs);
                    row.card_ok = Some(approx_le(a.successes as f64, card_rhs));
                }
                Err(e) => row.note = Some(e.to_string()),
            }
            row
        })
        .collect();

    let pairs: Vec<(f64, f64)> = k_eps_table
        .iter()
        .filter_map(|r| r.k_eps.filter(|&k| k > 0).map(|k| (r.eps, k as f64)))
        .collect();
    let (fitted_exponent, fit_note) = match fit_complexity_exponent(&pairs) {
        Ok(fit) => (Some(fit), None),
        Err(e) => (None, Some(e.to_string())),
    };

    Ok(AuditReport {
        algorithm: trace.meta().algorithm.clone(),
        problem: trace.meta().problem.clone(),
        constants: *constants,
        kstop_ok: kstop.ok,
        kstop_violation: kstop.first_violation,
        succ_ok: succ.ok,
        succ_violation: succ.first_violation,
        growth_ok: growth.ok,
        growth_violation: growth.first_violation,
        kappa_d_hat: succ.kappa_d_hat,
        k_eps_table,
        fitted_exponent,
        fit_note,
        limdiff_trend: limdiff_trend(trace, grid),
    })
}
