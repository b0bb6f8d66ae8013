//! Instrumented first- and second-order methods that emit traces in the
//! form the theorem audit expects: `omega_k = ||grad f(x_k)||_2`, and an
//! iteration is successful exactly when the iterate moves.

mod ar2;
mod armijo;
mod direct_search;
mod problems;
mod subproblem;
mod trust_region;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

pub use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::hard_instance::HardInstanceError;
use crate::theorem::check_sufficient_decrease;
use crate::trace::{ConstantsError, OptimizationTrace, TheoremConstants, TraceError};

pub use ar2::{ar2, Ar2Settings};
pub use armijo::{steepest_descent_armijo, ArmijoSettings};
pub use direct_search::{direct_search, DirectSearchSettings};
pub use problems::{
    as_problem, default_start, problem_by_name, test_problems, HardInstanceObjective, ProblemError,
    Quartic, Rosenbrock, Separable, PROBLEM_NAMES,
};
pub use subproblem::{cubic_step, trust_region_step, SubproblemError, SubproblemStep};
pub use trust_region::{trust_region_first_order, TrustRegionSettings};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("{oracle} returned a non-finite value at {x:?}")]
    NonFinite { oracle: &'static str, x: Vec<f64> },
    #[error("point has dimension {got}, problem expects {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("problem {0} has no Hessian oracle")]
    NoHessian(String),
    #[error(transparent)]
    HardInstance(#[from] HardInstanceError),
}

#[derive(Debug, Error)]
pub enum OptimizerError {
    #[error("invalid run parameters: {0}")]
    Params(String),
    #[error("oracle failure: {0}")]
    Oracle(#[from] OracleError),
    #[error("linesearch failed at iteration {k} after {backtracks} backtracks")]
    Linesearch { k: usize, backtracks: usize },
    #[error("subproblem solver failed at iteration {k}: {source}")]
    Subproblem {
        k: usize,
        #[source]
        source: SubproblemError,
    },
    #[error(transparent)]
    Trace(#[from] TraceError),
}

/// A smooth function with value, gradient and (optionally) Hessian oracles.
///
/// Oracles take `&mut self` because some objectives cache data lazily; they
/// must still be pure functions of `x`.
pub trait Objective {
    fn name(&self) -> &str;
    fn dimension(&self) -> usize;
    fn value(&mut self, x: &[f64]) -> Result<f64, OracleError>;
    fn gradient(&mut self, x: &[f64]) -> Result<Vec<f64>, OracleError>;
    fn has_hessian(&self) -> bool {
        false
    }
    fn hessian(&mut self, _x: &[f64]) -> Result<DMatrix<f64>, OracleError> {
        Err(OracleError::NoHessian(self.name().to_string()))
    }
    /// Whether `f` is known to be bounded below.
    fn bounded_below(&self) -> bool;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EvalCounters {
    pub values: usize,
    pub gradients: usize,
    pub hessians: usize,
    /// Gradient calls made only to record `omega` for derivative-free
    /// methods.
    pub audit_gradients: usize,
}

impl std::ops::Sub for EvalCounters {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        Self {
            values: self.values - rhs.values,
            gradients: self.gradients - rhs.gradients,
            hessians: self.hessians - rhs.hessians,
            audit_gradients: self.audit_gradients - rhs.audit_gradients,
        }
    }
}

/// An objective together with its evaluation counters.
pub struct Problem {
    objective: Box<dyn Objective + Send>,
    counters: EvalCounters,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name())
            .field("dimension", &self.dimension())
            .field("counters", &self.counters)
            .finish()
    }
}

fn finite(oracle: &'static str, x: &[f64], values: &[f64]) -> Result<(), OracleError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(OracleError::NonFinite {
            oracle,
            x: x.to_vec(),
        })
    }
}

impl Problem {
    pub fn new(objective: impl Objective + Send + 'static) -> Self {
        Self {
            objective: Box::new(objective),
            counters: EvalCounters::default(),
        }
    }

    pub fn name(&self) -> &str {
        self.objective.name()
    }

    pub fn dimension(&self) -> usize {
        self.objective.dimension()
    }

    pub fn has_hessian(&self) -> bool {
        self.objective.has_hessian()
    }

    pub fn bounded_below(&self) -> bool {
        self.objective.bounded_below()
    }

    pub fn counters(&self) -> EvalCounters {
        self.counters
    }

    pub fn reset_counters(&mut self) {
        self.counters = EvalCounters::default();
    }

    fn check_dimension(&self, x: &[f64]) -> Result<(), OracleError> {
        let expected = self.dimension();
        if x.len() == expected {
            Ok(())
        } else {
            Err(OracleError::Dimension {
                expected,
                got: x.len(),
            })
        }
    }

    pub fn value(&mut self, x: &[f64]) -> Result<f64, OracleError> {
        self.counters.values += 1;
        self.check_dimension(x)?;
        let v = self.objective.value(x)?;
        finite("value", x, &[v])?;
        Ok(v)
    }

    pub fn gradient(&mut self, x: &[f64]) -> Result<Vec<f64>, OracleError> {
        self.counters.gradients += 1;
        self.raw_gradient(x)
    }

    /// Gradient used only for recording `omega`.
    pub fn audit_gradient(&mut self, x: &[f64]) -> Result<Vec<f64>, OracleError> {
        self.counters.audit_gradients += 1;
        self.raw_gradient(x)
    }

    fn raw_gradient(&mut self, x: &[f64]) -> Result<Vec<f64>, OracleError> {
        self.check_dimension(x)?;
        let g = self.objective.gradient(x)?;
        finite("gradient", x, &g)?;
        Ok(g)
    }

    pub fn hessian(&mut self, x: &[f64]) -> Result<DMatrix<f64>, OracleError> {
        self.counters.hessians += 1;
        self.check_dimension(x)?;
        let h = self.objective.hessian(x)?;
        finite("hessian", x, h.as_slice())?;
        Ok(h)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunParams {
    pub x0: Vec<f64>,
    pub max_iterations: usize,
    /// Stop once `omega_k <= threshold`.
    pub threshold: f64,
    /// Algorithm-specific settings by name; unknown names are rejected.
    pub options: BTreeMap<String, f64>,
}

impl RunParams {
    pub fn new(x0: Vec<f64>, max_iterations: usize, threshold: f64) -> Self {
        Self {
            x0,
            max_iterations,
            threshold,
            options: BTreeMap::new(),
        }
    }

    pub fn with_option(mut self, key: &str, value: f64) -> Self {
        self.options.insert(key.to_string(), value);
        self
    }

    fn validate(&self, problem: &Problem) -> Result<(), OptimizerError> {
        if self.max_iterations < 1 {
            return Err(OptimizerError::Params(
                "max_iterations must be at least 1".into(),
            ));
        }
        if !(self.threshold >= 0.0) {
            return Err(OptimizerError::Params(format!(
                "threshold must be nonnegative, got {}",
                self.threshold
            )));
        }
        if self.x0.len() != problem.dimension() {
            return Err(OptimizerError::Params(format!(
                "x0 has dimension {}, problem {} expects {}",
                self.x0.len(),
                problem.name(),
                problem.dimension()
            )));
        }
        if self.x0.iter().any(|v| !v.is_finite()) {
            return Err(OptimizerError::Params("x0 must be finite".into()));
        }
        Ok(())
    }
}

/// Reads named settings out of an option map, rejecting leftovers.
pub(crate) struct OptionReader<'a> {
    options: &'a BTreeMap<String, f64>,
    used: BTreeSet<&'static str>,
}

impl<'a> OptionReader<'a> {
    pub(crate) fn new(options: &'a BTreeMap<String, f64>) -> Self {
        Self {
            options,
            used: BTreeSet::new(),
        }
    }

    pub(crate) fn get(&mut self, key: &'static str, default: f64) -> f64 {
        self.used.insert(key);
        self.options.get(key).copied().unwrap_or(default)
    }

    pub(crate) fn finish(self) -> Result<(), OptimizerError> {
        let unknown: Vec<&str> = self
            .options
            .keys()
            .map(String::as_str)
            .filter(|k| !self.used.contains(k))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            let valid: Vec<&str> = self.used.iter().copied().collect();
            Err(OptimizerError::Params(format!(
                "unknown option(s) {}; valid: {}",
                unknown.join(", "),
                valid.join(", ")
            )))
        }
    }
}

pub(crate) fn require(ok: bool, what: &str) -> Result<(), OptimizerError> {
    if ok {
        Ok(())
    } else {
        Err(OptimizerError::Params(what.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Converged,
    MaxIterations,
    /// The step scale fell below what can still move the iterate.
    Stalled,
}

/// Per-iteration diagnostics, one entry per attempted step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepInfo {
    pub k: usize,
    /// Stepsize, radius, regularization weight or mesh size used.
    pub scale: f64,
    /// Decrease the acceptance test required (`c t ||g||^2`, `eta1` times the
    /// model decrease, or `c alpha^2`).
    pub required: f64,
    /// `f(x_k) - f(trial)`.
    pub actual: f64,
    pub accepted: bool,
    pub backtracks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub algorithm: String,
    pub problem: String,
    pub final_f: f64,
    pub final_omega: f64,
    pub iterations: usize,
    pub successful: usize,
    pub counters: EvalCounters,
    pub status: StopReason,
    pub backtracks: usize,
    pub settings: BTreeMap<String, f64>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trace: OptimizationTrace,
    pub summary: RunSummary,
    pub steps: Vec<StepInfo>,
    /// Step scale in force at each trace record.
    pub scales: Vec<f64>,
}

/// Euclidean norm; exactly `|v_0|` in one dimension.
pub(crate) fn norm(v: &[f64]) -> f64 {
    match v {
        [a] => a.abs(),
        _ => v.iter().map(|a| a * a).sum::<f64>().sqrt(),
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Shared bookkeeping for the four methods.
pub(crate) struct Recorder {
    builder: crate::trace::TraceBuilder,
    steps: Vec<StepInfo>,
    scales: Vec<f64>,
    start: EvalCounters,
}

impl Recorder {
    /// `start` is the counter state before the run's first oracle call.
    pub(crate) fn new(start: EvalCounters, x: &[f64], f: f64, omega: f64, scale: f64) -> Self {
        let mut r = Self {
            start,
            builder: crate::trace::TraceBuilder::new(),
            steps: Vec::new(),
            scales: Vec::new(),
        };
        r.record(x, f, omega, scale);
        r
    }

    pub(crate) fn record(&mut self, x: &[f64], f: f64, omega: f64, scale: f64) {
        self.builder.push(x, f, omega);
        self.scales.push(scale);
    }

    pub(crate) fn step(&mut self, info: StepInfo) {
        self.steps.push(info);
    }

    pub(crate) fn iterations(&self) -> usize {
        self.builder.len() - 1
    }

    pub(crate) fn finish(
        self,
        algorithm: Algorithm,
        problem: &Problem,
        status: StopReason,
        settings: BTreeMap<String, f64>,
    ) -> Result<RunOutcome, OptimizerError> {
        let mut params: BTreeMap<String, String> = settings
            .iter()
            .map(|(k, v)| (k.clone(), v.to_string()))
            .collect();
        params.insert("beta".into(), algorithm.beta().to_string());
        let meta = crate::trace::TraceMeta {
            algorithm: algorithm.name().to_string(),
            problem: problem.name().to_string(),
            params,
            measure: "gradient-norm".into(),
        };
        let trace = self.builder.finish(meta)?;
        let last = trace.last().expect("initial record");
        let summary = RunSummary {
            algorithm: algorithm.name().to_string(),
            problem: problem.name().to_string(),
            final_f: last.f,
            final_omega: last.omega,
            iterations: trace.len() - 1,
            successful: trace.records().iter().filter(|r| r.successful).count(),
            counters: problem.counters() - self.start,
            status,
            backtracks: self.steps.iter().map(|s| s.backtracks).sum(),
            settings,
        };
        Ok(RunOutcome {
            trace,
            summary,
            steps: self.steps,
            scales: self.scales,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Algorithm {
    SteepestDescent,
    TrustRegion,
    Ar2,
    DirectSearch,
}

pub const ALGORITHM_NAMES: [&str; 4] = ["sd", "tr", "ar2", "ds"];

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown algorithm {0:?}; valid names: sd, tr, ar2, ds")]
pub struct UnknownAlgorithm(pub String);

impl FromStr for Algorithm {
    type Err = UnknownAlgorithm;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sd" | "steepest-descent" => Ok(Self::SteepestDescent),
            "tr" | "trust-region" => Ok(Self::TrustRegion),
            "ar2" => Ok(Self::Ar2),
            "ds" | "direct-search" => Ok(Self::DirectSearch),
            _ => Err(UnknownAlgorithm(s.to_string())),
        }
    }
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Self::SteepestDescent,
        Self::TrustRegion,
        Self::Ar2,
        Self::DirectSearch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::SteepestDescent => "sd",
            Self::TrustRegion => "tr",
            Self::Ar2 => "ar2",
            Self::DirectSearch => "ds",
        }
    }

    /// Family name in the exponent registry.
    pub fn family(self) -> &'static str {
        match self {
            Self::SteepestDescent => "steepest-descent",
            Self::TrustRegion => "trust-region",
            Self::Ar2 => "AR2",
            Self::DirectSearch => "direct-search",
        }
    }

    /// Exponent of `omega` in the sufficient-decrease condition.
    pub fn beta(self) -> f64 {
        match self {
            Self::Ar2 => 1.5,
            _ => 2.0,
        }
    }

    pub fn run(
        self,
        problem: &mut Problem,
        params: &RunParams,
    ) -> Result<RunOutcome, OptimizerError> {
        match self {
            Self::SteepestDescent => steepest_descent_armijo(problem, params),
            Self::TrustRegion => trust_region_first_order(problem, params),
            Self::Ar2 => ar2(problem, params),
            Self::DirectSearch => direct_search(problem, params),
        }
    }
}

/// Growth constants `(kappa_a, kappa_b, kappa_c)` for a finished run.
///
/// Steepest descent succeeds on every iteration, so `k <= |S_k|`.
///
/// Trust region and direct search change their scale `r` (radius or mesh)
/// by at most `gamma_inc` on success and exactly `gamma_dec` on failure, so
/// after `s` successes and `u` failures `r_k <= r_0 gamma_inc^s gamma_dec^u`,
/// which gives
///
/// ```text
/// k <= (1 + ln gamma_inc / ln(1/gamma_dec)) |S_k| + ln(r_0 / r_k) / ln(1/gamma_dec).
/// ```
///
/// `ln(r_0 / r_k)` is then split as `|ln omega_k| + ln(r_0 min(1, omega_k) / r_k)`
/// and `kappa_c` is the largest second term seen in the run, which is how
/// the radius lower bound enters.
///
/// AR2 divides `sigma` by `gamma` on success (floored at `sigma_min`) and
/// multiplies on failure, so `sigma_k >= sigma_0 gamma^(u - s)` and
/// `k <= 2 |S_k| + log_gamma(max sigma / sigma_0)`.
pub fn growth_constants(outcome: &RunOutcome) -> (f64, f64, f64) {
    let settings = &outcome.summary.settings;
    let algorithm: Algorithm = outcome
        .summary
        .algorithm
        .parse()
        .expect("outcome carries a valid algorithm name");
    let scaled = |inc: f64, dec: f64| {
        let kappa_b = 1.0 / (1.0 / dec).ln();
        let kappa_a = 1.0 + inc.ln() * kappa_b;
        let r0 = outcome.scales[0];
        let worst = outcome
            .trace
            .records()
            .iter()
            .zip(&outcome.scales)
            .filter(|(r, _)| r.omega > 0.0)
            .map(|(r, &scale)| (r0 * r.omega.min(1.0) / scale).ln())
            .fold(0.0f64, f64::max);
        (kappa_a, kappa_b, kappa_b * worst + 1e-9)
    };
    match algorithm {
        Algorithm::SteepestDescent => (1.0, 0.0, 0.0),
        Algorithm::TrustRegion => scaled(settings["gamma_inc"], settings["gamma_dec"]),
        Algorithm::DirectSearch => scaled(settings["gamma_inc"], settings["gamma_dec"]),
        Algorithm::Ar2 => {
            let sigma0 = outcome.scales[0];
            let sigma_max = outcome.scales.iter().copied().fold(sigma0, f64::max);
            let kappa_c = (sigma_max / sigma0).ln() / settings["gamma"].ln();
            (2.0, 0.0, kappa_c.max(0.0) + 1e-9)
        }
    }
}

/// Constants certified by the run itself: the observed `kappa_d_hat`
/// (capped at 1) and the growth mapping of [`growth_constants`].
pub fn certified_constants(outcome: &RunOutcome) -> Result<TheoremConstants, ConstantsError> {
    let algorithm: Algorithm = outcome
        .summary
        .algorithm
        .parse()
        .expect("outcome carries a valid algorithm name");
    let (kappa_a, kappa_b, kappa_c) = growth_constants(outcome);
    let probe = TheoremConstants::new(1.0, algorithm.beta(), kappa_a, kappa_b, kappa_c)?;
    let kappa_d = check_sufficient_decrease(&outcome.trace, &probe)
        .kappa_d_hat
        .unwrap_or(1.0)
        .min(1.0);
    probe.with_kappa_d(kappa_d)
}

#[cfg(test)]
mod tests;
