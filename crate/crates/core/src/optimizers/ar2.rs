use std::collections::BTreeMap;

use serde::Serialize;

use super::subproblem::cubic_step;
use super::trust_region::below_resolution;
use super::{
    norm, require, Algorithm, OptimizerError, OptionReader, Problem, Recorder, RunOutcome,
    RunParams, StepInfo, StopReason,
};

/// Adaptive cubic regularization settings. Success iff the actual decrease
/// is at least `eta1` times the cubic model decrease; `sigma` is divided by
/// `gamma` (down to `sigma_min`) on success and multiplied on failure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ar2Settings {
    pub sigma0: f64,
    pub gamma: f64,
    pub sigma_min: f64,
    pub eta1: f64,
}

impl Default for Ar2Settings {
    fn default() -> Self {
        Self {
            sigma0: 1.0,
            gamma: 2.0,
            sigma_min: 1e-8,
            eta1: 0.1,
        }
    }
}

impl Ar2Settings {
    pub fn from_options(options: &BTreeMap<String, f64>) -> Result<Self, OptimizerError> {
        let d = Self::default();
        let mut r = OptionReader::new(options);
        let s = Self {
            sigma0: r.get("sigma0", d.sigma0),
            gamma: r.get("gamma", d.gamma),
            sigma_min: r.get("sigma_min", d.sigma_min),
            eta1: r.get("eta1", d.eta1),
        };
        r.finish()?;
        require(
            s.sigma0 > 0.0 && s.sigma0.is_finite(),
            "sigma0 must be positive",
        )?;
        require(s.gamma > 1.0 && s.gamma.is_finite(), "gamma must exceed 1")?;
        require(
            s.sigma_min > 0.0 && s.sigma_min <= s.sigma0,
            "need 0 < sigma_min <= sigma0",
        )?;
        require(s.eta1 > 0.0 && s.eta1 < 1.0, "eta1 must lie in (0, 1)")?;
        Ok(s)
    }

    fn to_map(self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("sigma0".into(), self.sigma0),
            ("gamma".into(), self.gamma),
            ("sigma_min".into(), self.sigma_min),
            ("eta1".into(), self.eta1),
        ])
    }
}

pub fn ar2(problem: &mut Problem, params: &RunParams) -> Result<RunOutcome, OptimizerError> {
    params.validate(problem)?;
    let settings = Ar2Settings::from_options(&params.options)?;
    if !problem.has_hessian() {
        return Err(OptimizerError::Oracle(super::OracleError::NoHessian(
            problem.name().to_string(),
        )));
    }
    let start = problem.counters();

    let mut x = params.x0.clone();
    let mut f = problem.value(&x)?;
    let mut g = problem.gradient(&x)?;
    let mut h = problem.hessian(&x)?;
    let mut omega = norm(&g);
    let mut sigma = settings.sigma0;
    let mut rec = Recorder::new(start, &x, f, omega, sigma);

    let status = loop {
        if omega <= params.threshold {
            break StopReason::Converged;
        }
        let k = rec.iterations();
        if k >= params.max_iterations {
            break StopReason::MaxIterations;
        }
        let step =
            cubic_step(&g, &h, sigma).map_err(|source| OptimizerError::Subproblem { k, source })?;
        if below_resolution(norm(&step.s), &x) {
            break StopReason::Stalled;
        }
        let trial: Vec<f64> = x.iter().zip(&step.s).map(|(a, b)| a + b).collect();
        let ft = problem.value(&trial)?;
        let actual = f - ft;
        let rho = actual / step.model_decrease;
        let success =
            step.model_decrease > 0.0 && rho >= settings.eta1 && actual > 0.0 && trial != x;
        rec.step(StepInfo {
            k,
            scale: sigma,
            required: settings.eta1 * step.model_decrease,
            actual,
            accepted: success,
            backtracks: 0,
        });
        if success {
            sigma = (sigma / settings.gamma).max(settings.sigma_min);
            x = trial;
            f = ft;
            g = problem.gradient(&x)?;
            h = problem.hessian(&x)?;
            omega = norm(&g);
        } else {
            sigma *= settings.gamma;
        }
        rec.record(&x, f, omega, sigma);
    };
    rec.finish(Algorithm::Ar2, problem, status, settings.to_map())
}
