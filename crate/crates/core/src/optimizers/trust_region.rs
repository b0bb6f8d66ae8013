use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Serialize;

use super::subproblem::trust_region_step;
use super::{
    norm, require, Algorithm, OptimizerError, OptionReader, Problem, Recorder, RunOutcome,
    RunParams, StepInfo, StopReason,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrustRegionSettings {
    pub eta1: f64,
    pub eta2: f64,
    pub gamma_dec: f64,
    pub gamma_inc: f64,
    pub delta0: f64,
    /// Use the exact Hessian as the model when the problem has one;
    /// otherwise the model is linear.
    pub use_hessian: bool,
}

impl Default for TrustRegionSettings {
    fn default() -> Self {
        Self {
            eta1: 0.1,
            eta2: 0.9,
            gamma_dec: 0.5,
            gamma_inc: 2.0,
            delta0: 1.0,
            use_hessian: true,
        }
    }
}

impl TrustRegionSettings {
    pub fn from_options(options: &BTreeMap<String, f64>) -> Result<Self, OptimizerError> {
        let d = Self::default();
        let mut r = OptionReader::new(options);
        let s = Self {
            eta1: r.get("eta1", d.eta1),
            eta2: r.get("eta2", d.eta2),
            gamma_dec: r.get("gamma_dec", d.gamma_dec),
            gamma_inc: r.get("gamma_inc", d.gamma_inc),
            delta0: r.get("delta0", d.delta0),
            use_hessian: r.get("use_hessian", 1.0) != 0.0,
        };
        r.finish()?;
        require(
            0.0 < s.eta1 && s.eta1 <= s.eta2 && s.eta2 < 1.0,
            "need 0 < eta1 <= eta2 < 1",
        )?;
        require(
            s.gamma_dec > 0.0 && s.gamma_dec < 1.0,
            "gamma_dec must lie in (0, 1)",
        )?;
        require(
            s.gamma_inc >= 1.0 && s.gamma_inc.is_finite(),
            "gamma_inc must be >= 1",
        )?;
        require(
            s.delta0 > 0.0 && s.delta0.is_finite(),
            "delta0 must be positive",
        )?;
        Ok(s)
    }

    fn to_map(self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("eta1".into(), self.eta1),
            ("eta2".into(), self.eta2),
            ("gamma_dec".into(), self.gamma_dec),
            ("gamma_inc".into(), self.gamma_inc),
            ("delta0".into(), self.delta0),
            (
                "use_hessian".into(),
                if self.use_hessian { 1.0 } else { 0.0 },
            ),
        ])
    }
}

/// Radius below which a step can no longer move `x` in floating point.
pub(crate) fn below_resolution(scale: f64, x: &[f64]) -> bool {
    scale <= 1e-15 * norm(x).max(1.0)
}

pub fn trust_region_first_order(
    problem: &mut Problem,
    params: &RunParams,
) -> Result<RunOutcome, OptimizerError> {
    params.validate(problem)?;
    let settings = TrustRegionSettings::from_options(&params.options)?;
    let start = problem.counters();
    let n = problem.dimension();
    let use_hessian = settings.use_hessian && problem.has_hessian();
    let model = |problem: &mut Problem, x: &[f64]| -> Result<DMatrix<f64>, OptimizerError> {
        if use_hessian {
            Ok(problem.hessian(x)?)
        } else {
            Ok(DMatrix::zeros(n, n))
        }
    };

    let mut x = params.x0.clone();
    let mut f = problem.value(&x)?;
    let mut g = problem.gradient(&x)?;
    let mut h = model(problem, &x)?;
    let mut omega = norm(&g);
    let mut radius = settings.delta0;
    let mut rec = Recorder::new(start, &x, f, omega, radius);

    let status = loop {
        if omega <= params.threshold {
            break StopReason::Converged;
        }
        let k = rec.iterations();
        if k >= params.max_iterations {
            break StopReason::MaxIterations;
        }
        if below_resolution(radius, &x) {
            break StopReason::Stalled;
        }
        let step = trust_region_step(&g, &h, radius)
            .map_err(|source| OptimizerError::Subproblem { k, source })?;
        let trial: Vec<f64> = x.iter().zip(&step.s).map(|(a, b)| a + b).collect();
        let ft = problem.value(&trial)?;
        let actual = f - ft;
        let rho = actual / step.model_decrease;
        let success =
            step.model_decrease > 0.0 && rho >= settings.eta1 && actual > 0.0 && trial != x;
        rec.step(StepInfo {
            k,
            scale: radius,
            required: settings.eta1 * step.model_decrease,
            actual,
            accepted: success,
            backtracks: 0,
        });
        if success {
            if rho >= settings.eta2 {
                radius *= settings.gamma_inc;
            }
            x = trial;
            f = ft;
            g = problem.gradient(&x)?;
            h = model(problem, &x)?;
            omega = norm(&g);
        } else {
            radius *= settings.gamma_dec;
        }
        rec.record(&x, f, omega, radius);
    };
    rec.finish(Algorithm::TrustRegion, problem, status, settings.to_map())
}
