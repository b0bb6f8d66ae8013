use std::collections::BTreeMap;

use serde::Serialize;

use super::trust_region::below_resolution;
use super::{
    norm, require, Algorithm, OptimizerError, OptionReader, Problem, Recorder, RunOutcome,
    RunParams, StepInfo, StopReason,
};

/// Coordinate search polling `+e_1, -e_1, +e_2, ...` in order and taking
/// the first point with `f(x + alpha d) <= f(x) - c alpha^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirectSearchSettings {
    pub c: f64,
    pub gamma_inc: f64,
    pub gamma_dec: f64,
    pub alpha0: f64,
}

impl Default for DirectSearchSettings {
    fn default() -> Self {
        Self {
            c: 1e-4,
            gamma_inc: 2.0,
            gamma_dec: 0.5,
            alpha0: 1.0,
        }
    }
}

impl DirectSearchSettings {
    pub fn from_options(options: &BTreeMap<String, f64>) -> Result<Self, OptimizerError> {
        let d = Self::default();
        let mut r = OptionReader::new(options);
        let s = Self {
            c: r.get("c", d.c),
            gamma_inc: r.get("gamma_inc", d.gamma_inc),
            gamma_dec: r.get("gamma_dec", d.gamma_dec),
            alpha0: r.get("alpha0", d.alpha0),
        };
        r.finish()?;
        require(s.c > 0.0 && s.c.is_finite(), "c must be positive")?;
        require(
            s.gamma_inc >= 1.0 && s.gamma_inc.is_finite(),
            "gamma_inc must be >= 1",
        )?;
        require(
            s.gamma_dec > 0.0 && s.gamma_dec < 1.0,
            "gamma_dec must lie in (0, 1)",
        )?;
        require(
            s.alpha0 > 0.0 && s.alpha0.is_finite(),
            "alpha0 must be positive",
        )?;
        Ok(s)
    }

    fn to_map(self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("c".into(), self.c),
            ("gamma_inc".into(), self.gamma_inc),
            ("gamma_dec".into(), self.gamma_dec),
            ("alpha0".into(), self.alpha0),
        ])
    }
}

/// The gradient is evaluated only to record `omega`; those calls are
/// counted as audit gradients.
pub fn direct_search(
    problem: &mut Problem,
    params: &RunParams,
) -> Result<RunOutcome, OptimizerError> {
    params.validate(problem)?;
    let settings = DirectSearchSettings::from_options(&params.options)?;
    let start = problem.counters();
    let n = problem.dimension();

    let mut x = params.x0.clone();
    let mut f = problem.value(&x)?;
    let mut omega = norm(&problem.audit_gradient(&x)?);
    let mut alpha = settings.alpha0;
    let mut rec = Recorder::new(start, &x, f, omega, alpha);

    let status = 'outer: loop {
        if omega <= params.threshold {
            break StopReason::Converged;
        }
        let k = rec.iterations();
        if k >= params.max_iterations {
            break StopReason::MaxIterations;
        }
        if below_resolution(alpha, &x) {
            break StopReason::Stalled;
        }
        let required = settings.c * alpha * alpha;
        let mut best_actual = f64::NEG_INFINITY;
        for i in 0..n {
            for sign in [1.0, -1.0] {
                let mut trial = x.clone();
                trial[i] += sign * alpha;
                let ft = problem.value(&trial)?;
                let actual = f - ft;
                best_actual = best_actual.max(actual);
                if actual >= required && actual > 0.0 && trial != x {
                    rec.step(StepInfo {
                        k,
                        scale: alpha,
                        required,
                        actual,
                        accepted: true,
                        backtracks: 0,
                    });
                    x = trial;
                    f = ft;
                    omega = norm(&problem.audit_gradient(&x)?);
                    alpha *= settings.gamma_inc;
                    rec.record(&x, f, omega, alpha);
                    continue 'outer;
                }
            }
        }
        rec.step(StepInfo {
            k,
            scale: alpha,
            required,
            actual: best_actual,
            accepted: false,
            backtracks: 0,
        });
        alpha *= settings.gamma_dec;
        rec.record(&x, f, omega, alpha);
    };
    rec.finish(Algorithm::DirectSearch, problem, status, settings.to_map())
}
