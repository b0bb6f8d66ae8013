use std::collections::BTreeMap;

use serde::Serialize;

use super::{
    dot, norm, require, Algorithm, OptimizerError, OptionReader, Problem, Recorder, RunOutcome,
    RunParams, StepInfo, StopReason,
};

/// Backtracking settings: accept the largest `t = t_init theta^j`,
/// `j <= j_max`, with `f(x - t g) <= f(x) - c t ||g||^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArmijoSettings {
    pub c: f64,
    pub theta: f64,
    pub t_init: f64,
    pub j_max: usize,
}

impl Default for ArmijoSettings {
    fn default() -> Self {
        Self {
            c: 1e-4,
            theta: 0.5,
            t_init: 1.0,
            j_max: 60,
        }
    }
}

impl ArmijoSettings {
    pub fn from_options(options: &BTreeMap<String, f64>) -> Result<Self, OptimizerError> {
        let d = Self::default();
        let mut r = OptionReader::new(options);
        let j_max = r.get("j_max", d.j_max as f64);
        let s = Self {
            c: r.get("c", d.c),
            theta: r.get("theta", d.theta),
            t_init: r.get("t_init", d.t_init),
            j_max: j_max as usize,
        };
        r.finish()?;
        require(s.c > 0.0 && s.c < 1.0, "c must lie in (0, 1)")?;
        require(s.theta > 0.0 && s.theta < 1.0, "theta must lie in (0, 1)")?;
        require(
            s.t_init > 0.0 && s.t_init.is_finite(),
            "t_init must be positive",
        )?;
        require(
            j_max >= 0.0 && j_max.fract() == 0.0,
            "j_max must be a nonnegative integer",
        )?;
        Ok(s)
    }

    fn to_map(self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("c".into(), self.c),
            ("theta".into(), self.theta),
            ("t_init".into(), self.t_init),
            ("j_max".into(), self.j_max as f64),
        ])
    }
}

pub fn steepest_descent_armijo(
    problem: &mut Problem,
    params: &RunParams,
) -> Result<RunOutcome, OptimizerError> {
    params.validate(problem)?;
    let settings = ArmijoSettings::from_options(&params.options)?;
    let start = problem.counters();

    let mut x = params.x0.clone();
    let mut f = problem.value(&x)?;
    let mut g = problem.gradient(&x)?;
    let mut omega = norm(&g);
    let mut rec = Recorder::new(start, &x, f, omega, settings.t_init);

    let status = loop {
        if omega <= params.threshold {
            break StopReason::Converged;
        }
        let k = rec.iterations();
        if k >= params.max_iterations {
            break StopReason::MaxIterations;
        }
        let gg = dot(&g, &g);
        let mut t = settings.t_init;
        let mut backtracks = 0;
        let (trial, ft) = loop {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - t * gi).collect();
            let ft = problem.value(&trial)?;
            if ft <= f - settings.c * t * gg && ft < f {
                break (trial, ft);
            }
            if backtracks == settings.j_max {
                return Err(OptimizerError::Linesearch { k, backtracks });
            }
            backtracks += 1;
            t *= settings.theta;
        };
        rec.step(StepInfo {
            k,
            scale: t,
            required: settings.c * t * gg,
            actual: f - ft,
            accepted: true,
            backtracks,
        });
        x = trial;
        f = ft;
        g = problem.gradient(&x)?;
        omega = norm(&g);
        rec.record(&x, f, omega, settings.t_init);
    };
    rec.finish(
        Algorithm::SteepestDescent,
        problem,
        status,
        settings.to_map(),
    )
}
