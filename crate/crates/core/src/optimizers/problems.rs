use nalgebra::DMatrix;

use super::{Objective, OracleError, Problem};
use crate::hard_instance::{HardInstance, HardInstanceParams};

pub const PROBLEM_NAMES: [&str; 4] = ["quartic", "rosenbrock", "separable", "hard-instance"];

/// `sum x_i^4 / 4`; the gradient vanishes cubically at the minimizer, so
/// first-order methods converge sublinearly.
#[derive(Debug, Clone)]
pub struct Quartic {
    n: usize,
}

impl Quartic {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl Objective for Quartic {
    fn name(&self) -> &str {
        "quartic"
    }
    fn dimension(&self) -> usize {
        self.n
    }
    fn value(&mut self, x: &[f64]) -> Result<f64, OracleError> {
        Ok(x.iter().map(|v| 0.25 * v.powi(4)).sum())
    }
    fn gradient(&mut self, x: &[f64]) -> Result<Vec<f64>, OracleError> {
        Ok(x.iter().map(|v| v.powi(3)).collect())
    }
    fn has_hessian(&self) -> bool {
        true
    }
    fn hessian(&mut self, x: &[f64]) -> Result<DMatrix<f64>, OracleError> {
        Ok(DMatrix::from_fn(self.n, self.n, |i, j| {
            if i == j {
                3.0 * x[i] * x[i]
            } else {
                0.0
            }
        }))
    }
    fn bounded_below(&self) -> bool {
        true
    }
}

/// `100 (y - x^2)^2 + (1 - x)^2`.
#[derive(Debug, Clone, Default)]
pub struct Rosenbrock;

impl Objective for Rosenbrock {
    fn name(&self) -> &str {
        "rosenbrock"
    }
    fn dimension(&self) -> usize {
        2
    }
    fn value(&mut self, x: &[f64]) -> Result<f64, OracleError> {
        let (a, b) = (x[0], x[1]);
        Ok(100.0 * (b - a * a).powi(2) + (1.0 - a).powi(2))
    }
    fn gradient(&mut self, x: &[f64]) -> Result<Vec<f64>, OracleError> {
        let (a, b) = (x[0], x[1]);
        let r = b - a * a;
        Ok(vec![-400.0 * a * r - 2.0 * (1.0 - a), 200.0 * r])
    }
    fn has_hessian(&self) -> bool {
        true
    }
    fn hessian(&mut self, x: &[f64]) -> Result<DMatrix<f64>, OracleError> {
        let (a, b) = (x[0], x[1]);
        let off = -400.0 * a;
        Ok(DMatrix::from_row_slice(
            2,
            2,
            &[1200.0 * a * a - 400.0 * b + 2.0, off, off, 200.0],
        ))
    }
    fn bounded_below(&self) -> bool {
        true
    }
}

/// `sum x_i^2 + 3 sin^2 x_i`: indefinite Hessian wherever `cos 2x_i < -1/3`,
/// unique critical point at the origin.
#[derive(Debug, Clone)]
pub struct Separable {
    n: usize,
}

impl Separable {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl Objective for Separable {
    fn name(&self) -> &str {
        "separable"
    }
    fn dimension(&self) -> usize {
        self.n
    }
    fn value(&mut self, x: &[f64]) -> Result<f64, OracleError> {
        Ok(x.iter().map(|v| v * v + 3.0 * v.sin().powi(2)).sum())
    }
    fn gradient(&mut self, x: &[f64]) -> Result<Vec<f64>, OracleError> {
        Ok(x.iter().map(|v| 2.0 * v + 3.0 * (2.0 * v).sin()).collect())
    }
    fn has_hessian(&self) -> bool {
        true
    }
    fn hessian(&mut self, x: &[f64]) -> Result<DMatrix<f64>, OracleError> {
        Ok(DMatrix::from_fn(self.n, self.n, |i, j| {
            if i == j {
                2.0 + 6.0 * (2.0 * x[i]).cos()
            } else {
                0.0
            }
        }))
    }
    fn bounded_below(&self) -> bool {
        true
    }
}

/// The slow-convergence univariate instance as a problem. The Hessian is the
/// right limit of `f''` at knots.
#[derive(Debug, Clone)]
pub struct HardInstanceObjective {
    instance: HardInstance,
}

impl HardInstanceObjective {
    pub fn new(instance: HardInstance) -> Self {
        Self { instance }
    }

    pub fn from_params(alpha: f64, delta: f64) -> Result<Self, OracleError> {
        let params = HardInstanceParams::new(alpha, delta)?;
        Ok(Self::new(HardInstance::new(params)?))
    }

    pub fn instance(&self) -> &HardInstance {
        &self.instance
    }
}

impl Objective for HardInstanceObjective {
    fn name(&self) -> &str {
        "hard-instance"
    }
    fn dimension(&self) -> usize {
        1
    }
    fn value(&mut self, x: &[f64]) -> Result<f64, OracleError> {
        Ok(self.instance.evaluate(x[0])?.value)
    }
    fn gradient(&mut self, x: &[f64]) -> Result<Vec<f64>, OracleError> {
        Ok(vec![self.instance.evaluate(x[0])?.gradient])
    }
    fn has_hessian(&self) -> bool {
        true
    }
    fn hessian(&mut self, x: &[f64]) -> Result<DMatrix<f64>, OracleError> {
        Ok(DMatrix::from_element(
            1,
            1,
            self.instance.evaluate(x[0])?.hessian,
        ))
    }
    fn bounded_below(&self) -> bool {
        true
    }
}

/// Wraps an instance so optimizers can run on it.
pub fn as_problem(instance: HardInstance) -> Problem {
    Problem::new(HardInstanceObjective::new(instance))
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ProblemError {
    #[error("unknown problem {0:?}; valid names: quartic, rosenbrock, separable, hard-instance")]
    Unknown(String),
    #[error("problem {name} has fixed dimension {fixed}, got {requested}")]
    Dimension {
        name: &'static str,
        fixed: usize,
        requested: usize,
    },
}

/// Builds a named problem. `dimension` sizes the quartic and separable
/// problems (default 1 and 3); the hard instance uses `alpha = 0.1`,
/// `delta = 0.25`.
pub fn problem_by_name(name: &str, dimension: Option<usize>) -> Result<Problem, ProblemError> {
    let fixed = |fixed: usize, name: &'static str| match dimension {
        Some(d) if d != fixed => Err(ProblemError::Dimension {
            name,
            fixed,
            requested: d,
        }),
        _ => Ok(()),
    };
    match name {
        "quartic" => Ok(Problem::new(Quartic::new(dimension.unwrap_or(1)))),
        "rosenbrock" => {
            fixed(2, "rosenbrock")?;
            Ok(Problem::new(Rosenbrock))
        }
        "separable" => Ok(Problem::new(Separable::new(dimension.unwrap_or(3)))),
        "hard-instance" => {
            fixed(1, "hard-instance")?;
            let objective = HardInstanceObjective::from_params(0.1, 0.25)
                .expect("default parameters satisfy the instance invariant");
            Ok(Problem::new(objective))
        }
        _ => Err(ProblemError::Unknown(name.to_string())),
    }
}

/// Conventional starting point for a named problem of dimension `n`.
pub fn default_start(name: &str, n: usize) -> Option<Vec<f64>> {
    match name {
        "quartic" => Some(vec![1.2; n]),
        "rosenbrock" => Some(vec![-1.2, 1.0]),
        "separable" => Some((0..n).map(|i| 2.5 - 0.5 * i as f64).collect()),
        "hard-instance" => Some(vec![0.0]),
        _ => None,
    }
}

/// Quartic (1-D), Rosenbrock, separable (3-D) and the hard instance.
pub fn test_problems() -> Vec<Problem> {
    PROBLEM_NAMES
        .iter()
        .map(|name| problem_by_name(name, None).expect("registered name"))
        .collect()
}
