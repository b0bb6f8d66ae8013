//! Shared fixtures for the benchmarks.

use telescope_core::hard_instance::{HardInstance, HardInstanceParams};
use telescope_core::optimizers::{as_problem, steepest_descent_armijo, RunOutcome, RunParams};

pub fn instance(alpha: f64, delta: f64) -> HardInstance {
    HardInstance::new(HardInstanceParams::new(alpha, delta).expect("admissible parameters"))
        .expect("instance builds")
}

/// Steepest descent with unit Armijo steps of length `alpha` on the
/// instance, for `iterations` iterations.
pub fn replication(alpha: f64, delta: f64, iterations: usize) -> RunOutcome {
    let mut problem = as_problem(instance(alpha, delta));
    let params = RunParams::new(vec![0.0], iterations, 0.0)
        .with_option("t_init", alpha)
        .with_option("c", 0.9);
    steepest_descent_armijo(&mut problem, &params).expect("replication runs")
}
