use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use super::*;
use crate::hard_instance::{HardInstance, HardInstanceParams};
use crate::theorem::{check_growth, check_sufficient_decrease};

/// `a * sum x_i^2`.
struct Quadratic {
    a: f64,
    n: usize,
}

impl Objective for Quadratic {
    fn name(&self) -> &str {
        "quadratic"
    }
    fn dimension(&self) -> usize {
        self.n
    }
    fn value(&mut self, x: &[f64]) -> Result<f64, OracleError> {
        Ok(self.a * x.iter().map(|v| v * v).sum::<f64>())
    }
    fn gradient(&mut self, x: &[f64]) -> Result<Vec<f64>, OracleError> {
        Ok(x.iter().map(|v| 2.0 * self.a * v).collect())
    }
    fn has_hessian(&self) -> bool {
        true
    }
    fn hessian(&mut self, _x: &[f64]) -> Result<DMatrix<f64>, OracleError> {
        Ok(DMatrix::identity(self.n, self.n) * (2.0 * self.a))
    }
    fn bounded_below(&self) -> bool {
        true
    }
}

fn quadratic(a: f64, n: usize) -> Problem {
    Problem::new(Quadratic { a, n })
}

#[test]
fn armijo_on_a_quadratic_accepts_the_initial_step() {
    let mut p = quadratic(1.0, 1);
    let params = RunParams::new(vec![1.0], 5, 0.0)
        .with_option("t_init", 0.4)
        .with_option("c", 0.5);
    let out = steepest_descent_armijo(&mut p, &params).unwrap();
    assert_eq!(out.summary.status, StopReason::MaxIterations);
    assert!(out
        .steps
        .iter()
        .all(|s| s.backtracks == 0 && s.scale == 0.4));
    let r = out.trace.records();
    for pair in r.windows(2) {
        assert!((pair[1].x[0] - 0.2 * pair[0].x[0]).abs() < 1e-16);
        assert!((pair[1].omega - 0.2 * pair[0].omega).abs() < 1e-15);
    }
}

#[test]
fn armijo_hits_the_minimizer_exactly() {
    let mut p = quadratic(0.5, 3);
    let params = RunParams::new(vec![1.0, -2.0, 0.5], 100, 0.0).with_option("c", 0.5);
    let out = steepest_descent_armijo(&mut p, &params).unwrap();
    assert_eq!(out.summary.status, StopReason::Converged);
    assert_eq!(out.trace.len(), 2);
    assert_eq!(out.trace.omega(1), 0.0);
    assert_eq!(out.summary.final_f, 0.0);
}

#[test]
fn armijo_decrease_holds_post_hoc() {
    let mut p = problem_by_name("rosenbrock", None).unwrap();
    let params = RunParams::new(vec![-1.2, 1.0], 2000, 1e-6);
    let out = steepest_descent_armijo(&mut p, &params).unwrap();
    for (s, pair) in out.steps.iter().zip(out.trace.records().windows(2)) {
        assert!(pair[0].f - pair[1].f >= s.required);
        let g2 = pair[0].omega * pair[0].omega;
        assert!((s.required - 1e-4 * s.scale * g2).abs() <= 1e-12 * s.required.max(1e-300));
    }
}

#[test]
fn armijo_replicates_hard_instance_iterates() {
    let instance = HardInstance::new(HardInstanceParams::new(0.1, 0.25).unwrap()).unwrap();
    let mut reference = instance.clone();
    let mut p = as_problem(instance);
    let params = RunParams::new(vec![0.0], 10_000, 0.0)
        .with_option("t_init", 0.1)
        .with_option("c", 0.9);
    let out = steepest_descent_armijo(&mut p, &params).unwrap();
    assert_eq!(out.summary.backtracks, 0);
    assert_eq!(out.trace.len(), 10_001);
    for r in out.trace.records() {
        assert_eq!(r.x[0], reference.iterate_value(r.k).unwrap());
        assert_eq!(r.omega, -reference.gradient_value(r.k));
    }
}

#[test]
fn linesearch_failure_is_reported() {
    // a gradient oracle that points uphill
    struct Liar;
    impl Objective for Liar {
        fn name(&self) -> &str {
            "liar"
        }
        fn dimension(&self) -> usize {
            1
        }
        fn value(&mut self, x: &[f64]) -> Result<f64, OracleError> {
            Ok(x[0])
        }
        fn gradient(&mut self, _x: &[f64]) -> Result<Vec<f64>, OracleError> {
            Ok(vec![-1.0])
        }
        fn bounded_below(&self) -> bool {
            false
        }
    }
    let mut p = Problem::new(Liar);
    let err = steepest_descent_armijo(&mut p, &RunParams::new(vec![0.0], 10, 0.0)).unwrap_err();
    assert!(matches!(
        err,
        OptimizerError::Linesearch {
            k: 0,
            backtracks: 60
        }
    ));
}

#[test]
fn trust_region_newton_step_on_quadratic() {
    let mut p = quadratic(0.5, 1);
    let params = RunParams::new(vec![2.0], 10, 0.0).with_option("delta0", 100.0);
    let out = trust_region_first_order(&mut p, &params).unwrap();
    assert_eq!(out.trace.len(), 2);
    assert_eq!(out.trace.records()[1].x, vec![0.0]);
    let s = out.steps[0];
    assert!(s.accepted);
    // rho = actual / model decrease
    assert!((s.actual / (s.required / 0.1) - 1.0).abs() < 1e-12);
}

#[test]
fn trust_region_rejection_carries_over() {
    // gradient-only model on a steep quadratic: the unit step overshoots
    let mut p = quadratic(50.0, 1);
    let params = RunParams::new(vec![0.3], 3, 0.0).with_option("use_hessian", 0.0);
    let out = trust_region_first_order(&mut p, &params).unwrap();
    let r = out.trace.records();
    assert!(!out.steps[0].accepted);
    assert!(!r[0].successful);
    assert_eq!(r[1].x, r[0].x);
    assert_eq!(r[1].f, r[0].f);
    assert_eq!(out.scales[1], 0.5);
}

#[test]
fn trust_region_quartic_audit_passes() {
    let mut p = problem_by_name("quartic", Some(2)).unwrap();
    let out =
        trust_region_first_order(&mut p, &RunParams::new(vec![1.2, 1.2], 5000, 1e-6)).unwrap();
    assert_eq!(out.summary.status, StopReason::Converged);
    let c = certified_constants(&out).unwrap();
    assert_eq!(c.kappa_a(), 2.0);
    assert!((c.kappa_b() - 1.0 / 2f64.ln()).abs() < 1e-15);
    assert!(check_sufficient_decrease(&out.trace, &c).ok);
    assert!(check_growth(&out.trace, &c).ok);
}

#[test]
fn ar2_step_points_downhill() {
    let mut p = quadratic(0.5, 1);
    let params = RunParams::new(vec![3.0], 1, 0.0).with_option("sigma0", 1e6);
    let out = ar2(&mut p, &params).unwrap();
    let r = out.trace.records();
    assert!(r[1].x[0] < r[0].x[0]);
}

#[test]
fn ar2_needs_a_hessian() {
    let p = problem_by_name("quartic", None).unwrap();
    assert!(p.has_hessian());
    struct NoHessian;
    impl Objective for NoHessian {
        fn name(&self) -> &str {
            "flat"
        }
        fn dimension(&self) -> usize {
            1
        }
        fn value(&mut self, _x: &[f64]) -> Result<f64, OracleError> {
            Ok(0.0)
        }
        fn gradient(&mut self, _x: &[f64]) -> Result<Vec<f64>, OracleError> {
            Ok(vec![0.0])
        }
        fn bounded_below(&self) -> bool {
            true
        }
    }
    let mut p = Problem::new(NoHessian);
    assert!(ar2(&mut p, &RunParams::new(vec![0.0], 1, 0.0)).is_err());
}

#[test]
fn ar2_rosenbrock_converges_with_certified_constants() {
    let mut p = problem_by_name("rosenbrock", None).unwrap();
    let out = ar2(&mut p, &RunParams::new(vec![-1.2, 1.0], 5000, 1e-8)).unwrap();
    assert_eq!(out.summary.status, StopReason::Converged);
    assert_eq!(out.trace.meta().params["beta"], "1.5");
    let c = certified_constants(&out).unwrap();
    assert!(check_sufficient_decrease(&out.trace, &c).ok);
    assert!(check_growth(&out.trace, &c).ok);
    for (s, pair) in out.steps.iter().zip(out.trace.records().windows(2)) {
        if s.accepted {
            assert!(pair[0].f - pair[1].f >= s.required);
        }
    }
}

#[test]
fn direct_search_first_poll() {
    let mut p = quadratic(1.0, 1);
    let params = RunParams::new(vec![1.0], 1, 0.0).with_option("alpha0", 0.5);
    let out = direct_search(&mut p, &params).unwrap();
    assert_eq!(out.trace.records()[1].x, vec![0.5]);
    assert_eq!(out.summary.counters.values, 3);
    assert_eq!(out.summary.counters.gradients, 0);
    assert_eq!(out.summary.counters.audit_gradients, 2);
}

#[test]
fn direct_search_near_minimizer_shrinks() {
    // at the minimizer itself omega = 0 stops the run, so start just off it
    // with a mesh far larger than the distance
    let mut p = quadratic(1.0, 1);
    let params = RunParams::new(vec![1e-3], 1, 0.0).with_option("alpha0", 1.0);
    let out = direct_search(&mut p, &params).unwrap();
    assert!(!out.steps[0].accepted);
    assert_eq!(out.trace.records()[1].x, vec![1e-3]);
    assert_eq!(out.scales[1], 0.5);

    let mut p = quadratic(1.0, 2);
    let out = direct_search(&mut p, &RunParams::new(vec![0.0, 0.0], 3, 0.0)).unwrap();
    assert_eq!(out.summary.status, StopReason::Converged);
    assert_eq!(out.trace.len(), 1);
}

#[test]
fn counters_count_every_call() {
    let mut p = problem_by_name("separable", Some(2)).unwrap();
    let x = [0.3, -0.4];
    for _ in 0..3 {
        p.value(&x).unwrap();
    }
    p.gradient(&x).unwrap();
    p.hessian(&x).unwrap();
    p.audit_gradient(&x).unwrap();
    assert_eq!(
        p.counters(),
        EvalCounters {
            values: 3,
            gradients: 1,
            hessians: 1,
            audit_gradients: 1
        }
    );
    assert!(p.value(&[1.0]).is_err());
    assert_eq!(p.counters().values, 4);
}

#[test]
fn problem_examples() {
    let mut q = problem_by_name("quartic", None).unwrap();
    assert_eq!(q.value(&[1.0]).unwrap(), 0.25);
    assert_eq!(q.gradient(&[1.0]).unwrap(), vec![1.0]);
    let mut r = problem_by_name("rosenbrock", None).unwrap();
    assert_eq!(r.value(&[1.0, 1.0]).unwrap(), 0.0);
    assert_eq!(r.gradient(&[1.0, 1.0]).unwrap(), vec![0.0, 0.0]);
    let mut h = problem_by_name("hard-instance", None).unwrap();
    assert_eq!(
        h.value(&[0.0]).unwrap(),
        crate::hard_instance::zeta(1.5).unwrap()
    );
    assert_eq!(h.gradient(&[0.0]).unwrap(), vec![-2.0]);
    assert!(matches!(
        problem_by_name("foo", None),
        Err(ProblemError::Unknown(_))
    ));
    assert!(problem_by_name("rosenbrock", Some(3)).is_err());
    assert_eq!(test_problems().len(), 4);
}

fn central_difference(p: &mut Problem, x: &[f64], i: usize) -> f64 {
    let h = 1e-6 * x[i].abs().max(1.0);
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[i] += h;
    xm[i] -= h;
    (p.value(&xp).unwrap() - p.value(&xm).unwrap()) / (2.0 * h)
}

#[test]
fn gradients_match_finite_differences() {
    for p in test_problems() {
        let n = p.dimension();
        let p = std::cell::RefCell::new(p);
        let name = p.borrow().name().to_string();
        let hi = if name == "hard-instance" { 3.0 } else { 2.0 };
        let lo = if name == "hard-instance" { -1.0 } else { -2.0 };
        let mut runner = TestRunner::new(Config {
            cases: 100,
            ..Config::default()
        });
        runner
            .run(&prop::collection::vec(lo..hi, n), |x| {
                let mut p = p.borrow_mut();
                let g = p.gradient(&x).unwrap();
                let gnorm = norm(&g).max(1.0);
                for i in 0..n {
                    let fd = central_difference(&mut p, &x, i);
                    prop_assert!((fd - g[i]).abs() <= 1e-5 * gnorm, "{name} at {x:?}");
                }
                Ok(())
            })
            .unwrap();
    }
}

#[test]
fn unknown_options_are_rejected() {
    let mut p = quadratic(1.0, 1);
    let params = RunParams::new(vec![1.0], 10, 0.0).with_option("radius", 2.0);
    for algo in Algorithm::ALL {
        let err = algo.run(&mut p, &params).unwrap_err();
        assert!(matches!(err, OptimizerError::Params(_)), "{algo:?}");
    }
    assert!(RunParams::new(vec![1.0], 0, 0.0).validate(&p).is_err());
    assert!(RunParams::new(vec![1.0], 1, -1.0).validate(&p).is_err());
    assert!(RunParams::new(vec![1.0, 2.0], 1, 0.0).validate(&p).is_err());
}

#[test]
fn algorithm_names() {
    for name in ALGORITHM_NAMES {
        let a: Algorithm = name.parse().unwrap();
        assert_eq!(a.name(), name);
    }
    assert!("foo".parse::<Algorithm>().is_err());
    assert_eq!(Algorithm::Ar2.beta(), 1.5);
}

proptest! {
    #![proptest_config(Config { cases: 24, ..Config::default() })]

    /// Every method produces a valid trace whose certified constants pass
    /// both hypothesis checks.
    #[test]
    fn certified_constants_pass(
        algo in prop::sample::select(Algorithm::ALL.to_vec()),
        x0 in prop::collection::vec(-2.0..2.0f64, 2),
    ) {
        let mut p = problem_by_name("separable", Some(2)).unwrap();
        let out = algo.run(&mut p, &RunParams::new(x0, 400, 1e-6)).unwrap();
        let c = certified_constants(&out).unwrap();
        prop_assert!(check_sufficient_decrease(&out.trace, &c).ok);
        prop_assert!(check_growth(&out.trace, &c).ok);
        for (s, pair) in out.steps.iter().zip(out.trace.records().windows(2)) {
            if s.accepted {
                prop_assert!(pair[0].f - pair[1].f >= s.required);
            }
        }
    }
}
