use proptest::prelude::*;

use super::*;

fn instance(alpha: f64, delta: f64) -> HardInstance {
    HardInstance::new(HardInstanceParams::new(alpha, delta).unwrap()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        ((a - b) / b).abs()
    }
}

// 40-digit partial sums for alpha = 0.1, delta = 0.25
const F_10000: f64 = 1.953_137_863_818_189_509;
const X_10000: f64 = 3.855_821_460_680_477_711;

#[test]
fn gradient_examples() {
    let h = instance(0.1, 0.25);
    assert_eq!(h.gradient_value(0), -2.0);
    assert_eq!(h.gradient_value(1), -1.0);
    assert_eq!(-gradient_magnitude(4, 0.5), -0.25);
}

#[test]
fn objective_examples() {
    let mut h = instance(0.1, 0.25);
    let f0 = zeta(1.5).unwrap();
    assert_eq!(h.objective_value(0).unwrap(), f0);
    assert_eq!(h.objective_value(1).unwrap(), f0 - 0.4);
    assert!(rel(h.objective_value(2).unwrap(), f0 - 0.4 - 0.1) < 1e-15);
    assert!(rel(h.objective_value(10_000).unwrap(), F_10000) < 1e-12);
}

#[test]
fn iterate_and_step_examples() {
    let mut h = instance(0.1, 0.25);
    assert_eq!(h.iterate_value(0).unwrap(), 0.0);
    assert_eq!(h.iterate_value(1).unwrap(), 0.2);
    assert!((h.iterate_value(2).unwrap() - 0.3).abs() < 1e-15);
    assert!((h.iterate_value(10_000).unwrap() - X_10000).abs() < 1e-12);
    assert_eq!(h.step_value(0).unwrap(), -0.1 * h.gradient_value(0));
    for k in 1..=1000 {
        let s = h.step_value(k).unwrap();
        assert!(rel(s, -0.1 * h.gradient_value(k)) < 1e-12, "k = {k}");
    }
}

#[test]
fn knots_are_ordered() {
    let mut h = instance(0.1, 0.001);
    h.extend_to(5000).unwrap();
    for k in 0..5000 {
        let a = h.knot(k).unwrap();
        let b = h.knot(k + 1).unwrap();
        assert!(a.x < b.x && a.f > b.f && a.g < 0.0);
    }
}

#[test]
fn decrease_identity() {
    let mut h = instance(0.1, 0.25);
    for k in 0..2000 {
        let g = h.gradient_value(k);
        let dec = h.objective_value(k).unwrap() - h.objective_value(k + 1).unwrap();
        assert!(rel(dec, 0.1 * g * g) < 1e-9, "k = {k}");
    }
}

#[test]
fn hermite_preconditions_hold() {
    for (alpha, delta) in [(0.1, 0.001), (0.1, 0.25)] {
        let mut h = instance(alpha, delta);
        let check = h.verify_hermite_preconditions(10_000).unwrap();
        assert!(check.ok, "{alpha} {delta}: {check:?}");
        assert!(check.worst_value_ratio < 1e-6);
        // k = 0 gives alpha |g_0 - g_1| / s_0 = 1/2
        assert!(check.worst_gradient_ratio >= 0.5 && check.worst_gradient_ratio <= 1.0);
    }
}

#[test]
fn invariant_rejects_large_alpha() {
    assert!(matches!(
        HardInstanceParams::new(1.0, 0.001),
        Err(HardInstanceError::NegativeLimit { .. })
    ));
    assert!(HardInstanceParams::new(0.5, 0.25).is_err());
    assert!(HardInstanceParams::new(0.0, 0.25).is_err());
    assert!(HardInstanceParams::new(0.1, 0.0).is_err());
}

#[test]
fn knots_are_interpolated() {
    let mut h = instance(0.1, 0.25);
    h.extend_to(10_001).unwrap();
    for k in 0..=10_000 {
        let knot = h.knot(k).unwrap();
        let e = h.evaluate(knot.x).unwrap();
        assert_eq!(e.value, knot.f);
        assert_eq!(e.gradient, knot.g);
        // right end of the segment to the left
        if k > 0 {
            let seg = h.segment_cubic(k - 1).unwrap();
            let left = seg.evaluate(knot.x);
            assert!(rel(left.value, knot.f) < 1e-10, "k = {k}");
            assert!(rel(left.gradient, knot.g) < 1e-10, "k = {k}");
        }
    }
}

#[test]
fn continuous_across_knots() {
    let mut h = instance(0.1, 0.001);
    for k in 1..200 {
        let x = h.iterate_value(k).unwrap();
        let below = h.evaluate(x.next_down()).unwrap();
        let at = h.evaluate(x).unwrap();
        assert!(rel(below.value, at.value) < 1e-10);
        assert!(rel(below.gradient, at.gradient) < 1e-10);
    }
}

#[test]
fn second_derivative_jumps() {
    let mut h = instance(0.1, 0.001);
    let x1 = h.iterate_value(1).unwrap();
    let left = h.second_derivative_left(x1).unwrap();
    let right = h.evaluate(x1).unwrap().hessian;
    assert!((left - right).abs() > 1.0);
}

#[test]
fn left_extension() {
    let mut h = instance(0.1, 0.001);
    let e = h.evaluate(-1.0).unwrap();
    assert!((e.value - 502.577).abs() < 5e-4);
    assert_eq!(e.gradient, -2.0);
    assert_eq!(e.hessian, 0.0);
    assert_eq!(h.second_derivative_left(0.0).unwrap(), 0.0);
    assert!(h.evaluate(f64::NAN).is_err());
}

/// Standard cubic Hermite basis on the normalized variable.
fn hermite_basis(x: f64, x0: f64, x1: f64, f0: f64, f1: f64, g0: f64, g1: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let h00 = 2.0 * t.powi(3) - 3.0 * t.powi(2) + 1.0;
    let h10 = t.powi(3) - 2.0 * t.powi(2) + t;
    let h01 = -2.0 * t.powi(3) + 3.0 * t.powi(2);
    let h11 = t.powi(3) - t.powi(2);
    h00 * f0 + h10 * h * g0 + h01 * f1 + h11 * h * g1
}

#[test]
fn matches_independent_evaluator() {
    use proptest::test_runner::{Config, TestRunner};
    let mut h = instance(0.1, 0.001);
    let x4 = h.iterate_value(4).unwrap();
    let knots: Vec<Knot> = (0..5).map(|k| h.knot(k).unwrap()).collect();
    let mut runner = TestRunner::new(Config {
        cases: 1000,
        ..Config::default()
    });
    runner
        .run(&(0.0..x4), |x| {
            let k = knots.iter().rposition(|kn| kn.x <= x).unwrap();
            let (a, b) = (knots[k], knots[k + 1]);
            let expected = hermite_basis(x, a.x, b.x, a.f, b.f, a.g, b.g);
            let got = h.evaluate_cached(x).unwrap().unwrap().value;
            prop_assert!(rel(got, expected) < 1e-12, "x = {x}: {got} vs {expected}");
            Ok(())
        })
        .unwrap();
}

#[test]
fn lipschitz_bound_is_attained_near_the_origin() {
    let mut h = instance(0.1, 0.25);
    // p'' at the right end of segment 0 is 2/alpha
    let l4 = h.lipschitz_bound(4).unwrap();
    assert!(rel(l4, 20.0) < 1e-12, "{l4}");
    let l100 = h.lipschitz_bound(100).unwrap();
    let l10000 = h.lipschitz_bound(10_000).unwrap();
    assert_eq!(l100, l4);
    assert_eq!(l10000, l4);
}

#[test]
fn bounded_below_on_samples() {
    let mut h = instance(0.1, 0.25);
    let x_end = h.iterate_value(2000).unwrap();
    let samples = h.sample_curve(-1.0, x_end, 5000).unwrap();
    let lim = h.f_limit();
    assert!(lim >= 0.0);
    assert!(samples.iter().all(|s| s.f >= lim - 1e-12));
    assert!(samples.windows(2).all(|w| w[0].f >= w[1].f));
}

#[test]
fn sample_curve_includes_knots() {
    let mut h = instance(0.1, 0.001);
    let x4 = h.iterate_value(4).unwrap();
    let samples = h.sample_curve(0.0, x4, 11).unwrap();
    for k in 0..=4 {
        let x = h.iterate_value(k).unwrap();
        assert!(samples.iter().any(|s| s.x == x));
    }
    assert!(samples.windows(2).all(|w| w[0].x < w[1].x));
    assert!(h.sample_curve(1.0, 1.0, 10).is_err());
}

#[test]
fn predicted_k_eps_examples() {
    assert_eq!(predicted_k_eps(0.01, 0.5).unwrap(), 100);
    assert_eq!(predicted_k_eps(0.01, 0.25).unwrap(), 465);
    assert_eq!(predicted_k_eps(0.01, 0.001).unwrap(), 9818);
    assert_eq!(predicted_k_eps(10f64.powf(-1.5), 0.25).unwrap(), 100);
    assert_eq!(predicted_k_eps(1e-3, 0.25).unwrap(), 10_000);
    assert_eq!(predicted_k_eps(2.0, 0.25).unwrap(), 0);
    assert_eq!(predicted_k_eps(1.5, 0.25).unwrap(), 1);
    assert!(predicted_k_eps(0.0, 0.25).is_err());
}

#[test]
fn predicted_k_eps_matches_scan() {
    for eps in [0.3, 0.1, 0.05, 0.01, 0.003] {
        let scan = (0..).find(|&k| gradient_magnitude(k, 0.25) <= eps).unwrap();
        assert_eq!(predicted_k_eps(eps, 0.25).unwrap(), scan, "eps = {eps}");
    }
}

#[test]
fn horizon_cap() {
    let mut h = instance(0.1, 0.25).with_max_knots(1000);
    assert!(h.objective_value(999).is_ok());
    assert!(matches!(
        h.objective_value(1000),
        Err(HardInstanceError::HorizonCap { .. })
    ));
    let far = h.iterate_value(999).unwrap() + 1.0;
    assert!(h.evaluate(far).is_err());
}

#[test]
fn csv_exports() {
    let mut h = instance(0.1, 0.001);
    let mut buf = Vec::new();
    h.write_knot_table(4, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.starts_with("k,x,f,g,s\n0,0.0,"));

    let samples = h.sample_curve(0.0, 0.2, 3).unwrap();
    let mut buf = Vec::new();
    write_curve_csv(&samples, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("x,f,fprime,fsecond_left,fsecond_right\n"));
}

proptest! {
    #[test]
    fn evaluation_is_monotone(a in 0.0..3.0f64, b in 0.0..3.0f64) {
        let mut h = instance(0.1, 0.25);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let flo = h.evaluate(lo).unwrap();
        let fhi = h.evaluate(hi).unwrap();
        prop_assert!(flo.value >= fhi.value);
        prop_assert!(flo.gradient < 0.0);
    }
}
