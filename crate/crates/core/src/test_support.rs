use std::collections::BTreeMap;

use proptest::prelude::*;

use crate::trace::{IterationRecord, OptimizationTrace, TraceBuilder, TraceMeta};

pub fn meta() -> TraceMeta {
    TraceMeta {
        algorithm: "test".into(),
        problem: "toy".into(),
        params: BTreeMap::from([("beta".into(), "2".into())]),
        measure: "gradient-norm".into(),
    }
}

/// Value-only trace (empty iterates) from explicit columns.
pub fn value_trace(f: &[f64], omega: &[f64], flags: &[bool]) -> OptimizationTrace {
    let records = f
        .iter()
        .zip(omega)
        .zip(flags)
        .enumerate()
        .map(|(k, ((&f, &omega), &successful))| IterationRecord {
            k,
            x: vec![],
            f,
            omega,
            successful,
        })
        .collect();
    OptimizationTrace::new(meta(), records).unwrap()
}

/// Random valid traces: each step either moves (strict decrease, new
/// omega) or stays put (carry-over).
pub fn arb_trace(len: std::ops::Range<usize>) -> impl Strategy<Value = OptimizationTrace> {
    (
        1usize..=3,
        prop::collection::vec((any::<bool>(), 0.0..1.0f64, 0.0..10.0f64, 0.0..5.0f64), len),
    )
        .prop_map(|(n, steps)| {
            let mut b = TraceBuilder::new();
            let mut x = vec![0.5; n];
            let mut f = 100.0;
            let mut omega = 1.0;
            b.push(&x, f, omega);
            for (moves, dec, om, dx) in steps {
                if moves {
                    f -= dec + 1e-3;
                    omega = om;
                    x[0] += dx + 0.25;
                }
                b.push(&x, f, omega);
            }
            b.finish(meta()).unwrap()
        })
}
