//! Classical decrease exponents `beta` for the method families the refined
//! bound covers. Data only: most of these families are not implemented here.

use serde::Serialize;

/// How `beta` depends on the model degree `p` and criticality order `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ExponentFormula {
    Constant(f64),
    /// `(p + 1) / (p + 1 - q)`
    RegularizationOrder,
    /// `q (p + 1) / p`, used for high criticality orders.
    HighOrder,
    /// `(p + 1) / p`
    GaussNewton,
}

impl ExponentFormula {
    pub fn evaluate(&self, p: Option<u32>, q: u32) -> Option<f64> {
        let q = q as f64;
        match *self {
            ExponentFormula::Constant(b) => Some(b),
            ExponentFormula::RegularizationOrder => {
                let p = p? as f64;
                (p + 1.0 - q > 0.0).then(|| (p + 1.0) / (p + 1.0 - q))
            }
            ExponentFormula::HighOrder => {
                let p = p? as f64;
                (p > 0.0).then(|| q * (p + 1.0) / p)
            }
            ExponentFormula::GaussNewton => {
                let p = p? as f64;
                (p > 0.0).then(|| (p + 1.0) / p)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityClass {
    pub family: &'static str,
    /// Criticality orders the row applies to, inclusive.
    pub orders: (u32, u32),
    pub beta: ExponentFormula,
    pub source: &'static str,
}

impl ComplexityClass {
    fn applies(&self, q: u32) -> bool {
        self.orders.0 <= q && q <= self.orders.1
    }
}

const ANY_HIGH: u32 = u32::MAX;

/// Every known row. Names used by the optimizers in this crate are
/// `steepest-descent`, `trust-region`, `AR2` and `direct-search`.
pub fn exponent_registry() -> Vec<ComplexityClass> {
    use ExponentFormula::*;
    let row = |family, orders, beta, source| ComplexityClass {
        family,
        orders,
        beta,
        source,
    };
    vec![
        row("steepest-descent", (1, 1), Constant(2.0), "CGT22 Th. 2.2.2"),
        row(
            "linesearch",
            (1, 1),
            Constant(2.0),
            "CGT22 Th. 2.2.2, 2.2.4",
        ),
        row(
            "trust-region",
            (1, 1),
            Constant(2.0),
            "CGT22 Th. 2.3.7, 3.2.1",
        ),
        row("trust-region", (2, 2), Constant(3.0), "CGT22 Th. 3.2.6"),
        row("direct-search", (1, 1), Constant(2.0), "Vic13 Cor. 3.1"),
        row("AR1", (1, 1), Constant(2.0), "CGT22 Th. 2.4.3"),
        row("AR2", (1, 1), Constant(1.5), "CGT22 Th. 3.3.4"),
        row("AR2", (2, 2), Constant(3.0), "CGT22 Th. 3.3.9"),
        row("ARp", (1, 3), RegularizationOrder, "CGT22 Th. 4.1.5"),
        row("ARqp", (1, 2), RegularizationOrder, "CGT22 Th. 12.2.14"),
        row("ARqp", (3, ANY_HIGH), HighOrder, "CGT22 Th. 12.2.14"),
        row("ARqpIDA", (1, 2), RegularizationOrder, "CGT22 Th. 13.1.19"),
        row("ARqpIDA", (3, ANY_HIGH), HighOrder, "CGT22 Th. 13.1.19"),
        row("ARqpEDA", (1, 2), RegularizationOrder, "CGT22 Th. 13.3.8"),
        row("ARqpEDA", (3, ANY_HIGH), HighOrder, "CGT22 Th. 13.3.8"),
        row("AN2C", (1, 1), Constant(1.5), "GJT23a Th. 1"),
        row("AN2C", (2, 2), Constant(3.0), "GJT23a Th. 2"),
        row("AR1pGN", (1, 1), GaussNewton, "GT23 Th. 3.5"),
        row("AR2GN", (1, 2), RegularizationOrder, "GT23 Th. 4.5"),
    ]
}

/// `beta` for a family at criticality order `q`; `p` is required by the
/// rows whose exponent depends on the model degree.
pub fn lookup_exponent(family: &str, q: u32, p: Option<u32>) -> Option<f64> {
    exponent_registry()
        .iter()
        .find(|c| c.family.eq_ignore_ascii_case(family) && c.applies(q))
        .and_then(|c| c.beta.evaluate(p, q))
}
