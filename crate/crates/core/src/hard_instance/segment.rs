use serde::Serialize;

use super::{Evaluation, HardInstanceError};

/// Cubic on `[x_left, x_left + width]` in the normalized variable
/// `t = (x - x_left) / width`:
///
/// ```text
/// p(t) = f_left + (g_left width) t + c2 t^2 + c3 t^3
/// ```
///
/// Evaluating at `t = 0` returns `f_left` and `g_left` exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegmentCubic {
    pub x_left: f64,
    pub width: f64,
    pub f_left: f64,
    pub g_left: f64,
    pub c2: f64,
    pub c3: f64,
}

impl SegmentCubic {
    /// The unique cubic matching values `f0, f1` and slopes `g0, g1` at the
    /// two ends.
    pub fn hermite(
        x_left: f64,
        width: f64,
        f0: f64,
        f1: f64,
        g0: f64,
        g1: f64,
    ) -> Result<Self, HardInstanceError> {
        if !(width > 0.0) {
            return Err(HardInstanceError::DegenerateSegment(width));
        }
        let df = f1 - f0;
        Ok(Self {
            x_left,
            width,
            f_left: f0,
            g_left: g0,
            c2: 3.0 * df - (2.0 * g0 + g1) * width,
            c3: -2.0 * df + (g0 + g1) * width,
        })
    }

    /// `[a0, a1, a2, a3]` with `p(t) = a0 + a1 t + a2 t^2 + a3 t^3`.
    pub fn coefficients(&self) -> [f64; 4] {
        [self.f_left, self.g_left * self.width, self.c2, self.c3]
    }

    fn t(&self, x: f64) -> f64 {
        (x - self.x_left) / self.width
    }

    pub fn evaluate(&self, x: f64) -> Evaluation {
        let t = self.t(x);
        let h = self.width;
        Evaluation {
            value: self.f_left + t * (self.g_left * h + t * (self.c2 + t * self.c3)),
            gradient: self.g_left + t * (2.0 * self.c2 + 3.0 * self.c3 * t) / h,
            hessian: (2.0 * self.c2 + 6.0 * self.c3 * t) / (h * h),
        }
    }

    /// `p''` at the left and right ends.
    pub fn second_derivative_ends(&self) -> (f64, f64) {
        let h2 = self.width * self.width;
        (2.0 * self.c2 / h2, (2.0 * self.c2 + 6.0 * self.c3) / h2)
    }
}
