//! A univariate C¹ piecewise cubic on which steepest descent with an Armijo
//! linesearch needs exactly `ceil(eps^{-1/(1/2+delta)})` iterations to reach
//! `|f'| <= eps`: `o(eps^-2)`, but as close to `eps^-2` as desired when
//! `delta` is small.
//!
//! The knots are defined by four sequences, for `k >= 1`:
//!
//! ```text
//! g_0 = -2,        g_k = -k^{-(1/2+delta)}
//! f_0 = zeta(1+2 delta),   f_1 = f_0 - 4 alpha,   f_{k+1} = f_k - alpha k^{-(1+2 delta)}
//! x_0 = 0,         x_1 = 2 alpha,                 x_{k+1} = x_k + alpha k^{-(1/2+delta)}
//! s_k = x_{k+1} - x_k
//! ```
//!
//! On each `[x_k, x_{k+1}]` the function is the cubic Hermite interpolant of
//! `(f_k, g_k)` and `(f_{k+1}, g_{k+1})`; left of the origin it is the line
//! `f_0 - 2x`. The Hessian jumps at the knots, and the convention here is that
//! a knot belongs to the segment on its right.

mod segment;
mod zeta;

use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::summation::CompensatedSum;
pub use segment::SegmentCubic;
pub use zeta::zeta;

/// Parameters used for the plotted example.
pub const FIGURE_ALPHA: f64 = 0.1;
pub const FIGURE_DELTA: f64 = 0.001;

/// Default cap on the number of cached knots.
pub const DEFAULT_MAX_KNOTS: usize = 10_000_000;

const INITIAL_HORIZON: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HardInstanceError {
    #[error("zeta is only defined here for real s > 1, got {0}")]
    ZetaDomain(f64),
    #[error("alpha must lie in (0, 1], got {0}")]
    Alpha(f64),
    #[error("delta must be positive and finite, got {0}")]
    Delta(f64),
    #[error(
        "(1 - alpha) zeta(1 + 2 delta) - 4 alpha = {margin} < 0: the knot values would \
         eventually become negative (alpha = {alpha}, delta = {delta})"
    )]
    NegativeLimit { alpha: f64, delta: f64, margin: f64 },
    #[error("horizon {requested} exceeds the knot cap {cap}")]
    HorizonCap { requested: usize, cap: usize },
    #[error("segment width must be positive, got {0}")]
    DegenerateSegment(f64),
    #[error("cannot evaluate at {0}")]
    BadPoint(f64),
    #[error("tolerance must be positive, got {0}")]
    Tolerance(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HardInstanceParams {
    alpha: f64,
    delta: f64,
}

impl HardInstanceParams {
    /// Validates the ranges and that the knot values stay nonnegative,
    /// i.e. `(1 - alpha) zeta(1 + 2 delta) - 4 alpha >= 0`.
    pub fn new(alpha: f64, delta: f64) -> Result<Self, HardInstanceError> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(HardInstanceError::Alpha(alpha));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(HardInstanceError::Delta(delta));
        }
        let margin = (1.0 - alpha) * zeta(1.0 + 2.0 * delta)? - 4.0 * alpha;
        if margin < 0.0 {
            return Err(HardInstanceError::NegativeLimit {
                alpha,
                delta,
                margin,
            });
        }
        Ok(Self { alpha, delta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// `|g_k|`: 2 at the origin, `k^{-(1/2+delta)}` afterwards.
pub fn gradient_magnitude(k: usize, delta: f64) -> f64 {
    if k == 0 {
        2.0
    } else {
        (k as f64).powf(-(0.5 + delta))
    }
}

/// First `k` with `|g_k| <= eps`.
///
/// Starts from `ceil(eps^{-1/(1/2+delta)})` and corrects it by comparing
/// `k^{-(1/2+delta)}` with `eps` directly, so integer boundaries are decided
/// the same way the iteration itself decides them. `eps >= 2` gives 0 since
/// `|g_0| = 2`.
pub fn predicted_k_eps(eps: f64, delta: f64) -> Result<usize, HardInstanceError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(HardInstanceError::Tolerance(eps));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(HardInstanceError::Delta(delta));
    }
    if gradient_magnitude(0, delta) <= eps {
        return Ok(0);
    }
    let estimate = eps.powf(-1.0 / (0.5 + delta)).ceil();
    let mut k = if estimate >= 1.0 {
        estimate as usize
    } else {
        1
    };
    while k > 1 && gradient_magnitude(k - 1, delta) <= eps {
        k -= 1;
    }
    while gradient_magnitude(k, delta) > eps {
        k += 1;
    }
    Ok(k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Knot {
    pub k: usize,
    pub x: f64,
    pub f: f64,
    pub g: f64,
    /// `x_{k+1} - x_k`.
    pub s: f64,
}

/// `(f(x), f'(x), f''(x))` with `f''` taken as the right limit at knots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub value: f64,
    pub gradient: f64,
    pub hessian: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveSample {
    pub x: f64,
    pub f: f64,
    pub fprime: f64,
    pub fsecond_left: f64,
    pub fsecond_right: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HermiteCheck {
    pub ok: bool,
    pub first_failure: Option<usize>,
    /// `max_k |f_{k+1} - f_k - g_k s_k| / s_k^2`; must not exceed 1.
    pub worst_value_ratio: f64,
    /// `max_k alpha |g_{k+1} - g_k| / s_k`; must not exceed 1.
    pub worst_gradient_ratio: f64,
}

/// The knot sequences up to a horizon that grows on demand.
#[derive(Debug, Clone)]
pub struct HardInstance {
    params: HardInstanceParams,
    f0: f64,
    max_knots: usize,
    x: Vec<f64>,
    f: Vec<f64>,
    g: Vec<f64>,
    f_acc: CompensatedSum,
}

impl HardInstance {
    pub fn new(params: HardInstanceParams) -> Result<Self, HardInstanceError> {
        let f0 = zeta(1.0 + 2.0 * params.delta)?;
        let mut inst = Self {
            params,
            f0,
            max_knots: DEFAULT_MAX_KNOTS,
            x: vec![0.0],
            f: vec![f0],
            g: vec![-2.0],
            f_acc: CompensatedSum::new(f0),
        };
        inst.extend_to(INITIAL_HORIZON)?;
        Ok(inst)
    }

    pub fn with_max_knots(mut self, max_knots: usize) -> Self {
        self.max_knots = max_knots;
        self
    }

    pub fn params(&self) -> HardInstanceParams {
        self.params
    }

    /// `zeta(1 + 2 delta)`.
    pub fn f0(&self) -> f64 {
        self.f0
    }

    /// `lim f_k = (1 - alpha) zeta(1 + 2 delta) - 4 alpha`.
    pub fn f_limit(&self) -> f64 {
        (1.0 - self.params.alpha) * self.f0 - 4.0 * self.params.alpha
    }

    /// Index of the last cached knot.
    pub fn horizon(&self) -> usize {
        self.x.len() - 1
    }

    /// Makes knots `0..=k` available.
    pub fn extend_to(&mut self, k: usize) -> Result<(), HardInstanceError> {
        if k + 1 > self.max_knots {
            return Err(HardInstanceError::HorizonCap {
                requested: k,
                cap: self.max_knots,
            });
        }
        let HardInstanceParams { alpha, delta } = self.params;
        while self.x.len() <= k {
            let last = self.x.len() - 1;
            // Plain recurrence for the abscissae: an Armijo iteration with
            // step alpha computes exactly this sum, so its iterates land on
            // the knots bit for bit.
            let (step, decrease) = if last == 0 {
                (2.0 * alpha, 4.0 * alpha)
            } else {
                let kf = last as f64;
                (
                    alpha * kf.powf(-(0.5 + delta)),
                    alpha * kf.powf(-(1.0 + 2.0 * delta)),
                )
            };
            self.x.push(self.x[last] + step);
            self.f_acc += -decrease;
            self.f.push(self.f_acc.value());
            self.g.push(-gradient_magnitude(last + 1, delta));
        }
        Ok(())
    }

    fn ensure(&mut self, k: usize) -> Result<(), HardInstanceError> {
        if k > self.horizon() {
            let mut target = (2 * self.horizon()).max(k);
            if target >= self.max_knots {
                target = k.max(self.max_knots - 1);
            }
            self.extend_to(target)?;
        }
        Ok(())
    }

    pub fn gradient_value(&self, k: usize) -> f64 {
        -gradient_magnitude(k, self.params.delta)
    }

    pub fn objective_value(&mut self, k: usize) -> Result<f64, HardInstanceError> {
        self.ensure(k)?;
        Ok(self.f[k])
    }

    pub fn iterate_value(&mut self, k: usize) -> Result<f64, HardInstanceError> {
        self.ensure(k)?;
        Ok(self.x[k])
    }

    pub fn step_value(&mut self, k: usize) -> Result<f64, HardInstanceError> {
        self.ensure(k + 1)?;
        Ok(self.x[k + 1] - self.x[k])
    }

    pub fn knot(&mut self, k: usize) -> Result<Knot, HardInstanceError> {
        self.ensure(k + 1)?;
        Ok(Knot {
            k,
            x: self.x[k],
            f: self.f[k],
            g: self.g[k],
            s: self.x[k + 1] - self.x[k],
        })
    }

    fn cached_segment(&self, k: usize) -> Result<SegmentCubic, HardInstanceError> {
        SegmentCubic::hermite(
            self.x[k],
            self.x[k + 1] - self.x[k],
            self.f[k],
            self.f[k + 1],
            self.g[k],
            self.g[k + 1],
        )
    }

    /// Hermite cubic on `[x_k, x_{k+1}]`.
    pub fn segment_cubic(&mut self, k: usize) -> Result<SegmentCubic, HardInstanceError> {
        self.ensure(k + 1)?;
        self.cached_segment(k)
    }

    /// Segment owning `x >= 0`, if it lies below the last cached knot.
    fn locate(&self, x: f64) -> Option<usize> {
        let last = *self.x.last().expect("knots");
        if x >= last {
            return None;
        }
        Some(self.x.partition_point(|&xk| xk <= x) - 1)
    }

    /// Evaluation that never extends the cache. Returns `None` at or beyond
    /// the last cached knot. Safe to call from several threads once the
    /// instance has been extended far enough.
    pub fn evaluate_cached(&self, x: f64) -> Option<Result<Evaluation, HardInstanceError>> {
        if x.is_nan() {
            return Some(Err(HardInstanceError::BadPoint(x)));
        }
        if x < 0.0 {
            return Some(Ok(Evaluation {
                value: self.f0 - 2.0 * x,
                gradient: -2.0,
                hessian: 0.0,
            }));
        }
        let k = self.locate(x)?;
        Some(self.cached_segment(k).map(|seg| seg.evaluate(x)))
    }

    /// Value and derivatives anywhere on the real line, extending the knot
    /// cache (doubling the horizon) when `x` passes the last cached knot.
    pub fn evaluate(&mut self, x: f64) -> Result<Evaluation, HardInstanceError> {
        if !x.is_finite() {
            return Err(HardInstanceError::BadPoint(x));
        }
        loop {
            if let Some(result) = self.evaluate_cached(x) {
                return result;
            }
            let next = self.horizon() + 1;
            self.ensure(next)?;
        }
    }

    /// Left limit of `f''` at `x`; equals [`Evaluation::hessian`] away from
    /// knots.
    pub fn second_derivative_left(&mut self, x: f64) -> Result<f64, HardInstanceError> {
        let here = self.evaluate(x)?;
        if x <= 0.0 {
            return Ok(if x == 0.0 { 0.0 } else { here.hessian });
        }
        let k = self.locate(x).expect("evaluate extended the cache");
        if self.x[k] == x {
            Ok(self.cached_segment(k - 1)?.second_derivative_ends().1)
        } else {
            Ok(here.hessian)
        }
    }

    /// Checks the two Hermite preconditions on every segment `k < horizon`:
    /// `|f_{k+1} - f_k - g_k s_k| <= s_k^2` and `|g_{k+1} - g_k| <= s_k / alpha`.
    pub fn verify_hermite_preconditions(
        &mut self,
        horizon: usize,
    ) -> Result<HermiteCheck, HardInstanceError> {
        self.ensure(horizon)?;
        let alpha = self.params.alpha;
        let mut check = HermiteCheck {
            ok: true,
            first_failure: None,
            worst_value_ratio: 0.0,
            worst_gradient_ratio: 0.0,
        };
        for k in 0..horizon {
            let s = self.x[k + 1] - self.x[k];
            let value_ratio = (self.f[k + 1] - self.f[k] - self.g[k] * s).abs() / (s * s);
            let gradient_ratio = alpha * (self.g[k + 1] - self.g[k]).abs() / s;
            check.worst_value_ratio = check.worst_value_ratio.max(value_ratio);
            check.worst_gradient_ratio = check.worst_gradient_ratio.max(gradient_ratio);
            if (value_ratio > 1.0 || gradient_ratio > 1.0) && check.first_failure.is_none() {
                check.first_failure = Some(k);
                check.ok = false;
            }
        }
        Ok(check)
    }

    /// Largest `|f''|` over the left extension and the first `horizon`
    /// segments. `f''` is linear on each segment, so the endpoints suffice.
    pub fn lipschitz_bound(&mut self, horizon: usize) -> Result<f64, HardInstanceError> {
        self.ensure(horizon)?;
        let mut bound = 0.0f64;
        for k in 0..horizon {
            let (left, right) = self.cached_segment(k)?.second_derivative_ends();
            bound = bound.max(left.abs()).max(right.abs());
        }
        Ok(bound)
    }

    /// `n` evenly spaced samples of `[a, b]` plus every knot inside it,
    /// sorted by `x`. Knots carry both one-sided second derivatives.
    pub fn sample_curve(
        &mut self,
        a: f64,
        b: f64,
        n: usize,
    ) -> Result<Vec<CurveSample>, HardInstanceError> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(HardInstanceError::BadPoint(if a.is_finite() {
                b
            } else {
                a
            }));
        }
        let mut xs: Vec<f64> = match n {
            0 => vec![],
            1 => vec![a],
            _ => (0..n)
                .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
                .collect(),
        };
        self.evaluate(b)?;
        xs.extend(self.x.iter().copied().filter(|&xk| (a..=b).contains(&xk)));
        if (a..=b).contains(&0.0) {
            xs.push(0.0);
        }
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs.into_iter()
            .map(|x| {
                let e = self.evaluate(x)?;
                Ok(CurveSample {
                    x,
                    f: e.value,
                    fprime: e.gradient,
                    fsecond_left: self.second_derivative_left(x)?,
                    fsecond_right: e.hessian,
                })
            })
            .collect()
    }

    /// CSV `k,x,f,g,s` for knots `0..horizon`.
    pub fn write_knot_table<W: Write>(&mut self, horizon: usize, out: W) -> io::Result<()> {
        self.ensure(horizon + 1).map_err(io::Error::other)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "x", "f", "g", "s"])?;
        for k in 0..=horizon {
            w.serialize((
                k,
                self.x[k],
                self.f[k],
                self.g[k],
                self.x[k + 1] - self.x[k],
            ))?;
        }
        w.flush()
    }
}

/// CSV `x,f,fprime,fsecond_left,fsecond_right`.
pub fn write_curve_csv<W: Write>(samples: &[CurveSample], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in samples {
        w.serialize(s)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests;
