use serde::{Deserialize, Serialize};

use super::TheoremError;

/// Least-squares slope of `ln k(eps)` against `ln(1/eps)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
    pub points: usize,
}

/// Ordinary least squares in log-log space, unweighted.
///
/// Needs at least three `(eps, k)` pairs with both entries positive and at
/// least two distinct `eps`.
pub fn fit_complexity_exponent(pairs: &[(f64, f64)]) -> Result<ExponentFit, TheoremError> {
    if pairs.len() < 3 {
        return Err(TheoremError::Fit(format!(
            "need at least 3 pairs, got {}",
            pairs.len()
        )));
    }
    if let Some((e, k)) = pairs
        .iter()
        .find(|(e, k)| !(*e > 0.0 && *k > 0.0 && e.is_finite() && k.is_finite()))
    {
        return Err(TheoremError::Fit(format!("non-positive pair ({e}, {k})")));
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|(e, _)| -e.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|(_, k)| k.ln()).collect();
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    if sxx <= f64::EPSILON * x_mean.abs().max(1.0) {
        return Err(TheoremError::Fit("degenerate grid: all eps equal".into()));
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(ExponentFit {
        slope,
        intercept,
        residual: (sse / n).sqrt(),
        points: pairs.len(),
    })
}
