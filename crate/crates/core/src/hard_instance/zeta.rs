//! Riemann zeta on the real half-line `s > 1` by Euler-Maclaurin summation.

use crate::summation::CompensatedSum;

use super::HardInstanceError;

/// `B_2, B_4, B_6, B_8`.
const BERNOULLI: [f64; 4] = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0];

const MIN_TERMS: usize = 20;
const MAX_TERMS: usize = 1_000_000;

/// Number of explicitly summed terms for a given `s`.
fn term_count(s: f64) -> usize {
    let n = (10.0 / (s - 1.0)).ceil();
    if n.is_finite() {
        (n as usize).clamp(MIN_TERMS, MAX_TERMS)
    } else {
        MAX_TERMS
    }
}

/// `zeta(s)` for real `s > 1`, relative error below `1e-10`.
///
/// Sums `k^-s` for `k < N` and replaces the tail by its Euler-Maclaurin
/// expansion with Bernoulli corrections through `B_8`:
///
/// ```text
/// sum_{k>=N} k^-s = N^{1-s}/(s-1) + N^-s/2
///                   + sum_j B_{2j}/(2j)! s(s+1)...(s+2j-2) N^{-s-2j+1} + ...
/// ```
pub fn zeta(s: f64) -> Result<f64, HardInstanceError> {
    if !(s > 1.0) || !s.is_finite() {
        return Err(HardInstanceError::ZetaDomain(s));
    }
    let n = term_count(s);
    let nf = n as f64;

    // smallest terms first
    let mut acc = CompensatedSum::default();
    for k in (1..n).rev() {
        acc += (k as f64).powf(-s);
    }

    let n_pow = nf.powf(-s);
    acc += nf * n_pow / (s - 1.0);
    acc += 0.5 * n_pow;

    // rising factorial s(s+1)...(s+2j-2) / (2j)! times N^{-s-2j+1}
    let mut coeff = s / 2.0;
    let mut power = n_pow / nf;
    for (j, b) in BERNOULLI.iter().enumerate() {
        if j > 0 {
            let m = (2 * j) as f64;
            coeff *= (s + m - 1.0) * (s + m) / ((m + 1.0) * (m + 2.0));
            power /= nf * nf;
        }
        acc += b * coeff * power;
    }
    Ok(acc.value())
}
