//! Model subproblems solved through an eigendecomposition of the model
//! Hessian: the trust-region problem `min g.s + s.Hs/2, ||s|| <= radius` and
//! the cubic problem `min g.s + s.Hs/2 + sigma/3 ||s||^3`.
//!
//! Both global minimizers satisfy `(H + lambda I) s = -g` with
//! `H + lambda I` positive semidefinite; the multiplier is found from the
//! scalar equation `||s(lambda)|| = r(lambda)` with `r = radius` or
//! `r = lambda / sigma`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;
use thiserror::Error;

const RESIDUAL_TOL: f64 = 1e-10;
const MAX_SECULAR_ITERATIONS: usize = 500;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SubproblemError {
    #[error("dimension mismatch: gradient {gradient}, Hessian {rows}x{cols}")]
    Dimension {
        gradient: usize,
        rows: usize,
        cols: usize,
    },
    #[error("{0} must be positive and finite")]
    Parameter(&'static str),
    #[error("secular equation did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubproblemStep {
    pub s: Vec<f64>,
    /// Multiplier `lambda` with `(H + lambda I) s = -g`.
    pub lambda: f64,
    /// `-(g.s + s.Hs/2)`, plus `-sigma/3 ||s||^3` for the cubic model.
    pub model_decrease: f64,
    /// The Cauchy point replaced the eigen-based step.
    pub cauchy: bool,
}

struct Spectral {
    values: DVector<f64>,
    vectors: DMatrix<f64>,
    ghat: DVector<f64>,
    gnorm: f64,
    /// Eigenvalues this close to `-lambda_lo` count as singular.
    singular_tol: f64,
}

impl Spectral {
    fn new(g: &[f64], h: &DMatrix<f64>) -> Result<Self, SubproblemError> {
        let n = g.len();
        if h.nrows() != n || h.ncols() != n {
            return Err(SubproblemError::Dimension {
                gradient: n,
                rows: h.nrows(),
                cols: h.ncols(),
            });
        }
        let sym = (h + h.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        let gv = DVector::from_column_slice(g);
        let ghat = eig.eigenvectors.transpose() * &gv;
        let scale = eig.eigenvalues.amax().max(1.0);
        Ok(Self {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
            ghat,
            gnorm: gv.norm(),
            singular_tol: 1e-14 * scale,
        })
    }

    fn min_index(&self) -> usize {
        self.values.imin()
    }

    fn lambda_min(&self) -> f64 {
        self.values.min()
    }

    /// `||s(lambda)||` over components with `lambda_i + lambda` not singular.
    fn norm_at(&self, lambda: f64, skip_singular: bool) -> f64 {
        let mut acc = 0.0;
        for (li, gi) in self.values.iter().zip(self.ghat.iter()) {
            let d = li + lambda;
            if skip_singular && d <= self.singular_tol {
                continue;
            }
            acc += (gi / d).powi(2);
        }
        acc.sqrt()
    }

    /// `d ||s|| / d lambda`.
    fn norm_derivative(&self, lambda: f64, norm: f64) -> f64 {
        if norm == 0.0 {
            return 0.0;
        }
        let sum: f64 = self
            .values
            .iter()
            .zip(self.ghat.iter())
            .map(|(li, gi)| gi * gi / (li + lambda).powi(3))
            .sum();
        -sum / norm
    }

    fn step_at(&self, lambda: f64, skip_singular: bool) -> DVector<f64> {
        let coeffs = DVector::from_iterator(
            self.values.len(),
            self.values.iter().zip(self.ghat.iter()).map(|(li, gi)| {
                let d = li + lambda;
                if skip_singular && d <= self.singular_tol {
                    0.0
                } else {
                    -gi / d
                }
            }),
        );
        &self.vectors * coeffs
    }

    /// Gradient weight on the near-singular directions at `lambda`.
    fn singular_weight(&self, lambda: f64) -> f64 {
        self.values
            .iter()
            .zip(self.ghat.iter())
            .filter(|(li, _)| *li + lambda <= self.singular_tol)
            .map(|(_, gi)| gi * gi)
            .sum::<f64>()
            .sqrt()
    }

    /// Solves `||s(lambda)|| = r(lambda)` for `lambda >= lo`, including the
    /// hard case where the gradient has no component along the leftmost
    /// eigenvector.
    fn solve<R, D>(&self, lo: f64, r: R, dr: D) -> Result<(f64, DVector<f64>), SubproblemError>
    where
        R: Fn(f64) -> f64,
        D: Fn(f64) -> f64,
    {
        if self.singular_weight(lo) <= 1e-12 * self.gnorm.max(f64::MIN_POSITIVE) {
            let rest = self.norm_at(lo, true);
            let target = r(lo);
            if rest <= target {
                let tau = (target * target - rest * rest).max(0.0).sqrt();
                let q = self.vectors.column(self.min_index()).into_owned();
                return Ok((lo, self.step_at(lo, true) + q * tau));
            }
        }

        let h = |lambda: f64| self.norm_at(lambda, false) - r(lambda);
        let mut a = lo;
        let mut width = lo.abs().max(1.0);
        let mut b = lo + width;
        let mut grow = 0;
        while !(h(b) < 0.0) {
            a = b;
            width *= 2.0;
            b = lo + width;
            grow += 1;
            if grow > 2000 {
                return Err(SubproblemError::NoConvergence { residual: h(b) });
            }
        }

        let mut lambda = b;
        let mut value = h(b);
        for _ in 0..MAX_SECULAR_ITERATIONS {
            let norm = self.norm_at(lambda, false);
            let slope = self.norm_derivative(lambda, norm) - dr(lambda);
            let newton = lambda - value / slope;
            let next = if newton.is_finite() && newton > a && newton < b {
                newton
            } else {
                0.5 * (a + b)
            };
            if next == lambda || b - a <= 4.0 * f64::EPSILON * b.abs().max(f64::MIN_POSITIVE) {
                break;
            }
            lambda = next;
            value = h(lambda);
            if value.abs() <= 1e-14 * r(lambda).max(1e-300) {
                break;
            }
            if value > 0.0 {
                a = lambda;
            } else {
                b = lambda;
            }
        }
        let target = r(lambda);
        if (self.norm_at(lambda, false) - target).abs() > RESIDUAL_TOL * target.max(1.0) {
            return Err(SubproblemError::NoConvergence {
                residual: value.abs(),
            });
        }
        Ok((lambda, self.step_at(lambda, false)))
    }
}

fn quadratic_decrease(g: &[f64], h: &DMatrix<f64>, s: &DVector<f64>) -> f64 {
    let gs: f64 = g.iter().zip(s.iter()).map(|(a, b)| a * b).sum();
    let shs = s.dot(&(h * s));
    -(gs + 0.5 * shs)
}

fn check_residual(
    g: &[f64],
    h: &DMatrix<f64>,
    s: &DVector<f64>,
    lambda: f64,
) -> Result<(), SubproblemError> {
    let gv = DVector::from_column_slice(g);
    let residual = (h * s + s * lambda + &gv).norm();
    let scale = gv.norm() + (h.norm() + lambda) * s.norm();
    if residual <= RESIDUAL_TOL * scale.max(1.0) {
        Ok(())
    } else {
        Err(SubproblemError::NoConvergence { residual })
    }
}

/// Global minimizer of the quadratic model inside the ball of `radius`,
/// replaced by the Cauchy point if that decreases the model more.
pub fn trust_region_step(
    g: &[f64],
    h: &DMatrix<f64>,
    radius: f64,
) -> Result<SubproblemStep, SubproblemError> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(SubproblemError::Parameter("radius"));
    }
    let sp = Spectral::new(g, h)?;
    let n = g.len();
    if sp.gnorm == 0.0 && sp.lambda_min() >= 0.0 {
        return Ok(SubproblemStep {
            s: vec![0.0; n],
            lambda: 0.0,
            model_decrease: 0.0,
            cauchy: false,
        });
    }

    let (lambda, s) = if sp.lambda_min() > sp.singular_tol && sp.norm_at(0.0, false) <= radius {
        (0.0, sp.step_at(0.0, false))
    } else {
        let lo = (-sp.lambda_min()).max(0.0);
        sp.solve(lo, |_| radius, |_| 0.0)?
    };
    check_residual(g, h, &s, lambda)?;
    let decrease = quadratic_decrease(g, h, &s);

    let gv = DVector::from_column_slice(g);
    if sp.gnorm > 0.0 {
        let curvature = gv.dot(&(h * &gv));
        let tau = if curvature <= 0.0 {
            1.0
        } else {
            (sp.gnorm.powi(3) / (radius * curvature)).min(1.0)
        };
        let sc = &gv * (-tau * radius / sp.gnorm);
        let cauchy_decrease = quadratic_decrease(g, h, &sc);
        if cauchy_decrease > decrease {
            return Ok(SubproblemStep {
                s: sc.iter().copied().collect(),
                lambda,
                model_decrease: cauchy_decrease,
                cauchy: true,
            });
        }
    }
    Ok(SubproblemStep {
        s: s.iter().copied().collect(),
        lambda,
        model_decrease: decrease,
        cauchy: false,
    })
}

/// Global minimizer of the cubically regularized quadratic model.
pub fn cubic_step(
    g: &[f64],
    h: &DMatrix<f64>,
    sigma: f64,
) -> Result<SubproblemStep, SubproblemError> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(SubproblemError::Parameter("sigma"));
    }
    let sp = Spectral::new(g, h)?;
    let n = g.len();
    if sp.gnorm == 0.0 && sp.lambda_min() >= 0.0 {
        return Ok(SubproblemStep {
            s: vec![0.0; n],
            lambda: 0.0,
            model_decrease: 0.0,
            cauchy: false,
        });
    }
    let lo = (-sp.lambda_min()).max(0.0);
    let (lambda, s) = sp.solve(lo, |l| l / sigma, |_| 1.0 / sigma)?;
    check_residual(g, h, &s, lambda)?;
    let decrease = quadratic_decrease(g, h, &s) - sigma / 3.0 * s.norm().powi(3);
    Ok(SubproblemStep {
        s: s.iter().copied().collect(),
        lambda,
        model_decrease: decrease,
        cauchy: false,
    })
}
