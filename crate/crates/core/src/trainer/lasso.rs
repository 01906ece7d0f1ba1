use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use super::config::AdmmSettings;
use super::gcv::residual_sum_of_squares;
use crate::error::{Error, Result};

/// Balance factor and step used when adapting the ADMM penalty.
const RHO_BALANCE: f64 = 10.0;
const RHO_STEP: f64 = 2.0;
/// Iterations between polishing attempts.
const POLISH_EVERY: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LassoSolution {
    /// `alpha_0..alpha_M`.
    pub weights: Vec<f64>,
    pub lambda: f64,
    /// `(y - Z alpha)^T (y - Z alpha) + lambda ||alpha||_1` on `weights`.
    pub objective: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub converged: bool,
}

/// `sum |w_k|`, optionally leaving out the bias.
pub(crate) fn l1_penalty(weights: &[f64], penalize_intercept: bool) -> f64 {
    let skip = usize::from(!penalize_intercept);
    weights.iter().skip(skip).map(|w| w.abs()).sum()
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// A Lasso problem over a fixed data matrix. The Gram matrix is formed once so
/// several `lambda` values can be solved cheaply.
pub struct LassoProblem<'a> {
    z: &'a DMatrix<f64>,
    y: &'a DVector<f64>,
    /// Gram matrix and `Z^T y` of the column-scaled problem.
    gram: DMatrix<f64>,
    zty: DVector<f64>,
    /// Column scales: `alpha_k = scale_k * beta_k`.
    scale: Vec<f64>,
    penalize_intercept: bool,
}

impl<'a> LassoProblem<'a> {
    pub fn new(z: &'a DMatrix<f64>, y: &'a DVector<f64>) -> Result<Self> {
        if z.nrows() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: z.nrows(),
                found: y.len(),
            });
        }
        let mut gram = z.tr_mul(z);
        let mut zty = z.tr_mul(y);
        // Unit-norm columns keep the splitting well conditioned; zero
        // columns are left alone.
        let scale: Vec<f64> = (0..gram.nrows())
            .map(|k| {
                let d = gram[(k, k)].sqrt();
                if d > 0.0 {
                    1.0 / d
                } else {
                    1.0
                }
            })
            .collect();
        for c in 0..gram.ncols() {
            for r in 0..gram.nrows() {
                gram[(r, c)] *= scale[r] * scale[c];
            }
            zty[c] *= scale[c];
        }
        Ok(Self {
            z,
            y,
            gram,
            zty,
            scale,
            penalize_intercept: true,
        })
    }

    /// When false, column 0 is left out of the penalty.
    pub fn penalize_intercept(mut self, yes: bool) -> Self {
        self.penalize_intercept = yes;
        self
    }

    pub fn objective(&self, weights: &[f64], lambda: f64) -> f64 {
        residual_sum_of_squares(self.z, weights, self.y) + lambda * l1_penalty(weights, self.penalize_intercept)
    }

    fn factor(&self, rho: f64) -> Cholesky<f64, Dyn> {
        let mut a = self.gram.clone();
        for k in 0..a.nrows() {
            a[(k, k)] += rho;
        }
        Cholesky::new(a).expect("Gram matrix plus a positive shift is positive definite")
    }

    /// Solves the optimality conditions exactly on the support and signs of
    /// an iterate. Returns the solution only if it keeps those signs and no
    /// coefficient outside the support wants to enter.
    fn polish(&self, iterate: &DVector<f64>, thresholds: &[f64], settings: &AdmmSettings) -> Option<DVector<f64>> {
        let p = thresholds.len();
        let support: Vec<usize> = (0..p)
            .filter(|&k| self.gram[(k, k)] > 0.0 && (iterate[k] != 0.0 || thresholds[k] == 0.0))
            .collect();
        let sign = |k: usize| {
            if thresholds[k] == 0.0 || iterate[k] == 0.0 {
                0.0
            } else {
                iterate[k].signum()
            }
        };
        let mut b = DVector::zeros(p);
        if !support.is_empty() {
            let g_ss = self.gram.select_rows(&support).select_columns(&support);
            let rhs = DVector::from_fn(support.len(), |i, _| {
                let k = support[i];
                self.zty[k] - thresholds[k] * sign(k)
            });
            let b_s = Cholesky::new(g_ss)?.solve(&rhs);
            for (i, &k) in support.iter().enumerate() {
                let v = b_s[i];
                if !v.is_finite() || (thresholds[k] > 0.0 && v * sign(k) <= 0.0) {
                    return None;
                }
                b[k] = v;
            }
        }
        let grad = &self.gram * &b - &self.zty;
        let mut in_support = vec![false; p];
        for &k in &support {
            in_support[k] = true;
        }
        let admissible = (0..p).filter(|&k| !in_support[k]).all(|k| {
            let slack = settings.abs_tol.max(settings.rel_tol * thresholds[k]);
            grad[k].abs() <= thresholds[k] + slack
        });
        admissible.then_some(b)
    }

    /// Minimises `||y - Z a||^2 + lambda ||a||_1` by over-relaxed ADMM on the
    /// equivalent `1/2 ||y - Z D b||^2 + lambda/2 sum_k d_k |b_k|` with
    /// `a = D b` and `D` scaling the columns of `Z` to unit norm. The returned
    /// weights come from the thresholded iterate, so inactive coefficients
    /// are exact zeros.
    ///
    /// With polishing enabled, every few iterations the support and signs of
    /// the iterate are tried in the exact optimality conditions; a consistent
    /// answer ends the iteration early.
    ///
    /// Running out of iterations yields [`Error::NonConvergence`] carrying the
    /// last iterate.
    pub fn solve(&self, lambda: f64, settings: &AdmmSettings, warm_start: Option<&[f64]>) -> Result<LassoSolution> {
        if !(lambda >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "lambda must be non-negative, got {lambda}"
            )));
        }
        let p = self.gram.nrows();
        let kappa = lambda / 2.0;
        let thresholds: Vec<f64> = (0..p)
            .map(|k| {
                if k == 0 && !self.penalize_intercept {
                    0.0
                } else {
                    kappa * self.scale[k]
                }
            })
            .collect();
        let mut zv = match warm_start {
            Some(w) if w.len() == p => DVector::from_fn(p, |k, _| w[k] / self.scale[k]),
            _ => DVector::zeros(p),
        };
        let mut u = DVector::zeros(p);
        let mut rho = settings.rho;
        let mut chol = self.factor(rho);
        let a = settings.over_relaxation;
        let sqrt_p = (p as f64).sqrt();
        let (mut r_norm, mut s_norm) = (f64::INFINITY, f64::INFINITY);
        let mut converged = false;
        let mut iterations = 0;

        while iterations < settings.max_iterations {
            iterations += 1;
            let rhs = &self.zty + (&zv - &u) * rho;
            let x = chol.solve(&rhs);
            let x_hat = &x * a + &zv * (1.0 - a);
            let z_old = zv.clone();
            for k in 0..p {
                zv[k] = soft_threshold(x_hat[k] + u[k], thresholds[k] / rho);
            }
            u += &x_hat - &zv;

            r_norm = (&x - &zv).norm();
            s_norm = rho * (&zv - &z_old).norm();
            let eps_pri = sqrt_p * settings.abs_tol + settings.rel_tol * x.norm().max(zv.norm());
            let eps_dual = sqrt_p * settings.abs_tol + settings.rel_tol * rho * u.norm();
            let admm_done = r_norm <= eps_pri && s_norm <= eps_dual;
            if settings.polish && (admm_done || iterations % POLISH_EVERY == 0) {
                if let Some(b) = self.polish(&zv, &thresholds, settings) {
                    zv = b;
                    converged = true;
                    break;
                }
            }
            if admm_done {
                converged = true;
                break;
            }
            if settings.adaptive_rho {
                let scale = if r_norm > RHO_BALANCE * s_norm {
                    RHO_STEP
                } else if s_norm > RHO_BALANCE * r_norm {
                    1.0 / RHO_STEP
                } else {
                    1.0
                };
                if scale != 1.0 {
                    rho *= scale;
                    u /= scale;
                    chol = self.factor(rho);
                }
            }
        }

        let weights: Vec<f64> = zv.iter().zip(&self.scale).map(|(b, d)| b * d).collect();
        let solution = LassoSolution {
            objective: self.objective(&weights, lambda),
            weights,
            lambda,
            iterations,
            primal_residual: r_norm,
            dual_residual: s_norm,
            converged,
        };
        if converged {
            Ok(solution)
        } else {
            Err(Error::NonConvergence(Box::new(solution)))
        }
    }
}

/// Solves `min ||y - Z alpha||^2 + lambda ||alpha||_1` with every coefficient,
/// the bias included, penalised.
pub fn lasso_admm(z: &DMatrix<f64>, y: &DVector<f64>, lambda: f64, settings: &AdmmSettings) -> Result<LassoSolution> {
    LassoProblem::new(z, y)?.solve(lambda, settings, None)
}
