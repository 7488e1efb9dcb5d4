//! In-context linear heads: closed-form ridge regression and pinball-loss
//! (quantile) regression.
//!
//! Both heads standardize the feature columns of the context rows before
//! fitting and map the coefficients back afterwards, so the penalty acts on
//! standardized coefficients and the fit does not depend on column scaling.
//! The intercept is never penalized. Columns that are constant over the
//! context get a zero weight.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::features::FeatureMatrix;

/// Default ridge penalty, applied on standardized coefficients.
pub const DEFAULT_LAMBDA: f64 = 1e-3;

const PINBALL_TOL_REL: f64 = 1e-7;
const PINBALL_PATIENCE: usize = 5;
const PINBALL_MAX_ITER: usize = 5000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
    pub quantile: Option<f64>,
}

impl LinearModel {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }
}

/// Columns standardized over the context rows.
struct Standardized {
    z: DMatrix<f64>,
    active: Vec<usize>,
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl Standardized {
    fn new(x: &FeatureMatrix) -> Self {
        let n = x.n_rows() as f64;
        let mut active = Vec::new();
        let mut means = Vec::new();
        let mut stds = Vec::new();
        for j in 0..x.dim() {
            let col = x.column(j);
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let std = var.sqrt();
            if std > 1e-12 * mean.abs().max(1.0) {
                active.push(j);
                means.push(mean);
                stds.push(std);
            }
        }
        let z = DMatrix::from_fn(x.n_rows(), active.len(), |i, k| {
            (x.row(i)[active[k]] - means[k]) / stds[k]
        });
        Self {
            z,
            active,
            means,
            stds,
        }
    }

    /// Maps standardized coefficients `beta` and an intercept on the
    /// standardized scale back to raw-feature weights.
    fn unscale(&self, dim: usize, beta: &DVector<f64>, intercept_std: f64) -> (Vec<f64>, f64) {
        let mut weights = vec![0.0; dim];
        let mut intercept = intercept_std;
        for (k, &j) in self.active.iter().enumerate() {
            weights[j] = beta[k] / self.stds[k];
            intercept -= weights[j] * self.means[k];
        }
        (weights, intercept)
    }
}

fn check_inputs(x: &FeatureMatrix, y: &[f64], lambda: f64, min_rows: usize) -> Result<()> {
    if x.n_rows() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.n_rows(),
            right: y.len(),
        });
    }
    if y.len() < min_rows {
        return Err(Error::EmptyContext);
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(invalid("lambda must be a finite non-negative number"));
    }
    if y.iter().any(|v| !v.is_finite()) || x.rows().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Solves `a x = b` for symmetric positive semi-definite `a`, adding a small
/// diagonal jitter when the factorization fails.
fn spd_solve(a: DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let p = a.nrows();
    if p == 0 {
        return DVector::zeros(0);
    }
    let scale = (a.trace() / p as f64).max(f64::MIN_POSITIVE);
    let mut jitter = 0.0;
    loop {
        let mut m = a.clone();
        for i in 0..p {
            m[(i, i)] += jitter;
        }
        if let Some(chol) = m.cholesky() {
            return chol.solve(b);
        }
        jitter = if jitter == 0.0 {
            1e-12 * scale
        } else {
            jitter * 10.0
        };
    }
}

/// Ridge regression `min Σ(y − Xw − b)² + λ‖w_std‖²` with unpenalized
/// intercept, solved on the regularized normal equations by Cholesky.
pub fn ridge_fit(x: &FeatureMatrix, y: &[f64], lambda: f64) -> Result<LinearModel> {
    check_inputs(x, y, lambda, 1)?;
    let std = Standardized::new(x);
    let y_mean = y.iter().sum::<f64>() / y.len() as f64;
    let yc = DVector::from_iterator(y.len(), y.iter().map(|v| v - y_mean));
    let zt = std.z.transpose();
    let mut gram = &zt * &std.z;
    for i in 0..gram.nrows() {
        gram[(i, i)] += lambda;
    }
    let beta = spd_solve(gram, &(&zt * yc));
    let (weights, intercept) = std.unscale(x.dim(), &beta, y_mean);
    Ok(LinearModel {
        weights,
        intercept,
        lambda,
        quantile: None,
    })
}

/// `Xw + b` for every row.
pub fn predict(model: &LinearModel, x: &FeatureMatrix) -> Result<Vec<f64>> {
    if x.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: x.dim(),
        });
    }
    Ok(x.rows()
        .map(|r| {
            r.iter()
                .zip(&model.weights)
                .map(|(a, w)| a * w)
                .sum::<f64>()
                + model.intercept
        })
        .collect())
}

/// Pinball loss of residual `r = y − q`.
fn pinball(r: f64, alpha: f64) -> f64 {
    if r > 0.0 {
        alpha * r
    } else {
        (alpha - 1.0) * r
    }
}

/// Logistic smoothing of the pinball loss: `α r + h ln(1 + e^(−r/h))`.
/// Lies above the exact loss by at most `h ln 2`.
fn smoothed(r: f64, alpha: f64, h: f64) -> (f64, f64, f64) {
    let u = -r / h;
    let softplus = if u > 0.0 {
        u + (-u).exp().ln_1p()
    } else {
        u.exp().ln_1p()
    };
    let s = 1.0 / (1.0 + (-u).exp()); // logistic(u)
    let value = alpha * r + h * softplus;
    let slope = alpha - s;
    let curvature = s * (1.0 - s) / h;
    (value, slope, curvature)
}

struct PinballProblem<'a> {
    z: &'a DMatrix<f64>,
    y: &'a [f64],
    alpha: f64,
    lambda: f64,
}

impl PinballProblem<'_> {
    fn residuals(&self, beta: &DVector<f64>, b: f64) -> Vec<f64> {
        let fitted = self.z * beta;
        self.y
            .iter()
            .zip(fitted.iter())
            .map(|(y, f)| y - f - b)
            .collect()
    }

    fn exact_objective(&self, beta: &DVector<f64>, b: f64) -> f64 {
        let loss: f64 = self
            .residuals(beta, b)
            .iter()
            .map(|&r| pinball(r, self.alpha))
            .sum();
        loss + self.lambda * beta.norm_squared()
    }

    fn smoothed_objective(&self, beta: &DVector<f64>, b: f64, h: f64) -> f64 {
        let loss: f64 = self
            .residuals(beta, b)
            .iter()
            .map(|&r| smoothed(r, self.alpha, h).0)
            .sum();
        loss + self.lambda * beta.norm_squared()
    }

    /// Damped Newton direction on the smoothed objective.
    fn newton_step(&self, beta: &DVector<f64>, b: f64, h: f64) -> (DVector<f64>, f64) {
        let p = beta.len();
        let res = self.residuals(beta, b);
        let mut grad = DVector::zeros(p + 1);
        let mut hess = DMatrix::zeros(p + 1, p + 1);
        for (i, &r) in res.iter().enumerate() {
            let (_, slope, curv) = smoothed(r, self.alpha, h);
            // d/dθ of the loss is −slope · [z_i, 1].
            for a in 0..p {
                let za = self.z[(i, a)];
                grad[a] -= slope * za;
                for c in a..p {
                    hess[(a, c)] += curv * za * self.z[(i, c)];
                }
                hess[(a, p)] += curv * za;
            }
            grad[p] -= slope;
            hess[(p, p)] += curv;
        }
        for a in 0..p {
            grad[a] += 2.0 * self.lambda * beta[a];
            hess[(a, a)] += 2.0 * self.lambda;
        }
        for a in 0..=p {
            for c in 0..a {
                hess[(a, c)] = hess[(c, a)];
            }
        }
        let diag_max = (0..=p).map(|a| hess[(a, a)]).fold(0.0, f64::max);
        let damping = 1e-10 * diag_max.max(1.0 / h);
        for a in 0..=p {
            hess[(a, a)] += damping;
        }
        let dir = -spd_solve(hess, &grad);
        (dir, grad.norm())
    }
}

fn empirical_quantile(y: &[f64], alpha: f64) -> f64 {
    let mut s = y.to_vec();
    s.sort_by(f64::total_cmp);
    let k = ((alpha * s.len() as f64).ceil() as usize).clamp(1, s.len()) - 1;
    s[k]
}

/// Linear quantile regression minimizing `Σ QL_α(Xw + b, y) + λ‖w_std‖²`.
///
/// The kinked loss is replaced by a logistic smoothing whose width shrinks
/// geometrically; each width is minimized by damped Newton with backtracking,
/// warm-started from the previous one. A width stops once the objective
/// improves by less than `1e-7` (relative) for 5 consecutive iterations, and
/// the whole run is capped at 5000 iterations. The iterate with the lowest
/// exact objective is returned.
pub fn pinball_fit(x: &FeatureMatrix, y: &[f64], alpha: f64, lambda: f64) -> Result<LinearModel> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("quantile level must lie strictly inside (0, 1)"));
    }
    check_inputs(x, y, lambda, 2)?;
    let std = Standardized::new(x);
    let problem = PinballProblem {
        z: &std.z,
        y,
        alpha,
        lambda,
    };
    let p = std.active.len();

    let mut beta = DVector::zeros(p);
    let mut b = empirical_quantile(y, alpha);
    let mut best = (problem.exact_objective(&beta, b), beta.clone(), b);

    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let spread = (y.iter().map(|v| (v - mean).abs()).sum::<f64>() / y.len() as f64).max(1e-12);
    let h_final = 1e-10 * spread.max(mean.abs());
    let mut h = 0.5 * spread;
    let mut iters = 0;

    'stages: loop {
        let mut current = problem.smoothed_objective(&beta, b, h);
        let mut stalled = 0;
        while stalled < PINBALL_PATIENCE {
            if iters >= PINBALL_MAX_ITER {
                break 'stages;
            }
            iters += 1;
            let (dir, grad_norm) = problem.newton_step(&beta, b, h);
            if grad_norm == 0.0 {
                break;
            }
            let dir_beta = dir.rows(0, p).into_owned();
            let dir_b = dir[p];
            let mut step = 1.0;
            let mut accepted = None;
            for _ in 0..60 {
                let cand_beta = &beta + &dir_beta * step;
                let cand_b = b + dir_b * step;
                let value = problem.smoothed_objective(&cand_beta, cand_b, h);
                if value <= current {
                    accepted = Some((cand_beta, cand_b, value));
                    break;
                }
                step *= 0.5;
            }
            let Some((nb, nbi, value)) = accepted else {
                break;
            };
            let decrease = (current - value) / current.abs().max(f64::MIN_POSITIVE);
            beta = nb;
            b = nbi;
            current = value;
            stalled = if decrease < PINBALL_TOL_REL {
                stalled + 1
            } else {
                0
            };

            let exact = problem.exact_objective(&beta, b);
            if exact < best.0 {
                best = (exact, beta.clone(), b);
            }
        }
        if h <= h_final {
            break;
        }
        h = (h * 0.2).max(h_final);
    }

    let (_, beta, b) = best;
    let (weights, intercept) = std.unscale(x.dim(), &beta, b);
    Ok(LinearModel {
        weights,
        intercept,
        lambda,
        quantile: Some(alpha),
    })
}

/// Quantile predictions keyed by level, sorted by level.
pub type QuantilePredictions = Vec<(f64, Vec<f64>)>;

/// Monotone rearrangement: per timestamp, sorts values across levels so
/// that higher levels never sit below lower ones.
pub fn enforce_noncrossing(mut preds: QuantilePredictions) -> QuantilePredictions {
    preds.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = preds.first().map_or(0, |p| p.1.len());
    let mut column = Vec::with_capacity(preds.len());
    for t in 0..n {
        column.clear();
        column.extend(preds.iter().map(|p| p.1[t]));
        if column.windows(2).all(|w| w[0] <= w[1]) {
            continue;
        }
        column.sort_by(f64::total_cmp);
        for (p, &v) in preds.iter_mut().zip(&column) {
            p.1[t] = v;
        }
    }
    preds
}
