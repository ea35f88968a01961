//! Problem definitions, objective evaluators, and KKT residuals shared by
//! all solvers.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss;
use crate::matrix::Matrix;
use crate::trace::Trace;
use crate::vecops;

/// Binary classification dataset: an `N x n` feature matrix with labels in
/// `{-1, +1}`.
#[derive(Debug, Clone)]
pub struct Dataset {
    features: Matrix,
    labels: Vec<f64>,
}

impl Dataset {
    /// Validates that every label is exactly `-1` or `+1` and that the
    /// dataset is non-empty.
    pub fn new(features: Matrix, labels: Vec<f64>) -> Result<Self> {
        if features.rows() == 0 || features.cols() == 0 {
            return Err(Error::EmptyDataset);
        }
        if labels.len() != features.rows() {
            return Err(Error::DimensionMismatch {
                context: "Dataset::new labels",
                expected: features.rows(),
                got: labels.len(),
            });
        }
        if let Some(pos) = labels.iter().position(|&y| y != 1.0 && y != -1.0) {
            return Err(Error::InvalidConfig(format!(
                "label at row {pos} is {}, expected +1 or -1",
                labels[pos]
            )));
        }
        Ok(Self { features, labels })
    }

    pub fn n_samples(&self) -> usize {
        self.features.rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.cols()
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// The signed matrix `Z` whose row `i` is `y_i * x_i`.  Exact because
    /// labels are `+/-1`.
    pub fn signed_matrix(&self) -> Matrix {
        self.features.scale_rows(&self.labels)
    }

    /// Margins `y_i * x_i' beta` (the rows of `Z beta`).
    pub fn margins(&self, beta: &[f64]) -> Vec<f64> {
        let mut m = self.features.matvec(beta);
        for (mi, yi) in m.iter_mut().zip(&self.labels) {
            *mi *= yi;
        }
        m
    }

    /// Raw scores `x_i' beta`, used for classification.
    pub fn scores(&self, beta: &[f64]) -> Vec<f64> {
        self.features.matvec(beta)
    }

    /// Subset of rows, in the given order, preserving the storage layout.
    pub fn select(&self, idx: &[usize]) -> Dataset {
        Dataset {
            features: self.features.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// Model and solver parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DrlrConfig {
    /// Wasserstein radius.
    pub epsilon: f64,
    /// Label-reliability parameter of the transport cost.
    pub kappa: f64,
    /// Initial augmented-Lagrangian penalty.
    pub rho0: f64,
    /// Penalty growth factor; `1` means constant penalty.
    pub gamma: f64,
    /// Stop when `||Z beta - mu||_2` falls below this.
    pub primal_tol: f64,
    /// Iteration cap for the beta-subproblem.
    pub max_iter: usize,
    /// Golden-section interval width, relative to the lambda upper bound.
    pub outer_tol: f64,
    pub seed: u64,
}

impl Default for DrlrConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            kappa: 1.0,
            rho0: 0.001,
            gamma: 1.05,
            primal_tol: 1e-6,
            max_iter: 50_000,
            outer_tol: 1e-4,
            seed: 0,
        }
    }
}

impl DrlrConfig {
    pub fn validate(&self) -> Result<()> {
        let checks: [(bool, &str); 7] = [
            (self.epsilon > 0.0, "epsilon must be > 0"),
            (self.kappa > 0.0, "kappa must be > 0"),
            (self.rho0 > 0.0, "rho0 must be > 0"),
            (self.gamma >= 1.0, "gamma must be >= 1"),
            (self.primal_tol > 0.0, "primal_tol must be > 0"),
            (self.max_iter >= 1, "max_iter must be >= 1"),
            (self.outer_tol > 0.0, "outer_tol must be > 0"),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::InvalidConfig(msg.to_string()));
            }
        }
        Ok(())
    }
}

/// The fixed-`lambda` beta-subproblem
///
/// ```text
/// min (1/N) sum_i [ h(mu_i) + max(mu_i - lambda*kappa, 0) ]
/// s.t. Z beta = mu, ||beta||_inf <= lambda
/// ```
///
/// together with the constants of its `f/P/g` decomposition (see [`crate::loss`]).
#[derive(Debug, Clone)]
pub struct SubproblemInstance {
    z: Arc<Matrix>,
    lambda: f64,
    kappa: f64,
    lipschitz_f: f64,
}

impl SubproblemInstance {
    pub fn new(z: impl Into<Arc<Matrix>>, lambda: f64, kappa: f64) -> Result<Self> {
        let z = z.into();
        if !(lambda >= 0.0) {
            return Err(Error::InvalidConfig(format!("lambda must be >= 0, got {lambda}")));
        }
        if !(kappa > 0.0) {
            return Err(Error::InvalidConfig(format!("kappa must be > 0, got {kappa}")));
        }
        let lipschitz_f = 0.25 / z.rows() as f64;
        Ok(Self { z, lambda, kappa, lipschitz_f })
    }

    pub fn from_dataset(data: &Dataset, lambda: f64, kappa: f64) -> Result<Self> {
        Self::new(data.signed_matrix(), lambda, kappa)
    }

    pub fn z(&self) -> &Matrix {
        &self.z
    }

    pub fn z_arc(&self) -> Arc<Matrix> {
        Arc::clone(&self.z)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn lambda_kappa(&self) -> f64 {
        self.lambda * self.kappa
    }

    /// `L_f = 1/(4N)`, the Lipschitz constant of `grad f`.
    pub fn lipschitz_f(&self) -> f64 {
        self.lipschitz_f
    }

    pub fn n_samples(&self) -> usize {
        self.z.rows()
    }

    pub fn n_features(&self) -> usize {
        self.z.cols()
    }

    /// Same matrix, different radius.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(Arc::clone(&self.z), lambda, self.kappa)
    }
}

/// Solver outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    MaxIter,
    Diverged,
}

/// A solved model: the regression vector, the dual radius, and quality
/// numbers.
#[derive(Debug, Clone, Serialize)]
pub struct Solution {
    pub beta: Vec<f64>,
    pub lambda: f64,
    pub objective: f64,
    pub kkt_residual: f64,
    pub status: SolveStatus,
    #[serde(skip)]
    pub trace: Option<Trace>,
}

/// Full DRLR objective `Omega(lambda, beta)`.
///
/// Returns `+inf` when the indicator `||beta||_inf <= lambda` is violated.
///
/// Panics on a dimension mismatch between `beta` and `data`.
pub fn drlr_objective(beta: &[f64], lambda: f64, data: &Dataset, cfg: &DrlrConfig) -> f64 {
    assert!(lambda >= 0.0, "drlr_objective: lambda must be >= 0");
    assert_eq!(beta.len(), data.n_features(), "drlr_objective: dimension mismatch");
    if vecops::norm_inf(beta) > lambda {
        return f64::INFINITY;
    }
    let lk = lambda * cfg.kappa;
    let margins = data.margins(beta);
    let mean: f64 = margins
        .iter()
        .map(|&m| loss::logloss(m) + (m - lk).max(0.0))
        .sum::<f64>()
        / data.n_samples() as f64;
    lambda * cfg.epsilon + mean
}

/// Split objective `F(beta, mu) = (1/N) sum_i [h(mu_i) + max(mu_i - lk, 0)] + g(beta)`.
///
/// On the constraint manifold `mu = Z beta` this equals
/// `drlr_objective(beta, lambda) - lambda*eps`.
pub fn subproblem_objective(beta: &[f64], mu: &[f64], inst: &SubproblemInstance) -> f64 {
    assert_eq!(beta.len(), inst.n_features(), "subproblem_objective: beta dimension");
    assert_eq!(mu.len(), inst.n_samples(), "subproblem_objective: mu dimension");
    if vecops::norm_inf(beta) > inst.lambda() {
        return f64::INFINITY;
    }
    let lk = inst.lambda_kappa();
    mu.iter()
        .map(|&m| loss::logloss(m) + (m - lk).max(0.0))
        .sum::<f64>()
        / inst.n_samples() as f64
}

/// Residual of the three KKT conditions of the split subproblem:
///
/// 1. `Z' w  in  normal cone of the linf ball at beta`  (max over coordinates),
/// 2. `-w  in  grad f(mu) + dP(mu)`  (Euclidean distance, coordinate-wise
///    interval subdifferential of `|mu_i - lambda*kappa|`),
/// 3. `Z beta - mu = 0`  (Euclidean norm).
///
/// Returns the max of the three.
pub fn kkt_residual(beta: &[f64], mu: &[f64], w: &[f64], inst: &SubproblemInstance) -> f64 {
    let zb = inst.z().matvec(beta);
    let ztw = inst.z().t_matvec(w);
    kkt_residual_parts(beta, mu, w, &zb, &ztw, inst)
}

/// Same as [`kkt_residual`] with `Z beta` and `Z' w` supplied by the caller.
pub(crate) fn kkt_residual_parts(
    beta: &[f64],
    mu: &[f64],
    w: &[f64],
    zb: &[f64],
    ztw: &[f64],
    inst: &SubproblemInstance,
) -> f64 {
    assert_eq!(beta.len(), inst.n_features());
    assert_eq!(mu.len(), inst.n_samples());
    assert_eq!(w.len(), inst.n_samples());
    let n = inst.n_samples() as f64;
    let lk = inst.lambda_kappa();
    let half_weight = 0.5 / n;

    // (iii) primal feasibility
    let primal = vecops::diff_norm2(zb, mu);

    // (ii) dual condition on mu
    let mut dual_mu_sq = 0.0;
    for i in 0..mu.len() {
        let gf = (loss::sigmoid(mu[i]) - 0.5) / n;
        let target = -w[i];
        let d = if mu[i] > lk {
            (target - (gf + half_weight)).abs()
        } else if mu[i] < lk {
            (target - (gf - half_weight)).abs()
        } else {
            ((target - gf).abs() - half_weight).max(0.0)
        };
        dual_mu_sq += d * d;
    }
    let dual_mu = dual_mu_sq.sqrt();

    // (i) dual condition on beta: Z'w in the normal cone of the ball.
    let lambda = inst.lambda();
    let dual_beta = if lambda == 0.0 {
        // the ball is {0}; its normal cone at 0 is all of R^n
        0.0
    } else {
        let mut worst: f64 = 0.0;
        for i in 0..beta.len() {
            let v = ztw[i];
            let d = if beta[i].abs() < lambda {
                v.abs()
            } else if beta[i] >= lambda {
                (-v).max(0.0)
            } else {
                v.max(0.0)
            };
            worst = worst.max(d);
        }
        if vecops::norm_inf(beta) > lambda {
            f64::INFINITY
        } else {
            worst
        }
    };

    primal.max(dual_mu).max(dual_beta)
}
