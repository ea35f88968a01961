//! Reference classifiers for the accuracy comparison: plain logistic
//! regression (LR), linf-regularized logistic regression (RLR), and a thin
//! wrapper that trains the DRLR model end to end.

use std::collections::BTreeMap;

use crate::boxqp::{self, BoxQpSolverKind};
use crate::data::Rng;
use crate::error::Result;
use crate::loss;
use crate::model::{Dataset, DrlrConfig, Solution};
use crate::outer;
use crate::vecops;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Lr,
    Rlr,
    Drlr,
}

/// A trained linear classifier predicting `sign(beta' x)` (ties count as `+1`).
#[derive(Debug, Clone)]
pub struct LinearClassifier {
    pub beta: Vec<f64>,
    pub kind: ModelKind,
    pub hyperparams: BTreeMap<String, f64>,
    /// False when training stopped at the iteration cap (e.g. separable
    /// data driving `||beta||` to infinity).
    pub converged: bool,
}

/// Mean log-loss `(1/N) sum_i h(y_i beta' x_i)`.
pub fn lr_objective(beta: &[f64], data: &Dataset) -> f64 {
    data.margins(beta).iter().map(|&m| loss::logloss(m)).sum::<f64>() / data.n_samples() as f64
}

/// RLR objective: mean log-loss plus `epsilon ||beta||_inf`.
pub fn rlr_objective(beta: &[f64], data: &Dataset, epsilon: f64) -> f64 {
    lr_objective(beta, data) + epsilon * vecops::norm_inf(beta)
}

fn lr_gradient(beta: &[f64], z: &crate::matrix::Matrix) -> Vec<f64> {
    let n = z.rows() as f64;
    let margins = z.matvec(beta);
    let inner: Vec<f64> = margins.iter().map(|&m| (loss::sigmoid(m) - 1.0) / n).collect();
    z.t_matvec(&inner)
}

/// Trains plain logistic regression by accelerated gradient descent with
/// step `1 / L`, `L = lambda_max(Z'Z)/(4N)`; stops when the gradient norm
/// reaches `tol`.
pub fn train_lr(data: &Dataset, tol: f64, max_iter: usize) -> LinearClassifier {
    let z = data.signed_matrix();
    let n = data.n_samples() as f64;
    let step = 4.0 * n / boxqp::estimate_spectral_bound(&z);
    let nf = data.n_features();

    let mut x = vec![0.0; nf];
    let mut x_prev = x.clone();
    let mut momentum = 1usize;
    let mut converged = vecops::norm2(&lr_gradient(&x, &z)) <= tol;
    if !converged {
        for _ in 0..max_iter {
            let beta_k = momentum as f64 / (momentum + 3) as f64;
            let y: Vec<f64> = (0..nf).map(|i| x[i] + beta_k * (x[i] - x_prev[i])).collect();
            let gy = lr_gradient(&y, &z);
            let x_new: Vec<f64> = (0..nf).map(|i| y[i] - step * gy[i]).collect();
            let mut along = 0.0;
            for i in 0..nf {
                along += gy[i] * (x_new[i] - x[i]);
            }
            momentum = if along > 0.0 { 1 } else { momentum + 1 };
            x_prev = x;
            x = x_new;
            if vecops::norm2(&lr_gradient(&x, &z)) <= tol {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        log::warn!("train_lr hit its iteration cap; data may be separable");
    }
    LinearClassifier { beta: x, kind: ModelKind::Lr, hyperparams: BTreeMap::new(), converged }
}

/// Trains linf-regularized logistic regression by accelerated proximal
/// gradient.  The prox of `t ||.||_inf` comes from Moreau decomposition:
/// `prox(v) = v - project_l1_ball(v, t)`.  Stops when the prox-gradient
/// fixed-point residual reaches `tol`.
pub fn train_rlr(data: &Dataset, epsilon: f64, tol: f64, max_iter: usize) -> LinearClassifier {
    assert!(epsilon > 0.0, "train_rlr: epsilon must be > 0");
    let z = data.signed_matrix();
    let n = data.n_samples() as f64;
    let step = 4.0 * n / boxqp::estimate_spectral_bound(&z);
    let nf = data.n_features();

    let prox = |v: &[f64]| -> Vec<f64> {
        let proj = loss::project_l1_ball(v, step * epsilon);
        (0..v.len()).map(|i| v[i] - proj[i]).collect()
    };
    let fixed_point_residual = |x: &[f64]| -> f64 {
        let g = lr_gradient(x, &z);
        let v: Vec<f64> = (0..x.len()).map(|i| x[i] - step * g[i]).collect();
        let p = prox(&v);
        vecops::diff_norm2(x, &p) / step
    };

    let mut x = vec![0.0; nf];
    let mut x_prev = x.clone();
    let mut momentum = 1usize;
    let mut converged = fixed_point_residual(&x) <= tol;
    if !converged {
        for _ in 0..max_iter {
            let beta_k = momentum as f64 / (momentum + 3) as f64;
            let y: Vec<f64> = (0..nf).map(|i| x[i] + beta_k * (x[i] - x_prev[i])).collect();
            let gy = lr_gradient(&y, &z);
            let v: Vec<f64> = (0..nf).map(|i| y[i] - step * gy[i]).collect();
            let x_new = prox(&v);
            let mut along = 0.0;
            for i in 0..nf {
                along += (y[i] - x_new[i]) * (x_new[i] - x[i]);
            }
            momentum = if along > 0.0 { 1 } else { momentum + 1 };
            x_prev = x;
            x = x_new;
            if fixed_point_residual(&x) <= tol {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        log::warn!("train_rlr hit its iteration cap");
    }
    let mut hyperparams = BTreeMap::new();
    hyperparams.insert("epsilon".to_string(), epsilon);
    LinearClassifier { beta: x, kind: ModelKind::Rlr, hyperparams, converged }
}

/// Trains the DRLR model via the golden-section outer search.
pub fn train_drlr(
    data: &Dataset,
    cfg: &DrlrConfig,
    inner: BoxQpSolverKind,
) -> Result<(LinearClassifier, Solution)> {
    let solution = outer::golden_section_solve(data, cfg, inner)?;
    let mut hyperparams = BTreeMap::new();
    hyperparams.insert("epsilon".to_string(), cfg.epsilon);
    hyperparams.insert("kappa".to_string(), cfg.kappa);
    hyperparams.insert("lambda".to_string(), solution.lambda);
    let model = LinearClassifier {
        beta: solution.beta.clone(),
        kind: ModelKind::Drlr,
        hyperparams,
        converged: solution.status == crate::model::SolveStatus::Converged,
    };
    Ok((model, solution))
}

/// Fraction of samples with `sign(beta' x_i) = y_i`; `sign(0)` counts as `+1`.
pub fn accuracy(model: &LinearClassifier, data: &Dataset) -> f64 {
    assert_eq!(model.beta.len(), data.n_features(), "accuracy: dimension mismatch");
    let scores = data.scores(&model.beta);
    let correct = scores
        .iter()
        .zip(data.labels())
        .filter(|(&s, &y)| (s >= 0.0) == (y > 0.0))
        .count();
    correct as f64 / data.n_samples() as f64
}

/// Convenience for tests and the eval harness: seeded label-noise
/// injection, flipping each label independently with probability `p`.
pub fn flip_labels(data: &Dataset, p: f64, rng: &mut Rng) -> Dataset {
    let labels: Vec<f64> = data
        .labels()
        .iter()
        .map(|&y| if rng.uniform() < p { -y } else { y })
        .collect();
    Dataset::new(data.features().clone(), labels).expect("flipped labels stay valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::generate_synthetic;
    use crate::matrix::Matrix;

    #[test]
    fn lr_symmetric_data_stays_at_zero() {
        // x and -x with the same label: the gradient at 0 vanishes.
        let x = Matrix::dense(2, 2, vec![1.0, 0.5, -1.0, -0.5]);
        let d = Dataset::new(x, vec![1.0, 1.0]).unwrap();
        let m = train_lr(&d, 1e-10, 1_000);
        assert!(m.converged);
        assert!(vecops::norm2(&m.beta) <= 1e-10);
    }

    #[test]
    fn lr_contradictory_labels_stay_at_zero() {
        let x = Matrix::dense(2, 1, vec![1.0, 1.0]);
        let d = Dataset::new(x, vec![1.0, -1.0]).unwrap();
        let m = train_lr(&d, 1e-12, 1_000);
        assert!(m.converged);
        assert!(m.beta[0].abs() <= 1e-12);
    }

    #[test]
    fn lr_objective_beats_subgradient_oracle() {
        let (d, _) = generate_synthetic(200, 5, &mut Rng::new(31));
        let m = train_lr(&d, 1e-9, 50_000);
        assert!(m.converged);
        let trained = lr_objective(&m.beta, &d);
        // long-run plain (projected-onto-large-box) subgradient oracle
        let z = d.signed_matrix();
        let mut x = vec![0.0; 5];
        let mut best = f64::INFINITY;
        for k in 0..200_000 {
            let g = lr_gradient(&x, &z);
            let step = 2.0 / ((k + 1) as f64).sqrt();
            for i in 0..5 {
                x[i] -= step * g[i];
            }
            best = best.min(lr_objective(&x, &d));
        }
        assert!(trained <= best + 1e-6, "{trained} vs oracle {best}");
        assert!(trained <= std::f64::consts::LN_2);
    }

    #[test]
    fn rlr_huge_epsilon_collapses_to_zero() {
        let (d, _) = generate_synthetic(50, 3, &mut Rng::new(8));
        let m = train_rlr(&d, 50.0, 1e-10, 10_000);
        assert!(m.converged);
        assert!(vecops::norm2(&m.beta) <= 1e-9, "{:?}", m.beta);
    }

    #[test]
    fn rlr_tiny_epsilon_approaches_lr() {
        let (d, _) = generate_synthetic(80, 4, &mut Rng::new(12));
        let lr = train_lr(&d, 1e-10, 50_000);
        let rlr = train_rlr(&d, 1e-7, 1e-10, 50_000);
        assert!(vecops::diff_norm_inf(&lr.beta, &rlr.beta) < 1e-4);
    }

    #[test]
    fn rlr_optimum_beats_grid_on_2d() {
        let (d, _) = generate_synthetic(40, 2, &mut Rng::new(3));
        let eps = 0.2;
        let m = train_rlr(&d, eps, 1e-11, 50_000);
        let trained = rlr_objective(&m.beta, &d, eps);
        let mut best = f64::INFINITY;
        let mut b = [0.0f64; 2];
        let mut i = -200i32;
        while i <= 200 {
            b[0] = i as f64 * 0.01;
            let mut j = -200i32;
            while j <= 200 {
                b[1] = j as f64 * 0.01;
                best = best.min(rlr_objective(&b, &d, eps));
                j += 1;
            }
            i += 1;
        }
        assert!(trained <= best + 1e-6, "{trained} vs grid {best}");
    }

    #[test]
    fn accuracy_tie_rule_and_permutation_invariance() {
        let x = Matrix::dense(4, 1, vec![1.0, 2.0, -1.0, -3.0]);
        let d = Dataset::new(x, vec![1.0, 1.0, 1.0, -1.0]).unwrap();
        let zero = LinearClassifier {
            beta: vec![0.0],
            kind: ModelKind::Lr,
            hyperparams: BTreeMap::new(),
            converged: true,
        };
        // all scores are 0 -> predicted +1 -> fraction of +1 labels
        assert_eq!(accuracy(&zero, &d), 0.75);
        let sep = LinearClassifier { beta: vec![1.0], ..zero.clone() };
        assert_eq!(accuracy(&sep, &d), 0.75);
        let perm = d.select(&[3, 0, 2, 1]);
        assert_eq!(accuracy(&sep, &perm), 0.75);
    }

    #[test]
    fn accuracy_is_one_on_separable_construction() {
        let (d, beta_star) = generate_synthetic(100, 3, &mut Rng::new(77));
        // relabel deterministically by the true margin, with a gap
        let margins = d.scores(&beta_star);
        let keep: Vec<usize> =
            (0..d.n_samples()).filter(|&i| margins[i].abs() >= 0.1).collect();
        let labels: Vec<f64> = keep.iter().map(|&i| margins[i].signum()).collect();
        let sub = d.select(&keep);
        let clean = Dataset::new(sub.features().clone(), labels).unwrap();
        let m = LinearClassifier {
            beta: beta_star,
            kind: ModelKind::Lr,
            hyperparams: BTreeMap::new(),
            converged: true,
        };
        assert_eq!(accuracy(&m, &clean), 1.0);
    }
}
