//! Baseline first-order methods for the fixed-`lambda` beta-subproblem:
//! projected subgradient, primal-dual hybrid gradient, linearized ADMM with
//! the classic quadratic term, and two-block standard ADMM whose y-block is
//! solved by a semi-smooth Newton method.
//!
//! All four share the [`Trace`] schema of LP-ADMM so traces can be plotted
//! side by side.  Each records an honest KKT residual by reconstructing the
//! multiplier `w` its iterates imply.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::boxqp::{self, BoxQpProblem, BoxQpSolverKind};
use crate::error::{Error, Result};
use crate::loss::{self, ProxShiftedAbs};
use crate::lpadmm::{self, SolveOptions};
use crate::model::{self, DrlrConfig, Solution, SolveStatus, SubproblemInstance};
use crate::trace::{Trace, TraceRow};
use crate::vecops;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    SubGradient,
    Pdhg,
    Ladmm,
    Sadmm,
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BaselineKind::SubGradient => "subgradient",
            BaselineKind::Pdhg => "pdhg",
            BaselineKind::Ladmm => "ladmm",
            BaselineKind::Sadmm => "sadmm",
        };
        f.write_str(s)
    }
}

impl FromStr for BaselineKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "subgradient" => Ok(BaselineKind::SubGradient),
            "pdhg" => Ok(BaselineKind::Pdhg),
            "ladmm" => Ok(BaselineKind::Ladmm),
            "sadmm" => Ok(BaselineKind::Sadmm),
            other => Err(format!("unknown baseline '{other}'")),
        }
    }
}

// Long-budget methods cap their trace at this many recorded rows; the full
// iterate stream would be tens of megabytes per run otherwise.
const MAX_TRACE_ROWS: usize = 20_000;

fn trace_stride(max_iter: usize) -> usize {
    max_iter.div_ceil(MAX_TRACE_ROWS).max(1)
}

/// Projected subgradient with diminishing steps `step_c / sqrt(k+1)`,
/// tracking the best objective seen.  The subgradient of the hinge at its
/// kink is taken as `1/2`.  Runs its full budget; traces are thinned to at
/// most 20k rows on long budgets.
pub fn solve_subgradient(
    inst: &SubproblemInstance,
    x0: &[f64],
    max_iter: usize,
    step_c: f64,
) -> (Solution, Trace) {
    assert!(vecops::norm_inf(x0) <= inst.lambda(), "solve_subgradient: infeasible start");
    let n = inst.n_samples();
    let nf = inst.n_features();
    let n_f64 = n as f64;
    let lk = inst.lambda_kappa();
    let mut trace = Trace::new("subgradient", format!("step_c={step_c} max_iter={max_iter}"));

    if inst.lambda() == 0.0 {
        let mu = inst.z().matvec(&vec![0.0; nf]);
        let obj = model::subproblem_objective(&vec![0.0; nf], &mu, inst);
        trace.push(TraceRow::new(0, obj, 0.0, 0.0, 0.0));
        let solution = Solution {
            beta: vec![0.0; nf],
            lambda: 0.0,
            objective: obj,
            kkt_residual: 0.0,
            status: SolveStatus::Converged,
            trace: None,
        };
        return (solution, trace);
    }

    let stride = trace_stride(max_iter);
    let started = Instant::now();
    let mut x = x0.to_vec();
    let mut mu = inst.z().matvec(&x);

    // implied multiplier for the KKT column: w = -(grad f + xi/(2N)) with
    // xi the sign of the hinge argument (0 at the kink)
    let record = |trace: &mut Trace,
                  iter: usize,
                  x: &[f64],
                  mu: &[f64],
                  obj: f64,
                  started: &Instant| {
        let w: Vec<f64> = mu
            .iter()
            .map(|&m| {
                let xi = if m > lk {
                    1.0
                } else if m < lk {
                    -1.0
                } else {
                    0.0
                };
                -((loss::sigmoid(m) - 0.5) / n_f64 + 0.5 * xi / n_f64)
            })
            .collect();
        let kkt = model::kkt_residual(x, mu, &w, inst);
        let mut row = TraceRow::new(iter, obj, 0.0, kkt, 0.0);
        row.elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
        trace.push(row);
    };

    let obj0 = model::subproblem_objective(&x, &mu, inst);
    record(&mut trace, 0, &x, &mu, obj0, &started);
    let mut best_x = x.clone();
    let mut best_obj = obj0;

    let mut grad = vec![0.0; nf];
    let mut sub = vec![0.0; n];
    for k in 0..max_iter {
        for i in 0..n {
            // hinge subgradient: 1 above the kink, 0 below, 1/2 at it
            let s = if mu[i] > lk {
                1.0
            } else if mu[i] < lk {
                0.0
            } else {
                0.5
            };
            sub[i] = (loss::sigmoid(mu[i]) - 1.0 + s) / n_f64;
        }
        inst.z().t_matvec_into(&sub, &mut grad);
        let step = step_c / ((k + 1) as f64).sqrt();
        for i in 0..nf {
            x[i] = (x[i] - step * grad[i]).clamp(-inst.lambda(), inst.lambda());
        }
        inst.z().matvec_into(&x, &mut mu);
        let obj = model::subproblem_objective(&x, &mu, inst);
        if obj < best_obj {
            best_obj = obj;
            best_x.copy_from_slice(&x);
        }
        if (k + 1) % stride == 0 || k + 1 == max_iter {
            record(&mut trace, k + 1, &x, &mu, obj, &started);
        }
    }

    let best_mu = inst.z().matvec(&best_x);
    let w_best: Vec<f64> = best_mu
        .iter()
        .map(|&m| {
            let xi = if m > lk { 1.0 } else if m < lk { -1.0 } else { 0.0 };
            -((loss::sigmoid(m) - 0.5) / n_f64 + 0.5 * xi / n_f64)
        })
        .collect();
    let solution = Solution {
        kkt_residual: model::kkt_residual(&best_x, &best_mu, &w_best, inst),
        beta: best_x,
        lambda: inst.lambda(),
        objective: best_obj,
        status: SolveStatus::Converged, // fixed-budget method: the budget ran to completion
        trace: None,
    };
    (solution, trace)
}

/// Primal-dual hybrid gradient on the saddle form
///
/// ```text
/// min_{||x||_inf <= lambda} max_{||y||_inf <= 1}
///     Psi(x) + y' (K x - d),   K = Z/(2N),  d = lambda*kappa/(2N) * 1
/// ```
///
/// with the smooth logistic part `Psi` handled by an explicit forward
/// gradient step.  Step sizes satisfy `1/tau - sigma ||K||^2 >= L_Psi / 2`
/// (and hence `tau sigma ||K||^2 <= 1`), over-relaxation `theta = 1`.
/// Stops when the implied KKT residual falls below `tol`.
pub fn solve_pdhg(inst: &SubproblemInstance, max_iter: usize, tol: f64) -> (Solution, Trace) {
    let n = inst.n_samples();
    let nf = inst.n_features();
    let n_f64 = n as f64;
    let two_n = 2.0 * n_f64;
    let lambda = inst.lambda();

    let s2 = boxqp::estimate_spectral_bound(inst.z()); // >= sigma_max(Z)^2
    let norm_k = s2.sqrt() / two_n;
    let l_psi = s2 / (4.0 * n_f64);
    let (sigma, tau) = if norm_k > 0.0 {
        (1.0 / norm_k, 1.0 / (norm_k + 0.5 * l_psi))
    } else {
        (1.0, 1.0)
    };
    assert!(
        tau * sigma * norm_k * norm_k <= 1.0 + 1e-12,
        "pdhg step sizes violate tau*sigma*||K||^2 <= 1"
    );
    let d = inst.lambda_kappa() / two_n;

    let mut trace = Trace::new("pdhg", format!("sigma={sigma} tau={tau} max_iter={max_iter}"));
    let stride = trace_stride(max_iter);
    let started = Instant::now();

    let mut x = vec![0.0; nf];
    let mut zx = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut best_x = x.clone();
    let mut best_obj = f64::INFINITY;
    let mut status = SolveStatus::MaxIter;
    let mut gvec = vec![0.0; n];
    let mut v = vec![0.0; nf];
    let mut iters = 0usize;

    for k in 0..=max_iter {
        for i in 0..n {
            gvec[i] = (loss::sigmoid(zx[i]) - 0.5) / n_f64 + y[i] / two_n;
        }
        inst.z().t_matvec_into(&gvec, &mut v);

        let obj = model::subproblem_objective(&x, &zx, inst);
        let w: Vec<f64> = gvec.iter().map(|&g| -g).collect();
        let ztw: Vec<f64> = v.iter().map(|&t| -t).collect();
        let kkt = model::kkt_residual_parts(&x, &zx, &w, &zx, &ztw, inst);
        if obj < best_obj {
            best_obj = obj;
            best_x.copy_from_slice(&x);
        }
        if k % stride == 0 || k == max_iter || kkt <= tol {
            let mut row = TraceRow::new(k, obj, 0.0, kkt, 0.0);
            row.elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
            trace.push(row);
        }
        iters = k;
        if kkt <= tol {
            status = SolveStatus::Converged;
            best_x.copy_from_slice(&x);
            break;
        }
        if k == max_iter {
            break;
        }

        // primal step, then dual ascent against the extrapolated point
        let mut x_new = vec![0.0; nf];
        for i in 0..nf {
            x_new[i] = (x[i] - tau * v[i]).clamp(-lambda, lambda);
        }
        let zx_new = inst.z().matvec(&x_new);
        for i in 0..n {
            let kxbar = (2.0 * zx_new[i] - zx[i]) / two_n;
            y[i] = (y[i] + sigma * (kxbar - d)).clamp(-1.0, 1.0);
        }
        x = x_new;
        zx = zx_new;
    }

    let best_mu = inst.z().matvec(&best_x);
    let w: Vec<f64> = best_mu
        .iter()
        .zip(&y)
        .map(|(&m, &yi)| -((loss::sigmoid(m) - 0.5) / n_f64 + yi / two_n))
        .collect();
    let solution = Solution {
        kkt_residual: model::kkt_residual(&best_x, &best_mu, &w, inst),
        objective: model::subproblem_objective(&best_x, &best_mu, inst),
        beta: best_x,
        lambda,
        status,
        trace: None,
    };
    let _ = iters;
    (solution, trace)
}

/// Linearized ADMM: identical to LP-ADMM except the mu-update carries the
/// classic quadratic term `eta/2 ||mu - mu^k||^2`, which requires
/// `eta > L_f`.
pub fn solve_ladmm(
    inst: &SubproblemInstance,
    cfg: &DrlrConfig,
    eta: f64,
    inner: BoxQpSolverKind,
) -> Result<(Solution, Trace)> {
    if eta <= inst.lipschitz_f() {
        return Err(Error::EtaTooSmall { eta, lipschitz_f: inst.lipschitz_f() });
    }
    lpadmm::solve_subproblem_with(
        inst,
        cfg,
        inner,
        None,
        &SolveOptions { eta, solver_label: Some("ladmm".to_string()), ..Default::default() },
    )
}

/// Parameters of the two-block standard ADMM.
#[derive(Debug, Clone)]
pub struct SadmmParams {
    pub rho: f64,
    pub sigma: f64,
    pub inner: BoxQpSolverKind,
}

impl Default for SadmmParams {
    fn default() -> Self {
        Self { rho: 10.0, sigma: 1.0, inner: BoxQpSolverKind::ActiveSetCg }
    }
}

/// Two-block standard ADMM on the split `Z beta = y`, `z = y - b` with
/// `b = lambda*kappa * 1`:
///
/// * x-update: box-constrained least squares (conjugate gradient with
///   active set, keeping the feasibility semantics of the other solvers);
/// * (y, z)-block: z is eliminated through the Moreau envelope of
///   `g = (1/2N) ||.||_1` and the resulting smooth y-problem is solved by
///   semi-smooth Newton (bisection fallback per coordinate on failure);
/// * dual ascent with relaxation `sigma`.
///
/// Stops when both split residuals are below `cfg.primal_tol`.
pub fn solve_sadmm(
    inst: &SubproblemInstance,
    cfg: &DrlrConfig,
    params: &SadmmParams,
) -> Result<(Solution, Trace)> {
    cfg.validate()?;
    if !(params.rho > 0.0) || !(params.sigma > 0.0) {
        return Err(Error::InvalidConfig("sadmm requires rho > 0 and sigma > 0".to_string()));
    }
    let rho = params.rho;
    let sigma_rho = params.sigma * rho;
    let n = inst.n_samples();
    let nf = inst.n_features();
    let lk = inst.lambda_kappa();
    let weight = 0.5 / n as f64;
    let spectral = boxqp::estimate_spectral_bound(inst.z());

    let mut trace = Trace::new(
        "sadmm",
        format!("rho={rho} sigma={} inner={}", params.sigma, params.inner),
    );
    let started = Instant::now();

    let mut x = vec![0.0; nf];
    let mut ax = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut zb = vec![0.0; n]; // the z-block variable
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];

    let record = |trace: &mut Trace,
                  iter: usize,
                  x: &[f64],
                  y: &[f64],
                  u: &[f64],
                  r: f64,
                  started: &Instant| {
        let w: Vec<f64> = u.iter().map(|&ui| -ui).collect();
        let kkt = model::kkt_residual(x, y, &w, inst);
        let obj = model::subproblem_objective(x, y, inst);
        let mut row = TraceRow::new(iter, obj, r, kkt, rho);
        row.elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
        trace.push(row);
    };
    record(&mut trace, 0, &x, &y, &u, vecops::norm2(&vec![lk; n]), &started);

    let mut status = SolveStatus::MaxIter;
    let mut r_prev = f64::INFINITY;
    let zprox = ProxShiftedAbs::new(0.0, weight, rho);
    let mut warned_newton = false;

    for k in 0..cfg.max_iter {
        // x-update
        let mut b_qp = vec![0.0; n];
        for i in 0..n {
            b_qp[i] = y[i] - u[i] / rho;
        }
        let problem = BoxQpProblem::with_spectral_bound(inst.z(), &b_qp, inst.lambda(), spectral);
        let inner_tol = (0.1 * r_prev).min(1e-8).max(1e-14);
        let sol = boxqp::solve(&problem, params.inner, &x, inner_tol, 5_000);
        x = sol.x;
        inst.z().matvec_into(&x, &mut ax);

        // (y, z)-block
        let mut d1 = vec![0.0; n];
        let mut d2 = vec![0.0; n];
        for i in 0..n {
            d1[i] = ax[i] + u[i] / rho;
            d2[i] = lk + v[i] / rho;
        }
        let block = YBlock { d1: &d1, d2: &d2, rho, weight, inst, logistic: true };
        y = match block.minimize(Some(&y), None) {
            Ok(sol) => sol,
            Err(_) => {
                if !warned_newton {
                    trace.warn(format!(
                        "semi-smooth Newton stalled at iteration {}; fell back to bisection",
                        k + 1
                    ));
                    warned_newton = true;
                }
                block.minimize_by_bisection()
            }
        };
        for i in 0..n {
            zb[i] = zprox.prox(y[i] - lk - v[i] / rho);
        }

        // dual ascent
        let mut r1_sq = 0.0;
        let mut r2_sq = 0.0;
        for i in 0..n {
            let e1 = ax[i] - y[i];
            let e2 = zb[i] - y[i] + lk;
            u[i] += sigma_rho * e1;
            v[i] += sigma_rho * e2;
            r1_sq += e1 * e1;
            r2_sq += e2 * e2;
        }
        let r1 = r1_sq.sqrt();
        let r2 = r2_sq.sqrt();
        let r = r1.max(r2);
        record(&mut trace, k + 1, &x, &y, &u, r, &started);
        if !model::subproblem_objective(&x, &y, inst).is_finite() {
            status = SolveStatus::Diverged;
            break;
        }
        if r1 <= cfg.primal_tol && r2 <= cfg.primal_tol {
            status = SolveStatus::Converged;
            break;
        }
        r_prev = r;
    }

    let w: Vec<f64> = u.iter().map(|&ui| -ui).collect();
    let solution = Solution {
        objective: model::subproblem_objective(&x, &y, inst),
        kkt_residual: model::kkt_residual(&x, &y, &w, inst),
        beta: x,
        lambda: inst.lambda(),
        status,
        trace: None,
    };
    Ok((solution, trace))
}

/// The separable y-block objective of standard ADMM after eliminating z:
/// `f(y) + rho/2 ||y - d1||^2 + env_g(y - d2)` where `env_g` is the Moreau
/// envelope of `weight * ||.||_1` at parameter `rho`.
pub(crate) struct YBlock<'a> {
    pub d1: &'a [f64],
    pub d2: &'a [f64],
    pub rho: f64,
    pub weight: f64,
    pub inst: &'a SubproblemInstance,
    /// Test hook: false drops the logistic term, leaving a pure quadratic
    /// plus envelope.
    pub logistic: bool,
}

impl<'a> YBlock<'a> {
    fn envelope(&self, t: f64) -> f64 {
        let c = self.weight;
        if t.abs() <= c / self.rho {
            0.5 * self.rho * t * t
        } else {
            c * t.abs() - c * c / (2.0 * self.rho)
        }
    }

    fn envelope_grad(&self, t: f64) -> f64 {
        (self.rho * t).clamp(-self.weight, self.weight)
    }

    pub fn objective(&self, y: &[f64]) -> f64 {
        let n = self.inst.n_samples() as f64;
        let lk = self.inst.lambda_kappa();
        let mut total = 0.0;
        for i in 0..y.len() {
            if self.logistic {
                total += (loss::logloss(y[i]) + 0.5 * (y[i] - lk)) / n;
            }
            let e1 = y[i] - self.d1[i];
            total += 0.5 * self.rho * e1 * e1 + self.envelope(y[i] - self.d2[i]);
        }
        total
    }

    fn grad_coord(&self, yi: f64, i: usize) -> f64 {
        let n = self.inst.n_samples() as f64;
        let smooth = if self.logistic { (loss::sigmoid(yi) - 0.5) / n } else { 0.0 };
        smooth + self.rho * (yi - self.d1[i]) + self.envelope_grad(yi - self.d2[i])
    }

    fn hess_coord(&self, yi: f64, i: usize) -> f64 {
        let n = self.inst.n_samples() as f64;
        let s = loss::sigmoid(yi);
        let smooth = if self.logistic { s * (1.0 - s) / n } else { 0.0 };
        let band = if (yi - self.d2[i]).abs() < self.weight / self.rho { self.rho } else { 0.0 };
        smooth + self.rho + band
    }

    /// Diagonal semi-smooth Newton with Armijo backtracking (factor 0.5,
    /// slope 1e-4); stops when the gradient norm reaches `1e-10`.  Records
    /// the gradient-norm history when given a buffer.
    pub fn minimize(
        &self,
        y0: Option<&[f64]>,
        mut grad_norms: Option<&mut Vec<f64>>,
    ) -> Result<Vec<f64>> {
        let n = self.d1.len();
        let mut y: Vec<f64> = match y0 {
            Some(y0) => y0.to_vec(),
            None => self.d1.to_vec(),
        };
        let max_newton = 100;
        for _ in 0..max_newton {
            let g: Vec<f64> = (0..n).map(|i| self.grad_coord(y[i], i)).collect();
            let gn = vecops::norm2(&g);
            if let Some(h) = grad_norms.as_deref_mut() {
                h.push(gn);
            }
            if gn <= 1e-10 {
                return Ok(y);
            }
            let dir: Vec<f64> = (0..n).map(|i| -g[i] / self.hess_coord(y[i], i)).collect();
            let slope = vecops::dot(&g, &dir);
            debug_assert!(slope < 0.0);
            let f0 = self.objective(&y);
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let trial: Vec<f64> = (0..n).map(|i| y[i] + t * dir[i]).collect();
                if self.objective(&trial) <= f0 + 1e-4 * t * slope {
                    y = trial;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                return Err(Error::NewtonStalled { max_iter: max_newton });
            }
        }
        Err(Error::NewtonStalled { max_iter: max_newton })
    }

    /// Coordinate-wise bisection on the strictly increasing derivative;
    /// slow but unconditionally convergent.
    pub fn minimize_by_bisection(&self) -> Vec<f64> {
        let n = self.d1.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut lo = self.d1[i].min(self.d2[i]) - 1.0;
            let mut hi = self.d1[i].max(self.d2[i]) + 1.0;
            let mut width = 1.0;
            while self.grad_coord(lo, i) > 0.0 {
                lo -= width;
                width *= 2.0;
            }
            width = 1.0;
            while self.grad_coord(hi, i) < 0.0 {
                hi += width;
                width *= 2.0;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if self.grad_coord(mid, i) > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            y[i] = 0.5 * (lo + hi);
        }
        y
    }
}

/// Minimizes the standard-ADMM y-block objective
/// `f(y) + rho/2 ||y - d1||^2 + env_g(y - d2)`; errors after 100 Newton
/// iterations without convergence so the caller can fall back to bisection.
pub fn semi_smooth_newton(
    d1: &[f64],
    d2: &[f64],
    rho: f64,
    inst: &SubproblemInstance,
    y0: Option<&[f64]>,
) -> Result<Vec<f64>> {
    assert!(rho > 0.0, "semi_smooth_newton: rho must be positive");
    assert_eq!(d1.len(), inst.n_samples());
    assert_eq!(d2.len(), inst.n_samples());
    let block =
        YBlock { d1, d2, rho, weight: 0.5 / inst.n_samples() as f64, inst, logistic: true };
    block.minimize(y0, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, Rng};
    use crate::matrix::Matrix;

    fn seeded_instance(n: usize, d: usize, seed: u64, lambda: f64) -> SubproblemInstance {
        let (data, _) = generate_synthetic(n, d, &mut Rng::new(seed));
        SubproblemInstance::from_dataset(&data, lambda, 1.0).unwrap()
    }

    #[test]
    fn subgradient_lambda_zero_returns_origin() {
        let inst = seeded_instance(10, 2, 1, 0.0);
        let (sol, trace) = solve_subgradient(&inst, &[0.0, 0.0], 100, 1.0);
        assert_eq!(sol.beta, vec![0.0, 0.0]);
        assert_eq!(trace.rows.len(), 1);
    }

    #[test]
    fn subgradient_one_dimensional_logistic() {
        // one sample, Z = (1), lambda = 10, huge lambda*kappa: the hinge is
        // dead and the best objective approaches min h over [-10, 10].
        let z = Matrix::dense(1, 1, vec![1.0]);
        let inst = SubproblemInstance::new(z, 10.0, 1e6).unwrap();
        let (sol, _) = solve_subgradient(&inst, &[0.0], 100_000, 50.0);
        let target = loss::logloss(10.0);
        assert!(
            (sol.objective - target).abs() < 1e-6,
            "best {} vs h(10) = {target}",
            sol.objective
        );
    }

    #[test]
    fn subgradient_best_so_far_is_monotone() {
        let inst = seeded_instance(50, 3, 4, 0.1);
        let (_, trace) = solve_subgradient(&inst, &[0.0; 3], 2_000, 1.0);
        let mut best = f64::INFINITY;
        for r in &trace.rows {
            let new_best = best.min(r.objective);
            assert!(new_best <= best);
            best = new_best;
        }
        assert_eq!(trace.rows.len(), 2_001);
    }

    #[test]
    fn pdhg_zero_matrix_keeps_x_fixed() {
        let z = Matrix::dense(2, 2, vec![0.0; 4]);
        let inst = SubproblemInstance::new(z, 0.5, 1.0).unwrap();
        let (sol, _) = solve_pdhg(&inst, 200, 1e-10);
        assert_eq!(sol.beta, vec![0.0, 0.0]);
        assert!((sol.objective - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn ladmm_rejects_small_eta() {
        let inst = seeded_instance(10, 2, 1, 0.1);
        let cfg = DrlrConfig::default();
        let err =
            solve_ladmm(&inst, &cfg, inst.lipschitz_f(), BoxQpSolverKind::ActiveSetCg).unwrap_err();
        assert!(matches!(err, Error::EtaTooSmall { .. }));
    }

    #[test]
    fn ladmm_step_approaches_lp_admm_as_eta_vanishes() {
        // eta below L_f is rejected by solve_ladmm, but the update formula
        // itself is continuous at eta = 0; drive the shared engine directly.
        let inst = seeded_instance(15, 3, 9, 0.2);
        let state = lpadmm::LpAdmmState::cold_start(3, 15, 0.05);
        let base = lpadmm::LpAdmmDriver::new(&inst, BoxQpSolverKind::ActiveSetCg)
            .step(&state, 1.0, 1e-12)
            .0;
        let tiny = lpadmm::LpAdmmDriver::new(&inst, BoxQpSolverKind::ActiveSetCg)
            .with_eta(1e-12)
            .step(&state, 1.0, 1e-12)
            .0;
        assert!(vecops::diff_norm_inf(&base.mu, &tiny.mu) <= 1e-9);
        assert!(vecops::diff_norm_inf(&base.w, &tiny.w) <= 1e-9);
    }

    #[test]
    fn sadmm_z_prox_reduces_to_symmetric_soft_threshold_when_centered() {
        // with lambda*kappa = 0 the z-block prox is the plain soft
        // threshold, i.e. prox_P with center 0
        let inst = seeded_instance(4, 2, 3, 0.5);
        let n = inst.n_samples() as f64;
        let rho = 10.0;
        let zprox = ProxShiftedAbs::new(0.0, 0.5 / n, rho);
        for &t in &[-1.0, -0.01, 0.0, 0.004, 2.0] {
            let direct = zprox.prox(t);
            let threshold = 0.5 / (n * rho);
            let manual = if t > threshold {
                t - threshold
            } else if t < -threshold {
                t + threshold
            } else {
                0.0
            };
            assert_eq!(direct, manual);
        }
    }

    #[test]
    fn newton_quadratic_only_matches_closed_form() {
        let inst = seeded_instance(3, 2, 5, 0.5);
        let rho = 2.0;
        let d1 = vec![1.0, -0.3, 0.2];
        let d2 = vec![0.9, -0.2, 0.4];
        let block = YBlock { d1: &d1, d2: &d2, rho, weight: 0.5 / 3.0, inst: &inst, logistic: false };
        let y = block.minimize(None, None).unwrap();
        for i in 0..3 {
            // inside the envelope dead zone the objective is
            // rho/2 (y-d1)^2 + rho/2 (y-d2)^2 with minimizer (d1+d2)/2;
            // otherwise the linear branch shifts it by weight/rho.
            let mid = 0.5 * (d1[i] + d2[i]);
            let expect = if (mid - d2[i]).abs() <= block.weight / rho {
                mid
            } else if mid > d2[i] {
                d1[i] - block.weight / rho
            } else {
                d1[i] + block.weight / rho
            };
            assert!((y[i] - expect).abs() < 1e-12, "coord {i}: {} vs {expect}", y[i]);
        }
    }

    #[test]
    fn newton_gradient_small_and_locally_quadratic() {
        let inst = seeded_instance(30, 3, 12, 0.3);
        let mut rng = Rng::new(77);
        let n = inst.n_samples();
        let d1: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let d2: Vec<f64> = (0..n).map(|_| 2.0 + rng.normal()).collect(); // keep kinks away
        let rho = 10.0;
        let block =
            YBlock { d1: &d1, d2: &d2, rho, weight: 0.5 / n as f64, inst: &inst, logistic: true };
        let mut norms = Vec::new();
        let y = block.minimize(None, Some(&mut norms)).unwrap();
        let g: Vec<f64> = (0..n).map(|i| block.grad_coord(y[i], i)).collect();
        assert!(vecops::norm2(&g) <= 1e-10);
        // once in the quadratic basin the gradient norm collapses fast
        let tail: Vec<f64> = norms.iter().rev().take(3).copied().collect();
        for pair in tail.windows(2) {
            assert!(pair[0] <= 0.5 * pair[1] + 1e-12, "history {norms:?}");
        }
    }

    #[test]
    fn newton_one_dimensional_matches_grid_refinement() {
        let z = Matrix::dense(1, 1, vec![1.0]);
        let inst = SubproblemInstance::new(z, 1.0, 0.8).unwrap();
        let d1 = vec![0.4];
        let d2 = vec![0.75];
        let rho = 3.0;
        let y = semi_smooth_newton(&d1, &d2, rho, &inst, None).unwrap();
        let block = YBlock { d1: &d1, d2: &d2, rho, weight: 0.5, inst: &inst, logistic: true };
        // dense grid plus golden refinement
        let (mut lo, mut hi) = (-2.0, 2.0);
        let mut best = (f64::INFINITY, 0.0);
        let mut t = lo;
        while t <= hi {
            let f = block.objective(&[t]);
            if f < best.0 {
                best = (f, t);
            }
            t += 1e-3;
        }
        lo = best.1 - 2e-3;
        hi = best.1 + 2e-3;
        let r = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..80 {
            let m1 = hi - r * (hi - lo);
            let m2 = lo + r * (hi - lo);
            if block.objective(&[m1]) < block.objective(&[m2]) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let oracle = 0.5 * (lo + hi);
        assert!((y[0] - oracle).abs() <= 1e-8, "{} vs {oracle}", y[0]);
    }

    #[test]
    fn bisection_fallback_agrees_with_newton() {
        let inst = seeded_instance(8, 2, 21, 0.4);
        let mut rng = Rng::new(3);
        let n = inst.n_samples();
        let d1: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let d2: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let block =
            YBlock { d1: &d1, d2: &d2, rho: 5.0, weight: 0.5 / n as f64, inst: &inst, logistic: true };
        let newton = block.minimize(None, None).unwrap();
        let bisect = block.minimize_by_bisection();
        assert!(vecops::diff_norm_inf(&newton, &bisect) < 1e-9);
    }
}
