//! The lambda level of the framework: the `0.2785 / eps` upper bound on the
//! optimal dual radius and a golden-section search over `q(lambda) =
//! min_beta Omega(lambda, beta)`, each probe solved by LP-ADMM with warm
//! starts from the nearest already-solved radius.

use crate::boxqp::BoxQpSolverKind;
use crate::error::{Error, Result};
use crate::loss;
use crate::lpadmm;
use crate::model::{
    drlr_objective, kkt_residual, Dataset, DrlrConfig, Solution, SolveStatus, SubproblemInstance,
};
use crate::trace::Trace;
use crate::vecops;

/// Bracketing parameters of the golden-section search.
#[derive(Debug, Clone)]
pub struct GoldenSearchConfig {
    /// Shrink ratio `r`; each comparison multiplies the bracket width by `r`.
    pub ratio: f64,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    /// Stop when `lambda_hi - lambda_lo` falls below this.
    pub interval_tol: f64,
    /// Cap on objective evaluations.
    pub max_evals: usize,
}

impl GoldenSearchConfig {
    pub fn new(lambda_hi: f64, interval_tol: f64) -> Self {
        Self { ratio: 0.618, lambda_lo: 0.0, lambda_hi, interval_tol, max_evals: 200 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::InvalidConfig(format!("ratio must be in (0,1), got {}", self.ratio)));
        }
        if !(self.lambda_hi > self.lambda_lo) {
            return Err(Error::InvalidConfig("lambda_hi must exceed lambda_lo".to_string()));
        }
        if !(self.interval_tol > 0.0) {
            return Err(Error::InvalidConfig("interval_tol must be > 0".to_string()));
        }
        Ok(())
    }
}

/// Upper bound on the optimal dual radius: `0.2785 / epsilon`, where 0.2785
/// bounds `sup_t t/(e^t + 1)` from above.
///
/// Panics when `epsilon <= 0`.
pub fn lambda_upper_bound(epsilon: f64) -> f64 {
    assert!(epsilon > 0.0, "lambda_upper_bound: epsilon must be > 0");
    0.2785 / epsilon
}

/// Outcome of a generic golden-section run.
#[derive(Debug, Clone)]
pub struct GoldenResult<T> {
    pub lambda: f64,
    pub value: f64,
    pub payload: T,
    pub evals: usize,
    pub bracket: (f64, f64),
    /// True when the bracket shrank below `interval_tol` within `max_evals`.
    pub converged: bool,
}

/// Derivative-free minimization of a unimodal `q` over
/// `[lambda_lo, lambda_hi]`.  Evaluations are memoized by abscissa (1e-12
/// absolute tolerance) because the textbook loop re-evaluates all four
/// bracket points; ties `q(l2) == q(l3)` deterministically move the left
/// endpoint.
pub fn golden_section_search<T, E>(
    cfg: &GoldenSearchConfig,
    mut eval: impl FnMut(f64) -> std::result::Result<(f64, T), E>,
) -> std::result::Result<GoldenResult<T>, E> {
    let mut lambda1 = cfg.lambda_lo;
    let mut lambda4 = cfg.lambda_hi;
    let r = cfg.ratio;

    let mut memo: Vec<(f64, f64, usize)> = Vec::new(); // (lambda, value, payload slot)
    let mut payloads: Vec<T> = Vec::new();
    let mut evals = 0usize;

    let mut cached = |lambda: f64,
                      evals: &mut usize,
                      memo: &mut Vec<(f64, f64, usize)>,
                      payloads: &mut Vec<T>|
     -> std::result::Result<f64, E> {
        if let Some(&(_, value, _)) = memo.iter().find(|(l, _, _)| (l - lambda).abs() <= 1e-12) {
            return Ok(value);
        }
        let (value, payload) = eval(lambda)?;
        *evals += 1;
        payloads.push(payload);
        memo.push((lambda, value, payloads.len() - 1));
        Ok(value)
    };

    let _ = cached(lambda1, &mut evals, &mut memo, &mut payloads)?;
    let _ = cached(lambda4, &mut evals, &mut memo, &mut payloads)?;
    while lambda4 - lambda1 > cfg.interval_tol && evals < cfg.max_evals {
        let lambda2 = r * lambda1 + (1.0 - r) * lambda4;
        let lambda3 = (1.0 - r) * lambda1 + r * lambda4;
        let q2 = cached(lambda2, &mut evals, &mut memo, &mut payloads)?;
        let q3 = cached(lambda3, &mut evals, &mut memo, &mut payloads)?;
        if q2 < q3 {
            lambda4 = lambda3;
        } else {
            lambda1 = lambda2;
        }
    }

    let &(lambda, value, slot) = memo
        .iter()
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .expect("at least the endpoints were evaluated");
    // drop the other payloads, keep the winner
    let payload = payloads.into_iter().nth(slot).expect("slot is in range");
    Ok(GoldenResult {
        lambda,
        value,
        payload,
        evals,
        bracket: (lambda1, lambda4),
        converged: lambda4 - lambda1 <= cfg.interval_tol,
    })
}

struct ProbeOutcome {
    beta: Vec<f64>,
    mu: Vec<f64>,
    w: Vec<f64>,
    status: SolveStatus,
    trace: Trace,
}

/// Full DRLR solve: golden-section over `lambda in [0, 0.2785/eps]`, each
/// probe a warm-started LP-ADMM subproblem solve.  The returned solution
/// carries the full-problem KKT residual and the trace of the winning
/// probe.
pub fn golden_section_solve(
    data: &Dataset,
    cfg: &DrlrConfig,
    inner: BoxQpSolverKind,
) -> Result<Solution> {
    cfg.validate()?;
    let z = std::sync::Arc::new(data.signed_matrix());
    let lambda_hi = lambda_upper_bound(cfg.epsilon);
    let gcfg = GoldenSearchConfig::new(lambda_hi, cfg.outer_tol * lambda_hi);
    gcfg.validate()?;

    // warm-start pool: solved (lambda, beta) pairs
    let mut solved: Vec<(f64, Vec<f64>)> = Vec::new();
    let result = golden_section_search(&gcfg, |lambda| -> Result<(f64, ProbeOutcome)> {
        let inst = SubproblemInstance::new(std::sync::Arc::clone(&z), lambda, cfg.kappa)?;
        let warm = solved
            .iter()
            .min_by(|a, b| {
                (a.0 - lambda).abs().partial_cmp(&(b.0 - lambda).abs()).unwrap()
            })
            .map(|(_, beta)| loss::project_linf_ball(beta, lambda));
        let (sol, trace, state) = lpadmm::solve_subproblem_full(
            &inst,
            cfg,
            inner,
            warm.as_deref(),
            &lpadmm::SolveOptions::default(),
        )?;
        if sol.status == SolveStatus::Diverged {
            return Err(Error::SubproblemDiverged { lambda });
        }
        solved.push((lambda, sol.beta.clone()));
        let q = sol.objective + lambda * cfg.epsilon;
        Ok((
            q,
            ProbeOutcome { beta: sol.beta, mu: state.mu, w: state.w, status: sol.status, trace },
        ))
    })?;

    let probe = result.payload;
    let inst = SubproblemInstance::new(std::sync::Arc::clone(&z), result.lambda, cfg.kappa)?;
    let kkt = full_kkt_residual(&probe.beta, &probe.mu, &probe.w, &inst, cfg.epsilon);
    let status = if result.converged && probe.status == SolveStatus::Converged {
        SolveStatus::Converged
    } else if probe.status == SolveStatus::Diverged {
        SolveStatus::Diverged
    } else {
        SolveStatus::MaxIter
    };
    Ok(Solution {
        objective: drlr_objective(&probe.beta, result.lambda, data, cfg),
        beta: probe.beta,
        lambda: result.lambda,
        kkt_residual: kkt,
        status,
        trace: Some(probe.trace),
    })
}

/// Full-problem KKT residual: the subproblem residual at `(beta, mu, w)`
/// extended with the lambda-stationarity system.  The hinge multipliers
/// `s_i` are reconstructed from `w` (clamped to `[0, 1]` where the
/// conditions leave them undetermined) and the ball multiplier from
/// `t = eps - (kappa/N) sum_i s_i`, which must be nonnegative, dominate
/// `||Z'w||_1`, and align with `w' mu = t lambda`.
pub fn full_kkt_residual(
    beta: &[f64],
    mu: &[f64],
    w: &[f64],
    inst: &SubproblemInstance,
    epsilon: f64,
) -> f64 {
    let sub = kkt_residual(beta, mu, w, inst);
    let n = inst.n_samples() as f64;
    let mut s_sum = 0.0;
    for i in 0..mu.len() {
        let s = (1.0 - loss::sigmoid(mu[i]) - n * w[i]).clamp(0.0, 1.0);
        s_sum += s;
    }
    let t = epsilon - inst.kappa() / n * s_sum;
    let ztw = inst.z().t_matvec(w);
    let r_sign = (-t).max(0.0);
    let r_ball = (vecops::norm1(&ztw) - t.max(0.0)).max(0.0);
    let r_align = (vecops::dot(w, mu) - t.max(0.0) * inst.lambda()).abs();
    sub.max(r_sign).max(r_ball).max(r_align)
}
