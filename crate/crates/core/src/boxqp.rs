//! Box-constrained least squares: `min ||A x - b||_2^2  s.t. ||x||_inf <= radius`.
//!
//! Three interchangeable solvers cover the beta-update of LP-ADMM:
//! accelerated projected gradient for well-conditioned instances, cyclic
//! coordinate minimization for the high-dimensional case, and conjugate
//! gradient with an active set for ill-conditioned instances.
//!
//! All solvers work with the half-gradient `g = A'(A x - b)`; the box-KKT
//! certificate below uses the same scaling.  Every returned iterate is
//! exactly feasible (clamped, never within a tolerance).

use std::fmt;
use std::str::FromStr;

use crate::data::Rng;
use crate::matrix::Matrix;
use crate::vecops;

/// A box-constrained least-squares instance.  `spectral_bound` caches an
/// upper bound on `lambda_max(A'A)` so repeated solves against the same
/// matrix (as in LP-ADMM) do not re-run power iteration.
#[derive(Debug)]
pub struct BoxQpProblem<'a> {
    pub a: &'a Matrix,
    pub b: &'a [f64],
    pub radius: f64,
    pub spectral_bound: f64,
}

impl<'a> BoxQpProblem<'a> {
    pub fn new(a: &'a Matrix, b: &'a [f64], radius: f64) -> Self {
        let spectral_bound = estimate_spectral_bound(a);
        Self::with_spectral_bound(a, b, radius, spectral_bound)
    }

    pub fn with_spectral_bound(a: &'a Matrix, b: &'a [f64], radius: f64, spectral_bound: f64) -> Self {
        assert!(radius >= 0.0, "boxqp: negative radius");
        assert_eq!(b.len(), a.rows(), "boxqp: b dimension mismatch");
        Self { a, b, radius, spectral_bound }
    }

    fn residual(&self, x: &[f64]) -> Vec<f64> {
        let mut r = self.a.matvec(x);
        for (ri, bi) in r.iter_mut().zip(self.b) {
            *ri -= bi;
        }
        r
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        vecops::norm2_sq(&self.residual(x))
    }
}

/// Which inner solver handles the beta-update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoxQpSolverKind {
    Apg,
    Coordinate,
    ActiveSetCg,
}

impl fmt::Display for BoxQpSolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BoxQpSolverKind::Apg => "apg",
            BoxQpSolverKind::Coordinate => "coord",
            BoxQpSolverKind::ActiveSetCg => "ascg",
        };
        f.write_str(s)
    }
}

impl FromStr for BoxQpSolverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "apg" => Ok(BoxQpSolverKind::Apg),
            "coord" | "coordinate" => Ok(BoxQpSolverKind::Coordinate),
            "ascg" | "active-set-cg" => Ok(BoxQpSolverKind::ActiveSetCg),
            other => Err(format!("unknown box-QP solver '{other}' (expected apg|coord|ascg)")),
        }
    }
}

/// Result of a box-QP solve.
#[derive(Debug, Clone)]
pub struct BoxQpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Upper bound on `lambda_max(A'A)` by seeded power iteration, inflated by
/// 1% so `1/bound` is always a stable gradient step.  Returns a tiny
/// positive floor for the all-zero matrix.
pub fn estimate_spectral_bound(a: &Matrix) -> f64 {
    let n = a.cols();
    let mut rng = Rng::new(0x5eed_b0bb);
    let mut v: Vec<f64> = (0..n).map(|_| rng.uniform() + 0.5).collect();
    let nv = vecops::norm2(&v);
    if nv == 0.0 {
        return 1e-30;
    }
    for vi in &mut v {
        *vi /= nv;
    }
    let mut lambda = 0.0f64;
    for _ in 0..200 {
        let av = a.matvec(&v);
        let new_lambda = vecops::norm2_sq(&av); // Rayleigh quotient, ||v|| = 1
        if new_lambda == 0.0 {
            return 1e-30;
        }
        let mut w = a.t_matvec(&av);
        let nw = vecops::norm2(&w);
        if nw == 0.0 {
            return 1e-30;
        }
        for wi in &mut w {
            *wi /= nw;
        }
        v = w;
        if (new_lambda - lambda).abs() <= 1e-10 * new_lambda {
            lambda = new_lambda;
            break;
        }
        lambda = new_lambda;
    }
    1.01 * lambda
}

/// Coordinate-wise box-KKT residual at `x` for the half-gradient
/// `g = A'(A x - b)`: interior coordinates need `|g_i| <= tol`, coordinates
/// at `+radius` need `g_i <= tol`, at `-radius` need `-g_i <= tol`.
pub fn box_kkt_residual(p: &BoxQpProblem, x: &[f64]) -> f64 {
    let r = p.residual(x);
    let g = p.a.t_matvec(&r);
    box_kkt_residual_given(&g, x, p.radius)
}

fn box_kkt_residual_given(g: &[f64], x: &[f64], radius: f64) -> f64 {
    if radius == 0.0 {
        return 0.0;
    }
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        let d = if x[i] >= radius {
            g[i].max(0.0)
        } else if x[i] <= -radius {
            (-g[i]).max(0.0)
        } else {
            g[i].abs()
        };
        worst = worst.max(d);
    }
    worst
}

/// Dispatch to the requested solver.
pub fn solve(
    p: &BoxQpProblem,
    kind: BoxQpSolverKind,
    x0: &[f64],
    tol: f64,
    max_iter: usize,
) -> BoxQpSolution {
    match kind {
        BoxQpSolverKind::Apg => solve_apg(p, x0, tol, max_iter),
        BoxQpSolverKind::Coordinate => solve_coordinate(p, x0, tol, max_iter),
        BoxQpSolverKind::ActiveSetCg => solve_active_set_cg(p, x0, tol, max_iter),
    }
}

struct Best {
    x: Vec<f64>,
    objective: f64,
    kkt: f64,
}

impl Best {
    fn new(x: &[f64], objective: f64, kkt: f64) -> Self {
        Self { x: x.to_vec(), objective, kkt }
    }

    fn offer(&mut self, x: &[f64], objective: f64, kkt: f64) {
        if objective < self.objective {
            self.x.copy_from_slice(x);
            self.objective = objective;
            self.kkt = kkt;
        }
    }
}

/// Accelerated projected gradient with momentum `k/(k+3)`, step
/// `1/lambda_max(A'A)` on the half-gradient, and adaptive restart when the
/// momentum direction opposes the gradient.
pub fn solve_apg(p: &BoxQpProblem, x0: &[f64], tol: f64, max_iter: usize) -> BoxQpSolution {
    assert!(vecops::norm_inf(x0) <= p.radius, "solve_apg: infeasible start");
    let n = p.a.cols();
    if p.radius == 0.0 {
        return BoxQpSolution {
            x: vec![0.0; n],
            objective: vecops::norm2_sq(p.b),
            kkt_residual: 0.0,
            iterations: 0,
            converged: true,
        };
    }
    let step = 1.0 / p.spectral_bound;

    let mut x = x0.to_vec();
    let r0 = p.residual(&x);
    let obj0 = vecops::norm2_sq(&r0);
    let g0 = p.a.t_matvec(&r0);
    let kkt0 = box_kkt_residual_given(&g0, &x, p.radius);
    if kkt0 <= tol {
        return BoxQpSolution { x, objective: obj0, kkt_residual: kkt0, iterations: 0, converged: true };
    }
    let mut best = Best::new(&x, obj0, kkt0);

    let mut x_prev = x.clone();
    let mut momentum_k = 1usize;
    for k in 1..=max_iter {
        let beta_k = momentum_k as f64 / (momentum_k + 3) as f64;
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[i] = x[i] + beta_k * (x[i] - x_prev[i]);
        }
        let ry = p.residual(&y);
        let gy = p.a.t_matvec(&ry);
        let mut x_new = vec![0.0; n];
        for i in 0..n {
            x_new[i] = (y[i] - step * gy[i]).clamp(-p.radius, p.radius);
        }
        // restart when the gradient points along the new displacement
        let mut along = 0.0;
        for i in 0..n {
            along += gy[i] * (x_new[i] - x[i]);
        }
        if along > 0.0 {
            momentum_k = 1;
        } else {
            momentum_k += 1;
        }
        x_prev = x;
        x = x_new;

        let r = p.residual(&x);
        let obj = vecops::norm2_sq(&r);
        let g = p.a.t_matvec(&r);
        let kkt = box_kkt_residual_given(&g, &x, p.radius);
        best.offer(&x, obj, kkt);
        if kkt <= tol {
            return BoxQpSolution { x, objective: obj, kkt_residual: kkt, iterations: k, converged: true };
        }
    }
    BoxQpSolution {
        x: best.x,
        objective: best.objective,
        kkt_residual: best.kkt,
        iterations: max_iter,
        converged: false,
    }
}

/// Cyclic exact coordinate minimization with an incrementally maintained
/// residual.  A sweep whose largest coordinate move is below the working
/// threshold triggers a KKT check; the threshold tightens until the
/// certificate holds at `tol`.
pub fn solve_coordinate(p: &BoxQpProblem, x0: &[f64], tol: f64, max_iter: usize) -> BoxQpSolution {
    assert!(vecops::norm_inf(x0) <= p.radius, "solve_coordinate: infeasible start");
    let n = p.a.cols();
    if p.radius == 0.0 {
        return BoxQpSolution {
            x: vec![0.0; n],
            objective: vecops::norm2_sq(p.b),
            kkt_residual: 0.0,
            iterations: 0,
            converged: true,
        };
    }
    let d = p.a.col_sq_norms();
    let cols = p.a.columns();

    let mut x = x0.to_vec();
    let mut r = p.residual(&x);
    let mut move_tol = tol.max(1e-15);
    for sweep in 1..=max_iter {
        let mut max_move = 0.0f64;
        for i in 0..n {
            if d[i] == 0.0 {
                continue; // objective does not depend on this coordinate
            }
            let mut cr = 0.0;
            for &(row, v) in &cols[i] {
                cr += v * r[row];
            }
            let t = (x[i] - cr / d[i]).clamp(-p.radius, p.radius);
            let delta = t - x[i];
            if delta != 0.0 {
                for &(row, v) in &cols[i] {
                    r[row] += delta * v;
                }
                x[i] = t;
            }
            max_move = max_move.max(delta.abs());
        }
        if sweep % 64 == 0 {
            r = p.residual(&x); // refresh against incremental drift
        }
        if max_move <= move_tol {
            let g = p.a.t_matvec(&r);
            let kkt = box_kkt_residual_given(&g, &x, p.radius);
            if kkt <= tol {
                return BoxQpSolution {
                    x,
                    objective: vecops::norm2_sq(&r),
                    kkt_residual: kkt,
                    iterations: sweep,
                    converged: true,
                };
            }
            move_tol *= 0.1;
        }
    }
    let r = p.residual(&x);
    let g = p.a.t_matvec(&r);
    BoxQpSolution {
        objective: vecops::norm2_sq(&r),
        kkt_residual: box_kkt_residual_given(&g, &x, p.radius),
        x,
        iterations: max_iter,
        converged: false,
    }
}

/// Fletcher-Reeves conjugate gradient restricted to the free set
/// `{ i : |x_i| < radius or -g_i x_i < 0 }`, restarting whenever the free
/// set changes, with projection of every trial point.  The gradient is
/// updated incrementally (`g += alpha A'(A p)`) while the projection is
/// inactive and recomputed in full otherwise.
pub fn solve_active_set_cg(p: &BoxQpProblem, x0: &[f64], tol: f64, max_iter: usize) -> BoxQpSolution {
    assert!(vecops::norm_inf(x0) <= p.radius, "solve_active_set_cg: infeasible start");
    let n = p.a.cols();
    if p.radius == 0.0 {
        return BoxQpSolution {
            x: vec![0.0; n],
            objective: vecops::norm2_sq(p.b),
            kkt_residual: 0.0,
            iterations: 0,
            converged: true,
        };
    }

    let mut x = x0.to_vec();
    let mut r_vec = p.residual(&x);
    let mut g = p.a.t_matvec(&r_vec);
    let mut best = Best::new(&x, vecops::norm2_sq(&r_vec), f64::INFINITY);

    let mut free_prev = vec![false; n];
    let mut pdir = vec![0.0; n];
    let mut rsq_prev = 0.0f64;
    let mut have_prev = false;

    for k in 1..=max_iter {
        let kkt = box_kkt_residual_given(&g, &x, p.radius);
        let obj = vecops::norm2_sq(&r_vec);
        best.offer(&x, obj, kkt);
        if kkt <= tol {
            return BoxQpSolution { x, objective: obj, kkt_residual: kkt, iterations: k - 1, converged: true };
        }

        // bound set: |x_i| = radius with the gradient pushing outward
        let free: Vec<bool> = (0..n)
            .map(|i| !(x[i].abs() >= p.radius && -g[i] * x[i] >= 0.0))
            .collect();
        let rdir: Vec<f64> = (0..n).map(|i| if free[i] { -g[i] } else { 0.0 }).collect();
        let rsq = vecops::norm2_sq(&rdir);
        if rsq == 0.0 {
            // optimal on the free set, bound set satisfied by definition
            return BoxQpSolution { x, objective: obj, kkt_residual: kkt, iterations: k - 1, converged: kkt <= tol };
        }
        let restart = !have_prev || free != free_prev;
        if restart {
            pdir.copy_from_slice(&rdir);
        } else {
            let beta_k = rsq / rsq_prev;
            for i in 0..n {
                pdir[i] = rdir[i] + beta_k * pdir[i];
            }
        }

        let ap = p.a.matvec(&pdir);
        let ap_sq = vecops::norm2_sq(&ap);
        if ap_sq <= f64::MIN_POSITIVE {
            // direction in the nullspace; nothing to gain along it
            return BoxQpSolution { x, objective: obj, kkt_residual: kkt, iterations: k - 1, converged: false };
        }
        let alpha = rsq / ap_sq;

        let mut projected = false;
        let mut x_new = vec![0.0; n];
        for i in 0..n {
            let t = x[i] + alpha * pdir[i];
            let c = t.clamp(-p.radius, p.radius);
            if c != t {
                projected = true;
            }
            x_new[i] = c;
        }
        if !projected && k % 50 != 0 {
            vecops::axpy(alpha, &ap, &mut r_vec);
            let atap = p.a.t_matvec(&ap);
            vecops::axpy(alpha, &atap, &mut g);
        } else {
            r_vec = p.a.matvec(&x_new);
            for (ri, bi) in r_vec.iter_mut().zip(p.b) {
                *ri -= bi;
            }
            g = p.a.t_matvec(&r_vec);
        }
        x = x_new;
        free_prev = free;
        rsq_prev = rsq;
        have_prev = !projected; // projection invalidates conjugacy
    }

    let obj = vecops::norm2_sq(&r_vec);
    let kkt = box_kkt_residual_given(&g, &x, p.radius);
    best.offer(&x, obj, kkt);
    BoxQpSolution {
        x: best.x,
        objective: best.objective,
        kkt_residual: best.kkt,
        iterations: max_iter,
        converged: false,
    }
}
