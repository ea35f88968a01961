//! Scalar kernels shared by every solver: the stable log-loss, the smooth
//! part `f` of the subproblem split and its gradient, closed-form proximal
//! maps, and projections.
//!
//! The fixed-`lambda` subproblem objective is decomposed as
//!
//! ```text
//! F(beta, mu) = f(mu) + P(mu) + g(beta)
//! f(mu) = (1/N) sum_i [ log(1 + exp(-mu_i)) + (mu_i - lambda*kappa)/2 ]
//! P(mu) = (1/2N) sum_i |mu_i - lambda*kappa|
//! g(beta) = indicator of ||beta||_inf <= lambda
//! ```
//!
//! which is exact because `max(t, 0) = t/2 + |t|/2`.

use crate::model::SubproblemInstance;
use crate::vecops;

/// Numerically stable logistic sigmoid `1 / (1 + exp(-u))`.
pub fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// Log-loss `h(u) = log(1 + exp(-u))`, computed as
/// `max(-u, 0) + log1p(exp(-|u|))` so it never overflows.
///
/// Debug builds reject NaN input; in release a NaN propagates and is caught
/// by the solvers' divergence check.
pub fn logloss(u: f64) -> f64 {
    debug_assert!(!u.is_nan(), "logloss: NaN input");
    (-u).max(0.0) + (-u.abs()).exp().ln_1p()
}

/// Derivative of the log-loss: `h'(u) = sigmoid(u) - 1`.
pub fn logloss_grad(u: f64) -> f64 {
    sigmoid(u) - 1.0
}

/// `phi(t) = t / (exp(t) + 1)`, the function whose supremum 0.2785 bounds
/// the optimal dual radius (`lambda* <= 0.2785 / eps`).
pub fn phi(t: f64) -> f64 {
    t / (t.exp() + 1.0)
}

/// Value of the smooth part `f` at `mu`.
pub fn f_smooth(mu: &[f64], inst: &SubproblemInstance) -> f64 {
    let lk = inst.lambda_kappa();
    let n = inst.n_samples() as f64;
    mu.iter().map(|&m| logloss(m) + 0.5 * (m - lk)).sum::<f64>() / n
}

/// Gradient of `f`: coordinate `i` is `(sigmoid(mu_i) - 1/2) / N`.
/// Lipschitz with constant `1/(4N)`.
pub fn grad_f(mu: &[f64], inst: &SubproblemInstance) -> Vec<f64> {
    let n = inst.n_samples() as f64;
    mu.iter().map(|&m| (sigmoid(m) - 0.5) / n).collect()
}

/// Bregman divergence `B_f(a, b) = f(a) - f(b) - <grad f(b), a - b>`.
pub fn bregman_f(a: &[f64], b: &[f64], inst: &SubproblemInstance) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let gb = grad_f(b, inst);
    let mut inner = 0.0;
    for i in 0..a.len() {
        inner += gb[i] * (a[i] - b[i]);
    }
    f_smooth(a, inst) - f_smooth(b, inst) - inner
}

/// Scalar proximal map of `weight * |t - center|` with quadratic penalty
/// `rho/2 (t - v)^2`: a soft-threshold shifted to `center`.
#[derive(Debug, Clone, Copy)]
pub struct ProxShiftedAbs {
    /// Kink location `a = lambda * kappa`.
    pub center: f64,
    /// Absolute-value weight, `1/(2N)` for the subproblem split.
    pub weight: f64,
    /// Quadratic penalty coefficient.
    pub rho: f64,
}

impl ProxShiftedAbs {
    pub fn new(center: f64, weight: f64, rho: f64) -> Self {
        assert!(weight > 0.0 && rho > 0.0, "ProxShiftedAbs: weight and rho must be positive");
        Self { center, weight, rho }
    }

    /// Threshold `c = weight / rho` of the dead zone around `center`.
    pub fn threshold(&self) -> f64 {
        self.weight / self.rho
    }

    /// `argmin_t rho/2 (t - v)^2 + weight * |t - center|`.
    pub fn prox(&self, v: f64) -> f64 {
        let c = self.threshold();
        if v > self.center + c {
            v - c
        } else if v < self.center - c {
            v + c
        } else {
            self.center
        }
    }

    /// The objective the prox minimizes, used by oracle tests.
    pub fn objective(&self, t: f64, v: f64) -> f64 {
        0.5 * self.rho * (t - v) * (t - v) + self.weight * (t - self.center).abs()
    }
}

/// Proximal map of `(1/rho) P` applied coordinate-wise:
/// each coordinate solves `min_t rho/2 (t - v_i)^2 + (1/2N) |t - lambda*kappa|`.
pub fn prox_p(v: &[f64], inst: &SubproblemInstance, rho: f64) -> Vec<f64> {
    assert!(rho > 0.0, "prox_p: rho must be positive");
    let op = ProxShiftedAbs::new(inst.lambda_kappa(), 0.5 / inst.n_samples() as f64, rho);
    v.iter().map(|&vi| op.prox(vi)).collect()
}

/// Euclidean projection onto `{ x : ||x||_inf <= radius }` (coordinate clamp).
pub fn project_linf_ball(v: &[f64], radius: f64) -> Vec<f64> {
    assert!(radius >= 0.0, "project_linf_ball: negative radius");
    v.iter().map(|&vi| vi.clamp(-radius, radius)).collect()
}

/// In-place variant of [`project_linf_ball`].
pub fn clamp_to_linf_ball(v: &mut [f64], radius: f64) {
    assert!(radius >= 0.0, "clamp_to_linf_ball: negative radius");
    for vi in v {
        *vi = vi.clamp(-radius, radius);
    }
}

/// Euclidean projection onto `{ x : ||x||_1 <= radius }` by full sort and
/// threshold.  Deterministic and exact for ties.
pub fn project_l1_ball(v: &[f64], radius: f64) -> Vec<f64> {
    assert!(radius >= 0.0, "project_l1_ball: negative radius");
    if vecops::norm1(v) <= radius {
        return v.to_vec();
    }
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (j, &u) in mags.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - radius) / (j + 1) as f64;
        if u > t {
            tau = t;
        } else {
            break;
        }
    }
    v.iter()
        .map(|&x| x.signum() * (x.abs() - tau).max(0.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::model::SubproblemInstance;
    use proptest::prelude::*;

    fn inst(n_samples: usize, lambda: f64, kappa: f64) -> SubproblemInstance {
        SubproblemInstance::new(Matrix::identity(n_samples), lambda, kappa).unwrap()
    }

    #[test]
    fn logloss_at_zero_is_ln2() {
        assert!((logloss(0.0) - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn logloss_asymptotes() {
        // h(1000) ~ exp(-1000), far below representable noise.
        assert!(logloss(1000.0) >= 0.0);
        assert!(logloss(1000.0) < 1e-300);
        // h(-1000) ~ 1000.
        assert!((logloss(-1000.0) - 1000.0).abs() < 1e-12);
        assert!(logloss(750.0).is_finite());
        assert!(logloss(-750.0).is_finite());
    }

    #[cfg(debug_assertions)]
    #[test]
    #[should_panic(expected = "NaN")]
    fn logloss_rejects_nan() {
        let _ = logloss(f64::NAN);
    }

    #[test]
    fn grad_f_examples() {
        let i1 = inst(1, 1.0, 1.0);
        let g = grad_f(&[0.0], &i1);
        assert_eq!(g[0], 0.0);

        let i2 = inst(2, 1.0, 1.0);
        let g = grad_f(&[1000.0, 1000.0], &i2);
        assert!((g[0] - 0.25).abs() < 1e-12);

        let g = grad_f(&[1.0], &i1);
        assert!((g[0] - 0.231_058_578_630_004_9).abs() < 1e-12);
    }

    #[test]
    fn grad_f_matches_finite_differences() {
        let i1 = inst(1, 0.7, 1.3);
        let h = 1e-6;
        for &u in &[-3.0, -1.0, 0.3, 1.0, 2.5] {
            let g = grad_f(&[u], &i1)[0];
            let fd = (f_smooth(&[u + h], &i1) - f_smooth(&[u - h], &i1)) / (2.0 * h);
            assert!((g - fd).abs() / fd.abs().max(1e-8) < 1e-5, "u = {u}: {g} vs {fd}");
        }
    }

    #[test]
    fn prox_examples() {
        // v = 3, lambda*kappa = 1, N = 1, rho = 1: threshold 0.5, output 2.5.
        let i1 = inst(1, 1.0, 1.0);
        assert_eq!(prox_p(&[3.0], &i1, 1.0)[0], 2.5);
        // fixed point at the kink
        assert_eq!(prox_p(&[1.0], &i1, 1.0)[0], 1.0);
        // dead zone
        assert_eq!(prox_p(&[0.9], &i1, 1.0)[0], 1.0);
    }

    #[test]
    fn linf_projection_examples() {
        assert_eq!(project_linf_ball(&[2.0, -0.3], 1.0), vec![1.0, -0.3]);
        assert_eq!(project_linf_ball(&[0.2, -0.3], 1.0), vec![0.2, -0.3]);
        assert_eq!(project_linf_ball(&[2.0, -0.3], 0.0), vec![0.0, 0.0]);
    }

    #[test]
    #[should_panic(expected = "negative radius")]
    fn linf_projection_rejects_negative_radius() {
        let _ = project_linf_ball(&[1.0], -1.0);
    }

    #[test]
    fn l1_projection_examples() {
        assert_eq!(project_l1_ball(&[0.3, -0.2], 1.0), vec![0.3, -0.2]);
        assert_eq!(project_l1_ball(&[3.0, 0.0], 1.0), vec![1.0, 0.0]);
        // threshold tau = 1
        let p = project_l1_ball(&[2.0, 1.0], 1.0);
        assert!((p[0] - 1.0).abs() < 1e-15 && p[1].abs() < 1e-15);
    }

    #[test]
    fn phi_grid_maximum_matches_bound() {
        // sup phi = W(1/e) = 0.2784645427610738, attained near t = 1.2785.
        let mut max = f64::NEG_INFINITY;
        let mut t = 0.0;
        while t <= 5.0 {
            max = max.max(phi(t));
            t += 1e-5;
        }
        assert!(max <= 0.2785, "phi exceeded its bound: {max}");
        assert!(max >= 0.27846, "phi grid max too small: {max}");
    }

    proptest! {
        #[test]
        fn logloss_grad_matches_finite_differences(u in -30.0f64..30.0) {
            let h = 1e-6;
            let fd = (logloss(u + h) - logloss(u - h)) / (2.0 * h);
            let g = logloss_grad(u);
            prop_assert!((g - fd).abs() / fd.abs().max(1e-8) < 1e-5);
        }

        // strict openness holds in f64 on the range where the derivative
        // identity below is also checked; past ~37 the value rounds to 1
        #[test]
        fn sigmoid_is_strictly_inside_unit_interval(u in -30.0f64..30.0) {
            let s = sigmoid(u);
            prop_assert!(s > 0.0 && s < 1.0);
        }

        #[test]
        fn prox_matches_golden_section_oracle(
            v in -10.0f64..10.0,
            center in -5.0f64..5.0,
            weight in 1e-3f64..2.0,
            rho in 1e-3f64..10.0,
        ) {
            let op = ProxShiftedAbs::new(center, weight, rho);
            let got = op.prox(v);
            // 1-D golden-section oracle on the prox objective.
            let (mut lo, mut hi) = (v.min(center) - 1.0, v.max(center) + 1.0);
            let r = (5f64.sqrt() - 1.0) / 2.0;
            for _ in 0..200 {
                let m1 = hi - r * (hi - lo);
                let m2 = lo + r * (hi - lo);
                if op.objective(m1, v) < op.objective(m2, v) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            let oracle = 0.5 * (lo + hi);
            prop_assert!((got - oracle).abs() < 1e-8, "prox {got} vs oracle {oracle}");
        }

        #[test]
        fn projections_idempotent_and_nonexpansive(
            u in proptest::collection::vec(-5.0f64..5.0, 1..8),
            v in proptest::collection::vec(-5.0f64..5.0, 1..8),
            radius in 0.0f64..4.0,
        ) {
            let n = u.len().min(v.len());
            let (u, v) = (&u[..n], &v[..n]);
            for proj in [project_linf_ball, project_l1_ball] {
                let pu = proj(u, radius);
                let ppu = proj(&pu, radius);
                prop_assert!(crate::vecops::diff_norm_inf(&pu, &ppu) < 1e-12);
                let pv = proj(v, radius);
                prop_assert!(
                    crate::vecops::diff_norm2(&pu, &pv)
                        <= crate::vecops::diff_norm2(u, v) + 1e-12
                );
            }
        }

        #[test]
        fn grad_f_is_lipschitz_with_quarter_n(
            u in proptest::collection::vec(-20.0f64..20.0, 1..10),
            v in proptest::collection::vec(-20.0f64..20.0, 1..10),
        ) {
            let n = u.len().min(v.len());
            let (u, v) = (&u[..n], &v[..n]);
            let i = inst(n, 1.0, 1.0);
            let gu = grad_f(u, &i);
            let gv = grad_f(v, &i);
            let lhs = crate::vecops::diff_norm2(&gu, &gv);
            let rhs = crate::vecops::diff_norm2(u, v) / (4.0 * n as f64);
            prop_assert!(lhs <= rhs + 1e-12);
        }
    }
}
