use drlr_core::data::{generate_synthetic, Rng};
use drlr_core::lpadmm;
use drlr_core::model::{DrlrConfig, SubproblemInstance};
use drlr_core::BoxQpSolverKind;

fn main() {
    let (data, _) = generate_synthetic(100, 3, &mut Rng::new(5));
    let inst = SubproblemInstance::from_dataset(&data, 0.1, 1.0).unwrap();

    // high-accuracy reference via constant rho, tight tol
    let refcfg = DrlrConfig {
        gamma: 1.0,
        rho0: 0.05,
        primal_tol: 1e-13,
        max_iter: 400_000,
        ..DrlrConfig::default()
    };
    let (rsol, rtrace) =
        lpadmm::solve_subproblem(&inst, &refcfg, BoxQpSolverKind::ActiveSetCg, None).unwrap();
    let it_ref = rtrace.last().unwrap().iter;
    println!(
        "reference: status {:?} iters {} obj {:.12} kkt {:.3e}",
        rsol.status, it_ref, rsol.objective, rsol.kkt_residual
    );
    let f_star = rsol.objective;

    for rho in [0.00690, 0.05, 0.5, 5.0] {
        let cfg = DrlrConfig {
            gamma: 1.0,
            rho0: rho,
            primal_tol: 1e-6,
            max_iter: 100_000,
            ..DrlrConfig::default()
        };
        let (sol, trace) =
            lpadmm::solve_subproblem(&inst, &cfg, BoxQpSolverKind::ActiveSetCg, None).unwrap();
        let last = trace.last().unwrap();
        let kkt_at = |thr: f64| trace.rows.iter().find(|r| r.iter > 0 && r.kkt_residual <= thr).map(|r| r.iter);
        println!(
            "constant rho={rho:.4}: status {:?} iters {} obj-err {:+.3e} kkt {:.3e} | kkt<=1e-5 at {:?} kkt<=1e-4 at {:?}",
            sol.status,
            last.iter,
            sol.objective - f_star,
            last.kkt_residual,
            kkt_at(1e-5),
            kkt_at(1e-4),
        );
    }

    // adaptive without the safeguard: where does primal cross, what do
    // objective error and kkt look like there?
    let cfg = DrlrConfig { max_iter: 3_000, primal_tol: 1e-30, ..DrlrConfig::default() };
    let (_sol, trace) =
        lpadmm::solve_subproblem(&inst, &cfg, BoxQpSolverKind::ActiveSetCg, None).unwrap();
    for r in &trace.rows {
        if [100usize, 150, 200, 221, 250, 300, 400, 600, 1000, 2000, 3000].contains(&r.iter) {
            println!(
                "adaptive it {:5} rho {:.3e} primal {:.3e} kkt {:.3e} obj-err {:+.3e}",
                r.iter,
                r.rho,
                r.primal_residual,
                r.kkt_residual,
                r.objective - f_star
            );
        }
    }
}
