//! Three solvers, one problem: agreement and cost comparison.
//!
//! The primal-dual extragradient method, the linearized ADMM, and the
//! inexact proximal-point method (HPE) all solve the same saddle problem.
//! This example runs them on a battery of seeded instances and reports
//! iterations, wall time, final objective, and constraint feasibility —
//! they must agree on the objective to several digits.
//!
//! Run with: `cargo run --release --example solver_comparison`

use std::time::Instant;

use odsel::{
    dual_sorted_l1_norm, gen_instance, hpe_solve, ladmm_solve, pdsp_solve, sorted_l1_norm,
    DesignKind, HpeOptions, LadmmOptions, SimConfig, SolverKind, SolverOptions,
    DEFAULT_SUPPORT_TOL,
};

fn main() -> odsel::Result<()> {
    let cfg = SimConfig {
        n: 100,
        p: 40,
        s: 4,
        q: 0.1,
        sigma_noise: 1.0,
        design: DesignKind::Orthogonal,
        reps: 3,
        seed: 11,
        solver: SolverKind::Pdsp,
        eps: 1e-8,
        support_tol: DEFAULT_SUPPORT_TOL,
    };

    for rep in 0..cfg.reps {
        let (prob, _, lam) = gen_instance(&cfg, rep)?;
        println!("instance {rep}: n={}, p={}", prob.n(), prob.p());
        println!("  solver   iters      seconds     objective    feasibility");

        let mut objectives = Vec::new();
        for name in ["pdsp", "ladmm", "hpe"] {
            let started = Instant::now();
            let result = match name {
                "pdsp" => {
                    let mut opts = SolverOptions::standard(prob.l());
                    opts.eps = cfg.eps;
                    pdsp_solve(&prob, &lam, &lam, &opts, None)?
                }
                "ladmm" => {
                    let mut opts = LadmmOptions::recommended(prob.l());
                    opts.eps = cfg.eps;
                    ladmm_solve(&prob, &lam, &opts, None)?
                }
                _ => {
                    let mut opts = HpeOptions::recommended(prob.l());
                    opts.eps = cfg.eps;
                    hpe_solve(&prob, &lam, &opts, None)?
                }
            };
            let seconds = started.elapsed().as_secs_f64();
            let obj = sorted_l1_norm(&result.w, &lam)?;
            let feas = dual_sorted_l1_norm(&prob.apply_a(&result.w)?, &lam)?;
            objectives.push(obj);
            println!(
                "  {name:<7} {:>6}   {seconds:>9.4}   {obj:>11.6}   {feas:.9}",
                result.iterations
            );
        }

        let max = objectives.iter().cloned().fold(f64::MIN, f64::max);
        let min = objectives.iter().cloned().fold(f64::MAX, f64::min);
        println!(
            "  objective spread: {:.2e} (relative)\n",
            (max - min) / (1.0 + max.abs())
        );
    }
    println!("Timings are machine-dependent; only the relative ordering is meaningful.");
    Ok(())
}
