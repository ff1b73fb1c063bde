//! Solvers and experiment tooling for the ordered Dantzig selector: sparse
//! regression that minimizes the sorted-ℓ1 norm `J_λ(w) = Σ λᵢ |w|₍ᵢ₎`
//! subject to the dual-norm constraint `J_λ^D(Xᵀ(y − Xw)) ≤ 1`.
//!
//! The constrained program is solved through its convex-concave saddle
//! reformulation
//!
//! ```text
//! min_w max_v  ⟨Xᵀy − XᵀXw, v⟩ + J_λ(w) − J_λ(v)
//! ```
//!
//! by a primal-dual proximal extragradient method ([`pdsp_solve`]), with a
//! linearized ADMM ([`ladmm_solve`]) and an inexact proximal-point method
//! with accelerated inner loops ([`hpe_solve`]) as baselines. For orthogonal
//! designs the solution has a closed form ([`slope_orthogonal_solve`])
//! together with a KKT certificate checker ([`verify_kkt_orthogonal`]), which
//! the iterative solvers are tested against.
//!
//! Supporting pieces:
//! - [`sorted_l1`]: the sorted-ℓ1 norm, its dual norm, prox and dual-ball
//!   projection, subgradients, and Benjamini-Hochberg weight sequences.
//! - [`experiment`]: seeded Monte-Carlo replications estimating false
//!   discovery rate and power, convergence-rate traces, and a local
//!   strong-convexity diagnostic.
//! - [`cli`]: the `odsel` binary (subcommands `lambda`, `solve`, `simulate`,
//!   `bench`) reading and writing plain CSV.
//!
//! The `examples/` directory demonstrates each capability end to end; start
//! with `basic_solve`.

pub mod cli;
pub mod error;
pub mod experiment;
pub mod hpe;
pub mod ladmm;
pub mod model;
pub mod oracle;
pub mod pdsp;
pub mod sorted_l1;

pub use error::{Error, Result};
pub use experiment::{
    aggregate, convergence_trace_experiment, gen_instance, local_strong_convexity_estimate,
    run_fdr_experiment, run_replications, ConvergenceTrace, DesignKind, RepRecord, RepStatus,
    SimConfig, SimResult, SolverKind, DEFAULT_SUPPORT_TOL,
};
pub use hpe::{hpe_solve, HpeOptions};
pub use ladmm::{ladmm_solve, LadmmOptions};
pub use model::{AugmentedPoint, ProblemData};
pub use oracle::{
    ods_lp_bruteforce, pool_blocks, slope_orthogonal_solve, verify_kkt_orthogonal, KktReport,
    KktResiduals, PoolBlock,
};
pub use pdsp::{
    check_convergence_bounds, pdsp_solve, record_distance_trace, restricted_gap,
    ConvergenceBoundsReport, ConvergenceCheck, DistanceRecord, DistanceTrace, ExtragradientMode,
    Gap, PdspEngine, SaddleState, SolveResult, SolveStatus, SolverOptions, StepDiagnostics,
    TraceRecord,
};
pub use sorted_l1::{
    bh_lambda, dual_sorted_l1_norm, gaussian_adjusted_lambda, normal_quantile, project_dual_ball,
    prox_sorted_l1, sorted_l1_norm, subgradient_sorted_l1, LambdaSeq,
};
