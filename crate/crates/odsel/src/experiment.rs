//! Monte-Carlo harness: instance generation, FDR/power replication studies,
//! convergence-rate traces against a high-precision reference solution, and a
//! local strong-convexity diagnostic.
//!
//! Replications are keyed by `(seed, rep_index)` through independent
//! ChaCha streams, so results are identical regardless of execution order or
//! thread count, and any single replication can be regenerated in isolation.

use ndarray::{Array1, Array2, ShapeBuilder};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hpe::{hpe_solve, HpeOptions};
use crate::ladmm::{ladmm_solve, LadmmOptions};
use crate::model::ProblemData;
use crate::pdsp::{pdsp_solve, PdspEngine, SolveStatus, SolverOptions};
use crate::sorted_l1::{
    bh_lambda, gaussian_adjusted_lambda, sorted_l1_norm, subgradient_sorted_l1, LambdaSeq,
};

/// Default relative support-detection threshold: coordinate `i` is declared
/// a discovery when `|ŵᵢ| > support_tol · max(1, ‖ŵ‖_∞)`.
pub const DEFAULT_SUPPORT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignKind {
    /// Entrywise standard normal design.
    Gaussian,
    /// Orthonormalized Gaussian draw (requires `n ≥ p`), so `XᵀX = I`.
    Orthogonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Pdsp,
    Ladmm,
    Hpe,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub p: usize,
    /// Number of active coordinates in the true signal.
    pub s: usize,
    /// Target FDR level in (0,1); drives the weight sequence.
    pub q: f64,
    pub sigma_noise: f64,
    pub design: DesignKind,
    pub reps: usize,
    pub seed: u64,
    pub solver: SolverKind,
    pub eps: f64,
    pub support_tol: f64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::invalid("n and p must be at least 1"));
        }
        if self.s > self.p {
            return Err(Error::invalid("sparsity s cannot exceed p"));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(Error::invalid("q must lie strictly inside (0,1)"));
        }
        if !(self.sigma_noise > 0.0) || !self.sigma_noise.is_finite() {
            return Err(Error::invalid("sigma_noise must be positive and finite"));
        }
        if self.reps == 0 {
            return Err(Error::invalid("reps must be at least 1"));
        }
        if !(self.eps > 0.0) {
            return Err(Error::invalid("eps must be positive"));
        }
        if !(self.support_tol > 0.0) {
            return Err(Error::invalid("support_tol must be positive"));
        }
        if self.design == DesignKind::Orthogonal && self.n < self.p {
            return Err(Error::invalid("orthogonal design requires n >= p"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepStatus {
    Converged,
    MaxIters,
    /// The solver returned an error; the numeric fields of the record are
    /// zeroed and the replication is excluded from aggregates.
    Failed,
}

impl RepStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RepStatus::Converged => "converged",
            RepStatus::MaxIters => "max_iters",
            RepStatus::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepRecord {
    pub rep: usize,
    /// False discoveries V.
    pub false_discoveries: usize,
    /// Total discoveries R.
    pub discoveries: usize,
    /// V / max(R, 1).
    pub fdp: f64,
    /// True positives / max(s, 1); 0 by convention under the global null.
    pub power: f64,
    pub iterations: usize,
    pub status: RepStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub records: Vec<RepRecord>,
    pub mean_fdr: f64,
    pub se_fdr: f64,
    pub mean_power: f64,
    pub se_power: f64,
    pub failed: usize,
}

/// Modified Gram-Schmidt with a reorthogonalization pass; columns come out
/// orthonormal to well below 1e-10 for generic Gaussian input.
fn orthonormalize_columns(x: &mut Array2<f64>) -> Result<()> {
    let p = x.ncols();
    for j in 0..p {
        for _ in 0..2 {
            for i in 0..j {
                let qi = x.column(i).to_owned();
                let r = qi.dot(&x.column(j));
                x.column_mut(j).scaled_add(-r, &qi);
            }
        }
        let norm = x.column(j).dot(&x.column(j)).sqrt();
        if norm <= 1e-12 {
            return Err(Error::NumericalFailure {
                iteration: 0,
                reason: "rank-deficient draw during orthonormalization".into(),
            });
        }
        x.column_mut(j).mapv_inplace(|t| t / norm);
    }
    Ok(())
}

/// Generates replication `rep_index` of `cfg`: the design, the response, the
/// true signal (active magnitudes `√(2 ln p)`), and the weight sequence
/// (Gaussian-adjusted when the design is Gaussian).
///
/// Deterministic in `(cfg.seed, rep_index)`: each replication uses its own
/// stream of a counter-based generator (ChaCha8), with draws ordered as
/// design entries (column-major), support indices, then noise.
pub fn gen_instance(
    cfg: &SimConfig,
    rep_index: usize,
) -> Result<(ProblemData, Array1<f64>, LambdaSeq)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(rep_index as u64 + 1);
    let (n, p) = (cfg.n, cfg.p);

    let entries: Vec<f64> = (0..n * p)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let mut x = Array2::from_shape_vec((n, p).f(), entries)
        .expect("shape matches the number of drawn entries");
    if cfg.design == DesignKind::Orthogonal {
        orthonormalize_columns(&mut x)?;
    }

    let mut w_true = Array1::zeros(p);
    let amplitude = (2.0 * (p as f64).ln()).sqrt();
    for idx in rand::seq::index::sample(&mut rng, p, cfg.s) {
        w_true[idx] = amplitude;
    }

    let mut y = x.dot(&w_true);
    for yi in y.iter_mut() {
        *yi += cfg.sigma_noise * rng.sample::<f64, _>(StandardNormal);
    }

    let base = bh_lambda(p, cfg.q, cfg.sigma_noise)?;
    let lam = match cfg.design {
        DesignKind::Gaussian => gaussian_adjusted_lambda(&base, n)?,
        DesignKind::Orthogonal => base,
    };
    Ok((ProblemData::new(x, y)?, w_true, lam))
}

fn solve_dispatch(
    solver: SolverKind,
    prob: &ProblemData,
    lam: &LambdaSeq,
    eps: f64,
) -> Result<(Array1<f64>, usize, SolveStatus)> {
    match solver {
        SolverKind::Pdsp => {
            let mut opts = SolverOptions::standard(prob.l());
            opts.eps = eps;
            let res = pdsp_solve(prob, lam, lam, &opts, None)?;
            Ok((res.w, res.iterations, res.status))
        }
        SolverKind::Ladmm => {
            let mut opts = LadmmOptions::recommended(prob.l());
            opts.eps = eps;
            let res = ladmm_solve(prob, lam, &opts, None)?;
            Ok((res.w, res.iterations, res.status))
        }
        SolverKind::Hpe => {
            let mut opts = HpeOptions::recommended(prob.l());
            opts.eps = eps;
            let res = hpe_solve(prob, lam, &opts, None)?;
            Ok((res.w, res.iterations, res.status))
        }
    }
}

fn tally(cfg: &SimConfig, w_hat: &Array1<f64>, w_true: &Array1<f64>) -> (usize, usize, f64, f64) {
    let max_abs = w_hat.iter().fold(0.0f64, |m, &t| m.max(t.abs()));
    let threshold = cfg.support_tol * max_abs.max(1.0);
    let mut false_disc = 0usize;
    let mut disc = 0usize;
    let mut true_pos = 0usize;
    for (wh, wt) in w_hat.iter().zip(w_true.iter()) {
        if wh.abs() > threshold {
            disc += 1;
            if *wt != 0.0 {
                true_pos += 1;
            } else {
                false_disc += 1;
            }
        }
    }
    let fdp = false_disc as f64 / (disc.max(1)) as f64;
    let power = true_pos as f64 / (cfg.s.max(1)) as f64;
    (false_disc, disc, fdp, power)
}

fn run_rep(cfg: &SimConfig, rep: usize) -> RepRecord {
    let attempt = || -> Result<RepRecord> {
        let (prob, w_true, lam) = gen_instance(cfg, rep)?;
        let (w_hat, iterations, status) = solve_dispatch(cfg.solver, &prob, &lam, cfg.eps)?;
        let (false_discoveries, discoveries, fdp, power) = tally(cfg, &w_hat, &w_true);
        let status = match status {
            SolveStatus::MaxIters => RepStatus::MaxIters,
            _ => RepStatus::Converged,
        };
        Ok(RepRecord {
            rep,
            false_discoveries,
            discoveries,
            fdp,
            power,
            iterations,
            status,
        })
    };
    attempt().unwrap_or(RepRecord {
        rep,
        false_discoveries: 0,
        discoveries: 0,
        fdp: 0.0,
        power: 0.0,
        iterations: 0,
        status: RepStatus::Failed,
    })
}

/// Runs all replications of `cfg`. `threads == 1` executes serially;
/// `threads == 0` uses one worker per available core; any other value pins
/// the pool size. Output order is by replication index regardless of the
/// execution schedule.
pub fn run_replications(cfg: &SimConfig, threads: usize) -> Result<Vec<RepRecord>> {
    cfg.validate()?;
    if threads == 1 {
        return Ok((0..cfg.reps).map(|rep| run_rep(cfg, rep)).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid(format!("could not build thread pool: {e}")))?;
    Ok(pool.install(|| {
        (0..cfg.reps)
            .into_par_iter()
            .map(|rep| run_rep(cfg, rep))
            .collect()
    }))
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

/// Aggregates replication records into means and standard errors
/// (sample standard deviation over `√(#successful reps)`); failed
/// replications are counted but excluded from the averages.
pub fn aggregate(records: Vec<RepRecord>) -> SimResult {
    let failed = records
        .iter()
        .filter(|r| r.status == RepStatus::Failed)
        .count();
    let fdps: Vec<f64> = records
        .iter()
        .filter(|r| r.status != RepStatus::Failed)
        .map(|r| r.fdp)
        .collect();
    let powers: Vec<f64> = records
        .iter()
        .filter(|r| r.status != RepStatus::Failed)
        .map(|r| r.power)
        .collect();
    let (mean_fdr, se_fdr) = mean_and_se(&fdps);
    let (mean_power, se_power) = mean_and_se(&powers);
    SimResult {
        records,
        mean_fdr,
        se_fdr,
        mean_power,
        se_power,
        failed,
    }
}

/// Full replication study: generate, solve, tally, aggregate. Errors when at
/// least 5% of replications fail outright (a hit of the iteration cap counts
/// as a success with `MaxIters` status, not a failure).
pub fn run_fdr_experiment(cfg: &SimConfig, threads: usize) -> Result<SimResult> {
    let records = run_replications(cfg, threads)?;
    let result = aggregate(records);
    if result.failed * 20 >= cfg.reps {
        return Err(Error::NumericalFailure {
            iteration: 0,
            reason: format!(
                "{} of {} replications failed (5% tolerance exceeded)",
                result.failed, cfg.reps
            ),
        });
    }
    Ok(result)
}

/// Curvature of `J_λ` between a reference point and an iterate:
/// `(J_λ(w*) − J_λ(w_k) − ½⟨g, w*−w_k⟩)/‖w*−w_k‖²` with `g` a subgradient at
/// `w_k`. Reported as-is; it may be negative.
pub fn local_strong_convexity_estimate(
    lam: &LambdaSeq,
    w_star: &Array1<f64>,
    w_k: &Array1<f64>,
) -> Result<f64> {
    if w_star.len() != w_k.len() {
        return Err(Error::dim("point pair", w_star.len(), w_k.len()));
    }
    let diff = w_star - w_k;
    let dist_sq = diff.dot(&diff);
    if dist_sq.sqrt() <= 1e-12 {
        return Err(Error::invalid(
            "points coincide; curvature estimate undefined",
        ));
    }
    let g = subgradient_sorted_l1(w_k, lam)?;
    let j_star = sorted_l1_norm(w_star, lam)?;
    let j_k = sorted_l1_norm(w_k, lam)?;
    Ok((j_star - j_k - 0.5 * g.dot(&diff)) / dist_sq)
}

/// Per-iteration error curves of a second solver run measured against a
/// high-precision first run, plus log-log slopes over the final decade.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTrace {
    /// Pointwise primal errors `‖w_k − w*‖ / max(‖w*‖, 1e-12)`, index k−1.
    pub point_primal: Vec<f64>,
    /// Ergodic primal errors `‖w̄_k − w*‖ / max(‖w*‖, 1e-12)`.
    pub ergodic_primal: Vec<f64>,
    /// Pointwise dual errors, same normalization against `v*`.
    pub point_dual: Vec<f64>,
    /// Ergodic dual errors.
    pub ergodic_dual: Vec<f64>,
    /// Least-squares slope of `ln(point_primal)` vs `ln k` over the final
    /// decade `[K/10, K]`; `None` when fewer than two usable points exist
    /// (e.g. the curve hit exact zero).
    pub pointwise_slope: Option<f64>,
    /// Same fit for the ergodic primal curve.
    pub ergodic_slope: Option<f64>,
}

fn log_log_slope(errors: &[f64]) -> Option<f64> {
    let k_end = errors.len();
    if k_end < 3 {
        return None;
    }
    let k_start = (k_end / 10).max(1);
    let pts: Vec<(f64, f64)> = (k_start..=k_end)
        .filter_map(|k| {
            let e = errors[k - 1];
            (e.is_finite() && e > 0.0).then(|| ((k as f64).ln(), e.ln()))
        })
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<f64>();
    if sxx == 0.0 {
        return None;
    }
    let sxy = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>();
    Some(sxy / sxx)
}

/// Two-pass error study on one instance: pass one solves to `opts.eps · 1e-2`
/// to obtain a reference pair `(w*, v*)`; pass two restarts from zero with
/// `opts` and records the relative distance of every iterate (pointwise and
/// ergodic, primal and dual) to the reference, stopping by the usual
/// relative-change rule checked at every iteration.
pub fn convergence_trace_experiment(
    prob: &ProblemData,
    lam: &LambdaSeq,
    opts: &SolverOptions,
) -> Result<ConvergenceTrace> {
    let mut hi = *opts;
    hi.eps = opts.eps * 1e-2;
    let reference = pdsp_solve(prob, lam, lam, &hi, None)?;
    let w_star = reference.w;
    let v_star = reference.v;
    let w_scale = w_star.dot(&w_star).sqrt().max(1e-12);
    let v_scale = v_star.dot(&v_star).sqrt().max(1e-12);

    let mut engine = PdspEngine::new(prob, lam, lam, *opts, None)?;
    let mut point_primal = Vec::new();
    let mut ergodic_primal = Vec::new();
    let mut point_dual = Vec::new();
    let mut ergodic_dual = Vec::new();
    let dist = |a: &Array1<f64>, b: &Array1<f64>| {
        a.iter()
            .zip(b.iter())
            .map(|(s, t)| (s - t) * (s - t))
            .sum::<f64>()
            .sqrt()
    };
    for _ in 0..opts.max_iters {
        engine.step();
        let diag = engine.diagnostics();
        let st = engine.state();
        point_primal.push(dist(&st.w_k, &w_star) / w_scale);
        ergodic_primal.push(dist(&st.wbar_k, &w_star) / w_scale);
        point_dual.push(dist(&st.v_k, &v_star) / v_scale);
        ergodic_dual.push(dist(&st.vbar_k, &v_star) / v_scale);
        if !diag.rel_change_point.is_finite() {
            return Err(Error::NumericalFailure {
                iteration: point_primal.len(),
                reason: "non-finite iterates detected".into(),
            });
        }
        if diag.rel_change_point <= opts.eps {
            break;
        }
    }
    let pointwise_slope = log_log_slope(&point_primal);
    let ergodic_slope = log_log_slope(&ergodic_primal);
    Ok(ConvergenceTrace {
        point_primal,
        ergodic_primal,
        point_dual,
        ergodic_dual,
        pointwise_slope,
        ergodic_slope,
    })
}
