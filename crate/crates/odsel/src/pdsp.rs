//! Primal-dual proximal extragradient solver for the saddle reformulation.
//!
//! The selection problem `min J_{λF}(w) s.t. J_{λG}^D(Xᵀ(y − Xw)) ≤ 1` is
//! solved through its saddle form
//!
//! ```text
//! min_w max_v ⟨Xᵀy − XᵀXw, v⟩ + F(w) − G(v),    F = J_{λF}, G = J_{λG},
//! ```
//!
//! whose coupling operator `w ↦ XᵀXw` has norm `L = ‖XᵀX(I + XᵀX)‖^{1/2}`
//! (see [`crate::model::ProblemData`]). Each iteration performs a proximal
//! dual ascent step, an extragradient substitution `v′` (either `v_{k+1}` or
//! `2v_{k+1}`), a proximal primal descent step, and a primal extrapolation:
//!
//! ```text
//! v_{k+1} = prox_{σ_k G}(v_k + σ_k (Xᵀy − XᵀX w′_k))
//! w_{k+1} = prox_{τ_k F}(w_k + τ_k XᵀX v′_{k+1})
//! θ_k     = 1/√(1 + 2γτ_k)
//! w′_{k+1} = w_{k+1} + θ_k (w_{k+1} − w_k)
//! τ_{k+1} = θ_k τ_k,   σ_{k+1} = σ_k/θ_k .
//! ```
//!
//! With `γ = 0` (the plain-norm case) all steps are constant and `θ ≡ 1`.
//! A positive `γ` declares the dual term `G = J_{λG} + (γ/2)‖·‖²` strongly
//! convex and accelerates the schedule; that path is exercised by tests but
//! not by the CLI, since no strongly convex `G` arises in the selection
//! problem itself.
//!
//! Stopping follows the relative-change rule
//! `‖z_k − z_{k−1}‖ / max(1, ‖z_k‖) ≤ eps` on the concatenated pair
//! `z = (w, v)`, applied to the pointwise iterates and/or their running
//! (ergodic) averages, evaluated every `trace_every` iterations.

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::model::{AugmentedPoint, ProblemData};
use crate::sorted_l1::{dual_sorted_l1_norm, prox_sorted_l1, sorted_l1_norm, LambdaSeq};

/// Relative-change or iterate-norm threshold beyond which the solver aborts
/// with a numerical-failure error instead of looping on garbage.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// Default feasibility tolerance for gap reporting. Iterates are only
/// asymptotically feasible, so a hard cutoff at exactly 1 would mark every
/// finite-iteration point infeasible.
pub const DEFAULT_FEAS_TOL: f64 = 1e-6;

/// Default relative slack for [`check_convergence_bounds`].
pub const DEFAULT_BOUNDS_SLACK: f64 = 1e-6;

/// Slack for the step-size product constraints, absorbing rounding in
/// expressions like `τ₀σ₀L²` evaluated at the exact boundary.
const STEP_CONSTRAINT_SLACK: f64 = 1e-9;

/// Choice of the dual substitution `v′` in the primal step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtragradientMode {
    /// `v′ = v_{k+1}`; requires `τ₀σ₀L² ≤ 1`.
    Standard,
    /// `v′ = 2v_{k+1}`; requires `2τ₀σ₀L² ≤ 1`. Faster in practice on many
    /// instances but without a global guarantee, hence the divergence
    /// detector.
    Doubled,
}

/// Which relative-change criterion is monitored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergenceCheck {
    Pointwise,
    Ergodic,
    Both,
}

/// Tuning knobs for [`pdsp_solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tau0: f64,
    pub sigma0: f64,
    /// Strong-convexity modulus attributed to the dual term `G`. Zero for
    /// plain norms. Positive values switch the step schedule to the
    /// accelerated regime and restrict `check` to `Pointwise`.
    pub gamma: f64,
    pub extragradient_mode: ExtragradientMode,
    pub eps: f64,
    pub max_iters: usize,
    pub check: ConvergenceCheck,
    /// Cadence (in iterations) of stopping checks and trace records.
    pub trace_every: usize,
}

impl SolverOptions {
    /// Symmetric steps at the `τ₀σ₀L² = 1` boundary of Standard mode.
    pub fn standard(l: f64) -> Self {
        let step = if l > 0.0 { 1.0 / l } else { 1.0 };
        Self {
            tau0: step,
            sigma0: step,
            gamma: 0.0,
            extragradient_mode: ExtragradientMode::Standard,
            eps: 1e-6,
            max_iters: 100_000,
            check: ConvergenceCheck::Pointwise,
            trace_every: 10,
        }
    }

    /// Symmetric steps at the `2τ₀σ₀L² = 1` boundary of Doubled mode.
    pub fn doubled(l: f64) -> Self {
        let step = if l > 0.0 {
            1.0 / (l * std::f64::consts::SQRT_2)
        } else {
            1.0
        };
        Self {
            extragradient_mode: ExtragradientMode::Doubled,
            ..Self::standard(l)
        }
        .with_steps(step, step)
    }

    fn with_steps(mut self, tau0: f64, sigma0: f64) -> Self {
        self.tau0 = tau0;
        self.sigma0 = sigma0;
        self
    }

    /// Checks all option invariants against the coupling norm `l`.
    pub fn validate(&self, l: f64) -> Result<()> {
        if !(self.tau0 > 0.0) || !self.tau0.is_finite() {
            return Err(Error::invalid("tau0 must be positive and finite"));
        }
        if !(self.sigma0 > 0.0) || !self.sigma0.is_finite() {
            return Err(Error::invalid("sigma0 must be positive and finite"));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::invalid("gamma must be nonnegative and finite"));
        }
        if !(self.eps > 0.0) {
            return Err(Error::invalid("eps must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        if self.trace_every == 0 {
            return Err(Error::invalid("trace_every must be at least 1"));
        }
        let product = self.tau0 * self.sigma0 * l * l;
        match self.extragradient_mode {
            ExtragradientMode::Standard => {
                if product > 1.0 + STEP_CONSTRAINT_SLACK {
                    return Err(Error::invalid(format!(
                        "Standard mode needs tau0*sigma0*L^2 <= 1, got {product:.6e}"
                    )));
                }
            }
            ExtragradientMode::Doubled => {
                if 2.0 * product > 1.0 + STEP_CONSTRAINT_SLACK {
                    return Err(Error::invalid(format!(
                        "Doubled mode needs 2*tau0*sigma0*L^2 <= 1, got {:.6e}",
                        2.0 * product
                    )));
                }
            }
        }
        if self.gamma > 0.0 && self.check != ConvergenceCheck::Pointwise {
            return Err(Error::invalid(
                "gamma > 0 accelerates only the pointwise iterates; check must be Pointwise",
            ));
        }
        Ok(())
    }
}

/// Full iteration state, exposed for checkpointing and diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleState {
    pub w_k: Array1<f64>,
    pub v_k: Array1<f64>,
    pub w_prime_k: Array1<f64>,
    pub tau_k: f64,
    pub sigma_k: f64,
    /// `1/√(1 + 2γ·tau_k)` for the stored `tau_k`; exactly 1 when `γ = 0`.
    pub theta_k: f64,
    /// Running average `(1/k)·Σ_{i=1..k} w_i` (zero before the first step).
    pub wbar_k: Array1<f64>,
    pub vbar_k: Array1<f64>,
    pub k: usize,
}

/// How a solve ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    ConvergedPointwise,
    ConvergedErgodic,
    MaxIters,
}

/// One monitored iteration. All fields are finite; non-finite values abort
/// the solve with a numerical-failure error before anything is recorded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    pub rel_change_point: f64,
    pub rel_change_ergodic: f64,
    /// `J_{λF}(w_k)`.
    pub primal_obj: f64,
    /// `J_{λG}^D(Xᵀ(y − Xw_k))`; feasible when ≤ 1 (+tolerance).
    pub primal_feas: f64,
    /// `⟨Xᵀy, v_k⟩ − J_{λG}(v_k)`.
    pub dual_obj: f64,
    /// `J_{λF}^D(XᵀX v_k)`; feasible when ≤ 1 (+tolerance).
    pub dual_feas: f64,
    /// Raw `primal_obj − dual_obj`. Meaningful as a duality gap only when
    /// both feasibility columns are near 1 or below; see [`restricted_gap`]
    /// for the marker-aware variant.
    pub gap: f64,
}

/// Solver output. `w`, `v` are the pair selected by the stopping criterion
/// that fired (pointwise iterates or ergodic averages).
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub w: Array1<f64>,
    pub v: Array1<f64>,
    pub status: SolveStatus,
    pub iterations: usize,
    pub trace: Vec<TraceRecord>,
    /// Non-fatal diagnostics (e.g. a penalty parameter below its recommended
    /// floor in the ADMM baseline).
    pub warnings: Vec<String>,
}

/// Duality gap restricted to the feasible product set, or a marker naming
/// which side is infeasible beyond tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gap {
    /// Both points feasible within tolerance; the value `P − D`.
    Finite(f64),
    PrimalInfeasible,
    DualInfeasible,
    BothInfeasible,
}

impl Gap {
    pub fn value(&self) -> Option<f64> {
        match self {
            Gap::Finite(g) => Some(*g),
            _ => None,
        }
    }
}

/// Evaluates the restricted primal-dual gap at `(w, v)`.
///
/// `P = J_{λF}(w)` counts only when `J_{λG}^D(Xᵀ(y−Xw)) ≤ 1 + feas_tol`;
/// `D = ⟨Xᵀy, v⟩ − J_{λG}(v)` counts only when `J_{λF}^D(XᵀXv) ≤ 1 + feas_tol`.
/// When both sides are feasible the gap `P − D` is returned; weak duality
/// keeps it above `−10·feas_tol·(1 + |P| + |D|)`.
pub fn restricted_gap(
    prob: &ProblemData,
    lam_f: &LambdaSeq,
    lam_g: &LambdaSeq,
    w: &Array1<f64>,
    v: &Array1<f64>,
    feas_tol: f64,
) -> Result<Gap> {
    if !(feas_tol >= 0.0) {
        return Err(Error::invalid("feas_tol must be nonnegative"));
    }
    let resid = prob.apply_a(w)?;
    let primal_feas = dual_sorted_l1_norm(&resid, lam_g)?;
    let gv = prob.apply_adjoint(v)?;
    let dual_feas = dual_sorted_l1_norm(&gv, lam_f)?;
    let primal_ok = primal_feas <= 1.0 + feas_tol;
    let dual_ok = dual_feas <= 1.0 + feas_tol;
    Ok(match (primal_ok, dual_ok) {
        (true, true) => {
            let p = sorted_l1_norm(w, lam_f)?;
            let d = prob.xty().dot(v) - sorted_l1_norm(v, lam_g)?;
            Gap::Finite(p - d)
        }
        (false, true) => Gap::PrimalInfeasible,
        (true, false) => Gap::DualInfeasible,
        (false, false) => Gap::BothInfeasible,
    })
}

/// One solver whose iterations can be driven manually (used by the distance
/// recorder and the tests; [`pdsp_solve`] wraps it).
pub struct PdspEngine<'a> {
    prob: &'a ProblemData,
    lam_f: &'a LambdaSeq,
    lam_g: &'a LambdaSeq,
    opts: SolverOptions,
    state: SaddleState,
    prev_w: Array1<f64>,
    prev_v: Array1<f64>,
    prev_wbar: Array1<f64>,
    prev_vbar: Array1<f64>,
}

/// Quantities evaluated at a stopping checkpoint.
#[derive(Debug, Clone, Copy)]
pub struct StepDiagnostics {
    pub rel_change_point: f64,
    pub rel_change_ergodic: f64,
    /// `‖(w_k, v_k)‖`, for the divergence detector.
    pub pair_norm: f64,
}

impl<'a> PdspEngine<'a> {
    pub fn new(
        prob: &'a ProblemData,
        lam_f: &'a LambdaSeq,
        lam_g: &'a LambdaSeq,
        opts: SolverOptions,
        start: Option<&AugmentedPoint>,
    ) -> Result<Self> {
        opts.validate(prob.l())?;
        let p = prob.p();
        if lam_f.len() != p {
            return Err(Error::dim("primal weights", p, lam_f.len()));
        }
        if lam_g.len() != p {
            return Err(Error::dim("dual weights", p, lam_g.len()));
        }
        let (w0, v0) = match start {
            Some(pt) => {
                if pt.w.len() != p {
                    return Err(Error::dim("start point", p, pt.w.len()));
                }
                (pt.w.clone(), pt.v.clone())
            }
            None => (Array1::zeros(p), Array1::zeros(p)),
        };
        let theta0 = 1.0 / (1.0 + 2.0 * opts.gamma * opts.tau0).sqrt();
        let state = SaddleState {
            w_prime_k: w0.clone(),
            wbar_k: Array1::zeros(p),
            vbar_k: Array1::zeros(p),
            tau_k: opts.tau0,
            sigma_k: opts.sigma0,
            theta_k: theta0,
            k: 0,
            w_k: w0.clone(),
            v_k: v0.clone(),
        };
        Ok(Self {
            prob,
            lam_f,
            lam_g,
            opts,
            state,
            prev_w: w0.clone(),
            prev_v: v0.clone(),
            prev_wbar: Array1::zeros(p),
            prev_vbar: Array1::zeros(p),
        })
    }

    pub fn state(&self) -> &SaddleState {
        &self.state
    }

    pub fn options(&self) -> &SolverOptions {
        &self.opts
    }

    /// Dual prox with step `sigma`. For `γ > 0` the dual term is
    /// `J_{λG} + (γ/2)‖·‖²`, whose prox rescales into the plain norm prox.
    fn dual_prox(&self, z: Array1<f64>, sigma: f64) -> Array1<f64> {
        if self.opts.gamma > 0.0 {
            let denom = 1.0 + sigma * self.opts.gamma;
            prox_sorted_l1(&(z / denom), self.lam_g, sigma / denom)
        } else {
            prox_sorted_l1(&z, self.lam_g, sigma)
        }
        .expect("dimensions validated at construction")
    }

    /// Advances one iteration.
    pub fn step(&mut self) {
        self.prev_w.assign(&self.state.w_k);
        self.prev_v.assign(&self.state.v_k);
        self.prev_wbar.assign(&self.state.wbar_k);
        self.prev_vbar.assign(&self.state.vbar_k);

        let tau = self.state.tau_k;
        let sigma = self.state.sigma_k;
        let theta = self.state.theta_k;

        // Dual ascent step at the extrapolated primal point.
        let gw = self
            .prob
            .gram_apply(&self.state.w_prime_k)
            .expect("dimensions validated at construction");
        let mut arg_v = self.prob.xty() - &gw;
        arg_v *= sigma;
        arg_v += &self.state.v_k;
        let v_next = self.dual_prox(arg_v, sigma);

        // Primal descent step at v′ = v_{k+1} (Standard) or 2v_{k+1}
        // (Doubled); the Gram apply is linear, so the factor moves outside.
        let vprime_factor = match self.opts.extragradient_mode {
            ExtragradientMode::Standard => 1.0,
            ExtragradientMode::Doubled => 2.0,
        };
        let mut arg_w = self
            .prob
            .gram_apply(&v_next)
            .expect("dimensions validated at construction");
        arg_w *= vprime_factor * tau;
        arg_w += &self.state.w_k;
        let w_next =
            prox_sorted_l1(&arg_w, self.lam_f, tau).expect("dimensions validated at construction");

        // Extrapolation and step-size schedule.
        let w_prime = &w_next + &((&w_next - &self.state.w_k) * theta);
        self.state.tau_k = theta * tau;
        self.state.sigma_k = sigma / theta;
        self.state.theta_k = 1.0 / (1.0 + 2.0 * self.opts.gamma * self.state.tau_k).sqrt();

        self.state.w_k = w_next;
        self.state.v_k = v_next;
        self.state.w_prime_k = w_prime;
        self.state.k += 1;

        // Ergodic averages, maintained incrementally.
        let kf = self.state.k as f64;
        let wbar_step = (&self.state.w_k - &self.state.wbar_k) / kf;
        self.state.wbar_k += &wbar_step;
        let vbar_step = (&self.state.v_k - &self.state.vbar_k) / kf;
        self.state.vbar_k += &vbar_step;
    }

    /// Relative changes against the immediately preceding iteration.
    pub fn diagnostics(&self) -> StepDiagnostics {
        let d2 = |a: &Array1<f64>, b: &Array1<f64>| {
            a.iter()
                .zip(b.iter())
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
        };
        let n2 = |a: &Array1<f64>| a.dot(a);
        let point_num = (d2(&self.state.w_k, &self.prev_w) + d2(&self.state.v_k, &self.prev_v))
            .sqrt();
        let pair_norm = (n2(&self.state.w_k) + n2(&self.state.v_k)).sqrt();
        let erg_num = (d2(&self.state.wbar_k, &self.prev_wbar)
            + d2(&self.state.vbar_k, &self.prev_vbar))
        .sqrt();
        let erg_norm = (n2(&self.state.wbar_k) + n2(&self.state.vbar_k)).sqrt();
        StepDiagnostics {
            rel_change_point: point_num / pair_norm.max(1.0),
            rel_change_ergodic: erg_num / erg_norm.max(1.0),
            pair_norm,
        }
    }

    /// Objective/feasibility snapshot of the current pointwise iterates.
    pub fn trace_record(&self, diag: &StepDiagnostics) -> TraceRecord {
        let resid = self
            .prob
            .apply_a(&self.state.w_k)
            .expect("dimensions validated at construction");
        let gv = self
            .prob
            .apply_adjoint(&self.state.v_k)
            .expect("dimensions validated at construction");
        let primal_obj = sorted_l1_norm(&self.state.w_k, self.lam_f).expect("validated");
        let primal_feas = dual_sorted_l1_norm(&resid, self.lam_g).expect("validated");
        let dual_obj = self.prob.xty().dot(&self.state.v_k)
            - sorted_l1_norm(&self.state.v_k, self.lam_g).expect("validated");
        let dual_feas = dual_sorted_l1_norm(&gv, self.lam_f).expect("validated");
        TraceRecord {
            iter: self.state.k,
            rel_change_point: diag.rel_change_point,
            rel_change_ergodic: diag.rel_change_ergodic,
            primal_obj,
            primal_feas,
            dual_obj,
            dual_feas,
            gap: primal_obj - dual_obj,
        }
    }
}

/// Runs the extragradient loop until the selected relative-change criterion
/// drops below `opts.eps`, `opts.max_iters` is reached, or divergence is
/// detected.
///
/// `start` defaults to the zero pair. On `ConvergedPointwise` the returned
/// pair is `(w_k, v_k)`; on `ConvergedErgodic` it is the averaged pair. With
/// `check = Both` and both criteria firing at the same checkpoint, the
/// pointwise pair wins and the status records it.
pub fn pdsp_solve(
    prob: &ProblemData,
    lam_f: &LambdaSeq,
    lam_g: &LambdaSeq,
    opts: &SolverOptions,
    start: Option<&AugmentedPoint>,
) -> Result<SolveResult> {
    let mut engine = PdspEngine::new(prob, lam_f, lam_g, *opts, start)?;
    let mut trace = Vec::new();
    loop {
        engine.step();
        let k = engine.state().k;
        if k % opts.trace_every != 0 && k < opts.max_iters {
            continue;
        }
        let diag = engine.diagnostics();
        if !diag.rel_change_point.is_finite()
            || !diag.rel_change_ergodic.is_finite()
            || !diag.pair_norm.is_finite()
        {
            return Err(Error::NumericalFailure {
                iteration: k,
                reason: "non-finite iterates detected".into(),
            });
        }
        if diag.pair_norm > DIVERGENCE_LIMIT || diag.rel_change_point > DIVERGENCE_LIMIT {
            return Err(Error::NumericalFailure {
                iteration: k,
                reason: format!(
                    "divergence detector tripped (pair norm {:.3e}, rel change {:.3e})",
                    diag.pair_norm, diag.rel_change_point
                ),
            });
        }
        trace.push(engine.trace_record(&diag));

        let point_hit = matches!(
            opts.check,
            ConvergenceCheck::Pointwise | ConvergenceCheck::Both
        ) && diag.rel_change_point <= opts.eps;
        let ergodic_hit = matches!(
            opts.check,
            ConvergenceCheck::Ergodic | ConvergenceCheck::Both
        ) && diag.rel_change_ergodic <= opts.eps;

        let state = engine.state();
        if point_hit {
            return Ok(SolveResult {
                w: state.w_k.clone(),
                v: state.v_k.clone(),
                status: SolveStatus::ConvergedPointwise,
                iterations: k,
                trace,
                warnings: Vec::new(),
            });
        }
        if ergodic_hit {
            return Ok(SolveResult {
                w: state.wbar_k.clone(),
                v: state.vbar_k.clone(),
                status: SolveStatus::ConvergedErgodic,
                iterations: k,
                trace,
                warnings: Vec::new(),
            });
        }
        if k >= opts.max_iters {
            let (w, v) = match opts.check {
                ConvergenceCheck::Ergodic => (state.wbar_k.clone(), state.vbar_k.clone()),
                _ => (state.w_k.clone(), state.v_k.clone()),
            };
            return Ok(SolveResult {
                w,
                v,
                status: SolveStatus::MaxIters,
                iterations: k,
                trace,
                warnings: Vec::new(),
            });
        }
    }
}

/// Per-iteration distances to a reference saddle point, in the scaled metric
/// the convergence analysis uses, plus the ergodic restricted gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceRecord {
    pub k: usize,
    /// `‖w_k − w*‖²/τ₀ + ‖v_k − v*‖²/σ₀`.
    pub dist_sq_scaled: f64,
    /// Restricted gap at the ergodic pair `(w̄_k, v̄_k)`.
    pub ergodic_gap: Gap,
}

/// Distance trajectory of a solve against a reference saddle point.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceTrace {
    pub tau0: f64,
    pub sigma0: f64,
    /// `‖w₀ − w*‖²` and `‖v₀ − v*‖²`.
    pub w_start_dist_sq: f64,
    pub v_start_dist_sq: f64,
    pub records: Vec<DistanceRecord>,
}

impl DistanceTrace {
    /// The scaled distance at the start, `d₀`.
    pub fn d0(&self) -> f64 {
        self.w_start_dist_sq / self.tau0 + self.v_start_dist_sq / self.sigma0
    }
}

/// Runs the engine while recording, at every iteration, the scaled distance
/// to `(w_star, v_star)` and the ergodic restricted gap. Stops at the
/// pointwise criterion or `opts.max_iters`. The reference point should come
/// from a much tighter pre-solve (or an analytic oracle).
pub fn record_distance_trace(
    prob: &ProblemData,
    lam_f: &LambdaSeq,
    lam_g: &LambdaSeq,
    opts: &SolverOptions,
    start: Option<&AugmentedPoint>,
    w_star: &Array1<f64>,
    v_star: &Array1<f64>,
    feas_tol: f64,
) -> Result<DistanceTrace> {
    let p = prob.p();
    if w_star.len() != p {
        return Err(Error::dim("reference primal point", p, w_star.len()));
    }
    if v_star.len() != p {
        return Err(Error::dim("reference dual point", p, v_star.len()));
    }
    let mut engine = PdspEngine::new(prob, lam_f, lam_g, *opts, start)?;
    let dist2 = |a: &Array1<f64>, b: &Array1<f64>| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
    };
    let w_start_dist_sq = dist2(&engine.state().w_k, w_star);
    let v_start_dist_sq = dist2(&engine.state().v_k, v_star);
    let mut records = Vec::new();
    loop {
        engine.step();
        let state = engine.state();
        let dist_sq_scaled =
            dist2(&state.w_k, w_star) / opts.tau0 + dist2(&state.v_k, v_star) / opts.sigma0;
        if !dist_sq_scaled.is_finite() {
            return Err(Error::NumericalFailure {
                iteration: state.k,
                reason: "non-finite iterates while recording distances".into(),
            });
        }
        let ergodic_gap = restricted_gap(prob, lam_f, lam_g, &state.wbar_k, &state.vbar_k, feas_tol)?;
        records.push(DistanceRecord {
            k: state.k,
            dist_sq_scaled,
            ergodic_gap,
        });
        let diag = engine.diagnostics();
        if diag.rel_change_point <= opts.eps || state.k >= opts.max_iters {
            return Ok(DistanceTrace {
                tau0: opts.tau0,
                sigma0: opts.sigma0,
                w_start_dist_sq,
                v_start_dist_sq,
                records,
            });
        }
    }
}

/// Outcome of [`check_convergence_bounds`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceBoundsReport {
    /// The distance-inflation constant `C = 1/(1 − τ₀σ₀L²)` (infinite at the
    /// boundary, in which case the distance bound is vacuous).
    pub c: f64,
    pub distance_pass: bool,
    /// Smallest `(bound − value)/(1 + bound)` over all iterations; negative
    /// values within the slack still pass.
    pub worst_distance_margin: f64,
    pub ergodic_pass: bool,
    pub worst_ergodic_margin: f64,
    /// How many iterations had a feasible ergodic pair (the gap bound is
    /// only checkable there).
    pub ergodic_points_checked: usize,
}

impl ConvergenceBoundsReport {
    pub fn pass(&self) -> bool {
        self.distance_pass && self.ergodic_pass
    }
}

/// Verifies the two non-asymptotic guarantees of the constant-step regime
/// against a recorded trajectory:
///
/// 1. every iterate stays within the inflated start distance,
///    `‖w_k−w*‖²/τ₀ + ‖v_k−v*‖²/σ₀ ≤ C·d₀` with `C = 1/(1−τ₀σ₀L²)`;
/// 2. whenever the ergodic pair is feasible, its restricted gap is below
///    `(1+C)/k · (‖w*−w₀‖²/(2τ₀) + ‖v*−v₀‖²/(2σ₀))`.
///
/// Both inequalities get `rel_slack` of relative headroom for accumulated
/// rounding. Using an over-estimate of `L` (as the power iteration
/// guarantees) only loosens `C`, keeping the check valid.
pub fn check_convergence_bounds(
    trace: &DistanceTrace,
    l: f64,
    rel_slack: f64,
) -> ConvergenceBoundsReport {
    let x = trace.tau0 * trace.sigma0 * l * l;
    let c = if x < 1.0 { 1.0 / (1.0 - x) } else { f64::INFINITY };
    let d0 = trace.d0();

    let dist_bound = c * d0;
    let mut distance_pass = true;
    let mut worst_distance_margin = f64::INFINITY;
    let mut ergodic_pass = true;
    let mut worst_ergodic_margin = f64::INFINITY;
    let mut ergodic_points_checked = 0usize;

    let ergodic_base = trace.w_start_dist_sq / (2.0 * trace.tau0)
        + trace.v_start_dist_sq / (2.0 * trace.sigma0);

    for rec in &trace.records {
        let margin = (dist_bound - rec.dist_sq_scaled) / (1.0 + dist_bound);
        if margin < worst_distance_margin {
            worst_distance_margin = margin;
        }
        if rec.dist_sq_scaled > dist_bound + rel_slack * (1.0 + dist_bound) {
            distance_pass = false;
        }
        if let Gap::Finite(g) = rec.ergodic_gap {
            ergodic_points_checked += 1;
            let bound = (1.0 + c) / rec.k as f64 * ergodic_base;
            let margin = (bound - g) / (1.0 + bound);
            if margin < worst_ergodic_margin {
                worst_ergodic_margin = margin;
            }
            if g > bound + rel_slack * (1.0 + bound + g.abs()) {
                ergodic_pass = false;
            }
        }
    }

    ConvergenceBoundsReport {
        c,
        distance_pass,
        worst_distance_margin,
        ergodic_pass,
        worst_ergodic_margin,
        ergodic_points_checked,
    }
}
