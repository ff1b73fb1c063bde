//! Hybrid proximal extragradient baseline.
//!
//! The saddle operator of `min_w max_v ⟨Xᵀy − XᵀXw, v⟩ + J_λ(w) − J_λ(v)` is
//! resolved inexactly: each outer iteration approximates the proximal-point
//! update at `(x_{k−1}, y_{k−1})` by running an accelerated inner loop on the
//! η-scaled subproblem until the relative error condition
//!
//! ```text
//! ‖r̃ᵘ + ũ − u₀‖² + ‖r̃ᵛ + ṽ − v₀‖² + 2ε̃ ≤ σ²(‖ũ − u₀‖² + ‖ṽ − v₀‖²)
//! ```
//!
//! holds, then steps `x_k = x_{k−1} − r̃ᵘ`, `y_k = y_{k−1} − r̃ᵛ` (the η
//! rescaling of the residuals cancels against the η step).
//!
//! The inner loop is an accelerated proximal gradient on the smoothed
//! subproblem with stepsize sequence
//! `t_k = t_{k−1} + (1 + √(1 + 4L t_{k−1}))/(2L)`, `L = (η‖A‖)²`, weighted
//! averages `ũ_k, ṽ_k`, and a shrinking prox weight `c_k = 1 + 1/t_k`:
//!
//! ```text
//! u_k     = (t_{k−1} ũ_{k−1} + (t_k − t_{k−1}) w_{k−1}) / t_k
//! v(u_k)  = prox_{ηJ_λ}(v₀ + η(Xᵀy − XᵀX u_k))
//! ṽ_k     = (t_{k−1} ṽ_{k−1} + (t_k − t_{k−1}) v(u_k)) / t_k
//! w_k     = prox_{(η/c_k)J_λ}(u₀ + (η/c_k) XᵀX ṽ_k)
//! ũ_k     = (t_{k−1} ũ_{k−1} + (t_k − t_{k−1}) w_k) / t_k
//! ```
//!
//! with residuals `r̃ᵘ = c_k(u₀ − w_k)`,
//! `r̃ᵛ = v₀ − prox_{ηJ_λ}(v₀ + η(Xᵀy − XᵀX ũ_k))` (a fresh prox at the
//! averaged point) and `ε̃ = ‖ũ_k − u₀‖²/(2t_k)`. The primal domain is all
//! of ℝᵖ, so the domain projection in the initialization is the identity.

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::model::{AugmentedPoint, ProblemData};
use crate::pdsp::{SolveResult, SolveStatus, TraceRecord, DIVERGENCE_LIMIT};
use crate::sorted_l1::{dual_sorted_l1_norm, prox_sorted_l1, sorted_l1_norm, LambdaSeq};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HpeOptions {
    /// Outer proximal stepsize.
    pub eta: f64,
    /// Relative-error contraction of the inner termination test, in (0, 1).
    pub sigma_hpe: f64,
    /// Cap on inner iterations per outer step; exceeding it is reported as a
    /// numerical failure (subproblem stall).
    pub inner_max: usize,
    pub eps: f64,
    pub max_iters: usize,
}

impl HpeOptions {
    pub fn recommended(l: f64) -> Self {
        Self {
            eta: if l > 0.0 { 1.0 / l } else { 1.0 },
            sigma_hpe: 0.9,
            inner_max: 10_000,
            eps: 1e-6,
            max_iters: 100_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(Error::invalid("eta must be positive and finite"));
        }
        if !(self.sigma_hpe > 0.0 && self.sigma_hpe < 1.0) {
            return Err(Error::invalid("sigma_hpe must lie strictly inside (0,1)"));
        }
        if self.inner_max == 0 {
            return Err(Error::invalid("inner_max must be at least 1"));
        }
        if !(self.eps > 0.0) {
            return Err(Error::invalid("eps must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        Ok(())
    }
}

/// `t_k = t_{k−1} + (1 + √(1 + 4 l t_{k−1}))/(2l)`.
pub(crate) fn t_next(t: f64, l: f64) -> f64 {
    t + (1.0 + (1.0 + 4.0 * l * t).sqrt()) / (2.0 * l)
}

/// Accepted inner solution: averaged pair, residuals, and the error term.
/// The averaged pair and error term are consumed by the termination test
/// (and re-verified in unit tests); the outer loop only needs the residuals.
#[allow(dead_code)]
pub(crate) struct InnerSolution {
    pub u_tilde: Array1<f64>,
    pub v_tilde: Array1<f64>,
    pub r_u: Array1<f64>,
    pub r_v: Array1<f64>,
    pub eps_tilde: f64,
    pub inner_iters: usize,
}

fn norm_sq(a: &Array1<f64>) -> f64 {
    a.dot(a)
}

/// Runs the accelerated inner loop from `(u0, v0)` until the error condition
/// accepts, or errors after `inner_max` iterations.
pub(crate) fn solve_inner(
    prob: &ProblemData,
    lam: &LambdaSeq,
    opts: &HpeOptions,
    u0: &Array1<f64>,
    v0: &Array1<f64>,
) -> Result<InnerSolution> {
    let eta = opts.eta;
    // Smoothness of the inner coupling after the η scaling; floored so the
    // zero-design edge keeps t finite.
    let l_inner = (eta * prob.l()).powi(2).max(1e-300);
    let sig2 = opts.sigma_hpe * opts.sigma_hpe;
    let b = prob.xty();

    let mut t = 0.0f64;
    let mut w = u0.clone();
    let mut u_tilde = u0.clone();
    let mut v_tilde = v0.clone();

    for inner_iters in 1..=opts.inner_max {
        let t_new = t_next(t, l_inner);
        let dt = t_new - t;

        let u_k = (&u_tilde * t + &w * dt) / t_new;
        let gu = prob.gram_apply(&u_k)?;
        let mut arg_v = b - &gu;
        arg_v *= eta;
        arg_v += v0;
        let v_at_u = prox_sorted_l1(&arg_v, lam, eta)?;
        v_tilde = (&v_tilde * t + &v_at_u * dt) / t_new;

        let c = 1.0 + 1.0 / t_new;
        let mut arg_w = prob.gram_apply(&v_tilde)?;
        arg_w *= eta / c;
        arg_w += u0;
        w = prox_sorted_l1(&arg_w, lam, eta / c)?;
        u_tilde = (&u_tilde * t + &w * dt) / t_new;
        t = t_new;

        let r_u = (u0 - &w) * c;
        let gu_tilde = prob.gram_apply(&u_tilde)?;
        let mut arg_rv = b - &gu_tilde;
        arg_rv *= eta;
        arg_rv += v0;
        let r_v = v0 - &prox_sorted_l1(&arg_rv, lam, eta)?;

        let du = &u_tilde - u0;
        let dv = &v_tilde - v0;
        let eps_tilde = norm_sq(&du) / (2.0 * t);
        let lhs = norm_sq(&(&r_u + &du)) + norm_sq(&(&r_v + &dv)) + 2.0 * eps_tilde;
        let rhs = sig2 * (norm_sq(&du) + norm_sq(&dv));
        if lhs <= rhs {
            return Ok(InnerSolution {
                u_tilde,
                v_tilde,
                r_u,
                r_v,
                eps_tilde,
                inner_iters,
            });
        }
    }
    Err(Error::NumericalFailure {
        iteration: 0,
        reason: format!(
            "inner subproblem stalled: error condition unmet after {} iterations",
            opts.inner_max
        ),
    })
}

/// Outer loop: inexact proximal-point iterations on the saddle operator.
/// Stops on the relative-change rule over the pointwise pair, checked every
/// outer iteration (each one is expensive enough that no cadence thinning is
/// worthwhile).
pub fn hpe_solve(
    prob: &ProblemData,
    lam: &LambdaSeq,
    opts: &HpeOptions,
    start: Option<&AugmentedPoint>,
) -> Result<SolveResult> {
    opts.validate()?;
    let p = prob.p();
    if lam.len() != p {
        return Err(Error::dim("weights", p, lam.len()));
    }
    let (mut x, mut y_dual) = match start {
        Some(pt) => {
            if pt.w.len() != p {
                return Err(Error::dim("start point", p, pt.w.len()));
            }
            (pt.w.clone(), pt.v.clone())
        }
        None => (Array1::zeros(p), Array1::zeros(p)),
    };

    let mut wbar = Array1::<f64>::zeros(p);
    let mut vbar = Array1::<f64>::zeros(p);
    let mut prev_w = x.clone();
    let mut prev_v = y_dual.clone();
    let mut prev_wbar = wbar.clone();
    let mut prev_vbar = vbar.clone();
    let mut trace = Vec::new();

    for k in 1..=opts.max_iters {
        let inner = match solve_inner(prob, lam, opts, &x, &y_dual) {
            Ok(sol) => sol,
            Err(Error::NumericalFailure { reason, .. }) => {
                return Err(Error::NumericalFailure {
                    iteration: k,
                    reason,
                })
            }
            Err(other) => return Err(other),
        };
        prev_w.assign(&x);
        prev_v.assign(&y_dual);
        prev_wbar.assign(&wbar);
        prev_vbar.assign(&vbar);

        x -= &inner.r_u;
        y_dual -= &inner.r_v;

        let kf = k as f64;
        let wbar_step = (&x - &wbar) / kf;
        wbar += &wbar_step;
        let vbar_step = (&y_dual - &vbar) / kf;
        vbar += &vbar_step;

        let d2 = |a: &Array1<f64>, bb: &Array1<f64>| {
            a.iter()
                .zip(bb.iter())
                .map(|(s, t)| (s - t) * (s - t))
                .sum::<f64>()
        };
        let pair_norm = (norm_sq(&x) + norm_sq(&y_dual)).sqrt();
        let rel_point = (d2(&x, &prev_w) + d2(&y_dual, &prev_v)).sqrt() / pair_norm.max(1.0);
        let erg_norm = (norm_sq(&wbar) + norm_sq(&vbar)).sqrt();
        let rel_ergodic =
            (d2(&wbar, &prev_wbar) + d2(&vbar, &prev_vbar)).sqrt() / erg_norm.max(1.0);

        if !rel_point.is_finite() || !pair_norm.is_finite() || !rel_ergodic.is_finite() {
            return Err(Error::NumericalFailure {
                iteration: k,
                reason: "non-finite iterates detected".into(),
            });
        }
        if pair_norm > DIVERGENCE_LIMIT || rel_point > DIVERGENCE_LIMIT {
            return Err(Error::NumericalFailure {
                iteration: k,
                reason: format!(
                    "divergence detector tripped (pair norm {pair_norm:.3e}, rel change {rel_point:.3e})"
                ),
            });
        }

        let resid = prob.apply_a(&x)?;
        let gv = prob.apply_adjoint(&y_dual)?;
        let primal_obj = sorted_l1_norm(&x, lam)?;
        let dual_obj = prob.xty().dot(&y_dual) - sorted_l1_norm(&y_dual, lam)?;
        trace.push(TraceRecord {
            iter: k,
            rel_change_point: rel_point,
            rel_change_ergodic: rel_ergodic,
            primal_obj,
            primal_feas: dual_sorted_l1_norm(&resid, lam)?,
            dual_obj,
            dual_feas: dual_sorted_l1_norm(&gv, lam)?,
            gap: primal_obj - dual_obj,
        });

        if rel_point <= opts.eps {
            return Ok(SolveResult {
                w: x,
                v: y_dual,
                status: SolveStatus::ConvergedPointwise,
                iterations: k,
                trace,
                warnings: Vec::new(),
            });
        }
    }
    let iterations = opts.max_iters;
    Ok(SolveResult {
        w: x,
        v: y_dual,
        status: SolveStatus::MaxIters,
        iterations,
        trace,
        warnings: Vec::new(),
    })
}
