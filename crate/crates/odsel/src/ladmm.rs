//! Linearized ADMM baseline.
//!
//! The constrained form `min J_λ(w) s.t. J_λ^D(Xᵀ(y − Xw)) ≤ 1` splits on
//! the correlation residual `r = Xᵀ(y − Xw)`: with `B = XᵀX` and `b = Xᵀy`,
//!
//! ```text
//! min_{w,r} J_λ(w) + I{J_λ^D(r) ≤ 1}   s.t.   Bw + r = b ,
//! ```
//!
//! alternating under a unit-penalty augmented Lagrangian with scaled dual
//! `u`, and linearizing the `w`-subproblem at weight `ρ`:
//!
//! ```text
//! w⁺ = prox_{J_λ/ρ}( w − (1/ρ)·B(Bw + r − b + u) )
//! r⁺ = proj_{J_λ^D ≤ 1}( b − Bw⁺ − u )
//! u⁺ = u + Bw⁺ + r⁺ − b .
//! ```
//!
//! The linearization majorizes the quadratic when `ρ ≥ ‖B‖ₒₚ² = ‖X‖ₒₚ⁴`,
//! which is the recommended default; smaller positive values are accepted
//! but flagged with a warning in the result. The multiplier maps to the
//! saddle dual as `v = −u`, which is what the result and trace report.

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::model::{AugmentedPoint, ProblemData};
use crate::pdsp::{SolveResult, SolveStatus, TraceRecord, DIVERGENCE_LIMIT};
use crate::sorted_l1::{
    dual_sorted_l1_norm, project_dual_ball, prox_sorted_l1, sorted_l1_norm, LambdaSeq,
};

/// Stopping checks and trace records every this many iterations.
const TRACE_EVERY: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadmmOptions {
    /// Linearization weight (per-iteration quadratic majorizer).
    pub rho: f64,
    pub eps: f64,
    pub max_iters: usize,
}

impl LadmmOptions {
    /// The smallest `ρ` with a convergence guarantee, `‖X‖ₒₚ⁴`, recovered
    /// from the augmented coupling norm `l` (see
    /// [`ProblemData::l`](crate::model::ProblemData::l)): `l² = s² + s⁴`
    /// with `s = ‖X‖ₒₚ` gives `s² = (√(1+4l²) − 1)/2`.
    pub fn recommended_rho(l: f64) -> f64 {
        let s2 = 0.5 * ((1.0 + 4.0 * l * l).sqrt() - 1.0);
        s2 * s2
    }

    pub fn recommended(l: f64) -> Self {
        Self {
            rho: Self::recommended_rho(l).max(1e-12),
            eps: 1e-6,
            max_iters: 100_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(Error::invalid("rho must be positive and finite"));
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

/// Runs the linearized ADMM loop. Stopping follows the same relative-change
/// rule as the extragradient solver, applied to the pointwise pair
/// `(w, v) = (w, −u)`.
pub fn ladmm_solve(
    prob: &ProblemData,
    lam: &LambdaSeq,
    opts: &LadmmOptions,
    start: Option<&AugmentedPoint>,
) -> Result<SolveResult> {
    opts.validate()?;
    let p = prob.p();
    if lam.len() != p {
        return Err(Error::dim("weights", p, lam.len()));
    }
    let (mut w, mut u) = match start {
        Some(pt) => {
            if pt.w.len() != p {
                return Err(Error::dim("start point", p, pt.w.len()));
            }
            // The caller supplies the saddle dual v; internally we track u = −v.
            (pt.w.clone(), -&pt.v)
        }
        None => (Array1::zeros(p), Array1::zeros(p)),
    };

    let mut warnings = Vec::new();
    let recommended = LadmmOptions::recommended_rho(prob.l());
    if opts.rho < recommended * (1.0 - 1e-12) {
        warnings.push(format!(
            "rho = {:.6e} is below the recommended floor {:.6e} (= ||X||^4); convergence is not guaranteed",
            opts.rho, recommended
        ));
    }

    let b = prob.xty().clone();
    let mut bw = prob.gram_apply(&w)?;
    // r starts feasible at the projection of the initial residual target.
    let mut r = project_dual_ball(&(&b - &bw - &u), lam)?;

    let mut prev_w = w.clone();
    let mut prev_v = -&u;
    let mut wbar = Array1::<f64>::zeros(p);
    let mut vbar = Array1::<f64>::zeros(p);
    let mut prev_wbar = wbar.clone();
    let mut prev_vbar = vbar.clone();

    let mut trace = Vec::new();
    let mut k = 0usize;
    loop {
        prev_w.assign(&w);
        prev_v.assign(&(-&u));
        prev_wbar.assign(&wbar);
        prev_vbar.assign(&vbar);

        // Linearized primal step.
        let mut s = &bw + &r;
        s -= &b;
        s += &u;
        let gs = prob.gram_apply(&s)?;
        let arg = &w - &(gs / opts.rho);
        w = prox_sorted_l1(&arg, lam, 1.0 / opts.rho)?;
        bw = prob.gram_apply(&w)?;

        // Residual block: projection onto the dual-norm ball.
        let target = &b - &bw - &u;
        r = project_dual_ball(&target, lam)?;

        // Dual ascent.
        u += &(&bw + &r - &b);

        k += 1;
        let kf = k as f64;
        let v = -&u;
        let wbar_step = (&w - &wbar) / kf;
        wbar += &wbar_step;
        let vbar_step = (&v - &vbar) / kf;
        vbar += &vbar_step;

        if k % TRACE_EVERY != 0 && k < opts.max_iters {
            continue;
        }

        let d2 = |a: &Array1<f64>, bb: &Array1<f64>| {
            a.iter()
                .zip(bb.iter())
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
        };
        let pair_norm = (w.dot(&w) + v.dot(&v)).sqrt();
        let rel_point = (d2(&w, &prev_w) + d2(&v, &prev_v)).sqrt() / pair_norm.max(1.0);
        let erg_norm = (wbar.dot(&wbar) + vbar.dot(&vbar)).sqrt();
        let rel_ergodic = (d2(&wbar, &prev_wbar) + d2(&vbar, &prev_vbar)).sqrt() / erg_norm.max(1.0);

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

        let resid = prob.apply_a(&w)?;
        let gv = prob.apply_adjoint(&v)?;
        let primal_obj = sorted_l1_norm(&w, lam)?;
        let dual_obj = prob.xty().dot(&v) - sorted_l1_norm(&v, lam)?;
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
                w,
                v,
                status: SolveStatus::ConvergedPointwise,
                iterations: k,
                trace,
                warnings,
            });
        }
        if k >= opts.max_iters {
            return Ok(SolveResult {
                w,
                v,
                status: SolveStatus::MaxIters,
                iterations: k,
                trace,
                warnings,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::slope_orthogonal_solve;
    use crate::pdsp::{pdsp_solve, SolverOptions};
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn lam1() -> LambdaSeq {
        LambdaSeq::from_slice(&[1.0]).unwrap()
    }

    #[test]
    fn option_validation() {
        assert!(LadmmOptions::recommended(2.0).validate().is_ok());
        for bad in [
            LadmmOptions { rho: 0.0, eps: 1e-6, max_iters: 10 },
            LadmmOptions { rho: 1.0, eps: 0.0, max_iters: 10 },
            LadmmOptions { rho: 1.0, eps: 1e-6, max_iters: 0 },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn recommended_rho_matches_design_norm() {
        // For X with ‖X‖ = s, l = √(s²+s⁴) and the floor must be s⁴.
        for s in [0.5f64, 1.0, 2.0, 3.5] {
            let l = (s * s + s.powi(4)).sqrt();
            assert_abs_diff_eq!(
                LadmmOptions::recommended_rho(l),
                s.powi(4),
                epsilon = 1e-9 * s.powi(4).max(1.0)
            );
        }
    }

    #[test]
    fn one_d_instance_reaches_known_solution() {
        let prob = ProblemData::new(Array2::from_elem((1, 1), 1.0), array![3.0]).unwrap();
        let mut opts = LadmmOptions::recommended(prob.l());
        opts.eps = 1e-10;
        let res = ladmm_solve(&prob, &lam1(), &opts, None).unwrap();
        assert_eq!(res.status, SolveStatus::ConvergedPointwise);
        assert_abs_diff_eq!(res.w[0], 2.0, epsilon = 1e-4);
        assert!(res.warnings.is_empty());
    }

    #[test]
    fn zero_data_stays_at_zero() {
        let prob = ProblemData::new(Array2::eye(3), Array1::zeros(3)).unwrap();
        let lam = LambdaSeq::from_slice(&[1.0, 0.7, 0.3]).unwrap();
        let opts = LadmmOptions::recommended(prob.l());
        let res = ladmm_solve(&prob, &lam, &opts, None).unwrap();
        assert_eq!(res.w, Array1::zeros(3));
        assert_eq!(res.status, SolveStatus::ConvergedPointwise);
    }

    #[test]
    fn orthogonal_design_matches_analytic_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let p = 10;
        let y = Array1::from_shape_fn(p, |_| 3.0 * rng.sample::<f64, _>(StandardNormal));
        let prob = ProblemData::new(Array2::eye(p), y).unwrap();
        let mut v: Vec<f64> = (0..p).map(|_| rng.random_range(0.1..2.0)).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        let lam = LambdaSeq::from_slice(&v).unwrap();
        let mut opts = LadmmOptions::recommended(prob.l());
        opts.eps = 1e-10;
        opts.max_iters = 500_000;
        let res = ladmm_solve(&prob, &lam, &opts, None).unwrap();
        let oracle = slope_orthogonal_solve(prob.xty(), &lam).unwrap();
        for i in 0..p {
            assert_abs_diff_eq!(res.w[i], oracle[i], epsilon = 1e-4);
        }
    }

    #[test]
    fn low_rho_carries_a_warning() {
        let prob = ProblemData::new(Array2::from_elem((1, 1), 1.0), array![3.0]).unwrap();
        let mut opts = LadmmOptions::recommended(prob.l());
        opts.rho *= 0.5;
        opts.max_iters = 200;
        let res = ladmm_solve(&prob, &lam1(), &opts, None).unwrap();
        assert_eq!(res.warnings.len(), 1);
        assert!(res.warnings[0].contains("recommended floor"));
    }

    #[test]
    fn agrees_with_extragradient_solver_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        for _ in 0..5 {
            let (n, p) = (24, 9);
            let x = Array2::from_shape_fn((n, p), |_| {
                rng.sample::<f64, _>(StandardNormal) / (n as f64).sqrt()
            });
            let y = Array1::from_shape_fn(n, |_| 2.0 * rng.sample::<f64, _>(StandardNormal));
            let prob = ProblemData::new(x, y).unwrap();
            let mut v: Vec<f64> = (0..p).map(|_| rng.random_range(0.2..1.5)).collect();
            v.sort_by(|a, b| b.total_cmp(a));
            let lam = LambdaSeq::from_slice(&v).unwrap();

            let mut popts = SolverOptions::standard(prob.l());
            popts.eps = 1e-10;
            popts.max_iters = 2_000_000;
            let pd = pdsp_solve(&prob, &lam, &lam, &popts, None).unwrap();

            let mut aopts = LadmmOptions::recommended(prob.l());
            aopts.eps = 1e-10;
            aopts.max_iters = 2_000_000;
            let ad = ladmm_solve(&prob, &lam, &aopts, None).unwrap();

            let jp = sorted_l1_norm(&pd.w, &lam).unwrap();
            let ja = sorted_l1_norm(&ad.w, &lam).unwrap();
            assert!(
                (jp - ja).abs() <= 1e-4 * (1.0 + jp.abs()),
                "objectives diverge: {jp} vs {ja}"
            );
        }
    }
}
