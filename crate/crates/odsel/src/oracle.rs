//! Ground-truth solvers for orthogonal designs.
//!
//! When the design has orthonormal columns (`XᵀX = I`), the ordered-ℓ1
//! Dantzig-type selection problem
//!
//! ```text
//! min J_λ(w)   s.t.   J_λ^D(Xᵀ(y − Xw)) ≤ 1
//! ```
//!
//! coincides with the ordered-ℓ1 regularized least-squares solution at the
//! correlation vector `Xᵀy`, which has a closed combinatorial form: sort the
//! magnitudes, pool adjacent segments until the averaged differences
//! `y_avg − λ_avg` are non-increasing, clamp at zero, and map back through
//! the recorded signs and permutation. This module provides that pooling
//! solver ([`slope_orthogonal_solve`]), an exponential-time LP vertex
//! enumeration for tiny instances ([`ods_lp_bruteforce`]), and a KKT
//! certificate checker ([`verify_kkt_orthogonal`]). All three are
//! independent code paths used to cross-validate each other and the
//! iterative solvers.

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::sorted_l1::LambdaSeq;

/// Maximum dimension accepted by [`ods_lp_bruteforce`] (2ᵖ enumeration).
pub const LP_BRUTEFORCE_MAX_P: usize = 12;

/// Default curvature parameter for the KKT certificate construction.
pub const KKT_MU: f64 = 1e-6;

/// Residual threshold under which a KKT certificate is considered to pass.
pub const KKT_TOL: f64 = 1e-8;

/// One pooled segment `[start, end)` (0-based, half-open) with the averages
/// of the data and the weights over the segment.
///
/// The blocks returned by [`pool_blocks`] partition `0..p`, and the sequence
/// of `y_avg − lam_avg` over consecutive blocks is non-increasing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoolBlock {
    pub start: usize,
    pub end: usize,
    pub y_avg: f64,
    pub lam_avg: f64,
}

impl PoolBlock {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    /// The pooled difference `y_avg − lam_avg` that the partition keeps
    /// non-increasing.
    pub fn diff(&self) -> f64 {
        self.y_avg - self.lam_avg
    }
}

/// Pools adjacent segments of `(y, lam)` until the averaged differences are
/// non-increasing.
///
/// Single left-to-right pass with a merge stack: a new element starts its own
/// block, and while the block below has a strictly smaller averaged
/// difference the two are merged. This reaches the same fixed point as
/// repeatedly rescanning for adjacent violations, in `O(p)` time.
pub fn pool_blocks(y: &[f64], lam: &[f64]) -> Result<Vec<PoolBlock>> {
    if y.len() != lam.len() {
        return Err(Error::dim("pooled data/weights", lam.len(), y.len()));
    }
    // Stack entries: (start index, y sum, λ sum, length).
    let mut stack: Vec<(usize, f64, f64, usize)> = Vec::with_capacity(y.len());
    for i in 0..y.len() {
        let mut cur = (i, y[i], lam[i], 1usize);
        while let Some(&(ps, pys, pls, plen)) = stack.last() {
            let prev_diff = (pys - pls) / plen as f64;
            let cur_diff = (cur.1 - cur.2) / cur.3 as f64;
            if prev_diff < cur_diff {
                stack.pop();
                cur = (ps, pys + cur.1, pls + cur.2, plen + cur.3);
            } else {
                break;
            }
        }
        stack.push(cur);
    }
    Ok(stack
        .into_iter()
        .map(|(start, ys, ls, len)| PoolBlock {
            start,
            end: start + len,
            y_avg: ys / len as f64,
            lam_avg: ls / len as f64,
        })
        .collect())
}

/// Closed-form solution of the orthogonal-design problem at data vector `y`
/// (typically the correlation vector `Xᵀy`).
///
/// Reduces to the sorted nonnegative case by recording signs and the
/// decreasing-magnitude permutation (the problem is invariant under signed
/// permutations applied jointly to data and solution), runs [`pool_blocks`],
/// takes `(y_avg − lam_avg)₊` on each block, and maps back. The minimizer is
/// unique, so the tie order inside the sort does not affect the output.
pub fn slope_orthogonal_solve(y: &Array1<f64>, lam: &LambdaSeq) -> Result<Array1<f64>> {
    let p = lam.len();
    if y.len() != p {
        return Err(Error::dim("data vector", p, y.len()));
    }
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_unstable_by(|&i, &j| y[j].abs().total_cmp(&y[i].abs()).then(i.cmp(&j)));
    let sorted_abs: Vec<f64> = order.iter().map(|&i| y[i].abs()).collect();
    let blocks = pool_blocks(&sorted_abs, lam.as_slice())?;
    let mut out = Array1::zeros(p);
    for b in &blocks {
        let val = b.diff().max(0.0);
        for &idx in &order[b.start..b.end] {
            out[idx] = if val == 0.0 || y[idx] >= 0.0 { val } else { -val };
        }
    }
    Ok(out)
}

fn check_sorted_nonneg(y: &Array1<f64>) -> Result<()> {
    if y.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::invalid(
            "data must be nonnegative and finite in the reduced (sorted) form",
        ));
    }
    if y.windows(2).into_iter().any(|w| w[0] < w[1]) {
        return Err(Error::invalid(
            "data must be sorted non-increasing in the reduced form",
        ));
    }
    Ok(())
}

/// Exhaustive vertex enumeration for the orthogonal-design LP, for `p ≤ 12`.
///
/// Works on the reduced form (`y` sorted non-increasing and nonnegative,
/// weights strictly decreasing and positive). The LP is
///
/// ```text
/// min λᵀw   s.t.   Σᵢ≤k (yᵢ − λᵢ) ≤ Σᵢ≤k wᵢ  (k = 1..p),
///                  w₁ ≥ w₂ ≥ … ≥ w_p ≥ 0 ,
/// ```
///
/// and every vertex makes each index `j` bind either its prefix constraint
/// or the tie `wⱼ = wⱼ₊₁` (with `w_{p+1} := 0`). Enumerating the 2ᵖ
/// bind/tie patterns, each candidate is piecewise constant between binding
/// prefixes and zero after the last one, so it solves in closed form.
/// Feasible candidates compete on `λᵀw`, ties broken by smaller `‖w‖`, then
/// lexicographically.
pub fn ods_lp_bruteforce(y: &Array1<f64>, lam: &LambdaSeq) -> Result<Array1<f64>> {
    let p = lam.len();
    if y.len() != p {
        return Err(Error::dim("data vector", p, y.len()));
    }
    if p > LP_BRUTEFORCE_MAX_P {
        return Err(Error::invalid(format!(
            "vertex enumeration is exponential; p = {p} exceeds the limit {LP_BRUTEFORCE_MAX_P}"
        )));
    }
    check_sorted_nonneg(y)?;
    let lamv = lam.as_slice();
    if lamv.windows(2).any(|w| w[0] <= w[1]) || lamv[p - 1] <= 0.0 {
        return Err(Error::invalid(
            "weights must be strictly decreasing and positive for the LP reduction",
        ));
    }

    // c[k] = Σᵢ<k (yᵢ − λᵢ); prefix constraints read Σᵢ<k wᵢ ≥ c[k].
    let mut c = vec![0.0; p + 1];
    for i in 0..p {
        c[i + 1] = c[i] + y[i] - lamv[i];
    }
    let scale = 1.0 + c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * scale;

    let mut best: Option<(f64, f64, Vec<f64>)> = None; // (objective, ‖w‖², w)
    let mut w = vec![0.0f64; p];
    'mask: for mask in 0u32..(1u32 << p) {
        w.iter_mut().for_each(|x| *x = 0.0);
        let mut prev_k = 0usize;
        for j in 0..p {
            if mask & (1 << j) != 0 {
                let k = j + 1;
                let val = (c[k] - c[prev_k]) / (k - prev_k) as f64;
                w[prev_k..k].iter_mut().for_each(|x| *x = val);
                prev_k = k;
            }
        }
        // Feasibility: monotone nonnegative, prefix constraints.
        for j in 1..p {
            if w[j] > w[j - 1] + tol {
                continue 'mask;
            }
        }
        if w[p - 1] < -tol {
            continue 'mask;
        }
        let mut run = 0.0;
        for k in 1..=p {
            run += w[k - 1];
            if run < c[k] - tol {
                continue 'mask;
            }
        }
        let obj: f64 = lamv.iter().zip(&w).map(|(l, x)| l * x).sum();
        let norm2: f64 = w.iter().map(|x| x * x).sum();
        let replace = match &best {
            None => true,
            Some((bobj, bnorm2, bw)) => {
                let tie = 1e-12 * (1.0 + bobj.abs());
                if obj < bobj - tie {
                    true
                } else if obj > bobj + tie {
                    false
                } else if norm2 < bnorm2 - tie {
                    true
                } else if norm2 > bnorm2 + tie {
                    false
                } else {
                    // First differing coordinate decides.
                    let mut lex = false;
                    for (a, b) in w.iter().zip(bw) {
                        if (a - b).abs() > tie {
                            lex = a < b;
                            break;
                        }
                    }
                    lex
                }
            }
        };
        if replace {
            best = Some((obj, norm2, w.clone()));
        }
    }
    let (_, _, w) = best.expect("w = 0 pattern is always evaluated; at least one vertex exists");
    Ok(Array1::from_vec(w))
}

/// Residuals of the four KKT condition groups for the orthogonal-design LP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResiduals {
    /// `max_j |μwⱼ + λⱼ − (Sν)ⱼ − (Vτ)ⱼ|` where `(Sν)ⱼ` is the suffix sum of
    /// the prefix-constraint multipliers and `(Vτ)ⱼ = τⱼ − τⱼ₋₁`.
    pub stationarity: f64,
    /// Largest `|multiplier · constraint slack|` over both families.
    pub complementarity: f64,
    /// Largest violation of the primal constraints (prefix, monotone,
    /// nonnegative); zero when feasible.
    pub primal: f64,
    /// Largest negative part of any multiplier; zero when all nonnegative.
    pub dual: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity
            .max(self.complementarity)
            .max(self.primal)
            .max(self.dual)
    }

    pub fn all_below(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

/// Outcome of [`verify_kkt_orthogonal`]: residuals at the base curvature `μ`
/// and at `μ/10`, to confirm the certificate is insensitive to the choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport {
    pub mu: f64,
    pub residuals: KktResiduals,
    pub residuals_small_mu: KktResiduals,
    /// True when every residual at both curvatures is at most [`KKT_TOL`].
    pub pass: bool,
}

/// Builds an explicit KKT certificate for `w` on a reduced instance
/// (`y` sorted non-increasing nonnegative) and reports its residuals.
///
/// The multiplier construction follows the pooled structure of `(y, λ)`:
/// with `s` the number of coordinates whose pooled difference is
/// nonnegative, prefix-constraint multipliers on `1..s` are backward
/// differences of `μw + λ̃` (pooled weights), tie multipliers inside pooled
/// segments absorb the gap between raw and pooled weights, and tie
/// multipliers past `s` are prefix sums of `μw + λ`. For the pooling
/// solver's output every residual vanishes up to rounding; for any other `w`
/// the residuals quantify how far the certificate is from closing. The
/// check never fails as such — it only reports.
pub fn verify_kkt_orthogonal(
    w: &Array1<f64>,
    y: &Array1<f64>,
    lam: &LambdaSeq,
) -> Result<KktReport> {
    let p = lam.len();
    if y.len() != p {
        return Err(Error::dim("data vector", p, y.len()));
    }
    if w.len() != p {
        return Err(Error::dim("candidate solution", p, w.len()));
    }
    check_sorted_nonneg(y)?;

    let residuals = kkt_residuals(w, y, lam, KKT_MU);
    let residuals_small_mu = kkt_residuals(w, y, lam, KKT_MU / 10.0);
    let pass = residuals.all_below(KKT_TOL) && residuals_small_mu.all_below(KKT_TOL);
    Ok(KktReport {
        mu: KKT_MU,
        residuals,
        residuals_small_mu,
        pass,
    })
}

fn kkt_residuals(w: &Array1<f64>, y: &Array1<f64>, lam: &LambdaSeq, mu: f64) -> KktResiduals {
    let p = lam.len();
    let lamv = lam.as_slice();
    let yv = y.as_slice().expect("contiguous");

    let blocks = pool_blocks(yv, lamv).expect("lengths checked by caller");
    // Pooled weights per coordinate, and the nonnegative-difference prefix.
    let mut lam_pooled = vec![0.0; p];
    let mut s = 0usize;
    for b in &blocks {
        for i in b.start..b.end {
            lam_pooled[i] = b.lam_avg;
        }
        if b.diff() >= 0.0 {
            s = b.end;
        }
    }

    // Prefix-constraint multipliers ν (one per k = 1..p, stored 0-based at
    // k−1): backward differences of x̃ = μw + λ̃ over 1..s, zero past s.
    let mut nu = vec![0.0; p];
    if s > 0 {
        let xt = |i: usize| mu * w[i] + lam_pooled[i];
        for k in 0..s - 1 {
            nu[k] = xt(k) - xt(k + 1);
        }
        nu[s - 1] = xt(s - 1);
    }
    // Tie multipliers τ (τⱼ pairs with wⱼ₊₁ ≤ wⱼ for j < p−1 and with
    // w_p ≥ 0 at j = p−1): inside pooled segments of 1..s they accumulate
    // the raw-vs-pooled weight gap; past s they are prefix sums of μw + λ.
    let mut tau = vec![0.0; p];
    for b in &blocks {
        if b.end <= s {
            let mut acc = 0.0;
            for j in b.start..b.end {
                acc += lamv[j] - lam_pooled[j];
                tau[j] = acc;
            }
        }
    }
    let mut acc = 0.0;
    for j in s..p {
        acc += mu * w[j] + lamv[j];
        tau[j] = acc;
    }

    // Stationarity: μw + λ = Sν + Vτ.
    let mut stationarity = 0.0f64;
    let mut suffix_nu = 0.0;
    let mut station = vec![0.0; p];
    for j in (0..p).rev() {
        suffix_nu += nu[j];
        station[j] = suffix_nu;
    }
    for j in 0..p {
        let vtau = tau[j] - if j > 0 { tau[j - 1] } else { 0.0 };
        stationarity = stationarity.max((mu * w[j] + lamv[j] - station[j] - vtau).abs());
    }

    // Primal feasibility and complementary slackness.
    let mut primal = 0.0f64;
    let mut complementarity = 0.0f64;
    let mut run_w = 0.0;
    let mut run_c = 0.0;
    for k in 0..p {
        run_w += w[k];
        run_c += yv[k] - lamv[k];
        let slack = run_w - run_c;
        primal = primal.max(-slack);
        complementarity = complementarity.max((nu[k] * slack).abs());
    }
    for j in 0..p {
        let slack = if j + 1 < p { w[j] - w[j + 1] } else { w[p - 1] };
        primal = primal.max(-slack);
        complementarity = complementarity.max((tau[j] * slack).abs());
    }

    // Dual feasibility.
    let mut dual = 0.0f64;
    for v in nu.iter().chain(tau.iter()) {
        dual = dual.max(-v);
    }

    KktResiduals {
        stationarity,
        complementarity,
        primal: primal.max(0.0),
        dual: dual.max(0.0),
    }
}
