//! Problem instances and the primal-dual coupling operator.
//!
//! An instance pairs a dense design matrix `X` (n observations by p features)
//! with a response `y`. The saddle-point formulation couples a primal vector
//! `w` and a dual vector `v` through the operator `A = Xᵀ[I −X]` applied to
//! the augmented point `[y; w]`, so that
//!
//! ```text
//! A [y; w] = Xᵀy − XᵀX w .
//! ```
//!
//! `y` is fixed per instance, which is why only the `w` block appears in the
//! public operations: [`ProblemData::apply_a`] evaluates the display above and
//! [`ProblemData::apply_adjoint`] evaluates the `w`-block adjoint `XᵀX v`.
//!
//! Since `A Aᵀ = XᵀX + (XᵀX)²`, the operator norm `‖A‖` is estimated by power
//! iteration on the Gram matrix without ever forming `A` itself.

use ndarray::{Array1, Array2, ShapeBuilder};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Relative tolerance used for the operator-norm estimate at construction.
pub const OPNORM_TOL: f64 = 1e-4;
/// Power-iteration cap used at construction.
pub const OPNORM_MAX_ITERS: usize = 200;
/// Seed of the power-iteration start vector used at construction.
pub const OPNORM_SEED: u64 = 0;

/// A primal/dual vector pair. Both blocks live in ℝᵖ; the `y` block of the
/// augmented point is fixed inside [`ProblemData`] and never varied.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedPoint {
    pub w: Array1<f64>,
    pub v: Array1<f64>,
}

impl AugmentedPoint {
    /// Builds a pair after checking both blocks are finite and equally sized.
    pub fn new(w: Array1<f64>, v: Array1<f64>) -> Result<Self> {
        if w.len() != v.len() {
            return Err(Error::dim("dual block of start point", w.len(), v.len()));
        }
        if w.iter().chain(v.iter()).any(|x| !x.is_finite()) {
            return Err(Error::invalid("start point contains NaN or infinity"));
        }
        Ok(Self { w, v })
    }

    /// The canonical zero start.
    pub fn zeros(p: usize) -> Self {
        Self {
            w: Array1::zeros(p),
            v: Array1::zeros(p),
        }
    }
}

/// Dense problem instance with cached derived quantities.
///
/// The design is stored column-major (column access dominates in `Xᵀ(·)`
/// products). `Xᵀy` is cached at construction. When `p ≤ 4096` and
/// `p ≤ 4n`, the p×p Gram matrix `XᵀX` is materialized as well, halving the
/// per-iteration matvec cost of every solver; otherwise products fall back to
/// two matvecs against `X`.
#[derive(Debug, Clone)]
pub struct ProblemData {
    x: Array2<f64>,
    y: Array1<f64>,
    xty: Array1<f64>,
    gram: Option<Array2<f64>>,
    l: f64,
}

impl ProblemData {
    /// Validates shapes/finiteness, caches `Xᵀy` (and `XᵀX` when small
    /// enough), and estimates the coupling-operator norm.
    ///
    /// The stored norm is the power-iteration estimate inflated by the safety
    /// factor `1 + 10·tol`: step-size rules require the true norm not to be
    /// underestimated, and a slight overestimate only shortens steps.
    pub fn new(x: Array2<f64>, y: Array1<f64>) -> Result<Self> {
        let (n, p) = x.dim();
        if n == 0 || p == 0 {
            return Err(Error::invalid(
                "design matrix needs at least one row and one column",
            ));
        }
        if y.len() != n {
            return Err(Error::dim("response vector", n, y.len()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("design matrix contains NaN or infinity"));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("response vector contains NaN or infinity"));
        }
        let mut xf = Array2::zeros((n, p).f());
        xf.assign(&x);
        let xty = xf.t().dot(&y);
        let gram = if p <= 4096 && p <= 4 * n {
            Some(xf.t().dot(&xf))
        } else {
            None
        };
        let mut prob = Self {
            x: xf,
            y,
            xty,
            gram,
            l: 0.0,
        };
        let raw = prob.estimate_opnorm(OPNORM_TOL, OPNORM_MAX_ITERS, OPNORM_SEED)?;
        prob.l = raw * (1.0 + 10.0 * OPNORM_TOL);
        Ok(prob)
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> &Array1<f64> {
        &self.y
    }

    /// Cached `Xᵀy`.
    pub fn xty(&self) -> &Array1<f64> {
        &self.xty
    }

    /// Estimate of `‖Xᵀ[I −X]‖` (inflated by the construction safety factor).
    pub fn l(&self) -> f64 {
        self.l
    }

    /// Whether `XᵀX` is materialized.
    pub fn use_gram(&self) -> bool {
        self.gram.is_some()
    }

    /// `XᵀX v`, via the cached Gram matrix or two matvecs.
    pub fn gram_apply(&self, v: &Array1<f64>) -> Result<Array1<f64>> {
        if v.len() != self.p() {
            return Err(Error::dim("vector for Gram product", self.p(), v.len()));
        }
        Ok(self.gram_apply_unchecked(v))
    }

    fn gram_apply_unchecked(&self, v: &Array1<f64>) -> Array1<f64> {
        match &self.gram {
            Some(g) => g.dot(v),
            None => self.x.t().dot(&self.x.dot(v)),
        }
    }

    /// Two-matvec evaluation of `XᵀX v`, bypassing the Gram cache. Used to
    /// cross-check the two code paths.
    #[doc(hidden)]
    pub fn gram_apply_matvec(&self, v: &Array1<f64>) -> Array1<f64> {
        self.x.t().dot(&self.x.dot(v))
    }

    /// `A [y; w] = Xᵀy − XᵀX w`.
    pub fn apply_a(&self, w: &Array1<f64>) -> Result<Array1<f64>> {
        if w.len() != self.p() {
            return Err(Error::dim("primal vector", self.p(), w.len()));
        }
        Ok(&self.xty - &self.gram_apply_unchecked(w))
    }

    /// `XᵀX v`: the negative of the `w`-block adjoint of `A`, as it enters the
    /// primal prox step.
    pub fn apply_adjoint(&self, v: &Array1<f64>) -> Result<Array1<f64>> {
        if v.len() != self.p() {
            return Err(Error::dim("dual vector", self.p(), v.len()));
        }
        Ok(self.gram_apply_unchecked(v))
    }

    /// Power-iteration estimate of `‖A‖ = ‖Xᵀ[I −X]‖`.
    ///
    /// Iterates on `A Aᵀ = G + G²` (`G = XᵀX`) from a seeded standard-normal
    /// start and stops when successive Rayleigh-quotient square roots change
    /// by less than `tol` relatively, or after `max_iters` rounds. Returns the
    /// raw converged estimate; callers that feed step-size rules must inflate
    /// it (see [`ProblemData::new`]).
    pub fn estimate_opnorm(&self, tol: f64, max_iters: usize, seed: u64) -> Result<f64> {
        if !(tol > 0.0) {
            return Err(Error::invalid("opnorm tolerance must be positive"));
        }
        if max_iters == 0 {
            return Err(Error::invalid("opnorm max_iters must be at least 1"));
        }
        let p = self.p();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut u = Array1::from_shape_fn(p, |_| rng.sample::<f64, _>(StandardNormal));
        let norm = u.dot(&u).sqrt();
        if norm > 0.0 {
            u.mapv_inplace(|x| x / norm);
        }
        let mut prev = 0.0;
        for _ in 0..max_iters {
            let gu = self.gram_apply_unchecked(&u);
            let z = &gu + &self.gram_apply_unchecked(&gu);
            let rq = u.dot(&z);
            let est = rq.max(0.0).sqrt();
            let zn = z.dot(&z).sqrt();
            if zn == 0.0 {
                // u is annihilated: either X = 0 or a (measure-zero) unlucky start.
                return Ok(0.0);
            }
            if (est - prev).abs() <= tol * est.max(f64::MIN_POSITIVE) {
                return Ok(est);
            }
            u = z / zn;
            prev = est;
        }
        Ok(prev)
    }
}
