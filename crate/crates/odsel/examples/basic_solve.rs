//! Solve one ordered-Dantzig-selector instance end to end.
//!
//! Builds a small random regression problem, generates a
//! Benjamini-Hochberg weight sequence, runs the primal-dual extragradient
//! solver, and inspects the result: status, iterations, the last trace
//! checkpoints, and the restricted primal-dual gap at the returned pair.
//!
//! Run with: `cargo run --example basic_solve`

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use odsel::{bh_lambda, pdsp_solve, restricted_gap, Gap, ProblemData, SolverOptions};

fn main() -> odsel::Result<()> {
    // A 50x20 design with three strong coefficients buried in noise.
    let (n, p) = (50, 20);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = Array2::from_shape_fn((n, p), |_| {
        rng.sample::<f64, _>(StandardNormal) / (n as f64).sqrt()
    });
    let mut w_true = Array1::zeros(p);
    w_true[2] = 4.0;
    w_true[7] = -3.0;
    w_true[15] = 5.0;
    let mut y = x.dot(&w_true);
    for yi in y.iter_mut() {
        *yi += 0.1 * rng.sample::<f64, _>(StandardNormal);
    }

    let prob = ProblemData::new(x, y)?;
    let lam = bh_lambda(p, 0.1, 0.1)?;
    println!(
        "problem: n={} p={}, coupling norm estimate L={:.4}",
        prob.n(),
        prob.p(),
        prob.l()
    );

    let mut opts = SolverOptions::standard(prob.l());
    opts.eps = 1e-8;
    let result = pdsp_solve(&prob, &lam, &lam, &opts, None)?;

    println!("status: {:?} after {} iterations", result.status, result.iterations);
    println!("\nlast trace checkpoints:");
    println!("      iter   rel_change     primal_obj       gap");
    for rec in result.trace.iter().rev().take(3).rev() {
        println!(
            "{:>10}   {:>10.3e}   {:>12.6}   {:>9.2e}",
            rec.iter, rec.rel_change_point, rec.primal_obj, rec.gap
        );
    }

    println!("\nestimated coefficients above 0.1 in magnitude:");
    for (i, wi) in result.w.iter().enumerate() {
        if wi.abs() > 0.1 {
            println!("  w[{i:>2}] = {wi:>8.4}   (truth {:>4.1})", w_true[i]);
        }
    }

    match restricted_gap(&prob, &lam, &lam, &result.w, &result.v, 1e-6)? {
        Gap::Finite(g) => println!("\nrestricted primal-dual gap: {g:.3e}"),
        marker => println!("\ngap marker: {marker:?}"),
    }
    Ok(())
}
