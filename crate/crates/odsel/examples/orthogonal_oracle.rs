//! The orthogonal-design fast path and its correctness certificates.
//!
//! When `XᵀX = I`, the selector's solution has a closed form computed by a
//! pooling pass over `|Xᵀy|` sorted decreasingly. This example solves an
//! instance three ways — the analytic pooling path, an exhaustive
//! vertex-enumeration LP (small p only), and the iterative saddle-point
//! solver — and verifies a KKT certificate for the analytic solution.
//!
//! Run with: `cargo run --example orthogonal_oracle`

use ndarray::{array, Array2};

use odsel::{
    ods_lp_bruteforce, pdsp_solve, slope_orthogonal_solve, verify_kkt_orthogonal, LambdaSeq,
    ProblemData, SolverOptions,
};

fn main() -> odsel::Result<()> {
    // Identity design: X = I, so Xᵀy = y.
    let y = array![3.0, -1.2, 0.4, 2.2, -0.1];
    let lam = LambdaSeq::from_slice(&[1.4, 1.1, 0.9, 0.6, 0.3])?;

    let analytic = slope_orthogonal_solve(&y, &lam)?;
    println!("correlations Xᵀy : {y}");
    println!("analytic solution: {analytic}");

    // Exhaustive check on the sorted nonnegative reduction: enumerate every
    // subset of prefix constraints that could bind and take the best vertex.
    let mut sorted_mags: Vec<f64> = y.iter().map(|t| t.abs()).collect();
    sorted_mags.sort_by(|a, b| b.total_cmp(a));
    let sorted_y = ndarray::Array1::from_vec(sorted_mags);
    let brute = ods_lp_bruteforce(&sorted_y, &lam)?;
    println!("vertex-enumeration solution on the sorted reduction: {brute}");

    // KKT certificate (stated in the sorted frame): multipliers are
    // reconstructed from the pooled blocks and all four residual groups must
    // vanish.
    let sorted_solution = slope_orthogonal_solve(&sorted_y, &lam)?;
    let report = verify_kkt_orthogonal(&sorted_solution, &sorted_y, &lam)?;
    println!(
        "\nKKT residuals (mu = {:.1e}): stationarity {:.2e}, complementarity {:.2e}, primal {:.2e}, dual {:.2e}",
        report.mu,
        report.residuals.stationarity,
        report.residuals.complementarity,
        report.residuals.primal,
        report.residuals.dual,
    );
    println!("certificate pass: {}", report.pass);

    // The iterative solver agrees on the same instance.
    let prob = ProblemData::new(Array2::eye(5), y.clone())?;
    let mut opts = SolverOptions::standard(prob.l());
    opts.eps = 1e-10;
    let iterative = pdsp_solve(&prob, &lam, &lam, &opts, None)?;
    let max_err = iterative
        .w
        .iter()
        .zip(analytic.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    println!(
        "\niterative solver after {} iterations, max |difference| = {max_err:.2e}",
        iterative.iterations
    );
    Ok(())
}
