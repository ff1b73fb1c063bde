//! Weight sequences for FDR control at a target level.
//!
//! The base sequence is `λᵢ = σ·Φ⁻¹(1 − i·q/(2p))` — normal quantiles that
//! decay as the index grows. For non-orthogonal Gaussian designs the
//! sequence is inflated coordinate-by-coordinate to compensate for
//! cross-correlation noise, then truncated to stay non-increasing.
//!
//! Run with: `cargo run --example lambda_sequences`

use odsel::{bh_lambda, gaussian_adjusted_lambda, normal_quantile};

fn main() -> odsel::Result<()> {
    println!("standard normal quantiles:");
    for u in [0.75, 0.9, 0.95, 0.975, 0.99] {
        println!("  Phi^-1({u:<6}) = {:+.10}", normal_quantile(u)?);
    }

    let p = 10;
    for q in [0.05, 0.1, 0.2] {
        let lam = bh_lambda(p, q, 1.0)?;
        let head: Vec<String> = lam.as_slice()[..4].iter().map(|v| format!("{v:.4}")).collect();
        println!("\nq = {q:<4}: lambda = [{} ...]", head.join(", "));
    }

    // Doubling sigma scales the whole sequence linearly.
    let base = bh_lambda(p, 0.1, 1.0)?;
    let scaled = bh_lambda(p, 0.1, 2.0)?;
    println!(
        "\nsigma scaling check: lambda_1(sigma=2) / lambda_1(sigma=1) = {}",
        scaled.values()[0] / base.values()[0]
    );

    // The Gaussian-design adjustment inflates later weights; with a small
    // sample size the correction grows until the sequence would rise, after
    // which it is held flat.
    println!("\nGaussian-design adjustment (p = {p}):");
    for n in [5000, 50, 12] {
        let adj = gaussian_adjusted_lambda(&base, n)?;
        let ratios: Vec<String> = adj
            .values()
            .iter()
            .zip(base.values())
            .map(|(a, b)| format!("{:.3}", a / b))
            .collect();
        println!("  n = {n:>5}: inflation per index = [{}]", ratios.join(", "));
    }
    Ok(())
}
