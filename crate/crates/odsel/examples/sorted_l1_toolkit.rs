//! Tour of the sorted-ℓ1 primitives: the norm, its dual norm, the proximal
//! operator, the dual-ball projection, and subgradients.
//!
//! Run with: `cargo run --example sorted_l1_toolkit`

use ndarray::array;

use odsel::{
    dual_sorted_l1_norm, project_dual_ball, prox_sorted_l1, sorted_l1_norm,
    subgradient_sorted_l1, LambdaSeq,
};

fn main() -> odsel::Result<()> {
    let lam = LambdaSeq::from_slice(&[1.5, 1.0, 0.5])?;
    let z = array![-0.8, 3.0, 1.2];

    // J_λ pairs the largest magnitude with the largest weight.
    let norm = sorted_l1_norm(&z, &lam)?;
    println!("z        = {z}");
    println!("weights  = {}", lam.values());
    println!("J(z)     = {norm}   (= 1.5*3.0 + 1.0*1.2 + 0.5*0.8)");

    // The dual norm is the largest ratio of prefix sums.
    let dual = dual_sorted_l1_norm(&z, &lam)?;
    println!("J^D(z)   = {dual:.6}");

    // The prox shrinks magnitudes and may tie neighbouring ones together:
    // pooling is what distinguishes it from plain soft thresholding.
    let prox = prox_sorted_l1(&z, &lam, 1.0)?;
    println!("\nprox(z)  = {prox}");

    let tied = prox_sorted_l1(&array![2.1, 2.0], &LambdaSeq::from_slice(&[2.0, 0.5])?, 1.0)?;
    println!("prox([2.1, 2.0], weights [2.0, 0.5]) = {tied}   <- a tied block");

    // Moreau decomposition: z splits into the prox point plus the projection
    // onto the dual-norm unit ball.
    let proj = project_dual_ball(&z, &lam)?;
    println!("\nprojection onto {{u : J^D(u) <= 1}} = {proj}");
    println!("prox + projection                  = {}", &prox + &proj);
    println!("J^D(projection)                    = {:.12}", dual_sorted_l1_norm(&proj, &lam)?);

    // A subgradient certifies the norm value from below everywhere.
    let g = subgradient_sorted_l1(&z, &lam)?;
    println!("\nsubgradient at z = {g}");
    println!("<g, z>           = {}   (equals J(z) by construction)", g.dot(&z));
    Ok(())
}
