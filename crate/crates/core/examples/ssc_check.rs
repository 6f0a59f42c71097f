//! Sufficiently-scattered condition checks on a few rank-three bases.
//!
//! ```bash
//! cargo run --example ssc_check
//! ```

use volnmf::datagen::build_ssc_basis_block;
use volnmf::geometry::{is_ssc1_violation_witness, ssc_check_exact_k3, ssc_check_sampling};
use volnmf::Matrix;

fn report(name: &str, m: &Matrix) -> volnmf::Result<()> {
    let exact = ssc_check_exact_k3(m)?;
    let sampled = ssc_check_sampling(m, 50_000, 7)?;
    println!("{name}");
    println!("  exact:    ssc1 {:?}, ssc2 {:?}", exact.ssc1, exact.ssc2);
    println!(
        "  sampling: ssc1 {:?} ({} samples)",
        sampled.ssc1, sampled.samples_used
    );
    if let Some(y) = &exact.certificate {
        println!(
            "  certificate y = [{:.4}, {:.4}, {:.4}], verifies: {}",
            y[0],
            y[1],
            y[2],
            is_ssc1_violation_witness(m, y)
        );
    }
    Ok(())
}

fn main() -> volnmf::Result<()> {
    report("identity", &Matrix::identity(3))?;
    for beta in [0.1, 0.3, 0.45] {
        match build_ssc_basis_block(3, beta) {
            Ok(block) => report(&format!("SSC block, beta = {beta}"), &block)?,
            // Past β = 1/3 the block rows no longer enclose the inscribed circle.
            Err(e) => println!("SSC block, beta = {beta}\n  rejected: {e}"),
        }
    }
    let dense = Matrix::from_rows(&[[0.5, 0.3, 0.2], [0.2, 0.6, 0.2], [0.3, 0.3, 0.4]])?;
    report("strictly positive rows", &dense)?;
    Ok(())
}
