//! The volume penalty only sees the basis through `det(MᵀM)`: mixing the
//! columns by an invertible S scales it by `det(S)²`, and undoing the mix in
//! H leaves the product of the two Gram determinants unchanged.
//!
//! ```bash
//! cargo run --example determinant_identity
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use volnmf::linalg::{logdet_shifted_gram, spd_inverse};
use volnmf::Matrix;

fn main() -> volnmf::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let m = Matrix::from_fn(9, 3, |_, _| rng.random::<f64>());
    let h = Matrix::from_fn(3, 20, |_, _| rng.random::<f64>());
    // S = I + small symmetric part keeps it safely invertible.
    let p = Matrix::from_fn(3, 3, |_, _| 0.3 * rng.random::<f64>());
    let s = Matrix::identity(3).add(&p.gram())?;
    let s_inv = spd_inverse(&s)?;

    let ms = m.matmul(&s)?;
    let sh = s_inv.matmul(&h)?;
    let lm = logdet_shifted_gram(&m.gram(), 0.0)?;
    let lms = logdet_shifted_gram(&ms.gram(), 0.0)?;
    let ls = 0.5 * logdet_shifted_gram(&s.gram(), 0.0)?;
    println!("logdet(MᵀM)           {lm:.10}");
    println!("logdet((MS)ᵀMS)       {lms:.10}");
    println!("logdet(MᵀM) + 2log|S| {:.10}", lm + 2.0 * ls);
    let before = lm + logdet_shifted_gram(&h.gram_rows(), 0.0)?;
    let after = lms + logdet_shifted_gram(&sh.gram_rows(), 0.0)?;
    println!("product of Gram determinants (log): {before:.10} vs {after:.10}");
    let diff = m.matmul(&h)?.sub(&ms.matmul(&sh)?)?;
    println!(
        "max |MH - (MS)(S⁻¹H)| = {:.2e}",
        diff.as_slice().iter().fold(0.0f64, |a, v| a.max(v.abs()))
    );
    Ok(())
}
