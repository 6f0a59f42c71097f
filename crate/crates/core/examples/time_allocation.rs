//! Rank-three MVC and MAV fits of the bundled time-allocation table, printed
//! next to the rank-one reference.
//!
//! ```bash
//! cargo run --release --example time_allocation
//! ```

use volnmf::reproduce::{run_time_allocation, ReproduceOptions};
use volnmf::solver::Method;

fn main() -> volnmf::Result<()> {
    let s = run_time_allocation(&ReproduceOptions::default())?;
    for r in &s.rows {
        println!(
            "{} lambda'={:<5} volume {:>8.4}  fit_rel {:.4}  zeros in M {:>2}{}",
            r.method,
            r.lambda_prime,
            r.volume_logdet,
            r.fit_rel,
            r.sparsity_m,
            if r.selected { "  (selected)" } else { "" }
        );
    }
    let (Some((_, mvc)), Some((_, mav))) = (s.selected(Method::Mvc), s.selected(Method::Mav)) else {
        return Ok(());
    };
    println!(
        "\n{:<10} {:>7} | {:>7} {:>7} {:>7} | {:>7} {:>7} {:>7}",
        "activity", "k1", "mvc1", "mvc2", "mvc3", "mav1", "mav2", "mav3"
    );
    for (i, name) in s.activities.iter().enumerate() {
        print!("{name:<10} {:>7.4} |", s.k1_basis[(i, 0)]);
        for k in 0..3 {
            print!(" {:>7.4}", mvc.m[(i, k)]);
        }
        print!(" |");
        for k in 0..3 {
            print!(" {:>7.4}", mav.m[(i, k)]);
        }
        println!();
    }
    Ok(())
}
