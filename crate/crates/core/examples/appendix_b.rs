//! The full synthetic comparison: every setting, every λ′ in the sweep,
//! both methods, best of five restarts. Takes about a minute in release.
//!
//! ```bash
//! cargo run --release --example appendix_b -- /tmp/appendix-b
//! ```

use std::path::PathBuf;

use volnmf::reproduce::{run_appendix_b, write_appendix_b, ReproduceOptions};

fn main() -> volnmf::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("appendix-b"), PathBuf::from);
    std::fs::create_dir_all(&out).map_err(|e| volnmf::VolNmfError::Io(e.to_string()))?;
    let s = run_appendix_b(&ReproduceOptions::default())?;
    println!("true volumes: {:?}", s.truth_volumes);
    println!("setting             method  lambda'  volume  aligned  monotone");
    for r in &s.rows {
        println!(
            "{:<19} {:<7} {:<8} {:>6.3}  {:>7}  {}{}",
            r.setting.name(),
            r.method.name(),
            r.lambda_prime,
            r.volume_logdet,
            r.aligned_error.map_or("-".into(), |e| format!("{e:.4}")),
            r.monotone,
            if r.selected { "  *" } else { "" }
        );
    }
    for f in write_appendix_b(&s, &out)? {
        println!("wrote {}", f.display());
    }
    Ok(())
}
