//! Generates the three synthetic settings and writes them as CSV.
//!
//! ```bash
//! cargo run --example synthetic_data -- /tmp/volnmf-data
//! ```

use std::path::PathBuf;

use volnmf::datagen::{generate_synthetic, write_matrix_csv, SyntheticSetting, SyntheticSpec};
use volnmf::eval::volume_logdet;

fn main() -> volnmf::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("volnmf-data"), PathBuf::from);
    for setting in SyntheticSetting::ALL {
        let d = generate_synthetic(&SyntheticSpec::new(setting, 0))?;
        let (m, h) = (d.m_true.as_ref().unwrap(), d.h_true.as_ref().unwrap());
        let dir = out.join(setting.name());
        std::fs::create_dir_all(&dir).map_err(|e| volnmf::VolNmfError::Io(e.to_string()))?;
        write_matrix_csv(&d.x, dir.join("X.csv"))?;
        write_matrix_csv(m, dir.join("M_true.csv"))?;
        write_matrix_csv(h, dir.join("H_true.csv"))?;
        println!(
            "{:<18} alpha {:?}  X {}x{}  max coefficient {:.3}  true volume {:.3}",
            setting.name(),
            setting.alpha(),
            d.x.rows(),
            d.x.cols(),
            h.max(),
            volume_logdet(m, 0.1)?
        );
    }
    println!("wrote {}", out.display());
    Ok(())
}
