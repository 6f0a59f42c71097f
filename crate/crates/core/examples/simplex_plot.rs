//! Fits MAV to the densest synthetic setting and draws the data, the true
//! basis and the estimate on the unit-sum slice.
//!
//! ```bash
//! cargo run --release --example simplex_plot -- /tmp/simplex.svg
//! ```

use std::path::PathBuf;

use volnmf::datagen::{generate_synthetic, SyntheticSetting, SyntheticSpec};
use volnmf::plot::{build_simplex_plot, render_svg, PlotData};
use volnmf::solver::{solve_best_of, Method, SolverConfig};

fn main() -> volnmf::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("simplex.svg"), PathBuf::from);
    let d = generate_synthetic(&SyntheticSpec::new(SyntheticSetting::ThreeDenseRows, 0))?;
    let cfg = SolverConfig {
        lambda_prime: 0.01,
        ..SolverConfig::default()
    };
    let r = solve_best_of(&d.x, Method::Mav, &cfg, 3)?;
    let plot = build_simplex_plot(&r.m, d.m_true.as_ref(), PlotData::Observations(&d.x))?;
    std::fs::write(&out, render_svg(&plot)).map_err(|e| volnmf::VolNmfError::Io(e.to_string()))?;
    println!("wrote {} ({} points)", out.display(), plot.points.len());
    Ok(())
}
