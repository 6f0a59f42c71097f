//! Volume-regularized nonnegative matrix factorization: minimum-volume
//! (MVC) and maximum-volume (MAV) NMF solved by alternating projected fast
//! gradient steps on a log-determinant regularized objective.
//!
//! ## Examples
//!
//! - **`determinant_identity`** - why the volume term only sees `det(MᵀM)`
//! - **`ssc_check`** - exact and sampled sufficiently-scattered checks
//! - **`synthetic_data`** - the three seeded synthetic settings as CSV
//! - **`mvc_vs_mav`** - both methods on one dataset, aligned to the truth
//! - **`simplex_plot`** - SVG of data, true and estimated basis
//! - **`time_allocation`** - rank-three fits of the bundled table
//! - **`appendix_b`** - the full synthetic sweep with summary CSV
//!
//! ```bash
//! cargo run --release --example mvc_vs_mav
//! ```

pub mod cli;
pub mod datagen;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod linalg;
pub mod plot;
pub mod reproduce;
pub mod solver;

pub use error::{Result, VolNmfError};
pub use linalg::Matrix;
