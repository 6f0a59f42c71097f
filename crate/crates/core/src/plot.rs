//! Unit-sum slices of three-column factorizations rendered as SVG.

use std::fmt::Write as _;

use crate::error::{Result, VolNmfError};
use crate::linalg::{cholesky, cholesky_solve_in_place, Matrix};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 60.0;
const POINT_RADIUS: f64 = 2.5;
const SQRT3_2: f64 = 0.866_025_403_784_438_6;

/// Planar position of barycentric coordinates on the triangle
/// `(0,0)`, `(1,0)`, `(1/2, √3/2)`.
pub fn barycentric_to_xy(c: [f64; 3]) -> (f64, f64) {
    (c[1] + 0.5 * c[2], SQRT3_2 * c[2])
}

/// What the data points are given as.
#[derive(Debug, Clone, Copy)]
pub enum PlotData<'a> {
    /// K×J coefficients, used directly as barycentric coordinates.
    Coefficients(&'a Matrix),
    /// I×J observations, expressed in the reference basis first.
    Observations(&'a Matrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPlot {
    pub points: Vec<[f64; 3]>,
    pub truth: Option<[[f64; 3]; 3]>,
    pub estimate: [[f64; 3]; 3],
}

fn normalize(v: &[f64]) -> Option<[f64; 3]> {
    let s: f64 = v.iter().sum();
    if s.abs() < 1e-12 {
        return None;
    }
    Some([v[0] / s, v[1] / s, v[2] / s])
}

/// Least-squares coordinates of vectors in a three-column reference basis.
struct Coordinates {
    reference: Matrix,
    chol: Matrix,
}

impl Coordinates {
    fn new(reference: &Matrix) -> Result<Self> {
        let chol = cholesky(&reference.gram())?;
        Ok(Self {
            reference: reference.clone(),
            chol,
        })
    }

    fn of(&self, v: &[f64]) -> Option<[f64; 3]> {
        let mut rhs: Vec<f64> = (0..3)
            .map(|k| (0..v.len()).map(|i| self.reference[(i, k)] * v[i]).sum())
            .collect();
        cholesky_solve_in_place(&self.chol, &mut rhs);
        normalize(&rhs)
    }
}

fn check_k3(m: &Matrix, what: &str) -> Result<()> {
    if m.cols() != 3 {
        return Err(VolNmfError::InvalidArgument(format!(
            "simplex plot needs k = 3, {what} has {} columns",
            m.cols()
        )));
    }
    Ok(())
}

/// Places data and basis vectors in the unit-sum slice of the reference
/// basis (the truth if given, otherwise the estimate).
pub fn build_simplex_plot(
    m_est: &Matrix,
    m_true: Option<&Matrix>,
    data: PlotData<'_>,
) -> Result<SimplexPlot> {
    check_k3(m_est, "the estimated basis")?;
    if let Some(t) = m_true {
        check_k3(t, "the true basis")?;
        if t.rows() != m_est.rows() {
            return Err(VolNmfError::ShapeMismatch(format!(
                "estimated basis has {} rows, true basis {}",
                m_est.rows(),
                t.rows()
            )));
        }
    }
    let coords = Coordinates::new(m_true.unwrap_or(m_est))?;
    let corner = |k: usize| coords.of(&m_est.col(k)).unwrap_or([f64::NAN; 3]);
    let estimate = [corner(0), corner(1), corner(2)];
    if estimate.iter().flatten().any(|v| !v.is_finite()) {
        return Err(VolNmfError::InvalidArgument(
            "an estimated basis vector has zero coordinate sum".into(),
        ));
    }
    let truth = m_true.map(|_| [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    let points = match data {
        PlotData::Coefficients(h) => {
            if h.rows() != 3 {
                return Err(VolNmfError::InvalidArgument(format!(
                    "simplex plot needs k = 3, coefficients have {} rows",
                    h.rows()
                )));
            }
            (0..h.cols()).filter_map(|j| normalize(&h.col(j))).collect()
        }
        PlotData::Observations(x) => {
            if x.rows() != m_est.rows() {
                return Err(VolNmfError::ShapeMismatch(format!(
                    "observations have {} rows, basis {}",
                    x.rows(),
                    m_est.rows()
                )));
            }
            (0..x.cols()).filter_map(|j| coords.of(&x.col(j))).collect()
        }
    };
    Ok(SimplexPlot {
        points,
        truth,
        estimate,
    })
}

fn to_svg(c: [f64; 3]) -> (f64, f64) {
    let (x, y) = barycentric_to_xy(c);
    let scale = WIDTH - 2.0 * MARGIN;
    (MARGIN + scale * x, HEIGHT - MARGIN - scale * y)
}

fn polygon_points(corners: &[[f64; 3]; 3]) -> String {
    corners
        .iter()
        .map(|&c| {
            let (x, y) = to_svg(c);
            format!("{x:.3},{y:.3}")
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn render_svg(plot: &SimplexPlot) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<g id="data" fill="steelblue" fill-opacity="0.6">"#);
    for &p in &plot.points {
        let (x, y) = to_svg(p);
        let _ = writeln!(s, r#"<circle cx="{x:.3}" cy="{y:.3}" r="{POINT_RADIUS}"/>"#);
    }
    let _ = writeln!(s, "</g>");
    if let Some(t) = &plot.truth {
        let _ = writeln!(
            s,
            r#"<polygon id="truth" points="{}" fill="none" stroke="navy" stroke-width="2"/>"#,
            polygon_points(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<polygon id="estimate" points="{}" fill="none" stroke="crimson" stroke-width="2" stroke-dasharray="8,5"/>"#,
        polygon_points(&plot.estimate)
    );

    let lx = WIDTH - 190.0;
    let mut ly = 24.0;
    let _ = writeln!(s, r#"<g id="legend" font-family="sans-serif" font-size="13">"#);
    let _ = writeln!(
        s,
        r#"<circle cx="{}" cy="{ly}" r="4" fill="steelblue"/>"#,
        lx + 12.0
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}">data</text>"#, lx + 32.0, ly + 4.0);
    if plot.truth.is_some() {
        ly += 22.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="navy" stroke-width="2"/>"#,
            lx + 24.0
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}">true basis</text>"#, lx + 32.0, ly + 4.0);
    }
    ly += 22.0;
    let _ = writeln!(
        s,
        r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="crimson" stroke-width="2" stroke-dasharray="8,5"/>"#,
        lx + 24.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}">estimated basis</text>"#,
        lx + 32.0,
        ly + 4.0
    );
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}
