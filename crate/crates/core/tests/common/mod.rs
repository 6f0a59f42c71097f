//! Independent reference implementations used by the integration tests.
//! None of these share code with the library's algorithms.

#![allow(dead_code)]

use volnmf::Matrix;

pub fn to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

/// Determinant by Laplace expansion along the first row.
pub fn det_cofactor(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    match n {
        0 => 1.0,
        1 => a[0][0],
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        _ => (0..n)
            .map(|c| {
                let minor: Vec<Vec<f64>> = a[1..]
                    .iter()
                    .map(|r| {
                        r.iter()
                            .enumerate()
                            .filter(|&(j, _)| j != c)
                            .map(|(_, &v)| v)
                            .collect()
                    })
                    .collect();
                let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
                sign * a[0][c] * det_cofactor(&minor)
            })
            .sum(),
    }
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
pub fn inverse_gauss_jordan(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut aug: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| aug[x][col].abs().partial_cmp(&aug[y][col].abs()).unwrap())
            .unwrap();
        aug.swap(col, piv);
        let p = aug[col][col];
        assert!(p.abs() > 1e-300, "singular matrix");
        for v in aug[col].iter_mut() {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let f = aug[r][col];
                if f != 0.0 {
                    let pivot_row = aug[col].clone();
                    for (v, pv) in aug[r].iter_mut().zip(pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
    }
    aug.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Eigenvalues of a symmetric 3×3 matrix from the trigonometric solution of
/// its characteristic cubic, in descending order.
pub fn sym3_eigenvalues(a: &[Vec<f64>]) -> [f64; 3] {
    let p1 = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    if p1 == 0.0 {
        let mut e = [a[0][0], a[1][1], a[2][2]];
        e.sort_by(|x, y| y.partial_cmp(x).unwrap());
        return e;
    }
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let b: Vec<Vec<f64>> = (0..3)
        .map(|i| {
            (0..3)
                .map(|j| (a[i][j] - if i == j { q } else { 0.0 }) / p)
                .collect()
        })
        .collect();
    let r = (det_cofactor(&b) / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    [e1, 3.0 * q - e1 - e3, e3]
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Visits every grid point of the probability simplex within `radius` of
/// `center` (per coordinate) on the lattice of multiples of `step`.
fn simplex_box_points(center: &[f64], radius: f64, step: f64, f: &mut impl FnMut(&[f64])) {
    let d = center.len();
    let m = (radius / step).round() as i64;
    let mut p = vec![0.0; d];
    fn rec(
        idx: usize,
        d: usize,
        m: i64,
        step: f64,
        radius: f64,
        center: &[f64],
        p: &mut Vec<f64>,
        partial: f64,
        f: &mut impl FnMut(&[f64]),
    ) {
        if idx == d - 1 {
            let last = 1.0 - partial;
            if last >= -1e-15 && (last - center[d - 1]).abs() <= radius + step {
                p[d - 1] = last.max(0.0);
                f(p);
            }
            return;
        }
        let base = (center[idx] / step).round() as i64;
        for k in (base - m)..=(base + m) {
            let v = k as f64 * step;
            if v < 0.0 || partial + v > 1.0 + 1e-15 {
                continue;
            }
            p[idx] = v;
            rec(idx + 1, d, m, step, radius, center, p, partial + v, f);
        }
    }
    rec(0, d, m, step, radius, center, &mut p, 0.0, f);
}

/// Euclidean projection onto the probability simplex by coarse-to-fine grid
/// search. Accurate to roughly the final spacing (about 2e-4).
pub fn project_simplex_grid(v: &[f64]) -> Vec<f64> {
    let d = v.len();
    let mut best = vec![1.0 / d as f64; d];
    let mut radius = 1.0;
    let mut step = 0.2;
    while step > 1e-4 {
        let center = best.clone();
        let mut best_val = dist2(&best, v);
        simplex_box_points(&center, radius, step, &mut |p| {
            let val = dist2(p, v);
            if val < best_val {
                best_val = val;
                best = p.to_vec();
            }
        });
        radius = 2.0 * step;
        step /= 4.0;
    }
    best
}

/// Nonnegative least squares `min ‖x - M h‖²` per column by exact cyclic
/// coordinate descent from several starting points.
pub fn nnls_coordinate_descent(m: &Matrix, x: &Matrix, sweeps: usize) -> Matrix {
    let (i, k) = m.shape();
    let j = x.cols();
    let g: Vec<Vec<f64>> = (0..k)
        .map(|a| {
            (0..k)
                .map(|b| (0..i).map(|r| m[(r, a)] * m[(r, b)]).sum())
                .collect()
        })
        .collect();
    let mut h = Matrix::zeros(k, j);
    for col in 0..j {
        let b: Vec<f64> = (0..k)
            .map(|a| (0..i).map(|r| m[(r, a)] * x[(r, col)]).sum())
            .collect();
        let objective = |hv: &[f64]| {
            (0..i)
                .map(|r| {
                    let pred: f64 = (0..k).map(|a| m[(r, a)] * hv[a]).sum();
                    (x[(r, col)] - pred).powi(2)
                })
                .sum::<f64>()
        };
        let mut best: Option<(f64, Vec<f64>)> = None;
        for start in [0.0, 0.5, 2.0] {
            let mut hv = vec![start; k];
            for _ in 0..sweeps {
                for a in 0..k {
                    if g[a][a] <= 0.0 {
                        hv[a] = 0.0;
                        continue;
                    }
                    let rest: f64 = (0..k).filter(|&c| c != a).map(|c| g[a][c] * hv[c]).sum();
                    hv[a] = ((b[a] - rest) / g[a][a]).max(0.0);
                }
            }
            let val = objective(&hv);
            if best.as_ref().is_none_or(|(v, _)| val < *v) {
                best = Some((val, hv));
            }
        }
        h.set_col(col, &best.unwrap().1);
    }
    h
}

/// Minimizes `½ m A mᵀ − c mᵀ` over the 3-simplex for every row of `c` by
/// exhaustive grid search, returning the summed minimum.
pub fn row_simplex_grid_min(a: &Matrix, c: &Matrix, step: f64) -> f64 {
    assert_eq!(a.rows(), 3);
    let n = (1.0 / step).round() as usize;
    let mut total = 0.0;
    for row in 0..c.rows() {
        let cr = c.row(row);
        let mut best = f64::INFINITY;
        for p in 0..=n {
            for q in 0..=(n - p) {
                let m = [p as f64 * step, q as f64 * step, (n - p - q) as f64 * step];
                let mut val = 0.0;
                for s in 0..3 {
                    for t in 0..3 {
                        val += 0.5 * m[s] * a[(s, t)] * m[t];
                    }
                    val -= cr[s] * m[s];
                }
                best = best.min(val);
            }
        }
        total += best;
    }
    total
}

/// All permutations of `0..k` by Heap's algorithm (unordered).
pub fn heap_permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..n - 1 {
            rec(n - 1, a, out);
            if n.is_multiple_of(2) {
                a.swap(i, n - 1);
            } else {
                a.swap(0, n - 1);
            }
        }
        rec(n - 1, a, out);
    }
    let mut a: Vec<usize> = (0..k).collect();
    let mut out = Vec::new();
    rec(k, &mut a, &mut out);
    out
}

/// Brute-force alignment: smallest total squared error over all
/// permutations with per-column least-squares positive scaling. Returns
/// the mean absolute error of the winner.
pub fn brute_force_alignment_mae(est: &Matrix, truth: &Matrix) -> f64 {
    let (rows, k) = est.shape();
    let mut best = (f64::INFINITY, f64::INFINITY);
    for perm in heap_permutations(k) {
        let mut sq = 0.0;
        let mut abs = 0.0;
        for t in 0..k {
            let e: Vec<f64> = (0..rows).map(|i| est[(i, perm[t])]).collect();
            let v: Vec<f64> = (0..rows).map(|i| truth[(i, t)]).collect();
            let num: f64 = e.iter().zip(&v).map(|(a, b)| a * b).sum();
            let den: f64 = e.iter().map(|a| a * a).sum();
            let s = (num / den).max(1e-12);
            for (a, b) in e.iter().zip(&v) {
                sq += (s * a - b).powi(2);
                abs += (s * a - b).abs();
            }
        }
        if sq < best.0 {
            best = (sq, abs / (rows * k) as f64);
        }
    }
    best.1
}

/// Published rank-three bases for the time-allocation table, activities in
/// table order.
pub fn published_mvc_basis() -> Matrix {
    Matrix::from_rows(&[
        [0.0000, 0.2180, 0.0630],
        [0.1471, 0.0171, 0.0042],
        [0.0241, 0.0162, 0.0000],
        [0.0360, 0.0165, 0.0131],
        [0.0371, 0.0318, 0.0332],
        [0.0642, 0.0675, 0.0496],
        [0.3635, 0.3348, 0.3811],
        [0.0000, 0.0000, 0.1694],
        [0.0156, 0.0163, 0.0094],
        [0.0776, 0.0587, 0.0473],
        [0.0220, 0.0321, 0.0444],
        [0.0426, 0.0230, 0.0417],
        [0.0200, 0.0258, 0.0083],
        [0.0057, 0.0075, 0.0049],
        [0.0773, 0.0789, 0.0777],
        [0.0419, 0.0344, 0.0236],
        [0.0076, 0.0058, 0.0074],
        [0.0198, 0.0154, 0.0216],
    ])
    .unwrap()
}

pub fn published_mav_basis() -> Matrix {
    Matrix::from_rows(&[
        [0.0000, 0.2499, 0.0000],
        [0.1460, 0.0000, 0.0000],
        [0.0237, 0.0133, 0.0000],
        [0.0360, 0.0137, 0.0104],
        [0.0371, 0.0310, 0.0336],
        [0.0642, 0.0683, 0.0401],
        [0.3637, 0.3301, 0.4034],
        [0.0000, 0.0000, 0.2571],
        [0.0156, 0.0166, 0.0056],
        [0.0776, 0.0561, 0.0404],
        [0.0220, 0.0334, 0.0515],
        [0.0427, 0.0199, 0.0505],
        [0.0200, 0.0267, 0.0000],
        [0.0057, 0.0079, 0.0034],
        [0.0775, 0.0793, 0.0758],
        [0.0420, 0.0335, 0.0170],
        [0.0076, 0.0055, 0.0081],
        [0.0198, 0.0147, 0.0245],
    ])
    .unwrap()
}
