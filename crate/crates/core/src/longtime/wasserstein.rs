//! Empirical Wasserstein distances.

use crate::{Error, Result};

/// Largest point cloud accepted by the exact assignment solver.
pub const ASSIGNMENT_CAP: usize = 2048;

fn cost(a: &[f64], b: &[f64], m: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt().powf(m)
}

/// `W_m` between two equal-size uniform point clouds: sorted matching in
/// one dimension, exact optimal assignment otherwise.
pub fn wasserstein_samples(a: &[Vec<f64>], b: &[Vec<f64>], m: f64) -> Result<f64> {
    if !(m >= 1.0) {
        return Err(Error::input("Wasserstein order must be >= 1"));
    }
    if a.is_empty() || a.len() != b.len() {
        return Err(Error::input(format!("sample counts differ or are zero ({} vs {})", a.len(), b.len())));
    }
    let d = a[0].len();
    if a.iter().chain(b).any(|x| x.len() != d) {
        return Err(Error::input("samples have inconsistent dimensions"));
    }
    let n = a.len();
    if d == 1 {
        let mut x: Vec<f64> = a.iter().map(|v| v[0]).collect();
        let mut y: Vec<f64> = b.iter().map(|v| v[0]).collect();
        x.sort_by(f64::total_cmp);
        y.sort_by(f64::total_cmp);
        let total: f64 = x.iter().zip(&y).map(|(p, q)| (p - q).abs().powf(m)).sum();
        return Ok((total / n as f64).powf(1.0 / m));
    }
    if n > ASSIGNMENT_CAP {
        return Err(Error::AssignmentCap { size: n, cap: ASSIGNMENT_CAP });
    }
    let c: Vec<Vec<f64>> = a.iter().map(|p| b.iter().map(|q| cost(p, q, m)).collect()).collect();
    let assignment = hungarian(&c);
    // summing sorted costs makes the result exactly symmetric in (a, b)
    let mut costs: Vec<f64> = assignment.iter().enumerate().map(|(i, &j)| c[i][j]).collect();
    costs.sort_by(f64::total_cmp);
    Ok((costs.iter().sum::<f64>() / n as f64).powf(1.0 / m))
}

/// Minimum-cost perfect matching of a square cost matrix (shortest
/// augmenting paths with potentials, O(n³)). Returns the column of each row.
pub fn hungarian(c: &[Vec<f64>]) -> Vec<usize> {
    let n = c.len();
    let inf = f64::INFINITY;
    // 1-based with a virtual column 0
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = c[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    row_to_col
}
