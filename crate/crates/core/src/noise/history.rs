//! Noise histories `w ∈ H_H`, the history operator `A^{t0}` and the `H_H`
//! norm.

use super::mvn::history_response;
use super::Hurst;
use crate::rng::StreamKey;
use crate::{Error, Result};

/// A sampled path `w` on `[-T_hist, 0]` with `w(0) = 0`.
///
/// `values[c][j]` is `w^c(-(N - j) step)`, so the last sample sits at time 0.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryPath {
    step: f64,
    values: Vec<Vec<f64>>,
}

impl HistoryPath {
    pub fn new(step: f64, values: Vec<Vec<f64>>) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::input("history step must be positive"));
        }
        let len = values.first().map_or(0, Vec::len);
        if len == 0 || values.iter().any(|v| v.len() != len) {
            return Err(Error::input("history coordinates must be nonempty and of equal length"));
        }
        if values.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::input("history samples must be finite"));
        }
        if values.iter().any(|v| v[len - 1] != 0.0) {
            return Err(Error::input("history path must vanish at time 0"));
        }
        Ok(Self { step, values })
    }

    /// The zero history on a window of `cells` steps.
    pub fn zero(step: f64, cells: usize, dim: usize) -> Self {
        Self {
            step,
            values: vec![vec![0.0; cells + 1]; dim],
        }
    }

    /// Builds `w` from chronological increments, anchoring `w(0) = 0`.
    pub fn from_increments(step: f64, increments: &[Vec<f64>]) -> Self {
        let values = increments
            .iter()
            .map(|inc| {
                let mut v = vec![0.0; inc.len() + 1];
                for j in (0..inc.len()).rev() {
                    v[j] = v[j + 1] - inc[j];
                }
                v
            })
            .collect();
        Self { step, values }
    }

    /// A two-sided Wiener history (left-sided Wiener measure) on
    /// `[-window, 0]`.
    pub fn wiener(key: StreamKey, window: f64, step: f64, dim: usize) -> Self {
        let cells = (window / step).round() as usize;
        let mut rng = key.rng();
        let incs: Vec<Vec<f64>> = (0..dim)
            .map(|_| {
                let mut v = vec![0.0; cells];
                rng.fill_normal(&mut v, step);
                v
            })
            .collect();
        Self::from_increments(step, &incs)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn cells(&self) -> usize {
        self.values[0].len() - 1
    }

    pub fn window(&self) -> f64 {
        self.cells() as f64 * self.step
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn time(&self, j: usize) -> f64 {
        -((self.cells() - j) as f64) * self.step
    }

    pub fn at_zero(&self) -> Vec<f64> {
        self.values.iter().map(|v| v[v.len() - 1]).collect()
    }

    pub fn increments(&self, c: usize) -> Vec<f64> {
        self.values[c].windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// The `ζ` update: append `fresh` increments (one column per coordinate)
    /// after time 0, shift time back by their duration, drop what leaves the
    /// window and recentre so the new path vanishes at 0.
    pub fn shifted(&self, fresh: &[Vec<f64>]) -> Self {
        assert_eq!(fresh.len(), self.dim(), "dimension mismatch");
        let cells = self.cells();
        let incs: Vec<Vec<f64>> = (0..self.dim())
            .map(|c| {
                let old = self.increments(c);
                let k = fresh[c].len();
                let mut v: Vec<f64> = if k >= cells {
                    Vec::with_capacity(cells)
                } else {
                    old[k..].to_vec()
                };
                let start = k.saturating_sub(cells);
                v.extend_from_slice(&fresh[c][start..]);
                v
            })
            .collect();
        Self::from_increments(self.step, &incs)
    }

    /// Keeps every `stride`-th sample counted back from time 0.
    pub fn subsample(&self, stride: usize) -> Self {
        let stride = stride.max(1);
        let values = self
            .values
            .iter()
            .map(|v| {
                let n = v.len() - 1;
                let mut out: Vec<f64> = (0..=n / stride).map(|k| v[n - k * stride]).collect();
                out.reverse();
                out
            })
            .collect();
        Self {
            step: self.step * stride as f64,
            values,
        }
    }
}

/// `A^{t0}(w)(t) = α_H ∫_{-∞}^{t0} ((t-u)^{H-1/2} - (t0-u)^{H-1/2}) dw_{u-t0}`.
///
/// The integral is exact for the piecewise-linear interpolant of the samples:
/// each cell contributes its increment times the cell average of the kernel
/// difference. Before the window `w` is taken constant.
pub fn history_operator(w: &HistoryPath, hurst: &Hurst, t0: f64, t: f64) -> Result<Vec<f64>> {
    if t < t0 {
        return Err(Error::input("history operator needs t >= t0"));
    }
    let tau = t - t0;
    if hurst.is_brownian() || tau == 0.0 {
        return Ok(vec![0.0; w.dim()]);
    }
    let p = hurst.exponent() + 1.0;
    let step = w.step();
    let cells = w.cells();
    // cell j covers [-(N-j) step, -(N-j-1) step]
    let weights: Vec<f64> = (0..cells)
        .map(|j| {
            let far = (cells - j) as f64 * step;
            let near = (cells - j - 1) as f64 * step;
            let shifted = (tau + far).powf(p) - (tau + near).powf(p);
            let origin = far.powf(p) - near.powf(p);
            (shifted - origin) / (p * step)
        })
        .collect();
    Ok((0..w.dim())
        .map(|c| {
            let v = &w.values()[c];
            hurst.alpha() * (0..cells).map(|j| weights[j] * (v[j + 1] - v[j])).sum::<f64>()
        })
        .collect())
}

/// `A^{t0}(w)` on the lattice `t0 + i step`, `i = 0..=n`, where `step` is the
/// history's own step. One coordinate per entry of the result.
pub fn history_operator_on_grid(w: &HistoryPath, hurst: &Hurst, n: usize) -> Vec<Vec<f64>> {
    (0..w.dim())
        .map(|c| {
            if hurst.is_brownian() {
                vec![0.0; n + 1]
            } else {
                history_response(&w.increments(c), *hurst, w.step(), n)
            }
        })
        .collect()
}

/// Discrete `H_H` norm: the supremum over sample pairs of
/// `|w(t) - w(s)| / (|t-s|^{(1-H)/2} (1 + |t| + |s|)^{1/2})`.
///
/// Quadratic in the number of samples; subsample long windows first.
pub fn hh_norm(w: &HistoryPath, hurst: f64) -> Result<f64> {
    super::hurst::check_hurst(hurst)?;
    let n = w.cells() + 1;
    if n < 2 {
        return Err(Error::input("H_H norm needs at least two samples"));
    }
    let expo = 0.5 * (1.0 - hurst);
    let times: Vec<f64> = (0..n).map(|j| w.time(j)).collect();
    let mut best: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let diff2: f64 = w.values().iter().map(|v| (v[j] - v[i]).powi(2)).sum();
            if diff2 == 0.0 {
                continue;
            }
            let (s, t) = (times[i], times[j]);
            let denom = (t - s).abs().powf(expo) * (1.0 + s.abs() + t.abs()).sqrt();
            best = best.max(diff2.sqrt() / denom);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{mvn_split, Grid, WienerRecord};
    use crate::quad;
    use approx::assert_relative_eq;

    fn triangle(step: f64) -> HistoryPath {
        let cells = (2.0 / step).round() as usize;
        let v: Vec<f64> = (0..=cells)
            .map(|j| {
                let u = -((cells - j) as f64) * step;
                (1.0 - (u + 1.0).abs()).max(0.0)
            })
            .collect();
        HistoryPath::new(step, vec![v]).unwrap()
    }

    #[test]
    fn rejects_nonzero_endpoint_and_nan() {
        assert!(HistoryPath::new(0.1, vec![vec![1.0, 0.5]]).is_err());
        assert!(HistoryPath::new(0.1, vec![vec![f64::NAN, 0.0]]).is_err());
        assert!(HistoryPath::new(0.1, vec![vec![0.3, 0.0]]).is_ok());
    }

    #[test]
    fn brownian_and_zero_give_zero() {
        let w = HistoryPath::wiener(StreamKey::root(1), 4.0, 0.01, 2);
        let bm = Hurst::new(0.5).unwrap();
        assert_eq!(history_operator(&w, &bm, 0.0, 1.3).unwrap(), vec![0.0, 0.0]);
        let zero = HistoryPath::zero(0.01, 400, 1);
        let h = Hurst::new(0.3).unwrap();
        assert_eq!(history_operator(&zero, &h, 0.0, 2.0).unwrap(), vec![0.0]);
        assert_eq!(history_operator(&w, &h, 1.0, 1.0).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn triangle_bump_matches_quadrature() {
        let h = Hurst::new(0.75).unwrap();
        let a = h.exponent();
        // oracle: dw = +du on [-2,-1], -du on [-1,0]
        let kernel = |u: f64| (1.0 - u).powf(a) - (-u).powf(a);
        let up = quad::integrate(kernel, -2.0, -1.0, 1e-13, 1e-13).unwrap();
        let down = quad::integrate(kernel, -1.0, 0.0, 1e-13, 1e-13).unwrap();
        let oracle = h.alpha() * (up - down);
        for &step in &[1.0 / 64.0, 1.0 / 640.0] {
            let v = history_operator(&triangle(step), &h, 0.0, 1.0).unwrap()[0];
            assert!((v - oracle).abs() < 1e-4, "step {step}: {v} vs {oracle}");
        }
    }

    #[test]
    fn linear_in_w() {
        let h = Hurst::new(0.3).unwrap();
        let w1 = HistoryPath::wiener(StreamKey::root(2), 3.0, 0.01, 1);
        let w2 = HistoryPath::wiener(StreamKey::root(3), 3.0, 0.01, 1);
        let sum: Vec<f64> = w1.values()[0].iter().zip(&w2.values()[0]).map(|(a, b)| a + b).collect();
        let w12 = HistoryPath::new(0.01, vec![sum]).unwrap();
        let a = history_operator(&w1, &h, 0.0, 0.7).unwrap()[0];
        let b = history_operator(&w2, &h, 0.0, 0.7).unwrap()[0];
        let c = history_operator(&w12, &h, 0.0, 0.7).unwrap()[0];
        assert_relative_eq!(a + b, c, epsilon = 1e-12, max_relative = 1e-12);
    }

    #[test]
    fn grid_version_matches_pointwise_and_record_history() {
        let hurst = Hurst::new(0.3).unwrap();
        let step = 0.02;
        let grid = Grid::new(0.0, step, 25).unwrap();
        let rec = WienerRecord::sample(StreamKey::root(4), &grid, 6.0, step, 1).unwrap();
        let w = HistoryPath::from_increments(step, &rec.history_increments);
        let on_grid = history_operator_on_grid(&w, &hurst, 25);
        let split = mvn_split(&rec, 0.3, &grid).unwrap();
        for i in [0usize, 1, 7, 25] {
            let point = history_operator(&w, &hurst, 0.0, i as f64 * step).unwrap()[0];
            assert!((on_grid[0][i] - point).abs() < 1e-9);
            assert!((on_grid[0][i] - split.history[0][i]).abs() < 1e-9);
        }
    }

    #[test]
    fn shift_recentres_and_preserves_window() {
        let w = HistoryPath::wiener(StreamKey::root(5), 1.0, 0.1, 1);
        let fresh = vec![vec![0.3, -0.1, 0.2]];
        let s = w.shifted(&fresh);
        assert_eq!(s.cells(), w.cells());
        assert_eq!(s.at_zero(), vec![0.0]);
        // last increments are the fresh ones
        let inc = s.increments(0);
        assert_relative_eq!(inc[9], 0.2, epsilon = 1e-15);
        assert_relative_eq!(inc[7], 0.3, epsilon = 1e-15);
        // old increments moved back by three cells
        let old = w.increments(0);
        assert_relative_eq!(inc[0], old[3], epsilon = 1e-14);
    }

    #[test]
    fn hh_norm_basics() {
        let zero = HistoryPath::zero(0.1, 20, 1);
        assert_eq!(hh_norm(&zero, 0.4).unwrap(), 0.0);
        let w = HistoryPath::wiener(StreamKey::root(6), 2.0, 0.05, 2);
        let n = hh_norm(&w, 0.4).unwrap();
        let scaled = HistoryPath::new(0.05, w.values().iter().map(|v| v.iter().map(|x| 2.5 * x).collect()).collect()).unwrap();
        assert_relative_eq!(hh_norm(&scaled, 0.4).unwrap(), 2.5 * n, max_relative = 1e-12);
        assert!(hh_norm(&HistoryPath::zero(0.1, 0, 1), 0.4).is_err());
    }

    #[test]
    fn hh_norm_stable_under_refinement() {
        // Brownian-bridge refinement of one Wiener path on [-8, 0]
        let coarse_step = 1.0 / 256.0;
        let w = HistoryPath::wiener(StreamKey::root(7), 8.0, coarse_step, 1);
        let mut rng = StreamKey::root(8).rng();
        let v = &w.values()[0];
        let mut fine = Vec::with_capacity(2 * v.len());
        for j in 0..v.len() - 1 {
            fine.push(v[j]);
            let mid = 0.5 * (v[j] + v[j + 1]) + (coarse_step / 4.0).sqrt() * rng.normal();
            fine.push(mid);
        }
        fine.push(0.0);
        let wf = HistoryPath::new(coarse_step / 2.0, vec![fine]).unwrap();
        for &h in &[0.3, 0.7] {
            let a = hh_norm(&w, h).unwrap();
            let b = hh_norm(&wf, h).unwrap();
            assert!(a.is_finite() && b >= a);
            assert!((b - a) / a < 0.05, "H={h}: {a} -> {b}");
        }
    }

    #[test]
    fn subsample_keeps_origin() {
        let w = HistoryPath::wiener(StreamKey::root(9), 1.0, 0.1, 1);
        let s = w.subsample(3);
        assert_eq!(s.at_zero(), vec![0.0]);
        assert_eq!(s.cells(), 3);
        assert_relative_eq!(s.values()[0][0], w.values()[0][1]);
    }
}
