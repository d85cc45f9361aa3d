//! Drifts given by samples on a uniform tensor grid.

use std::io::BufRead;
use std::path::Path;

use crate::{Error, Result};

/// Vector samples on the tensor grid `lo_i + j step_i`, `j < counts_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledGrid {
    lo: Vec<f64>,
    step: Vec<f64>,
    counts: Vec<usize>,
    /// point-major, `values[flat * dim + c]`; axis 0 varies slowest
    values: Vec<f64>,
}

impl SampledGrid {
    pub fn new(lo: Vec<f64>, step: Vec<f64>, counts: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let dim = lo.len();
        if dim == 0 || step.len() != dim || counts.len() != dim {
            return Err(Error::input("sampled grid axes are inconsistent"));
        }
        if step.iter().any(|s| !(*s > 0.0)) || counts.iter().any(|&n| n < 2) {
            return Err(Error::input("sampled grid needs positive steps and at least two points per axis"));
        }
        let total: usize = counts.iter().product();
        if values.len() != total * dim {
            return Err(Error::input(format!("expected {} sample values, got {}", total * dim, values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("sample values must be finite"));
        }
        Ok(Self { lo, step, counts, values })
    }

    /// Samples `f` on the grid.
    pub fn tabulate(lo: Vec<f64>, step: Vec<f64>, counts: Vec<usize>, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let dim = lo.len();
        let total: usize = counts.iter().product();
        let mut values = Vec::with_capacity(total * dim);
        let mut x = vec![0.0; dim];
        for flat in 0..total {
            let mut rem = flat;
            for a in (0..dim).rev() {
                x[a] = lo[a] + (rem % counts[a]) as f64 * step[a];
                rem /= counts[a];
            }
            values.extend(f(&x));
        }
        Self::new(lo, step, counts, values)
    }

    /// Reads `x_1..x_d,value_1..value_d` rows (one header line) covering a
    /// complete uniform tensor grid in any row order.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || lineno == 0 {
                continue;
            }
            let row = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::input(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
            rows.push(row);
        }
        Self::from_rows(&rows)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        if width == 0 || width % 2 != 0 || rows.iter().any(|r| r.len() != width) {
            return Err(Error::input("sample rows must have 2d equal-length columns"));
        }
        let dim = width / 2;
        let mut lo = Vec::with_capacity(dim);
        let mut step = Vec::with_capacity(dim);
        let mut counts = Vec::with_capacity(dim);
        for a in 0..dim {
            let mut coords: Vec<f64> = rows.iter().map(|r| r[a]).collect();
            coords.sort_by(f64::total_cmp);
            coords.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (1.0 + y.abs()));
            if coords.len() < 2 {
                return Err(Error::input("each axis needs at least two distinct coordinates"));
            }
            let s = (coords[coords.len() - 1] - coords[0]) / (coords.len() - 1) as f64;
            for (j, c) in coords.iter().enumerate() {
                if (coords[0] + j as f64 * s - c).abs() > 1e-9 * s {
                    return Err(Error::input(format!("axis {} is not uniformly spaced", a + 1)));
                }
            }
            lo.push(coords[0]);
            step.push(s);
            counts.push(coords.len());
        }
        let total: usize = counts.iter().product();
        if rows.len() != total {
            return Err(Error::input(format!("expected {total} grid rows, found {}", rows.len())));
        }
        let mut values = vec![f64::NAN; total * dim];
        for r in rows {
            let mut flat = 0;
            for a in 0..dim {
                let j = ((r[a] - lo[a]) / step[a]).round() as usize;
                flat = flat * counts[a] + j;
            }
            values[flat * dim..(flat + 1) * dim].copy_from_slice(&r[dim..]);
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::input("sample grid has duplicate or missing points"));
        }
        Self::new(lo, step, counts, values)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        (0..self.dim())
            .map(|a| (self.lo[a], self.lo[a] + (self.counts[a] - 1) as f64 * self.step[a]))
            .collect()
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| lambda * v).collect(),
            ..self.clone()
        }
    }

    fn value(&self, flat: usize, c: usize) -> f64 {
        self.values[flat * self.dim() + c]
    }

    /// Adds `P_eps f (x)` to `out`. For `eps > 0` this is the trapezoidal
    /// convolution with the kernel truncated at `8 sqrt(2 eps)`, normalised
    /// by the discrete kernel mass; `eps = 0` interpolates multilinearly.
    pub(crate) fn add_smoothed(&self, x: &[f64], eps: f64, out: &mut [f64]) -> Result<()> {
        let dim = self.dim();
        let radius = 8.0 * (2.0 * eps).sqrt();
        let bounds = self.bounds();
        // per-axis list of (index, weight)
        let mut axes: Vec<Vec<(usize, f64)>> = Vec::with_capacity(dim);
        for a in 0..dim {
            let (lo, hi) = bounds[a];
            if x[a] - radius < lo - 1e-12 || x[a] + radius > hi + 1e-12 {
                return Err(Error::Extrapolation(x.to_vec()));
            }
            let u = (x[a] - self.lo[a]) / self.step[a];
            let mut w = Vec::new();
            if eps == 0.0 {
                let j = (u.floor() as usize).min(self.counts[a] - 2);
                let frac = u - j as f64;
                w.push((j, 1.0 - frac));
                w.push((j + 1, frac));
            } else {
                let j0 = ((x[a] - radius - self.lo[a]) / self.step[a]).ceil().max(0.0) as usize;
                let j1 = (((x[a] + radius - self.lo[a]) / self.step[a]).floor() as usize).min(self.counts[a] - 1);
                let mut mass = 0.0;
                for j in j0..=j1 {
                    let y = self.lo[a] + j as f64 * self.step[a];
                    let g = (-(x[a] - y).powi(2) / (4.0 * eps)).exp();
                    mass += g;
                    w.push((j, g));
                }
                w.iter_mut().for_each(|p| p.1 /= mass);
            }
            axes.push(w);
        }
        let mut idx = vec![0usize; dim];
        loop {
            let mut flat = 0;
            let mut weight = 1.0;
            for a in 0..dim {
                let (j, g) = axes[a][idx[a]];
                flat = flat * self.counts[a] + j;
                weight *= g;
            }
            if weight != 0.0 {
                for (c, o) in out.iter_mut().enumerate() {
                    *o += weight * self.value(flat, c);
                }
            }
            // odometer
            let mut a = dim;
            loop {
                if a == 0 {
                    return Ok(());
                }
                a -= 1;
                idx[a] += 1;
                if idx[a] < axes[a].len() {
                    break;
                }
                idx[a] = 0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::repr::{heat_apply, DriftRepr};
    use std::sync::Arc;

    fn sampled(f: impl Fn(&[f64]) -> Vec<f64>, step: f64) -> DriftRepr {
        let n = (20.0 / step).round() as usize + 1;
        let g = SampledGrid::tabulate(vec![-10.0], vec![step], vec![n], f).unwrap();
        DriftRepr::Sampled { grid: Arc::new(g), eps: 0.0 }
    }

    #[test]
    fn interpolation_is_exact_on_nodes_and_linear_between() {
        let f = sampled(|x| vec![x[0] * x[0]], 0.5);
        assert!((f.eval(&[1.5]).unwrap()[0] - 2.25).abs() < 1e-12);
        assert!((f.eval(&[1.25]).unwrap()[0] - 0.5 * (1.0 + 2.25)).abs() < 1e-12);
        assert!(matches!(f.eval(&[10.5]), Err(Error::Extrapolation(_))));
    }

    #[test]
    fn smoothing_matches_closed_form() {
        let step = 0.01;
        let f = sampled(|x| vec![x[0].sin()], step);
        let exact = DriftRepr::sine(1, 1.0);
        for &(eps, x) in &[(0.01, 0.3), (0.2, -1.0)] {
            let a = heat_apply(&f, eps, &[x]).unwrap()[0];
            let b = heat_apply(&exact, eps, &[x]).unwrap()[0];
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
        assert!(matches!(heat_apply(&f, 1.0, &[9.0]), Err(Error::Extrapolation(_))));
    }

    #[test]
    fn constants_stay_constant() {
        let f = sampled(|_| vec![3.0], 0.1);
        let v = heat_apply(&f, 0.0007, &[0.123]).unwrap()[0];
        assert!((v - 3.0).abs() < 1e-13);
    }

    #[test]
    fn rows_roundtrip_any_order_2d() {
        let mut rows = Vec::new();
        for i in 0..4 {
            for j in 0..3 {
                let (x, y) = (i as f64 * 0.5, -1.0 + j as f64);
                rows.push(vec![x, y, x + y, x * y]);
            }
        }
        rows.reverse();
        let g = SampledGrid::from_rows(&rows).unwrap();
        assert_eq!(g.bounds(), vec![(0.0, 1.5), (-1.0, 1.0)]);
        let f = DriftRepr::Sampled { grid: Arc::new(g), eps: 0.0 };
        let v = f.eval(&[1.0, 0.0]).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-12 && v[1].abs() < 1e-12);
        rows.pop();
        assert!(SampledGrid::from_rows(&rows).is_err());
    }
}
