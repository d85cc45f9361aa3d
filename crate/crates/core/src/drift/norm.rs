//! Grid estimates of Besov–Hölder norms.

use serde::{Deserialize, Serialize};

use super::repr::DriftRepr;
use crate::{Error, Result};

/// `{2^0, 2^-1, ..., 2^-levels}`.
pub fn dyadic_eps(levels: u32) -> Vec<f64> {
    (0..=levels).map(|j| 2f64.powi(-(j as i32))).collect()
}

/// Tensor grid of `points` nodes per axis on `[lo, hi]^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub dim: usize,
}

impl AuditGrid {
    pub fn new(lo: f64, hi: f64, points: usize, dim: usize) -> Result<Self> {
        if !(lo < hi) || points < 2 || dim == 0 {
            return Err(Error::input("audit grid needs lo < hi, at least two points and d >= 1"));
        }
        Ok(Self { lo, hi, points, dim })
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.points - 1) as f64
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        let mut rem = flat;
        for a in (0..self.dim).rev() {
            x[a] = self.lo + (rem % self.points) as f64 * self.spacing();
            rem /= self.points;
        }
        x
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }
}

/// A discrete-sup norm estimate; always a lower bound of the true norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub gamma: f64,
    /// `‖b‖_{C^γ}` estimate (for γ ∈ (0,1]: sup norm plus seminorm)
    pub value: f64,
    /// sup norm over the grid, when `b` is a function
    pub sup: Option<f64>,
    /// Hölder seminorm, for γ ∈ (0,1]
    pub seminorm: Option<f64>,
    /// smoothing time attaining the max, for γ < 0
    pub argmax_eps: Option<f64>,
    pub lower_bound: bool,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Estimates `‖b‖_{C^γ}` by discrete suprema over `eps_set` and `grid`.
pub fn besov_norm(b: &DriftRepr, gamma: f64, eps_set: &[f64], grid: &AuditGrid) -> Result<NormEstimate> {
    if gamma > 1.0 || gamma.is_nan() {
        return Err(Error::UnsupportedRegularity(gamma));
    }
    if grid.dim != b.dim() {
        return Err(Error::input("audit grid dimension differs from the drift dimension"));
    }
    if gamma < 0.0 {
        if eps_set.is_empty() || eps_set.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
            return Err(Error::input("smoothing times must lie in (0, 1]"));
        }
        let mut best = 0.0;
        let mut arg = eps_set[0];
        for &eps in eps_set {
            let smooth = b.heat(eps)?;
            let weight = eps.powf(-gamma / 2.0);
            for x in grid.points() {
                let v = weight * norm2(&smooth.eval(&x)?);
                if v > best {
                    best = v;
                    arg = eps;
                }
            }
        }
        return Ok(NormEstimate {
            gamma,
            value: best,
            sup: None,
            seminorm: None,
            argmax_eps: Some(arg),
            lower_bound: true,
        });
    }
    if !b.is_function() {
        return Err(Error::input("nonnegative regularity requires a function-valued drift"));
    }
    let xs: Vec<Vec<f64>> = grid.points().collect();
    let vals: Vec<Vec<f64>> = xs.iter().map(|x| b.eval(x)).collect::<Result<_>>()?;
    let sup = vals.iter().map(|v| norm2(v)).fold(0.0, f64::max);
    if gamma == 0.0 {
        return Ok(NormEstimate {
            gamma,
            value: sup,
            sup: Some(sup),
            seminorm: None,
            argmax_eps: None,
            lower_bound: true,
        });
    }
    let mut semi: f64 = 0.0;
    for i in 0..xs.len() {
        for j in (i + 1)..xs.len() {
            let dx: Vec<f64> = xs[i].iter().zip(&xs[j]).map(|(a, b)| a - b).collect();
            let dv: Vec<f64> = vals[i].iter().zip(&vals[j]).map(|(a, b)| a - b).collect();
            semi = semi.max(norm2(&dv) / norm2(&dx).powf(gamma));
        }
    }
    Ok(NormEstimate {
        gamma,
        value: sup + semi,
        sup: Some(sup),
        seminorm: Some(semi),
        argmax_eps: None,
        lower_bound: true,
    })
}
