//! Fractional Brownian motion: sampling, history/innovation split, history
//! operator and the `H_H` norm.

mod circulant;
mod conv;
mod history;
mod hurst;
mod mvn;

pub use circulant::{sample_fbm_circulant, CirculantSampler};
pub use conv::Convolver;
pub use history::{history_operator, history_operator_on_grid, hh_norm, HistoryPath};
pub use hurst::Hurst;
pub use mvn::{
    conditional_mean, mvn_split, MvnSplitter, NoiseSplit, SplitMeta, WienerRecord, DEFAULT_HISTORY_FACTOR,
};

use serde::{Deserialize, Serialize};

use crate::io::{indexed_columns, Table};
use crate::rng::StreamKey;
use crate::{Error, Result};

/// Uniform time grid `t_i = t0 + i h`, `i = 0..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub t0: f64,
    pub h: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(t0: f64, h: f64, n: usize) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::input(format!("grid step must be positive, got {h}")));
        }
        if n == 0 {
            return Err(Error::input("grid needs at least one step"));
        }
        if !t0.is_finite() {
            return Err(Error::input("grid origin must be finite"));
        }
        Ok(Self { t0, h, n })
    }

    /// Grid covering `[t0, t_end]` with step `h`; `t_end - t0` is rounded to
    /// a whole number of steps.
    pub fn spanning(t0: f64, t_end: f64, h: f64) -> Result<Self> {
        let n = ((t_end - t0) / h).round();
        if !(n >= 1.0) {
            return Err(Error::input(format!("horizon [{t0}, {t_end}] shorter than one step {h}")));
        }
        Self::new(t0, h, n as usize)
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.h
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.n)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n).map(|i| self.time(i))
    }

    /// Number of fine steps per step of `coarse`, when this grid refines it.
    pub fn refinement_of(&self, coarse: &Grid) -> Option<usize> {
        let ratio = coarse.h / self.h;
        let r = ratio.round();
        if r < 1.0 || (ratio - r).abs() > 1e-9 * ratio || (self.t0 - coarse.t0).abs() > 1e-12 * (1.0 + coarse.t0.abs()) {
            return None;
        }
        let r = r as usize;
        (self.n >= coarse.n * r).then_some(r)
    }
}

/// Covariance of standard fBm, `½(|s|^{2H} + |t|^{2H} - |t-s|^{2H})`.
pub fn fbm_covariance(s: f64, t: f64, hurst: f64) -> Result<f64> {
    hurst::check_hurst(hurst)?;
    let p = 2.0 * hurst;
    Ok(0.5 * (s.abs().powf(p) + t.abs().powf(p) - (t - s).abs().powf(p)))
}

/// Autocovariance of unit-step fractional Gaussian noise at lag `k`.
pub(crate) fn fgn_autocovariance(k: f64, hurst: f64) -> f64 {
    let p = 2.0 * hurst;
    0.5 * ((k + 1.0).abs().powf(p) - 2.0 * k.abs().powf(p) + (k - 1.0).abs().powf(p))
}

/// Where an [`FbmPath`] came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NoiseSource {
    Circulant { key: StreamKey },
    Wiener { key: StreamKey },
    Deterministic,
}

/// A sampled fBm path, `values[c][i] = B^c(t_i) - B^c(t0)`.
///
/// All consumers work with increments from `t0`, so the path is stored with
/// `B(t0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FbmPath {
    pub grid: Grid,
    pub hurst: f64,
    pub values: Vec<Vec<f64>>,
    pub source: NoiseSource,
}

impl FbmPath {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// The identically-zero driving signal.
    pub fn zero(grid: Grid, hurst: f64, dim: usize) -> Self {
        Self {
            grid,
            hurst,
            values: vec![vec![0.0; grid.n + 1]; dim],
            source: NoiseSource::Deterministic,
        }
    }

    pub fn from_increments(grid: Grid, hurst: f64, increments: Vec<Vec<f64>>, source: NoiseSource) -> Self {
        let values = increments
            .into_iter()
            .map(|inc| {
                let mut v = Vec::with_capacity(inc.len() + 1);
                let mut acc = 0.0;
                v.push(0.0);
                for d in inc {
                    acc += d;
                    v.push(acc);
                }
                v
            })
            .collect();
        Self { grid, hurst, values, source }
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        self.values.iter().map(|c| c[i]).collect()
    }

    /// CSV `t,B_1..B_d`.
    pub fn to_table(&self) -> Table {
        let mut header = vec!["t".to_string()];
        header.extend(indexed_columns("B", self.dim()));
        let mut t = Table::new(header);
        for i in 0..=self.grid.n {
            let mut row = vec![self.grid.time(i)];
            row.extend(self.point(i));
            t.push(&row);
        }
        t
    }

    /// Increments on a coarser grid that this path refines.
    pub fn coarse_increments(&self, coarse: &Grid) -> Result<Vec<Vec<f64>>> {
        let r = self
            .grid
            .refinement_of(coarse)
            .ok_or_else(|| Error::input("noise grid does not refine the solver grid"))?;
        Ok(self
            .values
            .iter()
            .map(|c| (0..coarse.n).map(|i| c[(i + 1) * r] - c[i * r]).collect())
            .collect())
    }
}
