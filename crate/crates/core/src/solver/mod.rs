//! Explicit Euler integration of `dX = F(X) dt + b^k(X) dt + dB` and
//! ensemble statistics of the solutions.

mod cauchy;
mod estimates;

use serde::{Deserialize, Serialize};

pub use cauchy::{drift_cauchy, CauchyRow, CauchyTable};
pub use estimates::{
    conditional_seminorm, holder_seminorm, moment_curve, trend_test, MomentCurve, Process, SeminormEstimate,
    TrendTest,
};

use crate::drift::{DissipativeDrift, MollifiedDrift};
use crate::io::{indexed_columns, Table};
use crate::noise::{CirculantSampler, FbmPath, Grid};
use crate::parallel::try_map_indexed;
use crate::rng::StreamKey;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub t0: f64,
    pub h: f64,
    /// final time `T`
    pub horizon: f64,
    /// mollification level; `None` uses the drift as given
    pub k: Option<u32>,
    /// moment order
    pub m: f64,
    pub ensemble: usize,
    pub seed: u64,
    /// noise is sampled at `h / noise_refine` and coarsened
    pub noise_refine: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            t0: 0.0,
            h: 1.0 / 256.0,
            horizon: 1.0,
            k: None,
            m: 2.0,
            ensemble: 100,
            seed: 0,
            noise_refine: 1,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h <= 1.0) {
            return Err(Error::input("step h must lie in (0, 1]"));
        }
        if !(self.horizon > self.t0) {
            return Err(Error::input("horizon must exceed t0"));
        }
        if self.ensemble == 0 {
            return Err(Error::input("ensemble must be >= 1"));
        }
        if !(self.m >= 2.0) {
            return Err(Error::input("moment order must be >= 2"));
        }
        if self.noise_refine == 0 {
            return Err(Error::input("noise_refine must be >= 1"));
        }
        if self.k == Some(0) {
            return Err(Error::input("mollification level must be >= 1"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::spanning(self.t0, self.horizon, self.h)
    }

    pub fn noise_grid(&self) -> Result<Grid> {
        let g = self.grid()?;
        Grid::new(g.t0, g.h / self.noise_refine as f64, g.n * self.noise_refine)
    }

    pub fn root_key(&self) -> StreamKey {
        StreamKey::root(self.seed)
    }
}

/// A solution path with its drift process and driving noise.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: Grid,
    pub dim: usize,
    pub x0: Vec<f64>,
    /// `x[i * dim + c]`
    pub x: Vec<f64>,
    /// accumulated singular drift `K`, same layout
    pub k: Vec<f64>,
    /// driving noise `B_i - B_0`, same layout
    pub b: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.grid.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x_at(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    pub fn k_at(&self, i: usize) -> &[f64] {
        &self.k[i * self.dim..(i + 1) * self.dim]
    }

    pub fn b_at(&self, i: usize) -> &[f64] {
        &self.b[i * self.dim..(i + 1) * self.dim]
    }

    pub fn x_final(&self) -> &[f64] {
        self.x_at(self.grid.n)
    }

    /// Largest deviation from `X_i = x0 + Σ_{j<i} h F(X_j) + K_i + B_i - B_0`.
    pub fn identity_residual(&self, f: &DissipativeDrift) -> f64 {
        let d = self.dim;
        let mut acc = vec![0.0; d];
        let mut fx = vec![0.0; d];
        let mut worst: f64 = 0.0;
        for i in 0..self.len() {
            for c in 0..d {
                let rhs = self.x0[c] + acc[c] + self.k_at(i)[c] + self.b_at(i)[c];
                worst = worst.max((self.x_at(i)[c] - rhs).abs());
            }
            f.field.eval_into(self.x_at(i), &mut fx);
            for c in 0..d {
                acc[c] += self.grid.h * fx[c];
            }
        }
        worst
    }

    /// CSV with columns `t,X_1..X_d,K_1..K_d,B_1..B_d`.
    pub fn to_table(&self) -> Table {
        let mut header = vec!["t".to_string()];
        header.extend(indexed_columns("X", self.dim));
        header.extend(indexed_columns("K", self.dim));
        header.extend(indexed_columns("B", self.dim));
        let mut t = Table::new(header);
        let mut row = Vec::with_capacity(1 + 3 * self.dim);
        for i in 0..self.len() {
            row.clear();
            row.push(self.grid.time(i));
            row.extend_from_slice(self.x_at(i));
            row.extend_from_slice(self.k_at(i));
            row.extend_from_slice(self.b_at(i));
            t.push(&row);
        }
        t
    }
}

/// One explicit Euler step; returns `false` if the new state is not finite.
#[inline]
pub(crate) fn euler_step(
    f: &DissipativeDrift,
    bk: &MollifiedDrift,
    h: f64,
    x: &mut [f64],
    k: &mut [f64],
    db: &[f64],
    fx: &mut [f64],
    bx: &mut [f64],
) -> Result<bool> {
    f.field.eval_into(x, fx);
    bx.fill(0.0);
    if !bk.is_zero() {
        bk.add_into(x, bx)?;
    }
    let mut finite = true;
    for c in 0..x.len() {
        x[c] += h * fx[c] + h * bx[c] + db[c];
        k[c] += h * bx[c];
        finite &= x[c].is_finite();
    }
    Ok(finite)
}

/// Integrates on `grid` driven by the given increments (`increments[c][i]`
/// over cell `i`).
pub fn integrate_increments(
    x0: &[f64],
    f: &DissipativeDrift,
    bk: &MollifiedDrift,
    grid: Grid,
    increments: &[Vec<f64>],
) -> Result<Trajectory> {
    let d = x0.len();
    if f.dim() != d || bk.dim() != d || increments.len() != d {
        return Err(Error::input("dimension mismatch between x0, drifts and noise"));
    }
    if increments.iter().any(|v| v.len() != grid.n) {
        return Err(Error::input("noise increments do not match the grid"));
    }
    let n = grid.n;
    let mut xs = Vec::with_capacity((n + 1) * d);
    let mut ks = Vec::with_capacity((n + 1) * d);
    let mut bs = Vec::with_capacity((n + 1) * d);
    let mut x = x0.to_vec();
    let mut k = vec![0.0; d];
    let mut b = vec![0.0; d];
    let mut db = vec![0.0; d];
    let mut fx = vec![0.0; d];
    let mut bx = vec![0.0; d];
    xs.extend_from_slice(&x);
    ks.extend_from_slice(&k);
    bs.extend_from_slice(&b);
    for i in 0..n {
        for c in 0..d {
            db[c] = increments[c][i];
            b[c] += db[c];
        }
        if !euler_step(f, bk, grid.h, &mut x, &mut k, &db, &mut fx, &mut bx)? {
            return Err(Error::Divergence { index: i + 1 });
        }
        xs.extend_from_slice(&x);
        ks.extend_from_slice(&k);
        bs.extend_from_slice(&b);
    }
    Ok(Trajectory { grid, dim: d, x0: x0.to_vec(), x: xs, k: ks, b: bs })
}

/// Explicit Euler on `cfg`'s grid; `noise` may live on a refinement of it.
pub fn integrate(
    x0: &[f64],
    f: &DissipativeDrift,
    bk: &MollifiedDrift,
    noise: &FbmPath,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let incs = noise.coarse_increments(&grid)?;
    integrate_increments(x0, f, bk, grid, &incs)
}

/// The comparison process `dU = -U dt + dB`.
pub fn ou_reference(x0: &[f64], noise: &FbmPath, cfg: &SolverConfig) -> Result<Trajectory> {
    let d = x0.len();
    integrate(x0, &DissipativeDrift::damping(d, 1.0), &MollifiedDrift::zero(d), noise, cfg)
}

/// Circulant fBm noise for path `p` of an ensemble, on `cfg`'s noise grid.
pub fn ensemble_noise(sampler: &CirculantSampler, cfg: &SolverConfig, dim: usize, p: usize) -> Result<FbmPath> {
    Ok(sampler.path(&cfg.noise_grid()?, dim, cfg.root_key().child(p as u64)))
}

/// `cfg.ensemble` independent solutions, path `p` driven by the stream
/// `seed.child(p)`; results do not depend on the thread count.
pub fn simulate_ensemble(
    x0: &[f64],
    f: &DissipativeDrift,
    bk: &MollifiedDrift,
    hurst: f64,
    cfg: &SolverConfig,
) -> Result<Vec<Trajectory>> {
    cfg.validate()?;
    let d = x0.len();
    let noise_grid = cfg.noise_grid()?;
    let sampler = CirculantSampler::new(noise_grid.n, hurst)?;
    try_map_indexed(cfg.ensemble, |p| {
        let noise = ensemble_noise(&sampler, cfg, d, p)?;
        integrate(x0, f, bk, &noise, cfg)
    })
}
