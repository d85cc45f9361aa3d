//! Mandelbrot–Van Ness construction of fBm from a recorded Wiener path and
//! its split into history and innovation at `t0`.
//!
//! Everything lives on one lattice of Wiener cells of width `h`. A cell
//! `[u_j, u_j + h]` contributes to `B_t` with the exact cell average of the
//! kernel `(t-u)^{H-1/2}`, which keeps the innovation finite for `H < 1/2`.
//! With `κ_l` the averaged weights (see [`Hurst::cell_weights`]):
//!
//! ```text
//! history(t_i)    = α h^a Σ_{j<0}     (κ_{i-j} - κ_{-j}) ΔW_j
//! innovation(t_i) = α h^a Σ_{0≤j<i}    κ_{i-j}           ΔW_j
//! ```

use serde::{Deserialize, Serialize};

use super::conv::Convolver;
use super::{FbmPath, Grid, Hurst, NoiseSource};
use crate::io::{indexed_columns, Table};
use crate::rng::StreamKey;
use crate::{Error, Result};

/// Default history window as a multiple of the forward horizon.
pub const DEFAULT_HISTORY_FACTOR: f64 = 64.0;

/// Recorded Wiener increments on `[t0 - T_hist, t0]` and `[t0, T]`.
///
/// `history_increments[c]` is chronological: its last entry is the cell
/// ending at `t0`.
#[derive(Debug, Clone, PartialEq)]
pub struct WienerRecord {
    pub key: StreamKey,
    pub t0: f64,
    pub h_hist: f64,
    pub h_fwd: f64,
    pub history_increments: Vec<Vec<f64>>,
    pub forward_increments: Vec<Vec<f64>>,
}

impl WienerRecord {
    /// Draws a record; history and forward increments use separate child
    /// streams of `key`, so [`WienerRecord::resample_forward`] keeps the past.
    pub fn sample(key: StreamKey, grid: &Grid, t_hist: f64, h_hist: f64, dim: usize) -> Result<Self> {
        let ratio = h_hist / grid.h;
        if !(ratio >= 1.0 - 1e-12) || (ratio - ratio.round()).abs() > 1e-9 * ratio {
            return Err(Error::input(format!(
                "history step {h_hist} must be a whole multiple of the forward step {}",
                grid.h
            )));
        }
        if !(t_hist >= 0.0) {
            return Err(Error::input("history window must be nonnegative"));
        }
        let n_hist = (t_hist / h_hist).round() as usize;
        let mut past = key.child(0).rng();
        let history_increments = (0..dim)
            .map(|_| {
                let mut v = vec![0.0; n_hist];
                past.fill_normal(&mut v, h_hist);
                v
            })
            .collect();
        let mut rec = Self {
            key,
            t0: grid.t0,
            h_hist,
            h_fwd: grid.h,
            history_increments,
            forward_increments: Vec::new(),
        };
        rec.forward_increments = Self::draw_forward(key.child(1), grid.n, grid.h, dim);
        Ok(rec)
    }

    fn draw_forward(key: StreamKey, n: usize, h: f64, dim: usize) -> Vec<Vec<f64>> {
        let mut rng = key.rng();
        (0..dim)
            .map(|_| {
                let mut v = vec![0.0; n];
                rng.fill_normal(&mut v, h);
                v
            })
            .collect()
    }

    /// Same past, fresh forward increments from `key`.
    pub fn resample_forward(&self, key: StreamKey) -> Self {
        let n = self.forward_len();
        Self {
            forward_increments: Self::draw_forward(key, n, self.h_fwd, self.dim()),
            key,
            ..self.clone()
        }
    }

    /// Keeps the first `keep` forward increments (the information up to
    /// `t0 + keep h_fwd`) and redraws the rest from `key`.
    pub fn resample_after(&self, keep: usize, key: StreamKey) -> Self {
        let n = self.forward_len();
        let keep = keep.min(n);
        let fresh = Self::draw_forward(key, n - keep, self.h_fwd, self.dim());
        let forward_increments = self
            .forward_increments
            .iter()
            .zip(fresh)
            .map(|(old, new)| old[..keep].iter().copied().chain(new).collect())
            .collect();
        Self {
            forward_increments,
            key,
            ..self.clone()
        }
    }

    pub fn dim(&self) -> usize {
        self.forward_increments.len().max(self.history_increments.len())
    }

    pub fn forward_len(&self) -> usize {
        self.forward_increments.first().map_or(0, Vec::len)
    }

    pub fn history_len(&self) -> usize {
        self.history_increments.first().map_or(0, Vec::len)
    }

    pub fn t_hist(&self) -> f64 {
        self.history_len() as f64 * self.h_hist
    }

    pub fn window_start(&self) -> f64 {
        self.t0 - self.t_hist()
    }

    pub fn forward_grid(&self) -> Grid {
        Grid {
            t0: self.t0,
            h: self.h_fwd,
            n: self.forward_len(),
        }
    }

    fn ratio(&self) -> usize {
        (self.h_hist / self.h_fwd).round() as usize
    }

    /// History increments of coordinate `c` spread onto the forward lattice.
    ///
    /// Splitting a coarse increment evenly over its sub-cells reproduces the
    /// coarse cell average of the kernel exactly.
    pub fn fine_history(&self, c: usize) -> Vec<f64> {
        let r = self.ratio();
        let src = &self.history_increments[c];
        if r == 1 {
            return src.clone();
        }
        let mut out = Vec::with_capacity(src.len() * r);
        for &dw in src {
            out.extend(std::iter::repeat_n(dw / r as f64, r));
        }
        out
    }

    /// All increments of coordinate `c` on the forward lattice, chronological.
    pub fn lattice(&self, c: usize) -> Vec<f64> {
        let mut v = self.fine_history(c);
        v.extend_from_slice(&self.forward_increments[c]);
        v
    }
}

/// Metadata carried by a split: constants and the truncation bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitMeta {
    pub hurst: f64,
    pub alpha_h: f64,
    pub t_hist: f64,
    /// Bound on the standard deviation of the discarded history tail at `T`.
    pub truncation_sd_bound: f64,
    pub tail_tolerance: f64,
    pub tail_exceeds_tolerance: bool,
}

/// History and innovation of `B_t - B_{t0}` on the forward grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSplit {
    pub grid: Grid,
    pub history: Vec<Vec<f64>>,
    pub innovation: Vec<Vec<f64>>,
    pub meta: SplitMeta,
    pub key: StreamKey,
}

impl NoiseSplit {
    pub fn dim(&self) -> usize {
        self.history.len()
    }

    /// `B_t - B_{t0} = history + innovation`, summed entrywise.
    pub fn fbm(&self) -> FbmPath {
        let values = self
            .history
            .iter()
            .zip(&self.innovation)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        FbmPath {
            grid: self.grid,
            hurst: self.meta.hurst,
            values,
            source: NoiseSource::Wiener { key: self.key },
        }
    }

    pub fn innovation_path(&self) -> FbmPath {
        FbmPath {
            grid: self.grid,
            hurst: self.meta.hurst,
            values: self.innovation.clone(),
            source: NoiseSource::Wiener { key: self.key },
        }
    }

    /// CSV `t,B_1..B_d,Bbar_1..Bbar_d,Btilde_1..Btilde_d` with `B` the sum
    /// of history `Bbar` and innovation `Btilde`.
    pub fn to_table(&self) -> Table {
        let d = self.dim();
        let mut header = vec!["t".to_string()];
        header.extend(indexed_columns("B", d));
        header.extend(indexed_columns("Bbar", d));
        header.extend(indexed_columns("Btilde", d));
        let mut t = Table::new(header);
        for i in 0..=self.grid.n {
            let mut row = vec![self.grid.time(i)];
            row.extend((0..d).map(|c| self.history[c][i] + self.innovation[c][i]));
            row.extend((0..d).map(|c| self.history[c][i]));
            row.extend((0..d).map(|c| self.innovation[c][i]));
            t.push(&row);
        }
        t
    }
}

/// Precomputed split for a fixed geometry: Hurst index, lattice step,
/// number of past cells and forward steps. Reused across an ensemble.
#[derive(Debug, Clone)]
pub struct MvnSplitter {
    hurst: Hurst,
    h: f64,
    n_past: usize,
    n: usize,
    innovation: Convolver,
    history: Convolver,
    tail_tolerance: f64,
}

impl MvnSplitter {
    pub fn new(hurst: Hurst, h: f64, n_past: usize, n: usize) -> Self {
        let scale = hurst.alpha() * h.powf(hurst.exponent());
        let kappa = hurst.cell_weights(n_past + n + 1);
        // innovation(i) = c[i-1] with c = K * ΔW, K[k] = scale κ_{k+1}
        let innov_kernel: Vec<f64> = kappa[..n].iter().map(|k| scale * k).collect();
        let innovation = Convolver::new(innov_kernel, n, 0..n);
        // history increments: E[k] = scale (κ_{k+1} - κ_k), E[0] unused
        let mut hist_kernel = vec![0.0; n_past + n];
        for (k, e) in hist_kernel.iter_mut().enumerate().skip(1) {
            *e = scale * (kappa[k] - kappa[k - 1]);
        }
        let history = Convolver::new(hist_kernel, n_past, n_past..n_past + n);
        Self {
            hurst,
            h,
            n_past,
            n,
            innovation,
            history,
            tail_tolerance: f64::INFINITY,
        }
    }

    /// Geometry matching a record's forward lattice.
    pub fn for_record(hurst: Hurst, rec: &WienerRecord) -> Self {
        let r = (rec.h_hist / rec.h_fwd).round() as usize;
        Self::new(hurst, rec.h_fwd, rec.history_len() * r, rec.forward_len())
    }

    pub fn with_tail_tolerance(mut self, tol: f64) -> Self {
        self.tail_tolerance = tol;
        self
    }

    pub fn hurst(&self) -> Hurst {
        self.hurst
    }

    /// Innovation `B̃(t_i)`, `i = 0..=n`, from forward increments.
    pub fn innovation(&self, forward: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n + 1);
        out.push(0.0);
        out.extend(self.innovation.apply(&forward[..self.n]));
        out
    }

    /// History `B̄(t_i)`, `i = 0..=n`, from chronological past increments.
    pub fn history(&self, past: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n + 1);
        out.push(0.0);
        if self.hurst.is_brownian() || past.is_empty() {
            out.resize(self.n + 1, 0.0);
            return out;
        }
        assert_eq!(past.len(), self.n_past, "past window length mismatch");
        let mut acc = 0.0;
        for d in self.history.apply(past) {
            acc += d;
            out.push(acc);
        }
        out
    }

    pub fn meta(&self) -> SplitMeta {
        let t_hist = self.n_past as f64 * self.h;
        let horizon = self.n as f64 * self.h;
        let bound = if t_hist > 0.0 {
            self.hurst.tail_sd_bound(horizon, t_hist)
        } else if self.hurst.is_brownian() {
            0.0
        } else {
            f64::INFINITY
        };
        SplitMeta {
            hurst: self.hurst.value(),
            alpha_h: self.hurst.alpha(),
            t_hist,
            truncation_sd_bound: bound,
            tail_tolerance: self.tail_tolerance,
            tail_exceeds_tolerance: bound > self.tail_tolerance,
        }
    }

    pub fn split(&self, rec: &WienerRecord) -> NoiseSplit {
        let dim = rec.dim();
        let mut history = Vec::with_capacity(dim);
        let mut innovation = Vec::with_capacity(dim);
        for c in 0..dim {
            history.push(self.history(&rec.fine_history(c)));
            innovation.push(self.innovation(&rec.forward_increments[c]));
        }
        NoiseSplit {
            grid: rec.forward_grid(),
            history,
            innovation,
            meta: self.meta(),
            key: rec.key,
        }
    }
}

/// Splits `B_t - B_{t0}` on `grid` into history and innovation.
///
/// `grid` must coincide with the record's forward lattice.
pub fn mvn_split(rec: &WienerRecord, hurst: f64, grid: &Grid) -> Result<NoiseSplit> {
    let hurst = Hurst::new(hurst)?;
    let fwd = rec.forward_grid();
    if (fwd.h - grid.h).abs() > 1e-12 * grid.h || fwd.n != grid.n || (fwd.t0 - grid.t0).abs() > 1e-12 {
        return Err(Error::input("split grid must equal the record's forward lattice"));
    }
    Ok(MvnSplitter::for_record(hurst, rec).split(rec))
}

fn lattice_index(rec: &WienerRecord, t: f64) -> Result<usize> {
    let start = rec.window_start();
    if t < start - 1e-12 * (1.0 + start.abs()) {
        return Err(Error::Window { time: t, window_start: start });
    }
    let pos = (t - start) / rec.h_fwd;
    let k = pos.round();
    if (pos - k).abs() > 1e-6 {
        return Err(Error::input(format!("time {t} is not on the record lattice")));
    }
    let total = rec.history_len() * rec.ratio() + rec.forward_len();
    if k as usize > total {
        return Err(Error::input(format!("time {t} lies after the recorded horizon")));
    }
    Ok(k as usize)
}

/// Conditional expectation `E^s B_t` (with `B_{t0} = 0`), computed from the
/// increments up to `s` only:
///
/// `B_s + α Σ_{u<s} ((t-u)^{H-1/2} - (s-u)^{H-1/2}) ΔW_u`.
pub fn conditional_mean(rec: &WienerRecord, hurst: f64, s: f64, t: f64) -> Result<Vec<f64>> {
    let hurst = Hurst::new(hurst)?;
    if t < s {
        return Err(Error::input("conditional mean needs t >= s"));
    }
    let ks = lattice_index(rec, s)?;
    let kt = lattice_index(rec, t)?;
    let k0 = rec.history_len() * rec.ratio();
    let kappa = hurst.cell_weights(kt + 1);
    let scale = hurst.alpha() * rec.h_fwd.powf(hurst.exponent());
    // S(i) = scale Σ_{j<i} κ_{i-j} L_j
    let s_at = |lat: &[f64], i: usize| -> f64 { (0..i).map(|j| kappa[i - j - 1] * lat[j]).sum::<f64>() * scale };
    let mut out = Vec::with_capacity(rec.dim());
    for c in 0..rec.dim() {
        let lat = rec.lattice(c);
        let b_s = s_at(&lat, ks) - s_at(&lat, k0);
        let hist: f64 = if hurst.is_brownian() {
            0.0
        } else {
            (0..ks)
                .map(|j| (kappa[kt - j - 1] - kappa[ks - j - 1]) * lat[j])
                .sum::<f64>()
                * scale
        };
        out.push(b_s + hist);
    }
    Ok(out)
}

/// History response `Σ_{j<0} scale (κ_{i-j} - κ_{-j}) past_j`, `i = 0..=n`,
/// for a chronological past on a lattice of step `h`.
pub(crate) fn history_response(past: &[f64], hurst: Hurst, h: f64, n: usize) -> Vec<f64> {
    MvnSplitter::new(hurst, h, past.len(), n).history(past)
}
