//! Browser bindings for three interactive views: an fBm path split into
//! history and innovation, the shared-noise coupling curve for
//! `b = λ sin`, and a histogram of the invariant measure.
//!
//! The `*_view` functions are plain Rust so they can be tested natively;
//! the exported wrappers only convert errors.

use wasm_bindgen::prelude::*;

use fbmlab::drift::{DissipativeDrift, DriftRepr, MollifiedDrift, SingularDrift};
use fbmlab::longtime::{couple, krylov_bogoliubov, CouplingConfig, EnhancedConfig, Evolver};
use fbmlab::noise::{mvn_split, Grid, WienerRecord, DEFAULT_HISTORY_FACTOR};
use fbmlab::rng::StreamKey;
use fbmlab::{Error, Result};

const MAX_STEPS: usize = 1 << 14;
const MAX_PATHS: usize = 2000;
const MAX_SAMPLES: usize = 20_000;

fn sine_drift(lambda: f64) -> Result<MollifiedDrift> {
    let b = SingularDrift::new(DriftRepr::sine(1, lambda), 1.0, None)?;
    MollifiedDrift::unmollified(&b)
}

fn check(ok: bool, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Input(msg.to_string()))
    }
}

#[wasm_bindgen]
pub struct SplitView {
    t: Vec<f64>,
    fbm: Vec<f64>,
    history: Vec<f64>,
    innovation: Vec<f64>,
    alpha_h: f64,
    truncation_sd_bound: f64,
}

#[wasm_bindgen]
impl SplitView {
    #[wasm_bindgen(getter)]
    pub fn t(&self) -> Vec<f64> {
        self.t.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn fbm(&self) -> Vec<f64> {
        self.fbm.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn history(&self) -> Vec<f64> {
        self.history.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn innovation(&self) -> Vec<f64> {
        self.innovation.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn alpha_h(&self) -> f64 {
        self.alpha_h
    }

    #[wasm_bindgen(getter)]
    pub fn truncation_sd_bound(&self) -> f64 {
        self.truncation_sd_bound
    }
}

/// One-dimensional fBm on `[0, n h]` from a recorded Wiener path, split at
/// `t = 0` into the part driven by the past and the fresh innovation.
pub fn split_view(hurst: f64, n: usize, h: f64, seed: u32) -> Result<SplitView> {
    check(n >= 1 && n <= MAX_STEPS, "n must lie in [1, 16384]")?;
    let grid = Grid::new(0.0, h, n)?;
    let rec = WienerRecord::sample(StreamKey::root(seed as u64), &grid, DEFAULT_HISTORY_FACTOR * n as f64 * h, h, 1)?;
    let sp = mvn_split(&rec, hurst, &grid)?;
    Ok(SplitView {
        t: grid.times().collect(),
        fbm: sp.history[0].iter().zip(&sp.innovation[0]).map(|(a, b)| a + b).collect(),
        history: sp.history[0].clone(),
        innovation: sp.innovation[0].clone(),
        alpha_h: sp.meta.alpha_h,
        truncation_sd_bound: sp.meta.truncation_sd_bound,
    })
}

#[wasm_bindgen]
pub fn fbm_split(hurst: f64, n: usize, h: f64, seed: u32) -> std::result::Result<SplitView, JsError> {
    Ok(split_view(hurst, n, h, seed)?)
}

#[wasm_bindgen]
pub struct CouplingView {
    t: Vec<f64>,
    distance: Vec<f64>,
    beta_hat: f64,
}

#[wasm_bindgen]
impl CouplingView {
    #[wasm_bindgen(getter)]
    pub fn t(&self) -> Vec<f64> {
        self.t.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn distance(&self) -> Vec<f64> {
        self.distance.clone()
    }

    /// `NaN` when the distance underflows before a fit is possible.
    #[wasm_bindgen(getter)]
    pub fn beta_hat(&self) -> f64 {
        self.beta_hat
    }
}

/// `L_2` distance of two solutions of `dX = (-X + λ sin X) dt + dB` from
/// `±1` under shared noise, with the fitted exponential rate.
pub fn coupling_view(lambda: f64, hurst: f64, horizon: f64, h: f64, paths: usize, seed: u32) -> Result<CouplingView> {
    check(paths >= 2 && paths <= MAX_PATHS, "paths must lie in [2, 2000]")?;
    check(horizon > 0.0 && horizon / h <= MAX_STEPS as f64, "horizon / h must be at most 16384")?;
    let cfg = CouplingConfig {
        hurst,
        h,
        horizon,
        paths,
        seed: seed as u64,
        resamples: 50,
        ..CouplingConfig::default()
    };
    let res = couple(&[1.0], &[-1.0], &DissipativeDrift::damping(1, 1.0), &sine_drift(lambda)?, &cfg, None)?;
    Ok(CouplingView {
        t: res.times,
        distance: res.distances,
        beta_hat: res.beta_hat.unwrap_or(f64::NAN),
    })
}

#[wasm_bindgen]
pub fn coupling(
    lambda: f64,
    hurst: f64,
    horizon: f64,
    h: f64,
    paths: usize,
    seed: u32,
) -> std::result::Result<CouplingView, JsError> {
    Ok(coupling_view(lambda, hurst, horizon, h, paths, seed)?)
}

#[wasm_bindgen]
pub struct HistogramView {
    edges: Vec<f64>,
    counts: Vec<u32>,
    mean: f64,
    variance: f64,
}

#[wasm_bindgen]
impl HistogramView {
    #[wasm_bindgen(getter)]
    pub fn edges(&self) -> Vec<f64> {
        self.edges.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn counts(&self) -> Vec<u32> {
        self.counts.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn mean(&self) -> f64 {
        self.mean
    }

    #[wasm_bindgen(getter)]
    pub fn variance(&self) -> f64 {
        self.variance
    }
}

/// Histogram of positions sampled along one long trajectory of
/// `dX = (-X + λ sin X) dt + dB` after a burn-in.
pub fn histogram_view(hurst: f64, lambda: f64, samples: usize, bins: usize, seed: u32) -> Result<HistogramView> {
    check(samples >= 2 && samples <= MAX_SAMPLES, "samples must lie in [2, 20000]")?;
    check(bins >= 1 && bins <= 200, "bins must lie in [1, 200]")?;
    let cfg = EnhancedConfig { hurst, h: 1.0 / 16.0, t_hist: 16.0, block: 4.0 };
    let ev = Evolver::new(DissipativeDrift::damping(1, 1.0), sine_drift(lambda)?, cfg)?;
    let mu = krylov_bogoliubov(&[0.0], &ev, 8.0, 0.5, samples, StreamKey::root(seed as u64))?;
    let xs: Vec<f64> = mu.samples.iter().map(|s| s[0]).collect();
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u32; bins];
    for x in &xs {
        counts[(((x - lo) / width) as usize).min(bins - 1)] += 1;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    Ok(HistogramView {
        edges: (0..=bins).map(|i| lo + i as f64 * width).collect(),
        counts,
        mean,
        variance: mu.variance(0),
    })
}

#[wasm_bindgen]
pub fn invariant_histogram(
    hurst: f64,
    lambda: f64,
    samples: usize,
    bins: usize,
    seed: u32,
) -> std::result::Result<HistogramView, JsError> {
    Ok(histogram_view(hurst, lambda, samples, bins, seed)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brownian_split_has_no_history() {
        let v = split_view(0.5, 64, 1.0 / 64.0, 3).unwrap();
        assert_eq!(v.t.len(), 65);
        assert!(v.history.iter().all(|&x| x == 0.0));
        assert_eq!(v.fbm, v.innovation);
        assert_eq!(v.alpha_h, 1.0);
    }

    #[test]
    fn rough_split_adds_up() {
        let v = split_view(0.3, 32, 1.0 / 32.0, 5).unwrap();
        assert!(v.history.iter().skip(1).any(|&x| x != 0.0));
        for i in 0..v.t.len() {
            assert!((v.fbm[i] - v.history[i] - v.innovation[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn unperturbed_coupling_contracts_at_unit_rate() {
        let v = coupling_view(0.0, 0.25, 2.0, 1.0 / 64.0, 4, 1).unwrap();
        assert!((v.beta_hat + 1.0).abs() < 1e-6, "{}", v.beta_hat);
        assert_eq!(v.distance[0], 2.0);
        assert_eq!(v.t.len(), v.distance.len());
    }

    #[test]
    fn histogram_counts_every_sample() {
        let v = histogram_view(0.5, 0.5, 200, 20, 2).unwrap();
        assert_eq!(v.counts.iter().sum::<u32>(), 200);
        assert_eq!(v.edges.len(), 21);
        assert!(v.variance > 0.0);
    }

    #[test]
    fn rejects_oversized_requests() {
        assert!(split_view(0.5, MAX_STEPS + 1, 0.01, 0).is_err());
        assert!(coupling_view(0.0, 0.5, 1.0, 1.0, 1, 0).is_err());
        assert!(histogram_view(0.5, 0.0, 10, 0, 0).is_err());
    }
}
