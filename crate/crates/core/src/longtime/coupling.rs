//! Shared-noise coupling of two solutions and the fitted contraction rate.

use serde::{Deserialize, Serialize};

use crate::drift::{DissipativeDrift, MollifiedDrift};
use crate::io::Table;
use crate::noise::CirculantSampler;
use crate::parallel::try_map_indexed;
use crate::rng::StreamKey;
use crate::solver::{integrate, SolverConfig};
use crate::stats::{self, lm_norm, ols};
use crate::{Error, Result};

/// Distances below this are treated as underflow and end the fit window.
pub const UNDERFLOW: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingConfig {
    pub hurst: f64,
    pub h: f64,
    pub horizon: f64,
    pub m: f64,
    pub paths: usize,
    pub seed: u64,
    /// the fit uses `[fit_from T, T]`
    pub fit_from: f64,
    pub resamples: usize,
    pub level: f64,
}

impl Default for CouplingConfig {
    fn default() -> Self {
        Self {
            hurst: 0.5,
            h: 1.0 / 256.0,
            horizon: 10.0,
            m: 2.0,
            paths: 200,
            seed: 0,
            fit_from: 0.2,
            resamples: 200,
            level: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingResult {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub times: Vec<f64>,
    /// `‖X_t - Y_t‖_{L_m}`
    pub distances: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// rate β with `d_{i+1} = (1 + β h) d_i` fitted on the window; `None`
    /// when fewer than two distances survive the underflow cut
    pub beta_hat: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub fit_window: (f64, f64),
    pub kappa1: f64,
    pub b_norm_estimate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingSummary {
    pub beta_hat: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub kappa1: f64,
    pub b_norm_estimate: Option<f64>,
}

impl CouplingResult {
    /// CSV `t,dist,stderr`.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["t", "dist", "stderr"]);
        for i in 0..self.times.len() {
            t.push(&[self.times[i], self.distances[i], self.std_errors[i]]);
        }
        t
    }

    pub fn summary(&self) -> CouplingSummary {
        CouplingSummary {
            beta_hat: self.beta_hat,
            ci_low: self.ci_low,
            ci_high: self.ci_high,
            kappa1: self.kappa1,
            b_norm_estimate: self.b_norm_estimate,
        }
    }
}

/// Log-linear slope over `idx` converted through the Euler map
/// `β = (e^{slope h} - 1)/h`, so a per-step factor `1 - κh` gives `-κ`.
fn rate(times: &[f64], dists: &[f64], h: f64) -> f64 {
    let logs: Vec<f64> = dists.iter().map(|d| d.ln()).collect();
    (ols(times, &logs).slope * h).exp_m1() / h
}

/// Solves from `x` and `y` with the same noise on every path and fits the
/// exponential decay rate of their `L_m` distance.
pub fn couple(
    x: &[f64],
    y: &[f64],
    f: &DissipativeDrift,
    bk: &MollifiedDrift,
    cfg: &CouplingConfig,
    b_norm_estimate: Option<f64>,
) -> Result<CouplingResult> {
    if x.len() != y.len() {
        return Err(Error::input("starting points differ in dimension"));
    }
    if cfg.paths < 2 || !(cfg.fit_from >= 0.0 && cfg.fit_from < 1.0) {
        return Err(Error::input("coupling needs >= 2 paths and fit_from in [0, 1)"));
    }
    let scfg = SolverConfig {
        t0: 0.0,
        h: cfg.h,
        horizon: cfg.horizon,
        k: None,
        m: cfg.m,
        ensemble: cfg.paths,
        seed: cfg.seed,
        noise_refine: 1,
    };
    scfg.validate()?;
    let grid = scfg.grid()?;
    let sampler = CirculantSampler::new(grid.n, cfg.hurst)?;
    let d = x.len();
    // per path |X_i - Y_i|
    let gaps: Vec<Vec<f64>> = try_map_indexed(cfg.paths, |p| {
        let noise = sampler.path(&grid, d, scfg.root_key().child(p as u64));
        let a = integrate(x, f, bk, &noise, &scfg)?;
        let b = integrate(y, f, bk, &noise, &scfg)?;
        Ok::<_, Error>(
            (0..=grid.n)
                .map(|i| {
                    a.x_at(i)
                        .iter()
                        .zip(b.x_at(i))
                        .map(|(u, v)| (u - v).powi(2))
                        .sum::<f64>()
                        .sqrt()
                })
                .collect(),
        )
    })?;
    let times: Vec<f64> = (0..=grid.n).map(|i| grid.time(i)).collect();
    let column = |i: usize| gaps.iter().map(|g| g[i]).collect::<Vec<f64>>();
    let (distances, std_errors): (Vec<f64>, Vec<f64>) = (0..=grid.n).map(|i| lm_norm(&column(i), cfg.m)).unzip();
    let start = ((cfg.fit_from * cfg.horizon) / cfg.h).ceil() as usize;
    let end = (start..=grid.n).find(|&i| distances[i] < UNDERFLOW).unwrap_or(grid.n + 1);
    let fit_window = (times[start.min(grid.n)], times[(end.max(1) - 1).min(grid.n)]);
    let mut result = CouplingResult {
        x: x.to_vec(),
        y: y.to_vec(),
        times: times.clone(),
        distances,
        std_errors,
        beta_hat: None,
        ci_low: None,
        ci_high: None,
        fit_window,
        kappa1: f.kappa1,
        b_norm_estimate,
    };
    if end < start + 2 {
        return Ok(result);
    }
    let ts = &times[start..end];
    result.beta_hat = Some(rate(ts, &result.distances[start..end], cfg.h));
    if cfg.resamples > 0 {
        let m = cfg.m;
        let (_, lo, hi) = stats::bootstrap(cfg.paths, cfg.resamples, cfg.level, StreamKey::root(cfg.seed).child(u64::MAX), |pick| {
            let ds: Vec<f64> = (start..end)
                .map(|i| (pick.iter().map(|&p| gaps[p][i].powf(m)).sum::<f64>() / pick.len() as f64).powf(1.0 / m))
                .collect();
            if ds.iter().any(|d| *d < UNDERFLOW) {
                return f64::NAN;
            }
            rate(ts, &ds, cfg.h)
        });
        result.ci_low = Some(lo);
        result.ci_high = Some(hi);
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::{DriftRepr, SingularDrift};

    #[test]
    fn equal_starts_never_separate() {
        let cfg = CouplingConfig { paths: 5, horizon: 2.0, h: 0.01, hurst: 0.3, ..Default::default() };
        let r = couple(&[1.0], &[1.0], &DissipativeDrift::damping(1, 1.0), &MollifiedDrift::zero(1), &cfg, None).unwrap();
        assert!(r.distances.iter().all(|d| *d == 0.0));
        assert!(r.beta_hat.is_none());
    }

    #[test]
    fn linear_contraction_is_exact() {
        let kappa = 1.3;
        let h = 0.01;
        let cfg = CouplingConfig { paths: 8, horizon: 5.0, h, hurst: 0.3, ..Default::default() };
        let r = couple(&[2.0], &[-1.0], &DissipativeDrift::damping(1, kappa), &MollifiedDrift::zero(1), &cfg, None).unwrap();
        assert_eq!(r.distances[0], 3.0);
        for (i, d) in r.distances.iter().enumerate() {
            let exact = (1.0 - kappa * h).powi(i as i32) * 3.0;
            assert!((d - exact).abs() <= 1e-12 * exact, "{i}: {d} vs {exact}");
        }
        assert!((r.beta_hat.unwrap() + kappa).abs() < 1e-6);
        assert!((r.ci_low.unwrap() + kappa).abs() < 1e-6);
    }

    #[test]
    fn small_sine_drift_still_contracts() {
        let cfg = CouplingConfig { paths: 100, horizon: 6.0, h: 1.0 / 64.0, hurst: 0.25, ..Default::default() };
        let f = DissipativeDrift::damping(1, 1.0);
        let b = SingularDrift::new(DriftRepr::sine(1, 0.1), 1.0, None).unwrap();
        let bk = MollifiedDrift::unmollified(&b).unwrap();
        let r = couple(&[1.0], &[-1.0], &f, &bk, &cfg, Some(0.1)).unwrap();
        let beta = r.beta_hat.unwrap();
        assert!(beta < 0.0 && beta > -1.2, "{beta}");
        assert!(r.ci_low.unwrap() <= beta && beta <= r.ci_high.unwrap());
    }

    #[test]
    fn underflow_truncates_window() {
        let cfg = CouplingConfig { paths: 3, horizon: 60.0, h: 0.05, hurst: 0.5, resamples: 0, ..Default::default() };
        let r = couple(&[1.0], &[0.0], &DissipativeDrift::damping(1, 1.0), &MollifiedDrift::zero(1), &cfg, None).unwrap();
        assert!(r.fit_window.1 < 60.0);
        assert!(r.distances.iter().any(|d| *d < UNDERFLOW));
        // near the cut the gap is a difference of O(1) states, so rounding
        // limits the fit to a few digits
        assert!((r.beta_hat.unwrap() + 1.0).abs() < 1e-3, "{:?}", r.beta_hat);
    }
}
