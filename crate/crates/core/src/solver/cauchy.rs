//! Cauchy property of the drift processes `K^k` along a mollification
//! sequence.

use serde::{Deserialize, Serialize};

use super::{ensemble_noise, integrate, SolverConfig};
use crate::drift::{DissipativeDrift, SingularDrift};
use crate::noise::CirculantSampler;
use crate::parallel::try_map_indexed;
use crate::stats;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyRow {
    pub k: u32,
    pub k_next: u32,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyTable {
    pub rows: Vec<CauchyRow>,
    /// `per_path[p][j]` is `sup_t |K^{k_j}_t - K^{k_{j+1}}_t|` on path `p`
    pub per_path: Vec<Vec<f64>>,
}

impl CauchyTable {
    pub fn medians(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.median).collect()
    }

    pub fn is_decreasing(&self) -> bool {
        self.medians().windows(2).all(|w| w[1] < w[0])
    }
}

/// For consecutive levels in `ks`, the distribution over paths of
/// `sup_t |K^k_t - K^{k'}_t|`, all levels sharing each path's noise.
pub fn drift_cauchy(
    x0: &[f64],
    f: &DissipativeDrift,
    b: &SingularDrift,
    ks: &[u32],
    hurst: f64,
    cfg: &SolverConfig,
) -> Result<CauchyTable> {
    cfg.validate()?;
    if ks.len() < 2 || ks.windows(2).any(|w| w[1] <= w[0]) || ks[0] == 0 {
        return Err(Error::input("levels must be positive and strictly increasing"));
    }
    let drifts = ks.iter().map(|&k| b.mollify(k)).collect::<Result<Vec<_>>>()?;
    let d = x0.len();
    let sampler = CirculantSampler::new(cfg.noise_grid()?.n, hurst)?;
    let per_path = try_map_indexed(cfg.ensemble, |p| {
        let noise = ensemble_noise(&sampler, cfg, d, p)?;
        let trs = drifts
            .iter()
            .map(|bk| integrate(x0, f, bk, &noise, cfg))
            .collect::<Result<Vec<_>>>()?;
        Ok::<_, Error>(
            trs.windows(2)
                .map(|w| {
                    (0..w[0].len())
                        .map(|i| {
                            w[0].k_at(i)
                                .iter()
                                .zip(w[1].k_at(i))
                                .map(|(a, b)| (a - b).powi(2))
                                .sum::<f64>()
                                .sqrt()
                        })
                        .fold(0.0, f64::max)
                })
                .collect::<Vec<f64>>(),
        )
    })?;
    let rows = (0..ks.len() - 1)
        .map(|j| {
            let col: Vec<f64> = per_path.iter().map(|r| r[j]).collect();
            CauchyRow {
                k: ks[j],
                k_next: ks[j + 1],
                median: stats::median(&col),
                q25: stats::quantile(&col, 0.25),
                q75: stats::quantile(&col, 0.75),
                mean: stats::mean(&col),
                std_error: stats::std_error(&col),
            }
        })
        .collect();
    Ok(CauchyTable { rows, per_path })
}
