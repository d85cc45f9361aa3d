//! Exact-in-law sampling of fractional Gaussian noise by circulant embedding.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{fgn_autocovariance, hurst::check_hurst, FbmPath, Grid, NoiseSource};
use crate::rng::{Stream, StreamKey};
use crate::{Error, Result};

// relative threshold below which negative eigenvalues are rounding noise
const CLIP_TOLERANCE: f64 = 1e-12;
// the embedding may grow to this multiple of the minimal size
const MAX_PADDING: usize = 4;

/// Reusable sampler for `n` unit-step fGn increments with Hurst index `H`.
///
/// Eigenvalues of the circulant embedding are computed once; each sample
/// costs one complex FFT and yields two independent fGn vectors (real and
/// imaginary parts).
#[derive(Clone)]
pub struct CirculantSampler {
    n: usize,
    hurst: f64,
    size: usize,
    sqrt_eig: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CirculantSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantSampler")
            .field("n", &self.n)
            .field("hurst", &self.hurst)
            .field("size", &self.size)
            .finish()
    }
}

impl CirculantSampler {
    pub fn new(n: usize, hurst: f64) -> Result<Self> {
        check_hurst(hurst)?;
        if n == 0 {
            return Err(Error::input("circulant sampler needs at least one increment"));
        }
        let base = n.next_power_of_two();
        let mut planner = FftPlanner::new();
        let mut last_min = 0.0;
        let mut last_size = 0;
        let mut m = base;
        while m <= base * MAX_PADDING {
            let size = 2 * m;
            let fft = planner.plan_fft_forward(size);
            let mut row: Vec<Complex64> = (0..size)
                .map(|k| {
                    let lag = if k <= m { k } else { size - k };
                    Complex64::new(fgn_autocovariance(lag as f64, hurst), 0.0)
                })
                .collect();
            fft.process(&mut row);
            let max = row.iter().map(|c| c.re).fold(f64::MIN, f64::max);
            let min = row.iter().map(|c| c.re).fold(f64::MAX, f64::min);
            if min >= -CLIP_TOLERANCE * max {
                let sqrt_eig = row.iter().map(|c| (c.re.max(0.0) / size as f64).sqrt()).collect();
                return Ok(Self { n, hurst, size, sqrt_eig, fft });
            }
            last_min = min;
            last_size = size;
            m *= 2;
        }
        Err(Error::Circulant {
            min_eigenvalue: last_min,
            size: last_size,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn embedding_size(&self) -> usize {
        self.size
    }

    /// Two independent unit-step fGn vectors of length `n`.
    pub fn sample_pair(&self, rng: &mut Stream) -> (Vec<f64>, Vec<f64>) {
        let mut buf: Vec<Complex64> = self
            .sqrt_eig
            .iter()
            .map(|&s| Complex64::new(s * rng.normal(), s * rng.normal()))
            .collect();
        self.fft.process(&mut buf);
        let re = buf[..self.n].iter().map(|c| c.re).collect();
        let im = buf[..self.n].iter().map(|c| c.im).collect();
        (re, im)
    }

    /// fBm increments over `grid` for `dim` independent coordinates.
    pub fn increments(&self, grid: &Grid, dim: usize, key: StreamKey) -> Vec<Vec<f64>> {
        assert_eq!(grid.n, self.n, "grid size differs from the sampler size");
        let scale = grid.h.powf(self.hurst);
        let mut rng = key.rng();
        let mut out = Vec::with_capacity(dim);
        while out.len() < dim {
            let (a, b) = self.sample_pair(&mut rng);
            out.push(a.into_iter().map(|x| x * scale).collect::<Vec<_>>());
            if out.len() < dim {
                out.push(b.into_iter().map(|x| x * scale).collect());
            }
        }
        out
    }

    pub fn path(&self, grid: &Grid, dim: usize, key: StreamKey) -> FbmPath {
        let inc = self.increments(grid, dim, key);
        FbmPath::from_increments(*grid, self.hurst, inc, NoiseSource::Circulant { key })
    }
}

/// Samples a `dim`-dimensional fBm on `grid` with independent coordinates.
pub fn sample_fbm_circulant(grid: &Grid, hurst: f64, dim: usize, key: StreamKey) -> Result<FbmPath> {
    let sampler = CirculantSampler::new(grid.n, hurst)?;
    Ok(sampler.path(grid, dim, key))
}
