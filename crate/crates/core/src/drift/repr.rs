//! Drift representations and the Gaussian semigroup `P_ε`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::sampled::SampledGrid;
use crate::{Error, Result};

/// One Fourier term `amplitude * sin(frequency · x + phase)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierMode {
    pub amplitude: Vec<f64>,
    pub frequency: Vec<f64>,
    pub phase: f64,
}

/// A vector field `R^d -> R^d`, possibly a distribution known only through
/// its heat-kernel smoothings.
#[derive(Debug, Clone, PartialEq)]
pub enum DriftRepr {
    Zero { dim: usize },
    Constant(Vec<f64>),
    /// `x ↦ matrix · x + offset`, row-major.
    Linear { matrix: Vec<Vec<f64>>, offset: Vec<f64> },
    Fourier { dim: usize, modes: Vec<FourierMode> },
    /// `weight * p_δ(x - center)`; `delta = 0` is a point mass.
    Gaussian { center: Vec<f64>, delta: f64, weight: Vec<f64> },
    /// Samples on a tensor grid, smoothed by `P_eps` (`eps = 0`: multilinear
    /// interpolation).
    Sampled { grid: Arc<SampledGrid>, eps: f64 },
    Sum(Vec<DriftRepr>),
}

/// Heat kernel `p_ε(x) = (4πε)^{-d/2} exp(-|x|²/4ε)`.
pub fn heat_kernel(eps: f64, x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    (4.0 * PI * eps).powf(-0.5 * d) * (-r2 / (4.0 * eps)).exp()
}

impl DriftRepr {
    pub fn point_mass(center: Vec<f64>, weight: Vec<f64>) -> Self {
        DriftRepr::Gaussian { center, delta: 0.0, weight }
    }

    /// `scale * sin(x_c)` in every coordinate.
    pub fn sine(dim: usize, scale: f64) -> Self {
        Self::weierstrass(dim, scale, 0.0, 0)
    }

    /// `scale * Σ_{j=0}^{levels} 2^{-jγ} sin(2^j x_c)` in every coordinate,
    /// a bounded function of Hölder regularity `γ` as `levels → ∞`.
    pub fn weierstrass(dim: usize, scale: f64, gamma: f64, levels: u32) -> Self {
        let mut modes = Vec::new();
        for c in 0..dim {
            for j in 0..=levels {
                let freq = 2f64.powi(j as i32);
                let mut amplitude = vec![0.0; dim];
                amplitude[c] = scale * freq.powf(-gamma);
                let mut frequency = vec![0.0; dim];
                frequency[c] = freq;
                modes.push(FourierMode { amplitude, frequency, phase: 0.0 });
            }
        }
        DriftRepr::Fourier { dim, modes }
    }

    /// `F(x) = -kappa x`.
    pub fn linear_damping(dim: usize, kappa: f64) -> Self {
        let matrix = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { -kappa } else { 0.0 }).collect())
            .collect();
        DriftRepr::Linear { matrix, offset: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        match self {
            DriftRepr::Zero { dim } | DriftRepr::Fourier { dim, .. } => *dim,
            DriftRepr::Constant(c) => c.len(),
            DriftRepr::Linear { offset, .. } => offset.len(),
            DriftRepr::Gaussian { center, .. } => center.len(),
            DriftRepr::Sampled { grid, .. } => grid.dim(),
            DriftRepr::Sum(parts) => parts.first().map_or(0, DriftRepr::dim),
        }
    }

    /// Whether pointwise evaluation makes sense.
    pub fn is_function(&self) -> bool {
        match self {
            DriftRepr::Gaussian { delta, .. } => *delta > 0.0,
            DriftRepr::Sum(parts) => parts.iter().all(DriftRepr::is_function),
            _ => true,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            DriftRepr::Zero { .. } => true,
            DriftRepr::Sum(parts) => parts.iter().all(DriftRepr::is_zero),
            _ => false,
        }
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        let mul = |v: &[f64]| v.iter().map(|x| lambda * x).collect::<Vec<_>>();
        match self {
            DriftRepr::Zero { dim } => DriftRepr::Zero { dim: *dim },
            DriftRepr::Constant(c) => DriftRepr::Constant(mul(c)),
            DriftRepr::Linear { matrix, offset } => DriftRepr::Linear {
                matrix: matrix.iter().map(|r| mul(r)).collect(),
                offset: mul(offset),
            },
            DriftRepr::Fourier { dim, modes } => DriftRepr::Fourier {
                dim: *dim,
                modes: modes
                    .iter()
                    .map(|m| FourierMode { amplitude: mul(&m.amplitude), ..m.clone() })
                    .collect(),
            },
            DriftRepr::Gaussian { center, delta, weight } => DriftRepr::Gaussian {
                center: center.clone(),
                delta: *delta,
                weight: mul(weight),
            },
            DriftRepr::Sampled { grid, eps } => DriftRepr::Sampled {
                grid: Arc::new(grid.scaled(lambda)),
                eps: *eps,
            },
            DriftRepr::Sum(parts) => DriftRepr::Sum(parts.iter().map(|p| p.scaled(lambda)).collect()),
        }
    }

    /// The representation of `P_ε f`.
    pub fn heat(&self, eps: f64) -> Result<Self> {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::input("smoothing time must be nonnegative"));
        }
        Ok(match self {
            // constants and affine maps are fixed by a symmetric mass-1 kernel
            DriftRepr::Zero { .. } | DriftRepr::Constant(_) | DriftRepr::Linear { .. } => self.clone(),
            DriftRepr::Fourier { dim, modes } => DriftRepr::Fourier {
                dim: *dim,
                modes: modes
                    .iter()
                    .map(|m| {
                        let k2: f64 = m.frequency.iter().map(|k| k * k).sum();
                        let damp = (-eps * k2).exp();
                        FourierMode {
                            amplitude: m.amplitude.iter().map(|a| a * damp).collect(),
                            ..m.clone()
                        }
                    })
                    .collect(),
            },
            DriftRepr::Gaussian { center, delta, weight } => DriftRepr::Gaussian {
                center: center.clone(),
                delta: delta + eps,
                weight: weight.clone(),
            },
            DriftRepr::Sampled { grid, eps: e0 } => DriftRepr::Sampled {
                grid: Arc::clone(grid),
                eps: e0 + eps,
            },
            DriftRepr::Sum(parts) => DriftRepr::Sum(parts.iter().map(|p| p.heat(eps)).collect::<Result<_>>()?),
        })
    }

    /// Adds `f(x)` to `out`.
    pub fn add_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        match self {
            DriftRepr::Zero { .. } => {}
            DriftRepr::Constant(c) => out.iter_mut().zip(c).for_each(|(o, v)| *o += v),
            DriftRepr::Linear { matrix, offset } => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o += offset[i] + matrix[i].iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
                }
            }
            DriftRepr::Fourier { modes, .. } => {
                for m in modes {
                    let arg: f64 = m.frequency.iter().zip(x).map(|(k, v)| k * v).sum::<f64>() + m.phase;
                    let s = arg.sin();
                    out.iter_mut().zip(&m.amplitude).for_each(|(o, a)| *o += a * s);
                }
            }
            DriftRepr::Gaussian { center, delta, weight } => {
                if *delta <= 0.0 {
                    return Err(Error::input("a point mass has no pointwise values; mollify it first"));
                }
                let diff: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
                let p = heat_kernel(*delta, &diff);
                out.iter_mut().zip(weight).for_each(|(o, w)| *o += w * p);
            }
            DriftRepr::Sampled { grid, eps } => grid.add_smoothed(x, *eps, out)?,
            DriftRepr::Sum(parts) => {
                for p in parts {
                    p.add_into(x, out)?;
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::input(format!("point has dimension {}, drift has {}", x.len(), self.dim())));
        }
        let mut out = vec![0.0; x.len()];
        self.add_into(x, &mut out)?;
        Ok(out)
    }
}

/// `P_ε f (x)`.
pub fn heat_apply(f: &DriftRepr, eps: f64, x: &[f64]) -> Result<Vec<f64>> {
    if !(eps > 0.0) {
        return Err(Error::input("heat_apply needs eps > 0"));
    }
    f.heat(eps)?.eval(x)
}
