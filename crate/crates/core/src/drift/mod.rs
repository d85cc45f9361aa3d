//! Drifts: the dissipative field `F`, singular drifts `b` given through
//! their heat-kernel smoothings, norm estimates and mollification.

mod field;
mod norm;
mod repr;
mod sampled;

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use field::{audit_f, AuditReport, DissipativeDrift, Field, VIOLATION_TOLERANCE};
pub use norm::{besov_norm, dyadic_eps, AuditGrid, NormEstimate};
pub use repr::{heat_apply, heat_kernel, DriftRepr, FourierMode};
pub use sampled::SampledGrid;

use crate::io::KvConfig;
use crate::{Error, Result};

/// A drift of Besov–Hölder regularity `gamma` with declared norm bound.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularDrift {
    pub repr: DriftRepr,
    pub gamma: f64,
    pub xi_bound: Option<f64>,
}

impl SingularDrift {
    pub fn new(repr: DriftRepr, gamma: f64, xi_bound: Option<f64>) -> Result<Self> {
        if gamma > 1.0 || gamma.is_nan() {
            return Err(Error::UnsupportedRegularity(gamma));
        }
        if gamma >= 0.0 && !repr.is_function() {
            return Err(Error::input("regularity >= 0 requires a function-valued drift"));
        }
        if let Some(xi) = xi_bound {
            if !(xi >= 0.0) {
                return Err(Error::input("norm bound must be nonnegative"));
            }
        }
        Ok(Self { repr, gamma, xi_bound })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            repr: DriftRepr::Zero { dim },
            gamma: 1.0,
            xi_bound: Some(0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.repr.dim()
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            repr: self.repr.scaled(lambda),
            gamma: self.gamma,
            xi_bound: self.xi_bound.map(|x| x * lambda.abs()),
        }
    }

    /// `b^k = P_{1/k} b`.
    pub fn mollify(&self, k: u32) -> Result<MollifiedDrift> {
        if k == 0 {
            return Err(Error::input("mollification level must be >= 1"));
        }
        self.smoothed(1.0 / k as f64)
    }

    /// `P_ε b` for an arbitrary smoothing time `ε > 0`.
    pub fn smoothed(&self, epsilon: f64) -> Result<MollifiedDrift> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::input("smoothing time must be positive"));
        }
        Ok(MollifiedDrift {
            repr: self.repr.heat(epsilon)?,
            epsilon,
            parent_gamma: self.gamma,
        })
    }

    /// Norm estimate at the drift's own regularity.
    pub fn norm_estimate(&self, eps_set: &[f64], grid: &AuditGrid) -> Result<NormEstimate> {
        besov_norm(&self.repr, self.gamma, eps_set, grid)
    }
}

/// `P_ε b`, a smooth function that the solver evaluates pointwise.
#[derive(Debug, Clone, PartialEq)]
pub struct MollifiedDrift {
    repr: DriftRepr,
    epsilon: f64,
    parent_gamma: f64,
}

impl MollifiedDrift {
    pub fn zero(dim: usize) -> Self {
        Self {
            repr: DriftRepr::Zero { dim },
            epsilon: 0.0,
            parent_gamma: 1.0,
        }
    }

    /// Uses a function-valued drift as is (the `k = ∞` member of the
    /// sequence), reported with `epsilon = 0`.
    pub fn unmollified(b: &SingularDrift) -> Result<Self> {
        if !b.repr.is_function() {
            return Err(Error::input("only function-valued drifts can be used without mollification"));
        }
        Ok(Self {
            repr: b.repr.clone(),
            epsilon: 0.0,
            parent_gamma: b.gamma,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn parent_gamma(&self) -> f64 {
        self.parent_gamma
    }

    pub fn repr(&self) -> &DriftRepr {
        &self.repr
    }

    pub fn dim(&self) -> usize {
        self.repr.dim()
    }

    pub fn is_zero(&self) -> bool {
        self.repr.is_zero()
    }

    #[inline]
    pub fn add_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.repr.add_into(x, out)
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.repr.eval(x)
    }

    /// The smoothed drift as an exact (smooth) drift, for composing
    /// mollifications.
    pub fn as_exact(&self) -> SingularDrift {
        SingularDrift {
            repr: self.repr.clone(),
            gamma: 1.0,
            xi_bound: None,
        }
    }
}

/// Free-function form of [`SingularDrift::mollify`].
pub fn mollify(b: &SingularDrift, k: u32) -> Result<MollifiedDrift> {
    b.mollify(k)
}

/// Named drift families that configs and the CLI can build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftKind {
    None,
    Constant,
    Sine,
    Weierstrass,
    PointMass,
    Gaussian,
    Samples,
}

impl std::str::FromStr for DriftKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "none" | "zero" => DriftKind::None,
            "constant" => DriftKind::Constant,
            "sin" | "sine" => DriftKind::Sine,
            "weierstrass" => DriftKind::Weierstrass,
            "point_mass" | "delta" => DriftKind::PointMass,
            "gaussian" => DriftKind::Gaussian,
            "samples" => DriftKind::Samples,
            other => return Err(Error::Config(format!("unknown drift kind `{other}`"))),
        })
    }
}

/// Serializable description of a singular drift.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftSpec {
    pub kind: DriftKind,
    /// multiplies the whole drift
    pub scale: f64,
    /// regularity; defaults depend on the kind
    pub gamma: Option<f64>,
    pub xi_bound: Option<f64>,
    /// number of dyadic levels above the base frequency (weierstrass)
    pub levels: u32,
    /// kernel time δ of the gaussian kind
    pub width: f64,
    pub samples: Option<PathBuf>,
}

impl Default for DriftSpec {
    fn default() -> Self {
        Self {
            kind: DriftKind::None,
            scale: 1.0,
            gamma: None,
            xi_bound: None,
            levels: 12,
            width: 1.0,
            samples: None,
        }
    }
}

/// Config keys understood by [`DriftSpec::from_config`].
pub const DRIFT_KEYS: &[&str] = &[
    "drift",
    "drift_scale",
    "drift_gamma",
    "drift_xi",
    "drift_levels",
    "drift_width",
    "drift_samples",
];

impl DriftSpec {
    pub fn from_config(cfg: &KvConfig) -> Result<Self> {
        let d = Self::default();
        Ok(Self {
            kind: cfg.str_or("drift", "none").parse()?,
            scale: cfg.f64_or("drift_scale", d.scale)?,
            gamma: cfg.f64("drift_gamma")?,
            xi_bound: cfg.f64("drift_xi")?,
            levels: cfg.u64_or("drift_levels", d.levels as u64)? as u32,
            width: cfg.f64_or("drift_width", d.width)?,
            samples: cfg.get("drift_samples").map(PathBuf::from),
        })
    }

    pub fn build(&self, dim: usize) -> Result<SingularDrift> {
        let (repr, default_gamma) = match self.kind {
            DriftKind::None => (DriftRepr::Zero { dim }, 1.0),
            DriftKind::Constant => (DriftRepr::Constant(vec![1.0; dim]), 1.0),
            DriftKind::Sine => (DriftRepr::sine(dim, 1.0), 1.0),
            DriftKind::Weierstrass => {
                let g = self
                    .gamma
                    .ok_or_else(|| Error::Config("weierstrass drift needs drift_gamma".into()))?;
                if !(g > 0.0 && g < 1.0) {
                    return Err(Error::Config("weierstrass drift needs 0 < drift_gamma < 1".into()));
                }
                (DriftRepr::weierstrass(dim, 1.0, g, self.levels), g)
            }
            DriftKind::PointMass => {
                let mut w = vec![0.0; dim];
                w[0] = 1.0;
                (DriftRepr::point_mass(vec![0.0; dim], w), -(dim as f64))
            }
            DriftKind::Gaussian => {
                if !(self.width > 0.0) {
                    return Err(Error::Config("drift_width must be positive".into()));
                }
                let mut w = vec![0.0; dim];
                w[0] = 1.0;
                (DriftRepr::Gaussian { center: vec![0.0; dim], delta: self.width, weight: w }, 1.0)
            }
            DriftKind::Samples => {
                let path = self
                    .samples
                    .as_ref()
                    .ok_or_else(|| Error::Config("samples drift needs drift_samples".into()))?;
                let grid = SampledGrid::from_csv(path)?;
                if grid.dim() != dim {
                    return Err(Error::Config(format!("samples have dimension {}, run has {dim}", grid.dim())));
                }
                (DriftRepr::Sampled { grid: Arc::new(grid), eps: 0.0 }, 0.0)
            }
        };
        let gamma = self.gamma.unwrap_or(default_gamma);
        SingularDrift::new(repr.scaled(self.scale), gamma, self.xi_bound)
    }
}
