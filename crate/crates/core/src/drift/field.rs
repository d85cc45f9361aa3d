//! The dissipative part `F` of the drift and its constants audit.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::rng::StreamKey;
use crate::{Error, Result};

type FieldFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

/// A vector field `F: R^d -> R^d`.
#[derive(Clone)]
pub enum Field {
    Zero { dim: usize },
    /// `F(x) = -kappa x`
    Damping { dim: usize, kappa: f64 },
    /// `F(x) = -coef |x|² x`
    Cubic { dim: usize, coef: f64 },
    Custom { dim: usize, name: String, f: Arc<FieldFn> },
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Zero { dim } => write!(f, "Zero(d={dim})"),
            Field::Damping { dim, kappa } => write!(f, "Damping(d={dim}, kappa={kappa})"),
            Field::Cubic { dim, coef } => write!(f, "Cubic(d={dim}, coef={coef})"),
            Field::Custom { dim, name, .. } => write!(f, "Custom(d={dim}, {name})"),
        }
    }
}

impl Field {
    pub fn custom(dim: usize, name: &str, f: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static) -> Self {
        Field::Custom { dim, name: name.to_string(), f: Arc::new(f) }
    }

    pub fn dim(&self) -> usize {
        match self {
            Field::Zero { dim } | Field::Damping { dim, .. } | Field::Cubic { dim, .. } | Field::Custom { dim, .. } => *dim,
        }
    }

    /// Writes `F(x)` into `out`.
    #[inline]
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Field::Zero { .. } => out.fill(0.0),
            Field::Damping { kappa, .. } => out.iter_mut().zip(x).for_each(|(o, v)| *o = -kappa * v),
            Field::Cubic { coef, .. } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                out.iter_mut().zip(x).for_each(|(o, v)| *o = -coef * r2 * v);
            }
            Field::Custom { f, .. } => f(x, out),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.eval_into(x, &mut out);
        out
    }

    /// The damping rate when `F(x) = -kappa x`, the only case where two
    /// solutions driven by the same noise contract deterministically.
    pub fn linear_rate(&self) -> Option<f64> {
        match self {
            Field::Zero { .. } => Some(0.0),
            Field::Damping { kappa, .. } => Some(*kappa),
            _ => None,
        }
    }
}

/// `F` together with its declared constants.
#[derive(Debug, Clone)]
pub struct DissipativeDrift {
    pub field: Field,
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa3: f64,
    pub lipschitz: Option<f64>,
}

impl DissipativeDrift {
    pub fn new(field: Field, kappa1: f64, kappa2: f64, kappa3: f64, lipschitz: Option<f64>) -> Result<Self> {
        if !(kappa2 >= 0.0) || !(kappa3 > 0.0) || !kappa1.is_finite() {
            return Err(Error::input("need kappa1 finite, kappa2 >= 0 and kappa3 > 0"));
        }
        Ok(Self { field, kappa1, kappa2, kappa3, lipschitz })
    }

    /// `F(x) = -kappa x` with its exact constants.
    pub fn damping(dim: usize, kappa: f64) -> Self {
        Self {
            field: Field::Damping { dim, kappa },
            kappa1: kappa,
            kappa2: 0.0,
            kappa3: kappa.abs().max(f64::MIN_POSITIVE),
            lipschitz: Some(kappa.abs()),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            field: Field::Zero { dim },
            kappa1: 0.0,
            kappa2: 0.0,
            kappa3: f64::MIN_POSITIVE,
            lipschitz: Some(0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    /// tightest `κ1` with `κ2 = 0` over the sampled pairs
    pub kappa1_hat: f64,
    /// tightest `κ2` given the declared `κ1`
    pub kappa2_hat: f64,
    pub kappa3_hat: f64,
    pub lipschitz_hat: f64,
    pub violations: usize,
    pub pairs: usize,
}

/// Relative threshold below which a violation counts as rounding noise.
pub const VIOLATION_TOLERANCE: f64 = 1e-9;

/// Samples `n_pairs` pairs in the box `[lo, hi]^d` and estimates the
/// tightest constants. Half the pairs are independent uniform points; the
/// other half are close pairs, which is where Lipschitz quotients peak.
pub fn audit_f(f: &DissipativeDrift, lo: f64, hi: f64, n_pairs: usize, key: StreamKey) -> Result<AuditReport> {
    if n_pairs == 0 || !(lo < hi) {
        return Err(Error::input("audit needs at least one pair and a nonempty box"));
    }
    let d = f.dim();
    let mut rng = key.rng();
    let mut x = vec![0.0; d];
    let mut y = vec![0.0; d];
    let mut fx = vec![0.0; d];
    let mut fy = vec![0.0; d];
    let local = 1e-4 * (hi - lo);
    let mut k1 = f64::INFINITY;
    let mut k2: f64 = 0.0;
    let mut k3: f64 = 0.0;
    let mut lip: f64 = 0.0;
    let mut violations = 0;
    for p in 0..n_pairs {
        for c in 0..d {
            x[c] = rng.uniform_range(lo, hi);
            y[c] = if p % 2 == 0 {
                rng.uniform_range(lo, hi)
            } else {
                (x[c] + rng.uniform_range(-local, local)).clamp(lo, hi)
            };
        }
        f.field.eval_into(&x, &mut fx);
        f.field.eval_into(&y, &mut fy);
        let dist2: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum();
        let df2: f64 = fx.iter().zip(&fy).map(|(a, b)| (a - b).powi(2)).sum();
        let inner: f64 = fx.iter().zip(&fy).zip(x.iter().zip(&y)).map(|((a, b), (u, v))| (a - b) * (u - v)).sum();
        let scale = df2.sqrt() * dist2.sqrt() + f.kappa1.abs() * dist2 + f.kappa2;
        if dist2 > 0.0 {
            k1 = k1.min(-inner / dist2);
            lip = lip.max((df2 / dist2).sqrt());
        }
        let excess = inner + f.kappa1 * dist2;
        if excess > VIOLATION_TOLERANCE * scale {
            k2 = k2.max(excess);
        }
        if excess - f.kappa2 > VIOLATION_TOLERANCE * scale {
            violations += 1;
        }
        for (z, fz) in [(&x, &fx), (&y, &fy)] {
            let nz = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            let nf = fz.iter().map(|v| v * v).sum::<f64>().sqrt();
            k3 = k3.max(nf / (1.0 + nz));
            if nf > f.kappa3 * (1.0 + nz) * (1.0 + VIOLATION_TOLERANCE) {
                violations += 1;
            }
        }
    }
    if let Some(l) = f.lipschitz {
        if lip > l * (1.0 + VIOLATION_TOLERANCE) + VIOLATION_TOLERANCE {
            violations += 1;
        }
    }
    Ok(AuditReport {
        kappa1_hat: if k1.is_finite() { k1 } else { 0.0 },
        kappa2_hat: k2,
        kappa3_hat: k3,
        lipschitz_hat: lip,
        violations,
        pairs: n_pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_damping_constants() {
        let f = DissipativeDrift::damping(3, 1.0);
        let r = audit_f(&f, -5.0, 5.0, 20_000, StreamKey::root(1)).unwrap();
        assert!(r.kappa1_hat >= 1.0 - 1e-12);
        assert_eq!(r.kappa2_hat, 0.0);
        assert!(r.lipschitz_hat <= 1.0 + 1e-12);
        assert_eq!(r.violations, 0);
    }

    #[test]
    fn cubic_on_box() {
        let f = DissipativeDrift::new(Field::Cubic { dim: 1, coef: 1.0 }, 0.0, 0.0, 12.0, None).unwrap();
        let r = audit_f(&f, -2.0, 2.0, 100_000, StreamKey::root(2)).unwrap();
        assert_eq!(r.violations, 0);
        // max of 3x² on [-2, 2]
        assert!((r.lipschitz_hat - 12.0).abs() < 0.1, "{}", r.lipschitz_hat);
        assert!(r.lipschitz_hat <= 12.0 + 1e-9);
    }

    #[test]
    fn zero_field() {
        let r = audit_f(&DissipativeDrift::zero(2), -5.0, 5.0, 1000, StreamKey::root(3)).unwrap();
        assert_eq!(r.kappa1_hat, 0.0);
        assert_eq!(r.kappa2_hat, 0.0);
    }

    #[test]
    fn flags_false_claims() {
        let mut f = DissipativeDrift::damping(1, 1.0);
        f.kappa1 = 2.0;
        let r = audit_f(&f, -5.0, 5.0, 1000, StreamKey::root(4)).unwrap();
        assert!(r.violations > 0);
    }

    #[test]
    fn deterministic_given_seed() {
        let f = DissipativeDrift::new(Field::custom(2, "rot", |x, o| {
            o[0] = -x[0] + x[1];
            o[1] = -x[0] - x[1];
        }), 1.0, 0.0, 2.0, None)
        .unwrap();
        let a = audit_f(&f, -5.0, 5.0, 500, StreamKey::root(5)).unwrap();
        let b = audit_f(&f, -5.0, 5.0, 500, StreamKey::root(5)).unwrap();
        assert_eq!(a, b);
        assert!((a.kappa1_hat - 1.0).abs() < 1e-9, "{}", a.kappa1_hat);
    }
}
