use serde::{Deserialize, Serialize};

use crate::quad;
use crate::{Error, Result};

/// A validated Hurst index together with its Mandelbrot–Van Ness constant.
///
/// `alpha` normalises the moving-average representation so that
/// `Var(B_1) = 1`:
///
/// ```text
/// alpha^{-2} = 1/(2H) + ∫_0^∞ ((1+s)^{H-1/2} - s^{H-1/2})^2 ds
/// ```
///
/// The integral is evaluated once per construction by adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hurst {
    h: f64,
    alpha: f64,
}

impl Hurst {
    pub fn new(h: f64) -> Result<Self> {
        check_hurst(h)?;
        let alpha = mvn_alpha(h)?;
        Ok(Self { h, alpha })
    }

    pub fn value(&self) -> f64 {
        self.h
    }

    /// The normalisation constant `α_H`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Kernel exponent `H - 1/2`.
    pub fn exponent(&self) -> f64 {
        self.h - 0.5
    }

    pub fn is_brownian(&self) -> bool {
        self.h == 0.5
    }

    /// Cell-averaged kernel weights `κ_l = (l^{a+1} - (l-1)^{a+1}) / (a+1)`
    /// for `l = 1..=len`, where `a = H - 1/2`.
    ///
    /// `h^a κ_l` is the average of `(t-u)^a` over a Wiener cell of width `h`
    /// whose near edge lies `(l-1) h` before `t`. Integer-valued powers are
    /// exact, so for `H = 1/2` every weight is exactly one.
    pub fn cell_weights(&self, len: usize) -> Vec<f64> {
        let p = self.exponent() + 1.0;
        let mut out = Vec::with_capacity(len);
        let mut prev = 0.0f64;
        for l in 1..=len {
            let cur = (l as f64).powf(p);
            out.push((cur - prev) / p);
            prev = cur;
        }
        out
    }

    /// Variance of the innovation `B̃^{t0}_t` after elapsed time `dt`:
    /// `α_H^2 dt^{2H} / (2H)`.
    pub fn innovation_variance(&self, dt: f64) -> f64 {
        self.alpha * self.alpha * dt.powf(2.0 * self.h) / (2.0 * self.h)
    }

    /// Upper bound on the standard deviation of the history contribution
    /// discarded when the Wiener record stops `window` time units before
    /// `t0`, over a horizon `horizon = T - t0`.
    pub fn tail_sd_bound(&self, horizon: f64, window: f64) -> f64 {
        if self.is_brownian() || horizon <= 0.0 {
            return 0.0;
        }
        let a = self.exponent();
        self.alpha * a.abs() * horizon * window.powf(self.h - 1.0) / (2.0 - 2.0 * self.h).sqrt()
    }
}

pub(crate) fn check_hurst(h: f64) -> Result<()> {
    if h.is_finite() && h > 0.0 && h < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("Hurst index must lie in (0, 1), got {h}")))
    }
}

fn mvn_alpha(h: f64) -> Result<f64> {
    let a = h - 0.5;
    if a == 0.0 {
        return Ok(1.0);
    }
    // (1+s)^a - s^a, written to avoid cancellation for large s
    let diff = |s: f64| {
        if s >= 1.0 {
            s.powf(a) * (a * (1.0 / s).ln_1p()).exp_m1()
        } else {
            (1.0 + s).powf(a) - s.powf(a)
        }
    };
    // s = u^{1/H} removes the s^{2H-1} singularity at the origin
    let p = 1.0 / h;
    let near = quad::integrate(
        |u: f64| {
            if u <= 0.0 {
                return 0.0;
            }
            let s = u.powf(p);
            let d = diff(s);
            d * d * p * u.powf(p - 1.0)
        },
        0.0,
        1.0,
        1e-14,
        1e-13,
    )?;
    // s = v^{-1}, v = u^{1/(1-H)} flattens the algebraic decay at infinity
    let q = 1.0 / (1.0 - h);
    let far = quad::integrate(
        |u: f64| {
            if u <= 0.0 {
                return 0.0;
            }
            let v = u.powf(q);
            let s = 1.0 / v;
            let d = diff(s);
            d * d / (v * v) * q * u.powf(q - 1.0)
        },
        0.0,
        1.0,
        1e-14,
        1e-13,
    )?;
    Ok((1.0 / (2.0 * h) + near + far).powf(-0.5))
}
