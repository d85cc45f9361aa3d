//! Log-log exponent regression.

use serde::{Deserialize, Serialize};

use crate::rng::StreamKey;
use crate::stats;
use crate::{Error, Result};

pub const FIT_RESAMPLES: usize = 1000;
pub const FIT_LEVEL: f64 = 0.95;
const FIT_SEED: u64 = 0x5ca1_e0f1;

/// OLS fit of `log norm = intercept + slope · log lag` with a residual
/// bootstrap interval for the slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub ci: (f64, f64),
}

impl ExponentFit {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci.1 - self.ci.0)
    }

    pub fn contains(&self, value: f64) -> bool {
        self.ci.0 <= value && value <= self.ci.1
    }
}

/// Checks the lag-set shape the regression needs: at least four lags
/// spanning at least 1.5 decades.
pub fn check_lag_span(lags: &[f64]) -> Result<()> {
    if lags.len() < 4 {
        return Err(Error::input("exponent fit needs at least 4 lags"));
    }
    let lo = lags.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = lags.iter().copied().fold(0.0, f64::max);
    if !(lo > 0.0) || (hi / lo).log10() < 1.5 - 1e-12 {
        return Err(Error::input("exponent fit needs lags spanning at least 1.5 decades"));
    }
    Ok(())
}

pub fn fit_exponent(lags: &[f64], norms: &[f64]) -> Result<ExponentFit> {
    if lags.len() != norms.len() {
        return Err(Error::input("lags and norms differ in length"));
    }
    check_lag_span(lags)?;
    if norms.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::input("exponent fit needs positive finite norms"));
    }
    let x: Vec<f64> = lags.iter().map(|l| l.ln()).collect();
    let y: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    let line = stats::ols(&x, &y);
    let fitted: Vec<f64> = x.iter().map(|xi| line.intercept + line.slope * xi).collect();
    let resid: Vec<f64> = y.iter().zip(&fitted).map(|(yi, fi)| yi - fi).collect();
    let (_, lo, hi) = stats::bootstrap(x.len(), FIT_RESAMPLES, FIT_LEVEL, StreamKey::root(FIT_SEED), |idx| {
        let ys: Vec<f64> = fitted.iter().zip(idx).map(|(f, &j)| f + resid[j]).collect();
        stats::ols(&x, &ys).slope
    });
    Ok(ExponentFit {
        slope: line.slope,
        intercept: line.intercept,
        slope_se: line.slope_se,
        ci: (lo.min(line.slope), hi.max(line.slope)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dyadic(n: i32) -> Vec<f64> {
        (2..2 + n).map(|j| 2f64.powi(-j)).collect()
    }

    #[test]
    fn identity_has_unit_slope() {
        let lags = dyadic(7);
        let fit = fit_exponent(&lags, &lags).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12);
        assert!(fit.intercept.abs() < 1e-12);
        assert!(fit.half_width() < 1e-9);
    }

    #[test]
    fn constant_has_zero_slope() {
        let lags = dyadic(7);
        let fit = fit_exponent(&lags, &vec![3.0; 7]).unwrap();
        assert!(fit.slope.abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn noisy_power_law() {
        let lags = dyadic(7);
        let mut rng = StreamKey::root(3).rng();
        let norms: Vec<f64> = lags.iter().map(|l| l.powf(0.75) * (1.0 + 0.01 * rng.normal())).collect();
        let fit = fit_exponent(&lags, &norms).unwrap();
        assert!((fit.slope - 0.75).abs() < 0.02, "{fit:?}");
        assert!(fit.contains(fit.slope));
        assert!(fit.half_width() < 0.05);
    }

    #[test]
    fn rejects_bad_inputs() {
        let lags = dyadic(7);
        let mut norms = lags.clone();
        norms[2] = 0.0;
        assert!(fit_exponent(&lags, &norms).is_err());
        assert!(fit_exponent(&lags[..3], &lags[..3]).is_err());
        // 4 lags within one decade
        let narrow = [0.1, 0.2, 0.4, 0.8];
        assert!(fit_exponent(&narrow, &narrow).is_err());
    }
}
