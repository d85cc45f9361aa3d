//! Small statistics toolkit shared by the estimators.

use crate::rng::StreamKey;

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64
}

pub fn std_error(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Plug-in `L_m` norm `(E|Y|^m)^{1/m}` of the samples `|Y|` with a
/// delta-method standard error.
pub fn lm_norm(abs_values: &[f64], m: f64) -> (f64, f64) {
    let powers: Vec<f64> = abs_values.iter().map(|v| v.abs().powf(m)).collect();
    let mom = mean(&powers);
    if mom <= 0.0 {
        return (0.0, 0.0);
    }
    let norm = mom.powf(1.0 / m);
    let se = norm / (m * mom) * std_error(&powers);
    (norm, se)
}

/// Quantile by linear interpolation between order statistics.
pub fn quantile(xs: &[f64], p: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, p)
}

pub fn quantile_sorted(v: &[f64], p: f64) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let pos = p.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let w = pos - lo as f64;
    v[lo] * (1.0 - w) + v[hi] * w
}

pub fn median(xs: &[f64]) -> f64 {
    quantile(xs, 0.5)
}

/// Ordinary least squares fit `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope under i.i.d. residuals.
    pub slope_se: f64,
}

pub fn ols(x: &[f64], y: &[f64]) -> LineFit {
    let n = x.len() as f64;
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let slope_se = if n > 2.0 && sxx > 0.0 {
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    LineFit { slope, intercept, slope_se }
}

/// Percentile bootstrap of a statistic over resampled indices.
///
/// `statistic` receives the resampled index set; the returned tuple is
/// `(bootstrap standard deviation, lower, upper)` at the requested two-sided
/// confidence level.
pub fn bootstrap<F>(n: usize, resamples: usize, level: f64, key: StreamKey, statistic: F) -> (f64, f64, f64)
where
    F: Fn(&[usize]) -> f64,
{
    let mut rng = key.rng();
    let mut idx = vec![0usize; n];
    let mut values = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        for i in idx.iter_mut() {
            *i = rng.index(n);
        }
        values.push(statistic(&idx));
    }
    let sd = variance(&values).sqrt();
    values.sort_by(f64::total_cmp);
    let tail = 0.5 * (1.0 - level);
    (sd, quantile_sorted(&values, tail), quantile_sorted(&values, 1.0 - tail))
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let v = x[i].min(y[j]);
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}
