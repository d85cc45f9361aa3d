//! Scaling-exponent experiments for the regularisation bounds.
//!
//! Every experiment estimates, for a set of lags `ℓ`, the `L_m` norm of an
//! integral over `[0, ℓ]` of a functional of `ψ_r + B̃_r`, where `B̃` is the
//! innovation part of the fBm started at time 0, and regresses `log norm` on
//! `log ℓ`. Integrals are left-point sums on the innovation lattice; the
//! exponential kernel of the damped variants is integrated exactly per cell.

mod fit;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use fit::{check_lag_span, fit_exponent, ExponentFit, FIT_LEVEL, FIT_RESAMPLES};

use crate::drift::{DriftRepr, DriftSpec, MollifiedDrift, DRIFT_KEYS};
use crate::io::{KvConfig, Table};
use crate::noise::{Hurst, MvnSplitter};
use crate::parallel::try_map_indexed;
use crate::rng::StreamKey;
use crate::stats;
use crate::{Error, Result};

pub const MIN_PATHS: usize = 100;
/// Target half-width of the exponent interval; wider intervals are flagged.
pub const TARGET_HALF_WIDTH: f64 = 0.1;
/// Ratio between the finest lag and the crossover lag used when a
/// mollification level is chosen automatically.
pub const CROSSOVER_MARGIN: f64 = 256.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Proposition {
    Reg1,
    Reg2,
    Reg3,
    Reg4,
}

impl Proposition {
    /// Predicted exponent of the lag.
    pub fn predicted(self, hurst: f64, gamma: f64) -> f64 {
        match self {
            Proposition::Reg1 | Proposition::Reg4 => 1.0 + hurst * gamma.min(0.0),
            Proposition::Reg2 | Proposition::Reg3 => 1.0 + hurst * (gamma - 1.0),
        }
    }

    /// Lower end of the admissible regularity range (the upper end is 1).
    pub fn gamma_floor(self, hurst: f64) -> f64 {
        match self {
            Proposition::Reg1 | Proposition::Reg4 => -1.0 / (2.0 * hurst),
            Proposition::Reg2 | Proposition::Reg3 => 1.0 - 1.0 / (2.0 * hurst),
        }
    }
}

impl fmt::Display for Proposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Proposition::Reg1 => "reg1",
            Proposition::Reg2 => "reg2",
            Proposition::Reg3 => "reg3",
            Proposition::Reg4 => "reg4",
        })
    }
}

impl FromStr for Proposition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "reg1" => Proposition::Reg1,
            "reg2" => Proposition::Reg2,
            "reg3" => Proposition::Reg3,
            "reg4" => Proposition::Reg4,
            other => return Err(Error::Config(format!("unknown experiment `{other}`"))),
        })
    }
}

/// Deterministic processes `ψ`, `φ` entering the experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ProcessSpec {
    Constant(Vec<f64>),
    /// `x0 · e^{-kappa r}`
    Relaxing { x0: Vec<f64>, kappa: f64 },
}

impl ProcessSpec {
    pub fn zero(dim: usize) -> Self {
        ProcessSpec::Constant(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        match self {
            ProcessSpec::Constant(v) => v.len(),
            ProcessSpec::Relaxing { x0, .. } => x0.len(),
        }
    }

    pub fn at(&self, r: f64, out: &mut [f64]) {
        match self {
            ProcessSpec::Constant(v) => out.copy_from_slice(v),
            ProcessSpec::Relaxing { x0, kappa } => {
                let e = (-kappa * r).exp();
                for (o, x) in out.iter_mut().zip(x0) {
                    *o = x * e;
                }
            }
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::input("process dimension differs from the drift dimension"));
        }
        let ok = match self {
            ProcessSpec::Constant(v) => v.iter().all(|x| x.is_finite()),
            ProcessSpec::Relaxing { x0, kappa } => x0.iter().all(|x| x.is_finite()) && *kappa >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::input("process parameters must be finite with nonnegative rate"))
        }
    }
}

/// Monte Carlo settings shared by all experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegConfig {
    pub hurst: f64,
    pub m: f64,
    pub lags: Vec<f64>,
    pub paths: usize,
    /// lattice step of the innovation
    pub h: f64,
    pub seed: u64,
}

impl RegConfig {
    fn validate(&self) -> Result<Hurst> {
        let hurst = Hurst::new(self.hurst)?;
        if !(self.m >= 1.0 && self.m.is_finite()) {
            return Err(Error::input("moment order m must be >= 1"));
        }
        if self.paths < MIN_PATHS {
            return Err(Error::input(format!("ensemble must have at least {MIN_PATHS} paths")));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::input("step must be positive"));
        }
        if self.lags.is_empty() {
            return Err(Error::input("no lags"));
        }
        for &l in &self.lags {
            if !(l > 0.0 && l <= 1.0) {
                return Err(Error::input("lags must lie in (0, 1]"));
            }
            let r = l / self.h;
            if (r - r.round()).abs() > 1e-9 * r.max(1.0) || r.round() < 1.0 {
                return Err(Error::input("lags must be positive multiples of the step"));
            }
        }
        Ok(hurst)
    }

    fn steps(&self, lag: f64) -> usize {
        (lag / self.h).round() as usize
    }
}

/// Powers of two `2^{-lo}, …, 2^{-hi}`.
pub fn dyadic_lags(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|j| 2f64.powi(-j)).collect()
}

/// Lag at which the innovation variance reaches `sigma2`.
pub fn crossover_lag(hurst: Hurst, sigma2: f64) -> f64 {
    if sigma2 <= 0.0 {
        return 0.0;
    }
    let h = hurst.value();
    let a = hurst.alpha();
    (2.0 * h * sigma2 / (a * a)).powf(1.0 / (2.0 * h))
}

/// Smoothing time `ε` whose crossover lag (innovation variance `= 2ε`) sits
/// [`CROSSOVER_MARGIN`] times below `finest_lag`.
pub fn epsilon_for_lag(hurst: Hurst, finest_lag: f64) -> f64 {
    0.5 * hurst.innovation_variance(finest_lag / CROSSOVER_MARGIN)
}

/// Squared length scale below which `f` looks smooth.
fn resolution_variance(repr: &DriftRepr) -> f64 {
    match repr {
        DriftRepr::Gaussian { delta, .. } => 2.0 * delta,
        DriftRepr::Sampled { eps, .. } => 2.0 * eps,
        DriftRepr::Fourier { modes, .. } => {
            let k2 = modes
                .iter()
                .filter(|m| m.amplitude.iter().any(|a| *a != 0.0))
                .map(|m| m.frequency.iter().map(|k| k * k).sum::<f64>())
                .fold(0.0, f64::max);
            if k2 > 0.0 {
                1.0 / k2
            } else {
                0.0
            }
        }
        DriftRepr::Sum(parts) => parts.iter().map(resolution_variance).fold(0.0, f64::max),
        _ => 0.0,
    }
}

/// Outcome of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingExperiment {
    pub id: Proposition,
    pub hurst: f64,
    pub gamma: f64,
    pub m: f64,
    pub paths: usize,
    pub h: f64,
    pub epsilon: f64,
    pub lags: Vec<f64>,
    pub lhs_norms: Vec<f64>,
    pub stderrs: Vec<f64>,
    /// lags entering the regression
    pub fit_lags: Vec<f64>,
    pub fit: Option<ExponentFit>,
    pub fitted_exponent: f64,
    pub predicted: f64,
    pub crossover_lag: f64,
    pub warnings: Vec<String>,
}

/// JSON summary of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub id: Proposition,
    pub fitted_exponent: f64,
    pub predicted_exponent: f64,
    pub ci: Option<(f64, f64)>,
    pub crossover_lag: f64,
    pub fit_lags: Vec<f64>,
    pub warnings: Vec<String>,
}

impl ScalingExperiment {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["lag", "lhs_norm", "stderr"]);
        for ((l, v), s) in self.lags.iter().zip(&self.lhs_norms).zip(&self.stderrs) {
            t.push(&[*l, *v, *s]);
        }
        t
    }

    pub fn summary(&self) -> ExperimentSummary {
        ExperimentSummary {
            id: self.id,
            fitted_exponent: self.fitted_exponent,
            predicted_exponent: self.predicted,
            ci: self.fit.map(|f| f.ci),
            crossover_lag: self.crossover_lag,
            fit_lags: self.fit_lags.clone(),
            warnings: self.warnings.clone(),
        }
    }

    /// Whether the fitted exponent is within `tol` of the prediction.
    pub fn agrees(&self, tol: f64) -> bool {
        (self.fitted_exponent - self.predicted).abs() <= tol
    }

    pub fn norm_at(&self, lag: f64) -> Option<f64> {
        self.lags.iter().position(|&l| l == lag).map(|i| self.lhs_norms[i])
    }
}

struct Scratch {
    psi: Vec<f64>,
    phi: Vec<f64>,
    xa: Vec<f64>,
    xb: Vec<f64>,
    fa: Vec<f64>,
    fb: Vec<f64>,
}

impl Scratch {
    fn new(dim: usize) -> Self {
        let z = vec![0.0; dim];
        Self { psi: z.clone(), phi: z.clone(), xa: z.clone(), xb: z.clone(), fa: z.clone(), fb: z }
    }
}

struct Integrand<'a> {
    f: &'a MollifiedDrift,
    psi: &'a ProcessSpec,
    phi: &'a ProcessSpec,
}

/// Per-path values of the integrals at every lag, then `L_m` norms.
fn estimate<G>(cfg: &RegConfig, hurst: Hurst, dim: usize, out_dim: usize, c: f64, integrand: G) -> Result<(Vec<f64>, Vec<f64>)>
where
    G: Fn(f64, &[f64], &mut Scratch, &mut [f64]) -> Result<()> + Sync,
{
    let n_max = cfg.lags.iter().map(|&l| cfg.steps(l)).max().unwrap_or(0);
    let splitter = MvnSplitter::new(hurst, cfg.h, 0, n_max);
    let root = StreamKey::root(cfg.seed);
    let h = cfg.h;
    let per_path: Vec<Vec<f64>> = try_map_indexed(cfg.paths, |p| -> Result<Vec<f64>> {
        let key = root.child(p as u64);
        let mut dw = vec![0.0; n_max];
        let innov: Vec<Vec<f64>> = (0..dim)
            .map(|k| {
                key.child(k as u64).rng().fill_normal(&mut dw, h);
                splitter.innovation(&dw)
            })
            .collect();
        let mut g = vec![0.0; n_max * out_dim];
        let mut b = vec![0.0; dim];
        let mut scratch = Scratch::new(dim);
        for i in 0..n_max {
            for (k, bk) in b.iter_mut().enumerate() {
                *bk = innov[k][i];
            }
            integrand(i as f64 * h, &b, &mut scratch, &mut g[i * out_dim..(i + 1) * out_dim])?;
        }
        let mut out = Vec::with_capacity(cfg.lags.len());
        let mut acc = vec![0.0; out_dim];
        for &lag in &cfg.lags {
            let n = cfg.steps(lag);
            acc.iter_mut().for_each(|a| *a = 0.0);
            if c == 0.0 {
                for i in 0..n {
                    for (a, gi) in acc.iter_mut().zip(&g[i * out_dim..(i + 1) * out_dim]) {
                        *a += h * gi;
                    }
                }
            } else {
                // ∫ over cell i of e^{-c(ℓ-r)} dr
                let cell = -(-c * h).exp_m1() / c;
                for i in 0..n {
                    let w = (-c * (n - 1 - i) as f64 * h).exp() * cell;
                    for (a, gi) in acc.iter_mut().zip(&g[i * out_dim..(i + 1) * out_dim]) {
                        *a += w * gi;
                    }
                }
            }
            out.push(acc.iter().map(|a| a * a).sum::<f64>().sqrt());
        }
        Ok(out)
    })?;
    let mut norms = Vec::with_capacity(cfg.lags.len());
    let mut ses = Vec::with_capacity(cfg.lags.len());
    let mut col = vec![0.0; cfg.paths];
    for j in 0..cfg.lags.len() {
        for (v, row) in col.iter_mut().zip(&per_path) {
            *v = row[j];
        }
        let (n, s) = stats::lm_norm(&col, cfg.m);
        if !n.is_finite() {
            return Err(Error::Divergence { index: j });
        }
        norms.push(n);
        ses.push(s);
    }
    Ok((norms, ses))
}

fn run(id: Proposition, it: Integrand<'_>, c: f64, cfg: &RegConfig) -> Result<ScalingExperiment> {
    let hurst = cfg.validate()?;
    let dim = it.f.dim();
    it.psi.validate(dim)?;
    it.phi.validate(dim)?;
    let gamma = it.f.parent_gamma();
    let floor = id.gamma_floor(hurst.value());
    if !(gamma > floor && gamma <= 1.0) {
        return Err(Error::UnsupportedRegularity(gamma));
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::input("damping rate c must be nonnegative"));
    }
    if matches!(id, Proposition::Reg2 | Proposition::Reg3) {
        check_constant_gap(it.psi, it.phi, cfg)?;
    }

    let out_dim = match id {
        Proposition::Reg1 | Proposition::Reg2 => dim,
        Proposition::Reg3 | Proposition::Reg4 => 1,
    };
    let f = it.f;
    let integrand = |r: f64, b: &[f64], sc: &mut Scratch, out: &mut [f64]| -> Result<()> {
        it.psi.at(r, &mut sc.psi);
        it.phi.at(r, &mut sc.phi);
        for k in 0..dim {
            sc.xa[k] = sc.psi[k] + b[k];
            sc.xb[k] = sc.phi[k] + b[k];
        }
        match id {
            Proposition::Reg1 => {
                out.iter_mut().for_each(|o| *o = 0.0);
                f.add_into(&sc.xa, out)
            }
            Proposition::Reg2 => {
                out.iter_mut().for_each(|o| *o = 0.0);
                sc.fb.iter_mut().for_each(|o| *o = 0.0);
                f.add_into(&sc.xa, out)?;
                f.add_into(&sc.xb, &mut sc.fb)?;
                for (o, y) in out.iter_mut().zip(&sc.fb) {
                    *o -= y;
                }
                Ok(())
            }
            Proposition::Reg3 => {
                sc.fa.iter_mut().for_each(|o| *o = 0.0);
                sc.fb.iter_mut().for_each(|o| *o = 0.0);
                f.add_into(&sc.xa, &mut sc.fa)?;
                f.add_into(&sc.xb, &mut sc.fb)?;
                out[0] = (0..dim).map(|k| (sc.psi[k] - sc.phi[k]) * (sc.fa[k] - sc.fb[k])).sum();
                Ok(())
            }
            Proposition::Reg4 => {
                sc.fa.iter_mut().for_each(|o| *o = 0.0);
                f.add_into(&sc.xa, &mut sc.fa)?;
                out[0] = sc.phi.iter().zip(&sc.fa).map(|(p, v)| p * v).sum();
                Ok(())
            }
        }
    };
    let (lhs_norms, stderrs) = estimate(cfg, hurst, dim, out_dim, c, integrand)?;

    let crossover = crossover_lag(hurst, resolution_variance(f.repr()));
    let predicted = id.predicted(hurst.value(), gamma);
    let mut warnings = Vec::new();
    let fit_lags = regression_lags(&cfg.lags, crossover, &mut warnings);
    let (xs, ys): (Vec<f64>, Vec<f64>) = cfg
        .lags
        .iter()
        .zip(&lhs_norms)
        .filter(|(l, _)| fit_lags.contains(l))
        .map(|(l, v)| (*l, *v))
        .unzip();
    let fit = match fit_exponent(&xs, &ys) {
        Ok(fit) => {
            if fit.half_width() > TARGET_HALF_WIDTH {
                warnings.push(format!(
                    "exponent interval half-width {:.3} exceeds {TARGET_HALF_WIDTH}; ensemble of {} paths is too small",
                    fit.half_width(),
                    cfg.paths
                ));
            }
            Some(fit)
        }
        Err(e) => {
            warnings.push(format!("no exponent fit: {e}"));
            None
        }
    };
    Ok(ScalingExperiment {
        id,
        hurst: hurst.value(),
        gamma,
        m: cfg.m,
        paths: cfg.paths,
        h: cfg.h,
        epsilon: f.epsilon(),
        lags: cfg.lags.clone(),
        lhs_norms,
        stderrs,
        fit_lags,
        fitted_exponent: fit.map_or(f64::NAN, |f| f.slope),
        fit,
        predicted,
        crossover_lag: crossover,
        warnings,
    })
}

/// Lags strictly above the crossover and at most 1, restricted to the two
/// decades above the smallest of them. Falls back to every lag when that
/// leaves too little to regress on.
fn regression_lags(lags: &[f64], crossover: f64, warnings: &mut Vec<String>) -> Vec<f64> {
    let above: Vec<f64> = lags.iter().copied().filter(|&l| l > crossover && l <= 1.0).collect();
    let lo = above.iter().copied().fold(f64::INFINITY, f64::min);
    let chosen: Vec<f64> = above.into_iter().filter(|&l| l <= 100.0 * lo * (1.0 + 1e-12)).collect();
    if check_lag_span(&chosen).is_ok() {
        return chosen;
    }
    warnings.push(format!(
        "only {} lags lie above the crossover lag {crossover:.3e}; regressing on all lags",
        chosen.len()
    ));
    lags.to_vec()
}

fn check_constant_gap(psi: &ProcessSpec, phi: &ProcessSpec, cfg: &RegConfig) -> Result<()> {
    let d = psi.dim();
    let (mut a, mut b) = (vec![0.0; d], vec![0.0; d]);
    psi.at(0.0, &mut a);
    phi.at(0.0, &mut b);
    let z0: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    let t = cfg.lags.iter().copied().fold(0.0, f64::max);
    psi.at(t, &mut a);
    phi.at(t, &mut b);
    let same = a
        .iter()
        .zip(&b)
        .zip(&z0)
        .all(|((x, y), z)| (x - y - z).abs() <= 1e-12 * (1.0 + z.abs()));
    if same {
        Ok(())
    } else {
        Err(Error::input("psi - phi must be a constant vector"))
    }
}

/// `‖∫_0^ℓ f(ψ_r + B̃_r) dr‖_{L_m}` over the lags.
pub fn run_reg1(f: &MollifiedDrift, psi: &ProcessSpec, cfg: &RegConfig) -> Result<ScalingExperiment> {
    run(Proposition::Reg1, Integrand { f, psi, phi: psi }, 0.0, cfg)
}

/// `‖∫_0^ℓ f(ψ_r + B̃_r) − f(φ_r + B̃_r) dr‖_{L_m}` with `ψ − φ` constant.
pub fn run_reg2(f: &MollifiedDrift, psi: &ProcessSpec, phi: &ProcessSpec, cfg: &RegConfig) -> Result<ScalingExperiment> {
    run(Proposition::Reg2, Integrand { f, psi, phi }, 0.0, cfg)
}

/// `‖∫_0^ℓ e^{-c(ℓ-r)} ⟨ψ_r − φ_r, f(ψ_r + B̃_r) − f(φ_r + B̃_r)⟩ dr‖_{L_m}`.
pub fn run_reg3(f: &MollifiedDrift, psi: &ProcessSpec, phi: &ProcessSpec, c: f64, cfg: &RegConfig) -> Result<ScalingExperiment> {
    run(Proposition::Reg3, Integrand { f, psi, phi }, c, cfg)
}

/// `‖∫_0^ℓ e^{-c(ℓ-r)} ⟨φ_r, f(ψ_r + B̃_r)⟩ dr‖_{L_m}`.
pub fn run_reg4(f: &MollifiedDrift, psi: &ProcessSpec, phi: &ProcessSpec, c: f64, cfg: &RegConfig) -> Result<ScalingExperiment> {
    run(Proposition::Reg4, Integrand { f, psi, phi }, c, cfg)
}

/// Experiment description read from a flat key-value config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySpec {
    pub id: Proposition,
    pub dim: usize,
    pub drift: DriftSpec,
    /// smoothing time; `None` picks one from the finest lag for
    /// distributional drifts and uses functions unsmoothed
    pub epsilon: Option<f64>,
    /// constant position the drift is evaluated around (all coordinates)
    pub base: f64,
    /// gap between the two positions in the first coordinate
    pub z: f64,
    /// constant test vector `φ` of the exponential-kernel experiment
    pub weight: f64,
    pub c: f64,
    pub run: RegConfig,
}

pub const VERIFY_KEYS: &[&str] = &[
    "experiment",
    "dim",
    "hurst",
    "m",
    "lags",
    "paths",
    "h",
    "seed",
    "epsilon",
    "base",
    "z",
    "weight",
    "c",
];

impl VerifySpec {
    /// Config keys understood by [`VerifySpec::from_config`].
    pub fn keys() -> Vec<&'static str> {
        VERIFY_KEYS.iter().chain(DRIFT_KEYS).copied().collect()
    }

    pub fn from_config(cfg: &KvConfig) -> Result<Self> {
        let id: Proposition = cfg.str_or("experiment", "reg1").parse()?;
        let spec = Self {
            id,
            dim: cfg.usize_or("dim", 1)?,
            drift: DriftSpec::from_config(cfg)?,
            epsilon: cfg.f64("epsilon")?,
            base: cfg.f64_or("base", 0.0)?,
            z: cfg.f64_or("z", 1e-2)?,
            weight: cfg.f64_or("weight", 1.0)?,
            c: cfg.f64_or("c", 1.0)?,
            run: RegConfig {
                hurst: cfg.f64_or("hurst", 0.25)?,
                m: cfg.f64_or("m", 2.0)?,
                lags: cfg.f64_list("lags")?.unwrap_or_else(|| dyadic_lags(2, 8)),
                paths: cfg.usize_or("paths", 2000)?,
                h: cfg.f64_or("h", 2f64.powi(-12))?,
                seed: cfg.u64_or("seed", 1)?,
            },
        };
        if spec.dim == 0 {
            return Err(Error::Config("dim must be >= 1".into()));
        }
        Ok(spec)
    }

    /// The function the experiment integrates.
    pub fn build_drift(&self) -> Result<MollifiedDrift> {
        let b = self.drift.build(self.dim)?;
        let hurst = Hurst::new(self.run.hurst)?;
        match self.epsilon {
            Some(e) if e > 0.0 => b.smoothed(e),
            Some(_) => MollifiedDrift::unmollified(&b),
            None if b.repr.is_function() => MollifiedDrift::unmollified(&b),
            None => {
                let finest = self.run.lags.iter().copied().fold(f64::INFINITY, f64::min);
                b.smoothed(epsilon_for_lag(hurst, finest))
            }
        }
    }

    pub fn execute(&self) -> Result<ScalingExperiment> {
        let f = self.build_drift()?;
        let phi = ProcessSpec::Constant(vec![self.base; self.dim]);
        let mut shifted = vec![self.base; self.dim];
        shifted[0] += self.z;
        let psi = ProcessSpec::Constant(shifted);
        match self.id {
            Proposition::Reg1 => run_reg1(&f, &phi, &self.run),
            Proposition::Reg2 => run_reg2(&f, &psi, &phi, &self.run),
            Proposition::Reg3 => run_reg3(&f, &psi, &phi, self.c, &self.run),
            Proposition::Reg4 => run_reg4(&f, &phi, &ProcessSpec::Constant(vec![self.weight; self.dim]), self.c, &self.run),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::SingularDrift;
    use crate::quad;
    use std::f64::consts::PI;

    fn cfg(hurst: f64, paths: usize, h: f64, lags: Vec<f64>) -> RegConfig {
        RegConfig { hurst, m: 2.0, lags, paths, h, seed: 7 }
    }

    fn func(repr: DriftRepr, gamma: f64) -> MollifiedDrift {
        MollifiedDrift::unmollified(&SingularDrift::new(repr, gamma, None).unwrap()).unwrap()
    }

    fn point_mass(eps: f64) -> MollifiedDrift {
        SingularDrift::new(DriftRepr::point_mass(vec![0.0], vec![1.0]), -1.0, None)
            .unwrap()
            .smoothed(eps)
            .unwrap()
    }

    #[test]
    fn predictions() {
        assert_eq!(Proposition::Reg1.predicted(0.25, -1.0), 0.75);
        assert_eq!(Proposition::Reg1.predicted(0.25, 0.5), 1.0);
        assert!((Proposition::Reg2.predicted(0.8, 0.6) - 0.68).abs() < 1e-12);
        assert_eq!("reg3".parse::<Proposition>().unwrap(), Proposition::Reg3);
        assert!("reg5".parse::<Proposition>().is_err());
    }

    #[test]
    fn constant_f_gives_the_lag() {
        let f = func(DriftRepr::Constant(vec![1.0]), 1.0);
        let lags = dyadic_lags(1, 8);
        let e = run_reg1(&f, &ProcessSpec::zero(1), &cfg(0.3, 100, 2f64.powi(-10), lags.clone())).unwrap();
        for (l, v) in lags.iter().zip(&e.lhs_norms) {
            assert!((v - l).abs() < 1e-14, "{l} {v}");
        }
        assert!((e.fitted_exponent - 1.0).abs() < 1e-12);
        assert_eq!(e.predicted, 1.0);
    }

    #[test]
    fn zero_gap_gives_zero() {
        let f = func(DriftRepr::sine(1, 1.0), 1.0);
        let c = cfg(0.5, 100, 2f64.powi(-8), dyadic_lags(1, 6));
        let psi = ProcessSpec::Constant(vec![0.3]);
        let e = run_reg2(&f, &psi, &psi, &c).unwrap();
        assert!(e.lhs_norms.iter().all(|&v| v == 0.0));
        let e = run_reg3(&f, &psi, &psi, 1.0, &c).unwrap();
        assert!(e.lhs_norms.iter().all(|&v| v == 0.0));
        let e = run_reg4(&f, &psi, &ProcessSpec::zero(1), 1.0, &c).unwrap();
        assert!(e.lhs_norms.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn damped_constant_is_exact() {
        let f = func(DriftRepr::Constant(vec![1.0]), 1.0);
        let v = -1.5;
        let c = 2.0;
        let lags = dyadic_lags(1, 7);
        let e = run_reg4(&f, &ProcessSpec::zero(1), &ProcessSpec::Constant(vec![v]), c, &cfg(0.3, 100, 2f64.powi(-9), lags.clone()))
            .unwrap();
        for (l, got) in lags.iter().zip(&e.lhs_norms) {
            let want = v.abs() * (1.0 - (-c * l).exp()) / c;
            assert!((got - want).abs() < 1e-13 * want.max(1.0), "{l}: {got} vs {want}");
        }
    }

    #[test]
    fn damping_shrinks_monotonically() {
        let f = func(DriftRepr::sine(1, 1.0), 1.0);
        let psi = ProcessSpec::Constant(vec![0.05]);
        let phi = ProcessSpec::zero(1);
        let c = cfg(0.4, 100, 2f64.powi(-8), vec![0.5]);
        let vals: Vec<f64> = [0.0, 1.0, 4.0, 16.0, 64.0]
            .iter()
            .map(|&damp| run_reg3(&f, &psi, &phi, damp, &c).unwrap().lhs_norms[0])
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
    }

    #[test]
    fn sine_obeys_lipschitz_bounds() {
        let f = func(DriftRepr::sine(1, 1.0), 1.0);
        let lags = dyadic_lags(1, 7);
        let c = cfg(0.4, 200, 2f64.powi(-10), lags.clone());
        let phi = ProcessSpec::zero(1);
        let mut ratios = Vec::new();
        for z in [1e-3, 1e-2] {
            let psi = ProcessSpec::Constant(vec![z]);
            let e2 = run_reg2(&f, &psi, &phi, &c).unwrap();
            let e3 = run_reg3(&f, &psi, &phi, 0.0, &c).unwrap();
            for (j, l) in lags.iter().enumerate() {
                assert!(e2.lhs_norms[j] <= l * z * (1.0 + 1e-12));
                assert!(e3.lhs_norms[j] <= l * z * z * (1.0 + 1e-12));
            }
            assert!((e2.fitted_exponent - 1.0).abs() < 0.1, "{}", e2.fitted_exponent);
            ratios.push(e2.lhs_norms[0] / z);
        }
        assert!((ratios[0] / ratios[1] - 1.0).abs() < 0.02, "{ratios:?}");
    }

    #[test]
    fn scaling_f_scales_outputs() {
        let f = point_mass(0.01);
        let f2 = SingularDrift::new(DriftRepr::point_mass(vec![0.0], vec![2.0]), -1.0, None)
            .unwrap()
            .smoothed(0.01)
            .unwrap();
        let c = cfg(0.25, 100, 2f64.powi(-9), dyadic_lags(1, 6));
        let a = run_reg1(&f, &ProcessSpec::zero(1), &c).unwrap();
        let b = run_reg1(&f2, &ProcessSpec::zero(1), &c).unwrap();
        for (x, y) in a.lhs_norms.iter().zip(&b.lhs_norms) {
            assert!((y - 2.0 * x).abs() < 1e-12 * y);
        }
        assert!((a.fitted_exponent - b.fitted_exponent).abs() < 1e-10);
        let phi = ProcessSpec::Constant(vec![0.7]);
        let a = run_reg4(&f, &ProcessSpec::zero(1), &phi, 1.0, &c).unwrap();
        let b = run_reg4(&f2, &ProcessSpec::zero(1), &phi, 1.0, &c).unwrap();
        for (x, y) in a.lhs_norms.iter().zip(&b.lhs_norms) {
            assert!((y - 2.0 * x).abs() < 1e-12 * y);
        }
    }

    #[test]
    fn mean_occupation_matches_gaussian_oracle() {
        // E p_ε(B̃_r) = (2π(2ε + v(r)))^{-1/2}, v the innovation variance
        let eps = 0.01;
        let hurst = Hurst::new(0.25).unwrap();
        let f = point_mass(eps);
        let lags = dyadic_lags(1, 6);
        let mut c = cfg(0.25, 4000, 2f64.powi(-12), lags.clone());
        c.m = 1.0;
        let e = run_reg1(&f, &ProcessSpec::zero(1), &c).unwrap();
        for (j, &l) in lags.iter().enumerate() {
            let want = quad::integrate(
                |r| (2.0 * PI * (2.0 * eps + hurst.innovation_variance(r))).powf(-0.5),
                0.0,
                l,
                1e-12,
                1e-10,
            )
            .unwrap();
            let tol = 4.0 * e.stderrs[j] + 0.01 * want;
            assert!((e.lhs_norms[j] - want).abs() < tol, "lag {l}: {} vs {want}", e.lhs_norms[j]);
        }
    }

    #[test]
    fn crossover_and_auto_epsilon() {
        let hurst = Hurst::new(0.25).unwrap();
        let lmin = 2f64.powi(-8);
        let eps = epsilon_for_lag(hurst, lmin);
        let lc = crossover_lag(hurst, 2.0 * eps);
        assert!((lc * CROSSOVER_MARGIN / lmin - 1.0).abs() < 1e-10);
        assert_eq!(crossover_lag(hurst, 0.0), 0.0);
        let f = point_mass(eps);
        assert!((crossover_lag(hurst, resolution_variance(f.repr())) - lc).abs() < 1e-15);
    }

    #[test]
    fn regression_lag_selection() {
        let lags = dyadic_lags(0, 12);
        let mut w = Vec::new();
        let chosen = regression_lags(&lags, 2f64.powi(-10), &mut w);
        assert!(w.is_empty());
        assert_eq!(chosen.iter().copied().fold(1.0, f64::min), 2f64.powi(-9));
        assert!(chosen.iter().all(|&l| l <= 100.0 * 2f64.powi(-9)));
        // a tie with the crossover goes to the larger lags
        assert!(!regression_lags(&lags, 2f64.powi(-9), &mut w).contains(&2f64.powi(-9)));
        let fallback = regression_lags(&lags, 0.3, &mut w);
        assert_eq!(fallback, lags);
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn rejects_bad_setups() {
        let f = func(DriftRepr::sine(1, 1.0), 1.0);
        let z = ProcessSpec::zero(1);
        assert!(run_reg1(&f, &z, &cfg(0.25, 99, 2f64.powi(-8), dyadic_lags(1, 6))).is_err());
        assert!(run_reg1(&f, &z, &cfg(0.25, 100, 2f64.powi(-8), vec![2.0, 0.5])).is_err());
        assert!(run_reg1(&f, &z, &cfg(0.25, 100, 0.3, vec![0.5])).is_err());
        let drifting = ProcessSpec::Relaxing { x0: vec![1.0], kappa: 1.0 };
        let c = cfg(0.25, 100, 2f64.powi(-8), dyadic_lags(1, 6));
        assert!(run_reg2(&f, &drifting, &z, &c).is_err());
        // point mass below the admissible range for H = 0.8 in reg2
        let pm = point_mass(0.01);
        let c8 = cfg(0.8, 100, 2f64.powi(-8), dyadic_lags(1, 6));
        assert!(matches!(run_reg2(&pm, &z, &z, &c8), Err(Error::UnsupportedRegularity(_))));
    }

    #[test]
    fn small_ensembles_are_flagged() {
        let f = point_mass(0.001);
        let e = run_reg1(&f, &ProcessSpec::zero(1), &cfg(0.25, 100, 2f64.powi(-10), dyadic_lags(2, 8))).unwrap();
        assert!(e.fitted_exponent.is_finite());
        let wide = e.fit.unwrap().half_width() > TARGET_HALF_WIDTH;
        assert_eq!(wide, e.warnings.iter().any(|w| w.contains("too small")));
    }

    #[test]
    fn deterministic_given_seed() {
        let f = point_mass(0.01);
        let c = cfg(0.25, 100, 2f64.powi(-9), dyadic_lags(1, 6));
        let a = run_reg1(&f, &ProcessSpec::zero(1), &c).unwrap();
        let b = run_reg1(&f, &ProcessSpec::zero(1), &c).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_table().to_csv(), b.to_table().to_csv());
    }

    #[test]
    fn spec_from_config() {
        let kv = KvConfig::parse("experiment = reg1\ndrift = point_mass\nhurst = 0.25\npaths = 100\nh = 0.0009765625\nlags = 0.25,0.125,0.0625,0.03125,0.015625,0.0078125").unwrap();
        kv.reject_unknown(&VerifySpec::keys()).unwrap();
        let spec = VerifySpec::from_config(&kv).unwrap();
        let f = spec.build_drift().unwrap();
        assert!(f.epsilon() > 0.0);
        let e = spec.execute().unwrap();
        assert_eq!(e.lags.len(), 6);
        assert_eq!(e.id, Proposition::Reg1);
    }
}
