//! Moment curves, trend tests and Hölder-type seminorms over ensembles.

use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::noise::WienerRecord;
use crate::parallel::try_map_indexed;
use crate::rng::StreamKey;
use crate::stats::{self, lm_norm, ols};
use crate::{Error, Result};

/// Which process a seminorm is taken of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Process {
    X,
    /// `X - B`, the drift part of the solution
    XMinusB,
    B,
    K,
}

impl Process {
    #[inline]
    fn value(self, tr: &Trajectory, i: usize, c: usize) -> f64 {
        match self {
            Process::X => tr.x_at(i)[c],
            Process::XMinusB => tr.x_at(i)[c] - tr.b_at(i)[c],
            Process::B => tr.b_at(i)[c],
            Process::K => tr.k_at(i)[c],
        }
    }

    fn point(self, tr: &Trajectory, i: usize) -> Vec<f64> {
        (0..tr.dim).map(|c| self.value(tr, i, c)).collect()
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `‖X_t‖_{L_m}` along the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentCurve {
    pub m: f64,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    /// bootstrap standard deviations over resampled paths
    pub std_errors: Vec<f64>,
    pub sup: f64,
    pub sup_time: f64,
    /// `(t - t0) ∧ (1 - e^{-κ1 (t - t0)})/κ1`, the shape of the moment bound
    pub bound_shape: Vec<f64>,
}

fn bound_shape(tau: f64, kappa1: f64) -> f64 {
    if kappa1 > 0.0 {
        tau.min(-(-kappa1 * tau).exp_m1() / kappa1)
    } else {
        tau
    }
}

/// Plug-in `L_m` norms of `|X_t|` at every `every`-th grid time with
/// bootstrap errors from `resamples` path resamples.
pub fn moment_curve(
    ensemble: &[Trajectory],
    m: f64,
    kappa1: f64,
    every: usize,
    resamples: usize,
    key: StreamKey,
) -> Result<MomentCurve> {
    if ensemble.len() < 2 {
        return Err(Error::input("moment curve needs at least two paths"));
    }
    let grid = ensemble[0].grid;
    let idx: Vec<usize> = (0..=grid.n).step_by(every.max(1)).collect();
    // powers[j][p] = |X_p(t_j)|^m
    let powers: Vec<Vec<f64>> = idx
        .iter()
        .map(|&i| ensemble.iter().map(|tr| norm(tr.x_at(i)).powf(m)).collect())
        .collect();
    let norms: Vec<f64> = powers.iter().map(|p| stats::mean(p).powf(1.0 / m)).collect();
    let n = ensemble.len();
    let mut rng = key.rng();
    let mut boot = vec![Vec::with_capacity(resamples); idx.len()];
    let mut pick = vec![0usize; n];
    for _ in 0..resamples {
        pick.iter_mut().for_each(|p| *p = rng.index(n));
        for (j, pw) in powers.iter().enumerate() {
            boot[j].push((pick.iter().map(|&p| pw[p]).sum::<f64>() / n as f64).powf(1.0 / m));
        }
    }
    let std_errors = boot.iter().map(|v| stats::variance(v).sqrt()).collect();
    let (arg, sup) = norms
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (j, &v)| if v > b.1 { (j, v) } else { b });
    let times: Vec<f64> = idx.iter().map(|&i| grid.time(i)).collect();
    Ok(MomentCurve {
        m,
        bound_shape: times.iter().map(|t| bound_shape(t - grid.t0, kappa1)).collect(),
        sup_time: times[arg],
        times,
        norms,
        std_errors,
        sup,
    })
}

/// Least-squares slope of `t ↦ ‖X_t‖_{L_m}` over a window with a path
/// bootstrap confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendTest {
    pub slope: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub level: f64,
    /// the whole interval lies above zero
    pub positive_trend: bool,
}

pub fn trend_test(
    ensemble: &[Trajectory],
    m: f64,
    window: (f64, f64),
    every: usize,
    resamples: usize,
    level: f64,
    key: StreamKey,
) -> Result<TrendTest> {
    if ensemble.len() < 2 || resamples < 10 {
        return Err(Error::input("trend test needs at least two paths and ten resamples"));
    }
    let grid = ensemble[0].grid;
    let idx: Vec<usize> = (0..=grid.n)
        .step_by(every.max(1))
        .filter(|&i| {
            let t = grid.time(i);
            t >= window.0 - 1e-12 && t <= window.1 + 1e-12
        })
        .collect();
    if idx.len() < 3 {
        return Err(Error::input("trend window holds fewer than three sample times"));
    }
    let times: Vec<f64> = idx.iter().map(|&i| grid.time(i)).collect();
    let powers: Vec<Vec<f64>> = idx
        .iter()
        .map(|&i| ensemble.iter().map(|tr| norm(tr.x_at(i)).powf(m)).collect())
        .collect();
    let slope_of = |pick: &[usize]| {
        let ys: Vec<f64> = powers
            .iter()
            .map(|pw| (pick.iter().map(|&p| pw[p]).sum::<f64>() / pick.len() as f64).powf(1.0 / m))
            .collect();
        ols(&times, &ys).slope
    };
    let all: Vec<usize> = (0..ensemble.len()).collect();
    let slope = slope_of(&all);
    let (_, lo, hi) = stats::bootstrap(ensemble.len(), resamples, level, key, slope_of);
    Ok(TrendTest { slope, ci_low: lo, ci_high: hi, level, positive_trend: lo > 0.0 })
}

/// An estimate of `[φ]_{C^α_{[s,t]} L_{m,q}}` or its conditional variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeminormEstimate {
    pub alpha: f64,
    pub m: f64,
    /// `None` is `q = ∞`, reported as a 0.999 quantile over outer samples
    pub q: Option<f64>,
    pub value: f64,
    pub std_error: f64,
    pub window: (f64, f64),
    /// the pair `(s, r)` attaining the maximum
    pub argmax: (f64, f64),
    pub conditional: bool,
}

fn window_indices(grid: &crate::noise::Grid, window: (f64, f64)) -> Result<(usize, usize)> {
    let (s, t) = window;
    if !(t > s) || t - s > 1.0 + 1e-12 {
        return Err(Error::input("seminorm window must have 0 < t - s <= 1"));
    }
    let i0 = ((s - grid.t0) / grid.h).round();
    let i1 = ((t - grid.t0) / grid.h).round();
    if i0 < 0.0 || i1 > grid.n as f64 {
        return Err(Error::input("seminorm window leaves the simulated interval"));
    }
    let (i0, i1) = (i0 as usize, i1 as usize);
    if i1 < i0 + 2 {
        return Err(Error::input("seminorm window is shorter than two grid steps"));
    }
    Ok((i0, i1))
}

/// `max_{s ≤ u < r ≤ t} ‖φ_r - φ_u‖_{L_m} / (r - u)^α` over grid pairs
/// (the `q = m` case, where the conditional norm is the plain `L_m` norm).
pub fn holder_seminorm(
    ensemble: &[Trajectory],
    process: Process,
    alpha: f64,
    m: f64,
    window: (f64, f64),
) -> Result<SeminormEstimate> {
    if ensemble.len() < 2 {
        return Err(Error::input("seminorm needs at least two paths"));
    }
    let grid = ensemble[0].grid;
    let (i0, i1) = window_indices(&grid, window)?;
    let d = ensemble[0].dim;
    // values[p][j*d + c]
    let values: Vec<Vec<f64>> = ensemble
        .iter()
        .map(|tr| (i0..=i1).flat_map(|i| (0..d).map(move |c| process.value(tr, i, c))).collect())
        .collect();
    let len = i1 - i0 + 1;
    let mut best = (f64::NEG_INFINITY, 0.0, 0usize, 0usize);
    let mut diffs = vec![0.0; ensemble.len()];
    for u in 0..len {
        for r in (u + 1)..len {
            for (p, v) in values.iter().enumerate() {
                diffs[p] = dist(&v[r * d..(r + 1) * d], &v[u * d..(u + 1) * d]);
            }
            let (nrm, se) = lm_norm(&diffs, m);
            let scale = ((r - u) as f64 * grid.h).powf(alpha);
            if nrm / scale > best.0 {
                best = (nrm / scale, se / scale, u, r);
            }
        }
    }
    Ok(SeminormEstimate {
        alpha,
        m,
        q: Some(m),
        value: best.0,
        std_error: best.1,
        window,
        argmax: (grid.time(i0 + best.2), grid.time(i0 + best.3)),
        conditional: false,
    })
}

/// Nested Monte Carlo estimate of `⟦φ⟧_{C^α_{[s,t]} L_{m,q}}` with the
/// supremum restricted to conditioning times `cond_times`.
///
/// For each outer record and conditioning time `u`, `inner` re-simulations
/// share the record's increments up to `u` and redraw the rest; their
/// spread estimates `E^u |φ_r - E^u φ_r|^m` (with the unbiased variance
/// correction when `m = 2`). `q = None` reports the 0.999 quantile over
/// outer samples as a proxy for the essential supremum.
#[allow(clippy::too_many_arguments)]
pub fn conditional_seminorm<R, S>(
    make_record: R,
    simulate: S,
    outer: usize,
    inner: usize,
    cond_times: &[f64],
    process: Process,
    alpha: f64,
    m: f64,
    q: Option<f64>,
    window: (f64, f64),
    key: StreamKey,
) -> Result<SeminormEstimate>
where
    R: Fn(StreamKey) -> Result<WienerRecord> + Sync,
    S: Fn(&WienerRecord) -> Result<Trajectory> + Sync,
{
    if outer < 2 || inner < 2 || cond_times.is_empty() {
        return Err(Error::input("conditional seminorm needs outer >= 2, inner >= 2 and a conditioning time"));
    }
    if let Some(q) = q {
        if !(q >= 1.0) {
            return Err(Error::input("q must be >= 1"));
        }
    }
    // per outer sample: per (cond time, r) conditional moment
    let per_outer: Vec<Vec<Vec<f64>>> = try_map_indexed(outer, |o| {
        let okey = key.child(o as u64);
        let rec = make_record(okey)?;
        let probe = simulate(&rec)?;
        let grid = probe.grid;
        let (_, i1) = window_indices(&grid, window)?;
        let d = probe.dim;
        let mut out = Vec::with_capacity(cond_times.len());
        for (si, &s) in cond_times.iter().enumerate() {
            let iu = ((s - grid.t0) / grid.h).round() as usize;
            let keep = ((s - rec.t0) / rec.h_fwd).round() as usize;
            let paths: Vec<Vec<f64>> = (0..inner)
                .map(|j| {
                    let r = rec.resample_after(keep, okey.child(1 + si as u64).child(j as u64));
                    let tr = simulate(&r)?;
                    Ok((iu + 1..=i1).flat_map(|i| process.point(&tr, i)).collect())
                })
                .collect::<Result<_>>()?;
            let nr = i1 - iu;
            let moments = (0..nr)
                .map(|ri| {
                    let slot = |j: usize| &paths[j][ri * d..(ri + 1) * d];
                    let mean: Vec<f64> = (0..d)
                        .map(|c| (0..inner).map(|j| slot(j)[c]).sum::<f64>() / inner as f64)
                        .collect();
                    let mut mom = (0..inner).map(|j| dist(slot(j), &mean).powf(m)).sum::<f64>() / inner as f64;
                    if m == 2.0 {
                        mom *= inner as f64 / (inner - 1) as f64;
                    }
                    mom
                })
                .collect();
            out.push(moments);
        }
        Ok::<_, Error>(out)
    })?;
    let grid = {
        let rec = make_record(key.child(0))?;
        simulate(&rec)?.grid
    };
    let mut best = (f64::NEG_INFINITY, 0.0, (0.0, 0.0));
    for (si, &s) in cond_times.iter().enumerate() {
        let iu = ((s - grid.t0) / grid.h).round() as usize;
        for ri in 0..per_outer[0][si].len() {
            let lag = (ri + 1) as f64 * grid.h;
            // (E^u|·|^m)^{1/m} per outer sample
            let cond: Vec<f64> = per_outer.iter().map(|o| o[si][ri].powf(1.0 / m)).collect();
            let (val, se) = match q {
                Some(q) => lm_norm(&cond, q),
                None => {
                    let v = stats::quantile(&cond, 0.999);
                    (v, stats::std_error(&cond))
                }
            };
            let scale = lag.powf(alpha);
            if val / scale > best.0 {
                best = (val / scale, se / scale, (grid.time(iu), grid.time(iu + ri + 1)));
            }
        }
    }
    Ok(SeminormEstimate {
        alpha,
        m,
        q,
        value: best.0,
        std_error: best.1,
        window,
        argmax: best.2,
        conditional: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::{DissipativeDrift, MollifiedDrift};
    use crate::noise::{mvn_split, FbmPath};
    use crate::solver::{integrate, integrate_increments, simulate_ensemble, SolverConfig};

    fn ensemble(hurst: f64, h: f64, n: usize, horizon: f64, kappa: f64) -> Vec<Trajectory> {
        let cfg = SolverConfig { h, horizon, ensemble: n, seed: 11, ..Default::default() };
        simulate_ensemble(&[0.0], &DissipativeDrift::damping(1, kappa), &MollifiedDrift::zero(1), hurst, &cfg).unwrap()
    }

    #[test]
    fn deterministic_moment_curve() {
        let cfg = SolverConfig { h: 0.01, horizon: 2.0, ..Default::default() };
        let noise = FbmPath::zero(cfg.grid().unwrap(), 0.5, 1);
        let tr = integrate(&[2.0], &DissipativeDrift::damping(1, 1.0), &MollifiedDrift::zero(1), &noise, &cfg).unwrap();
        let ens = vec![tr.clone(), tr];
        let mc = moment_curve(&ens, 2.0, 1.0, 10, 20, StreamKey::root(0)).unwrap();
        for (j, t) in mc.times.iter().enumerate() {
            let euler = 2.0 * (1.0 - 0.01f64).powi((t / 0.01).round() as i32);
            assert!((mc.norms[j] - euler).abs() < 1e-12);
            assert!(mc.std_errors[j] < 1e-12);
        }
        assert_eq!(mc.sup, 2.0);
    }

    #[test]
    fn moment_curve_permutation_invariant() {
        let mut ens = ensemble(0.5, 0.05, 40, 2.0, 1.0);
        let a = moment_curve(&ens, 3.0, 1.0, 4, 0, StreamKey::root(1)).unwrap();
        ens.reverse();
        let b = moment_curve(&ens, 3.0, 1.0, 4, 0, StreamKey::root(1)).unwrap();
        for (x, y) in a.norms.iter().zip(&b.norms) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn fbm_increment_seminorm() {
        // ‖B_r - B_s‖_{L_2} = (r-s)^H exactly, so α = H gives ≈ 1
        let ens = ensemble(0.7, 1.0 / 64.0, 400, 1.0, 0.0);
        let est = holder_seminorm(&ens, Process::B, 0.69, 2.0, (0.0, 1.0)).unwrap();
        assert!(est.value > 0.8 && est.value < 1.5, "{est:?}");
        assert!(holder_seminorm(&ens, Process::B, 0.7, 2.0, (0.0, 0.01)).is_err());
        assert!(holder_seminorm(&ens, Process::B, 0.7, 2.0, (0.0, 1.5)).is_err());
    }

    #[test]
    fn lipschitz_part_at_alpha_one() {
        let ens = ensemble(0.3, 1.0 / 64.0, 200, 1.0, 1.0);
        let est = holder_seminorm(&ens, Process::XMinusB, 1.0, 2.0, (0.0, 1.0)).unwrap();
        // |∫F(X)| ≤ sup‖X‖ (r-s) with F = -x
        let sup = moment_curve(&ens, 2.0, 1.0, 1, 0, StreamKey::root(2)).unwrap().sup;
        assert!(est.value <= sup + 4.0 * est.std_error + 1e-9, "{} vs {sup}", est.value);
    }

    #[test]
    fn conditional_bounded_by_twice_unconditional() {
        let hurst = 0.7;
        let cfg = SolverConfig { h: 1.0 / 32.0, horizon: 1.0, ..Default::default() };
        let grid = cfg.grid().unwrap();
        let f = DissipativeDrift::damping(1, 1.0);
        let zero = MollifiedDrift::zero(1);
        let make = |k: StreamKey| WienerRecord::sample(k, &grid, 8.0, cfg.h, 1);
        let sim = |r: &WienerRecord| {
            let split = mvn_split(r, hurst, &grid)?;
            let fbm = split.fbm();
            integrate_increments(&[0.0], &f, &zero, grid, &fbm.coarse_increments(&grid)?)
        };
        let cond = conditional_seminorm(make, sim, 40, 20, &[0.0, 0.5], Process::X, 0.5, 2.0, Some(2.0), (0.0, 1.0), StreamKey::root(5)).unwrap();
        let outer: Vec<Trajectory> = (0..200).map(|o| sim(&make(StreamKey::root(6).child(o)).unwrap()).unwrap()).collect();
        let unc = holder_seminorm(&outer, Process::X, 0.5, 2.0, (0.0, 1.0)).unwrap();
        assert!(cond.value <= 2.0 * unc.value + 3.0 * (cond.std_error + 2.0 * unc.std_error), "{cond:?} {unc:?}");
        assert!(cond.value > 0.0);
        let inf = conditional_seminorm(make, sim, 20, 10, &[0.5], Process::X, 0.5, 2.0, None, (0.0, 1.0), StreamKey::root(5)).unwrap();
        assert!(inf.value.is_finite() && inf.q.is_none());
    }

    #[test]
    fn trend_detects_growth() {
        let ens = ensemble(0.5, 0.05, 200, 10.0, 0.0);
        let t = trend_test(&ens, 2.0, (1.0, 10.0), 4, 200, 0.95, StreamKey::root(3)).unwrap();
        assert!(t.positive_trend, "{t:?}");
        let ou = ensemble(0.5, 0.05, 200, 10.0, 1.0);
        let t = trend_test(&ou, 2.0, (3.0, 10.0), 4, 200, 0.95, StreamKey::root(3)).unwrap();
        assert!(!t.positive_trend, "{t:?}");
    }
}
