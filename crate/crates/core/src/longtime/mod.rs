//! Long-time behaviour: the Markov evolution of (position, noise history),
//! invariant-measure sampling, shared-noise coupling and Wasserstein
//! distances.

mod coupling;
mod wasserstein;

use serde::{Deserialize, Serialize};

pub use coupling::{couple, CouplingConfig, CouplingResult, CouplingSummary, UNDERFLOW};
pub use wasserstein::{hungarian, wasserstein_samples, ASSIGNMENT_CAP};

use crate::drift::{DissipativeDrift, MollifiedDrift};
use crate::io::{indexed_columns, Table};
use crate::noise::{HistoryPath, Hurst, MvnSplitter};
use crate::parallel::try_map_indexed;
use crate::rng::StreamKey;
use crate::solver::{integrate_increments, Trajectory};
use crate::noise::Grid;
use crate::stats;
use crate::{Error, Result};

/// Position plus the recentred noise history `w` (with `w(0) = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct EnhancedState {
    pub x: Vec<f64>,
    pub w: HistoryPath,
}

impl EnhancedState {
    pub fn new(x: Vec<f64>, w: HistoryPath) -> Result<Self> {
        if x.len() != w.dim() {
            return Err(Error::input("state and history dimensions differ"));
        }
        if w.at_zero().iter().any(|v| *v != 0.0) {
            return Err(Error::input("history must vanish at time 0"));
        }
        Ok(Self { x, w })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnhancedConfig {
    pub hurst: f64,
    /// time step, also the history resolution
    pub h: f64,
    /// length of the stored history window
    pub t_hist: f64,
    /// longest stretch integrated against one history convolution
    pub block: f64,
}

impl EnhancedConfig {
    pub fn validate(&self) -> Result<()> {
        Hurst::new(self.hurst)?;
        if !(self.h > 0.0 && self.h <= 1.0) {
            return Err(Error::input("step h must lie in (0, 1]"));
        }
        if !(self.t_hist >= self.h) || !(self.block >= self.h) {
            return Err(Error::input("history window and block must span at least one step"));
        }
        Ok(())
    }

    fn steps(&self, t: f64) -> usize {
        (t / self.h).round() as usize
    }
}

/// Evolves enhanced states. Holds the precomputed convolutions for the
/// configured block length; other lengths are built on demand.
#[derive(Debug, Clone)]
pub struct Evolver {
    cfg: EnhancedConfig,
    hurst: Hurst,
    f: DissipativeDrift,
    bk: MollifiedDrift,
    block_steps: usize,
    cells: usize,
    splitter: MvnSplitter,
}

impl Evolver {
    pub fn new(f: DissipativeDrift, bk: MollifiedDrift, cfg: EnhancedConfig) -> Result<Self> {
        cfg.validate()?;
        if f.dim() != bk.dim() {
            return Err(Error::input("drift dimensions differ"));
        }
        let hurst = Hurst::new(cfg.hurst)?;
        let block_steps = cfg.steps(cfg.block).max(1);
        let cells = cfg.steps(cfg.t_hist);
        let splitter = MvnSplitter::new(hurst, cfg.h, cells, block_steps);
        Ok(Self { cfg, hurst, f, bk, block_steps, cells, splitter })
    }

    pub fn config(&self) -> &EnhancedConfig {
        &self.cfg
    }

    pub fn drift(&self) -> &DissipativeDrift {
        &self.f
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    /// `δ_x ⊗ W`: position `x0` with a Wiener-law history.
    pub fn initial_state(&self, x0: &[f64], key: StreamKey) -> EnhancedState {
        EnhancedState {
            x: x0.to_vec(),
            w: HistoryPath::wiener(key, self.cells as f64 * self.cfg.h, self.cfg.h, x0.len()),
        }
    }

    /// One stretch of `n` steps: driving increments are those of
    /// `A(w) + B̃` with `B̃` built from fresh Wiener increments, which are
    /// then appended to the history.
    pub fn evolve_path(&self, state: &EnhancedState, n: usize, key: StreamKey) -> Result<(EnhancedState, Trajectory)> {
        let d = state.dim();
        if d != self.dim() {
            return Err(Error::input("state dimension differs from the drift"));
        }
        if state.w.cells() != self.cells || (state.w.step() - self.cfg.h).abs() > 1e-12 * self.cfg.h {
            return Err(Error::input("history geometry differs from the evolver's"));
        }
        let grid = Grid::new(0.0, self.cfg.h, n.max(1))?;
        if n == 0 {
            let tr = integrate_increments(&state.x, &self.f, &self.bk, Grid { n: 0, ..grid }, &vec![Vec::new(); d])?;
            return Ok((state.clone(), tr));
        }
        let built;
        let splitter = if n == self.block_steps {
            &self.splitter
        } else {
            built = MvnSplitter::new(self.hurst, self.cfg.h, self.cells, n);
            &built
        };
        let mut rng = key.rng();
        let mut fresh = Vec::with_capacity(d);
        let mut drive = Vec::with_capacity(d);
        for c in 0..d {
            let mut dw = vec![0.0; n];
            rng.fill_normal(&mut dw, self.cfg.h);
            let innov = splitter.innovation(&dw);
            let hist = splitter.history(&state.w.increments(c));
            drive.push((0..n).map(|i| (innov[i + 1] + hist[i + 1]) - (innov[i] + hist[i])).collect::<Vec<f64>>());
            fresh.push(dw);
        }
        let tr = integrate_increments(&state.x, &self.f, &self.bk, grid, &drive)?;
        let next = EnhancedState {
            x: tr.x_final().to_vec(),
            w: state.w.shifted(&fresh),
        };
        Ok((next, tr))
    }

    /// `ξ(0, δ, x, w)`, integrated in blocks; block `b` draws from
    /// `key.child(b)`.
    pub fn evolve(&self, state: &EnhancedState, delta: f64, key: StreamKey) -> Result<EnhancedState> {
        if !(delta >= 0.0) {
            return Err(Error::input("evolution time must be nonnegative"));
        }
        let mut left = self.cfg.steps(delta);
        let mut cur = state.clone();
        let mut b = 0;
        while left > 0 {
            let n = left.min(self.block_steps);
            cur = self.evolve_path(&cur, n, key.child(b))?.0;
            left -= n;
            b += 1;
        }
        Ok(cur)
    }
}

/// Free-function form of [`Evolver::evolve`].
pub fn evolve_enhanced(
    state: &EnhancedState,
    f: &DissipativeDrift,
    bk: &MollifiedDrift,
    delta: f64,
    cfg: EnhancedConfig,
    key: StreamKey,
) -> Result<EnhancedState> {
    Evolver::new(f.clone(), bk.clone(), cfg)?.evolve(state, delta, key)
}

/// Monte Carlo `(P_{0,t} f)(x, w)` with its standard error.
pub fn semigroup_estimate<G>(f: G, evolver: &Evolver, state: &EnhancedState, t: f64, n: usize, key: StreamKey) -> Result<(f64, f64)>
where
    G: Fn(&EnhancedState) -> f64 + Sync,
{
    if n < 30 {
        return Err(Error::input("semigroup estimate needs n >= 30"));
    }
    let vals = try_map_indexed(n, |j| evolver.evolve(state, t, key.child(j as u64)).map(|s| f(&s)))?;
    Ok((stats::mean(&vals), stats::std_error(&vals)))
}

/// Uniformly weighted samples of the position marginal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    pub samples: Vec<Vec<f64>>,
    /// time of the last sample
    pub time: f64,
    pub burn_in: f64,
    pub spacing: f64,
    pub warning: Option<String>,
}

impl EmpiricalMeasure {
    pub fn from_samples(samples: Vec<Vec<f64>>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::input("empirical measure needs samples"));
        }
        Ok(Self { samples, time: 0.0, burn_in: 0.0, spacing: 0.0, warning: None })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    /// Sample variance of coordinate `c`.
    pub fn variance(&self, c: usize) -> f64 {
        let v: Vec<f64> = self.samples.iter().map(|s| s[c]).collect();
        stats::variance(&v)
    }

    pub fn moment(&self, m: f64) -> f64 {
        let v: Vec<f64> = self
            .samples
            .iter()
            .map(|s| s.iter().map(|x| x * x).sum::<f64>().sqrt().powf(m))
            .collect();
        stats::mean(&v)
    }

    /// CSV `sample_index,x_1..x_d`.
    pub fn to_table(&self) -> Table {
        let mut header = vec!["sample_index".to_string()];
        header.extend(indexed_columns("x", self.dim()));
        let mut t = Table::new(header);
        for (i, s) in self.samples.iter().enumerate() {
            t.push_indexed(i, s);
        }
        t
    }
}

/// `W_m` between two empirical measures.
pub fn wasserstein(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, m: f64) -> Result<f64> {
    wasserstein_samples(&mu.samples, &nu.samples, m)
}

/// Samples the position along one enhanced trajectory started from
/// `δ_{x0} ⊗ W` at times `burn_in + i spacing`.
pub fn krylov_bogoliubov(
    x0: &[f64],
    evolver: &Evolver,
    burn_in: f64,
    spacing: f64,
    n_samples: usize,
    key: StreamKey,
) -> Result<EmpiricalMeasure> {
    if n_samples == 0 || !(spacing > 0.0) || !(burn_in >= 0.0) {
        return Err(Error::input("need n_samples >= 1, spacing > 0 and burn_in >= 0"));
    }
    let h = evolver.config().h;
    let warning = (evolver.drift().kappa1 <= 0.0)
        .then(|| "kappa1 <= 0: an invariant measure need not exist".to_string());
    let first = (burn_in / h).round() as usize;
    let stride = ((spacing / h).round() as usize).max(1);
    let last = first + (n_samples - 1) * stride;
    let mut samples = Vec::with_capacity(n_samples);
    let mut state = evolver.initial_state(x0, key.child(0));
    let mut next = first;
    if next == 0 {
        samples.push(state.x.clone());
        next += stride;
    }
    let mut offset = 0;
    let mut b = 0;
    while samples.len() < n_samples {
        let n = (last - offset).min(evolver.block_steps);
        let (s, tr) = evolver.evolve_path(&state, n, key.child(1).child(b))?;
        while next <= offset + n && samples.len() < n_samples {
            samples.push(tr.x_at(next - offset).to_vec());
            next += stride;
        }
        state = s;
        offset += n;
        b += 1;
    }
    Ok(EmpiricalMeasure {
        samples,
        time: last as f64 * h,
        burn_in,
        spacing: stride as f64 * h,
        warning,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub w2: f64,
    pub noise_floor: f64,
    pub passed: bool,
}

/// Compares the position laws at `burn_in` and `burn_in + shift` over
/// independent replicas. The noise floor is the mean `W_2` between two
/// independent bootstrap resamples of the first cloud; the test passes
/// when the observed distance is below twice the floor.
pub fn stationarity_test(
    x0: &[f64],
    evolver: &Evolver,
    burn_in: f64,
    shift: f64,
    replicas: usize,
    resamples: usize,
    key: StreamKey,
) -> Result<StationarityReport> {
    if replicas < 2 || resamples == 0 {
        return Err(Error::input("need at least two replicas and one resample"));
    }
    let pairs = try_map_indexed(replicas, |r| {
        let rk = key.child(r as u64);
        let s0 = evolver.initial_state(x0, rk.child(0));
        let a = evolver.evolve(&s0, burn_in, rk.child(1))?;
        let b = evolver.evolve(&a, shift, rk.child(2))?;
        Ok::<_, Error>((a.x, b.x))
    })?;
    let (mu, nu): (Vec<Vec<f64>>, Vec<Vec<f64>>) = pairs.into_iter().unzip();
    let w2 = wasserstein_samples(&mu, &nu, 2.0)?;
    let mut rng = key.child(u64::MAX).rng();
    let mut floor = 0.0;
    for _ in 0..resamples {
        let a: Vec<Vec<f64>> = (0..replicas).map(|_| mu[rng.index(replicas)].clone()).collect();
        let b: Vec<Vec<f64>> = (0..replicas).map(|_| mu[rng.index(replicas)].clone()).collect();
        floor += wasserstein_samples(&a, &b, 2.0)?;
    }
    let noise_floor = floor / resamples as f64;
    Ok(StationarityReport { w2, noise_floor, passed: w2 < 2.0 * noise_floor })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::hh_norm;
    use crate::solver::{integrate, SolverConfig};
    use crate::noise::sample_fbm_circulant;

    fn evolver(hurst: f64, kappa: f64, h: f64, t_hist: f64, block: f64) -> Evolver {
        Evolver::new(
            DissipativeDrift::damping(1, kappa),
            MollifiedDrift::zero(1),
            EnhancedConfig { hurst, h, t_hist, block },
        )
        .unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let ev = evolver(0.3, 1.0, 0.01, 2.0, 0.5);
        let s = ev.initial_state(&[0.4], StreamKey::root(1));
        assert_eq!(ev.evolve(&s, 0.0, StreamKey::root(2)).unwrap(), s);
    }

    #[test]
    fn history_stays_recentred_and_bounded() {
        let ev = evolver(0.7, 1.0, 0.01, 2.0, 0.3);
        let mut s = ev.initial_state(&[0.0], StreamKey::root(3));
        for j in 0..5 {
            s = ev.evolve(&s, 0.37, StreamKey::root(4).child(j)).unwrap();
            assert_eq!(s.w.at_zero(), vec![0.0]);
            assert_eq!(s.w.cells(), 200);
            assert!(hh_norm(&s.w.subsample(4), 0.7).unwrap().is_finite());
        }
    }

    #[test]
    fn evolved_history_keeps_wiener_scaling() {
        // increments of the evolved history over lag L have variance L
        let ev = evolver(0.7, 1.0, 0.01, 4.0, 1.0);
        let finals: Vec<EnhancedState> = (0..300)
            .map(|r| {
                let s = ev.initial_state(&[0.0], StreamKey::root(5).child(r));
                ev.evolve(&s, 1.5, StreamKey::root(6).child(r)).unwrap()
            })
            .collect();
        for lag in [10usize, 300] {
            let inc: Vec<f64> = finals.iter().map(|s| s.w.values()[0][400] - s.w.values()[0][400 - lag]).collect();
            let var = inc.iter().map(|x| x * x).sum::<f64>() / inc.len() as f64;
            let target = lag as f64 * 0.01;
            let se = target * (2.0 / inc.len() as f64).sqrt();
            assert!((var - target).abs() < 3.0 * se, "lag {lag}: {var} vs {target}");
        }
    }

    #[test]
    fn brownian_transition_matches_plain_solver() {
        let ev = evolver(0.5, 1.0, 0.02, 1.0, 1.0);
        let n = 4000;
        let a: Vec<f64> = (0..n)
            .map(|r| {
                let s = ev.initial_state(&[1.0], StreamKey::root(7).child(r));
                ev.evolve(&s, 1.0, StreamKey::root(8).child(r)).unwrap().x[0]
            })
            .collect();
        let cfg = SolverConfig { h: 0.02, horizon: 1.0, ..Default::default() };
        let b: Vec<f64> = (0..n)
            .map(|r| {
                let noise = sample_fbm_circulant(&cfg.grid().unwrap(), 0.5, 1, StreamKey::root(9).child(r)).unwrap();
                integrate(&[1.0], &DissipativeDrift::damping(1, 1.0), &MollifiedDrift::zero(1), &noise, &cfg).unwrap().x_final()[0]
            })
            .collect();
        assert!(stats::ks_statistic(&a, &b) < 0.05);
    }

    #[test]
    fn semigroup_basics() {
        let ev = evolver(0.3, 1.0, 0.01, 4.0, 1.0);
        let s = EnhancedState::new(vec![2.0], HistoryPath::zero(0.01, 400, 1)).unwrap();
        let (one, se) = semigroup_estimate(|_| 1.0, &ev, &s, 0.5, 40, StreamKey::root(10)).unwrap();
        assert_eq!((one, se), (1.0, 0.0));
        // zero history: the mean follows the deterministic Euler flow
        let (m, se) = semigroup_estimate(|st| st.x[0], &ev, &s, 1.0, 2000, StreamKey::root(11)).unwrap();
        let euler = 2.0 * 0.99f64.powi(100);
        assert!((m - euler).abs() < 3.0 * se + 1e-3, "{m} vs {euler} ± {se}");
        assert!(semigroup_estimate(|_| 1.0, &ev, &s, 0.5, 10, StreamKey::root(10)).is_err());
    }

    #[test]
    fn chapman_kolmogorov() {
        let ev = evolver(0.3, 1.0, 0.01, 4.0, 1.0);
        let s = ev.initial_state(&[1.0], StreamKey::root(12));
        let sq = |st: &EnhancedState| st.x[0] * st.x[0];
        let (direct, se1) = semigroup_estimate(sq, &ev, &s, 1.0, 3000, StreamKey::root(13)).unwrap();
        let two: Vec<f64> = (0..3000)
            .map(|j| {
                let k = StreamKey::root(14).child(j);
                let mid = ev.evolve(&s, 0.5, k.child(0)).unwrap();
                sq(&ev.evolve(&mid, 0.5, k.child(1)).unwrap())
            })
            .collect();
        let (m2, se2) = (stats::mean(&two), stats::std_error(&two));
        assert!((direct - m2).abs() < 3.0 * (se1 * se1 + se2 * se2).sqrt(), "{direct} vs {m2}");
    }

    #[test]
    fn kb_brownian_ou_variance() {
        let ev = evolver(0.5, 1.0, 1.0 / 32.0, 1.0, 64.0);
        let mu = krylov_bogoliubov(&[3.0], &ev, 20.0, 1.0, 20_000, StreamKey::root(15)).unwrap();
        assert_eq!(mu.len(), 20_000);
        assert!(mu.warning.is_none());
        let h = 1.0 / 32.0;
        let oracle = 1.0 / (2.0 - h);
        assert!((mu.variance(0) - oracle).abs() / oracle < 0.05, "{}", mu.variance(0));
    }

    #[test]
    fn kb_warns_without_dissipation() {
        let ev = evolver(0.5, 0.0, 0.1, 1.0, 1.0);
        let mu = krylov_bogoliubov(&[0.0], &ev, 0.0, 0.5, 3, StreamKey::root(16)).unwrap();
        assert!(mu.warning.is_some());
        assert_eq!(mu.samples[0], vec![0.0]);
    }

    #[test]
    fn stationarity_of_ou() {
        let ev = evolver(0.5, 1.0, 1.0 / 16.0, 1.0, 16.0);
        let r = stationarity_test(&[0.0], &ev, 10.0, 10.0, 1000, 20, StreamKey::root(17)).unwrap();
        assert!(r.passed, "{r:?}");
        // starting far away and comparing at a short burn-in is not stationary
        let r = stationarity_test(&[8.0], &ev, 0.5, 10.0, 1000, 20, StreamKey::root(18)).unwrap();
        assert!(!r.passed, "{r:?}");
    }
}
