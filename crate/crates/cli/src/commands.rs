//! Subcommand bodies. Each one reads a flat key-value config, writes its
//! files into the output directory and records derived constants for the
//! manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::{json, Map, Value};

use fbmlab::drift::{
    audit_f, besov_norm, dyadic_eps, AuditGrid, DissipativeDrift, DriftKind, DriftSpec, Field, MollifiedDrift, SingularDrift,
    DRIFT_KEYS,
};
use fbmlab::io::{write_json, KvConfig, Table};
use fbmlab::longtime::{
    couple, krylov_bogoliubov, stationarity_test, wasserstein_samples, CouplingConfig, EnhancedConfig, Evolver,
    ASSIGNMENT_CAP,
};
use fbmlab::noise::{mvn_split, CirculantSampler, Grid, Hurst, WienerRecord, DEFAULT_HISTORY_FACTOR};
use fbmlab::rng::StreamKey;
use fbmlab::solver::{holder_seminorm, moment_curve, simulate_ensemble, trend_test, Process, SolverConfig};
use fbmlab::verify::VerifySpec;
use fbmlab::{Error, Result, VERSION};

use crate::plot::{self, Scale};

const COMMON_KEYS: &[&str] = &["seed", "svg"];
const FIELD_KEYS: &[&str] = &["field", "kappa", "k", "audit_box"];
const AUDIT_PAIRS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmd {
    Fbm,
    Norm,
    Simulate,
    Couple,
    Invariant,
    Verify,
}

impl Cmd {
    pub fn name(self) -> &'static str {
        match self {
            Cmd::Fbm => "fbm",
            Cmd::Norm => "norm",
            Cmd::Simulate => "simulate",
            Cmd::Couple => "couple",
            Cmd::Invariant => "invariant",
            Cmd::Verify => "verify",
        }
    }

    fn own_keys(self) -> &'static [&'static str] {
        match self {
            Cmd::Fbm => &["hurst", "n", "h", "paths", "dim", "split", "t_hist", "h_hist"],
            Cmd::Norm => &["dim", "gamma", "eps_min", "grid", "box"],
            Cmd::Simulate => &[
                "hurst", "h", "horizon", "t0", "ensemble", "m", "dim", "x0", "noise_refine", "every", "resamples",
                "alpha", "process", "window", "trend_window", "level",
            ],
            Cmd::Couple => &["hurst", "h", "horizon", "m", "paths", "x", "y", "fit_from", "resamples", "level", "grid"],
            Cmd::Invariant => &[
                "hurst", "h", "t_hist", "block", "dim", "x0", "burn_in", "spacing", "samples", "replicas", "shift",
                "resamples", "m",
            ],
            Cmd::Verify => &[],
        }
    }

    /// Every key the command accepts.
    pub fn keys(self) -> Vec<&'static str> {
        let mut keys: Vec<&str> = COMMON_KEYS.iter().chain(self.own_keys()).copied().collect();
        match self {
            Cmd::Fbm => {}
            Cmd::Norm => keys.extend(DRIFT_KEYS),
            Cmd::Verify => keys.extend(VerifySpec::keys()),
            Cmd::Simulate | Cmd::Couple | Cmd::Invariant => {
                keys.extend(DRIFT_KEYS);
                keys.extend(FIELD_KEYS);
            }
        }
        keys.sort_unstable();
        keys.dedup();
        keys
    }

    fn run(self, kv: &KvConfig, ctx: &mut Ctx) -> Result<()> {
        match self {
            Cmd::Fbm => fbm(kv, ctx),
            Cmd::Norm => norm(kv, ctx),
            Cmd::Simulate => simulate(kv, ctx),
            Cmd::Couple => coupling(kv, ctx),
            Cmd::Invariant => invariant(kv, ctx),
            Cmd::Verify => verify(kv, ctx),
        }
    }
}

impl FromStr for Cmd {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "fbm" => Cmd::Fbm,
            "norm" => Cmd::Norm,
            "simulate" => Cmd::Simulate,
            "couple" => Cmd::Couple,
            "invariant" => Cmd::Invariant,
            "verify" => Cmd::Verify,
            other => return Err(Error::Config(format!("unknown command `{other}`"))),
        })
    }
}

/// Output sink for one run.
pub struct Ctx {
    dir: PathBuf,
    svg: bool,
    outputs: Vec<String>,
    derived: Map<String, Value>,
}

impl Ctx {
    fn path(&mut self, name: &str) -> PathBuf {
        self.outputs.push(name.to_string());
        self.dir.join(name)
    }

    fn table(&mut self, name: &str, t: &Table) -> Result<()> {
        let p = self.path(name);
        t.write(&p)
    }

    fn json<T: serde::Serialize>(&mut self, name: &str, v: &T) -> Result<()> {
        let p = self.path(name);
        write_json(&p, v)
    }

    fn derive(&mut self, key: &str, v: impl serde::Serialize) -> Result<()> {
        self.derived.insert(key.to_string(), serde_json::to_value(v)?);
        Ok(())
    }

    fn line_plot(&mut self, csv: &str, x: &str, ys: &[&str], scales: (Scale, Scale), title: &str) -> Result<()> {
        if !self.svg {
            return Ok(());
        }
        let ys: Vec<String> = ys.iter().map(|s| s.to_string()).collect();
        let svg = plot::lines_from_csv(&self.dir.join(csv), x, &ys, scales.0, scales.1, title)?;
        let name = csv.replace(".csv", ".svg");
        fs::write(self.path(&name), svg)?;
        Ok(())
    }

    fn histogram(&mut self, csv: &str, column: &str, title: &str) -> Result<()> {
        if !self.svg {
            return Ok(());
        }
        let svg = plot::histogram_from_csv(&self.dir.join(csv), column, 40, title)?;
        let name = csv.replace(".csv", ".svg");
        fs::write(self.path(&name), svg)?;
        Ok(())
    }
}

/// Runs `cmd` with `kv`, writing its outputs and `manifest.json` to `dir`.
/// Returns the paths written.
pub fn execute(cmd: Cmd, kv: &KvConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    kv.reject_unknown(&cmd.keys())?;
    fs::create_dir_all(dir)?;
    let mut ctx = Ctx {
        dir: dir.to_path_buf(),
        svg: kv.bool_or("svg", false)?,
        outputs: Vec::new(),
        derived: Map::new(),
    };
    cmd.run(kv, &mut ctx)?;
    let manifest = json!({
        "command": cmd.name(),
        "version": VERSION,
        "config": kv.entries(),
        "derived": ctx.derived,
        "outputs": ctx.outputs,
    });
    write_json(&dir.join("manifest.json"), &manifest)?;
    let mut written: Vec<PathBuf> = ctx.outputs.iter().map(|n| dir.join(n)).collect();
    written.push(dir.join("manifest.json"));
    Ok(written)
}

/// Reads a manifest back into the command and config that produced it.
pub fn load_manifest(path: &Path) -> Result<(Cmd, KvConfig, String)> {
    let v: Value = serde_json::from_str(&fs::read_to_string(path)?)?;
    let bad = || Error::Config(format!("{} is not a run manifest", path.display()));
    let cmd: Cmd = v.get("command").and_then(Value::as_str).ok_or_else(bad)?.parse()?;
    let version = v.get("version").and_then(Value::as_str).unwrap_or("").to_string();
    let mut kv = KvConfig::default();
    for (k, val) in v.get("config").and_then(Value::as_object).ok_or_else(bad)? {
        kv.set(k, val.as_str().ok_or_else(bad)?);
    }
    Ok((cmd, kv, version))
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn positive(kv: &KvConfig, key: &str, default: f64) -> Result<f64> {
    let v = kv.f64_or(key, default)?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(config_err(format!("{key} must be positive, got {v}")));
    }
    Ok(v)
}

fn count(kv: &KvConfig, key: &str, default: usize) -> Result<usize> {
    let v = kv.usize_or(key, default)?;
    if v == 0 {
        return Err(config_err(format!("{key} must be >= 1")));
    }
    Ok(v)
}

fn hurst(kv: &KvConfig, ctx: &mut Ctx, default: f64) -> Result<f64> {
    let h = kv.f64_or("hurst", default)?;
    let hu = Hurst::new(h)?;
    ctx.derive("alpha_h", hu.alpha())?;
    Ok(h)
}

/// A point given as a list key, defaulting to the origin.
fn point(kv: &KvConfig, key: &str, dim: usize) -> Result<Vec<f64>> {
    match kv.f64_list(key)? {
        None => Ok(vec![0.0; dim]),
        Some(v) if v.len() == dim => Ok(v),
        Some(v) => Err(config_err(format!("{key} has {} coordinates, dim is {dim}", v.len()))),
    }
}

fn window(kv: &KvConfig, key: &str, default: (f64, f64)) -> Result<(f64, f64)> {
    match kv.f64_list(key)?.as_deref() {
        None => Ok(default),
        Some([a, b]) if a < b => Ok((*a, *b)),
        Some(_) => Err(config_err(format!("{key} must be two increasing times"))),
    }
}

fn audit_grid_points(dim: usize) -> usize {
    match dim {
        1 => 201,
        2 => 41,
        _ => 11,
    }
}

/// `F` by name. The cubic field only has linear growth on a box, so its
/// `κ3` is declared for the audit box `[-half, half]^d`; `κ1 = κ2 = coef`
/// follows from `<|x|²x - |y|²y, x - y> >= |x - y|⁴/4`.
fn field(kv: &KvConfig, dim: usize, half: f64) -> Result<DissipativeDrift> {
    let kappa = kv.f64_or("kappa", 1.0)?;
    match kv.str_or("field", "damping") {
        "damping" | "linear" => Ok(DissipativeDrift::damping(dim, kappa)),
        "zero" | "none" => Ok(DissipativeDrift::zero(dim)),
        "cubic" => {
            if !(kappa > 0.0) {
                return Err(config_err("cubic field needs kappa > 0"));
            }
            let k3 = kappa * half * half * dim as f64;
            DissipativeDrift::new(Field::Cubic { dim, coef: kappa }, kappa, kappa, k3, None)
        }
        other => Err(config_err(format!("unknown field `{other}` (damping, zero, cubic)"))),
    }
}

/// Builds `F` and the integrated drift and records the drift spec and the
/// constants audit of `F`.
fn drifts(kv: &KvConfig, ctx: &mut Ctx, dim: usize, seed: u64) -> Result<(DissipativeDrift, SingularDrift, MollifiedDrift)> {
    let half = positive(kv, "audit_box", 5.0)?;
    let f = field(kv, dim, half)?;
    let spec = DriftSpec::from_config(kv)?;
    let b = spec.build(dim)?;
    let bk = match kv.get("k") {
        Some(_) => {
            let k = kv.u64_or("k", 1)?;
            if k == 0 || k > u32::MAX as u64 {
                return Err(config_err("k must be a positive mollification level"));
            }
            b.mollify(k as u32)?
        }
        None if b.repr.is_function() => MollifiedDrift::unmollified(&b)?,
        None => return Err(config_err("a distributional drift needs a mollification level k")),
    };
    let audit = audit_f(&f, -half, half, AUDIT_PAIRS, StreamKey::root(seed).child(u64::MAX))?;
    if audit.violations > 0 {
        eprintln!("warning: constants audit of F found {} violations", audit.violations);
    }
    ctx.derive("drift_spec", &spec)?;
    ctx.derive("epsilon", bk.epsilon())?;
    ctx.derive("kappa1", f.kappa1)?;
    ctx.derive("constants_audit", &audit)?;
    Ok((f, b, bk))
}

fn fbm(kv: &KvConfig, ctx: &mut Ctx) -> Result<()> {
    let h_val = hurst(kv, ctx, 0.5)?;
    let n = count(kv, "n", 1024)?;
    let h = positive(kv, "h", 1.0 / 256.0)?;
    let paths = count(kv, "paths", 1)?;
    let dim = count(kv, "dim", 1)?;
    let seed = kv.u64_or("seed", 0)?;
    let grid = Grid::new(0.0, h, n)?;
    let root = StreamKey::root(seed);
    let mut cols = vec!["B_1"];
    if kv.bool_or("split", false)? {
        let t_hist = kv.f64_or("t_hist", DEFAULT_HISTORY_FACTOR * n as f64 * h)?;
        let h_hist = positive(kv, "h_hist", h)?;
        ctx.derive("t_hist", t_hist)?;
        for p in 0..paths {
            let rec = WienerRecord::sample(root.child(p as u64), &grid, t_hist, h_hist, dim)?;
            let split = mvn_split(&rec, h_val, &grid)?;
            if p == 0 {
                ctx.derive("truncation_sd_bound", split.meta.truncation_sd_bound)?;
            }
            ctx.table(&format!("fbm_{p}.csv"), &split.to_table())?;
        }
        cols.extend(["Bbar_1", "Btilde_1"]);
    } else {
        let sampler = CirculantSampler::new(n, h_val)?;
        ctx.derive("truncation_sd_bound", 0.0)?;
        for p in 0..paths {
            ctx.table(&format!("fbm_{p}.csv"), &sampler.path(&grid, dim, root.child(p as u64)).to_table())?;
        }
    }
    ctx.line_plot("fbm_0.csv", "t", &cols, (Scale::Linear, Scale::Linear), &format!("fBm path, H = {h_val}"))
}

fn norm(kv: &KvConfig, ctx: &mut Ctx) -> Result<()> {
    let dim = count(kv, "dim", 1)?;
    let spec = DriftSpec::from_config(kv)?;
    let b = spec.build(dim)?;
    let gamma = kv.f64_or("gamma", b.gamma)?;
    let eps_min = positive(kv, "eps_min", 2f64.powi(-20))?;
    if eps_min > 1.0 {
        return Err(config_err("eps_min must lie in (0, 1]"));
    }
    let levels = (-eps_min.log2() - 1e-9).ceil().max(0.0) as u32;
    let eps = dyadic_eps(levels);
    let points = count(kv, "grid", audit_grid_points(dim))?;
    let half = positive(kv, "box", 4.0)?;
    let grid = AuditGrid::new(-half, half, points, dim)?;
    let est = besov_norm(&b.repr, gamma, &eps, &grid)?;
    ctx.derive("eps_levels", levels)?;
    ctx.json(
        "norm.json",
        &json!({ "drift": spec, "gamma": gamma, "eps_min": eps[eps.len() - 1], "grid_points": points, "box": half, "estimate": est }),
    )?;
    if gamma < 0.0 {
        let mut t = Table::new(["eps", "value"]);
        for &e in &eps {
            t.push(&[e, besov_norm(&b.repr, gamma, &[e], &grid)?.value]);
        }
        ctx.table("norm_profile.csv", &t)?;
        ctx.line_plot("norm_profile.csv", "eps", &["value"], (Scale::Log, Scale::Log), "heat-smoothed sup by eps")?;
    }
    Ok(())
}

fn simulate(kv: &KvConfig, ctx: &mut Ctx) -> Result<()> {
    let h_val = hurst(kv, ctx, 0.5)?;
    let dim = count(kv, "dim", 1)?;
    let seed = kv.u64_or("seed", 0)?;
    let cfg = SolverConfig {
        t0: kv.f64_or("t0", 0.0)?,
        h: positive(kv, "h", 1.0 / 256.0)?,
        horizon: kv.f64_or("horizon", 1.0)?,
        k: None,
        m: kv.f64_or("m", 2.0)?,
        ensemble: count(kv, "ensemble", 200)?,
        seed,
        noise_refine: count(kv, "noise_refine", 1)?,
    };
    cfg.validate()?;
    let x0 = point(kv, "x0", dim)?;
    let process = match kv.str_or("process", "x_minus_b") {
        "x" => Process::X,
        "x_minus_b" => Process::XMinusB,
        "b" => Process::B,
        "k" => Process::K,
        other => return Err(config_err(format!("unknown process `{other}` (x, x_minus_b, b, k)"))),
    };
    let win = window(kv, "window", (cfg.t0, cfg.horizon.min(cfg.t0 + 1.0)))?;
    if win.1 - win.0 > 1.0 || win.0 < cfg.t0 || win.1 > cfg.horizon {
        return Err(config_err("window must lie in [t0, horizon] and span at most 1"));
    }
    let trend_win = match kv.get("trend_window") {
        Some(_) => Some(window(kv, "trend_window", (cfg.t0, cfg.horizon))?),
        None => None,
    };
    let resamples = count(kv, "resamples", 200)?;
    let level = kv.f64_or("level", 0.95)?;
    let (f, _, bk) = drifts(kv, ctx, dim, seed)?;
    let alpha = kv.f64_or("alpha", (1.0 + h_val * bk.parent_gamma().min(0.0)).min(1.0))?;
    ctx.derive("truncation_sd_bound", 0.0)?;
    ctx.derive("alpha", alpha)?;

    let n = cfg.grid()?.n;
    let every = count(kv, "every", (n / 256).max(1))?;
    let ens = simulate_ensemble(&x0, &f, &bk, h_val, &cfg)?;
    let key = StreamKey::root(seed).child(u64::MAX - 1);
    let curve = moment_curve(&ens, cfg.m, f.kappa1, every, resamples, key)?;
    let mut t = Table::new(["t", "norm", "stderr", "bound_shape"]);
    for i in 0..curve.times.len() {
        t.push(&[curve.times[i], curve.norms[i], curve.std_errors[i], curve.bound_shape[i]]);
    }
    ctx.table("moments.csv", &t)?;
    ctx.table("path_0.csv", &ens[0].to_table())?;
    let semi = holder_seminorm(&ens, process, alpha, cfg.m, win)?;
    let trend = match trend_win {
        Some(w) => Some(trend_test(&ens, cfg.m, w, every, resamples, level, key.child(1))?),
        None => None,
    };
    ctx.json(
        "report.json",
        &json!({
            "moment": { "m": curve.m, "sup": curve.sup, "sup_time": curve.sup_time },
            "seminorm": semi,
            "trend": trend,
        }),
    )?;
    ctx.line_plot("moments.csv", "t", &["norm", "bound_shape"], (Scale::Linear, Scale::Linear), "L_m norm of X_t")?;
    ctx.line_plot("path_0.csv", "t", &["X_1", "B_1"], (Scale::Linear, Scale::Linear), "first path")
}

fn coupling(kv: &KvConfig, ctx: &mut Ctx) -> Result<()> {
    let h_val = hurst(kv, ctx, 0.5)?;
    let x = kv.f64_list("x")?.unwrap_or_else(|| vec![1.0]);
    if x.is_empty() {
        return Err(config_err("x needs at least one coordinate"));
    }
    let dim = x.len();
    let y = match kv.f64_list("y")? {
        Some(y) if y.len() == dim => y,
        Some(_) => return Err(config_err("x and y differ in dimension")),
        None => x.iter().map(|v| -v).collect(),
    };
    let cfg = CouplingConfig {
        hurst: h_val,
        h: positive(kv, "h", 1.0 / 256.0)?,
        horizon: positive(kv, "horizon", 10.0)?,
        m: kv.f64_or("m", 2.0)?,
        paths: count(kv, "paths", 200)?,
        seed: kv.u64_or("seed", 0)?,
        fit_from: kv.f64_or("fit_from", 0.2)?,
        resamples: count(kv, "resamples", 200)?,
        level: kv.f64_or("level", 0.95)?,
    };
    let (f, b, bk) = drifts(kv, ctx, dim, cfg.seed)?;
    let b_norm = if b.repr.is_zero() {
        Some(0.0)
    } else {
        let grid = AuditGrid::new(-4.0, 4.0, count(kv, "grid", audit_grid_points(dim))?, dim)?;
        Some(b.norm_estimate(&dyadic_eps(16), &grid)?.value)
    };
    ctx.derive("truncation_sd_bound", 0.0)?;
    let res = couple(&x, &y, &f, &bk, &cfg, b_norm)?;
    ctx.table("coupling.csv", &res.to_table())?;
    ctx.json("summary.json", &res.summary())?;
    ctx.line_plot("coupling.csv", "t", &["dist"], (Scale::Linear, Scale::Log), "coupling distance")
}

fn invariant(kv: &KvConfig, ctx: &mut Ctx) -> Result<()> {
    let h_val = hurst(kv, ctx, 0.5)?;
    let dim = count(kv, "dim", 1)?;
    let seed = kv.u64_or("seed", 0)?;
    let cfg = EnhancedConfig {
        hurst: h_val,
        h: positive(kv, "h", 1.0 / 32.0)?,
        t_hist: positive(kv, "t_hist", 64.0)?,
        block: positive(kv, "block", 8.0)?,
    };
    cfg.validate()?;
    let x0 = point(kv, "x0", dim)?;
    let burn_in = kv.f64_or("burn_in", 20.0)?;
    let spacing = positive(kv, "spacing", 1.0)?;
    let samples = count(kv, "samples", 1000)?;
    let replicas = count(kv, "replicas", 200)?;
    let shift = positive(kv, "shift", 10.0)?;
    let resamples = count(kv, "resamples", 20)?;
    let m = positive(kv, "m", 2.0)?;
    let (f, _, bk) = drifts(kv, ctx, dim, seed)?;
    let hu = Hurst::new(h_val)?;
    ctx.derive("truncation_sd_bound", hu.tail_sd_bound(cfg.block, cfg.t_hist))?;

    let ev = Evolver::new(f, bk, cfg)?;
    let root = StreamKey::root(seed);
    let mu = krylov_bogoliubov(&x0, &ev, burn_in, spacing, samples, root.child(0))?;
    if let Some(w) = &mu.warning {
        eprintln!("warning: {w}");
    }
    let stat = stationarity_test(&x0, &ev, burn_in, shift, replicas, resamples, root.child(1))?;
    let half = mu.len() / 2;
    let halves = if half >= 1 && half <= ASSIGNMENT_CAP {
        Some(wasserstein_samples(&mu.samples[..half], &mu.samples[half..2 * half], 2.0)?)
    } else {
        None
    };
    ctx.table("samples.csv", &mu.to_table())?;
    ctx.json(
        "report.json",
        &json!({
            "samples": mu.len(),
            "time": mu.time,
            "variance": (0..dim).map(|c| mu.variance(c)).collect::<Vec<_>>(),
            "moment": { "m": m, "value": mu.moment(m) },
            "w2_halves": halves,
            "stationarity": stat,
            "warning": mu.warning,
        }),
    )?;
    ctx.histogram("samples.csv", "x_1", "invariant measure samples, first coordinate")
}

fn verify(kv: &KvConfig, ctx: &mut Ctx) -> Result<()> {
    let ids: Vec<String> = kv
        .str_or("experiment", "reg1")
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if ids.is_empty() {
        return Err(config_err("experiment lists no propositions"));
    }
    let mut specs = Vec::with_capacity(ids.len());
    for id in &ids {
        let mut one = kv.clone();
        one.set("experiment", id.as_str());
        let spec = VerifySpec::from_config(&one)?;
        if spec.drift.kind == DriftKind::None {
            return Err(config_err("verify needs a drift (e.g. drift = point_mass)"));
        }
        specs.push(spec);
    }
    hurst(kv, ctx, specs[0].run.hurst)?;
    let mut crossover = Map::new();
    for spec in &specs {
        let exp = spec.execute()?;
        for w in &exp.warnings {
            eprintln!("warning ({}): {w}", exp.id);
        }
        crossover.insert(exp.id.to_string(), json!({ "crossover_lag": exp.crossover_lag, "epsilon": exp.epsilon }));
        let name = exp.id.to_string();
        ctx.table(&format!("{name}.csv"), &exp.to_table())?;
        ctx.json(&format!("{name}.json"), &exp.summary())?;
        ctx.line_plot(
            &format!("{name}.csv"),
            "lag",
            &["lhs_norm"],
            (Scale::Log, Scale::Log),
            &format!("{name}: norm against lag"),
        )?;
    }
    ctx.derive("experiments", crossover)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_command_parses_its_name() {
        for c in [Cmd::Fbm, Cmd::Norm, Cmd::Simulate, Cmd::Couple, Cmd::Invariant, Cmd::Verify] {
            assert_eq!(c.name().parse::<Cmd>().unwrap(), c);
            assert!(c.keys().contains(&"seed") && c.keys().contains(&"svg"));
        }
        assert!("plot".parse::<Cmd>().is_err());
    }

    #[test]
    fn windows_and_points() {
        let mut kv = KvConfig::default();
        kv.set("w", "0.5,1");
        kv.set("p", "1,2");
        assert_eq!(window(&kv, "w", (0.0, 1.0)).unwrap(), (0.5, 1.0));
        assert_eq!(window(&kv, "none", (0.0, 1.0)).unwrap(), (0.0, 1.0));
        assert!(window(&kv, "p", (0.0, 1.0)).is_ok());
        kv.set("w", "1,0.5");
        assert!(window(&kv, "w", (0.0, 1.0)).is_err());
        assert_eq!(point(&kv, "p", 2).unwrap(), vec![1.0, 2.0]);
        assert!(point(&kv, "p", 3).is_err());
        assert_eq!(point(&kv, "q", 2).unwrap(), vec![0.0, 0.0]);
    }
}
