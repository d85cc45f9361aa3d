//! `fbmlab`: batch front end for the fBm SDE lab.
//!
//! Every subcommand takes a flat `key = value` config file, typed flags
//! and repeated `--set key=value` overrides (later sources win), writes CSV
//! and JSON outputs plus a `manifest.json`, and can be rerun exactly with
//! `fbmlab replay <manifest>`.
//!
//! Exit status: 0 ok, 1 runtime failure, 2 numerical divergence, 3 config
//! error.

mod commands;
mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Cmd;
use fbmlab::io::KvConfig;
use fbmlab::{Error, VERSION};

#[derive(Parser, Debug)]
#[command(name = "fbmlab", version, about = "SDEs driven by fractional Brownian motion with singular drifts")]
struct Cli {
    /// output directory
    #[arg(long, global = true, env = "FBMLAB_OUT", default_value = "out")]
    out: PathBuf,

    /// worker threads (default: all cores)
    #[arg(long, global = true, env = "FBMLAB_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// key = value config file
    #[arg(long)]
    config: Option<PathBuf>,

    /// override one config key; repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    #[arg(long)]
    seed: Option<u64>,

    /// also render SVG plots from the emitted CSVs
    #[arg(long)]
    svg: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample fBm paths, optionally split into history and innovation
    #[command(allow_negative_numbers = true)]
    Fbm {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        hurst: Option<f64>,
        /// number of steps
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long)]
        split: bool,
    },
    /// Besov-Hölder norm of a drift
    #[command(allow_negative_numbers = true)]
    Norm {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        eps_min: Option<f64>,
        /// audit grid points per axis
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Ensemble integration with moment curve and seminorm report
    #[command(allow_negative_numbers = true)]
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        hurst: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        ensemble: Option<usize>,
    },
    /// Shared-noise coupling and its contraction rate
    #[command(allow_negative_numbers = true)]
    Couple {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        hurst: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        paths: Option<usize>,
    },
    /// Invariant measure sampling with a stationarity self-test
    #[command(allow_negative_numbers = true)]
    Invariant {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        hurst: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Regularisation exponent experiments
    #[command(allow_negative_numbers = true)]
    Verify {
        #[command(flatten)]
        common: Common,
        /// comma-separated list of reg1..reg4
        #[arg(long)]
        experiment: Option<String>,
        #[arg(long)]
        hurst: Option<f64>,
        #[arg(long)]
        paths: Option<usize>,
    },
    /// Rerun the command recorded in a manifest
    Replay { manifest: PathBuf },
}

fn opt<T: ToString>(key: &'static str, v: &Option<T>) -> Option<(&'static str, String)> {
    v.as_ref().map(|v| (key, v.to_string()))
}

/// Resolves the subcommand into a command and its merged config.
fn resolve(command: &Command) -> Result<(Cmd, KvConfig), Error> {
    let (cmd, common, flags) = match command {
        Command::Fbm { common, hurst, n, h, paths, split } => (
            Cmd::Fbm,
            common,
            vec![
                opt("hurst", hurst),
                opt("n", n),
                opt("h", h),
                opt("paths", paths),
                split.then(|| ("split", "true".to_string())),
            ],
        ),
        Command::Norm { common, gamma, eps_min, grid } => {
            (Cmd::Norm, common, vec![opt("gamma", gamma), opt("eps_min", eps_min), opt("grid", grid)])
        }
        Command::Simulate { common, hurst, h, horizon, ensemble } => (
            Cmd::Simulate,
            common,
            vec![opt("hurst", hurst), opt("h", h), opt("horizon", horizon), opt("ensemble", ensemble)],
        ),
        Command::Couple { common, hurst, h, horizon, paths } => (
            Cmd::Couple,
            common,
            vec![opt("hurst", hurst), opt("h", h), opt("horizon", horizon), opt("paths", paths)],
        ),
        Command::Invariant { common, hurst, h, samples } => {
            (Cmd::Invariant, common, vec![opt("hurst", hurst), opt("h", h), opt("samples", samples)])
        }
        Command::Verify { common, experiment, hurst, paths } => (
            Cmd::Verify,
            common,
            vec![opt("experiment", experiment), opt("hurst", hurst), opt("paths", paths)],
        ),
        Command::Replay { .. } => unreachable!("replay is resolved from its manifest"),
    };
    let mut kv = match &common.config {
        Some(p) => KvConfig::load(p)?,
        None => KvConfig::default(),
    };
    for (k, v) in flags.into_iter().flatten() {
        kv.set(k, v);
    }
    if let Some(s) = common.seed {
        kv.set("seed", s.to_string());
    }
    if common.svg {
        kv.set("svg", "true");
    }
    for s in &common.set {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{s}`")))?;
        kv.set(k.trim(), v.trim());
    }
    Ok((cmd, kv))
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>, Error> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    let (cmd, kv) = match &cli.command {
        Command::Replay { manifest } => {
            let (cmd, kv, version) = commands::load_manifest(manifest)?;
            if version != VERSION {
                eprintln!("warning: manifest written by version {version}, running {VERSION}");
            }
            (cmd, kv)
        }
        other => resolve(other)?,
    };
    commands::execute(cmd, &kv, &cli.out)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Divergence { .. } => 2,
        Error::Config(_) | Error::Input(_) | Error::Domain(_) | Error::UnsupportedRegularity(_) => 3,
        _ => 1,
    }
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", display(&f));
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
