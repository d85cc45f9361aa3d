//! Numerical laboratory for dissipative SDEs driven by fractional Brownian
//! motion with singular (Besov–Hölder) drifts.
//!
//! The crate is split along the pipeline a run goes through:
//!
//! * [`noise`] generates fBm, splits it into history and innovation through
//!   the Mandelbrot–Van Ness representation and evaluates the history operator.
//! * [`drift`] represents smooth, Hölder and distributional drifts through
//!   their heat-semigroup mollifications and audits the dissipative part `F`.
//! * [`solver`] integrates `dX = F(X)dt + b^k(X)dt + dB` and estimates moment
//!   and Hölder statistics over ensembles.
//! * [`longtime`] implements the enhanced Markov evolution `(x, w)`,
//!   Krylov–Bogoliubov sampling, shared-noise coupling and Wasserstein
//!   distances.
//! * [`verify`] runs the scaling-exponent experiments for the regularisation
//!   bounds of the innovation.

pub mod drift;
pub mod error;
pub mod io;
pub mod longtime;
pub mod noise;
pub mod parallel;
pub mod quad;
pub mod rng;
pub mod solver;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
