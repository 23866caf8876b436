//! Simulation and verification toolkit for piecewise Ornstein-Uhlenbeck
//! processes driven by alpha-stable noise.
//!
//! The crate approximates the ergodic measure of the piecewise-linear SDE
//!
//! ```text
//! dX_t = g(X_t) dt + sigma dZ_t,
//! g(x) = l - M (x - <e, x>^+ v) - <e, x>^+ Gamma v,
//! ```
//!
//! with a decreasing-step Euler-Maruyama chain, estimates Wasserstein-1
//! distances between empirical laws with the Sinkhorn-Knopp algorithm, and
//! provides deterministic and statistical checks of the scheme's contraction,
//! convergence-rate, and central-limit behaviour.
//!
//! Module map:
//! - [`model`]: SDE parameterisation, piecewise drift and its mollification,
//!   assumption checks, and the stability-certificate search.
//! - [`noise`]: reproducible counter-based random streams and alpha-stable /
//!   Gaussian increment generation.
//! - [`scheme`]: step-size schedules, the Euler-Maruyama iteration, ensemble
//!   simulation, and the Jacobi-flow integrator.
//! - [`transport`]: empirical measures, the log-domain Sinkhorn solver, and
//!   exact small-instance Wasserstein oracles.
//! - [`analysis`]: closed-form classical-OU characteristic functions, the
//!   deterministic optimality metric, rate fitting, and CLT diagnostics.

pub mod analysis;
pub mod error;
pub mod linalg;
pub mod model;
pub mod noise;
pub mod scheme;
pub mod special;
pub mod transport;

pub use error::{Error, Result};
pub use model::{ModelSpec, NoiseKind, StabilityCertificate};
pub use noise::RngStream;
pub use scheme::{EnsembleResult, StepFamily, StepSchedule};
pub use transport::{EmpiricalMeasure, SinkhornPlan};
