//! Configuration schema and validation.
//!
//! A run is described by one JSON document; unknown keys are rejected so
//! typos surface as errors rather than silently ignored settings. The
//! `--seed`, `--workers`, and `--out` command-line flags override the
//! corresponding fields after parsing.

use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use pou_core::analysis::TestFunction;
use pou_core::model::NoiseKind;
use pou_core::{ModelSpec, StepSchedule};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    CheckModel,
    W1Curve,
    OuOptimality,
    CltCheck,
    SinkhornSelftest,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::CheckModel => "check_model",
            ExperimentKind::W1Curve => "w1_curve",
            ExperimentKind::OuOptimality => "ou_optimality",
            ExperimentKind::CltCheck => "clt_check",
            ExperimentKind::SinkhornSelftest => "sinkhorn_selftest",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKindConfig {
    Brownian,
    CylindricalStable,
    RotationalStable,
}

impl From<NoiseKindConfig> for NoiseKind {
    fn from(k: NoiseKindConfig) -> Self {
        match k {
            NoiseKindConfig::Brownian => NoiseKind::Brownian,
            NoiseKindConfig::CylindricalStable => NoiseKind::CylindricalStable,
            NoiseKindConfig::RotationalStable => NoiseKind::RotationalStable,
        }
    }
}

/// Model block; matrices are nested row arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub d: usize,
    pub ell: Vec<f64>,
    pub m: Vec<Vec<f64>>,
    pub gamma: Vec<f64>,
    pub v: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
    pub alpha: f64,
    pub noise_kind: NoiseKindConfig,
}

impl ModelConfig {
    pub fn to_spec(&self) -> Result<ModelSpec, CliError> {
        let mat = |name: &str, rows: &Vec<Vec<f64>>| -> Result<DMatrix<f64>, CliError> {
            if rows.len() != self.d || rows.iter().any(|r| r.len() != self.d) {
                return Err(CliError::Config(format!(
                    "model.{name}: must be a {0}x{0} nested array",
                    self.d
                )));
            }
            Ok(DMatrix::from_fn(self.d, self.d, |i, j| rows[i][j]))
        };
        let m = mat("m", &self.m)?;
        let sigma = mat("sigma", &self.sigma)?;
        ModelSpec::new(
            self.d,
            DVector::from_vec(self.ell.clone()),
            m,
            DVector::from_vec(self.gamma.clone()),
            DVector::from_vec(self.v.clone()),
            sigma,
            self.alpha,
            self.noise_kind.into(),
        )
        .map_err(|e| CliError::Config(format!("model: {e}")))
    }
}

/// Step-size schedule block, tagged by family.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleConfig {
    /// `eta_n = 1/(c0 + n)`.
    HarmonicOffset { c0: f64, beta: Option<f64> },
    /// `eta_n = 1/(alpha^2 n)` with alpha taken from the model block.
    AlphaHarmonic { beta: Option<f64> },
    Explicit { etas: Vec<f64>, beta: f64 },
}

impl ScheduleConfig {
    pub fn to_schedule(&self, alpha: f64) -> Result<StepSchedule, CliError> {
        let build = || -> pou_core::Result<StepSchedule> {
            match self {
                ScheduleConfig::HarmonicOffset { c0, beta } => {
                    let s = StepSchedule::harmonic_offset(*c0)?;
                    match beta {
                        Some(b) => s.with_beta(*b),
                        None => Ok(s),
                    }
                }
                ScheduleConfig::AlphaHarmonic { beta } => {
                    let s = StepSchedule::alpha_harmonic(alpha)?;
                    match beta {
                        Some(b) => s.with_beta(*b),
                        None => Ok(s),
                    }
                }
                ScheduleConfig::Explicit { etas, beta } => {
                    StepSchedule::explicit(etas.clone(), *beta)
                }
            }
        };
        build().map_err(|e| CliError::Config(format!("schedule: {e}")))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunctionConfig {
    One,
    #[default]
    IndicatorPositive,
    Clip,
    Sin,
}

impl From<TestFunctionConfig> for TestFunction {
    fn from(t: TestFunctionConfig) -> Self {
        match t {
            TestFunctionConfig::One => TestFunction::One,
            TestFunctionConfig::IndicatorPositive => TestFunction::IndicatorPositive,
            TestFunctionConfig::Clip => TestFunction::ClipCoord,
            TestFunctionConfig::Sin => TestFunction::SinCoord,
        }
    }
}

fn default_repeats() -> usize {
    1
}
fn default_ref_mult() -> usize {
    2
}
fn default_tau() -> f64 {
    20.0
}
fn default_workers() -> usize {
    1
}
fn default_outdir() -> PathBuf {
    PathBuf::from("out")
}
fn default_init_grid() -> [f64; 2] {
    [-20.0, 20.0]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub schedule: ScheduleConfig,
    pub experiment: ExperimentKind,
    /// Chain length N1 for the target ensemble.
    pub n_steps: usize,
    /// Trajectory count N2.
    pub n_trajectories: usize,
    /// Repeat count N3 for averaged estimates.
    #[serde(default = "default_repeats")]
    pub n_repeats: usize,
    /// Reference-run length ratio: the reference ensemble runs
    /// `reference_multiplier * n_steps` steps.
    #[serde(default = "default_ref_mult")]
    pub reference_multiplier: usize,
    /// Entropic regularisation strength for Sinkhorn.
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_outdir")]
    pub output_dir: PathBuf,
    /// Endpoints of the reference ensemble's initial linspace grid.
    #[serde(default = "default_init_grid")]
    pub init_grid: [f64; 2],
    /// Test function for CLT statistics.
    #[serde(default)]
    pub test_function: TestFunctionConfig,
    /// Reuse one reference ensemble across repeats instead of drawing fresh
    /// streams per repeat.
    #[serde(default)]
    pub reuse_reference: bool,
}

impl ExperimentConfig {
    /// Semantic validation beyond what the schema enforces; every failure
    /// names the offending field.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.n_steps == 0 {
            return Err(CliError::Config("n_steps: must be >= 1".into()));
        }
        if self.n_trajectories == 0 {
            return Err(CliError::Config("n_trajectories: must be >= 1".into()));
        }
        if self.n_repeats == 0 {
            return Err(CliError::Config("n_repeats: must be >= 1".into()));
        }
        if self.reference_multiplier == 0 {
            return Err(CliError::Config("reference_multiplier: must be >= 1".into()));
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(CliError::Config(format!(
                "tau: must be positive and finite (got {})",
                self.tau
            )));
        }
        if self.workers == 0 {
            return Err(CliError::Config("workers: must be >= 1".into()));
        }
        if !self.init_grid.iter().all(|x| x.is_finite()) || self.init_grid[0] >= self.init_grid[1]
        {
            return Err(CliError::Config(format!(
                "init_grid: must be a finite increasing pair (got {:?})",
                self.init_grid
            )));
        }
        self.model.to_spec()?;
        self.schedule.to_schedule(self.model.alpha)?;
        Ok(())
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let cfg: ExperimentConfig = serde_json::from_str(text)
        .map_err(|e| CliError::Config(format!("configuration parse error: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &std::path::Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Config(format!("cannot read configuration {}: {e}", path.display()))
    })?;
    parse_config(&text)
}
