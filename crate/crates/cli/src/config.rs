//! Experiment configuration: a single JSON document with desk-scale defaults.
//!
//! Unknown keys are rejected so a typo fails fast instead of silently running
//! the default. Every command echoes the effective configuration next to its
//! output, making each result self-describing.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stream_bai_core::instance::{benchmark_instance, two_point_instance, Instance};
use stream_bai_core::sampler::{SamplerMode, SolverParams};

use crate::{CliError, CliResult};

/// Instance selection: a builtin name or an inline instance document.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceSpec {
    /// `"benchmark"` (circular three-arm) or `"two_point"` (orthogonal pair).
    Builtin(String),
    /// Full instance JSON, validated on resolution.
    Inline(serde_json::Value),
}

impl InstanceSpec {
    pub fn resolve(&self) -> CliResult<Instance> {
        match self {
            InstanceSpec::Builtin(name) => match name.as_str() {
                "benchmark" => Ok(benchmark_instance()),
                "two_point" => Ok(two_point_instance(1.0)),
                other => Err(CliError::Config(format!(
                    "unknown builtin instance {other:?}; use \"benchmark\", \"two_point\", or an inline instance object"
                ))),
            },
            InstanceSpec::Inline(doc) => Instance::from_json_str(&doc.to_string())
                .map_err(|e| CliError::Config(e.to_string())),
        }
    }
}

/// Design-solver tuning shared by the learned sampler and the design dump.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Ascent iterations per design solve.
    #[serde(rename = "K")]
    pub k: usize,
    /// Fresh draws used by the rescaling line search.
    pub u: usize,
    /// Barrier weight of the soft selection rule.
    pub mu_b: f64,
    /// Accepted slack on the coverage certificate: a dumped rule whose worst
    /// constraint ratio exceeds `1 + epsilon_cert` is reported as a solver
    /// failure.
    pub epsilon_cert: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            k: 20_000,
            u: 4_000,
            mu_b: 2e-5,
            epsilon_cert: 0.25,
        }
    }
}

/// One experiment: instance, budget grid, confidence, modes, solver tuning.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub instance: InstanceSpec,
    /// Stream budgets per sweep cell, ascending.
    pub tau_grid: Vec<u64>,
    /// Target failure probability.
    pub delta: f64,
    /// Repetitions per sweep cell.
    pub trials: usize,
    /// Query rules to sweep.
    pub modes: Vec<SamplerMode>,
    pub solver: SolverConfig,
    /// Master seed; every cell derives its own stream from it.
    pub seed: u64,
    /// Where output files go unless `--out` overrides it.
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            instance: InstanceSpec::Builtin("benchmark".into()),
            tau_grid: vec![10_000, 25_000, 63_000, 160_000, 400_000],
            delta: 0.05,
            trials: 50,
            modes: vec![SamplerMode::Naive, SamplerMode::Oracle, SamplerMode::Learned],
            solver: SolverConfig::default(),
            seed: 7,
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    /// Default configuration, or the parsed and validated file when given.
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let config = match path {
            None => ExperimentConfig::default(),
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| {
                    CliError::Config(format!("cannot read config {}: {e}", p.display()))
                })?;
                serde_json::from_str(&text).map_err(|e| {
                    CliError::Config(format!("cannot parse config {}: {e}", p.display()))
                })?
            }
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> CliResult<()> {
        let fail = |msg: String| Err(CliError::Config(msg));
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.tau_grid.is_empty() {
            return fail("tau_grid must be non-empty".into());
        }
        if self.tau_grid.windows(2).any(|w| w[0] >= w[1]) {
            return fail("tau_grid must be strictly ascending".into());
        }
        if self.tau_grid[0] == 0 {
            return fail("tau_grid entries must be positive".into());
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return fail(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if self.modes.is_empty() {
            return fail("modes must name at least one of naive, oracle, learned".into());
        }
        for (i, m) in self.modes.iter().enumerate() {
            if self.modes[..i].contains(m) {
                return fail(format!("mode {m} listed twice"));
            }
        }
        if !(self.solver.mu_b > 0.0 && self.solver.mu_b < 1.0) {
            return fail(format!("mu_b must lie in (0, 1), got {}", self.solver.mu_b));
        }
        if self.solver.k == 0 || self.solver.u == 0 {
            return fail("solver iteration counts K and u must be positive".into());
        }
        if !(self.solver.epsilon_cert >= 0.0 && self.solver.epsilon_cert.is_finite()) {
            return fail(format!(
                "epsilon_cert must be finite and non-negative, got {}",
                self.solver.epsilon_cert
            ));
        }
        Ok(())
    }

    /// Sampler tuning induced by the solver block; everything else stays at
    /// library defaults.
    pub fn solver_params(&self) -> SolverParams {
        SolverParams {
            sga_iters: self.solver.k,
            rescale_draws: self.solver.u,
            barrier_mu: self.solver.mu_b,
            ..SolverParams::default()
        }
    }

    pub fn resolve_instance(&self) -> CliResult<Instance> {
        self.instance.resolve()
    }
}
