//! Run configuration: one JSON document for everything tunable.
//!
//! Every field has a default, so `{}` is a valid config describing the
//! reference system. Unknown keys are rejected at every level to catch
//! typos before they silently fall back to defaults.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::core::{self, SystemSpec, ValidationReport};
use crate::milp::FormulationOptions;
use crate::solver::{SimplexOptions, SolverConfig};

/// Solver knobs exposed through the config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    /// Give up after this many branch-and-bound nodes.
    pub node_limit: usize,
    pub integrality_tol: f64,
    pub feasibility_tol: f64,
    /// Stop once the bound is within this of the incumbent.
    pub absolute_gap: f64,
    /// Simplex iteration cap per LP; zero picks a size-based default.
    pub iteration_limit: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let reference = SolverConfig::default();
        SolverSettings {
            node_limit: reference.node_limit,
            integrality_tol: reference.integrality_tol,
            feasibility_tol: reference.feasibility_tol,
            absolute_gap: reference.absolute_gap,
            iteration_limit: reference.simplex.iteration_limit,
        }
    }
}

impl SolverSettings {
    pub fn to_solver_config(self) -> SolverConfig {
        let reference = SolverConfig::default();
        SolverConfig {
            node_limit: self.node_limit,
            integrality_tol: self.integrality_tol,
            feasibility_tol: self.feasibility_tol,
            absolute_gap: self.absolute_gap,
            simplex: SimplexOptions {
                iteration_limit: self.iteration_limit,
                feasibility_tol: self.feasibility_tol,
                ..reference.simplex
            },
            ..reference
        }
    }
}

/// Everything a run needs beyond the price data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub system: SystemSpec,
    pub formulation: FormulationOptions,
    pub solver: SolverSettings,
    /// Wear price used when the unit is operated pinned to one node;
    /// stationary duty cycles shallower, so wear is priced lower.
    pub stationary_marginal_cost_usd_per_mwh: f64,
    /// Purchase cost of the truck and rig, for context in lifetime
    /// value summaries.
    pub truck_cost_usd: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            system: SystemSpec::default(),
            formulation: FormulationOptions::default(),
            solver: SolverSettings::default(),
            stationary_marginal_cost_usd_per_mwh: 14.0,
            truck_cost_usd: 150_000.0,
        }
    }
}

impl RunConfig {
    /// Parameter sanity check; parsing alone accepts any numbers.
    pub fn validate(&self) -> ValidationReport {
        core::validate(&self.system)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("config is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("config rejected: {0}")]
    Invalid(ValidationReport),
}

/// Parse a config document. Does not validate parameter ranges; callers
/// decide when to do that.
pub fn parse_run_config(json: &str) -> Result<RunConfig, ConfigError> {
    Ok(serde_json::from_str(json)?)
}

/// Load and validate a config file.
pub fn load_run_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let config = parse_run_config(&fs::read_to_string(path)?)?;
    let report = config.validate();
    if !report.is_empty() {
        return Err(ConfigError::Invalid(report));
    }
    Ok(config)
}
