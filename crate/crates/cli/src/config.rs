//! Experiment configuration files.
//!
//! ```json
//! {
//!   "schema": 1,
//!   "reservoir": {
//!     "alpha": [0.5, 0.5],
//!     "mu": [0.6, 0.4],
//!     "family": [{"kind": "bernoulli"}, {"kind": "bernoulli"}]
//!   },
//!   "policies": [{"kind": "alg3"}, {"kind": "etc_infinity", "delta_lower_bound": 0.1}],
//!   "horizon": 100000,
//!   "replications": 100,
//!   "master_seed": 7
//! }
//! ```
//!
//! `checkpoints` defaults to the 17-point geometric grid; `output_dir` is
//! optional and overridden by `--out`.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use cab_core::engine::{geometric_checkpoints, DEFAULT_CHECKPOINTS};
use cab_core::{ExperimentPlan, NamedPolicy, PolicyConfig, ReservoirSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub reservoir: ReservoirSpec,
    pub policies: Vec<PolicyConfig>,
    pub horizon: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Vec<u64>>,
    pub replications: u64,
    pub master_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Parses and validates `text`. Errors name `origin` and, where
    /// possible, the offending line and column.
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let config: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| CliError::config(format!("{origin}:{}:{}: {e}", e.line(), e.column())))?;
        config.validate().map_err(|(key, msg)| {
            let line = line_of_key(text, key).unwrap_or(1);
            CliError::config(format!("{origin}:{line}: {msg}"))
        })?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn validate(&self) -> Result<(), (&'static str, String)> {
        if self.schema != SCHEMA_VERSION {
            return Err((
                "schema",
                format!(
                    "unsupported schema {} (expected {SCHEMA_VERSION})",
                    self.schema
                ),
            ));
        }
        if self.policies.is_empty() {
            return Err(("policies", "at least one policy is required".into()));
        }
        let mut seen = HashSet::new();
        for policy in &self.policies {
            policy.validate().map_err(|e| ("policies", e.to_string()))?;
            if !seen.insert(policy.name()) {
                return Err((
                    "policies",
                    format!("policy {} is listed twice", policy.name()),
                ));
            }
        }
        self.plan().validate().map_err(|e| {
            let key = match e {
                cab_core::CabError::Domain { param, .. } => param,
                _ => "horizon",
            };
            (key, e.to_string())
        })
    }

    /// The engine plan, with the master seed replaced by `seed_override`
    /// when given.
    pub fn plan_with_seed(&self, seed_override: Option<u64>) -> ExperimentPlan {
        ExperimentPlan {
            spec: self.reservoir.clone(),
            policies: self
                .policies
                .iter()
                .cloned()
                .map(NamedPolicy::new)
                .collect(),
            horizon: self.horizon,
            checkpoints: self
                .checkpoints
                .clone()
                .unwrap_or_else(|| geometric_checkpoints(self.horizon, DEFAULT_CHECKPOINTS)),
            replications: self.replications,
            master_seed: seed_override.unwrap_or(self.master_seed),
        }
    }

    pub fn plan(&self) -> ExperimentPlan {
        self.plan_with_seed(None)
    }
}

/// 1-based line of the first `"key"` occurrence.
fn line_of_key(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines()
        .position(|l| l.contains(&needle))
        .map(|i| i + 1)
}

/// Reads `CAB_SEED`, if set.
pub fn seed_from_env() -> Result<Option<u64>, CliError> {
    match std::env::var("CAB_SEED") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| {
            CliError::config(format!("CAB_SEED={v:?} is not a 64-bit unsigned integer"))
        }),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::config(format!("CAB_SEED: {e}"))),
    }
}
