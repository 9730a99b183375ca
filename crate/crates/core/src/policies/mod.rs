//! Decision rules for the countable-armed bandit.
//!
//! A policy is driven one step at a time: it receives the reward of its
//! previous action (nothing on the first call) and answers with a
//! [`PolicyAction`]. Querying a new arm also plays it, so every action costs
//! exactly one unit of the horizon. Policies assign arm ids themselves by
//! counting their queries; the engine hands out the same consecutive ids.

mod adaptive;
mod etc;
mod nested_ucb;
mod set;
mod ucb;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CabError, Result};
use crate::reservoir::ArmId;

pub use adaptive::{
    commit_threshold, default_burn_in, discard_threshold, AdaptiveEtc, Alg2Verdict,
};
pub use etc::{
    alg1_epoch_params, epoch_verdict, gap_aware_length, EpochVerdict, FixedScheduleEtc, Schedule,
};
pub use nested_ucb::NestedUcb;
pub use set::ConsiderationSet;
pub use ucb::{front_loaded_query_count, ucb_index, UcbOverSet};

/// Per-step decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyAction {
    /// Play an arm returned by an earlier query.
    PlayExisting(ArmId),
    /// Query a new arm from the reservoir and play it.
    QueryNew,
}

/// A permanent commitment made by an explore-then-commit policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Commitment {
    pub arm: ArmId,
    /// Step index (1-based) of the first pull made under the commitment.
    pub time: u64,
}

pub trait Policy {
    /// Next action given the reward of the previous one.
    fn next_action(&mut self, feedback: Option<f64>) -> PolicyAction;

    /// Number of consideration sets queried so far.
    fn epochs(&self) -> u64;

    fn commitment(&self) -> Option<Commitment> {
        None
    }
}

/// Policy selection and parameters, as written in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", from = "RawPolicyConfig")]
pub enum PolicyConfig {
    /// Explore-then-commit with a growing exploration schedule.
    Alg1,
    /// Explore-then-commit with adaptive stopping; `burn_in` defaults to
    /// `⌈√ln n⌉`.
    Alg2 {
        #[serde(skip_serializing_if = "Option::is_none")]
        burn_in: Option<u64>,
    },
    /// Nested UCB1 over pairs of arms.
    Alg3,
    /// Nested UCB1 over K arms.
    Alg4,
    /// Explore-then-commit calibrated by a known lower bound on the gap.
    EtcInfinity { delta_lower_bound: f64 },
    /// Queries `⌈c·ln n / alpha1_hint⌉` arms upfront, then runs UCB1 on them.
    FrontLoadedUcb { alpha1_hint: f64, c: f64 },
    /// UCB1 over a fixed number of queried arms.
    Ucb1 { arms: u64 },
}

fn default_front_load_scale() -> f64 {
    1.0
}

/// Parsing mirror of [`PolicyConfig`]. Parameterless kinds are empty
/// structs here so that stray keys are rejected.
#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawPolicyConfig {
    Alg1 {},
    Alg2 {
        #[serde(default)]
        burn_in: Option<u64>,
    },
    Alg3 {},
    Alg4 {},
    EtcInfinity {
        delta_lower_bound: f64,
    },
    FrontLoadedUcb {
        alpha1_hint: f64,
        #[serde(default = "default_front_load_scale")]
        c: f64,
    },
    Ucb1 {
        arms: u64,
    },
}

impl From<RawPolicyConfig> for PolicyConfig {
    fn from(raw: RawPolicyConfig) -> Self {
        match raw {
            RawPolicyConfig::Alg1 {} => PolicyConfig::Alg1,
            RawPolicyConfig::Alg2 { burn_in } => PolicyConfig::Alg2 { burn_in },
            RawPolicyConfig::Alg3 {} => PolicyConfig::Alg3,
            RawPolicyConfig::Alg4 {} => PolicyConfig::Alg4,
            RawPolicyConfig::EtcInfinity { delta_lower_bound } => {
                PolicyConfig::EtcInfinity { delta_lower_bound }
            }
            RawPolicyConfig::FrontLoadedUcb { alpha1_hint, c } => {
                PolicyConfig::FrontLoadedUcb { alpha1_hint, c }
            }
            RawPolicyConfig::Ucb1 { arms } => PolicyConfig::Ucb1 { arms },
        }
    }
}

impl PolicyConfig {
    /// Default display name.
    pub fn name(&self) -> String {
        match self {
            PolicyConfig::Alg1 => "ALG1".into(),
            PolicyConfig::Alg2 { .. } => "ALG2".into(),
            PolicyConfig::Alg3 => "ALG3".into(),
            PolicyConfig::Alg4 => "ALG4".into(),
            PolicyConfig::EtcInfinity { delta_lower_bound } => {
                format!("ETC-inf({delta_lower_bound})")
            }
            PolicyConfig::FrontLoadedUcb { .. } => "FrontLoadedUCB".into(),
            PolicyConfig::Ucb1 { arms } => format!("UCB1({arms})"),
        }
    }

    /// Whether the policy takes the horizon as input. Such policies are
    /// re-run for every reported horizon.
    pub fn is_horizon_dependent(&self) -> bool {
        matches!(
            self,
            PolicyConfig::Alg1
                | PolicyConfig::Alg2 { .. }
                | PolicyConfig::EtcInfinity { .. }
                | PolicyConfig::FrontLoadedUcb { .. }
        )
    }

    /// Whether the policy commits permanently to one arm.
    pub fn is_etc_family(&self) -> bool {
        matches!(
            self,
            PolicyConfig::Alg1 | PolicyConfig::Alg2 { .. } | PolicyConfig::EtcInfinity { .. }
        )
    }

    /// Smallest horizon the policy accepts for `k` types.
    pub fn min_horizon(&self, k: usize) -> u64 {
        match self {
            PolicyConfig::Alg1 | PolicyConfig::Alg2 { .. } | PolicyConfig::EtcInfinity { .. } => {
                k as u64
            }
            _ => 1,
        }
    }

    /// Parameter checks that do not depend on the reservoir.
    pub fn validate(&self) -> Result<()> {
        match *self {
            PolicyConfig::Alg2 { burn_in: Some(0) } => {
                Err(CabError::InvalidPolicy("burn_in must be at least 1".into()))
            }
            PolicyConfig::EtcInfinity {
                delta_lower_bound: d,
            } if !(d > 0.0 && d <= 1.0) => Err(CabError::InvalidPolicy(format!(
                "delta_lower_bound = {d} must lie in (0, 1]"
            ))),
            PolicyConfig::FrontLoadedUcb { alpha1_hint, c } => {
                if !(alpha1_hint > 0.0 && alpha1_hint <= 1.0) {
                    Err(CabError::InvalidPolicy(format!(
                        "alpha1_hint = {alpha1_hint} must lie in (0, 1]"
                    )))
                } else if !(c > 0.0 && c.is_finite()) {
                    Err(CabError::InvalidPolicy(format!("c = {c} must be positive")))
                } else {
                    Ok(())
                }
            }
            PolicyConfig::Ucb1 { arms: 0 } => Err(CabError::InvalidPolicy(
                "ucb1 needs at least one arm".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Instantiates the policy for a reservoir with `k` types and horizon
    /// `horizon`. `rng` feeds the policy's internal randomness only.
    pub fn build(&self, k: usize, horizon: u64, rng: ChaCha8Rng) -> Result<Box<dyn Policy + Send>> {
        self.validate()?;
        if horizon < self.min_horizon(k) {
            return Err(CabError::HorizonTooShort { horizon, k });
        }
        Ok(match *self {
            PolicyConfig::Alg1 => Box::new(FixedScheduleEtc::new(Schedule::Growing, k, horizon)),
            PolicyConfig::EtcInfinity { delta_lower_bound } => Box::new(FixedScheduleEtc::new(
                Schedule::GapAware { delta_lower_bound },
                k,
                horizon,
            )),
            PolicyConfig::Alg2 { burn_in } => {
                // Short checkpoint horizons clamp the burn-in to n / K.
                let burn_in = burn_in
                    .unwrap_or_else(|| default_burn_in(horizon))
                    .min(horizon / k as u64);
                Box::new(AdaptiveEtc::new(k, horizon, burn_in, rng))
            }
            PolicyConfig::Alg3 => Box::new(NestedUcb::new(2, rng)),
            PolicyConfig::Alg4 => Box::new(NestedUcb::new(k, rng)),
            PolicyConfig::FrontLoadedUcb { alpha1_hint, c } => Box::new(UcbOverSet::new(
                front_loaded_query_count(horizon, alpha1_hint, c),
            )),
            PolicyConfig::Ucb1 { arms } => Box::new(UcbOverSet::new(arms)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::{stream_rng, Stream};

    fn rng() -> ChaCha8Rng {
        stream_rng(0, Stream::Policy)
    }

    #[test]
    fn every_policy_queries_first() {
        let configs = [
            PolicyConfig::Alg1,
            PolicyConfig::Alg2 { burn_in: None },
            PolicyConfig::Alg3,
            PolicyConfig::Alg4,
            PolicyConfig::EtcInfinity {
                delta_lower_bound: 0.1,
            },
            PolicyConfig::FrontLoadedUcb {
                alpha1_hint: 0.5,
                c: 1.0,
            },
            PolicyConfig::Ucb1 { arms: 2 },
        ];
        for config in configs {
            let mut policy = config.build(2, 1000, rng()).unwrap();
            assert_eq!(
                policy.next_action(None),
                PolicyAction::QueryNew,
                "{config:?}"
            );
        }
    }

    #[test]
    fn horizon_dependent_policies_reject_short_horizons() {
        assert!(matches!(
            PolicyConfig::Alg1.build(3, 2, rng()),
            Err(CabError::HorizonTooShort { horizon: 2, k: 3 })
        ));
        assert!(matches!(
            PolicyConfig::Alg2 { burn_in: None }.build(3, 2, rng()),
            Err(CabError::HorizonTooShort { .. })
        ));
        assert!(PolicyConfig::Alg4.build(3, 2, rng()).is_ok());
    }

    #[test]
    fn parameter_validation() {
        assert!(PolicyConfig::EtcInfinity {
            delta_lower_bound: 0.0
        }
        .validate()
        .is_err());
        assert!(PolicyConfig::EtcInfinity {
            delta_lower_bound: 1.5
        }
        .validate()
        .is_err());
        assert!(PolicyConfig::Alg2 { burn_in: Some(0) }.validate().is_err());
        assert!(PolicyConfig::FrontLoadedUcb {
            alpha1_hint: 0.0,
            c: 1.0
        }
        .validate()
        .is_err());
    }

    #[test]
    fn config_json_shape() {
        let parsed: PolicyConfig =
            serde_json::from_str(r#"{"kind":"etc_infinity","delta_lower_bound":0.1}"#).unwrap();
        assert_eq!(
            parsed,
            PolicyConfig::EtcInfinity {
                delta_lower_bound: 0.1
            }
        );
        let parsed: PolicyConfig =
            serde_json::from_str(r#"{"kind":"front_loaded_ucb","alpha1_hint":0.5}"#).unwrap();
        assert_eq!(
            parsed,
            PolicyConfig::FrontLoadedUcb {
                alpha1_hint: 0.5,
                c: 1.0
            }
        );
        assert!(serde_json::from_str::<PolicyConfig>(r#"{"kind":"alg1","extra":1}"#).is_err());
        assert!(serde_json::from_str::<PolicyConfig>(r#"{"kind":"alg9"}"#).is_err());
        assert!(
            serde_json::from_str::<PolicyConfig>(r#"{"kind":"alg2","burn_in":3,"x":0}"#).is_err()
        );
        for config in [PolicyConfig::Alg3, PolicyConfig::Alg2 { burn_in: None }] {
            let text = serde_json::to_string(&config).unwrap();
            assert_eq!(serde_json::from_str::<PolicyConfig>(&text).unwrap(), config);
        }
    }
}
