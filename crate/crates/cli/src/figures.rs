//! Built-in figure configurations.

use std::str::FromStr;

use cab_core::bounds::lai_robbins_curve;
use cab_core::engine::{fixed_two_arm_experiment, run_experiment, ExperimentOutput};
use cab_core::seed::mix;
use cab_core::{PolicyConfig, ReservoirSpec, RewardFamily};

use crate::config::{ExperimentConfig, SCHEMA_VERSION};
use crate::output::reference_curve;
use crate::CliError;

pub const DEFAULT_REPLICATIONS: u64 = 100;
pub const MIN_REPLICATIONS: u64 = 10;
pub const LAI_ROBBINS_ID: &str = "Lai-Robbins";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// ALG3 on Setup 1 against UCB1 on the matching two-armed bandit.
    Fig3,
    /// All policies on Setup 1.
    Fig4,
    /// All policies on Bernoulli 0.9/0.5.
    Fig5,
    /// Three types, Bernoulli 0.9/0.5/0.1.
    Fig6,
}

impl FromStr for Figure {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "fig3" => Ok(Figure::Fig3),
            "fig4" => Ok(Figure::Fig4),
            "fig5" => Ok(Figure::Fig5),
            "fig6" => Ok(Figure::Fig6),
            _ => Err(CliError::config(format!(
                "unknown figure {s:?} (expected fig3, fig4, fig5 or fig6)"
            ))),
        }
    }
}

fn two_type(mu: [f64; 2]) -> ReservoirSpec {
    ReservoirSpec::bernoulli(vec![0.5, 0.5], mu.to_vec()).expect("valid two-type spec")
}

fn two_type_policies(delta_lower_bound: f64) -> Vec<PolicyConfig> {
    vec![
        PolicyConfig::Alg1,
        PolicyConfig::Alg2 { burn_in: None },
        PolicyConfig::Alg3,
        PolicyConfig::EtcInfinity { delta_lower_bound },
        PolicyConfig::FrontLoadedUcb {
            alpha1_hint: 0.5,
            c: 1.0,
        },
    ]
}

impl Figure {
    pub fn tag(self) -> &'static str {
        match self {
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Figure::Fig3 => "2-CAB ALG3 vs 2-MAB UCB1, Bernoulli 0.6/0.4",
            Figure::Fig4 => "K = 2, Bernoulli 0.6/0.4",
            Figure::Fig5 => "K = 2, Bernoulli 0.9/0.5",
            Figure::Fig6 => "K = 3, Bernoulli 0.9/0.5/0.1",
        }
    }

    pub fn config(self, replications: u64) -> ExperimentConfig {
        let (reservoir, policies, horizon, master_seed) = match self {
            Figure::Fig3 => (two_type([0.6, 0.4]), vec![PolicyConfig::Alg3], 100_000, 3),
            Figure::Fig4 => (two_type([0.6, 0.4]), two_type_policies(0.1), 100_000, 4),
            Figure::Fig5 => (two_type([0.9, 0.5]), two_type_policies(0.2), 100_000, 5),
            Figure::Fig6 => {
                let third = 1.0 / 3.0;
                let spec = ReservoirSpec::bernoulli(vec![third; 3], vec![0.9, 0.5, 0.1])
                    .expect("valid three-type spec");
                let policies = vec![
                    PolicyConfig::Alg1,
                    PolicyConfig::Alg2 { burn_in: None },
                    PolicyConfig::Alg4,
                    PolicyConfig::EtcInfinity {
                        delta_lower_bound: 0.2,
                    },
                    PolicyConfig::FrontLoadedUcb {
                        alpha1_hint: third,
                        c: 1.0,
                    },
                ];
                (spec, policies, 10_000, 6)
            }
        };
        ExperimentConfig {
            schema: SCHEMA_VERSION,
            reservoir,
            policies,
            horizon,
            checkpoints: None,
            replications,
            master_seed,
            output_dir: None,
        }
    }

    /// Runs `config`, adding the two-armed references for fig3.
    pub fn run(
        self,
        config: &ExperimentConfig,
        threads: usize,
    ) -> Result<ExperimentOutput, CliError> {
        let plan = config.plan();
        let mut output = run_experiment(&plan, threads)?;
        if self == Figure::Fig3 {
            let mu = config.reservoir.mu();
            let means = [mu[0], mu[1]];
            let reference = fixed_two_arm_experiment(
                means,
                RewardFamily::Bernoulli,
                plan.horizon,
                &plan.checkpoints,
                plan.replications,
                mix(plan.master_seed, 2),
                threads,
            )?;
            output.raw.extend(reference.raw);
            output.curves.extend(reference.curves);
            let grid: Vec<f64> = plan.checkpoints.iter().map(|&c| c as f64).collect();
            let curve = lai_robbins_curve(means[0], means[1], &grid)?;
            output.curves.push(reference_curve(LAI_ROBBINS_ID, &curve));
        }
        Ok(output)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn built_in_configs_validate() {
        for fig in [Figure::Fig3, Figure::Fig4, Figure::Fig5, Figure::Fig6] {
            let config = fig.config(DEFAULT_REPLICATIONS);
            let again = ExperimentConfig::parse(&config.to_json(), fig.tag()).unwrap();
            assert_eq!(again, config);
            assert_eq!(fig.tag().parse::<Figure>().unwrap(), fig);
        }
        assert_eq!("fig7".parse::<Figure>().unwrap_err().code, 2);
    }

    #[test]
    fn figure_parameters() {
        let fig4 = Figure::Fig4.config(100);
        assert_eq!(fig4.horizon, 100_000);
        assert!(fig4.policies.contains(&PolicyConfig::EtcInfinity {
            delta_lower_bound: 0.1
        }));
        assert_eq!(fig4.policies.len(), 5);
        let fig6 = Figure::Fig6.config(100);
        assert_eq!(fig6.horizon, 10_000);
        assert!(fig6.policies.contains(&PolicyConfig::EtcInfinity {
            delta_lower_bound: 0.2
        }));
        assert!(fig6.policies.contains(&PolicyConfig::Alg4));
        let fig5 = Figure::Fig5.config(100);
        assert_eq!(fig5.reservoir.mu(), &[0.9, 0.5]);
    }

    #[test]
    fn fig3_includes_the_two_armed_references() {
        let mut config = Figure::Fig3.config(2);
        config.horizon = 2_000;
        let output = Figure::Fig3.run(&config, 2).unwrap();
        let ids: Vec<&str> = output.curves.iter().map(|c| c.policy.as_str()).collect();
        assert_eq!(ids, ["ALG3", "UCB1-2MAB", LAI_ROBBINS_ID]);
        assert!(output.raw.iter().any(|r| r.policy == "UCB1-2MAB"));
    }
}
