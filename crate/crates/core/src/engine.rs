//! Episode simulation, replication fan-out, and aggregation.
//!
//! An episode pits one policy against one population of arms for `n` steps
//! and accounts pseudo-regret from the hidden types. An experiment repeats
//! episodes over policies and replications, each replication seeded by
//! [`replication_seed`], and reduces them to mean curves with normal 95%
//! confidence intervals. Horizon-dependent policies are re-run once per
//! checkpoint with that checkpoint as their horizon; anytime policies record
//! every checkpoint in a single run.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{CabError, Result};
use crate::policies::{Policy, PolicyAction, PolicyConfig};
use crate::reservoir::{
    pull_arm, query_arm, regret_increment, ArmId, ArmState, ReservoirSpec, RewardFamily, TypeIndex,
};
use crate::seed::{replication_seed, stream_rng, Stream};

/// z-quantile used for the 95% confidence half-width.
pub const CI_Z: f64 = 1.96;

/// Where queried arms come from.
#[derive(Debug, Clone)]
pub enum Population<'a> {
    /// Types drawn i.i.d. from the reservoir's alpha.
    Reservoir(&'a ReservoirSpec),
    /// Every queried arm has the given type.
    Homogeneous(&'a ReservoirSpec, TypeIndex),
    /// A classical finite-armed instance: query `i` returns arm `i mod len`
    /// with mean `means[i mod len]`. Means need not be distinct.
    Fixed {
        means: Vec<f64>,
        family: RewardFamily,
    },
}

impl Population<'_> {
    fn best_mean(&self) -> f64 {
        match self {
            Population::Reservoir(spec) | Population::Homogeneous(spec, _) => spec.mu()[0],
            Population::Fixed { means, .. } => means.iter().copied().fold(f64::MIN, f64::max),
        }
    }
}

/// What happened on one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub arm: ArmId,
    pub reward: f64,
    pub regret: f64,
}

/// The engine side of an episode: owns the queried arms and their types.
pub struct Environment<'a> {
    population: Population<'a>,
    arms: Vec<ArmState>,
    type_rng: ChaCha8Rng,
    reward_rng: ChaCha8Rng,
    cumulative_regret: f64,
    steps: u64,
}

impl<'a> Environment<'a> {
    pub fn new(population: Population<'a>, episode_seed: u64) -> Self {
        Environment {
            population,
            arms: Vec::new(),
            type_rng: stream_rng(episode_seed, Stream::Reservoir),
            reward_rng: stream_rng(episode_seed, Stream::Rewards),
            cumulative_regret: 0.0,
            steps: 0,
        }
    }

    /// Executes one action: queries if asked, pulls, and charges regret.
    pub fn apply(&mut self, action: PolicyAction) -> Result<StepOutcome> {
        let index = match action {
            PolicyAction::QueryNew => {
                let id = self.arms.len() as ArmId;
                let arm = match &self.population {
                    Population::Reservoir(spec) => query_arm(spec, &mut self.type_rng, id, false),
                    Population::Homogeneous(_, ty) => ArmState::new(id, *ty, false),
                    Population::Fixed { means, .. } => {
                        ArmState::new(id, id as usize % means.len(), false)
                    }
                };
                self.arms.push(arm);
                self.arms.len() - 1
            }
            PolicyAction::PlayExisting(id) => {
                if id >= self.arms.len() as ArmId {
                    return Err(CabError::IllegalAction(id));
                }
                id as usize
            }
        };
        let arm = &mut self.arms[index];
        let (reward, regret) = match &self.population {
            Population::Reservoir(spec) | Population::Homogeneous(spec, _) => {
                let reward = pull_arm(spec, arm, &mut self.reward_rng);
                (reward, regret_increment(spec, arm))
            }
            Population::Fixed { means, family } => {
                let mean = means[arm.hidden_type];
                let reward = family.sample(mean, &mut self.reward_rng);
                arm.pulls += 1;
                arm.reward_sum += reward;
                (reward, self.population.best_mean() - mean)
            }
        };
        self.cumulative_regret += regret;
        self.steps += 1;
        Ok(StepOutcome {
            arm: arm.arm_id,
            reward,
            regret,
        })
    }

    pub fn cumulative_regret(&self) -> f64 {
        self.cumulative_regret
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn arms_queried(&self) -> u64 {
        self.arms.len() as u64
    }

    /// Whether a queried arm is of the optimal type.
    pub fn is_optimal(&self, arm: ArmId) -> Option<bool> {
        let arm = self.arms.get(arm as usize)?;
        Some(self.population.best_mean() == self.mean_of(arm.hidden_type))
    }

    fn mean_of(&self, ty: TypeIndex) -> f64 {
        match &self.population {
            Population::Reservoir(spec) | Population::Homogeneous(spec, _) => spec.mu()[ty],
            Population::Fixed { means, .. } => means[ty],
        }
    }
}

/// Snapshot of an episode at a checkpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckpointRecord {
    pub t: u64,
    pub pseudo_regret: f64,
    pub epochs_used: u64,
    pub arms_queried: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub checkpoints: Vec<CheckpointRecord>,
    pub epochs_used: u64,
    pub commit_time: Option<u64>,
    pub committed_type_is_optimal: Option<bool>,
    pub arms_queried: u64,
    pub pseudo_regret: f64,
}

/// Plays `policy` for `horizon` steps, recording the given checkpoints
/// (sorted, within `1..=horizon`).
pub fn drive(
    policy: &mut dyn Policy,
    env: &mut Environment<'_>,
    horizon: u64,
    checkpoints: &[u64],
) -> Result<EpisodeResult> {
    let mut records = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    let mut feedback = None;
    for t in 1..=horizon {
        let action = policy.next_action(feedback);
        let outcome = env.apply(action)?;
        feedback = Some(outcome.reward);
        while next.peek().is_some_and(|&&c| c == t) {
            next.next();
            records.push(CheckpointRecord {
                t,
                pseudo_regret: env.cumulative_regret(),
                epochs_used: policy.epochs(),
                arms_queried: env.arms_queried(),
            });
        }
    }
    let commitment = policy.commitment();
    Ok(EpisodeResult {
        checkpoints: records,
        epochs_used: policy.epochs(),
        commit_time: commitment.map(|c| c.time),
        committed_type_is_optimal: commitment.and_then(|c| env.is_optimal(c.arm)),
        arms_queried: env.arms_queried(),
        pseudo_regret: env.cumulative_regret(),
    })
}

/// Runs one episode of `policy` on `population` with horizon `horizon`.
pub fn run_episode_on(
    population: Population<'_>,
    k: usize,
    policy: &PolicyConfig,
    horizon: u64,
    seed: u64,
    checkpoints: &[u64],
) -> Result<EpisodeResult> {
    let mut agent = policy.build(k, horizon, stream_rng(seed, Stream::Policy))?;
    let mut env = Environment::new(population, seed);
    drive(agent.as_mut(), &mut env, horizon, checkpoints)
}

/// Runs one reservoir episode, recording only the final step.
pub fn run_episode(
    spec: &ReservoirSpec,
    policy: &PolicyConfig,
    horizon: u64,
    seed: u64,
) -> Result<EpisodeResult> {
    run_episode_on(
        Population::Reservoir(spec),
        spec.k(),
        policy,
        horizon,
        seed,
        &[horizon],
    )
}

/// `{⌈n · 10^{−j/4}⌉ : j = 0..points}`, deduplicated and ascending.
pub fn geometric_checkpoints(horizon: u64, points: usize) -> Vec<u64> {
    let mut grid: Vec<u64> = (0..points)
        .map(|j| {
            let c = (horizon as f64 * 10f64.powf(-(j as f64) / 4.0)).ceil() as u64;
            c.clamp(1, horizon)
        })
        .collect();
    grid.push(horizon);
    grid.sort_unstable();
    grid.dedup();
    grid
}

/// Default number of grid points.
pub const DEFAULT_CHECKPOINTS: usize = 17;

#[derive(Debug, Clone, PartialEq)]
pub struct NamedPolicy {
    pub id: String,
    pub config: PolicyConfig,
}

impl NamedPolicy {
    pub fn new(config: PolicyConfig) -> Self {
        NamedPolicy {
            id: config.name(),
            config,
        }
    }

    pub fn labeled(id: impl Into<String>, config: PolicyConfig) -> Self {
        NamedPolicy {
            id: id.into(),
            config,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub spec: ReservoirSpec,
    pub policies: Vec<NamedPolicy>,
    pub horizon: u64,
    pub checkpoints: Vec<u64>,
    pub replications: u64,
    pub master_seed: u64,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(CabError::domain("replications", "must be at least 1"));
        }
        if self.horizon == 0 {
            return Err(CabError::domain("horizon", "must be at least 1"));
        }
        if self.checkpoints.is_empty() {
            return Err(CabError::domain("checkpoints", "must not be empty"));
        }
        if let Some(&c) = self
            .checkpoints
            .iter()
            .find(|&&c| c == 0 || c > self.horizon)
        {
            return Err(CabError::domain(
                "checkpoints",
                format!("{c} is outside [1, {}]", self.horizon),
            ));
        }
        if self.policies.is_empty() {
            return Err(CabError::domain("policies", "must not be empty"));
        }
        for p in &self.policies {
            p.config.validate()?;
            let min = p.config.min_horizon(self.spec.k());
            if self.horizon < min {
                return Err(CabError::HorizonTooShort {
                    horizon: self.horizon,
                    k: self.spec.k(),
                });
            }
        }
        Ok(())
    }

    fn sorted_checkpoints(&self) -> Vec<u64> {
        let mut c = self.checkpoints.clone();
        c.sort_unstable();
        c.dedup();
        c
    }
}

/// One row of the raw per-replication output.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    pub policy: String,
    pub checkpoint: u64,
    pub replication: u64,
    pub pseudo_regret: f64,
    pub epochs_used: u64,
    pub arms_queried: u64,
    pub commit_time: Option<u64>,
    pub committed_optimal: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub checkpoint: u64,
    pub mean_regret: f64,
    pub ci_halfwidth: f64,
    pub replications: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCurve {
    pub policy: String,
    pub points: Vec<CurvePoint>,
    /// Set when `R = 1`: the half-width is reported as 0 because the sample
    /// standard deviation is undefined.
    pub single_sample: bool,
}

impl AggregateCurve {
    pub fn final_point(&self) -> Option<&CurvePoint> {
        self.points.last()
    }

    pub fn at(&self, checkpoint: u64) -> Option<&CurvePoint> {
        self.points.iter().find(|p| p.checkpoint == checkpoint)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub raw: Vec<RawRecord>,
    pub curves: Vec<AggregateCurve>,
}

/// Rows of one policy replication, one per checkpoint.
fn replicate(
    population: &Population<'_>,
    k: usize,
    policy: &NamedPolicy,
    horizon: u64,
    checkpoints: &[u64],
    replication: u64,
    seed: u64,
) -> Result<Vec<RawRecord>> {
    let row = |c: u64, rec: &CheckpointRecord, ep: &EpisodeResult| {
        let committed = ep.commit_time.filter(|&time| time <= c);
        RawRecord {
            policy: policy.id.clone(),
            checkpoint: c,
            replication,
            pseudo_regret: rec.pseudo_regret,
            epochs_used: rec.epochs_used,
            arms_queried: rec.arms_queried,
            commit_time: committed,
            committed_optimal: committed.and(ep.committed_type_is_optimal),
        }
    };
    if policy.config.is_horizon_dependent() {
        let min = policy.config.min_horizon(k);
        checkpoints
            .iter()
            .map(|&c| {
                // Checkpoints shorter than the policy's minimum horizon are
                // read off a run at that minimum.
                let ep = run_episode_on(
                    population.clone(),
                    k,
                    &policy.config,
                    c.max(min),
                    seed,
                    &[c],
                )?;
                Ok(row(c, &ep.checkpoints[0], &ep))
            })
            .collect()
    } else {
        let ep = run_episode_on(
            population.clone(),
            k,
            &policy.config,
            horizon,
            seed,
            checkpoints,
        )?;
        Ok(checkpoints
            .iter()
            .zip(&ep.checkpoints)
            .map(|(&c, rec)| row(c, rec, &ep))
            .collect())
    }
}

/// Mean and CI half-width of `values`.
pub fn mean_and_ci(values: &[f64]) -> (f64, f64) {
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
    (mean, CI_Z * var.sqrt() / r.sqrt())
}

fn aggregate(
    policy: &str,
    checkpoints: &[u64],
    rows: &[&RawRecord],
    replications: u64,
) -> AggregateCurve {
    let points = checkpoints
        .iter()
        .map(|&c| {
            let values: Vec<f64> = rows
                .iter()
                .filter(|r| r.checkpoint == c)
                .map(|r| r.pseudo_regret)
                .collect();
            let (mean_regret, ci_halfwidth) = mean_and_ci(&values);
            CurvePoint {
                checkpoint: c,
                mean_regret,
                ci_halfwidth,
                replications,
            }
        })
        .collect();
    AggregateCurve {
        policy: policy.to_string(),
        points,
        single_sample: replications == 1,
    }
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| CabError::domain("threads", e.to_string()))
}

#[allow(clippy::too_many_arguments)]
fn run_replications(
    population: &Population<'_>,
    k: usize,
    policies: &[NamedPolicy],
    horizon: u64,
    checkpoints: &[u64],
    replications: u64,
    master_seed: u64,
    threads: usize,
) -> Result<ExperimentOutput> {
    let tasks: Vec<(usize, u64)> = (0..policies.len())
        .flat_map(|p| (0..replications).map(move |r| (p, r)))
        .collect();
    // Results come back in task order, independent of scheduling.
    let results: Vec<Result<Vec<RawRecord>>> = thread_pool(threads)?.install(|| {
        tasks
            .par_iter()
            .map(|&(p, r)| {
                let seed = replication_seed(master_seed, p as u64, r);
                replicate(population, k, &policies[p], horizon, checkpoints, r, seed)
            })
            .collect()
    });
    let mut raw = Vec::with_capacity(tasks.len() * checkpoints.len());
    for rows in results {
        raw.extend(rows?);
    }
    let curves = policies
        .iter()
        .map(|p| {
            let rows: Vec<&RawRecord> = raw.iter().filter(|r| r.policy == p.id).collect();
            aggregate(&p.id, checkpoints, &rows, replications)
        })
        .collect();
    Ok(ExperimentOutput { raw, curves })
}

/// Runs every policy of `plan` for `plan.replications` replications on a
/// pool of `threads` workers.
pub fn run_experiment(plan: &ExperimentPlan, threads: usize) -> Result<ExperimentOutput> {
    plan.validate()?;
    run_replications(
        &Population::Reservoir(&plan.spec),
        plan.spec.k(),
        &plan.policies,
        plan.horizon,
        &plan.sorted_checkpoints(),
        plan.replications,
        plan.master_seed,
        threads,
    )
}

/// UCB1 on a classical two-armed bandit with the given means, as a full
/// experiment output under the policy id `UCB1-2MAB`.
pub fn fixed_two_arm_experiment(
    means: [f64; 2],
    family: RewardFamily,
    horizon: u64,
    checkpoints: &[u64],
    replications: u64,
    master_seed: u64,
    threads: usize,
) -> Result<ExperimentOutput> {
    if replications == 0 {
        return Err(CabError::domain("replications", "must be at least 1"));
    }
    let mut grid = checkpoints.to_vec();
    grid.sort_unstable();
    grid.dedup();
    if grid.is_empty() || grid[0] == 0 || *grid.last().unwrap() > horizon {
        return Err(CabError::domain("checkpoints", "must lie in [1, horizon]"));
    }
    let policy = NamedPolicy::labeled(FIXED_TWO_ARM_ID, PolicyConfig::Ucb1 { arms: 2 });
    run_replications(
        &Population::Fixed {
            means: means.to_vec(),
            family,
        },
        2,
        std::slice::from_ref(&policy),
        horizon,
        &grid,
        replications,
        master_seed,
        threads,
    )
}

pub const FIXED_TWO_ARM_ID: &str = "UCB1-2MAB";

/// Mean-regret curve of [`fixed_two_arm_experiment`]; the reference against
/// which the countable-armed curves are compared.
pub fn regret_oracle_fixed_two_arm(
    means: [f64; 2],
    family: RewardFamily,
    horizon: u64,
    checkpoints: &[u64],
    replications: u64,
    master_seed: u64,
    threads: usize,
) -> Result<AggregateCurve> {
    let out = fixed_two_arm_experiment(
        means,
        family,
        horizon,
        checkpoints,
        replications,
        master_seed,
        threads,
    )?;
    Ok(out.curves.into_iter().next().expect("one policy"))
}
