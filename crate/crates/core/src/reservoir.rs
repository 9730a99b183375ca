//! The arm reservoir: an infinite population of arms, each carrying one of
//! `K` latent types.
//!
//! A [`ReservoirSpec`] is the hidden ground truth. Arms are drawn from it with
//! [`query_arm`] and played with [`pull_arm`]. The type of an arm never leaves
//! this crate except through [`regret_increment`] and the engine's
//! bookkeeping, so policies only ever see arm ids and rewards.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CabError, Result};

/// Tolerance on `Σ alpha = 1`.
const ALPHA_SUM_TOL: f64 = 1e-12;

/// Index of an arm type. Type 0 is the optimal one (largest mean).
pub type TypeIndex = usize;

/// Episode-local identifier of a queried arm, assigned consecutively from 0.
pub type ArmId = u64;

/// Reward distribution of a type, parameterized by the type's mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RewardFamily {
    /// Bernoulli(μ).
    Bernoulli,
    /// Uniform on `[μ - half_width, μ + half_width]`.
    UniformAround { half_width: f64 },
    /// Always returns μ.
    PointMass,
}

impl RewardFamily {
    pub fn sample<R: Rng + ?Sized>(&self, mean: f64, rng: &mut R) -> f64 {
        match *self {
            RewardFamily::Bernoulli => {
                if rng.random::<f64>() < mean {
                    1.0
                } else {
                    0.0
                }
            }
            RewardFamily::UniformAround { half_width } => {
                let u: f64 = rng.random();
                (mean + half_width * (2.0 * u - 1.0)).clamp(0.0, 1.0)
            }
            RewardFamily::PointMass => mean,
        }
    }
}

/// Ground truth of a K-typed reservoir.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct ReservoirSpec {
    alpha: Vec<f64>,
    mu: Vec<f64>,
    family: Vec<RewardFamily>,
    cumulative: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    alpha: Vec<f64>,
    mu: Vec<f64>,
    family: Vec<RewardFamily>,
}

impl TryFrom<RawSpec> for ReservoirSpec {
    type Error = CabError;

    fn try_from(raw: RawSpec) -> Result<Self> {
        ReservoirSpec::new(raw.alpha, raw.mu, raw.family)
    }
}

impl From<ReservoirSpec> for RawSpec {
    fn from(spec: ReservoirSpec) -> Self {
        RawSpec {
            alpha: spec.alpha,
            mu: spec.mu,
            family: spec.family,
        }
    }
}

/// Sub-optimality gaps of a reservoir.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaps {
    /// μ₁ − μ_K.
    pub max: f64,
    /// μ₁ − μ₂.
    pub min_suboptimal: f64,
    /// Smallest gap between adjacent means.
    pub min_adjacent: f64,
}

impl ReservoirSpec {
    pub fn new(alpha: Vec<f64>, mu: Vec<f64>, family: Vec<RewardFamily>) -> Result<Self> {
        let mut spec = ReservoirSpec {
            alpha,
            mu,
            family,
            cumulative: Vec::new(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Same family for every type.
    pub fn uniform_family(alpha: Vec<f64>, mu: Vec<f64>, family: RewardFamily) -> Result<Self> {
        let k = mu.len();
        Self::new(alpha, mu, vec![family; k])
    }

    /// Bernoulli rewards for every type.
    pub fn bernoulli(alpha: Vec<f64>, mu: Vec<f64>) -> Result<Self> {
        Self::uniform_family(alpha, mu, RewardFamily::Bernoulli)
    }

    fn validate(&mut self) -> Result<()> {
        let k = self.mu.len();
        if k < 2 {
            return Err(CabError::InvalidSpec(format!(
                "need at least 2 types, got {k}"
            )));
        }
        if self.alpha.len() != k || self.family.len() != k {
            return Err(CabError::InvalidSpec(format!(
                "alpha has {} entries, mu {}, family {}; all must match",
                self.alpha.len(),
                k,
                self.family.len()
            )));
        }
        if let Some((i, a)) = self
            .alpha
            .iter()
            .enumerate()
            .find(|(_, a)| !(a.is_finite() && **a > 0.0))
        {
            return Err(CabError::InvalidSpec(format!(
                "alpha[{i}] = {a} must be positive"
            )));
        }
        let total: f64 = self.alpha.iter().sum();
        if (total - 1.0).abs() > ALPHA_SUM_TOL {
            return Err(CabError::InvalidSpec(format!(
                "alpha sums to {total}, expected 1"
            )));
        }
        if let Some((i, m)) = self
            .mu
            .iter()
            .enumerate()
            .find(|(_, m)| !(0.0..=1.0).contains(*m))
        {
            return Err(CabError::InvalidSpec(format!(
                "mu[{i}] = {m} outside [0,1]"
            )));
        }
        if let Some(i) = (1..k).find(|&i| self.mu[i] >= self.mu[i - 1]) {
            return Err(CabError::InvalidSpec(format!(
                "mu must be strictly decreasing: mu[{}] = {} >= mu[{}] = {}",
                i,
                self.mu[i],
                i - 1,
                self.mu[i - 1]
            )));
        }
        for (i, (fam, &m)) in self.family.iter().zip(&self.mu).enumerate() {
            if let RewardFamily::UniformAround { half_width } = *fam {
                if !(half_width >= 0.0 && m - half_width >= 0.0 && m + half_width <= 1.0) {
                    return Err(CabError::InvalidSpec(format!(
                        "type {i}: uniform half-width {half_width} around {m} leaves [0,1]"
                    )));
                }
            }
        }
        let mut acc = 0.0;
        self.cumulative = self
            .alpha
            .iter()
            .map(|a| {
                acc += a;
                acc
            })
            .collect();
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.mu.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn family(&self) -> &[RewardFamily] {
        &self.family
    }

    /// `K! Π α_i`, the probability that K queried arms have distinct types.
    pub fn distinct_types_probability(&self) -> f64 {
        let k = self.k();
        let factorial: f64 = (1..=k).map(|i| i as f64).product();
        factorial * self.alpha.iter().product::<f64>()
    }

    pub fn derived_gaps(&self) -> Gaps {
        let k = self.k();
        let min_adjacent = self
            .mu
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(f64::INFINITY, f64::min);
        Gaps {
            max: self.mu[0] - self.mu[k - 1],
            min_suboptimal: self.mu[0] - self.mu[1],
            min_adjacent,
        }
    }

    /// Draws a type index from alpha.
    pub fn sample_type<R: Rng + ?Sized>(&self, rng: &mut R) -> TypeIndex {
        let u: f64 = rng.random();
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.k() - 1)
    }
}

/// A queried arm. The type is readable only inside the crate.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmState {
    pub arm_id: ArmId,
    pub(crate) hidden_type: TypeIndex,
    pub pulls: u64,
    pub reward_sum: f64,
    pub reward_log: Option<Vec<f64>>,
}

impl ArmState {
    pub(crate) fn new(arm_id: ArmId, hidden_type: TypeIndex, log_rewards: bool) -> Self {
        ArmState {
            arm_id,
            hidden_type,
            pulls: 0,
            reward_sum: 0.0,
            reward_log: log_rewards.then(Vec::new),
        }
    }

    pub fn mean_reward(&self) -> Option<f64> {
        (self.pulls > 0).then(|| self.reward_sum / self.pulls as f64)
    }
}

/// Queries a fresh arm whose type is drawn from `spec.alpha`.
pub fn query_arm<R: Rng + ?Sized>(
    spec: &ReservoirSpec,
    rng: &mut R,
    arm_id: ArmId,
    log_rewards: bool,
) -> ArmState {
    ArmState::new(arm_id, spec.sample_type(rng), log_rewards)
}

/// Plays `arm` once and returns the reward.
pub fn pull_arm<R: Rng + ?Sized>(spec: &ReservoirSpec, arm: &mut ArmState, rng: &mut R) -> f64 {
    let ty = arm.hidden_type;
    let reward = spec.family[ty].sample(spec.mu[ty], rng);
    arm.pulls += 1;
    arm.reward_sum += reward;
    if let Some(log) = arm.reward_log.as_mut() {
        log.push(reward);
    }
    reward
}

/// Pseudo-regret of one pull of `arm`: μ₁ − μ_type.
pub fn regret_increment(spec: &ReservoirSpec, arm: &ArmState) -> f64 {
    spec.mu[0] - spec.mu[arm.hidden_type]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::{stream_rng, Stream};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn bern(alpha: &[f64], mu: &[f64]) -> ReservoirSpec {
        ReservoirSpec::bernoulli(alpha.to_vec(), mu.to_vec()).unwrap()
    }

    #[test]
    fn gaps_of_reference_setups() {
        let g = bern(&[0.5, 0.5], &[0.6, 0.4]).derived_gaps();
        assert_abs_diff_eq!(g.max, 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(g.min_suboptimal, 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(g.min_adjacent, 0.2, epsilon = 1e-15);

        let third = 1.0 / 3.0;
        let g = bern(&[third, third, 1.0 - 2.0 * third], &[0.9, 0.5, 0.1]).derived_gaps();
        assert_abs_diff_eq!(g.max, 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(g.min_suboptimal, 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(g.min_adjacent, 0.4, epsilon = 1e-15);

        let g = bern(&[0.5, 0.5], &[1.0, 0.0]).derived_gaps();
        assert_eq!((g.max, g.min_suboptimal, g.min_adjacent), (1.0, 1.0, 1.0));
    }

    #[test]
    fn rejects_invalid_specs() {
        let bad = [
            (vec![0.5, 0.5], vec![0.4, 0.6]),
            (vec![0.5, 0.5], vec![0.5, 0.5]),
            (vec![1.0], vec![0.5]),
            (vec![0.6, 0.6], vec![0.6, 0.4]),
            (vec![1.0, 0.0], vec![0.6, 0.4]),
            (vec![0.5, 0.5], vec![1.2, 0.4]),
            (vec![0.5, 0.5, 0.0], vec![0.6, 0.4]),
        ];
        for (alpha, mu) in bad {
            assert!(
                matches!(
                    ReservoirSpec::bernoulli(alpha.clone(), mu.clone()),
                    Err(CabError::InvalidSpec(_))
                ),
                "accepted alpha={alpha:?} mu={mu:?}"
            );
        }
        let wide = ReservoirSpec::uniform_family(
            vec![0.5, 0.5],
            vec![0.95, 0.5],
            RewardFamily::UniformAround { half_width: 0.1 },
        );
        assert!(wide.is_err());
    }

    #[test]
    fn near_degenerate_alpha_always_returns_first_type() {
        let spec = bern(&[1.0 - 1e-12, 1e-12], &[0.6, 0.4]);
        let mut rng = stream_rng(1, Stream::Reservoir);
        for id in 0..10_000 {
            assert_eq!(query_arm(&spec, &mut rng, id, false).hidden_type, 0);
        }
    }

    #[test]
    fn equiprobable_type_frequency_within_clt_band() {
        let spec = bern(&[0.5, 0.5], &[0.6, 0.4]);
        let mut rng = stream_rng(2, Stream::Reservoir);
        let n = 1_000_000;
        let ones = (0..n).filter(|_| spec.sample_type(&mut rng) == 0).count();
        let freq = ones as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.002, "frequency {freq}");
    }

    #[test]
    fn three_type_chi_square() {
        let third = 1.0 / 3.0;
        let spec = bern(&[third, third, 1.0 - 2.0 * third], &[0.9, 0.5, 0.1]);
        let mut rng = stream_rng(3, Stream::Reservoir);
        let n = 1_000_000;
        let mut counts = [0u64; 3];
        for _ in 0..n {
            counts[spec.sample_type(&mut rng)] += 1;
        }
        let chi2: f64 = counts
            .iter()
            .zip(spec.alpha())
            .map(|(&c, &a)| {
                let e = a * n as f64;
                (c as f64 - e).powi(2) / e
            })
            .sum();
        // 99.9% quantile of chi-square with 2 degrees of freedom.
        assert!(chi2 < 13.8, "chi2 = {chi2}");
    }

    #[test]
    fn point_mass_and_uniform_support() {
        let spec = ReservoirSpec::new(
            vec![0.5, 0.5],
            vec![0.7, 0.5],
            vec![
                RewardFamily::PointMass,
                RewardFamily::UniformAround { half_width: 0.1 },
            ],
        )
        .unwrap();
        let mut rng = stream_rng(4, Stream::Rewards);
        let mut pm = ArmState::new(0, 0, true);
        let mut un = ArmState::new(1, 1, false);
        for _ in 0..1000 {
            assert_eq!(pull_arm(&spec, &mut pm, &mut rng), 0.7);
            let r = pull_arm(&spec, &mut un, &mut rng);
            assert!((0.4..=0.6).contains(&r), "reward {r}");
        }
        assert_eq!(pm.pulls, 1000);
        assert_eq!(pm.reward_log.as_ref().unwrap().len(), 1000);
        assert!(un.reward_log.is_none());
    }

    #[test]
    fn bernoulli_mean_and_autocorrelation() {
        let spec = bern(&[0.5, 0.5], &[0.6, 0.4]);
        let mut rng = stream_rng(5, Stream::Rewards);
        let mut arm = ArmState::new(0, 0, true);
        let n = 100_000;
        for _ in 0..n {
            pull_arm(&spec, &mut arm, &mut rng);
        }
        let mean = arm.mean_reward().unwrap();
        assert!((mean - 0.6).abs() < 0.0047, "mean {mean}");

        let xs = arm.reward_log.as_ref().unwrap();
        let var: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        let cov: f64 = xs
            .windows(2)
            .map(|w| (w[0] - mean) * (w[1] - mean))
            .sum::<f64>()
            / (n - 1) as f64;
        let rho = cov / var;
        assert!(
            rho.abs() < 3.0 / (n as f64).sqrt(),
            "lag-1 autocorrelation {rho}"
        );
    }

    #[test]
    fn regret_increment_by_type() {
        let spec = bern(&[0.5, 0.5], &[0.6, 0.4]);
        assert_eq!(regret_increment(&spec, &ArmState::new(0, 0, false)), 0.0);
        assert_abs_diff_eq!(
            regret_increment(&spec, &ArmState::new(0, 1, false)),
            0.2,
            epsilon = 1e-15
        );
        let third = 1.0 / 3.0;
        let spec = bern(&[third, third, 1.0 - 2.0 * third], &[0.9, 0.5, 0.1]);
        assert_abs_diff_eq!(
            regret_increment(&spec, &ArmState::new(0, 2, false)),
            0.8,
            epsilon = 1e-15
        );
    }

    proptest! {
        #[test]
        fn regret_increment_is_zero_iff_optimal(
            raw in proptest::collection::vec(0.01f64..1.0, 2..6),
            seed in any::<u64>(),
        ) {
            let total: f64 = raw.iter().sum();
            let mut alpha: Vec<f64> = raw.iter().map(|a| a / total).collect();
            let rest: f64 = alpha[1..].iter().sum();
            alpha[0] = 1.0 - rest;
            let k = alpha.len();
            let mu: Vec<f64> = (0..k).map(|i| 1.0 - i as f64 / k as f64).collect();
            let spec = ReservoirSpec::bernoulli(alpha, mu).unwrap();
            let gap = spec.derived_gaps().max;
            let mut rng = stream_rng(seed, Stream::Reservoir);
            for id in 0..50 {
                let arm = query_arm(&spec, &mut rng, id, false);
                let inc = regret_increment(&spec, &arm);
                prop_assert!((0.0..=gap).contains(&inc));
                prop_assert_eq!(inc == 0.0, arm.hidden_type == 0);
            }
        }
    }

    #[test]
    fn spec_roundtrips_through_json() {
        let spec = ReservoirSpec::new(
            vec![0.25, 0.75],
            vec![0.8, 0.3],
            vec![
                RewardFamily::Bernoulli,
                RewardFamily::UniformAround { half_width: 0.2 },
            ],
        )
        .unwrap();
        let text = serde_json::to_string(&spec).unwrap();
        let back: ReservoirSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        let bad = r#"{"alpha":[0.5,0.5],"mu":[0.4,0.6],"family":[{"kind":"bernoulli"},{"kind":"bernoulli"}]}"#;
        assert!(serde_json::from_str::<ReservoirSpec>(bad).is_err());
    }
}
