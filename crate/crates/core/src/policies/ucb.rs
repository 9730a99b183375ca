//! UCB1 over a fixed set of queried arms, used for two baselines: plain
//! UCB1 on a given number of arms, and a front-loaded policy that sizes its
//! set from a hint on the optimal-type probability.

use super::set::argmax_first;
use super::{Policy, PolicyAction};
use crate::reservoir::ArmId;

/// UCB1 index `mean + √(2 ln t / pulls)`, where `t` is the number of pulls
/// made so far (on the arms the index ranks).
pub fn ucb_index(mean: f64, pulls: u64, clock: u64) -> f64 {
    mean + (2.0 * (clock as f64).ln() / pulls as f64).sqrt()
}

/// Number of arms queried upfront: `⌈c ln n / alpha1_hint⌉`, clamped to
/// `[1, n]`.
pub fn front_loaded_query_count(horizon: u64, alpha1_hint: f64, c: f64) -> u64 {
    let q = (c * (horizon as f64).ln() / alpha1_hint).ceil();
    (q.max(1.0) as u64).min(horizon.max(1))
}

#[derive(Debug, Clone)]
pub struct UcbOverSet {
    arms: u64,
    counts: Vec<u64>,
    sums: Vec<f64>,
    pulls: u64,
    last: Option<usize>,
}

impl UcbOverSet {
    pub fn new(arms: u64) -> Self {
        assert!(arms >= 1);
        UcbOverSet {
            arms,
            counts: Vec::new(),
            sums: Vec::new(),
            pulls: 0,
            last: None,
        }
    }

    pub fn arms(&self) -> u64 {
        self.arms
    }
}

impl Policy for UcbOverSet {
    fn next_action(&mut self, feedback: Option<f64>) -> PolicyAction {
        if let (Some(slot), Some(reward)) = (self.last.take(), feedback) {
            self.counts[slot] += 1;
            self.sums[slot] += reward;
            self.pulls += 1;
        }
        if (self.counts.len() as u64) < self.arms {
            self.counts.push(0);
            self.sums.push(0.0);
            self.last = Some(self.counts.len() - 1);
            return PolicyAction::QueryNew;
        }
        let slot = argmax_first(
            self.counts
                .iter()
                .zip(&self.sums)
                .map(|(&n, &s)| ucb_index(s / n as f64, n, self.pulls)),
        );
        self.last = Some(slot);
        PolicyAction::PlayExisting(slot as ArmId)
    }

    fn epochs(&self) -> u64 {
        u64::from(!self.counts.is_empty())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn index_value() {
        assert_abs_diff_eq!(
            ucb_index(0.5, 4, 100),
            2.017_427_129_385_146,
            epsilon = 1e-12
        );
    }

    #[test]
    fn query_counts() {
        assert_eq!(front_loaded_query_count(100_000, 0.5, 1.0), 24);
        assert_eq!(front_loaded_query_count(3, 1.0, 1.0), 2);
        // n = 2: ⌈ln 2⌉ = 1.
        assert_eq!(front_loaded_query_count(2, 1.0, 1.0), 1);
        assert_eq!(front_loaded_query_count(1, 0.5, 1.0), 1);
        // Clamped to the horizon.
        assert_eq!(front_loaded_query_count(10, 0.01, 1.0), 10);
    }

    #[test]
    fn ties_after_init_go_to_lowest_arm() {
        let mut policy = UcbOverSet::new(2);
        assert_eq!(policy.next_action(None), PolicyAction::QueryNew);
        assert_eq!(policy.next_action(Some(0.5)), PolicyAction::QueryNew);
        assert_eq!(policy.next_action(Some(0.5)), PolicyAction::PlayExisting(0));
    }

    #[test]
    fn single_arm_degenerates_to_repeat_play() {
        let mut policy = UcbOverSet::new(1);
        assert_eq!(policy.next_action(None), PolicyAction::QueryNew);
        for _ in 0..10 {
            assert_eq!(policy.next_action(Some(0.3)), PolicyAction::PlayExisting(0));
        }
    }

    #[test]
    fn prefers_better_arm_over_time() {
        let mut policy = UcbOverSet::new(2);
        let mut feedback = None;
        let mut plays = [0u32; 2];
        for _ in 0..2000 {
            let a = policy.next_action(feedback);
            let id = match a {
                PolicyAction::QueryNew => policy.counts.len() as u64 - 1,
                PolicyAction::PlayExisting(id) => id,
            };
            plays[id as usize] += 1;
            feedback = Some(if id == 0 { 0.6 } else { 0.4 });
        }
        assert!(plays[0] > 10 * plays[1]);
    }
}
