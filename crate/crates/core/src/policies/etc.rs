//! Explore-then-commit with a pre-specified exploration length per epoch.
//!
//! Each epoch queries K new arms and plays them round-robin for `m` rounds.
//! If some pair of arms looks alike (its cumulative reward difference is
//! below a threshold proportional to `m`) the whole set is discarded and a
//! new epoch starts; otherwise the policy commits to the arm with the largest
//! reward sum for the rest of the horizon.

use std::collections::VecDeque;

use super::set::ConsiderationSet;
use super::{Commitment, Policy, PolicyAction};
use crate::reservoir::ArmId;

/// How exploration length and discard threshold are chosen per epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    /// Epoch `k` explores `⌈e^{2√k} ln n⌉` rounds, threshold `2 m e^{−√k}`.
    Growing,
    /// Every epoch explores `⌈2 ln n / δ̲²⌉` rounds, threshold `δ̲ m`.
    GapAware { delta_lower_bound: f64 },
}

impl Schedule {
    /// `(L, threshold_scale)` for epoch `epoch` (1-based) and horizon `n`.
    pub fn epoch_params(&self, epoch: u64, horizon: u64) -> (u64, f64) {
        match *self {
            Schedule::Growing => alg1_epoch_params(epoch, horizon),
            Schedule::GapAware { delta_lower_bound } => (
                gap_aware_length(delta_lower_bound, (horizon as f64).ln()),
                delta_lower_bound,
            ),
        }
    }
}

/// Exploration length `⌈e^{2√k} ln n⌉` and threshold scale `2e^{−√k}` of
/// epoch `k`.
pub fn alg1_epoch_params(epoch: u64, horizon: u64) -> (u64, f64) {
    let root = (epoch as f64).sqrt();
    let len = ((2.0 * root).exp() * (horizon as f64).ln()).ceil();
    (saturating_u64(len), 2.0 * (-root).exp())
}

/// Exploration length `⌈2 ln n / δ̲²⌉` of ETC-∞, from `ln n`.
pub fn gap_aware_length(delta_lower_bound: f64, ln_horizon: f64) -> u64 {
    saturating_u64((2.0 * ln_horizon / (delta_lower_bound * delta_lower_bound)).ceil())
}

fn saturating_u64(x: f64) -> u64 {
    if x >= u64::MAX as f64 {
        u64::MAX
    } else {
        x as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpochVerdict {
    Discard,
    Commit(ArmId),
}

/// End-of-epoch test: discard iff some pair has
/// `|Σ_{j≤m}(X_a − X_b)| < m · threshold_scale`, else commit to the largest
/// reward sum (lowest arm id on ties).
pub fn epoch_verdict(set: &ConsiderationSet, threshold_scale: f64) -> EpochVerdict {
    let threshold = set.m() as f64 * threshold_scale;
    if set.pairs().any(|(_, _, diff, _)| diff.abs() < threshold) {
        EpochVerdict::Discard
    } else {
        EpochVerdict::Commit(set.arm_id(set.best_by_prefix()))
    }
}

/// ALG1 (with [`Schedule::Growing`]) and ETC-∞ (with
/// [`Schedule::GapAware`]).
#[derive(Debug, Clone)]
pub struct FixedScheduleEtc {
    schedule: Schedule,
    k: usize,
    horizon: u64,
    /// Budget not yet allocated to an epoch.
    budget: u64,
    epoch: u64,
    set: Option<ConsiderationSet>,
    threshold_scale: f64,
    plan: VecDeque<usize>,
    last: Option<usize>,
    /// Empirically best arm of the most recently discarded set.
    fallback: Option<ArmId>,
    committed: Option<Commitment>,
    next_id: ArmId,
    steps: u64,
}

impl FixedScheduleEtc {
    pub fn new(schedule: Schedule, k: usize, horizon: u64) -> Self {
        FixedScheduleEtc {
            schedule,
            k,
            horizon,
            budget: horizon,
            epoch: 0,
            set: None,
            threshold_scale: 0.0,
            plan: VecDeque::new(),
            last: None,
            fallback: None,
            committed: None,
            next_id: 0,
            steps: 0,
        }
    }

    fn start_epoch(&mut self) {
        let k = self.k as u64;
        self.epoch += 1;
        let (len, scale) = self.schedule.epoch_params(self.epoch, self.horizon);
        let rounds = len.min(self.budget / k);
        self.budget -= k * rounds;
        self.threshold_scale = scale;
        self.plan = (0..rounds).flat_map(|_| 0..self.k).collect();
        self.set = Some(ConsiderationSet::new(self.k));
    }

    fn commit(&mut self, arm: ArmId) {
        self.committed = Some(Commitment {
            arm,
            time: self.steps + 1,
        });
    }
}

impl Policy for FixedScheduleEtc {
    fn next_action(&mut self, feedback: Option<f64>) -> PolicyAction {
        if let (Some(slot), Some(reward), Some(set)) =
            (self.last.take(), feedback, self.set.as_mut())
        {
            set.record(slot, reward);
        }
        loop {
            if let Some(c) = self.committed {
                self.steps += 1;
                return PolicyAction::PlayExisting(c.arm);
            }
            if let Some(slot) = self.plan.pop_front() {
                let set = self.set.as_mut().expect("plan without a set");
                self.last = Some(slot);
                self.steps += 1;
                if slot == set.queried() {
                    set.push_arm(self.next_id);
                    self.next_id += 1;
                    return PolicyAction::QueryNew;
                }
                return PolicyAction::PlayExisting(set.arm_id(slot));
            }
            match self.set.take() {
                Some(set) => match epoch_verdict(&set, self.threshold_scale) {
                    EpochVerdict::Discard => {
                        self.fallback = Some(set.arm_id(set.best_by_prefix()));
                    }
                    EpochVerdict::Commit(arm) => self.commit(arm),
                },
                None if self.budget < self.k as u64 => {
                    // Too little budget for another set: finish on the best
                    // arm seen in the last epoch.
                    let arm = self.fallback.expect("horizon >= K guarantees one epoch");
                    self.commit(arm);
                }
                None => self.start_epoch(),
            }
        }
    }

    fn epochs(&self) -> u64 {
        self.epoch
    }

    fn commitment(&self) -> Option<Commitment> {
        self.committed
    }
}
