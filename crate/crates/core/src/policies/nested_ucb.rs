//! Nested UCB1 (ALG3 for pairs, ALG4 for K arms).
//!
//! An anytime policy: it never commits. Each epoch queries a fresh set,
//! plays every arm once, then runs UCB1 on the set with a clock that counts
//! pulls within the epoch. Before every UCB pull the dithered pairwise
//! statistic is checked against `4√(m ln m)`; if any pair falls inside, the
//! set is dropped and a new epoch begins on the same step.

use rand_chacha::ChaCha8Rng;

use super::adaptive::discard_threshold;
use super::set::{argmax_first, ConsiderationSet};
use super::ucb::ucb_index;
use super::{Policy, PolicyAction};
use crate::reservoir::ArmId;

#[derive(Debug, Clone)]
pub struct NestedUcb {
    size: usize,
    rng: ChaCha8Rng,
    set: Option<ConsiderationSet>,
    last: Option<usize>,
    next_id: ArmId,
    epochs: u64,
    epoch_lengths: Vec<u64>,
}

impl NestedUcb {
    pub fn new(size: usize, rng: ChaCha8Rng) -> Self {
        assert!(size >= 2, "nested UCB needs at least two arms per set");
        NestedUcb {
            size,
            rng,
            set: None,
            last: None,
            next_id: 0,
            epochs: 0,
            epoch_lengths: Vec::new(),
        }
    }

    /// Pull counts of every discarded epoch, in order.
    pub fn epoch_lengths(&self) -> &[u64] {
        &self.epoch_lengths
    }

    pub fn consideration_set(&self) -> Option<&ConsiderationSet> {
        self.set.as_ref()
    }

    fn should_discard(set: &ConsiderationSet) -> bool {
        let threshold = discard_threshold(set.m());
        set.pairs()
            .any(|(_, _, diff, z)| (z + diff).abs() < threshold)
    }

    fn query(&mut self) -> PolicyAction {
        let set = self.set.get_or_insert_with(|| {
            self.epochs += 1;
            ConsiderationSet::dithered(self.size, &mut self.rng)
        });
        self.last = Some(set.push_arm(self.next_id));
        self.next_id += 1;
        PolicyAction::QueryNew
    }
}

impl Policy for NestedUcb {
    fn next_action(&mut self, feedback: Option<f64>) -> PolicyAction {
        if let (Some(slot), Some(reward), Some(set)) =
            (self.last.take(), feedback, self.set.as_mut())
        {
            set.record(slot, reward);
        }
        let Some(set) = self.set.as_ref() else {
            return self.query();
        };
        if !set.is_full() {
            return self.query();
        }
        if Self::should_discard(set) {
            self.epoch_lengths.push(set.pulls());
            self.set = None;
            return self.query();
        }
        let clock = set.pulls();
        let slot =
            argmax_first((0..set.size()).map(|a| ucb_index(set.mean(a), set.count(a), clock)));
        self.last = Some(slot);
        PolicyAction::PlayExisting(set.arm_id(slot))
    }

    fn epochs(&self) -> u64 {
        self.epochs
    }
}
