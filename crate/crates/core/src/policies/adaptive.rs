//! Explore-then-commit with adaptive stopping (ALG2).
//!
//! After a burn-in of `s_n` pulls per arm, the set is tested once per
//! round-robin round. A pair whose dithered difference statistic stays
//! inside `4√(m ln m)` looks homogeneous and triggers a discard; when every
//! pair clears `4√(m ln n)` the policy commits. The dither is one Gaussian
//! per pair, drawn when the set is queried and kept for the whole epoch.

use std::collections::VecDeque;

use rand_chacha::ChaCha8Rng;

use super::set::ConsiderationSet;
use super::{Commitment, Policy, PolicyAction};
use crate::reservoir::ArmId;

/// `4√(m ln m)`; zero at `m ≤ 1`.
pub fn discard_threshold(m: u64) -> f64 {
    if m <= 1 {
        return 0.0;
    }
    let m = m as f64;
    4.0 * (m * m.ln()).sqrt()
}

/// `4√(m ln n)`.
pub fn commit_threshold(m: u64, horizon: u64) -> f64 {
    4.0 * (m as f64 * (horizon as f64).ln()).sqrt()
}

/// Default burn-in `⌈√ln n⌉`, at least 1.
pub fn default_burn_in(horizon: u64) -> u64 {
    ((horizon as f64).ln().max(0.0).sqrt().ceil() as u64).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alg2Verdict {
    Discard,
    Commit(ArmId),
    /// Neither test fired: play every arm once more.
    Continue,
}

impl Alg2Verdict {
    /// Applies the discard test (dithered) and then the commit test
    /// (undithered) at the set's current `m`.
    pub fn evaluate(set: &ConsiderationSet, horizon: u64) -> Self {
        let m = set.m();
        let discard = discard_threshold(m);
        if set
            .pairs()
            .any(|(_, _, diff, z)| (z + diff).abs() < discard)
        {
            return Alg2Verdict::Discard;
        }
        let commit = commit_threshold(m, horizon);
        if set.pairs().all(|(_, _, diff, _)| diff.abs() >= commit) {
            return Alg2Verdict::Commit(set.arm_id(set.best_by_prefix()));
        }
        Alg2Verdict::Continue
    }
}

#[derive(Debug, Clone)]
pub struct AdaptiveEtc {
    k: usize,
    horizon: u64,
    burn_in: u64,
    rng: ChaCha8Rng,
    set: Option<ConsiderationSet>,
    plan: VecDeque<usize>,
    last: Option<usize>,
    /// Best arm of the last discarded set, used if a new set does not fit.
    fallback: Option<ArmId>,
    /// Arm receiving the residual `T < K` pulls.
    residual: Option<ArmId>,
    committed: Option<Commitment>,
    next_id: ArmId,
    steps: u64,
    epochs: u64,
}

impl AdaptiveEtc {
    pub fn new(k: usize, horizon: u64, burn_in: u64, rng: ChaCha8Rng) -> Self {
        assert!(burn_in >= 1);
        AdaptiveEtc {
            k,
            horizon,
            burn_in,
            rng,
            set: None,
            plan: VecDeque::new(),
            last: None,
            fallback: None,
            residual: None,
            committed: None,
            next_id: 0,
            steps: 0,
            epochs: 0,
        }
    }

    fn remaining(&self) -> u64 {
        self.horizon.saturating_sub(self.steps)
    }

    fn schedule_rounds(&mut self, rounds: u64) {
        self.plan.extend((0..rounds).flat_map(|_| 0..self.k));
    }

    /// Current consideration set, if an epoch is live.
    pub fn consideration_set(&self) -> Option<&ConsiderationSet> {
        self.set.as_ref()
    }
}

impl Policy for AdaptiveEtc {
    fn next_action(&mut self, feedback: Option<f64>) -> PolicyAction {
        if let (Some(slot), Some(reward), Some(set)) =
            (self.last.take(), feedback, self.set.as_mut())
        {
            set.record(slot, reward);
        }
        loop {
            if let Some(arm) = self.committed.map(|c| c.arm).or(self.residual) {
                self.steps += 1;
                return PolicyAction::PlayExisting(arm);
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
            let k = self.k as u64;
            let remaining = self.remaining();
            let Some(set) = self.set.as_ref() else {
                if remaining < k {
                    self.residual = Some(self.fallback.expect("horizon >= K guarantees one epoch"));
                    continue;
                }
                self.epochs += 1;
                self.set = Some(ConsiderationSet::dithered(self.k, &mut self.rng));
                self.schedule_rounds(self.burn_in.min(remaining / k));
                continue;
            };
            if remaining < k {
                self.residual = Some(set.arm_id(set.best_by_prefix()));
                continue;
            }
            match Alg2Verdict::evaluate(set, self.horizon) {
                Alg2Verdict::Discard => {
                    self.fallback = Some(set.arm_id(set.best_by_prefix()));
                    self.set = None;
                }
                Alg2Verdict::Commit(arm) => {
                    self.committed = Some(Commitment {
                        arm,
                        time: self.steps + 1,
                    });
                }
                Alg2Verdict::Continue => self.schedule_rounds(1),
            }
        }
    }

    fn epochs(&self) -> u64 {
        self.epochs
    }

    fn commitment(&self) -> Option<Commitment> {
        self.committed
    }
}
