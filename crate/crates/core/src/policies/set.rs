use std::collections::VecDeque;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::reservoir::ArmId;

/// A batch of freshly queried arms tested together during one epoch.
///
/// Rewards are kept per arm in arrival order. The pairwise statistics
/// `Σ_{j≤m} (X_{a,j} − X_{b,j})` only ever use the first `m` rewards of each
/// arm, where `m` is the smallest per-arm pull count; they are advanced
/// incrementally each time every arm has a reward at index `m + 1`.
#[derive(Debug, Clone)]
pub struct ConsiderationSet {
    size: usize,
    arm_ids: Vec<ArmId>,
    counts: Vec<u64>,
    sums: Vec<f64>,
    /// Rewards with index beyond `m`, oldest first.
    pending: Vec<VecDeque<f64>>,
    /// `Σ_{j≤m} X_{a,j}`.
    prefix: Vec<f64>,
    /// `Σ_{j≤m} (X_{a,j} − X_{b,j})` for `a < b`, row-major upper triangle.
    pair_diff: Vec<f64>,
    /// One standard Gaussian per pair, fixed for the life of the set.
    dither: Vec<f64>,
    m: u64,
    pulls: u64,
}

impl ConsiderationSet {
    /// A set of `size` arms without dither.
    pub fn new(size: usize) -> Self {
        Self::with_dither(size, vec![0.0; pair_count(size)])
    }

    /// A set of `size` arms with fresh standard Gaussian dither per pair.
    pub fn dithered<R: Rng + ?Sized>(size: usize, rng: &mut R) -> Self {
        let dither = (0..pair_count(size))
            .map(|_| rng.sample(StandardNormal))
            .collect();
        Self::with_dither(size, dither)
    }

    pub fn with_dither(size: usize, dither: Vec<f64>) -> Self {
        assert!(size >= 1, "consideration set must hold at least one arm");
        assert_eq!(dither.len(), pair_count(size));
        ConsiderationSet {
            size,
            arm_ids: Vec::with_capacity(size),
            counts: vec![0; size],
            sums: vec![0.0; size],
            pending: vec![VecDeque::new(); size],
            prefix: vec![0.0; size],
            pair_diff: vec![0.0; pair_count(size)],
            dither,
            m: 0,
            pulls: 0,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Number of arms queried into the set so far.
    pub fn queried(&self) -> usize {
        self.arm_ids.len()
    }

    pub fn is_full(&self) -> bool {
        self.arm_ids.len() == self.size
    }

    /// Registers the arm occupying the next free slot; returns the slot.
    pub fn push_arm(&mut self, id: ArmId) -> usize {
        assert!(!self.is_full(), "consideration set already full");
        self.arm_ids.push(id);
        self.arm_ids.len() - 1
    }

    pub fn arm_id(&self, slot: usize) -> ArmId {
        self.arm_ids[slot]
    }

    pub fn arm_ids(&self) -> &[ArmId] {
        &self.arm_ids
    }

    /// Records a reward observed on the arm in `slot`.
    pub fn record(&mut self, slot: usize, reward: f64) {
        self.counts[slot] += 1;
        self.sums[slot] += reward;
        self.pulls += 1;
        self.pending[slot].push_back(reward);
        while self.pending.iter().all(|q| !q.is_empty()) {
            let next: Vec<f64> = self
                .pending
                .iter_mut()
                .map(|q| q.pop_front().unwrap_or_default())
                .collect();
            for (a, x) in next.iter().enumerate() {
                self.prefix[a] += x;
            }
            let mut idx = 0;
            for a in 0..self.size {
                for b in (a + 1)..self.size {
                    self.pair_diff[idx] += next[a] - next[b];
                    idx += 1;
                }
            }
            self.m += 1;
        }
    }

    /// Minimum per-arm pull count.
    pub fn m(&self) -> u64 {
        self.m
    }

    /// Pulls made within this set (the epoch clock).
    pub fn pulls(&self) -> u64 {
        self.pulls
    }

    pub fn count(&self, slot: usize) -> u64 {
        self.counts[slot]
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Mean over every reward of `slot`, not only the first `m`.
    pub fn mean(&self, slot: usize) -> f64 {
        self.sums[slot] / self.counts[slot] as f64
    }

    /// `Σ_{j≤m} X_{slot,j}`.
    pub fn prefix_sum(&self, slot: usize) -> f64 {
        self.prefix[slot]
    }

    /// `Σ_{j≤m} (X_{a,j} − X_{b,j})` for `a < b`.
    pub fn pair_difference(&self, a: usize, b: usize) -> f64 {
        self.pair_diff[pair_index(self.size, a, b)]
    }

    pub fn dither(&self, a: usize, b: usize) -> f64 {
        self.dither[pair_index(self.size, a, b)]
    }

    /// Iterates over `(a, b, Σ diff, Z)` for every pair `a < b`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64, f64)> + '_ {
        let n = self.size;
        (0..n)
            .flat_map(move |a| ((a + 1)..n).map(move |b| (a, b)))
            .zip(self.pair_diff.iter().zip(&self.dither))
            .map(|((a, b), (&d, &z))| (a, b, d, z))
    }

    /// Slot maximizing `Σ_{j≤m} X_{a,j}`; ties go to the lowest slot.
    pub fn best_by_prefix(&self) -> usize {
        argmax_first(self.prefix[..self.queried()].iter().copied())
    }
}

fn pair_count(size: usize) -> usize {
    size * size.saturating_sub(1) / 2
}

fn pair_index(size: usize, a: usize, b: usize) -> usize {
    debug_assert!(a < b && b < size);
    a * (2 * size - a - 1) / 2 + (b - a - 1)
}

/// Index of the first maximum. NaN never wins.
pub(crate) fn argmax_first(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    best
}
