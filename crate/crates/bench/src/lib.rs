//! Fixtures shared by the benchmarks.

use cab_core::ReservoirSpec;

/// Two equiprobable Bernoulli types with means 0.6 and 0.4.
pub fn two_type_spec() -> ReservoirSpec {
    ReservoirSpec::bernoulli(vec![0.5, 0.5], vec![0.6, 0.4]).expect("valid spec")
}

/// Three equiprobable Bernoulli types with means 0.9, 0.5 and 0.1.
pub fn three_type_spec() -> ReservoirSpec {
    let third = 1.0 / 3.0;
    ReservoirSpec::bernoulli(vec![third, third, third], vec![0.9, 0.5, 0.1]).expect("valid spec")
}
