//! Closed-form constants and reference curves.
//!
//! Quantities that overflow `f64` (the inverse of `β_{δ,K}` is around
//! `e^{10⁶}` already for `δ = 1`) are returned as natural logarithms and
//! flagged as such in [`BoundReport`]. Absolute constants that the regret
//! bounds leave unspecified are taken from the caller, defaulting to 1 with
//! [`BoundReport::unspecified_constant`] set.

mod coupon;
mod lower;
pub mod quadrature;
pub mod special;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{CabError, Result};
use crate::reservoir::ReservoirSpec;

pub use coupon::{
    coupon_collector, coupon_collector_monte_carlo, coupon_lower_bound, expected_queries,
    CouponReport,
};
pub use lower::{
    front_load_penalty, front_load_penalty_minimizer, info_lower_bound_curve, lai_robbins_curve,
    minimizer_lower_bound, sqrt_reference_curve, uniform_lower_bound, PenaltyMinimizer,
};

/// An evaluated constant or bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub name: String,
    pub inputs: Vec<(String, f64)>,
    pub value: f64,
    /// `value` is a natural logarithm.
    pub log_domain: bool,
    /// Absolute error estimate on `value` (in the reported domain).
    pub error_estimate: f64,
    /// Set when an absolute constant was defaulted to 1.
    pub unspecified_constant: bool,
}

impl BoundReport {
    fn new(name: &str, inputs: &[(&str, f64)], value: f64) -> Self {
        BoundReport {
            name: name.to_string(),
            inputs: inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            value,
            log_domain: false,
            error_estimate: 0.0,
            unspecified_constant: false,
        }
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta <= 1.0 {
        Ok(())
    } else {
        Err(CabError::domain(
            "delta",
            format!("{delta} is outside (0, 1]"),
        ))
    }
}

fn check_k(k: usize) -> Result<()> {
    if k >= 2 {
        Ok(())
    } else {
        Err(CabError::domain("k", format!("{k} is below 2")))
    }
}

/// Smallest `p` with `Σ_{m ≥ p} m⁻⁸ ≤ 1/(2K²)`.
pub fn lambda_k(k: usize) -> Result<u64> {
    check_k(k)?;
    let target = 1.0 / (2.0 * (k * k) as f64);
    let mut p = 1;
    while special::tail_inverse_eighth_powers(p) > target {
        p += 1;
    }
    Ok(p)
}

/// `max(⌈(64/δ²) ln²(64/δ²)⌉, Λ_K)`.
pub fn t_zero(delta: f64, k: usize) -> Result<u64> {
    check_delta(delta)?;
    let a = 64.0 / (delta * delta);
    let raw = (a * a.ln().powi(2)).ceil() as u64;
    Ok(raw.max(lambda_k(k)?))
}

/// `x + 4√(x ln x)`.
pub fn stopping_boundary(x: f64) -> f64 {
    x + 4.0 * (x * x.ln()).sqrt()
}

/// `ln β_{δ,K} = ln Φ̄(f(T₀)) − ln 2`.
pub fn beta_delta_k(delta: f64, k: usize) -> Result<f64> {
    let t0 = t_zero(delta, k)?;
    Ok(special::ln_phi_bar(stopping_boundary(t0 as f64)) - std::f64::consts::LN_2)
}

pub fn beta_report(delta: f64, k: usize) -> Result<BoundReport> {
    let ln_beta = beta_delta_k(delta, k)?;
    let mut report = BoundReport::new("ln_beta", &[("delta", delta), ("k", k as f64)], ln_beta);
    report.log_domain = true;
    // The erfc and asymptotic branches are both accurate to ~1e-12 relative.
    report.error_estimate = 1e-12 * ln_beta.abs();
    Ok(report)
}

/// Series behind `C̃_α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CAlphaSeries {
    /// `ln Σ_{k≥1} k e^{2√k} r^{k−1}` with `r = 1 − 3P(D)/4`.
    pub ln_sum: f64,
    /// Bound on the omitted tail relative to the partial sum.
    pub relative_tail: f64,
    pub terms: u64,
}

impl CAlphaSeries {
    pub fn sum(&self) -> f64 {
        self.ln_sum.exp()
    }

    /// `C̃_α = 512 e² Σ`.
    pub fn c_alpha_tilde(&self) -> f64 {
        (self.ln_c_alpha_tilde()).exp()
    }

    pub fn ln_c_alpha_tilde(&self) -> f64 {
        512f64.ln() + 2.0 + self.ln_sum
    }
}

const C_ALPHA_MAX_TERMS: u64 = 200_000_000;

fn ln_c_alpha_term(k: u64, ln_r: f64) -> f64 {
    let kf = k as f64;
    kf.ln() + 2.0 * kf.sqrt() + (kf - 1.0) * ln_r
}

fn c_alpha_ln_ratio(alpha: &[f64]) -> Result<f64> {
    let k = alpha.len();
    check_k(k)?;
    if alpha.iter().any(|&a| a.is_nan() || a < 0.0) {
        return Err(CabError::domain("alpha", "entries must be nonnegative"));
    }
    let factorial: f64 = (1..=k).map(|i| i as f64).product();
    let p_distinct = factorial * alpha.iter().product::<f64>();
    if p_distinct <= 0.0 {
        return Err(CabError::Divergence(
            "K!·Πα is 0, so the series ratio is 1".into(),
        ));
    }
    if p_distinct > 1.0 + 1e-12 {
        return Err(CabError::domain("alpha", "K!·Πα exceeds 1"));
    }
    Ok((1.0 - 0.75 * p_distinct.min(1.0)).ln())
}

/// Sums the first `terms` terms of the `C̃_α` series (log domain).
pub fn c_alpha_partial(alpha: &[f64], terms: u64) -> Result<f64> {
    let ln_r = c_alpha_ln_ratio(alpha)?;
    let mut acc = LogSum::default();
    for k in 1..=terms {
        acc.add(ln_c_alpha_term(k, ln_r));
    }
    Ok(acc.ln())
}

/// Evaluates the `C̃_α` series until the geometric tail bound falls below
/// `rel_tol` times the partial sum.
///
/// Consecutive term ratios `(1 + 1/k) e^{2(√(k+1) − √k)} r` decrease in `k`,
/// so once a ratio `ρ < 1` is reached the remaining tail is at most
/// `t_k ρ / (1 − ρ)`.
pub fn c_alpha_tilde(alpha: &[f64], rel_tol: f64) -> Result<CAlphaSeries> {
    if rel_tol.is_nan() || rel_tol <= 0.0 {
        return Err(CabError::domain("rel_tol", "must be positive"));
    }
    let ln_r = c_alpha_ln_ratio(alpha)?;
    let mut acc = LogSum::default();
    for k in 1..=C_ALPHA_MAX_TERMS {
        let ln_t = ln_c_alpha_term(k, ln_r);
        acc.add(ln_t);
        let ln_rho = ln_c_alpha_term(k + 1, ln_r) - ln_t;
        if ln_rho < 0.0 {
            let ln_tail = ln_t + ln_rho - (-ln_rho.exp()).ln_1p();
            let relative_tail = (ln_tail - acc.ln()).exp();
            if relative_tail < rel_tol {
                return Ok(CAlphaSeries {
                    ln_sum: acc.ln(),
                    relative_tail,
                    terms: k,
                });
            }
        }
    }
    Err(CabError::Divergence(format!(
        "no convergence within {C_ALPHA_MAX_TERMS} terms; K!·Πα is too small"
    )))
}

/// Running `ln Σ e^{x_i}`.
#[derive(Debug, Default, Clone, Copy)]
struct LogSum {
    max: Option<f64>,
    scaled: f64,
}

impl LogSum {
    fn add(&mut self, x: f64) {
        match self.max {
            None => {
                self.max = Some(x);
                self.scaled = 1.0;
            }
            Some(m) if x > m => {
                self.scaled = self.scaled * (m - x).exp() + 1.0;
                self.max = Some(x);
            }
            Some(m) => self.scaled += (x - m).exp(),
        }
    }

    fn ln(&self) -> f64 {
        self.max.map_or(f64::NEG_INFINITY, |m| m + self.scaled.ln())
    }
}

fn check_horizon(n: u64) -> Result<f64> {
    if n >= 2 {
        Ok(n as f64)
    } else {
        Err(CabError::domain("n", format!("{n} is below 2")))
    }
}

fn absolute_constant(c_abs: Option<f64>) -> Result<(f64, bool)> {
    match c_abs {
        None => Ok((1.0, true)),
        Some(c) if c > 0.0 && c.is_finite() => Ok((c, false)),
        Some(c) => Err(CabError::domain("c_abs", format!("{c} must be positive"))),
    }
}

/// `C̃_α Δ̄ ln n / δ² · ln²(4/δ) + 2KΔ̄`, with `δ` the minimal adjacent gap.
pub fn alg1_upper_bound(n: u64, spec: &ReservoirSpec) -> Result<BoundReport> {
    let ln_n = check_horizon(n)?.ln();
    let gaps = spec.derived_gaps();
    let delta = gaps.min_adjacent;
    let series = c_alpha_tilde(spec.alpha(), 1e-12)?;
    let c = series.c_alpha_tilde();
    let value = c * gaps.max * ln_n / (delta * delta) * (4.0 / delta).ln().powi(2)
        + 2.0 * spec.k() as f64 * gaps.max;
    let mut report = BoundReport::new(
        "alg1_upper_bound",
        &[("n", n as f64), ("delta", delta)],
        value,
    );
    report.error_estimate = value * series.relative_tail;
    Ok(report)
}

/// `ln[C K³ Δ̄ / β_{δ,K} · (ln n/δ² + s_n/(K!Πα))]`, using `γ(s_n) ≥ β_{δ,K}`.
pub fn alg2_upper_bound(
    n: u64,
    burn_in: u64,
    spec: &ReservoirSpec,
    c_abs: Option<f64>,
) -> Result<BoundReport> {
    let ln_n = check_horizon(n)?.ln();
    if burn_in == 0 {
        return Err(CabError::domain("burn_in", "must be at least 1"));
    }
    let (c, defaulted) = absolute_constant(c_abs)?;
    let k = spec.k();
    let gaps = spec.derived_gaps();
    let delta = gaps.min_adjacent;
    let ln_beta = beta_delta_k(delta, k)?;
    let inner = ln_n / (delta * delta) + burn_in as f64 / spec.distinct_types_probability();
    let value = c.ln() + 3.0 * (k as f64).ln() + gaps.max.ln() - ln_beta + inner.ln();
    let mut report = BoundReport::new(
        "ln_alg2_upper_bound",
        &[("n", n as f64), ("s_n", burn_in as f64), ("delta", delta)],
        value,
    );
    report.log_domain = true;
    report.error_estimate = 1e-12 * value.abs();
    report.unspecified_constant = defaulted;
    Ok(report)
}

/// `ln[C / β_{Δ̲,2} · (ln n/Δ̲ + Δ̲/α₁)]`.
pub fn alg3_upper_bound(n: u64, spec: &ReservoirSpec, c_abs: Option<f64>) -> Result<BoundReport> {
    let ln_n = check_horizon(n)?.ln();
    let (c, defaulted) = absolute_constant(c_abs)?;
    let gap = spec.derived_gaps().min_suboptimal;
    let alpha1 = spec.alpha()[0];
    let ln_beta = beta_delta_k(gap, 2)?;
    let value = c.ln() - ln_beta + (ln_n / gap + gap / alpha1).ln();
    let mut report = BoundReport::new(
        "ln_alg3_upper_bound",
        &[("n", n as f64), ("delta_underbar", gap), ("alpha1", alpha1)],
        value,
    );
    report.log_domain = true;
    report.error_estimate = 1e-12 * value.abs();
    report.unspecified_constant = defaulted;
    Ok(report)
}

/// Monte Carlo estimate of `γ(s_n)`: the probability that, for one arm of
/// each type, the dithered discard test never fires for `s_n ≤ m ≤ max_m`.
/// Truncating at `max_m` biases the estimate upward; it is not a bound.
pub fn gamma_monte_carlo<R: Rng + ?Sized>(
    spec: &ReservoirSpec,
    burn_in: u64,
    max_m: u64,
    paths: u64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if burn_in == 0 || max_m < burn_in || paths == 0 {
        return Err(CabError::domain(
            "gamma_monte_carlo",
            "need 1 ≤ burn_in ≤ max_m and paths ≥ 1",
        ));
    }
    let k = spec.k();
    let mut survived = 0u64;
    let mut sums = vec![0.0; k];
    let mut pairs = vec![0.0; k * (k - 1) / 2];
    for _ in 0..paths {
        for z in pairs.iter_mut() {
            *z = rng.sample(StandardNormal);
        }
        sums.iter_mut().for_each(|s| *s = 0.0);
        let mut fired = false;
        for m in 1..=max_m {
            for (ty, s) in sums.iter_mut().enumerate() {
                *s += spec.family()[ty].sample(spec.mu()[ty], rng);
            }
            if m < burn_in || m < 2 {
                continue;
            }
            let threshold = 4.0 * ((m as f64) * (m as f64).ln()).sqrt();
            let mut idx = 0;
            'pairs: for a in 0..k {
                for b in a + 1..k {
                    if (pairs[idx] + sums[a] - sums[b]).abs() < threshold {
                        fired = true;
                        break 'pairs;
                    }
                    idx += 1;
                }
            }
            if fired {
                break;
            }
        }
        survived += u64::from(!fired);
    }
    let p = survived as f64 / paths as f64;
    Ok((p, (p * (1.0 - p) / paths as f64).sqrt()))
}
