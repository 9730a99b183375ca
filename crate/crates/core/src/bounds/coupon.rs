use rand::Rng;
use serde::Serialize;

use super::quadrature::integrate;
use crate::error::{CabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouponReport {
    /// Expected number of queries until every type has been seen.
    pub expected_n: f64,
    pub error_estimate: f64,
    /// `Σ_{i≥2} α_i (μ₁ − μ_i) K ln K`.
    pub lower_bound: f64,
}

fn check_alpha(alpha: &[f64]) -> Result<()> {
    if alpha.is_empty() {
        return Err(CabError::domain("alpha", "must not be empty"));
    }
    if alpha.iter().any(|&a| !(a > 0.0 && a <= 1.0)) {
        return Err(CabError::domain("alpha", "entries must lie in (0, 1]"));
    }
    let sum: f64 = alpha.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(CabError::domain("alpha", format!("sums to {sum}, not 1")));
    }
    Ok(())
}

/// `E[N] = ∫₀^∞ 1 − Π_j (1 − e^{−α_j y}) dy`.
///
/// The integrand is bounded by `Σ_j e^{−α_j y}`, so integrating to `Y` with
/// `Σ_j e^{−α_j Y}/α_j ≤ 1e-12` leaves at most that much out. Returns the
/// value and an error estimate covering quadrature and truncation.
pub fn expected_queries(alpha: &[f64]) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    let tail = |y: f64| alpha.iter().map(|&a| (-a * y).exp() / a).sum::<f64>();
    let mut upper = 1.0;
    while tail(upper) > 1e-12 {
        upper *= 2.0;
    }
    let integrand = |y: f64| {
        let ln_all_seen: f64 = alpha.iter().map(|&a| (-(-a * y).exp()).ln_1p()).sum();
        -ln_all_seen.exp_m1()
    };
    let (value, err) = integrate(integrand, 0.0, upper, 1e-10);
    Ok((value, err + tail(upper)))
}

pub fn coupon_lower_bound(alpha: &[f64], mu: &[f64]) -> Result<f64> {
    check_alpha(alpha)?;
    if mu.len() != alpha.len() {
        return Err(CabError::domain("mu", "length differs from alpha"));
    }
    let k = alpha.len() as f64;
    let weighted: f64 = alpha[1..]
        .iter()
        .zip(&mu[1..])
        .map(|(a, m)| a * (mu[0] - m))
        .sum();
    Ok(weighted * k * k.ln())
}

pub fn coupon_collector(alpha: &[f64], mu: &[f64]) -> Result<CouponReport> {
    let (expected_n, error_estimate) = expected_queries(alpha)?;
    Ok(CouponReport {
        expected_n,
        error_estimate,
        lower_bound: coupon_lower_bound(alpha, mu)?,
    })
}

/// Sample mean and standard error of the number of draws needed to see all
/// types, over `draws` independent runs.
pub fn coupon_collector_monte_carlo<R: Rng + ?Sized>(
    alpha: &[f64],
    draws: u64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    if draws < 2 {
        return Err(CabError::domain("draws", "need at least 2"));
    }
    let cumulative: Vec<f64> = alpha
        .iter()
        .scan(0.0, |acc, &a| {
            *acc += a;
            Some(*acc)
        })
        .collect();
    let k = alpha.len();
    let mut seen = vec![false; k];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..draws {
        seen.iter_mut().for_each(|s| *s = false);
        let (mut missing, mut count) = (k, 0u64);
        while missing > 0 {
            let u: f64 = rng.random();
            let ty = cumulative.iter().position(|&c| u < c).unwrap_or(k - 1);
            count += 1;
            if !seen[ty] {
                seen[ty] = true;
                missing -= 1;
            }
        }
        let c = count as f64;
        sum += c;
        sum_sq += c * c;
    }
    let n = draws as f64;
    let mean = sum / n;
    let var = (sum_sq - n * mean * mean) / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}
