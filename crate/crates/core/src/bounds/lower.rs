use serde::Serialize;

use crate::error::{CabError, Result};

fn check_alpha1(alpha1: f64) -> Result<()> {
    if alpha1 > 0.0 && alpha1 < 1.0 {
        Ok(())
    } else {
        Err(CabError::domain(
            "alpha1",
            format!("{alpha1} is outside (0, 1)"),
        ))
    }
}

fn check_gap(gap: f64) -> Result<()> {
    if gap > 0.0 && gap.is_finite() {
        Ok(())
    } else {
        Err(CabError::domain(
            "delta_underbar",
            format!("{gap} must be positive"),
        ))
    }
}

/// `(1 − α₁)² Δ̲ / α₁`, the coefficient of `ln n` in the lower bound for
/// front-loaded policies.
pub fn uniform_lower_bound(alpha1: f64, delta_underbar: f64) -> Result<f64> {
    check_alpha1(alpha1)?;
    check_gap(delta_underbar)?;
    Ok((1.0 - alpha1).powi(2) * delta_underbar / alpha1)
}

/// `f(x) = (1 − α₁)Δ̲x + (1 − α₁)^x Δ̲(n − x)`: regret of front-loading `x`
/// queries when every one of them misses the optimal type.
pub fn front_load_penalty(x: f64, n: u64, alpha1: f64, delta_underbar: f64) -> f64 {
    let q = 1.0 - alpha1;
    q * delta_underbar * x + q.powf(x) * delta_underbar * (n as f64 - x)
}

fn penalty_derivatives(x: f64, n: f64, alpha1: f64, gap: f64) -> (f64, f64) {
    let q = 1.0 - alpha1;
    let ln_q = q.ln();
    let qx = q.powf(x);
    let first = q * gap + gap * qx * (ln_q * (n - x) - 1.0);
    let second = gap * qx * ln_q * (ln_q * (n - x) - 2.0);
    (first, second)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PenaltyMinimizer {
    pub x_star: f64,
    pub f_at_x_star: f64,
    pub f_prime: f64,
    pub f_second: f64,
}

/// `(ln n + ln ln(1/(1−α₁)) − ln 2) / ln(1/(1−α₁))`, a lower bound on the
/// minimizer of [`front_load_penalty`].
pub fn minimizer_lower_bound(n: u64, alpha1: f64) -> f64 {
    let l = -(1.0 - alpha1).ln();
    ((n as f64).ln() + l.ln() - std::f64::consts::LN_2) / l
}

/// Minimizes the strictly convex [`front_load_penalty`] over `(0, n)` by
/// bisection on `f′`.
pub fn front_load_penalty_minimizer(
    n: u64,
    alpha1: f64,
    delta_underbar: f64,
) -> Result<PenaltyMinimizer> {
    check_alpha1(alpha1)?;
    check_gap(delta_underbar)?;
    if n < 2 {
        return Err(CabError::domain("n", format!("{n} is below 2")));
    }
    let nf = n as f64;
    let d = |x| penalty_derivatives(x, nf, alpha1, delta_underbar).0;
    let (mut lo, mut hi) = (0.0, nf);
    if d(lo) >= 0.0 {
        return Err(CabError::domain(
            "n",
            format!("f is nondecreasing on (0, {n}); no interior minimizer"),
        ));
    }
    let tol = 1e-10 * delta_underbar;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..2000 {
        x = 0.5 * (lo + hi);
        let fx = d(x);
        if fx.abs() <= tol * 1e-3 || x == lo || x == hi {
            break;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
    }
    let (f_prime, f_second) = penalty_derivatives(x, nf, alpha1, delta_underbar);
    Ok(PenaltyMinimizer {
        x_star: x,
        f_at_x_star: front_load_penalty(x, n, alpha1, delta_underbar),
        f_prime,
        f_second,
    })
}

/// `(1 − ε) ln n / (2Δ̲)` on each grid point.
pub fn info_lower_bound_curve(
    grid: &[f64],
    delta_underbar: f64,
    epsilon: f64,
) -> Result<Vec<(f64, f64)>> {
    check_gap(delta_underbar)?;
    if !(0.0..1.0).contains(&epsilon) {
        return Err(CabError::domain(
            "epsilon",
            format!("{epsilon} is outside [0, 1)"),
        ));
    }
    Ok(grid
        .iter()
        .map(|&n| (n, (1.0 - epsilon) * n.ln() / (2.0 * delta_underbar)))
        .collect())
}

fn bernoulli_kl(p: f64, q: f64) -> f64 {
    let term = |a: f64, b: f64| if a == 0.0 { 0.0 } else { a * (a / b).ln() };
    term(p, q) + term(1.0 - p, 1.0 - q)
}

/// Asymptotic lower bound `Δ ln n / kl(μ₂, μ₁)` for a two-armed Bernoulli
/// bandit; zero when the means coincide.
pub fn lai_robbins_curve(best: f64, other: f64, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if !(0.0..=1.0).contains(&best) || !(0.0..=1.0).contains(&other) || other > best {
        return Err(CabError::domain(
            "mu",
            format!("need 0 ≤ {other} ≤ {best} ≤ 1"),
        ));
    }
    let gap = best - other;
    let coefficient = if gap == 0.0 {
        0.0
    } else {
        gap / bernoulli_kl(other, best)
    };
    Ok(grid.iter().map(|&n| (n, coefficient * n.ln())).collect())
}

/// `c √n` on each grid point.
pub fn sqrt_reference_curve(grid: &[f64], c: f64) -> Vec<(f64, f64)> {
    grid.iter().map(|&n| (n, c * n.sqrt())).collect()
}
