//! Special functions evaluated from series and continued fractions.

use std::f64::consts::{LN_2, PI};

/// Above this argument `ln Φ̄` switches to its asymptotic expansion.
pub const PHI_BAR_CROSSOVER: f64 = 8.0;

/// `ln erfc(z)` for `z ≥ 0`.
///
/// Maclaurin series of `erf` for `z < 2` (relative error near machine
/// precision there since `erfc ≥ 0.0047`); the Laplace continued fraction
/// evaluated by modified Lentz for `z ≥ 2`, converged to `1e-16`.
pub fn ln_erfc(z: f64) -> f64 {
    assert!(z >= 0.0, "ln_erfc needs z >= 0, got {z}");
    if z < 2.0 {
        let z2 = z * z;
        let mut term = z;
        let mut sum = z;
        for n in 1..200 {
            term *= -z2 / n as f64;
            let add = term / (2 * n + 1) as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        return (1.0 - 2.0 / PI.sqrt() * sum).ln();
    }
    // erfc z = e^{-z²}/√π · 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...)))).
    let tiny = 1e-300;
    let mut f = z;
    let mut c = z;
    let mut d = 0.0;
    for n in 1..500 {
        let a = n as f64 / 2.0;
        d = z + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = z + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    -z * z - 0.5 * PI.ln() - f.ln()
}

pub fn erfc(z: f64) -> f64 {
    if z >= 0.0 {
        ln_erfc(z).exp()
    } else {
        2.0 - ln_erfc(-z).exp()
    }
}

/// `ln Φ̄(x)`, the log of the standard normal upper tail.
pub fn ln_phi_bar(x: f64) -> f64 {
    if x > PHI_BAR_CROSSOVER {
        ln_phi_bar_asymptotic(x)
    } else {
        ln_phi_bar_exact(x)
    }
}

/// Via `Φ̄(x) = erfc(x/√2)/2`.
pub fn ln_phi_bar_exact(x: f64) -> f64 {
    if x >= 0.0 {
        ln_erfc(x / std::f64::consts::SQRT_2) - LN_2
    } else {
        (-0.5 * ln_erfc(-x / std::f64::consts::SQRT_2).exp()).ln_1p()
    }
}

/// `−x²/2 − ln(x√(2π)) + ln(1 − x⁻² + 3x⁻⁴ − 15x⁻⁶ + …)`, summed while the
/// terms shrink. At `x = 8` the smallest term is below `1e-13`.
pub fn ln_phi_bar_asymptotic(x: f64) -> f64 {
    assert!(x > 0.0);
    let inv2 = 1.0 / (x * x);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        let next = -term * (2 * k - 1) as f64 * inv2;
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 {
            break;
        }
    }
    -0.5 * x * x - (x * (2.0 * PI).sqrt()).ln() + sum.ln()
}

/// `Σ_{m ≥ p} m⁻⁸`: 4096 explicit terms plus an Euler–Maclaurin remainder,
/// whose error is below `(p + 4096)⁻¹⁰`.
pub fn tail_inverse_eighth_powers(p: u64) -> f64 {
    assert!(p >= 1);
    const TERMS: u64 = 4096;
    let end = (p + TERMS) as f64;
    // Summed from the small end for accuracy.
    let explicit: f64 = (p..p + TERMS).rev().map(|m| (m as f64).powi(-8)).sum();
    let remainder = end.powi(-7) / 7.0 + end.powi(-8) / 2.0 + 8.0 * end.powi(-9) / 12.0;
    explicit + remainder
}
