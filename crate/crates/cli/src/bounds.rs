//! The `bounds` subcommand.

use std::fmt::Write as _;

use cab_core::bounds::{
    self, alg1_upper_bound, alg2_upper_bound, alg3_upper_bound, beta_report, c_alpha_tilde,
    coupon_collector, front_load_penalty_minimizer, lambda_k, minimizer_lower_bound, t_zero,
    uniform_lower_bound, BoundReport,
};
use cab_core::ReservoirSpec;
use clap::{Args, ValueEnum};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UpperBound {
    Alg1,
    Alg2,
    Alg3,
}

#[derive(Debug, Default, Args)]
pub struct BoundsArgs {
    /// Λ_K for the given K.
    #[arg(long, value_name = "K")]
    pub lambda_k: Option<usize>,
    /// T₀ (needs --delta, --k).
    #[arg(long)]
    pub t0: bool,
    /// ln β (needs --delta, --k).
    #[arg(long)]
    pub beta: bool,
    /// C̃_α (needs --alpha).
    #[arg(long)]
    pub c_alpha: bool,
    /// Expected queries to see every type (needs --alpha; --mu adds the regret floor).
    #[arg(long)]
    pub coupon: bool,
    /// Regret upper bound of a policy at horizon --n (needs --alpha, --mu).
    #[arg(long, value_enum)]
    pub upper: Option<UpperBound>,
    /// Minimizer of the front-loading penalty (needs --alpha1, --delta, --n).
    #[arg(long)]
    pub front_load: bool,
    /// ln n coefficient of the uniform lower bound (needs --alpha1, --delta).
    #[arg(long)]
    pub uniform_lower: bool,

    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub mu: Vec<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha1: Option<f64>,
    #[arg(long)]
    pub n: Option<u64>,
    /// Burn-in length s_n for the ALG2 bound.
    #[arg(long)]
    pub burn_in: Option<u64>,
    /// Absolute constant of the ALG2/ALG3 bounds (defaults to 1).
    #[arg(long)]
    pub c_abs: Option<f64>,
    #[arg(long, default_value_t = 1e-12)]
    pub rel_tol: f64,
    /// Print CSV instead of aligned text.
    #[arg(long)]
    pub csv: bool,
}

fn need<T: Copy>(value: Option<T>, flag: &str, quantity: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::config(format!("{quantity} requires --{flag}")))
}

fn need_list<'a>(value: &'a [f64], flag: &str, quantity: &str) -> Result<&'a [f64], CliError> {
    if value.is_empty() {
        Err(CliError::config(format!("{quantity} requires --{flag}")))
    } else {
        Ok(value)
    }
}

fn report(name: &str, inputs: &[(&str, f64)], value: f64, error_estimate: f64) -> BoundReport {
    BoundReport {
        name: name.to_string(),
        inputs: inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        value,
        log_domain: false,
        error_estimate,
        unspecified_constant: false,
    }
}

/// Evaluates every requested quantity.
pub fn evaluate(args: &BoundsArgs) -> Result<Vec<BoundReport>, CliError> {
    let mut out = Vec::new();
    if let Some(k) = args.lambda_k {
        out.push(report(
            "lambda_k",
            &[("k", k as f64)],
            lambda_k(k)? as f64,
            0.0,
        ));
    }
    if args.t0 {
        let delta = need(args.delta, "delta", "--t0")?;
        let k = need(args.k, "k", "--t0")?;
        let t0 = t_zero(delta, k)?;
        out.push(report(
            "t0",
            &[("delta", delta), ("k", k as f64)],
            t0 as f64,
            0.0,
        ));
    }
    if args.beta {
        let delta = need(args.delta, "delta", "--beta")?;
        let k = need(args.k, "k", "--beta")?;
        out.push(beta_report(delta, k)?);
    }
    if args.c_alpha {
        let alpha = need_list(&args.alpha, "alpha", "--c-alpha")?;
        let series = c_alpha_tilde(alpha, args.rel_tol)?;
        let mut r = report(
            "ln_c_alpha_tilde",
            &[("terms", series.terms as f64)],
            series.ln_c_alpha_tilde(),
            series.relative_tail,
        );
        r.log_domain = true;
        out.push(r);
    }
    if args.coupon {
        let alpha = need_list(&args.alpha, "alpha", "--coupon")?;
        if args.mu.is_empty() {
            let (value, err) = bounds::expected_queries(alpha)?;
            out.push(report(
                "expected_n",
                &[("k", alpha.len() as f64)],
                value,
                err,
            ));
        } else {
            let c = coupon_collector(alpha, &args.mu)?;
            let k = alpha.len() as f64;
            out.push(report(
                "expected_n",
                &[("k", k)],
                c.expected_n,
                c.error_estimate,
            ));
            out.push(report(
                "coupon_lower_bound",
                &[("k", k)],
                c.lower_bound,
                0.0,
            ));
        }
    }
    if let Some(which) = args.upper {
        let alpha = need_list(&args.alpha, "alpha", "--upper")?;
        let mu = need_list(&args.mu, "mu", "--upper")?;
        let n = need(args.n, "n", "--upper")?;
        let spec = ReservoirSpec::bernoulli(alpha.to_vec(), mu.to_vec())?;
        out.push(match which {
            UpperBound::Alg1 => alg1_upper_bound(n, &spec)?,
            UpperBound::Alg2 => {
                let burn_in = args
                    .burn_in
                    .unwrap_or_else(|| ((n as f64).ln().sqrt().ceil() as u64).max(1));
                alg2_upper_bound(n, burn_in, &spec, args.c_abs)?
            }
            UpperBound::Alg3 => alg3_upper_bound(n, &spec, args.c_abs)?,
        });
    }
    if args.front_load {
        let alpha1 = need(args.alpha1, "alpha1", "--front-load")?;
        let delta = need(args.delta, "delta", "--front-load")?;
        let n = need(args.n, "n", "--front-load")?;
        let m = front_load_penalty_minimizer(n, alpha1, delta)?;
        let inputs = [
            ("n", n as f64),
            ("alpha1", alpha1),
            ("delta_underbar", delta),
        ];
        out.push(report(
            "x_star",
            &inputs,
            m.x_star,
            m.f_prime.abs() / m.f_second,
        ));
        out.push(report("f_at_x_star", &inputs, m.f_at_x_star, 0.0));
        out.push(report("f_prime_at_x_star", &inputs, m.f_prime, 0.0));
        out.push(report("f_second_at_x_star", &inputs, m.f_second, 0.0));
        out.push(report(
            "x_star_lower_bound",
            &inputs[..2],
            minimizer_lower_bound(n, alpha1),
            0.0,
        ));
    }
    if args.uniform_lower {
        let alpha1 = need(args.alpha1, "alpha1", "--uniform-lower")?;
        let delta = need(args.delta, "delta", "--uniform-lower")?;
        out.push(report(
            "uniform_lower_bound_ln_n_coefficient",
            &[("alpha1", alpha1), ("delta_underbar", delta)],
            uniform_lower_bound(alpha1, delta)?,
            0.0,
        ));
    }
    if out.is_empty() {
        return Err(CliError::config(
            "no quantity requested (try --lambda-k, --t0, --beta, --c-alpha, --coupon, --upper, --front-load, --uniform-lower)",
        ));
    }
    Ok(out)
}

/// Shortest round-tripping form, in exponent notation for very small or
/// very large magnitudes.
fn number(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

fn inputs_text(r: &BoundReport) -> String {
    r.inputs
        .iter()
        .map(|(k, v)| format!("{k}={}", number(*v)))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn to_text(reports: &[BoundReport]) -> String {
    let width = reports.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut s = String::new();
    for r in reports {
        let _ = write!(s, "{:<width$}  {}", r.name, number(r.value));
        if r.log_domain {
            s.push_str("  (natural log)");
        }
        if r.error_estimate > 0.0 {
            let _ = write!(s, "  ±{:.1e}", r.error_estimate);
        }
        if r.unspecified_constant {
            s.push_str("  [absolute constant set to 1]");
        }
        let _ = writeln!(s, "  [{}]", inputs_text(r));
    }
    s
}

pub fn to_csv(reports: &[BoundReport]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::io(e);
    w.write_record([
        "name",
        "value",
        "log_domain",
        "error_estimate",
        "unspecified_constant",
        "inputs",
    ])
    .map_err(io)?;
    for r in reports {
        w.write_record([
            r.name.clone(),
            number(r.value),
            r.log_domain.to_string(),
            number(r.error_estimate),
            r.unspecified_constant.to_string(),
            inputs_text(r),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::io(e.error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn run(args: &BoundsArgs) -> Result<String, CliError> {
    let reports = evaluate(args)?;
    if args.csv {
        to_csv(&reports)
    } else {
        Ok(to_text(&reports))
    }
}
