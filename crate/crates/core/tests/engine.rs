use cab_core::engine::{
    drive, geometric_checkpoints, regret_oracle_fixed_two_arm, run_episode_on, Environment,
    Population, DEFAULT_CHECKPOINTS,
};
use cab_core::seed::{stream_rng, Stream};
use cab_core::{
    run_episode, run_experiment, ExperimentPlan, NamedPolicy, PolicyConfig, ReservoirSpec,
    RewardFamily,
};

fn setup1() -> ReservoirSpec {
    ReservoirSpec::bernoulli(vec![0.5, 0.5], vec![0.6, 0.4]).unwrap()
}

fn all_policies() -> Vec<PolicyConfig> {
    vec![
        PolicyConfig::Alg1,
        PolicyConfig::Alg2 { burn_in: None },
        PolicyConfig::Alg3,
        PolicyConfig::Alg4,
        PolicyConfig::EtcInfinity {
            delta_lower_bound: 0.1,
        },
        PolicyConfig::FrontLoadedUcb {
            alpha1_hint: 0.5,
            c: 1.0,
        },
        PolicyConfig::Ucb1 { arms: 3 },
    ]
}

#[test]
fn step_increments_sum_to_cumulative_regret() {
    let spec = setup1();
    for config in all_policies() {
        let n = 5_000;
        let mut policy = config.build(2, n, stream_rng(9, Stream::Policy)).unwrap();
        let mut env = Environment::new(Population::Reservoir(&spec), 9);
        let mut feedback = None;
        let mut total = 0.0;
        for _ in 0..n {
            let outcome = env.apply(policy.next_action(feedback)).unwrap();
            assert!(outcome.regret == 0.0 || (outcome.regret - 0.2).abs() < 1e-15);
            assert!((0.0..=1.0).contains(&outcome.reward));
            total += outcome.regret;
            feedback = Some(outcome.reward);
        }
        assert_eq!(total, env.cumulative_regret());
        assert_eq!(env.steps(), n);
    }
}

#[test]
fn checkpoint_regret_is_nondecreasing_and_bounded() {
    let spec = setup1();
    let grid = geometric_checkpoints(20_000, DEFAULT_CHECKPOINTS);
    for config in all_policies() {
        let ep =
            run_episode_on(Population::Reservoir(&spec), 2, &config, 20_000, 4, &grid).unwrap();
        assert_eq!(ep.checkpoints.len(), grid.len());
        for w in ep.checkpoints.windows(2) {
            assert!(w[1].pseudo_regret >= w[0].pseudo_regret);
            assert!(w[1].arms_queried >= w[0].arms_queried);
        }
        for c in &ep.checkpoints {
            assert!(c.pseudo_regret <= 0.2 * c.t as f64 + 1e-9);
        }
        assert_eq!(
            ep.commit_time.is_some(),
            ep.committed_type_is_optimal.is_some()
        );
        if !config.is_etc_family() {
            assert!(ep.commit_time.is_none());
        }
    }
}

#[test]
fn episodes_are_deterministic() {
    let spec = setup1();
    for config in all_policies() {
        let a = run_episode(&spec, &config, 3_000, 77).unwrap();
        let b = run_episode(&spec, &config, 3_000, 77).unwrap();
        assert_eq!(a, b);
    }
}

fn plan(policies: Vec<PolicyConfig>, horizon: u64, replications: u64) -> ExperimentPlan {
    ExperimentPlan {
        spec: setup1(),
        policies: policies.into_iter().map(NamedPolicy::new).collect(),
        horizon,
        checkpoints: geometric_checkpoints(horizon, DEFAULT_CHECKPOINTS),
        replications,
        master_seed: 2024,
    }
}

#[test]
fn experiment_output_is_independent_of_thread_count() {
    let p = plan(all_policies(), 5_000, 6);
    let one = run_experiment(&p, 1).unwrap();
    let many = run_experiment(&p, 5).unwrap();
    assert_eq!(one, many);
    assert_eq!(one.raw.len(), 7 * 6 * p.checkpoints.len());
    assert_eq!(one.curves.len(), 7);
}

#[test]
fn single_replication_reports_zero_width() {
    let out = run_experiment(&plan(vec![PolicyConfig::Alg3], 1_000, 1), 1).unwrap();
    let curve = &out.curves[0];
    assert!(curve.single_sample);
    assert!(curve
        .points
        .iter()
        .all(|p| p.ci_halfwidth == 0.0 && p.replications == 1));
}

#[test]
fn committing_and_front_loaded_policies_are_sublinear() {
    let horizon = 100_000;
    let mut p = plan(
        vec![
            PolicyConfig::Alg1,
            PolicyConfig::EtcInfinity {
                delta_lower_bound: 0.1,
            },
            PolicyConfig::FrontLoadedUcb {
                alpha1_hint: 0.5,
                c: 1.0,
            },
        ],
        horizon,
        24,
    );
    p.checkpoints = vec![1_000, horizon];
    let out = run_experiment(&p, 4).unwrap();
    for curve in &out.curves {
        let early = curve.at(1_000).unwrap().mean_regret / 1_000.0;
        let late = curve.at(horizon).unwrap().mean_regret / horizon as f64;
        assert!(late < 0.5 * early, "{}: {late} vs {early}", curve.policy);
    }
}

#[test]
fn quadrupling_replications_halves_the_interval() {
    let config = vec![PolicyConfig::FrontLoadedUcb {
        alpha1_hint: 0.5,
        c: 1.0,
    }];
    let mut small = plan(config.clone(), 2_000, 200);
    small.checkpoints = vec![2_000];
    let mut large = plan(config, 2_000, 800);
    large.checkpoints = vec![2_000];
    let a = run_experiment(&small, 4).unwrap().curves[0].points[0].ci_halfwidth;
    let b = run_experiment(&large, 4).unwrap().curves[0].points[0].ci_halfwidth;
    let ratio = a / b;
    assert!((1.5..=2.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn near_degenerate_reservoir_gives_zero_regret_to_fixed_set_ucb() {
    let spec = ReservoirSpec::bernoulli(vec![1.0 - 1e-12, 1e-12], vec![0.7, 0.2]).unwrap();
    for seed in 0..20 {
        let ep = run_episode(&spec, &PolicyConfig::Ucb1 { arms: 4 }, 2_000, seed).unwrap();
        assert_eq!(ep.pseudo_regret, 0.0);
    }
}

#[test]
fn alg2_commits_on_point_masses_once_the_gap_clears_the_commit_band() {
    // Gap 0.4 point masses, n = 10^5: 0.4 m ≥ 4√(m ln n) first holds at
    // m = 1152. A burn-in of 1000 skips the rounds where the discard band
    // would swallow the drift.
    let spec =
        ReservoirSpec::uniform_family(vec![0.5, 0.5], vec![0.9, 0.5], RewardFamily::PointMass)
            .unwrap();
    let config = PolicyConfig::Alg2 {
        burn_in: Some(1000),
    };
    for seed in 0..10 {
        let ep = run_episode(&spec, &config, 100_000, seed).unwrap();
        let t = ep.commit_time.expect("commits");
        assert_eq!(
            (t - 1) % 2000,
            2 * 1152 % 2000,
            "seed {seed}: commit at {t}"
        );
        assert_eq!((t - 1 - 2 * 1152) / 2000 + 1, ep.epochs_used);
        assert_eq!(ep.committed_type_is_optimal, Some(true));
    }
}

#[test]
fn fixed_two_arm_reference() {
    let grid = [2, 10, 100, 1_000];
    let point = RewardFamily::PointMass;
    let two = regret_oracle_fixed_two_arm([0.6, 0.4], point, 1_000, &grid, 5, 1, 2).unwrap();
    assert!((two.at(2).unwrap().mean_regret - 0.2).abs() < 1e-12);
    // UCB1 pulls the inferior arm at most 8 ln n / Δ² + 1 + π²/3 times.
    let cap = 0.2 * ((8.0 * 1000f64.ln() / 0.04).ceil() + 1.0 + std::f64::consts::PI.powi(2) / 3.0);
    assert!(two.at(1_000).unwrap().mean_regret <= cap);
    let same =
        regret_oracle_fixed_two_arm([0.5, 0.5], RewardFamily::Bernoulli, 1_000, &grid, 5, 1, 2)
            .unwrap();
    assert!(same.points.iter().all(|p| p.mean_regret == 0.0));
}

#[test]
fn short_checkpoints_of_horizon_dependent_policies_use_the_minimum_horizon() {
    let spec = ReservoirSpec::bernoulli(vec![0.2, 0.3, 0.5], vec![0.9, 0.5, 0.1]).unwrap();
    let p = ExperimentPlan {
        spec,
        policies: vec![NamedPolicy::new(PolicyConfig::Alg1)],
        horizon: 100,
        checkpoints: vec![1, 2, 3, 100],
        replications: 3,
        master_seed: 0,
    };
    let out = run_experiment(&p, 1).unwrap();
    assert_eq!(out.raw.len(), 12);
    for row in &out.raw {
        assert!(row.arms_queried <= row.checkpoint.max(3));
    }
}

#[test]
fn drive_records_requested_checkpoints_only() {
    let spec = setup1();
    let mut policy = PolicyConfig::Alg3
        .build(2, 100, stream_rng(0, Stream::Policy))
        .unwrap();
    let mut env = Environment::new(Population::Reservoir(&spec), 0);
    let ep = drive(policy.as_mut(), &mut env, 100, &[1, 50, 100]).unwrap();
    let ts: Vec<u64> = ep.checkpoints.iter().map(|c| c.t).collect();
    assert_eq!(ts, vec![1, 50, 100]);
    assert_eq!(ep.checkpoints[0].arms_queried, 1);
}
