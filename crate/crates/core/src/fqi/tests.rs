use super::*;

fn single(reward: f64, gamma: f64) -> FiniteMDPSpec {
    FiniteMDPSpec {
        agents: vec![AgentMdp { kernel: vec![vec![vec![1.0]]], reward: vec![vec![reward]] }],
        mix: vec![1.0],
        gamma,
        reward_bound: reward.abs().max(1.0),
        shared_reward: false,
        reward_noise: 0.0,
    }
}

fn two_state(p_stay: f64, rewards: [[f64; 2]; 2]) -> AgentMdp {
    AgentMdp {
        kernel: vec![vec![vec![p_stay, 1.0 - p_stay], vec![1.0 - p_stay, p_stay]]; 2],
        reward: rewards.iter().map(|r| r.to_vec()).collect(),
    }
}

fn pair(a: AgentMdp, b: AgentMdp, mix: [f64; 2]) -> FiniteMDPSpec {
    FiniteMDPSpec {
        shared_reward: a.reward == b.reward,
        agents: vec![a, b],
        mix: mix.to_vec(),
        gamma: 0.9,
        reward_bound: 1.0,
        reward_noise: 0.0,
    }
}

fn exact_ctx(mode: FqiMode) -> (HypothesisSpace, FqiMode) {
    (HypothesisSpace::ExactTabular, mode)
}

#[test]
fn geometric_series_and_zero_reward() {
    let o = value_iteration_oracle(&single(1.0, 0.5)).unwrap();
    assert!((o.agents[0].get(0, 0) - 2.0).abs() < 1e-9);
    assert!((o.joint[0] - 2.0).abs() < 1e-9);
    let o = value_iteration_oracle(&single(0.0, 0.9)).unwrap();
    assert_eq!(o.agents[0].values, vec![0.0]);
}

#[test]
fn deterministic_chain_matches_hand_solution() {
    let chain =
        AgentMdp { kernel: vec![vec![vec![0.0, 1.0]], vec![vec![0.0, 1.0]]], reward: vec![vec![0.0], vec![1.0]] };
    let spec = FiniteMDPSpec {
        agents: vec![chain],
        mix: vec![1.0],
        gamma: 0.9,
        reward_bound: 1.0,
        shared_reward: false,
        reward_noise: 0.0,
    };
    let o = value_iteration_oracle(&spec).unwrap();
    // V(1) = 1 / (1 - 0.9) and V(0) = 0.9 V(1)
    assert!((o.agents[0].get(1, 0) - 10.0).abs() < 1e-8);
    assert!((o.agents[0].get(0, 0) - 9.0).abs() < 1e-8);
}

#[test]
fn non_stochastic_rows_rejected() {
    let mut s = single(1.0, 0.5);
    s.agents[0].kernel[0][0][0] = 0.9;
    assert_eq!(value_iteration_oracle(&s).unwrap_err().kind(), "bad-kernel");
    s.agents[0].kernel[0][0][0] = -1.0;
    assert_eq!(value_iteration_oracle(&s).unwrap_err().kind(), "bad-kernel");
}

#[test]
fn joint_value_is_the_planted_mix_of_independent_agents() {
    let spec = pair(two_state(0.8, [[0.0, 1.0], [0.5, 0.2]]), two_state(0.3, [[0.9, 0.1], [0.0, 0.4]]), [0.3, 0.7]);
    let o = value_iteration_oracle(&spec).unwrap();
    let sup = spec.support();
    let per = sup.evaluate(&o.agents.iter().collect::<Vec<_>>());
    for (k, joint) in o.joint.iter().enumerate() {
        assert!((joint - (0.3 * per[0][k] + 0.7 * per[1][k])).abs() < 1e-8);
    }
}

#[test]
fn zero_iterations_return_the_zero_table() {
    let spec = pair(two_state(0.8, [[0.0, 1.0], [0.5, 0.2]]), two_state(0.8, [[0.0, 1.0], [0.5, 0.2]]), [0.5, 0.5]);
    let r = fqi_run(&spec, &HypothesisSpace::ExactTabular, FqiMode::Separate, 10, 0, SamplingDistribution::Uniform, 0)
        .unwrap();
    assert_eq!(r.iterations(), 0);
    assert!(r.last().iter().all(|q| q.values.iter().all(|v| *v == 0.0)));
}

#[test]
fn large_samples_track_the_oracle() {
    let spec = FiniteMDPSpec {
        agents: vec![two_state(0.7, [[0.0, 1.0], [0.5, 0.2]])],
        mix: vec![1.0],
        gamma: 0.9,
        reward_bound: 1.0,
        shared_reward: false,
        reward_noise: 0.0,
    };
    let o = value_iteration_oracle(&spec).unwrap();
    let t = 10;
    let r = fqi_run(
        &spec,
        &HypothesisSpace::ExactTabular,
        FqiMode::Separate,
        1_000_000,
        t,
        SamplingDistribution::Uniform,
        3,
    )
    .unwrap();
    let err = r.last()[0].sup_distance(&o.agents[0]);
    assert!(err <= 10.0 * 0.9f64.powi(t as i32) / (1.0 - 0.9), "{err}");
}

#[test]
fn pooling_clone_samples_does_not_hurt() {
    let a = two_state(0.6, [[0.0, 1.0], [0.5, 0.2]]);
    let spec = pair(a.clone(), a, [0.5, 0.5]);
    let o = value_iteration_oracle(&spec).unwrap();
    let err = |mode| {
        (1..=8)
            .map(|seed| {
                let r =
                    fqi_run(&spec, &HypothesisSpace::ExactTabular, mode, 50, 20, SamplingDistribution::Uniform, seed)
                        .unwrap();
                r.last().iter().zip(&o.agents).map(|(q, s)| q.sup_distance(s)).fold(0f64, f64::max)
            })
            .sum::<f64>()
    };
    assert!(err(FqiMode::Shared) <= err(FqiMode::Separate));
}

#[test]
fn credit_weight_examples() {
    let fit = fit_credit_weights(&[vec![1.0, 2.0, 3.0]], &[0.0, 5.0, 1.0], &[1.0 / 3.0; 3]).unwrap();
    assert_eq!(fit.weights, vec![1.0]);
    let q1 = vec![1.0, 0.0, 2.0, -1.0];
    let q2 = vec![0.5, 3.0, -1.0, 2.0];
    let target: Vec<f64> = q1.iter().zip(&q2).map(|(a, b)| 0.3 * a + 0.7 * b).collect();
    let fit = fit_credit_weights(&[q1.clone(), q2.clone()], &target, &[0.25; 4]).unwrap();
    assert!((fit.weights[0] - 0.3).abs() < 1e-9 && (fit.weights[1] - 0.7).abs() < 1e-9);
    assert!(!fit.degenerate);
    let sym = fit_credit_weights(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[1.0, 1.0], &[0.5; 2]).unwrap();
    assert!((sym.weights[0] - 0.5).abs() < 1e-12);
    let deg = fit_credit_weights(&[q1.clone(), q1], &target, &[0.25; 4]).unwrap();
    assert!(deg.degenerate);
    assert_eq!(deg.weights, vec![0.5, 0.5]);
    assert_eq!(fit_credit_weights(&[vec![1.0]], &[1.0, 2.0], &[0.5, 0.5]).unwrap_err().kind(), "support-mismatch");
}

#[test]
fn weights_clip_at_the_simplex_boundary() {
    // unconstrained optimum is (2, -1)
    let q1 = vec![1.0, 0.0, 1.0];
    let q2 = vec![0.0, 1.0, 1.0];
    let target = vec![2.0, -1.0, 1.0];
    let fit = fit_credit_weights(&[q1, q2], &target, &[1.0 / 3.0; 3]).unwrap();
    assert_eq!(fit.weights, vec![1.0, 0.0]);
}

#[test]
fn algorithmic_term_closed_form() {
    let mut power = 1.0;
    for _ in 0..11 {
        power *= 0.9;
    }
    let expected = 4.0 * power / (0.1 * 0.1);
    assert!((algorithmic_term(0.9, 10, 1.0) - expected).abs() < 1e-9);
    assert!((expected - 125.524).abs() < 1e-3);
}

#[test]
fn clone_agents_have_no_sharing_bias_or_variance() {
    let a = two_state(0.6, [[0.0, 1.0], [0.5, 0.2]]);
    let spec = pair(a.clone(), a, [0.5, 0.5]);
    let o = value_iteration_oracle(&spec).unwrap();
    let r = fqi_run(&spec, &HypothesisSpace::ExactTabular, FqiMode::Shared, 200, 15, SamplingDistribution::Uniform, 1)
        .unwrap();
    let rep = decompose(&spec, &o, &r, &EvaluationDistribution::Uniform).unwrap();
    assert!(rep.sharing_bias <= 1e-9, "{}", rep.sharing_bias);
    assert_eq!(rep.algorithmic_term, algorithmic_term(0.9, 15, 1.0));
    assert!(rep.excess_risk.is_finite() && rep.bound.is_finite());
}

#[test]
fn identical_optimal_values_give_zero_variance_term() {
    let spec = single(0.5, 0.8);
    let two =
        FiniteMDPSpec { agents: vec![spec.agents[0].clone(); 2], mix: vec![0.5, 0.5], shared_reward: true, ..spec };
    let o = value_iteration_oracle(&two).unwrap();
    let (h, mode) = exact_ctx(FqiMode::Separate);
    let ctx = Estimates { mode, hypothesis: &h, samples: 1, iterations: 3, sampling: SamplingDistribution::Uniform };
    let est = vec![
        ValueTable { states: 1, actions: 1, values: vec![1.0] },
        ValueTable { states: 1, actions: 1, values: vec![2.0] },
    ];
    let rep = decompose_estimates(&two, &o, &est, &ctx, &EvaluationDistribution::Uniform).unwrap();
    assert_eq!(rep.var_term, 0.0);
}

#[test]
fn exact_inputs_have_zero_excess_risk_under_the_bound() {
    let spec = pair(two_state(0.8, [[0.0, 1.0], [0.5, 0.2]]), two_state(0.3, [[0.9, 0.1], [0.0, 0.4]]), [0.3, 0.7]);
    let o = value_iteration_oracle(&spec).unwrap();
    let (h, mode) = exact_ctx(FqiMode::Separate);
    let ctx = Estimates { mode, hypothesis: &h, samples: 1, iterations: 50, sampling: SamplingDistribution::Uniform };
    let rep = decompose_estimates(&spec, &o, &o.agents, &ctx, &EvaluationDistribution::Uniform).unwrap();
    assert!(rep.excess_risk.abs() <= 1e-9);
    assert!(rep.excess_risk <= rep.bound);
    assert!((rep.fitted_weights[0] - 0.3).abs() < 1e-6);
}

#[test]
fn full_aggregation_matches_exact_tabular() {
    let spec = pair(two_state(0.8, [[0.0, 1.0], [0.5, 0.2]]), two_state(0.3, [[0.9, 0.1], [0.0, 0.4]]), [0.3, 0.7]);
    let agg = HypothesisSpace::Aggregated { k: 2, map: None };
    let a = fqi_run(&spec, &agg, FqiMode::Separate, 100, 5, SamplingDistribution::Uniform, 9).unwrap();
    let b = fqi_run(&spec, &HypothesisSpace::ExactTabular, FqiMode::Separate, 100, 5, SamplingDistribution::Uniform, 9)
        .unwrap();
    assert_eq!(a.iterates, b.iterates);
}

#[test]
fn coarser_aggregation_does_not_shrink_the_approximation_proxy() {
    let family = MdpFamily { agents: 1, states: 4, actions: 2, seed: 5, ..Default::default() };
    let spec = family.instance(0.0).unwrap();
    let o = value_iteration_oracle(&spec).unwrap();
    let proxy = |k: usize| {
        let h = if k == 4 { HypothesisSpace::ExactTabular } else { HypothesisSpace::Aggregated { k, map: None } };
        let r = fqi_run(&spec, &h, FqiMode::Separate, 200_000, 40, SamplingDistribution::Uniform, 2).unwrap();
        decompose(&spec, &o, &r, &EvaluationDistribution::Uniform).unwrap().approx_proxy
    };
    let (p4, p2, p1) = (proxy(4), proxy(2), proxy(1));
    assert_eq!(p4, 0.0);
    assert!(p4 <= p2 && p2 <= p1, "{p4} {p2} {p1}");
}

#[test]
fn mismatched_evaluation_support_rejected() {
    let spec = single(1.0, 0.5);
    let o = value_iteration_oracle(&spec).unwrap();
    let r = fqi_run(&spec, &HypothesisSpace::ExactTabular, FqiMode::Separate, 5, 2, SamplingDistribution::Uniform, 0)
        .unwrap();
    let mu = EvaluationDistribution::Weights { weights: vec![0.5, 0.5] };
    assert_eq!(decompose(&spec, &o, &r, &mu).unwrap_err().kind(), "support-mismatch");
}

#[test]
fn shared_mode_needs_matching_dimensions() {
    let spec = pair(two_state(0.8, [[0.0, 1.0], [0.5, 0.2]]), single(0.5, 0.9).agents[0].clone(), [0.5, 0.5]);
    let r = fqi_run(&spec, &HypothesisSpace::ExactTabular, FqiMode::Shared, 5, 2, SamplingDistribution::Uniform, 0);
    assert_eq!(r.unwrap_err().kind(), "bad-params");
}

#[test]
fn sweep_rows_follow_the_grid() {
    let grid = SweepGrid {
        samples: vec![50, 500],
        iterations: vec![5],
        modes: vec![FqiMode::Separate, FqiMode::Shared],
        diversity: vec![0.0, 0.5],
        seeds: vec![1, 2, 3],
        ..Default::default()
    };
    let rows = sweep(&MdpSource::Family(MdpFamily::default()), &grid).unwrap();
    assert_eq!(rows.len(), 8);
    assert_eq!(rows[0].diversity, Some(0.0));
    assert_eq!(rows[1].samples, 500);
    assert_eq!(rows[2].mode, FqiMode::Shared);
    assert!(rows.iter().all(|r| r.seeds == 3));
    assert!(rows[..4].iter().all(|r| r.sharing_bias.mean <= 1e-9));
    assert_eq!(rows, sweep(&MdpSource::Family(MdpFamily::default()), &grid).unwrap());
}
