//! Acceptance suite: one test per shipping criterion, each printing a
//! pass/fail line. Run with
//! `cargo test -p consensus-cli --test acceptance -- --nocapture`.

use std::time::Instant;

use consensus_core::analysis::{
    detect_clusters, detect_consensus, detect_oscillation, summarize, RecordGroup,
};
use consensus_core::engine::{run_batch, run_experiment, ExperimentRecord};
use consensus_core::io::records_to_jsonl_string;
use consensus_core::seed::derive_seed;
use consensus_core::{
    BackendSpec, Dimension, ExperimentConfig, LlmSessionConfig, Personality, State, StrategyKind,
    StrategyOnlyFactory, StrategySpec, TopologySpec,
};
use consensus_llm::{
    parse_position, render_role_prompt, render_round_prompt, ConversationalFactory, MockBehavior,
    MockChatServer,
};

/// Prints the criterion verdict when the test finishes or panics.
struct Criterion(&'static str);

impl Drop for Criterion {
    fn drop(&mut self) {
        if std::thread::panicking() {
            println!("acceptance {}: FAIL", self.0);
        } else {
            println!("acceptance {}: PASS", self.0);
        }
    }
}

fn scalar(state: &State<f64>) -> f64 {
    match state {
        State::Scalar(v) => *v,
        State::Planar(_) => panic!("scalar state expected"),
    }
}

fn scalars(states: &[State<f64>]) -> Vec<f64> {
    states.iter().map(scalar).collect()
}

fn uniform_agents(kind: StrategyKind, sigma: f64, n: usize) -> Vec<BackendSpec<f64>> {
    vec![BackendSpec::strategy(StrategySpec::new(kind).with_noise(sigma)); n]
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn acceptance_01_one_round_mean_consensus() {
    let _c = Criterion("01 one-round mean consensus");
    let started = Instant::now();
    for n in 2..=10 {
        let config = ExperimentConfig::new(
            uniform_agents(StrategyKind::AverageIncludeSelf, 0.0, n),
            9,
            1000 + n as u64,
        );
        let record = run_experiment(&config, 0, &StrategyOnlyFactory).unwrap();
        let inits = scalars(&record.initial_states);
        let mean = inits.iter().sum::<f64>() / n as f64;
        for state in &record.rounds[0].states_after {
            assert!(
                rel_close(scalar(state), mean, 1e-12),
                "n={n}: state {state} differs from initial mean {mean}"
            );
        }
        let report = detect_consensus(&record, 1e-6).unwrap();
        assert!(report.consensus, "n={n} must reach consensus");
        assert_eq!(report.convergence_round, Some(1));
        assert!(
            scalar(&report.bias).abs() <= 1e-12 * mean.abs().max(1.0),
            "n={n}: bias {} exceeds 1e-12 relative",
            scalar(&report.bias)
        );
    }
    assert!(
        started.elapsed().as_secs_f64() < 1.0,
        "criterion 1 exceeded 1 s"
    );
}

#[test]
fn acceptance_02_exclude_self_contraction_and_two_agent_swap() {
    let _c = Criterion("02 exclude-self contraction");
    for n in [3usize, 5, 8] {
        let config = ExperimentConfig::new(
            uniform_agents(StrategyKind::AverageExcludeSelf, 0.0, n),
            9,
            2000 + n as u64,
        );
        let record = run_experiment(&config, 0, &StrategyOnlyFactory).unwrap();
        let factor = 1.0 / (n as f64 - 1.0);
        for round in &record.rounds {
            let before = scalars(&round.states_before);
            let after = scalars(&round.states_after);
            let sum_before: f64 = before.iter().sum();
            let sum_after: f64 = after.iter().sum();
            assert!(
                rel_close(sum_after, sum_before, 1e-9),
                "n={n} round {}: population sum drifted",
                round.round
            );
            let mean_before = sum_before / n as f64;
            let mean_after = sum_after / n as f64;
            for k in 0..n {
                let dev_before = (before[k] - mean_before).abs();
                let dev_after = (after[k] - mean_after).abs();
                if dev_before >= 1e-4 {
                    assert!(
                        rel_close(dev_after, dev_before * factor, 1e-9),
                        "n={n} round {} agent {k}: {dev_after} vs {}",
                        round.round,
                        dev_before * factor
                    );
                }
            }
        }
    }

    // n = 2: the rule is an exact swap, flagged as period-2 oscillation
    let mut config = ExperimentConfig::new(
        uniform_agents(StrategyKind::AverageExcludeSelf, 0.0, 2),
        9,
        77,
    );
    config.init_states = Some(vec![State::Scalar(20.0), State::Scalar(80.0)]);
    let record = run_experiment(&config, 0, &StrategyOnlyFactory).unwrap();
    for (t, states) in record.trajectory().iter().enumerate() {
        let expected = if t % 2 == 0 {
            [20.0, 80.0]
        } else {
            [80.0, 20.0]
        };
        assert_eq!(scalars(states), expected);
    }
    let osc = detect_oscillation(&record, 6, 0.0).unwrap();
    assert!(osc.oscillating && osc.participants == vec![0, 1]);
}

fn stubborn_follower_record(
    init_states: Option<Vec<State<f64>>>,
    seed: u64,
) -> ExperimentRecord<f64> {
    let agents = vec![
        BackendSpec::strategy(StrategySpec::new(StrategyKind::Stubborn)),
        BackendSpec::strategy(StrategySpec::new(StrategyKind::AverageIncludeSelf)),
    ];
    let mut config = ExperimentConfig::new(agents, 20, seed);
    config.init_states = init_states;
    run_experiment(&config, 0, &StrategyOnlyFactory).unwrap()
}

#[test]
fn acceptance_03_stubborn_dominance() {
    let _c = Criterion("03 stubborn dominance");

    let check = |record: &ExperimentRecord<f64>| -> (f64, f64) {
        let trajectory = record.trajectory();
        let leader = scalar(&record.initial_states[0]);
        let gap = (scalar(&record.initial_states[1]) - leader).abs();
        for states in &trajectory {
            assert_eq!(scalar(&states[0]), leader, "stubborn agent moved");
        }
        for pair in trajectory.windows(2) {
            let err_before = (scalar(&pair[0][1]) - leader).abs();
            let err_after = (scalar(&pair[1][1]) - leader).abs();
            if err_before >= 1e-4 * gap.max(1.0) {
                assert!(
                    rel_close(err_after, err_before / 2.0, 1e-9),
                    "follower error does not halve: {err_before} -> {err_after}"
                );
            }
        }
        (leader, gap)
    };

    // unit initial gap: absolute 1e-6 agreement by round 20
    let record = stubborn_follower_record(Some(vec![State::Scalar(50.0), State::Scalar(51.0)]), 1);
    let (leader, _) = check(&record);
    let report = detect_consensus(&record, 1e-6).unwrap();
    assert!(report.consensus);
    assert!(
        (scalar(&report.consensus_value) - leader).abs() <= 1e-6,
        "consensus value {} is not the stubborn state {leader}",
        scalar(&report.consensus_value)
    );

    // random initial gap: agreement within 1e-6 of the gap (error is gap/2^20)
    let record = stubborn_follower_record(None, 31);
    let (leader, gap) = check(&record);
    let final_follower = scalar(record.final_states.last().unwrap());
    assert!(
        (final_follower - leader).abs() <= 1e-6 * gap.max(1.0),
        "follower {final_follower} not within 1e-6 of leader {leader} relative to gap {gap}"
    );
}

#[test]
fn acceptance_04_double_stubborn_deadlock() {
    let _c = Criterion("04 double-stubborn deadlock");
    let config = ExperimentConfig::new(uniform_agents(StrategyKind::Stubborn, 0.0, 2), 9, 88);
    let record = run_experiment(&config, 0, &StrategyOnlyFactory).unwrap();
    for states in record.trajectory() {
        assert_eq!(states, record.initial_states, "stubborn states changed");
    }
    let report = detect_consensus(&record, 1e-6).unwrap();
    assert!(!report.consensus, "distinct stubborn agents cannot agree");
}

/// Independent re-enumeration of the suggestible dynamics: componentwise
/// modal choice with nearest-then-smallest tie-breaks, synchronous rounds.
fn modal_oracle(inits: &[f64], rounds: usize) -> Vec<f64> {
    let mut states = inits.to_vec();
    for _ in 0..rounds {
        let next: Vec<f64> = (0..states.len())
            .map(|k| {
                let own = states[k];
                let neighbors: Vec<f64> = states
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != k)
                    .map(|(_, v)| *v)
                    .collect();
                let mut best: Option<(usize, f64)> = None;
                for &candidate in &neighbors {
                    let count = neighbors.iter().filter(|&&v| v == candidate).count();
                    let better = match best {
                        None => true,
                        Some((best_count, best_value)) => {
                            count > best_count
                                || (count == best_count && {
                                    let d_new = (candidate - own).abs();
                                    let d_best = (best_value - own).abs();
                                    d_new < d_best || (d_new == d_best && candidate < best_value)
                                })
                        }
                    };
                    if better {
                        best = Some((count, candidate));
                    }
                }
                best.expect("neighbors non-empty").1
            })
            .collect();
        states = next;
    }
    states
}

fn spread(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

#[test]
fn acceptance_05_suggestible_scaling() {
    let _c = Criterion("05 suggestible scaling");
    let trials = 100;

    let mut pair_config =
        ExperimentConfig::new(uniform_agents(StrategyKind::Suggestible, 0.0, 2), 9, 555);
    pair_config.experiments = trials;
    let pair_records = run_batch(&pair_config, &StrategyOnlyFactory).unwrap();
    let mut pair_consensus = 0;
    for record in &pair_records {
        let report = detect_consensus(record, 1e-6).unwrap();
        if report.consensus {
            pair_consensus += 1;
        }
        let osc = detect_oscillation(record, 6, 0.0).unwrap();
        assert!(
            osc.oscillating && osc.participants == vec![0, 1],
            "two suggestible agents must swap forever"
        );
    }
    assert_eq!(pair_consensus, 0, "two-agent consensus rate must be 0%");

    let mut ten_config =
        ExperimentConfig::new(uniform_agents(StrategyKind::Suggestible, 0.0, 10), 9, 777);
    ten_config.experiments = trials;
    let ten_records = run_batch(&ten_config, &StrategyOnlyFactory).unwrap();
    let mut measured = 0;
    let mut baseline = 0;
    for record in &ten_records {
        let report = detect_consensus(record, 1e-6).unwrap();
        if report.consensus {
            measured += 1;
        }
        let oracle_final = modal_oracle(&scalars(&record.initial_states), 9);
        assert_eq!(
            oracle_final,
            scalars(&record.final_states),
            "engine dynamics deviate from the brute-force enumeration"
        );
        if spread(&oracle_final) < 1e-6 {
            baseline += 1;
        }
    }
    assert_eq!(
        measured, baseline,
        "measured consensus rate must match the brute-force baseline"
    );
    assert!(
        measured > pair_consensus,
        "ten-agent rate ({measured}/100) must strictly exceed the two-agent rate"
    );
    println!(
        "  suggestible consensus rate: 2 agents 0/{trials}, 10 agents {measured}/{trials} (baseline {baseline}/{trials})"
    );
}

#[test]
fn acceptance_06_clustering_on_stubborn_values() {
    let _c = Criterion("06 stubborn clustering");
    let mut agents = uniform_agents(StrategyKind::Stubborn, 0.0, 7);
    agents.extend(uniform_agents(StrategyKind::Suggestible, 0.0, 3));
    let stubborn_values = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0];
    let mut inits: Vec<State<f64>> = stubborn_values.iter().map(|&v| State::Scalar(v)).collect();
    inits.extend([
        State::Scalar(74.0),
        State::Scalar(81.0),
        State::Scalar(95.0),
    ]);

    let mut config = ExperimentConfig::new(agents, 12, 6);
    config.init_states = Some(inits);
    let record = run_experiment(&config, 0, &StrategyOnlyFactory).unwrap();

    let finals = scalars(&record.final_states);
    for (agent, value) in finals.iter().enumerate().skip(7) {
        assert!(
            stubborn_values.contains(value),
            "suggestible agent {agent} ended at {value}, not on a stubborn value"
        );
    }

    let report = detect_clusters(&record.final_states, 1e-6, 5.0).unwrap();
    assert!(report.clusters.len() >= 2);

    // brute-force oracle: sort and split on gaps
    let mut sorted = finals.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let oracle_count = 1 + sorted.windows(2).filter(|w| w[1] - w[0] >= 5.0).count();
    assert_eq!(report.clusters.len(), oracle_count);
}

#[test]
fn acceptance_07_topology_speed_ordering() {
    let _c = Criterion("07 topology speed ordering");
    let topologies = [
        TopologySpec::Full {
            remove: vec![],
            symmetric: true,
        },
        TopologySpec::Full {
            remove: vec![(1, 2)],
            symmetric: true,
        },
        TopologySpec::Chain,
    ];
    let trials = 50;
    let mut mean_rounds = Vec::new();
    let mut all_inits: Option<Vec<Vec<State<f64>>>> = None;
    for topology in &topologies {
        let mut config = ExperimentConfig::new(
            uniform_agents(StrategyKind::AverageIncludeSelf, 0.0, 3),
            40,
            4242,
        );
        config.experiments = trials;
        config.topology = topology.clone();
        let records = run_batch(&config, &StrategyOnlyFactory).unwrap();

        // identical initial states across the three topologies
        let inits: Vec<Vec<State<f64>>> =
            records.iter().map(|r| r.initial_states.clone()).collect();
        match &all_inits {
            None => all_inits = Some(inits),
            Some(reference) => assert_eq!(reference, &inits),
        }

        let mut total = 0usize;
        for record in &records {
            let report = detect_consensus(record, 1e-3).unwrap();
            let round = report
                .convergence_round
                .expect("all three topologies converge within 40 rounds");
            total += round;
        }
        mean_rounds.push(total as f64 / trials as f64);
    }
    assert!(
        mean_rounds[0] <= mean_rounds[1] && mean_rounds[1] <= mean_rounds[2],
        "mean rounds-to-consensus must order full <= partial <= chain, got {mean_rounds:?}"
    );
    println!(
        "  mean rounds to 1e-3: full {:.2}, partial {:.2}, chain {:.2}",
        mean_rounds[0], mean_rounds[1], mean_rounds[2]
    );
}

#[test]
fn acceptance_08_leader_follower_convergence() {
    let _c = Criterion("08 leader-follower convergence");
    let mut config = ExperimentConfig::new(
        uniform_agents(StrategyKind::AverageIncludeSelf, 0.0, 3),
        40,
        808,
    );
    config.topology = TopologySpec::LeaderFollower { leader: 0 };
    let record = run_experiment(&config, 0, &StrategyOnlyFactory).unwrap();
    let trajectory = record.trajectory();
    let leader = scalar(&record.initial_states[0]);

    for states in &trajectory {
        assert_eq!(scalar(&states[0]), leader, "leader moved");
    }
    for follower in 1..3 {
        for pair in trajectory.windows(2) {
            let err_before = (scalar(&pair[0][follower]) - leader).abs();
            let err_after = (scalar(&pair[1][follower]) - leader).abs();
            if err_before >= 1e-4 {
                assert!(
                    rel_close(err_after, err_before / 2.0, 1e-9),
                    "follower {follower} error does not halve"
                );
            }
        }
    }
    let report = detect_consensus(&record, 1e-6).unwrap();
    assert!(report.consensus);
    assert!((scalar(&report.consensus_value) - leader).abs() <= 1e-6);
}

#[test]
fn acceptance_09_monte_carlo_variance_trend() {
    let _c = Criterion("09 Monte Carlo variance trend");
    let started = Instant::now();
    let agent_counts = [2usize, 4, 6, 8];
    let profiles = [("temp0", 0.0f64), ("temp07", 1.5f64)];
    let trials = 300;

    let mut grouped: Vec<RecordGroup<f64>> = Vec::new();
    let mut group_index = 0u64;
    for &n in &agent_counts {
        for &(label, sigma) in &profiles {
            let mut config = ExperimentConfig::new(
                uniform_agents(StrategyKind::AverageIncludeSelf, sigma, n),
                9,
                derive_seed(2024, group_index),
            );
            config.experiments = trials;
            let records = run_batch(&config, &StrategyOnlyFactory).unwrap();
            grouped.push((n, label.to_string(), records));
            group_index += 1;
        }
    }
    let total: usize = grouped.iter().map(|(_, _, r)| r.len()).sum();
    assert_eq!(total, 2400);

    let summaries = summarize(&grouped, 0.5).unwrap();
    assert_eq!(summaries.len(), 8);

    let noisy: Vec<_> = summaries.iter().filter(|s| s.profile == "temp07").collect();
    for pair in noisy.windows(2) {
        assert!(
            pair[1].var_bias < pair[0].var_bias,
            "noisy bias variance must strictly decrease with agent count: {} agents {} vs {} agents {}",
            pair[0].agents,
            pair[0].var_bias,
            pair[1].agents,
            pair[1].var_bias
        );
    }
    for summary in &noisy {
        assert!(
            summary.mean_bias.abs() < 1.0,
            "noisy |mean bias| must stay below one state unit, got {}",
            summary.mean_bias
        );
    }
    for summary in summaries.iter().filter(|s| s.profile == "temp0") {
        assert!(
            summary.var_bias <= 1e-20,
            "noise-free variance must vanish (up to f64 rounding), got {}",
            summary.var_bias
        );
        assert!(summary.mean_bias.abs() <= 1e-10);
        assert_eq!(summary.consensus_rate, 1.0);
    }

    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "criterion 9 exceeded 30 s: {elapsed:.1}");
    println!(
        "  noisy variances by agent count: {:?} ({elapsed:.2} s)",
        noisy.iter().map(|s| s.var_bias).collect::<Vec<_>>()
    );
}

#[test]
fn acceptance_10_robot_aggregation() {
    let _c = Criterion("10 robot aggregation");
    use consensus_core::aggregation::{run_aggregation, AggregationConfig, SimTimingConfig};

    let scenarios: [Vec<[f64; 2]>; 2] = [
        vec![[0.0, 0.0], [10.0, 0.0], [0.0, 10.0], [10.0, 10.0]],
        vec![[2.0, 1.0], [6.0, 2.0], [4.0, 7.0], [7.0, 6.0]],
    ];
    for positions in scenarios {
        let centroid = [
            positions.iter().map(|p| p[0]).sum::<f64>() / 4.0,
            positions.iter().map(|p| p[1]).sum::<f64>() / 4.0,
        ];
        let config = AggregationConfig {
            robots: 4,
            initial_positions: Some(positions),
            init_range: [0.0, 100.0],
            planners: uniform_agents(StrategyKind::AverageIncludeSelf, 0.0, 4),
            timing: SimTimingConfig {
                planner_period: 2.0,
                controller_period: 0.1,
                t_end: 20.0,
            },
            topology: TopologySpec::default(),
            seed: 10,
            k_p: 1.0,
            v_max: 5.0,
        };
        let log = run_aggregation(&config, &StrategyOnlyFactory).unwrap();

        let steps_per_tick = 20;
        for robot in 0..4 {
            let series: Vec<_> = log.iter().filter(|p| p.robot == robot).collect();
            assert_eq!(series.len(), 201);

            // targets: piecewise constant, breakpoints only on planner ticks
            for (step, pair) in series.windows(2).enumerate() {
                let tick_boundary = (step + 1) % steps_per_tick == 0;
                if !tick_boundary {
                    assert_eq!(pair[0].target_x, pair[1].target_x);
                    assert_eq!(pair[0].target_y, pair[1].target_y);
                    let d0 = ((pair[0].x - pair[0].target_x).powi(2)
                        + (pair[0].y - pair[0].target_y).powi(2))
                    .sqrt();
                    let d1 = ((pair[1].x - pair[1].target_x).powi(2)
                        + (pair[1].y - pair[1].target_y).powi(2))
                    .sqrt();
                    assert!(
                        d1 <= d0 + 1e-12,
                        "robot {robot} step {step}: distance to target grew"
                    );
                }
            }

            let last = series.last().unwrap();
            let err = ((last.x - centroid[0]).powi(2) + (last.y - centroid[1]).powi(2)).sqrt();
            assert!(
                err < 0.1,
                "robot {robot} ended {err} away from the initial centroid"
            );
        }
    }
}

#[test]
fn acceptance_11_llm_plumbing_offline() {
    let _c = Criterion("11 offline llm plumbing");

    // golden prompts, every personality and agent-count variant
    let golden_dir =
        std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../llm/tests/golden");
    let golden = |name: &str| -> String {
        std::fs::read_to_string(golden_dir.join(name))
            .unwrap_or_else(|e| panic!("golden file {name}: {e}"))
    };
    assert_eq!(
        render_role_prompt(Personality::None),
        golden("role_none.txt")
    );
    assert_eq!(
        render_role_prompt(Personality::Stubborn),
        golden("role_stubborn.txt")
    );
    assert_eq!(
        render_role_prompt(Personality::Suggestible),
        golden("role_suggestible.txt")
    );
    let obs = |round: usize, own: f64, neighbors: &[f64]| consensus_core::Observation {
        self_state: State::Scalar(own),
        neighbor_states: neighbors.iter().map(|&v| State::Scalar(v)).collect(),
        round,
    };
    assert_eq!(
        render_round_prompt(&obs(0, 20.0, &[80.0])),
        golden("round0_two_agent.txt")
    );
    assert_eq!(
        render_round_prompt(&obs(0, 50.0, &[40.0, 60.0, 70.0])),
        golden("round0_multi_agent.txt")
    );
    assert_eq!(
        render_round_prompt(&obs(2, 35.5, &[80.0])),
        golden("later_two_agent.txt")
    );
    assert_eq!(
        render_round_prompt(&obs(2, 50.0, &[40.0, 60.0, 70.0])),
        golden("later_multi_agent.txt")
    );

    // parser corpus: canned replies with hand-labeled expectations
    let one = Dimension::One;
    let two = Dimension::Two;
    let corpus: Vec<(&str, Dimension, Option<State<f64>>)> = vec![
        (
            "Reasoning: average is fair.\nPosition: 50",
            one,
            Some(State::Scalar(50.0)),
        ),
        ("Position: 42", one, Some(State::Scalar(42.0))),
        ("position: 13.25", one, Some(State::Scalar(13.25))),
        ("POSITION: -7.5", one, Some(State::Scalar(-7.5))),
        ("My chosen Position is 88", one, Some(State::Scalar(88.0))),
        ("Position: 6.02e2", one, Some(State::Scalar(602.0))),
        ("Position:\n  33.4", one, Some(State::Scalar(33.4))),
        (
            "Reasoning: my position is 20, theirs is 80.\nPosition: 50",
            one,
            Some(State::Scalar(50.0)),
        ),
        (
            "I will move to 47.5 to meet halfway.",
            one,
            Some(State::Scalar(47.5)),
        ),
        ("Let us all meet at 62", one, Some(State::Scalar(62.0))),
        (
            "First 10, later 30, finally 25.",
            one,
            Some(State::Scalar(25.0)),
        ),
        ("moving to .5 sounds right", one, Some(State::Scalar(0.5))),
        ("Let's gather together!", one, None),
        ("Position: unknown", one, None),
        ("Position: 1e999", one, None),
        ("", one, None),
        ("Position: [3, 4]", two, Some(State::Planar([3.0, 4.0]))),
        (
            "Position: (12.5, -3)",
            two,
            Some(State::Planar([12.5, -3.0])),
        ),
        (
            "Reasoning: centroid.\nPosition: [33.25, 66.75]",
            two,
            Some(State::Planar([33.25, 66.75])),
        ),
        (
            "We meet at 1, 2 then 3.5 and 4",
            two,
            Some(State::Planar([3.5, 4.0])),
        ),
        (
            "heading to x=10 y=20 now",
            two,
            Some(State::Planar([10.0, 20.0])),
        ),
        ("only 5 here", two, None),
        ("nothing numeric", two, None),
        (
            "Position: 9 and that is final",
            one,
            Some(State::Scalar(9.0)),
        ),
    ];
    assert!(corpus.len() >= 20);
    for (reply, dim, expected) in &corpus {
        let got = parse_position::<f64>(reply, *dim).ok();
        assert_eq!(&got, expected, "corpus reply {reply:?} parsed as {got:?}");
    }

    // mock end-to-end equals the strategy run byte for byte (the config
    // fingerprint necessarily differs and is masked on both sides)
    let strategy_config = ExperimentConfig::new(
        uniform_agents(StrategyKind::AverageIncludeSelf, 0.0, 3),
        4,
        7,
    );
    let strategy_records = run_batch(&strategy_config, &StrategyOnlyFactory).unwrap();
    let llm_spec = LlmSessionConfig {
        model: "mock".into(),
        base_url: "mock://average".into(),
        temperature: 0.0,
        personality: Personality::None,
        api_key_env: "CONSENSUS_LLM_API_KEY".into(),
        timeout_secs: 5,
        retry_limit: 3,
        initial_backoff_ms: 1,
        history_window: None,
    };
    let llm_config =
        ExperimentConfig::new(vec![BackendSpec::<f64>::Llm(llm_spec.clone()); 3], 4, 7);
    let factory = ConversationalFactory::new(Dimension::One);
    let llm_records = run_batch(&llm_config, &factory).unwrap();
    let mask = |records: &[ExperimentRecord<f64>]| {
        let mut masked = records.to_vec();
        for r in &mut masked {
            r.config_fingerprint = String::new();
        }
        records_to_jsonl_string(&masked).unwrap()
    };
    assert_eq!(mask(&strategy_records), mask(&llm_records));

    // scripted transport failures: retried, then succeed
    let flaky = MockChatServer::spawn(
        MockBehavior::FailThenAverage { failures: 2 },
        Dimension::One,
    )
    .unwrap();
    let mut flaky_spec = llm_spec.clone();
    flaky_spec.base_url = flaky.url();
    flaky_spec.retry_limit = 2;
    let mut backend = consensus_llm::LlmBackend::new(&flaky_spec, 0).unwrap();
    let decision =
        consensus_core::backend::AgentBackend::<f64>::decide(&mut backend, &obs(0, 20.0, &[80.0]))
            .unwrap();
    assert_eq!(decision.position, State::Scalar(50.0));
    assert_eq!(flaky.request_count(), 3);

    // numberless replies exhaust retries; the engine holds the state
    let mute = MockChatServer::spawn(MockBehavior::NoNumbers, Dimension::One).unwrap();
    let mut mute_spec = llm_spec;
    mute_spec.base_url = mute.url();
    mute_spec.retry_limit = 2;
    let mut mute_config = ExperimentConfig::new(vec![BackendSpec::<f64>::Llm(mute_spec); 2], 1, 5);
    mute_config.init_states = Some(vec![State::Scalar(20.0), State::Scalar(80.0)]);
    let records = run_batch(&mute_config, &ConversationalFactory::new(Dimension::One)).unwrap();
    assert_eq!(records[0].final_states, records[0].initial_states);
    assert_eq!(records[0].fallback_count(), 2);
}

#[test]
fn acceptance_12_determinism() {
    let _c = Criterion("12 determinism");

    // strategy backend, noise on, parallel vs sequential execution
    let mut config = ExperimentConfig::new(
        uniform_agents(StrategyKind::AverageIncludeSelf, 1.5, 4),
        9,
        31337,
    );
    config.experiments = 6;
    let a = run_batch(&config, &StrategyOnlyFactory).unwrap();
    let b = run_batch(&config, &StrategyOnlyFactory).unwrap();
    assert_eq!(
        records_to_jsonl_string(&a).unwrap(),
        records_to_jsonl_string(&b).unwrap()
    );
    let parallel = consensus_core::engine::run_batch_opts(
        &config,
        &StrategyOnlyFactory,
        &consensus_core::engine::ExecOptions {
            batch_jobs: 3,
            round_jobs: 2,
        },
    )
    .unwrap();
    assert_eq!(
        records_to_jsonl_string(&a).unwrap(),
        records_to_jsonl_string(&parallel).unwrap()
    );

    // mock conversational backend
    let llm_spec = LlmSessionConfig {
        model: "mock".into(),
        base_url: "mock://average".into(),
        temperature: 0.0,
        personality: Personality::None,
        api_key_env: "CONSENSUS_LLM_API_KEY".into(),
        timeout_secs: 5,
        retry_limit: 1,
        initial_backoff_ms: 1,
        history_window: None,
    };
    let mut llm_config = ExperimentConfig::new(vec![BackendSpec::<f64>::Llm(llm_spec); 2], 5, 909);
    llm_config.experiments = 2;
    let first = run_batch(&llm_config, &ConversationalFactory::new(Dimension::One)).unwrap();
    let second = run_batch(&llm_config, &ConversationalFactory::new(Dimension::One)).unwrap();
    assert_eq!(
        records_to_jsonl_string(&first).unwrap(),
        records_to_jsonl_string(&second).unwrap()
    );
}
