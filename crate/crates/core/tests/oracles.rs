//! Solver outputs against exhaustive search on small instances.

mod common;

use mlce::bits::BitSet;
use mlce::channel::PowerVector;
use mlce::clique::{solve_exact, solve_greedy, solve_heuristic, verify_clique};
use mlce::model::SideInformation;
use mlce::scheduler::{solve_classical_idnc, solve_ra_idnc};
use mlce::{
    build_graph, build_graph_with, draw_channel, generate_instance, place_nodes, solve, validate, ChannelState,
    GraphRules, Instance, Scenario, SchemeKind, SolverConfig,
};

use common::{best_with_rates, brute_force_mwc, grid_optimum, rate_table, Objective};

fn small(seed: u64, users: usize) -> (Instance, ChannelState) {
    let scenario = Scenario {
        num_d2d: 1,
        num_sbs: 1,
        num_uav: 1,
        num_users: users,
        num_files: 5,
        caching_ratio: 0.6,
        side_info_ratio: 0.6,
        rng_seed: seed,
        ..Scenario::default()
    };
    let instance = generate_instance(&scenario).unwrap();
    let channel = draw_channel(&scenario, &place_nodes(&scenario, seed), seed).unwrap();
    (instance, channel)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn clique_weight_equals_best_schedule_at_fixed_power() {
    for seed in 0..40 {
        let (inst, ch) = small(seed, 4);
        let p_max = inst.scenario.max_power_watts();
        let powers = PowerVector((0..3).map(|t| p_max * (0.3 + 0.35 * t as f64)).collect());
        let graph = build_graph(&inst, &ch, &powers);
        if graph.len() > 25 {
            continue;
        }
        let exact = solve_exact(&graph, 25).unwrap();
        let oracle = best_with_rates(&inst, &rate_table(&inst, &ch, &powers), Objective::PerTransmitter);
        assert!(close(exact.weight, oracle), "seed {seed}: clique {} vs {oracle}", exact.weight);
    }
}

#[test]
fn uncoded_graph_matches_one_user_per_transmitter() {
    for seed in 0..40 {
        let (inst, ch) = small(seed, 5);
        let powers = PowerVector::uniform(3, inst.scenario.max_power_watts());
        let graph = build_graph_with(&inst, &ch, &powers, GraphRules::uncoded());
        let exact = solve_exact(&graph, 25).unwrap();
        let oracle = best_with_rates(&inst, &rate_table(&inst, &ch, &powers), Objective::Uncoded);
        assert!(close(exact.weight, oracle), "seed {seed}");
    }
}

#[test]
fn ra_idnc_matches_network_wide_rate_search() {
    let config = SolverConfig::default();
    for seed in 0..40 {
        let (inst, ch) = small(seed, 5);
        let powers = PowerVector::uniform(3, inst.scenario.max_power_watts());
        let got = solve_ra_idnc(&inst, &ch, &config).unwrap();
        let oracle = best_with_rates(&inst, &rate_table(&inst, &ch, &powers), Objective::NetworkWide);
        assert!(close(got.throughput, oracle), "seed {seed}: {} vs {oracle}", got.throughput);
    }
}

#[test]
fn classical_idnc_serves_the_most_users() {
    let config = SolverConfig::default();
    for seed in 0..40 {
        let (inst, ch) = small(seed, 5);
        let powers = PowerVector::uniform(3, inst.scenario.max_power_watts());
        let got = solve_classical_idnc(&inst, &ch, &config).unwrap();
        let oracle = best_with_rates(&inst, &rate_table(&inst, &ch, &powers), Objective::Count);
        assert_eq!(got.schedule.served_users() as f64, oracle, "seed {seed}");
    }
}

#[test]
fn heuristics_are_valid_and_never_beat_exact() {
    for seed in 0..60 {
        let (inst, ch) = small(seed, 4);
        let p_max = inst.scenario.max_power_watts();
        let powers = PowerVector(vec![p_max, 0.5 * p_max, 0.8 * p_max]);
        let graph = build_graph(&inst, &ch, &powers);
        if graph.len() > 20 {
            continue;
        }
        let exact = solve_exact(&graph, 25).unwrap();
        assert_eq!(exact.weight, brute_force_mwc(&graph));
        for h in [solve_greedy(&graph), solve_heuristic(&graph)] {
            assert!(verify_clique(&graph, &h.vertices));
            assert!(h.weight <= exact.weight);
        }
    }
}

/// Two users holding each other's wanted file, both files cached at the
/// D2D and UAV transmitters; `rows` are the channel-to-noise ratios.
fn desk_instance(rows: &[Vec<f64>]) -> (Instance, ChannelState) {
    let scenario = Scenario {
        num_d2d: 1,
        num_sbs: 1,
        num_uav: 1,
        num_users: 2,
        num_files: 3,
        side_info_ratio: 0.34,
        fronthaul_capacity: 10e6,
        ..Scenario::default()
    };
    let all = BitSet::from_indices(3, [0, 1, 2]);
    let caches = vec![all.clone(), BitSet::new(3), all];
    let side = SideInformation {
        has: vec![BitSet::from_indices(3, [1]), BitSet::from_indices(3, [0])],
        wants: vec![0, 1],
    };
    let instance = Instance::from_parts(scenario, caches, side).unwrap();
    (instance, ChannelState::from_rows(rows))
}

#[test]
fn weak_interference_desk_instance_reaches_the_grid_optimum() {
    let (inst, ch) = desk_instance(&[vec![40.0, 0.5, 0.3], vec![35.0, 0.3, 0.4]]);
    let p_max = inst.scenario.max_power_watts();
    let optimum = grid_optimum(&inst, &ch, p_max, 50);
    let got = solve(SchemeKind::Proposed, &inst, &ch, &SolverConfig::default()).unwrap();
    validate(&inst, &ch, &got.powers, &got.schedule).unwrap();
    assert!(got.throughput >= 0.98 * optimum, "{} vs grid {optimum}", got.throughput);
}

#[test]
fn strong_interference_desk_instance_stops_at_a_local_optimum() {
    // the optimum codes both users at transmitter 0 with the others silent;
    // starting from full power the alternation settles on two separate links
    let (inst, ch) = desk_instance(&[vec![40.0, 5.0, 30.0], vec![35.0, 3.0, 45.0]]);
    let p_max = inst.scenario.max_power_watts();
    let optimum = grid_optimum(&inst, &ch, p_max, 50);
    let got = solve(SchemeKind::Proposed, &inst, &ch, &SolverConfig::default()).unwrap();
    validate(&inst, &ch, &got.powers, &got.schedule).unwrap();
    assert!(got.throughput < 0.5 * optimum);
    assert_eq!(got.schedule.served_users(), 2);
}
