//! Independent brute-force references shared by the integration tests.

#![allow(dead_code)]

use mlce::channel::{achievable_rate, ChannelState, PowerVector};
use mlce::graph::{association_layer, nc_compatible};
use mlce::{Graph, Instance};

/// Maximum clique weight by checking every vertex subset. Weights are summed
/// in ascending vertex order.
pub fn brute_force_mwc(graph: &Graph) -> f64 {
    let n = graph.len();
    assert!(n <= 24, "brute force over {n} vertices");
    let masks: Vec<u32> = (0..n)
        .map(|v| (0..n).filter(|&u| graph.adjacent(u, v)).fold(0u32, |m, u| m | (1 << u)))
        .collect();
    let mut best = 0.0f64;
    for subset in 0u32..(1u32 << n) {
        let clique = (0..n)
            .filter(|&v| subset & (1 << v) != 0)
            .all(|v| subset & !(masks[v] | (1 << v)) == 0);
        if clique {
            let w = (0..n)
                .filter(|&v| subset & (1 << v) != 0)
                .fold(0.0, |acc, v| acc + graph.weight(v));
            best = best.max(w);
        }
    }
    best
}

/// Best `sum_t |tau_t| * min_{n in tau_t} R(n, t)` over every assignment of
/// users to at most one transmitter, with each transmitter's targets pairwise
/// decodable, at fixed powers.
pub fn best_schedule_value(instance: &Instance, channel: &ChannelState<f64>, powers: &PowerVector<f64>) -> f64 {
    best_with_rates(instance, &rate_table(instance, channel, powers), Objective::PerTransmitter)
}

pub fn rate_table(instance: &Instance, channel: &ChannelState<f64>, powers: &PowerVector<f64>) -> Vec<f64> {
    let t_count = instance.num_transmitters();
    (0..instance.num_users() * t_count)
        .map(|k| achievable_rate(instance, channel, powers, k / t_count, k % t_count))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    /// Each transmitter adopts its slowest target's rate.
    PerTransmitter,
    /// Like `PerTransmitter` with at most one target per transmitter.
    Uncoded,
    /// One rate for the whole network: served users times the global minimum.
    NetworkWide,
    /// Number of served users.
    Count,
}

/// Exhaustive optimum of `objective` over decodable user assignments, for a
/// row-major `M x T` rate table.
pub fn best_with_rates(instance: &Instance, rates: &[f64], objective: Objective) -> f64 {
    let t_count = instance.num_transmitters();
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); t_count];
    let mut best = 0.0;
    assign(instance, rates, objective, 0, &mut groups, &mut best);
    best
}

fn value(rates: &[f64], t_count: usize, groups: &[Vec<usize>], objective: Objective) -> f64 {
    let rate = |n: usize, t: usize| rates[n * t_count + t];
    let active = groups.iter().enumerate().filter(|(_, g)| !g.is_empty());
    match objective {
        Objective::PerTransmitter | Objective::Uncoded => active
            .map(|(t, g)| g.len() as f64 * g.iter().map(|&n| rate(n, t)).fold(f64::INFINITY, f64::min))
            .sum(),
        Objective::NetworkWide => {
            let (count, min) = active.fold((0usize, f64::INFINITY), |(c, m), (t, g)| {
                (c + g.len(), g.iter().map(|&n| rate(n, t)).fold(m, f64::min))
            });
            if count == 0 {
                0.0
            } else {
                count as f64 * min
            }
        }
        Objective::Count => groups.iter().map(Vec::len).sum::<usize>() as f64,
    }
}

fn assign(
    instance: &Instance,
    rates: &[f64],
    objective: Objective,
    user: usize,
    groups: &mut Vec<Vec<usize>>,
    best: &mut f64,
) {
    let t_count = instance.num_transmitters();
    if user == instance.num_users() {
        *best = best.max(value(rates, t_count, groups, objective));
        return;
    }
    assign(instance, rates, objective, user + 1, groups, best);
    for t in 0..t_count {
        if rates[user * t_count + t] <= 0.0 || association_layer(instance, user, t).is_none() {
            continue;
        }
        if objective == Objective::Uncoded && !groups[t].is_empty() {
            continue;
        }
        if !groups[t].iter().all(|&o| nc_compatible(instance, o, user)) {
            continue;
        }
        groups[t].push(user);
        assign(instance, rates, objective, user + 1, groups, best);
        groups[t].pop();
    }
}

/// Exhaustive joint optimum over a `levels`-point power grid on `[0, p_max]`
/// per transmitter.
pub fn grid_optimum(instance: &Instance, channel: &ChannelState<f64>, p_max: f64, levels: usize) -> f64 {
    let t_count = instance.num_transmitters();
    let grid: Vec<f64> = (0..levels).map(|k| p_max * k as f64 / (levels - 1) as f64).collect();
    let mut index = vec![0usize; t_count];
    let mut best = 0.0f64;
    loop {
        let powers = PowerVector(index.iter().map(|&k| grid[k]).collect());
        best = best.max(best_schedule_value(instance, channel, &powers));
        let mut d = 0;
        loop {
            if d == t_count {
                return best;
            }
            index[d] += 1;
            if index[d] < levels {
                break;
            }
            index[d] = 0;
            d += 1;
        }
    }
}

/// Ordinary least squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
