//! Alternating scheduling / power allocation and the baseline schemes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{rate_matrix, ChannelState, PowerVector};
use crate::clique::{SolverPolicy, SolverTag};
use crate::error::Result;
use crate::graph::{association_layer, build_from_rates, schedule_from_clique, GraphRules};
use crate::model::Instance;
use crate::power::{run_ife, IfeConfig};
use crate::scalar::Scalar;
use crate::schedule::Schedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    Proposed,
    ClassicalIdnc,
    Uncoded,
    RaIdnc,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] = [
        SchemeKind::Proposed,
        SchemeKind::ClassicalIdnc,
        SchemeKind::Uncoded,
        SchemeKind::RaIdnc,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::Proposed => "proposed",
            SchemeKind::ClassicalIdnc => "classical-idnc",
            SchemeKind::Uncoded => "uncoded",
            SchemeKind::RaIdnc => "ra-idnc",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown scheme `{s}` (expected proposed, classical-idnc, uncoded or ra-idnc)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub policy: SolverPolicy,
    pub ife: IfeConfig,
    /// Stop once the best throughput improves by less than this fraction.
    pub outer_tol: f64,
    pub outer_max: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            policy: SolverPolicy::default(),
            ife: IfeConfig::default(),
            outer_tol: 1e-6,
            outer_max: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult<S> {
    pub schedule: Schedule<S>,
    pub powers: PowerVector<S>,
    /// `sum_t |tau_t| * R_t` at the adopted rates.
    pub throughput: S,
    pub iterations: usize,
    /// Best throughput so far after each outer iteration.
    pub trace: Vec<S>,
    /// `Greedy` if any clique in the run came from the heuristic.
    pub solver: SolverTag,
}

fn p_max<S: Scalar>(instance: &Instance) -> S {
    S::lit(instance.scenario.max_power_watts())
}

fn merge(tag: &mut SolverTag, other: SolverTag) {
    if other == SolverTag::Greedy {
        *tag = SolverTag::Greedy;
    }
}

/// Drop transmissions whose adopted rate fell to zero.
fn drop_idle<S: Scalar>(schedule: &mut Schedule<S>) {
    for x in schedule.transmissions.iter_mut() {
        if x.is_active() && x.rate <= S::zero() {
            *x = crate::schedule::Transmission::silent();
        }
    }
}

/// Alternate clique scheduling at the current powers with IFE power
/// allocation for the chosen schedule, keeping the best pair seen.
fn alternate<S: Scalar>(
    instance: &Instance,
    channel: &ChannelState<S>,
    config: &SolverConfig,
    rules: GraphRules<S>,
) -> Result<SolveResult<S>> {
    let t_count = instance.num_transmitters();
    let p_max = p_max::<S>(instance);
    let mut powers = PowerVector::uniform(t_count, p_max);
    let mut best = (S::zero(), Schedule::empty(t_count), powers.clone());
    let mut trace = Vec::new();
    let mut tag = SolverTag::Exact;
    let mut iterations = 0;
    while iterations < config.outer_max.max(1) {
        iterations += 1;
        let rates = rate_matrix(instance, channel, &powers);
        let graph = build_from_rates(instance, &rates, rules);
        let clique = config.policy.solve(&graph)?;
        merge(&mut tag, clique.solver);
        let mut schedule = schedule_from_clique(&graph, &clique.vertices, t_count)?;
        let report = run_ife(instance, &schedule, channel, &powers, p_max, config.ife);
        schedule.readopt_rates(instance, channel, &report.powers);
        drop_idle(&mut schedule);
        let value = schedule.throughput();
        let previous = best.0;
        if value > best.0 {
            best = (value, schedule, report.powers.clone());
        }
        trace.push(best.0);
        if best.0 - previous <= S::lit(config.outer_tol) * best.0 {
            break;
        }
        powers = report.powers;
    }
    Ok(SolveResult {
        schedule: best.1,
        powers: best.2,
        throughput: best.0,
        iterations,
        trace,
        solver: tag,
    })
}

/// Joint coded scheduling and power allocation.
pub fn solve_proposed<S: Scalar>(instance: &Instance, channel: &ChannelState<S>, config: &SolverConfig) -> Result<SolveResult<S>> {
    alternate(instance, channel, config, GraphRules::proposed())
}

/// One user per transmitter, same power loop.
pub fn solve_uncoded<S: Scalar>(instance: &Instance, channel: &ChannelState<S>, config: &SolverConfig) -> Result<SolveResult<S>> {
    alternate(instance, channel, config, GraphRules::uncoded())
}

/// Maximise the number of users served by instantly decodable packets at
/// full power; each transmitter then adopts its slowest target's rate.
pub fn solve_classical_idnc<S: Scalar>(
    instance: &Instance,
    channel: &ChannelState<S>,
    config: &SolverConfig,
) -> Result<SolveResult<S>> {
    let t_count = instance.num_transmitters();
    let powers = PowerVector::uniform(t_count, p_max::<S>(instance));
    let rates = rate_matrix(instance, channel, &powers);
    let graph = build_from_rates(instance, &rates, GraphRules::classical());
    let clique = config.policy.solve(&graph)?;
    let mut schedule = schedule_from_clique(&graph, &clique.vertices, t_count)?;
    drop_idle(&mut schedule);
    let throughput = schedule.throughput();
    Ok(SolveResult {
        schedule,
        powers,
        throughput,
        iterations: 1,
        trace: vec![throughput],
        solver: clique.solver,
    })
}

/// Coded scheduling with one network-wide adopted rate, at full power.
///
/// Enforcing equal rates across transmitters splits the graph into one
/// disconnected component per candidate rate, so the maximum-weight clique
/// is the best over per-rate subgraphs.
pub fn solve_ra_idnc<S: Scalar>(instance: &Instance, channel: &ChannelState<S>, config: &SolverConfig) -> Result<SolveResult<S>> {
    let t_count = instance.num_transmitters();
    let users = instance.num_users();
    let powers = PowerVector::uniform(t_count, p_max::<S>(instance));
    let rates = rate_matrix(instance, channel, &powers);

    // best capacity of each user over the links it may use
    let mut user_best = vec![S::zero(); users];
    let mut candidates = Vec::new();
    for n in 0..users {
        for t in 0..t_count {
            let r = rates[n * t_count + t];
            if r > S::zero() && association_layer(instance, n, t).is_some() {
                candidates.push(r);
                user_best[n] = user_best[n].max(r);
            }
        }
    }
    candidates.sort_by(|a, b| b.partial_cmp(a).expect("rates are never NaN"));
    candidates.dedup();

    let mut tag = SolverTag::Exact;
    let mut best: Option<(S, Vec<usize>, crate::graph::RaidncGraph<S>)> = None;
    for &r in &candidates {
        let reachable = user_best.iter().filter(|&&c| c >= r).count();
        let bound = r * S::lit(reachable as f64);
        if best.as_ref().is_some_and(|(w, _, _)| bound <= *w) {
            continue;
        }
        let graph = build_from_rates(instance, &rates, GraphRules::network_rate(r));
        let clique = config.policy.solve(&graph)?;
        merge(&mut tag, clique.solver);
        if best.as_ref().is_none_or(|(w, _, _)| clique.weight > *w) {
            best = Some((clique.weight, clique.vertices, graph));
        }
    }
    let schedule = match &best {
        Some((_, members, graph)) => schedule_from_clique(graph, members, t_count)?,
        None => Schedule::empty(t_count),
    };
    let throughput = schedule.throughput();
    Ok(SolveResult {
        schedule,
        powers,
        throughput,
        iterations: 1,
        trace: vec![throughput],
        solver: tag,
    })
}

pub fn solve<S: Scalar>(
    scheme: SchemeKind,
    instance: &Instance,
    channel: &ChannelState<S>,
    config: &SolverConfig,
) -> Result<SolveResult<S>> {
    match scheme {
        SchemeKind::Proposed => solve_proposed(instance, channel, config),
        SchemeKind::ClassicalIdnc => solve_classical_idnc(instance, channel, config),
        SchemeKind::Uncoded => solve_uncoded(instance, channel, config),
        SchemeKind::RaIdnc => solve_ra_idnc(instance, channel, config),
    }
}
