//! Two-layered rate-aware IDNC graph.
//!
//! A vertex is an association (user, wanted file, transmitter, adopted rate).
//! Vertices of the same transmitter are adjacent when the two users differ,
//! their files can be XOR-combined so both decode instantly, and their
//! adopted rates are equal. Vertices of different transmitters are adjacent
//! whenever the users differ. Cliques are therefore exactly the feasible
//! coded schedules, and a clique's weight is the schedule's throughput.

use std::io::{self, Write};

use serde::Serialize;

use crate::bits::BitSet;
use crate::channel::{achievable_rate, rate_matrix, ChannelState, PowerVector};
use crate::error::{Error, Result};
use crate::model::{Instance, TransmitterKind};
use crate::scalar::Scalar;
use crate::schedule::{Layer, Schedule, Transmission};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Association<S> {
    pub user: usize,
    pub file: usize,
    pub transmitter: usize,
    /// Adopted rate in bits/s.
    pub rate: S,
    /// Index of `rate` in the transmitter's candidate list; equal classes at
    /// one transmitter mean equal adopted rates.
    pub rate_class: usize,
    pub layer: Layer,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Vertex<S> {
    #[serde(flatten)]
    pub association: Association<S>,
    pub weight: S,
}

/// How vertices pick their adopted rates and whether same-transmitter
/// vertices may be coded together.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateRule<S> {
    /// One vertex per candidate rate of the transmitter not above the user's
    /// capacity; weight is the rate.
    PerTransmitter,
    /// A single vertex at the user's own capacity.
    OwnCapacity,
    /// A single vertex at a network-wide rate, for users whose capacity
    /// reaches it.
    Fixed(S),
    /// A single vertex of weight one (served-user count); the transmitter
    /// later adopts the minimum capacity of its targets.
    Unit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphRules<S> {
    pub rates: RateRule<S>,
    /// Allow same-transmitter edges (network coding).
    pub coding: bool,
}

impl<S: Scalar> GraphRules<S> {
    pub fn proposed() -> Self {
        Self {
            rates: RateRule::PerTransmitter,
            coding: true,
        }
    }

    pub fn uncoded() -> Self {
        Self {
            rates: RateRule::OwnCapacity,
            coding: false,
        }
    }

    pub fn classical() -> Self {
        Self {
            rates: RateRule::Unit,
            coding: true,
        }
    }

    pub fn network_rate(rate: S) -> Self {
        Self {
            rates: RateRule::Fixed(rate),
            coding: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RaidncGraph<S> {
    vertices: Vec<Vertex<S>>,
    adjacency: Vec<BitSet>,
    rules: GraphRules<S>,
}

/// Instant-decodability of a pair of users served by one coded packet:
/// same wanted file, or each has the other's wanted file.
pub fn nc_compatible(instance: &Instance, a: usize, b: usize) -> bool {
    let (wa, wb) = (instance.wants(a), instance.wants(b));
    wa == wb || (instance.has(b).contains(wa) && instance.has(a).contains(wb))
}

/// Layer of the association of `user` with `transmitter`, if any: cached
/// when the transmitter holds the wanted file, fronthaul when an SBS serves
/// a cache-miss user.
pub fn association_layer(instance: &Instance, user: usize, transmitter: usize) -> Option<Layer> {
    if instance.caches.files(transmitter).contains(instance.wants(user)) {
        Some(Layer::Cached)
    } else if instance.kinds[transmitter] == TransmitterKind::Sbs && instance.classes.is_miss(user) {
        Some(Layer::Fronthaul)
    } else {
        None
    }
}

fn descending_distinct<S: Scalar>(mut rates: Vec<S>) -> Vec<S> {
    rates.sort_by(|a, b| b.partial_cmp(a).expect("rates are never NaN"));
    rates.dedup();
    rates
}

/// Distinct capacities `{R(m, t) : m}` of every user at `transmitter`, descending.
pub fn candidate_rates<S: Scalar>(
    instance: &Instance,
    channel: &ChannelState<S>,
    powers: &PowerVector<S>,
    transmitter: usize,
) -> Vec<S> {
    descending_distinct(
        (0..instance.num_users())
            .map(|m| achievable_rate(instance, channel, powers, m, transmitter))
            .collect(),
    )
}

pub fn build_graph<S: Scalar>(instance: &Instance, channel: &ChannelState<S>, powers: &PowerVector<S>) -> RaidncGraph<S> {
    build_graph_with(instance, channel, powers, GraphRules::proposed())
}

pub fn build_graph_with<S: Scalar>(
    instance: &Instance,
    channel: &ChannelState<S>,
    powers: &PowerVector<S>,
    rules: GraphRules<S>,
) -> RaidncGraph<S> {
    let rates = rate_matrix(instance, channel, powers);
    build_from_rates(instance, &rates, rules)
}

/// Build from a precomputed row-major `M x T` rate matrix.
pub(crate) fn build_from_rates<S: Scalar>(instance: &Instance, rates: &[S], rules: GraphRules<S>) -> RaidncGraph<S> {
    let users = instance.num_users();
    let tx_count = instance.num_transmitters();
    let cap = |n: usize, t: usize| rates[n * tx_count + t];

    let mut vertices = Vec::new();
    let mut tx_ranges = Vec::with_capacity(tx_count);
    for t in 0..tx_count {
        let start = vertices.len();
        let eligible: Vec<(usize, Layer)> = (0..users)
            .filter(|&n| cap(n, t) > S::zero())
            .filter_map(|n| association_layer(instance, n, t).map(|l| (n, l)))
            .collect();
        let mut push = |n: usize, layer: Layer, rate: S, rate_class: usize, weight: S| {
            vertices.push(Vertex {
                association: Association {
                    user: n,
                    file: instance.wants(n),
                    transmitter: t,
                    rate,
                    rate_class,
                    layer,
                },
                weight,
            });
        };
        match rules.rates {
            RateRule::PerTransmitter => {
                // Only capacities of users that can be served at `t` are
                // useful: a rate strictly between two of them is dominated.
                let candidates = descending_distinct(eligible.iter().map(|&(n, _)| cap(n, t)).collect());
                for &(n, layer) in &eligible {
                    let c = cap(n, t);
                    for (k, &r) in candidates.iter().enumerate().filter(|(_, &r)| r <= c) {
                        push(n, layer, r, k, r);
                    }
                }
            }
            RateRule::OwnCapacity => {
                for &(n, layer) in &eligible {
                    push(n, layer, cap(n, t), 0, cap(n, t));
                }
            }
            RateRule::Fixed(r) => {
                for &(n, layer) in eligible.iter().filter(|&&(n, _)| cap(n, t) >= r) {
                    push(n, layer, r, 0, r);
                }
            }
            RateRule::Unit => {
                for &(n, layer) in &eligible {
                    push(n, layer, cap(n, t), 0, S::one());
                }
            }
        }
        tx_ranges.push(start..vertices.len());
    }

    let v_count = vertices.len();
    let mut by_user = vec![BitSet::new(v_count); users];
    for (i, v) in vertices.iter().enumerate() {
        by_user[v.association.user].insert(i);
    }
    let compatible: Vec<bool> = (0..users * users)
        .map(|k| nc_compatible(instance, k / users, k % users))
        .collect();
    let equal_rates_required = !matches!(rules.rates, RateRule::Unit);

    let all = BitSet::full(v_count);
    let mut adjacency = Vec::with_capacity(v_count);
    for (t, range) in tx_ranges.iter().enumerate() {
        let mut other_tx = all.clone();
        for i in range.clone() {
            other_tx.remove(i);
        }
        for i in range.clone() {
            let a = &vertices[i].association;
            debug_assert_eq!(a.transmitter, t);
            let mut row = other_tx.clone();
            row.difference_with(&by_user[a.user]);
            if rules.coding {
                for j in range.clone() {
                    let b = &vertices[j].association;
                    if a.user != b.user
                        && (!equal_rates_required || a.rate_class == b.rate_class)
                        && compatible[a.user * users + b.user]
                    {
                        row.insert(j);
                    }
                }
            }
            adjacency.push(row);
        }
    }

    RaidncGraph {
        vertices,
        adjacency,
        rules,
    }
}

impl<S: Scalar> RaidncGraph<S> {
    /// Graph from explicit weights and an edge list; used for solver tests.
    pub fn from_edges(weights: &[S], edges: &[(usize, usize)]) -> Self {
        let v_count = weights.len();
        let vertices = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| Vertex {
                association: Association {
                    user: i,
                    file: 0,
                    transmitter: i,
                    rate: w,
                    rate_class: 0,
                    layer: Layer::Cached,
                },
                weight: w,
            })
            .collect();
        let mut adjacency = vec![BitSet::new(v_count); v_count];
        for &(a, b) in edges {
            assert!(a != b && a < v_count && b < v_count, "bad edge ({a}, {b})");
            adjacency[a].insert(b);
            adjacency[b].insert(a);
        }
        Self {
            vertices,
            adjacency,
            rules: GraphRules::uncoded(),
        }
    }

    #[cfg(test)]
    pub(crate) fn set_bucket(&mut self, v: usize, transmitter: usize, rate_class: usize) {
        self.vertices[v].association.transmitter = transmitter;
        self.vertices[v].association.rate_class = rate_class;
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, i: usize) -> &Vertex<S> {
        &self.vertices[i]
    }

    pub fn vertices(&self) -> &[Vertex<S>] {
        &self.vertices
    }

    pub fn weight(&self, i: usize) -> S {
        self.vertices[i].weight
    }

    pub fn rules(&self) -> GraphRules<S> {
        self.rules
    }

    #[inline]
    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].contains(b)
    }

    pub fn neighbors(&self, v: usize) -> &BitSet {
        &self.adjacency[v]
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(BitSet::len).sum::<usize>() / 2
    }

    pub fn layer_count(&self, layer: Layer) -> usize {
        self.vertices.iter().filter(|v| v.association.layer == layer).count()
    }

    /// Plain-text adjacency list: a header, one `v` line per vertex
    /// (id, user, file, transmitter, rate, layer, weight) and one `e` line
    /// per undirected edge.
    pub fn write_adjacency_list<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# raidnc vertices={} edges={}", self.len(), self.edge_count())?;
        for (i, v) in self.vertices.iter().enumerate() {
            let a = &v.association;
            let layer = match a.layer {
                Layer::Cached => 1,
                Layer::Fronthaul => 2,
            };
            writeln!(
                out,
                "v {i} {} {} {} {:.16e} {layer} {:.16e}",
                a.user,
                a.file,
                a.transmitter,
                a.rate.as_f64(),
                v.weight.as_f64()
            )?;
        }
        for (i, row) in self.adjacency.iter().enumerate() {
            for j in row.iter().filter(|&j| j > i) {
                writeln!(out, "e {i} {j}")?;
            }
        }
        Ok(())
    }
}

/// Map a clique to per-transmitter coded transmissions. Transmitters not in
/// the clique stay silent.
pub fn schedule_from_clique<S: Scalar>(graph: &RaidncGraph<S>, clique: &[usize], transmitters: usize) -> Result<Schedule<S>> {
    let mut schedule: Schedule<S> = Schedule::empty(transmitters);
    let mut rate_class: Vec<Option<usize>> = vec![None; transmitters];
    let mut members: Vec<usize> = clique.to_vec();
    members.sort_unstable();
    members.dedup();
    for &i in &members {
        if i >= graph.len() {
            return Err(Error::InvalidClique(format!("vertex {i} out of range")));
        }
        let a = graph.vertex(i).association;
        if a.transmitter >= transmitters {
            return Err(Error::InvalidClique(format!("transmitter {} out of range", a.transmitter)));
        }
        let x = &mut schedule.transmissions[a.transmitter];
        match graph.rules.rates {
            RateRule::Unit => {
                x.rate = if x.is_active() { x.rate.min(a.rate) } else { a.rate };
            }
            _ => match rate_class[a.transmitter] {
                Some(k) if k != a.rate_class => {
                    return Err(Error::InvalidClique(format!(
                        "transmitter {} carries two adopted rates",
                        a.transmitter
                    )));
                }
                _ => {
                    rate_class[a.transmitter] = Some(a.rate_class);
                    x.rate = a.rate;
                }
            },
        }
        if x.users.contains(&a.user) {
            return Err(Error::InvalidClique(format!("user {} appears twice", a.user)));
        }
        x.users.push(a.user);
        x.layers.push(a.layer);
        x.files.push(a.file);
    }
    for x in schedule.transmissions.iter_mut() {
        let mut order: Vec<usize> = (0..x.users.len()).collect();
        order.sort_by_key(|&k| x.users[k]);
        *x = Transmission {
            users: order.iter().map(|&k| x.users[k]).collect(),
            layers: order.iter().map(|&k| x.layers[k]).collect(),
            files: {
                let mut f = x.files.clone();
                f.sort_unstable();
                f.dedup();
                f
            },
            rate: x.rate,
        };
    }
    Ok(schedule)
}
