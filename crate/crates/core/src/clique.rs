//! Maximum-weight clique solvers: exact branch and bound for small graphs,
//! a greedy heuristic for everything else, and a clique verifier.

use serde::{Deserialize, Serialize};

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::graph::RaidncGraph;
use crate::scalar::Scalar;

pub const DEFAULT_EXACT_LIMIT: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverTag {
    Exact,
    Greedy,
}

impl SolverTag {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverTag::Exact => "exact",
            SolverTag::Greedy => "greedy",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliqueSolution<S> {
    /// Member vertex ids, ascending.
    pub vertices: Vec<usize>,
    pub weight: S,
    pub solver: SolverTag,
}

/// Which solver to run on a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverPolicy {
    /// Exact up to the limit, [`solve_heuristic`] above it.
    Auto { limit: usize },
    Exact { limit: usize },
    Greedy,
}

impl Default for SolverPolicy {
    fn default() -> Self {
        SolverPolicy::Auto {
            limit: DEFAULT_EXACT_LIMIT,
        }
    }
}

impl SolverPolicy {
    pub fn solve<S: Scalar>(self, graph: &RaidncGraph<S>) -> Result<CliqueSolution<S>> {
        match self {
            SolverPolicy::Auto { limit } if graph.len() <= limit => solve_exact(graph, limit),
            SolverPolicy::Auto { .. } | SolverPolicy::Greedy => Ok(solve_heuristic(graph)),
            SolverPolicy::Exact { limit } => solve_exact(graph, limit),
        }
    }
}

/// Sum of member weights in ascending id order. Every solver reports its
/// weight through this so equal sets compare bit-for-bit equal.
pub fn clique_weight<S: Scalar>(graph: &RaidncGraph<S>, members: &[usize]) -> S {
    let mut sorted = members.to_vec();
    sorted.sort_unstable();
    sorted.iter().fold(S::zero(), |acc, &v| acc + graph.weight(v))
}

pub fn verify_clique<S: Scalar>(graph: &RaidncGraph<S>, members: &[usize]) -> bool {
    members.iter().enumerate().all(|(i, &a)| {
        a < graph.len() && members[i + 1..].iter().all(|&b| a != b && b < graph.len() && graph.adjacent(a, b))
    })
}

struct Search<'g, S> {
    graph: &'g RaidncGraph<S>,
    best: Vec<usize>,
    best_weight: S,
    current: Vec<usize>,
}

impl<S: Scalar> Search<'_, S> {
    fn offer(&mut self) {
        let w = clique_weight(self.graph, &self.current);
        if w > self.best_weight || (w == self.best_weight && self.current < self.best) {
            self.best_weight = w;
            self.best.clone_from(&self.current);
        }
    }

    /// Bounds are compared with a small relative slack so that rounding in
    /// the running sums never prunes a subtree holding a tied optimum.
    fn pruned(&self, bound: S) -> bool {
        let slack = S::epsilon() * S::lit(64.0) * bound.abs().max(self.best_weight.abs());
        bound + slack < self.best_weight
    }

    fn expand(&mut self, weight: S, candidates: &BitSet) {
        self.offer();
        let order: Vec<usize> = candidates.iter().collect();
        // suffix sums of candidate weights bound every branch below
        let mut suffix = vec![S::zero(); order.len() + 1];
        for k in (0..order.len()).rev() {
            suffix[k] = suffix[k + 1] + self.graph.weight(order[k]).max(S::zero());
        }
        for (k, &v) in order.iter().enumerate() {
            if self.pruned(weight + suffix[k]) {
                break;
            }
            let mut next = candidates.clone();
            next.intersect_with(self.graph.neighbors(v));
            for &u in &order[..=k] {
                next.remove(u);
            }
            self.current.push(v);
            self.expand(weight + self.graph.weight(v), &next);
            self.current.pop();
        }
    }
}

/// Globally optimal clique by branch and bound; among optimal cliques the
/// lexicographically smallest id set wins.
pub fn solve_exact<S: Scalar>(graph: &RaidncGraph<S>, limit: usize) -> Result<CliqueSolution<S>> {
    if graph.len() > limit {
        return Err(Error::CliqueSizeLimit {
            vertices: graph.len(),
            limit,
        });
    }
    let mut search = Search {
        graph,
        best: Vec::new(),
        best_weight: S::zero(),
        current: Vec::new(),
    };
    search.expand(S::zero(), &BitSet::full(graph.len()));
    debug_assert!(verify_clique(graph, &search.best));
    Ok(CliqueSolution {
        weight: search.best_weight,
        vertices: search.best,
        solver: SolverTag::Exact,
    })
}

/// Repeatedly add the heaviest vertex adjacent to every member (ties go to
/// the smaller id) until no candidate is left.
pub fn solve_greedy<S: Scalar>(graph: &RaidncGraph<S>) -> CliqueSolution<S> {
    let mut candidates = BitSet::full(graph.len());
    let mut members = Vec::new();
    loop {
        let mut pick: Option<usize> = None;
        for v in candidates.iter() {
            if pick.is_none_or(|p| graph.weight(v) > graph.weight(p)) {
                pick = Some(v);
            }
        }
        let Some(v) = pick else { break };
        members.push(v);
        candidates.intersect_with(graph.neighbors(v));
    }
    members.sort_unstable();
    debug_assert!(verify_clique(graph, &members));
    CliqueSolution {
        weight: clique_weight(graph, &members),
        vertices: members,
        solver: SolverTag::Greedy,
    }
}

/// Vertices sharing a transmitter and rate class, keyed and ordered by
/// `(transmitter, rate_class)`.
fn buckets<S: Scalar>(graph: &RaidncGraph<S>) -> Vec<((usize, usize), Vec<usize>)> {
    let mut buckets: Vec<((usize, usize), Vec<usize>)> = Vec::new();
    for (i, v) in graph.vertices().iter().enumerate() {
        let key = (v.association.transmitter, v.association.rate_class);
        match buckets.binary_search_by(|(k, _)| k.cmp(&key)) {
            Ok(b) => buckets[b].1.push(i),
            Err(b) => buckets.insert(b, (key, vec![i])),
        }
    }
    buckets
}

/// Heaviest greedy bucket clique among `candidates`, restricted to buckets
/// accepted by `keep`.
fn best_group<'b, S: Scalar>(
    graph: &RaidncGraph<S>,
    buckets: impl Iterator<Item = &'b Vec<usize>>,
    candidates: &BitSet,
) -> Option<(S, Vec<usize>)> {
    let mut best: Option<(S, Vec<usize>)> = None;
    for bucket in buckets {
        let live: Vec<usize> = bucket.iter().copied().filter(|&v| candidates.contains(v)).collect();
        if live.is_empty() {
            continue;
        }
        let group = bucket_clique(graph, &live);
        let w = clique_weight(graph, &group);
        if best.as_ref().is_none_or(|(bw, bg)| w > *bw || (w == *bw && group < *bg)) {
            best = Some((w, group));
        }
    }
    best
}

/// Greedy over coded groups. Vertices sharing a transmitter and rate class
/// form a bucket; each round builds a greedy clique inside every bucket
/// (restricted to the surviving candidates), commits the heaviest one and
/// drops everything not adjacent to it.
pub fn solve_grouped<S: Scalar>(graph: &RaidncGraph<S>) -> CliqueSolution<S> {
    let buckets = buckets(graph);
    let mut candidates = BitSet::full(graph.len());
    let mut members: Vec<usize> = Vec::new();
    while let Some((_, group)) = best_group(graph, buckets.iter().map(|(_, b)| b), &candidates) {
        for &v in &group {
            candidates.intersect_with(graph.neighbors(v));
            candidates.remove(v);
        }
        members.extend(group);
    }
    members.sort_unstable();
    debug_assert!(verify_clique(graph, &members));
    CliqueSolution {
        weight: clique_weight(graph, &members),
        vertices: members,
        solver: SolverTag::Greedy,
    }
}

/// Coordinate ascent over transmitters: rebuild one transmitter's group
/// against the rest of the clique and keep it when strictly heavier, until a
/// full pass changes nothing.
pub fn improve_by_transmitter<S: Scalar>(graph: &RaidncGraph<S>, start: &[usize]) -> Vec<usize> {
    const MAX_PASSES: usize = 16;
    let buckets = buckets(graph);
    let tx = |v: usize| graph.vertex(v).association.transmitter;
    let mut transmitters: Vec<usize> = buckets.iter().map(|((t, _), _)| *t).collect();
    transmitters.dedup();
    let mut members = start.to_vec();
    for _ in 0..MAX_PASSES {
        let mut changed = false;
        for &t in &transmitters {
            let (own, rest): (Vec<usize>, Vec<usize>) = members.iter().partition(|&&v| tx(v) == t);
            let mut candidates = BitSet::full(graph.len());
            for &v in &rest {
                candidates.intersect_with(graph.neighbors(v));
            }
            let at_t = buckets.iter().filter(|((bt, _), _)| *bt == t).map(|(_, b)| b);
            let Some((w, group)) = best_group(graph, at_t, &candidates) else {
                continue;
            };
            let current = clique_weight(graph, &own);
            let slack = S::epsilon() * S::lit(64.0) * current.abs();
            if w > current + slack {
                members = rest;
                members.extend(group);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    members.sort_unstable();
    members
}

/// Greedy clique inside `live`: repeatedly take the vertex whose weight plus
/// the weight of its still-compatible neighbours is largest.
fn bucket_clique<S: Scalar>(graph: &RaidncGraph<S>, live: &[usize]) -> Vec<usize> {
    let mut open: Vec<usize> = live.to_vec();
    let mut group = Vec::new();
    while !open.is_empty() {
        let score = |v: usize| {
            open.iter()
                .filter(|&&u| u != v && graph.adjacent(u, v))
                .fold(graph.weight(v), |acc, &u| acc + graph.weight(u))
        };
        let mut pick = open[0];
        let mut pick_score = score(pick);
        for &v in &open[1..] {
            let sc = score(v);
            if sc > pick_score {
                pick = v;
                pick_score = sc;
            }
        }
        group.push(pick);
        open.retain(|&u| u != pick && graph.adjacent(u, pick));
    }
    group.sort_unstable();
    group
}

/// [`solve_greedy`] and [`solve_grouped`], each refined by
/// [`improve_by_transmitter`]; the heavier result wins and ties go to the
/// lexicographically smaller vertex set.
pub fn solve_heuristic<S: Scalar>(graph: &RaidncGraph<S>) -> CliqueSolution<S> {
    let mut best: Option<(S, Vec<usize>)> = None;
    for start in [solve_greedy(graph).vertices, solve_grouped(graph).vertices] {
        let members = improve_by_transmitter(graph, &start);
        let w = clique_weight(graph, &members);
        if best.as_ref().is_none_or(|(bw, bm)| w > *bw || (w == *bw && members < *bm)) {
            best = Some((w, members));
        }
    }
    let (weight, vertices) = best.expect("two starts");
    debug_assert!(verify_clique(graph, &vertices));
    CliqueSolution {
        weight,
        vertices,
        solver: SolverTag::Greedy,
    }
}
