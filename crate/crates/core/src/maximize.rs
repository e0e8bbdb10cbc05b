//! Seed selection: the standard greedy algorithm and an exhaustive optimum for
//! small instances.
//!
//! With the Monte Carlo evaluator, greedy fixes one batch of simulation streams
//! for the whole run and maximizes the sample-average coverage. Every candidate
//! is therefore compared on the same live-edge graphs, and the objective being
//! maximized is exactly monotone submodular, so the lazy (CELF) queue returns
//! the same set a full rescan would. Gains are integer node counts summed over
//! simulations, which makes ties exact and the lowest-id tie rule reliable.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, NodeId, ParameterVector, SeedSet};
use crate::spread::{estimate_spread, exact_spread};
use crate::stream::{derive_seed, EdgeThresholds, SimStream};

/// Largest number of size-k subsets [`exact_optimal`] will enumerate.
pub const MAX_EXACT_SUBSETS: u128 = 1_000_000;

/// How spreads are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evaluator {
    /// Exact enumeration; only feasible on small graphs.
    Exact,
    /// Live-edge Monte Carlo with `num_sims` per-simulation streams of `seed`.
    MonteCarlo { num_sims: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: f64,
    pub std_error: f64,
}

impl Evaluator {
    pub fn monte_carlo(num_sims: usize, seed: u64) -> Self {
        Evaluator::MonteCarlo { num_sims, seed }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Evaluator::Exact)
    }

    pub fn num_sims(&self) -> Option<usize> {
        match *self {
            Evaluator::Exact => None,
            Evaluator::MonteCarlo { num_sims, .. } => Some(num_sims),
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match *self {
            Evaluator::Exact => None,
            Evaluator::MonteCarlo { seed, .. } => Some(seed),
        }
    }

    /// The same evaluator with an independent stream family.
    pub fn reseeded(&self, tag: u64) -> Self {
        match *self {
            Evaluator::Exact => Evaluator::Exact,
            Evaluator::MonteCarlo { num_sims, seed } => Evaluator::MonteCarlo {
                num_sims,
                seed: derive_seed(seed, tag),
            },
        }
    }

    pub fn evaluate(
        &self,
        graph: &DirectedGraph,
        theta: &ParameterVector,
        seeds: &SeedSet,
    ) -> Result<Evaluation> {
        match *self {
            Evaluator::Exact => Ok(Evaluation {
                value: exact_spread(graph, theta, seeds)?,
                std_error: 0.0,
            }),
            Evaluator::MonteCarlo { num_sims, seed } => {
                let est = estimate_spread(graph, theta, seeds, num_sims, seed)?;
                Ok(Evaluation {
                    value: est.mean,
                    std_error: est.std_error,
                })
            }
        }
    }

    pub fn spread(&self, graph: &DirectedGraph, theta: &ParameterVector, seeds: &SeedSet) -> Result<f64> {
        Ok(self.evaluate(graph, theta, seeds)?.value)
    }
}

/// Greedy seed selection: `k` rounds of adding the node with the largest
/// marginal spread, ties to the lowest node id.
pub fn greedy(
    graph: &DirectedGraph,
    k: usize,
    theta: &ParameterVector,
    evaluator: &Evaluator,
) -> Result<SeedSet> {
    if k > graph.n() {
        return Err(Error::BudgetTooLarge { k, n: graph.n() });
    }
    greedy_masked(graph, k, theta, evaluator, &vec![false; graph.n()])
}

/// Greedy on the graph with `removed` deleted: those nodes are neither
/// candidates nor traversable. Returns fewer than `k` nodes when fewer remain.
pub fn greedy_excluding(
    graph: &DirectedGraph,
    k: usize,
    theta: &ParameterVector,
    evaluator: &Evaluator,
    removed: &SeedSet,
) -> Result<SeedSet> {
    let mut mask = vec![false; graph.n()];
    for &v in removed.nodes() {
        mask[v] = true;
    }
    let available = graph.n() - removed.len();
    greedy_masked(graph, k.min(available), theta, evaluator, &mask)
}

fn greedy_masked(
    graph: &DirectedGraph,
    k: usize,
    theta: &ParameterVector,
    evaluator: &Evaluator,
    removed: &[bool],
) -> Result<SeedSet> {
    theta.check_for(graph)?;
    let theta = if removed.iter().any(|&r| r) {
        let p = graph
            .edges()
            .iter()
            .enumerate()
            .map(|(e, &(u, v))| if removed[u] || removed[v] { 0.0 } else { theta.get(e) })
            .collect();
        ParameterVector::new(p)?
    } else {
        theta.clone()
    };
    let candidates: Vec<NodeId> = (0..graph.n()).filter(|&v| !removed[v]).collect();
    if k == 0 {
        return Ok(SeedSet::empty());
    }
    match *evaluator {
        Evaluator::Exact => exact_greedy(graph, k, &theta, &candidates),
        Evaluator::MonteCarlo { num_sims, seed } => {
            if num_sims == 0 {
                return Err(Error::InvalidArgument("num_sims must be at least 1".into()));
            }
            let mut cov = CoverageGreedy::new(graph, &theta, num_sims, seed);
            Ok(cov.run(k, &candidates))
        }
    }
}

fn tie_tolerance(scale: f64) -> f64 {
    1e-9 * scale.abs().max(1.0)
}

fn exact_greedy(
    graph: &DirectedGraph,
    k: usize,
    theta: &ParameterVector,
    candidates: &[NodeId],
) -> Result<SeedSet> {
    let mut current = SeedSet::empty();
    for _ in 0..k {
        let mut best: Option<(NodeId, f64)> = None;
        for &v in candidates {
            if current.contains(v) {
                continue;
            }
            let candidate_value = exact_spread(graph, theta, &current.with(v))?;
            match best {
                Some((_, b)) if candidate_value <= b + tie_tolerance(b) => {}
                _ => best = Some((v, candidate_value)),
            }
        }
        let (v, _) = best.expect("candidate pool smaller than k");
        current = current.with(v);
    }
    Ok(current)
}

/// Sample-average coverage over a fixed batch of simulation streams.
struct CoverageGreedy<'a> {
    graph: &'a DirectedGraph,
    thresholds: EdgeThresholds,
    streams: Vec<SimStream>,
    words: usize,
    covered: Vec<u64>,
}

struct Scratch {
    stamp: Vec<u32>,
    epoch: u32,
    stack: Vec<NodeId>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch {
            stamp: vec![0; n],
            epoch: 0,
            stack: Vec::new(),
        }
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        self.epoch
    }
}

#[inline]
fn bit(words: &[u64], v: NodeId) -> bool {
    words[v / 64] >> (v % 64) & 1 == 1
}

impl<'a> CoverageGreedy<'a> {
    fn new(graph: &'a DirectedGraph, theta: &ParameterVector, num_sims: usize, seed: u64) -> Self {
        let words = graph.n().div_ceil(64).max(1);
        CoverageGreedy {
            graph,
            thresholds: EdgeThresholds::new(theta),
            streams: (0..num_sims as u64).map(|i| SimStream::new(seed, i)).collect(),
            words,
            covered: vec![0; words * num_sims],
        }
    }

    /// Nodes newly reached from `v` in one simulation, stopping at nodes the
    /// current seed set already covers (coverage is closed under reachability).
    fn fresh_reach(
        graph: &DirectedGraph,
        thresholds: &EdgeThresholds,
        stream: SimStream,
        covered: &[u64],
        v: NodeId,
        scratch: &mut Scratch,
        mut on_visit: impl FnMut(NodeId),
    ) -> u64 {
        if bit(covered, v) {
            return 0;
        }
        let epoch = scratch.next_epoch();
        scratch.stamp[v] = epoch;
        scratch.stack.push(v);
        on_visit(v);
        let mut count = 1;
        while let Some(u) = scratch.stack.pop() {
            for &e in graph.out_edges(u) {
                let w = graph.target(e);
                if scratch.stamp[w] != epoch && !bit(covered, w) && stream.is_live(e, thresholds) {
                    scratch.stamp[w] = epoch;
                    scratch.stack.push(w);
                    on_visit(w);
                    count += 1;
                }
            }
        }
        count
    }

    fn gain_sequential(&self, v: NodeId, scratch: &mut Scratch) -> u64 {
        self.streams
            .iter()
            .zip(self.covered.chunks(self.words))
            .map(|(&s, cov)| Self::fresh_reach(self.graph, &self.thresholds, s, cov, v, scratch, |_| {}))
            .sum()
    }

    fn gain_parallel(&self, v: NodeId) -> u64 {
        let n = self.graph.n();
        self.streams
            .par_iter()
            .zip(self.covered.par_chunks(self.words))
            .map_init(
                || Scratch::new(n),
                |scratch, (&s, cov)| {
                    Self::fresh_reach(self.graph, &self.thresholds, s, cov, v, scratch, |_| {})
                },
            )
            .sum()
    }

    fn commit(&mut self, v: NodeId) {
        let (graph, thresholds, n) = (self.graph, &self.thresholds, self.graph.n());
        self.streams
            .par_iter()
            .zip(self.covered.par_chunks_mut(self.words))
            .for_each_init(
                || (Scratch::new(n), Vec::new()),
                |(scratch, reached), (&s, cov)| {
                    reached.clear();
                    Self::fresh_reach(graph, thresholds, s, cov, v, scratch, |w| reached.push(w));
                    for &w in reached.iter() {
                        cov[w / 64] |= 1 << (w % 64);
                    }
                },
            );
    }

    fn run(&mut self, k: usize, candidates: &[NodeId]) -> SeedSet {
        let n = self.graph.n();
        let initial: Vec<(u64, Reverse<NodeId>, usize)> = candidates
            .par_iter()
            .map_init(
                || Scratch::new(n),
                |scratch, &v| (self.gain_sequential(v, scratch), Reverse(v), 0),
            )
            .collect();
        let mut heap = BinaryHeap::from(initial);
        let mut chosen = Vec::with_capacity(k);
        let mut round = 0;
        while chosen.len() < k {
            let Some((_, Reverse(v), stamp)) = heap.pop() else {
                break;
            };
            if stamp == round {
                chosen.push(v);
                self.commit(v);
                round += 1;
            } else {
                heap.push((self.gain_parallel(v), Reverse(v), round));
            }
        }
        SeedSet::new(chosen, n).expect("greedy picks distinct in-range nodes")
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
        if acc > u64::MAX as u128 {
            return u128::MAX;
        }
    }
    acc
}

/// The optimal size-`k` seed set by exhaustive search with exact spreads.
/// Ties go to the lexicographically smallest set.
pub fn exact_optimal(graph: &DirectedGraph, k: usize, theta: &ParameterVector) -> Result<(SeedSet, f64)> {
    theta.check_for(graph)?;
    if k > graph.n() {
        return Err(Error::BudgetTooLarge { k, n: graph.n() });
    }
    let count = binomial(graph.n(), k);
    if count > MAX_EXACT_SUBSETS {
        return Err(Error::SubsetGuard {
            count,
            limit: MAX_EXACT_SUBSETS,
        });
    }
    let subsets: Vec<Vec<NodeId>> = (0..graph.n()).combinations(k).collect();
    let values: Vec<f64> = subsets
        .par_iter()
        .map(|s| exact_spread(graph, theta, &SeedSet::new(s.clone(), graph.n())?))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] + tie_tolerance(values[best]) {
            best = i;
        }
    }
    Ok((SeedSet::new(subsets[best].clone(), graph.n())?, values[best]))
}
