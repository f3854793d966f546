use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::EmbeddingError;
use crate::alias::AliasTable;
use crate::discipline_graph::DisciplineGraph;
use crate::topic::{Level, TopicId};

/// Random-walk settings.
///
/// `return_p` and `inout_q` are the usual node2vec biases: a step back to the
/// previous node is weighted by `1/p`, a step to a node not adjacent to the
/// previous node by `1/q`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkParams {
    pub return_p: f64,
    pub inout_q: f64,
    /// Maximum walk length in nodes.
    pub walk_length: usize,
    pub walks_per_node: usize,
    pub include_self_loops: bool,
    pub seed: u64,
}

impl Default for WalkParams {
    fn default() -> Self {
        WalkParams {
            return_p: 1.0,
            inout_q: 1.0,
            walk_length: 80,
            walks_per_node: 10,
            include_self_loops: false,
            seed: 42,
        }
    }
}

impl WalkParams {
    pub fn validate(&self) -> Result<(), EmbeddingError> {
        let bad = |m: &str| Err(EmbeddingError::InvalidParams(m.to_string()));
        if !(self.return_p.is_finite() && self.return_p > 0.0) {
            return bad("return p must be positive");
        }
        if !(self.inout_q.is_finite() && self.inout_q > 0.0) {
            return bad("in-out q must be positive");
        }
        if self.walk_length < 2 {
            return bad("walk length must be at least 2");
        }
        if self.walks_per_node < 1 {
            return bad("walks per node must be at least 1");
        }
        Ok(())
    }

    fn is_unbiased(&self) -> bool {
        self.return_p == 1.0 && self.inout_q == 1.0
    }
}

#[derive(Debug, Clone)]
struct StepTable {
    probs: Vec<f64>,
    sampler: AliasTable,
}

impl StepTable {
    fn new(weights: &[f64]) -> Option<Self> {
        let total: f64 = weights.iter().sum();
        let sampler = AliasTable::new(weights)?;
        Some(StepTable {
            probs: weights.iter().map(|w| w / total).collect(),
            sampler,
        })
    }
}

/// Precomputed step distributions.
///
/// Neighbor lists are stored in CSR form; a directed step `prev → cur` is
/// identified by the position of `cur` in `prev`'s list. When `p = q = 1` the
/// second-order tables coincide with the first-order ones and are not built.
#[derive(Debug, Clone)]
pub struct TransitionTables {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    first_order: Vec<Option<StepTable>>,
    second_order: Option<Vec<Option<StepTable>>>,
}

impl TransitionTables {
    fn neighbors(&self, node: usize) -> &[usize] {
        &self.targets[self.offsets[node]..self.offsets[node + 1]]
    }

    fn edge_id(&self, from: usize, to: usize) -> Option<usize> {
        self.neighbors(from)
            .binary_search(&to)
            .ok()
            .map(|k| self.offsets[from] + k)
    }

    pub fn node_count(&self) -> usize {
        self.first_order.len()
    }

    /// Step distribution out of `node` when there is no previous node.
    pub fn first_step(&self, node: usize) -> Option<Vec<(usize, f64)>> {
        let table = self.first_order.get(node)?.as_ref()?;
        Some(self.neighbors(node).iter().copied().zip(table.probs.iter().copied()).collect())
    }

    /// Normalized distribution of the next node after the step `prev → cur`.
    /// `None` if `prev → cur` is not an edge or `cur` has no usable neighbors.
    pub fn step_distribution(&self, prev: usize, cur: usize) -> Option<Vec<(usize, f64)>> {
        let e = self.edge_id(prev, cur)?;
        let table = match &self.second_order {
            Some(tables) => tables[e].as_ref()?,
            None => self.first_order[cur].as_ref()?,
        };
        Some(self.neighbors(cur).iter().copied().zip(table.probs.iter().copied()).collect())
    }

    /// All stored distributions (first- and second-order), for invariant checks.
    pub fn all_distributions(&self) -> impl Iterator<Item = &[f64]> {
        let first = self.first_order.iter().flatten();
        let second = self.second_order.iter().flatten().flatten();
        first.chain(second).map(|t| t.probs.as_slice())
    }

    fn walk_from(&self, start: usize, length: usize, rng: &mut ChaCha8Rng) -> Vec<u32> {
        let mut walk = Vec::with_capacity(length);
        walk.push(start as u32);
        let Some(table) = &self.first_order[start] else {
            return walk;
        };
        let mut edge = self.offsets[start] + table.sampler.sample(rng);
        walk.push(self.targets[edge] as u32);
        while walk.len() < length {
            let cur = self.targets[edge];
            let table = match &self.second_order {
                Some(tables) => &tables[edge],
                None => &self.first_order[cur],
            };
            let Some(table) = table else { break };
            edge = self.offsets[cur] + table.sampler.sample(rng);
            walk.push(self.targets[edge] as u32);
        }
        walk
    }
}

/// Build first- and (when biased) second-order step tables.
pub fn precompute_transitions(
    graph: &DisciplineGraph,
    params: &WalkParams,
) -> Result<TransitionTables, EmbeddingError> {
    params.validate()?;
    if graph.node_count() == 0 {
        return Err(EmbeddingError::EmptyGraph);
    }
    let adj = graph.adjacency(params.include_self_loops);
    let mut offsets = Vec::with_capacity(adj.len() + 1);
    let mut targets = Vec::new();
    let mut weights = Vec::new();
    offsets.push(0);
    for list in &adj {
        for &(n, w) in list {
            targets.push(n);
            weights.push(w);
        }
        offsets.push(targets.len());
    }

    let first_order: Vec<Option<StepTable>> = (0..adj.len())
        .map(|v| StepTable::new(&weights[offsets[v]..offsets[v + 1]]))
        .collect();

    let mut tables = TransitionTables {
        offsets,
        targets,
        first_order,
        second_order: None,
    };
    if params.is_unbiased() {
        return Ok(tables);
    }

    let inv_p = 1.0 / params.return_p;
    let inv_q = 1.0 / params.inout_q;
    let second: Vec<Option<StepTable>> = (0..adj.len())
        .into_par_iter()
        .flat_map_iter(|prev| {
            let t = &tables;
            let weights = &weights;
            t.neighbors(prev).iter().map(move |&cur| {
                let range = t.offsets[cur]..t.offsets[cur + 1];
                let biased: Vec<f64> = t.targets[range.clone()]
                    .iter()
                    .zip(&weights[range])
                    .map(|(&x, &w)| {
                        let alpha = if x == prev {
                            inv_p
                        } else if t.edge_id(prev, x).is_some() {
                            1.0
                        } else {
                            inv_q
                        };
                        w * alpha
                    })
                    .collect();
                StepTable::new(&biased)
            })
        })
        .collect();
    tables.second_order = Some(second);
    Ok(tables)
}

/// Walks over a graph, stored as node indices into `nodes`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkSet {
    pub level: Level,
    pub nodes: Vec<TopicId>,
    pub walks: Vec<Vec<u32>>,
}

impl WalkSet {
    pub fn token_count(&self) -> usize {
        self.walks.iter().map(Vec::len).sum()
    }

    /// Occurrences of each node across all walks.
    pub fn occurrences(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.nodes.len()];
        for w in &self.walks {
            for &n in w {
                counts[n as usize] += 1;
            }
        }
        counts
    }
}

const SHUFFLE_STREAM: u64 = u64::MAX;

/// `walks_per_node` rounds; each round visits every node once in a shuffled
/// order. Walk `k` uses its own ChaCha stream, so the output does not depend
/// on how the work is split across threads.
pub fn generate_walks(
    graph: &DisciplineGraph,
    params: &WalkParams,
) -> Result<WalkSet, EmbeddingError> {
    let tables = precompute_transitions(graph, params)?;
    let n = graph.node_count();

    let mut order_rng = ChaCha8Rng::seed_from_u64(params.seed);
    order_rng.set_stream(SHUFFLE_STREAM);
    let mut starts = Vec::with_capacity(n * params.walks_per_node);
    for _ in 0..params.walks_per_node {
        let mut round: Vec<usize> = (0..n).collect();
        round.shuffle(&mut order_rng);
        starts.extend(round);
    }

    let walks = starts
        .par_iter()
        .enumerate()
        .map(|(k, &start)| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(k as u64);
            tables.walk_from(start, params.walk_length, &mut rng)
        })
        .collect();

    Ok(WalkSet {
        level: graph.level(),
        nodes: graph.nodes().to_vec(),
        walks,
    })
}
