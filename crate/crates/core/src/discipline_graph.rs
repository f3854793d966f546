//! Discipline-level citation graphs and per-journal publication profiles.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::ingest::Corpus;
use crate::io::{csv_reader, csv_writer};
use crate::scalar::Scalar;
use crate::topic::{Level, TopicId};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("no papers carry a {0} topic")]
    EmptyLevel(Level),
    #[error("edges file: {0}")]
    Csv(#[from] csv::Error),
    #[error("edges file: {0}")]
    Parse(String),
}

/// Undirected, weighted citation graph between the topics of one level.
///
/// Each unordered pair (including self-pairs) is stored once with `i <= j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisciplineGraph {
    level: Level,
    nodes: Vec<TopicId>,
    index: HashMap<TopicId, usize>,
    edges: BTreeMap<(usize, usize), u64>,
    unattributed: usize,
}

impl DisciplineGraph {
    /// Assemble a graph from explicit nodes and weighted pairs. Pairs may be
    /// given in either orientation; repeated pairs accumulate.
    pub fn from_edges(
        level: Level,
        nodes: impl IntoIterator<Item = TopicId>,
        edges: impl IntoIterator<Item = (TopicId, TopicId, u64)>,
    ) -> Result<Self, GraphError> {
        let mut nodes: Vec<TopicId> = nodes.into_iter().collect();
        let mut pending = Vec::new();
        for (a, b, w) in edges {
            if a.level() != level || b.level() != level {
                return Err(GraphError::Parse(format!(
                    "edge {a}–{b} is not at the {level} level"
                )));
            }
            if w == 0 {
                return Err(GraphError::Parse(format!("edge {a}–{b} has zero weight")));
            }
            nodes.push(a.clone());
            nodes.push(b.clone());
            pending.push((a, b, w));
        }
        nodes.sort();
        nodes.dedup();
        if nodes.is_empty() {
            return Err(GraphError::EmptyLevel(level));
        }
        let index: HashMap<TopicId, usize> =
            nodes.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        let mut weights = BTreeMap::new();
        for (a, b, w) in pending {
            let (i, j) = (index[&a], index[&b]);
            *weights.entry((i.min(j), i.max(j))).or_insert(0) += w;
        }
        Ok(DisciplineGraph {
            level,
            nodes,
            index,
            edges: weights,
            unattributed: 0,
        })
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn nodes(&self) -> &[TopicId] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn index_of(&self, topic: &TopicId) -> Option<usize> {
        self.index.get(topic).copied()
    }

    /// Unordered pairs with their weights, `i <= j`, in index order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.edges.iter().map(|(&(i, j), &w)| (i, j, w))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn weight(&self, a: usize, b: usize) -> u64 {
        self.edges.get(&(a.min(b), a.max(b))).copied().unwrap_or(0)
    }

    /// Weight by topic pair, in either orientation.
    pub fn weight_between(&self, a: &TopicId, b: &TopicId) -> u64 {
        match (self.index_of(a), self.index_of(b)) {
            (Some(i), Some(j)) => self.weight(i, j),
            _ => 0,
        }
    }

    /// Sum of all pair weights, self-loops counted once.
    pub fn total_weight(&self) -> u64 {
        self.edges.values().sum()
    }

    /// Sum of the weights of a node's incident pairs. A self-loop contributes
    /// its weight once.
    pub fn weighted_degree(&self, node: usize) -> u64 {
        self.edges
            .iter()
            .filter(|(&(i, j), _)| i == node || j == node)
            .map(|(_, &w)| w)
            .sum()
    }

    /// Citations skipped because an endpoint had no topic at this level.
    pub fn unattributed(&self) -> usize {
        self.unattributed
    }

    /// Neighbor lists sorted by node index, with weights.
    pub fn adjacency(&self, include_self_loops: bool) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (&(i, j), &w) in &self.edges {
            if i == j {
                if include_self_loops {
                    adj[i].push((i, w as f64));
                }
            } else {
                adj[i].push((j, w as f64));
                adj[j].push((i, w as f64));
            }
        }
        for list in &mut adj {
            list.sort_by_key(|&(n, _)| n);
        }
        adj
    }
}

/// Pool all citations into an undirected graph at `level`.
pub fn build_discipline_graph(corpus: &Corpus, level: Level) -> Result<DisciplineGraph, GraphError> {
    let topics = corpus.taxonomy().topics(level);
    if topics.is_empty() {
        return Err(GraphError::EmptyLevel(level));
    }
    let nodes: Vec<TopicId> = topics.iter().cloned().collect();
    let index: HashMap<TopicId, usize> =
        nodes.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    let paper_node: Vec<Option<usize>> = corpus
        .papers()
        .iter()
        .map(|p| index.get(p.topic(level)).copied())
        .collect();

    let (edges, unattributed) = corpus
        .citations()
        .par_chunks(64 * 1024)
        .map(|chunk| {
            let mut part: BTreeMap<(usize, usize), u64> = BTreeMap::new();
            let mut skipped = 0usize;
            for c in chunk {
                match (paper_node[c.citing], paper_node[c.cited]) {
                    (Some(a), Some(b)) => *part.entry((a.min(b), a.max(b))).or_insert(0) += 1,
                    _ => skipped += 1,
                }
            }
            (part, skipped)
        })
        .reduce(
            || (BTreeMap::new(), 0),
            |(mut acc, s1), (part, s2)| {
                for (k, w) in part {
                    *acc.entry(k).or_insert(0) += w;
                }
                (acc, s1 + s2)
            },
        );

    Ok(DisciplineGraph {
        level,
        nodes,
        index,
        edges,
        unattributed,
    })
}

/// Write the graph dump: `source_topic,target_topic,weight`, self-loops as
/// `source == target`.
pub fn write_graph_dump<W: Write>(graph: &DisciplineGraph, w: W) -> Result<(), GraphError> {
    let mut wtr = csv_writer(w);
    wtr.write_record(["source_topic", "target_topic", "weight"])?;
    for (i, j, weight) in graph.edges() {
        wtr.write_record([
            graph.nodes[i].code(),
            graph.nodes[j].code(),
            &weight.to_string(),
        ])?;
    }
    // Isolated nodes would otherwise vanish from the dump.
    for (i, node) in graph.nodes.iter().enumerate() {
        if graph.weighted_degree(i) == 0 {
            wtr.write_record([node.code(), "", "0"])?;
        }
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Read a graph dump written by [`write_graph_dump`]. Rows with an empty
/// target declare isolated nodes.
pub fn read_graph_dump<R: Read>(level: Level, r: R) -> Result<DisciplineGraph, GraphError> {
    let mut rdr = csv_reader(r, b',');
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let field = |k: usize| rec.get(k).unwrap_or("").trim();
        let source = TopicId::new(level, field(0)).map_err(|e| GraphError::Parse(e.to_string()))?;
        if field(1).is_empty() {
            nodes.push(source);
            continue;
        }
        let target = TopicId::new(level, field(1)).map_err(|e| GraphError::Parse(e.to_string()))?;
        let weight: u64 = field(2)
            .parse()
            .map_err(|_| GraphError::Parse(format!("bad weight {:?}", field(2))))?;
        edges.push((source, target, weight));
    }
    DisciplineGraph::from_edges(level, nodes, edges)
}

/// Paper counts of one journal over the topics of one level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JournalProfile {
    pub journal_id: String,
    pub level: Level,
    /// Topics with at least one paper.
    pub counts: BTreeMap<TopicId, u64>,
}

impl JournalProfile {
    pub fn from_counts(
        journal_id: impl Into<String>,
        level: Level,
        counts: impl IntoIterator<Item = (TopicId, u64)>,
    ) -> Self {
        let mut merged = BTreeMap::new();
        for (t, n) in counts {
            if n > 0 {
                *merged.entry(t).or_insert(0) += n;
            }
        }
        JournalProfile {
            journal_id: journal_id.into(),
            level,
            counts: merged,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// `count_i / Σ counts`, in topic order.
    pub fn shares<T: Scalar>(&self) -> Vec<(TopicId, T)> {
        let total = T::from_u64(self.total()).expect("count fits scalar");
        self.counts
            .iter()
            .map(|(t, &n)| (t.clone(), T::from_u64(n).expect("count fits scalar") / total))
            .collect()
    }
}

/// One profile per journal with at least one paper, in journal-id order.
pub fn build_journal_profiles(corpus: &Corpus, level: Level) -> Vec<JournalProfile> {
    corpus
        .publishing_journals()
        .map(|jid| {
            let papers = corpus.papers();
            let counts = corpus
                .papers_of(jid)
                .iter()
                .map(|&i| (papers[i].topic(level).clone(), 1u64));
            JournalProfile::from_counts(jid, level, counts)
        })
        .collect()
}
