//! Files for external mapping and plotting tools: discipline networks,
//! per-journal topic overlays and diversity scatter data.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use thiserror::Error;

use crate::discipline_graph::{DisciplineGraph, JournalProfile};
use crate::diversity::JournalDiversityTable;
use crate::ingest::Taxonomy;
use crate::io::{csv_reader, csv_writer, fmt_num};
use crate::scalar::Scalar;
use crate::topic::{Level, TopicId};

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("scatter axes must differ, got {0} twice")]
    SameLevel(Level),
    #[error("invalid edges file: {0}")]
    Parse(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub const NODE_COLUMNS: [&str; 4] = ["topic_code", "label", "cluster", "weight"];
pub const EDGE_COLUMNS: [&str; 3] = ["source", "target", "weight"];

/// Nodes carry the macro parent as cluster and the weighted degree as weight
/// (a self-loop adds its weight once). Self-loops are left out of the edges.
pub fn export_network<Wn: Write, We: Write>(
    graph: &DisciplineGraph,
    taxonomy: &Taxonomy,
    nodes_out: Wn,
    edges_out: We,
) -> Result<(), ExportError> {
    let mut degree = vec![0u64; graph.node_count()];
    for (a, b, w) in graph.edges() {
        degree[a] += w;
        if a != b {
            degree[b] += w;
        }
    }

    let mut wtr = csv_writer(nodes_out);
    wtr.write_record(NODE_COLUMNS)?;
    for (topic, d) in graph.nodes().iter().zip(&degree) {
        wtr.write_record([
            topic.code(),
            &taxonomy.label(topic),
            topic.macro_parent().code(),
            &d.to_string(),
        ])?;
    }
    wtr.flush().map_err(csv::Error::from)?;

    let nodes = graph.nodes();
    let mut wtr = csv_writer(edges_out);
    wtr.write_record(EDGE_COLUMNS)?;
    for (a, b, w) in graph.edges().filter(|(a, b, _)| a != b) {
        wtr.write_record([nodes[a].code(), nodes[b].code(), &w.to_string()])?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Cross-topic weights of an edges file, keyed with the smaller topic first.
pub fn read_network_edges<R: Read>(
    level: Level,
    r: R,
) -> Result<BTreeMap<(TopicId, TopicId), u64>, ExportError> {
    let mut rdr = csv_reader(r, b',');
    let mut edges = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let topic = |i: usize| {
            TopicId::new(level, rec.get(i).unwrap_or(""))
                .map_err(|e| ExportError::Parse(e.to_string()))
        };
        let (a, b) = (topic(0)?, topic(1)?);
        let w: u64 = rec
            .get(2)
            .unwrap_or("")
            .parse()
            .map_err(|_| ExportError::Parse(format!("bad weight in {rec:?}")))?;
        let key = if a <= b { (a, b) } else { (b, a) };
        *edges.entry(key).or_insert(0) += w;
    }
    Ok(edges)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverlayNode<T> {
    pub topic: TopicId,
    pub macro_parent: TopicId,
    pub paper_count: u64,
    pub normalized_weight: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JournalOverlay<T> {
    pub journal_id: String,
    pub nodes: Vec<OverlayNode<T>>,
}

impl<T: Scalar> JournalOverlay<T> {
    /// No topic had more than one paper.
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<(), ExportError> {
        let mut wtr = csv_writer(w);
        wtr.write_record(["topic_code", "macro_parent", "paper_count", "normalized_weight"])?;
        for n in &self.nodes {
            wtr.write_record([
                n.topic.code(),
                n.macro_parent.code(),
                &n.paper_count.to_string(),
                &fmt_num(n.normalized_weight),
            ])?;
        }
        wtr.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Topics of a journal for an overlay map. Single-paper topics are dropped and
/// the remaining counts min–max normalized (all 1.0 when they are equal).
pub fn export_journal_overlay<T: Scalar>(profile: &JournalProfile) -> JournalOverlay<T> {
    let kept: Vec<(&TopicId, u64)> = profile
        .counts
        .iter()
        .filter(|(_, &n)| n > 1)
        .map(|(t, &n)| (t, n))
        .collect();
    let min = kept.iter().map(|&(_, n)| n).min().unwrap_or(0);
    let max = kept.iter().map(|&(_, n)| n).max().unwrap_or(0);
    let nodes = kept
        .into_iter()
        .map(|(t, n)| OverlayNode {
            topic: t.clone(),
            macro_parent: t.macro_parent(),
            paper_count: n,
            normalized_weight: if max == min {
                T::one()
            } else {
                T::from_u64(n - min).expect("count fits scalar")
                    / T::from_u64(max - min).expect("count fits scalar")
            },
        })
        .collect();
    JournalOverlay {
        journal_id: profile.journal_id.clone(),
        nodes,
    }
}

/// `journal_id, D_x, D_y, is_multidisciplinary`, one row per journal.
pub fn export_scatter<T: Scalar, W: Write>(
    table: &JournalDiversityTable<T>,
    level_x: Level,
    level_y: Level,
    w: W,
) -> Result<(), ExportError> {
    if level_x == level_y {
        return Err(ExportError::SameLevel(level_x));
    }
    let mut wtr = csv_writer(w);
    wtr.write_record([
        "journal_id".to_string(),
        format!("d_{level_x}"),
        format!("d_{level_y}"),
        "is_multidisciplinary".to_string(),
    ])?;
    for r in &table.rows {
        wtr.write_record([
            r.journal_id.as_str(),
            &fmt_num(r.get(level_x)),
            &fmt_num(r.get(level_y)),
            if r.is_multidisciplinary { "true" } else { "false" },
        ])?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diversity::DiversityRow;

    fn t(code: &str) -> TopicId {
        TopicId::new(Level::Meso, code).unwrap()
    }

    #[test]
    fn network_hand_example() {
        let g = DisciplineGraph::from_edges(
            Level::Meso,
            [],
            [(t("1.1"), t("2.3"), 2), (t("1.1"), t("1.1"), 1)],
        )
        .unwrap();
        let mut taxonomy = Taxonomy::default();
        taxonomy.insert(t("1.1"));
        taxonomy.insert(t("2.3"));
        let (mut nodes, mut edges) = (Vec::new(), Vec::new());
        export_network(&g, &taxonomy, &mut nodes, &mut edges).unwrap();
        assert_eq!(
            String::from_utf8(nodes).unwrap(),
            "topic_code,label,cluster,weight\n1.1,1.1,1,3\n2.3,2.3,2,2\n"
        );
        assert_eq!(String::from_utf8(edges.clone()).unwrap(), "source,target,weight\n1.1,2.3,2\n");
        let back = read_network_edges(Level::Meso, edges.as_slice()).unwrap();
        assert_eq!(back.into_iter().collect::<Vec<_>>(), vec![((t("1.1"), t("2.3")), 2)]);
    }

    #[test]
    fn overlay_examples() {
        let p = JournalProfile::from_counts("j", Level::Meso, [(t("1.1"), 10), (t("1.2"), 4), (t("2.1"), 1)]);
        let o: JournalOverlay<f64> = export_journal_overlay(&p);
        let weights: Vec<_> = o.nodes.iter().map(|n| (n.topic.code(), n.normalized_weight)).collect();
        assert_eq!(weights, vec![("1.1", 1.0), ("1.2", 0.0)]);
        assert_eq!(o.nodes[0].macro_parent.code(), "1");

        let single = JournalProfile::from_counts("j", Level::Meso, [(t("1.1"), 5)]);
        assert_eq!(export_journal_overlay::<f64>(&single).nodes[0].normalized_weight, 1.0);

        let sparse = JournalProfile::from_counts("j", Level::Meso, [(t("1.1"), 1), (t("1.2"), 1)]);
        let o = export_journal_overlay::<f64>(&sparse);
        assert!(o.is_empty());
        let mut buf = Vec::new();
        o.write_to(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1);
    }

    #[test]
    fn scatter_rows() {
        let row = |id: &str, m: f64, s: f64| DiversityRow {
            journal_id: id.into(),
            name: id.into(),
            is_multidisciplinary: id == "a",
            paper_count: 3,
            d_macro: m,
            d_meso: s,
            d_micro: s,
        };
        let table = JournalDiversityTable { rows: vec![row("a", 1.5, 2.5), row("b", 1.0, 1.25)] };
        let mut buf = Vec::new();
        export_scatter(&table, Level::Meso, Level::Macro, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "journal_id,d_meso,d_macro,is_multidisciplinary\na,2.5,1.5,true\nb,1.25,1,false\n"
        );
        assert!(matches!(
            export_scatter(&table, Level::Macro, Level::Macro, Vec::new()),
            Err(ExportError::SameLevel(Level::Macro))
        ));
    }
}
