//! Text formats for walks, embeddings and similarity matrices.
//!
//! Floats are written in shortest round-trip form, so every reader here
//! reproduces the written values bit for bit. Lines starting with `#` are
//! skipped on input.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, BufReader, Read, Write};

use super::{EmbeddingError, EmbeddingMatrix, SimilarityMatrix, WalkSet};
use crate::io::{csv_reader, csv_writer, fmt_num};
use crate::scalar::Scalar;
use crate::topic::{Level, TopicId};

fn content_lines<R: Read>(r: R) -> impl Iterator<Item = Result<String, EmbeddingError>> {
    BufReader::new(r)
        .lines()
        .map(|l| l.map_err(EmbeddingError::from))
        .filter(|l| match l {
            Ok(s) => !s.trim().is_empty() && !s.trim_start().starts_with('#'),
            Err(_) => true,
        })
}

fn parse_topic(level: Level, code: &str) -> Result<TopicId, EmbeddingError> {
    TopicId::new(level, code).map_err(|e| EmbeddingError::Parse(e.to_string()))
}

fn parse_num<T: Scalar>(s: &str) -> Result<T, EmbeddingError> {
    s.trim()
        .parse::<T>()
        .map_err(|_| EmbeddingError::Parse(format!("bad number {s:?}")))
}

/// One walk per line, space-separated topic codes.
pub fn write_walks<W: Write>(walks: &WalkSet, mut w: W) -> Result<(), EmbeddingError> {
    for walk in &walks.walks {
        let line: Vec<&str> = walk.iter().map(|&n| walks.nodes[n as usize].code()).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

/// Read walks; the node list is the sorted set of codes that occur.
pub fn read_walks<R: Read>(level: Level, r: R) -> Result<WalkSet, EmbeddingError> {
    let mut raw = Vec::new();
    for line in content_lines(r) {
        let walk = line?
            .split_whitespace()
            .map(|c| parse_topic(level, c))
            .collect::<Result<Vec<_>, _>>()?;
        raw.push(walk);
    }
    let nodes: Vec<TopicId> = raw
        .iter()
        .flatten()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: HashMap<&TopicId, u32> =
        nodes.iter().enumerate().map(|(i, t)| (t, i as u32)).collect();
    let walks = raw
        .iter()
        .map(|w| w.iter().map(|t| index[t]).collect())
        .collect();
    Ok(WalkSet {
        level,
        nodes,
        walks,
    })
}

/// `topic_code v1 … vd` per line.
pub fn write_embeddings<T: Scalar, W: Write>(
    emb: &EmbeddingMatrix<T>,
    mut w: W,
) -> Result<(), EmbeddingError> {
    for (i, node) in emb.nodes.iter().enumerate() {
        write!(w, "{}", node.code())?;
        for &v in emb.vector(i) {
            write!(w, " {}", fmt_num(v))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_embeddings<T: Scalar, R: Read>(
    level: Level,
    r: R,
) -> Result<EmbeddingMatrix<T>, EmbeddingError> {
    let mut nodes = Vec::new();
    let mut data = Vec::new();
    let mut dims = None;
    for line in content_lines(r) {
        let line = line?;
        let mut parts = line.split_whitespace();
        let code = parts.next().expect("non-empty line");
        nodes.push(parse_topic(level, code)?);
        let before = data.len();
        for p in parts {
            data.push(parse_num::<T>(p)?);
        }
        let d = data.len() - before;
        match dims {
            None => dims = Some(d),
            Some(expected) if expected != d => {
                return Err(EmbeddingError::Parse(format!(
                    "topic {code} has {d} values, expected {expected}"
                )))
            }
            _ => {}
        }
    }
    EmbeddingMatrix::new(level, nodes, dims.unwrap_or(0), data)
}

/// Dense square matrix with a header row and a leading column of topic codes.
/// Accepts any row-major `n × n` values, including unclamped cosines.
pub fn write_dense_matrix<T: Scalar, W: Write>(
    nodes: &[TopicId],
    values: &[T],
    w: W,
) -> Result<(), EmbeddingError> {
    let n = nodes.len();
    let mut wtr = csv_writer(w);
    let mut header = vec!["topic".to_string()];
    header.extend(nodes.iter().map(|t| t.code().to_string()));
    wtr.write_record(&header)?;
    for (i, node) in nodes.iter().enumerate() {
        let mut row = vec![node.code().to_string()];
        row.extend(values[i * n..(i + 1) * n].iter().map(|&v| fmt_num(v)));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_similarity_dense<T: Scalar, W: Write>(
    s: &SimilarityMatrix<T>,
    w: W,
) -> Result<(), EmbeddingError> {
    write_dense_matrix(s.nodes(), s.values(), w)
}

pub fn read_similarity_dense<T: Scalar, R: Read>(
    level: Level,
    r: R,
) -> Result<SimilarityMatrix<T>, EmbeddingError> {
    let mut rdr = csv_reader(r, b',');
    let header = rdr.headers()?.clone();
    let nodes = header
        .iter()
        .skip(1)
        .map(|c| parse_topic(level, c))
        .collect::<Result<Vec<_>, _>>()?;
    let n = nodes.len();
    let mut values = Vec::with_capacity(n * n);
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let code = rec.get(0).unwrap_or("");
        if i >= n || code != nodes[i].code() {
            return Err(EmbeddingError::Parse(format!(
                "row {i} is {code:?}, expected the header order"
            )));
        }
        if rec.len() != n + 1 {
            return Err(EmbeddingError::Parse(format!("row {code} has {} cells", rec.len())));
        }
        for cell in rec.iter().skip(1) {
            values.push(parse_num::<T>(cell)?);
        }
    }
    SimilarityMatrix::new(level, nodes, values)
}

/// Sparse `row,col,value` triplets over the upper triangle. The diagonal is
/// always listed so that the node set survives a round trip.
pub fn write_similarity_triplets<T: Scalar, W: Write>(
    s: &SimilarityMatrix<T>,
    w: W,
) -> Result<(), EmbeddingError> {
    let mut wtr = csv_writer(w);
    wtr.write_record(["row", "col", "value"])?;
    let nodes = s.nodes();
    for i in 0..nodes.len() {
        for j in i..nodes.len() {
            let v = s.get(i, j);
            if i == j || v != T::zero() {
                wtr.write_record([nodes[i].code(), nodes[j].code(), &fmt_num(v)])?;
            }
        }
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_similarity_triplets<T: Scalar, R: Read>(
    level: Level,
    r: R,
) -> Result<SimilarityMatrix<T>, EmbeddingError> {
    let mut rdr = csv_reader(r, b',');
    let mut entries = Vec::new();
    let mut nodes = BTreeSet::new();
    for rec in rdr.records() {
        let rec = rec?;
        let a = parse_topic(level, rec.get(0).unwrap_or(""))?;
        let b = parse_topic(level, rec.get(1).unwrap_or(""))?;
        let v: T = parse_num(rec.get(2).unwrap_or(""))?;
        nodes.insert(a.clone());
        nodes.insert(b.clone());
        entries.push((a, b, v));
    }
    let nodes: Vec<TopicId> = nodes.into_iter().collect();
    let n = nodes.len();
    let index: HashMap<&TopicId, usize> = nodes.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let mut values = vec![T::zero(); n * n];
    for (a, b, v) in &entries {
        let (i, j) = (index[a], index[b]);
        values[i * n + j] = *v;
        values[j * n + i] = *v;
    }
    SimilarityMatrix::new(level, nodes, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discipline_graph::DisciplineGraph;
    use crate::embedding::{cosine_similarity_matrix, generate_walks, train_sgns, TrainParams, WalkParams};

    fn t(code: &str) -> TopicId {
        TopicId::new(Level::Meso, code).unwrap()
    }

    fn trained() -> (WalkSet, EmbeddingMatrix<f64>) {
        let g = DisciplineGraph::from_edges(
            Level::Meso,
            [],
            [
                (t("1.1"), t("1.2"), 3),
                (t("1.2"), t("2.1"), 1),
                (t("2.1"), t("2.2"), 5),
                (t("1.1"), t("2.2"), 1),
            ],
        )
        .unwrap();
        let walks = generate_walks(&g, &WalkParams { walk_length: 10, ..WalkParams::default() }).unwrap();
        let params = TrainParams { dimensions: 6, epochs: 1, ..TrainParams::default() };
        let emb = train_sgns(&walks, &params).unwrap();
        (walks, emb)
    }

    #[test]
    fn walks_round_trip() {
        let (walks, _) = trained();
        let mut buf = Vec::new();
        write_walks(&walks, &mut buf).unwrap();
        let back = read_walks(Level::Meso, buf.as_slice()).unwrap();
        assert_eq!(back, walks);
    }

    #[test]
    fn embeddings_round_trip_bit_exact() {
        let (_, emb) = trained();
        let mut buf = b"# header\n".to_vec();
        write_embeddings(&emb, &mut buf).unwrap();
        let back: EmbeddingMatrix<f64> = read_embeddings(Level::Meso, buf.as_slice()).unwrap();
        assert_eq!(back, emb);
    }

    #[test]
    fn similarity_round_trips_bit_exact() {
        let (_, emb) = trained();
        let s = cosine_similarity_matrix(&emb).unwrap();

        let mut dense = Vec::new();
        write_similarity_dense(&s, &mut dense).unwrap();
        let back: SimilarityMatrix<f64> = read_similarity_dense(Level::Meso, dense.as_slice()).unwrap();
        assert_eq!(back, s);

        let mut sparse = Vec::new();
        write_similarity_triplets(&s, &mut sparse).unwrap();
        let back: SimilarityMatrix<f64> =
            read_similarity_triplets(Level::Meso, sparse.as_slice()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn dense_reader_rejects_misordered_rows() {
        let text = "topic,1.1,1.2\n1.2,0.5,1\n1.1,1,0.5\n";
        assert!(read_similarity_dense::<f64, _>(Level::Meso, text.as_bytes()).is_err());
        let ragged = "1.1 0.1 0.2\n1.2 0.3\n";
        assert!(read_embeddings::<f64, _>(Level::Meso, ragged.as_bytes()).is_err());
    }
}
