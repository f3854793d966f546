use std::collections::HashMap;

use super::{EmbeddingError, EmbeddingMatrix};
use crate::scalar::Scalar;
use crate::topic::{Level, TopicId};

/// Pairwise similarity between the topics of one level.
///
/// Always symmetric with a unit diagonal and entries in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix<T> {
    level: Level,
    nodes: Vec<TopicId>,
    index: HashMap<TopicId, usize>,
    values: Vec<T>,
}

impl<T: Scalar> SimilarityMatrix<T> {
    /// Validate and wrap a row-major `n × n` matrix.
    pub fn new(level: Level, nodes: Vec<TopicId>, values: Vec<T>) -> Result<Self, EmbeddingError> {
        let n = nodes.len();
        if n == 0 {
            return Err(EmbeddingError::InvalidMatrix("no nodes".into()));
        }
        if values.len() != n * n {
            return Err(EmbeddingError::InvalidMatrix(format!(
                "{} values for {n} nodes",
                values.len()
            )));
        }
        let index: HashMap<TopicId, usize> =
            nodes.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        if index.len() != n {
            return Err(EmbeddingError::InvalidMatrix("duplicate node".into()));
        }
        check_similarity(&values, n).map_err(EmbeddingError::InvalidMatrix)?;
        Ok(SimilarityMatrix {
            level,
            nodes,
            index,
            values,
        })
    }

    pub fn identity(level: Level, nodes: Vec<TopicId>) -> Result<Self, EmbeddingError> {
        let n = nodes.len();
        let values = (0..n * n)
            .map(|k| if k / n == k % n { T::one() } else { T::zero() })
            .collect();
        Self::new(level, nodes, values)
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn nodes(&self) -> &[TopicId] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, topic: &TopicId) -> Option<usize> {
        self.index.get(topic).copied()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.nodes.len() + j]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Sub-matrix over `topics`, in the given order. `Err` carries the first
    /// topic that is not a node of the matrix.
    pub fn restrict(&self, topics: &[TopicId]) -> Result<Vec<T>, TopicId> {
        let idx: Vec<usize> = topics
            .iter()
            .map(|t| self.index_of(t).ok_or_else(|| t.clone()))
            .collect::<Result<_, _>>()?;
        Ok(idx
            .iter()
            .flat_map(|&i| idx.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect())
    }
}

/// Symmetry, unit diagonal and `[0, 1]` range of a row-major `n × n` matrix.
pub(crate) fn check_similarity<T: Scalar>(values: &[T], n: usize) -> Result<(), String> {
    for i in 0..n {
        if values[i * n + i] != T::one() {
            return Err(format!("diagonal entry {i} is {}", values[i * n + i]));
        }
        for j in 0..n {
            let v = values[i * n + j];
            if !(v >= T::zero() && v <= T::one()) {
                return Err(format!("entry ({i}, {j}) = {v} outside [0, 1]"));
            }
            if (v - values[j * n + i]).abs() > T::SUM_TOLERANCE {
                return Err(format!("entries ({i}, {j}) and ({j}, {i}) differ"));
            }
        }
    }
    Ok(())
}

/// Unclamped cosine matrix (entries in `[-1, 1]`, unit diagonal), row-major.
pub fn raw_cosine_matrix<T: Scalar>(emb: &EmbeddingMatrix<T>) -> Result<Vec<T>, EmbeddingError> {
    let n = emb.len();
    let norms: Vec<T> = (0..n)
        .map(|i| {
            let v = emb.vector(i);
            let norm = v.iter().map(|&x| x * x).sum::<T>().sqrt();
            if norm > T::zero() && norm.is_finite() {
                Ok(norm)
            } else {
                Err(EmbeddingError::ZeroVector(emb.nodes[i].clone()))
            }
        })
        .collect::<Result<_, _>>()?;

    let mut values = vec![T::zero(); n * n];
    for i in 0..n {
        values[i * n + i] = T::one();
        for j in i + 1..n {
            let dot = emb
                .vector(i)
                .iter()
                .zip(emb.vector(j))
                .fold(T::zero(), |acc, (&a, &b)| acc + a * b);
            let c = (dot / (norms[i] * norms[j])).max(-T::one()).min(T::one());
            values[i * n + j] = c;
            values[j * n + i] = c;
        }
    }
    Ok(values)
}

/// Cosine similarities with negative values clamped to zero and an exact unit
/// diagonal.
pub fn cosine_similarity_matrix<T: Scalar>(
    emb: &EmbeddingMatrix<T>,
) -> Result<SimilarityMatrix<T>, EmbeddingError> {
    let values = raw_cosine_matrix(emb)?
        .into_iter()
        .map(|v| v.max(T::zero()))
        .collect();
    SimilarityMatrix::new(emb.level, emb.nodes.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn emb(vectors: &[&[f64]]) -> EmbeddingMatrix<f64> {
        let nodes = (0..vectors.len())
            .map(|i| TopicId::new(Level::Macro, &(i + 1).to_string()).unwrap())
            .collect();
        let dims = vectors[0].len();
        EmbeddingMatrix::new(Level::Macro, nodes, dims, vectors.concat()).unwrap()
    }

    #[test]
    fn cosine_examples() {
        let s = cosine_similarity_matrix(&emb(&[&[1.0, 2.0], &[2.0, 4.0], &[-2.0, 1.0]])).unwrap();
        assert!((s.get(0, 1) - 1.0).abs() < 1e-15);
        assert_eq!(s.get(0, 2), 0.0);
        assert_eq!(s.get(1, 1), 1.0);
    }

    #[test]
    fn negative_cosines_are_clamped() {
        // cos = -0.3 between the two vectors.
        let a = [1.0, 0.0];
        let b = [-0.3, (1.0f64 - 0.09).sqrt()];
        let m = emb(&[&a, &b]);
        let raw = raw_cosine_matrix(&m).unwrap();
        assert!((raw[1] + 0.3).abs() < 1e-12);
        let s = cosine_similarity_matrix(&m).unwrap();
        assert_eq!(s.get(0, 1), 0.0);
        assert_eq!(s.get(1, 0), 0.0);
    }

    #[test]
    fn zero_vector_names_the_node() {
        let err = cosine_similarity_matrix(&emb(&[&[1.0, 0.0], &[0.0, 0.0]])).unwrap_err();
        match err {
            EmbeddingError::ZeroVector(t) => assert_eq!(t.code(), "2"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn validation_rejects_bad_matrices() {
        let nodes = vec![
            TopicId::new(Level::Macro, "1").unwrap(),
            TopicId::new(Level::Macro, "2").unwrap(),
        ];
        for values in [
            vec![1.0, 0.5, 0.4, 1.0],
            vec![0.9, 0.5, 0.5, 1.0],
            vec![1.0, -0.1, -0.1, 1.0],
            vec![1.0, 0.5, 0.5],
        ] {
            assert!(SimilarityMatrix::<f64>::new(Level::Macro, nodes.clone(), values).is_err());
        }
        let id = SimilarityMatrix::<f64>::identity(Level::Macro, nodes.clone()).unwrap();
        assert_eq!(id.restrict(&[nodes[1].clone()]).unwrap(), vec![1.0]);
        let stranger = TopicId::new(Level::Macro, "3").unwrap();
        assert_eq!(id.restrict(std::slice::from_ref(&stranger)), Err(stranger));
    }
}
