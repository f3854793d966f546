//! Ranking of non-multidisciplinary journals by their distance to the ideal
//! point (1, 1) of the min–max normalized (macro, meso) diversity plane.

use std::cmp::Ordering;
use std::io::Write;

use thiserror::Error;

use crate::diversity::JournalDiversityTable;
use crate::io::{csv_writer, fmt_num};
use crate::scalar::Scalar;
use crate::topic::Level;

/// Default cut-off for [`distance_distribution`].
pub const DEFAULT_DISTANCE_THRESHOLD: f64 = 0.6;

#[derive(Debug, Error)]
pub enum DetectError {
    #[error("cannot normalize an empty sequence")]
    Empty,
    #[error("normalized coordinate {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("need at least 2 journals to normalize, got {0}")]
    TooFewJournals(usize),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Normalized<T> {
    pub values: Vec<T>,
    /// Set when every input was equal; all outputs are then 0.
    pub degenerate: bool,
}

/// `(x − min) / (max − min)`.
pub fn min_max_normalize<T: Scalar>(values: &[T]) -> Result<Normalized<T>, DetectError> {
    let (min, max) = values
        .iter()
        .fold(None, |acc: Option<(T, T)>, &v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
        .ok_or(DetectError::Empty)?;
    if max == min {
        return Ok(Normalized {
            values: vec![T::zero(); values.len()],
            degenerate: true,
        });
    }
    let span = max - min;
    Ok(Normalized {
        // Clamp so rounding can never push a value past 1.
        values: values.iter().map(|&v| ((v - min) / span).min(T::one())).collect(),
        degenerate: false,
    })
}

/// Euclidean distance from `(x, y)` to `(1, 1)`.
pub fn distance_to_ideal<T: Scalar>(x: T, y: T) -> Result<T, DetectError> {
    for v in [x, y] {
        if !(v >= T::zero() && v <= T::one()) {
            return Err(DetectError::OutOfRange(v.as_f64()));
        }
    }
    let (dx, dy) = (T::one() - x, T::one() - y);
    Ok((dx * dx + dy * dy).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateRow<T> {
    pub journal_id: String,
    pub name: String,
    pub norm_macro: T,
    pub norm_meso: T,
    pub distance: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateRanking<T> {
    /// Ascending by distance, ties by journal id.
    pub rows: Vec<CandidateRow<T>>,
    pub degenerate_macro: bool,
    pub degenerate_meso: bool,
}

/// Normalized coordinates and distance of every journal, in table order.
fn all_distances<T: Scalar>(
    table: &JournalDiversityTable<T>,
) -> Result<(Vec<CandidateRow<T>>, bool, bool), DetectError> {
    if table.len() < 2 {
        return Err(DetectError::TooFewJournals(table.len()));
    }
    let x = min_max_normalize(&table.column(Level::Macro))?;
    let y = min_max_normalize(&table.column(Level::Meso))?;
    let rows = table
        .rows
        .iter()
        .zip(x.values.iter().zip(&y.values))
        .map(|(r, (&nx, &ny))| {
            Ok(CandidateRow {
                journal_id: r.journal_id.clone(),
                name: r.name.clone(),
                norm_macro: nx,
                norm_meso: ny,
                distance: distance_to_ideal(nx, ny)?,
            })
        })
        .collect::<Result<_, DetectError>>()?;
    Ok((rows, x.degenerate, y.degenerate))
}

fn by_distance<T: Scalar>(a: &CandidateRow<T>, b: &CandidateRow<T>) -> Ordering {
    a.distance
        .partial_cmp(&b.distance)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.journal_id.cmp(&b.journal_id))
}

/// Non-multidisciplinary journals closest to the ideal point.
///
/// Normalization spans all journals, so (1, 1) is the global maximum on both
/// axes. A degenerate axis is flagged but still ranked.
pub fn rank_potential_multidisciplinary<T: Scalar>(
    table: &JournalDiversityTable<T>,
    top_n: usize,
) -> Result<CandidateRanking<T>, DetectError> {
    let (rows, degenerate_macro, degenerate_meso) = all_distances(table)?;
    let mut rows: Vec<_> = rows
        .into_iter()
        .zip(&table.rows)
        .filter(|(_, r)| !r.is_multidisciplinary)
        .map(|(c, _)| c)
        .collect();
    rows.sort_by(by_distance);
    rows.truncate(top_n);
    Ok(CandidateRanking {
        rows,
        degenerate_macro,
        degenerate_meso,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceDistribution<T> {
    pub distances: Vec<T>,
    pub threshold: T,
    /// Share of distances strictly above `threshold`; 0 when empty.
    pub fraction_above: f64,
}

impl<T: Scalar> DistanceDistribution<T> {
    pub fn from_distances(mut distances: Vec<T>, threshold: T) -> Self {
        distances.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        let above = distances.iter().filter(|&&d| d > threshold).count();
        let fraction_above = if distances.is_empty() {
            0.0
        } else {
            above as f64 / distances.len() as f64
        };
        DistanceDistribution {
            distances,
            threshold,
            fraction_above,
        }
    }
}

/// Sorted distances of all non-multidisciplinary journals.
pub fn distance_distribution<T: Scalar>(
    table: &JournalDiversityTable<T>,
    threshold: T,
) -> Result<DistanceDistribution<T>, DetectError> {
    if table.rows.iter().all(|r| r.is_multidisciplinary) {
        return Ok(DistanceDistribution::from_distances(Vec::new(), threshold));
    }
    let (rows, _, _) = all_distances(table)?;
    let distances = rows
        .iter()
        .zip(&table.rows)
        .filter(|(_, r)| !r.is_multidisciplinary)
        .map(|(c, _)| c.distance)
        .collect();
    Ok(DistanceDistribution::from_distances(distances, threshold))
}

pub const CANDIDATE_COLUMNS: [&str; 6] =
    ["rank", "journal_id", "name", "norm_macro", "norm_meso", "distance"];

impl<T: Scalar> CandidateRanking<T> {
    pub fn write_to<W: Write>(&self, w: W) -> Result<(), DetectError> {
        let mut wtr = csv_writer(w);
        wtr.write_record(CANDIDATE_COLUMNS)?;
        for (i, r) in self.rows.iter().enumerate() {
            wtr.write_record([
                (i + 1).to_string(),
                r.journal_id.clone(),
                r.name.clone(),
                fmt_num(r.norm_macro),
                fmt_num(r.norm_meso),
                fmt_num(r.distance),
            ])?;
        }
        wtr.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

impl<T: Scalar> DistanceDistribution<T> {
    pub fn write_to<W: Write>(&self, w: W) -> Result<(), DetectError> {
        let mut wtr = csv_writer(w);
        wtr.write_record(["index", "distance"])?;
        for (i, &d) in self.distances.iter().enumerate() {
            wtr.write_record([i.to_string(), fmt_num(d)])?;
        }
        wtr.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diversity::DiversityRow;

    #[test]
    fn normalize_examples() {
        assert_eq!(min_max_normalize(&[1.0, 2.0, 3.0]).unwrap().values, vec![0.0, 0.5, 1.0]);
        let flat = min_max_normalize(&[7.0, 7.0, 7.0]).unwrap();
        assert_eq!(flat.values, vec![0.0; 3]);
        assert!(flat.degenerate);
        assert_eq!(min_max_normalize(&[-1.0f32, 1.0]).unwrap().values, vec![0.0, 1.0]);
        assert!(matches!(min_max_normalize::<f64>(&[]), Err(DetectError::Empty)));
    }

    #[test]
    fn distance_examples() {
        assert_eq!(distance_to_ideal(1.0, 1.0).unwrap(), 0.0);
        assert_eq!(distance_to_ideal(0.0, 0.0).unwrap(), std::f64::consts::SQRT_2);
        assert_eq!(distance_to_ideal(0.5, 1.0).unwrap(), 0.5);
        assert!(distance_to_ideal(1.1, 0.0).is_err());
        assert!(distance_to_ideal(f64::NAN, 0.0).is_err());
    }

    fn row(id: &str, multi: bool, d_macro: f64, d_meso: f64) -> DiversityRow<f64> {
        DiversityRow {
            journal_id: id.into(),
            name: format!("Journal {id}"),
            is_multidisciplinary: multi,
            paper_count: 10,
            d_macro,
            d_meso,
            d_micro: d_meso,
        }
    }

    #[test]
    fn ranking_excludes_multidisciplinary_and_sorts() {
        let table = JournalDiversityTable {
            rows: vec![
                row("m1", true, 3.0, 3.0),
                row("s1", false, 1.0, 1.0),
                row("broad", false, 3.0, 3.0),
                row("s2", false, 2.0, 2.0),
            ],
        };
        let ranking = rank_potential_multidisciplinary(&table, 10).unwrap();
        let ids: Vec<_> = ranking.rows.iter().map(|r| r.journal_id.as_str()).collect();
        assert_eq!(ids, ["broad", "s2", "s1"]);
        assert_eq!(ranking.rows[0].distance, 0.0);
        assert!(!ranking.degenerate_macro);
        let top1 = rank_potential_multidisciplinary(&table, 1).unwrap();
        assert_eq!(top1.rows.len(), 1);
    }

    #[test]
    fn ties_break_by_id_and_degenerate_axes_are_flagged() {
        let table = JournalDiversityTable {
            rows: vec![
                row("c", false, 2.0, 2.0),
                row("a", false, 2.0, 2.0),
                row("b", false, 2.0, 2.0),
            ],
        };
        let ranking = rank_potential_multidisciplinary(&table, 10).unwrap();
        let ids: Vec<_> = ranking.rows.iter().map(|r| r.journal_id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
        assert!(ranking.degenerate_macro && ranking.degenerate_meso);
        assert!(rank_potential_multidisciplinary(
            &JournalDiversityTable { rows: vec![row("a", false, 1.0, 1.0)] },
            1
        )
        .is_err());
    }

    #[test]
    fn distribution_fraction() {
        let d = DistanceDistribution::from_distances(vec![0.9, 0.2, 0.7], 0.6);
        assert_eq!(d.distances, vec![0.2, 0.7, 0.9]);
        assert!((d.fraction_above - 2.0 / 3.0).abs() < 1e-15);
        let empty = DistanceDistribution::<f64>::from_distances(vec![], 0.6);
        assert_eq!(empty.fraction_above, 0.0);

        let only_multi = JournalDiversityTable { rows: vec![row("m", true, 1.0, 2.0)] };
        let d = distance_distribution(&only_multi, 0.6).unwrap();
        assert!(d.distances.is_empty());
    }
}
