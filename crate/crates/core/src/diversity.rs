//! Leinster–Cobbold similarity-sensitive diversity and the per-journal table.
//!
//! For shares `p` and similarity `S` the diversity of order `q` is
//!
//! ```text
//! D_q = ( Σ_i p_i (Sp)_i^(q-1) )^(1/(1-q))      q ≠ 1
//! D_1 = Π_i (Sp)_i^(-p_i)
//! D_2 = 1 / Σ_ij S_ij p_i p_j
//! ```
//!
//! with sums over fields with `p_i > 0`. `D` is an effective number of
//! fields: `1 ≤ D ≤ n`.

use std::io::{Read, Write};

use num_traits::Num;
use rayon::prelude::*;
use thiserror::Error;

use crate::discipline_graph::{build_journal_profiles, JournalProfile};
use crate::embedding::SimilarityMatrix;
use crate::ingest::Corpus;
use crate::io::{csv_reader, csv_writer, fmt_num};
use crate::scalar::Scalar;
use crate::topic::{Level, TopicId};

#[derive(Debug, Error)]
pub enum DiversityError {
    #[error("no fields")]
    Empty,
    #[error("{shares} shares but {values} similarity entries")]
    ShapeMismatch { shares: usize, values: usize },
    #[error("share {index} is {value}; shares must be finite and non-negative")]
    InvalidShare { index: usize, value: f64 },
    #[error("shares sum to {sum}, not 1")]
    SharesNotNormalized { sum: f64 },
    #[error("invalid similarity matrix: {0}")]
    InvalidSimilarity(String),
    #[error("order q = {0} must be finite and non-negative")]
    InvalidOrder(f64),
    #[error("journal {journal}: topic {topic} is missing from the {level} similarity matrix")]
    MissingTopic {
        journal: String,
        topic: TopicId,
        level: Level,
    },
    #[error("expected a {expected} similarity matrix, got {found}")]
    LevelMismatch { expected: Level, found: Level },
    #[error("journal {0} has no profile at every level")]
    IncompleteProfiles(String),
    #[error("diversity table: {0}")]
    Csv(#[from] csv::Error),
    #[error("diversity table: {0}")]
    Parse(String),
}

/// Validated arguments of [`lc_div`].
#[derive(Debug, Clone, Copy)]
pub struct DiversityInput<'a, T> {
    shares: &'a [T],
    similarity: &'a [T],
    order: T,
}

impl<'a, T: Scalar> DiversityInput<'a, T> {
    /// `similarity` is row-major `n × n`, aligned with `shares`.
    pub fn new(shares: &'a [T], similarity: &'a [T], order: T) -> Result<Self, DiversityError> {
        let n = shares.len();
        if n == 0 {
            return Err(DiversityError::Empty);
        }
        if similarity.len() != n * n {
            return Err(DiversityError::ShapeMismatch {
                shares: n,
                values: similarity.len(),
            });
        }
        if let Some((index, &value)) = shares
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && **p >= T::zero()))
        {
            return Err(DiversityError::InvalidShare { index, value: value.as_f64() });
        }
        let sum: T = shares.iter().copied().sum();
        if (sum - T::one()).abs() > T::SUM_TOLERANCE {
            return Err(DiversityError::SharesNotNormalized { sum: sum.as_f64() });
        }
        crate::embedding::check_similarity(similarity, n).map_err(DiversityError::InvalidSimilarity)?;
        if !(order.is_finite() && order >= T::zero()) {
            return Err(DiversityError::InvalidOrder(order.as_f64()));
        }
        Ok(DiversityInput {
            shares,
            similarity,
            order,
        })
    }

    pub fn len(&self) -> usize {
        self.shares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shares.is_empty()
    }
}

/// Unevaluated sum `hi + lo` carrying about twice the working precision.
#[derive(Debug, Clone, Copy)]
struct DoubleWord<T> {
    hi: T,
    lo: T,
}

impl<T: Scalar> DoubleWord<T> {
    fn zero() -> Self {
        DoubleWord {
            hi: T::zero(),
            lo: T::zero(),
        }
    }

    /// Renormalize assuming `|a| >= |b|` or `a == 0`.
    fn fast(a: T, b: T) -> Self {
        let hi = a + b;
        DoubleWord { hi, lo: b - (hi - a) }
    }

    fn two_sum(a: T, b: T) -> (T, T) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    fn add(self, x: T) -> Self {
        let (s, e) = Self::two_sum(self.hi, x);
        Self::fast(s, e + self.lo)
    }

    fn add_dw(self, o: Self) -> Self {
        let (s, e) = Self::two_sum(self.hi, o.hi);
        Self::fast(s, e + self.lo + o.lo)
    }

    fn add_product(self, a: T, b: T) -> Self {
        let p = a * b;
        self.add_dw(DoubleWord { hi: p, lo: a.mul_add(b, -p) })
    }

    fn scale(self, a: T) -> Self {
        let p = self.hi * a;
        Self::fast(p, self.hi.mul_add(a, -p) + self.lo * a)
    }

    fn mul(self, o: Self) -> Self {
        let p = self.hi * o.hi;
        Self::fast(p, self.hi.mul_add(o.hi, -p) + self.hi * o.lo + self.lo * o.hi)
    }

    fn div(self, o: Self) -> T {
        let q1 = self.hi / o.hi;
        let back = o.scale(q1);
        let r = self.add_dw(DoubleWord { hi: -back.hi, lo: -back.lo });
        q1 + r.hi / o.hi
    }
}

/// Similarity-sensitive diversity of order `q`.
pub fn lc_div<T: Scalar>(input: &DiversityInput<'_, T>) -> T {
    let n = input.shares.len();
    let p = input.shares;
    let s = input.similarity;
    let support: Vec<usize> = (0..n).filter(|&i| p[i] > T::zero()).collect();
    let q = input.order;

    if q == T::lit(2.0) {
        // (Σp)² / pᵀSp in double-word arithmetic: the result is correctly
        // rounded in practice, so uniform shares over the identity give
        // exactly n and an all-ones matrix gives exactly 1.
        let mut total = DoubleWord::zero();
        let mut quad = DoubleWord::zero();
        for &i in &support {
            let row = &s[i * n..(i + 1) * n];
            let mut z = DoubleWord::zero();
            for &j in &support {
                z = z.add_product(row[j], p[j]);
            }
            total = total.add(p[i]);
            quad = quad.add_dw(z.scale(p[i]));
        }
        return total.mul(total).div(quad);
    }

    // (Sp)_i ≥ p_i > 0 on the support because the diagonal is 1.
    let ordinariness = |i: usize| -> T {
        let row = &s[i * n..(i + 1) * n];
        support.iter().fold(T::zero(), |acc, &j| acc + row[j] * p[j])
    };
    if q == T::one() {
        let log_mean: T = support.iter().map(|&i| p[i] * ordinariness(i).ln()).sum();
        (-log_mean).exp()
    } else {
        let power_mean: T = support
            .iter()
            .map(|&i| p[i] * ordinariness(i).powf(q - T::one()))
            .sum();
        power_mean.powf(T::one() / (T::one() - q))
    }
}

/// Order-2 diversity in any exact numeric type (e.g. rationals):
/// `1 / Σ_ij S_ij p_i p_j`. No validation is performed.
pub fn lc_div_order2_exact<T: Num + Clone>(shares: &[T], similarity: &[T]) -> T {
    let n = shares.len();
    let mut quad = T::zero();
    for i in 0..n {
        for j in 0..n {
            quad = quad + similarity[i * n + j].clone() * shares[i].clone() * shares[j].clone();
        }
    }
    T::one() / quad
}

/// Diversity of one journal's profile against a similarity matrix of the same
/// level. Shares are renormalized once after restriction.
pub fn journal_diversity<T: Scalar>(
    profile: &JournalProfile,
    similarity: &SimilarityMatrix<T>,
    order: T,
) -> Result<T, DiversityError> {
    if profile.level != similarity.level() {
        return Err(DiversityError::LevelMismatch {
            expected: profile.level,
            found: similarity.level(),
        });
    }
    let shares = profile.shares::<T>();
    if shares.is_empty() {
        return Err(DiversityError::Empty);
    }
    let topics: Vec<TopicId> = shares.iter().map(|(t, _)| t.clone()).collect();
    let sub = similarity
        .restrict(&topics)
        .map_err(|topic| DiversityError::MissingTopic {
            journal: profile.journal_id.clone(),
            topic,
            level: profile.level,
        })?;
    let total: T = shares.iter().map(|(_, s)| *s).sum();
    let p: Vec<T> = shares.iter().map(|(_, s)| *s / total).collect();
    Ok(lc_div(&DiversityInput::new(&p, &sub, order)?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiversityRow<T> {
    pub journal_id: String,
    pub name: String,
    pub is_multidisciplinary: bool,
    pub paper_count: u64,
    pub d_macro: T,
    pub d_meso: T,
    pub d_micro: T,
}

impl<T: Scalar> DiversityRow<T> {
    pub fn get(&self, level: Level) -> T {
        match level {
            Level::Macro => self.d_macro,
            Level::Meso => self.d_meso,
            Level::Micro => self.d_micro,
        }
    }
}

/// One row per publishing journal, in journal-id order.
#[derive(Debug, Clone, PartialEq)]
pub struct JournalDiversityTable<T> {
    pub rows: Vec<DiversityRow<T>>,
}

pub const TABLE_COLUMNS: [&str; 7] = [
    "journal_id",
    "name",
    "is_multidisciplinary",
    "paper_count",
    "d_macro",
    "d_meso",
    "d_micro",
];

impl<T: Scalar> JournalDiversityTable<T> {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, level: Level) -> Vec<T> {
        self.rows.iter().map(|r| r.get(level)).collect()
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<(), DiversityError> {
        let mut wtr = csv_writer(w);
        wtr.write_record(TABLE_COLUMNS)?;
        for r in &self.rows {
            wtr.write_record([
                r.journal_id.as_str(),
                r.name.as_str(),
                if r.is_multidisciplinary { "true" } else { "false" },
                &r.paper_count.to_string(),
                &fmt_num(r.d_macro),
                &fmt_num(r.d_meso),
                &fmt_num(r.d_micro),
            ])?;
        }
        wtr.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self, DiversityError> {
        let mut rdr = csv_reader(r, b',');
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if header != TABLE_COLUMNS {
            return Err(DiversityError::Parse(format!("unexpected header {header:?}")));
        }
        let num = |s: &str| -> Result<T, DiversityError> {
            s.parse::<T>()
                .map_err(|_| DiversityError::Parse(format!("bad number {s:?}")))
        };
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() != TABLE_COLUMNS.len() {
                return Err(DiversityError::Parse(format!("row with {} cells", rec.len())));
            }
            rows.push(DiversityRow {
                journal_id: rec[0].to_string(),
                name: rec[1].to_string(),
                is_multidisciplinary: match &rec[2] {
                    "true" => true,
                    "false" => false,
                    other => return Err(DiversityError::Parse(format!("bad flag {other:?}"))),
                },
                paper_count: rec[3]
                    .parse()
                    .map_err(|_| DiversityError::Parse(format!("bad count {:?}", &rec[3])))?,
                d_macro: num(&rec[4])?,
                d_meso: num(&rec[5])?,
                d_micro: num(&rec[6])?,
            });
        }
        Ok(JournalDiversityTable { rows })
    }
}

/// Diversity of every publishing journal at all three levels, each level
/// computed from its own profile and similarity matrix.
pub fn build_diversity_table<T: Scalar>(
    corpus: &Corpus,
    s_macro: &SimilarityMatrix<T>,
    s_meso: &SimilarityMatrix<T>,
    s_micro: &SimilarityMatrix<T>,
    order: T,
) -> Result<JournalDiversityTable<T>, DiversityError> {
    let matrices = [s_macro, s_meso, s_micro];
    for (level, s) in Level::ALL.into_iter().zip(matrices) {
        if s.level() != level {
            return Err(DiversityError::LevelMismatch {
                expected: level,
                found: s.level(),
            });
        }
    }
    let profiles: Vec<Vec<JournalProfile>> = Level::ALL
        .iter()
        .map(|&l| build_journal_profiles(corpus, l))
        .collect();

    let rows = (0..profiles[0].len())
        .into_par_iter()
        .map(|k| {
            let journal_id = &profiles[0][k].journal_id;
            if profiles.iter().any(|ps| ps.get(k).map(|p| &p.journal_id) != Some(journal_id)) {
                return Err(DiversityError::IncompleteProfiles(journal_id.clone()));
            }
            let d: Vec<T> = (0..3)
                .map(|l| journal_diversity(&profiles[l][k], matrices[l], order))
                .collect::<Result<_, _>>()?;
            let journal = corpus
                .journal(journal_id)
                .expect("papers only reference known journals");
            Ok(DiversityRow {
                journal_id: journal_id.clone(),
                name: journal.name.clone(),
                is_multidisciplinary: journal.is_multidisciplinary,
                paper_count: profiles[0][k].total(),
                d_macro: d[0],
                d_meso: d[1],
                d_micro: d[2],
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(JournalDiversityTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    #[test]
    fn order_two_is_exact_at_the_extremes() {
        for n in 1..=200usize {
            let p = vec![1.0 / n as f64; n];
            let id: Vec<f64> = (0..n * n).map(|k| if k / n == k % n { 1.0 } else { 0.0 }).collect();
            assert_eq!(lc_div(&DiversityInput::new(&p, &id, 2.0).unwrap()), n as f64);
            let ones = vec![1.0; n * n];
            assert_eq!(lc_div(&DiversityInput::new(&p, &ones, 2.0).unwrap()), 1.0);
        }
        let p = [0.1f32, 0.2, 0.3, 0.4];
        assert_eq!(lc_div(&DiversityInput::new(&p, &[1.0f32; 16], 2.0).unwrap()), 1.0);
    }

    fn div(p: &[f64], s: &[f64], q: f64) -> f64 {
        lc_div(&DiversityInput::new(p, s, q).unwrap())
    }

    fn identity(n: usize) -> Vec<f64> {
        (0..n * n).map(|k| if k / n == k % n { 1.0 } else { 0.0 }).collect()
    }

    #[test]
    fn single_field_is_one() {
        for q in [0.0, 0.5, 1.0, 2.0, 3.5] {
            assert_eq!(div(&[1.0], &[1.0], q), 1.0);
        }
    }

    #[test]
    fn identity_similarity_gives_inverse_simpson() {
        assert_eq!(div(&[0.25; 4], &identity(4), 2.0), 4.0);
        // Hill numbers of the uniform distribution equal n at every order.
        for q in [0.0, 0.5, 1.0, 3.0] {
            assert!((div(&[0.25; 4], &identity(4), q) - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn all_ones_similarity_gives_one() {
        let p = [0.1, 0.2, 0.3, 0.4];
        assert_eq!(div(&p, &[1.0; 16], 2.0), 1.0);
        assert!((div(&p, &[1.0; 16], 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_fields_half_similar() {
        // 1 / (0.25 + 0.25 + 2·0.5·0.25) = 4/3
        let d = div(&[0.5, 0.5], &[1.0, 0.5, 0.5, 1.0], 2.0);
        assert!((d - 4.0 / 3.0).abs() < 1e-15);

        let half = Rational::new(1, 2);
        let one = Rational::from_integer(1);
        let exact = lc_div_order2_exact(&[half, half], &[one, half, half, one]);
        assert_eq!(exact, Rational::new(4, 3));
    }

    #[test]
    fn zero_shares_are_ignored() {
        let p = [0.5, 0.0, 0.5];
        let d = div(&p, &identity(3), 1.0);
        assert!((d - 2.0).abs() < 1e-12);
        let d0 = div(&p, &identity(3), 0.0);
        assert!((d0 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn single_precision() {
        let d = lc_div(&DiversityInput::new(&[0.5f32, 0.5], &[1.0, 0.5, 0.5, 1.0], 2.0).unwrap());
        assert!((d - 4.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn input_validation() {
        let s = identity(2);
        assert!(matches!(
            DiversityInput::new(&[0.5, 0.6], &s, 2.0),
            Err(DiversityError::SharesNotNormalized { .. })
        ));
        assert!(matches!(
            DiversityInput::new(&[1.5, -0.5], &s, 2.0),
            Err(DiversityError::InvalidShare { index: 1, .. })
        ));
        assert!(matches!(
            DiversityInput::new(&[0.5, 0.5], &[1.0, 0.2, 0.3, 1.0], 2.0),
            Err(DiversityError::InvalidSimilarity(_))
        ));
        assert!(matches!(
            DiversityInput::new(&[0.5, 0.5], &[1.0, -0.2, -0.2, 1.0], 2.0),
            Err(DiversityError::InvalidSimilarity(_))
        ));
        assert!(matches!(
            DiversityInput::new(&[0.5, 0.5], &s, -1.0),
            Err(DiversityError::InvalidOrder(_))
        ));
        assert!(matches!(
            DiversityInput::new(&[0.5, 0.5], &[1.0; 3], 2.0),
            Err(DiversityError::ShapeMismatch { .. })
        ));
        assert!(matches!(DiversityInput::<f64>::new(&[], &[], 2.0), Err(DiversityError::Empty)));
    }

    fn meso(code: &str) -> TopicId {
        TopicId::new(Level::Meso, code).unwrap()
    }

    #[test]
    fn dominant_topic_journal_with_identity_similarity() {
        let profile = JournalProfile::from_counts(
            "J",
            Level::Meso,
            [(meso("6.238"), 5132), (meso("6.294"), 86), (meso("4.48"), 135)],
        );
        let nodes = vec![meso("4.48"), meso("6.238"), meso("6.294"), meso("7.1")];
        let s = SimilarityMatrix::<f64>::identity(Level::Meso, nodes.clone()).unwrap();
        let d = journal_diversity(&profile, &s, 2.0).unwrap();
        // Direct double sum with S = I: 1 / Σ p_i².
        let p = [5132.0 / 5353.0, 86.0 / 5353.0, 135.0 / 5353.0];
        let oracle = 1.0 / p.iter().map(|x| x * x).sum::<f64>();
        assert!((d - oracle).abs() < 1e-12);
        assert!((d - 1.086_923_342_883_95).abs() < 1e-12);

        let ones = SimilarityMatrix::<f64>::new(Level::Meso, nodes, vec![1.0; 16]).unwrap();
        assert_eq!(journal_diversity(&profile, &ones, 2.0).unwrap(), 1.0);
    }

    #[test]
    fn single_topic_journal_and_missing_topic() {
        let nodes = vec![meso("1.1"), meso("1.2")];
        let s = SimilarityMatrix::<f64>::identity(Level::Meso, nodes).unwrap();
        let single = JournalProfile::from_counts("J", Level::Meso, [(meso("1.2"), 40)]);
        assert_eq!(journal_diversity(&single, &s, 2.0).unwrap(), 1.0);

        let stray = JournalProfile::from_counts("K", Level::Meso, [(meso("9.9"), 1)]);
        match journal_diversity(&stray, &s, 2.0) {
            Err(DiversityError::MissingTopic { journal, topic, .. }) => {
                assert_eq!(journal, "K");
                assert_eq!(topic, meso("9.9"));
            }
            other => panic!("{other:?}"),
        }

        let macro_profile = JournalProfile::from_counts(
            "J",
            Level::Macro,
            [(TopicId::new(Level::Macro, "1").unwrap(), 1)],
        );
        assert!(matches!(
            journal_diversity(&macro_profile, &s, 2.0),
            Err(DiversityError::LevelMismatch { .. })
        ));
    }

    #[test]
    fn table_round_trip() {
        let table = JournalDiversityTable {
            rows: vec![
                DiversityRow {
                    journal_id: "J1".into(),
                    name: "Journal, with comma".into(),
                    is_multidisciplinary: true,
                    paper_count: 12,
                    d_macro: 1.5,
                    d_meso: 2.0 / 3.0 + 1.0,
                    d_micro: 3.25,
                },
                DiversityRow {
                    journal_id: "J2".into(),
                    name: "Plain".into(),
                    is_multidisciplinary: false,
                    paper_count: 1,
                    d_macro: 1.0,
                    d_meso: 1.0,
                    d_micro: 1.0,
                },
            ],
        };
        let mut buf = Vec::new();
        table.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            "journal_id,name,is_multidisciplinary,paper_count,d_macro,d_meso,d_micro\n"
        ));
        let back = JournalDiversityTable::<f64>::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, table);
    }
}
