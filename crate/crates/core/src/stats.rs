//! Rank statistics for comparing journal groups and diversity levels:
//! Mann–Whitney–Wilcoxon, Spearman correlation, top-k overlap, and the
//! four-quadrant typology.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;

use statrs::function::erf::erfc;
use thiserror::Error;

use crate::diversity::JournalDiversityTable;
use crate::io::{csv_writer, fmt_num};
use crate::scalar::Scalar;
use crate::topic::Level;
use crate::Rational;

/// Largest group size for which exact p-values are enumerated.
pub const EXACT_MAX_GROUP: usize = 8;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("group {0} is empty")]
    EmptyGroup(&'static str),
    #[error("input contains NaN")]
    NotANumber,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} observations, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("{0} input is constant; rank correlation is undefined")]
    Constant(&'static str),
    #[error("k = {k} must be between 1 and {n}")]
    InvalidK { k: usize, n: usize },
    #[error("score maps cover different journals")]
    KeyMismatch,
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn check_finite<T: Scalar>(values: &[T]) -> Result<(), StatsError> {
    if values.iter().any(|v| v.is_nan()) {
        Err(StatsError::NotANumber)
    } else {
        Ok(())
    }
}

/// 1-based ranks; tied values share the average of their positions.
pub fn average_ranks<T: Scalar>(values: &[T]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start+1 ..= end share their mean.
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Sizes of the groups of tied values (only groups larger than one).
fn tie_groups<T: Scalar>(values: &[T]) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let mut groups = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        if j - i > 1 {
            groups.push(j - i);
        }
        i = j;
    }
    groups
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MwMethod {
    Exact,
    NormalApprox,
}

impl fmt::Display for MwMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MwMethod::Exact => "exact",
            MwMethod::NormalApprox => "normal_approx",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MWTestResult {
    /// U statistic of the first group: pairs (a, b) with a > b, ties
    /// counting one half.
    pub u: f64,
    pub z: f64,
    pub p_two_sided: f64,
    /// The exact p-value as a fraction when `method` is `Exact`.
    pub p_exact: Option<Rational>,
    pub n_a: usize,
    pub n_b: usize,
    pub method: MwMethod,
}

impl MWTestResult {
    /// U statistic of the second group; `u + u_b = n_a · n_b`.
    pub fn u_b(&self) -> f64 {
        (self.n_a * self.n_b) as f64 - self.u
    }
}

/// Number of ways to choose `n_a` of the ranks `1..=n_a+n_b` for each value of
/// U, indexed by U.
fn exact_u_distribution(n_a: usize, n_b: usize) -> Vec<u128> {
    let n = n_a + n_b;
    let max_sum = n * (n + 1) / 2;
    // ways[k][s]: subsets of size k with rank sum s.
    let mut ways = vec![vec![0u128; max_sum + 1]; n_a + 1];
    ways[0][0] = 1;
    for rank in 1..=n {
        for k in (1..=n_a.min(rank)).rev() {
            for s in (rank..=max_sum).rev() {
                ways[k][s] += ways[k - 1][s - rank];
            }
        }
    }
    let offset = n_a * (n_a + 1) / 2;
    (0..=n_a * n_b).map(|u| ways[n_a][u + offset]).collect()
}

/// Two-sided Mann–Whitney–Wilcoxon test.
///
/// Exact when both groups have at most [`EXACT_MAX_GROUP`] members and there
/// are no ties: `p = 2·min(P(U ≤ u), P(U ≥ u))`, capped at 1. Otherwise the
/// normal approximation with continuity correction and tie-corrected variance.
pub fn mann_whitney_two_sided<T: Scalar>(a: &[T], b: &[T]) -> Result<MWTestResult, StatsError> {
    if a.is_empty() {
        return Err(StatsError::EmptyGroup("a"));
    }
    if b.is_empty() {
        return Err(StatsError::EmptyGroup("b"));
    }
    check_finite(a)?;
    check_finite(b)?;
    let (n_a, n_b) = (a.len(), b.len());
    let n = n_a + n_b;
    let pooled: Vec<T> = a.iter().chain(b).copied().collect();
    let ranks = average_ranks(&pooled);
    let rank_sum_a: f64 = ranks[..n_a].iter().sum();
    let u = rank_sum_a - (n_a * (n_a + 1)) as f64 / 2.0;

    let ties = tie_groups(&pooled);
    let mean = (n_a * n_b) as f64 / 2.0;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>()
        / (n * (n - 1)) as f64;
    let variance = (n_a * n_b) as f64 / 12.0 * ((n + 1) as f64 - tie_term);
    let sd = variance.max(0.0).sqrt();
    let z = if sd > 0.0 {
        let dev = u - mean;
        dev.signum() * (dev.abs() - 0.5).max(0.0) / sd
    } else {
        0.0
    };

    if ties.is_empty() && n_a.max(n_b) <= EXACT_MAX_GROUP {
        let dist = exact_u_distribution(n_a, n_b);
        let total: u128 = dist.iter().sum();
        let u_int = u.round() as usize;
        let lower: u128 = dist[..=u_int].iter().sum();
        let upper: u128 = dist[u_int..].iter().sum();
        let p = Rational::new((2 * lower.min(upper)) as i128, total as i128)
            .min(Rational::from_integer(1));
        return Ok(MWTestResult {
            u,
            z,
            p_two_sided: *p.numer() as f64 / *p.denom() as f64,
            p_exact: Some(p),
            n_a,
            n_b,
            method: MwMethod::Exact,
        });
    }

    let p = if sd > 0.0 {
        erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0)
    } else {
        1.0
    };
    Ok(MWTestResult {
        u,
        z,
        p_two_sided: p,
        p_exact: None,
        n_a,
        n_b,
        method: MwMethod::NormalApprox,
    })
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

/// Spearman's rank correlation.
///
/// Without ties this is `1 − 6 Σd² / (n(n² − 1))`; with ties, the Pearson
/// correlation of the average ranks.
pub fn spearman_rho<T: Scalar>(x: &[T], y: &[T]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(StatsError::TooFew { needed: 2, got: x.len() });
    }
    check_finite(x)?;
    check_finite(y)?;
    if x.iter().all(|&v| v == x[0]) {
        return Err(StatsError::Constant("x"));
    }
    if y.iter().all(|&v| v == y[0]) {
        return Err(StatsError::Constant("y"));
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let rho = if tie_groups(x).is_empty() && tie_groups(y).is_empty() {
        let n = x.len() as u128;
        let d2: u128 = rx
            .iter()
            .zip(&ry)
            .map(|(&a, &b)| {
                let d = (a as i128 - b as i128).unsigned_abs();
                d * d
            })
            .sum();
        1.0 - (6 * d2) as f64 / (n * (n * n - 1)) as f64
    } else {
        pearson(&rx, &ry)
    };
    Ok(rho.clamp(-1.0, 1.0))
}

/// The `k` highest-scoring keys; ties at equal score go to the smaller key.
pub fn top_k<T: Scalar>(scores: &BTreeMap<String, T>, k: usize) -> Vec<&str> {
    let mut entries: Vec<(&str, T)> = scores.iter().map(|(j, &s)| (j.as_str(), s)).collect();
    entries.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.0.cmp(b.0))
    });
    entries.into_iter().take(k).map(|(j, _)| j).collect()
}

/// Size of the intersection of the top-`k` sets of two score maps over the
/// same journals.
pub fn top_k_overlap<T: Scalar>(
    scores_a: &BTreeMap<String, T>,
    scores_b: &BTreeMap<String, T>,
    k: usize,
) -> Result<usize, StatsError> {
    if !scores_a.keys().eq(scores_b.keys()) {
        return Err(StatsError::KeyMismatch);
    }
    let n = scores_a.len();
    if k == 0 || k > n {
        return Err(StatsError::InvalidK { k, n });
    }
    let a: BTreeSet<&str> = top_k(scores_a, k).into_iter().collect();
    Ok(top_k(scores_b, k).into_iter().filter(|j| a.contains(j)).count())
}

pub fn median<T: Scalar>(values: &[T]) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let m = sorted.len() / 2;
    Some(if sorted.len().is_multiple_of(2) {
        (sorted[m - 1] + sorted[m]) / T::lit(2.0)
    } else {
        sorted[m]
    })
}

pub fn mean<T: Scalar>(values: &[T]) -> Option<T> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().copied().sum::<T>() / T::from_count(values.len()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QuadrantLabel {
    HighMacroHighMeso,
    HighMacroLowMeso,
    LowMacroHighMeso,
    LowMacroLowMeso,
}

impl QuadrantLabel {
    /// `high` means at or above the threshold.
    pub fn classify<T: Scalar>(d_macro: T, d_meso: T, thresholds: (T, T)) -> Self {
        match (d_macro >= thresholds.0, d_meso >= thresholds.1) {
            (true, true) => QuadrantLabel::HighMacroHighMeso,
            (true, false) => QuadrantLabel::HighMacroLowMeso,
            (false, true) => QuadrantLabel::LowMacroHighMeso,
            (false, false) => QuadrantLabel::LowMacroLowMeso,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            QuadrantLabel::HighMacroHighMeso => "high_macro_high_meso",
            QuadrantLabel::HighMacroLowMeso => "high_macro_low_meso",
            QuadrantLabel::LowMacroHighMeso => "low_macro_high_meso",
            QuadrantLabel::LowMacroLowMeso => "low_macro_low_meso",
        }
    }
}

impl fmt::Display for QuadrantLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadrantAssignment<T> {
    /// (macro, meso) thresholds actually used.
    pub thresholds: (T, T),
    pub labels: BTreeMap<String, QuadrantLabel>,
}

/// Label every journal by (macro, meso) diversity.
///
/// Without explicit thresholds each axis uses the median over the
/// multidisciplinary journals, or over all journals when there are none.
pub fn quadrant_classify<T: Scalar>(
    table: &JournalDiversityTable<T>,
    thresholds: Option<(T, T)>,
) -> QuadrantAssignment<T> {
    let thresholds = thresholds.unwrap_or_else(|| {
        let multi: Vec<_> = table.rows.iter().filter(|r| r.is_multidisciplinary).collect();
        let basis: Vec<_> = if multi.is_empty() {
            table.rows.iter().collect()
        } else {
            multi
        };
        let axis = |level| {
            let v: Vec<T> = basis.iter().map(|r| r.get(level)).collect();
            median(&v).unwrap_or_else(T::zero)
        };
        (axis(Level::Macro), axis(Level::Meso))
    });
    let labels = table
        .rows
        .iter()
        .map(|r| {
            (
                r.journal_id.clone(),
                QuadrantLabel::classify(r.d_macro, r.d_meso, thresholds),
            )
        })
        .collect();
    QuadrantAssignment { thresholds, labels }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelComparison<T> {
    pub level: Level,
    pub multi_values: Vec<(String, T)>,
    pub other_values: Vec<(String, T)>,
    pub mean_multi: T,
    pub mean_other: T,
    pub median_multi: T,
    pub median_other: T,
    pub test: MWTestResult,
}

/// Multidisciplinary vs other journals, per level.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupCompareReport<T> {
    pub levels: Vec<LevelComparison<T>>,
}

pub const GROUP_STATS_COLUMNS: [&str; 11] = [
    "level",
    "n_multi",
    "n_other",
    "mean_multi",
    "mean_other",
    "median_multi",
    "median_other",
    "u",
    "z",
    "p_two_sided",
    "method",
];

pub fn group_compare_report<T: Scalar>(
    table: &JournalDiversityTable<T>,
) -> Result<GroupCompareReport<T>, StatsError> {
    let levels = Level::ALL
        .iter()
        .map(|&level| {
            let (multi, other): (Vec<_>, Vec<_>) =
                table.rows.iter().partition(|r| r.is_multidisciplinary);
            let multi_values: Vec<(String, T)> =
                multi.iter().map(|r| (r.journal_id.clone(), r.get(level))).collect();
            let other_values: Vec<(String, T)> =
                other.iter().map(|r| (r.journal_id.clone(), r.get(level))).collect();
            let mv: Vec<T> = multi_values.iter().map(|(_, v)| *v).collect();
            let ov: Vec<T> = other_values.iter().map(|(_, v)| *v).collect();
            if mv.is_empty() {
                return Err(StatsError::EmptyGroup("multidisciplinary"));
            }
            if ov.is_empty() {
                return Err(StatsError::EmptyGroup("other"));
            }
            let test = mann_whitney_two_sided(&mv, &ov)?;
            Ok(LevelComparison {
                level,
                mean_multi: mean(&mv).expect("non-empty"),
                mean_other: mean(&ov).expect("non-empty"),
                median_multi: median(&mv).expect("non-empty"),
                median_other: median(&ov).expect("non-empty"),
                multi_values,
                other_values,
                test,
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(GroupCompareReport { levels })
}

impl<T: Scalar> GroupCompareReport<T> {
    pub fn level(&self, level: Level) -> &LevelComparison<T> {
        self.levels
            .iter()
            .find(|c| c.level == level)
            .expect("report covers every level")
    }

    pub fn write_stats<W: Write>(&self, w: W) -> Result<(), StatsError> {
        let mut wtr = csv_writer(w);
        wtr.write_record(GROUP_STATS_COLUMNS)?;
        for c in &self.levels {
            wtr.write_record([
                c.level.as_str().to_string(),
                c.multi_values.len().to_string(),
                c.other_values.len().to_string(),
                fmt_num(c.mean_multi),
                fmt_num(c.mean_other),
                fmt_num(c.median_multi),
                fmt_num(c.median_other),
                fmt_num(c.test.u),
                fmt_num(c.test.z),
                fmt_num(c.test.p_two_sided),
                c.test.method.to_string(),
            ])?;
        }
        wtr.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Raw per-group values at one level (`group,journal_id,value`), for
    /// external distribution plots.
    pub fn write_values<W: Write>(&self, level: Level, w: W) -> Result<(), StatsError> {
        let c = self.level(level);
        let mut wtr = csv_writer(w);
        wtr.write_record(["group", "journal_id", "value"])?;
        for (group, values) in [("multidisciplinary", &c.multi_values), ("other", &c.other_values)] {
            for (j, v) in values {
                wtr.write_record([group, j.as_str(), &fmt_num(*v)])?;
            }
        }
        wtr.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Agreement between two levels' diversity rankings.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyRow {
    pub level_a: Level,
    pub level_b: Level,
    pub spearman_all: f64,
    /// `None` when the multidisciplinary subset is too small or constant.
    pub spearman_multi: Option<f64>,
    pub top_k: usize,
    pub overlap: usize,
}

pub const LEVEL_PAIRS: [(Level, Level); 3] = [
    (Level::Micro, Level::Meso),
    (Level::Micro, Level::Macro),
    (Level::Meso, Level::Macro),
];

/// Spearman correlations and top-`k` overlaps for the three level pairs.
/// `k` is capped at the number of journals.
pub fn consistency_report<T: Scalar>(
    table: &JournalDiversityTable<T>,
    k: usize,
) -> Result<Vec<ConsistencyRow>, StatsError> {
    let k = k.min(table.len());
    let scores = |level: Level| -> BTreeMap<String, T> {
        table
            .rows
            .iter()
            .map(|r| (r.journal_id.clone(), r.get(level)))
            .collect()
    };
    LEVEL_PAIRS
        .iter()
        .map(|&(a, b)| {
            let spearman_all = spearman_rho(&table.column(a), &table.column(b))?;
            let multi: Vec<_> = table.rows.iter().filter(|r| r.is_multidisciplinary).collect();
            let ma: Vec<T> = multi.iter().map(|r| r.get(a)).collect();
            let mb: Vec<T> = multi.iter().map(|r| r.get(b)).collect();
            Ok(ConsistencyRow {
                level_a: a,
                level_b: b,
                spearman_all,
                spearman_multi: spearman_rho(&ma, &mb).ok(),
                top_k: k,
                overlap: top_k_overlap(&scores(a), &scores(b), k)?,
            })
        })
        .collect()
}

pub fn write_consistency<W: Write>(rows: &[ConsistencyRow], w: W) -> Result<(), StatsError> {
    let mut wtr = csv_writer(w);
    wtr.write_record([
        "level_a",
        "level_b",
        "spearman_all",
        "spearman_multi",
        "top_k",
        "overlap",
    ])?;
    for r in rows {
        wtr.write_record([
            r.level_a.as_str().to_string(),
            r.level_b.as_str().to_string(),
            fmt_num(r.spearman_all),
            r.spearman_multi.map(fmt_num).unwrap_or_default(),
            r.top_k.to_string(),
            r.overlap.to_string(),
        ])?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_quadrants<T: Scalar, W: Write>(
    assignment: &QuadrantAssignment<T>,
    table: &JournalDiversityTable<T>,
    w: W,
) -> Result<(), StatsError> {
    let mut wtr = csv_writer(w);
    wtr.write_record(["journal_id", "d_macro", "d_meso", "is_multidisciplinary", "quadrant"])?;
    for r in &table.rows {
        let label = assignment.labels[&r.journal_id];
        wtr.write_record([
            r.journal_id.as_str(),
            &fmt_num(r.d_macro),
            &fmt_num(r.d_meso),
            if r.is_multidisciplinary { "true" } else { "false" },
            label.as_str(),
        ])?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diversity::DiversityRow;

    #[test]
    fn average_ranks_with_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 20.0, 5.0]), vec![2.0, 3.5, 3.5, 1.0]);
        assert_eq!(average_ranks(&[1.0f32; 3]), vec![2.0; 3]);
    }

    #[test]
    fn mann_whitney_separated_groups() {
        let r = mann_whitney_two_sided(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.method, MwMethod::Exact);
        assert_eq!(r.u, 0.0);
        assert_eq!(r.p_exact, Some(Rational::new(1, 10)));
        assert_eq!(r.p_two_sided, 0.1);
        assert_eq!(r.u + r.u_b(), 9.0);
    }

    #[test]
    fn mann_whitney_interleaved() {
        let r = mann_whitney_two_sided(&[1.0, 3.0], &[2.0, 4.0]).unwrap();
        assert_eq!(r.u, 1.0);
        // U over the 6 splits: {0, 1, 2, 2, 3, 4}; P(U ≤ 1) = 2/6.
        assert_eq!(r.p_exact, Some(Rational::new(2, 3)));
    }

    #[test]
    fn mann_whitney_all_ties() {
        let r = mann_whitney_two_sided(&[5.0, 5.0], &[5.0, 5.0]).unwrap();
        assert_eq!(r.method, MwMethod::NormalApprox);
        assert_eq!(r.z, 0.0);
        assert_eq!(r.p_two_sided, 1.0);
        assert_eq!(r.u, 2.0);
    }

    #[test]
    fn mann_whitney_large_groups_use_normal_approximation() {
        let a: Vec<f64> = (0..9).map(f64::from).collect();
        let b: Vec<f64> = (0..9).map(|i| f64::from(i) + 0.5).collect();
        let r = mann_whitney_two_sided(&a, &b).unwrap();
        assert_eq!(r.method, MwMethod::NormalApprox);
        assert!(r.p_exact.is_none());
        assert!(r.p_two_sided > 0.3 && r.p_two_sided <= 1.0);
    }

    #[test]
    fn mann_whitney_errors() {
        assert!(matches!(
            mann_whitney_two_sided::<f64>(&[], &[1.0]),
            Err(StatsError::EmptyGroup("a"))
        ));
        assert!(matches!(
            mann_whitney_two_sided(&[1.0], &[f64::NAN]),
            Err(StatsError::NotANumber)
        ));
    }

    #[test]
    fn exact_distribution_sums_to_binomial() {
        let d = exact_u_distribution(7, 7);
        assert_eq!(d.iter().sum::<u128>(), 3432);
        assert_eq!(d.len(), 50);
        // Symmetric about n_a·n_b/2.
        assert!(d.iter().eq(d.iter().rev()));
    }

    #[test]
    fn spearman_examples() {
        assert_eq!(spearman_rho(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap(), 1.0);
        assert_eq!(spearman_rho(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        let r = spearman_rho(&[1.0, 2.0, 3.0, 4.0], &[2.0, 1.0, 4.0, 3.0]).unwrap();
        assert!((r - 0.6).abs() < 1e-15);
    }

    #[test]
    fn spearman_errors() {
        assert!(matches!(
            spearman_rho(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(StatsError::Constant("x"))
        ));
        assert!(matches!(
            spearman_rho(&[1.0, 2.0], &[1.0]),
            Err(StatsError::LengthMismatch(2, 1))
        ));
        assert!(matches!(spearman_rho(&[1.0], &[1.0]), Err(StatsError::TooFew { .. })));
    }

    fn scores(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|&(j, s)| (j.to_string(), s)).collect()
    }

    #[test]
    fn top_k_examples() {
        let a = scores(&[("j1", 4.0), ("j2", 3.0), ("j3", 2.0), ("j4", 1.0)]);
        let b = scores(&[("j1", 1.0), ("j2", 4.0), ("j3", 3.0), ("j4", 2.0)]);
        assert_eq!(top_k_overlap(&a, &b, 2).unwrap(), 1);
        assert_eq!(top_k_overlap(&a, &a, 3).unwrap(), 3);
        let rev = scores(&[("j1", 1.0), ("j2", 2.0), ("j3", 3.0), ("j4", 4.0)]);
        assert_eq!(top_k_overlap(&a, &rev, 4).unwrap(), 4);
        assert_eq!(top_k_overlap(&a, &rev, 2).unwrap(), 0);
        assert!(matches!(top_k_overlap(&a, &b, 0), Err(StatsError::InvalidK { .. })));
        assert!(matches!(top_k_overlap(&a, &b, 5), Err(StatsError::InvalidK { .. })));
        let other = scores(&[("x", 1.0)]);
        assert!(matches!(top_k_overlap(&a, &other, 1), Err(StatsError::KeyMismatch)));
    }

    #[test]
    fn top_k_breaks_ties_by_id() {
        let s = scores(&[("b", 1.0), ("a", 1.0), ("c", 1.0)]);
        assert_eq!(top_k(&s, 2), vec!["a", "b"]);
    }

    fn row(id: &str, multi: bool, d_macro: f64, d_meso: f64) -> DiversityRow<f64> {
        DiversityRow {
            journal_id: id.into(),
            name: id.into(),
            is_multidisciplinary: multi,
            paper_count: 10,
            d_macro,
            d_meso,
            d_micro: d_meso,
        }
    }

    #[test]
    fn quadrant_rules() {
        let table = JournalDiversityTable {
            rows: vec![
                row("a", true, 1.9, 4.0),
                row("b", true, 1.0, 1.2),
                row("c", false, 1.5, 2.0),
                row("d", false, 1.6, 3.0),
            ],
        };
        let q = quadrant_classify(&table, Some((1.5, 3.0)));
        assert_eq!(q.labels["a"], QuadrantLabel::HighMacroHighMeso);
        assert_eq!(q.labels["b"], QuadrantLabel::LowMacroLowMeso);
        assert_eq!(q.labels["c"], QuadrantLabel::HighMacroLowMeso);
        assert_eq!(q.labels["d"], QuadrantLabel::HighMacroHighMeso);
        assert_eq!(q.labels.len(), 4);

        // Defaults: medians of the multidisciplinary journals a and b.
        let q = quadrant_classify(&table, None);
        assert_eq!(q.thresholds, (1.45, 2.6));
        assert_eq!(q.labels["c"], QuadrantLabel::HighMacroLowMeso);
    }

    #[test]
    fn group_report_requires_both_groups() {
        let table = JournalDiversityTable {
            rows: vec![row("a", false, 1.0, 1.0), row("b", false, 2.0, 2.0)],
        };
        assert!(matches!(
            group_compare_report(&table),
            Err(StatsError::EmptyGroup("multidisciplinary"))
        ));
        let table = JournalDiversityTable {
            rows: vec![
                row("a", true, 3.0, 3.0),
                row("b", false, 1.0, 1.0),
                row("c", false, 1.5, 1.2),
            ],
        };
        let report = group_compare_report(&table).unwrap();
        let macro_cmp = report.level(Level::Macro);
        assert_eq!(macro_cmp.multi_values.len(), 1);
        assert_eq!(macro_cmp.median_other, 1.25);
        let mut buf = Vec::new();
        report.write_stats(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 4);
    }
}
