//! Loading and validating papers, citations and journals.
//!
//! Rows that violate an invariant are dropped and tallied by reason; nothing is
//! repaired. The resulting [`Corpus`] is immutable.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::io::csv_reader;
use crate::topic::{Level, TopicId};

/// The category string that marks a journal as multidisciplinary.
pub const MULTIDISCIPLINARY_CATEGORY: &str = "Multidisciplinary Sciences";

pub const PAPER_COLUMNS: [&str; 6] = [
    "paper_id",
    "journal_id",
    "year",
    "macro_topic",
    "meso_topic",
    "micro_topic",
];
pub const CITATION_COLUMNS: [&str; 2] = ["citing_paper_id", "cited_paper_id"];
pub const JOURNAL_COLUMNS: [&str; 3] = ["journal_id", "name", "categories"];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Unreadable {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}: malformed header: {message}")]
    MalformedHeader { file: String, message: String },
    #[error("{file}: {source}")]
    Csv {
        file: String,
        #[source]
        source: csv::Error,
    },
    #[error("no valid papers after validation")]
    NoValidPapers,
}

/// Inclusive publication-year window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct YearWindow {
    pub start: i32,
    pub end: i32,
}

impl YearWindow {
    pub fn new(start: i32, end: i32) -> Self {
        YearWindow { start, end }
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.start..=self.end).contains(&year)
    }
}

impl Default for YearWindow {
    fn default() -> Self {
        YearWindow::new(2016, 2020)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadOptions {
    pub window: YearWindow,
    pub delimiter: u8,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            window: YearWindow::default(),
            delimiter: b',',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PaperRecord {
    pub paper_id: String,
    pub journal_id: String,
    pub year: i32,
    pub macro_topic: TopicId,
    pub meso_topic: TopicId,
    pub micro_topic: TopicId,
}

impl PaperRecord {
    pub fn topic(&self, level: Level) -> &TopicId {
        match level {
            Level::Macro => &self.macro_topic,
            Level::Meso => &self.meso_topic,
            Level::Micro => &self.micro_topic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JournalRecord {
    pub journal_id: String,
    pub name: String,
    pub categories: BTreeSet<String>,
    pub is_multidisciplinary: bool,
}

impl JournalRecord {
    /// Build a journal from its raw categories; `None` if no category
    /// survives trimming.
    pub fn new<I, S>(journal_id: &str, name: &str, categories: I) -> Option<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let categories: BTreeSet<String> = categories
            .into_iter()
            .map(|c| c.as_ref().trim().to_string())
            .filter(|c| !c.is_empty())
            .collect();
        if categories.is_empty() {
            return None;
        }
        let is_multidisciplinary = categories.contains(MULTIDISCIPLINARY_CATEGORY);
        Some(JournalRecord {
            journal_id: journal_id.trim().to_string(),
            name: name.trim().to_string(),
            categories,
            is_multidisciplinary,
        })
    }
}

/// A resolved citation; both ends index into [`Corpus::papers`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CitationEdge {
    pub citing: usize,
    pub cited: usize,
}

/// Topics observed at each level, plus the parent relation they imply.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Taxonomy {
    levels: [BTreeSet<TopicId>; 3],
}

impl Taxonomy {
    pub fn insert(&mut self, topic: TopicId) {
        self.levels[topic.level().index()].insert(topic);
    }

    pub fn topics(&self, level: Level) -> &BTreeSet<TopicId> {
        &self.levels[level.index()]
    }

    pub fn contains(&self, topic: &TopicId) -> bool {
        self.levels[topic.level().index()].contains(topic)
    }

    pub fn count(&self, level: Level) -> usize {
        self.levels[level.index()].len()
    }

    /// Label shown in exported maps. Codes double as labels since the input
    /// files carry no topic names.
    pub fn label(&self, topic: &TopicId) -> String {
        topic.code().to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RejectReason {
    MissingField,
    MissingLevel,
    BadTopicCode,
    InconsistentHierarchy,
    BadYear,
    YearOutOfWindow,
    UnknownJournal,
    DuplicateId,
    EmptyCategories,
    SelfCitation,
    Dangling,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::MissingField => "missing_field",
            RejectReason::MissingLevel => "missing_level",
            RejectReason::BadTopicCode => "bad_topic_code",
            RejectReason::InconsistentHierarchy => "inconsistent_hierarchy",
            RejectReason::BadYear => "bad_year",
            RejectReason::YearOutOfWindow => "year_out_of_window",
            RejectReason::UnknownJournal => "unknown_journal",
            RejectReason::DuplicateId => "duplicate_id",
            RejectReason::EmptyCategories => "empty_categories",
            RejectReason::SelfCitation => "self_citation",
            RejectReason::Dangling => "dangling",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Row accounting for one input file: `accepted + Σ rejected = input_rows`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FileTally {
    pub input_rows: usize,
    pub accepted: usize,
    pub rejected: BTreeMap<RejectReason, usize>,
}

impl FileTally {
    fn accept(&mut self) {
        self.input_rows += 1;
        self.accepted += 1;
    }

    fn reject(&mut self, reason: RejectReason) {
        self.input_rows += 1;
        *self.rejected.entry(reason).or_default() += 1;
    }

    pub fn rejected_total(&self) -> usize {
        self.rejected.values().sum()
    }

    pub fn count(&self, reason: RejectReason) -> usize {
        self.rejected.get(&reason).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tallies {
    pub papers: FileTally,
    pub citations: FileTally,
    pub journals: FileTally,
}

/// Unvalidated paper row. `None` marks a column that was absent or blank.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawPaper {
    pub paper_id: Option<String>,
    pub journal_id: Option<String>,
    pub year: Option<String>,
    pub topics: [Option<String>; 3],
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawCitation {
    pub citing: Option<String>,
    pub cited: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawJournal {
    pub journal_id: Option<String>,
    pub name: Option<String>,
    /// Semicolon-separated category list.
    pub categories: Option<String>,
}

/// Validated papers, citations and journals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    journals: Vec<JournalRecord>,
    journal_index: HashMap<String, usize>,
    papers: Vec<PaperRecord>,
    paper_index: HashMap<String, usize>,
    papers_by_journal: BTreeMap<String, Vec<usize>>,
    citations: Vec<CitationEdge>,
    taxonomy: Taxonomy,
    window: YearWindow,
    tallies: Tallies,
}

impl Corpus {
    /// Validate raw rows into a corpus. Journals are validated first, then
    /// papers (which must name a known journal), then citations (which must
    /// name two accepted papers).
    pub fn from_raw(
        journals: impl IntoIterator<Item = RawJournal>,
        papers: impl IntoIterator<Item = RawPaper>,
        citations: impl IntoIterator<Item = RawCitation>,
        window: YearWindow,
    ) -> Result<Corpus, IngestError> {
        let mut tallies = Tallies::default();

        let mut journal_list = Vec::new();
        let mut journal_index = HashMap::new();
        for raw in journals {
            match validate_journal(&raw, &journal_index) {
                Ok(j) => {
                    journal_index.insert(j.journal_id.clone(), journal_list.len());
                    journal_list.push(j);
                    tallies.journals.accept();
                }
                Err(reason) => tallies.journals.reject(reason),
            }
        }

        let mut paper_list = Vec::new();
        let mut paper_index = HashMap::new();
        let mut taxonomy = Taxonomy::default();
        for raw in papers {
            match validate_paper(&raw, window, &journal_index, &paper_index) {
                Ok(p) => {
                    for level in Level::ALL {
                        taxonomy.insert(p.topic(level).clone());
                    }
                    paper_index.insert(p.paper_id.clone(), paper_list.len());
                    paper_list.push(p);
                    tallies.papers.accept();
                }
                Err(reason) => tallies.papers.reject(reason),
            }
        }
        if paper_list.is_empty() {
            return Err(IngestError::NoValidPapers);
        }

        let mut citation_list = Vec::new();
        for raw in citations {
            match validate_citation(&raw, &paper_index) {
                Ok(edge) => {
                    citation_list.push(edge);
                    tallies.citations.accept();
                }
                Err(reason) => tallies.citations.reject(reason),
            }
        }

        // Journals are kept in id order regardless of file order.
        let mut order: Vec<usize> = (0..journal_list.len()).collect();
        order.sort_by(|&a, &b| journal_list[a].journal_id.cmp(&journal_list[b].journal_id));
        let journals: Vec<JournalRecord> =
            order.into_iter().map(|i| journal_list[i].clone()).collect();
        let journal_index = journals
            .iter()
            .enumerate()
            .map(|(i, j)| (j.journal_id.clone(), i))
            .collect();

        let mut papers_by_journal: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, p) in paper_list.iter().enumerate() {
            papers_by_journal.entry(p.journal_id.clone()).or_default().push(i);
        }

        Ok(Corpus {
            journals,
            journal_index,
            papers: paper_list,
            paper_index,
            papers_by_journal,
            citations: citation_list,
            taxonomy,
            window,
            tallies,
        })
    }

    /// Build from already-typed records (used by generators and tests). The
    /// same validation rules apply.
    pub fn from_records(
        journals: &[JournalRecord],
        papers: &[PaperRecord],
        citations: &[(String, String)],
        window: YearWindow,
    ) -> Result<Corpus, IngestError> {
        let raw_journals = journals.iter().map(|j| RawJournal {
            journal_id: Some(j.journal_id.clone()),
            name: Some(j.name.clone()),
            categories: Some(j.categories.iter().cloned().collect::<Vec<_>>().join(";")),
        });
        let raw_papers = papers.iter().map(|p| RawPaper {
            paper_id: Some(p.paper_id.clone()),
            journal_id: Some(p.journal_id.clone()),
            year: Some(p.year.to_string()),
            topics: [
                Some(p.macro_topic.code().to_string()),
                Some(p.meso_topic.code().to_string()),
                Some(p.micro_topic.code().to_string()),
            ],
        });
        let raw_citations = citations.iter().map(|(a, b)| RawCitation {
            citing: Some(a.clone()),
            cited: Some(b.clone()),
        });
        Corpus::from_raw(raw_journals, raw_papers, raw_citations, window)
    }

    pub fn journals(&self) -> &[JournalRecord] {
        &self.journals
    }

    pub fn journal(&self, journal_id: &str) -> Option<&JournalRecord> {
        self.journal_index.get(journal_id).map(|&i| &self.journals[i])
    }

    pub fn papers(&self) -> &[PaperRecord] {
        &self.papers
    }

    pub fn paper(&self, paper_id: &str) -> Option<&PaperRecord> {
        self.paper_index.get(paper_id).map(|&i| &self.papers[i])
    }

    /// Indices into [`Corpus::papers`] of a journal's papers, in file order.
    pub fn papers_of(&self, journal_id: &str) -> &[usize] {
        self.papers_by_journal
            .get(journal_id)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Journal ids with at least one accepted paper, ascending.
    pub fn publishing_journals(&self) -> impl Iterator<Item = &str> {
        self.papers_by_journal.keys().map(String::as_str)
    }

    pub fn citations(&self) -> &[CitationEdge] {
        &self.citations
    }

    pub fn taxonomy(&self) -> &Taxonomy {
        &self.taxonomy
    }

    pub fn window(&self) -> YearWindow {
        self.window
    }

    pub fn tallies(&self) -> &Tallies {
        &self.tallies
    }
}

fn present(field: &Option<String>) -> Option<&str> {
    field.as_deref().map(str::trim).filter(|s| !s.is_empty())
}

fn validate_journal(
    raw: &RawJournal,
    seen: &HashMap<String, usize>,
) -> Result<JournalRecord, RejectReason> {
    let id = present(&raw.journal_id).ok_or(RejectReason::MissingField)?;
    let name = present(&raw.name).ok_or(RejectReason::MissingField)?;
    if seen.contains_key(id) {
        return Err(RejectReason::DuplicateId);
    }
    let categories = raw.categories.as_deref().unwrap_or("");
    JournalRecord::new(id, name, categories.split(';')).ok_or(RejectReason::EmptyCategories)
}

fn validate_paper(
    raw: &RawPaper,
    window: YearWindow,
    journals: &HashMap<String, usize>,
    seen: &HashMap<String, usize>,
) -> Result<PaperRecord, RejectReason> {
    let paper_id = present(&raw.paper_id).ok_or(RejectReason::MissingField)?;
    let journal_id = present(&raw.journal_id).ok_or(RejectReason::MissingField)?;
    let year_text = present(&raw.year).ok_or(RejectReason::MissingField)?;

    let mut topics = Vec::with_capacity(3);
    for level in Level::ALL {
        let code = present(&raw.topics[level.index()]).ok_or(RejectReason::MissingLevel)?;
        topics.push(TopicId::new(level, code).map_err(|_| RejectReason::BadTopicCode)?);
    }
    let micro_topic = topics.pop().expect("three levels");
    let meso_topic = topics.pop().expect("three levels");
    let macro_topic = topics.pop().expect("three levels");
    if !macro_topic.is_prefix_of(&meso_topic) || !meso_topic.is_prefix_of(&micro_topic) {
        return Err(RejectReason::InconsistentHierarchy);
    }

    let year: i32 = year_text.parse().map_err(|_| RejectReason::BadYear)?;
    if !window.contains(year) {
        return Err(RejectReason::YearOutOfWindow);
    }
    if !journals.contains_key(journal_id) {
        return Err(RejectReason::UnknownJournal);
    }
    if seen.contains_key(paper_id) {
        return Err(RejectReason::DuplicateId);
    }
    Ok(PaperRecord {
        paper_id: paper_id.to_string(),
        journal_id: journal_id.to_string(),
        year,
        macro_topic,
        meso_topic,
        micro_topic,
    })
}

fn validate_citation(
    raw: &RawCitation,
    papers: &HashMap<String, usize>,
) -> Result<CitationEdge, RejectReason> {
    let citing = present(&raw.citing).ok_or(RejectReason::MissingField)?;
    let cited = present(&raw.cited).ok_or(RejectReason::MissingField)?;
    if citing == cited {
        return Err(RejectReason::SelfCitation);
    }
    match (papers.get(citing), papers.get(cited)) {
        (Some(&citing), Some(&cited)) => Ok(CitationEdge { citing, cited }),
        _ => Err(RejectReason::Dangling),
    }
}

/// Maps required column names to their positions in the header.
fn column_positions(
    file: &str,
    headers: &csv::StringRecord,
    required: &[&str],
) -> Result<Vec<usize>, IngestError> {
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        return Err(IngestError::MalformedHeader {
            file: file.to_string(),
            message: "empty header row".into(),
        });
    }
    required
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h.trim().eq_ignore_ascii_case(name))
                .ok_or_else(|| IngestError::MalformedHeader {
                    file: file.to_string(),
                    message: format!("missing column {name:?}"),
                })
        })
        .collect()
}

fn read_rows<R: Read, T>(
    file: &str,
    reader: R,
    delimiter: u8,
    required: &[&str],
    mut build: impl FnMut(&dyn Fn(usize) -> Option<String>) -> T,
) -> Result<Vec<T>, IngestError> {
    let mut rdr = csv_reader(reader, delimiter);
    let headers = rdr
        .headers()
        .map_err(|source| IngestError::Csv {
            file: file.to_string(),
            source,
        })?
        .clone();
    let positions = column_positions(file, &headers, required)?;
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|source| IngestError::Csv {
            file: file.to_string(),
            source,
        })?;
        let field = |k: usize| record.get(positions[k]).map(str::to_string);
        rows.push(build(&field));
    }
    Ok(rows)
}

pub fn read_papers<R: Read>(reader: R, delimiter: u8) -> Result<Vec<RawPaper>, IngestError> {
    read_rows("papers", reader, delimiter, &PAPER_COLUMNS, |f| RawPaper {
        paper_id: f(0),
        journal_id: f(1),
        year: f(2),
        topics: [f(3), f(4), f(5)],
    })
}

pub fn read_citations<R: Read>(
    reader: R,
    delimiter: u8,
) -> Result<Vec<RawCitation>, IngestError> {
    read_rows("citations", reader, delimiter, &CITATION_COLUMNS, |f| {
        RawCitation {
            citing: f(0),
            cited: f(1),
        }
    })
}

pub fn read_journals<R: Read>(reader: R, delimiter: u8) -> Result<Vec<RawJournal>, IngestError> {
    read_rows("journals", reader, delimiter, &JOURNAL_COLUMNS, |f| {
        RawJournal {
            journal_id: f(0),
            name: f(1),
            categories: f(2),
        }
    })
}

fn open(path: &Path) -> Result<BufReader<File>, IngestError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| IngestError::Unreadable {
            path: path.to_path_buf(),
            source,
        })
}

/// Load and validate the three input files. The files are parsed
/// concurrently; validation is sequential.
pub fn load_corpus(
    papers_path: &Path,
    citations_path: &Path,
    journals_path: &Path,
    options: LoadOptions,
) -> Result<Corpus, IngestError> {
    let d = options.delimiter;
    let (papers, (citations, journals)) = rayon::join(
        || open(papers_path).and_then(|r| read_papers(r, d)),
        || {
            rayon::join(
                || open(citations_path).and_then(|r| read_citations(r, d)),
                || open(journals_path).and_then(|r| read_journals(r, d)),
            )
        },
    );
    Corpus::from_raw(journals?, papers?, citations?, options.window)
}

/// Summary of a loaded corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub paper_count: usize,
    pub citation_count: usize,
    pub journal_count: usize,
    pub publishing_journal_count: usize,
    pub multidisciplinary_count: usize,
    pub topic_counts: BTreeMap<Level, usize>,
    pub tallies: Tallies,
}

pub fn validate_report(corpus: &Corpus) -> ValidationReport {
    ValidationReport {
        paper_count: corpus.papers().len(),
        citation_count: corpus.citations().len(),
        journal_count: corpus.journals().len(),
        publishing_journal_count: corpus.publishing_journals().count(),
        multidisciplinary_count: corpus
            .journals()
            .iter()
            .filter(|j| j.is_multidisciplinary)
            .count(),
        topic_counts: Level::ALL
            .iter()
            .map(|&l| (l, corpus.taxonomy().count(l)))
            .collect(),
        tallies: corpus.tallies().clone(),
    }
}

impl ValidationReport {
    /// `key: value` lines.
    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        write!(w, "{self}")
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "paper_count: {}", self.paper_count)?;
        writeln!(f, "citation_count: {}", self.citation_count)?;
        writeln!(f, "journal_count: {}", self.journal_count)?;
        writeln!(f, "publishing_journal_count: {}", self.publishing_journal_count)?;
        writeln!(f, "multidisciplinary_count: {}", self.multidisciplinary_count)?;
        for (level, n) in &self.topic_counts {
            writeln!(f, "topic_count.{level}: {n}")?;
        }
        for (name, tally) in [
            ("papers", &self.tallies.papers),
            ("citations", &self.tallies.citations),
            ("journals", &self.tallies.journals),
        ] {
            writeln!(f, "{name}.input_rows: {}", tally.input_rows)?;
            writeln!(f, "{name}.accepted: {}", tally.accepted)?;
            writeln!(f, "{name}.rejected: {}", tally.rejected_total())?;
            for (reason, n) in &tally.rejected {
                writeln!(f, "{name}.rejected.{reason}: {n}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const JOURNALS: &str = "journal_id,name,categories\n\
        J1,Journal One,Multidisciplinary Sciences\n\
        J2,Journal Two,Physics; Chemistry\n";
    const PAPERS: &str = "paper_id,journal_id,year,macro_topic,meso_topic,micro_topic\n\
        P1,J1,2016,1,1.1,1.1.1\n\
        P2,J1,2018,2,2.3,2.3.4\n\
        P3,J2,2020,1,1.1,1.1.2\n";
    const CITATIONS: &str = "citing_paper_id,cited_paper_id\nP1,P2\nP3,P1\n";

    fn load(journals: &str, papers: &str, citations: &str) -> Result<Corpus, IngestError> {
        Corpus::from_raw(
            read_journals(journals.as_bytes(), b',')?,
            read_papers(papers.as_bytes(), b',')?,
            read_citations(citations.as_bytes(), b',')?,
            YearWindow::default(),
        )
    }

    #[test]
    fn well_formed_inputs_load_without_rejects() {
        let c = load(JOURNALS, PAPERS, CITATIONS).unwrap();
        assert_eq!(
            (c.papers().len(), c.citations().len(), c.journals().len()),
            (3, 2, 2)
        );
        let t = c.tallies();
        assert_eq!(
            t.papers.rejected_total() + t.citations.rejected_total() + t.journals.rejected_total(),
            0
        );
        assert!(c.journal("J1").unwrap().is_multidisciplinary);
        let j2 = c.journal("J2").unwrap();
        assert!(!j2.is_multidisciplinary);
        assert_eq!(j2.categories.len(), 2);
        assert!(j2.categories.contains("Chemistry"));
    }

    #[test]
    fn missing_micro_topic_is_rejected() {
        let papers = format!("{PAPERS}P4,J2,2019,1,1.1,\nP5,J2,2019,1,1.1\n");
        let c = load(JOURNALS, &papers, CITATIONS).unwrap();
        assert_eq!(c.papers().len(), 3);
        assert_eq!(c.tallies().papers.count(RejectReason::MissingLevel), 2);
        assert_eq!(c.tallies().papers.input_rows, 5);
    }

    #[test]
    fn dangling_citation_is_dropped() {
        let citations = format!("{CITATIONS}P1,P99\n");
        let c = load(JOURNALS, PAPERS, &citations).unwrap();
        assert_eq!(c.citations().len(), 2);
        assert_eq!(c.tallies().citations.count(RejectReason::Dangling), 1);
    }

    #[test]
    fn row_level_rejections() {
        let journals = format!("{JOURNALS}J3,Empty,  ; \nJ1,Dup,Physics\n,NoId,Physics\n");
        let papers = format!(
            "{PAPERS}\
             P6,J1,2015,1,1.1,1.1.1\n\
             P7,J1,abc,1,1.1,1.1.1\n\
             P8,J9,2017,1,1.1,1.1.1\n\
             P9,J1,2017,1,2.1,2.1.1\n\
             P10,J1,2017,1,1.1,1.1.1.1\n\
             P1,J2,2017,1,1.1,1.1.1\n"
        );
        let citations = format!("{CITATIONS}P2,P2\nP2,\n");
        let c = load(&journals, &papers, &citations).unwrap();

        let j = &c.tallies().journals;
        assert_eq!(j.count(RejectReason::EmptyCategories), 1);
        assert_eq!(j.count(RejectReason::DuplicateId), 1);
        assert_eq!(j.count(RejectReason::MissingField), 1);
        assert_eq!(j.accepted + j.rejected_total(), j.input_rows);

        let p = &c.tallies().papers;
        assert_eq!(p.count(RejectReason::YearOutOfWindow), 1);
        assert_eq!(p.count(RejectReason::BadYear), 1);
        assert_eq!(p.count(RejectReason::UnknownJournal), 1);
        assert_eq!(p.count(RejectReason::InconsistentHierarchy), 1);
        assert_eq!(p.count(RejectReason::BadTopicCode), 1);
        assert_eq!(p.count(RejectReason::DuplicateId), 1);
        assert_eq!(p.accepted, 3);

        let ct = &c.tallies().citations;
        assert_eq!(ct.count(RejectReason::SelfCitation), 1);
        assert_eq!(ct.count(RejectReason::MissingField), 1);
    }

    #[test]
    fn header_and_emptiness_errors() {
        let bad = "paper,journal_id,year,macro_topic,meso_topic,micro_topic\n";
        assert!(matches!(
            read_papers(bad.as_bytes(), b','),
            Err(IngestError::MalformedHeader { .. })
        ));
        let header_only = "paper_id,journal_id,year,macro_topic,meso_topic,micro_topic\n";
        assert!(matches!(
            load(JOURNALS, header_only, CITATIONS),
            Err(IngestError::NoValidPapers)
        ));
        let missing = Path::new("/definitely/not/here.csv");
        assert!(matches!(
            load_corpus(missing, missing, missing, LoadOptions::default()),
            Err(IngestError::Unreadable { .. })
        ));
    }

    #[test]
    fn journals_without_papers_are_retained() {
        let journals = format!("{JOURNALS}J3,Silent,Biology\n");
        let c = load(&journals, PAPERS, CITATIONS).unwrap();
        assert_eq!(c.journals().len(), 3);
        assert_eq!(c.publishing_journals().collect::<Vec<_>>(), ["J1", "J2"]);
        assert!(c.papers_of("J3").is_empty());
    }

    #[test]
    fn alternate_delimiter_and_column_order() {
        let papers = "year\tmicro_topic\tpaper_id\tjournal_id\tmacro_topic\tmeso_topic\n\
                      2017\t3.1.1\tQ1\tJ\t3\t3.1\n";
        let journals = "journal_id\tname\tcategories\nJ\tTab Journal\tMultidisciplinary Sciences\n";
        let c = Corpus::from_raw(
            read_journals(journals.as_bytes(), b'\t').unwrap(),
            read_papers(papers.as_bytes(), b'\t').unwrap(),
            Vec::new(),
            YearWindow::default(),
        )
        .unwrap();
        assert_eq!(c.paper("Q1").unwrap().micro_topic.code(), "3.1.1");
    }

    #[test]
    fn report_counts() {
        let c = load(JOURNALS, PAPERS, "citing_paper_id,cited_paper_id\n").unwrap();
        let r = validate_report(&c);
        assert_eq!(r.citation_count, 0);
        assert_eq!(r.multidisciplinary_count, 1);
        assert_eq!(r.topic_counts[&Level::Macro], 2);
        assert_eq!(r.topic_counts[&Level::Micro], 3);
        let text = r.to_string();
        assert!(text.contains("citation_count: 0\n"));
        assert!(text.contains("topic_count.meso: 2\n"));
        for line in text.lines() {
            assert!(line.contains(": "), "{line}");
        }
    }

    #[test]
    fn multidisciplinary_requires_exact_category() {
        let j = JournalRecord::new("x", "x", ["Chemistry, Multidisciplinary"]).unwrap();
        assert!(!j.is_multidisciplinary);
        let j = JournalRecord::new("x", "x", ["  Multidisciplinary Sciences "]).unwrap();
        assert!(j.is_multidisciplinary);
        assert!(JournalRecord::new("x", "x", [" ", ""]).is_none());
    }
}
