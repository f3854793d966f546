//! Seeded generator for a planted test corpus.
//!
//! Three kinds of journals are planted: multidisciplinary journals spread
//! evenly over every macro topic, specialists concentrated in one or two meso
//! topics, and optionally "broad" journals that publish like the
//! multidisciplinary ones but do not carry the category.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ingest::{
    Corpus, IngestError, JournalRecord, PaperRecord, YearWindow, CITATION_COLUMNS,
    JOURNAL_COLUMNS, MULTIDISCIPLINARY_CATEGORY, PAPER_COLUMNS,
};
use crate::topic::{Level, TopicId};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub macro_topics: usize,
    pub meso_per_macro: usize,
    /// The first `wide_meso` meso topics get 4 micro topics, the rest 3.
    pub wide_meso: usize,
    pub multidisciplinary: usize,
    pub specialists: usize,
    pub broad: usize,
    pub papers_per_journal: usize,
    pub citations_per_paper: usize,
    /// Probabilities that a citation stays in the citing paper's meso topic,
    /// or else in its macro topic; the rest go anywhere.
    pub cite_same_meso: f64,
    pub cite_same_macro: f64,
    /// Chance that a specialist's second meso topic shares the macro topic of
    /// its first.
    pub secondary_same_macro: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            seed: 7,
            macro_topics: 10,
            meso_per_macro: 6,
            wide_meso: 20,
            multidisciplinary: 50,
            specialists: 450,
            broad: 0,
            papers_per_journal: 200,
            citations_per_paper: 5,
            cite_same_meso: 0.7,
            cite_same_macro: 0.2,
            secondary_same_macro: 0.7,
        }
    }
}

impl SyntheticConfig {
    /// A few hundred papers; enough for pipeline smoke tests.
    pub fn tiny(seed: u64) -> Self {
        SyntheticConfig {
            seed,
            macro_topics: 4,
            meso_per_macro: 3,
            wide_meso: 4,
            multidisciplinary: 4,
            specialists: 12,
            broad: 2,
            papers_per_journal: 20,
            citations_per_paper: 3,
            ..SyntheticConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JournalKind {
    Multidisciplinary,
    Specialist,
    Broad,
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub journals: Vec<JournalRecord>,
    pub kinds: Vec<JournalKind>,
    pub papers: Vec<PaperRecord>,
    pub citations: Vec<(String, String)>,
}

struct Topics {
    /// Micro topics of each meso topic; meso topics of each macro topic.
    micro: Vec<Vec<TopicId>>,
    meso: Vec<TopicId>,
    meso_of_macro: Vec<Vec<usize>>,
    macros: Vec<TopicId>,
}

fn build_topics(cfg: &SyntheticConfig) -> Topics {
    let mut t = Topics {
        micro: Vec::new(),
        meso: Vec::new(),
        meso_of_macro: Vec::new(),
        macros: Vec::new(),
    };
    for m in 1..=cfg.macro_topics {
        t.macros.push(TopicId::new(Level::Macro, &m.to_string()).expect("valid code"));
        let mut mesos = Vec::new();
        for s in 1..=cfg.meso_per_macro {
            let code = format!("{m}.{s}");
            let width = if t.meso.len() < cfg.wide_meso { 4 } else { 3 };
            t.micro.push(
                (1..=width)
                    .map(|k| TopicId::new(Level::Micro, &format!("{code}.{k}")).expect("valid code"))
                    .collect(),
            );
            mesos.push(t.meso.len());
            t.meso.push(TopicId::new(Level::Meso, &code).expect("valid code"));
        }
        t.meso_of_macro.push(mesos);
    }
    t
}

/// Generate the corpus. Identical configs give identical corpora.
pub fn generate(cfg: &SyntheticConfig) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let topics = build_topics(cfg);
    let n_meso = topics.meso.len();
    let macro_of_meso = |s: usize| s / cfg.meso_per_macro;

    let mut journals = Vec::new();
    let mut kinds = Vec::new();
    let mut papers = Vec::new();
    // Paper indices per meso topic and per macro topic, for citation targets.
    let mut by_meso: Vec<Vec<usize>> = vec![Vec::new(); n_meso];
    let mut by_macro: Vec<Vec<usize>> = vec![Vec::new(); cfg.macro_topics];

    let plan = std::iter::repeat_n(JournalKind::Multidisciplinary, cfg.multidisciplinary)
        .chain(std::iter::repeat_n(JournalKind::Specialist, cfg.specialists))
        .chain(std::iter::repeat_n(JournalKind::Broad, cfg.broad));
    for (j, kind) in plan.enumerate() {
        let id = format!("J{:04}", j + 1);
        let (name, category) = match kind {
            JournalKind::Multidisciplinary => (format!("Multidisciplinary Journal {}", j + 1), MULTIDISCIPLINARY_CATEGORY),
            JournalKind::Specialist => (format!("Specialist Journal {}", j + 1), "Specialist Studies"),
            JournalKind::Broad => (format!("Broad Journal {}", j + 1), "Engineering"),
        };
        journals.push(JournalRecord::new(&id, &name, [category]).expect("non-empty category"));
        kinds.push(kind);

        // Meso topic chooser for this journal.
        let focus = match kind {
            JournalKind::Specialist => {
                let primary = rng.random_range(0..n_meso);
                let secondary = if rng.random_bool(0.5) {
                    let m = macro_of_meso(primary);
                    let pool: Vec<usize> = if rng.random_bool(cfg.secondary_same_macro) {
                        topics.meso_of_macro[m].clone()
                    } else {
                        (0..n_meso).filter(|&s| macro_of_meso(s) != m).collect()
                    };
                    let choices: Vec<usize> = pool.into_iter().filter(|&s| s != primary).collect();
                    choices.choose(&mut rng).copied()
                } else {
                    None
                };
                Some((primary, secondary, rng.random_range(0.5..1.0)))
            }
            _ => None,
        };

        for k in 0..cfg.papers_per_journal {
            let meso = match focus {
                Some((primary, Some(secondary), share)) => {
                    if rng.random_bool(share) {
                        primary
                    } else {
                        secondary
                    }
                }
                Some((primary, None, _)) => primary,
                None => {
                    let m = rng.random_range(0..cfg.macro_topics);
                    *topics.meso_of_macro[m].choose(&mut rng).expect("meso topics")
                }
            };
            let mac = macro_of_meso(meso);
            let micro = topics.micro[meso].choose(&mut rng).expect("micro topics").clone();
            by_meso[meso].push(papers.len());
            by_macro[mac].push(papers.len());
            papers.push(PaperRecord {
                paper_id: format!("{id}-P{:04}", k + 1),
                journal_id: id.clone(),
                year: rng.random_range(2016..=2020),
                macro_topic: topics.macros[mac].clone(),
                meso_topic: topics.meso[meso].clone(),
                micro_topic: micro,
            });
        }
    }

    let mut citations = Vec::with_capacity(papers.len() * cfg.citations_per_paper);
    for (i, p) in papers.iter().enumerate() {
        let meso = topics.meso.binary_search(&p.meso_topic).expect("generated topic");
        for _ in 0..cfg.citations_per_paper {
            let r: f64 = rng.random();
            let pool = if r < cfg.cite_same_meso {
                &by_meso[meso]
            } else if r < cfg.cite_same_meso + cfg.cite_same_macro {
                &by_macro[macro_of_meso(meso)]
            } else {
                let target = rng.random_range(0..papers.len());
                citations.push((p.paper_id.clone(), papers[target].paper_id.clone()));
                continue;
            };
            let target = *pool.choose(&mut rng).expect("pool contains the citing paper");
            if target != i {
                citations.push((p.paper_id.clone(), papers[target].paper_id.clone()));
            }
        }
    }

    SyntheticCorpus {
        journals,
        kinds,
        papers,
        citations,
    }
}

impl SyntheticCorpus {
    pub fn ids_of(&self, kind: JournalKind) -> Vec<&str> {
        self.journals
            .iter()
            .zip(&self.kinds)
            .filter(|(_, &k)| k == kind)
            .map(|(j, _)| j.journal_id.as_str())
            .collect()
    }

    pub fn to_corpus(&self) -> Result<Corpus, IngestError> {
        Corpus::from_records(&self.journals, &self.papers, &self.citations, YearWindow::default())
    }

    /// Write `papers.csv`, `citations.csv` and `journals.csv` into `dir`.
    pub fn write_csv(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let open = |name: &str| File::create(dir.join(name)).map(BufWriter::new);

        let mut w = csv::Writer::from_writer(open("journals.csv")?);
        w.write_record(JOURNAL_COLUMNS)?;
        for j in &self.journals {
            let cats = j.categories.iter().cloned().collect::<Vec<_>>().join(";");
            w.write_record([j.journal_id.as_str(), &j.name, &cats])?;
        }
        w.flush()?;

        let mut w = csv::Writer::from_writer(open("papers.csv")?);
        w.write_record(PAPER_COLUMNS)?;
        for p in &self.papers {
            w.write_record([
                p.paper_id.as_str(),
                &p.journal_id,
                &p.year.to_string(),
                p.macro_topic.code(),
                p.meso_topic.code(),
                p.micro_topic.code(),
            ])?;
        }
        w.flush()?;

        let mut w = open("citations.csv")?;
        writeln!(w, "{}", CITATION_COLUMNS.join(","))?;
        for (a, b) in &self.citations {
            writeln!(w, "{a},{b}")?;
        }
        w.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_shape() {
        let cfg = SyntheticConfig {
            papers_per_journal: 2,
            citations_per_paper: 1,
            broad: 10,
            ..SyntheticConfig::default()
        };
        let topics = build_topics(&cfg);
        assert_eq!(topics.macros.len(), 10);
        assert_eq!(topics.meso.len(), 60);
        assert_eq!(topics.micro.iter().map(Vec::len).sum::<usize>(), 200);
        let c = generate(&cfg);
        assert_eq!(c.journals.len(), 510);
        assert_eq!(c.ids_of(JournalKind::Broad).len(), 10);
        assert_eq!(c.papers.len(), 1020);
        assert_eq!(c.journals.iter().filter(|j| j.is_multidisciplinary).count(), 50);
    }

    #[test]
    fn deterministic_and_consistent() {
        let cfg = SyntheticConfig::tiny(3);
        let a = generate(&cfg);
        let b = generate(&cfg);
        assert_eq!(a.papers, b.papers);
        assert_eq!(a.citations, b.citations);
        for p in &a.papers {
            assert!(p.macro_topic.is_prefix_of(&p.meso_topic));
            assert!(p.meso_topic.is_prefix_of(&p.micro_topic));
        }
        let corpus = a.to_corpus().unwrap();
        assert_eq!(corpus.papers().len(), a.papers.len());
        assert_eq!(corpus.citations().len(), a.citations.len());
    }

    #[test]
    fn specialists_are_concentrated() {
        let c = generate(&SyntheticConfig::tiny(11));
        for id in c.ids_of(JournalKind::Specialist) {
            let mesos: std::collections::BTreeSet<_> = c
                .papers
                .iter()
                .filter(|p| p.journal_id == id)
                .map(|p| p.meso_topic.clone())
                .collect();
            assert!((1..=2).contains(&mesos.len()), "{id}: {mesos:?}");
        }
    }
}
