//! The `jdiv` command line: configuration, stage orchestration and artifact
//! files.
//!
//! Settings come from built-in defaults, then an optional flat `key = value`
//! config file, then command-line flags. Config keys are the long flag names.
//! Embedding keys may be scoped to one level, e.g. `micro.walk-length = 40`;
//! a flag on the command line replaces both the plain and the scoped values.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{ArgAction, Args, Parser, Subcommand};
use log::{info, warn};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::detect::{distance_distribution, rank_potential_multidisciplinary};
use crate::discipline_graph::{build_discipline_graph, build_journal_profiles, read_graph_dump, write_graph_dump};
use crate::diversity::{build_diversity_table, JournalDiversityTable};
use crate::embedding::{
    cosine_similarity_matrix, generate_walks, read_similarity_dense, train_sgns, write_embeddings,
    write_similarity_dense, write_walks, TrainMode, TrainParams, WalkParams,
};
use crate::export::{export_journal_overlay, export_network, export_scatter};
use crate::ingest::{load_corpus, validate_report, Corpus, LoadOptions, YearWindow};
use crate::io::ArtifactHeader;
use crate::stats::{consistency_report, group_compare_report, quadrant_classify, write_consistency, write_quadrants};
use crate::synthetic::{generate, SyntheticConfig};
use crate::topic::Level;
use crate::{Error, Result};

pub const VALIDATION_REPORT: &str = "validation_report.txt";
pub const DIVERSITY_TABLE: &str = "diversity_table.csv";
pub const STATS_GROUPS: &str = "stats_groups.csv";
pub const CONSISTENCY: &str = "consistency.csv";
pub const QUADRANTS: &str = "quadrants.csv";
pub const CANDIDATES: &str = "candidates.csv";
pub const DISTANCE_CURVE: &str = "distance_curve.csv";
pub const OVERLAY_DIR: &str = "overlays";

pub fn graph_file(level: Level) -> String {
    format!("graph_{level}.csv")
}

pub fn similarity_file(level: Level) -> String {
    format!("similarity_{level}.csv")
}

pub fn scatter_file(x: Level, y: Level) -> String {
    format!("scatter_{x}_{y}.csv")
}

pub const SCATTER_PAIRS: [(Level, Level); 3] = [
    (Level::Micro, Level::Meso),
    (Level::Micro, Level::Macro),
    (Level::Meso, Level::Macro),
];

#[derive(Debug, Parser)]
#[command(name = "jdiv", version, about = "Journal disciplinary diversity pipeline")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Load and validate the inputs; write the validation report.
    Ingest,
    /// Build the discipline citation graph of each level.
    Graph,
    /// Walks, embeddings and similarity matrices per level.
    Embed,
    /// Diversity of every journal at all three levels.
    Diversity,
    /// Group comparison, level consistency, quadrants and scatter files.
    Analyze,
    /// Rank non-multidisciplinary journals by distance to the ideal point.
    Detect,
    /// Per-journal meso topic overlays.
    ExportOverlay,
    /// Every stage in order.
    All,
    /// Write a planted synthetic corpus as input files into the output
    /// directory.
    Synthesize {
        /// A few hundred papers instead of the full-size corpus.
        #[arg(long)]
        tiny: bool,
        /// Number of broad non-multidisciplinary journals to plant.
        #[arg(long)]
        broad: Option<usize>,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// Flat key = value config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub papers: Option<PathBuf>,
    #[arg(long, global = true)]
    pub citations: Option<PathBuf>,
    #[arg(long, global = true)]
    pub journals: Option<PathBuf>,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Input field delimiter (`tab` for tab).
    #[arg(long, global = true)]
    pub delimiter: Option<String>,
    #[arg(long, global = true)]
    pub year_start: Option<i32>,
    #[arg(long, global = true)]
    pub year_end: Option<i32>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Restrict graph and embed to one level (`macro`, `meso`, `micro` or `all`).
    #[arg(long, global = true)]
    pub level: Option<String>,
    #[arg(long, global = true)]
    pub dims: Option<usize>,
    #[arg(long, global = true)]
    pub return_p: Option<f64>,
    #[arg(long, global = true)]
    pub inout_q: Option<f64>,
    #[arg(long, global = true)]
    pub walk_length: Option<usize>,
    #[arg(long, global = true)]
    pub walks_per_node: Option<usize>,
    #[arg(long, global = true)]
    pub window: Option<usize>,
    #[arg(long, global = true)]
    pub negatives: Option<usize>,
    #[arg(long, global = true)]
    pub epochs: Option<usize>,
    #[arg(long, global = true)]
    pub learning_rate: Option<f64>,
    #[arg(long, global = true, action = ArgAction::Set, num_args = 1)]
    pub include_self_loops: Option<bool>,
    #[arg(long, global = true)]
    pub order_q: Option<f64>,
    #[arg(long, global = true)]
    pub top_n: Option<usize>,
    #[arg(long, global = true)]
    pub top_k: Option<usize>,
    /// Macro and meso thresholds, `a,b`. Defaults to the medians of the
    /// multidisciplinary journals.
    #[arg(long, global = true)]
    pub quadrant_thresholds: Option<String>,
    #[arg(long, global = true)]
    pub distance_threshold: Option<f64>,
    /// Single-threaded, bit-reproducible training.
    #[arg(long, global = true, action = ArgAction::Set, num_args = 1)]
    pub deterministic: Option<bool>,
    /// Training threads when not deterministic (0 = all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Only this journal for export-overlay.
    #[arg(long, global = true)]
    pub journal: Option<String>,
}

const DEFAULTS: [(&str, &str); 21] = [
    ("out-dir", "out"),
    ("delimiter", ","),
    ("year-start", "2016"),
    ("year-end", "2020"),
    ("seed", "42"),
    ("level", "all"),
    ("dims", "64"),
    ("return-p", "1"),
    ("inout-q", "1"),
    ("walk-length", "80"),
    ("walks-per-node", "10"),
    ("window", "10"),
    ("negatives", "5"),
    ("epochs", "5"),
    ("learning-rate", "0.025"),
    ("include-self-loops", "false"),
    ("order-q", "2"),
    ("top-n", "10"),
    ("top-k", "1000"),
    ("distance-threshold", "0.6"),
    ("deterministic", "true"),
];

const OPTIONAL_KEYS: [&str; 6] = ["papers", "citations", "journals", "quadrant-thresholds", "threads", "journal"];

/// Keys that may be prefixed with a level.
const LEVEL_KEYS: [&str; 11] = [
    "seed",
    "dims",
    "return-p",
    "inout-q",
    "walk-length",
    "walks-per-node",
    "window",
    "negatives",
    "epochs",
    "learning-rate",
    "include-self-loops",
];

const PATH_KEYS: [&str; 4] = ["papers", "citations", "journals", "out-dir"];

fn is_known_key(key: &str) -> bool {
    DEFAULTS.iter().any(|(k, _)| *k == key) || OPTIONAL_KEYS.contains(&key)
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Parse a config file into `key -> value`. Relative paths are taken
/// relative to the file's directory.
pub fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut map = parse_config(&text)?;
    for key in PATH_KEYS {
        if let Some(v) = map.get_mut(key) {
            let p = Path::new(v.as_str());
            if p.is_relative() {
                *v = base.join(p).to_string_lossy().into_owned();
            }
        }
    }
    Ok(map)
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| config_error(format!("line {}: expected key = value", n + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim().to_string();
        let plain = match key.split_once('.') {
            Some((level, rest)) => {
                level
                    .parse::<Level>()
                    .map_err(|_| config_error(format!("line {}: unknown level in {key}", n + 1)))?;
                if !LEVEL_KEYS.contains(&rest) {
                    return Err(config_error(format!("line {}: {rest} cannot be set per level", n + 1)));
                }
                rest
            }
            None => key.as_str(),
        };
        if !is_known_key(plain) {
            return Err(config_error(format!("line {}: unknown key {key}", n + 1)));
        }
        map.insert(key, value);
    }
    Ok(map)
}

impl Options {
    fn flag_values(&self) -> Vec<(&'static str, Option<String>)> {
        fn s<T: ToString>(v: &Option<T>) -> Option<String> {
            v.as_ref().map(ToString::to_string)
        }
        fn p(v: &Option<PathBuf>) -> Option<String> {
            v.as_ref().map(|p| p.to_string_lossy().into_owned())
        }
        vec![
            ("papers", p(&self.papers)),
            ("citations", p(&self.citations)),
            ("journals", p(&self.journals)),
            ("out-dir", p(&self.out_dir)),
            ("delimiter", s(&self.delimiter)),
            ("year-start", s(&self.year_start)),
            ("year-end", s(&self.year_end)),
            ("seed", s(&self.seed)),
            ("level", s(&self.level)),
            ("dims", s(&self.dims)),
            ("return-p", s(&self.return_p)),
            ("inout-q", s(&self.inout_q)),
            ("walk-length", s(&self.walk_length)),
            ("walks-per-node", s(&self.walks_per_node)),
            ("window", s(&self.window)),
            ("negatives", s(&self.negatives)),
            ("epochs", s(&self.epochs)),
            ("learning-rate", s(&self.learning_rate)),
            ("include-self-loops", s(&self.include_self_loops)),
            ("order-q", s(&self.order_q)),
            ("top-n", s(&self.top_n)),
            ("top-k", s(&self.top_k)),
            ("quadrant-thresholds", s(&self.quadrant_thresholds)),
            ("distance-threshold", s(&self.distance_threshold)),
            ("deterministic", s(&self.deterministic)),
            ("threads", s(&self.threads)),
            ("journal", s(&self.journal)),
        ]
    }

    /// Defaults, then the config file, then flags.
    pub fn settings(&self) -> Result<BTreeMap<String, String>> {
        let mut map: BTreeMap<String, String> =
            DEFAULTS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        if let Some(path) = &self.config {
            map.extend(parse_config_file(path)?);
        }
        for (key, value) in self.flag_values() {
            if let Some(v) = value {
                for level in Level::ALL {
                    map.remove(&format!("{level}.{key}"));
                }
                map.insert(key.to_string(), v);
            }
        }
        Ok(map)
    }
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub papers: Option<PathBuf>,
    pub citations: Option<PathBuf>,
    pub journals: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub load: LoadOptions,
    pub seed: u64,
    pub levels: Vec<Level>,
    /// Indexed by [`Level::index`].
    pub walk: [WalkParams; 3],
    pub train: [TrainParams; 3],
    pub order_q: f64,
    pub top_n: usize,
    pub top_k: usize,
    pub quadrant_thresholds: Option<(f64, f64)>,
    pub distance_threshold: f64,
    pub journal: Option<String>,
    /// SHA-256 over the sorted settings, output directory excluded.
    pub config_digest: String,
}

fn get<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<T> {
    let raw = map
        .get(key)
        .ok_or_else(|| config_error(format!("{key} is not set")))?;
    raw.parse()
        .map_err(|_| config_error(format!("{key}: cannot parse {raw:?}")))
}

fn get_opt<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    map.get(key).map(|_| get(map, key)).transpose()
}

/// Level-scoped value if present, else the plain one.
fn get_level<T: FromStr>(map: &BTreeMap<String, String>, level: Level, key: &str) -> Result<T> {
    let scoped = format!("{level}.{key}");
    if map.contains_key(&scoped) {
        get(map, &scoped)
    } else {
        get(map, key)
    }
}

/// Independent seed for one (level, purpose) pair.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.next_u64()
}

pub fn config_digest(map: &BTreeMap<String, String>) -> String {
    let mut hasher = Sha256::new();
    for (k, v) in map.iter().filter(|(k, _)| k.as_str() != "out-dir") {
        hasher.update(format!("{k}={v}\n"));
    }
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

impl PipelineConfig {
    pub fn from_settings(map: &BTreeMap<String, String>) -> Result<Self> {
        let delimiter = match map.get("delimiter").map(String::as_str) {
            Some("tab") | Some("\\t") => b'\t',
            Some(d) if d.len() == 1 => d.as_bytes()[0],
            other => return Err(config_error(format!("delimiter must be one byte, got {other:?}"))),
        };
        let window = YearWindow::new(get(map, "year-start")?, get(map, "year-end")?);
        if window.start > window.end {
            return Err(config_error("year-start is after year-end"));
        }
        let levels = match get::<String>(map, "level")?.as_str() {
            "all" => Level::ALL.to_vec(),
            s => vec![s
                .parse::<Level>()
                .map_err(|_| config_error(format!("unknown level {s:?}")))?],
        };
        let seed: u64 = get(map, "seed")?;
        let deterministic: bool = get(map, "deterministic")?;
        let threads = match get_opt::<usize>(map, "threads")? {
            Some(t) if t > 0 => t,
            _ => rayon::current_num_threads(),
        };

        let mut walk: [WalkParams; 3] = Default::default();
        let mut train: [TrainParams; 3] = Default::default();
        for level in Level::ALL {
            let i = level.index();
            let base: u64 = get_level(map, level, "seed")?;
            walk[i] = WalkParams {
                return_p: get_level(map, level, "return-p")?,
                inout_q: get_level(map, level, "inout-q")?,
                walk_length: get_level(map, level, "walk-length")?,
                walks_per_node: get_level(map, level, "walks-per-node")?,
                include_self_loops: get_level(map, level, "include-self-loops")?,
                seed: derive_seed(base, 2 * i as u64),
            };
            train[i] = TrainParams {
                dimensions: get_level(map, level, "dims")?,
                window: get_level(map, level, "window")?,
                negative_samples: get_level(map, level, "negatives")?,
                epochs: get_level(map, level, "epochs")?,
                initial_learning_rate: get_level(map, level, "learning-rate")?,
                seed: derive_seed(base, 2 * i as u64 + 1),
                mode: if deterministic {
                    TrainMode::Deterministic
                } else {
                    TrainMode::Concurrent { threads }
                },
                ..TrainParams::default()
            };
            walk[i]
                .validate()
                .and_then(|_| train[i].validate())
                .map_err(|e| config_error(format!("{level}: {e}")))?;
        }

        let order_q: f64 = get(map, "order-q")?;
        if !(order_q.is_finite() && order_q >= 0.0) {
            return Err(config_error("order-q must be finite and non-negative"));
        }
        let top_k: usize = get(map, "top-k")?;
        if top_k == 0 {
            return Err(config_error("top-k must be at least 1"));
        }
        let quadrant_thresholds = match map.get("quadrant-thresholds") {
            None => None,
            Some(raw) => {
                let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
                let parsed: Vec<f64> = parts.iter().filter_map(|p| p.parse().ok()).collect();
                match parsed[..] {
                    [a, b] if parts.len() == 2 && a.is_finite() && b.is_finite() => Some((a, b)),
                    _ => {
                        return Err(config_error(format!(
                            "quadrant-thresholds must be two finite numbers a,b; got {raw:?}"
                        )))
                    }
                }
            }
        };

        Ok(PipelineConfig {
            papers: get_opt(map, "papers")?,
            citations: get_opt(map, "citations")?,
            journals: get_opt(map, "journals")?,
            out_dir: get(map, "out-dir")?,
            load: LoadOptions { window, delimiter },
            seed,
            levels,
            walk,
            train,
            order_q,
            top_n: get(map, "top-n")?,
            top_k,
            quadrant_thresholds,
            distance_threshold: get(map, "distance-threshold")?,
            journal: get_opt(map, "journal")?,
            config_digest: config_digest(map),
        })
    }
}

/// Process exit status for an error: 2 configuration, 3 invalid data,
/// 4 missing prerequisite artifact, 1 anything else.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => 2,
        Error::MissingArtifact { .. } => 4,
        Error::Io { .. } => 1,
        _ => 3,
    }
}

/// Runs stages against one output directory.
pub struct Pipeline {
    pub config: PipelineConfig,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Self {
        Pipeline { config }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.config.out_dir.join(name)
    }

    fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
        move |source| Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Create `name` in the output directory, write the header, then `body`.
    fn write_artifact<F>(&self, name: &str, body: F) -> Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<()>,
    {
        let path = self.path(name);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(Self::io_error(dir))?;
        }
        let mut w = BufWriter::new(File::create(&path).map_err(Self::io_error(&path))?);
        ArtifactHeader::new(self.config.seed, &self.config.config_digest)
            .write_to(&mut w)
            .map_err(Self::io_error(&path))?;
        body(&mut w)?;
        w.flush().map_err(Self::io_error(&path))?;
        info!("wrote {}", path.display());
        Ok(())
    }

    fn open_artifact(&self, name: &str, stage: &'static str) -> Result<BufReader<File>> {
        let path = self.path(name);
        match File::open(&path) {
            Ok(f) => Ok(BufReader::new(f)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                Err(Error::MissingArtifact { path, stage })
            }
            Err(source) => Err(Error::Io { path, source }),
        }
    }

    pub fn load_corpus(&self) -> Result<Corpus> {
        let c = &self.config;
        let input = |p: &Option<PathBuf>, key: &str| {
            p.clone()
                .ok_or_else(|| config_error(format!("--{key} is required for this stage")))
        };
        let papers = input(&c.papers, "papers")?;
        let citations = input(&c.citations, "citations")?;
        let journals = input(&c.journals, "journals")?;
        Ok(load_corpus(&papers, &citations, &journals, c.load)?)
    }

    pub fn ingest(&self, corpus: &Corpus) -> Result<()> {
        let report = validate_report(corpus);
        self.write_artifact(VALIDATION_REPORT, |w| {
            write!(w, "{report}").map_err(Self::io_error(Path::new(VALIDATION_REPORT)))
        })
    }

    pub fn graph(&self, corpus: &Corpus) -> Result<()> {
        for &level in &self.config.levels {
            let graph = build_discipline_graph(corpus, level)?;
            if graph.unattributed() > 0 {
                warn!("{level}: {} citations without a topic at this level", graph.unattributed());
            }
            self.write_artifact(&graph_file(level), |w| Ok(write_graph_dump(&graph, w)?))?;
            let nodes = format!("network_{level}_nodes.csv");
            let edges = format!("network_{level}_edges.csv");
            let mut edge_buf = Vec::new();
            self.write_artifact(&nodes, |w| {
                Ok(export_network(&graph, corpus.taxonomy(), w, &mut edge_buf)?)
            })?;
            self.write_artifact(&edges, |w| {
                w.write_all(&edge_buf).map_err(Self::io_error(Path::new(&edges)))
            })?;
        }
        Ok(())
    }

    pub fn embed(&self) -> Result<()> {
        for &level in &self.config.levels {
            let i = level.index();
            let graph = read_graph_dump(level, self.open_artifact(&graph_file(level), "graph")?)?;
            let walks = generate_walks(&graph, &self.config.walk[i])?;
            self.write_artifact(&format!("walks_{level}.txt"), |w| Ok(write_walks(&walks, w)?))?;
            let emb = train_sgns::<f64>(&walks, &self.config.train[i])?;
            self.write_artifact(&format!("embeddings_{level}.txt"), |w| {
                Ok(write_embeddings(&emb, w)?)
            })?;
            let sim = cosine_similarity_matrix(&emb)?;
            self.write_artifact(&similarity_file(level), |w| Ok(write_similarity_dense(&sim, w)?))?;
        }
        Ok(())
    }

    pub fn diversity(&self, corpus: &Corpus) -> Result<()> {
        let [s_macro, s_meso, s_micro] = Level::ALL.map(|level| {
            read_similarity_dense::<f64, _>(level, self.open_artifact(&similarity_file(level), "embed")?)
                .map_err(Error::from)
        });
        let table = build_diversity_table(corpus, &s_macro?, &s_meso?, &s_micro?, self.config.order_q)?;
        self.write_artifact(DIVERSITY_TABLE, |w| Ok(table.write_to(w)?))
    }

    pub fn read_diversity_table(&self) -> Result<JournalDiversityTable<f64>> {
        Ok(JournalDiversityTable::read_from(
            self.open_artifact(DIVERSITY_TABLE, "diversity")?,
        )?)
    }

    pub fn analyze(&self) -> Result<()> {
        let table = self.read_diversity_table()?;
        let report = group_compare_report(&table)?;
        self.write_artifact(STATS_GROUPS, |w| Ok(report.write_stats(w)?))?;
        for level in Level::ALL {
            self.write_artifact(&format!("values_{level}.csv"), |w| {
                Ok(report.write_values(level, w)?)
            })?;
            let c = report.level(level);
            info!(
                "{level}: median {} (multidisciplinary) vs {} (other), p = {}",
                c.median_multi, c.median_other, c.test.p_two_sided
            );
        }
        let consistency = consistency_report(&table, self.config.top_k)?;
        self.write_artifact(CONSISTENCY, |w| Ok(write_consistency(&consistency, w)?))?;
        let quadrants = quadrant_classify(&table, self.config.quadrant_thresholds);
        self.write_artifact(QUADRANTS, |w| Ok(write_quadrants(&quadrants, &table, w)?))?;
        for (x, y) in SCATTER_PAIRS {
            self.write_artifact(&scatter_file(x, y), |w| Ok(export_scatter(&table, x, y, w)?))?;
        }
        Ok(())
    }

    pub fn detect(&self) -> Result<()> {
        let table = self.read_diversity_table()?;
        let ranking = rank_potential_multidisciplinary(&table, self.config.top_n)?;
        if ranking.degenerate_macro || ranking.degenerate_meso {
            warn!("a diversity axis is constant; its normalized values are all 0");
        }
        self.write_artifact(CANDIDATES, |w| Ok(ranking.write_to(w)?))?;
        let curve = distance_distribution(&table, self.config.distance_threshold)?;
        info!(
            "{:.3} of non-multidisciplinary journals lie farther than {} from (1, 1)",
            curve.fraction_above, curve.threshold
        );
        self.write_artifact(DISTANCE_CURVE, |w| Ok(curve.write_to(w)?))
    }

    pub fn export_overlays(&self, corpus: &Corpus) -> Result<()> {
        let profiles = build_journal_profiles(corpus, Level::Meso);
        let selected: Vec<_> = match &self.config.journal {
            Some(id) => {
                let p: Vec<_> = profiles.iter().filter(|p| &p.journal_id == id).collect();
                if p.is_empty() {
                    return Err(config_error(format!("journal {id} has no papers in the corpus")));
                }
                p
            }
            None => profiles.iter().collect(),
        };
        for profile in selected {
            let overlay = export_journal_overlay::<f64>(profile);
            if overlay.is_empty() {
                warn!("journal {}: no meso topic with more than one paper", profile.journal_id);
            }
            let name = format!("{OVERLAY_DIR}/overlay_{}.csv", sanitize(&profile.journal_id));
            self.write_artifact(&name, |w| Ok(overlay.write_to(w)?))?;
        }
        Ok(())
    }

    pub fn synthesize(&self, tiny: bool, broad: Option<usize>) -> Result<()> {
        let mut cfg = if tiny {
            SyntheticConfig::tiny(self.config.seed)
        } else {
            SyntheticConfig {
                seed: self.config.seed,
                ..SyntheticConfig::default()
            }
        };
        if let Some(b) = broad {
            cfg.broad = b;
        }
        let dir = &self.config.out_dir;
        generate(&cfg).write_csv(dir).map_err(Self::io_error(dir))?;
        info!("wrote synthetic inputs to {}", dir.display());
        Ok(())
    }

    pub fn run(&self, command: Command) -> Result<()> {
        match command {
            Command::Ingest => self.ingest(&self.load_corpus()?),
            Command::Graph => self.graph(&self.load_corpus()?),
            Command::Embed => self.embed(),
            Command::Diversity => self.diversity(&self.load_corpus()?),
            Command::Analyze => self.analyze(),
            Command::Detect => self.detect(),
            Command::ExportOverlay => self.export_overlays(&self.load_corpus()?),
            Command::Synthesize { tiny, broad } => self.synthesize(tiny, broad),
            Command::All => {
                let corpus = self.load_corpus()?;
                self.ingest(&corpus)?;
                self.graph(&corpus)?;
                self.embed()?;
                self.diversity(&corpus)?;
                self.analyze()?;
                self.detect()?;
                self.export_overlays(&corpus)
            }
        }
    }
}

/// Journal ids as file-name fragments.
fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Resolve settings and run the selected stage.
pub fn run(cli: &Cli) -> Result<()> {
    let settings = cli.options.settings()?;
    let config = PipelineConfig::from_settings(&settings)?;
    Pipeline::new(config).run(cli.command)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(args: &[&str]) -> BTreeMap<String, String> {
        let cli = Cli::try_parse_from(["jdiv"].iter().chain(args)).unwrap();
        cli.options.settings().unwrap()
    }

    #[test]
    fn defaults_resolve() {
        let cfg = PipelineConfig::from_settings(&settings(&["all"])).unwrap();
        assert_eq!(cfg.train[0].dimensions, 64);
        assert_eq!(cfg.order_q, 2.0);
        assert_eq!(cfg.top_n, 10);
        assert_eq!(cfg.levels, Level::ALL.to_vec());
        assert_eq!(cfg.train[1].mode, TrainMode::Deterministic);
        assert_ne!(cfg.walk[0].seed, cfg.walk[1].seed);
        assert_eq!(cfg.quadrant_thresholds, None);
    }

    #[test]
    fn config_then_flags() {
        let map = parse_config("# comment\ndims = 16\nmicro.walk_length = 20\nseed=5\n").unwrap();
        assert_eq!(map["micro.walk-length"], "20");
        let mut all = DEFAULTS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect::<BTreeMap<_, _>>();
        all.extend(map);
        let cfg = PipelineConfig::from_settings(&all).unwrap();
        assert_eq!(cfg.train[2].dimensions, 16);
        assert_eq!(cfg.walk[Level::Micro.index()].walk_length, 20);
        assert_eq!(cfg.walk[Level::Meso.index()].walk_length, 80);
        assert_eq!(cfg.seed, 5);
    }

    #[test]
    fn flags_parse() {
        let s = settings(&["analyze", "--quadrant-thresholds", "1.5,3.0", "--deterministic", "false"]);
        let cfg = PipelineConfig::from_settings(&s).unwrap();
        assert_eq!(cfg.quadrant_thresholds, Some((1.5, 3.0)));
        assert!(matches!(cfg.train[0].mode, TrainMode::Concurrent { .. }));
    }

    #[test]
    fn config_errors() {
        assert!(matches!(parse_config("bogus = 1"), Err(Error::Config(_))));
        assert!(matches!(parse_config("meso.top-n = 1"), Err(Error::Config(_))));
        assert!(matches!(parse_config("no equals sign"), Err(Error::Config(_))));
        for bad in [
            vec!["all", "--quadrant-thresholds", "1.5"],
            vec!["all", "--dims", "0"],
            vec!["all", "--level", "nano"],
            vec!["all", "--order-q=-1"],
        ] {
            let err = PipelineConfig::from_settings(&settings(&bad)).unwrap_err();
            assert_eq!(exit_code(&err), 2, "{bad:?}");
        }
    }

    #[test]
    fn digest_ignores_output_directory() {
        let a = settings(&["all", "--out-dir", "a"]);
        let b = settings(&["all", "--out-dir", "b"]);
        let c = settings(&["all", "--seed", "1"]);
        assert_eq!(config_digest(&a), config_digest(&b));
        assert_ne!(config_digest(&a), config_digest(&c));
        assert_eq!(config_digest(&a).len(), 64);
    }
}
