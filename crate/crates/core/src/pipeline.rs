//! The end-to-end run: corpus load and linkage, ingest, matching,
//! calibration and every report, plus a manifest tying them together.
//!
//! Artifacts are first written as `<name>.partial` and renamed only when the
//! whole run succeeds, so a failed run leaves its partial outputs behind
//! under that suffix.

use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use tracing::{info, warn};

use crate::analyze::{
    authenticity_distribution, seasonality_report, temporal_histograms, top_hadiths, topical_distribution,
    write_distributions, write_top_hadiths, Granularity, WindowMode, DEFAULT_MIN_COUNT,
};
use crate::calibrate::{parse_thresholds, sample_for_labeling, sweep_results, DEFAULT_SAMPLE_SIZE};
use crate::corpus::{link_corpora, load_reference_with, CorpusFormat, GradeKeywords, LoadReport, ReferenceCorpus};
use crate::ingest::{open_source, DedupMode, IngestOptions, IngestReport, Ingestor, PostRecord, DEFAULT_LANG,
    DEFAULT_QUOTE_PHRASE};
use crate::matches::{match_posts, write_matches, MatchRecord};
use crate::minhash::{build_index, MinHashParams, DEFAULT_THRESHOLD};
use crate::normalize::PhraseSet;
use crate::corpus::AuthenticityLevel;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("input file not found: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("stage {stage} failed: {message}")]
    Stage { stage: &'static str, message: String },
}

impl PipelineError {
    /// 2 for config and input errors, 1 for a failing stage.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::MissingFile(_) => 2,
            PipelineError::Stage { .. } => 1,
        }
    }

    fn stage(stage: &'static str, e: impl std::fmt::Display) -> Self {
        PipelineError::Stage {
            stage,
            message: e.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    /// Corpora carrying authenticity grades; these are what posts are matched against.
    pub graded: Vec<PathBuf>,
    /// Corpus carrying topics, linked onto the graded records.
    pub topical: Option<PathBuf>,
    pub link_threshold: f64,
    /// TOML keyword map; the built-in map when absent.
    pub grade_keywords: Option<PathBuf>,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            graded: Vec::new(),
            topical: None,
            link_threshold: DEFAULT_THRESHOLD,
            grade_keywords: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    /// Language tag to keep; empty keeps every language.
    pub lang: String,
    /// Phrase a post must contain; empty disables the filter.
    pub quote_phrase: String,
    pub dedup: DedupMode,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            lang: DEFAULT_LANG.to_string(),
            quote_phrase: DEFAULT_QUOTE_PHRASE.to_string(),
            dedup: DedupMode::Id,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub min_count: u64,
    pub window: WindowMode,
    /// Trim the window to whole weeks/years for the histograms.
    pub equalize: bool,
    pub top_n: usize,
    /// `start:stop:step` for the coverage sweep; empty disables it.
    pub sweep: String,
    /// Size of the exported labelling sample; 0 disables it.
    pub sample_size: usize,
    pub sample_seed: u64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            min_count: DEFAULT_MIN_COUNT,
            window: WindowMode::Global,
            equalize: true,
            top_n: 5,
            sweep: "0.05:0.95:0.05".to_string(),
            sample_size: DEFAULT_SAMPLE_SIZE,
            sample_seed: 7,
        }
    }
}

/// Everything a run needs apart from the post files. Relative paths are
/// resolved against the working directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Keyring phrase file; the built-in starter set when absent.
    pub phrase_file: Option<PathBuf>,
    pub threshold: f64,
    /// Worker threads for matching; rayon's default when absent.
    pub threads: Option<usize>,
    pub corpus: CorpusConfig,
    pub minhash: MinHashParams,
    pub ingest: IngestConfig,
    pub analysis: AnalysisConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            phrase_file: None,
            threshold: DEFAULT_THRESHOLD,
            threads: None,
            corpus: CorpusConfig::default(),
            minhash: MinHashParams::default(),
            ingest: IngestConfig::default(),
            analysis: AnalysisConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|_| PipelineError::MissingFile(path.to_path_buf()))?;
        Self::from_toml(&text)
    }

    /// Checks values and that every referenced file exists.
    pub fn validate(&self) -> Result<(), PipelineError> {
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(PipelineError::Config(format!("threshold {} is outside [0, 1]", self.threshold)));
        }
        if !(0.0..=1.0).contains(&self.corpus.link_threshold) {
            return Err(PipelineError::Config(format!(
                "link_threshold {} is outside [0, 1]",
                self.corpus.link_threshold
            )));
        }
        if self.threads == Some(0) {
            return Err(PipelineError::Config("threads must be at least 1".into()));
        }
        self.minhash.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        if !self.analysis.sweep.is_empty() {
            parse_thresholds(&self.analysis.sweep).map_err(|e| PipelineError::Config(e.to_string()))?;
        }
        if self.corpus.graded.is_empty() && self.corpus.topical.is_none() {
            return Err(PipelineError::Config("no corpus configured".into()));
        }
        for path in self.referenced_files() {
            if !path.is_file() {
                return Err(PipelineError::MissingFile(path.clone()));
            }
            if self.corpus_files().any(|c| c == path) && CorpusFormat::from_path(path).is_none() {
                return Err(PipelineError::Config(format!(
                    "cannot tell the format of {}; use .csv or .jsonl",
                    path.display()
                )));
            }
        }
        Ok(())
    }

    fn corpus_files(&self) -> impl Iterator<Item = &PathBuf> {
        self.corpus.graded.iter().chain(self.corpus.topical.iter())
    }

    fn referenced_files(&self) -> Vec<&PathBuf> {
        self.phrase_file
            .iter()
            .chain(self.corpus.grade_keywords.iter())
            .chain(self.corpus_files())
            .collect()
    }

    /// SHA-256 of the canonical TOML form. `threads` is left out: it does
    /// not change any output.
    pub fn hash(&self) -> String {
        let canonical = PipelineConfig {
            threads: None,
            ..self.clone()
        };
        hex::encode(Sha256::digest(canonical.to_toml().as_bytes()))
    }

    pub fn phrases(&self) -> Result<PhraseSet, PipelineError> {
        match &self.phrase_file {
            Some(p) => PhraseSet::from_file(p).map_err(|e| PipelineError::Config(e.to_string())),
            None => Ok(PhraseSet::starter()),
        }
    }

    pub fn grade_keywords(&self) -> Result<GradeKeywords, PipelineError> {
        match &self.corpus.grade_keywords {
            Some(p) => GradeKeywords::from_file(p).map_err(|e| PipelineError::Config(e.to_string())),
            None => Ok(GradeKeywords::default()),
        }
    }

    pub fn ingest_options(&self) -> IngestOptions {
        IngestOptions {
            lang: Some(self.ingest.lang.clone()).filter(|s| !s.is_empty()),
            phrase: Some(self.ingest.quote_phrase.clone()).filter(|s| !s.is_empty()),
            dedup: self.ingest.dedup,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FileChecksum {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

fn checksum(path: &Path) -> Result<FileChecksum, PipelineError> {
    let mut file = File::open(path).map_err(|_| PipelineError::MissingFile(path.to_path_buf()))?;
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut bytes = 0u64;
    loop {
        let n = file.read(&mut buf).map_err(|e| PipelineError::stage("checksum", e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
        bytes += n as u64;
    }
    Ok(FileChecksum {
        path: path.display().to_string(),
        bytes,
        sha256: hex::encode(hasher.finalize()),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorpusFileReport {
    pub path: String,
    pub role: &'static str,
    pub report: LoadReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorpusStage {
    pub files: Vec<CorpusFileReport>,
    pub records: u64,
    pub variant_groups: u64,
    pub linked: u64,
    pub gained_topics: u64,
    pub indexed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatchStage {
    pub rows: u64,
    pub matched: u64,
    pub threshold: f64,
    pub params: MinHashParams,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OutputEntry {
    pub file: String,
    pub rows: u64,
    pub sha256: String,
}

/// Written as `manifest.json`. Holds no timings, so identical runs produce
/// identical manifests.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub config_sha256: String,
    pub inputs: Vec<FileChecksum>,
    pub corpus: CorpusStage,
    pub ingest: IngestReport,
    pub matching: MatchStage,
    pub outputs: Vec<OutputEntry>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

struct Outputs {
    dir: PathBuf,
    entries: Vec<OutputEntry>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self, PipelineError> {
        fs::create_dir_all(dir).map_err(|e| PipelineError::stage("output", format!("{}: {e}", dir.display())))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            entries: Vec::new(),
        })
    }

    /// Writes `name.partial`. Rows are lines, less the header for CSV.
    fn put(&mut self, stage: &'static str, name: &str, bytes: &[u8]) -> Result<(), PipelineError> {
        let path = self.dir.join(format!("{name}.partial"));
        fs::write(&path, bytes).map_err(|e| PipelineError::stage(stage, format!("{}: {e}", path.display())))?;
        let lines = bytes.iter().filter(|&&b| b == b'\n').count() as u64;
        let rows = if name.ends_with(".csv") { lines.saturating_sub(1) } else { lines };
        self.entries.push(OutputEntry {
            file: name.to_string(),
            rows,
            sha256: hex::encode(Sha256::digest(bytes)),
        });
        Ok(())
    }

    fn render<F>(&mut self, stage: &'static str, name: &str, f: F) -> Result<(), PipelineError>
    where
        F: FnOnce(&mut Vec<u8>) -> Result<(), String>,
    {
        let mut buf = Vec::new();
        f(&mut buf).map_err(|e| PipelineError::stage(stage, e))?;
        self.put(stage, name, &buf)
    }

    fn commit(&self) -> Result<(), PipelineError> {
        for e in &self.entries {
            let from = self.dir.join(format!("{}.partial", e.file));
            fs::rename(&from, self.dir.join(&e.file)).map_err(|err| PipelineError::stage("output", err))?;
        }
        Ok(())
    }
}

/// Loads, merges and links the configured corpora.
pub fn load_corpora(
    config: &PipelineConfig,
    phrases: &PhraseSet,
) -> Result<(ReferenceCorpus, CorpusStage), PipelineError> {
    let grades = config.grade_keywords()?;
    let load = |path: &PathBuf, role| {
        let format = CorpusFormat::from_path(path)
            .ok_or_else(|| PipelineError::Config(format!("unknown corpus format: {}", path.display())))?;
        let (corpus, report) =
            load_reference_with(path, format, phrases, &grades).map_err(|e| PipelineError::stage("corpus", e))?;
        info!(path = %path.display(), loaded = report.loaded, dropped = report.empty_matn_dropped,
              malformed = report.malformed_skipped, "corpus loaded");
        Ok::<_, PipelineError>((
            corpus,
            CorpusFileReport {
                path: path.display().to_string(),
                role,
                report,
            },
        ))
    };

    let mut files = Vec::new();
    let mut graded = ReferenceCorpus::default();
    for path in &config.corpus.graded {
        let (c, r) = load(path, "graded")?;
        graded = graded.merge(c).map_err(|e| PipelineError::stage("corpus", e))?;
        files.push(r);
    }
    let topical = config.corpus.topical.as_ref().map(|p| load(p, "topical")).transpose()?;

    let (mut linked, mut gained) = (0, 0);
    let corpus = match topical {
        Some((t, r)) => {
            files.push(r);
            if config.corpus.graded.is_empty() {
                t
            } else {
                let t_index = build_index(&t, config.minhash).map_err(|e| PipelineError::stage("link", e))?;
                let links = link_corpora(&graded, &t, &t_index, config.corpus.link_threshold);
                linked = links.values().filter(|l| l.is_some()).count() as u64;
                gained = graded.inherit_topics(&t, &links) as u64;
                info!(linked, gained_topics = gained, "corpora linked");
                graded
            }
        }
        None => graded,
    };
    let stage = CorpusStage {
        files,
        records: corpus.len() as u64,
        variant_groups: corpus.variant_groups().count() as u64,
        linked,
        gained_topics: gained,
        indexed: 0,
    };
    Ok((corpus, stage))
}

/// Runs every stage and writes artifacts plus `manifest.json` into `out_dir`.
pub fn run_pipeline(
    config: &PipelineConfig,
    inputs: &[PathBuf],
    out_dir: impl AsRef<Path>,
) -> Result<Manifest, PipelineError> {
    config.validate()?;
    if inputs.is_empty() {
        return Err(PipelineError::Config("no post files given".into()));
    }
    for p in inputs {
        if !p.is_file() {
            return Err(PipelineError::MissingFile(p.clone()));
        }
    }
    let pool = match config.threads {
        Some(n) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| PipelineError::Config(e.to_string()))?,
        ),
        None => None,
    };
    let out_dir = out_dir.as_ref();
    match pool {
        Some(pool) => pool.install(|| run_stages(config, inputs, out_dir)),
        None => run_stages(config, inputs, out_dir),
    }
}

fn run_stages(config: &PipelineConfig, inputs: &[PathBuf], out_dir: &Path) -> Result<Manifest, PipelineError> {
    let mut checksums = Vec::new();
    for p in config.referenced_files().into_iter().chain(inputs) {
        checksums.push(checksum(p)?);
    }
    let phrases = config.phrases()?;
    let mut out = Outputs::new(out_dir)?;

    let (corpus, mut corpus_stage) = load_corpora(config, &phrases)?;
    let index = build_index(&corpus, config.minhash).map_err(|e| PipelineError::stage("index", e))?;
    corpus_stage.indexed = index.len() as u64;
    info!(entries = index.len(), "index built");

    let (posts, ingest_report) = ingest_files(config, inputs)?;
    out.render("ingest", "posts.jsonl", |buf| {
        for p in &posts {
            serde_json::to_writer(&mut *buf, p).map_err(|e| e.to_string())?;
            buf.push(b'\n');
        }
        Ok(())
    })?;
    out.render("ingest", "ingest_report.json", |buf| {
        serde_json::to_writer_pretty(&mut *buf, &ingest_report).map_err(|e| e.to_string())
    })?;

    let matches = match_posts(&posts, &index, &phrases, config.threshold);
    let matched = matches.iter().filter(|m| m.matched).count() as u64;
    info!(rows = matches.len(), matched, "posts matched");
    out.render("match", "matches.csv", |buf| write_matches(buf, &matches).map_err(|e| e.to_string()))?;

    calibrate_stage(config, &mut out, &posts, &corpus, &index, &phrases, &matches)?;
    analyze_stage(config, &mut out, &corpus, &matches)?;

    let manifest = Manifest {
        tool: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
        config_sha256: config.hash(),
        inputs: checksums,
        corpus: corpus_stage,
        ingest: ingest_report,
        matching: MatchStage {
            rows: matches.len() as u64,
            matched,
            threshold: config.threshold,
            params: config.minhash,
        },
        outputs: out.entries.clone(),
    };
    let mut buf = serde_json::to_vec_pretty(&manifest).map_err(|e| PipelineError::stage("manifest", e))?;
    buf.push(b'\n');
    let path = out.dir.join(format!("{MANIFEST_FILE}.partial"));
    fs::write(&path, &buf).map_err(|e| PipelineError::stage("manifest", e))?;
    out.commit()?;
    fs::rename(&path, out.dir.join(MANIFEST_FILE)).map_err(|e| PipelineError::stage("manifest", e))?;
    Ok(manifest)
}

/// Streams every input through one [`Ingestor`], so dedup spans files.
pub fn ingest_files(config: &PipelineConfig, inputs: &[PathBuf]) -> Result<(Vec<PostRecord>, IngestReport), PipelineError> {
    let mut ingestor = Ingestor::new(config.ingest_options()).map_err(|e| PipelineError::Config(e.to_string()))?;
    let mut posts = Vec::new();
    for path in inputs {
        let file = open_source(path).map_err(|_| PipelineError::MissingFile(path.clone()))?;
        ingestor
            .ingest(file, |p| {
                posts.push(p);
                Ok(())
            })
            .map_err(|e| PipelineError::stage("ingest", format!("{}: {e}", path.display())))?;
    }
    let report = ingestor.into_report();
    info!(read = report.lines_read, emitted = report.emitted, "ingest done");
    Ok((posts, report))
}

fn calibrate_stage(
    config: &PipelineConfig,
    out: &mut Outputs,
    posts: &[PostRecord],
    corpus: &ReferenceCorpus,
    index: &crate::minhash::LshIndex,
    phrases: &PhraseSet,
    matches: &[MatchRecord],
) -> Result<(), PipelineError> {
    if posts.is_empty() {
        warn!("no posts survived ingest; skipping calibration");
        return Ok(());
    }
    if !config.analysis.sweep.is_empty() {
        let thresholds = parse_thresholds(&config.analysis.sweep).map_err(|e| PipelineError::Config(e.to_string()))?;
        // best candidate per post regardless of threshold
        let best: Vec<_> = match_posts(posts, index, phrases, 0.0).iter().map(MatchRecord::result).collect();
        let curve = sweep_results(&best, &thresholds).map_err(|e| PipelineError::stage("calibrate", e))?;
        out.render("calibrate", "calibration.csv", |buf| curve.write_csv(buf).map_err(|e| e.to_string()))?;
    }
    if config.analysis.sample_size > 0 {
        let results: Vec<_> = matches.iter().map(MatchRecord::result).collect();
        let sample = sample_for_labeling(
            &results,
            config.threshold,
            config.analysis.sample_size,
            config.analysis.sample_seed,
        );
        if let Some(w) = &sample.warning {
            warn!("{w}");
        }
        let sample = sample.with_texts(
            |id| posts.iter().find(|p| p.post_id == id).map(|p| p.text.clone()),
            |id| corpus.get(id).map(|h| h.matn_raw.clone()),
        );
        out.render("calibrate", "sample.csv", |buf| sample.write_csv(buf).map_err(|e| e.to_string()))?;
    }
    Ok(())
}

fn analyze_stage(
    config: &PipelineConfig,
    out: &mut Outputs,
    corpus: &ReferenceCorpus,
    matches: &[MatchRecord],
) -> Result<(), PipelineError> {
    let a = &config.analysis;
    let err = |e: crate::analyze::AnalyzeError| e.to_string();

    let topics = topical_distribution(matches, corpus).map_err(|e| PipelineError::stage("analyze", e))?;
    out.render("analyze", "topics.csv", |buf| write_distributions(buf, &[&topics.posts, &topics.corpus]).map_err(err))?;

    let auth = authenticity_distribution(matches, corpus).map_err(|e| PipelineError::stage("analyze", e))?;
    out.render("analyze", "authenticity.csv", |buf| write_distributions(buf, &[&auth]).map_err(err))?;

    let mut top = Vec::new();
    for level in AuthenticityLevel::ALL {
        top.extend(top_hadiths(matches, corpus, level, a.top_n).map_err(|e| PipelineError::stage("analyze", e))?);
    }
    out.render("analyze", "top_hadiths.csv", |buf| write_top_hadiths(buf, &top).map_err(err))?;

    for g in [Granularity::Weekday, Granularity::Month] {
        let hist = temporal_histograms(matches, g, a.equalize);
        out.render("analyze", &format!("temporal_{g}.csv"), |buf| write_distributions(buf, &[&hist]).map_err(err))?;
    }
    for g in [Granularity::Day, Granularity::Weekday, Granularity::Month] {
        let rep = seasonality_report(matches, g, a.min_count, a.window).map_err(|e| PipelineError::stage("analyze", e))?;
        out.render("analyze", &format!("seasonality_{g}.csv"), |buf| rep.write_csv(buf).map_err(err))?;
    }
    Ok(())
}

/// Buffered file writer that names the path in its errors.
pub fn create_file(path: &Path) -> Result<BufWriter<File>, PipelineError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| PipelineError::stage("output", format!("{}: {e}", parent.display())))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| PipelineError::stage("output", format!("{}: {e}", path.display())))
}

/// Flushes a writer from [`create_file`].
pub fn finish(mut w: impl Write, path: &Path) -> Result<(), PipelineError> {
    w.flush().map_err(|e| PipelineError::stage("output", format!("{}: {e}", path.display())))
}
