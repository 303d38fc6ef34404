//! Command-line front end. Every subcommand is a thin wrapper over the
//! library; values missing from the flags fall back to `--config`.

use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use tracing::{info, warn};

use crate::analyze::{
    authenticity_distribution, seasonality_report, temporal_histograms, top_hadiths, topical_distribution,
    write_distributions, write_distributions_json, write_top_hadiths, Granularity, WindowMode,
};
use crate::calibrate::{
    elbow, parse_thresholds, precision_by_threshold, precision_from_labels, sample_for_labeling, sweep,
    CalibrationCurve, LabelSample,
};
use crate::corpus::{link_corpora, load_reference_with, AuthenticityLevel, CorpusFormat, ReferenceCorpus};
use crate::ingest::{open_source, read_posts, DedupMode, Ingestor, PostRecord};
use crate::matches::{match_posts, read_matches, tokenize_posts, write_matches, MatchRecord};
use crate::minhash::{build_index, LshIndex, MinHashParams};
use crate::normalize::normalize;
use crate::pipeline::{create_file, finish, load_corpora, run_pipeline, PipelineConfig, PipelineError, MANIFEST_FILE};

#[derive(Debug, Parser)]
#[command(name = "hadithscope", version, about = "Fuzzy hadith quotation matching and analytics")]
pub struct Cli {
    /// TOML config supplying defaults for every subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Structured JSON logs on stderr.
    #[arg(long, global = true)]
    pub log_json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print normalized text, one line per input line.
    Normalize(NormalizeArgs),
    #[command(subcommand)]
    /// Load and link reference corpora.
    Corpus(CorpusCommand),
    #[command(subcommand)]
    /// Build or query a MinHash/LSH index.
    Index(IndexCommand),
    /// Filter raw post archives into canonical posts JSONL.
    Ingest(IngestArgs),
    #[command(subcommand)]
    /// Choose the matching threshold.
    Calibrate(CalibrateCommand),
    /// Reports over a matches table.
    Analyze(AnalyzeArgs),
    /// The whole pipeline from post archives to reports.
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct NormalizeArgs {
    /// Keyring phrase file.
    #[arg(long)]
    pub phrases: Option<PathBuf>,
    #[arg(long, conflicts_with = "input")]
    pub stdin: bool,
    pub input: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum CorpusCommand {
    /// Load a corpus and report what was kept.
    Load {
        file: PathBuf,
        #[arg(long)]
        format: Option<CorpusFormat>,
        /// Print the JSON load report.
        #[arg(long)]
        report: bool,
        #[arg(long)]
        phrases: Option<PathBuf>,
    },
    /// Link every record of A to its best match in B.
    Link {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        phrases: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum IndexCommand {
    /// Index a graded corpus into a JSONL file.
    Build {
        #[arg(long, required = true)]
        corpus: Vec<PathBuf>,
        /// Topical corpus whose topics are linked onto the records.
        #[arg(long)]
        topical: Option<PathBuf>,
        #[arg(long)]
        hashes: Option<usize>,
        #[arg(long)]
        bands: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        phrases: Option<PathBuf>,
    },
    /// Match posts against an index into matches.csv.
    Query {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        posts: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        phrases: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Language tag to keep; `any` keeps all.
    #[arg(long)]
    pub lang: Option<String>,
    /// File whose first non-comment line is the quotative phrase.
    #[arg(long, conflicts_with = "phrase")]
    pub phrase_file: Option<PathBuf>,
    #[arg(long)]
    pub phrase: Option<String>,
    /// Disable the phrase filter.
    #[arg(long, conflicts_with_all = ["phrase", "phrase_file"])]
    pub no_phrase: bool,
    #[arg(long)]
    pub dedup: Option<DedupMode>,
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Write the ingest report here instead of stderr.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum CalibrateCommand {
    /// Coverage at each threshold from one matching pass.
    Sweep {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        posts: PathBuf,
        /// start:stop:step
        #[arg(long)]
        thresholds: Option<String>,
        /// Labelled sample used to fill in the precision column.
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        phrases: Option<PathBuf>,
    },
    /// Export random matched pairs for manual labelling.
    Sample {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        posts: PathBuf,
        /// Corpus files, for the matn column.
        #[arg(long)]
        corpus: Vec<PathBuf>,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        phrases: Option<PathBuf>,
    },
    /// Precision from a labelled sample, and the elbow of a curve.
    Precision {
        #[arg(long)]
        labels: PathBuf,
        /// Sweep CSV; with 3+ labelled thresholds the elbow is printed.
        #[arg(long)]
        curve: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Report {
    Topics,
    Authenticity,
    Top,
    Temporal,
    Seasonality,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub report: Report,
    #[arg(long)]
    pub matches: PathBuf,
    /// Graded corpus files (defaults to the config's).
    #[arg(long)]
    pub corpus: Vec<PathBuf>,
    #[arg(long)]
    pub topical: Option<PathBuf>,
    #[arg(long)]
    pub level: Option<AuthenticityLevel>,
    #[arg(short = 'n', long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub granularity: Option<Granularity>,
    #[arg(long)]
    pub equalize: bool,
    #[arg(long)]
    pub min_count: Option<u64>,
    #[arg(long)]
    pub window: Option<WindowMode>,
    /// JSON instead of CSV.
    #[arg(long)]
    pub json: bool,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub phrases: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub threshold: Option<f64>,
}

/// Failure of one invocation, with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        CliError {
            code: e.exit_code(),
            message: e.to_string(),
        }
    }
}

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError {
        code: 2,
        message: e.to_string(),
    }
}

fn stage_err(stage: &str, e: impl std::fmt::Display) -> CliError {
    CliError {
        code: 1,
        message: format!("stage {stage} failed: {e}"),
    }
}

fn require(path: &Path) -> Result<(), CliError> {
    if path.exists() {
        Ok(())
    } else {
        Err(input_err(format!("input file not found: {}", path.display())))
    }
}

/// Parses the process arguments, runs, and returns the exit code.
pub fn main() -> i32 {
    let cli = Cli::parse();
    init_logging(cli.log_json);
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            tracing::error!("{}", e.message);
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn init_logging(json: bool) {
    let filter = tracing_subscriber::EnvFilter::try_from_default_env()
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info"));
    let builder = tracing_subscriber::fmt().with_env_filter(filter).with_writer(io::stderr);
    let _ = if json { builder.json().try_init() } else { builder.try_init() };
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let mut config = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    match cli.command {
        Command::Normalize(a) => {
            override_phrases(&mut config, a.phrases)?;
            cmd_normalize(&config, a.stdin, a.input)
        }
        Command::Corpus(c) => cmd_corpus(config, c),
        Command::Index(c) => cmd_index(config, c),
        Command::Ingest(a) => cmd_ingest(config, a),
        Command::Calibrate(c) => cmd_calibrate(config, c),
        Command::Analyze(a) => cmd_analyze(config, a),
        Command::Run(a) => {
            if let Some(t) = a.threads {
                config.threads = Some(t);
            }
            if let Some(t) = a.threshold {
                config.threshold = t;
            }
            let manifest = run_pipeline(&config, &a.inputs, &a.out)?;
            info!(
                posts = manifest.ingest.emitted,
                matched = manifest.matching.matched,
                manifest = %a.out.join(MANIFEST_FILE).display(),
                "run complete"
            );
            Ok(())
        }
    }
}

fn override_phrases(config: &mut PipelineConfig, phrases: Option<PathBuf>) -> Result<(), CliError> {
    if let Some(p) = phrases {
        require(&p)?;
        config.phrase_file = Some(p);
    }
    Ok(())
}

fn cmd_normalize(config: &PipelineConfig, stdin: bool, input: Option<PathBuf>) -> Result<(), CliError> {
    let phrases = config.phrases()?;
    let reader: Box<dyn BufRead> = match (&input, stdin) {
        (Some(p), _) => {
            require(p)?;
            Box::new(BufReader::new(File::open(p).map_err(input_err)?))
        }
        (None, _) => Box::new(io::stdin().lock()),
    };
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    for line in reader.lines() {
        let line = line.map_err(input_err)?;
        writeln!(out, "{}", normalize(&line, &phrases)).map_err(|e| stage_err("normalize", e))?;
    }
    out.flush().map_err(|e| stage_err("normalize", e))
}

fn corpus_format(path: &Path, given: Option<CorpusFormat>) -> Result<CorpusFormat, CliError> {
    given
        .or_else(|| CorpusFormat::from_path(path))
        .ok_or_else(|| input_err(format!("cannot tell the format of {}; pass --format", path.display())))
}

fn load_one(config: &PipelineConfig, path: &Path, format: Option<CorpusFormat>) -> Result<ReferenceCorpus, CliError> {
    require(path)?;
    let phrases = config.phrases()?;
    let grades = config.grade_keywords()?;
    let (corpus, report) = load_reference_with(path, corpus_format(path, format)?, &phrases, &grades)
        .map_err(|e| stage_err("corpus", e))?;
    info!(path = %path.display(), loaded = report.loaded, "corpus loaded");
    Ok(corpus)
}

fn cmd_corpus(mut config: PipelineConfig, cmd: CorpusCommand) -> Result<(), CliError> {
    match cmd {
        CorpusCommand::Load {
            file,
            format,
            report,
            phrases,
        } => {
            override_phrases(&mut config, phrases)?;
            require(&file)?;
            let (corpus, rep) = load_reference_with(
                &file,
                corpus_format(&file, format)?,
                &config.phrases()?,
                &config.grade_keywords()?,
            )
            .map_err(|e| stage_err("corpus", e))?;
            if report {
                print_json(&rep)?;
            } else {
                println!(
                    "{} records in {} variant groups ({} empty dropped, {} malformed)",
                    corpus.len(),
                    corpus.variant_groups().count(),
                    rep.empty_matn_dropped,
                    rep.malformed_skipped
                );
            }
            Ok(())
        }
        CorpusCommand::Link {
            a,
            b,
            threshold,
            out,
            phrases,
        } => {
            override_phrases(&mut config, phrases)?;
            let threshold = threshold.unwrap_or(config.corpus.link_threshold);
            let ca = load_one(&config, &a, None)?;
            let cb = load_one(&config, &b, None)?;
            let index = build_index(&cb, config.minhash).map_err(|e| stage_err("index", e))?;
            let links = link_corpora(&ca, &cb, &index, threshold);
            let mut w = csv::Writer::from_writer(create_file(&out)?);
            w.write_record(["a_id", "b_id", "jaccard"]).map_err(|e| stage_err("link", e))?;
            for (id, link) in &links {
                let (target, j) = match link {
                    Some(l) => (l.target.to_string(), l.jaccard.to_string()),
                    None => (String::new(), String::new()),
                };
                w.write_record([id.to_string(), target, j]).map_err(|e| stage_err("link", e))?;
            }
            w.flush().map_err(|e| stage_err("link", e))?;
            info!(linked = links.values().filter(|l| l.is_some()).count(), total = links.len(), "linked");
            Ok(())
        }
    }
}

fn read_post_file(path: &Path) -> Result<Vec<PostRecord>, CliError> {
    require(path)?;
    let file = open_source(path).map_err(input_err)?;
    let mut reader = read_posts(file).map_err(|e| stage_err("read posts", e))?;
    let posts = reader.by_ref().collect::<Result<Vec<_>, _>>().map_err(|e| stage_err("read posts", e))?;
    if reader.malformed_skipped() > 0 {
        warn!(skipped = reader.malformed_skipped(), "malformed post lines skipped");
    }
    Ok(posts)
}

fn load_index(path: &Path) -> Result<LshIndex, CliError> {
    require(path)?;
    LshIndex::load(path).map_err(|e| stage_err("index", e))
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(input_err)?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

fn cmd_index(mut config: PipelineConfig, cmd: IndexCommand) -> Result<(), CliError> {
    match cmd {
        IndexCommand::Build {
            corpus,
            topical,
            hashes,
            bands,
            seed,
            out,
            phrases,
        } => {
            override_phrases(&mut config, phrases)?;
            let base = config.minhash;
            let num_hashes = hashes.unwrap_or(base.num_hashes);
            // keep the configured rows per band unless --bands says otherwise
            let bands = bands.unwrap_or(num_hashes / base.rows);
            let params = MinHashParams::with_bands(num_hashes, bands, seed.unwrap_or(base.seed))
            .map_err(input_err)?;
            config.minhash = params;
            config.corpus.graded = corpus;
            config.corpus.topical = topical;
            for p in config.corpus.graded.iter().chain(config.corpus.topical.iter()) {
                require(p)?;
            }
            let (c, _) = load_corpora(&config, &config.phrases()?)?;
            let index = build_index(&c, params).map_err(|e| stage_err("index", e))?;
            let path = index.save(&out).map_err(|e| stage_err("index", e))?;
            info!(entries = index.len(), path = %path.display(), "index written");
            Ok(())
        }
        IndexCommand::Query {
            index,
            threshold,
            posts,
            out,
            phrases,
            threads,
        } => {
            override_phrases(&mut config, phrases)?;
            let threshold = threshold.unwrap_or(config.threshold);
            if !(0.0..=1.0).contains(&threshold) {
                return Err(input_err(format!("threshold {threshold} is outside [0, 1]")));
            }
            let index = load_index(&index)?;
            let posts = read_post_file(&posts)?;
            let phrases = config.phrases()?;
            let rows = with_threads(threads.or(config.threads), || match_posts(&posts, &index, &phrases, threshold))?;
            let mut w = create_file(&out)?;
            write_matches(&mut w, &rows).map_err(|e| stage_err("match", e))?;
            finish(w, &out)?;
            info!(rows = rows.len(), matched = rows.iter().filter(|m| m.matched).count(), "matches written");
            Ok(())
        }
    }
}

/// First line that is neither blank nor a `#` comment.
fn read_phrase_file(path: &Path) -> Result<String, CliError> {
    require(path)?;
    let text = fs::read_to_string(path).map_err(input_err)?;
    text.lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .ok_or_else(|| input_err(format!("{} holds no phrase", path.display())))
}

fn cmd_ingest(config: PipelineConfig, a: IngestArgs) -> Result<(), CliError> {
    let mut opts = config.ingest_options();
    if let Some(lang) = a.lang {
        opts.lang = (lang != "any").then_some(lang);
    }
    if let Some(p) = &a.phrase_file {
        opts.phrase = Some(read_phrase_file(p)?);
    }
    if let Some(p) = a.phrase {
        opts.phrase = Some(p);
    }
    if a.no_phrase {
        opts.phrase = None;
    }
    if let Some(d) = a.dedup {
        opts.dedup = d;
    }
    for p in &a.inputs {
        require(p)?;
    }
    let mut ingestor = Ingestor::new(opts).map_err(input_err)?;
    let mut w = create_file(&a.out)?;
    for path in &a.inputs {
        let file = open_source(path).map_err(input_err)?;
        ingestor
            .ingest(file, |p| {
                serde_json::to_writer(&mut w, &p)?;
                w.write_all(b"\n")
            })
            .map_err(|e| stage_err("ingest", format!("{}: {e}", path.display())))?;
    }
    finish(w, &a.out)?;
    let report = ingestor.into_report();
    let json = serde_json::to_string_pretty(&report).map_err(|e| stage_err("ingest", e))?;
    match a.report {
        Some(p) => fs::write(&p, json + "\n").map_err(|e| stage_err("ingest", e))?,
        None => eprintln!("{json}"),
    }
    Ok(())
}

fn cmd_calibrate(mut config: PipelineConfig, cmd: CalibrateCommand) -> Result<(), CliError> {
    match cmd {
        CalibrateCommand::Sweep {
            index,
            posts,
            thresholds,
            labels,
            out,
            phrases,
        } => {
            override_phrases(&mut config, phrases)?;
            let spec = thresholds.unwrap_or(config.analysis.sweep.clone());
            let thresholds = parse_thresholds(&spec).map_err(input_err)?;
            let index = load_index(&index)?;
            let posts = read_post_file(&posts)?;
            let tokens = tokenize_posts(&posts, &config.phrases()?);
            let mut curve = sweep(&tokens, &index, &thresholds).map_err(|e| stage_err("calibrate", e))?;
            if let Some(l) = labels {
                let sample = read_labels(&l)?;
                for (t, p) in precision_by_threshold(&sample).map_err(|e| stage_err("calibrate", e))? {
                    let t: f64 = t.parse().map_err(input_err)?;
                    if !curve.set_precision(t, p) {
                        warn!(threshold = t, "labelled threshold is not on the sweep grid");
                    }
                }
            }
            let mut w = create_file(&out)?;
            curve.write_csv(&mut w).map_err(|e| stage_err("calibrate", e))?;
            Ok(finish(w, &out)?)
        }
        CalibrateCommand::Sample {
            index,
            posts,
            corpus,
            threshold,
            n,
            seed,
            out,
            phrases,
        } => {
            override_phrases(&mut config, phrases)?;
            let threshold = threshold.unwrap_or(config.threshold);
            let index = load_index(&index)?;
            let posts = read_post_file(&posts)?;
            let phrases = config.phrases()?;
            let best: Vec<_> = match_posts(&posts, &index, &phrases, 0.0).iter().map(MatchRecord::result).collect();
            let sample = sample_for_labeling(
                &best,
                threshold,
                n.unwrap_or(config.analysis.sample_size),
                seed.unwrap_or(config.analysis.sample_seed),
            );
            if let Some(w) = &sample.warning {
                warn!("{w}");
                eprintln!("warning: {w}");
            }
            let mut corpora = ReferenceCorpus::default();
            for c in &corpus {
                corpora = corpora.merge(load_one(&config, c, None)?).map_err(|e| stage_err("corpus", e))?;
            }
            let sample = sample.with_texts(
                |id| posts.iter().find(|p| p.post_id == id).map(|p| p.text.clone()),
                |id| corpora.get(id).map(|h| h.matn_raw.clone()),
            );
            let mut w = create_file(&out)?;
            sample.write_csv(&mut w).map_err(|e| stage_err("calibrate", e))?;
            Ok(finish(w, &out)?)
        }
        CalibrateCommand::Precision { labels, curve } => {
            let sample = read_labels(&labels)?;
            let overall = precision_from_labels(&sample).map_err(|e| stage_err("calibrate", e))?;
            println!("precision,{overall}");
            let by_t = precision_by_threshold(&sample).map_err(|e| stage_err("calibrate", e))?;
            for (t, p) in &by_t {
                println!("{t},{p}");
            }
            if let Some(c) = curve {
                require(&c)?;
                let mut curve =
                    CalibrationCurve::read_csv(File::open(&c).map_err(input_err)?).map_err(|e| stage_err("calibrate", e))?;
                for (t, p) in by_t {
                    curve.set_precision(t.parse().map_err(input_err)?, p);
                }
                let e = elbow(&curve).map_err(|e| stage_err("calibrate", e))?;
                println!("elbow,{e}");
            }
            Ok(())
        }
    }
}

fn read_labels(path: &Path) -> Result<LabelSample, CliError> {
    require(path)?;
    LabelSample::read_csv(File::open(path).map_err(input_err)?).map_err(|e| stage_err("calibrate", e))
}

fn print_json<T: Serialize>(v: &T) -> Result<(), CliError> {
    let s = serde_json::to_string_pretty(v).map_err(|e| stage_err("output", e))?;
    println!("{s}");
    Ok(())
}

fn cmd_analyze(mut config: PipelineConfig, a: AnalyzeArgs) -> Result<(), CliError> {
    override_phrases(&mut config, a.phrases.clone())?;
    if !a.corpus.is_empty() {
        config.corpus.graded = a.corpus.clone();
        config.corpus.topical = a.topical.clone();
    } else if a.topical.is_some() {
        config.corpus.topical = a.topical.clone();
    }
    require(&a.matches)?;
    let matches = read_matches(File::open(&a.matches).map_err(input_err)?).map_err(|e| stage_err("analyze", e))?;
    let needs_corpus = matches!(a.report, Report::Topics | Report::Authenticity | Report::Top);
    let corpus = if needs_corpus {
        for p in config.corpus.graded.iter().chain(config.corpus.topical.iter()) {
            require(p)?;
        }
        if config.corpus.graded.is_empty() && config.corpus.topical.is_none() {
            return Err(input_err("this report needs --corpus"));
        }
        load_corpora(&config, &config.phrases()?)?.0
    } else {
        ReferenceCorpus::default()
    };

    let mut buf = Vec::new();
    let err = |e: crate::analyze::AnalyzeError| stage_err("analyze", e);
    match a.report {
        Report::Topics => {
            let r = topical_distribution(&matches, &corpus).map_err(err)?;
            if a.json {
                write_distributions_json(&mut buf, &[&r.posts, &r.corpus]).map_err(err)?;
            } else {
                write_distributions(&mut buf, &[&r.posts, &r.corpus]).map_err(err)?;
            }
        }
        Report::Authenticity => {
            let r = authenticity_distribution(&matches, &corpus).map_err(err)?;
            if a.json {
                write_distributions_json(&mut buf, &[&r]).map_err(err)?;
            } else {
                write_distributions(&mut buf, &[&r]).map_err(err)?;
            }
        }
        Report::Top => {
            let levels = match a.level {
                Some(l) => vec![l],
                None => AuthenticityLevel::ALL.to_vec(),
            };
            let mut rows = Vec::new();
            for l in levels {
                rows.extend(top_hadiths(&matches, &corpus, l, a.n.unwrap_or(config.analysis.top_n)).map_err(err)?);
            }
            if a.json {
                serde_json::to_writer_pretty(&mut buf, &rows).map_err(|e| stage_err("analyze", e))?;
            } else {
                write_top_hadiths(&mut buf, &rows).map_err(err)?;
            }
        }
        Report::Temporal => {
            let g = a.granularity.unwrap_or(Granularity::Weekday);
            let r = temporal_histograms(&matches, g, a.equalize);
            if a.json {
                write_distributions_json(&mut buf, &[&r]).map_err(err)?;
            } else {
                write_distributions(&mut buf, &[&r]).map_err(err)?;
            }
        }
        Report::Seasonality => {
            let g = a.granularity.unwrap_or(Granularity::Day);
            let r = seasonality_report(
                &matches,
                g,
                a.min_count.unwrap_or(config.analysis.min_count),
                a.window.unwrap_or(config.analysis.window),
            )
            .map_err(err)?;
            if a.json {
                r.write_json(&mut buf).map_err(err)?;
            } else {
                r.write_csv(&mut buf).map_err(err)?;
            }
        }
    }
    match &a.out {
        Some(p) => {
            let mut w = create_file(p)?;
            w.write_all(&buf).map_err(|e| stage_err("output", e))?;
            finish(w, p)?;
        }
        None => io::stdout().write_all(&buf).map_err(|e| stage_err("output", e))?,
    }
    Ok(())
}
