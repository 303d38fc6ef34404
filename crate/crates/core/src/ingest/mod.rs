//! Streaming ingestion of social-media posts from archive-style JSONL.
//!
//! Input lines are tweet objects (`id_str`/`id`, `text`/`full_text`, `lang`,
//! `created_at`) or the canonical [`PostRecord`] form written by this crate.
//! Sources may be gzip or bzip2 compressed; compression is detected from the
//! magic bytes. Memory use is bounded by the dedup state, not by input size.
//!
//! Stage order is parse → language → phrase → dedup, and [`IngestReport`]
//! counts each line exactly once at the stage that dropped it.

mod filters;
mod source;

use std::io::{BufRead, Read};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

pub use filters::{dedup, filter_lang, filter_phrase, DedupMode, DedupVerdict, Deduper, PhraseMatcher};
pub use source::{decompress, open_source};

/// The quotative phrase used to select hadith-bearing posts.
pub const DEFAULT_QUOTE_PHRASE: &str = "قال رسول الله";
pub const DEFAULT_LANG: &str = "ar";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("I/O error at byte offset {offset}: {source}")]
    Io {
        offset: u64,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot open {path}: {source}")]
    Open {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("filter phrase is empty after letter folding")]
    EmptyPhrase,
    #[error("cannot write output: {0}")]
    Sink(#[source] std::io::Error),
}

/// One social-media post.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostRecord {
    pub post_id: String,
    pub text: String,
    pub lang: String,
    #[serde(rename = "ts_utc", with = "rfc3339_seconds")]
    pub timestamp: DateTime<Utc>,
}

pub(crate) mod rfc3339_seconds {
    use chrono::{DateTime, SecondsFormat, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(ts: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&ts.to_rfc3339_opts(SecondsFormat::Secs, true))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let s = String::deserialize(d)?;
        DateTime::parse_from_rfc3339(&s)
            .map(|t| t.with_timezone(&Utc))
            .map_err(serde::de::Error::custom)
    }
}

impl PostRecord {
    pub fn ts_utc(&self) -> String {
        self.timestamp.to_rfc3339_opts(SecondsFormat::Secs, true)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub lines_read: u64,
    pub malformed_skipped: u64,
    pub lang_filtered: u64,
    pub phrase_filtered: u64,
    pub duplicates_dropped: u64,
    pub emitted: u64,
    /// Part of `duplicates_dropped` caused by a repeated post id.
    pub duplicate_ids: u64,
    /// Part of `duplicates_dropped` caused by repeated normalized text.
    pub duplicate_texts: u64,
}

impl IngestReport {
    pub fn is_conserved(&self) -> bool {
        self.lines_read
            == self.malformed_skipped
                + self.lang_filtered
                + self.phrase_filtered
                + self.duplicates_dropped
                + self.emitted
    }
}

/// Extracts a post from one parsed JSON line.
fn parse_post(v: &Value) -> Option<PostRecord> {
    let obj = v.as_object()?;
    let str_field = |k: &str| obj.get(k).and_then(Value::as_str).filter(|s| !s.is_empty());

    let post_id = str_field("post_id")
        .or_else(|| str_field("id_str"))
        .map(str::to_string)
        .or_else(|| match obj.get("id")? {
            Value::Number(n) => Some(n.to_string()),
            Value::String(s) if !s.is_empty() => Some(s.clone()),
            _ => None,
        })?;

    let text = obj
        .get("extended_tweet")
        .and_then(|e| e.get("full_text"))
        .and_then(Value::as_str)
        .filter(|s| !s.is_empty())
        .or_else(|| str_field("full_text"))
        .or_else(|| str_field("text"))?
        .to_string();

    let lang = obj.get("lang").and_then(Value::as_str)?.to_string();

    let timestamp = if let Some(ts) = str_field("ts_utc") {
        DateTime::parse_from_rfc3339(ts).ok()?.with_timezone(&Utc)
    } else if let Some(ts) = str_field("created_at") {
        parse_created_at(ts)?
    } else {
        let ms = match obj.get("timestamp_ms")? {
            Value::String(s) => s.parse::<i64>().ok()?,
            Value::Number(n) => n.as_i64()?,
            _ => return None,
        };
        DateTime::from_timestamp_millis(ms)?
    };
    // seconds precision
    let timestamp = DateTime::from_timestamp(timestamp.timestamp(), 0)?;

    Some(PostRecord {
        post_id,
        text,
        lang,
        timestamp,
    })
}

/// Parses Twitter's `created_at` ("Wed Oct 10 20:19:24 +0000 2018") or RFC 3339.
pub fn parse_created_at(s: &str) -> Option<DateTime<Utc>> {
    DateTime::parse_from_str(s, "%a %b %d %H:%M:%S %z %Y")
        .or_else(|_| DateTime::parse_from_rfc3339(s))
        .ok()
        .map(|t| t.with_timezone(&Utc))
}

/// Reads posts from line-delimited JSON.
///
/// Malformed lines are skipped and counted; blank lines are ignored. An I/O
/// failure is yielded once as an error carrying the byte offset, after which
/// the iterator ends.
pub struct PostReader<R> {
    inner: R,
    offset: u64,
    buf: Vec<u8>,
    lines_read: u64,
    malformed: u64,
    failed: bool,
}

impl<R: BufRead> PostReader<R> {
    pub fn new(inner: R) -> Self {
        PostReader {
            inner,
            offset: 0,
            buf: Vec::new(),
            lines_read: 0,
            malformed: 0,
            failed: false,
        }
    }

    pub fn lines_read(&self) -> u64 {
        self.lines_read
    }

    pub fn malformed_skipped(&self) -> u64 {
        self.malformed
    }
}

impl<R: BufRead> Iterator for PostReader<R> {
    type Item = Result<PostRecord, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            self.buf.clear();
            let n = match self.inner.read_until(b'\n', &mut self.buf) {
                Ok(n) => n,
                Err(source) => {
                    self.failed = true;
                    return Some(Err(IngestError::Io {
                        offset: self.offset,
                        source,
                    }));
                }
            };
            if n == 0 {
                return None;
            }
            self.offset += n as u64;
            if self.buf.iter().all(u8::is_ascii_whitespace) {
                continue;
            }
            self.lines_read += 1;
            let post = serde_json::from_slice::<Value>(&self.buf).ok().and_then(|v| parse_post(&v));
            match post {
                Some(p) => return Some(Ok(p)),
                None => self.malformed += 1,
            }
        }
    }
}

/// Convenience wrapper: a reader over a possibly compressed byte stream.
pub fn read_posts<R: Read + 'static>(source: R) -> Result<PostReader<Box<dyn BufRead>>, IngestError> {
    let inner = decompress(source).map_err(|source| IngestError::Io { offset: 0, source })?;
    Ok(PostReader::new(inner))
}

#[derive(Clone, Debug)]
pub struct IngestOptions {
    /// Exact language tag to keep; `None` keeps every language.
    pub lang: Option<String>,
    /// Quotative phrase a post must contain; `None` disables the filter.
    pub phrase: Option<String>,
    pub dedup: DedupMode,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            lang: Some(DEFAULT_LANG.to_string()),
            phrase: Some(DEFAULT_QUOTE_PHRASE.to_string()),
            dedup: DedupMode::Id,
        }
    }
}

/// The full ingest stage. One instance may consume several sources; dedup
/// state and counters carry across them.
pub struct Ingestor {
    lang: Option<String>,
    phrase: Option<PhraseMatcher>,
    dedup: Deduper,
    report: IngestReport,
}

impl Ingestor {
    pub fn new(options: IngestOptions) -> Result<Self, IngestError> {
        let phrase = options.phrase.as_deref().map(PhraseMatcher::new).transpose()?;
        Ok(Ingestor {
            lang: options.lang,
            phrase,
            dedup: Deduper::new(options.dedup),
            report: IngestReport::default(),
        })
    }

    /// Streams one source through the filters, handing each surviving post to `sink`.
    pub fn ingest<R, F>(&mut self, source: R, mut sink: F) -> Result<(), IngestError>
    where
        R: Read + 'static,
        F: FnMut(PostRecord) -> std::io::Result<()>,
    {
        let mut reader = read_posts(source)?;
        let result = (|| {
            for post in reader.by_ref() {
                let post = post?;
                if self.lang.as_ref().is_some_and(|l| post.lang != *l) {
                    self.report.lang_filtered += 1;
                    continue;
                }
                if self.phrase.as_ref().is_some_and(|p| !p.matches(&post.text)) {
                    self.report.phrase_filtered += 1;
                    continue;
                }
                match self.dedup.check(&post) {
                    DedupVerdict::Fresh => {}
                    DedupVerdict::DuplicateId => {
                        self.report.duplicates_dropped += 1;
                        self.report.duplicate_ids += 1;
                        continue;
                    }
                    DedupVerdict::DuplicateText => {
                        self.report.duplicates_dropped += 1;
                        self.report.duplicate_texts += 1;
                        continue;
                    }
                }
                self.report.emitted += 1;
                sink(post).map_err(IngestError::Sink)?;
            }
            Ok(())
        })();
        self.report.lines_read += reader.lines_read();
        self.report.malformed_skipped += reader.malformed_skipped();
        result
    }

    pub fn report(&self) -> &IngestReport {
        &self.report
    }

    pub fn into_report(self) -> IngestReport {
        self.report
    }
}
