//! Analytics over the match table: topical and authenticity distributions,
//! most-shared hadiths, weekday/month histograms and Gini seasonality.
//!
//! Everything here is an integer fold over [`MatchRecord`]s; ratios are only
//! formed when a report row is written.

mod gini;
mod temporal;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{AuthenticityLevel, HadithRecord, ReferenceCorpus, TopicCategory};
use crate::matches::MatchRecord;

pub use gini::gini;
pub use temporal::{
    daily_series, histogram_in, seasonality_report, temporal_histograms, DailyCountSeries, GiniReport, GiniRow, Granularity,
    Window, WindowMode, DEFAULT_MIN_COUNT,
};

#[derive(Debug, Error)]
pub enum AnalyzeError {
    #[error("post {post_id} is matched to hadith {hadith_id}, which is not in the corpus")]
    MissingHadith { post_id: String, hadith_id: u64 },
    #[error("gini of an empty vector is undefined")]
    EmptyCounts,
    #[error("gini of an all-zero vector is undefined")]
    AllZeroCounts,
    #[error("unknown granularity {0:?}; use day, weekday or month")]
    BadGranularity(String),
    #[error("unknown window mode {0:?}; use global or active")]
    BadWindowMode(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistributionRow {
    pub key: String,
    pub count: u64,
}

/// Counts per key over an explicit denominator.
///
/// For single-label keys the counts sum to `denominator`; for topics they
/// may exceed it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistributionReport {
    pub series: String,
    pub denominator: u64,
    pub rows: Vec<DistributionRow>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    series: &'a str,
    key: &'a str,
    count: u64,
    denominator: u64,
    percent: f64,
}

impl DistributionReport {
    fn new(series: &str, denominator: u64, rows: impl IntoIterator<Item = (String, u64)>) -> Self {
        DistributionReport {
            series: series.to_string(),
            denominator,
            rows: rows.into_iter().map(|(key, count)| DistributionRow { key, count }).collect(),
        }
    }

    /// Percentage in [0, 100]; 0 when the denominator is 0.
    pub fn percent(&self, key: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.key == key).map(|r| self.percent_of(r.count))
    }

    fn percent_of(&self, count: u64) -> f64 {
        if self.denominator == 0 {
            0.0
        } else {
            count as f64 * 100.0 / self.denominator as f64
        }
    }

    pub fn count(&self, key: &str) -> Option<u64> {
        self.rows.iter().find(|r| r.key == key).map(|r| r.count)
    }

    pub fn total(&self) -> u64 {
        self.rows.iter().map(|r| r.count).sum()
    }
}

/// Writes one or more reports as `series,key,count,denominator,percent`.
pub fn write_distributions<W: Write>(out: W, reports: &[&DistributionReport]) -> Result<(), AnalyzeError> {
    let mut w = csv::Writer::from_writer(out);
    for rep in reports {
        for row in &rep.rows {
            w.serialize(CsvRow {
                series: &rep.series,
                key: &row.key,
                count: row.count,
                denominator: rep.denominator,
                percent: rep.percent_of(row.count),
            })?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Serialize)]
struct JsonReport<'a> {
    series: &'a str,
    denominator: u64,
    rows: Vec<JsonRow<'a>>,
}

#[derive(Serialize)]
struct JsonRow<'a> {
    key: &'a str,
    count: u64,
    percent: f64,
}

/// JSON mirror of [`write_distributions`].
pub fn write_distributions_json<W: Write>(out: W, reports: &[&DistributionReport]) -> Result<(), AnalyzeError> {
    let json: Vec<JsonReport> = reports
        .iter()
        .map(|rep| JsonReport {
            series: &rep.series,
            denominator: rep.denominator,
            rows: rep
                .rows
                .iter()
                .map(|r| JsonRow {
                    key: &r.key,
                    count: r.count,
                    percent: rep.percent_of(r.count),
                })
                .collect(),
        })
        .collect();
    serde_json::to_writer_pretty(out, &json)?;
    Ok(())
}

/// The corpus record behind each confirmed match, in table order.
fn resolve<'a>(
    matches: &'a [MatchRecord],
    corpus: &'a ReferenceCorpus,
) -> Result<Vec<(&'a MatchRecord, &'a HadithRecord)>, AnalyzeError> {
    matches
        .iter()
        .filter(|m| m.matched)
        .filter_map(|m| m.hadith_id.map(|id| (m, id)))
        .map(|(m, id)| {
            corpus.get(id).map(|h| (m, h)).ok_or_else(|| AnalyzeError::MissingHadith {
                post_id: m.post_id.clone(),
                hadith_id: id,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TopicalReport {
    /// Matched posts per category of their hadith group.
    pub posts: DistributionReport,
    /// Reference records per category, for comparison.
    pub corpus: DistributionReport,
}

/// Topic shares among matched posts whose hadith group has at least one
/// topic, alongside the same shares over the reference records.
pub fn topical_distribution(matches: &[MatchRecord], corpus: &ReferenceCorpus) -> Result<TopicalReport, AnalyzeError> {
    let mut group_topics: BTreeMap<u64, BTreeSet<TopicCategory>> = BTreeMap::new();
    let mut counts = [0u64; 9];
    let mut denominator = 0;
    for (_, h) in resolve(matches, corpus)? {
        let topics = group_topics
            .entry(h.variant_group)
            .or_insert_with(|| corpus.group_topics(h.variant_group));
        if topics.is_empty() {
            continue;
        }
        denominator += 1;
        for t in topics.iter() {
            counts[topic_slot(*t)] += 1;
        }
    }

    let mut base = [0u64; 9];
    let mut base_denominator = 0;
    for r in corpus.records().iter().filter(|r| !r.topics.is_empty()) {
        base_denominator += 1;
        for t in &r.topics {
            base[topic_slot(*t)] += 1;
        }
    }

    let rows = |c: [u64; 9]| {
        TopicCategory::ALL
            .iter()
            .zip(c)
            .map(|(t, n)| (t.name().to_string(), n))
            .collect::<Vec<_>>()
    };
    Ok(TopicalReport {
        posts: DistributionReport::new("posts", denominator, rows(counts)),
        corpus: DistributionReport::new("corpus", base_denominator, rows(base)),
    })
}

fn topic_slot(t: TopicCategory) -> usize {
    TopicCategory::ALL.iter().position(|&x| x == t).expect("every topic is in ALL")
}

pub const UNMATCHED_KEY: &str = "unmatched";

/// Posts per grade of the matched record, plus an `unmatched` bucket, over
/// all posts.
pub fn authenticity_distribution(
    matches: &[MatchRecord],
    corpus: &ReferenceCorpus,
) -> Result<DistributionReport, AnalyzeError> {
    let mut counts: BTreeMap<AuthenticityLevel, u64> = AuthenticityLevel::ALL.iter().map(|&l| (l, 0)).collect();
    let resolved = resolve(matches, corpus)?;
    for (_, h) in &resolved {
        *counts.get_mut(&h.grade).expect("all levels present") += 1;
    }
    let unmatched = matches.len() as u64 - resolved.len() as u64;
    let rows = AuthenticityLevel::ALL
        .iter()
        .map(|l| (l.as_str().to_string(), counts[l]))
        .chain(std::iter::once((UNMATCHED_KEY.to_string(), unmatched)));
    Ok(DistributionReport::new("authenticity", matches.len() as u64, rows))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TopHadith {
    pub level: AuthenticityLevel,
    pub rank: usize,
    pub variant_group: u64,
    pub count: u64,
    /// Most-matched variant of the group at this level.
    pub hadith_id: u64,
    pub matn: String,
    pub topics: BTreeSet<TopicCategory>,
}

/// The `n` variant groups with the most matched posts whose matched record
/// has grade `level`; ties go to the smaller group id.
pub fn top_hadiths(
    matches: &[MatchRecord],
    corpus: &ReferenceCorpus,
    level: AuthenticityLevel,
    n: usize,
) -> Result<Vec<TopHadith>, AnalyzeError> {
    let mut per_group: BTreeMap<u64, BTreeMap<u64, u64>> = BTreeMap::new();
    for (_, h) in resolve(matches, corpus)? {
        if h.grade == level {
            *per_group.entry(h.variant_group).or_default().entry(h.id).or_default() += 1;
        }
    }
    let mut ranked: Vec<(u64, u64, u64)> = per_group
        .iter()
        .map(|(&group, variants)| {
            let total = variants.values().sum();
            // max count, then smallest id
            let (&best, _) = variants
                .iter()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                .expect("group has at least one variant");
            (group, total, best)
        })
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(ranked
        .into_iter()
        .take(n)
        .enumerate()
        .map(|(i, (group, count, id))| TopHadith {
            level,
            rank: i + 1,
            variant_group: group,
            count,
            hadith_id: id,
            matn: corpus.get(id).map(|h| h.matn_raw.clone()).unwrap_or_default(),
            topics: corpus.group_topics(group),
        })
        .collect())
}

#[derive(Serialize)]
struct TopRow<'a> {
    level: &'a str,
    rank: usize,
    variant_group: u64,
    count: u64,
    hadith_id: u64,
    topics: String,
    matn: &'a str,
}

/// Writes `level,rank,variant_group,count,hadith_id,topics,matn`; topics are
/// `;`-separated codes.
pub fn write_top_hadiths<W: Write>(out: W, rows: &[TopHadith]) -> Result<(), AnalyzeError> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(["level", "rank", "variant_group", "count", "hadith_id", "topics", "matn"])?;
    }
    for r in rows {
        w.serialize(TopRow {
            level: r.level.as_str(),
            rank: r.rank,
            variant_group: r.variant_group,
            count: r.count,
            hadith_id: r.hadith_id,
            topics: r.topics.iter().map(|t| t.code()).collect::<Vec<_>>().join(";"),
            matn: &r.matn,
        })?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

impl FromStr for Granularity {
    type Err = AnalyzeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "day" | "daily" => Ok(Granularity::Day),
            "weekday" | "week" => Ok(Granularity::Weekday),
            "month" | "monthly" => Ok(Granularity::Month),
            _ => Err(AnalyzeError::BadGranularity(s.to_string())),
        }
    }
}

impl FromStr for WindowMode {
    type Err = AnalyzeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "global" => Ok(WindowMode::Global),
            "active" => Ok(WindowMode::Active),
            _ => Err(AnalyzeError::BadWindowMode(s.to_string())),
        }
    }
}
