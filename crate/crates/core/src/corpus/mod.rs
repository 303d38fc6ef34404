//! Reference corpora of hadith variants.
//!
//! A graded corpus carries authenticity grades, a topical corpus carries the
//! nine top-level topic categories. Both load through [`load_reference`] into a
//! [`ReferenceCorpus`]; [`link_corpora`] and [`ReferenceCorpus::inherit_topics`]
//! carry topics across from one to the other.

mod grade;
mod link;
mod load;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::normalize::{NormalizedText, TokenSet};

pub use grade::{normalize_grade, GradeKeywords};
pub use link::{link_corpora, Link};
pub use load::{load_reference, load_reference_with, read_reference, CorpusFormat, LoadReport, RowProblem};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("missing column {0}")]
    MissingColumn(String),
    #[error("malformed header: {0}")]
    Header(#[source] csv::Error),
    #[error("duplicate record id {0}")]
    DuplicateId(u64),
    #[error("cannot determine corpus format of {0}; use .csv or .jsonl")]
    UnknownFormat(String),
    #[error("invalid grade keyword file: {0}")]
    GradeKeywords(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AuthenticityLevel {
    Authentic,
    Good,
    Weak,
    Fabricated,
    Unknown,
}

impl AuthenticityLevel {
    pub const ALL: [AuthenticityLevel; 5] = [
        AuthenticityLevel::Authentic,
        AuthenticityLevel::Good,
        AuthenticityLevel::Weak,
        AuthenticityLevel::Fabricated,
        AuthenticityLevel::Unknown,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AuthenticityLevel::Authentic => "authentic",
            AuthenticityLevel::Good => "good",
            AuthenticityLevel::Weak => "weak",
            AuthenticityLevel::Fabricated => "fabricated",
            AuthenticityLevel::Unknown => "unknown",
        }
    }
}

impl fmt::Display for AuthenticityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AuthenticityLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AuthenticityLevel::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown authenticity level {s:?}"))
    }
}

/// The nine top-level topic categories of the topical corpus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TopicCategory {
    Knowledge,
    BiographyHistory,
    Jurisprudence,
    Interpretation,
    Virtues,
    Asceticism,
    SupplicationsRemembrances,
    Doctrine,
    EthicsEtiquette,
}

impl TopicCategory {
    pub const ALL: [TopicCategory; 9] = [
        TopicCategory::Knowledge,
        TopicCategory::BiographyHistory,
        TopicCategory::Jurisprudence,
        TopicCategory::Interpretation,
        TopicCategory::Virtues,
        TopicCategory::Asceticism,
        TopicCategory::SupplicationsRemembrances,
        TopicCategory::Doctrine,
        TopicCategory::EthicsEtiquette,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TopicCategory::Knowledge => "Knowledge",
            TopicCategory::BiographyHistory => "BiographyHistory",
            TopicCategory::Jurisprudence => "Jurisprudence",
            TopicCategory::Interpretation => "Interpretation",
            TopicCategory::Virtues => "Virtues",
            TopicCategory::Asceticism => "Asceticism",
            TopicCategory::SupplicationsRemembrances => "SupplicationsRemembrances",
            TopicCategory::Doctrine => "Doctrine",
            TopicCategory::EthicsEtiquette => "EthicsEtiquette",
        }
    }

    /// Short code used in tables: K, BH, J, I, V, A, SR, D, EE.
    pub fn code(self) -> &'static str {
        match self {
            TopicCategory::Knowledge => "K",
            TopicCategory::BiographyHistory => "BH",
            TopicCategory::Jurisprudence => "J",
            TopicCategory::Interpretation => "I",
            TopicCategory::Virtues => "V",
            TopicCategory::Asceticism => "A",
            TopicCategory::SupplicationsRemembrances => "SR",
            TopicCategory::Doctrine => "D",
            TopicCategory::EthicsEtiquette => "EE",
        }
    }
}

impl fmt::Display for TopicCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TopicCategory {
    type Err = String;

    /// Accepts the code ("SR"), the compact name ("SupplicationsRemembrances")
    /// or the spelled-out name ("Supplications and Remembrances"), any case.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .split(|c: char| !c.is_alphanumeric())
            .filter(|w| !w.is_empty() && !w.eq_ignore_ascii_case("and"))
            .map(str::to_ascii_lowercase)
            .collect();
        TopicCategory::ALL
            .into_iter()
            .find(|t| key == t.name().to_ascii_lowercase() || key == t.code().to_ascii_lowercase())
            .ok_or_else(|| format!("unknown topic category {s:?}"))
    }
}

/// One reference variant.
#[derive(Clone, Debug, PartialEq)]
pub struct HadithRecord {
    pub id: u64,
    pub variant_group: u64,
    pub matn_raw: String,
    pub matn_norm: NormalizedText,
    pub token_set: TokenSet,
    pub isnad_raw: Option<String>,
    pub source_book: String,
    pub chapter: String,
    pub grade_raw: Vec<String>,
    pub grade: AuthenticityLevel,
    pub topics: BTreeSet<TopicCategory>,
    /// Label of the corpus the record was loaded from.
    pub origin: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReferenceCorpus {
    records: Vec<HadithRecord>,
    by_id: HashMap<u64, usize>,
    by_variant_group: BTreeMap<u64, Vec<u64>>,
}

impl ReferenceCorpus {
    /// Records are kept sorted by id.
    pub fn from_records(mut records: Vec<HadithRecord>) -> Result<Self, CorpusError> {
        records.sort_by_key(|r| r.id);
        if let Some(w) = records.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(CorpusError::DuplicateId(w[0].id));
        }
        let by_id = records.iter().enumerate().map(|(i, r)| (r.id, i)).collect();
        let mut by_variant_group: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for r in &records {
            by_variant_group.entry(r.variant_group).or_default().push(r.id);
        }
        Ok(ReferenceCorpus {
            records,
            by_id,
            by_variant_group,
        })
    }

    /// Concatenates two corpora; ids must not collide.
    pub fn merge(self, other: ReferenceCorpus) -> Result<Self, CorpusError> {
        let mut records = self.records;
        records.extend(other.records);
        Self::from_records(records)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[HadithRecord] {
        &self.records
    }

    pub fn get(&self, id: u64) -> Option<&HadithRecord> {
        self.by_id.get(&id).map(|&i| &self.records[i])
    }

    pub fn group_members(&self, group: u64) -> &[u64] {
        self.by_variant_group.get(&group).map_or(&[], Vec::as_slice)
    }

    pub fn variant_groups(&self) -> impl Iterator<Item = u64> + '_ {
        self.by_variant_group.keys().copied()
    }

    /// Union of the topics of every variant in the group.
    pub fn group_topics(&self, group: u64) -> BTreeSet<TopicCategory> {
        self.group_members(group)
            .iter()
            .filter_map(|id| self.get(*id))
            .flat_map(|r| r.topics.iter().copied())
            .collect()
    }

    /// Copies topics from linked records of `source` onto this corpus.
    /// Returns the number of records that gained at least one topic.
    pub fn inherit_topics(
        &mut self,
        source: &ReferenceCorpus,
        links: &BTreeMap<u64, Option<Link>>,
    ) -> usize {
        let mut changed = 0;
        for record in &mut self.records {
            let Some(Some(link)) = links.get(&record.id) else {
                continue;
            };
            let Some(target) = source.get(link.target) else {
                continue;
            };
            let before = record.topics.len();
            record.topics.extend(target.topics.iter().copied());
            if record.topics.len() > before {
                changed += 1;
            }
        }
        changed
    }
}
