//! The match table: one row per post, written by `index query` and read by
//! the analytics.
//!
//! Columns: `post_id,ts_utc,hadith_id,variant_group,jaccard,matched,threshold`.

use std::io::{Read, Write};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use rayon::prelude::*;

use crate::ingest::{rfc3339_seconds, PostRecord};
use crate::minhash::{LshIndex, MatchResult};
use crate::normalize::{normalize, tokenize, PhraseSet, TokenSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub post_id: String,
    #[serde(with = "rfc3339_seconds")]
    pub ts_utc: DateTime<Utc>,
    pub hadith_id: Option<u64>,
    pub variant_group: Option<u64>,
    pub jaccard: f64,
    pub matched: bool,
    pub threshold: f64,
}

impl MatchRecord {
    pub fn new(result: MatchResult, ts_utc: DateTime<Utc>) -> Self {
        MatchRecord {
            post_id: result.post_id,
            ts_utc,
            hadith_id: result.hadith_id,
            variant_group: result.variant_group,
            jaccard: result.jaccard,
            matched: result.matched,
            threshold: result.threshold,
        }
    }

    /// Group of the confirmed match, if any.
    pub fn matched_group(&self) -> Option<u64> {
        if self.matched {
            self.variant_group
        } else {
            None
        }
    }

    pub fn result(&self) -> MatchResult {
        MatchResult {
            post_id: self.post_id.clone(),
            hadith_id: self.hadith_id,
            variant_group: self.variant_group,
            jaccard: self.jaccard,
            matched: self.matched,
            threshold: self.threshold,
        }
    }
}

/// Normalizes and tokenizes post texts in parallel, preserving order.
pub fn tokenize_posts(posts: &[PostRecord], phrases: &PhraseSet) -> Vec<(String, TokenSet)> {
    posts
        .par_iter()
        .map(|p| (p.post_id.clone(), tokenize(&normalize(&p.text, phrases))))
        .collect()
}

/// Matches every post against the index; one row per post, in input order.
pub fn match_posts(posts: &[PostRecord], index: &LshIndex, phrases: &PhraseSet, threshold: f64) -> Vec<MatchRecord> {
    let tokens = tokenize_posts(posts, phrases);
    index
        .query_batch(&tokens, threshold)
        .into_iter()
        .zip(posts)
        .map(|(r, p)| MatchRecord::new(r, p.timestamp))
        .collect()
}

pub fn write_matches<W: Write>(out: W, rows: &[MatchRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matches<R: Read>(input: R) -> csv::Result<Vec<MatchRecord>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    #[test]
    fn csv_round_trip() {
        let ts = Utc.with_ymd_and_hms(2021, 4, 2, 10, 0, 0).unwrap();
        let rows = vec![
            MatchRecord {
                post_id: "a".into(),
                ts_utc: ts,
                hadith_id: Some(4),
                variant_group: Some(2),
                jaccard: 7.0 / 20.0,
                matched: true,
                threshold: 0.35,
            },
            MatchRecord::new(MatchResult::unmatched("b", 0.35), ts),
        ];
        let mut buf = Vec::new();
        write_matches(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("post_id,ts_utc,hadith_id,variant_group,jaccard,matched,threshold\n"));
        assert!(text.contains("a,2021-04-02T10:00:00Z,4,2,0.35,true,0.35"));
        assert!(text.contains("b,2021-04-02T10:00:00Z,,,0.0,false,0.35"));
        assert_eq!(read_matches(buf.as_slice()).unwrap(), rows);
    }
}
