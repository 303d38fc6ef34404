use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use xxhash_rust::xxh3::xxh3_128;

use super::{IngestError, PostRecord};
use crate::normalize::{normalize, normalize_letters, PhraseSet};

/// Keeps posts whose language tag equals `tag` exactly (`ar-SA` is not `ar`).
pub fn filter_lang<'a, I>(posts: I, tag: &'a str) -> impl Iterator<Item = PostRecord> + 'a
where
    I: IntoIterator<Item = PostRecord> + 'a,
{
    posts.into_iter().filter(move |p| p.lang == tag)
}

/// Substring match after letter folding of both sides, so diacritized or
/// kashida-stretched spellings of the phrase still hit.
#[derive(Clone, Debug)]
pub struct PhraseMatcher {
    folded: String,
}

impl PhraseMatcher {
    pub fn new(phrase: &str) -> Result<Self, IngestError> {
        let folded = normalize_letters(phrase.trim());
        if folded.is_empty() {
            return Err(IngestError::EmptyPhrase);
        }
        Ok(PhraseMatcher { folded })
    }

    pub fn matches(&self, text: &str) -> bool {
        normalize_letters(text).contains(&self.folded)
    }
}

pub fn filter_phrase<'a, I>(posts: I, phrase: &'a PhraseMatcher) -> impl Iterator<Item = PostRecord> + 'a
where
    I: IntoIterator<Item = PostRecord> + 'a,
{
    posts.into_iter().filter(move |p| phrase.matches(&p.text))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DedupMode {
    /// Drop repeated post ids.
    #[default]
    Id,
    /// Also drop posts whose normalized text was already seen (collapses retweets).
    Text,
}

impl std::str::FromStr for DedupMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "id" => Ok(DedupMode::Id),
            "text" => Ok(DedupMode::Text),
            other => Err(format!("unknown dedup mode {other:?} (expected id or text)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DedupVerdict {
    Fresh,
    DuplicateId,
    DuplicateText,
}

/// Stateful dedup stage. Must see posts in one serialized order.
#[derive(Debug, Default)]
pub struct Deduper {
    mode: DedupMode,
    ids: HashSet<String>,
    // 128-bit digests of normalized text keep memory flat per post
    texts: HashSet<u128>,
}

impl Deduper {
    pub fn new(mode: DedupMode) -> Self {
        Deduper {
            mode,
            ..Deduper::default()
        }
    }

    pub fn check(&mut self, post: &PostRecord) -> DedupVerdict {
        if self.ids.contains(&post.post_id) {
            return DedupVerdict::DuplicateId;
        }
        if self.mode == DedupMode::Text {
            let norm = normalize(&post.text, &PhraseSet::empty());
            if !self.texts.insert(xxh3_128(norm.as_str().as_bytes())) {
                self.ids.insert(post.post_id.clone());
                return DedupVerdict::DuplicateText;
            }
        }
        self.ids.insert(post.post_id.clone());
        DedupVerdict::Fresh
    }
}

pub fn dedup<I>(posts: I, mode: DedupMode) -> impl Iterator<Item = PostRecord>
where
    I: IntoIterator<Item = PostRecord>,
{
    let mut state = Deduper::new(mode);
    posts.into_iter().filter(move |p| state.check(p) == DedupVerdict::Fresh)
}
