use std::cmp::Ordering;
use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use xxhash_rust::xxh3::xxh3_64;

use super::{overlap, IndexError, MinHashParams, MinHashSignature, MinHasher};
use crate::corpus::ReferenceCorpus;
use crate::normalize::TokenSet;

/// One indexed reference variant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexEntry {
    pub id: u64,
    pub variant_group: u64,
    pub tokens: TokenSet,
    pub signature: MinHashSignature,
}

/// Banded LSH index over reference variants.
///
/// Entries are sorted by id and buckets hold entry positions in ascending
/// order, so the structure depends only on the indexed data and the params.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LshIndex {
    hasher: MinHasher,
    entries: Vec<IndexEntry>,
    buckets: Vec<HashMap<u64, Vec<u32>>>,
}

/// Soft assignment of a post to its best reference variant.
///
/// `hadith_id` is the candidate with the highest exact Jaccard (ties go to
/// the smallest id); `matched` confirms it against `threshold`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub post_id: String,
    pub hadith_id: Option<u64>,
    pub variant_group: Option<u64>,
    pub jaccard: f64,
    pub matched: bool,
    pub threshold: f64,
}

impl MatchResult {
    pub fn unmatched(post_id: impl Into<String>, threshold: f64) -> Self {
        MatchResult {
            post_id: post_id.into(),
            hadith_id: None,
            variant_group: None,
            jaccard: 0.0,
            matched: false,
            threshold,
        }
    }

    /// The same assignment judged against another threshold.
    pub fn with_threshold(&self, threshold: f64) -> Self {
        MatchResult {
            matched: self.hadith_id.is_some() && self.jaccard >= threshold,
            threshold,
            ..self.clone()
        }
    }
}

pub(super) fn band_key(values: &[u64], scratch: &mut Vec<u8>) -> u64 {
    scratch.clear();
    for v in values {
        scratch.extend_from_slice(&v.to_le_bytes());
    }
    xxh3_64(scratch)
}

/// Indexes every record with a non-empty token set.
pub fn build_index(corpus: &ReferenceCorpus, params: MinHashParams) -> Result<LshIndex, IndexError> {
    LshIndex::build(
        params,
        corpus
            .records()
            .iter()
            .map(|r| (r.id, r.variant_group, r.token_set.clone()))
            .collect(),
    )
}

impl LshIndex {
    /// Builds an index from `(id, variant_group, tokens)` triples. Empty token
    /// sets are skipped. Signatures are computed in parallel; bucket contents
    /// do not depend on the number of threads.
    pub fn build(params: MinHashParams, mut items: Vec<(u64, u64, TokenSet)>) -> Result<Self, IndexError> {
        let hasher = MinHasher::new(params)?;
        items.retain(|(_, _, t)| !t.is_empty());
        items.sort_by_key(|(id, _, _)| *id);
        if let Some(w) = items.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(IndexError::InvalidParams(format!("duplicate record id {}", w[0].0)));
        }
        let entries: Vec<IndexEntry> = items
            .into_par_iter()
            .map(|(id, variant_group, tokens)| IndexEntry {
                id,
                variant_group,
                signature: hasher.signature(&tokens),
                tokens,
            })
            .collect();
        Ok(Self::from_entries(hasher, entries))
    }

    pub(super) fn from_entries(hasher: MinHasher, entries: Vec<IndexEntry>) -> Self {
        let params = *hasher.params();
        let mut buckets: Vec<HashMap<u64, Vec<u32>>> = vec![HashMap::new(); params.bands];
        let mut scratch = Vec::with_capacity(params.rows * 8);
        for (pos, entry) in entries.iter().enumerate() {
            for (band, chunk) in entry.signature.values().chunks(params.rows).enumerate() {
                let key = band_key(chunk, &mut scratch);
                buckets[band].entry(key).or_default().push(pos as u32);
            }
        }
        LshIndex {
            hasher,
            entries,
            buckets,
        }
    }

    pub(super) fn from_parts(hasher: MinHasher, entries: Vec<IndexEntry>, buckets: Vec<HashMap<u64, Vec<u32>>>) -> Self {
        LshIndex {
            hasher,
            entries,
            buckets,
        }
    }

    pub fn params(&self) -> &MinHashParams {
        self.hasher.params()
    }

    pub fn hasher(&self) -> &MinHasher {
        &self.hasher
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[IndexEntry] {
        &self.entries
    }

    pub(super) fn buckets(&self) -> &[HashMap<u64, Vec<u32>>] {
        &self.buckets
    }

    pub fn entry(&self, id: u64) -> Option<&IndexEntry> {
        self.entries
            .binary_search_by_key(&id, |e| e.id)
            .ok()
            .map(|i| &self.entries[i])
    }

    fn candidate_positions(&self, signature: &MinHashSignature) -> Vec<u32> {
        let rows = self.params().rows;
        let mut scratch = Vec::with_capacity(rows * 8);
        let mut out = Vec::new();
        for (band, chunk) in signature.values().chunks(rows).enumerate() {
            if let Some(ids) = self.buckets[band].get(&band_key(chunk, &mut scratch)) {
                out.extend_from_slice(ids);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Ids of all entries sharing at least one band bucket with `tokens`.
    pub fn candidates(&self, tokens: &TokenSet) -> Vec<u64> {
        if tokens.is_empty() {
            return Vec::new();
        }
        let sig = self.hasher.signature(tokens);
        self.candidate_positions(&sig)
            .into_iter()
            .map(|p| self.entries[p as usize].id)
            .collect()
    }

    /// Matches one post. Only LSH candidates are considered; among them the
    /// highest exact Jaccard wins, ties going to the smallest id.
    pub fn query(&self, tokens: &TokenSet, threshold: f64, post_id: &str) -> MatchResult {
        if tokens.is_empty() || self.entries.is_empty() {
            return MatchResult::unmatched(post_id, threshold);
        }
        let sig = self.hasher.signature(tokens);
        let mut best: Option<(u32, usize, usize)> = None;
        for pos in self.candidate_positions(&sig) {
            let (inter, union) = overlap(tokens, &self.entries[pos as usize].tokens);
            // positions ascend with id, so only a strictly better ratio replaces
            let better = match best {
                None => true,
                Some((_, bi, bu)) => (inter * bu).cmp(&(bi * union)) == Ordering::Greater,
            };
            if better {
                best = Some((pos, inter, union));
            }
        }
        match best {
            None => MatchResult::unmatched(post_id, threshold),
            Some((pos, inter, union)) => {
                let entry = &self.entries[pos as usize];
                let jaccard = inter as f64 / union as f64;
                MatchResult {
                    post_id: post_id.to_string(),
                    hadith_id: Some(entry.id),
                    variant_group: Some(entry.variant_group),
                    jaccard,
                    matched: jaccard >= threshold,
                    threshold,
                }
            }
        }
    }

    /// Matches many posts on the current rayon pool; output order follows input.
    pub fn query_batch<S: AsRef<str> + Sync>(&self, posts: &[(S, TokenSet)], threshold: f64) -> Vec<MatchResult> {
        posts
            .par_iter()
            .map(|(id, tokens)| self.query(tokens, threshold, id.as_ref()))
            .collect()
    }
}
