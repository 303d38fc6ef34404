use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::ReferenceCorpus;
use crate::minhash::LshIndex;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Link {
    pub target: u64,
    pub jaccard: f64,
}

/// Links every record of `a` to its best-Jaccard record in `b` (through
/// `b_index`, built over `b` with the same normalization), keeping links at or
/// above `threshold`.
pub fn link_corpora(
    a: &ReferenceCorpus,
    b: &ReferenceCorpus,
    b_index: &LshIndex,
    threshold: f64,
) -> BTreeMap<u64, Option<Link>> {
    debug_assert!(b_index.entries().iter().all(|e| b.get(e.id).is_some()));
    a.records()
        .par_iter()
        .map(|rec| {
            let m = b_index.query(&rec.token_set, threshold, &rec.id.to_string());
            let link = match (m.matched, m.hadith_id) {
                (true, Some(target)) => Some(Link {
                    target,
                    jaccard: m.jaccard,
                }),
                _ => None,
            };
            (rec.id, link)
        })
        .collect()
}
