//! MinHash sketches, banded LSH retrieval and exact-Jaccard matching.
//!
//! Each token is hashed once with xxh3; slot `i` of a signature is the minimum
//! over tokens of `((a_i * x + b_i) mod 2^128) >> 64`, a multiply-add-shift
//! family whose 128-bit coefficients come from a ChaCha stream seeded by
//! [`MinHashParams::seed`]. Signatures are therefore identical on every
//! platform for a given seed.
//!
//! The index only proposes candidates. Whether a post matches is always
//! decided on the exact Jaccard index of the token sets, so the MinHash
//! estimate never changes a verdict; LSH can only miss candidates.

mod index;
mod store;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use xxhash_rust::xxh3::xxh3_64;

use crate::normalize::TokenSet;

pub use index::{build_index, IndexEntry, LshIndex, MatchResult};

/// Jaccard threshold above which a soft assignment is confirmed.
pub const DEFAULT_THRESHOLD: f64 = 0.35;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("invalid MinHash parameters: {0}")]
    InvalidParams(String),
    #[error("signatures were built with different parameters ({0})")]
    ParamMismatch(String),
    #[error("threshold {0} is outside [0, 1]")]
    InvalidThreshold(f64),
    #[error("index I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt index file, line {line}: {reason}")]
    Corrupt { line: usize, reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MinHashParams {
    pub num_hashes: usize,
    pub bands: usize,
    pub rows: usize,
    pub seed: u64,
}

impl Default for MinHashParams {
    /// 128 hashes in 64 bands of 2 rows: a pair at Jaccard 0.35 becomes a
    /// candidate with probability 1 - (1 - 0.35^2)^64 ≈ 0.9998.
    fn default() -> Self {
        MinHashParams {
            num_hashes: 128,
            bands: 64,
            rows: 2,
            seed: 7,
        }
    }
}

impl MinHashParams {
    /// Splits `num_hashes` into `bands` bands.
    pub fn with_bands(num_hashes: usize, bands: usize, seed: u64) -> Result<Self, IndexError> {
        if bands == 0 || !num_hashes.is_multiple_of(bands) {
            return Err(IndexError::InvalidParams(format!(
                "{num_hashes} hashes cannot be split into {bands} equal bands"
            )));
        }
        let p = MinHashParams {
            num_hashes,
            bands,
            rows: num_hashes / bands,
            seed,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), IndexError> {
        if self.num_hashes == 0 || self.bands == 0 || self.rows == 0 {
            return Err(IndexError::InvalidParams("all sizes must be positive".into()));
        }
        if self.bands * self.rows != self.num_hashes {
            return Err(IndexError::InvalidParams(format!(
                "bands ({}) x rows ({}) != num_hashes ({})",
                self.bands, self.rows, self.num_hashes
            )));
        }
        Ok(())
    }

    /// Probability that a pair with Jaccard `j` shares at least one bucket.
    pub fn candidate_probability(&self, j: f64) -> f64 {
        1.0 - (1.0 - j.powi(self.rows as i32)).powi(self.bands as i32)
    }
}

/// Fixed-length vector of per-slot minima.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MinHashSignature {
    seed: u64,
    values: Vec<u64>,
}

impl MinHashSignature {
    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The signature of the empty set has every slot at `u64::MAX`.
    pub fn is_sentinel(&self) -> bool {
        self.values.iter().all(|&v| v == u64::MAX)
    }

    pub(crate) fn from_parts(seed: u64, values: Vec<u64>) -> Self {
        MinHashSignature { seed, values }
    }
}

/// Precomputed hash family for one parameter set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinHasher {
    params: MinHashParams,
    coefficients: Vec<(u128, u128)>,
}

impl MinHasher {
    pub fn new(params: MinHashParams) -> Result<Self, IndexError> {
        params.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let coefficients = (0..params.num_hashes)
            .map(|_| (rng.random::<u128>(), rng.random::<u128>()))
            .collect();
        Ok(MinHasher { params, coefficients })
    }

    pub fn params(&self) -> &MinHashParams {
        &self.params
    }

    pub fn signature(&self, tokens: &TokenSet) -> MinHashSignature {
        let mut values = vec![u64::MAX; self.params.num_hashes];
        for token in tokens.iter() {
            let x = xxh3_64(token.as_bytes()) as u128;
            for (slot, &(a, b)) in values.iter_mut().zip(&self.coefficients) {
                let h = (a.wrapping_mul(x).wrapping_add(b) >> 64) as u64;
                if h < *slot {
                    *slot = h;
                }
            }
        }
        MinHashSignature {
            seed: self.params.seed,
            values,
        }
    }
}

/// Convenience wrapper that builds the hash family on every call; prefer
/// [`MinHasher`] when signing many sets.
pub fn signature(tokens: &TokenSet, params: &MinHashParams) -> Result<MinHashSignature, IndexError> {
    Ok(MinHasher::new(*params)?.signature(tokens))
}

/// |a ∩ b| / |a ∪ b|, and 0 when both sets are empty.
pub fn exact_jaccard(a: &TokenSet, b: &TokenSet) -> f64 {
    let (inter, union) = overlap(a, b);
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Intersection and union sizes.
pub fn overlap(a: &TokenSet, b: &TokenSet) -> (usize, usize) {
    let inter = a.intersection_len(b);
    (inter, a.len() + b.len() - inter)
}

/// Fraction of slots on which two signatures agree.
pub fn estimate_jaccard(a: &MinHashSignature, b: &MinHashSignature) -> Result<f64, IndexError> {
    if a.values.len() != b.values.len() || a.seed != b.seed {
        return Err(IndexError::ParamMismatch(format!(
            "{} hashes / seed {} vs {} hashes / seed {}",
            a.values.len(),
            a.seed,
            b.values.len(),
            b.seed
        )));
    }
    if a.values.is_empty() {
        return Ok(0.0);
    }
    let equal = a.values.iter().zip(&b.values).filter(|(x, y)| x == y).count();
    Ok(equal as f64 / a.values.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(prefix: &str, range: std::ops::Range<usize>) -> TokenSet {
        TokenSet::from_words(range.map(|i| format!("{prefix}{i}")))
    }

    #[test]
    fn default_params_are_consistent() {
        let p = MinHashParams::default();
        p.validate().unwrap();
        assert_eq!(p.num_hashes, 128);
        assert!(p.candidate_probability(0.35) > 0.9997);
    }

    #[test]
    fn invalid_params_are_rejected() {
        let p = MinHashParams {
            num_hashes: 128,
            bands: 32,
            rows: 3,
            seed: 1,
        };
        assert!(p.validate().is_err());
        assert!(MinHashParams::with_bands(128, 3, 1).is_err());
        assert_eq!(MinHashParams::with_bands(128, 32, 1).unwrap().rows, 4);
    }

    #[test]
    fn identical_sets_give_identical_signatures() {
        let p = MinHashParams::default();
        let a = words("w", 0..20);
        assert_eq!(signature(&a, &p).unwrap(), signature(&a.clone(), &p).unwrap());
    }

    #[test]
    fn empty_set_is_sentinel() {
        let sig = signature(&TokenSet::default(), &MinHashParams::default()).unwrap();
        assert!(sig.is_sentinel());
        assert_eq!(sig.len(), 128);
    }

    #[test]
    fn disjoint_singletons_rarely_agree() {
        let p = MinHashParams::default();
        let a = signature(&TokenSet::from_words(["ا"]), &p).unwrap();
        let b = signature(&TokenSet::from_words(["ب"]), &p).unwrap();
        assert!(estimate_jaccard(&a, &b).unwrap() < 0.05);
    }

    #[test]
    fn slot_agreement_tracks_a_third() {
        // |A| = |B| = 50 with 25 shared words: J = 25 / 75 = 1/3
        let a = TokenSet::from_words((0..50).map(|i| format!("t{i}")));
        let b = TokenSet::from_words((25..75).map(|i| format!("t{i}")));
        assert!((exact_jaccard(&a, &b) - 1.0 / 3.0).abs() < 1e-15);
        let mean: f64 = (0..100u64)
            .map(|seed| {
                let p = MinHashParams { seed, ..MinHashParams::default() };
                estimate_jaccard(&signature(&a, &p).unwrap(), &signature(&b, &p).unwrap()).unwrap()
            })
            .sum::<f64>()
            / 100.0;
        assert!((mean - 1.0 / 3.0).abs() <= 0.05, "mean agreement {mean}");
    }

    #[test]
    fn exact_jaccard_cases() {
        let a = TokenSet::from_words(["w1", "w2", "w3"]);
        let b = TokenSet::from_words(["w2", "w3", "w4"]);
        assert_eq!(exact_jaccard(&a, &a), 1.0);
        assert_eq!(exact_jaccard(&a, &TokenSet::from_words(["x"])), 0.0);
        assert_eq!(exact_jaccard(&a, &b), 0.5);
        assert_eq!(exact_jaccard(&TokenSet::default(), &TokenSet::default()), 0.0);
    }

    #[test]
    fn estimate_rejects_mismatched_params() {
        let t = words("w", 0..5);
        let a = signature(&t, &MinHashParams::default()).unwrap();
        let b = signature(&t, &MinHashParams::with_bands(64, 32, 7).unwrap()).unwrap();
        assert!(matches!(estimate_jaccard(&a, &b), Err(IndexError::ParamMismatch(_))));
        let c = signature(&t, &MinHashParams { seed: 8, ..MinHashParams::default() }).unwrap();
        assert!(estimate_jaccard(&a, &c).is_err());
        assert_eq!(estimate_jaccard(&a, &a).unwrap(), 1.0);
    }
}
