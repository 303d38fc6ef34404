//! Reproducible synthetic corpora and post streams.
//!
//! Words are random strings over Arabic letters that the normalizer leaves
//! untouched. Variant groups share a base text with some words swapped or
//! dropped. Planted posts quote a contiguous 40–80% span of one variant
//! behind a quotative prefix, with character noise on a few words.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use chrono::{DateTime, Duration, Utc};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::corpus::{AuthenticityLevel, TopicCategory};
use crate::ingest::PostRecord;

/// Letters that survive normalization unchanged.
const LETTERS: [char; 28] = [
    'ا', 'ب', 'ت', 'ث', 'ج', 'ح', 'خ', 'د', 'ذ', 'ر', 'ز', 'س', 'ش', 'ص', 'ض', 'ط', 'ظ', 'ع', 'غ', 'ف', 'ق',
    'ك', 'ل', 'م', 'ن', 'ه', 'و', 'ي',
];

pub const QUOTE_PREFIX: &str = "قال رسول الله صلى الله عليه وسلم";

const GRADE_WORDS: [&str; 5] = ["Sahih", "Hasan", "Daif", "Mawdu", ""];

#[derive(Clone, Debug)]
pub struct CorpusSpec {
    pub groups: usize,
    pub variants_per_group: usize,
    pub vocabulary: usize,
    pub min_words: usize,
    pub max_words: usize,
    /// Fraction of base words replaced in each variant.
    pub variation: f64,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            groups: 250,
            variants_per_group: 4,
            vocabulary: 5000,
            min_words: 12,
            max_words: 40,
            variation: 0.15,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SyntheticRecord {
    pub id: u64,
    pub variant_group: u64,
    pub matn: String,
    pub grade: AuthenticityLevel,
    pub topics: BTreeSet<TopicCategory>,
}

fn word(rng: &mut impl Rng) -> String {
    let len = rng.random_range(3..=7);
    (0..len).map(|_| *LETTERS.choose(rng).expect("non-empty")).collect()
}

/// `n` distinct random words.
pub fn vocabulary(n: usize, rng: &mut impl Rng) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let w = word(rng);
        if seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

/// Records in id order, ids `1..`, groups `1..`.
pub fn corpus_records(spec: &CorpusSpec) -> Vec<SyntheticRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let vocab = vocabulary(spec.vocabulary, &mut rng);
    let mut out = Vec::with_capacity(spec.groups * spec.variants_per_group);
    let mut id = 1;
    for g in 0..spec.groups as u64 {
        let len = rng.random_range(spec.min_words..=spec.max_words);
        let base: Vec<&String> = (0..len).map(|_| vocab.choose(&mut rng).expect("vocab")).collect();
        let grade = match rng.random_range(0..100) {
            0..=54 => AuthenticityLevel::Authentic,
            55..=74 => AuthenticityLevel::Good,
            75..=89 => AuthenticityLevel::Weak,
            90..=94 => AuthenticityLevel::Fabricated,
            _ => AuthenticityLevel::Unknown,
        };
        let mut topics = BTreeSet::new();
        for _ in 0..rng.random_range(0..=2) {
            topics.insert(*TopicCategory::ALL.choose(&mut rng).expect("topics"));
        }
        for v in 0..spec.variants_per_group {
            let words: Vec<&str> = base
                .iter()
                .map(|w| {
                    if v > 0 && rng.random_bool(spec.variation) {
                        vocab.choose(&mut rng).expect("vocab").as_str()
                    } else {
                        w.as_str()
                    }
                })
                .collect();
            out.push(SyntheticRecord {
                id,
                variant_group: g + 1,
                matn: words.join(" "),
                grade,
                topics: topics.clone(),
            });
            id += 1;
        }
    }
    out
}

/// CSV in the corpus load format: `id,variant_group,matn,grade_en,topics`.
pub fn corpus_csv(records: &[SyntheticRecord]) -> String {
    let mut s = String::from("id,variant_group,matn,grade_en,topics\n");
    for r in records {
        let grade = match r.grade {
            AuthenticityLevel::Authentic => GRADE_WORDS[0],
            AuthenticityLevel::Good => GRADE_WORDS[1],
            AuthenticityLevel::Weak => GRADE_WORDS[2],
            AuthenticityLevel::Fabricated => GRADE_WORDS[3],
            AuthenticityLevel::Unknown => GRADE_WORDS[4],
        };
        let topics: Vec<&str> = r.topics.iter().map(|t| t.code()).collect();
        let _ = writeln!(s, "{},{},{},{},{}", r.id, r.variant_group, r.matn, grade, topics.join(";"));
    }
    s
}

/// A contiguous 40–80% span of `matn` behind the quotative prefix, with
/// one letter replaced in about `noise` of the words.
pub fn plant_fragment(matn: &str, noise: f64, rng: &mut impl Rng) -> String {
    let words: Vec<&str> = matn.split_whitespace().collect();
    let frac = rng.random_range(0.4..=0.8);
    let len = ((words.len() as f64 * frac).round() as usize).clamp(1, words.len());
    let start = rng.random_range(0..=words.len() - len);
    let mut out = String::from(QUOTE_PREFIX);
    for w in &words[start..start + len] {
        out.push(' ');
        if rng.random_bool(noise) {
            let mut chars: Vec<char> = w.chars().collect();
            let i = rng.random_range(0..chars.len());
            let orig = chars[i];
            chars[i] = loop {
                let c = *LETTERS.choose(rng).expect("letters");
                if c != orig {
                    break c;
                }
            };
            out.extend(chars);
        } else {
            out.push_str(w);
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct PostSpec {
    pub posts: usize,
    /// Fraction of posts that quote a corpus record; the rest are random text.
    pub planted: f64,
    pub noise: f64,
    pub start: DateTime<Utc>,
    pub days: i64,
    pub seed: u64,
}

impl Default for PostSpec {
    fn default() -> Self {
        PostSpec {
            posts: 1000,
            planted: 0.9,
            noise: 0.05,
            start: DateTime::from_timestamp(1_546_300_800, 0).expect("2019-01-01"),
            days: 365,
            seed: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlantedPost {
    pub post: PostRecord,
    /// Record the text was drawn from, if any.
    pub source: Option<(u64, u64)>,
}

/// Posts with uniform timestamps over the window, ids `p000001..`.
pub fn posts(records: &[SyntheticRecord], spec: &PostSpec) -> Vec<PlantedPost> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise_vocab = vocabulary(2000, &mut rng);
    let seconds = spec.days * 86_400;
    (0..spec.posts)
        .map(|i| {
            let ts = spec.start + Duration::seconds(rng.random_range(0..seconds));
            let (text, source) = if !records.is_empty() && rng.random_bool(spec.planted) {
                let r = records.choose(&mut rng).expect("records");
                (plant_fragment(&r.matn, spec.noise, &mut rng), Some((r.id, r.variant_group)))
            } else {
                let n = rng.random_range(6..20);
                let words: Vec<&str> = (0..n).map(|_| noise_vocab.choose(&mut rng).expect("vocab").as_str()).collect();
                (format!("{QUOTE_PREFIX} {}", words.join(" ")), None)
            };
            PlantedPost {
                post: PostRecord {
                    post_id: format!("p{:06}", i + 1),
                    text,
                    lang: "ar".into(),
                    timestamp: ts,
                },
                source,
            }
        })
        .collect()
}

/// Tweet-style JSONL (`id_str`, `text`, `lang`, `created_at`).
pub fn tweets_jsonl(posts: &[PlantedPost]) -> String {
    let mut s = String::new();
    for p in posts {
        let v = serde_json::json!({
            "id_str": p.post.post_id,
            "text": p.post.text,
            "lang": p.post.lang,
            "created_at": p.post.timestamp.format("%a %b %d %H:%M:%S +0000 %Y").to_string(),
        });
        s.push_str(&v.to_string());
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize::{normalize, PhraseSet};

    #[test]
    fn words_survive_normalization() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = vocabulary(200, &mut rng);
        let joined = v.join(" ");
        assert_eq!(normalize(&joined, &PhraseSet::empty()).as_str(), joined);
    }

    #[test]
    fn generation_is_reproducible() {
        let spec = CorpusSpec {
            groups: 10,
            ..CorpusSpec::default()
        };
        let a = corpus_records(&spec);
        assert_eq!(a, corpus_records(&spec));
        assert_eq!(a.len(), 40);
        let p = PostSpec {
            posts: 50,
            ..PostSpec::default()
        };
        assert_eq!(posts(&a, &p), posts(&a, &p));
    }

    #[test]
    fn prefix_is_stripped() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let matn = "كتب بسم ورد شجر نهر جبل سحاب مطر";
        let f = plant_fragment(matn, 0.0, &mut rng);
        let n = normalize(&f, &PhraseSet::starter());
        assert!(matn.contains(n.as_str()));
    }
}
