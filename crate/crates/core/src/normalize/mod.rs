//! Arabic text canonicalization.
//!
//! The pipeline applied to every post and every reference matn is
//!
//! 1. [`assert_arabic`]: keep only characters of the Arabic block (U+0600..=U+06FF);
//! 2. [`strip_punctuation`]: punctuation becomes a word separator;
//! 3. [`normalize_letters`]: drop diacritics and tatweel, fold letter variants;
//! 4. [`collapse_spaces`];
//! 5. [`strip_keyrings`]: remove quotative formulas such as "the messenger of God said".
//!
//! The composite is [`normalize`]. Its output is a fixed point of itself, so it is
//! safe to normalize text that was already normalized (phrase files, cached corpora).
//!
//! Keyring phrases are normalized with steps 1-4 when a [`PhraseSet`] is built, so
//! it does not matter whether a phrase file spells them with diacritics or not.

mod phrases;

use std::fmt;

use serde::Serialize;
use unicode_general_category::{get_general_category, GeneralCategory};

pub use phrases::{PhraseFileError, PhraseSet};

const ARABIC_BLOCK: std::ops::RangeInclusive<char> = '\u{0600}'..='\u{06FF}';
const TATWEEL: char = '\u{0640}';

/// Arabic-block punctuation replaced regardless of its Unicode category.
const ARABIC_PUNCTUATION: &[char] = &[
    '\u{060C}', // comma
    '\u{061B}', // semicolon
    '\u{061F}', // question mark
    '\u{066A}', // percent sign
    '\u{066B}', // decimal separator
    '\u{066C}', // thousands separator
    '\u{066D}', // five pointed star
    '\u{06D4}', // full stop
];

/// Returns true for the combining marks removed by [`normalize_letters`]:
/// harakat, tanween, shadda, sukun, maddah, hamza above/below, the extended
/// marks up to U+065F and the superscript alef.
#[inline]
pub fn is_diacritic(c: char) -> bool {
    matches!(c, '\u{064B}'..='\u{065F}' | '\u{0670}')
}

#[inline]
pub fn is_arabic_block(c: char) -> bool {
    ARABIC_BLOCK.contains(&c)
}

/// Folds a single letter to its canonical form.
#[inline]
fn fold_letter(c: char) -> char {
    match c {
        // alef with hamza above / below, alef with madda, alef wasla
        '\u{0623}' | '\u{0625}' | '\u{0622}' | '\u{0671}' => '\u{0627}',
        // alef maqsura
        '\u{0649}' => '\u{064A}',
        // ta marbuta
        '\u{0629}' => '\u{0647}',
        // waw with hamza
        '\u{0624}' => '\u{0648}',
        // ya with hamza
        '\u{0626}' => '\u{064A}',
        other => other,
    }
}

fn is_punctuation(c: char) -> bool {
    ARABIC_PUNCTUATION.contains(&c)
        || matches!(
            get_general_category(c),
            GeneralCategory::ConnectorPunctuation
                | GeneralCategory::DashPunctuation
                | GeneralCategory::OpenPunctuation
                | GeneralCategory::ClosePunctuation
                | GeneralCategory::InitialPunctuation
                | GeneralCategory::FinalPunctuation
                | GeneralCategory::OtherPunctuation
        )
}

/// Keeps only Arabic-block characters.
///
/// Any other character acts as a word separator, except invisible format
/// characters (zero-width joiners, direction marks), which are dropped so
/// they do not split a word. Separator runs become a single space and the
/// result is trimmed.
pub fn assert_arabic(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    for c in text.chars() {
        if is_arabic_block(c) {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
        } else if get_general_category(c) == GeneralCategory::Format {
            continue;
        } else {
            pending_space = true;
        }
    }
    out
}

/// Replaces every punctuation character with a space. Does not collapse.
pub fn strip_punctuation(text: &str) -> String {
    text.chars()
        .map(|c| if is_punctuation(c) { ' ' } else { c })
        .collect()
}

/// Removes diacritics and tatweel, then applies the letter folding table
/// (أ إ آ ٱ → ا, ى → ي, ة → ه, ؤ → و, ئ → ي).
pub fn normalize_letters(text: &str) -> String {
    text.chars()
        .filter(|&c| !is_diacritic(c) && c != TATWEEL)
        .map(fold_letter)
        .collect()
}

/// Collapses whitespace runs to a single space and trims both ends.
pub fn collapse_spaces(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Steps 1-4 of the pipeline, without keyring stripping.
pub fn canonicalize(text: &str) -> String {
    collapse_spaces(&normalize_letters(&strip_punctuation(&assert_arabic(text))))
}

/// Text that went through [`normalize`]: Arabic-block characters separated by
/// single spaces, no diacritics or tatweel, no leading or trailing space.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct NormalizedText(String);

impl NormalizedText {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_string(self) -> String {
        self.0
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.0.split(' ').filter(|w| !w.is_empty())
    }
}

impl AsRef<str> for NormalizedText {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NormalizedText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Removes keyring phrases from normalized text.
///
/// The longest leading phrase that matches at a word boundary is removed from
/// the start, and every occurrence of every infix fragment is removed. Both
/// steps repeat until nothing changes, so the result never starts with a
/// leading phrase and never contains an infix fragment.
pub fn strip_keyrings(text: &NormalizedText, phrases: &PhraseSet) -> NormalizedText {
    if phrases.is_empty() || text.is_empty() {
        return text.clone();
    }
    let mut words: Vec<&str> = text.words().collect();
    loop {
        let before = words.len();
        if let Some(len) = phrases.longest_leading_match(&words) {
            words.drain(..len);
        }
        for fragment in phrases.infix_words() {
            remove_occurrences(&mut words, fragment);
        }
        if words.len() == before {
            break;
        }
    }
    NormalizedText(words.join(" "))
}

pub(crate) fn starts_with_words(words: &[&str], phrase: &[String]) -> bool {
    words.len() >= phrase.len() && words.iter().zip(phrase).all(|(w, p)| *w == p.as_str())
}

fn remove_occurrences(words: &mut Vec<&str>, fragment: &[String]) {
    if fragment.is_empty() || words.len() < fragment.len() {
        return;
    }
    let mut kept = Vec::with_capacity(words.len());
    let mut i = 0;
    while i < words.len() {
        if starts_with_words(&words[i..], fragment) {
            i += fragment.len();
        } else {
            kept.push(words[i]);
            i += 1;
        }
    }
    *words = kept;
}

/// Full canonicalization of raw text.
pub fn normalize(text: &str, phrases: &PhraseSet) -> NormalizedText {
    strip_keyrings(&NormalizedText(canonicalize(text)), phrases)
}

/// The distinct words of a normalized text, kept sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct TokenSet(Vec<String>);

impl TokenSet {
    /// Builds a set from arbitrary words; empty words are ignored.
    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut tokens: Vec<String> = words
            .into_iter()
            .map(Into::into)
            .filter(|w| !w.is_empty())
            .collect();
        tokens.sort_unstable();
        tokens.dedup();
        TokenSet(tokens)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn as_slice(&self) -> &[String] {
        &self.0
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.binary_search_by(|t| t.as_str().cmp(word)).is_ok()
    }

    /// Size of the intersection, by a merge over the two sorted lists.
    pub fn intersection_len(&self, other: &TokenSet) -> usize {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }
}

pub fn tokenize(text: &NormalizedText) -> TokenSet {
    TokenSet::from_words(text.words())
}
