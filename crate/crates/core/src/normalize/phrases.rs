use std::fs;
use std::path::Path;

use thiserror::Error;

use super::canonicalize;

const STARTER: &str = include_str!("../../data/keyrings.txt");

#[derive(Debug, Error)]
pub enum PhraseFileError {
    #[error("cannot read phrase file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: phrase outside of a [leading] or [infix] section")]
    NoSection { line: usize },
    #[error("line {line}: unknown section {name}")]
    UnknownSection { line: usize, name: String },
}

/// Keyring phrases: quotative formulas that introduce a matn (`leading`) and
/// honorifics that people drop from the middle of it (`infix`).
///
/// Every phrase is stored in canonical form; phrases that canonicalize to
/// nothing are discarded and duplicates are removed, keeping the first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PhraseSet {
    leading: Vec<String>,
    infix: Vec<String>,
    // word lists, leading ones ordered longest first
    leading_words: Vec<Vec<String>>,
    infix_words: Vec<Vec<String>>,
}

impl PhraseSet {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The bundled starter set (see `data/keyrings.txt`).
    pub fn starter() -> Self {
        Self::parse(STARTER).expect("bundled keyring file is valid")
    }

    pub fn new<L, I, S, T>(leading: L, infix: I) -> Self
    where
        L: IntoIterator<Item = S>,
        I: IntoIterator<Item = T>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        let leading = canonical_unique(leading.into_iter().map(|s| canonicalize(s.as_ref())));
        let infix = canonical_unique(infix.into_iter().map(|s| canonicalize(s.as_ref())));

        let mut leading_words: Vec<Vec<String>> = leading.iter().map(|p| split_words(p)).collect();
        // stable sort keeps file order among equal lengths
        leading_words.sort_by_key(|w| std::cmp::Reverse(w.len()));
        let infix_words = infix.iter().map(|p| split_words(p)).collect();

        PhraseSet {
            leading,
            infix,
            leading_words,
            infix_words,
        }
    }

    /// Parses the phrase file format: `#` comments, `[leading]` and `[infix]`
    /// section headers, one phrase per line.
    pub fn parse(source: &str) -> Result<Self, PhraseFileError> {
        #[derive(Clone, Copy)]
        enum Section {
            Leading,
            Infix,
        }
        let mut section = None;
        let mut leading = Vec::new();
        let mut infix = Vec::new();
        for (idx, raw) in source.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = match name.trim().to_ascii_lowercase().as_str() {
                    "leading" => Some(Section::Leading),
                    "infix" => Some(Section::Infix),
                    _ => {
                        return Err(PhraseFileError::UnknownSection {
                            line: idx + 1,
                            name: name.to_string(),
                        })
                    }
                };
                continue;
            }
            match section {
                Some(Section::Leading) => leading.push(line),
                Some(Section::Infix) => infix.push(line),
                None => return Err(PhraseFileError::NoSection { line: idx + 1 }),
            }
        }
        Ok(Self::new(leading, infix))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, PhraseFileError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| PhraseFileError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn leading_phrases(&self) -> &[String] {
        &self.leading
    }

    pub fn infix_fragments(&self) -> &[String] {
        &self.infix
    }

    pub fn is_empty(&self) -> bool {
        self.leading.is_empty() && self.infix.is_empty()
    }

    pub(crate) fn infix_words(&self) -> &[Vec<String>] {
        &self.infix_words
    }

    /// Word count of the longest leading phrase that prefixes `words`.
    pub(crate) fn longest_leading_match(&self, words: &[&str]) -> Option<usize> {
        self.leading_words
            .iter()
            .find(|p| super::starts_with_words(words, p))
            .map(Vec::len)
    }
}

fn canonical_unique(phrases: impl Iterator<Item = String>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for p in phrases {
        if !p.is_empty() && !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

fn split_words(p: &str) -> Vec<String> {
    p.split(' ').map(str::to_string).collect()
}
