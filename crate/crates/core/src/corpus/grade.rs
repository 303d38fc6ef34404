use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AuthenticityLevel, CorpusError};
use crate::normalize::normalize_letters;

/// Keywords that identify each canonical grade inside free-text grade fields.
///
/// Matching is on whole words after lowercasing, removing apostrophes and
/// folding Arabic letters, so `Da'if`, `daif` and `ضعيفٌ` all hit `daif`/`ضعيف`.
/// Loadable from TOML:
///
/// ```toml
/// authentic = ["sahih", "صحيح"]
/// good = ["hasan", "حسن"]
/// weak = ["daif", "ضعيف"]
/// fabricated = ["mawdu", "موضوع"]
/// ```
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradeKeywords {
    #[serde(default)]
    pub authentic: Vec<String>,
    #[serde(default)]
    pub good: Vec<String>,
    #[serde(default)]
    pub weak: Vec<String>,
    #[serde(default)]
    pub fabricated: Vec<String>,
}

impl Default for GradeKeywords {
    fn default() -> Self {
        let v = |words: &[&str]| words.iter().map(|w| w.to_string()).collect();
        GradeKeywords {
            authentic: v(&["sahih", "saheeh", "authentic", "صحيح", "الصحيح"]),
            good: v(&["hasan", "good", "حسن"]),
            weak: v(&["daif", "daeef", "dhaif", "weak", "munkar", "ضعيف", "منكر"]),
            fabricated: v(&["mawdu", "maudu", "mawdoo", "fabricated", "forged", "موضوع", "مكذوب", "باطل"]),
        }
    }
}

impl GradeKeywords {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.display().to_string(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| CorpusError::GradeKeywords(e.to_string()))
    }

    fn levels(&self) -> [(AuthenticityLevel, &[String]); 4] {
        [
            (AuthenticityLevel::Authentic, &self.authentic),
            (AuthenticityLevel::Good, &self.good),
            (AuthenticityLevel::Weak, &self.weak),
            (AuthenticityLevel::Fabricated, &self.fabricated),
        ]
    }
}

fn grade_key(text: &str) -> String {
    let folded = normalize_letters(&text.to_lowercase());
    let cleaned: String = folded
        .chars()
        .filter(|c| !matches!(c, '\'' | '`' | '\u{2018}' | '\u{2019}' | '\u{02BB}' | '\u{02BC}' | '\u{02BE}' | '\u{02BF}'))
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    cleaned.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Maps free-text grade strings onto a canonical level.
///
/// If keywords of exactly one level occur across all strings, that level is
/// returned; no hit or hits for several levels give `Unknown`.
pub fn normalize_grade<S: AsRef<str>>(raw: &[S], keywords: &GradeKeywords) -> AuthenticityLevel {
    let haystacks: Vec<String> = raw.iter().map(|s| format!(" {} ", grade_key(s.as_ref()))).collect();
    let mut found = BTreeSet::new();
    for (level, words) in keywords.levels() {
        let hit = words.iter().map(|w| grade_key(w)).filter(|k| !k.is_empty()).any(|k| {
            let needle = format!(" {k} ");
            haystacks.iter().any(|h| h.contains(&needle))
        });
        if hit {
            found.insert(level);
        }
    }
    match (found.len(), found.first()) {
        (1, Some(level)) => *level,
        _ => AuthenticityLevel::Unknown,
    }
}
