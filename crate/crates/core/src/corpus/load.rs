use std::collections::{BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use super::{normalize_grade, CorpusError, GradeKeywords, HadithRecord, ReferenceCorpus, TopicCategory};
use crate::normalize::{normalize, tokenize, PhraseSet};

const REQUIRED: [&str; 2] = ["id", "matn"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorpusFormat {
    Csv,
    Jsonl,
}

impl CorpusFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        let name = path.file_name()?.to_str()?.to_ascii_lowercase();
        if name.ends_with(".csv") {
            Some(CorpusFormat::Csv)
        } else if name.ends_with(".jsonl") || name.ends_with(".ndjson") || name.ends_with(".json") {
            Some(CorpusFormat::Jsonl)
        } else {
            None
        }
    }
}

impl std::str::FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(CorpusFormat::Csv),
            "jsonl" | "ndjson" => Ok(CorpusFormat::Jsonl),
            other => Err(format!("unknown corpus format {other:?}")),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RowProblem {
    pub line: u64,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub rows_read: u64,
    pub loaded: u64,
    pub empty_matn_dropped: u64,
    pub malformed_skipped: u64,
    pub problems: Vec<RowProblem>,
}

impl LoadReport {
    fn malformed(&mut self, line: u64, reason: impl Into<String>) {
        self.malformed_skipped += 1;
        self.problems.push(RowProblem {
            line,
            reason: reason.into(),
        });
    }
}

/// One input row before validation, shared by both file formats.
#[derive(Default)]
struct RawRow {
    id: Option<String>,
    matn: Option<String>,
    variant_group: Option<String>,
    isnad: Option<String>,
    book: Option<String>,
    chapter: Option<String>,
    grades: Vec<String>,
    topics: Vec<String>,
}

/// Loads a corpus file with the default grade keywords. The corpus is
/// labelled with the file stem.
pub fn load_reference(
    path: impl AsRef<Path>,
    format: CorpusFormat,
    phrases: &PhraseSet,
) -> Result<(ReferenceCorpus, LoadReport), CorpusError> {
    load_reference_with(path, format, phrases, &GradeKeywords::default())
}

pub fn load_reference_with(
    path: impl AsRef<Path>,
    format: CorpusFormat,
    phrases: &PhraseSet,
    grades: &GradeKeywords,
) -> Result<(ReferenceCorpus, LoadReport), CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let origin = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_reference(file, format, phrases, grades, &origin)
}

/// Reads a corpus from any reader.
///
/// Rows whose matn normalizes to nothing are dropped; rows with an
/// unparsable id, an unknown topic, a duplicate id or broken syntax are
/// skipped. Both are tallied in the returned report.
pub fn read_reference<R: Read>(
    reader: R,
    format: CorpusFormat,
    phrases: &PhraseSet,
    grades: &GradeKeywords,
    origin: &str,
) -> Result<(ReferenceCorpus, LoadReport), CorpusError> {
    let mut report = LoadReport::default();
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    let mut accept = |line: u64, row: RawRow, report: &mut LoadReport| match build_record(row, phrases, grades, origin) {
        Ok(Some(rec)) => {
            if seen.insert(rec.id) {
                report.loaded += 1;
                records.push(rec);
            } else {
                report.malformed(line, format!("duplicate id {}", rec.id));
            }
        }
        Ok(None) => report.empty_matn_dropped += 1,
        Err(reason) => report.malformed(line, reason),
    };

    match format {
        CorpusFormat::Csv => read_csv(reader, &mut report, &mut accept)?,
        CorpusFormat::Jsonl => read_jsonl(reader, &mut report, &mut accept)?,
    }
    let corpus = ReferenceCorpus::from_records(records)?;
    Ok((corpus, report))
}

fn read_csv<R: Read>(
    reader: R,
    report: &mut LoadReport,
    accept: &mut impl FnMut(u64, RawRow, &mut LoadReport),
) -> Result<(), CorpusError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(reader);
    let headers = rdr.headers().map_err(CorpusError::Header)?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    for name in REQUIRED {
        if col(name).is_none() {
            return Err(CorpusError::MissingColumn(name.to_string()));
        }
    }
    let idx = |name: &str| col(name);
    let (id, matn) = (idx("id"), idx("matn"));
    let (group, isnad, book, chapter) = (idx("variant_group"), idx("isnad"), idx("book"), idx("chapter"));
    let (grade_en, grade_ar, topics) = (idx("grade_en"), idx("grade_ar"), idx("topics"));

    for result in rdr.records() {
        report.rows_read += 1;
        let record = match result {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                report.malformed(line, e.to_string());
                continue;
            }
        };
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: Option<usize>| i.and_then(|i| record.get(i)).map(str::to_string);
        let row = RawRow {
            id: field(id),
            matn: field(matn),
            variant_group: field(group),
            isnad: field(isnad),
            book: field(book),
            chapter: field(chapter),
            grades: [field(grade_en), field(grade_ar)].into_iter().flatten().collect(),
            topics: field(topics).map(|t| split_list(&t)).unwrap_or_default(),
        };
        accept(line, row, report);
    }
    Ok(())
}

fn read_jsonl<R: Read>(
    reader: R,
    report: &mut LoadReport,
    accept: &mut impl FnMut(u64, RawRow, &mut LoadReport),
) -> Result<(), CorpusError> {
    let mut schema_checked = false;
    for (n, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = n as u64 + 1;
        let line = line.map_err(|source| CorpusError::Io {
            path: format!("line {line_no}"),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        report.rows_read += 1;
        let obj = match serde_json::from_str::<Value>(&line) {
            Ok(Value::Object(obj)) => obj,
            Ok(_) => {
                report.malformed(line_no, "not a JSON object");
                continue;
            }
            Err(e) => {
                report.malformed(line_no, e.to_string());
                continue;
            }
        };
        // the first well-formed object stands in for a header row
        if !schema_checked {
            for name in REQUIRED {
                if !obj.contains_key(name) {
                    return Err(CorpusError::MissingColumn(name.to_string()));
                }
            }
            schema_checked = true;
        }
        let scalar = |key: &str| obj.get(key).and_then(json_scalar);
        let list = |key: &str| obj.get(key).map(json_list).unwrap_or_default();
        let row = RawRow {
            id: scalar("id"),
            matn: scalar("matn"),
            variant_group: scalar("variant_group"),
            isnad: scalar("isnad"),
            book: scalar("book"),
            chapter: scalar("chapter"),
            grades: list("grade_en").into_iter().chain(list("grade_ar")).collect(),
            topics: list("topics").iter().flat_map(|t| split_list(t)).collect(),
        };
        accept(line_no, row, report);
    }
    Ok(())
}

fn json_scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

fn json_list(v: &Value) -> Vec<String> {
    match v {
        Value::Array(items) => items.iter().filter_map(json_scalar).collect(),
        other => json_scalar(other).into_iter().collect(),
    }
}

fn split_list(s: &str) -> Vec<String> {
    s.split([';', '|'])
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

fn parse_id(field: &str, raw: Option<&str>) -> Result<u64, String> {
    let raw = raw.map(str::trim).unwrap_or("");
    raw.parse::<u64>()
        .map_err(|_| format!("{field} {raw:?} is not a non-negative integer"))
}

fn non_empty(s: Option<String>) -> Option<String> {
    s.filter(|v| !v.trim().is_empty())
}

fn build_record(
    row: RawRow,
    phrases: &PhraseSet,
    grades: &GradeKeywords,
    origin: &str,
) -> Result<Option<HadithRecord>, String> {
    let id = parse_id("id", row.id.as_deref())?;
    let variant_group = match non_empty(row.variant_group) {
        Some(g) => parse_id("variant_group", Some(&g))?,
        None => id,
    };
    let topics = row
        .topics
        .iter()
        .map(|t| t.parse::<TopicCategory>())
        .collect::<Result<BTreeSet<_>, _>>()?;
    let matn_raw = row.matn.ok_or_else(|| "missing matn".to_string())?;
    let matn_norm = normalize(&matn_raw, phrases);
    if matn_norm.is_empty() {
        return Ok(None);
    }
    let token_set = tokenize(&matn_norm);
    let grade_raw: Vec<String> = row.grades.into_iter().filter(|g| !g.trim().is_empty()).collect();
    let grade = normalize_grade(&grade_raw, grades);
    Ok(Some(HadithRecord {
        id,
        variant_group,
        matn_raw,
        matn_norm,
        token_set,
        isnad_raw: non_empty(row.isnad),
        source_book: row.book.unwrap_or_default(),
        chapter: row.chapter.unwrap_or_default(),
        grade_raw,
        grade,
        topics,
        origin: origin.to_string(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::AuthenticityLevel;
    use crate::normalize::TokenSet;

    fn load(src: &str, format: CorpusFormat) -> Result<(ReferenceCorpus, LoadReport), CorpusError> {
        read_reference(src.as_bytes(), format, &PhraseSet::starter(), &GradeKeywords::default(), "test")
    }

    const THREE: &str = "id,matn,variant_group,grade_en,topics\n\
        1,\"قال رسول الله ﷺ: إنّما الأعمالُ بالنيّات\",1,Sahih,Jurisprudence\n\
        2,\"الكلمةُ الطيبةُ صدقة\",2,Sahih,EE;V\n\
        3,\"مَن صامَ رمضانَ\",2,Da'if,\n";

    #[test]
    fn three_row_csv_loads_with_hand_normalized_tokens() {
        let (corpus, report) = load(THREE, CorpusFormat::Csv).unwrap();
        assert_eq!(corpus.len(), 3);
        assert_eq!(report.loaded, 3);
        // hand normalization: quotative prefix stripped, diacritics removed, ة→ه
        assert_eq!(corpus.get(1).unwrap().token_set, TokenSet::from_words(["انما", "الاعمال", "بالنيات"]));
        assert_eq!(corpus.get(2).unwrap().token_set, TokenSet::from_words(["الكلمه", "الطيبه", "صدقه"]));
        assert_eq!(corpus.get(3).unwrap().token_set, TokenSet::from_words(["من", "صام", "رمضان"]));
        assert_eq!(corpus.get(3).unwrap().grade, AuthenticityLevel::Weak);
        assert_eq!(corpus.group_members(2), &[2, 3]);
        assert_eq!(corpus.get(2).unwrap().topics.len(), 2);
    }

    #[test]
    fn empty_matn_row_is_dropped_and_counted() {
        let src = "id,matn\n1,سلام\n2,hello world\n3,كلام\n";
        let (corpus, report) = load(src, CorpusFormat::Csv).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(report.empty_matn_dropped, 1);
    }

    #[test]
    fn missing_matn_column_is_an_error() {
        let err = load("id,text\n1,سلام\n", CorpusFormat::Csv).unwrap_err();
        assert_eq!(err.to_string(), "missing column matn");
        let err = load("{\"id\":1,\"text\":\"سلام\"}\n", CorpusFormat::Jsonl).unwrap_err();
        assert_eq!(err.to_string(), "missing column matn");
    }

    #[test]
    fn malformed_rows_are_skipped() {
        let src = "id,matn,topics\nx,سلام,\n2,كلام,Poetry\n3,كلام\n4,نور,\n4,نار,\n";
        let (corpus, report) = load(src, CorpusFormat::Csv).unwrap();
        assert_eq!(corpus.len(), 1);
        assert_eq!(report.malformed_skipped, 4);
        assert_eq!(report.rows_read, 5);
    }

    #[test]
    fn jsonl_accepts_numbers_arrays_and_bad_lines() {
        let src = "{\"id\": 7, \"matn\": \"سلام عليكم\", \"grade_ar\": [\"صحيح\"], \"topics\": [\"K\", \"D\"]}\n\
                   {\"id\": 8, \"matn\": \"نور\"\n\
                   \n\
                   {\"id\": \"9\", \"matn\": \"كلام طيب\", \"variant_group\": 7}\n";
        let (corpus, report) = load(src, CorpusFormat::Jsonl).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(report.malformed_skipped, 1);
        assert_eq!(corpus.get(7).unwrap().grade, AuthenticityLevel::Authentic);
        assert_eq!(corpus.group_members(7), &[7, 9]);
        assert_eq!(corpus.group_topics(7).len(), 2);
    }

    #[test]
    fn loading_twice_is_identical() {
        let a = load(THREE, CorpusFormat::Csv).unwrap();
        let b = load(THREE, CorpusFormat::Csv).unwrap();
        assert_eq!(a, b);
    }
}
