//! JSONL persistence of an [`LshIndex`].
//!
//! ```text
//! {"format":"hadithscope-lsh","version":1,"params":{...},"entries":N}
//! {"id":..,"variant_group":..,"tokens":[..],"signature":[..]}      x N, by id
//! {"band":b,"key":k,"ids":[..]}                                    by (band, key)
//! ```
//!
//! Writing the same index twice yields the same bytes.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::index::{IndexEntry, LshIndex};
use super::{IndexError, MinHashParams, MinHashSignature, MinHasher};
use crate::normalize::TokenSet;

const FORMAT: &str = "hadithscope-lsh";
const VERSION: u32 = 1;
pub const INDEX_FILE: &str = "index.jsonl";

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    params: MinHashParams,
    entries: usize,
}

#[derive(Serialize, Deserialize)]
struct EntryLine {
    id: u64,
    variant_group: u64,
    tokens: Vec<String>,
    signature: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct BucketLine {
    band: usize,
    key: u64,
    ids: Vec<u64>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IndexError + '_ {
    move |source| IndexError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn corrupt(line: usize, reason: impl Into<String>) -> IndexError {
    IndexError::Corrupt {
        line,
        reason: reason.into(),
    }
}

impl LshIndex {
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header = Header {
            format: FORMAT.to_string(),
            version: VERSION,
            params: *self.params(),
            entries: self.len(),
        };
        serde_json::to_writer(&mut out, &header)?;
        out.write_all(b"\n")?;
        for e in self.entries() {
            let line = EntryLine {
                id: e.id,
                variant_group: e.variant_group,
                tokens: e.tokens.as_slice().to_vec(),
                signature: e.signature.values().to_vec(),
            };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        for (band, map) in self.buckets().iter().enumerate() {
            let mut keys: Vec<&u64> = map.keys().collect();
            keys.sort_unstable();
            for key in keys {
                let ids = map[key].iter().map(|&p| self.entries()[p as usize].id).collect();
                serde_json::to_writer(&mut out, &BucketLine { band, key: *key, ids })?;
                out.write_all(b"\n")?;
            }
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self, IndexError> {
        let mut lines = input.lines().enumerate();
        let read = |res: std::io::Result<String>| {
            res.map_err(|source| IndexError::Io {
                path: "<index>".into(),
                source,
            })
        };
        let (_, first) = lines.next().ok_or_else(|| corrupt(1, "empty index file"))?;
        let header: Header = serde_json::from_str(&read(first)?).map_err(|e| corrupt(1, e.to_string()))?;
        if header.format != FORMAT || header.version != VERSION {
            return Err(corrupt(1, format!("unsupported format {} v{}", header.format, header.version)));
        }
        let hasher = MinHasher::new(header.params)?;
        let params = header.params;

        let mut entries = Vec::with_capacity(header.entries);
        let mut buckets: Vec<HashMap<u64, Vec<u32>>> = vec![HashMap::new(); params.bands];
        let mut position: HashMap<u64, u32> = HashMap::with_capacity(header.entries);
        for (n, line) in lines {
            let line_no = n + 1;
            let line = read(line)?;
            if entries.len() < header.entries {
                let e: EntryLine = serde_json::from_str(&line).map_err(|e| corrupt(line_no, e.to_string()))?;
                if e.signature.len() != params.num_hashes {
                    return Err(corrupt(line_no, "signature length does not match params"));
                }
                if let Some(prev) = entries.last().map(|p: &IndexEntry| p.id) {
                    if e.id <= prev {
                        return Err(corrupt(line_no, "entries are not sorted by id"));
                    }
                }
                position.insert(e.id, entries.len() as u32);
                entries.push(IndexEntry {
                    id: e.id,
                    variant_group: e.variant_group,
                    tokens: TokenSet::from_words(e.tokens),
                    signature: MinHashSignature::from_parts(params.seed, e.signature),
                });
            } else {
                let b: BucketLine = serde_json::from_str(&line).map_err(|e| corrupt(line_no, e.to_string()))?;
                if b.band >= params.bands {
                    return Err(corrupt(line_no, "band out of range"));
                }
                let ids = b
                    .ids
                    .iter()
                    .map(|id| position.get(id).copied().ok_or_else(|| corrupt(line_no, format!("unknown id {id}"))))
                    .collect::<Result<Vec<u32>, _>>()?;
                buckets[b.band].insert(b.key, ids);
            }
        }
        if entries.len() != header.entries {
            return Err(corrupt(0, "truncated entry section"));
        }
        for (band, map) in buckets.iter().enumerate() {
            let n: usize = map.values().map(Vec::len).sum();
            if n != entries.len() {
                return Err(corrupt(0, format!("band {band} holds {n} ids, expected {}", entries.len())));
            }
        }
        Ok(LshIndex::from_parts(hasher, entries, buckets))
    }

    /// Writes `dir/index.jsonl`, creating `dir` if needed.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<PathBuf, IndexError> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let path = dir.join(INDEX_FILE);
        let file = File::create(&path).map_err(io_err(&path))?;
        let mut w = BufWriter::new(file);
        self.write_jsonl(&mut w).map_err(io_err(&path))?;
        w.flush().map_err(io_err(&path))?;
        Ok(path)
    }

    /// Loads from a directory written by [`LshIndex::save`] or from the file itself.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, IndexError> {
        let path = path.as_ref();
        let file_path = if path.is_dir() { path.join(INDEX_FILE) } else { path.to_path_buf() };
        let file = File::open(&file_path).map_err(io_err(&file_path))?;
        Self::read_jsonl(BufReader::new(file))
    }
}
