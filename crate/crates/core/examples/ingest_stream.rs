// Stream a gzip-compressed tweet archive through the ingest filters.
//
// cargo run --example ingest_stream

use std::io::Write;

use flate2::write::GzEncoder;
use flate2::Compression;
use hadithscope::ingest::{DedupMode, IngestOptions, Ingestor};

const ARCHIVE: &str = r#"{"id_str":"1","text":"قال رسول الله ﷺ إنما الأعمال بالنيات","lang":"ar","created_at":"Thu Apr 01 10:00:00 +0000 2021"}
{"id_str":"2","text":"RT قال رسول الله إنما الأعمال بالنيات","lang":"ar","created_at":"Fri Apr 02 10:00:00 +0000 2021"}
{"id_str":"3","text":"good morning","lang":"en","created_at":"Fri Apr 02 11:00:00 +0000 2021"}
{"id_str":"4","text":"صباح الخير","lang":"ar","created_at":"Fri Apr 02 12:00:00 +0000 2021"}
{"id_str":"1","text":"قال رسول الله ﷺ إنما الأعمال بالنيات","lang":"ar","created_at":"Thu Apr 01 10:00:00 +0000 2021"}
not json
"#;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut gz = GzEncoder::new(Vec::new(), Compression::default());
    gz.write_all(ARCHIVE.as_bytes())?;
    let compressed = gz.finish()?;

    let mut ingestor = Ingestor::new(IngestOptions {
        dedup: DedupMode::Id,
        ..IngestOptions::default()
    })?;
    let mut out = Vec::new();
    ingestor.ingest(std::io::Cursor::new(compressed), |post| {
        serde_json::to_writer(&mut out, &post)?;
        out.push(b'\n');
        Ok(())
    })?;
    print!("{}", String::from_utf8(out)?);
    let report = ingestor.report();
    println!("{}", serde_json::to_string(report)?);
    assert!(report.is_conserved());
    assert_eq!(report.emitted, 2);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
