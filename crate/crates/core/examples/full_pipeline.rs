// The whole run from a TOML config: corpus, tweets, matches and reports.
//
// cargo run --release --example full_pipeline

use std::fs;

use hadithscope::pipeline::{run_pipeline, PipelineConfig};
use hadithscope::synthetic::{corpus_csv, corpus_records, posts, tweets_jsonl, CorpusSpec, PostSpec};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let records = corpus_records(&CorpusSpec {
        groups: 100,
        ..CorpusSpec::default()
    });
    let corpus_path = dir.path().join("graded.csv");
    fs::write(&corpus_path, corpus_csv(&records))?;
    let tweets_path = dir.path().join("tweets.jsonl");
    fs::write(
        &tweets_path,
        tweets_jsonl(&posts(
            &records,
            &PostSpec {
                posts: 1000,
                ..PostSpec::default()
            },
        )),
    )?;

    let config = PipelineConfig::from_toml(&format!(
        r#"
threshold = 0.35

[corpus]
graded = ["{}"]

[analysis]
min_count = 5
"#,
        corpus_path.display()
    ))?;
    let out = dir.path().join("out");
    let manifest = run_pipeline(&config, &[tweets_path], &out)?;
    println!("{}", serde_json::to_string_pretty(&manifest.outputs)?);
    println!("{}", fs::read_to_string(out.join("authenticity.csv"))?);
    assert_eq!(manifest.ingest.emitted, manifest.matching.rows);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
