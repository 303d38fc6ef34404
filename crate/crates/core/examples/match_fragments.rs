// Build a MinHash/LSH index over a synthetic corpus and match planted
// fragments against it.
//
// cargo run --release --example match_fragments

use hadithscope::corpus::{read_reference, CorpusFormat, GradeKeywords};
use hadithscope::minhash::{build_index, MinHashParams, DEFAULT_THRESHOLD};
use hadithscope::normalize::{normalize, tokenize, PhraseSet};
use hadithscope::synthetic::{corpus_csv, corpus_records, posts, CorpusSpec, PostSpec};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let phrases = PhraseSet::starter();
    let records = corpus_records(&CorpusSpec {
        groups: 100,
        ..CorpusSpec::default()
    });
    let (corpus, report) = read_reference(
        corpus_csv(&records).as_bytes(),
        CorpusFormat::Csv,
        &phrases,
        &GradeKeywords::default(),
        "synthetic",
    )?;
    println!("loaded {} records", report.loaded);

    let index = build_index(&corpus, MinHashParams::default())?;
    let stream = posts(
        &records,
        &PostSpec {
            posts: 200,
            ..PostSpec::default()
        },
    );

    let mut right = 0;
    let mut planted = 0;
    for p in &stream {
        let tokens = tokenize(&normalize(&p.post.text, &phrases));
        let m = index.query(&tokens, DEFAULT_THRESHOLD, &p.post.post_id);
        if let Some((_, group)) = p.source {
            planted += 1;
            if m.matched && m.variant_group == Some(group) {
                right += 1;
            }
        }
    }
    println!("{right}/{planted} planted fragments matched their source group");
    assert!(right * 10 >= planted * 9);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
