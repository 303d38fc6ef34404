// Sweep match thresholds, export a labelling sample, and pick the elbow of
// a labelled precision/coverage curve.
//
// cargo run --release --example calibrate_threshold

use hadithscope::calibrate::{
    elbow, parse_thresholds, precision_from_labels, sample_for_labeling, sweep, Label, DEFAULT_SAMPLE_SIZE,
};
use hadithscope::corpus::{read_reference, CorpusFormat, GradeKeywords};
use hadithscope::ingest::PostRecord;
use hadithscope::matches::tokenize_posts;
use hadithscope::minhash::{build_index, MinHashParams};
use hadithscope::normalize::PhraseSet;
use hadithscope::synthetic::{corpus_csv, corpus_records, posts, CorpusSpec, PostSpec, QUOTE_PREFIX};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let phrases = PhraseSet::starter();
    let records = corpus_records(&CorpusSpec {
        groups: 100,
        ..CorpusSpec::default()
    });
    let (corpus, _) = read_reference(
        corpus_csv(&records).as_bytes(),
        CorpusFormat::Csv,
        &phrases,
        &GradeKeywords::default(),
        "synthetic",
    )?;
    let index = build_index(&corpus, MinHashParams::default())?;
    let stream = posts(
        &records,
        &PostSpec {
            posts: 400,
            ..PostSpec::default()
        },
    );

    // Decoys borrow a few words from one record and pad with words from
    // another: they overlap a matn without quoting it.
    let mut all: Vec<(PostRecord, Option<u64>)> = stream.iter().map(|p| (p.post.clone(), p.source.map(|s| s.1))).collect();
    for (i, pair) in records.windows(7).step_by(3).take(150).enumerate() {
        let a: Vec<&str> = pair[0].matn.split(' ').collect();
        let b: Vec<&str> = pair[6].matn.split(' ').collect();
        let take = 2 + i % 8;
        let words: Vec<&str> = a.iter().take(take).chain(b.iter().take(8)).copied().collect();
        let mut post = stream[0].post.clone();
        post.post_id = format!("d{i:04}");
        post.text = format!("{QUOTE_PREFIX} {}", words.join(" "));
        all.push((post, None));
    }
    let plain: Vec<PostRecord> = all.iter().map(|(p, _)| p.clone()).collect();
    let tokens = tokenize_posts(&plain, &phrases);

    let thresholds = parse_thresholds("0.1:0.6:0.05")?;
    let mut curve = sweep(&tokens, &index, &thresholds)?;

    // Ground truth stands in for the human labeller here.
    let best = index.query_batch(&tokens, 0.0);
    for &t in &thresholds {
        let mut sample = sample_for_labeling(&best, t, DEFAULT_SAMPLE_SIZE, 7);
        for pair in &mut sample.pairs {
            let truth = all.iter().find(|(p, _)| p.post_id == pair.post_id).and_then(|(_, g)| *g);
            let group = corpus.get(pair.hadith_id).map(|h| h.variant_group);
            pair.label = Some(if truth.is_some() && truth == group { Label::Correct } else { Label::Incorrect });
        }
        if !sample.pairs.is_empty() {
            curve.set_precision(t, precision_from_labels(&sample)?);
        }
    }
    let mut csv = Vec::new();
    curve.write_csv(&mut csv)?;
    print!("{}", String::from_utf8(csv)?);
    println!("elbow: {}", elbow(&curve)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
