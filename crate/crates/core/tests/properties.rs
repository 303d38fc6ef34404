use chrono::{Duration, TimeZone, Utc};
use hadithscope::analyze::{authenticity_distribution, gini, seasonality_report, Granularity, WindowMode};
use hadithscope::calibrate::sweep_results;
use hadithscope::corpus::{read_reference, CorpusFormat, GradeKeywords};
use hadithscope::ingest::{IngestOptions, Ingestor};
use hadithscope::matches::MatchRecord;
use hadithscope::minhash::{estimate_jaccard, exact_jaccard, signature, MatchResult, MinHashParams};
use hadithscope::normalize::{is_arabic_block, is_diacritic, normalize, tokenize, PhraseSet, TokenSet};
use proptest::prelude::*;

const TATWEEL: char = '\u{0640}';

fn pairwise_gini(x: &[u64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<u64>() as f64 / n;
    let mut s = 0.0;
    for a in x {
        for b in x {
            s += (*a as f64 - *b as f64).abs();
        }
    }
    s / (2.0 * n * n * mean)
}

/// Mixed Arabic, Latin, punctuation, marks, tatweel and format characters.
fn noisy_text() -> impl Strategy<Value = String> {
    let pieces = prop_oneof![
        "[\u{0621}-\u{064A}]{1,6}",
        "[\u{064B}-\u{065F}\u{0670}\u{0640}]{1,2}",
        "[a-zA-Z0-9#@_/:.]{1,5}",
        "[ \t\n،؛؟!?.,()«»\"'-]{1,3}",
        "[\u{200B}-\u{200F}\u{FEFF}]",
        "[\u{0600}-\u{06FF}]{1,3}",
        Just("ﷺ".to_string()),
        Just("قال رسول الله".to_string()),
        Just("صلى الله عليه وسلم".to_string()),
    ];
    prop::collection::vec(pieces, 0..25).prop_map(|v| v.concat())
}

fn arabic_words() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec("[بتثجحخدذرزسشصضطظعغفقكمنهوي]{3,6}", 1..30)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn normalize_is_idempotent(text in noisy_text()) {
        let phrases = PhraseSet::starter();
        let once = normalize(&text, &phrases);
        let twice = normalize(once.as_str(), &phrases);
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn output_is_block_pure(text in noisy_text()) {
        let out = normalize(&text, &PhraseSet::starter());
        let s = out.as_str();
        prop_assert!(s.chars().all(|c| c == ' ' || is_arabic_block(c)));
        prop_assert!(!s.chars().any(|c| is_diacritic(c) || c == TATWEEL));
        prop_assert!(!s.contains("  ") && !s.starts_with(' ') && !s.ends_with(' '));
    }

    #[test]
    fn leading_keyrings_do_not_change_tokens(words in arabic_words(), k in 0usize..15) {
        let phrases = PhraseSet::starter();
        let matn = words.join(" ");
        let prefix = &phrases.leading_phrases()[k % phrases.leading_phrases().len()];
        let with = tokenize(&normalize(&format!("{prefix}: {matn}"), &phrases));
        let bare = tokenize(&normalize(&matn, &phrases));
        prop_assert_eq!(with, bare);
    }

    #[test]
    fn jaccard_is_symmetric_and_bounded(a in arabic_words(), b in arabic_words()) {
        let (a, b) = (TokenSet::from_words(a), TokenSet::from_words(b));
        let j = exact_jaccard(&a, &b);
        prop_assert!((0.0..=1.0).contains(&j));
        prop_assert_eq!(j, exact_jaccard(&b, &a));
        prop_assert_eq!(exact_jaccard(&a, &a), 1.0);
    }

    #[test]
    fn identical_sets_have_identical_signatures(a in arabic_words(), seed in any::<u64>()) {
        let params = MinHashParams { seed, ..MinHashParams::default() };
        let t = TokenSet::from_words(a);
        let s1 = signature(&t, &params).unwrap();
        let s2 = signature(&t.clone(), &params).unwrap();
        prop_assert_eq!(estimate_jaccard(&s1, &s2).unwrap(), 1.0);
    }

    #[test]
    fn gini_matches_pairwise_and_is_bounded(x in prop::collection::vec(0u64..1000, 1..60)) {
        prop_assume!(x.iter().any(|&v| v > 0));
        let g = gini(&x).unwrap();
        let n = x.len() as f64;
        prop_assert!(g >= 0.0 && g <= 1.0 - 1.0 / n + 1e-12);
        let b = pairwise_gini(&x);
        prop_assert!((g - b).abs() <= 1e-12 * b.abs().max(1e-300) || (g == 0.0 && b == 0.0));
        prop_assert_eq!(g == 0.0, x.iter().all(|&v| v == x[0]));
    }

    #[test]
    fn gini_is_permutation_and_scale_invariant(
        x in prop::collection::vec(0u64..1000, 1..60),
        c in 1u64..50,
        rot in 0usize..60,
    ) {
        prop_assume!(x.iter().any(|&v| v > 0));
        let g = gini(&x).unwrap();
        let mut y = x.clone();
        let r = rot % y.len();
        y.rotate_left(r);
        y.reverse();
        prop_assert_eq!(gini(&y).unwrap(), g);
        let scaled: Vec<u64> = x.iter().map(|v| v * c).collect();
        prop_assert_eq!(gini(&scaled).unwrap(), g);
    }

    #[test]
    fn coverage_never_increases(js in prop::collection::vec(0.0f64..=1.0, 1..200)) {
        let best: Vec<MatchResult> = js
            .iter()
            .enumerate()
            .map(|(i, &j)| MatchResult {
                post_id: i.to_string(),
                hadith_id: Some(1),
                variant_group: Some(1),
                jaccard: j,
                matched: true,
                threshold: 0.0,
            })
            .collect();
        let thresholds: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        let curve = sweep_results(&best, &thresholds).unwrap();
        prop_assert!(curve.points.windows(2).all(|w| w[0].coverage >= w[1].coverage));
    }

    #[test]
    fn authenticity_buckets_conserve_posts(hits in prop::collection::vec(prop::option::of(1u64..=4), 0..100)) {
        let csv = "id,matn,grade_en\n1,كلمه اولى,Sahih\n2,كلمه ثانيه,Hasan\n3,كلمه ثالثه,Daif\n4,كلمه رابعه,Mawdu\n";
        let (corpus, _) = read_reference(csv.as_bytes(), CorpusFormat::Csv, &PhraseSet::starter(), &GradeKeywords::default(), "t").unwrap();
        let ts = Utc.with_ymd_and_hms(2021, 1, 1, 0, 0, 0).unwrap();
        let rows: Vec<MatchRecord> = hits
            .iter()
            .enumerate()
            .map(|(i, h)| MatchRecord {
                post_id: i.to_string(),
                ts_utc: ts + Duration::hours(i as i64),
                hadith_id: *h,
                variant_group: *h,
                jaccard: 0.5,
                matched: h.is_some(),
                threshold: 0.35,
            })
            .collect();
        let rep = authenticity_distribution(&rows, &corpus).unwrap();
        prop_assert_eq!(rep.total(), rows.len() as u64);
        prop_assert_eq!(rep.denominator, rows.len() as u64);
        for g in [Granularity::Day, Granularity::Weekday, Granularity::Month] {
            let s = seasonality_report(&rows, g, 1, WindowMode::Global).unwrap();
            prop_assert!(s.rows.windows(2).all(|w| w[0].gini >= w[1].gini));
            let total: u64 = s.rows.iter().map(|r| r.total).sum();
            prop_assert_eq!(total, hits.iter().filter(|h| h.is_some()).count() as u64);
        }
    }

    #[test]
    fn ingest_counts_every_line_once(lines in prop::collection::vec(
        prop_oneof![
            Just(r#"{"id_str":"1","text":"قال رسول الله خير","lang":"ar","created_at":"Fri Apr 02 10:00:00 +0000 2021"}"#.to_string()),
            Just(r#"{"id_str":"2","text":"قال رسول الله خير","lang":"ar","created_at":"Fri Apr 02 10:00:00 +0000 2021"}"#.to_string()),
            Just(r#"{"id_str":"3","text":"hello","lang":"en","created_at":"Fri Apr 02 10:00:00 +0000 2021"}"#.to_string()),
            Just(r#"{"id_str":"4","text":"صباح الخير","lang":"ar","created_at":"Fri Apr 02 10:00:00 +0000 2021"}"#.to_string()),
            Just("{broken".to_string()),
        ],
        0..50,
    )) {
        let input = lines.join("\n");
        let mut ing = Ingestor::new(IngestOptions::default()).unwrap();
        let mut n = 0u64;
        ing.ingest(std::io::Cursor::new(input.into_bytes()), |_| { n += 1; Ok(()) }).unwrap();
        let r = ing.report();
        prop_assert!(r.is_conserved());
        prop_assert_eq!(r.lines_read, lines.len() as u64);
        prop_assert_eq!(r.emitted, n);
    }
}
