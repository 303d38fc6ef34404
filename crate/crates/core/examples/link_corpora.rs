// Copy topics from a topical corpus onto a graded one by linking records.
//
// cargo run --example link_corpora

use hadithscope::corpus::{link_corpora, read_reference, CorpusFormat, GradeKeywords};
use hadithscope::minhash::{build_index, MinHashParams};
use hadithscope::normalize::PhraseSet;

const GRADED: &str = "\
id,variant_group,matn,grade_en
1,1,إنما الأعمال بالنيات وإنما لكل امرئ ما نوى,Sahih
2,2,من كذب علي متعمدا فليتبوأ مقعده من النار,Sahih
3,3,اطلبوا العلم ولو في الصين,Mawdu
";

const TOPICAL: &str = "\
id,matn,topics
100,الأعمال بالنيات ولكل امرئ ما نوى,J;EE
101,من كذب علي متعمدا فليتبوأ مقعده,K
102,سبحان الله وبحمده سبحان الله العظيم,SR
";

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let phrases = PhraseSet::starter();
    let grades = GradeKeywords::default();
    let (mut graded, _) = read_reference(GRADED.as_bytes(), CorpusFormat::Csv, &phrases, &grades, "graded")?;
    let (topical, _) = read_reference(TOPICAL.as_bytes(), CorpusFormat::Csv, &phrases, &grades, "topical")?;

    let index = build_index(&topical, MinHashParams::default())?;
    let links = link_corpora(&graded, &topical, &index, 0.35);
    for (id, link) in &links {
        match link {
            Some(l) => println!("{id} -> {} (jaccard {:.2})", l.target, l.jaccard),
            None => println!("{id} -> unlinked"),
        }
    }
    let gained = graded.inherit_topics(&topical, &links);
    println!("{gained} records gained topics");
    assert_eq!(gained, 2);
    assert!(graded.get(3).unwrap().topics.is_empty());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
