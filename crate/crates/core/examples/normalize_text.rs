// Normalize a few posts and show the token sets that get compared.
//
// cargo run --example normalize_text

use hadithscope::minhash::exact_jaccard;
use hadithscope::normalize::{canonicalize, normalize, tokenize, PhraseSet};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let phrases = PhraseSet::starter();

    let matn = "إنّما الأعمالُ بالنّيّات، وإنّما لكلِّ امرئٍ ما نوى";
    let post = "قال رسول الله ﷺ: إنما الأعمــال بالنيات، وإنما لكل امرئ #حديث https://t.co/x";

    println!("canonical: {}", canonicalize(matn));
    let a = normalize(matn, &phrases);
    let b = normalize(post, &phrases);
    println!("matn:      {a}");
    println!("post:      {b}");

    let (ta, tb) = (tokenize(&a), tokenize(&b));
    let j = exact_jaccard(&ta, &tb);
    println!("jaccard:   {j:.3}");
    assert_eq!(normalize(a.as_str(), &phrases), a, "normalization is idempotent");
    assert!(j > 0.35);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
