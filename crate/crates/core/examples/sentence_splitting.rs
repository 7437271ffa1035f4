// Sentence boundaries and word tokens, with a custom abbreviation list.
//
// cargo run --example sentence_splitting

use polarcascade::textproc::{split_sentences, tokenize_words, SentenceSplitter};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let text = "Sen. Warren spoke at 9 a.m. in Washington. Was it \"historic?\" Critics said no! \
                Dr. J. Smith disagreed (mostly).";
    for (i, s) in split_sentences(text).iter().enumerate() {
        println!("{i}: {s}");
        println!("   {:?}", tokenize_words(s));
    }

    let splitter = SentenceSplitter::with_abbreviations(["a.m", "Sen", "Dr"]);
    println!("{} sentences with the custom list", splitter.split(text).len());
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
