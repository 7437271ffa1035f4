// Load a word-vector table, pool sentence vectors, compare them and solve an
// analogy.
//
// cargo run --example word_vectors

use polarcascade::embed::{cosine_similarity, embed_sentence, parse_table, solve_analogy, Pooling};
use polarcascade::textproc::{split_sentences, tokenize_words};

const VECTORS: &str = "\
6 3
king 0.9 0.8 0.1
queen 0.9 -0.8 0.1
man 0.1 0.8 0.0
woman 0.1 -0.8 0.0
taxes 0.0 0.1 0.9
weather -0.3 0.0 -0.6
";

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let table = parse_table(VECTORS.as_bytes())?;
    println!("{} tokens, {} dimensions", table.vocab_size(), table.dim());

    let text = "The King raised taxes. Lovely weather, said the queen!";
    let vectors: Vec<_> = split_sentences(text)
        .iter()
        .map(|s| {
            let tokens = tokenize_words(s);
            let v = embed_sentence(&table, &tokens, Pooling::Average);
            println!("{s:?}: tokens {tokens:?}, {} of {} in vocabulary", v.covered_tokens, v.total_tokens);
            v
        })
        .collect();
    println!("cosine between sentences: {:.3}", cosine_similarity(&vectors[0].values, &vectors[1].values)?);

    for (word, score) in solve_analogy(&table, "king", "man", "queen", 2)? {
        println!("king : man :: queen : {word} ({score:.3})");
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
