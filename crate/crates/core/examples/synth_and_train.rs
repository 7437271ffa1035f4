// Generate the synthetic three-vocabulary corpus and train both classifiers
// on an 80/20 split.
//
// cargo run --release --example synth_and_train

use polarcascade::embed::Pooling;
use polarcascade::nnet::TrainConfig;
use polarcascade::pipeline::{train_classifier, SyntheticSetup, TaskKind, DEFAULT_TRAIN_FRACTION};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let setup = SyntheticSetup::new(200, 25, 50, 42)?;
    println!(
        "{} examples over {} tokens, {}-dim vectors",
        setup.corpus.len(),
        setup.table.vocab_size(),
        setup.table.dim()
    );
    for e in setup.corpus.iter().step_by(150).take(3) {
        println!("  [{}] {}", e.label, e.text);
    }

    let cfg = TrainConfig::default();
    for kind in [TaskKind::Polarity, TaskKind::Neutral] {
        let r = train_classifier(kind, &setup.corpus, &setup.table, Pooling::Average, &cfg, DEFAULT_TRAIN_FRACTION)?;
        println!(
            "{kind:>8}: train {:.3} test {:.3} ({} / {} examples, {} parameters)",
            r.train_accuracy,
            r.test_accuracy,
            r.train_size,
            r.test_size,
            r.model.param_count()
        );
        assert!(r.test_accuracy > 0.9);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
