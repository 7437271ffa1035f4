// Score a long, mostly apolitical text with the single-step baseline and with
// the neutral-filter cascade, and show which sentences the filter removed.
//
// cargo run --release --example tepc_vs_two_step

use polarcascade::cascade::{tepc_predict, two_step_predict, CascadeConfig, Verdict};
use polarcascade::corpus::{build_diluted, Label, LabeledExample, DilutionSpec};
use polarcascade::embed::Pooling;
use polarcascade::nnet::TrainConfig;
use polarcascade::pipeline::{held_out_sets, train_classifier, SyntheticSetup, TaskKind};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let setup = SyntheticSetup::new(200, 25, 50, 42)?;
    let cfg = TrainConfig::default();
    let train = |kind| train_classifier(kind, &setup.corpus, &setup.table, Pooling::Average, &cfg, 0.8);
    let polarity = train(TaskKind::Polarity)?.model;
    let neutral = train(TaskKind::Neutral)?.model;

    // One held-out right-wing sentence buried under five neutral ones.
    let (polar, pool) = held_out_sets(&setup.corpus, 0.8, cfg.seed)?;
    let tweet: Vec<LabeledExample> = polar.into_iter().filter(|e| e.label == Label::Right).take(1).collect();
    let article = &build_diluted(&tweet, &pool, DilutionSpec { k: 5, seed: 7 })?[0];
    println!("text: {}\n", article.text);

    let baseline = tepc_predict(&polarity, &setup.table, &article.text, Pooling::Average)?;
    println!("baseline : score {:+.3} ({})", baseline.score, baseline.bucket);

    let verdict = two_step_predict(&polarity, &neutral, &setup.table, &article.text, &CascadeConfig::default())?;
    match verdict.verdict {
        Verdict::Score(s) => println!("two-step : score {:+.3} ({})", s.score, s.bucket),
        Verdict::AllNeutral => println!("two-step : no political content"),
    }
    for a in &verdict.dropped {
        println!("  dropped  p(neutral)={:.3}  {}", a.neutral_probability, a.sentence);
    }
    for a in &verdict.kept {
        println!("  kept     p(neutral)={:.3}  {}", a.neutral_probability, a.sentence);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
