// Accuracy of the baseline and of the cascade as each held-out polar sentence
// is padded with k = 0..5 neutral sentences. Writes the curve as CSV.
//
// cargo run --release --example dilution_curve [out.csv]

use polarcascade::cascade::{CascadeConfig, MlpNeutralDetector, PoolMembershipDetector};
use polarcascade::embed::Pooling;
use polarcascade::eval::dilution_experiment;
use polarcascade::nnet::TrainConfig;
use polarcascade::pipeline::{held_out_sets, train_classifier, SyntheticSetup, TaskKind};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let seed = 42;
    let setup = SyntheticSetup::new(250, 25, 50, seed)?;
    let cfg = TrainConfig::default();
    let train = |kind| train_classifier(kind, &setup.corpus, &setup.table, Pooling::Average, &cfg, 0.8);
    let polarity = train(TaskKind::Polarity)?.model;
    let neutral = train(TaskKind::Neutral)?.model;
    let (polar, pool) = held_out_sets(&setup.corpus, 0.8, seed)?;

    let detector = MlpNeutralDetector {
        model: &neutral,
        table: &setup.table,
        pooling: Pooling::Average,
    };
    let cascade = CascadeConfig::default();
    let curve = dilution_experiment(&polarity, &detector, &setup.table, &polar, &pool, seed, 5, &cascade)?;
    let oracle = PoolMembershipDetector::new(&pool);
    let ideal = dilution_experiment(&polarity, &oracle, &setup.table, &polar, &pool, seed, 5, &cascade)?;

    println!(" k  baseline  two-step  two-step(oracle)");
    for (p, o) in curve.points.iter().zip(&ideal.points) {
        println!("{:>2}  {:>8.3}  {:>8.3}  {:>16.3}", p.k, p.tepc_accuracy, p.two_step_accuracy, o.two_step_accuracy);
    }

    let out = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("dilution_curve.csv"));
    curve.save_csv(&out)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
