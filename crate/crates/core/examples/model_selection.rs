// Grid search with 5-fold cross-validation, then a save/load round-trip of
// the selected model.
//
// cargo run --release --example model_selection

use polarcascade::embed::Pooling;
use polarcascade::nnet::{load_model, save_model, ModelMetadata, TrainConfig};
use polarcascade::pipeline::{fit, grid_search, training_data, GridSpec, SyntheticSetup, TaskKind};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let setup = SyntheticSetup::new(100, 25, 50, 42)?;
    let data = training_data(TaskKind::Neutral, &setup.corpus, &setup.table, Pooling::Average);
    let grid = GridSpec {
        learning_rates: vec![0.01, 0.05],
        hidden_sizes: vec![vec![], vec![16], vec![32, 16]],
        l2: vec![1e-4],
    };
    let base = TrainConfig {
        epochs: 5,
        ..TrainConfig::default()
    };
    let result = grid_search(&data, setup.table.dim(), &grid, &base, 5)?;
    for c in &result.candidates {
        println!(
            "lr {:<5} hidden {:<9} params {:>5}  cv accuracy {:.3}",
            c.config.learning_rate,
            format!("{:?}", c.config.hidden_sizes),
            c.param_count,
            c.mean_validation_accuracy
        );
    }
    let best = result.best();
    println!("selected lr {} hidden {:?}", best.config.learning_rate, best.config.hidden_sizes);

    let model = fit(&data, setup.table.dim(), &best.config)?;
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("neutral.json");
    let meta = ModelMetadata {
        embedding_dim: setup.table.dim(),
        pooling_mode: Pooling::Average,
        trained_on: "synthetic".into(),
        created_at: 0,
    };
    save_model(&path, &model, &meta)?;
    let (loaded, _) = load_model(&path)?;
    let same = data
        .iter()
        .all(|(x, _)| model.forward(x).unwrap().probability.to_bits() == loaded.forward(x).unwrap().probability.to_bits());
    println!("reloaded model reproduces every prediction bit for bit: {same}");
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
