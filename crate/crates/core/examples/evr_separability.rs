// Explained-variance ratios of sentence-vector differences: Left minus Right
// against biased minus neutral. A dominant first component means the pairs
// differ along one direction.
//
// cargo run --release --example evr_separability

use polarcascade::embed::Pooling;
use polarcascade::eval::{pca_evr, Contrast};
use polarcascade::pipeline::{evr_contrast, SyntheticSetup};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let setup = SyntheticSetup::desk(42)?;
    for contrast in [Contrast::LeftRight, Contrast::BiasNeutral] {
        let r = evr_contrast(contrast, &setup.corpus, &setup.table, Pooling::Average, 500, 5, 42)?;
        let shown: Vec<String> = r.ratios.iter().map(|x| format!("{x:.4}")).collect();
        println!("{contrast:>12}: {}", shown.join("  "));
    }

    // Sanity check on data with a known answer: two independent coordinates
    // with variances 9 and 1 split the variance 0.9 / 0.1.
    let points: Vec<Vec<f64>> = (0..4)
        .flat_map(|i| {
            let x = [-3.0, 3.0][i % 2];
            let y = [-1.0, 1.0][i / 2];
            [vec![x, y]]
        })
        .collect();
    let r = pca_evr(&points, 2)?;
    println!("known 9:1 spectrum: {:.3} {:.3}", r.ratios[0], r.ratios[1]);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
