// Rank agreement between human and model scores, including tied ratings.
//
// cargo run --example spearman

use polarcascade::eval::{fractional_ranks, spearman_rho, RankedEvalSet};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let exact = RankedEvalSet::from_pairs(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0])?;
    println!("no ties: rho = {}", spearman_rho(&exact)?);

    // Five-point human ratings tie a lot; ties share their average rank.
    let csv = "id,human,machine\n\
               a1,-2,-0.81\n\
               a2,-1,-0.35\n\
               a3,0,0.05\n\
               a4,0,-0.10\n\
               a5,1,0.42\n\
               a6,1,0.18\n\
               a7,2,0.77\n";
    let set = RankedEvalSet::from_csv(csv)?;
    let human: Vec<f64> = set.items().iter().map(|i| i.human).collect();
    println!("human ranks: {:?}", fractional_ranks(&human));
    println!("with ties: rho = {:.4}", spearman_rho(&set)?);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
