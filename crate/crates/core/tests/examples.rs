//! Every example runs to completion.

macro_rules! example {
    ($module:ident, $file:literal) => {
        #[allow(dead_code)]
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }
    };
}

example!(synth_and_train, "synth_and_train.rs");
example!(tepc_vs_two_step, "tepc_vs_two_step.rs");
example!(dilution_curve, "dilution_curve.rs");
example!(evr_separability, "evr_separability.rs");
example!(spearman, "spearman.rs");
example!(word_vectors, "word_vectors.rs");
example!(sentence_splitting, "sentence_splitting.rs");
example!(model_selection, "model_selection.rs");

#[test]
fn synth_and_train_runs() {
    synth_and_train::run_example().unwrap();
}

#[test]
fn tepc_vs_two_step_runs() {
    tepc_vs_two_step::run_example().unwrap();
}

#[test]
fn dilution_curve_runs() {
    dilution_curve::run_example().unwrap();
}

#[test]
fn evr_separability_runs() {
    evr_separability::run_example().unwrap();
}

#[test]
fn spearman_runs() {
    spearman::run_example().unwrap();
}

#[test]
fn word_vectors_runs() {
    word_vectors::run_example().unwrap();
}

#[test]
fn sentence_splitting_runs() {
    sentence_splitting::run_example().unwrap();
}

#[test]
fn model_selection_runs() {
    model_selection::run_example().unwrap();
}
