//! End-to-end workflows built from the other modules: turning labeled text
//! into training data for either classifier, training with a held-out split,
//! grid search, EVR contrasts and the synthetic desk-scale setup.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{self, CorpusError, Label, LabeledExample, VocabSpec};
use crate::embed::{embed_sentence, EmbedError, Pooling, WordVectorTable};
use crate::eval::{difference_sample, pca_evr, Contrast, EvalError, EvrReport};
use crate::nnet::{self, init_model, model_accuracy, MlpModel, NnetError, TrainConfig};
use crate::textproc::tokenize_words;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Nnet(#[from] NnetError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("no usable training examples for the {0} classifier")]
    NoExamples(TaskKind),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

/// Which binary classifier a dataset is turned into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    /// Left (0) vs Right (1); neutral rows are ignored.
    Polarity,
    /// Biased (0, i.e. Left or Right) vs Neutral (1).
    Neutral,
}

impl TaskKind {
    pub fn target(self, label: Label) -> Option<bool> {
        match self {
            TaskKind::Polarity => match label {
                Label::Left => Some(false),
                Label::Right => Some(true),
                Label::Neutral => None,
            },
            TaskKind::Neutral => Some(label == Label::Neutral),
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskKind::Polarity => "polarity",
            TaskKind::Neutral => "neutral",
        })
    }
}

impl FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "polarity" => Ok(TaskKind::Polarity),
            "neutral" => Ok(TaskKind::Neutral),
            _ => Err(format!("unknown classifier kind {s:?}")),
        }
    }
}

pub fn embed_text(table: &WordVectorTable, text: &str, pooling: Pooling) -> Option<Vec<f64>> {
    let v = embed_sentence(table, &tokenize_words(text), pooling);
    v.has_signal().then_some(v.values)
}

/// Embeds every example relevant to `kind`. Examples without any
/// in-vocabulary token are skipped.
pub fn training_data(
    kind: TaskKind,
    examples: &[LabeledExample],
    table: &WordVectorTable,
    pooling: Pooling,
) -> Vec<(Vec<f64>, bool)> {
    examples
        .iter()
        .filter_map(|e| {
            let y = kind.target(e.label)?;
            embed_text(table, &e.text, pooling).map(|x| (x, y))
        })
        .collect()
}

/// Held-out polar examples and held-out neutral sentences, i.e. the test side
/// of the split [`train_classifier`] makes with the same fraction and seed.
pub fn held_out_sets(
    examples: &[LabeledExample],
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<LabeledExample>, Vec<LabeledExample>), PipelineError> {
    let split = corpus::split(examples, train_fraction, seed)?;
    Ok(split.test.into_iter().partition(|e| e.label.is_polar()))
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub kind: TaskKind,
    pub model: MlpModel,
    pub config: TrainConfig,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub train_size: usize,
    pub test_size: usize,
}

pub const DEFAULT_TRAIN_FRACTION: f64 = 0.8;

/// Stratified split of the whole dataset (seeded by `cfg.seed`), SGD on the
/// train side, accuracy on both sides. Splitting before filtering means both
/// classifier kinds share one held-out set; see [`held_out_sets`].
pub fn train_classifier(
    kind: TaskKind,
    examples: &[LabeledExample],
    table: &WordVectorTable,
    pooling: Pooling,
    cfg: &TrainConfig,
    train_fraction: f64,
) -> Result<TrainReport, PipelineError> {
    let split = corpus::split(examples, train_fraction, cfg.seed)?;
    let train = training_data(kind, &split.train, table, pooling);
    let test = training_data(kind, &split.test, table, pooling);
    if train.is_empty() || test.is_empty() {
        return Err(PipelineError::NoExamples(kind));
    }
    let model = fit(&train, table.dim(), cfg)?;
    Ok(TrainReport {
        kind,
        train_accuracy: model_accuracy(&model, &train)?,
        test_accuracy: model_accuracy(&model, &test)?,
        model,
        config: cfg.clone(),
        train_size: train.len(),
        test_size: test.len(),
    })
}

/// Fresh initialization (seeded by `cfg.seed`) followed by SGD.
pub fn fit(data: &[(Vec<f64>, bool)], input_dim: usize, cfg: &TrainConfig) -> Result<MlpModel, NnetError> {
    let init = init_model(input_dim, &cfg.hidden_sizes, cfg.seed)?;
    nnet::train_sgd(&init, data, cfg)
}

/// Hyperparameter lists; every combination is one candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub learning_rates: Vec<f64>,
    pub hidden_sizes: Vec<Vec<usize>>,
    pub l2: Vec<f64>,
}

impl GridSpec {
    pub fn candidates(&self, base: &TrainConfig) -> Vec<TrainConfig> {
        let mut out = Vec::new();
        for &learning_rate in &self.learning_rates {
            for hidden in &self.hidden_sizes {
                for &l2 in &self.l2 {
                    out.push(TrainConfig {
                        learning_rate,
                        hidden_sizes: hidden.clone(),
                        l2,
                        ..base.clone()
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct GridCandidate {
    pub config: TrainConfig,
    pub mean_validation_accuracy: f64,
    pub param_count: usize,
}

#[derive(Debug, Clone)]
pub struct GridResult {
    pub candidates: Vec<GridCandidate>,
    pub best: usize,
}

impl GridResult {
    pub fn best(&self) -> &GridCandidate {
        &self.candidates[self.best]
    }
}

/// k-fold cross-validation over every grid candidate. The winner has the
/// highest mean validation accuracy; ties go to the smaller model, then to the
/// earlier candidate.
pub fn grid_search(
    data: &[(Vec<f64>, bool)],
    input_dim: usize,
    grid: &GridSpec,
    base: &TrainConfig,
    folds: usize,
) -> Result<GridResult, PipelineError> {
    let candidates = grid.candidates(base);
    if candidates.is_empty() {
        return Err(PipelineError::InvalidGrid("grid has no candidates".into()));
    }
    if folds < 2 || data.len() < folds {
        return Err(PipelineError::InvalidGrid(format!(
            "{folds} folds over {} examples",
            data.len()
        )));
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(base.seed));
    let mut results = Vec::with_capacity(candidates.len());
    for cfg in candidates {
        cfg.validate()?;
        let mut total = 0.0;
        for fold in 0..folds {
            let (mut train, mut valid) = (Vec::new(), Vec::new());
            for (pos, &i) in order.iter().enumerate() {
                if pos % folds == fold {
                    valid.push(data[i].clone());
                } else {
                    train.push(data[i].clone());
                }
            }
            let model = fit(&train, input_dim, &cfg)?;
            total += model_accuracy(&model, &valid)?;
        }
        let param_count = init_model(input_dim, &cfg.hidden_sizes, 0)?.param_count();
        results.push(GridCandidate {
            config: cfg,
            mean_validation_accuracy: total / folds as f64,
            param_count,
        });
    }
    let best = (0..results.len())
        .min_by(|&a, &b| {
            let (ra, rb) = (&results[a], &results[b]);
            rb.mean_validation_accuracy
                .total_cmp(&ra.mean_validation_accuracy)
                .then(ra.param_count.cmp(&rb.param_count))
                .then(a.cmp(&b))
        })
        .expect("nonempty");
    Ok(GridResult {
        candidates: results,
        best,
    })
}

/// EVR of `a_i − b_j` difference vectors for the Left−Right and
/// Bias−Neutral contrasts of a labeled dataset.
pub fn evr_contrast(
    contrast: Contrast,
    examples: &[LabeledExample],
    table: &WordVectorTable,
    pooling: Pooling,
    samples: usize,
    components: usize,
    seed: u64,
) -> Result<EvrReport, PipelineError> {
    let group = |pred: &dyn Fn(Label) -> bool| -> Vec<Vec<f64>> {
        examples
            .iter()
            .filter(|e| pred(e.label))
            .filter_map(|e| embed_text(table, &e.text, pooling))
            .collect()
    };
    let (a, b) = match contrast {
        Contrast::LeftRight => (group(&|l| l == Label::Left), group(&|l| l == Label::Right)),
        Contrast::BiasNeutral => (group(&Label::is_polar), group(&|l| l == Label::Neutral)),
    };
    let diffs = difference_sample(&a, &b, samples, seed)?;
    Ok(pca_evr(&diffs, components)?.with_contrast(contrast))
}

/// Synthetic corpus with a random word-vector table over its vocabulary.
#[derive(Debug, Clone)]
pub struct SyntheticSetup {
    pub vocab: VocabSpec,
    pub corpus: Vec<LabeledExample>,
    pub table: WordVectorTable,
}

pub const DESK_VOCAB_PER_SET: usize = 25;
pub const DESK_DIM: usize = 50;

impl SyntheticSetup {
    pub fn new(n_per_class: usize, vocab_per_set: usize, dim: usize, seed: u64) -> Result<Self, PipelineError> {
        let vocab = VocabSpec::generated(vocab_per_set);
        let corpus = corpus::synth_corpus(n_per_class, &vocab, seed)?;
        let table = WordVectorTable::random(vocab.tokens(), dim, seed)?;
        Ok(Self { vocab, corpus, table })
    }

    /// 500 sentences per class, 50-dimensional vectors.
    pub fn desk(seed: u64) -> Result<Self, PipelineError> {
        Self::new(500, DESK_VOCAB_PER_SET, DESK_DIM, seed)
    }

    pub fn by_label(&self, label: Label) -> Vec<LabeledExample> {
        self.corpus.iter().filter(|e| e.label == label).cloned().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn targets() {
        assert_eq!(TaskKind::Polarity.target(Label::Right), Some(true));
        assert_eq!(TaskKind::Polarity.target(Label::Neutral), None);
        assert_eq!(TaskKind::Neutral.target(Label::Left), Some(false));
        assert_eq!(TaskKind::Neutral.target(Label::Neutral), Some(true));
    }

    #[test]
    fn training_data_filters_rows() {
        let setup = SyntheticSetup::new(5, 20, 8, 1).unwrap();
        assert_eq!(training_data(TaskKind::Polarity, &setup.corpus, &setup.table, Pooling::Average).len(), 10);
        assert_eq!(training_data(TaskKind::Neutral, &setup.corpus, &setup.table, Pooling::Average).len(), 15);
    }

    #[test]
    fn grid_prefers_smaller_on_ties() {
        // Trivially separable data: every candidate reaches 100%.
        let data = nnet::two_blobs(60, 2);
        let grid = GridSpec {
            learning_rates: vec![0.05],
            hidden_sizes: vec![vec![16], vec![4]],
            l2: vec![0.0],
        };
        let base = TrainConfig {
            epochs: 5,
            ..TrainConfig::default()
        };
        let r = grid_search(&data, 2, &grid, &base, 5).unwrap();
        assert_eq!(r.candidates.len(), 2);
        assert_eq!(r.best().config.hidden_sizes, vec![4]);
        assert_eq!(r.best().mean_validation_accuracy, 1.0);
    }

    #[test]
    fn grid_rejects_bad_folds() {
        let data = nnet::two_blobs(3, 2);
        let grid = GridSpec {
            learning_rates: vec![0.05],
            hidden_sizes: vec![vec![]],
            l2: vec![0.0],
        };
        assert!(grid_search(&data, 2, &grid, &TrainConfig::default(), 5).is_err());
    }
}
