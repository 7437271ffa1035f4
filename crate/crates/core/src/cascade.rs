//! Single-step and two-step polarity classification.
//!
//! The single-step baseline embeds a whole text and scores it with the
//! polarity classifier. The two-step cascade first splits the text into
//! sentences, drops every sentence the neutral detector flags, and scores only
//! what survives. Positive class of the polarity model is Right; positive class
//! of the neutral detector is Neutral.

use std::collections::HashSet;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::LabeledExample;
use crate::embed::{embed_sentence, Pooling, WordVectorTable};
use crate::nnet::{MlpModel, NnetError, EPS};
use crate::textproc::{split_sentences, tokenize_words};

#[derive(Debug, Error)]
pub enum CascadeError {
    #[error("input text is empty")]
    EmptyInput,
    #[error("no token of the text is in the word-vector vocabulary")]
    NoSignal,
    #[error("model expects {model} inputs but the word vectors have {table} dimensions")]
    DimMismatch { model: usize, table: usize },
    #[error("invalid cascade config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] NnetError),
}

/// Score cut points between the five buckets.
pub const BUCKET_THRESHOLDS: [f64; 4] = [-0.6, -0.2, 0.2, 0.6];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bucket {
    StronglyLeft,
    SlightlyLeft,
    Neutral,
    SlightlyRight,
    StronglyRight,
}

impl Bucket {
    /// `< -0.6`, `[-0.6, -0.2)`, `[-0.2, 0.2]`, `(0.2, 0.6]`, `> 0.6`.
    pub fn from_score(score: f64) -> Self {
        let [a, b, c, d] = BUCKET_THRESHOLDS;
        if score < a {
            Bucket::StronglyLeft
        } else if score < b {
            Bucket::SlightlyLeft
        } else if score <= c {
            Bucket::Neutral
        } else if score <= d {
            Bucket::SlightlyRight
        } else {
            Bucket::StronglyRight
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Bucket::StronglyLeft => "strongly_left",
            Bucket::SlightlyLeft => "slightly_left",
            Bucket::Neutral => "neutral",
            Bucket::SlightlyRight => "slightly_right",
            Bucket::StronglyRight => "strongly_right",
        }
    }
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarityScore {
    pub probability_right: f64,
    /// `2 * probability_right - 1`
    pub score: f64,
    pub bucket: Bucket,
}

impl PolarityScore {
    pub fn from_probability(probability_right: f64) -> Self {
        let score = 2.0 * probability_right - 1.0;
        Self {
            probability_right,
            score,
            bucket: Bucket::from_score(score),
        }
    }

    /// Binary decision of the polarity classifier (ties go Left).
    pub fn is_right(&self) -> bool {
        self.probability_right > 0.5
    }
}

fn check_dims(model: &MlpModel, table: &WordVectorTable) -> Result<(), CascadeError> {
    if model.input_dim() != table.dim() {
        return Err(CascadeError::DimMismatch {
            model: model.input_dim(),
            table: table.dim(),
        });
    }
    Ok(())
}

/// Single-step baseline: one pooled vector for the whole text.
pub fn tepc_predict(
    polarity_model: &MlpModel,
    table: &WordVectorTable,
    text: &str,
    mode: Pooling,
) -> Result<PolarityScore, CascadeError> {
    check_dims(polarity_model, table)?;
    if text.trim().is_empty() {
        return Err(CascadeError::EmptyInput);
    }
    let vector = embed_sentence(table, &tokenize_words(text), mode);
    if !vector.has_signal() {
        return Err(CascadeError::NoSignal);
    }
    let p = polarity_model.forward(&vector.values)?;
    Ok(PolarityScore::from_probability(p.probability))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeutralJudgement {
    pub probability: f64,
    /// Set when the sentence had no in-vocabulary token and was declared
    /// neutral without consulting the model.
    pub no_signal: bool,
}

/// Anything that can say how likely a sentence is to be apolitical.
pub trait NeutralDetector {
    fn judge(&self, sentence: &str) -> Result<NeutralJudgement, CascadeError>;
}

/// Probability that `sentence` is neutral. Sentences without any
/// in-vocabulary token are reported as neutral with probability `1 - EPS`.
pub fn neutral_predict(
    neutral_model: &MlpModel,
    table: &WordVectorTable,
    sentence: &str,
    mode: Pooling,
) -> Result<NeutralJudgement, CascadeError> {
    check_dims(neutral_model, table)?;
    let vector = embed_sentence(table, &tokenize_words(sentence), mode);
    if !vector.has_signal() {
        return Ok(NeutralJudgement {
            probability: 1.0 - EPS,
            no_signal: true,
        });
    }
    Ok(NeutralJudgement {
        probability: neutral_model.forward(&vector.values)?.probability,
        no_signal: false,
    })
}

/// Neutral detector backed by a trained classifier.
#[derive(Debug, Clone, Copy)]
pub struct MlpNeutralDetector<'a> {
    pub model: &'a MlpModel,
    pub table: &'a WordVectorTable,
    pub pooling: Pooling,
}

impl NeutralDetector for MlpNeutralDetector<'_> {
    fn judge(&self, sentence: &str) -> Result<NeutralJudgement, CascadeError> {
        neutral_predict(self.model, self.table, sentence, self.pooling)
    }
}

/// Flags exactly the sentences that occur in a known neutral pool, compared
/// on their normalized token sequence. Used to isolate the filter from
/// detector error in the dilution experiment.
#[derive(Debug, Clone, Default)]
pub struct PoolMembershipDetector {
    known: HashSet<Vec<String>>,
}

impl PoolMembershipDetector {
    pub fn new(pool: &[LabeledExample]) -> Self {
        let known = pool
            .iter()
            .flat_map(|e| split_sentences(&e.text).sentences)
            .map(|s| tokenize_words(&s))
            .collect();
        Self { known }
    }
}

impl NeutralDetector for PoolMembershipDetector {
    fn judge(&self, sentence: &str) -> Result<NeutralJudgement, CascadeError> {
        let member = self.known.contains(&tokenize_words(sentence));
        Ok(NeutralJudgement {
            probability: if member { 1.0 - EPS } else { EPS },
            no_signal: false,
        })
    }
}

/// How kept sentences are turned into one score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FusionMode {
    /// Re-embed the space-joined kept sentences and run the baseline once.
    #[default]
    Fused,
    /// Average the baseline's right-probability over kept sentences.
    SentenceMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeConfig {
    pub neutral_threshold: f64,
    pub min_kept_fraction: f64,
    pub pooling: Pooling,
    pub fusion: FusionMode,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        Self {
            neutral_threshold: 0.5,
            min_kept_fraction: 0.0,
            pooling: Pooling::Average,
            fusion: FusionMode::Fused,
        }
    }
}

impl CascadeConfig {
    pub fn validate(&self) -> Result<(), CascadeError> {
        if !(self.neutral_threshold > 0.0 && self.neutral_threshold < 1.0) {
            return Err(CascadeError::InvalidConfig(format!(
                "neutral_threshold {} is outside (0, 1)",
                self.neutral_threshold
            )));
        }
        if !(0.0..=1.0).contains(&self.min_kept_fraction) {
            return Err(CascadeError::InvalidConfig(format!(
                "min_kept_fraction {} is outside [0, 1]",
                self.min_kept_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceAudit {
    /// Position in the sentence sequence of the input.
    pub index: usize,
    pub sentence: String,
    pub neutral_probability: f64,
    pub no_signal: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    Score(PolarityScore),
    /// Nothing (or too little) survived the filter.
    AllNeutral,
}

impl Verdict {
    pub fn score(&self) -> Option<&PolarityScore> {
        match self {
            Verdict::Score(s) => Some(s),
            Verdict::AllNeutral => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeVerdict {
    pub verdict: Verdict,
    pub kept: Vec<SentenceAudit>,
    pub dropped: Vec<SentenceAudit>,
    pub fused_text: String,
}

impl CascadeVerdict {
    pub fn sentence_count(&self) -> usize {
        self.kept.len() + self.dropped.len()
    }
}

/// Two-step prediction with a trained neutral detector.
pub fn two_step_predict(
    polarity_model: &MlpModel,
    neutral_model: &MlpModel,
    table: &WordVectorTable,
    text: &str,
    cfg: &CascadeConfig,
) -> Result<CascadeVerdict, CascadeError> {
    check_dims(neutral_model, table)?;
    let detector = MlpNeutralDetector {
        model: neutral_model,
        table,
        pooling: cfg.pooling,
    };
    two_step_predict_with(polarity_model, &detector, table, text, cfg)
}

/// Split, drop sentences with neutral probability above the threshold, fuse
/// the rest, score.
pub fn two_step_predict_with<D: NeutralDetector + ?Sized>(
    polarity_model: &MlpModel,
    detector: &D,
    table: &WordVectorTable,
    text: &str,
    cfg: &CascadeConfig,
) -> Result<CascadeVerdict, CascadeError> {
    cfg.validate()?;
    check_dims(polarity_model, table)?;
    if text.trim().is_empty() {
        return Err(CascadeError::EmptyInput);
    }
    let sentences = split_sentences(text);
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for (index, sentence) in sentences.sentences.into_iter().enumerate() {
        let judgement = detector.judge(&sentence)?;
        let audit = SentenceAudit {
            index,
            sentence,
            neutral_probability: judgement.probability,
            no_signal: judgement.no_signal,
        };
        if judgement.probability > cfg.neutral_threshold {
            dropped.push(audit);
        } else {
            kept.push(audit);
        }
    }
    let fused_text = kept
        .iter()
        .map(|a| a.sentence.as_str())
        .collect::<Vec<_>>()
        .join(" ");
    let total = kept.len() + dropped.len();
    let too_few = (kept.len() as f64) < cfg.min_kept_fraction * total as f64;
    let verdict = if kept.is_empty() || too_few {
        Verdict::AllNeutral
    } else {
        Verdict::Score(fuse(polarity_model, table, &kept, &fused_text, cfg)?)
    };
    Ok(CascadeVerdict {
        verdict,
        kept,
        dropped,
        fused_text,
    })
}

fn fuse(
    polarity_model: &MlpModel,
    table: &WordVectorTable,
    kept: &[SentenceAudit],
    fused_text: &str,
    cfg: &CascadeConfig,
) -> Result<PolarityScore, CascadeError> {
    match cfg.fusion {
        FusionMode::Fused => tepc_predict(polarity_model, table, fused_text, cfg.pooling),
        FusionMode::SentenceMean => {
            let mut sum = 0.0;
            let mut n = 0usize;
            for a in kept {
                match tepc_predict(polarity_model, table, &a.sentence, cfg.pooling) {
                    Ok(s) => {
                        sum += s.probability_right;
                        n += 1;
                    }
                    Err(CascadeError::NoSignal) => {}
                    Err(e) => return Err(e),
                }
            }
            if n == 0 {
                return Err(CascadeError::NoSignal);
            }
            Ok(PolarityScore::from_probability(sum / n as f64))
        }
    }
}

/// Order-preserving [`two_step_predict`] over many texts; one failure does not
/// affect the other slots.
pub fn batch_predict<S: AsRef<str> + Sync>(
    polarity_model: &MlpModel,
    neutral_model: &MlpModel,
    table: &WordVectorTable,
    texts: &[S],
    cfg: &CascadeConfig,
) -> Vec<Result<CascadeVerdict, CascadeError>> {
    let detector = MlpNeutralDetector {
        model: neutral_model,
        table,
        pooling: cfg.pooling,
    };
    batch_predict_with(polarity_model, &detector, table, texts, cfg)
}

pub fn batch_predict_with<D, S>(
    polarity_model: &MlpModel,
    detector: &D,
    table: &WordVectorTable,
    texts: &[S],
    cfg: &CascadeConfig,
) -> Vec<Result<CascadeVerdict, CascadeError>>
where
    D: NeutralDetector + Sync + ?Sized,
    S: AsRef<str> + Sync,
{
    texts
        .par_iter()
        .map(|t| two_step_predict_with(polarity_model, detector, table, t.as_ref(), cfg))
        .collect()
}
