//! Polarity prediction for long-form text with a classifier trained on short,
//! opinion-dense text.
//!
//! The crate provides the whole stack: dataset ingestion and dilution
//! ([`corpus`]), sentence and word tokenization ([`textproc`]), static
//! word-vector embeddings ([`embed`]), a small feedforward classifier trained
//! by SGD ([`nnet`]), the single-step and two-step classifiers ([`cascade`]),
//! and the evaluation harness ([`eval`]).

pub mod cascade;
pub mod corpus;
pub mod embed;
pub mod eval;
pub mod io;
pub mod nnet;
pub mod pipeline;
pub mod textproc;
