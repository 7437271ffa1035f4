//! Labeled datasets: line-delimited JSON ingestion, stratified splits, the
//! neutral-dilution corpus and a synthetic disjoint-vocabulary generator.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::textproc::ends_with_terminal;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: unknown label {label:?} (expected left, right or neutral)")]
    UnknownLabel { line: usize, label: String },
    #[error("line {line}: text is empty")]
    EmptyText { line: usize },
    #[error("need at least {needed} examples, got {got}")]
    TooFewExamples { needed: usize, got: usize },
    #[error("train fraction {0} is outside (0, 1)")]
    FractionOutOfRange(f64),
    #[error("neutral pool is empty but {0} neutral sentences were requested per example")]
    EmptyNeutralPool(usize),
    #[error("example {id:?} has label {label}, expected {expected}")]
    WrongLabel { id: String, label: Label, expected: &'static str },
    #[error("token {0:?} appears in more than one vocabulary set")]
    OverlappingVocab(String),
    #[error("vocabulary set {set} has {size} tokens, need at least {MIN_VOCAB_SET}")]
    VocabTooSmall { set: &'static str, size: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Left,
    Right,
    Neutral,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Left, Label::Right, Label::Neutral];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Left => "left",
            Label::Right => "right",
            Label::Neutral => "neutral",
        }
    }

    pub fn is_polar(self) -> bool {
        self != Label::Neutral
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "left" => Ok(Label::Left),
            "right" => Ok(Label::Right),
            "neutral" => Ok(Label::Neutral),
            _ => Err(s.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub id: String,
    pub text: String,
    pub label: Label,
}

impl LabeledExample {
    pub fn new(id: impl Into<String>, text: impl Into<String>, label: Label) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
            label,
        }
    }
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    text: String,
    label: String,
}

/// Parses one dataset line. `line` is 1-based and only used for errors.
pub fn parse_record(raw: &str, line: usize) -> Result<LabeledExample, CorpusError> {
    let rec: RawRecord = serde_json::from_str(raw).map_err(|e| CorpusError::Malformed {
        line,
        message: e.to_string(),
    })?;
    let label = rec
        .label
        .parse()
        .map_err(|label| CorpusError::UnknownLabel { line, label })?;
    if rec.text.trim().is_empty() {
        return Err(CorpusError::EmptyText { line });
    }
    Ok(LabeledExample {
        id: rec.id,
        text: rec.text,
        label,
    })
}

/// Reads a dataset file in file order. Blank lines are skipped.
pub fn load_jsonl(path: impl AsRef<Path>) -> Result<Vec<LabeledExample>, CorpusError> {
    let path = path.as_ref();
    let io_err = |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    };
    let reader = BufReader::new(File::open(path).map_err(io_err)?);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_record(&line, idx + 1)?);
    }
    Ok(out)
}

pub fn write_jsonl<W: Write>(mut w: W, data: &[LabeledExample]) -> io::Result<()> {
    for ex in data {
        serde_json::to_writer(&mut w, ex)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Atomically writes a dataset file.
pub fn save_jsonl(path: impl AsRef<Path>, data: &[LabeledExample]) -> io::Result<()> {
    crate::io::write_atomic(path, |w| write_jsonl(w, data))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub train: Vec<LabeledExample>,
    pub test: Vec<LabeledExample>,
    pub seed: u64,
    pub train_fraction: f64,
}

/// Seeded stratified split. Per-label train counts are apportioned by largest
/// remainder so both each label and the total stay within one item of the
/// requested fraction.
pub fn split(
    data: &[LabeledExample],
    train_fraction: f64,
    seed: u64,
) -> Result<DatasetSplit, CorpusError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(CorpusError::FractionOutOfRange(train_fraction));
    }
    if data.len() < 2 {
        return Err(CorpusError::TooFewExamples {
            needed: 2,
            got: data.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut groups: Vec<Vec<&LabeledExample>> = Label::ALL
        .iter()
        .map(|&l| data.iter().filter(|e| e.label == l).collect())
        .collect();
    for g in &mut groups {
        g.shuffle(&mut rng);
    }

    let total = data.len();
    let target = ((train_fraction * total as f64).round() as usize).clamp(1, total - 1);
    let ideal: Vec<f64> = groups.iter().map(|g| train_fraction * g.len() as f64).collect();
    let mut counts: Vec<usize> = ideal.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..groups.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = ideal[a] - ideal[a].floor();
        let rb = ideal[b] - ideal[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut assigned: usize = counts.iter().sum();
    for &g in order.iter().cycle().take(order.len() * 2) {
        if assigned >= target {
            break;
        }
        if counts[g] < groups[g].len() && (counts[g] as f64) < ideal[g].ceil() {
            counts[g] += 1;
            assigned += 1;
        }
    }

    let mut train = Vec::with_capacity(target);
    let mut test = Vec::with_capacity(total - target);
    for (g, n) in groups.iter().zip(&counts) {
        train.extend(g[..*n].iter().map(|&e| e.clone()));
        test.extend(g[*n..].iter().map(|&e| e.clone()));
    }
    train.shuffle(&mut rng);
    test.shuffle(&mut rng);
    Ok(DatasetSplit {
        train,
        test,
        seed,
        train_fraction,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DilutionSpec {
    /// Neutral sentences appended per example.
    pub k: usize,
    pub seed: u64,
}

/// Appends `spec.k` neutral sentences (drawn with replacement) to every polar
/// example. Fragments without terminal punctuation are closed with ". " so the
/// sentence splitter recovers each appended unit.
pub fn build_diluted(
    polar: &[LabeledExample],
    neutral_pool: &[LabeledExample],
    spec: DilutionSpec,
) -> Result<Vec<LabeledExample>, CorpusError> {
    if let Some(bad) = neutral_pool.iter().find(|e| e.label != Label::Neutral) {
        return Err(CorpusError::WrongLabel {
            id: bad.id.clone(),
            label: bad.label,
            expected: "neutral",
        });
    }
    if let Some(bad) = polar.iter().find(|e| !e.label.is_polar()) {
        return Err(CorpusError::WrongLabel {
            id: bad.id.clone(),
            label: bad.label,
            expected: "left or right",
        });
    }
    if spec.k > 0 && neutral_pool.is_empty() {
        return Err(CorpusError::EmptyNeutralPool(spec.k));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    Ok(polar
        .iter()
        .map(|ex| {
            let mut text = ex.text.clone();
            for _ in 0..spec.k {
                let add = neutral_pool.choose(&mut rng).expect("pool checked nonempty");
                append_fragment(&mut text, &add.text);
            }
            LabeledExample {
                id: ex.id.clone(),
                text,
                label: ex.label,
            }
        })
        .collect())
}

fn append_fragment(text: &mut String, fragment: &str) {
    let trimmed_len = text.trim_end().len();
    text.truncate(trimmed_len);
    if ends_with_terminal(text) {
        text.push(' ');
    } else {
        text.push_str(". ");
    }
    text.push_str(fragment.trim());
}

pub const MIN_VOCAB_SET: usize = 20;

/// Three pairwise-disjoint token sets for [`synth_corpus`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VocabSpec {
    pub left: Vec<String>,
    pub right: Vec<String>,
    pub neutral: Vec<String>,
}

impl VocabSpec {
    /// `per_set` tokens named `left000`, `right000`, `plain000`, ...
    pub fn generated(per_set: usize) -> Self {
        let make = |stem: &str| (0..per_set).map(|i| format!("{stem}{i:03}")).collect();
        Self {
            left: make("left"),
            right: make("right"),
            neutral: make("plain"),
        }
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.left
            .iter()
            .chain(&self.right)
            .chain(&self.neutral)
            .map(String::as_str)
    }

    fn validate(&self) -> Result<(), CorpusError> {
        for (set, toks) in [("left", &self.left), ("right", &self.right), ("neutral", &self.neutral)] {
            if toks.len() < MIN_VOCAB_SET {
                return Err(CorpusError::VocabTooSmall {
                    set,
                    size: toks.len(),
                });
            }
        }
        let mut seen = HashSet::new();
        // Duplicates inside one set are harmless; only cross-set overlap matters.
        for toks in [&self.left, &self.right, &self.neutral] {
            let set: HashSet<&String> = toks.iter().collect();
            for t in set {
                if !seen.insert(t) {
                    return Err(CorpusError::OverlappingVocab(t.clone()));
                }
            }
        }
        Ok(())
    }
}

pub const SYNTH_MIN_LEN: usize = 5;
pub const SYNTH_MAX_LEN: usize = 15;
pub const SYNTH_MIN_CLASS_SHARE: f64 = 0.6;

/// Desk-scale stand-in for a labeled tweet corpus: `n_per_class` sentences per
/// label. Polar sentences draw at least 60% of their tokens from their own set
/// and the remainder from the neutral set; neutral sentences use only the
/// neutral set. Lengths are uniform in `[5, 15]`.
pub fn synth_corpus(
    n_per_class: usize,
    vocab: &VocabSpec,
    seed: u64,
) -> Result<Vec<LabeledExample>, CorpusError> {
    vocab.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(3 * n_per_class);
    for label in Label::ALL {
        let own = match label {
            Label::Left => &vocab.left,
            Label::Right => &vocab.right,
            Label::Neutral => &vocab.neutral,
        };
        for i in 0..n_per_class {
            let len = rng.random_range(SYNTH_MIN_LEN..=SYNTH_MAX_LEN);
            let n_own = if label.is_polar() {
                let min_own = (SYNTH_MIN_CLASS_SHARE * len as f64).ceil() as usize;
                rng.random_range(min_own..=len)
            } else {
                len
            };
            let mut tokens: Vec<&str> = (0..len)
                .map(|j| {
                    let set = if j < n_own { own } else { &vocab.neutral };
                    set.choose(&mut rng).expect("validated nonempty").as_str()
                })
                .collect();
            tokens.shuffle(&mut rng);
            out.push(LabeledExample {
                id: format!("synth-{label}-{i:05}"),
                text: format!("{}.", tokens.join(" ")),
                label,
            });
        }
    }
    Ok(out)
}
