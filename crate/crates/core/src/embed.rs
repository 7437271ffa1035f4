//! Static word-vector tables and pooled sentence vectors.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("word-vector file is empty")]
    Empty,
    #[error("line {line}: expected {expected} components, found {found}")]
    InconsistentDim { line: usize, expected: usize, found: usize },
    #[error("line {line}: {message}")]
    BadValue { line: usize, message: String },
    #[error("vector dimensions differ: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("cosine similarity is undefined for a zero vector")]
    ZeroVector,
    #[error("token {0:?} is not in the vocabulary")]
    UnknownToken(String),
    #[error("top_n must be at least 1")]
    EmptyRequest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pooling {
    #[default]
    Average,
    Max,
}

impl fmt::Display for Pooling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pooling::Average => "average",
            Pooling::Max => "max",
        })
    }
}

impl FromStr for Pooling {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "average" | "avg" | "mean" => Ok(Pooling::Average),
            "max" => Ok(Pooling::Max),
            _ => Err(format!("unknown pooling mode {s:?}")),
        }
    }
}

/// Immutable token → vector map. Every row has exactly `dim` finite components.
#[derive(Debug, Clone, PartialEq)]
pub struct WordVectorTable {
    dim: usize,
    tokens: Vec<String>,
    data: Vec<f64>,
    index: HashMap<String, usize>,
    duplicates: usize,
}

impl WordVectorTable {
    /// Builds a table from `(token, vector)` rows. Later duplicates win.
    pub fn from_entries<I>(dim: usize, entries: I) -> Result<Self, EmbedError>
    where
        I: IntoIterator<Item = (String, Vec<f64>)>,
    {
        let mut table = Self::with_dim(dim);
        for (i, (token, v)) in entries.into_iter().enumerate() {
            if v.len() != dim {
                return Err(EmbedError::InconsistentDim {
                    line: i + 1,
                    expected: dim,
                    found: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(EmbedError::BadValue {
                    line: i + 1,
                    message: format!("non-finite component for {token:?}"),
                });
            }
            table.insert(token, &v);
        }
        if table.tokens.is_empty() || dim == 0 {
            return Err(EmbedError::Empty);
        }
        Ok(table)
    }

    fn with_dim(dim: usize) -> Self {
        Self {
            dim,
            tokens: Vec::new(),
            data: Vec::new(),
            index: HashMap::new(),
            duplicates: 0,
        }
    }

    fn insert(&mut self, token: String, v: &[f64]) {
        if let Some(&row) = self.index.get(&token) {
            self.data[row * self.dim..(row + 1) * self.dim].copy_from_slice(v);
            self.duplicates += 1;
        } else {
            self.index.insert(token.clone(), self.tokens.len());
            self.tokens.push(token);
            self.data.extend_from_slice(v);
        }
    }

    /// Independent standard-normal vectors for each token, seeded.
    pub fn random<'a, I>(tokens: I, dim: usize, seed: u64) -> Result<Self, EmbedError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<(String, Vec<f64>)> = tokens
            .into_iter()
            .map(|t| {
                let v = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                (t.to_string(), v)
            })
            .collect();
        Self::from_entries(dim, rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vocab_size(&self) -> usize {
        self.tokens.len()
    }

    /// Rows overwritten by a later duplicate while loading.
    pub fn duplicates(&self) -> usize {
        self.duplicates
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.index
            .get(token)
            .map(|&row| &self.data[row * self.dim..(row + 1) * self.dim])
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// Tokens in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.tokens
            .iter()
            .zip(self.data.chunks_exact(self.dim))
            .map(|(t, v)| (t.as_str(), v))
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{} {}", self.vocab_size(), self.dim)?;
        for (t, v) in self.iter() {
            write!(w, "{t}")?;
            for x in v {
                write!(w, " {x:?}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> io::Result<()> {
        crate::io::write_atomic(path, |w| self.write_text(w))
    }
}

fn is_header(fields: &[&str]) -> bool {
    fields.len() == 2 && fields.iter().all(|f| f.parse::<u64>().is_ok())
}

/// Parses the text format: `token v1 ... vD` per line with an optional
/// `vocab_size dim` header on the first line.
pub fn parse_table<R: BufRead>(reader: R) -> Result<WordVectorTable, EmbedError> {
    let mut table: Option<WordVectorTable> = None;
    let mut first = true;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| EmbedError::Io {
            path: PathBuf::new(),
            source,
        })?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if std::mem::take(&mut first) && is_header(&fields) {
            continue;
        }
        let (token, values) = fields.split_first().expect("nonempty");
        let v = values
            .iter()
            .map(|s| {
                let x: f64 = s.parse().map_err(|_| EmbedError::BadValue {
                    line: line_no,
                    message: format!("cannot parse {s:?} as a number"),
                })?;
                if x.is_finite() {
                    Ok(x)
                } else {
                    Err(EmbedError::BadValue {
                        line: line_no,
                        message: format!("non-finite value {s:?}"),
                    })
                }
            })
            .collect::<Result<Vec<f64>, _>>()?;
        let t = table.get_or_insert_with(|| WordVectorTable::with_dim(v.len()));
        if v.is_empty() || v.len() != t.dim {
            return Err(EmbedError::InconsistentDim {
                line: line_no,
                expected: t.dim,
                found: v.len(),
            });
        }
        t.insert(token.to_string(), &v);
    }
    let table = table.ok_or(EmbedError::Empty)?;
    if table.duplicates > 0 {
        log::warn!("{} duplicate tokens in word-vector file (last wins)", table.duplicates);
    }
    Ok(table)
}

pub fn load_table(path: impl AsRef<Path>) -> Result<WordVectorTable, EmbedError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| EmbedError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_table(BufReader::new(file)).map_err(|e| match e {
        EmbedError::Io { source, .. } => EmbedError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}

/// Pooled representation of a token sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceVector {
    pub values: Vec<f64>,
    pub covered_tokens: usize,
    pub total_tokens: usize,
}

impl SentenceVector {
    pub fn has_signal(&self) -> bool {
        self.covered_tokens > 0
    }
}

/// Pools in-vocabulary token vectors; out-of-vocabulary tokens are counted and
/// skipped. With no covered token the result is the zero vector.
pub fn embed_sentence<S: AsRef<str>>(
    table: &WordVectorTable,
    tokens: &[S],
    mode: Pooling,
) -> SentenceVector {
    let dim = table.dim();
    let mut acc = vec![0.0; dim];
    let mut covered = 0usize;
    for v in tokens.iter().filter_map(|t| table.get(t.as_ref())) {
        if covered == 0 {
            acc.copy_from_slice(v);
        } else {
            match mode {
                Pooling::Average => acc.iter_mut().zip(v).for_each(|(a, x)| *a += x),
                Pooling::Max => acc.iter_mut().zip(v).for_each(|(a, x)| *a = a.max(*x)),
            }
        }
        covered += 1;
    }
    if mode == Pooling::Average && covered > 1 {
        let n = covered as f64;
        acc.iter_mut().for_each(|a| *a /= n);
    }
    SentenceVector {
        values: acc,
        covered_tokens: covered,
        total_tokens: tokens.len(),
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn cosine_similarity(u: &[f64], v: &[f64]) -> Result<f64, EmbedError> {
    if u.len() != v.len() {
        return Err(EmbedError::DimMismatch(u.len(), v.len()));
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(EmbedError::ZeroVector);
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

/// Solves `a : b :: c : ?` by ranking every other token `w` on
/// `cos(v_a - v_b, v_c - v_w)`, best first. Ties keep vocabulary order.
pub fn solve_analogy(
    table: &WordVectorTable,
    a: &str,
    b: &str,
    c: &str,
    top_n: usize,
) -> Result<Vec<(String, f64)>, EmbedError> {
    if top_n == 0 {
        return Err(EmbedError::EmptyRequest);
    }
    let lookup = |t: &str| table.get(t).ok_or_else(|| EmbedError::UnknownToken(t.to_string()));
    let (va, vb, vc) = (lookup(a)?, lookup(b)?, lookup(c)?);
    let target: Vec<f64> = va.iter().zip(vb).map(|(x, y)| x - y).collect();
    if norm(&target) == 0.0 {
        return Err(EmbedError::ZeroVector);
    }
    let mut ranked: Vec<(String, f64)> = table
        .iter()
        .filter(|(w, _)| ![a, b, c].contains(w))
        .filter_map(|(w, vw)| {
            let diff: Vec<f64> = vc.iter().zip(vw).map(|(x, y)| x - y).collect();
            cosine_similarity(&target, &diff).ok().map(|s| (w.to_string(), s))
        })
        .collect();
    ranked.sort_by(|x, y| y.1.total_cmp(&x.1));
    ranked.truncate(top_n);
    Ok(ranked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ab() -> WordVectorTable {
        parse_table("a 1.0 0.0\nb 0.0 1.0".as_bytes()).unwrap()
    }

    #[test]
    fn parses_plain_table() {
        let t = ab();
        assert_eq!((t.dim(), t.vocab_size()), (2, 2));
        assert_eq!(t.get("b"), Some(&[0.0, 1.0][..]));
    }

    #[test]
    fn rejects_ragged_rows() {
        let err = parse_table("a 1 0\nb 1 0 0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, EmbedError::InconsistentDim { line: 2, expected: 2, found: 3 }));
    }

    #[test]
    fn header_is_skipped() {
        let t = parse_table("2 2\na 1 0\nb 0 1\n".as_bytes()).unwrap();
        assert_eq!((t.dim(), t.vocab_size()), (2, 2));
    }

    #[test]
    fn errors_on_empty_and_non_finite() {
        assert!(matches!(parse_table("".as_bytes()), Err(EmbedError::Empty)));
        assert!(matches!(parse_table("\n\n".as_bytes()), Err(EmbedError::Empty)));
        assert!(matches!(
            parse_table("a 1 NaN\n".as_bytes()),
            Err(EmbedError::BadValue { line: 1, .. })
        ));
        assert!(matches!(
            parse_table("a 1 inf\n".as_bytes()),
            Err(EmbedError::BadValue { line: 1, .. })
        ));
    }

    #[test]
    fn duplicates_last_wins() {
        let t = parse_table("a 1 0\nb 0 1\na 5 5\n".as_bytes()).unwrap();
        assert_eq!(t.vocab_size(), 2);
        assert_eq!(t.duplicates(), 1);
        assert_eq!(t.get("a"), Some(&[5.0, 5.0][..]));
    }

    #[test]
    fn text_round_trip() {
        let t = WordVectorTable::random(["x", "y", "z"], 4, 9).unwrap();
        let mut buf = Vec::new();
        t.write_text(&mut buf).unwrap();
        assert_eq!(parse_table(&buf[..]).unwrap(), t);
    }

    #[test]
    fn pooling_modes() {
        let t = ab();
        let avg = embed_sentence(&t, &["a", "b"], Pooling::Average);
        assert_eq!(avg.values, vec![0.5, 0.5]);
        assert_eq!((avg.covered_tokens, avg.total_tokens), (2, 2));
        let max = embed_sentence(&t, &["a", "b"], Pooling::Max);
        assert_eq!(max.values, vec![1.0, 1.0]);
        let oov = embed_sentence(&t, &["zzz"], Pooling::Average);
        assert_eq!(oov.values, vec![0.0, 0.0]);
        assert_eq!((oov.covered_tokens, oov.total_tokens), (0, 1));
        assert!(!oov.has_signal());
    }

    #[test]
    fn cosine_cases() {
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(cosine_similarity(&[1.0, 0.0], &[-1.0, 0.0]).unwrap(), -1.0);
        assert!(matches!(cosine_similarity(&[0.0, 0.0], &[1.0, 0.0]), Err(EmbedError::ZeroVector)));
        assert!(matches!(cosine_similarity(&[1.0], &[1.0, 0.0]), Err(EmbedError::DimMismatch(1, 2))));
    }

    fn analogy_table() -> WordVectorTable {
        // queen = king - man + woman, exactly.
        let rows = vec![
            ("king".to_string(), vec![3.0, 1.0, 0.5]),
            ("man".to_string(), vec![1.0, 0.0, 0.2]),
            ("woman".to_string(), vec![1.0, 2.0, 0.1]),
            ("apple".to_string(), vec![-1.0, 0.3, 4.0]),
            ("queen".to_string(), vec![3.0, 3.0, 0.4]),
            ("car".to_string(), vec![0.2, -2.0, 1.0]),
        ];
        WordVectorTable::from_entries(3, rows).unwrap()
    }

    #[test]
    fn analogy_finds_constructed_answer() {
        // man : woman :: king : queen  <=>  v_man - v_woman = v_king - v_queen
        let t = analogy_table();
        let ranked = solve_analogy(&t, "man", "woman", "king", 2).unwrap();
        assert_eq!(ranked[0].0, "queen");
        assert!((ranked[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn analogy_clamps_and_validates() {
        let t = analogy_table();
        assert_eq!(solve_analogy(&t, "man", "woman", "king", 50).unwrap().len(), 3);
        match solve_analogy(&t, "man", "boat", "king", 1) {
            Err(EmbedError::UnknownToken(tok)) => assert_eq!(tok, "boat"),
            other => panic!("unexpected {other:?}"),
        }
    }

    fn small_table() -> WordVectorTable {
        WordVectorTable::random(["t0", "t1", "t2", "t3", "t4", "t5"], 5, 17).unwrap()
    }

    proptest! {
        #[test]
        fn average_is_permutation_invariant(idx in proptest::collection::vec(0usize..8, 0..12), seed: u64) {
            let t = small_table();
            let toks: Vec<String> = idx.iter().map(|i| format!("t{i}")).collect();
            let mut shuffled = toks.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rand::seq::SliceRandom::shuffle(&mut shuffled[..], &mut rng);
            let a = embed_sentence(&t, &toks, Pooling::Average);
            let b = embed_sentence(&t, &shuffled, Pooling::Average);
            for (x, y) in a.values.iter().zip(&b.values) {
                prop_assert!((x - y).abs() < 1e-12);
            }
            prop_assert_eq!(a.covered_tokens, b.covered_tokens);
        }

        #[test]
        fn average_norm_bounded(idx in proptest::collection::vec(0usize..6, 1..12)) {
            let t = small_table();
            let toks: Vec<String> = idx.iter().map(|i| format!("t{i}")).collect();
            let pooled = embed_sentence(&t, &toks, Pooling::Average);
            let max_norm = toks.iter().map(|s| norm(t.get(s).unwrap())).fold(0.0, f64::max);
            prop_assert!(norm(&pooled.values) <= max_norm + 1e-12);
        }

        #[test]
        fn cosine_self_and_symmetry(u in proptest::collection::vec(-10.0f64..10.0, 3),
                                    v in proptest::collection::vec(-10.0f64..10.0, 3)) {
            prop_assume!(norm(&u) > 1e-6 && norm(&v) > 1e-6);
            prop_assert!((cosine_similarity(&u, &u).unwrap() - 1.0).abs() < 1e-12);
            let uv = cosine_similarity(&u, &v).unwrap();
            let vu = cosine_similarity(&v, &u).unwrap();
            prop_assert!((uv - vu).abs() < 1e-12);
        }
    }
}
