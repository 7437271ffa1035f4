//! Metrics and experiments: accuracy, Spearman rank correlation, the
//! dilution-degradation curve, and explained-variance ratios of PCA used as a
//! separability diagnostic.

use std::collections::HashSet;
use std::fmt;
use std::io::{self, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cascade::{tepc_predict, two_step_predict_with, CascadeConfig, CascadeError, NeutralDetector};
use crate::corpus::{build_diluted, CorpusError, DilutionSpec, Label, LabeledExample};
use crate::embed::WordVectorTable;
use crate::nnet::MlpModel;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("sequences differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("nothing to evaluate")]
    Empty,
    #[error("need at least {needed} items, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("score for {0:?} is not finite")]
    NonFinite(String),
    #[error("the {0} column has zero variance; correlation is undefined")]
    ZeroVariance(&'static str),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("power iteration did not converge for component {component}")]
    NoConvergence { component: usize },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Cascade(#[from] CascadeError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn accuracy(predictions: &[bool], truth: &[bool]) -> Result<f64, EvalError> {
    if predictions.len() != truth.len() {
        return Err(EvalError::LengthMismatch(predictions.len(), truth.len()));
    }
    if truth.is_empty() {
        return Err(EvalError::Empty);
    }
    let hits = predictions.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedItem {
    pub id: String,
    pub human: f64,
    pub machine: f64,
}

/// Paired human and machine scores with unique ids.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RankedEvalSet {
    items: Vec<RankedItem>,
}

impl RankedEvalSet {
    pub fn new(items: Vec<RankedItem>) -> Result<Self, EvalError> {
        let mut seen = HashSet::new();
        for it in &items {
            if !seen.insert(it.id.as_str()) {
                return Err(EvalError::DuplicateId(it.id.clone()));
            }
            if !it.human.is_finite() || !it.machine.is_finite() {
                return Err(EvalError::NonFinite(it.id.clone()));
            }
        }
        Ok(Self { items })
    }

    /// Ids are generated from positions.
    pub fn from_pairs(human: &[f64], machine: &[f64]) -> Result<Self, EvalError> {
        if human.len() != machine.len() {
            return Err(EvalError::LengthMismatch(human.len(), machine.len()));
        }
        Self::new(
            human
                .iter()
                .zip(machine)
                .enumerate()
                .map(|(i, (&h, &m))| RankedItem {
                    id: i.to_string(),
                    human: h,
                    machine: m,
                })
                .collect(),
        )
    }

    /// Reads `id,human,machine` rows; a first row that does not parse as
    /// numbers is taken as a header.
    pub fn from_csv(content: &str) -> Result<Self, EvalError> {
        let mut items = Vec::new();
        for (i, line) in content.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(EvalError::InvalidArgument(format!(
                    "line {}: expected id,human,machine",
                    i + 1
                )));
            }
            match (fields[1].parse::<f64>(), fields[2].parse::<f64>()) {
                (Ok(human), Ok(machine)) => items.push(RankedItem {
                    id: fields[0].to_string(),
                    human,
                    machine,
                }),
                _ if items.is_empty() && i == 0 => continue,
                _ => {
                    return Err(EvalError::InvalidArgument(format!(
                        "line {}: scores must be numbers",
                        i + 1
                    )))
                }
            }
        }
        Self::new(items)
    }

    pub fn items(&self) -> &[RankedItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// 1-based ascending ranks; tied values share the mean of their positions.
pub fn fractional_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i+1 ..= j share their mean
        let shared = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = shared;
        }
        i = j;
    }
    ranks
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, EvalError> {
    if x.len() != y.len() {
        return Err(EvalError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(EvalError::TooFew { needed: 2, got: x.len() });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(EvalError::ZeroVariance("first"));
    }
    if syy == 0.0 {
        return Err(EvalError::ZeroVariance("second"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

fn has_ties(ranks: &[f64]) -> bool {
    ranks.iter().any(|r| r.fract() != 0.0) || {
        let mut seen = HashSet::new();
        !ranks.iter().all(|r| seen.insert(r.to_bits()))
    }
}

/// Spearman rank correlation between the human and machine columns.
///
/// Without ties this is `1 - 6 Σd² / (N³ - N)` over exactly the N pairs. With
/// ties in either column the closed form is no longer exact, so the Pearson
/// correlation of the fractional ranks is returned instead.
pub fn spearman_rho(set: &RankedEvalSet) -> Result<f64, EvalError> {
    let n = set.len();
    if n < 2 {
        return Err(EvalError::TooFew { needed: 2, got: n });
    }
    let human: Vec<f64> = set.items.iter().map(|i| i.human).collect();
    let machine: Vec<f64> = set.items.iter().map(|i| i.machine).collect();
    let rh = fractional_ranks(&human);
    let rm = fractional_ranks(&machine);
    if rh.iter().all(|&r| r == rh[0]) {
        return Err(EvalError::ZeroVariance("human"));
    }
    if rm.iter().all(|&r| r == rm[0]) {
        return Err(EvalError::ZeroVariance("machine"));
    }
    if has_ties(&rh) || has_ties(&rm) {
        return pearson(&rh, &rm);
    }
    let d2: f64 = rh.iter().zip(&rm).map(|(a, b)| (a - b) * (a - b)).sum();
    let n = n as f64;
    Ok(1.0 - 6.0 * d2 / (n * n * n - n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DilutionPoint {
    pub k: usize,
    pub tepc_accuracy: f64,
    pub two_step_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilutionCurve {
    pub points: Vec<DilutionPoint>,
    pub corpus_id: String,
    pub seed: u64,
}

impl DilutionCurve {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "k,tepc_accuracy,two_step_accuracy")?;
        for p in &self.points {
            writeln!(w, "{},{},{}", p.k, p.tepc_accuracy, p.two_step_accuracy)?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> io::Result<()> {
        crate::io::write_atomic(path, |w| self.write_csv(w))
    }

    pub fn point(&self, k: usize) -> Option<&DilutionPoint> {
        self.points.iter().find(|p| p.k == k)
    }
}

pub const MAX_DILUTION: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Outcome {
    tepc: bool,
    two_step: bool,
}

/// Accuracy of the baseline and the cascade as each polar test example is
/// padded with `k = 0..=max_k` random pool sentences. Texts the baseline
/// cannot embed and cascade verdicts of all-neutral count as misses.
#[allow(clippy::too_many_arguments)]
pub fn dilution_experiment<D: NeutralDetector + Sync + ?Sized>(
    polarity_model: &MlpModel,
    detector: &D,
    table: &WordVectorTable,
    polar_test: &[LabeledExample],
    neutral_pool: &[LabeledExample],
    seed: u64,
    max_k: usize,
    cfg: &CascadeConfig,
) -> Result<DilutionCurve, EvalError> {
    if polar_test.is_empty() {
        return Err(EvalError::Empty);
    }
    if max_k > MAX_DILUTION {
        return Err(EvalError::InvalidArgument(format!(
            "dilution level {max_k} exceeds {MAX_DILUTION}"
        )));
    }
    let mut points = Vec::with_capacity(max_k + 1);
    for k in 0..=max_k {
        let spec = DilutionSpec {
            k,
            seed: seed.wrapping_add(k as u64),
        };
        let diluted = build_diluted(polar_test, neutral_pool, spec)?;
        let outcomes = diluted
            .par_iter()
            .map(|ex| score_example(polarity_model, detector, table, ex, cfg))
            .collect::<Result<Vec<Outcome>, CascadeError>>()?;
        let n = outcomes.len() as f64;
        points.push(DilutionPoint {
            k,
            tepc_accuracy: outcomes.iter().filter(|o| o.tepc).count() as f64 / n,
            two_step_accuracy: outcomes.iter().filter(|o| o.two_step).count() as f64 / n,
        });
    }
    Ok(DilutionCurve {
        points,
        corpus_id: format!("{} polar / {} neutral", polar_test.len(), neutral_pool.len()),
        seed,
    })
}

fn score_example<D: NeutralDetector + ?Sized>(
    polarity_model: &MlpModel,
    detector: &D,
    table: &WordVectorTable,
    ex: &LabeledExample,
    cfg: &CascadeConfig,
) -> Result<Outcome, CascadeError> {
    let truth_right = ex.label == Label::Right;
    let tepc = match tepc_predict(polarity_model, table, &ex.text, cfg.pooling) {
        Ok(s) => s.is_right() == truth_right,
        Err(CascadeError::NoSignal) => false,
        Err(e) => return Err(e),
    };
    let two_step = match two_step_predict_with(polarity_model, detector, table, &ex.text, cfg) {
        Ok(v) => v.verdict.score().is_some_and(|s| s.is_right() == truth_right),
        Err(CascadeError::NoSignal) => false,
        Err(e) => return Err(e),
    };
    Ok(Outcome { tepc, two_step })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Contrast {
    LeftRight,
    BiasNeutral,
}

impl fmt::Display for Contrast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Contrast::LeftRight => "left-right",
            Contrast::BiasNeutral => "bias-neutral",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvrReport {
    /// Descending explained-variance ratios of the leading components.
    pub ratios: Vec<f64>,
    pub sample_count: usize,
    pub contrast: Option<Contrast>,
}

impl EvrReport {
    pub fn with_contrast(mut self, contrast: Contrast) -> Self {
        self.contrast = Some(contrast);
        self
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "component,ratio")?;
        for (i, r) in self.ratios.iter().enumerate() {
            writeln!(w, "{},{}", i + 1, r)?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> io::Result<()> {
        crate::io::write_atomic(path, |w| self.write_csv(w))
    }
}

pub const POWER_TOLERANCE: f64 = 1e-10;
pub const POWER_MAX_ITERS: usize = 10_000;

/// Sample covariance (divisor `n - 1`) of the rows of `vectors`.
pub fn covariance(vectors: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, EvalError> {
    let n = vectors.len();
    if n < 2 {
        return Err(EvalError::TooFew { needed: 2, got: n });
    }
    let d = vectors[0].len();
    if d == 0 {
        return Err(EvalError::InvalidArgument("vectors have no components".into()));
    }
    if let Some(v) = vectors.iter().find(|v| v.len() != d) {
        return Err(EvalError::LengthMismatch(d, v.len()));
    }
    let mut mean = vec![0.0; d];
    for v in vectors {
        mean.iter_mut().zip(v).for_each(|(m, x)| *m += x);
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut cov = vec![vec![0.0; d]; d];
    let mut centered = vec![0.0; d];
    for v in vectors {
        centered.iter_mut().zip(v.iter().zip(&mean)).for_each(|(c, (x, m))| *c = x - m);
        for i in 0..d {
            let ci = centered[i];
            for j in i..d {
                cov[i][j] += ci * centered[j];
            }
        }
    }
    let denom = (n - 1) as f64;
    cov.iter_mut().flatten().for_each(|c| *c /= denom);
    // Mirror the upper triangle.
    #[allow(clippy::needless_range_loop)]
    for i in 0..d {
        for j in 0..i {
            cov[i][j] = cov[j][i];
        }
    }
    Ok(cov)
}

fn mat_vec(a: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

/// Leading eigenpair of symmetric `a` by power iteration. Converged when the
/// residual `‖Av − λv‖` falls below `tol * scale`.
fn dominant_eigenpair(
    a: &[Vec<f64>],
    scale: f64,
    component: usize,
) -> Result<(f64, Vec<f64>), EvalError> {
    let d = a.len();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ component as u64);
    let mut v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
    let nv = crate::embed::norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    for _ in 0..POWER_MAX_ITERS {
        let w = mat_vec(a, &v);
        let lambda: f64 = v.iter().zip(&w).map(|(x, y)| x * y).sum();
        let residual = w
            .iter()
            .zip(&v)
            .map(|(wi, vi)| (wi - lambda * vi).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= POWER_TOLERANCE * scale {
            return Ok((lambda, v));
        }
        let nw = crate::embed::norm(&w);
        v = w.into_iter().map(|x| x / nw).collect();
    }
    Err(EvalError::NoConvergence { component })
}

/// Explained-variance ratios of the top `components` principal components:
/// eigenvalues of the sample covariance, found one at a time by power
/// iteration with deflation, divided by the covariance trace.
pub fn pca_evr(vectors: &[Vec<f64>], components: usize) -> Result<EvrReport, EvalError> {
    let mut cov = covariance(vectors)?;
    let d = cov.len();
    let limit = d.min(vectors.len());
    if components == 0 || components > limit {
        return Err(EvalError::InvalidArgument(format!(
            "components must be in 1..={limit}, got {components}"
        )));
    }
    let trace: f64 = (0..d).map(|i| cov[i][i]).sum();
    if trace <= 0.0 {
        return Err(EvalError::ZeroVariance("sample"));
    }
    let mut eigenvalues = Vec::with_capacity(components);
    for c in 0..components {
        let (lambda, v) = dominant_eigenpair(&cov, trace, c)?;
        for i in 0..d {
            for j in 0..d {
                cov[i][j] -= lambda * v[i] * v[j];
            }
        }
        eigenvalues.push(lambda.max(0.0));
    }
    eigenvalues.sort_by(|a, b| b.total_cmp(a));
    Ok(EvrReport {
        ratios: eigenvalues.into_iter().map(|l| (l / trace).clamp(0.0, 1.0)).collect(),
        sample_count: vectors.len(),
        contrast: None,
    })
}

/// `n` vectors `a_i - b_j` with `i`, `j` drawn independently and uniformly.
pub fn difference_sample(
    a: &[Vec<f64>],
    b: &[Vec<f64>],
    n: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, EvalError> {
    if a.is_empty() || b.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let x = &a[rng.random_range(0..a.len())];
            let y = &b[rng.random_range(0..b.len())];
            x.iter().zip(y).map(|(p, q)| p - q).collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn accuracy_cases() {
        assert_eq!(accuracy(&[true, false], &[true, false]).unwrap(), 1.0);
        assert_eq!(accuracy(&[true, false], &[false, true]).unwrap(), 0.0);
        assert_eq!(accuracy(&[true, true, false, true], &[true, true, false, false]).unwrap(), 0.75);
        assert!(matches!(accuracy(&[true], &[]), Err(EvalError::LengthMismatch(1, 0))));
        assert!(matches!(accuracy(&[], &[]), Err(EvalError::Empty)));
    }

    #[test]
    fn ranks_with_ties() {
        assert_eq!(fractional_ranks(&[10.0, 30.0, 20.0]), vec![1.0, 3.0, 2.0]);
        assert_eq!(fractional_ranks(&[5.0, 1.0, 5.0, 5.0]), vec![3.0, 1.0, 3.0, 3.0]);
    }

    #[test]
    fn spearman_fixtures() {
        let set = RankedEvalSet::from_pairs(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert_eq!(spearman_rho(&set).unwrap(), 0.8);
        let same = RankedEvalSet::from_pairs(&[1., 2., 3., 4., 5.], &[1., 2., 3., 4., 5.]).unwrap();
        assert_eq!(spearman_rho(&same).unwrap(), 1.0);
        let rev = RankedEvalSet::from_pairs(&[1., 2., 3.], &[3., 2., 1.]).unwrap();
        assert_eq!(spearman_rho(&rev).unwrap(), -1.0);
    }

    #[test]
    fn spearman_errors() {
        let one = RankedEvalSet::from_pairs(&[1.0], &[1.0]).unwrap();
        assert!(matches!(spearman_rho(&one), Err(EvalError::TooFew { .. })));
        let flat = RankedEvalSet::from_pairs(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(spearman_rho(&flat), Err(EvalError::ZeroVariance("human"))));
        let dup = vec![
            RankedItem { id: "a".into(), human: 1.0, machine: 1.0 },
            RankedItem { id: "a".into(), human: 2.0, machine: 2.0 },
        ];
        assert!(matches!(RankedEvalSet::new(dup), Err(EvalError::DuplicateId(_))));
        assert!(RankedEvalSet::from_pairs(&[f64::NAN, 1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn csv_fixture() {
        let set = RankedEvalSet::from_csv("id,human,machine\na,1,1\nb,2,3\nc,3,2\nd,4,4\n").unwrap();
        assert_eq!(set.len(), 4);
        assert_eq!(spearman_rho(&set).unwrap(), 0.8);
        assert_eq!(RankedEvalSet::from_csv("a,1,x\nb,2,2").unwrap().len(), 1);
        assert!(RankedEvalSet::from_csv("a,1,1\nb,2,x").is_err());
    }

    proptest! {
        #[test]
        fn spearman_monotone_invariance(xs in proptest::collection::vec(-100.0f64..100.0, 3..30),
                                         ys in proptest::collection::vec(-100.0f64..100.0, 30)) {
            let ys = &ys[..xs.len()];
            let base = RankedEvalSet::from_pairs(&xs, ys).unwrap();
            prop_assume!(spearman_rho(&base).is_ok());
            let t: Vec<f64> = xs.iter().map(|x| x.powi(3) + 7.0).collect();
            let u: Vec<f64> = ys.iter().map(|y| (y / 50.0).exp()).collect();
            let moved = RankedEvalSet::from_pairs(&t, &u).unwrap();
            prop_assert!((spearman_rho(&base).unwrap() - spearman_rho(&moved).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_one_data() {
        let v: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, -2.0 * i as f64, 0.5 * i as f64]).collect();
        let r = pca_evr(&v, 3).unwrap();
        assert_relative_eq!(r.ratios[0], 1.0, epsilon = 1e-12);
        assert!(r.ratios[1] < 1e-12 && r.ratios[2] < 1e-12);
    }

    #[test]
    fn trace_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let scales = [3.0, 2.0, 1.0, 0.5];
        let v: Vec<Vec<f64>> = (0..500)
            .map(|_| scales.iter().map(|s| { let z: f64 = StandardNormal.sample(&mut rng); s * z }).collect())
            .collect();
        let all = pca_evr(&v, 4).unwrap();
        assert!((all.ratios.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(all.ratios.windows(2).all(|w| w[0] >= w[1]));
        let top2 = pca_evr(&v, 2).unwrap();
        assert!(top2.ratios.iter().sum::<f64>() <= 1.0);
        assert_relative_eq!(top2.ratios[0], all.ratios[0], epsilon = 1e-9);
    }

    #[test]
    fn pca_argument_errors() {
        assert!(matches!(pca_evr(&[vec![1.0, 2.0]], 1), Err(EvalError::TooFew { .. })));
        let v = vec![vec![1.0, 2.0], vec![2.0, 1.0], vec![0.0, 0.0]];
        assert!(matches!(pca_evr(&v, 3), Err(EvalError::InvalidArgument(_))));
        let same = vec![vec![1.0, 1.0]; 4];
        assert!(matches!(pca_evr(&same, 1), Err(EvalError::ZeroVariance(_))));
    }

    #[test]
    fn difference_sample_cases() {
        let v = vec![vec![1.0, 2.0]];
        let d = difference_sample(&v, &v, 5, 1).unwrap();
        assert!(d.iter().all(|x| x.iter().all(|&c| c == 0.0)));
        assert!(difference_sample(&v, &v, 0, 1).unwrap().is_empty());
        let a: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let b: Vec<Vec<f64>> = (0..7).map(|i| vec![-(i as f64)]).collect();
        assert_eq!(difference_sample(&a, &b, 30, 4).unwrap(), difference_sample(&a, &b, 30, 4).unwrap());
        assert!(matches!(difference_sample(&a, &[], 3, 0), Err(EvalError::Empty)));
    }

    #[test]
    fn csv_outputs() {
        let curve = DilutionCurve {
            points: vec![DilutionPoint { k: 0, tepc_accuracy: 1.0, two_step_accuracy: 0.5 }],
            corpus_id: "x".into(),
            seed: 1,
        };
        let mut buf = Vec::new();
        curve.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "k,tepc_accuracy,two_step_accuracy\n0,1,0.5\n");
        let evr = EvrReport { ratios: vec![0.75, 0.25], sample_count: 3, contrast: None };
        let mut buf = Vec::new();
        evr.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "component,ratio\n1,0.75\n2,0.25\n");
    }
}
