//! Feedforward binary classifier: rectifier hidden layers, a sigmoid head,
//! log-loss and single-example stochastic gradient descent.
//!
//! The same stack backs both the polarity classifier (positive class = Right)
//! and the neutral detector (positive class = Neutral).

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embed::Pooling;

/// Probabilities are kept inside `[EPS, 1 - EPS]` before taking logarithms.
pub const EPS: f64 = 1e-12;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum NnetError {
    #[error("input has {found} components, model expects {expected}")]
    DimMismatch { expected: usize, found: usize },
    #[error("input contains a non-finite component")]
    NonFiniteInput,
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("dataset is empty")]
    EmptyData,
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("non-finite loss at epoch {epoch}, step {step} (learning rate {learning_rate})")]
    Diverged { epoch: usize, step: usize, learning_rate: f64 },
    #[error("cannot access model file {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("model file is not valid: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported model format version {found} (expected {FORMAT_VERSION})")]
    VersionMismatch { found: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Rectifier,
    Identity,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Rectifier => z.max(0.0),
            Activation::Identity => z,
        }
    }

    /// Rectifier subgradient at 0 is 0.
    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Rectifier => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }
}

/// One affine layer: `weights` is `fan_out` rows of `fan_in` columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    pub activation: Activation,
}

impl LayerParams {
    pub fn zeros(fan_in: usize, fan_out: usize, activation: Activation) -> Self {
        Self {
            weights: vec![vec![0.0; fan_in]; fan_out],
            biases: vec![0.0; fan_out],
            activation,
        }
    }

    pub fn fan_out(&self) -> usize {
        self.weights.len()
    }

    pub fn fan_in(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    fn validate(&self, what: &str) -> Result<(), NnetError> {
        let fan_in = self.fan_in();
        if self.fan_out() == 0 || fan_in == 0 {
            return Err(NnetError::InvalidModel(format!("{what} has an empty weight matrix")));
        }
        if self.weights.iter().any(|r| r.len() != fan_in) {
            return Err(NnetError::InvalidModel(format!("{what} has ragged weight rows")));
        }
        if self.biases.len() != self.fan_out() {
            return Err(NnetError::InvalidModel(format!(
                "{what} has {} biases for {} rows",
                self.biases.len(),
                self.fan_out()
            )));
        }
        let finite = self.weights.iter().flatten().chain(&self.biases).all(|x| x.is_finite());
        if !finite {
            return Err(NnetError::InvalidModel(format!("{what} has non-finite parameters")));
        }
        Ok(())
    }

    fn affine(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(row, b)| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b)
            .collect()
    }

    fn param_count(&self) -> usize {
        self.fan_out() * (self.fan_in() + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    input_dim: usize,
    layers: Vec<LayerParams>,
    head: LayerParams,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub probability: f64,
    pub label: bool,
}

impl Prediction {
    pub fn from_probability(probability: f64) -> Self {
        let probability = probability.clamp(EPS, 1.0 - EPS);
        Self {
            probability,
            label: probability > 0.5,
        }
    }
}

/// Numerically stable logistic function.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `-(y ln p + (1 - y) ln(1 - p))` with `p` clamped to `[EPS, 1 - EPS]`.
pub fn log_loss(probability: f64, y: bool) -> f64 {
    let p = probability.clamp(EPS, 1.0 - EPS);
    if y {
        -p.ln()
    } else {
        -(1.0 - p).ln()
    }
}

/// Parameter-shaped gradient: same layout as the model it was taken from.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub layers: Vec<LayerParams>,
    pub head: LayerParams,
}

impl Gradient {
    /// Components in the order of [`MlpModel::flat_params`].
    pub fn flatten(&self) -> Vec<f64> {
        flatten_layers(self.layers.iter().chain(std::iter::once(&self.head)))
    }
}

fn flatten_layers<'a>(layers: impl Iterator<Item = &'a LayerParams>) -> Vec<f64> {
    let mut out = Vec::new();
    for l in layers {
        for row in &l.weights {
            out.extend_from_slice(row);
        }
        out.extend_from_slice(&l.biases);
    }
    out
}

impl MlpModel {
    /// Checks the dimension chain and that the head has a single output.
    pub fn new(
        input_dim: usize,
        layers: Vec<LayerParams>,
        head: LayerParams,
    ) -> Result<Self, NnetError> {
        if input_dim == 0 {
            return Err(NnetError::InvalidModel("input_dim must be positive".into()));
        }
        let mut prev = input_dim;
        for (i, l) in layers.iter().enumerate() {
            l.validate(&format!("layer {i}"))?;
            if l.fan_in() != prev {
                return Err(NnetError::InvalidModel(format!(
                    "layer {i} expects {} inputs but receives {prev}",
                    l.fan_in()
                )));
            }
            prev = l.fan_out();
        }
        head.validate("head")?;
        if head.fan_in() != prev {
            return Err(NnetError::InvalidModel(format!(
                "head expects {} inputs but receives {prev}",
                head.fan_in()
            )));
        }
        if head.fan_out() != 1 {
            return Err(NnetError::InvalidModel(format!(
                "head must have one output, has {}",
                head.fan_out()
            )));
        }
        if head.activation != Activation::Identity {
            return Err(NnetError::InvalidModel("head activation must be identity".into()));
        }
        Ok(Self {
            input_dim,
            layers,
            head,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn layers(&self) -> &[LayerParams] {
        &self.layers
    }

    pub fn head(&self) -> &LayerParams {
        &self.head
    }

    pub fn hidden_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(LayerParams::fan_out).collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(LayerParams::param_count).sum::<usize>() + self.head.param_count()
    }

    pub fn flat_params(&self) -> Vec<f64> {
        flatten_layers(self.layers.iter().chain(std::iter::once(&self.head)))
    }

    /// Inverse of [`flat_params`](Self::flat_params).
    pub fn set_flat_params(&mut self, params: &[f64]) -> Result<(), NnetError> {
        if params.len() != self.param_count() {
            return Err(NnetError::InvalidModel(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                params.len()
            )));
        }
        let mut it = params.iter().copied();
        for l in self.layers.iter_mut().chain(std::iter::once(&mut self.head)) {
            for w in l.weights.iter_mut().flatten() {
                *w = it.next().expect("length checked");
            }
            for b in &mut l.biases {
                *b = it.next().expect("length checked");
            }
        }
        Ok(())
    }

    fn check_input(&self, x: &[f64]) -> Result<(), NnetError> {
        if x.len() != self.input_dim {
            return Err(NnetError::DimMismatch {
                expected: self.input_dim,
                found: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(NnetError::NonFiniteInput);
        }
        Ok(())
    }

    /// Pre-activations and activations of every hidden layer, plus the head logit.
    fn trace(&self, x: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, f64) {
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut act = Vec::with_capacity(self.layers.len() + 1);
        act.push(x.to_vec());
        for l in &self.layers {
            let z = l.affine(act.last().expect("nonempty"));
            act.push(z.iter().map(|&v| l.activation.apply(v)).collect());
            pre.push(z);
        }
        let logit = self.head.affine(act.last().expect("nonempty"))[0];
        (pre, act, logit)
    }

    pub fn logit(&self, x: &[f64]) -> Result<f64, NnetError> {
        self.check_input(x)?;
        Ok(self.trace(x).2)
    }

    pub fn forward(&self, x: &[f64]) -> Result<Prediction, NnetError> {
        Ok(Prediction::from_probability(sigmoid(self.logit(x)?)))
    }

    /// Analytic gradient of `log_loss(forward(x), y)` by backpropagation.
    pub fn gradient(&self, x: &[f64], y: bool) -> Result<Gradient, NnetError> {
        self.check_input(x)?;
        Ok(self.backprop(x, y).0)
    }

    fn backprop(&self, x: &[f64], y: bool) -> (Gradient, f64) {
        let (pre, act, logit) = self.trace(x);
        let p = sigmoid(logit);
        let loss = log_loss(p, y);
        let dlogit = p - if y { 1.0 } else { 0.0 };

        let last = act.last().expect("nonempty");
        let head = LayerParams {
            weights: vec![last.iter().map(|a| dlogit * a).collect()],
            biases: vec![dlogit],
            activation: self.head.activation,
        };
        let mut delta: Vec<f64> = self.head.weights[0].iter().map(|w| dlogit * w).collect();
        let mut grads = Vec::with_capacity(self.layers.len());
        for (t, layer) in self.layers.iter().enumerate().rev() {
            let dz: Vec<f64> = delta
                .iter()
                .zip(&pre[t])
                .map(|(d, &z)| d * layer.activation.derivative(z))
                .collect();
            let input = &act[t];
            grads.push(LayerParams {
                weights: dz.iter().map(|d| input.iter().map(|a| d * a).collect()).collect(),
                biases: dz.clone(),
                activation: layer.activation,
            });
            delta = (0..layer.fan_in())
                .map(|j| layer.weights.iter().zip(&dz).map(|(row, d)| row[j] * d).sum())
                .collect();
        }
        grads.reverse();
        (Gradient { layers: grads, head }, loss)
    }

    fn apply_update(&mut self, grad: &Gradient, learning_rate: f64, l2: f64) {
        let pairs = self
            .layers
            .iter_mut()
            .chain(std::iter::once(&mut self.head))
            .zip(grad.layers.iter().chain(std::iter::once(&grad.head)));
        for (l, g) in pairs {
            for (row, grow) in l.weights.iter_mut().zip(&g.weights) {
                for (w, gw) in row.iter_mut().zip(grow) {
                    *w -= learning_rate * (gw + l2 * *w);
                }
            }
            for (b, gb) in l.biases.iter_mut().zip(&g.biases) {
                *b -= learning_rate * (gb + l2 * *b);
            }
        }
    }
}

/// Sum of per-example log-loss over exactly the given examples.
pub fn dataset_loss(model: &MlpModel, data: &[(Vec<f64>, bool)]) -> Result<f64, NnetError> {
    if data.is_empty() {
        return Err(NnetError::EmptyData);
    }
    data.iter().try_fold(0.0, |acc, (x, y)| {
        Ok(acc + log_loss(model.forward(x)?.probability, *y))
    })
}

/// Glorot-uniform weights, zero biases.
pub fn init_model(input_dim: usize, hidden_sizes: &[usize], seed: u64) -> Result<MlpModel, NnetError> {
    if input_dim == 0 || hidden_sizes.contains(&0) {
        return Err(NnetError::InvalidModel("layer sizes must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut glorot = |fan_in: usize, fan_out: usize, activation| {
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        LayerParams {
            weights: (0..fan_out)
                .map(|_| (0..fan_in).map(|_| rng.random_range(-limit..=limit)).collect())
                .collect(),
            biases: vec![0.0; fan_out],
            activation,
        }
    };
    let mut prev = input_dim;
    let mut layers = Vec::with_capacity(hidden_sizes.len());
    for &h in hidden_sizes {
        layers.push(glorot(prev, h, Activation::Rectifier));
        prev = h;
    }
    let head = glorot(prev, 1, Activation::Identity);
    MlpModel::new(input_dim, layers, head)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub l2: f64,
    pub hidden_sizes: Vec<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            epochs: 20,
            seed: 42,
            l2: 1e-4,
            hidden_sizes: vec![64, 32],
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), NnetError> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(NnetError::InvalidConfig("learning_rate must be positive".into()));
        }
        if self.epochs == 0 {
            return Err(NnetError::InvalidConfig("epochs must be at least 1".into()));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(NnetError::InvalidConfig("l2 must be nonnegative".into()));
        }
        if self.hidden_sizes.contains(&0) {
            return Err(NnetError::InvalidConfig("hidden sizes must be positive".into()));
        }
        Ok(())
    }
}

/// `epochs × |data|` single-example updates `θ ← θ − η(∇ℓ + l2·θ)`, each epoch
/// visiting a fresh seeded permutation of the data.
pub fn train_sgd(
    init: &MlpModel,
    data: &[(Vec<f64>, bool)],
    cfg: &TrainConfig,
) -> Result<MlpModel, NnetError> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(NnetError::EmptyData);
    }
    for (x, _) in data {
        init.check_input(x)?;
    }
    let mut model = init.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for (step, &i) in order.iter().enumerate() {
            let (x, y) = &data[i];
            let (grad, loss) = model.backprop(x, *y);
            if !loss.is_finite() {
                return Err(NnetError::Diverged {
                    epoch,
                    step,
                    learning_rate: cfg.learning_rate,
                });
            }
            model.apply_update(&grad, cfg.learning_rate, cfg.l2);
        }
        log::debug!("epoch {epoch}: done");
    }
    Ok(model)
}

/// Fraction of examples whose predicted label matches.
pub fn model_accuracy(model: &MlpModel, data: &[(Vec<f64>, bool)]) -> Result<f64, NnetError> {
    if data.is_empty() {
        return Err(NnetError::EmptyData);
    }
    let mut hits = 0usize;
    for (x, y) in data {
        if model.forward(x)?.label == *y {
            hits += 1;
        }
    }
    Ok(hits as f64 / data.len() as f64)
}

/// Two isotropic Gaussian blobs centred at ±(2, 2) with σ = 0.5; the positive
/// class sits at +(2, 2). Classes alternate so any prefix is balanced.
pub fn two_blobs(n: usize, seed: u64) -> Vec<(Vec<f64>, bool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.5).expect("valid sigma");
    (0..n)
        .map(|i| {
            let y = i % 2 == 0;
            let c = if y { 2.0 } else { -2.0 };
            (vec![c + noise.sample(&mut rng), c + noise.sample(&mut rng)], y)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub embedding_dim: usize,
    pub pooling_mode: Pooling,
    pub trained_on: String,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    input_dim: usize,
    layers: Vec<LayerParams>,
    head: LayerParams,
    #[serde(default)]
    metadata: ModelMetadata,
}

pub fn model_to_json(model: &MlpModel, metadata: &ModelMetadata) -> String {
    let file = ModelFile {
        format_version: FORMAT_VERSION,
        input_dim: model.input_dim,
        layers: model.layers.clone(),
        head: model.head.clone(),
        metadata: metadata.clone(),
    };
    serde_json::to_string_pretty(&file).expect("model serializes")
}

pub fn model_from_json(s: &str) -> Result<(MlpModel, ModelMetadata), NnetError> {
    let version: serde_json::Value = serde_json::from_str(s)?;
    match version.get("format_version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(FORMAT_VERSION) => {}
        Some(v) => return Err(NnetError::VersionMismatch { found: v as u32 }),
        None => return Err(NnetError::InvalidModel("missing format_version".into())),
    }
    let file: ModelFile = serde_json::from_value(version)?;
    let model = MlpModel::new(file.input_dim, file.layers, file.head)?;
    Ok((model, file.metadata))
}

pub fn save_model(
    path: impl AsRef<Path>,
    model: &MlpModel,
    metadata: &ModelMetadata,
) -> Result<(), NnetError> {
    let path = path.as_ref();
    let json = model_to_json(model, metadata);
    crate::io::write_atomic(path, |w| w.write_all(json.as_bytes())).map_err(|source| NnetError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<(MlpModel, ModelMetadata), NnetError> {
    let path = path.as_ref();
    let s = fs::read_to_string(path).map_err(|source| NnetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    model_from_json(&s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn logistic(w: f64, b: f64) -> MlpModel {
        MlpModel::new(
            1,
            vec![],
            LayerParams {
                weights: vec![vec![w]],
                biases: vec![b],
                activation: Activation::Identity,
            },
        )
        .unwrap()
    }

    #[test]
    fn zero_head_gives_half() {
        let m = MlpModel::new(3, vec![], LayerParams::zeros(3, 1, Activation::Identity)).unwrap();
        let p = m.forward(&[5.0, -2.0, 1.0]).unwrap();
        assert_eq!(p.probability, 0.5);
        assert!(!p.label, "ties go to label 0");
    }

    #[test]
    fn sigmoid_limits() {
        let m = logistic(1.0, 0.0);
        assert_eq!(m.forward(&[0.0]).unwrap().probability, 0.5);
        let hi = m.forward(&[1e6]).unwrap();
        assert!(hi.probability > 0.999 && hi.probability < 1.0 && hi.label);
        let lo = m.forward(&[-1e6]).unwrap();
        assert!(lo.probability > 0.0 && lo.probability < 1e-3);
        assert_eq!(sigmoid(-800.0), 0.0);
        assert!(sigmoid(-30.0) > 0.0);
    }

    #[test]
    fn dead_rectifiers_leave_head_bias() {
        let hidden = LayerParams {
            weights: vec![vec![-1.0, -2.0], vec![-0.5, -3.0]],
            biases: vec![-1.0, -1.0],
            activation: Activation::Rectifier,
        };
        let head = LayerParams {
            weights: vec![vec![4.0, -7.0]],
            biases: vec![0.3],
            activation: Activation::Identity,
        };
        let m = MlpModel::new(2, vec![hidden], head).unwrap();
        assert_eq!(m.forward(&[1.0, 2.0]).unwrap().probability, sigmoid(0.3));
    }

    #[test]
    fn forward_rejects_bad_input() {
        let m = logistic(1.0, 0.0);
        assert!(matches!(m.forward(&[1.0, 2.0]), Err(NnetError::DimMismatch { expected: 1, found: 2 })));
        assert!(matches!(m.forward(&[f64::NAN]), Err(NnetError::NonFiniteInput)));
    }

    #[test]
    fn log_loss_values() {
        assert_relative_eq!(log_loss(0.5, true), std::f64::consts::LN_2, epsilon = 1e-15);
        assert!(log_loss(1.0 - 1e-15, true) < 1e-11);
        // -ln(0.1) = ln(10)
        assert_relative_eq!(log_loss(0.9, false), std::f64::consts::LN_10, epsilon = 1e-12);
        assert!(log_loss(0.0, true).is_finite());
    }

    #[test]
    fn dataset_loss_sums() {
        let m = logistic(0.7, -0.2);
        let one = vec![(vec![1.5], true)];
        let p = m.forward(&[1.5]).unwrap().probability;
        assert_eq!(dataset_loss(&m, &one).unwrap(), log_loss(p, true));
        let two = vec![(vec![1.5], true), (vec![1.5], true)];
        assert_eq!(dataset_loss(&m, &two).unwrap(), 2.0 * log_loss(p, true));
        assert!(matches!(dataset_loss(&m, &[]), Err(NnetError::EmptyData)));
        let confident = logistic(100.0, 0.0);
        let data = vec![(vec![1.0], true), (vec![-1.0], false)];
        assert!(dataset_loss(&confident, &data).unwrap() < 1e-6);
    }

    #[test]
    fn logistic_bias_gradient_is_p_minus_y() {
        let m = logistic(0.4, 0.1);
        let x = [2.0];
        let p = sigmoid(0.4 * 2.0 + 0.1);
        let g = m.gradient(&x, true).unwrap();
        assert_relative_eq!(g.head.biases[0], p - 1.0, epsilon = 1e-15);
        assert_relative_eq!(g.head.weights[0][0], (p - 1.0) * 2.0, epsilon = 1e-15);
    }

    #[test]
    fn gradient_vanishes_at_perfect_fit() {
        let m = logistic(50.0, 0.0);
        let g = m.gradient(&[1.0], true).unwrap();
        assert!(g.flatten().iter().all(|c| c.abs() < 1e-6));
    }

    fn central_difference(m: &MlpModel, x: &[f64], y: bool, h: f64) -> Vec<f64> {
        let base = m.flat_params();
        let mut probe = m.clone();
        (0..base.len())
            .map(|i| {
                let mut p = base.clone();
                p[i] = base[i] + h;
                probe.set_flat_params(&p).unwrap();
                let up = log_loss(sigmoid(probe.logit(x).unwrap()), y);
                p[i] = base[i] - h;
                probe.set_flat_params(&p).unwrap();
                let down = log_loss(sigmoid(probe.logit(x).unwrap()), y);
                (up - down) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn gradient_matches_finite_differences_2_3_1() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for draw in 0..20 {
            let m = init_model(2, &[3], draw).unwrap();
            let x: Vec<f64> = (0..2).map(|_| rng.random_range(-2.0..2.0)).collect();
            let y = draw % 2 == 0;
            let analytic = m.gradient(&x, y).unwrap().flatten();
            let numeric = central_difference(&m, &x, y, 1e-5);
            for (a, n) in analytic.iter().zip(&numeric) {
                let scale = a.abs().max(n.abs());
                if scale > 0.0 {
                    assert!((a - n).abs() / scale < 1e-4, "draw {draw}: {a} vs {n}");
                }
            }
        }
    }

    #[test]
    fn flat_params_round_trip() {
        let mut m = init_model(3, &[4, 2], 1).unwrap();
        let p = m.flat_params();
        assert_eq!(p.len(), m.param_count());
        assert_eq!(m.param_count(), 4 * 4 + 2 * 5 + 3);
        m.set_flat_params(&p).unwrap();
        assert_eq!(m.flat_params(), p);
        assert!(m.set_flat_params(&p[1..]).is_err());
    }

    #[test]
    fn init_rules() {
        let lr = init_model(5, &[], 3).unwrap();
        assert!(lr.layers().is_empty());
        assert_eq!(lr.head().fan_in(), 5);
        let m = init_model(6, &[8, 4], 3).unwrap();
        assert_eq!(m.hidden_sizes(), vec![8, 4]);
        assert!(m.layers().iter().chain([m.head()]).all(|l| l.biases.iter().all(|&b| b == 0.0)));
        let limit = (6.0f64 / 14.0).sqrt();
        assert!(m.layers()[0].weights.iter().flatten().all(|w| w.abs() <= limit));
        assert_eq!(m, init_model(6, &[8, 4], 3).unwrap());
        assert_ne!(m, init_model(6, &[8, 4], 4).unwrap());
        assert!(init_model(0, &[], 1).is_err());
    }

    #[test]
    fn invalid_chain_rejected() {
        let hidden = LayerParams::zeros(2, 3, Activation::Rectifier);
        let head = LayerParams::zeros(4, 1, Activation::Identity);
        assert!(matches!(MlpModel::new(2, vec![hidden], head), Err(NnetError::InvalidModel(_))));
        let wide_head = LayerParams::zeros(2, 2, Activation::Identity);
        assert!(MlpModel::new(2, vec![], wide_head).is_err());
    }

    #[test]
    fn tiny_learning_rate_barely_moves() {
        let init = init_model(2, &[3], 9).unwrap();
        let data = two_blobs(50, 1);
        let cfg = TrainConfig {
            learning_rate: 1e-12,
            epochs: 1,
            hidden_sizes: vec![3],
            ..TrainConfig::default()
        };
        let trained = train_sgd(&init, &data, &cfg).unwrap();
        let drift = init
            .flat_params()
            .iter()
            .zip(trained.flat_params())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(drift < 1e-9, "drift {drift}");
    }

    #[test]
    fn blobs_are_learned_deterministically() {
        let data = two_blobs(1000, 42);
        let cfg = TrainConfig {
            learning_rate: 0.05,
            epochs: 20,
            hidden_sizes: vec![8],
            ..TrainConfig::default()
        };
        let init = init_model(2, &cfg.hidden_sizes, 42).unwrap();
        let a = train_sgd(&init, &data, &cfg).unwrap();
        assert!(model_accuracy(&a, &data).unwrap() >= 0.99);
        let b = train_sgd(&init, &data, &cfg).unwrap();
        assert_eq!(a.flat_params(), b.flat_params());
    }

    #[test]
    fn divergence_is_reported() {
        let init = init_model(1, &[], 0).unwrap();
        let data = vec![(vec![1e308], true), (vec![-1e308], false)];
        let cfg = TrainConfig {
            learning_rate: 1e10,
            epochs: 3,
            hidden_sizes: vec![],
            ..TrainConfig::default()
        };
        match train_sgd(&init, &data, &cfg) {
            Err(NnetError::Diverged { learning_rate, .. }) => assert_eq!(learning_rate, 1e10),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn convex_case_loss_decreases() {
        let data = two_blobs(200, 3);
        let init = init_model(2, &[], 3).unwrap();
        let cfg = TrainConfig {
            learning_rate: 0.01,
            epochs: 200,
            hidden_sizes: vec![],
            l2: 0.0,
            ..TrainConfig::default()
        };
        let trained = train_sgd(&init, &data, &cfg).unwrap();
        assert!(dataset_loss(&trained, &data).unwrap() <= dataset_loss(&init, &data).unwrap());
    }

    #[test]
    fn save_load_round_trip() {
        let m = init_model(4, &[5, 3], 8).unwrap();
        let meta = ModelMetadata {
            embedding_dim: 4,
            pooling_mode: Pooling::Max,
            trained_on: "unit".into(),
            created_at: 1,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        save_model(&path, &m, &meta).unwrap();
        let (back, meta_back) = load_model(&path).unwrap();
        assert_eq!(back, m);
        assert_eq!(meta_back, meta);
    }

    #[test]
    fn corrupt_and_versioned_files() {
        assert!(matches!(model_from_json("{not json"), Err(NnetError::Parse(_))));
        let m = init_model(2, &[], 1).unwrap();
        let json = model_to_json(&m, &ModelMetadata::default()).replace("\"format_version\": 1", "\"format_version\": 9");
        assert!(matches!(model_from_json(&json), Err(NnetError::VersionMismatch { found: 9 })));
        let broken = r#"{"format_version":1,"input_dim":3,"layers":[{"weights":[[1,2]],"biases":[0],"activation":"rectifier"}],
            "head":{"weights":[[1]],"biases":[0],"activation":"identity"}}"#;
        assert!(matches!(model_from_json(broken), Err(NnetError::InvalidModel(_))));
        assert!(matches!(load_model("/nonexistent/model.json"), Err(NnetError::Io { .. })));
    }
}
