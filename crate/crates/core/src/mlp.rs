//! Small feed-forward binary classifiers (ReLU hidden layers, sigmoid
//! output) trained with RMSprop on binary cross-entropy, with exact-gradient
//! backpropagation.
//!
//! Everything is double precision and deterministic under seeding. Batch
//! gradient reductions use compensated summation, so gradients depend on the
//! batch as a multiset, not on row order.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Probabilities are clipped to `[CLIP, 1 − CLIP]` before the loss.
pub const PROB_CLIP: f64 = 1e-7;

/// Decision threshold; `≥` wins at the boundary.
pub const DECISION_THRESHOLD: f64 = 0.5;

/// The three benchmark architectures. Hidden widths are fixed; the output
/// layer always has width 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MlpArchitecture {
    #[serde(rename = "MLP-1")]
    Mlp1,
    #[serde(rename = "MLP-2")]
    Mlp2,
    #[serde(rename = "MLP-3")]
    Mlp3,
}

impl MlpArchitecture {
    pub const ALL: [MlpArchitecture; 3] =
        [MlpArchitecture::Mlp1, MlpArchitecture::Mlp2, MlpArchitecture::Mlp3];

    pub fn hidden_layers(&self) -> &'static [usize] {
        match self {
            MlpArchitecture::Mlp1 => &[64],
            MlpArchitecture::Mlp2 => &[32, 8],
            MlpArchitecture::Mlp3 => &[64, 32, 4],
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MlpArchitecture::Mlp1 => "MLP-1",
            MlpArchitecture::Mlp2 => "MLP-2",
            MlpArchitecture::Mlp3 => "MLP-3",
        }
    }
}

impl std::fmt::Display for MlpArchitecture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Training hyperparameters. The defaults are fixed and recorded in every
/// report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub rmsprop_decay: f64,
    pub rmsprop_epsilon: f64,
    pub shuffle_each_epoch: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batch_size: 32,
            learning_rate: 1e-3,
            rmsprop_decay: 0.9,
            rmsprop_epsilon: 1e-7,
            shuffle_each_epoch: true,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::InvalidTrainConfig("epochs must be ≥ 1".to_string()));
        }
        if self.batch_size < 1 {
            return Err(Error::InvalidTrainConfig("batch size must be ≥ 1".to_string()));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::InvalidTrainConfig(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.rmsprop_decay > 0.0 && self.rmsprop_decay < 1.0) {
            return Err(Error::InvalidTrainConfig(format!(
                "rmsprop decay must lie in (0,1), got {}",
                self.rmsprop_decay
            )));
        }
        if !self.rmsprop_epsilon.is_finite() || self.rmsprop_epsilon <= 0.0 {
            return Err(Error::InvalidTrainConfig(
                "rmsprop epsilon must be positive".to_string(),
            ));
        }
        Ok(())
    }
}

/// Layer weights/biases plus the architecture descriptor. Weight matrices
/// are `(fan_in × fan_out)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    weights: Vec<Array2<f64>>,
    biases: Vec<Array1<f64>>,
    architecture: MlpArchitecture,
}

/// Per-layer gradients, same shapes as the model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

/// RMSprop squared-gradient accumulators, zero-initialized.
#[derive(Debug, Clone)]
pub struct RmspropState {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl RmspropState {
    pub fn zeros_like(model: &MlpModel) -> Self {
        RmspropState {
            weights: model.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            biases: model.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
        }
    }
}

/// Glorot-uniform initialization with zero biases, deterministic given the
/// random state. Weights are drawn row-major, layer by layer.
pub fn init<R: Rng + ?Sized>(
    architecture: MlpArchitecture,
    input_dim: usize,
    rng: &mut R,
) -> MlpModel {
    assert!(input_dim >= 1, "input dimension must be ≥ 1");
    let widths = layer_widths(architecture, input_dim);
    let mut weights = Vec::with_capacity(widths.len() - 1);
    let mut biases = Vec::with_capacity(widths.len() - 1);
    for pair in widths.windows(2) {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let mut w = Array2::zeros((fan_in, fan_out));
        for i in 0..fan_in {
            for j in 0..fan_out {
                w[[i, j]] = rng.gen_range(-limit..limit);
            }
        }
        weights.push(w);
        biases.push(Array1::zeros(fan_out));
    }
    MlpModel {
        weights,
        biases,
        architecture,
    }
}

fn layer_widths(architecture: MlpArchitecture, input_dim: usize) -> Vec<usize> {
    let mut widths = vec![input_dim];
    widths.extend_from_slice(architecture.hidden_layers());
    widths.push(1);
    widths
}

impl MlpModel {
    /// Builds a model from explicit parameters, validating that the shapes
    /// chain from some input dimension through the architecture's hidden
    /// widths to a single output.
    pub fn from_parts(
        architecture: MlpArchitecture,
        weights: Vec<Array2<f64>>,
        biases: Vec<Array1<f64>>,
    ) -> Result<Self> {
        let n_layers = architecture.hidden_layers().len() + 1;
        if weights.len() != n_layers || biases.len() != n_layers {
            return Err(Error::ModelFormat(format!(
                "expected {n_layers} layers, got {} weight and {} bias arrays",
                weights.len(),
                biases.len()
            )));
        }
        let widths = layer_widths(architecture, weights[0].nrows());
        for (l, pair) in widths.windows(2).enumerate() {
            if weights[l].dim() != (pair[0], pair[1]) || biases[l].len() != pair[1] {
                return Err(Error::ModelFormat(format!(
                    "layer {l} has shape {:?}, expected ({}, {})",
                    weights[l].dim(),
                    pair[0],
                    pair[1]
                )));
            }
        }
        Ok(MlpModel {
            weights,
            biases,
            architecture,
        })
    }

    pub fn architecture(&self) -> MlpArchitecture {
        self.architecture
    }

    pub fn input_dim(&self) -> usize {
        self.weights[0].nrows()
    }

    pub fn weights(&self) -> &[Array2<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Array1<f64>] {
        &self.biases
    }

    /// All parameters as one flat vector: per layer, the weight matrix in
    /// row-major order followed by the bias vector.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        out
    }

    pub fn set_flat_params(&mut self, params: &[f64]) -> Result<()> {
        let expected: usize = self
            .weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| w.len() + b.len())
            .sum();
        if params.len() != expected {
            return Err(Error::DimensionMismatch {
                what: "flat parameter vector",
                expected,
                actual: params.len(),
            });
        }
        let mut it = params.iter();
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            for v in w.iter_mut() {
                *v = *it.next().unwrap();
            }
            for v in b.iter_mut() {
                *v = *it.next().unwrap();
            }
        }
        Ok(())
    }

    /// Batch forward pass. Hidden layers apply `max(0, ·)`, the output layer
    /// the logistic sigmoid; outputs are clipped to `[PROB_CLIP, 1 − PROB_CLIP]`.
    pub fn forward(&self, x: &ArrayView2<f64>) -> Result<Array1<f64>> {
        let (probs, _) = self.forward_cached(x)?;
        Ok(probs)
    }

    // Returns (clipped probabilities, per-layer caches). Caches hold the
    // input and each hidden layer's pre-activations and activations plus the
    // raw output pre-activations.
    fn forward_cached(&self, x: &ArrayView2<f64>) -> Result<(Array1<f64>, ForwardCache)> {
        if x.ncols() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                what: "forward input",
                expected: self.input_dim(),
                actual: x.ncols(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput {
                what: "forward input",
            });
        }
        let n_hidden = self.weights.len() - 1;
        let mut activations: Vec<Array2<f64>> = vec![x.to_owned()];
        let mut pre_activations: Vec<Array2<f64>> = Vec::with_capacity(n_hidden);
        for l in 0..n_hidden {
            let z = activations[l].dot(&self.weights[l]) + &self.biases[l];
            let a = z.mapv(|v| v.max(0.0));
            pre_activations.push(z);
            activations.push(a);
        }
        let z_out = activations[n_hidden].dot(&self.weights[n_hidden]) + &self.biases[n_hidden];
        let raw: Array1<f64> = z_out.column(0).mapv(sigmoid);
        let probs = raw.mapv(|p| p.clamp(PROB_CLIP, 1.0 - PROB_CLIP));
        Ok((
            probs,
            ForwardCache {
                activations,
                pre_activations,
                raw_output: raw,
            },
        ))
    }

    /// Exact analytic gradients of the mean clipped-BCE loss over the batch.
    /// The ReLU subgradient at 0 is 0; samples whose raw output falls in the
    /// clipped region contribute zero output gradient.
    pub fn backward(&self, x: &ArrayView2<f64>, labels: &[u8]) -> Result<Gradients> {
        if labels.len() != x.nrows() {
            return Err(Error::LengthMismatch {
                left: x.nrows(),
                right: labels.len(),
            });
        }
        if x.nrows() == 0 {
            return Err(Error::EmptyInput {
                what: "backward batch",
            });
        }
        let (_, cache) = self.forward_cached(x)?;
        Ok(self.backward_from_cache(&cache, labels))
    }

    fn backward_from_cache(&self, cache: &ForwardCache, labels: &[u8]) -> Gradients {
        let batch = cache.raw_output.len();
        let n_layers = self.weights.len();
        let inv_batch = 1.0 / batch as f64;

        // d(mean BCE)/dz at the output; zero where the clip is active.
        let mut delta = Array2::zeros((batch, 1));
        for (b, &raw) in cache.raw_output.iter().enumerate() {
            let clipped = !(PROB_CLIP..=1.0 - PROB_CLIP).contains(&raw);
            delta[[b, 0]] = if clipped {
                0.0
            } else {
                (raw - labels[b] as f64) * inv_batch
            };
        }

        let mut grad_weights: Vec<Array2<f64>> = Vec::with_capacity(n_layers);
        let mut grad_biases: Vec<Array1<f64>> = Vec::with_capacity(n_layers);
        for l in (0..n_layers).rev() {
            let (dw, db) = reduce_batch(&cache.activations[l].view(), &delta.view());
            grad_weights.push(dw);
            grad_biases.push(db);
            if l > 0 {
                let mut propagated = delta.dot(&self.weights[l].t());
                propagated.zip_mut_with(&cache.pre_activations[l - 1], |d, &z| {
                    if z <= 0.0 {
                        *d = 0.0;
                    }
                });
                delta = propagated;
            }
        }
        grad_weights.reverse();
        grad_biases.reverse();
        Gradients {
            weights: grad_weights,
            biases: grad_biases,
        }
    }
}

struct ForwardCache {
    activations: Vec<Array2<f64>>,
    pre_activations: Vec<Array2<f64>>,
    raw_output: Array1<f64>,
}

// Compensated (Neumaier) accumulator. Batch reductions built on it round to
// the true sum, which makes gradients a function of the batch multiset
// rather than of row order.
#[derive(Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    err: f64,
}

impl Compensated {
    #[inline]
    fn add(&mut self, x: f64) {
        let s = self.sum + x;
        let bv = s - self.sum;
        let av = s - bv;
        self.err += (self.sum - av) + (x - bv);
        self.sum = s;
    }

    #[inline]
    fn value(self) -> f64 {
        self.sum + self.err
    }
}

// dW[i][j] = Σ_b a[b][i]·δ[b][j], db[j] = Σ_b δ[b][j].
fn reduce_batch(a: &ArrayView2<f64>, delta: &ArrayView2<f64>) -> (Array2<f64>, Array1<f64>) {
    let (fan_in, fan_out) = (a.ncols(), delta.ncols());
    let mut dw = vec![Compensated::default(); fan_in * fan_out];
    let mut db = vec![Compensated::default(); fan_out];
    for (a_row, d_row) in a.rows().into_iter().zip(delta.rows()) {
        for (j, &d) in d_row.iter().enumerate() {
            db[j].add(d);
            if d == 0.0 {
                continue;
            }
            for (i, &av) in a_row.iter().enumerate() {
                dw[i * fan_out + j].add(av * d);
            }
        }
    }
    let dw = Array2::from_shape_vec(
        (fan_in, fan_out),
        dw.into_iter().map(Compensated::value).collect(),
    )
    .expect("shape matches buffer");
    let db = Array1::from_vec(db.into_iter().map(Compensated::value).collect());
    (dw, db)
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Mean binary cross-entropy with probabilities clipped to
/// `[PROB_CLIP, 1 − PROB_CLIP]`.
pub fn bce_loss(probabilities: &[f64], labels: &[u8]) -> f64 {
    assert_eq!(probabilities.len(), labels.len());
    assert!(!probabilities.is_empty());
    let total: f64 = probabilities
        .iter()
        .zip(labels)
        .map(|(&p, &y)| {
            let p = p.clamp(PROB_CLIP, 1.0 - PROB_CLIP);
            if y == 1 {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum();
    total / probabilities.len() as f64
}

/// One RMSprop update: `acc ← ρ·acc + (1−ρ)·g²`, then
/// `θ ← θ − lr·g/(√acc + ε)` using the updated accumulator.
pub fn rmsprop_step(
    model: &mut MlpModel,
    grads: &Gradients,
    state: &mut RmspropState,
    config: &TrainConfig,
) {
    let rho = config.rmsprop_decay;
    let lr = config.learning_rate;
    let eps = config.rmsprop_epsilon;
    for l in 0..model.weights.len() {
        ndarray::azip!((acc in &mut state.weights[l], &g in &grads.weights[l]) {
            *acc = rho * *acc + (1.0 - rho) * g * g;
        });
        ndarray::azip!((w in &mut model.weights[l], &acc in &state.weights[l], &g in &grads.weights[l]) {
            *w -= lr * g / (acc.sqrt() + eps);
        });
        ndarray::azip!((acc in &mut state.biases[l], &g in &grads.biases[l]) {
            *acc = rho * *acc + (1.0 - rho) * g * g;
        });
        ndarray::azip!((b in &mut model.biases[l], &acc in &state.biases[l], &g in &grads.biases[l]) {
            *b -= lr * g / (acc.sqrt() + eps);
        });
    }
}

/// Mini-batch RMSprop training: seeded shuffle each epoch, then
/// forward/backward/step per batch. Deterministic given `config.seed`.
pub fn train(
    architecture: MlpArchitecture,
    train_data: &Dataset,
    config: &TrainConfig,
) -> Result<MlpModel> {
    train_with_history(architecture, train_data, config).map(|(model, _)| model)
}

/// Like [`train`], additionally returning the per-epoch mean loss.
pub fn train_with_history(
    architecture: MlpArchitecture,
    train_data: &Dataset,
    config: &TrainConfig,
) -> Result<(MlpModel, Vec<f64>)> {
    config.validate()?;
    if !train_data.has_both_classes() {
        return Err(Error::SingleClass {
            name: train_data.name.clone(),
        });
    }
    let n = train_data.n_samples();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = init(architecture, train_data.n_features(), &mut rng);
    let mut state = RmspropState::zeros_like(&model);
    let mut indices: Vec<usize> = (0..n).collect();
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        if config.shuffle_each_epoch {
            indices.shuffle(&mut rng);
        }
        let mut epoch_loss = 0.0;
        for (batch_idx, chunk) in indices.chunks(config.batch_size).enumerate() {
            let x = train_data.features.select(Axis(0), chunk);
            let y: Vec<u8> = chunk.iter().map(|&i| train_data.labels[i]).collect();
            let (probs, cache) = model.forward_cached(&x.view())?;
            let loss = bce_loss(probs.as_slice().unwrap(), &y);
            if !loss.is_finite() {
                return Err(Error::TrainingDiverged {
                    epoch: epoch + 1,
                    batch: batch_idx + 1,
                });
            }
            let grads = model.backward_from_cache(&cache, &y);
            rmsprop_step(&mut model, &grads, &mut state, config);
            epoch_loss += loss * chunk.len() as f64;
        }
        history.push(epoch_loss / n as f64);
    }
    Ok((model, history))
}

/// Thresholded class prediction: 1 iff the probability is ≥ `threshold`.
pub fn predict_class(
    model: &MlpModel,
    x: &ArrayView2<f64>,
    threshold: f64,
) -> Result<Vec<u8>> {
    let probs = model.forward(x)?;
    Ok(probs.iter().map(|&p| u8::from(p >= threshold)).collect())
}

// ---------------------------------------------------------------------------
// Serialized model format: schema version, architecture descriptor, input
// dimension, then per-layer flat parameter arrays in row-major order.

#[derive(Serialize, Deserialize)]
struct ModelFile {
    schema_version: u32,
    architecture: MlpArchitecture,
    input_dim: usize,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

const MODEL_SCHEMA_VERSION: u32 = 1;

impl MlpModel {
    pub fn to_json(&self) -> String {
        let file = ModelFile {
            schema_version: MODEL_SCHEMA_VERSION,
            architecture: self.architecture,
            input_dim: self.input_dim(),
            weights: self
                .weights
                .iter()
                .map(|w| w.iter().copied().collect())
                .collect(),
            biases: self.biases.iter().map(|b| b.to_vec()).collect(),
        };
        serde_json::to_string_pretty(&file).expect("model serialization is infallible")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(json)
            .map_err(|e| Error::ModelFormat(e.to_string()))?;
        if file.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported schema version {}",
                file.schema_version
            )));
        }
        let widths = layer_widths(file.architecture, file.input_dim);
        if file.weights.len() != widths.len() - 1 || file.biases.len() != widths.len() - 1 {
            return Err(Error::ModelFormat("layer count mismatch".to_string()));
        }
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for (l, pair) in widths.windows(2).enumerate() {
            let w = Array2::from_shape_vec((pair[0], pair[1]), file.weights[l].clone())
                .map_err(|_| {
                    Error::ModelFormat(format!(
                        "layer {l}: expected {} weights",
                        pair[0] * pair[1]
                    ))
                })?;
            if file.biases[l].len() != pair[1] {
                return Err(Error::ModelFormat(format!(
                    "layer {l}: expected {} biases",
                    pair[1]
                )));
            }
            weights.push(w);
            biases.push(Array1::from_vec(file.biases[l].clone()));
        }
        MlpModel::from_parts(file.architecture, weights, biases)
    }
}
