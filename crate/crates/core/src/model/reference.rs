use std::fs;
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    Classifier, EmbeddingClassifier, Logits, Matrix, ModelError, TokenId, TokenSequence, Vocab,
};

/// Hidden-layer nonlinearity.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Tanh,
    /// Makes the whole network linear in its embeddings.
    Identity,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the activation value `a = apply(z)`.
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Identity => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDims {
    #[serde(rename = "V")]
    pub vocab: usize,
    pub d: usize,
    pub h: usize,
    #[serde(rename = "C")]
    pub classes: usize,
}

/// Embedding → mean-pool → one hidden layer → linear output.
///
/// `logits = W2 · act(W1 · mean_i E[ids[i]] + b1) + b2`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceModel {
    vocab: Vocab,
    dims: ModelDims,
    #[serde(rename = "E")]
    embedding: Matrix,
    #[serde(rename = "W1")]
    w1: Matrix,
    b1: Vec<f64>,
    #[serde(rename = "W2")]
    w2: Matrix,
    b2: Vec<f64>,
    #[serde(default)]
    activation: Activation,
    seed: u64,
}

/// Full-batch gradient descent on mean cross-entropy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            learning_rate: 0.5,
        }
    }
}

/// Intermediate values of one forward pass.
struct Trace {
    pooled: Vec<f64>,
    hidden: Vec<f64>,
    logits: Vec<f64>,
}

fn uniform(rng: &mut ChaCha8Rng, scale: f64) -> f64 {
    let unit = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    (unit - 0.5) * scale
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Matrix {
    let data = (0..rows * cols).map(|_| uniform(rng, scale)).collect();
    Matrix::from_vec(rows, cols, data).expect("sized buffer")
}

impl ReferenceModel {
    /// Seeded initialization: every weight is uniform(−0.5, 0.5) divided by
    /// the square root of its layer's fan-in (1 for the embedding table).
    /// The `[PAD]` embedding row is zero.
    pub fn new(
        vocab: Vocab,
        d: usize,
        h: usize,
        classes: usize,
        activation: Activation,
        seed: u64,
    ) -> Result<Self, ModelError> {
        let dims = ModelDims {
            vocab: vocab.len(),
            d,
            h,
            classes,
        };
        check_dims(&dims)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut embedding = random_matrix(&mut rng, dims.vocab, d, 1.0);
        embedding.row_mut(vocab.pad_id() as usize).fill(0.0);
        let s1 = 1.0 / (d as f64).sqrt();
        let w1 = random_matrix(&mut rng, h, d, s1);
        let b1 = (0..h).map(|_| uniform(&mut rng, s1)).collect();
        let s2 = 1.0 / (h as f64).sqrt();
        let w2 = random_matrix(&mut rng, classes, h, s2);
        let b2 = (0..classes).map(|_| uniform(&mut rng, s2)).collect();
        Ok(Self {
            vocab,
            dims,
            embedding,
            w1,
            b1,
            w2,
            b2,
            activation,
            seed,
        })
    }

    /// Assembles a model from explicit parameters, checking every shape.
    pub fn from_parameters(
        vocab: Vocab,
        embedding: Matrix,
        w1: Matrix,
        b1: Vec<f64>,
        w2: Matrix,
        b2: Vec<f64>,
        activation: Activation,
    ) -> Result<Self, ModelError> {
        let model = Self {
            dims: ModelDims {
                vocab: vocab.len(),
                d: embedding.cols(),
                h: w1.rows(),
                classes: w2.rows(),
            },
            vocab,
            embedding,
            w1,
            b1,
            w2,
            b2,
            activation,
            seed: 0,
        };
        model.check()?;
        Ok(model)
    }

    fn check(&self) -> Result<(), ModelError> {
        check_dims(&self.dims)?;
        let ModelDims { vocab, d, h, classes } = self.dims;
        let shapes = [
            ("E", (self.embedding.rows(), self.embedding.cols()), (vocab, d)),
            ("W1", (self.w1.rows(), self.w1.cols()), (h, d)),
            ("b1", (self.b1.len(), 1), (h, 1)),
            ("W2", (self.w2.rows(), self.w2.cols()), (classes, h)),
            ("b2", (self.b2.len(), 1), (classes, 1)),
        ];
        for (name, got, want) in shapes {
            if got != want {
                return Err(ModelError::Shape {
                    expected: format!("{name} {}x{}", want.0, want.1),
                    got: format!("{name} {}x{}", got.0, got.1),
                });
            }
        }
        if self.vocab.len() != vocab {
            return Err(ModelError::InvalidModel(format!(
                "dims.V = {vocab} but vocabulary has {} tokens",
                self.vocab.len()
            )));
        }
        let finite = self.embedding.is_finite()
            && self.w1.is_finite()
            && self.w2.is_finite()
            && self.b1.iter().chain(&self.b2).all(|v| v.is_finite());
        if !finite {
            return Err(ModelError::InvalidModel("non-finite parameter".into()));
        }
        Ok(())
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn dims(&self) -> ModelDims {
        self.dims
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn embedding_matrix(&self) -> &Matrix {
        &self.embedding
    }

    pub fn tokenize(&self, text: &str) -> TokenSequence {
        self.vocab.tokenize(text)
    }

    fn check_ids(&self, ids: &[TokenId]) -> Result<(), ModelError> {
        if ids.is_empty() {
            return Err(ModelError::EmptyInput);
        }
        match ids.iter().find(|&&id| id as usize >= self.dims.vocab) {
            Some(&id) => Err(ModelError::TokenOutOfRange {
                id,
                vocab_size: self.dims.vocab,
            }),
            None => Ok(()),
        }
    }

    fn check_embeddings(&self, x: &Matrix) -> Result<(), ModelError> {
        if x.rows() == 0 {
            return Err(ModelError::EmptyInput);
        }
        if x.cols() != self.dims.d {
            return Err(ModelError::Shape {
                expected: format!("n x {}", self.dims.d),
                got: format!("{} x {}", x.rows(), x.cols()),
            });
        }
        Ok(())
    }

    fn trace_pooled(&self, pooled: Vec<f64>) -> Trace {
        let hidden: Vec<f64> = self
            .w1
            .matvec(&pooled)
            .into_iter()
            .zip(&self.b1)
            .map(|(z, b)| self.activation.apply(z + b))
            .collect();
        let logits = self
            .w2
            .matvec(&hidden)
            .into_iter()
            .zip(&self.b2)
            .map(|(z, b)| z + b)
            .collect();
        Trace {
            pooled,
            hidden,
            logits,
        }
    }

    fn pooled_from_ids(&self, ids: &[TokenId]) -> Vec<f64> {
        let mut pooled = vec![0.0; self.dims.d];
        for &id in ids {
            for (p, e) in pooled.iter_mut().zip(self.embedding.row(id as usize)) {
                *p += e;
            }
        }
        let n = ids.len() as f64;
        pooled.iter_mut().for_each(|p| *p /= n);
        pooled
    }

    fn pooled_from_embeddings(x: &Matrix) -> Vec<f64> {
        let mut pooled = vec![0.0; x.cols()];
        for row in x.iter_rows() {
            for (p, v) in pooled.iter_mut().zip(row) {
                *p += v;
            }
        }
        let n = x.rows() as f64;
        pooled.iter_mut().for_each(|p| *p /= n);
        pooled
    }

    /// Backpropagates `d loss / d logits` to the pooled input and the hidden
    /// pre-activations.
    fn backward(&self, trace: &Trace, dlogits: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let dhidden = self.w2.matvec_transposed(dlogits);
        let dz: Vec<f64> = dhidden
            .iter()
            .zip(&trace.hidden)
            .map(|(g, &a)| g * self.activation.derivative_from_output(a))
            .collect();
        (self.w1.matvec_transposed(&dz), dz)
    }

    /// Trains on `(sequence, label)` pairs and returns the loss before each
    /// epoch. The `[PAD]` embedding row is never updated.
    pub fn train(
        &mut self,
        data: &[(TokenSequence, usize)],
        cfg: &TrainConfig,
    ) -> Result<Vec<f64>, ModelError> {
        for (seq, label) in data {
            self.check_ids(seq.ids())?;
            if *label >= self.dims.classes {
                return Err(ModelError::TargetOutOfRange {
                    target: *label,
                    classes: self.dims.classes,
                });
            }
        }
        if data.is_empty() {
            return Ok(Vec::new());
        }
        let ModelDims { vocab, d, h, classes } = self.dims;
        let pad = self.vocab.pad_id() as usize;
        let scale = 1.0 / data.len() as f64;
        let mut losses = Vec::with_capacity(cfg.epochs);
        for _ in 0..cfg.epochs {
            let mut g_e = Matrix::zeros(vocab, d);
            let mut g_w1 = Matrix::zeros(h, d);
            let mut g_b1 = vec![0.0; h];
            let mut g_w2 = Matrix::zeros(classes, h);
            let mut g_b2 = vec![0.0; classes];
            let mut loss = 0.0;
            for (seq, label) in data {
                let ids = seq.ids();
                let trace = self.trace_pooled(self.pooled_from_ids(ids));
                let probs = softmax(&trace.logits);
                loss -= probs[*label].max(f64::MIN_POSITIVE).ln();
                let mut dlogits = probs;
                dlogits[*label] -= 1.0;
                for c in 0..classes {
                    g_b2[c] += dlogits[c];
                    for (g, a) in g_w2.row_mut(c).iter_mut().zip(&trace.hidden) {
                        *g += dlogits[c] * a;
                    }
                }
                let (dpooled, dz) = self.backward(&trace, &dlogits);
                for j in 0..h {
                    g_b1[j] += dz[j];
                    for (g, p) in g_w1.row_mut(j).iter_mut().zip(&trace.pooled) {
                        *g += dz[j] * p;
                    }
                }
                let per_token = 1.0 / ids.len() as f64;
                for &id in ids {
                    for (g, dp) in g_e.row_mut(id as usize).iter_mut().zip(&dpooled) {
                        *g += dp * per_token;
                    }
                }
            }
            losses.push(loss * scale);
            let step = cfg.learning_rate * scale;
            g_e.row_mut(pad).fill(0.0);
            descend(self.embedding.as_mut_slice(), g_e.as_slice(), step);
            descend(self.w1.as_mut_slice(), g_w1.as_slice(), step);
            descend(&mut self.b1, &g_b1, step);
            descend(self.w2.as_mut_slice(), g_w2.as_slice(), step);
            descend(&mut self.b2, &g_b2, step);
        }
        Ok(losses)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serialization is infallible")
    }

    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        let model: Self = serde_json::from_str(json)?;
        model.check().map_err(serde::de::Error::custom)?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        fs::write(path, self.to_json()).map_err(|source| ModelError::Io {
            path: path.to_owned(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let text = fs::read_to_string(path).map_err(|source| ModelError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text).map_err(|source| ModelError::Json {
            path: path.to_owned(),
            source,
        })
    }
}

fn check_dims(dims: &ModelDims) -> Result<(), ModelError> {
    if dims.classes < 2 {
        return Err(ModelError::InvalidModel(format!(
            "need at least 2 classes, got {}",
            dims.classes
        )));
    }
    if dims.d == 0 || dims.h == 0 || dims.vocab == 0 {
        return Err(ModelError::InvalidModel(format!(
            "zero-sized dimension in {dims:?}"
        )));
    }
    Ok(())
}

fn descend(params: &mut [f64], grads: &[f64], step: f64) {
    for (p, g) in params.iter_mut().zip(grads) {
        *p -= step * g;
    }
}

pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

impl Classifier for ReferenceModel {
    fn num_classes(&self) -> usize {
        self.dims.classes
    }

    fn vocab_size(&self) -> usize {
        self.dims.vocab
    }

    fn pad_id(&self) -> TokenId {
        self.vocab.pad_id()
    }

    fn is_special(&self, id: TokenId) -> bool {
        self.vocab.is_special(id)
    }

    fn forward(&self, ids: &[TokenId]) -> Result<Logits, ModelError> {
        self.check_ids(ids)?;
        Ok(self.trace_pooled(self.pooled_from_ids(ids)).logits)
    }
}

impl EmbeddingClassifier for ReferenceModel {
    fn embed(&self, ids: &[TokenId]) -> Result<Matrix, ModelError> {
        self.check_ids(ids)?;
        let mut x = Matrix::zeros(ids.len(), self.dims.d);
        for (i, &id) in ids.iter().enumerate() {
            x.row_mut(i).copy_from_slice(self.embedding.row(id as usize));
        }
        Ok(x)
    }

    fn forward_from_embeddings(&self, x: &Matrix) -> Result<Logits, ModelError> {
        self.check_embeddings(x)?;
        Ok(self.trace_pooled(Self::pooled_from_embeddings(x)).logits)
    }

    fn gradient_wrt_embeddings(&self, x: &Matrix, target: usize) -> Result<Matrix, ModelError> {
        self.check_embeddings(x)?;
        if target >= self.dims.classes {
            return Err(ModelError::TargetOutOfRange {
                target,
                classes: self.dims.classes,
            });
        }
        let trace = self.trace_pooled(Self::pooled_from_embeddings(x));
        let mut onehot = vec![0.0; self.dims.classes];
        onehot[target] = 1.0;
        let (dpooled, _) = self.backward(&trace, &onehot);
        // mean pooling spreads the pooled gradient evenly over positions
        let n = x.rows() as f64;
        let row: Vec<f64> = dpooled.iter().map(|g| g / n).collect();
        let mut grad = Matrix::zeros(x.rows(), x.cols());
        for i in 0..x.rows() {
            grad.row_mut(i).copy_from_slice(&row);
        }
        Ok(grad)
    }
}
