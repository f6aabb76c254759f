//! Tokenization, the reference classifier, and the model interfaces the
//! explainers are written against.
//!
//! Perturbation explainers (occlusion, Shapley sampling, LIME) only need
//! [`Classifier`]: a black box mapping token ids to logits. Gradient
//! explainers additionally need [`EmbeddingClassifier`], which exposes the
//! embedding lookup, the forward pass starting from embeddings, and the
//! gradient of one logit with respect to those embeddings. Any model that
//! supplies these hooks can be explained; [`ReferenceModel`] is the built-in
//! one.

mod matrix;
mod reference;
mod vocab;

use std::path::PathBuf;

pub use matrix::Matrix;
pub use reference::{Activation, ModelDims, ReferenceModel, TrainConfig};
pub use vocab::{TokenId, TokenSequence, Vocab, CLS_TOKEN, PAD_TOKEN, SEP_TOKEN, UNK_TOKEN};

/// Pre-softmax class scores.
pub type Logits = Vec<f64>;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("token id {id} out of range for vocabulary of size {vocab_size}")]
    TokenOutOfRange { id: TokenId, vocab_size: usize },
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },
    #[error("target class {target} out of range for {classes} classes")]
    TargetOutOfRange { target: usize, classes: usize },
    #[error("empty input sequence")]
    EmptyInput,
    #[error("invalid vocabulary: {0}")]
    InvalidVocab(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
}

/// Black-box text classifier over token ids.
pub trait Classifier {
    fn num_classes(&self) -> usize;

    fn vocab_size(&self) -> usize;

    /// Token used to blank out positions in perturbation explainers.
    fn pad_id(&self) -> TokenId;

    /// Tokens that perturbation explainers keep fixed (sentence markers).
    fn is_special(&self, _id: TokenId) -> bool {
        false
    }

    fn forward(&self, ids: &[TokenId]) -> Result<Logits, ModelError>;
}

/// A classifier with an embedding layer that can be differentiated through.
pub trait EmbeddingClassifier: Classifier {
    /// Row `i` is the embedding of `ids[i]`.
    fn embed(&self, ids: &[TokenId]) -> Result<Matrix, ModelError>;

    fn forward_from_embeddings(&self, x: &Matrix) -> Result<Logits, ModelError>;

    /// Gradient of `logits[target]` with respect to every entry of `x`.
    fn gradient_wrt_embeddings(&self, x: &Matrix, target: usize) -> Result<Matrix, ModelError>;
}

impl<T: Classifier + ?Sized> Classifier for &T {
    fn num_classes(&self) -> usize {
        (**self).num_classes()
    }

    fn vocab_size(&self) -> usize {
        (**self).vocab_size()
    }

    fn pad_id(&self) -> TokenId {
        (**self).pad_id()
    }

    fn is_special(&self, id: TokenId) -> bool {
        (**self).is_special(id)
    }

    fn forward(&self, ids: &[TokenId]) -> Result<Logits, ModelError> {
        (**self).forward(ids)
    }
}

impl<T: EmbeddingClassifier + ?Sized> EmbeddingClassifier for &T {
    fn embed(&self, ids: &[TokenId]) -> Result<Matrix, ModelError> {
        (**self).embed(ids)
    }

    fn forward_from_embeddings(&self, x: &Matrix) -> Result<Logits, ModelError> {
        (**self).forward_from_embeddings(x)
    }

    fn gradient_wrt_embeddings(&self, x: &Matrix, target: usize) -> Result<Matrix, ModelError> {
        (**self).gradient_wrt_embeddings(x, target)
    }
}
