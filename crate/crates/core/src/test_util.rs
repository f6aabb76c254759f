use crate::model::{Activation, Matrix, ReferenceModel, Vocab};

pub const VOCAB_SIZE: usize = 12;

/// Ignores its input: every weight is zero, logits equal the output bias.
pub fn constant_model() -> ReferenceModel {
    ReferenceModel::from_parameters(
        Vocab::synthetic(VOCAB_SIZE),
        Matrix::zeros(VOCAB_SIZE, 3),
        Matrix::zeros(4, 3),
        vec![0.0; 4],
        Matrix::zeros(2, 4),
        vec![0.5, -0.25],
        Activation::Tanh,
    )
    .unwrap()
}

/// Affine in its embeddings, with a zero `[PAD]` row.
pub fn linear_model(seed: u64) -> ReferenceModel {
    ReferenceModel::new(Vocab::synthetic(VOCAB_SIZE), 3, 4, 2, Activation::Identity, seed).unwrap()
}

pub fn nonlinear_model(seed: u64) -> ReferenceModel {
    ReferenceModel::new(Vocab::synthetic(VOCAB_SIZE), 3, 4, 2, Activation::Tanh, seed).unwrap()
}
