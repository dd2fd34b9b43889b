//! Truncated weighted free tensor algebra over `{0 (time), 1, …, d}`.

mod graded;
mod weight;
mod word;

pub use graded::{DualElement, GradedTensor, WeightedNorms};
pub use weight::{weight_check, Weight, WeightKind, WeightReport};
pub use word::{shuffle_words, Word};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TensorError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("word {word} has a letter outside 0..={dim}")]
    LetterOutOfRange { word: String, dim: usize },
    #[error("word {word} exceeds truncation level {trunc}")]
    WordTooLong { word: String, trunc: usize },
    #[error("non-finite coefficient on word {0}")]
    NonFinite(String),
    #[error("tensor text, line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
