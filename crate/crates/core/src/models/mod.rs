//! Sentence encoders behind an [`Encoder`] contract, a sigmoid classification
//! head, and training and inference for the binary claim identifier and the
//! multi-label categorizer.

mod config;
mod encoder;
mod head;
mod model;
mod train;

pub use config::{transformer_preset, ModelTask, TrainConfig, TransformerPreset};
pub use encoder::{
    Casing, Differentiable, Encoder, EncoderSpec, HashedBowEncoder, HashedBowSpec, LanguageScope,
    SparseVector,
};
pub use head::{HeadGradient, LinearHead};
pub use model::{BinaryPrediction, Checkpoint, ClaimModel, MultilabelPrediction};
pub use train::{train, EpochRecord, TrainOutcome, TrainingLog};
