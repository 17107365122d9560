//! Classifier heads, gradients through the unrolled field, Adam, early
//! stopping and cross-validation.

pub mod adam;
mod bptt;
pub mod classifier;
pub mod crossval;
pub mod gradcheck;
pub mod mlp;
pub mod train;

pub use adam::{AdamSettings, AdamState};
pub use classifier::{mix_seed, Classifier, ClassifierParams, Encoder, EncoderParams, Gradients, Sample};
pub use crossval::{cross_validate, cross_validate_with, mean_std, ClassifierRecipe, FoldReport, ModelKind};
pub use gradcheck::{gradient_check, GradCheckReport};
pub use mlp::{bce_logit_grad, bce_loss, Dense, HeadConfig, MlpHead};
pub use train::{train, EarlyStopping, EpochRecord, History, StopVerdict, TrainConfig, TrainOutcome};
