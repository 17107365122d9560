//! Embedding datasets: the `SCFE` file format, a synthetic coincidence task,
//! masked sequence pooling and group-aware fold assignment.

pub mod dataset;
pub mod sequence;
pub mod split;
pub mod synth;

pub use dataset::{read_dataset, write_dataset, EmbeddingDataset, EmbeddingInstance};
pub use sequence::{pooled_visual, SequenceBundle};
pub use split::{split_groups, FoldAssignment, Scenario};
pub use synth::{location_distance, synth_generate, Latent, LocationProjection, SynthConfig, SynthOutput};
