//! Superior-colliculus-inspired fusion of unimodal embeddings.
//!
//! Two (or more) unimodal neural areas receive embeddings through trainable
//! receptive fields, interact laterally through Mexican-hat kernels, and
//! drive a multimodal area whose settled activity is the fused embedding.

pub mod audio;
pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod field;
pub mod trainer;

pub use error::{Result, ScfError};
