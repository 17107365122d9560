//! Neural-field fusion layer: unimodal areas driven by receptive fields,
//! coupled to a multimodal area through position-wise gains and feedback,
//! each with Mexican-hat lateral connectivity on a torus.

pub mod kernel;
pub mod model;
pub mod params;

pub use kernel::{circular_distance, convolve_naive, lateral_weight, ConvMode, LateralKernel, LateralOperator};
pub use model::{
    activation, feedback_input, logistic, AreaId, AreaState, FusionOutput, ScfModel, ScfState, Stimulus,
};
pub use params::{AreaParams, FieldConfig, GridShape, ReceptiveField, ScfParams, TrainableGroups, UnimodalArea};
