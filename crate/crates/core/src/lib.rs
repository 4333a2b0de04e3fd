//! Excerpt informativeness measures and difference-in-differences estimators.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the usual `f64` instantiation.

// `!(x > 0.0)` deliberately rejects NaN; index loops mirror the algebra.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod align;
pub mod audio;
pub mod did;
pub mod error;
pub mod linalg;
pub mod panel;
pub mod parallel;
pub mod repetition;
pub mod scalar;
pub mod stats;
pub mod theory;
pub mod unpredictability;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Panel = panel::PanelDataset<f64>;
pub type Observation = panel::PanelObservation<f64>;
pub type Estimate = did::EstimateResult<f64>;
pub type Weights = did::SdidWeights<f64>;
pub type Clip = audio::AudioClip<f64>;
pub type Design = did::DesignMatrix<f64>;

pub type PanelF32 = panel::PanelDataset<f32>;
pub type EstimateF32 = did::EstimateResult<f32>;
pub type ClipF32 = audio::AudioClip<f32>;

/// Crate version embedded in every emitted artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
