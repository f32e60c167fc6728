//! Printed-word OCR built from a bidirectional LSTM trained with
//! connectionist temporal classification, together with the synthetic data
//! pipeline and experiment harness used to evaluate it.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! at the crate root fix it to `f64`, which training and gradient checks use.

pub mod ctc;
pub mod dataset;
pub mod error;
pub mod harness;
pub mod imaging;
pub mod metrics;
pub mod network;
pub mod scalar;
pub mod trainer;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Network parameters in 64-bit floats.
pub type Params = network::NetworkParams<f64>;
/// Forward-pass trace in 64-bit floats.
pub type State = network::NetworkState<f64>;
pub type Frames = network::FrameSequence<f64>;
pub type CtcOutput = ctc::CtcResult<f64>;
pub type Trainer = trainer::Trainer<f64>;
pub type FitResult = trainer::FitResult<f64>;
