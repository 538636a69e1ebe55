//! Signal-to-noise analysis of networks built from noisy linear neurons.
//!
//! Each neuron computes `f(x) = alpha x` of its weighted input plus a bias and
//! is then perturbed by additive and multiplicative white Gaussian noise, each
//! either local to the neuron (uncorrelated) or shared by its whole layer
//! (correlated). The crate provides
//!
//! * [`matrix`]: non-negative connection matrices, global or sparse random and
//!   spectrally normalized,
//! * [`noise`]: a counter-based noise source addressed by `(t, k, layer, neuron)`,
//! * [`simulator`]: noisy feed-forward and recurrent networks,
//! * [`analytic`]: closed-form mean/variance recursions for global coupling,
//! * [`estimator`]: Monte-Carlo SNR curves and their summaries,
//! * [`experiments`]: connectivity, depth, recurrence and mitigation sweeps.

pub mod analytic;
pub mod config;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod matrix;
pub mod noise;
pub mod simulator;

pub use config::{FnnConfig, InputSignal, NeuronParams, RnnConfig};
pub use error::{Error, Result};
pub use estimator::{curve_summary, monte_carlo_curve, ShiftMode, SnrCurve};
pub use matrix::WeightMatrix;
pub use noise::{NoiseIntensities, NoiseKind, NoiseSpec};
