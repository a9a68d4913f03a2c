//! Multi-compartment probabilistic spiking neural networks.
//!
//! Every neuron runs `K` compartments. Compartments share one set of synaptic
//! weights but keep their own traces, membrane potentials and random streams,
//! so each produces an independent spike sample. Training uses those samples
//! as an importance-weighted estimate of the log-likelihood gradient, which
//! yields an online three-factor rule with one global learning signal per
//! compartment.
//!
//! ## Layout
//!
//! - [`snn`]: GLM neuron dynamics, filter bases, traces, spike sampling.
//! - [`learning`]: log-weight accumulators, SoftMax importance weights,
//!   eligibility traces and the parameter update.
//! - [`inference`]: free-running inference, majority decoding, marginal
//!   log-likelihood estimation and expected calibration error.
//! - [`data`]: event streams, spike tensors, preprocessing, synthetic tasks.
//! - [`experiment`]: config files, checkpoints, metric logs and the
//!   train / eval / sweep drivers used by the `mcsnn` binary.
//!
//! Work that is independent across compartments, realizations or examples
//! runs through [`par::Execution`], which uses rayon when the `parallel`
//! feature is enabled and falls back to plain iteration otherwise. Results
//! are identical under both modes.

pub mod data;
pub mod error;
pub mod experiment;
pub mod inference;
pub mod learning;
pub mod par;
pub mod rng;
pub mod snn;

pub use error::{Error, Result};
pub use learning::{train_step, LearnerState, StepMetrics};
pub use par::Execution;
pub use snn::{
    CompartmentState, FilterBasis, Network, NetworkConfig, ParamId, ParameterSet, SpikeMatrix,
    Topology,
};
