//! Discrete-time dynamics of the K-compartment GLM spiking network.

mod basis;
mod config;
mod dynamics;
mod network;
mod params;
mod spikes;
mod state;

pub use basis::{raised_cosine, BasisSpec, FilterBasis, MAX_DURATION};
pub use config::{NetworkConfig, Topology};
pub use dynamics::{bce_loss, log_prob, membrane_potential, sample_spike, sigmoid, step_network};
pub use network::Network;
pub use params::{InitSpec, ParamId, ParamLayout, ParameterSet};
pub use spikes::SpikeMatrix;
pub use state::CompartmentState;
