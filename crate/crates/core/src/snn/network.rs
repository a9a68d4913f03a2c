use super::basis::FilterBasis;
use super::config::NetworkConfig;
use super::params::{ParamLayout, ParameterSet};
use crate::error::{Error, Result};
use crate::rng::{self, Domain};

/// A validated [`NetworkConfig`] with its resolved basis and parameter layout.
#[derive(Debug, Clone)]
pub struct Network {
    config: NetworkConfig,
    basis: FilterBasis,
    layout: ParamLayout,
}

impl Network {
    pub fn new(config: NetworkConfig) -> Result<Self> {
        config.validate()?;
        let basis = config.basis.build()?;
        let layout = ParamLayout::new(config.presynaptic(), basis.num_basis());
        Ok(Self {
            config,
            basis,
            layout,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn basis(&self) -> &FilterBasis {
        &self.basis
    }

    pub fn layout(&self) -> &ParamLayout {
        &self.layout
    }

    pub fn num_exogeneous(&self) -> usize {
        self.config.num_exogeneous
    }

    pub fn num_visible(&self) -> usize {
        self.config.num_visible
    }

    pub fn num_hidden(&self) -> usize {
        self.config.num_hidden
    }

    pub fn num_neurons(&self) -> usize {
        self.config.num_neurons()
    }

    pub fn num_channels(&self) -> usize {
        self.config.num_channels()
    }

    pub fn num_compartments(&self) -> usize {
        self.config.num_compartments
    }

    pub fn is_visible(&self, neuron: usize) -> bool {
        neuron < self.config.num_visible
    }

    /// Channel index carrying neuron `i`'s output.
    pub fn neuron_channel(&self, neuron: usize) -> usize {
        self.config.num_exogeneous + neuron
    }

    /// Parameters drawn from the init stream of the config seed.
    pub fn init_params(&self) -> ParameterSet {
        let mut r = rng::stream(self.config.seed, Domain::Init, 0);
        ParameterSet::init(self.layout.clone(), &self.config.init, &mut r)
    }

    pub fn check_params(&self, params: &ParameterSet) -> Result<()> {
        if params.layout() != &self.layout {
            return Err(Error::Shape(format!(
                "parameter layout ({} values, {} neurons) does not match network ({} values, {} neurons)",
                params.len(),
                params.layout().num_neurons(),
                self.layout.len(),
                self.layout.num_neurons()
            )));
        }
        Ok(())
    }
}
