use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Position of every parameter in the flat parameter vector.
///
/// Neuron `i` owns one contiguous block: `|P_i|·B` synaptic weights ordered
/// by (pre-synaptic slot, basis), then its self-memory weight, then its bias.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamLayout {
    num_basis: usize,
    presynaptic: Vec<Vec<usize>>,
    offsets: Vec<usize>,
    len: usize,
}

impl ParamLayout {
    pub fn new(presynaptic: Vec<Vec<usize>>, num_basis: usize) -> Self {
        let mut offsets = Vec::with_capacity(presynaptic.len());
        let mut len = 0;
        for pre in &presynaptic {
            offsets.push(len);
            len += pre.len() * num_basis + 2;
        }
        Self {
            num_basis,
            presynaptic,
            offsets,
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn num_basis(&self) -> usize {
        self.num_basis
    }

    pub fn num_neurons(&self) -> usize {
        self.presynaptic.len()
    }

    pub fn presynaptic(&self, neuron: usize) -> &[usize] {
        &self.presynaptic[neuron]
    }

    /// Range of neuron `i`'s block.
    pub fn block(&self, neuron: usize) -> std::ops::Range<usize> {
        let start = self.offsets[neuron];
        start..start + self.presynaptic[neuron].len() * self.num_basis + 2
    }

    pub fn id_of(&self, index: usize) -> ParamId {
        let neuron = match self.offsets.binary_search(&index) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let local = index - self.offsets[neuron];
        let syn = self.presynaptic[neuron].len() * self.num_basis;
        if local < syn {
            ParamId::Synaptic {
                pre: self.presynaptic[neuron][local / self.num_basis],
                post: neuron,
                basis: local % self.num_basis,
            }
        } else if local == syn {
            ParamId::SelfWeight { neuron }
        } else {
            ParamId::Bias { neuron }
        }
    }
}

/// Identity of one scalar parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamId {
    /// `pre` is a channel index, `post` a neuron index.
    Synaptic {
        pre: usize,
        post: usize,
        basis: usize,
    },
    SelfWeight {
        neuron: usize,
    },
    Bias {
        neuron: usize,
    },
}

impl fmt::Display for ParamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamId::Synaptic { pre, post, basis } => {
                write!(f, "w[{pre}->{post}, basis {basis}]")
            }
            ParamId::SelfWeight { neuron } => write!(f, "w_self[{neuron}]"),
            ParamId::Bias { neuron } => write!(f, "bias[{neuron}]"),
        }
    }
}

/// Weight initialization.
///
/// Synaptic and self-memory weights are uniform on `±scale/√(fan_in·B)`;
/// biases start at `bias`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitSpec {
    pub scale: f64,
    pub bias: f64,
}

impl Default for InitSpec {
    fn default() -> Self {
        Self {
            scale: 1.0,
            bias: -1.0,
        }
    }
}

impl InitSpec {
    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.scale >= 0.0 && self.scale.is_finite() && self.bias.is_finite()) {
            return Err(Error::config(
                "init scale must be finite and >= 0, bias finite",
            ));
        }
        Ok(())
    }
}

/// The single shared copy of `{w_{j,i,b}}, {w_i}, {ϑ_i}` used by every
/// compartment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    layout: ParamLayout,
    values: Vec<f64>,
}

impl ParameterSet {
    pub fn zeros(layout: ParamLayout) -> Self {
        let values = vec![0.0; layout.len()];
        Self { layout, values }
    }

    pub fn from_values(layout: ParamLayout, values: Vec<f64>) -> Result<Self> {
        if values.len() != layout.len() {
            return Err(Error::Shape(format!(
                "{} parameter values for a layout of {}",
                values.len(),
                layout.len()
            )));
        }
        Ok(Self { layout, values })
    }

    pub fn init<R: Rng + ?Sized>(layout: ParamLayout, spec: &InitSpec, rng: &mut R) -> Self {
        let mut params = Self::zeros(layout);
        let b = params.layout.num_basis();
        for i in 0..params.layout.num_neurons() {
            let fan_in = params.layout.presynaptic(i).len().max(1);
            let bound = spec.scale / ((fan_in * b) as f64).sqrt();
            let block = params.layout.block(i);
            let (last, body) = (block.end - 1, block.start..block.end - 1);
            for v in &mut params.values[body] {
                *v = if bound > 0.0 {
                    rng.random_range(-bound..bound)
                } else {
                    0.0
                };
            }
            params.values[last] = spec.bias;
        }
        params
    }

    pub fn layout(&self) -> &ParamLayout {
        &self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Synaptic weights of neuron `i`, `[slot * B + basis]`.
    pub fn synaptic(&self, neuron: usize) -> &[f64] {
        let block = self.layout.block(neuron);
        &self.values[block.start..block.end - 2]
    }

    pub fn synaptic_mut(&mut self, neuron: usize) -> &mut [f64] {
        let block = self.layout.block(neuron);
        &mut self.values[block.start..block.end - 2]
    }

    pub fn self_weight(&self, neuron: usize) -> f64 {
        self.values[self.layout.block(neuron).end - 2]
    }

    pub fn set_self_weight(&mut self, neuron: usize, v: f64) {
        let i = self.layout.block(neuron).end - 2;
        self.values[i] = v;
    }

    pub fn bias(&self, neuron: usize) -> f64 {
        self.values[self.layout.block(neuron).end - 1]
    }

    pub fn set_bias(&mut self, neuron: usize, v: f64) {
        let i = self.layout.block(neuron).end - 1;
        self.values[i] = v;
    }

    /// First non-finite entry, if any.
    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(p) => Err(Error::NonFinite {
                param: self.layout.id_of(p),
                value: self.values[p],
            }),
            None => Ok(()),
        }
    }
}
