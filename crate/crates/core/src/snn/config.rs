use serde::{Deserialize, Serialize};

use super::basis::BasisSpec;
use super::params::InitSpec;
use crate::error::{Error, Result};

/// How neurons are wired.
///
/// Channels are numbered exogeneous inputs first (`0..E`), then neurons
/// (`E..E+N`). Neurons are numbered visible first (`0..|X|`), then hidden.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Topology {
    /// Hidden neurons receive every exogeneous input (and, if
    /// `hidden_recurrent`, every other hidden neuron). Visible read-out
    /// neurons receive every exogeneous input and every hidden neuron, with
    /// no visible-to-visible synapses.
    Readout {
        #[serde(default = "default_true")]
        hidden_recurrent: bool,
    },
    /// Explicit pre-synaptic channel list per neuron.
    Custom { presynaptic: Vec<Vec<usize>> },
}

fn default_true() -> bool {
    true
}

impl Default for Topology {
    fn default() -> Self {
        Topology::Readout {
            hidden_recurrent: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub num_exogeneous: usize,
    pub num_visible: usize,
    pub num_hidden: usize,
    #[serde(default)]
    pub topology: Topology,
    /// Compartments used for training (`K`).
    pub num_compartments: usize,
    #[serde(default)]
    pub basis: BasisSpec,
    /// Eligibility discount `γ`.
    pub discount_gamma: f64,
    /// Log-weight discount `κ`.
    pub kappa: f64,
    pub learning_rate_eta: f64,
    pub seed: u64,
    #[serde(default)]
    pub init: InitSpec,
}

impl NetworkConfig {
    /// Event-camera read-out network: 676 inputs, 200 hidden, 3 visible,
    /// three raised cosines over 10 steps, `η = 0.001`, `κ = γ = 0.9`.
    pub fn dvs_readout(num_compartments: usize, seed: u64) -> Self {
        Self {
            num_exogeneous: 26 * 26,
            num_visible: 3,
            num_hidden: 200,
            topology: Topology::default(),
            num_compartments,
            basis: BasisSpec::default(),
            discount_gamma: 0.9,
            kappa: 0.9,
            learning_rate_eta: 0.001,
            seed,
            init: InitSpec::default(),
        }
    }

    pub fn num_neurons(&self) -> usize {
        self.num_visible + self.num_hidden
    }

    pub fn num_channels(&self) -> usize {
        self.num_exogeneous + self.num_neurons()
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_visible == 0 {
            return Err(Error::config("at least one visible neuron is required"));
        }
        if self.num_compartments == 0 {
            return Err(Error::config("num_compartments must be at least 1"));
        }
        let unit = |name: &str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must lie in (0, 1), got {v}")))
            }
        };
        unit("discount_gamma", self.discount_gamma)?;
        unit("kappa", self.kappa)?;
        if !(self.learning_rate_eta >= 0.0 && self.learning_rate_eta.is_finite()) {
            return Err(Error::config(format!(
                "learning_rate_eta must be finite and non-negative, got {}",
                self.learning_rate_eta
            )));
        }
        self.init.validate()?;
        if let Topology::Custom { presynaptic } = &self.topology {
            if presynaptic.len() != self.num_neurons() {
                return Err(Error::config(format!(
                    "custom topology lists {} neurons, network has {}",
                    presynaptic.len(),
                    self.num_neurons()
                )));
            }
            for (i, pre) in presynaptic.iter().enumerate() {
                let mut seen = std::collections::BTreeSet::new();
                for &j in pre {
                    if j >= self.num_channels() {
                        return Err(Error::config(format!(
                            "neuron {i} references channel {j}, only {} exist",
                            self.num_channels()
                        )));
                    }
                    if !seen.insert(j) {
                        return Err(Error::config(format!("neuron {i} lists channel {j} twice")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Resolved pre-synaptic channel list per neuron.
    pub fn presynaptic(&self) -> Vec<Vec<usize>> {
        match &self.topology {
            Topology::Custom { presynaptic } => presynaptic.clone(),
            Topology::Readout { hidden_recurrent } => {
                let e = self.num_exogeneous;
                let x = self.num_visible;
                let n = self.num_neurons();
                let hidden_channels = (e + x)..(e + n);
                (0..n)
                    .map(|i| {
                        let mut pre: Vec<usize> = (0..e).collect();
                        if i < x {
                            pre.extend(hidden_channels.clone());
                        } else if *hidden_recurrent {
                            pre.extend(hidden_channels.clone().filter(|&c| c != e + i));
                        }
                        pre
                    })
                    .collect()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> NetworkConfig {
        NetworkConfig {
            num_exogeneous: 4,
            num_visible: 2,
            num_hidden: 3,
            topology: Topology::default(),
            num_compartments: 2,
            basis: BasisSpec::default(),
            discount_gamma: 0.9,
            kappa: 0.9,
            learning_rate_eta: 0.01,
            seed: 1,
            init: InitSpec::default(),
        }
    }

    #[test]
    fn readout_has_no_visible_to_visible_synapse() {
        let cfg = small();
        cfg.validate().unwrap();
        let pre = cfg.presynaptic();
        let visible_channels = 4..6;
        for p in &pre {
            assert!(p.iter().all(|c| !visible_channels.contains(c)));
        }
        assert_eq!(pre[0], vec![0, 1, 2, 3, 6, 7, 8]);
        assert_eq!(pre[2], vec![0, 1, 2, 3, 7, 8]);
    }

    #[test]
    fn feedforward_hidden() {
        let mut cfg = small();
        cfg.topology = Topology::Readout {
            hidden_recurrent: false,
        };
        assert_eq!(cfg.presynaptic()[3], vec![0, 1, 2, 3]);
    }

    #[test]
    fn rejects_invalid_hyperparameters() {
        let mut cfg = small();
        cfg.num_visible = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = small();
        cfg.kappa = 1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = small();
        cfg.discount_gamma = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = small();
        cfg.learning_rate_eta = -1e-3;
        assert!(cfg.validate().is_err());
        let mut cfg = small();
        cfg.num_compartments = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rejects_dangling_channel() {
        let mut cfg = small();
        cfg.topology = Topology::Custom {
            presynaptic: vec![vec![0], vec![1], vec![2], vec![3], vec![9]],
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = small();
        let text = toml::to_string(&cfg).unwrap();
        let back: NetworkConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(toml::to_string(&back).unwrap(), text);
    }
}
