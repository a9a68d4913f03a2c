use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{synth_task, Dataset, SynthSpec};
use crate::error::{Error, Result};
use crate::snn::NetworkConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSource {
    Synth(SynthSpec),
    /// Tensor manifest; a relative path is resolved against the config file.
    Manifest {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMetric {
    #[default]
    LogLikelihood,
    Accuracy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSpec {
    #[serde(default = "one")]
    pub epochs: usize,
    /// Cap on training examples processed over all epochs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_examples: Option<usize>,
    /// Evaluate on the test split every this many training examples
    /// (0: only once, after training).
    #[serde(default)]
    pub eval_every: usize,
    /// Write a step record every this many time steps (0: never).
    #[serde(default)]
    pub step_log_stride: usize,
    #[serde(default)]
    pub selection_metric: SelectionMetric,
}

impl Default for TrainingSpec {
    fn default() -> Self {
        Self {
            epochs: 1,
            max_examples: None,
            eval_every: 0,
            step_log_stride: 0,
            selection_metric: SelectionMetric::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceSpec {
    /// Compartments used for inference (`K^I`).
    pub k_infer: usize,
    /// Hidden realizations per log-likelihood estimate.
    #[serde(default = "twenty")]
    pub ll_realizations: usize,
    #[serde(default = "ten")]
    pub ece_bins: usize,
    /// Evaluate only the first this many test examples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_test_examples: Option<usize>,
}

impl Default for InferenceSpec {
    fn default() -> Self {
        Self {
            k_infer: 1,
            ll_realizations: 20,
            ece_bins: 10,
            max_test_examples: None,
        }
    }
}

fn one() -> usize {
    1
}
fn ten() -> usize {
    10
}
fn twenty() -> usize {
    20
}

/// Everything one experiment needs. Training uses
/// `network.num_compartments` compartments; `network.seed` is the master
/// seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub network: NetworkConfig,
    pub data: DataSource,
    #[serde(default)]
    pub training: TrainingSpec,
    #[serde(default)]
    pub inference: InferenceSpec,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(e.to_string()))
    }

    /// Parses a config file and resolves a relative manifest path against
    /// the file's directory. The manifest must exist.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)
            .map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
        if let DataSource::Manifest { path: m } = &mut cfg.data {
            if m.is_relative() {
                *m = path.parent().unwrap_or(Path::new("")).join(&*m);
            }
            if !m.exists() {
                return Err(Error::config(format!(
                    "dataset manifest {} does not exist",
                    m.display()
                )));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.network.validate()?;
        if self.inference.k_infer == 0 {
            return Err(Error::config("k_infer must be at least 1"));
        }
        if self.inference.ll_realizations == 0 {
            return Err(Error::config("ll_realizations must be at least 1"));
        }
        if self.inference.ece_bins == 0 {
            return Err(Error::config("ece_bins must be at least 1"));
        }
        if let DataSource::Synth(s) = &self.data {
            s.validate()?;
        }
        Ok(())
    }
}

/// Loads or generates the dataset and checks it against the network shape.
pub fn load_dataset(cfg: &ExperimentConfig) -> Result<Dataset> {
    let ds = match &cfg.data {
        DataSource::Synth(spec) => synth_task(spec)?,
        DataSource::Manifest { path } => Dataset::load(path)?,
    };
    if ds.num_channels != cfg.network.num_exogeneous {
        return Err(Error::config(format!(
            "dataset has {} channels, network expects {} exogeneous inputs",
            ds.num_channels, cfg.network.num_exogeneous
        )));
    }
    if ds.num_classes() != cfg.network.num_visible {
        return Err(Error::config(format!(
            "dataset has {} classes, network has {} visible neurons",
            ds.num_classes(),
            cfg.network.num_visible
        )));
    }
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
[network]
num_exogeneous = 12
num_visible = 3
num_hidden = 4
num_compartments = 2
discount_gamma = 0.9
kappa = 0.9
learning_rate_eta = 0.01
seed = 5

[network.topology]
kind = "readout"
hidden_recurrent = false

[network.basis]
kind = "raised_cosine"
num_basis = 3
duration = 10

[data]
kind = "synth"
num_classes = 3
channels = 12
steps = 10
rate_high = 0.7
rate_low = 0.05
train_per_class = 4
test_per_class = 2
seed = 3

[training]
eval_every = 6

[inference]
k_infer = 2
"#;

    #[test]
    fn parse_dump_parse_is_identity() {
        let cfg = ExperimentConfig::from_toml(EXAMPLE).unwrap();
        assert_eq!(cfg.inference.ll_realizations, 20);
        assert_eq!(cfg.inference.ece_bins, 10);
        assert_eq!(cfg.network.init.bias, -1.0);
        let dumped = cfg.to_toml().unwrap();
        let back = ExperimentConfig::from_toml(&dumped).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_toml().unwrap(), dumped);
    }

    #[test]
    fn explicit_kernels_round_trip() {
        let mut cfg = ExperimentConfig::from_toml(EXAMPLE).unwrap();
        let basis = crate::snn::FilterBasis::raised_cosine(2, 5).unwrap();
        cfg.network.basis = crate::snn::BasisSpec::Explicit {
            synaptic: basis.synaptic_kernels().to_vec(),
            somatic: vec![1.0, 0.25, 0.0, 0.0, 0.0],
        };
        let back = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_zero_k_infer_and_missing_manifest() {
        let bad = EXAMPLE.replace("k_infer = 2", "k_infer = 0");
        assert!(matches!(
            ExperimentConfig::from_toml(&bad),
            Err(Error::Config(_))
        ));

        let dir = tempfile::tempdir().unwrap();
        let text = EXAMPLE
            .split("[data]")
            .next()
            .unwrap()
            .to_string()
            + "[data]\nkind = \"manifest\"\npath = \"nope/manifest.toml\"\n\n[inference]\nk_infer = 1\n";
        let p = dir.path().join("c.toml");
        std::fs::write(&p, text).unwrap();
        assert!(matches!(ExperimentConfig::load(&p), Err(Error::Config(_))));
    }

    #[test]
    fn dataset_shape_checked_against_network() {
        let mut cfg = ExperimentConfig::from_toml(EXAMPLE).unwrap();
        assert!(load_dataset(&cfg).is_ok());
        cfg.network.num_exogeneous = 11;
        assert!(load_dataset(&cfg).is_err());
    }
}
