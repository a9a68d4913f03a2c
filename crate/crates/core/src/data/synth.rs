use rand::Rng;
use serde::{Deserialize, Serialize};

use super::manifest::Dataset;
use super::tensor::EventTensor;
use crate::error::{Error, Result};
use crate::rng::{self, Domain};
use crate::snn::SpikeMatrix;

/// Synthetic rate-coded classification task.
///
/// Channels are split into `num_classes` equal contiguous blocks (leftover
/// channels belong to no class). An example of class `c` spikes with
/// probability `rate_high` on block `c` and `rate_low` everywhere else.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub num_classes: usize,
    pub channels: usize,
    pub steps: usize,
    pub rate_high: f64,
    pub rate_low: f64,
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.rate_low && self.rate_low < self.rate_high && self.rate_high <= 1.0) {
            return Err(Error::config(format!(
                "rates must satisfy 0 <= rate_low < rate_high <= 1, got {} and {}",
                self.rate_low, self.rate_high
            )));
        }
        if self.num_classes == 0 || self.channels < self.num_classes {
            return Err(Error::config(
                "need at least one class and one channel per class",
            ));
        }
        if self.steps == 0 {
            return Err(Error::config("steps must be at least 1"));
        }
        Ok(())
    }

    pub fn block_size(&self) -> usize {
        self.channels / self.num_classes
    }

    /// Channel range driven at `rate_high` for `class`.
    pub fn block(&self, class: usize) -> std::ops::Range<usize> {
        let b = self.block_size();
        class * b..(class + 1) * b
    }
}

/// Generates the train and test splits. Examples cycle through the classes
/// in order; the whole dataset is a function of `spec`.
pub fn synth_task(spec: &SynthSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = rng::stream(spec.seed, Domain::Data, 0);
    let mut make = |count: usize| -> Vec<EventTensor> {
        (0..count * spec.num_classes)
            .map(|n| {
                let label = n % spec.num_classes;
                let block = spec.block(label);
                let mut spikes = SpikeMatrix::zeros(spec.channels, spec.steps);
                for c in 0..spec.channels {
                    let p = if block.contains(&c) {
                        spec.rate_high
                    } else {
                        spec.rate_low
                    };
                    for t in 0..spec.steps {
                        if rng.random_bool(p) {
                            spikes.set(c, t, 1);
                        }
                    }
                }
                EventTensor { spikes, label }
            })
            .collect()
    };
    let train = make(spec.train_per_class);
    let test = make(spec.test_per_class);
    Ok(Dataset {
        num_channels: spec.channels,
        steps: spec.steps,
        label_names: (0..spec.num_classes).map(|c| format!("class{c}")).collect(),
        train,
        test,
    })
}
