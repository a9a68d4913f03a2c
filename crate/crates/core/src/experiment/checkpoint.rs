use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::snn::ParameterSet;

const FORMAT: &str = "mcsnn-checkpoint-v1";

/// Saved parameters plus the number of training examples behind them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub examples_seen: u64,
    pub params: ParameterSet,
}

impl Checkpoint {
    pub fn new(params: ParameterSet, examples_seen: u64) -> Self {
        Self {
            format: FORMAT.to_string(),
            examples_seen,
            params,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self).map_err(|e| Error::data(path, e.to_string()))?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ck: Self = serde_json::from_str(&text).map_err(|e| Error::data(path, e.to_string()))?;
        if ck.format != FORMAT {
            return Err(Error::data(
                path,
                format!("unknown checkpoint format {}", ck.format),
            ));
        }
        if ck.params.len() != ck.params.layout().len() {
            return Err(Error::data(
                path,
                format!(
                    "{} values for a layout of {} parameters",
                    ck.params.len(),
                    ck.params.layout().len()
                ),
            ));
        }
        ck.params
            .check_finite()
            .map_err(|e| Error::data(path, e.to_string()))?;
        Ok(ck)
    }
}
