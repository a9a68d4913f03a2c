use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::eval::EvalSummary;
use crate::error::{Error, Result};
use crate::learning::StepMetrics;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Zero-based index of the training example being processed.
    pub example: u64,
    #[serde(flatten)]
    pub metrics: StepMetrics,
}

/// End-of-training totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub num_compartments: usize,
    pub examples_seen: u64,
    pub total_steps: u64,
    pub unicast_total: u64,
    pub broadcast_total: u64,
    pub unicast_per_step: u64,
    pub broadcast_per_step: u64,
    /// Hidden spikes per time step, summed over compartments.
    pub hidden_spikes_per_step: f64,
    /// Examples seen by the selected (best) checkpoint.
    pub best_examples_seen: u64,
}

/// One line of `metrics.jsonl`, tagged by its `record` field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum MetricRecord {
    Step(StepRecord),
    Eval(EvalSummary),
    Summary(TrainSummary),
}

/// Line-delimited JSON writer; each record is flushed as one line.
pub struct MetricsWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl MetricsWriter {
    /// Starts a fresh log at `path`.
    pub fn create(path: &Path) -> Result<Self> {
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            out: BufWriter::new(f),
        })
    }

    /// Continues an existing log.
    pub fn append(path: &Path) -> Result<Self> {
        let f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            out: BufWriter::new(f),
        })
    }

    pub fn write(&mut self, record: &MetricRecord) -> Result<()> {
        let line =
            serde_json::to_string(record).map_err(|e| Error::data(&self.path, e.to_string()))?;
        writeln!(self.out, "{line}").map_err(|e| Error::io(&self.path, e))
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

pub fn read_metrics_log(path: &Path) -> Result<Vec<MetricRecord>> {
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| Error::data(path, format!("line {}: {e}", n + 1)))?,
        );
    }
    Ok(out)
}
