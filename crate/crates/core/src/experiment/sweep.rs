use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::train::train;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::par::Execution;

/// One line of the K sweep table, taken from the selected checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: usize,
    pub mean_log_likelihood: f64,
    pub accuracy: f64,
    pub ece: f64,
    pub unicast_per_step: u64,
    pub broadcast_per_step: u64,
    pub hidden_spikes_per_step: f64,
}

/// Trains and evaluates once per distinct `K` (ascending), using `K`
/// compartments for both training and inference.
pub fn sweep_k(
    cfg: &ExperimentConfig,
    dataset: &Dataset,
    k_values: &[usize],
    out: Option<&Path>,
    exec: Execution,
) -> Result<Vec<SweepRow>> {
    let mut ks: Vec<usize> = k_values.to_vec();
    ks.sort_unstable();
    ks.dedup();
    if ks.is_empty() {
        return Err(Error::config("sweep needs at least one K"));
    }
    if ks[0] == 0 {
        return Err(Error::config("K must be at least 1"));
    }
    let visible = cfg.network.num_visible as u64;
    let hidden = cfg.network.num_hidden as u64;
    let mut rows = Vec::with_capacity(ks.len());
    for k in ks {
        let mut run_cfg = cfg.clone();
        run_cfg.network.num_compartments = k;
        run_cfg.inference.k_infer = k;
        let sub = out.map(|d| d.join(format!("k{k:03}")));
        let outcome = train(&run_cfg, dataset, sub.as_deref(), exec)?;
        let s = &outcome.summary;
        let closed_form = k as u64 * (visible + hidden);
        if s.total_steps > 0 && s.broadcast_total != s.total_steps * closed_form {
            return Err(Error::contract(format!(
                "broadcast load {} over {} steps disagrees with K(|X|+|H|) = {closed_form}",
                s.broadcast_total, s.total_steps
            )));
        }
        let best = outcome.best.clone().unwrap_or(super::eval::EvalSummary {
            examples_seen: s.examples_seen,
            num_examples: 0,
            k_infer: k,
            ll_realizations: run_cfg.inference.ll_realizations,
            accuracy: f64::NAN,
            ece: f64::NAN,
            mean_log_likelihood: f64::NAN,
        });
        rows.push(SweepRow {
            k,
            mean_log_likelihood: best.mean_log_likelihood,
            accuracy: best.accuracy,
            ece: best.ece,
            unicast_per_step: k as u64 * visible,
            broadcast_per_step: closed_form,
            hidden_spikes_per_step: s.hidden_spikes_per_step,
        });
    }
    if let Some(dir) = out {
        write_sweep_csv(&dir.join("sweep.csv"), &rows)?;
    }
    Ok(rows)
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::data(path, e.to_string()))?;
    for r in rows {
        w.serialize(r)
            .map_err(|e| Error::data(path, e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
