use std::fs;
use std::path::{Path, PathBuf};

use super::checkpoint::Checkpoint;
use super::config::{load_dataset, DataSource, ExperimentConfig};
use super::eval::{evaluate, EvalReport};
use super::sweep::{sweep_k, SweepRow};
use super::train::{train, TrainOutcome};
use crate::data::{
    preprocess, read_event_file, synth_task, write_tensor_file, CropRegion, Manifest, ManifestEntry,
};
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::snn::Network;

fn load_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(s) = seed {
        cfg.network.seed = s;
    }
    Ok(cfg)
}

/// `mcsnn train`.
pub fn run_train(
    config: &Path,
    seed: Option<u64>,
    out: &Path,
    exec: Execution,
) -> Result<TrainOutcome> {
    let cfg = load_config(config, seed)?;
    let ds = load_dataset(&cfg)?;
    train(&cfg, &ds, Some(out), exec)
}

/// `mcsnn eval`: writes `eval_report.json` into `out`.
pub fn run_eval(
    config: &Path,
    checkpoint: &Path,
    seed: Option<u64>,
    out: &Path,
    exec: Execution,
) -> Result<EvalReport> {
    let cfg = load_config(config, seed)?;
    let ds = load_dataset(&cfg)?;
    let network = Network::new(cfg.network.clone())?;
    let ck = Checkpoint::load(checkpoint)?;
    network.check_params(&ck.params)?;
    let report = evaluate(
        &network,
        &ck.params,
        &ds.test,
        &cfg.inference,
        cfg.network.seed,
        ck.examples_seen,
        exec,
    )?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let path = out.join("eval_report.json");
    let text =
        serde_json::to_string_pretty(&report).map_err(|e| Error::data(&path, e.to_string()))?;
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(report)
}

/// `mcsnn sweep-k`: one sub-directory per K plus `sweep.csv`.
pub fn run_sweep_k(
    config: &Path,
    k_values: &[usize],
    seed: Option<u64>,
    out: &Path,
    exec: Execution,
) -> Result<Vec<SweepRow>> {
    let cfg = load_config(config, seed)?;
    let ds = load_dataset(&cfg)?;
    sweep_k(&cfg, &ds, k_values, Some(out), exec)
}

/// `mcsnn synth-data`: materializes the config's synthetic task as tensor
/// files plus a manifest. Returns the manifest path.
pub fn run_synth_data(config: &Path, seed: Option<u64>, out: &Path) -> Result<PathBuf> {
    let cfg = ExperimentConfig::load(config)?;
    let DataSource::Synth(mut spec) = cfg.data else {
        return Err(Error::config(
            "synth-data needs a config with `data.kind = \"synth\"`",
        ));
    };
    if let Some(s) = seed {
        spec.seed = s;
    }
    let ds = synth_task(&spec)?;
    crate::data::write_dataset(out, &ds)
}

/// `mcsnn preprocess`: bins every event file listed in `input` (a manifest
/// whose entries are event streams) into tensors under `out`. Returns the
/// tensor manifest path.
pub fn run_preprocess(input: &Path, crop: CropRegion, steps: usize, out: &Path) -> Result<PathBuf> {
    let manifest = Manifest::load(input)?;
    let mut examples = Vec::with_capacity(manifest.examples.len());
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    for (n, (path, split)) in manifest.resolve(input).into_iter().enumerate() {
        let stream = read_event_file(&path)?;
        if stream.label >= manifest.label_names.len() {
            return Err(Error::data(
                &path,
                format!("label {} has no entry in label_names", stream.label),
            ));
        }
        let tensor = preprocess(&stream, crop, steps)?;
        let rel = PathBuf::from(format!("{n:06}.spk"));
        write_tensor_file(&out.join(&rel), &tensor)?;
        examples.push(ManifestEntry { path: rel, split });
    }
    let result = Manifest {
        label_names: manifest.label_names,
        num_channels: Some(crop.channels()),
        steps: Some(steps),
        examples,
    };
    let path = out.join("manifest.toml");
    result.save(&path)?;
    Ok(path)
}
