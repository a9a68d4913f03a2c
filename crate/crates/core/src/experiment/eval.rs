use serde::{Deserialize, Serialize};

use super::config::InferenceSpec;
use crate::data::{encode_targets, EventTensor};
use crate::error::Result;
use crate::inference::{
    estimate_log_likelihood, expected_calibration_error, free_run, inference_streams,
    likelihood_streams, majority_decode, CalibrationReport,
};
use crate::par::Execution;
use crate::snn::{Network, ParameterSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleRecord {
    pub index: usize,
    pub true_class: usize,
    pub decision: usize,
    pub votes: Vec<usize>,
    pub confidence: f64,
    pub correct: bool,
    pub log_likelihood: f64,
}

/// Test-set summary. `mean_log_likelihood` is the per-example mean of the
/// estimated log-likelihood of the desired output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub examples_seen: u64,
    pub num_examples: usize,
    pub k_infer: usize,
    pub ll_realizations: usize,
    pub accuracy: f64,
    pub ece: f64,
    pub mean_log_likelihood: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub summary: EvalSummary,
    pub calibration: CalibrationReport,
    pub examples: Vec<ExampleRecord>,
}

/// Decodes, scores and calibrates every example. Example `n` always uses
/// the inference and likelihood streams indexed by `n`, so reports depend
/// only on `(params, examples, spec, seed)`.
pub fn evaluate(
    network: &Network,
    params: &ParameterSet,
    examples: &[EventTensor],
    spec: &InferenceSpec,
    seed: u64,
    examples_seen: u64,
    exec: Execution,
) -> Result<EvalReport> {
    network.check_params(params)?;
    let count = spec
        .max_test_examples
        .map_or(examples.len(), |m| m.min(examples.len()));
    let inner = Execution::Sequential;
    let results: Vec<Result<ExampleRecord>> = exec.map_range(count, |n| {
        let ex = &examples[n];
        let records = free_run(
            network,
            params,
            &ex.spikes,
            inference_streams(seed, n, spec.k_infer),
            inner,
        )?;
        let vote = majority_decode(&records)?;
        let target = encode_targets(ex.label, network.num_visible(), ex.steps())?;
        let log_likelihood = estimate_log_likelihood(
            network,
            params,
            &ex.spikes,
            &target,
            likelihood_streams(seed, n, spec.ll_realizations),
            inner,
        )?;
        Ok(ExampleRecord {
            index: n,
            true_class: ex.label,
            decision: vote.decision,
            correct: vote.decision == ex.label,
            votes: vote.votes,
            confidence: vote.confidence,
            log_likelihood,
        })
    });
    let records: Vec<ExampleRecord> = results.into_iter().collect::<Result<_>>()?;
    let pairs: Vec<(f64, bool)> = records.iter().map(|r| (r.confidence, r.correct)).collect();
    let calibration = expected_calibration_error(&pairs, spec.ece_bins)?;
    let n = records.len().max(1) as f64;
    let summary = EvalSummary {
        examples_seen,
        num_examples: records.len(),
        k_infer: spec.k_infer,
        ll_realizations: spec.ll_realizations,
        accuracy: records.iter().filter(|r| r.correct).count() as f64 / n,
        ece: calibration.ece,
        mean_log_likelihood: records.iter().map(|r| r.log_likelihood).sum::<f64>() / n,
    };
    Ok(EvalReport {
        summary,
        calibration,
        examples: records,
    })
}
