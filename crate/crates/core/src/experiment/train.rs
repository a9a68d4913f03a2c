use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;

use super::checkpoint::Checkpoint;
use super::config::{ExperimentConfig, SelectionMetric};
use super::eval::{evaluate, EvalSummary};
use super::records::{MetricRecord, MetricsWriter, StepRecord, TrainSummary};
use crate::data::{encode_targets, Dataset};
use crate::error::{Error, Result};
use crate::learning::{train_step, LearnerState};
use crate::par::Execution;
use crate::rng::{self, compartment_stream, Domain};
use crate::snn::{CompartmentState, Network, ParameterSet};

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub network: Network,
    pub final_params: ParameterSet,
    /// Checkpoint with the best test metric; the final parameters when no
    /// evaluation ran.
    pub best_params: ParameterSet,
    pub best: Option<EvalSummary>,
    pub evaluations: Vec<EvalSummary>,
    pub summary: TrainSummary,
}

fn better(metric: SelectionMetric, candidate: &EvalSummary, incumbent: &EvalSummary) -> bool {
    match metric {
        SelectionMetric::LogLikelihood => {
            candidate.mean_log_likelihood > incumbent.mean_log_likelihood
        }
        SelectionMetric::Accuracy => candidate.accuracy > incumbent.accuracy,
    }
}

/// Online training over the training split.
///
/// Each example is a fresh sequence: compartment traces, log-weights and
/// eligibility are reset, then `train_step` runs for every time step. The
/// test split is evaluated every `eval_every` examples and after the last
/// one; the best evaluation selects the returned checkpoint. When `out` is
/// given the run writes `metrics.jsonl`, `checkpoint_final.json`,
/// `checkpoint_best.json`, `kernels.txt` and `config.toml` there.
pub fn train(
    cfg: &ExperimentConfig,
    dataset: &Dataset,
    out: Option<&Path>,
    exec: Execution,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    let network = Network::new(cfg.network.clone())?;
    let seed = cfg.network.seed;
    let k = network.num_compartments();
    let x = network.num_visible();

    let mut log = match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            let cfg_path = dir.join("config.toml");
            fs::write(&cfg_path, cfg.to_toml()?).map_err(|e| Error::io(&cfg_path, e))?;
            let kpath = dir.join("kernels.txt");
            fs::write(&kpath, network.basis().dump_text()).map_err(|e| Error::io(&kpath, e))?;
            Some(MetricsWriter::create(&dir.join("metrics.jsonl"))?)
        }
        None => None,
    };

    let mut params = network.init_params();
    let mut states: Vec<CompartmentState> = (0..k)
        .map(|c| CompartmentState::new(&network, c, compartment_stream(seed, c)))
        .collect();
    let mut learner = LearnerState::new(&network, k);

    let budget = cfg
        .training
        .max_examples
        .unwrap_or(cfg.training.epochs * dataset.train.len());
    let mut seen: u64 = 0;
    let mut hidden_spikes: u64 = 0;
    let mut evaluations: Vec<EvalSummary> = Vec::new();
    let mut best: Option<(EvalSummary, ParameterSet)> = None;

    let run_eval = |params: &ParameterSet,
                    seen: u64,
                    log: &mut Option<MetricsWriter>,
                    evaluations: &mut Vec<EvalSummary>,
                    best: &mut Option<(EvalSummary, ParameterSet)>|
     -> Result<()> {
        if dataset.test.is_empty() {
            return Ok(());
        }
        let report = evaluate(
            &network,
            params,
            &dataset.test,
            &cfg.inference,
            seed,
            seen,
            exec,
        )?;
        let s = report.summary;
        if let Some(w) = log.as_mut() {
            w.write(&MetricRecord::Eval(s.clone()))?;
            w.flush()?;
        }
        if best
            .as_ref()
            .is_none_or(|(b, _)| better(cfg.training.selection_metric, &s, b))
        {
            *best = Some((s.clone(), params.clone()));
        }
        evaluations.push(s);
        Ok(())
    };

    let steps = dataset.steps;
    let mut input = vec![0u8; network.num_exogeneous()];
    let mut target_t = vec![0u8; x];
    let mut epoch = 0u64;
    'outer: while (seen as usize) < budget {
        if dataset.train.is_empty() {
            break;
        }
        let mut order: Vec<usize> = (0..dataset.train.len()).collect();
        order.shuffle(&mut rng::stream(seed, Domain::Data, 1 + epoch));
        epoch += 1;
        for &idx in &order {
            if seen as usize >= budget {
                break 'outer;
            }
            let ex = &dataset.train[idx];
            let target = encode_targets(ex.label, x, ex.steps())?;
            for s in &mut states {
                s.reset();
            }
            learner.reset_sequence();
            for t in 0..steps {
                ex.spikes.column_into(t, &mut input);
                target.column_into(t, &mut target_t);
                let m = train_step(
                    &network,
                    &mut params,
                    &mut states,
                    &mut learner,
                    &input,
                    &target_t,
                    exec,
                )?;
                hidden_spikes += m.hidden_spikes;
                let stride = cfg.training.step_log_stride as u64;
                if stride > 0 && m.step % stride == 0 {
                    if let Some(w) = log.as_mut() {
                        w.write(&MetricRecord::Step(StepRecord {
                            example: seen,
                            metrics: m,
                        }))?;
                    }
                }
            }
            seen += 1;
            let every = cfg.training.eval_every as u64;
            if every > 0 && seen.is_multiple_of(every) {
                run_eval(&params, seen, &mut log, &mut evaluations, &mut best)?;
            }
        }
    }
    if evaluations.last().is_none_or(|e| e.examples_seen != seen) {
        run_eval(&params, seen, &mut log, &mut evaluations, &mut best)?;
    }

    let total_steps = learner.steps();
    let (best_summary, best_params) = match best {
        Some((s, p)) => (Some(s), p),
        None => (None, params.clone()),
    };
    let summary = TrainSummary {
        num_compartments: k,
        examples_seen: seen,
        total_steps,
        unicast_total: learner.comm_unicast_total(),
        broadcast_total: learner.comm_broadcast_total(),
        unicast_per_step: learner.unicast_per_step(),
        broadcast_per_step: learner.broadcast_per_step(),
        hidden_spikes_per_step: if total_steps > 0 {
            hidden_spikes as f64 / total_steps as f64
        } else {
            0.0
        },
        best_examples_seen: best_summary.as_ref().map_or(seen, |b| b.examples_seen),
    };
    if let (Some(dir), Some(w)) = (out, log.as_mut()) {
        w.write(&MetricRecord::Summary(summary.clone()))?;
        w.flush()?;
        Checkpoint::new(params.clone(), seen).save(&dir.join("checkpoint_final.json"))?;
        Checkpoint::new(best_params.clone(), summary.best_examples_seen)
            .save(&dir.join("checkpoint_best.json"))?;
    }
    Ok(TrainOutcome {
        network,
        final_params: params,
        best_params,
        best: best_summary,
        evaluations,
        summary,
    })
}
