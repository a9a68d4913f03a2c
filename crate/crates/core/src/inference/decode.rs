use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learning::softmax_importance;
use crate::par::Execution;
use crate::rng::{self, Domain, StreamRng};
use crate::snn::{CompartmentState, Network, ParameterSet, SpikeMatrix};

/// Streams for the `k_infer` inference compartments of example `example`.
pub fn inference_streams(seed: u64, example: usize, k_infer: usize) -> Vec<StreamRng> {
    (0..k_infer)
        .map(|k| rng::stream(seed, Domain::Inference, (example * k_infer + k) as u64))
        .collect()
}

/// Runs one compartment per stream with every neuron sampled, returning the
/// visible spike raster (`|X| × T`) of each.
pub fn free_run(
    network: &Network,
    params: &ParameterSet,
    exogeneous: &SpikeMatrix,
    streams: Vec<StreamRng>,
    exec: Execution,
) -> Result<Vec<SpikeMatrix>> {
    network.check_params(params)?;
    if exogeneous.rows() != network.num_exogeneous() {
        return Err(Error::contract(format!(
            "input has {} channels, network has {}",
            exogeneous.rows(),
            network.num_exogeneous()
        )));
    }
    let mut states: Vec<CompartmentState> = streams
        .into_iter()
        .enumerate()
        .map(|(k, r)| CompartmentState::new(network, k, r))
        .collect();
    let steps = exogeneous.cols();
    let x = network.num_visible();
    let mut records: Vec<SpikeMatrix> = vec![SpikeMatrix::zeros(x, steps); states.len()];
    exec.for_each_pair_mut(&mut states, &mut records, |_, state, record| {
        let mut input = vec![0u8; exogeneous.rows()];
        for t in 0..steps {
            exogeneous.column_into(t, &mut input);
            state
                .evaluate(network, params, None)
                .expect("dimensions checked");
            for i in 0..x {
                record.set(i, t, state.spikes()[i]);
            }
            state.advance(network, &input).expect("dimensions checked");
        }
    });
    Ok(records)
}

/// Outcome of majority decoding over `K^I` compartments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteRecord {
    /// `ĉ^k`: class with the most output spikes in compartment `k`.
    pub per_compartment: Vec<usize>,
    /// `z_c`: number of compartments voting for class `c`.
    pub votes: Vec<usize>,
    /// `ĉ = argmax_c z_c`.
    pub decision: usize,
    /// `p̂ = SoftMax(z)[ĉ]`.
    pub confidence: f64,
}

fn argmax_lowest<I: IntoIterator<Item = usize>>(values: I) -> usize {
    let mut best = 0;
    let mut best_value = None;
    for (i, v) in values.into_iter().enumerate() {
        if best_value.is_none_or(|b| v > b) {
            best = i;
            best_value = Some(v);
        }
    }
    best
}

/// Per-compartment argmax of spike counts, then plurality vote. Both
/// argmaxes break ties toward the lowest class index.
pub fn majority_decode(records: &[SpikeMatrix]) -> Result<VoteRecord> {
    let first = records
        .first()
        .ok_or_else(|| Error::contract("majority decoding needs at least one compartment"))?;
    let classes = first.rows();
    if classes == 0 {
        return Err(Error::contract("records have no output neurons"));
    }
    if records
        .iter()
        .any(|r| r.rows() != classes || r.cols() != first.cols())
    {
        return Err(Error::contract("records differ in shape"));
    }
    let per_compartment: Vec<usize> = records
        .iter()
        .map(|r| argmax_lowest((0..classes).map(|c| r.row_sum(c))))
        .collect();
    let mut votes = vec![0usize; classes];
    for &c in &per_compartment {
        votes[c] += 1;
    }
    let decision = argmax_lowest(votes.iter().copied());
    let z: Vec<f64> = votes.iter().map(|&v| v as f64).collect();
    let confidence = softmax_importance(&z)[decision];
    Ok(VoteRecord {
        per_compartment,
        votes,
        decision,
        confidence,
    })
}
