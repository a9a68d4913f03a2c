use crate::error::{Error, Result};
use crate::par::Execution;
use crate::rng::{self, Domain, StreamRng};
use crate::snn::{CompartmentState, Network, ParameterSet, SpikeMatrix};

/// Streams for the `n` hidden realizations of example `example`.
pub fn likelihood_streams(seed: u64, example: usize, n: usize) -> Vec<StreamRng> {
    (0..n)
        .map(|r| rng::stream(seed, Domain::Likelihood, (example * n + r) as u64))
        .collect()
}

/// `log Σ exp(x)`; `-∞` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}

/// Estimates `log p(x_{≤T})` for the visible target by sampling one hidden
/// trajectory per stream (visible neurons clamped to the target) and
/// averaging the visible likelihoods in log space:
/// `logsumexp_n(L^n) − log N`.
pub fn estimate_log_likelihood(
    network: &Network,
    params: &ParameterSet,
    exogeneous: &SpikeMatrix,
    target: &SpikeMatrix,
    streams: Vec<StreamRng>,
    exec: Execution,
) -> Result<f64> {
    network.check_params(params)?;
    if streams.is_empty() {
        return Err(Error::contract("at least one realization is required"));
    }
    if exogeneous.rows() != network.num_exogeneous() {
        return Err(Error::contract(format!(
            "input has {} channels, network has {}",
            exogeneous.rows(),
            network.num_exogeneous()
        )));
    }
    if target.rows() != network.num_visible() || target.cols() != exogeneous.cols() {
        return Err(Error::contract(format!(
            "target is {}x{}, expected {}x{}",
            target.rows(),
            target.cols(),
            network.num_visible(),
            exogeneous.cols()
        )));
    }
    let n = streams.len();
    let mut states: Vec<CompartmentState> = streams
        .into_iter()
        .enumerate()
        .map(|(k, r)| CompartmentState::new(network, k, r))
        .collect();
    let mut log_probs = vec![0.0f64; n];
    let x = network.num_visible();
    exec.for_each_pair_mut(&mut states, &mut log_probs, |_, state, acc| {
        let mut input = vec![0u8; exogeneous.rows()];
        let mut clamp = vec![0u8; x];
        for t in 0..exogeneous.cols() {
            target.column_into(t, &mut clamp);
            exogeneous.column_into(t, &mut input);
            state
                .evaluate(network, params, Some(&clamp))
                .expect("dimensions checked");
            *acc -= state.losses()[..x].iter().sum::<f64>();
            state.advance(network, &input).expect("dimensions checked");
        }
    });
    Ok(log_sum_exp(&log_probs) - (n as f64).ln())
}
