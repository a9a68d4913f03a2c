//! Brute-force reference computations for integration tests.
//!
//! Everything here recomputes traces and potentials from the full spike
//! record by direct convolution, without touching the incremental state kept
//! by `CompartmentState`.
#![allow(dead_code, clippy::needless_range_loop)]

use mcsnn::snn::{bce_loss, BasisSpec, InitSpec, Network, NetworkConfig, ParameterSet, Topology};

/// `Σ_{δ=0}^{τ−1} kernel[δ] · s[t − δ]`, with spikes before time 0 taken as 0.
pub fn naive_trace(spikes: &[u8], kernel: &[f64], t: isize) -> f64 {
    let mut acc = 0.0;
    for (d, k) in kernel.iter().enumerate() {
        let idx = t - d as isize;
        if idx >= 0 && (idx as usize) < spikes.len() && spikes[idx as usize] == 1 {
            acc += k;
        }
    }
    acc
}

/// Membrane potential of neuron `i` at step `t` from the record of all
/// channels (`channels[c][t]`): traces of step `t − 1`.
pub fn naive_potential(
    net: &Network,
    params: &ParameterSet,
    channels: &[Vec<u8>],
    i: usize,
    t: usize,
) -> f64 {
    let basis = net.basis();
    let b_count = basis.num_basis();
    let prev = t as isize - 1;
    let w = params.synaptic(i);
    let mut u = params.bias(i);
    for (slot, &j) in net.layout().presynaptic(i).iter().enumerate() {
        for b in 0..b_count {
            u += w[slot * b_count + b] * naive_trace(&channels[j], basis.synaptic(b), prev);
        }
    }
    let own = &channels[net.neuron_channel(i)];
    u + params.self_weight(i) * naive_trace(own, basis.somatic(), prev)
}

/// Stacks exogeneous rows and neuron rows into one channel record.
pub fn channel_record(exo: &[Vec<u8>], neurons: &[Vec<u8>]) -> Vec<Vec<u8>> {
    exo.iter().chain(neurons).cloned().collect()
}

/// `Σ_{t'≤t} γ^{t−t'} Σ_{i} ℓ(s_{i,t'}, σ(u_{i,t'}))` over the listed neurons.
pub fn naive_discounted_loss(
    net: &Network,
    params: &ParameterSet,
    channels: &[Vec<u8>],
    neurons: &[usize],
    t_last: usize,
    gamma: f64,
) -> f64 {
    let mut total = 0.0;
    for t in 0..=t_last {
        let discount = gamma.powi((t_last - t) as i32);
        for &i in neurons {
            let u = naive_potential(net, params, channels, i, t);
            let s = channels[net.neuron_channel(i)][t];
            total += discount * bce_loss(s, u);
        }
    }
    total
}

/// Exact `log p(x_{≤T})` by summing `p(x, h)` over every hidden trajectory.
/// Only practical for `|H|·T` up to about 20.
pub fn exact_log_marginal(
    net: &Network,
    params: &ParameterSet,
    exo: &[Vec<u8>],
    visible: &[Vec<u8>],
) -> f64 {
    let steps = visible[0].len();
    let h = net.num_hidden();
    let bits = h * steps;
    assert!(bits <= 24);
    let mut terms = Vec::with_capacity(1 << bits);
    for code in 0u64..(1 << bits) {
        let hidden: Vec<Vec<u8>> = (0..h)
            .map(|n| {
                (0..steps)
                    .map(|t| ((code >> (n * steps + t)) & 1) as u8)
                    .collect()
            })
            .collect();
        let neurons: Vec<Vec<u8>> = visible.iter().chain(&hidden).cloned().collect();
        let channels = channel_record(exo, &neurons);
        let mut logp = 0.0;
        for t in 0..steps {
            for i in 0..net.num_neurons() {
                let u = naive_potential(net, params, &channels, i, t);
                logp -= bce_loss(neurons[i][t], u);
            }
        }
        terms.push(logp);
    }
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + terms.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

pub fn config(
    num_exogeneous: usize,
    num_visible: usize,
    num_hidden: usize,
    topology: Topology,
    k: usize,
) -> NetworkConfig {
    NetworkConfig {
        num_exogeneous,
        num_visible,
        num_hidden,
        topology,
        num_compartments: k,
        basis: BasisSpec::RaisedCosine {
            num_basis: 3,
            duration: 10,
        },
        discount_gamma: 0.9,
        kappa: 0.9,
        learning_rate_eta: 0.001,
        seed: 2024,
        init: InitSpec::default(),
    }
}

/// Every neuron receives every exogeneous input and every other neuron.
pub fn all_to_all(num_exogeneous: usize, num_neurons: usize) -> Topology {
    let channels = num_exogeneous + num_neurons;
    Topology::Custom {
        presynaptic: (0..num_neurons)
            .map(|i| (0..channels).filter(|&c| c != num_exogeneous + i).collect())
            .collect(),
    }
}

/// Deterministic pseudo-random binary rows.
pub fn random_rows(rows: usize, cols: usize, density: f64, seed: u64) -> Vec<Vec<u8>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..rows)
        .map(|_| (0..cols).map(|_| rng.random_bool(density) as u8).collect())
        .collect()
}

/// Parameters uniform on `±scale`.
pub fn random_params(net: &Network, scale: f64, seed: u64) -> ParameterSet {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let values = (0..net.layout().len())
        .map(|_| rng.random_range(-scale..scale))
        .collect();
    ParameterSet::from_values(net.layout().clone(), values).unwrap()
}

pub fn column(rows: &[Vec<u8>], t: usize) -> Vec<u8> {
    rows.iter().map(|r| r[t]).collect()
}
