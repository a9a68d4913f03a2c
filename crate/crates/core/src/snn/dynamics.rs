use rand::Rng;

use super::network::Network;
use super::params::ParameterSet;
use super::state::CompartmentState;
use crate::error::{Error, Result};
use crate::par::Execution;

/// Logistic function, evaluated without overflow for any finite input.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `softplus(u) = log(1 + e^u)` in log-sum-exp form.
#[inline]
fn softplus(u: f64) -> f64 {
    u.max(0.0) + (-u.abs()).exp().ln_1p()
}

/// Binary cross-entropy `−s·log σ(u) − (1−s)·log(1−σ(u))`, written as
/// `softplus(u) − s·u` so it never takes the log of a rounded probability.
#[inline]
pub fn bce_loss(spike: u8, u: f64) -> f64 {
    softplus(u) - if spike != 0 { u } else { 0.0 }
}

/// `log p(s | u)`.
#[inline]
pub fn log_prob(spike: u8, u: f64) -> f64 {
    -bce_loss(spike, u)
}

/// Bernoulli(σ(u)) draw; consumes exactly one uniform from `rng`.
#[inline]
pub fn sample_spike<R: Rng + ?Sized>(u: f64, rng: &mut R) -> u8 {
    let draw: f64 = rng.random();
    u8::from(draw < sigmoid(u))
}

/// `u_i = Σ_{j∈P_i} Σ_b w_{j,i,b}·→s_{j,b} + w_i·←s_i + ϑ_i`, using the traces
/// currently held by `state` (those of step `t − 1`).
pub fn membrane_potential(params: &ParameterSet, state: &CompartmentState, neuron: usize) -> f64 {
    let layout = params.layout();
    let b_count = layout.num_basis();
    let traces = state.synaptic_traces();
    let weights = params.synaptic(neuron);
    let mut u = 0.0;
    for (slot, &j) in layout.presynaptic(neuron).iter().enumerate() {
        let w = &weights[slot * b_count..(slot + 1) * b_count];
        let tr = &traces[j * b_count..(j + 1) * b_count];
        for (a, b) in w.iter().zip(tr) {
            u += a * b;
        }
    }
    u + params.self_weight(neuron) * state.somatic_traces()[neuron] + params.bias(neuron)
}

/// Advances all compartments by one step.
///
/// Each compartment computes its potentials, samples its hidden neurons (and
/// its visible neurons unless `clamp_visible` is given), records the losses,
/// and then folds the step into its traces. Results are read back from each
/// state's [`spikes`](CompartmentState::spikes) and
/// [`losses`](CompartmentState::losses).
pub fn step_network(
    network: &Network,
    params: &ParameterSet,
    states: &mut [CompartmentState],
    exogeneous: &[u8],
    clamp_visible: Option<&[u8]>,
    exec: Execution,
) -> Result<()> {
    if exogeneous.len() != network.num_exogeneous() {
        return Err(Error::contract(format!(
            "exogeneous vector has {} channels, network has {}",
            exogeneous.len(),
            network.num_exogeneous()
        )));
    }
    if let Some(c) = clamp_visible {
        if c.len() != network.num_visible() {
            return Err(Error::contract(format!(
                "clamp vector has {} entries, network has {} visible neurons",
                c.len(),
                network.num_visible()
            )));
        }
    }
    exec.for_each_mut(states, |_, state| {
        // Dimensions were checked above, so neither call can fail.
        state
            .evaluate(network, params, clamp_visible)
            .and_then(|_| state.advance(network, exogeneous))
            .expect("dimensions checked");
    });
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::compartment_stream;
    use crate::snn::{BasisSpec, InitSpec, NetworkConfig, Topology};
    use rand::SeedableRng;

    #[test]
    fn sigmoid_values() {
        assert_eq!(sigmoid(0.0), 0.5);
        for x in [-3.0, 1.7, 42.0] {
            assert!((sigmoid(x) - (1.0 - sigmoid(-x))).abs() < 1e-15);
        }
        // 1/(1+e^-2) to 20 digits: 0.88079707797788244406
        assert!((sigmoid(2.0) - 0.880_797_077_977_882_4).abs() < 1e-15);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
        assert!(sigmoid(-30.0) > 0.0 && sigmoid(30.0) < 1.0);
    }

    #[test]
    fn bce_values() {
        let ln2 = std::f64::consts::LN_2;
        assert!((bce_loss(1, 0.0) - ln2).abs() < 1e-15);
        assert!((bce_loss(0, 0.0) - ln2).abs() < 1e-15);
        // −log σ(2) = log(1 + e^−2) = 0.12692801104297249...
        assert!((bce_loss(1, 2.0) - 0.126_928_011_042_972_5).abs() < 1e-15);
        assert!(bce_loss(1, -1000.0).is_finite());
        assert!(bce_loss(0, 1000.0).is_finite());
        assert!(bce_loss(1, 1000.0) >= 0.0);
    }

    #[test]
    fn exp_neg_loss_is_probability() {
        for i in 0..=600 {
            let u = -30.0 + 0.1 * i as f64;
            let p1 = sigmoid(u);
            assert!(((-bce_loss(1, u)).exp() - p1).abs() <= 1e-12);
            assert!(((-bce_loss(0, u)).exp() - (1.0 - p1)).abs() <= 1e-12);
        }
    }

    #[test]
    fn saturated_sampling() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        for _ in 0..1000 {
            assert_eq!(sample_spike(1000.0, &mut rng), 1);
            assert_eq!(sample_spike(-1000.0, &mut rng), 0);
        }
    }

    #[test]
    fn fair_coin_rate() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let ones: usize = (0..n).map(|_| sample_spike(0.0, &mut rng) as usize).sum();
        let mean = ones as f64 / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    fn single_neuron(num_hidden: usize, num_visible: usize, k: usize) -> Network {
        Network::new(NetworkConfig {
            num_exogeneous: 1,
            num_visible,
            num_hidden,
            topology: Topology::Custom {
                presynaptic: vec![vec![]; num_visible + num_hidden],
            },
            num_compartments: k,
            basis: BasisSpec::default(),
            discount_gamma: 0.9,
            kappa: 0.9,
            learning_rate_eta: 0.001,
            seed: 5,
            init: InitSpec::default(),
        })
        .unwrap()
    }

    #[test]
    fn clamp_length_is_checked() {
        let net = single_neuron(1, 1, 1);
        let params = ParameterSet::zeros(net.layout().clone());
        let mut states = vec![CompartmentState::new(&net, 0, compartment_stream(1, 0))];
        let err = step_network(
            &net,
            &params,
            &mut states,
            &[0],
            Some(&[1, 0]),
            Execution::Sequential,
        );
        assert!(matches!(err, Err(Error::Contract(_))));
        let err = step_network(
            &net,
            &params,
            &mut states,
            &[0, 0],
            None,
            Execution::Sequential,
        );
        assert!(matches!(err, Err(Error::Contract(_))));
    }

    #[test]
    fn unbiased_hidden_neuron_fires_half_the_time() {
        let net = single_neuron(1, 1, 1);
        let params = ParameterSet::zeros(net.layout().clone());
        let mut states = vec![CompartmentState::new(&net, 0, compartment_stream(77, 0))];
        let steps = 10_000;
        let mut fired = 0;
        for _ in 0..steps {
            step_network(
                &net,
                &params,
                &mut states,
                &[0],
                Some(&[0]),
                Execution::Sequential,
            )
            .unwrap();
            fired += states[0].spikes()[1] as usize;
        }
        let rate = fired as f64 / steps as f64;
        assert!((rate - 0.5).abs() < 0.02, "rate {rate}");
    }
}
