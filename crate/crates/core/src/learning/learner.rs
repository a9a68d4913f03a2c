use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Execution;
use crate::snn::{sigmoid, CompartmentState, Network, ParameterSet};

const UPDATE_CHUNK: usize = 4096;

/// `⟨f_t⟩_c = c·⟨f_{t−1}⟩_c + f_t`.
#[inline]
pub fn temporal_average(prev: f64, f_t: f64, c: f64) -> f64 {
    c * prev + f_t
}

/// SoftMax of `v`, shifted by `max v` before exponentiation.
pub fn softmax_importance(v: &[f64]) -> Vec<f64> {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = v.iter().map(|&x| (x - m).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Learner-side state: log-weights, importance weights, per-compartment
/// eligibility traces and the communication counters of the central
/// processor.
#[derive(Debug, Clone)]
pub struct LearnerState {
    num_visible: usize,
    num_hidden: usize,
    log_weights: Vec<f64>,
    importance: Vec<f64>,
    /// `eligibility[k][p]`, laid out like the parameter vector.
    eligibility: Vec<Vec<f64>>,
    comm_unicast_total: u64,
    comm_broadcast_total: u64,
    step: u64,
}

impl LearnerState {
    pub fn new(network: &Network, num_compartments: usize) -> Self {
        assert!(num_compartments >= 1);
        let k = num_compartments;
        Self {
            num_visible: network.num_visible(),
            num_hidden: network.num_hidden(),
            log_weights: vec![0.0; k],
            importance: vec![1.0 / k as f64; k],
            eligibility: vec![vec![0.0; network.layout().len()]; k],
            comm_unicast_total: 0,
            comm_broadcast_total: 0,
            step: 0,
        }
    }

    /// Zeroes log-weights and eligibility at a sequence boundary. The
    /// communication counters and step count keep running.
    pub fn reset_sequence(&mut self) {
        let k = self.log_weights.len();
        self.log_weights.fill(0.0);
        self.importance.fill(1.0 / k as f64);
        for e in &mut self.eligibility {
            e.fill(0.0);
        }
    }

    pub fn num_compartments(&self) -> usize {
        self.log_weights.len()
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn importance(&self) -> &[f64] {
        &self.importance
    }

    pub fn eligibility(&self, k: usize) -> &[f64] {
        &self.eligibility[k]
    }

    pub fn eligibility_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.eligibility[k]
    }

    pub fn comm_unicast_total(&self) -> u64 {
        self.comm_unicast_total
    }

    pub fn comm_broadcast_total(&self) -> u64 {
        self.comm_broadcast_total
    }

    /// Reals sent neurons → CP per step: `K·|X|`.
    pub fn unicast_per_step(&self) -> u64 {
        (self.num_compartments() * self.num_visible) as u64
    }

    /// Reals sent CP → neurons per step: `K·(|X| + |H|)`.
    pub fn broadcast_per_step(&self) -> u64 {
        (self.num_compartments() * (self.num_visible + self.num_hidden)) as u64
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// `v^k ← κ·v^k − Σ_{i∈X} ℓ_i^k`, one slice of visible losses per
    /// compartment.
    pub fn update_log_weights<L: AsRef<[f64]>>(
        &mut self,
        visible_losses: &[L],
        kappa: f64,
    ) -> Result<()> {
        if visible_losses.len() != self.num_compartments() {
            return Err(Error::contract(format!(
                "{} loss vectors for {} compartments",
                visible_losses.len(),
                self.num_compartments()
            )));
        }
        for (v, losses) in self.log_weights.iter_mut().zip(visible_losses) {
            let losses = losses.as_ref();
            if losses.len() != self.num_visible {
                return Err(Error::contract(format!(
                    "{} visible losses, network has {} visible neurons",
                    losses.len(),
                    self.num_visible
                )));
            }
            let f: f64 = -losses.iter().sum::<f64>();
            *v = temporal_average(*v, f, kappa);
        }
        self.comm_unicast_total += self.unicast_per_step();
        Ok(())
    }

    /// Recomputes the importance weights and accounts for their broadcast.
    pub fn refresh_importance(&mut self) {
        self.importance = softmax_importance(&self.log_weights);
        self.comm_broadcast_total += self.broadcast_per_step();
    }

    /// Updates every compartment's eligibility from its state after
    /// [`CompartmentState::evaluate`] and before
    /// [`CompartmentState::advance`].
    pub fn update_eligibility(
        &mut self,
        params: &ParameterSet,
        states: &[CompartmentState],
        gamma: f64,
        exec: Execution,
    ) -> Result<()> {
        if states.len() != self.num_compartments() {
            return Err(Error::contract(format!(
                "{} states for {} compartments",
                states.len(),
                self.num_compartments()
            )));
        }
        exec.for_each_mut(&mut self.eligibility, |k, e| {
            update_eligibility(e, params, &states[k], gamma)
        });
        Ok(())
    }
}

/// One compartment's eligibility step:
/// `e ← γ·e + (s_i − σ(u_i)) · x_p`, where `x_p` is the pre-synaptic trace
/// for a synaptic weight, the somatic trace for the self-memory weight and 1
/// for the bias. Reads `s`, `u` and the step-`t−1` traces from `state`.
pub fn update_eligibility(
    eligibility: &mut [f64],
    params: &ParameterSet,
    state: &CompartmentState,
    gamma: f64,
) {
    let layout = params.layout();
    debug_assert_eq!(eligibility.len(), layout.len());
    let b_count = layout.num_basis();
    let traces = state.synaptic_traces();
    for i in 0..layout.num_neurons() {
        let err = state.spikes()[i] as f64 - sigmoid(state.potentials()[i]);
        let block = &mut eligibility[layout.block(i)];
        let (syn, tail) = block.split_at_mut(block.len() - 2);
        for (slot, &j) in layout.presynaptic(i).iter().enumerate() {
            let tr = &traces[j * b_count..(j + 1) * b_count];
            let e = &mut syn[slot * b_count..(slot + 1) * b_count];
            for (ev, &x) in e.iter_mut().zip(tr) {
                *ev = gamma * *ev + err * x;
            }
        }
        tail[0] = gamma * tail[0] + err * state.somatic_traces()[i];
        tail[1] = gamma * tail[1] + err;
    }
}

/// `θ_p ← θ_p + η·Σ_k σ_SM^k · e_p^k`, once on the shared parameters.
/// Returns the L2 norm of the applied change.
pub fn apply_update(
    params: &mut ParameterSet,
    learner: &LearnerState,
    eta: f64,
    exec: Execution,
) -> Result<f64> {
    let importance = learner.importance();
    let elig = &learner.eligibility;
    let partial = exec.map_chunks_mut(params.values_mut(), UPDATE_CHUNK, |offset, chunk| {
        let mut sq = 0.0;
        for (n, theta) in chunk.iter_mut().enumerate() {
            let p = offset + n;
            let mut g = importance[0] * elig[0][p];
            for k in 1..importance.len() {
                g += importance[k] * elig[k][p];
            }
            let delta = eta * g;
            *theta += delta;
            sq += delta * delta;
        }
        sq
    });
    params.check_finite()?;
    Ok(partial.iter().sum::<f64>().sqrt())
}

/// Per-step training diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepMetrics {
    pub step: u64,
    /// `Σ_{i∈X} ℓ(x_i, σ(u_i^k))` per compartment.
    pub compartment_losses: Vec<f64>,
    pub importance: Vec<f64>,
    /// Entropy (nats) of the importance vector.
    pub importance_entropy: f64,
    pub unicast_total: u64,
    pub broadcast_total: u64,
    pub update_norm: f64,
    /// Hidden spikes emitted this step, summed over compartments.
    pub hidden_spikes: u64,
}

/// One online training step at time `t`: clamp the visible neurons to `x_t`,
/// sample hidden neurons in every compartment, update eligibility, fold the
/// visible losses into the log-weights, broadcast importance weights and
/// apply the shared update.
pub fn train_step(
    network: &Network,
    params: &mut ParameterSet,
    states: &mut [CompartmentState],
    learner: &mut LearnerState,
    exogeneous: &[u8],
    target_visible: &[u8],
    exec: Execution,
) -> Result<StepMetrics> {
    if exogeneous.len() != network.num_exogeneous() {
        return Err(Error::contract(format!(
            "exogeneous vector has {} channels, network has {}",
            exogeneous.len(),
            network.num_exogeneous()
        )));
    }
    if target_visible.len() != network.num_visible() {
        return Err(Error::contract(format!(
            "target vector has {} entries, network has {} visible neurons",
            target_visible.len(),
            network.num_visible()
        )));
    }
    if states.len() != learner.num_compartments() {
        return Err(Error::contract(format!(
            "{} states for {} compartments",
            states.len(),
            learner.num_compartments()
        )));
    }
    let cfg = network.config();
    let gamma = cfg.discount_gamma;
    {
        let params: &ParameterSet = params;
        exec.for_each_pair_mut(states, &mut learner.eligibility, |_, state, elig| {
            state
                .evaluate(network, params, Some(target_visible))
                .expect("dimensions checked");
            update_eligibility(elig, params, state, gamma);
            state
                .advance(network, exogeneous)
                .expect("dimensions checked");
        });
    }

    let x = network.num_visible();
    let visible: Vec<&[f64]> = states.iter().map(|s| &s.losses()[..x]).collect();
    learner.update_log_weights(&visible, cfg.kappa)?;
    learner.refresh_importance();
    let update_norm = apply_update(params, learner, cfg.learning_rate_eta, exec)?;
    learner.step += 1;

    let compartment_losses = visible.iter().map(|l| l.iter().sum()).collect();
    let hidden_spikes = states
        .iter()
        .map(|s| s.spikes()[x..].iter().map(|&v| v as u64).sum::<u64>())
        .sum();
    let importance_entropy = 0.0
        - learner
            .importance
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.ln())
            .sum::<f64>();
    Ok(StepMetrics {
        step: learner.step,
        compartment_losses,
        importance: learner.importance.clone(),
        importance_entropy,
        unicast_total: learner.comm_unicast_total,
        broadcast_total: learner.comm_broadcast_total,
        update_norm,
        hidden_spikes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::compartment_stream;
    use crate::snn::{BasisSpec, InitSpec, NetworkConfig, Topology};
    use proptest::prelude::*;

    fn network(num_exogeneous: usize, num_visible: usize, num_hidden: usize, k: usize) -> Network {
        Network::new(NetworkConfig {
            num_exogeneous,
            num_visible,
            num_hidden,
            topology: Topology::default(),
            num_compartments: k,
            basis: BasisSpec::default(),
            discount_gamma: 0.9,
            kappa: 0.9,
            learning_rate_eta: 0.05,
            seed: 21,
            init: InitSpec::default(),
        })
        .unwrap()
    }

    fn states(net: &Network, seed: u64) -> Vec<CompartmentState> {
        (0..net.num_compartments())
            .map(|k| CompartmentState::new(net, k, compartment_stream(seed, k)))
            .collect()
    }

    #[test]
    fn temporal_average_recursion() {
        assert_eq!(temporal_average(0.0, 1.0, 0.9), 1.0);
        assert_eq!(temporal_average(1.0, 1.0, 0.9), 1.9);
        let mut acc = 0.0;
        for t in 1..=200 {
            acc = temporal_average(acc, 1.0, 0.9);
            let closed = 10.0 * (1.0 - 0.9f64.powi(t));
            assert!((acc - closed).abs() < 1e-12);
        }
    }

    #[test]
    fn softmax_closed_forms() {
        assert_eq!(softmax_importance(&[2.5; 4]), vec![0.25; 4]);
        let p = softmax_importance(&[0.0, 3.0f64.ln()]);
        assert!((p[0] - 0.25).abs() < 1e-15 && (p[1] - 0.75).abs() < 1e-15);
        assert_eq!(softmax_importance(&[-1234.5]), vec![1.0]);
        let p = softmax_importance(&[-1e6, 0.0]);
        assert_eq!(p, vec![0.0, 1.0]);
    }

    proptest! {
        #[test]
        fn softmax_normalized_and_shift_invariant(
            v in prop::collection::vec(-200.0f64..200.0, 1..16),
            c in -50.0f64..50.0,
        ) {
            let p = softmax_importance(&v);
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(p.iter().all(|&x| x >= 0.0));
            let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
            let q = softmax_importance(&shifted);
            for (a, b) in p.iter().zip(&q) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn softmax_monotone(v in prop::collection::vec(-5.0f64..5.0, 2..8), k in 0usize..8, bump in 0.01f64..3.0) {
            let k = k % v.len();
            let before = softmax_importance(&v)[k];
            let mut w = v.clone();
            w[k] += bump;
            prop_assert!(softmax_importance(&w)[k] > before);
        }
    }

    #[test]
    fn single_compartment_importance_is_one() {
        let net = network(2, 2, 1, 1);
        let mut learner = LearnerState::new(&net, 1);
        learner.update_log_weights(&[[3.0, 7.5]], 0.9).unwrap();
        learner.refresh_importance();
        assert_eq!(learner.importance(), &[1.0]);
    }

    #[test]
    fn identical_losses_give_identical_log_weights() {
        let net = network(2, 3, 1, 4);
        let mut learner = LearnerState::new(&net, 4);
        for _ in 0..5 {
            learner
                .update_log_weights(&[[0.1, 0.2, 0.3]; 4], 0.9)
                .unwrap();
        }
        let v = learner.log_weights();
        assert!(v.iter().all(|&x| x == v[0]));
    }

    #[test]
    fn scripted_log_weights_match_unrolled_sum() {
        let net = network(1, 2, 1, 3);
        let mut learner = LearnerState::new(&net, 3);
        let table: [[[f64; 2]; 3]; 5] = [
            [[0.1, 0.4], [1.2, 0.0], [0.3, 0.3]],
            [[0.7, 0.2], [0.05, 2.0], [0.9, 0.1]],
            [[0.0, 0.0], [0.6, 0.6], [1.5, 0.2]],
            [[0.3, 1.1], [0.2, 0.2], [0.4, 0.8]],
            [[2.2, 0.1], [0.9, 0.3], [0.0, 0.7]],
        ];
        for row in &table {
            learner.update_log_weights(row, 0.9).unwrap();
        }
        for (k, v) in learner.log_weights().iter().enumerate() {
            let expected: f64 = (0..5)
                .map(|s| -(table[s][k][0] + table[s][k][1]) * 0.9f64.powi(4 - s as i32))
                .sum();
            assert!((v - expected).abs() <= 1e-12);
        }
        assert_eq!(learner.comm_unicast_total(), 5 * 3 * 2);
    }

    #[test]
    fn log_weight_dimensions_checked() {
        let net = network(1, 2, 1, 2);
        let mut learner = LearnerState::new(&net, 2);
        assert!(learner.update_log_weights(&[[0.0, 0.0]], 0.9).is_err());
        assert!(learner.update_log_weights(&[[0.0], [0.0]], 0.9).is_err());
    }

    #[test]
    fn saturated_error_only_decays() {
        let net = network(1, 1, 0, 1);
        let mut params = ParameterSet::zeros(net.layout().clone());
        params.set_bias(0, 800.0);
        let mut st = states(&net, 1);
        let mut elig = vec![0.5; net.layout().len()];
        st[0].advance(&net, &[1]).unwrap();
        st[0].evaluate(&net, &params, Some(&[1])).unwrap();
        update_eligibility(&mut elig, &params, &st[0], 0.9);
        assert!(elig.iter().all(|&e| e == 0.45));
    }

    #[test]
    fn zero_trace_means_pure_decay() {
        let net = network(2, 1, 0, 1);
        let params = ParameterSet::zeros(net.layout().clone());
        let mut st = states(&net, 1);
        let mut elig = vec![1.0; net.layout().len()];
        st[0].evaluate(&net, &params, Some(&[1])).unwrap();
        update_eligibility(&mut elig, &params, &st[0], 0.9);
        // Synaptic and somatic traces are zero; only the bias sees the error.
        let n = elig.len();
        assert!(elig[..n - 1].iter().all(|&e| e == 0.9));
        assert_eq!(elig[n - 1], 0.9 + 0.5);
    }

    #[test]
    fn zero_error_decays_geometrically() {
        let net = network(2, 1, 0, 1);
        let params = ParameterSet::zeros(net.layout().clone());
        let st = states(&net, 1);
        let mut elig: Vec<f64> = (0..net.layout().len()).map(|p| p as f64 - 3.0).collect();
        let start = elig.clone();
        // Fresh state: spikes 0, potentials 0 -> error -0.5 on the bias only,
        // so check the weights that multiply a zero trace.
        for t in 1..=6 {
            update_eligibility(&mut elig, &params, &st[0], 0.7);
            for p in 0..elig.len() - 1 {
                assert!((elig[p] - start[p] * 0.7f64.powi(t)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_learning_rate_keeps_parameters() {
        let net = network(3, 2, 2, 2);
        let mut params = net.init_params();
        let before = params.clone();
        let mut learner = LearnerState::new(&net, 2);
        for k in 0..2 {
            learner.eligibility_mut(k).iter_mut().for_each(|e| *e = 0.3);
        }
        let norm = apply_update(&mut params, &learner, 0.0, Execution::Sequential).unwrap();
        assert_eq!(norm, 0.0);
        assert_eq!(params, before);
    }

    #[test]
    fn single_compartment_update_is_plain_sgd() {
        let net = network(3, 2, 2, 1);
        let mut params = net.init_params();
        let before = params.clone();
        let mut learner = LearnerState::new(&net, 1);
        let n = net.layout().len();
        for (p, e) in learner.eligibility_mut(0).iter_mut().enumerate() {
            *e = (p as f64 * 0.37).sin();
        }
        learner.refresh_importance();
        apply_update(&mut params, &learner, 0.01, Execution::Sequential).unwrap();
        for p in 0..n {
            assert_eq!(
                params.values()[p],
                before.values()[p] + 0.01 * learner.eligibility(0)[p]
            );
        }
    }

    #[test]
    fn non_finite_update_names_the_parameter() {
        let net = network(1, 1, 0, 1);
        let mut params = ParameterSet::zeros(net.layout().clone());
        let mut learner = LearnerState::new(&net, 1);
        let last = net.layout().len() - 1;
        learner.eligibility_mut(0)[last] = f64::INFINITY;
        let err = apply_update(&mut params, &learner, 1.0, Execution::Sequential).unwrap_err();
        assert!(matches!(
            err,
            Error::NonFinite {
                param: crate::snn::ParamId::Bias { neuron: 0 },
                ..
            }
        ));
    }

    fn run(
        net: &Network,
        steps: usize,
        exec: Execution,
    ) -> (ParameterSet, LearnerState, Vec<StepMetrics>) {
        let mut params = net.init_params();
        let mut st = states(net, 99);
        let mut learner = LearnerState::new(net, net.num_compartments());
        let mut metrics = Vec::new();
        for t in 0..steps {
            let exo: Vec<u8> = (0..net.num_exogeneous())
                .map(|j| ((t + j) % 3 == 0) as u8)
                .collect();
            let x: Vec<u8> = (0..net.num_visible())
                .map(|i| ((t + i) % 2) as u8)
                .collect();
            metrics
                .push(train_step(net, &mut params, &mut st, &mut learner, &exo, &x, exec).unwrap());
        }
        (params, learner, metrics)
    }

    #[test]
    fn communication_counters_follow_closed_form() {
        let net = network(4, 3, 5, 4);
        let (_, learner, metrics) = run(&net, 17, Execution::Sequential);
        assert_eq!(learner.comm_unicast_total(), 17 * 4 * 3);
        assert_eq!(learner.comm_broadcast_total(), 17 * 4 * (3 + 5));
        for (t, m) in metrics.iter().enumerate() {
            let t = t as u64 + 1;
            assert_eq!(m.unicast_total, t * 12);
            assert_eq!(m.broadcast_total, t * 32);
            assert!((m.importance.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn large_readout_broadcast_load() {
        let net = network(2, 3, 200, 20);
        let learner = LearnerState::new(&net, 20);
        assert_eq!(learner.broadcast_per_step(), 4060);
        assert_eq!(learner.unicast_per_step(), 60);
    }

    #[test]
    fn training_is_deterministic_across_execution_modes() {
        let net = network(4, 2, 3, 3);
        let (pa, _, ma) = run(&net, 30, Execution::Sequential);
        let (pb, _, mb) = run(&net, 30, Execution::Parallel);
        let (pc, _, _) = run(&net, 30, Execution::Sequential);
        assert_eq!(pa, pb);
        assert_eq!(pa, pc);
        assert_eq!(ma, mb);
    }

    #[test]
    fn train_step_checks_dimensions() {
        let net = network(2, 2, 1, 1);
        let mut params = net.init_params();
        let mut st = states(&net, 1);
        let mut learner = LearnerState::new(&net, 1);
        let e = Execution::Sequential;
        assert!(train_step(&net, &mut params, &mut st, &mut learner, &[0], &[0, 0], e).is_err());
        assert!(train_step(&net, &mut params, &mut st, &mut learner, &[0, 0], &[0], e).is_err());
    }
}
