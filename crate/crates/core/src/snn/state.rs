use std::fmt::Write;

use super::basis::FilterBasis;
use super::dynamics::{bce_loss, membrane_potential, sample_spike};
use super::network::Network;
use super::params::ParameterSet;
use crate::error::{Error, Result};
use crate::rng::StreamRng;

/// Dynamic state of compartment `k` for every neuron.
///
/// Between steps the traces describe the spike history up to the last
/// advanced step `t − 1`; [`CompartmentState::evaluate`] computes the step-`t`
/// potentials, spikes and losses from them, and
/// [`CompartmentState::advance`] then folds step `t` into the history.
#[derive(Debug, Clone)]
pub struct CompartmentState {
    index: usize,
    num_basis: usize,
    /// Bit `δ` of channel `j` holds `s_{j,t−δ}`.
    history: Vec<u64>,
    window_mask: u64,
    synaptic_traces: Vec<f64>,
    somatic_traces: Vec<f64>,
    potentials: Vec<f64>,
    spikes: Vec<u8>,
    losses: Vec<f64>,
    rng: StreamRng,
    time: usize,
}

impl CompartmentState {
    pub fn new(network: &Network, index: usize, rng: StreamRng) -> Self {
        let channels = network.num_channels();
        let neurons = network.num_neurons();
        let basis = network.basis();
        let duration = basis.duration();
        let window_mask = if duration == 64 {
            u64::MAX
        } else {
            (1u64 << duration) - 1
        };
        Self {
            index,
            num_basis: basis.num_basis(),
            history: vec![0; channels],
            window_mask,
            synaptic_traces: vec![0.0; channels * basis.num_basis()],
            somatic_traces: vec![0.0; neurons],
            potentials: vec![0.0; neurons],
            spikes: vec![0; neurons],
            losses: vec![0.0; neurons],
            rng,
            time: 0,
        }
    }

    /// Clears the spike history and traces for a fresh sequence. The random
    /// stream keeps its position.
    pub fn reset(&mut self) {
        self.history.fill(0);
        self.synaptic_traces.fill(0.0);
        self.somatic_traces.fill(0.0);
        self.potentials.fill(0.0);
        self.spikes.fill(0);
        self.losses.fill(0.0);
        self.time = 0;
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// Number of steps folded into the history since the last reset.
    pub fn time(&self) -> usize {
        self.time
    }

    pub fn num_channels(&self) -> usize {
        self.history.len()
    }

    /// `→s_{j,b}` for every channel, `[j * B + b]`.
    pub fn synaptic_traces(&self) -> &[f64] {
        &self.synaptic_traces
    }

    pub fn synaptic_trace(&self, channel: usize, basis: usize) -> f64 {
        self.synaptic_traces[channel * self.num_basis + basis]
    }

    /// `←s_i` for every neuron.
    pub fn somatic_traces(&self) -> &[f64] {
        &self.somatic_traces
    }

    /// Potentials of the last evaluated step.
    pub fn potentials(&self) -> &[f64] {
        &self.potentials
    }

    /// Neuron outputs of the last evaluated step.
    pub fn spikes(&self) -> &[u8] {
        &self.spikes
    }

    /// Per-neuron cross-entropy of the last evaluated step.
    pub fn losses(&self) -> &[f64] {
        &self.losses
    }

    /// Spike of `channel` at lag `δ` (0 = most recent advanced step).
    pub fn window_spike(&self, channel: usize, lag: usize) -> u8 {
        ((self.history[channel] >> lag) & 1) as u8
    }

    pub fn rng_mut(&mut self) -> &mut StreamRng {
        &mut self.rng
    }

    /// Pushes one step of spikes (all channels: exogeneous then neurons) into
    /// the window and recomputes every trace.
    pub fn step_traces(&mut self, basis: &FilterBasis, spikes_in: &[u8]) -> Result<()> {
        if spikes_in.len() != self.history.len() {
            return Err(Error::contract(format!(
                "spike vector has {} channels, state has {}",
                spikes_in.len(),
                self.history.len()
            )));
        }
        if spikes_in.iter().any(|&s| s > 1) {
            return Err(Error::contract("spike vector is not binary"));
        }
        for (h, &s) in self.history.iter_mut().zip(spikes_in) {
            *h = ((*h << 1) | s as u64) & self.window_mask;
        }
        self.recompute_traces(basis);
        self.time += 1;
        Ok(())
    }

    /// Folds the exogeneous inputs of step `t` and this compartment's own
    /// step-`t` spikes into the history.
    pub fn advance(&mut self, network: &Network, exogeneous: &[u8]) -> Result<()> {
        let e = network.num_exogeneous();
        if exogeneous.len() != e {
            return Err(Error::contract(format!(
                "exogeneous vector has {} channels, network has {e}",
                exogeneous.len()
            )));
        }
        let mask = self.window_mask;
        for (h, &s) in self.history[..e].iter_mut().zip(exogeneous) {
            *h = ((*h << 1) | (s != 0) as u64) & mask;
        }
        for (h, &s) in self.history[e..].iter_mut().zip(&self.spikes) {
            *h = ((*h << 1) | s as u64) & mask;
        }
        self.recompute_traces(network.basis());
        self.time += 1;
        Ok(())
    }

    fn recompute_traces(&mut self, basis: &FilterBasis) {
        let b_count = self.num_basis;
        let kernels = basis.synaptic_kernels();
        for (j, &hist) in self.history.iter().enumerate() {
            let out = &mut self.synaptic_traces[j * b_count..(j + 1) * b_count];
            out.fill(0.0);
            let mut bits = hist;
            while bits != 0 {
                let lag = bits.trailing_zeros() as usize;
                for (o, k) in out.iter_mut().zip(kernels) {
                    *o += k[lag];
                }
                bits &= bits - 1;
            }
        }
        let e = self.history.len() - self.somatic_traces.len();
        let soma = basis.somatic();
        for (i, tr) in self.somatic_traces.iter_mut().enumerate() {
            let mut bits = self.history[e + i];
            let mut acc = 0.0;
            while bits != 0 {
                acc += soma[bits.trailing_zeros() as usize];
                bits &= bits - 1;
            }
            *tr = acc;
        }
    }

    /// Computes step-`t` potentials from the step-`t−1` traces, then the
    /// neuron outputs and their cross-entropy. Visible neurons take the
    /// clamp values when given, otherwise every neuron is sampled from this
    /// compartment's stream (one draw per sampled neuron, in index order).
    pub fn evaluate(
        &mut self,
        network: &Network,
        params: &ParameterSet,
        clamp_visible: Option<&[u8]>,
    ) -> Result<()> {
        if let Some(c) = clamp_visible {
            if c.len() != network.num_visible() {
                return Err(Error::contract(format!(
                    "clamp vector has {} entries, network has {} visible neurons",
                    c.len(),
                    network.num_visible()
                )));
            }
        }
        for i in 0..network.num_neurons() {
            let u = membrane_potential(params, self, i);
            let s = match clamp_visible {
                Some(c) if i < c.len() => u8::from(c[i] != 0),
                _ => sample_spike(u, &mut self.rng),
            };
            self.potentials[i] = u;
            self.spikes[i] = s;
            self.losses[i] = bce_loss(s, u);
        }
        Ok(())
    }

    /// Plain-text snapshot: one row per channel with its `B` synaptic traces,
    /// followed by one row holding the somatic traces.
    pub fn trace_snapshot_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# compartment {} step {}: {} channel rows x {} basis, then somatic row",
            self.index,
            self.time,
            self.history.len(),
            self.num_basis
        );
        for row in self.synaptic_traces.chunks(self.num_basis.max(1)) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        let line: Vec<String> = self
            .somatic_traces
            .iter()
            .map(|v| format!("{v:.17e}"))
            .collect();
        let _ = writeln!(out, "{}", line.join(" "));
        out
    }
}
