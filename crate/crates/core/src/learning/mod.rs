//! Importance-weighted online learning across compartments.
//!
//! Each training step the central processor collects the visible
//! cross-entropies of every compartment, folds them into the discounted
//! log-weights `v^k`, and broadcasts the SoftMax of `v` back to all neurons.
//! Every neuron then moves its parameters by
//! `η · Σ_k σ_SM^k(v) · e^k`, where `e^k` is the γ-discounted eligibility
//! `⟨(s − σ(u)) · trace⟩` of compartment `k`.

mod learner;

pub use learner::{
    apply_update, softmax_importance, temporal_average, train_step, update_eligibility,
    LearnerState, StepMetrics,
};
