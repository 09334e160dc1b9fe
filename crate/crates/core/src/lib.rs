//! Supervised learning of precisely timed output spikes in a deterministic
//! leaky integrate-and-fire neuron.
//!
//! The crate implements two batch plasticity rules, one driven by the
//! instantaneous difference between target and actual output spike trains
//! ([`plasticity::Rule::Inst`]) and one driven by their exponentially filtered
//! difference ([`plasticity::Rule::Filt`]), together with the likelihood-based
//! rules they descend from, the single-synapse analysis of their fixed points,
//! the van Rossum distance, and the experiment protocols used to benchmark them.
//!
//! Module map:
//!
//! * [`kernels`]: model constants and closed-form kernels.
//! * [`neuron`]: spike trains, the grid simulator and the escape-rate intensity.
//! * [`plasticity`]: weight updates and the log-likelihood objective.
//! * [`metrics`]: filtered trains, van Rossum distance, classification.
//! * [`analysis`]: firing time, phase portraits, learning-window curves.
//! * [`tasks`]: pattern/target generation, training loop, capacity sweeps.
//! * [`cli`]: experiment runner behind the `spikefilt` binary.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod kernels;
pub mod metrics;
pub mod neuron;
pub mod plasticity;
pub mod tasks;

pub use error::{Error, Result};
pub use kernels::NeuronParams;
pub use neuron::{InputPattern, SpikeTrain, WeightVector};
pub use plasticity::Rule;

