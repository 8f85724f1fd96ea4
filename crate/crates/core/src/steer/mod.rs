//! Trait-neuron identification and inference-time steering on a toy
//! feed-forward network.

mod identify;
mod network;
mod steering;
pub mod synthetic;

use std::path::Path;

pub use identify::{
    activation_probability, identify_trait_neurons, Membership, NeuronScore, TraitNeuronMap,
};
pub use network::{Activations, Layer, NeuronId, Nonlinearity, ToyNetwork};
pub use steering::{apply_steering, SteeringConfig};

use crate::error::Result;
use crate::scalar::Scalar;

/// Parses a sample corpus: one sample per non-empty line, whitespace-separated
/// reals.
pub fn parse_samples<T: Scalar>(text: &str, source: &str) -> Result<Vec<Vec<T>>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| network::parse_row(l, &format!("{source}:{}", i + 1)))
        .collect()
}

pub fn read_samples<T: Scalar>(path: &Path) -> Result<Vec<Vec<T>>> {
    parse_samples(&std::fs::read_to_string(path)?, &path.display().to_string())
}

pub fn samples_to_text<T: Scalar>(samples: &[Vec<T>]) -> String {
    let mut out = String::new();
    for s in samples {
        let line: Vec<String> = s.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}
