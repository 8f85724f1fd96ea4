//! Neuron-level persona steering on a toy feed-forward network, persona-effect
//! metrics over paired benchmark results, and retrieval-based dynamic persona
//! routing.
//!
//! The numeric core is generic over [`Scalar`]; the aliases below fix it to
//! `f64`, which is what the loaders, reports and CLI use.

pub mod dpr;
pub mod error;
pub mod ingest;
pub mod metrics;
pub mod persona;
pub mod report;
pub mod scalar;
pub mod stats;
pub mod steer;

pub use error::{Error, Result};
pub use persona::{PersonaCondition, Polarity, Trait};
pub use scalar::Scalar;

/// Toy network over `f64`.
pub type Network = steer::ToyNetwork<f64>;
/// Trait-neuron map over `f64`.
pub type NeuronMap = steer::TraitNeuronMap<f64>;
/// Steering configuration over `f64`.
pub type Steering<'a> = steer::SteeringConfig<'a, f64>;
/// Effect matrix over `f64`.
pub type Effects = metrics::EffectMatrix<f64>;
/// TF-IDF index over `f64`.
pub type Index = dpr::TfidfIndex<f64>;
/// Routing memory over `f64`.
pub type Memory = dpr::RoutingMemory<f64>;
