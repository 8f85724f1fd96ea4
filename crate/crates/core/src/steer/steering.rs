use super::identify::TraitNeuronMap;
use super::network::{NeuronId, ToyNetwork};
use crate::error::{Error, Result};
use crate::persona::{PersonaCondition, Polarity, Trait};
use crate::scalar::Scalar;

/// Inference-time steering toward one pole of a trait.
///
/// With `Polarity::High` the map's positive set is boosted and its negative
/// set suppressed; `Polarity::Low` swaps the two roles.
#[derive(Debug, Clone, Copy)]
pub struct SteeringConfig<'a, T> {
    polarity: Polarity,
    alpha: T,
    map: &'a TraitNeuronMap<T>,
}

impl<'a, T: Scalar> SteeringConfig<'a, T> {
    pub fn new(map: &'a TraitNeuronMap<T>, polarity: Polarity, alpha: T) -> Result<Self> {
        if !alpha.is_finite() || alpha < T::zero() {
            return Err(Error::Config(format!("steering strength must be finite and >= 0, got {alpha}")));
        }
        Ok(Self {
            polarity,
            alpha,
            map,
        })
    }

    /// Config for a persona condition. The baseline yields `None` (plain
    /// inference); a polar condition must name the map's trait.
    pub fn for_persona(
        map: &'a TraitNeuronMap<T>,
        persona: PersonaCondition,
        alpha: T,
    ) -> Result<Option<Self>> {
        match persona {
            PersonaCondition::Baseline => Ok(None),
            PersonaCondition::Polar(t, p) if t == map.target_trait() => {
                Self::new(map, p, alpha).map(Some)
            }
            PersonaCondition::Polar(t, _) => Err(Error::Config(format!(
                "persona {persona} targets {t} but the neuron map is for {}",
                map.target_trait()
            ))),
        }
    }

    pub fn target_trait(&self) -> Trait {
        self.map.target_trait()
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn map(&self) -> &'a TraitNeuronMap<T> {
        self.map
    }

    fn boosts(&self, id: &NeuronId) -> bool {
        match self.polarity {
            Polarity::High => self.map.positive().contains(id),
            Polarity::Low => self.map.negative().contains(id),
        }
    }

    fn suppresses(&self, id: &NeuronId) -> bool {
        match self.polarity {
            Polarity::High => self.map.negative().contains(id),
            Polarity::Low => self.map.positive().contains(id),
        }
    }

    /// Steered value of activation `h` at `neuron`.
    ///
    /// `alpha == 0` is the identity for every neuron, suppression included.
    pub fn apply(&self, h: T, neuron: NeuronId) -> T {
        if self.alpha == T::zero() {
            h
        } else if self.boosts(&neuron) {
            h + self.alpha * self.map.h_ref(neuron).unwrap_or_else(T::zero)
        } else if self.suppresses(&neuron) {
            T::zero()
        } else {
            h
        }
    }

    pub(crate) fn validate_against(&self, network: &ToyNetwork<T>) -> Result<()> {
        match self.map.neurons().find(|id| !network.contains(*id)) {
            Some(id) => Err(Error::Config(format!(
                "neuron {id} is outside the network ({} layers, widths {:?})",
                network.layers().len(),
                network.hidden_dims()
            ))),
            None => Ok(()),
        }
    }
}

/// Free-function form of [`SteeringConfig::apply`].
pub fn apply_steering<T: Scalar>(h: T, neuron: NeuronId, config: &SteeringConfig<'_, T>) -> T {
    config.apply(h, neuron)
}
