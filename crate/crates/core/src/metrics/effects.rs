use std::collections::{BTreeMap, BTreeSet};

use super::records::{CellKey, RecordSet};
use crate::error::{Error, Result};
use crate::persona::{PersonaCondition, Trait};
use crate::scalar::Scalar;

/// Per-cell accuracies and their deviation from the no-persona baseline.
///
/// `ΔAcc(m, p, d) = 100 * (Acc(m, p, d) - Acc(m, BASE, d))` in percentage
/// points; a delta exists only where both accuracies do.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectMatrix<T> {
    accuracy: BTreeMap<CellKey, T>,
    baseline: BTreeMap<(String, String), T>,
    delta: BTreeMap<CellKey, T>,
}

impl<T: Scalar> EffectMatrix<T> {
    pub fn from_records(records: &RecordSet) -> Self {
        Self::build(
            records
                .tallies()
                .iter()
                .map(|(k, t)| (k.clone(), T::ratio(t.correct, t.total))),
        )
    }

    /// From precomputed accuracies (fractions in [0, 1]).
    pub fn from_accuracies<I, S>(cells: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, PersonaCondition, S, T)>,
        S: AsRef<str>,
    {
        let mut map = BTreeMap::new();
        for (m, p, d, acc) in cells {
            if !(acc >= T::zero() && acc <= T::one()) {
                return Err(Error::InvalidInput(format!(
                    "accuracy {acc} for {}/{p}/{} outside [0, 1]",
                    m.as_ref(),
                    d.as_ref()
                )));
            }
            let key = CellKey::new(m.as_ref(), p, d.as_ref());
            if map.insert(key, acc).is_some() {
                return Err(Error::InvalidInput(format!(
                    "duplicate accuracy for {}/{p}/{}",
                    m.as_ref(),
                    d.as_ref()
                )));
            }
        }
        Ok(Self::build(map))
    }

    fn build(accuracy: impl IntoIterator<Item = (CellKey, T)>) -> Self {
        let accuracy: BTreeMap<CellKey, T> = accuracy.into_iter().collect();
        let baseline: BTreeMap<(String, String), T> = accuracy
            .iter()
            .filter(|(k, _)| k.persona.is_baseline())
            .map(|(k, &a)| ((k.model.clone(), k.dataset.clone()), a))
            .collect();
        let delta = accuracy
            .iter()
            .filter_map(|(k, &a)| {
                baseline
                    .get(&(k.model.clone(), k.dataset.clone()))
                    .map(|&b| (k.clone(), T::hundred() * (a - b)))
            })
            .collect();
        Self {
            accuracy,
            baseline,
            delta,
        }
    }

    pub fn accuracy(&self, model: &str, persona: PersonaCondition, dataset: &str) -> Result<T> {
        let key = CellKey::new(model, persona, dataset);
        self.accuracy.get(&key).copied().ok_or_else(|| key.missing())
    }

    pub fn baseline_accuracy(&self, model: &str, dataset: &str) -> Result<T> {
        self.accuracy(model, PersonaCondition::Baseline, dataset)
    }

    /// Signed persona effect in percentage points.
    pub fn delta_acc(&self, model: &str, persona: PersonaCondition, dataset: &str) -> Result<T> {
        let key = CellKey::new(model, persona, dataset);
        match self.delta.get(&key) {
            Some(&d) => Ok(d),
            None => {
                // report whichever side is absent
                self.accuracy(model, persona, dataset)?;
                Err(CellKey::new(model, PersonaCondition::Baseline, dataset).missing())
            }
        }
    }

    /// `ΔAcc / (100 * Acc_base)` as a signed fraction.
    pub fn relative_effect(&self, model: &str, persona: PersonaCondition, dataset: &str) -> Result<T> {
        let delta = self.delta_acc(model, persona, dataset)?;
        let base = self.baseline_accuracy(model, dataset)?;
        if base == T::zero() {
            return Err(Error::UndefinedRelativeEffect {
                model: model.to_string(),
                dataset: dataset.to_string(),
            });
        }
        Ok(delta / (T::hundred() * base))
    }

    /// `100 * (Acc(t_H) - Acc(t_L))` in percentage points.
    pub fn polarity_gap(&self, model: &str, target: Trait, dataset: &str) -> Result<T> {
        let high = self.accuracy(model, target.high(), dataset)?;
        let low = self.accuracy(model, target.low(), dataset)?;
        Ok(T::hundred() * (high - low))
    }

    pub fn accuracies(&self) -> &BTreeMap<CellKey, T> {
        &self.accuracy
    }

    pub fn deltas(&self) -> &BTreeMap<CellKey, T> {
        &self.delta
    }

    pub fn models(&self) -> BTreeSet<&str> {
        self.accuracy.keys().map(|k| k.model.as_str()).collect()
    }

    pub fn datasets(&self) -> BTreeSet<&str> {
        self.accuracy.keys().map(|k| k.dataset.as_str()).collect()
    }

    /// (model, dataset) pairs with at least one accuracy.
    pub fn blocks(&self) -> BTreeSet<(&str, &str)> {
        self.accuracy
            .keys()
            .map(|k| (k.model.as_str(), k.dataset.as_str()))
            .collect()
    }
}

/// Free-function form of [`EffectMatrix::delta_acc`].
pub fn delta_acc<T: Scalar>(effects: &EffectMatrix<T>, model: &str, persona: PersonaCondition, dataset: &str) -> Result<T> {
    effects.delta_acc(model, persona, dataset)
}

/// Free-function form of [`EffectMatrix::relative_effect`].
pub fn relative_effect<T: Scalar>(
    effects: &EffectMatrix<T>,
    model: &str,
    persona: PersonaCondition,
    dataset: &str,
) -> Result<T> {
    effects.relative_effect(model, persona, dataset)
}

/// Free-function form of [`EffectMatrix::polarity_gap`].
pub fn polarity_gap<T: Scalar>(effects: &EffectMatrix<T>, model: &str, target: Trait, dataset: &str) -> Result<T> {
    effects.polarity_gap(model, target, dataset)
}
