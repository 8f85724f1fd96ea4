//! Trait-neuron identification from contrasting high/low corpora.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::network::{NeuronId, ToyNetwork};
use crate::error::{Error, Result};
use crate::persona::Trait;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeuronScore<T> {
    /// Activation-probability difference, high corpus minus low corpus.
    pub delta: T,
    /// Reference activation used when the neuron is boosted.
    pub h_ref: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Positive,
    Negative,
    Neither,
}

impl Membership {
    fn symbol(self) -> &'static str {
        match self {
            Membership::Positive => "+",
            Membership::Negative => "-",
            Membership::Neither => "",
        }
    }
}

/// Positive and negative trait-neuron sets for one trait, with the δ and
/// reference activation of every scored neuron.
///
/// Invariants: the sets are disjoint, every positive member has `δ > τ`,
/// every negative member has `δ < -τ`, and `h_ref >= 0` throughout. The sets
/// are derived from the scores, so they cannot drift out of sync.
#[derive(Debug, Clone, PartialEq)]
pub struct TraitNeuronMap<T> {
    target: Trait,
    tau: T,
    scores: BTreeMap<NeuronId, NeuronScore<T>>,
    positive: BTreeSet<NeuronId>,
    negative: BTreeSet<NeuronId>,
}

impl<T: Scalar> TraitNeuronMap<T> {
    pub fn from_scores(
        target: Trait,
        tau: T,
        scores: BTreeMap<NeuronId, NeuronScore<T>>,
    ) -> Result<Self> {
        check_tau(tau)?;
        for (id, s) in &scores {
            if !(s.delta >= -T::one() && s.delta <= T::one()) {
                return Err(Error::InvalidInput(format!("delta {} of neuron {id} outside [-1, 1]", s.delta)));
            }
            if !s.h_ref.is_finite() || s.h_ref < T::zero() {
                return Err(Error::InvalidInput(format!("h_ref {} of neuron {id} is not a finite value >= 0", s.h_ref)));
            }
        }
        let positive = scores
            .iter()
            .filter(|(_, s)| s.delta > tau)
            .map(|(id, _)| *id)
            .collect();
        let negative = scores
            .iter()
            .filter(|(_, s)| s.delta < -tau)
            .map(|(id, _)| *id)
            .collect();
        Ok(Self {
            target,
            tau,
            scores,
            positive,
            negative,
        })
    }

    pub fn target_trait(&self) -> Trait {
        self.target
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn positive(&self) -> &BTreeSet<NeuronId> {
        &self.positive
    }

    pub fn negative(&self) -> &BTreeSet<NeuronId> {
        &self.negative
    }

    pub fn score(&self, id: NeuronId) -> Option<&NeuronScore<T>> {
        self.scores.get(&id)
    }

    pub fn delta(&self, id: NeuronId) -> Option<T> {
        self.scores.get(&id).map(|s| s.delta)
    }

    pub fn h_ref(&self, id: NeuronId) -> Option<T> {
        self.scores.get(&id).map(|s| s.h_ref)
    }

    pub fn membership(&self, id: NeuronId) -> Membership {
        if self.positive.contains(&id) {
            Membership::Positive
        } else if self.negative.contains(&id) {
            Membership::Negative
        } else {
            Membership::Neither
        }
    }

    /// Every scored neuron.
    pub fn neurons(&self) -> impl Iterator<Item = NeuronId> + '_ {
        self.scores.keys().copied()
    }

    pub fn scores(&self) -> &BTreeMap<NeuronId, NeuronScore<T>> {
        &self.scores
    }

    /// One CSV row per scored neuron:
    /// `trait,layer,unit,delta,set,h_ref,tau` with `set` one of `+`, `-` or
    /// empty.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(writer);
        for (id, s) in &self.scores {
            w.serialize(MapRow {
                r#trait: self.target.letter().to_string(),
                layer: id.layer,
                unit: id.unit,
                delta: s.delta.to_string(),
                set: self.membership(*id).symbol().to_string(),
                h_ref: s.h_ref.to_string(),
                tau: self.tau.to_string(),
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Inverse of [`TraitNeuronMap::write_csv`]. The `set` column is checked
    /// against the membership implied by δ and τ.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut target = None;
        let mut tau = None;
        let mut scores = BTreeMap::new();
        let mut claimed = Vec::new();
        for (i, row) in rdr.deserialize::<MapRow>().enumerate() {
            let loc = format!("neuron map row {}", i + 2);
            let row = row?;
            let t: Trait = row.r#trait.parse()?;
            let row_tau: T = parse_real(&row.tau, &loc)?;
            if *target.get_or_insert(t) != t || *tau.get_or_insert(row_tau) != row_tau {
                return Err(Error::parse(loc, "mixed trait or tau values in one map"));
            }
            let id = NeuronId::new(row.layer, row.unit);
            let score = NeuronScore {
                delta: parse_real(&row.delta, &loc)?,
                h_ref: parse_real(&row.h_ref, &loc)?,
            };
            if scores.insert(id, score).is_some() {
                return Err(Error::parse(loc, format!("duplicate neuron {id}")));
            }
            claimed.push((id, row.set, loc));
        }
        let (Some(target), Some(tau)) = (target, tau) else {
            return Err(Error::parse("neuron map", "no rows"));
        };
        let map = Self::from_scores(target, tau, scores)?;
        for (id, set, loc) in claimed {
            if map.membership(id).symbol() != set {
                return Err(Error::parse(loc, format!("set column {set:?} disagrees with delta and tau")));
            }
        }
        Ok(map)
    }
}

#[derive(Serialize, Deserialize)]
struct MapRow {
    r#trait: String,
    layer: usize,
    unit: usize,
    delta: String,
    set: String,
    h_ref: String,
    tau: String,
}

fn parse_real<T: Scalar>(s: &str, loc: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::parse(loc, format!("cannot parse real {s:?}")))
}

fn check_tau<T: Scalar>(tau: T) -> Result<()> {
    if tau > T::zero() && tau < T::one() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("tau must lie in (0, 1), got {tau}")))
    }
}

/// Fraction of `samples` on which `neuron` fires (activation strictly > 0).
pub fn activation_probability<T: Scalar>(
    network: &ToyNetwork<T>,
    samples: &[Vec<T>],
    neuron: NeuronId,
) -> Result<T> {
    if samples.is_empty() {
        return Err(Error::EmptyCorpus("activation samples"));
    }
    if !network.contains(neuron) {
        return Err(Error::InvalidInput(format!("neuron {neuron} is outside the network")));
    }
    let mut fired = 0usize;
    for x in samples {
        let acts = network.forward(x, None)?;
        if acts.hidden[neuron.layer][neuron.unit] > T::zero() {
            fired += 1;
        }
    }
    Ok(T::ratio(fired, samples.len()))
}

/// Per-neuron firing count and sum of strictly positive activations.
struct Tally<T> {
    fired: Vec<Vec<usize>>,
    positive_sum: Vec<Vec<T>>,
    n: usize,
}

impl<T: Scalar> Tally<T> {
    fn collect(network: &ToyNetwork<T>, samples: &[Vec<T>]) -> Result<Self> {
        let dims = network.hidden_dims();
        let mut tally = Tally {
            fired: dims.iter().map(|&d| vec![0; d]).collect(),
            positive_sum: dims.iter().map(|&d| vec![T::zero(); d]).collect(),
            n: samples.len(),
        };
        for x in samples {
            let acts = network.forward(x, None)?;
            for (l, layer) in acts.hidden.iter().enumerate() {
                for (u, &h) in layer.iter().enumerate() {
                    if h > T::zero() {
                        tally.fired[l][u] += 1;
                        tally.positive_sum[l][u] = tally.positive_sum[l][u] + h;
                    }
                }
            }
        }
        Ok(tally)
    }

    fn probability(&self, id: NeuronId) -> T {
        T::ratio(self.fired[id.layer][id.unit], self.n)
    }

    fn mean_positive(&self, id: NeuronId) -> T {
        match self.fired[id.layer][id.unit] {
            0 => T::zero(),
            k => self.positive_sum[id.layer][id.unit] / T::from_usize_exact(k),
        }
    }
}

/// Scores every hidden unit by `δ = P(fire | high) - P(fire | low)` and
/// selects `δ > τ` into the positive set and `δ < -τ` into the negative set.
///
/// `h_ref` is the mean of a neuron's strictly positive activations over the
/// corpus it is characteristic of: the low corpus for negative-set members,
/// the high corpus for everything else. It is 0 for a neuron that never fires
/// there.
pub fn identify_trait_neurons<T: Scalar>(
    network: &ToyNetwork<T>,
    target: Trait,
    high_samples: &[Vec<T>],
    low_samples: &[Vec<T>],
    tau: T,
) -> Result<TraitNeuronMap<T>> {
    if high_samples.is_empty() {
        return Err(Error::EmptyCorpus("high-trait samples"));
    }
    if low_samples.is_empty() {
        return Err(Error::EmptyCorpus("low-trait samples"));
    }
    check_tau(tau)?;
    let high = Tally::collect(network, high_samples)?;
    let low = Tally::collect(network, low_samples)?;

    let scores = network
        .neurons()
        .map(|id| {
            let delta = high.probability(id) - low.probability(id);
            let h_ref = if delta < -tau {
                low.mean_positive(id)
            } else {
                high.mean_positive(id)
            };
            (id, NeuronScore { delta, h_ref })
        })
        .collect();
    TraitNeuronMap::from_scores(target, tau, scores)
}
