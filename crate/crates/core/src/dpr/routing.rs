use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::split::split_reference_test;
use super::tfidf::TfidfIndex;
use crate::error::{Error, Result};
use crate::persona::PersonaCondition;
use crate::scalar::Scalar;

/// A benchmark item with its per-persona solve bits for one model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusItem {
    pub dataset: String,
    pub item_id: String,
    pub text: String,
    /// Persona condition -> solved. Serialized as 0/1.
    #[serde(with = "outcome_bits")]
    pub outcomes: BTreeMap<PersonaCondition, bool>,
}

impl CorpusItem {
    pub fn solved(&self, persona: PersonaCondition) -> bool {
        self.outcomes.get(&persona).copied().unwrap_or(false)
    }

    /// Every polar condition must carry a bit; BASE is optional.
    pub fn check_outcomes(&self) -> Result<()> {
        match PersonaCondition::polar().find(|p| !self.outcomes.contains_key(p)) {
            None => Ok(()),
            Some(p) => Err(Error::InvalidInput(format!(
                "item {}/{} has no outcome for {p}",
                self.dataset, self.item_id
            ))),
        }
    }

    /// Polar conditions under which the item was solved.
    pub fn solving_personas(&self) -> Vec<PersonaCondition> {
        PersonaCondition::polar().filter(|&p| self.solved(p)).collect()
    }
}

mod outcome_bits {
    use std::collections::BTreeMap;

    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    use crate::persona::PersonaCondition;

    pub fn serialize<S: Serializer>(map: &BTreeMap<PersonaCondition, bool>, s: S) -> Result<S::Ok, S::Error> {
        let bits: BTreeMap<&str, u8> = map.iter().map(|(p, &b)| (p.code(), u8::from(b))).collect();
        // keys in lexical code order
        bits.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<PersonaCondition, bool>, D::Error> {
        let raw = BTreeMap::<String, u8>::deserialize(d)?;
        raw.into_iter()
            .map(|(code, bit)| {
                let p: PersonaCondition = code.parse().map_err(D::Error::custom)?;
                match bit {
                    0 => Ok((p, false)),
                    1 => Ok((p, true)),
                    other => Err(D::Error::custom(format!("outcome for {code} must be 0 or 1, got {other}"))),
                }
            })
            .collect()
    }
}

/// Validates a single-dataset corpus with unique item ids and complete
/// outcome bits, returning it sorted by item id.
pub fn check_corpus(mut items: Vec<CorpusItem>) -> Result<Vec<CorpusItem>> {
    let datasets: BTreeSet<&str> = items.iter().map(|i| i.dataset.as_str()).collect();
    if datasets.len() > 1 {
        return Err(Error::InvalidInput(format!(
            "routing memory spans several datasets: {}",
            datasets.into_iter().collect::<Vec<_>>().join(", ")
        )));
    }
    for item in &items {
        item.check_outcomes()?;
    }
    items.sort_by(|a, b| a.item_id.cmp(&b.item_id));
    if let Some(w) = items.windows(2).find(|w| w[0].item_id == w[1].item_id) {
        return Err(Error::InvalidInput(format!("duplicate item id {}", w[0].item_id)));
    }
    Ok(items)
}

/// Polar condition with the highest solve rate over `items`; ties go to the
/// earlier condition in canonical order. Returns the condition and its rate.
pub fn best_static_persona<T: Scalar>(items: &[CorpusItem]) -> Option<(PersonaCondition, T)> {
    if items.is_empty() {
        return None;
    }
    let mut best: Option<(PersonaCondition, usize)> = None;
    for p in PersonaCondition::polar() {
        let solved = items.iter().filter(|x| x.solved(p)).count();
        if best.is_none_or(|(_, b)| solved > b) {
            best = Some((p, solved));
        }
    }
    best.map(|(p, k)| (p, T::ratio(k, items.len())))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitInfo {
    pub seed: u64,
    pub ratio: f64,
    pub total: usize,
}

/// Reference items with their TF-IDF index: the lookup table routing draws
/// on.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingMemory<T> {
    dataset: String,
    reference: Vec<CorpusItem>,
    index: TfidfIndex<T>,
    split: SplitInfo,
    fallback: PersonaCondition,
}

impl<T: Scalar> RoutingMemory<T> {
    /// Splits `items` (sorted by id first, so input order is irrelevant) and
    /// indexes the reference part. Returns the memory and the test items.
    pub fn build(items: Vec<CorpusItem>, ratio: f64, seed: u64) -> Result<(Self, Vec<CorpusItem>)> {
        let items = check_corpus(items)?;
        let total = items.len();
        let (reference, test) = split_reference_test(&items, ratio, seed)?;
        let memory = Self::from_reference(reference, SplitInfo { seed, ratio, total })?;
        Ok((memory, test))
    }

    pub fn from_reference(reference: Vec<CorpusItem>, split: SplitInfo) -> Result<Self> {
        let texts: Vec<&str> = reference.iter().map(|x| x.text.as_str()).collect();
        let index = TfidfIndex::build(&texts)?;
        Self::from_parts(reference, index, split)
    }

    pub(crate) fn from_parts(reference: Vec<CorpusItem>, index: TfidfIndex<T>, split: SplitInfo) -> Result<Self> {
        if index.len() != reference.len() {
            return Err(Error::InvalidInput(format!(
                "index holds {} documents for {} reference items",
                index.len(),
                reference.len()
            )));
        }
        let ids: BTreeSet<&str> = reference.iter().map(|x| x.item_id.as_str()).collect();
        if ids.len() != reference.len() {
            return Err(Error::InvalidInput("duplicate reference item ids".into()));
        }
        for item in &reference {
            item.check_outcomes()?;
        }
        let (fallback, _) = best_static_persona::<T>(&reference)
            .ok_or_else(|| Error::InvalidInput("empty reference set".into()))?;
        let dataset = reference[0].dataset.clone();
        Ok(Self {
            dataset,
            reference,
            index,
            split,
            fallback,
        })
    }

    pub fn dataset(&self) -> &str {
        &self.dataset
    }

    pub fn reference(&self) -> &[CorpusItem] {
        &self.reference
    }

    pub fn index(&self) -> &TfidfIndex<T> {
        &self.index
    }

    pub fn split(&self) -> SplitInfo {
        self.split
    }

    /// Best static persona over the reference set, recommended whenever
    /// retrieval gives no usable evidence.
    pub fn fallback_persona(&self) -> PersonaCondition {
        self.fallback
    }

    pub fn contains(&self, item_id: &str) -> bool {
        self.position(item_id).is_some()
    }

    fn position(&self, item_id: &str) -> Option<usize> {
        self.reference.iter().position(|x| x.item_id == item_id)
    }

    /// Polar conditions under which the anchor was solved (possibly empty).
    pub fn effective_persona_set(&self, anchor_id: &str) -> Result<Vec<PersonaCondition>> {
        self.position(anchor_id)
            .map(|i| self.reference[i].solving_personas())
            .ok_or_else(|| Error::MissingAnchor(anchor_id.to_string()))
    }

    /// Routes one query text to an anchor and a recommended persona set.
    pub fn route(&self, text: &str) -> Route<T> {
        let hit = self.index.retrieve(text);
        let anchor = &self.reference[hit.doc];
        let effective = anchor.solving_personas();
        let fallback = hit.no_overlap || effective.is_empty();
        Route {
            anchor_id: anchor.item_id.clone(),
            similarity: hit.score,
            recommended: if fallback { vec![self.fallback] } else { effective },
            fallback,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Route<T> {
    pub anchor_id: String,
    pub similarity: T,
    pub recommended: Vec<PersonaCondition>,
    /// The recommendation is the fallback persona, because the query shares
    /// no term with the reference set or the anchor was never solved.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutingResult<T> {
    pub item_id: String,
    pub anchor_id: String,
    pub similarity: T,
    pub recommended: Vec<PersonaCondition>,
    pub hit: bool,
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutingReport<T> {
    pub dataset: String,
    /// Items in the full dataset (reference + test).
    pub total: usize,
    pub sampled: usize,
    pub hits: usize,
    /// Routed accuracy, percent.
    pub accuracy: T,
    pub best_persona: PersonaCondition,
    /// Accuracy of the best single polar persona on the test items, percent.
    pub best_baseline: T,
    /// No-persona accuracy on the test items, percent, when BASE bits exist.
    pub no_persona: Option<T>,
    /// Share of test items solvable by at least one polar persona, percent.
    pub oracle: T,
    pub results: Vec<RoutingResult<T>>,
}

/// Routes every test item and scores it: a hit means some recommended
/// persona solves the item.
pub fn evaluate_routing<T: Scalar>(memory: &RoutingMemory<T>, test: &[CorpusItem]) -> Result<RoutingReport<T>> {
    if test.is_empty() {
        return Err(Error::InvalidArgument("test set is empty".into()));
    }
    for item in test {
        item.check_outcomes()?;
        if memory.contains(&item.item_id) {
            return Err(Error::InvalidArgument(format!(
                "test item {} is also in the reference set",
                item.item_id
            )));
        }
    }
    let results: Vec<RoutingResult<T>> = test
        .par_iter()
        .map(|item| {
            let route = memory.route(&item.text);
            let hit = route.recommended.iter().any(|&p| item.solved(p));
            RoutingResult {
                item_id: item.item_id.clone(),
                anchor_id: route.anchor_id,
                similarity: route.similarity,
                recommended: route.recommended,
                hit,
                fallback: route.fallback,
            }
        })
        .collect();

    let hits = results.iter().filter(|r| r.hit).count();
    let n = test.len();
    let pct = |k: usize| T::hundred() * T::ratio(k, n);
    let (best_persona, best_rate) = best_static_persona::<T>(test).expect("nonempty test set");
    let no_persona = test
        .iter()
        .all(|x| x.outcomes.contains_key(&PersonaCondition::Baseline))
        .then(|| pct(test.iter().filter(|x| x.solved(PersonaCondition::Baseline)).count()));
    let solvable = test.iter().filter(|x| !x.solving_personas().is_empty()).count();
    Ok(RoutingReport {
        dataset: memory.dataset().to_string(),
        total: memory.split().total,
        sampled: n,
        hits,
        accuracy: pct(hits),
        best_persona,
        best_baseline: T::hundred() * best_rate,
        no_persona,
        oracle: pct(solvable),
        results,
    })
}
