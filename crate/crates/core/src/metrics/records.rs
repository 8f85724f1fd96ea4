use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::persona::PersonaCondition;
use crate::scalar::Scalar;

/// One scored benchmark item under one persona condition.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ResultRecord {
    pub model: String,
    pub persona: PersonaCondition,
    pub dataset: String,
    pub item_id: String,
    pub correct: bool,
}

impl ResultRecord {
    pub fn new(
        model: impl Into<String>,
        persona: PersonaCondition,
        dataset: impl Into<String>,
        item_id: impl Into<String>,
        correct: bool,
    ) -> Self {
        Self {
            model: model.into(),
            persona,
            dataset: dataset.into(),
            item_id: item_id.into(),
            correct,
        }
    }

    pub fn cell(&self) -> CellKey {
        CellKey::new(&self.model, self.persona, &self.dataset)
    }
}

/// (model, persona, dataset) coordinate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellKey {
    pub model: String,
    pub persona: PersonaCondition,
    pub dataset: String,
}

impl CellKey {
    pub fn new(model: &str, persona: PersonaCondition, dataset: &str) -> Self {
        Self {
            model: model.to_string(),
            persona,
            dataset: dataset.to_string(),
        }
    }

    pub(crate) fn missing(&self) -> Error {
        Error::MissingCell {
            model: self.model.clone(),
            persona: self.persona.code().to_string(),
            dataset: self.dataset.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub correct: usize,
    pub total: usize,
}

/// A persona condition whose item set differs from the rest of its
/// (model, dataset) block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairedViolation {
    pub model: String,
    pub dataset: String,
    pub persona: PersonaCondition,
    /// Items present elsewhere in the block but absent under this persona.
    pub missing_items: usize,
}

/// Result records in canonical order with per-cell tallies.
///
/// (model, persona, dataset, item) is unique; construction rejects
/// duplicates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RecordSet {
    records: Vec<ResultRecord>,
    tallies: BTreeMap<CellKey, Tally>,
}

impl RecordSet {
    pub fn new(mut records: Vec<ResultRecord>) -> Result<Self> {
        records.sort();
        if let Some(pair) = records.windows(2).find(|w| same_key(&w[0], &w[1])) {
            let r = &pair[0];
            return Err(Error::InvalidArgument(format!(
                "duplicate record model={} persona={} dataset={} item={}",
                r.model, r.persona, r.dataset, r.item_id
            )));
        }
        let mut tallies: BTreeMap<CellKey, Tally> = BTreeMap::new();
        for r in &records {
            let t = tallies.entry(r.cell()).or_default();
            t.total += 1;
            t.correct += usize::from(r.correct);
        }
        Ok(Self { records, tallies })
    }

    pub fn records(&self) -> &[ResultRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn tallies(&self) -> &BTreeMap<CellKey, Tally> {
        &self.tallies
    }

    pub fn models(&self) -> BTreeSet<&str> {
        self.records.iter().map(|r| r.model.as_str()).collect()
    }

    pub fn datasets(&self) -> BTreeSet<&str> {
        self.records.iter().map(|r| r.dataset.as_str()).collect()
    }

    /// Fraction of correct records for the cell. A cell with no records is an
    /// error, never zero.
    pub fn accuracy<T: Scalar>(&self, model: &str, persona: PersonaCondition, dataset: &str) -> Result<T> {
        let key = CellKey::new(model, persona, dataset);
        match self.tallies.get(&key) {
            Some(t) => Ok(T::ratio(t.correct, t.total)),
            None => Err(key.missing()),
        }
    }

    /// Every persona condition whose item set is not the union of item sets
    /// within its (model, dataset) block.
    pub fn paired_violations(&self) -> Vec<PairedViolation> {
        let mut blocks: BTreeMap<(&str, &str), BTreeMap<PersonaCondition, BTreeSet<&str>>> =
            BTreeMap::new();
        for r in &self.records {
            blocks
                .entry((&r.model, &r.dataset))
                .or_default()
                .entry(r.persona)
                .or_default()
                .insert(&r.item_id);
        }
        let mut out = Vec::new();
        for ((model, dataset), personas) in blocks {
            let union: BTreeSet<&str> = personas.values().flatten().copied().collect();
            for (persona, items) in personas {
                if items.len() != union.len() {
                    out.push(PairedViolation {
                        model: model.to_string(),
                        dataset: dataset.to_string(),
                        persona,
                        missing_items: union.len() - items.len(),
                    });
                }
            }
        }
        out
    }

    pub fn check_paired(&self) -> Result<()> {
        match self.paired_violations().first() {
            None => Ok(()),
            Some(v) => Err(Error::InvalidArgument(format!(
                "paired design violated: model={} dataset={} persona={} lacks {} item(s)",
                v.model, v.dataset, v.persona, v.missing_items
            ))),
        }
    }

    /// Copy without the listed (model, dataset) blocks.
    pub fn without_blocks(&self, blocks: &BTreeSet<(String, String)>) -> Self {
        let kept = self
            .records
            .iter()
            .filter(|r| !blocks.contains(&(r.model.clone(), r.dataset.clone())))
            .cloned()
            .collect();
        Self::new(kept).expect("subset of a valid record set is valid")
    }
}

fn same_key(a: &ResultRecord, b: &ResultRecord) -> bool {
    a.model == b.model && a.persona == b.persona && a.dataset == b.dataset && a.item_id == b.item_id
}
