use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::persona::Trait;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub model: String,
    /// Parameter count in billions.
    pub params_b: f64,
    pub family: String,
    /// Member of the cross-architecture comparison subset.
    pub arch_subset: bool,
}

impl ModelSpec {
    pub fn new(model: impl Into<String>, params_b: f64, family: impl Into<String>, arch_subset: bool) -> Self {
        Self {
            model: model.into(),
            params_b,
            family: family.into(),
            arch_subset,
        }
    }

    pub fn log_params(&self) -> f64 {
        self.params_b.ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CognitiveDomain {
    InstructionFollowing,
    Knowledge,
    MultiStepReasoning,
    NumericalReasoning,
}

impl CognitiveDomain {
    pub const ALL: [CognitiveDomain; 4] = [
        CognitiveDomain::InstructionFollowing,
        CognitiveDomain::Knowledge,
        CognitiveDomain::MultiStepReasoning,
        CognitiveDomain::NumericalReasoning,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CognitiveDomain::InstructionFollowing => "instruction-following",
            CognitiveDomain::Knowledge => "knowledge",
            CognitiveDomain::MultiStepReasoning => "multi-step-reasoning",
            CognitiveDomain::NumericalReasoning => "numerical-reasoning",
        }
    }
}

impl fmt::Display for CognitiveDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CognitiveDomain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|g| g.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown cognitive domain {s:?}")))
    }
}

/// Dataset id to cognitive-domain group.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DomainMap(BTreeMap<String, CognitiveDomain>);

impl DomainMap {
    pub fn empty() -> Self {
        Self::default()
    }

    /// IFEval, MMLU-Pro, GPQA, BBH, MuSR and GSM8K.
    pub fn standard() -> Self {
        use CognitiveDomain::*;
        let mut m = BTreeMap::new();
        m.insert("IFEval".to_string(), InstructionFollowing);
        m.insert("MMLU-Pro".to_string(), Knowledge);
        m.insert("GPQA".to_string(), Knowledge);
        m.insert("BBH".to_string(), MultiStepReasoning);
        m.insert("MuSR".to_string(), MultiStepReasoning);
        m.insert("GSM8K".to_string(), NumericalReasoning);
        Self(m)
    }

    pub fn insert(&mut self, dataset: impl Into<String>, group: CognitiveDomain) {
        self.0.insert(dataset.into(), group);
    }

    pub fn extend(&mut self, other: &DomainMap) {
        for (d, g) in &other.0 {
            self.0.insert(d.clone(), *g);
        }
    }

    pub fn group(&self, dataset: &str) -> Option<CognitiveDomain> {
        self.0.get(dataset).copied()
    }

    pub fn datasets_in(&self, group: CognitiveDomain) -> impl Iterator<Item = &str> {
        self.0
            .iter()
            .filter(move |(_, g)| **g == group)
            .map(|(d, _)| d.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, CognitiveDomain)> {
        self.0.iter().map(|(d, g)| (d.as_str(), *g))
    }
}

/// Which pole of a trait human findings predict to perform better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Prediction {
    High,
    Low,
    TaskDependent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HumanHypothesis {
    #[serde(rename = "trait")]
    pub target: Trait,
    pub prediction: Prediction,
}

impl HumanHypothesis {
    /// O, C and E high; N low; A task-dependent.
    pub fn defaults() -> Vec<HumanHypothesis> {
        use Prediction::*;
        [
            (Trait::Openness, High),
            (Trait::Conscientiousness, High),
            (Trait::Extraversion, High),
            (Trait::Neuroticism, Low),
            (Trait::Agreeableness, TaskDependent),
        ]
        .into_iter()
        .map(|(target, prediction)| HumanHypothesis { target, prediction })
        .collect()
    }
}

/// One trait-benchmark pair scored against its human hypothesis.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Comparison {
    #[serde(rename = "trait")]
    pub target: Trait,
    pub dataset: String,
}

impl Comparison {
    pub fn new(target: Trait, dataset: impl Into<String>) -> Self {
        Self {
            target,
            dataset: dataset.into(),
        }
    }
}
