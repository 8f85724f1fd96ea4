//! Fixture builders shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use persona_lab::dpr::CorpusItem;
use persona_lab::ingest::{DprConfig, Study};
use persona_lab::metrics::{Comparison, DomainMap, HumanHypothesis, ModelSpec, RecordSet, ResultRecord};
use persona_lab::PersonaCondition;
use rand::Rng;

pub const DATASETS: [&str; 6] = ["BBH", "GPQA", "GSM8K", "IFEval", "MMLU-Pro", "MuSR"];

/// Complete paired records: every model answers the same `items` items of
/// each dataset under all eleven conditions, each correct with a random
/// per-cell probability.
pub fn random_records<R: Rng>(rng: &mut R, models: &[String], datasets: &[&str], items: usize) -> Vec<ResultRecord> {
    let mut out = Vec::new();
    for m in models {
        for d in datasets {
            for p in PersonaCondition::ALL {
                let rate: f64 = rng.gen();
                for i in 0..items {
                    out.push(ResultRecord::new(m.clone(), p, *d, format!("q{i}"), rng.gen_bool(rate)));
                }
            }
        }
    }
    out
}

pub fn model_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("m{i}")).collect()
}

/// A study over the standard datasets. Models belong to one family with
/// distinct scales; the first half form the cross-architecture subset.
pub fn random_study<R: Rng>(rng: &mut R, n_models: usize, items: usize) -> Study {
    let names = model_names(n_models);
    let records = random_records(rng, &names, &DATASETS, items);
    let models = names
        .iter()
        .enumerate()
        .map(|(i, m)| ModelSpec::new(m.clone(), 0.5 * 2f64.powi(i as i32), "fam", i < n_models.div_ceil(2)))
        .collect();
    Study {
        records: RecordSet::new(records).unwrap(),
        models,
        domains: DomainMap::standard(),
        hypotheses: HumanHypothesis::defaults(),
        comparisons: DATASETS
            .iter()
            .flat_map(|d| {
                [persona_lab::Trait::Openness, persona_lab::Trait::Neuroticism]
                    .map(|t| Comparison::new(t, *d))
            })
            .collect(),
        dpr: DprConfig::default(),
    }
}

pub fn corpus_item(dataset: &str, id: &str, text: &str, solved_by: &[PersonaCondition]) -> CorpusItem {
    CorpusItem {
        dataset: dataset.into(),
        item_id: id.into(),
        text: text.into(),
        outcomes: PersonaCondition::ALL
            .into_iter()
            .map(|p| (p, solved_by.contains(&p)))
            .collect::<BTreeMap<_, _>>(),
    }
}

/// `n` items in `clusters` topics. Items of topic `c` draw their words from
/// a topic-specific vocabulary (plus a few shared filler words) and are
/// solved only under the `c`-th polar persona.
pub fn clustered_corpus<R: Rng>(rng: &mut R, n: usize, clusters: usize) -> Vec<CorpusItem> {
    let personas: Vec<PersonaCondition> = PersonaCondition::polar().collect();
    let filler = ["the", "of", "which", "answer", "question"];
    (0..n)
        .map(|i| {
            let c = i % clusters;
            let words: Vec<String> = (0..10)
                .map(|_| {
                    if rng.gen_bool(0.2) {
                        filler[rng.gen_range(0..filler.len())].to_string()
                    } else {
                        format!("t{c}w{}", rng.gen_range(0..12))
                    }
                })
                .collect();
            corpus_item("synthetic", &format!("item{i:04}"), &words.join(" "), &[personas[c]])
        })
        .collect()
}
