//! Loading, validating and persisting study inputs.

mod formats;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use formats::{parse_corpus, read_corpus, write_jsonl};

use crate::error::{Error, Result};
use crate::metrics::{Comparison, DomainMap, HumanHypothesis, ModelSpec, RecordSet, ResultRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Rule {
    Parse,
    UnknownPersona,
    DuplicateRecord,
    UnknownModel,
    UnknownDataset,
    PairedDesign,
    DuplicateModel,
    InvalidModel,
    Config,
}

impl Rule {
    pub fn id(self) -> &'static str {
        match self {
            Rule::Parse => "parse",
            Rule::UnknownPersona => "unknown-persona",
            Rule::DuplicateRecord => "duplicate-record",
            Rule::UnknownModel => "unknown-model",
            Rule::UnknownDataset => "unknown-dataset",
            Rule::PairedDesign => "paired-design",
            Rule::DuplicateModel => "duplicate-model",
            Rule::InvalidModel => "invalid-model",
            Rule::Config => "config",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub file: String,
    pub line: Option<usize>,
    pub rule: Rule,
    pub message: String,
}

impl Issue {
    pub fn new(file: &str, line: Option<usize>, rule: Rule, message: impl Into<String>) -> Self {
        Self {
            file: file.to_string(),
            line,
            rule,
            message: message.into(),
        }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "{}:{n}: [{}] {}", self.file, self.rule.id(), self.message),
            None => write!(f, "{}: [{}] {}", self.file, self.rule.id(), self.message),
        }
    }
}

/// Fatal errors and non-fatal warnings from a load.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.errors {
            writeln!(f, "error: {e}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strictness {
    /// Any paired-design violation is fatal.
    #[default]
    Strict,
    /// Incomplete (model, dataset) blocks are dropped with a warning.
    Lenient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DprConfig {
    pub seed: u64,
    pub ratio: f64,
}

impl Default for DprConfig {
    fn default() -> Self {
        Self { seed: 42, ratio: 0.9 }
    }
}

/// Study configuration file (JSON). Every field is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    /// Added to (or overriding) the standard dataset-to-domain map.
    pub domains: DomainMap,
    pub hypotheses: Vec<HumanHypothesis>,
    pub comparisons: Vec<Comparison>,
    pub dpr: DprConfig,
    pub output_dir: Option<PathBuf>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            domains: DomainMap::empty(),
            hypotheses: HumanHypothesis::defaults(),
            comparisons: Vec::new(),
            dpr: DprConfig::default(),
            output_dir: None,
        }
    }
}

impl StudyConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
    }
}

/// Input files of one study.
#[derive(Debug, Clone, Default)]
pub struct BundlePaths {
    pub records: Vec<PathBuf>,
    pub models: Vec<PathBuf>,
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    /// Sorted by path.
    pub sources: Vec<SourceDigest>,
    pub loaded_at_unix: u64,
}

/// Validated study contents. Equality ignores where the data came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Study {
    pub records: RecordSet,
    /// Sorted by model name.
    pub models: Vec<ModelSpec>,
    pub domains: DomainMap,
    pub hypotheses: Vec<HumanHypothesis>,
    pub comparisons: Vec<Comparison>,
    pub dpr: DprConfig,
}

impl Study {
    pub fn model(&self, name: &str) -> Option<&ModelSpec> {
        self.models.iter().find(|m| m.model == name)
    }

    /// Models flagged as members of the cross-architecture subset.
    pub fn arch_subset(&self) -> Vec<ModelSpec> {
        self.models.iter().filter(|m| m.arch_subset).cloned().collect()
    }

    /// Families with at least three distinct scales, members sorted by scale.
    pub fn scaling_families(&self) -> BTreeMap<String, Vec<ModelSpec>> {
        let mut fams: BTreeMap<String, Vec<ModelSpec>> = BTreeMap::new();
        for m in &self.models {
            fams.entry(m.family.clone()).or_default().push(m.clone());
        }
        fams.retain(|_, ms| {
            let scales: BTreeSet<u64> = ms.iter().map(|m| m.params_b.to_bits()).collect();
            scales.len() == ms.len() && ms.len() >= 3
        });
        for ms in fams.values_mut() {
            ms.sort_by(|a, b| a.params_b.total_cmp(&b.params_b));
        }
        fams
    }

    /// Writes `records.jsonl`, `models.jsonl` and `study.json` into `dir`.
    pub fn persist(&self, dir: &Path) -> Result<BundlePaths> {
        std::fs::create_dir_all(dir)?;
        let records = dir.join("records.jsonl");
        let models = dir.join("models.jsonl");
        let config = dir.join("study.json");
        write_jsonl(std::io::BufWriter::new(std::fs::File::create(&records)?), self.records.records())?;
        write_jsonl(std::io::BufWriter::new(std::fs::File::create(&models)?), &self.models)?;
        let cfg = StudyConfig {
            domains: self.domains.clone(),
            hypotheses: self.hypotheses.clone(),
            comparisons: self.comparisons.clone(),
            dpr: self.dpr,
            output_dir: None,
        };
        let mut text = serde_json::to_string_pretty(&cfg)?;
        text.push('\n');
        std::fs::write(&config, text)?;
        Ok(BundlePaths {
            records: vec![records],
            models: vec![models],
            config: Some(config),
        })
    }
}

#[derive(Debug, Clone)]
pub struct StudyBundle {
    pub study: Study,
    pub provenance: Provenance,
    pub warnings: Vec<Issue>,
    pub output_dir: Option<PathBuf>,
}

fn digest(path: &Path, bytes: &[u8]) -> SourceDigest {
    SourceDigest {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(bytes)),
    }
}

/// (model, persona, dataset, item id)
type RecordKey = (String, crate::PersonaCondition, String, String);

/// Loads and validates a study. Any fatal issue yields
/// [`Error::Validation`]; unreadable files yield [`Error::Io`].
pub fn load_bundle(paths: &BundlePaths, strictness: Strictness) -> Result<StudyBundle> {
    let mut report = ValidationReport::default();
    let mut sources = Vec::new();

    let config = match &paths.config {
        Some(p) => {
            let bytes = std::fs::read(p)?;
            sources.push(digest(p, &bytes));
            match serde_json::from_slice::<StudyConfig>(&bytes) {
                Ok(c) => c,
                Err(e) => {
                    report.errors.push(Issue::new(
                        &p.display().to_string(),
                        Some(e.line()),
                        Rule::Config,
                        e.to_string(),
                    ));
                    StudyConfig::default()
                }
            }
        }
        None => StudyConfig::default(),
    };
    let mut domains = DomainMap::standard();
    domains.extend(&config.domains);
    let config_name = paths
        .config
        .as_ref()
        .map_or_else(|| "<config>".to_string(), |p| p.display().to_string());
    let mut seen_traits = BTreeSet::new();
    for h in &config.hypotheses {
        if !seen_traits.insert(h.target) {
            report.errors.push(Issue::new(
                &config_name,
                None,
                Rule::Config,
                format!("more than one hypothesis for trait {}", h.target),
            ));
        }
    }
    if !(config.dpr.ratio > 0.0 && config.dpr.ratio < 1.0) {
        report.errors.push(Issue::new(&config_name, None, Rule::Config, "dpr.ratio must lie in (0, 1)"));
    }

    // models
    let mut models: BTreeMap<String, (String, usize, ModelSpec)> = BTreeMap::new();
    for p in &paths.models {
        let text = std::fs::read_to_string(p)?;
        sources.push(digest(p, text.as_bytes()));
        let parsed = formats::parse_models(p, &text);
        report.errors.extend(parsed.issues);
        for (line, m) in parsed.items {
            let file = p.display().to_string();
            if let Some((f0, l0, _)) = models.get(&m.model) {
                report.errors.push(Issue::new(
                    &file,
                    Some(line),
                    Rule::DuplicateModel,
                    format!("model {} already defined at {f0}:{l0}", m.model),
                ));
            } else {
                models.insert(m.model.clone(), (file, line, m));
            }
        }
    }

    // records
    let mut located: BTreeMap<RecordKey, (String, usize, ResultRecord)> = BTreeMap::new();
    for p in &paths.records {
        let text = std::fs::read_to_string(p)?;
        sources.push(digest(p, text.as_bytes()));
        let parsed = formats::parse_records(p, &text);
        report.errors.extend(parsed.issues);
        let file = p.display().to_string();
        for (line, r) in parsed.items {
            if !models.contains_key(&r.model) {
                report.errors.push(Issue::new(
                    &file,
                    Some(line),
                    Rule::UnknownModel,
                    format!("record references unknown model {:?}", r.model),
                ));
                continue;
            }
            if domains.group(&r.dataset).is_none() {
                report.errors.push(Issue::new(
                    &file,
                    Some(line),
                    Rule::UnknownDataset,
                    format!("dataset {:?} has no cognitive-domain mapping", r.dataset),
                ));
                continue;
            }
            let key = (r.model.clone(), r.persona, r.dataset.clone(), r.item_id.clone());
            if let Some((f0, l0, _)) = located.get(&key) {
                report.errors.push(Issue::new(
                    &file,
                    Some(line),
                    Rule::DuplicateRecord,
                    format!("duplicate of {f0}:{l0}"),
                ));
            } else {
                located.insert(key, (file.clone(), line, r));
            }
        }
    }

    let mut records = RecordSet::new(located.into_values().map(|(_, _, r)| r).collect())
        .expect("duplicates already removed");
    let violations = records.paired_violations();
    if !violations.is_empty() {
        let mut dropped = BTreeSet::new();
        for v in &violations {
            let issue = Issue::new(
                "<records>",
                None,
                Rule::PairedDesign,
                format!(
                    "model={} dataset={} persona={} lacks {} item(s) present in other conditions",
                    v.model, v.dataset, v.persona, v.missing_items
                ),
            );
            match strictness {
                Strictness::Strict => report.errors.push(issue),
                Strictness::Lenient => {
                    report.warnings.push(issue);
                    dropped.insert((v.model.clone(), v.dataset.clone()));
                }
            }
        }
        if strictness == Strictness::Lenient {
            for (m, d) in &dropped {
                report.warnings.push(Issue::new(
                    "<records>",
                    None,
                    Rule::PairedDesign,
                    format!("dropped incomplete block model={m} dataset={d}"),
                ));
            }
            records = records.without_blocks(&dropped);
        }
    }

    if !report.errors.is_empty() {
        return Err(Error::Validation(Box::new(report)));
    }

    sources.sort_by(|a, b| a.path.cmp(&b.path));
    let loaded_at_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Ok(StudyBundle {
        study: Study {
            records,
            models: models.into_values().map(|(_, _, m)| m).collect(),
            domains,
            hypotheses: config.hypotheses,
            comparisons: config.comparisons,
            dpr: config.dpr,
        },
        provenance: Provenance { sources, loaded_at_unix },
        warnings: report.warnings,
        output_dir: config.output_dir,
    })
}
