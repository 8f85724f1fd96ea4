//! Line-oriented readers and writers for the study file formats.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Issue, Rule};
use crate::dpr::CorpusItem;
use crate::error::{Error, Result};
use crate::metrics::{ModelSpec, ResultRecord};
use crate::persona::PersonaCondition;

/// Records parsed from one file plus per-line problems. Each record keeps its
/// line number for later locators.
pub(crate) struct Parsed<T> {
    pub items: Vec<(usize, T)>,
    pub issues: Vec<Issue>,
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn parse_correct(v: &Value) -> Option<bool> {
    match v {
        Value::Bool(b) => Some(*b),
        Value::Number(n) => match n.as_u64() {
            Some(0) => Some(false),
            Some(1) => Some(true),
            _ => None,
        },
        Value::String(s) => parse_correct_str(s),
        _ => None,
    }
}

fn parse_correct_str(s: &str) -> Option<bool> {
    match s.trim() {
        "true" | "1" => Some(true),
        "false" | "0" => Some(false),
        _ => None,
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    model: String,
    persona: String,
    dataset: String,
    item_id: Value,
    correct: Value,
}

fn item_id_string(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn finish_record(raw: RawRecord, file: &str, line: usize) -> std::result::Result<ResultRecord, Issue> {
    let persona: PersonaCondition = raw.persona.parse().map_err(|_| {
        Issue::new(file, Some(line), Rule::UnknownPersona, format!("unknown persona code {:?}", raw.persona))
    })?;
    let item_id = item_id_string(&raw.item_id)
        .ok_or_else(|| Issue::new(file, Some(line), Rule::Parse, "item_id must be a string or integer"))?;
    let correct = parse_correct(&raw.correct)
        .ok_or_else(|| Issue::new(file, Some(line), Rule::Parse, "correct must be true/false or 0/1"))?;
    Ok(ResultRecord {
        model: raw.model,
        persona,
        dataset: raw.dataset,
        item_id,
        correct,
    })
}

/// Result records from JSON-lines, or CSV when the extension is `.csv`.
pub(crate) fn parse_records(path: &Path, text: &str) -> Parsed<ResultRecord> {
    let file = path.display().to_string();
    let mut out = Parsed { items: Vec::new(), issues: Vec::new() };
    if is_csv(path) {
        let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        match rdr.headers() {
            Ok(h) if h.iter().collect::<Vec<_>>() == ["model", "persona", "dataset", "item_id", "correct"] => {}
            _ => {
                out.issues.push(Issue::new(
                    &file,
                    Some(1),
                    Rule::Parse,
                    "CSV header must be model,persona,dataset,item_id,correct",
                ));
                return out;
            }
        }
        for row in rdr.records() {
            let line = row.as_ref().ok().and_then(|r| r.position()).map_or(0, |p| p.line() as usize);
            let row = match row {
                Ok(r) if r.len() == 5 => r,
                Ok(_) => {
                    out.issues.push(Issue::new(&file, Some(line), Rule::Parse, "expected 5 fields"));
                    continue;
                }
                Err(e) => {
                    let line = e.position().map_or(0, |p| p.line() as usize);
                    out.issues.push(Issue::new(&file, Some(line), Rule::Parse, e.to_string()));
                    continue;
                }
            };
            let raw = RawRecord {
                model: row[0].to_string(),
                persona: row[1].to_string(),
                dataset: row[2].to_string(),
                item_id: Value::String(row[3].to_string()),
                correct: Value::String(row[4].to_string()),
            };
            match finish_record(raw, &file, line) {
                Ok(r) => out.items.push((line, r)),
                Err(issue) => out.issues.push(issue),
            }
        }
    } else {
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<RawRecord>(line) {
                Ok(raw) => match finish_record(raw, &file, n) {
                    Ok(r) => out.items.push((n, r)),
                    Err(issue) => out.issues.push(issue),
                },
                Err(e) => out.issues.push(Issue::new(&file, Some(n), Rule::Parse, e.to_string())),
            }
        }
    }
    out
}

/// Model metadata, one JSON object per line.
pub(crate) fn parse_models(path: &Path, text: &str) -> Parsed<ModelSpec> {
    let file = path.display().to_string();
    let mut out = Parsed { items: Vec::new(), issues: Vec::new() };
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<ModelSpec>(line) {
            Ok(m) if m.params_b.is_finite() && m.params_b > 0.0 => out.items.push((n, m)),
            Ok(m) => out.issues.push(Issue::new(
                &file,
                Some(n),
                Rule::InvalidModel,
                format!("params_b of {} must be a positive number", m.model),
            )),
            Err(e) => out.issues.push(Issue::new(&file, Some(n), Rule::Parse, e.to_string())),
        }
    }
    out
}

/// Routing corpus, one JSON object per line.
pub fn read_corpus(path: &Path) -> Result<Vec<CorpusItem>> {
    let text = std::fs::read_to_string(path)?;
    parse_corpus(&text, &path.display().to_string())
}

pub fn parse_corpus(text: &str, source: &str) -> Result<Vec<CorpusItem>> {
    let mut items = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let item: CorpusItem = serde_json::from_str(line)
            .map_err(|e| Error::parse(format!("{source}:{}", i + 1), e.to_string()))?;
        item.check_outcomes()
            .map_err(|e| Error::parse(format!("{source}:{}", i + 1), e.to_string()))?;
        items.push(item);
    }
    Ok(items)
}

pub fn write_jsonl<T: Serialize, W: Write>(mut w: W, items: &[T]) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
