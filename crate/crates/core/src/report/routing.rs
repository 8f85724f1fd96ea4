use serde_json::{json, Value};

use super::{Cell, Report, Table};
use crate::dpr::RoutingReport;

/// Headline row: Total, Sampled, Correct, Accuracy, BestBaseline.
pub struct RoutingSummary<'a>(pub &'a RoutingReport<f64>);

impl Report for RoutingSummary<'_> {
    fn table(&self) -> Table {
        let r = self.0;
        let mut t = Table::new(["Total", "Sampled", "Correct", "Accuracy", "BestBaseline"]);
        t.push(vec![
            Cell::Int(r.total),
            Cell::Int(r.sampled),
            Cell::Int(r.hits),
            Cell::Pct(r.accuracy),
            Cell::Pct(r.best_baseline),
        ]);
        t
    }

    /// A single object rather than an array.
    fn json(&self) -> Value {
        match self.table().to_json() {
            Value::Array(mut rows) => rows.remove(0),
            other => other,
        }
    }
}

/// One row per routed test item.
pub struct RoutingResultsTable<'a>(pub &'a RoutingReport<f64>);

impl Report for RoutingResultsTable<'_> {
    fn table(&self) -> Table {
        let mut t = Table::new(["item_id", "anchor_id", "similarity", "recommended_set", "hit", "fallback"]);
        for r in &self.0.results {
            let set: Vec<&str> = r.recommended.iter().map(|p| p.code()).collect();
            t.push(vec![
                Cell::text(&r.item_id),
                Cell::text(&r.anchor_id),
                Cell::Frac(r.similarity),
                Cell::text(set.join(";")),
                Cell::Int(usize::from(r.hit)),
                Cell::Int(usize::from(r.fallback)),
            ]);
        }
        t
    }
}

/// Context that does not fit the headline columns: which persona the best
/// static baseline is, the no-persona accuracy, the oracle ceiling and the
/// fallback count.
pub struct RoutingDetails<'a> {
    pub report: &'a RoutingReport<f64>,
    pub seed: u64,
    pub ratio: f64,
}

impl Report for RoutingDetails<'_> {
    fn table(&self) -> Table {
        let r = self.report;
        let mut t = Table::new([
            "Dataset",
            "BestPersona",
            "BestBaseline",
            "NoPersonaBaseline",
            "OracleUpperBound",
            "Fallbacks",
            "Seed",
            "Ratio",
        ]);
        t.push(vec![
            Cell::text(&r.dataset),
            Cell::text(r.best_persona.code()),
            Cell::Pct(r.best_baseline),
            r.no_persona.map_or(Cell::Empty, Cell::Pct),
            Cell::Pct(r.oracle),
            Cell::Int(r.results.iter().filter(|x| x.fallback).count()),
            Cell::Int(self.seed as usize),
            Cell::Real(self.ratio),
        ]);
        t
    }

    fn json(&self) -> Value {
        match self.table().to_json() {
            Value::Array(mut rows) => rows.remove(0),
            _ => json!({}),
        }
    }
}
