use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{heatmap::render_heatmap_svg, persist_report, Cell, Format, Table};
use crate::error::{Error, Result};
use crate::ingest::Study;
use crate::metrics::{
    direction_consistency, dominance_table, domain_aggregate, human_consistency, mean_effect_cross_arch,
    scaling_trends, sensitivity, CognitiveDomain, EffectMatrix, ModelSpec, Prediction, TrendTarget,
};
use crate::persona::PersonaCondition;

/// Which analyses to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    /// Per-persona effect and direction-consistency matrices.
    Rq1,
    /// Scaling: sensitivity per model, scale correlations, domain aggregates.
    Rq2,
    /// Trait dominance table.
    Rq3,
    /// Agreement with human hypotheses.
    Rq4,
    All,
}

impl Which {
    fn includes(self, other: Which) -> bool {
        self == Which::All || self == other
    }
}

impl FromStr for Which {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rq1" => Ok(Which::Rq1),
            "rq2" => Ok(Which::Rq2),
            "rq3" => Ok(Which::Rq3),
            "rq4" => Ok(Which::Rq4),
            "all" => Ok(Which::All),
            _ => Err(Error::InvalidArgument(format!("unknown analysis {s:?}"))),
        }
    }
}

impl fmt::Display for Which {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Which::Rq1 => "rq1",
            Which::Rq2 => "rq2",
            Which::Rq3 => "rq3",
            Which::Rq4 => "rq4",
            Which::All => "all",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnalysisOutput {
    /// Written files, in write order.
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

struct Writer<'a> {
    dir: &'a Path,
    format: Format,
    out: AnalysisOutput,
}

impl Writer<'_> {
    fn table(&mut self, stem: &str, table: &Table) -> Result<()> {
        let path = self.dir.join(format!("{stem}.{}", self.format.extension()));
        persist_report(table, &path, self.format)?;
        self.out.files.push(path);
        Ok(())
    }

    fn svg(&mut self, stem: &str, svg: String) -> Result<()> {
        let path = self.dir.join(format!("{stem}.svg"));
        std::fs::write(&path, svg)?;
        self.out.files.push(path);
        Ok(())
    }

    fn warn(&mut self, msg: String) {
        self.out.warnings.push(msg);
    }
}

/// Runs the selected analyses over `study` and writes one report per table
/// into `out_dir` (created if needed). Cells that cannot be computed are left
/// empty and reported as warnings.
pub fn analyze(study: &Study, which: Which, out_dir: &Path, format: Format, render: bool) -> Result<AnalysisOutput> {
    std::fs::create_dir_all(out_dir)?;
    let effects: EffectMatrix<f64> = EffectMatrix::from_records(&study.records);
    let mut w = Writer {
        dir: out_dir,
        format,
        out: AnalysisOutput::default(),
    };
    if which.includes(Which::Rq1) {
        rq1(study, &effects, &mut w, render)?;
    }
    if which.includes(Which::Rq2) {
        rq2(study, &effects, &mut w)?;
    }
    if which.includes(Which::Rq3) {
        rq3(&effects, &mut w)?;
    }
    if which.includes(Which::Rq4) {
        if study.comparisons.is_empty() {
            if which == Which::Rq4 {
                return Err(Error::Config("no comparisons configured for rq4".into()));
            }
            w.warn("rq4 skipped: no comparisons configured".into());
        } else {
            rq4(study, &effects, &mut w)?;
        }
    }
    Ok(w.out)
}

fn datasets(effects: &EffectMatrix<f64>) -> Vec<String> {
    effects.datasets().into_iter().map(str::to_string).collect()
}

fn rq1(study: &Study, effects: &EffectMatrix<f64>, w: &mut Writer<'_>, render: bool) -> Result<()> {
    let mut subset = study.arch_subset();
    if subset.is_empty() {
        w.warn("rq1: no models flagged arch_subset, using all models".into());
        subset = study.models.clone();
    }
    let datasets = datasets(effects);
    let personas: Vec<PersonaCondition> = PersonaCondition::polar().collect();
    let mut delta = vec![vec![None; datasets.len()]; personas.len()];
    let mut sa = delta.clone();
    for (i, &p) in personas.iter().enumerate() {
        for (j, d) in datasets.iter().enumerate() {
            match mean_effect_cross_arch(effects, &subset, p, d) {
                Ok(v) => delta[i][j] = Some(v),
                Err(e) => w.warn(format!("rq1: {p} on {d}: {e}")),
            }
            if let Ok(v) = direction_consistency(effects, &subset, p, d) {
                sa[i][j] = Some(v);
            }
        }
    }
    let rows: Vec<String> = personas.iter().map(|p| p.code().to_string()).collect();
    w.table("rq1_delta", &matrix("persona", &rows, &datasets, &delta, Cell::Pct))?;
    w.table("rq1_sa", &matrix("persona", &rows, &datasets, &sa, Cell::Frac))?;
    if render {
        w.svg("rq1_delta", render_heatmap_svg("Mean accuracy change (pp)", &rows, &datasets, &delta, true))?;
        w.svg("rq1_sa", render_heatmap_svg("Direction consistency", &rows, &datasets, &sa, false))?;
    }
    Ok(())
}

fn matrix(
    corner: &str,
    rows: &[String],
    cols: &[String],
    values: &[Vec<Option<f64>>],
    cell: fn(f64) -> Cell,
) -> Table {
    let mut t = Table::new(std::iter::once(corner.to_string()).chain(cols.iter().cloned()));
    for (label, vals) in rows.iter().zip(values) {
        t.push(
            std::iter::once(Cell::text(label))
                .chain(vals.iter().map(|v| v.map_or(Cell::Empty, cell)))
                .collect(),
        );
    }
    t
}

/// Lowercase alphanumerics, everything else folded to `_`.
fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect()
}

fn rq2(study: &Study, effects: &EffectMatrix<f64>, w: &mut Writer<'_>) -> Result<()> {
    let datasets = datasets(effects);
    let families = study.scaling_families();
    if families.is_empty() {
        w.warn("rq2: no family has three or more distinct scales".into());
    }
    for (family, members) in &families {
        rq2_family(family, members, &datasets, effects, w)?;
    }

    let personas: Vec<PersonaCondition> = PersonaCondition::polar().collect();
    let groups: Vec<String> = CognitiveDomain::ALL.iter().map(|g| g.to_string()).collect();
    let mut values = vec![vec![None; groups.len()]; personas.len()];
    for (i, &p) in personas.iter().enumerate() {
        for (j, &g) in CognitiveDomain::ALL.iter().enumerate() {
            match domain_aggregate(effects, &study.domains, p, g) {
                Ok(v) => values[i][j] = Some(v),
                Err(Error::EmptyAggregate(_)) if i == 0 => w.warn(format!("rq2: no data for domain {g}")),
                Err(Error::EmptyAggregate(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    let rows: Vec<String> = personas.iter().map(|p| p.code().to_string()).collect();
    w.table("rq2_domains", &matrix("persona", &rows, &groups, &values, Cell::Pct))
}

fn rq2_family(
    family: &str,
    members: &[ModelSpec],
    datasets: &[String],
    effects: &EffectMatrix<f64>,
    w: &mut Writer<'_>,
) -> Result<()> {
    let stem = file_stem(family);

    let mut sens = Table::new(["model", "params_b"].into_iter().map(String::from).chain(datasets.iter().cloned()));
    for m in members {
        let mut row = vec![Cell::text(&m.model), Cell::Real(m.params_b)];
        for d in datasets {
            row.push(match sensitivity(effects, &m.model, d) {
                Ok(s) => {
                    if s.skipped > 0 {
                        w.warn(format!("rq2: {} on {d}: {} conditions skipped (zero baseline)", m.model, s.skipped));
                    }
                    Cell::Frac(s.value)
                }
                Err(e) => {
                    w.warn(format!("rq2: sensitivity {} on {d}: {e}", m.model));
                    Cell::Empty
                }
            });
        }
        sens.push(row);
    }
    w.table(&format!("rq2_sensitivity_{stem}"), &sens)?;

    let targets: Vec<(String, TrendTarget)> = PersonaCondition::polar()
        .map(|p| (p.code().to_string(), TrendTarget::Persona(p)))
        .chain(std::iter::once(("AGGREGATE".to_string(), TrendTarget::Aggregate)))
        .collect();
    let mut dir = vec![vec![None; datasets.len()]; targets.len()];
    let mut mag = vec![vec![None; datasets.len()]; 1];
    for (i, (label, target)) in targets.iter().enumerate() {
        for (j, d) in datasets.iter().enumerate() {
            let trends = scaling_trends(effects, members, *target, d)?;
            match trends.direction {
                Ok(r) => dir[i][j] = Some(r),
                Err(e) => w.warn(format!("rq2: {family} direction {label} on {d}: {e}")),
            }
            if i == 0 {
                match trends.magnitude {
                    Ok(r) => mag[0][j] = Some(r),
                    Err(e) => w.warn(format!("rq2: {family} magnitude on {d}: {e}")),
                }
            }
        }
    }
    let labels: Vec<String> = targets.into_iter().map(|(l, _)| l).collect();
    w.table(&format!("rq2_rho_dir_{stem}"), &matrix("target", &labels, datasets, &dir, Cell::Frac))?;
    w.table(
        &format!("rq2_rho_mag_{stem}"),
        &matrix("target", &["SENSITIVITY".to_string()], datasets, &mag, Cell::Frac),
    )
}

fn rq3(effects: &EffectMatrix<f64>, w: &mut Writer<'_>) -> Result<()> {
    let mut t = Table::new(["Trait", "Impact", "AvgGap", "Uniformity", "Rank"]);
    for row in dominance_table(effects)? {
        t.push(vec![
            Cell::text(row.target.name()),
            Cell::Pct(row.dominance.impact),
            Cell::Pct(row.dominance.avg_gap),
            Cell::Frac(row.dominance.uniformity),
            Cell::Int(row.rank),
        ]);
    }
    w.table("rq3_trait_dominance", &t)
}

fn rq4(study: &Study, effects: &EffectMatrix<f64>, w: &mut Writer<'_>) -> Result<()> {
    let report = human_consistency(effects, &study.hypotheses, &study.comparisons)?;
    let mut t = Table::new(["Trait", "Matches", "Total", "Rate"]);
    for (target, rate) in &report.per_trait {
        t.push(vec![
            Cell::text(target.name()),
            Cell::Int(rate.matches),
            Cell::Int(rate.total),
            Cell::Pct(100.0 * rate.rate),
        ]);
    }
    t.push(vec![
        Cell::text("Overall"),
        Cell::Int(report.overall.matches),
        Cell::Int(report.overall.total),
        Cell::Pct(100.0 * report.overall.rate),
    ]);
    w.table("rq4_consistency", &t)?;

    let mut c = Table::new(["Trait", "Dataset", "MeanGap", "Prediction", "Match"]);
    for o in &report.outcomes {
        c.push(vec![
            Cell::text(o.comparison.target.name()),
            Cell::text(&o.comparison.dataset),
            Cell::Pct(o.mean_gap),
            Cell::text(match o.prediction {
                Prediction::High => "high",
                Prediction::Low => "low",
                Prediction::TaskDependent => "task-dependent",
            }),
            Cell::Int(usize::from(o.matches)),
        ]);
    }
    w.table("rq4_comparisons", &c)
}
