//! Aggregate analyses over an [`EffectMatrix`]. All means are unweighted
//! macro-averages, and sums run in sorted key order so results do not depend
//! on input order.

use std::collections::{BTreeMap, BTreeSet};

use super::effects::EffectMatrix;
use super::study::{CognitiveDomain, Comparison, DomainMap, HumanHypothesis, ModelSpec, Prediction};
use crate::error::{Error, Result};
use crate::persona::{PersonaCondition, Trait};
use crate::scalar::{mean, sgn, Scalar};
use crate::stats::spearman_rho;

fn subset_names(subset: &[ModelSpec]) -> Result<Vec<&str>> {
    if subset.is_empty() {
        return Err(Error::InvalidArgument("model subset is empty".into()));
    }
    let names: BTreeSet<&str> = subset.iter().map(|m| m.model.as_str()).collect();
    if names.len() != subset.len() {
        return Err(Error::InvalidArgument("model subset lists a model twice".into()));
    }
    Ok(names.into_iter().collect())
}

/// Fraction of `values` whose sign equals the sign of `reference`, with
/// sgn(0) = 0 on both sides.
fn sign_agreement<T: Scalar>(values: &[T], reference: T) -> T {
    let target = sgn(reference);
    let hits = values.iter().filter(|&&v| sgn(v) == target).count();
    T::ratio(hits, values.len())
}

/// Mean ΔAcc over the models of `subset` (percentage points).
pub fn mean_effect_cross_arch<T: Scalar>(
    effects: &EffectMatrix<T>,
    subset: &[ModelSpec],
    persona: PersonaCondition,
    dataset: &str,
) -> Result<T> {
    let deltas = subset_deltas(effects, subset, persona, dataset)?;
    Ok(mean(deltas).expect("subset is nonempty"))
}

fn subset_deltas<T: Scalar>(
    effects: &EffectMatrix<T>,
    subset: &[ModelSpec],
    persona: PersonaCondition,
    dataset: &str,
) -> Result<Vec<T>> {
    subset_names(subset)?
        .into_iter()
        .map(|m| effects.delta_acc(m, persona, dataset))
        .collect()
}

/// Direction consistency: share of subset models whose effect has the same
/// sign as the subset mean effect.
pub fn direction_consistency<T: Scalar>(
    effects: &EffectMatrix<T>,
    subset: &[ModelSpec],
    persona: PersonaCondition,
    dataset: &str,
) -> Result<T> {
    let deltas = subset_deltas(effects, subset, persona, dataset)?;
    let avg = mean(deltas.iter().copied()).expect("subset is nonempty");
    Ok(sign_agreement(&deltas, avg))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sensitivity<T> {
    /// Mean absolute relative effect over the included conditions.
    pub value: T,
    pub included: usize,
    /// Conditions dropped because their relative effect is undefined.
    pub skipped: usize,
}

/// Mean of `|ΔAcc_rel|` over the ten polar conditions. Conditions with an
/// undefined relative effect (zero baseline) are skipped and counted.
pub fn sensitivity<T: Scalar>(effects: &EffectMatrix<T>, model: &str, dataset: &str) -> Result<Sensitivity<T>> {
    let mut values = Vec::with_capacity(10);
    let mut skipped = 0;
    for p in PersonaCondition::polar() {
        match effects.relative_effect(model, p, dataset) {
            Ok(r) => values.push(r.abs()),
            Err(Error::UndefinedRelativeEffect { .. }) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    match mean(values.iter().copied()) {
        Some(value) => Ok(Sensitivity {
            value,
            included: values.len(),
            skipped,
        }),
        None => Err(Error::EmptyAggregate(format!(
            "no defined relative effects for model={model} dataset={dataset}"
        ))),
    }
}

/// What the direction trend correlates against scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrendTarget {
    Persona(PersonaCondition),
    /// Mean ΔAcc over the ten polar conditions.
    Aggregate,
}

#[derive(Debug)]
pub struct ScalingTrends<T> {
    /// Spearman between log-parameters and ΔAcc.
    pub direction: Result<T>,
    /// Spearman between log-parameters and sensitivity.
    pub magnitude: Result<T>,
}

/// Direction and sensitivity trends across a family ordered by scale. Each
/// trend fails independently.
pub fn scaling_trends<T: Scalar>(
    effects: &EffectMatrix<T>,
    family: &[ModelSpec],
    target: TrendTarget,
    dataset: &str,
) -> Result<ScalingTrends<T>> {
    subset_names(family)?;
    if family.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "scaling trends need at least 3 scales, got {}",
            family.len()
        )));
    }
    let scales: BTreeSet<u64> = family.iter().map(|m| m.params_b.to_bits()).collect();
    if scales.len() != family.len() || family.iter().any(|m| m.params_b.is_nan() || m.params_b <= 0.0) {
        return Err(Error::InvalidArgument("family parameter counts must be distinct and positive".into()));
    }
    let mut members: Vec<&ModelSpec> = family.iter().collect();
    members.sort_by(|a, b| a.params_b.total_cmp(&b.params_b));
    let log_params: Vec<T> = members.iter().map(|m| T::lit(m.log_params())).collect();

    let direction = members
        .iter()
        .map(|m| trend_effect(effects, &m.model, target, dataset))
        .collect::<Result<Vec<T>>>()
        .and_then(|ys| spearman_rho(&log_params, &ys));
    let magnitude = members
        .iter()
        .map(|m| sensitivity(effects, &m.model, dataset).map(|s| s.value))
        .collect::<Result<Vec<T>>>()
        .and_then(|ys| spearman_rho(&log_params, &ys));
    Ok(ScalingTrends { direction, magnitude })
}

fn trend_effect<T: Scalar>(effects: &EffectMatrix<T>, model: &str, target: TrendTarget, dataset: &str) -> Result<T> {
    match target {
        TrendTarget::Persona(p) => effects.delta_acc(model, p, dataset),
        TrendTarget::Aggregate => {
            let deltas = PersonaCondition::polar()
                .map(|p| effects.delta_acc(model, p, dataset))
                .collect::<Result<Vec<T>>>()?;
            Ok(mean(deltas).expect("ten polar conditions"))
        }
    }
}

/// Mean ΔAcc over every (model, dataset) cell whose dataset maps to `group`.
pub fn domain_aggregate<T: Scalar>(
    effects: &EffectMatrix<T>,
    domains: &DomainMap,
    persona: PersonaCondition,
    group: CognitiveDomain,
) -> Result<T> {
    let datasets: BTreeSet<&str> = domains.datasets_in(group).collect();
    let values = effects
        .deltas()
        .iter()
        .filter(|(k, _)| k.persona == persona && datasets.contains(k.dataset.as_str()))
        .map(|(_, &v)| v);
    mean(values).ok_or_else(|| {
        Error::EmptyAggregate(format!("no {persona} effects in domain {group}"))
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraitDominance<T> {
    /// Mean absolute polarity gap (percentage points).
    pub impact: T,
    /// Mean signed polarity gap (percentage points).
    pub avg_gap: T,
    /// Share of cells whose gap sign equals the sign of `avg_gap`.
    pub uniformity: T,
    pub cells: usize,
}

/// Impact, average gap and uniformity of trait `target` over every
/// (model, dataset) block in the matrix.
pub fn trait_dominance<T: Scalar>(effects: &EffectMatrix<T>, target: Trait) -> Result<TraitDominance<T>> {
    let gaps = effects
        .blocks()
        .into_iter()
        .map(|(m, d)| effects.polarity_gap(m, target, d))
        .collect::<Result<Vec<T>>>()?;
    let Some(avg_gap) = mean(gaps.iter().copied()) else {
        return Err(Error::EmptyAggregate(format!("no polarity gaps for trait {target}")));
    };
    Ok(TraitDominance {
        impact: mean(gaps.iter().map(|g| g.abs())).expect("nonempty"),
        avg_gap,
        uniformity: sign_agreement(&gaps, avg_gap),
        cells: gaps.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominanceRow<T> {
    pub target: Trait,
    pub dominance: TraitDominance<T>,
    pub rank: usize,
}

/// All five traits ranked by uniformity, highest first. Ties share the
/// smallest rank and the next rank is skipped (1, 1, 3, ...). Rows are
/// ordered by rank, then by descending impact, then by trait letter.
pub fn dominance_table<T: Scalar>(effects: &EffectMatrix<T>) -> Result<Vec<DominanceRow<T>>> {
    let scored = Trait::ALL
        .into_iter()
        .map(|t| trait_dominance(effects, t).map(|d| (t, d)))
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<DominanceRow<T>> = scored
        .iter()
        .map(|&(target, dominance)| DominanceRow {
            target,
            dominance,
            rank: 1 + scored
                .iter()
                .filter(|(_, other)| other.uniformity > dominance.uniformity)
                .count(),
        })
        .collect();
    rows.sort_by(|a, b| {
        a.rank
            .cmp(&b.rank)
            .then(b.dominance.impact.partial_cmp(&a.dominance.impact).unwrap_or(std::cmp::Ordering::Equal))
            .then(a.target.cmp(&b.target))
    });
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonOutcome<T> {
    pub comparison: Comparison,
    /// Polarity gap averaged over models (percentage points).
    pub mean_gap: T,
    pub prediction: Prediction,
    pub matches: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchRate<T> {
    pub matches: usize,
    pub total: usize,
    pub rate: T,
}

impl<T: Scalar> MatchRate<T> {
    pub fn new(matches: usize, total: usize) -> Self {
        Self {
            matches,
            total,
            rate: T::ratio(matches, total),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport<T> {
    pub overall: MatchRate<T>,
    pub per_trait: BTreeMap<Trait, MatchRate<T>>,
    pub outcomes: Vec<ComparisonOutcome<T>>,
}

/// Scores each listed (trait, dataset) comparison: it matches when the
/// model-averaged polarity gap has the sign the hypothesis predicts (high:
/// positive, low: negative). A zero gap never matches.
pub fn human_consistency<T: Scalar>(
    effects: &EffectMatrix<T>,
    hypotheses: &[HumanHypothesis],
    comparisons: &[Comparison],
) -> Result<ConsistencyReport<T>> {
    if comparisons.is_empty() {
        return Err(Error::InvalidArgument("comparison list is empty".into()));
    }
    let mut by_trait = BTreeMap::new();
    for h in hypotheses {
        if by_trait.insert(h.target, h.prediction).is_some() {
            return Err(Error::InvalidArgument(format!("two hypotheses for trait {}", h.target)));
        }
    }
    let models = effects.models();
    let mut outcomes = Vec::with_capacity(comparisons.len());
    for c in comparisons {
        let prediction = *by_trait
            .get(&c.target)
            .ok_or_else(|| Error::InvalidArgument(format!("no hypothesis for trait {}", c.target)))?;
        let expected = match prediction {
            Prediction::High => 1,
            Prediction::Low => -1,
            Prediction::TaskDependent => {
                return Err(Error::InvalidArgument(format!(
                    "trait {} has a task-dependent hypothesis and cannot be scored on {}",
                    c.target, c.dataset
                )))
            }
        };
        let gaps = models
            .iter()
            .filter(|m| effects.blocks().contains(&(**m, c.dataset.as_str())))
            .map(|m| effects.polarity_gap(m, c.target, &c.dataset))
            .collect::<Result<Vec<T>>>()?;
        let mean_gap = mean(gaps).ok_or_else(|| {
            Error::EmptyAggregate(format!("no gaps for trait {} on {}", c.target, c.dataset))
        })?;
        outcomes.push(ComparisonOutcome {
            comparison: c.clone(),
            mean_gap,
            prediction,
            matches: sgn(mean_gap) == expected,
        });
    }
    Ok(tally_outcomes(outcomes))
}

fn tally_outcomes<T: Scalar>(outcomes: Vec<ComparisonOutcome<T>>) -> ConsistencyReport<T> {
    let mut counts: BTreeMap<Trait, (usize, usize)> = BTreeMap::new();
    for o in &outcomes {
        let e = counts.entry(o.comparison.target).or_default();
        e.0 += usize::from(o.matches);
        e.1 += 1;
    }
    let matches = outcomes.iter().filter(|o| o.matches).count();
    ConsistencyReport {
        overall: MatchRate::new(matches, outcomes.len()),
        per_trait: counts
            .into_iter()
            .map(|(t, (m, n))| (t, MatchRate::new(m, n)))
            .collect(),
        outcomes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: PersonaCondition = PersonaCondition::Baseline;

    fn spec(name: &str, params: f64) -> ModelSpec {
        ModelSpec::new(name, params, "fam", true)
    }

    /// Baseline 0.5 everywhere; persona `p` at 0.5 + delta/100.
    fn with_deltas(p: PersonaCondition, deltas: &[(&str, &str, f64)]) -> EffectMatrix<f64> {
        let mut cells = Vec::new();
        for &(m, d, delta) in deltas {
            cells.push((m.to_string(), BASE, d.to_string(), 0.5));
            cells.push((m.to_string(), p, d.to_string(), 0.5 + delta / 100.0));
        }
        EffectMatrix::from_accuracies(cells).unwrap()
    }

    #[test]
    fn mean_effect_cases() {
        let p = Trait::Openness.high();
        let e = with_deltas(p, &[("a", "d", 2.0), ("b", "d", -2.0)]);
        let one = mean_effect_cross_arch(&e, &[spec("a", 7.0)], p, "d").unwrap();
        assert!((one - 2.0).abs() < 1e-12);
        let both = mean_effect_cross_arch(&e, &[spec("a", 7.0), spec("b", 8.0)], p, "d").unwrap();
        assert!(both.abs() < 1e-12);
        assert!(matches!(
            mean_effect_cross_arch(&e, &[], p, "d"),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn direction_consistency_cases() {
        let p = Trait::Extraversion.low();
        let e = with_deltas(p, &[("a", "d", 3.0), ("b", "d", 3.0), ("c", "d", 3.0), ("z", "d", -3.0)]);
        let subset: Vec<_> = ["a", "b", "c", "z"].iter().map(|m| spec(m, 7.0)).collect();
        assert_eq!(direction_consistency(&e, &subset, p, "d").unwrap(), 0.75);
        let e = with_deltas(p, &[("a", "d", 1.0), ("b", "d", 2.0)]);
        assert_eq!(direction_consistency(&e, &subset[..2], p, "d").unwrap(), 1.0);
    }

    #[test]
    fn zero_mean_matches_only_zero_cells() {
        let p = Trait::Neuroticism.high();
        let e = with_deltas(p, &[("a", "d", 2.0), ("b", "d", -2.0), ("c", "d", 0.0)]);
        let subset: Vec<_> = ["a", "b", "c"].iter().map(|m| spec(m, 7.0)).collect();
        let sa = direction_consistency(&e, &subset, p, "d").unwrap();
        assert!((sa - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn sensitivity_partial_and_zero() {
        let mut cells = vec![("m", BASE, "d", 0.5)];
        cells.push(("m", Trait::Openness.high(), "d", 0.55));
        cells.push(("m", Trait::Openness.low(), "d", 0.35));
        let e = EffectMatrix::from_accuracies(cells).unwrap();
        // the other eight conditions are missing
        assert!(matches!(sensitivity(&e, "m", "d"), Err(Error::MissingCell { .. })));

        let cells: Vec<_> = PersonaCondition::ALL.iter().map(|&p| ("m", p, "d", 0.4)).collect();
        let e = EffectMatrix::from_accuracies(cells).unwrap();
        let s = sensitivity(&e, "m", "d").unwrap();
        assert_eq!((s.value, s.included, s.skipped), (0.0, 10, 0));

        let cells: Vec<_> = PersonaCondition::ALL.iter().map(|&p| ("m", p, "d", 0.0)).collect();
        let e = EffectMatrix::from_accuracies(cells).unwrap();
        assert!(matches!(sensitivity(&e, "m", "d"), Err(Error::EmptyAggregate(_))));
    }

    #[test]
    fn scaling_trend_edge_cases() {
        // ΔAcc rises with scale; sensitivity identical at every scale
        let scales = [0.5, 1.5, 3.0, 7.0, 14.0];
        let mut cells = Vec::new();
        let mut family = Vec::new();
        for (i, &s) in scales.iter().enumerate() {
            let name = format!("q{s}");
            cells.push((name.clone(), BASE, "d".to_string(), 0.5));
            for p in PersonaCondition::polar() {
                let acc = if p == Trait::Openness.high() { 0.4 + 0.01 * i as f64 } else { 0.5 };
                cells.push((name.clone(), p, "d".to_string(), acc));
            }
            family.push(spec(&name, s));
        }
        let e = EffectMatrix::from_accuracies(cells).unwrap();
        let tr = scaling_trends(&e, &family, TrendTarget::Persona(Trait::Openness.high()), "d").unwrap();
        assert!((tr.direction.unwrap() - 1.0).abs() < 1e-12);
        // |ΔAcc_rel| varies here, so the magnitude trend is defined
        assert!(tr.magnitude.is_ok());

        let flat: Vec<_> = scales
            .iter()
            .flat_map(|&s| PersonaCondition::ALL.map(move |p| (format!("q{s}"), p, "d".to_string(), 0.5)))
            .collect();
        let e = EffectMatrix::from_accuracies(flat).unwrap();
        let tr = scaling_trends(&e, &family, TrendTarget::Aggregate, "d").unwrap();
        assert!(matches!(tr.magnitude, Err(Error::UndefinedCorrelation(_))));
        assert!(matches!(tr.direction, Err(Error::UndefinedCorrelation(_))));

        assert!(scaling_trends(&e, &family[..2], TrendTarget::Aggregate, "d").is_err());
        let dup = vec![spec("q0.5", 1.0), spec("q1.5", 1.0), spec("q3", 3.0)];
        assert!(scaling_trends(&e, &dup, TrendTarget::Aggregate, "d").is_err());
    }

    #[test]
    fn domain_aggregate_cases() {
        let p = Trait::Agreeableness.high();
        let mut domains = DomainMap::standard();
        let e = with_deltas(p, &[("a", "GPQA", 4.0), ("a", "MMLU-Pro", -2.0), ("a", "BBH", 9.0)]);
        let v = domain_aggregate(&e, &domains, p, CognitiveDomain::Knowledge).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let v = domain_aggregate(&e, &domains, p, CognitiveDomain::MultiStepReasoning).unwrap();
        assert!((v - 9.0).abs() < 1e-12);
        assert!(matches!(
            domain_aggregate(&e, &domains, p, CognitiveDomain::NumericalReasoning),
            Err(Error::EmptyAggregate(_))
        ));
        domains.insert("BBH", CognitiveDomain::Knowledge);
        let v = domain_aggregate(&e, &domains, p, CognitiveDomain::Knowledge).unwrap();
        assert!((v - 11.0 / 3.0).abs() < 1e-12);
    }

    fn gap_grid(t: Trait, gaps: &[(&str, &str, f64)]) -> EffectMatrix<f64> {
        let mut cells = Vec::new();
        for &(m, d, g) in gaps {
            for other in Trait::ALL {
                let (hi, lo) = if other == t { (0.5 + g / 200.0, 0.5 - g / 200.0) } else { (0.5, 0.5) };
                cells.push((m.to_string(), other.high(), d.to_string(), hi));
                cells.push((m.to_string(), other.low(), d.to_string(), lo));
            }
        }
        EffectMatrix::from_accuracies(cells).unwrap()
    }

    #[test]
    fn uniform_gaps() {
        let e = gap_grid(Trait::Openness, &[("a", "d1", 5.0), ("a", "d2", 5.0), ("b", "d1", 5.0)]);
        let d = trait_dominance(&e, Trait::Openness).unwrap();
        assert!((d.impact - 5.0).abs() < 1e-12);
        assert!((d.avg_gap - 5.0).abs() < 1e-12);
        assert_eq!(d.uniformity, 1.0);
        assert_eq!(d.cells, 3);
    }

    #[test]
    fn opposing_gaps_have_zero_uniformity() {
        let e = gap_grid(Trait::Openness, &[("a", "d1", 5.0), ("a", "d2", -5.0)]);
        let d = trait_dominance(&e, Trait::Openness).unwrap();
        assert!((d.impact - 5.0).abs() < 1e-12);
        assert!(d.avg_gap.abs() < 1e-12);
        assert_eq!(d.uniformity, 0.0);
    }

    #[test]
    fn ranks_use_competition_ties() {
        // O and E perfectly uniform, C 2/3, A 1/3
        let mut cells = Vec::new();
        let gaps: [(Trait, [f64; 3]); 5] = [
            (Trait::Openness, [8.0, 6.0, 4.0]),
            (Trait::Extraversion, [2.0, 2.0, 2.0]),
            (Trait::Conscientiousness, [3.0, 3.0, -1.0]),
            (Trait::Agreeableness, [6.0, -1.0, -1.0]),
            (Trait::Neuroticism, [0.0, 0.0, 0.0]),
        ];
        for (i, d) in ["d1", "d2", "d3"].iter().enumerate() {
            for (t, g) in &gaps {
                cells.push(("m", t.high(), *d, 0.5 + g[i] / 200.0));
                cells.push(("m", t.low(), *d, 0.5 - g[i] / 200.0));
            }
        }
        let e = EffectMatrix::from_accuracies(cells).unwrap();
        let table = dominance_table(&e).unwrap();
        let order: Vec<(Trait, usize)> = table.iter().map(|r| (r.target, r.rank)).collect();
        // all-zero N gaps: average 0 and every cell has sign 0, so uniformity 1
        assert_eq!(
            order,
            vec![
                (Trait::Openness, 1),
                (Trait::Extraversion, 1),
                (Trait::Neuroticism, 1),
                (Trait::Conscientiousness, 4),
                (Trait::Agreeableness, 5),
            ]
        );
    }

    #[test]
    fn human_consistency_rules() {
        let e = gap_grid(Trait::Openness, &[("a", "d1", 5.0), ("a", "d2", -5.0), ("b", "d1", 1.0)]);
        let hyp = HumanHypothesis::defaults();
        let report = human_consistency(
            &e,
            &hyp,
            &[Comparison::new(Trait::Openness, "d1"), Comparison::new(Trait::Openness, "d2")],
        )
        .unwrap();
        assert_eq!((report.overall.matches, report.overall.total), (1, 2));
        assert!((report.outcomes[0].mean_gap - 3.0).abs() < 1e-12);

        // N predicted low: zero gaps never match
        let r = human_consistency(&e, &hyp, &[Comparison::new(Trait::Neuroticism, "d1")]).unwrap();
        assert_eq!(r.overall.matches, 0);

        let err = human_consistency(&e, &hyp, &[Comparison::new(Trait::Agreeableness, "d1")]).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
        assert!(human_consistency(&e, &hyp, &[]).is_err());
    }
}
