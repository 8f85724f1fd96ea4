//! Persona-effect analyses over paired benchmark results.

mod analysis;
mod effects;
mod records;
mod study;

pub use analysis::{
    direction_consistency, dominance_table, domain_aggregate, human_consistency,
    mean_effect_cross_arch, scaling_trends, sensitivity, trait_dominance, ComparisonOutcome,
    ConsistencyReport, DominanceRow, MatchRate, ScalingTrends, Sensitivity, TraitDominance,
    TrendTarget,
};
pub use effects::{delta_acc, polarity_gap, relative_effect, EffectMatrix};
pub use records::{CellKey, PairedViolation, RecordSet, ResultRecord, Tally};
pub use study::{CognitiveDomain, Comparison, DomainMap, HumanHypothesis, ModelSpec, Prediction};
pub use crate::stats::spearman_rho;
