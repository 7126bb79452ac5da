//! Paths, independence, state counting and behavioral equivalence.

pub mod equivalence;
pub mod metrics;
pub mod paths;

pub use equivalence::{
    check_equivalence, check_equivalence_with, compare_tables, map_state, matches_phrase, EquivalenceOptions,
    EquivalenceReport, StateMap, MAP_BUDGET,
};
pub use metrics::{
    arrangements, arrangements_sum, binomial, complexity_bounds, expanded_size_estimate, factorial, permutation_rule_reports, rule_bounds,
    rule_report, rule_states, RuleStateReport, RuleStates, SegmentBound,
};
pub use paths::{is_independent, subset_violations, Paths, Word};
