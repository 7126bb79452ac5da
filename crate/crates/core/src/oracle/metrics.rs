//! Per-rule state counts and the closed-form state complexity bounds.

use std::collections::{BTreeSet, HashSet, VecDeque};

use serde::Serialize;

use crate::automaton::{Automaton, StateId};
use crate::grammar::{Grammar, RuleId, Segment};
use crate::items::{self, Dot, Item};
use crate::oracle::paths::{derived_rules, is_independent};

/// States that process one rule, counted from each start state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleStates {
    /// `(start state, states reached from it)` for every state holding a
    /// dot-at-start item of the rule.
    pub per_start: Vec<(StateId, usize)>,
    /// Largest per-start count; the headline number.
    pub count: usize,
    /// Distinct states over all starts.
    pub union: usize,
}

/// Follows every item of `r` (or of its expansions) from each start state,
/// layer by layer, and counts the states visited, the start included.
pub fn rule_states(a: &Automaton, r: RuleId) -> RuleStates {
    let g = a.grammar();
    let rules: HashSet<RuleId> = derived_rules(a, r).into_iter().collect();
    let mut union = HashSet::new();
    let mut per_start = Vec::new();
    for s in 0..a.len() {
        let starts: Vec<Item> = a
            .state(s)
            .items
            .iter()
            .copied()
            .filter(|i| rules.contains(&i.rule) && i.dot == Dot::Top(0))
            .collect();
        if starts.is_empty() || a.state(s).is_error {
            continue;
        }
        let mut seen: HashSet<(StateId, Item)> = starts.iter().map(|&i| (s, i)).collect();
        let mut queue: VecDeque<(StateId, Item)> = seen.iter().copied().collect();
        let mut states = BTreeSet::from([s]);
        while let Some((at, item)) = queue.pop_front() {
            for y in items::next(g, item) {
                let Ok(moved) = items::step(g, item, y) else { continue };
                let to = a.transition(at, y);
                if a.state(to).is_error {
                    continue;
                }
                if seen.insert((to, moved)) {
                    states.insert(to);
                    queue.push_back((to, moved));
                }
            }
        }
        per_start.push((s, states.len()));
        union.extend(states);
    }
    RuleStates {
        count: per_start.iter().map(|&(_, n)| n).max().unwrap_or(0),
        per_start,
        union: union.len(),
    }
}

/// Bounds for one permutation segment of a rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SegmentBound {
    pub segment: usize,
    pub size: u32,
    /// Product of `|π_j|!` over the permutation segments before this one.
    pub multiplier: Option<u128>,
    /// `2^n`, the dot-at-start state included.
    pub modified: u128,
    /// `M * Σ_{k=0}^{n} n!/(n-k)!`.
    pub expanded: Option<u128>,
    /// `Σ_{k=1}^{n} C(n,k)`, which is `2^n - 1`.
    pub nonempty_subsets: u128,
}

pub fn factorial(n: u32) -> Option<u128> {
    (1..=n as u128).try_fold(1u128, |acc, k| acc.checked_mul(k))
}

/// `n!/(n-k)!`
pub fn arrangements(n: u32, k: u32) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    (n - k + 1..=n).try_fold(1u128, |acc, j| acc.checked_mul(j as u128))
}

pub fn binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, j| acc * (n - j) as u128 / (j + 1) as u128)
}

/// `Σ_{k=0}^{n} n!/(n-k)!`
pub fn arrangements_sum(n: u32) -> Option<u128> {
    (0..=n).try_fold(0u128, |acc, k| acc.checked_add(arrangements(n, k)?))
}

pub fn complexity_bounds(g: &Grammar, r: RuleId) -> Vec<SegmentBound> {
    let mut m = Some(1u128);
    let mut out = Vec::new();
    for (i, seg) in g.rule(r).rhs.segments().iter().enumerate() {
        let Segment::Permutation(p) = seg else { continue };
        let n = p.len() as u32;
        out.push(SegmentBound {
            segment: i,
            size: n,
            multiplier: m,
            modified: 1u128 << n,
            expanded: m.zip(arrangements_sum(n)).and_then(|(m, s)| m.checked_mul(s)),
            nonempty_subsets: (1..=n).map(|k| binomial(n, k)).sum(),
        });
        m = m.zip(factorial(n)).and_then(|(m, f)| m.checked_mul(f));
    }
    out
}

/// Whole-rule bounds: upper for the modified construction, lower for the
/// expanded one. Symbol segments add one state per order reached so far.
pub fn rule_bounds(g: &Grammar, r: RuleId) -> (u128, Option<u128>) {
    let mut modified = 1u128;
    let mut expanded = Some(1u128);
    let mut m = Some(1u128);
    for seg in g.rule(r).rhs.segments() {
        match seg {
            Segment::Symbol(_) => {
                modified += 1;
                expanded = expanded.zip(m).and_then(|(e, m)| e.checked_add(m));
            }
            Segment::Permutation(p) => {
                let n = p.len() as u32;
                modified += (1u128 << n) - 1;
                let layer = arrangements_sum(n).map(|s| s - 1);
                expanded = expanded
                    .zip(m.zip(layer).and_then(|(m, l)| m.checked_mul(l)))
                    .and_then(|(e, x)| e.checked_add(x));
                m = m.zip(factorial(n)).and_then(|(m, f)| m.checked_mul(f));
            }
        }
    }
    (modified, expanded)
}

/// Rough size of the standard automaton on the expanded grammar, from the
/// per-rule lower bounds; `None` on overflow. Cheap to compute before
/// deciding whether to build it.
pub fn expanded_size_estimate(g: &Grammar) -> Option<u128> {
    g.rules()
        .iter()
        .try_fold(0u128, |acc, r| acc.checked_add(rule_bounds(g, r.id).1?))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleStateReport {
    pub rule: u32,
    pub modified: usize,
    pub modified_union: usize,
    pub expanded: Option<usize>,
    pub expanded_union: Option<usize>,
    pub bound_modified: u128,
    pub bound_expanded: Option<u128>,
    pub independent: bool,
}

/// Report for one rule of the grammar underlying `modified`; `expanded` is the
/// standard automaton of the expanded grammar, when built.
pub fn rule_report(modified: &Automaton, expanded: Option<&Automaton>, r: RuleId) -> RuleStateReport {
    let m = rule_states(modified, r);
    let e = expanded.map(|a| rule_states(a, r));
    let (bound_modified, bound_expanded) = rule_bounds(modified.grammar(), r);
    RuleStateReport {
        rule: r.0,
        modified: m.count,
        modified_union: m.union,
        expanded: e.as_ref().map(|e| e.count),
        expanded_union: e.as_ref().map(|e| e.union),
        bound_modified,
        bound_expanded,
        independent: is_independent(modified, r),
    }
}

/// Reports for every permutation rule.
pub fn permutation_rule_reports(modified: &Automaton, expanded: Option<&Automaton>) -> Vec<RuleStateReport> {
    modified
        .grammar()
        .permutation_rules()
        .map(|r| rule_report(modified, expanded, r.id))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{build_modified, build_standard};
    use crate::fixtures;
    use crate::grammar::{expand_grammar, parse_grammar};

    #[test]
    fn closed_forms() {
        assert_eq!(arrangements_sum(3), Some(16));
        assert_eq!(arrangements_sum(6), Some(1957));
        assert_eq!(arrangements_sum(8), Some(109_601));
        assert!(factorial(34).is_some());
        assert_eq!(factorial(35), None);
        for n in 0..=40 {
            let subsets: u128 = (1..=n).map(|k| binomial(n, k)).sum();
            assert_eq!(subsets, (1u128 << n) - 1);
        }
    }

    #[test]
    fn segment_multipliers() {
        let g = parse_grammar("X -> << A || B >> << C || D >> ;").unwrap();
        let b = complexity_bounds(&g, RuleId(1));
        assert_eq!(b[0].multiplier, Some(1));
        assert_eq!(b[1].multiplier, Some(2));
        assert_eq!(b[1].expanded, Some(10));
        assert_eq!(b[0].modified, 4);
        assert_eq!(b[0].nonempty_subsets, 3);
    }

    #[test]
    fn json_counts() {
        let g = fixtures::json();
        let a = build_modified(&g).unwrap();
        let ae = build_standard(&expand_grammar(&g)).unwrap();
        let b3 = complexity_bounds(&g, RuleId(3));
        assert_eq!((b3[0].modified, b3[0].expanded), (8, Some(16)));
        let b6 = complexity_bounds(&g, RuleId(6));
        assert_eq!((b6[0].modified, b6[0].expanded), (64, Some(1957)));
        let reports = permutation_rule_reports(&a, Some(&ae));
        let got: Vec<_> = reports.iter().map(|r| (r.rule, r.modified, r.expanded)).collect();
        assert_eq!(got, [(3, 8, Some(16)), (6, 64, Some(1957))]);
        assert!(reports.iter().all(|r| r.independent));
    }

    #[test]
    fn rule_bounds_match_counts_for_mixed_rules() {
        let g = parse_grammar("X -> a << B || C >> d << E || F >> ;").unwrap();
        let a = build_modified(&g).unwrap();
        let ae = build_standard(&expand_grammar(&g)).unwrap();
        let (bm, be) = rule_bounds(&g, RuleId(1));
        assert_eq!(rule_states(&a, RuleId(1)).count as u128, bm);
        assert_eq!(Some(rule_states(&ae, RuleId(1)).count as u128), be);
    }

    #[test]
    fn size_estimate_tracks_expansion() {
        let json = expanded_size_estimate(&fixtures::json()).unwrap();
        let ae = build_standard(&expand_grammar(&fixtures::json())).unwrap();
        assert!(json < 10_000);
        assert!(json.abs_diff(ae.len() as u128) < 20);
        assert!(expanded_size_estimate(&fixtures::flat_permutation(7)).unwrap() > 10_000);
        assert_eq!(expanded_size_estimate(&fixtures::flat_permutation(40)), None);
    }

    #[test]
    fn several_starts_are_reported_separately() {
        let g = parse_grammar("S -> P P ; P -> << a || b >> ;").unwrap();
        let a = build_modified(&g).unwrap();
        let rs = rule_states(&a, RuleId(2));
        assert_eq!(rs.per_start.len(), 2);
        assert_eq!(rs.count, 4);
        assert!(rs.union >= rs.count);
    }
}
