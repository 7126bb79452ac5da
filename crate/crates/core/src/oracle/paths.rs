//! Input paths into automaton states and rule independence.

use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use crate::automaton::{Automaton, StateId};
use crate::grammar::{expand_phrase, RuleId, SymbolId};
use crate::items::{self, Item};

pub type Word = Vec<SymbolId>;

/// Backward traversal over the transition graph, memoized by
/// `(state, length)`.
pub struct Paths<'a> {
    a: &'a Automaton,
    preds: Vec<Vec<(StateId, SymbolId)>>,
    memo: HashMap<(StateId, usize), Rc<BTreeSet<Word>>>,
}

impl<'a> Paths<'a> {
    pub fn new(a: &'a Automaton) -> Self {
        let mut preds = vec![Vec::new(); a.len()];
        for s in 0..a.len() {
            if a.state(s).is_error {
                continue;
            }
            for (y, t) in a.edges(s) {
                preds[t].push((s, y));
            }
        }
        Paths {
            a,
            preds,
            memo: HashMap::new(),
        }
    }

    pub fn automaton(&self) -> &'a Automaton {
        self.a
    }

    /// Words of exactly `len` symbols on which some state reaches `state`.
    pub fn exact(&mut self, state: StateId, len: usize) -> Rc<BTreeSet<Word>> {
        if let Some(hit) = self.memo.get(&(state, len)) {
            return Rc::clone(hit);
        }
        let mut out = BTreeSet::new();
        if len == 0 {
            out.insert(Vec::new());
        } else {
            for (p, y) in self.preds[state].clone() {
                for w in self.exact(p, len - 1).iter() {
                    let mut w = w.clone();
                    w.push(y);
                    out.insert(w);
                }
            }
        }
        let out = Rc::new(out);
        self.memo.insert((state, len), Rc::clone(&out));
        out
    }

    /// Longest pre-dot phrase among the state's items.
    pub fn max_len(&self, state: StateId) -> usize {
        let g = self.a.grammar();
        self.a
            .state(state)
            .items
            .iter()
            .map(|&i| items::pre_dot_len(g, i))
            .max()
            .unwrap_or(0)
    }

    /// All non-empty input paths of `state` up to its longest pre-dot phrase.
    pub fn paths(&mut self, state: StateId) -> BTreeSet<Word> {
        if self.a.state(state).is_error {
            return BTreeSet::new();
        }
        let max = self.max_len(state);
        let mut out = BTreeSet::new();
        for len in 1..=max {
            out.extend(self.exact(state, len).iter().cloned());
        }
        out
    }
}

/// Rules of `a`'s grammar that stem from the source rule `r`.
pub(crate) fn derived_rules(a: &Automaton, r: RuleId) -> Vec<RuleId> {
    a.grammar()
        .rules()
        .iter()
        .filter(|e| e.origins.contains(&r))
        .map(|e| e.id)
        .collect()
}

/// Items of rule `r` in each non-error state, with their pre-dot phrases'
/// expansions compared against the state's paths. Returns the offending
/// `(state, item, exact)` triples, where `exact` is false when the path set
/// is not even a subset of the expansion.
fn path_mismatches(paths: &mut Paths<'_>, rule: Option<RuleId>) -> Vec<(StateId, Item, bool)> {
    let a = paths.automaton();
    let g = a.grammar();
    let mut out = Vec::new();
    for s in 0..a.len() {
        if a.state(s).is_error {
            continue;
        }
        for &i in &a.state(s).items {
            if rule.is_some_and(|r| i.rule != r) {
                continue;
            }
            let (alpha, _) = items::split_at_dot(g, i);
            let len = alpha.symbol_len();
            if len == 0 {
                continue;
            }
            let expansion: BTreeSet<Word> = expand_phrase(&alpha).into_iter().collect();
            let found = paths.exact(s, len);
            if !found.is_subset(&expansion) {
                out.push((s, i, false));
            } else if *found != expansion {
                out.push((s, i, true));
            }
        }
    }
    out
}

/// A rule is independent when, in every state holding one of its items
/// `X -> α . β`, the length-|α| paths are exactly the orders of α.
pub fn is_independent(a: &Automaton, r: RuleId) -> bool {
    let mut paths = Paths::new(a);
    derived_rules(a, r)
        .into_iter()
        .all(|e| path_mismatches(&mut paths, Some(e)).is_empty())
}

/// Items whose state has a length-|α| path outside the orders of α. Empty
/// for a correct construction.
pub fn subset_violations(a: &Automaton) -> Vec<(StateId, Item)> {
    let mut paths = Paths::new(a);
    path_mismatches(&mut paths, None)
        .into_iter()
        .filter(|&(_, _, subset)| !subset)
        .map(|(s, i, _)| (s, i))
        .collect()
}
