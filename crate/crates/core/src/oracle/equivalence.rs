//! Behavioral comparison of the modified pipeline against the standard one
//! on the expanded grammar.

use std::collections::{BTreeSet, HashMap, HashSet};

use itertools::Itertools;
use serde::Serialize;

use crate::automaton::{Automaton, BuildOptions, Construction, Fault, StateId};
use crate::grammar::{expand_grammar, expand_phrase, Grammar, GrammarError, RuleId, Segment, SymbolId};
use crate::items::{self, Dot, Item};
use crate::tables::{build_table, build_table_with, Action, ParseTable, TableKind};

/// Expanded automata above this size are only compared behaviorally.
pub const MAP_BUDGET: usize = 10_000;

/// Translates modified states to standard ones: the union over a state's
/// items of every expanded item whose pre-dot part is an order of α ending
/// the input and whose rest is an order of β.
pub struct StateMap<'a> {
    a: &'a Automaton,
    ae: &'a Automaton,
    by_items: HashMap<&'a [Item], StateId>,
    rules: HashMap<(SymbolId, Vec<SymbolId>), RuleId>,
}

impl<'a> StateMap<'a> {
    pub fn new(a: &'a Automaton, ae: &'a Automaton) -> Self {
        let by_items = (0..ae.len())
            .filter(|&s| !ae.state(s).is_error)
            .map(|s| (ae.state(s).items.as_slice(), s))
            .collect();
        let rules = ae
            .grammar()
            .rules()
            .iter()
            .map(|r| {
                let rhs = r.rhs.as_symbols().expect("standard automaton over an expanded grammar");
                ((r.lhs, rhs), r.id)
            })
            .collect();
        StateMap { a, ae, by_items, rules }
    }

    fn map_item(&self, item: Item, w: &[SymbolId], out: &mut Vec<Item>) {
        let g = self.a.grammar();
        let (alpha, beta) = items::split_at_dot(g, item);
        let len = alpha.symbol_len();
        if w.len() < len {
            return;
        }
        let suffix = &w[w.len() - len..];
        if !matches_phrase(alpha.segments(), suffix) {
            return;
        }
        let lhs = g.rule(item.rule).lhs;
        for rest in expand_phrase(&beta) {
            let rhs = [suffix, &rest].concat();
            if let Some(&e) = self.rules.get(&(lhs, rhs)) {
                out.push(Item {
                    rule: e,
                    dot: Dot::Top(len as u32),
                    lookahead: item.lookahead,
                });
            }
        }
    }

    /// The expanded state for modified state `state` entered after `w`, or
    /// `None` when no expanded state has that item set.
    pub fn map_state(&self, state: StateId, w: &[SymbolId]) -> Option<StateId> {
        if self.a.state(state).is_error {
            return Some(self.ae.error_state());
        }
        let mut out = Vec::new();
        for &i in &self.a.state(state).items {
            self.map_item(i, w, &mut out);
        }
        if out.is_empty() {
            return Some(self.ae.error_state());
        }
        out.sort_unstable();
        out.dedup();
        self.by_items.get(out.as_slice()).copied()
    }
}

/// Whether `word` is one of the orders of `segments`.
pub fn matches_phrase(segments: &[Segment], word: &[SymbolId]) -> bool {
    match segments.split_first() {
        None => word.is_empty(),
        Some((Segment::Symbol(y), rest)) => word.first() == Some(y) && matches_phrase(rest, &word[1..]),
        Some((Segment::Permutation(p), rest)) => {
            fn go(elements: &[Vec<SymbolId>], used: u64, word: &[SymbolId], rest: &[Segment]) -> bool {
                if used.count_ones() as usize == elements.len() {
                    return matches_phrase(rest, word);
                }
                elements.iter().enumerate().any(|(i, e)| {
                    used & (1 << i) == 0 && word.starts_with(e) && go(elements, used | (1 << i), &word[e.len()..], rest)
                })
            }
            go(p.elements(), 0, word, rest)
        }
    }
}

/// Free-standing form of [`StateMap::map_state`].
pub fn map_state(a: &Automaton, ae: &Automaton, state: StateId, w: &[SymbolId]) -> Option<StateId> {
    StateMap::new(a, ae).map_state(state, w)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Norm {
    Shift,
    Reduce(RuleId),
    Accept,
}

/// Action set with reduces named by their source rules.
fn normalized(t: &ParseTable, state: StateId, y: SymbolId) -> BTreeSet<Norm> {
    let g = t.grammar();
    let mut out = BTreeSet::new();
    for a in t.actions_at(state, y) {
        match *a {
            Action::Shift(_) => {
                out.insert(Norm::Shift);
            }
            Action::Accept => {
                out.insert(Norm::Accept);
            }
            Action::Reduce(r) => out.extend(g.rule(r).origins.iter().map(|&o| Norm::Reduce(o))),
            Action::Error => {}
        }
    }
    out
}

fn render_norm(set: &BTreeSet<Norm>) -> String {
    if set.is_empty() {
        return "{error}".into();
    }
    let mut parts = set.iter().map(|n| match n {
        Norm::Shift => "shift".to_owned(),
        Norm::Reduce(r) => format!("reduce {r}"),
        Norm::Accept => "accept".to_owned(),
    });
    format!("{{{}}}", parts.join(", "))
}

#[derive(Debug, Clone, Copy)]
pub struct EquivalenceOptions {
    pub max_len: usize,
    pub table: TableKind,
    /// Largest expanded automaton on which the state map is verified.
    pub map_budget: usize,
    pub check_map: bool,
    #[doc(hidden)]
    pub fault: Option<Fault>,
}

impl Default for EquivalenceOptions {
    fn default() -> Self {
        EquivalenceOptions {
            max_len: 8,
            table: TableKind::Slr,
            map_budget: MAP_BUDGET,
            check_map: true,
            fault: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    pub grammar: String,
    pub table: String,
    pub max_len: usize,
    /// Symbol strings covered by the automaton walk.
    pub words_tested: u128,
    /// Terminal strings covered by the acceptance walk.
    pub inputs_tested: u128,
    /// Distinct configurations actually visited by both walks.
    pub configurations: usize,
    pub modified_states: usize,
    pub standard_states: usize,
    pub acceptance_mismatches: usize,
    pub action_mismatches: usize,
    pub map_violations: usize,
    pub map_checked: bool,
    pub examples: Vec<String>,
}

impl EquivalenceReport {
    pub fn is_clean(&self) -> bool {
        self.acceptance_mismatches == 0 && self.action_mismatches == 0 && self.map_violations == 0
    }

    fn note(&mut self, example: impl FnOnce() -> String) {
        if self.examples.len() < 10 {
            self.examples.push(example());
        }
    }
}

fn count_words(alphabet: usize, max_len: usize) -> u128 {
    let mut total = 0u128;
    let mut layer = 1u128;
    for _ in 0..=max_len {
        total = total.saturating_add(layer);
        layer = layer.saturating_mul(alphabet as u128);
    }
    total
}

fn render_word(g: &Grammar, w: &[SymbolId]) -> String {
    if w.is_empty() {
        return "ε".into();
    }
    w.iter().map(|&y| g.name(y)).join(" ")
}

/// Walks both automata over every symbol string up to `max_len`, checking
/// action sets and (when `map` is given) the state map. Strings that reach
/// an already checked configuration are not extended again: their futures
/// coincide. The configuration keeps the tail the state map can still look
/// at, so the map is checked on every relevant suffix.
fn walk_automata(m: &ParseTable, s: &ParseTable, map: Option<&StateMap<'_>>, report: &mut EquivalenceReport) {
    let (a, ae) = (m.automaton(), s.automaton());
    let g = a.grammar();
    let alphabet = g.alphabet();
    let mut lookahead = g.terminals();
    lookahead.push(SymbolId::END);
    // the map at later states only looks at suffixes no longer than the
    // current state's longest pre-dot phrase plus what follows
    let window: Vec<usize> = (0..a.len())
        .map(|s| match map {
            Some(_) => a.state(s).items.iter().map(|&i| items::pre_dot_len(g, i)).max().unwrap_or(0),
            None => 0,
        })
        .collect();
    let mut seen: HashSet<(StateId, StateId, Vec<SymbolId>)> = HashSet::new();
    let mut layer: Vec<(StateId, StateId, Vec<SymbolId>)> = vec![(a.initial(), ae.initial(), Vec::new())];
    for len in 0..=report.max_len {
        let mut next_layer = Vec::new();
        for (j, je, w) in layer {
            let tail = w[w.len().saturating_sub(window[j])..].to_vec();
            if !seen.insert((j, je, tail)) {
                continue;
            }
            report.configurations += 1;
            let (j_err, je_err) = (a.state(j).is_error, ae.state(je).is_error);
            if j_err || je_err {
                if j_err != je_err {
                    report.action_mismatches += 1;
                    report.note(|| {
                        format!(
                            "after `{}`: modified state {j} vs standard state {je}, only one is the error state",
                            render_word(g, &w)
                        )
                    });
                }
                continue;
            }
            if let Some(map) = map {
                if map.map_state(j, &w) != Some(je) {
                    report.map_violations += 1;
                    report.note(|| {
                        format!(
                            "after `{}`: map of modified state {j} is not standard state {je}",
                            render_word(g, &w)
                        )
                    });
                }
            }
            for &y in &lookahead {
                let (x, xe) = (normalized(m, j, y), normalized(s, je, y));
                if x != xe {
                    report.action_mismatches += 1;
                    report.note(|| {
                        format!(
                            "after `{}` on {}: modified {} vs standard {}",
                            render_word(g, &w),
                            g.name(y),
                            render_norm(&x),
                            render_norm(&xe)
                        )
                    });
                }
            }
            if len < report.max_len {
                for &y in &alphabet {
                    let mut w2 = w.clone();
                    w2.push(y);
                    next_layer.push((a.transition(j, y), ae.transition(je, y), w2));
                }
            }
        }
        layer = next_layer;
    }
    report.words_tested = count_words(alphabet.len(), report.max_len);
}

type Stacks = Vec<Vec<StateId>>;

/// Nondeterministic LR step: applies every reduce on `y` until only shifts
/// remain. Returns the stacks after shifting `y` and whether some branch
/// accepts. Stacks deeper than `cap` are dropped.
fn advance(t: &ParseTable, stacks: &Stacks, y: SymbolId, cap: usize) -> (Stacks, bool) {
    let g = t.grammar();
    let mut visited: HashSet<Vec<StateId>> = stacks.iter().cloned().collect();
    let mut work: Vec<Vec<StateId>> = stacks.clone();
    let mut out = Vec::new();
    let mut accepted = false;
    while let Some(stack) = work.pop() {
        let top = *stack.last().unwrap();
        for act in t.actions_at(top, y) {
            match *act {
                Action::Shift(n) => {
                    let mut s = stack.clone();
                    s.push(n);
                    out.push(s);
                }
                Action::Accept => accepted = true,
                Action::Reduce(r) => {
                    let rule = g.rule(r);
                    // a broken table can ask for more than the stack holds
                    let Some(keep) = stack.len().checked_sub(rule.pop_count()).filter(|&k| k > 0) else {
                        continue;
                    };
                    let Some(to) = t.goto(stack[keep - 1], rule.lhs) else { continue };
                    let mut s = stack[..keep].to_vec();
                    s.push(to);
                    if s.len() <= cap && visited.insert(s.clone()) {
                        work.push(s);
                    }
                }
                Action::Error => {}
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    (out, accepted)
}

/// Runs both tables as nondeterministic parsers over every terminal string up
/// to `max_len` and compares acceptance.
fn walk_parsers(m: &ParseTable, s: &ParseTable, report: &mut EquivalenceReport) {
    let g = m.grammar();
    let terminals = g.terminals();
    let cap = 4 * report.max_len + 64;
    let start = |t: &ParseTable| vec![vec![t.automaton().initial()]];
    let mut seen: HashSet<(Stacks, Stacks)> = HashSet::new();
    let mut layer: Vec<(Stacks, Stacks, Vec<SymbolId>)> = vec![(start(m), start(s), Vec::new())];
    for len in 0..=report.max_len {
        let mut next_layer = Vec::new();
        for (sm, se, w) in layer {
            if !seen.insert((sm.clone(), se.clone())) {
                continue;
            }
            report.configurations += 1;
            let (am, ae) = (advance(m, &sm, SymbolId::END, cap).1, advance(s, &se, SymbolId::END, cap).1);
            if am != ae {
                report.acceptance_mismatches += 1;
                report.note(|| format!("input `{}`: modified accepts {am}, standard accepts {ae}", render_word(g, &w)));
            }
            if len == report.max_len {
                continue;
            }
            for &y in &terminals {
                let (nm, _) = advance(m, &sm, y, cap);
                let (ne, _) = advance(s, &se, y, cap);
                if nm.is_empty() && ne.is_empty() {
                    continue;
                }
                let mut w2 = w.clone();
                w2.push(y);
                next_layer.push((nm, ne, w2));
            }
        }
        layer = next_layer;
    }
    report.inputs_tested = count_words(terminals.len(), report.max_len);
}

/// Compares two tables for the same source grammar: `s` is built on its
/// expansion. The state map is checked when `map` is true and both tables
/// sit on LR(0) automata.
pub fn compare_tables(name: &str, m: &ParseTable, s: &ParseTable, max_len: usize, map: bool) -> EquivalenceReport {
    let mut report = EquivalenceReport {
        grammar: name.to_owned(),
        table: m.kind().to_string(),
        max_len,
        modified_states: m.automaton().len(),
        standard_states: s.automaton().len(),
        ..Default::default()
    };
    let state_map = map.then(|| StateMap::new(m.automaton(), s.automaton()));
    report.map_checked = state_map.is_some();
    walk_automata(m, s, state_map.as_ref(), &mut report);
    walk_parsers(m, s, &mut report);
    report
}

pub fn check_equivalence(g: &Grammar, max_len: usize) -> Result<EquivalenceReport, GrammarError> {
    check_equivalence_with(
        g,
        "grammar",
        EquivalenceOptions {
            max_len,
            ..Default::default()
        },
    )
}

/// Builds the modified table on `g` and the standard table on its expansion,
/// then compares them.
pub fn check_equivalence_with(g: &Grammar, name: &str, opts: EquivalenceOptions) -> Result<EquivalenceReport, GrammarError> {
    let options = BuildOptions {
        fault: opts.fault,
        ..Default::default()
    };
    let m = build_table_with(g, Construction::Modified, opts.table, options)?;
    let s = build_table(&expand_grammar(g), Construction::Standard, opts.table)?;
    let map = opts.check_map && opts.table == TableKind::Slr && s.automaton().len() < opts.map_budget;
    Ok(compare_tables(name, &m, &s, opts.max_len, map))
}
