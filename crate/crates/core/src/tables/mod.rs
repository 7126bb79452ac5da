//! SLR, canonical LR(1) and LALR parse tables.
//!
//! Table construction is the same for both constructions: shift on terminal
//! transitions, reduce on complete items (on FOLLOW of the left-hand side for
//! SLR, on the item lookahead otherwise), accept on the end marker once the
//! augmented start rule is complete. Conflicting cells keep every action.

mod first_follow;

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::Serialize;

pub use first_follow::{FirstFollow, FirstSet};

pub use crate::automaton::lr1_closure;
use crate::automaton::{build, Automaton, BuildOptions, Collection, Construction, StateId};
use crate::grammar::{Grammar, GrammarError, RuleId, SymbolId};
use crate::items::{self, render_item};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Shift(StateId),
    Reduce(RuleId),
    Accept,
    Error,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Shift(s) => write!(f, "shift {s}"),
            Action::Reduce(r) => write!(f, "reduce {r}"),
            Action::Accept => f.write_str("accept"),
            Action::Error => f.write_str("error"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TableKind {
    Slr,
    Lr1,
    Lalr,
}

impl TableKind {
    pub fn collection(self) -> Collection {
        match self {
            TableKind::Slr => Collection::Lr0,
            TableKind::Lr1 => Collection::Lr1,
            TableKind::Lalr => Collection::Lalr,
        }
    }
}

impl fmt::Display for TableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TableKind::Slr => "slr",
            TableKind::Lr1 => "lr1",
            TableKind::Lalr => "lalr",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conflict {
    pub state: StateId,
    pub symbol: SymbolId,
    pub actions: Vec<Action>,
    /// Rendered items responsible for the actions.
    pub items: Vec<String>,
}

static ERROR: [Action; 1] = [Action::Error];

#[derive(Debug, Clone)]
pub struct ParseTable {
    automaton: Automaton,
    kind: TableKind,
    actions: Vec<Vec<Action>>,
    width: usize,
    conflicts: Vec<Conflict>,
}

impl ParseTable {
    fn new(automaton: Automaton, kind: TableKind, follow: Option<&FirstFollow>) -> Self {
        let g = automaton.grammar();
        let symbols = g.symbols();
        let width = symbols.len();
        let mut actions = vec![Vec::new(); automaton.len() * width];
        let mut blame: BTreeMap<(StateId, SymbolId), Vec<String>> = BTreeMap::new();
        for state in automaton.states().iter().filter(|s| !s.is_error) {
            let s = state.id;
            for &item in &state.items {
                let mut cells: Vec<(SymbolId, Action)> = Vec::new();
                for y in items::next(g, item) {
                    if symbols.is_terminal(y) {
                        cells.push((y, Action::Shift(automaton.transition(s, y))));
                    }
                }
                if item.is_complete(g) {
                    let rule = g.rule(item.rule);
                    if g.is_augmented() && rule.id == RuleId(0) {
                        cells.push((SymbolId::END, Action::Accept));
                    } else {
                        match (follow, item.lookahead) {
                            (Some(ff), _) => cells.extend(
                                ff.follow(rule.lhs).iter().map(|&t| (t, Action::Reduce(rule.id))),
                            ),
                            (None, Some(la)) => cells.push((la, Action::Reduce(rule.id))),
                            (None, None) => unreachable!("LR(0) items need FOLLOW sets"),
                        }
                    }
                }
                for (y, a) in cells {
                    let cell = &mut actions[s * width + y.index()];
                    if !cell.contains(&a) {
                        cell.push(a);
                    }
                    blame.entry((s, y)).or_default().push(render_item(g, item));
                }
            }
        }
        let mut conflicts = Vec::new();
        for (i, cell) in actions.iter_mut().enumerate() {
            cell.sort_unstable();
            if cell.len() > 1 {
                let (state, symbol) = (i / width, SymbolId((i % width) as u32));
                let mut items = blame.remove(&(state, symbol)).unwrap_or_default();
                items.sort();
                items.dedup();
                conflicts.push(Conflict {
                    state,
                    symbol,
                    actions: cell.clone(),
                    items,
                });
            }
        }
        ParseTable {
            automaton,
            kind,
            actions,
            width,
            conflicts,
        }
    }

    pub fn automaton(&self) -> &Automaton {
        &self.automaton
    }

    pub fn grammar(&self) -> &Grammar {
        self.automaton.grammar()
    }

    pub fn kind(&self) -> TableKind {
        self.kind
    }

    pub fn construction(&self) -> Construction {
        self.automaton.construction()
    }

    /// Every action in the cell, `[Error]` for an empty cell.
    pub fn actions_at(&self, state: StateId, y: SymbolId) -> &[Action] {
        let cell = &self.actions[state * self.width + y.index()];
        if cell.is_empty() {
            &ERROR
        } else {
            cell
        }
    }

    pub fn goto(&self, state: StateId, nonterminal: SymbolId) -> Option<StateId> {
        let t = self.automaton.transition(state, nonterminal);
        (t != self.automaton.error_state()).then_some(t)
    }

    pub fn conflicts(&self) -> &[Conflict] {
        &self.conflicts
    }

    pub fn is_deterministic(&self) -> bool {
        self.conflicts.is_empty()
    }

    /// Terminals with a non-error action in `state`, by name.
    pub fn expected(&self, state: StateId) -> Vec<SymbolId> {
        let g = self.grammar();
        let mut v: Vec<SymbolId> = g
            .symbols()
            .ids()
            .filter(|&y| g.symbols().is_terminal(y))
            .filter(|&y| !self.actions[state * self.width + y.index()].is_empty())
            .collect();
        v.sort_by(|a, b| g.name(*a).cmp(g.name(*b)));
        v
    }

    fn columns(&self) -> (Vec<SymbolId>, Vec<SymbolId>) {
        let g = self.grammar();
        let mut terminals: Vec<SymbolId> = g.symbols().ids().filter(|&y| g.symbols().is_terminal(y)).collect();
        let mut nonterminals = g.nonterminals();
        terminals.sort_by(|a, b| g.name(*a).cmp(g.name(*b)));
        nonterminals.sort_by(|a, b| g.name(*a).cmp(g.name(*b)));
        (terminals, nonterminals)
    }

    /// Per-state ACTION/GOTO blocks.
    pub fn dump_text(&self) -> String {
        let g = self.grammar();
        let (terminals, nonterminals) = self.columns();
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} table ({}), {} states, {} conflicts",
            self.kind,
            match self.construction() {
                Construction::Modified => "modified",
                Construction::Standard => "standard",
            },
            self.automaton.len(),
            self.conflicts.len()
        );
        for state in self.automaton.states() {
            if state.is_error {
                let _ = writeln!(out, "\nstate {} (error)", state.id);
                continue;
            }
            let _ = writeln!(out, "\nstate {}", state.id);
            for &item in &state.items {
                let _ = writeln!(out, "    {}", render_item(g, item));
            }
            for &t in &terminals {
                let cell = &self.actions[state.id * self.width + t.index()];
                if !cell.is_empty() {
                    let text: Vec<String> = cell.iter().map(Action::to_string).collect();
                    let mark = if cell.len() > 1 { "   <- conflict" } else { "" };
                    let _ = writeln!(out, "  ACTION {:<12} {}{mark}", g.name(t), text.join(" / "));
                }
            }
            for &n in &nonterminals {
                if let Some(t) = self.goto(state.id, n) {
                    let _ = writeln!(out, "  GOTO   {:<12} {t}", g.name(n));
                }
            }
        }
        out
    }

    /// One JSON object per state, same content as [`ParseTable::dump_text`].
    pub fn dump_jsonl(&self) -> String {
        #[derive(Serialize)]
        struct Row<'a> {
            state: StateId,
            error: bool,
            items: Vec<String>,
            actions: BTreeMap<&'a str, Vec<String>>,
            gotos: BTreeMap<&'a str, StateId>,
        }
        let g = self.grammar();
        let (terminals, nonterminals) = self.columns();
        let mut out = String::new();
        for state in self.automaton.states() {
            let mut row = Row {
                state: state.id,
                error: state.is_error,
                items: state.items.iter().map(|&i| render_item(g, i)).collect(),
                actions: BTreeMap::new(),
                gotos: BTreeMap::new(),
            };
            if !state.is_error {
                for &t in &terminals {
                    let cell = &self.actions[state.id * self.width + t.index()];
                    if !cell.is_empty() {
                        row.actions.insert(g.name(t), cell.iter().map(Action::to_string).collect());
                    }
                }
                for &n in &nonterminals {
                    if let Some(t) = self.goto(state.id, n) {
                        row.gotos.insert(g.name(n), t);
                    }
                }
            }
            out.push_str(&serde_json::to_string(&row).expect("serializable"));
            out.push('\n');
        }
        out
    }
}

/// SLR table over an LR(0) automaton of either construction.
pub fn build_slr(a: Automaton) -> ParseTable {
    assert_eq!(a.collection(), Collection::Lr0, "SLR tables need an LR(0) automaton");
    let ff = FirstFollow::compute(a.grammar());
    ParseTable::new(a, TableKind::Slr, Some(&ff))
}

/// Table over an LR(1) or LALR automaton; reduces on item lookaheads.
pub fn build_lookahead_table(a: Automaton) -> ParseTable {
    let kind = match a.collection() {
        Collection::Lr1 => TableKind::Lr1,
        Collection::Lalr => TableKind::Lalr,
        Collection::Lr0 => panic!("lookahead tables need an LR(1) or LALR automaton"),
    };
    ParseTable::new(a, kind, None)
}

/// Canonical LR(1) table.
pub fn build_lr1(g: &Grammar, construction: Construction) -> Result<ParseTable, GrammarError> {
    build_table(g, construction, TableKind::Lr1)
}

/// LALR table (LR(1) states merged by core).
pub fn build_lalr(g: &Grammar, construction: Construction) -> Result<ParseTable, GrammarError> {
    build_table(g, construction, TableKind::Lalr)
}

pub fn build_table(g: &Grammar, construction: Construction, kind: TableKind) -> Result<ParseTable, GrammarError> {
    build_table_with(g, construction, kind, BuildOptions::default())
}

pub fn build_table_with(
    g: &Grammar,
    construction: Construction,
    kind: TableKind,
    options: BuildOptions,
) -> Result<ParseTable, GrammarError> {
    let a = build(g, construction, kind.collection(), options)?;
    Ok(match kind {
        TableKind::Slr => build_slr(a),
        _ => build_lookahead_table(a),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{build_modified, build_standard};
    use crate::fixtures;
    use crate::grammar::expand_grammar;

    fn sym(g: &Grammar, n: &str) -> SymbolId {
        g.symbols().get(n).unwrap()
    }

    #[test]
    fn expression_slr_is_deterministic() {
        let t = build_slr(build_standard(&fixtures::expression()).unwrap());
        assert!(t.is_deterministic());
        let g = t.grammar();
        assert_eq!(t.actions_at(0, sym(g, "id")), [Action::Shift(4)]);
        let accept_state = t.goto(0, sym(g, "E")).unwrap();
        assert_eq!(t.actions_at(accept_state, SymbolId::END), [Action::Accept]);
        let err = t.automaton().error_state();
        assert_eq!(t.actions_at(err, sym(g, "id")), [Action::Error]);
    }

    #[test]
    fn ambiguous_grammar_reports_conflict() {
        let t = build_slr(build_modified(&fixtures::load("ambiguous")).unwrap());
        assert!(!t.is_deterministic());
        let c = &t.conflicts()[0];
        assert_eq!(t.grammar().name(c.symbol), "plus");
        assert!(c.actions.iter().any(|a| matches!(a, Action::Shift(_))));
        assert!(c.actions.iter().any(|a| matches!(a, Action::Reduce(_))));
        assert!(!c.items.is_empty());
    }

    #[test]
    fn delimited_json_is_deterministic() {
        let g = fixtures::json_delimited();
        let t = build_slr(build_modified(&g).unwrap());
        assert!(t.is_deterministic(), "{:?}", t.conflicts());
        let e = build_slr(build_standard(&expand_grammar(&g)).unwrap());
        assert!(e.is_deterministic());
    }

    #[test]
    fn json_is_ambiguous_under_every_table() {
        // `id name <item> id name` splits two ways, so conflicts are inherent.
        let g = fixtures::json();
        for kind in [TableKind::Slr, TableKind::Lr1, TableKind::Lalr] {
            let t = build_table(&g, Construction::Modified, kind).unwrap();
            assert!(!t.is_deterministic(), "{kind}");
        }
    }

    #[test]
    fn json_reduce_after_all_members() {
        let g = fixtures::json();
        let t = build_slr(build_modified(&g).unwrap());
        let gg = t.grammar();
        let members = ["code", "city", "number", "street", "homeAddress", "addressId"];
        let s = t.automaton().run(0, &members.map(|m| sym(gg, m)));
        let ff = FirstFollow::compute(gg);
        for &y in ff.follow(sym(gg, "addressesItem")) {
            assert_eq!(t.actions_at(s, y), [Action::Reduce(RuleId(6))]);
        }
    }

    #[test]
    fn pointers_need_lookaheads() {
        let g = fixtures::load("pointers");
        assert!(!build_table(&g, Construction::Modified, TableKind::Slr).unwrap().is_deterministic());
        assert!(build_lalr(&g, Construction::Modified).unwrap().is_deterministic());
        assert!(build_lr1(&g, Construction::Standard).unwrap().is_deterministic());
    }

    #[test]
    fn dumps_agree_on_states() {
        let t = build_slr(build_modified(&fixtures::abc()).unwrap());
        let text = t.dump_text();
        let lines = t.dump_jsonl();
        assert_eq!(lines.lines().count(), t.automaton().len());
        assert!(text.contains("ACTION $end"));
        assert!(text.contains("S -> <<A>> .(2) <<B || C>>"));
        let first: serde_json::Value = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
        assert_eq!(first["state"], 0);
        assert!(first["gotos"]["S"].is_number());
    }
}
