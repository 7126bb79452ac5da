//! Graphviz export and automaton summaries.

use std::collections::BTreeSet;
use std::fmt::Write;

use serde::Serialize;

use crate::automaton::{Automaton, Collection, Construction};
use crate::items::render_item;
use crate::oracle::rule_states;

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz DOT text. The error state and the edges into it are left out
/// unless `include_error` is set.
pub fn to_dot(a: &Automaton, include_error: bool) -> String {
    let g = a.grammar();
    let err = a.error_state();
    let mut out = String::from("digraph automaton {\n  rankdir=LR;\n  node [shape=box, fontname=\"monospace\"];\n");
    for s in a.states() {
        if s.is_error && !include_error {
            continue;
        }
        let mut label = format!("{}", s.id);
        if s.is_error {
            label.push_str("\\nerror");
        }
        for &i in &s.items {
            label.push_str("\\l");
            label.push_str(&escape(&render_item(g, i)));
        }
        if !s.items.is_empty() {
            label.push_str("\\l");
        }
        writeln!(out, "  s{} [label=\"{label}\"];", s.id).unwrap();
    }
    for s in 0..a.len() {
        if s == err {
            continue;
        }
        for (y, t) in a.edges(s) {
            if t == err && !include_error {
                continue;
            }
            writeln!(out, "  s{s} -> s{t} [label=\"{}\"];", escape(g.name(y))).unwrap();
        }
    }
    out.push_str("}\n");
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleCount {
    pub rule: u32,
    pub states: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub construction: Construction,
    pub collection: Collection,
    /// Non-error states.
    pub states: usize,
    /// Transitions that do not lead to the error state.
    pub transitions: usize,
    pub rules: usize,
    /// States processing each source rule.
    pub per_rule: Vec<RuleCount>,
}

pub fn summary(a: &Automaton) -> Summary {
    let g = a.grammar();
    let sources: BTreeSet<u32> = g.rules().iter().flat_map(|r| r.origins.iter().map(|o| o.0)).collect();
    Summary {
        construction: a.construction(),
        collection: a.collection(),
        states: a.len() - 1,
        transitions: a.transition_count(),
        rules: g.rules().len(),
        per_rule: sources
            .into_iter()
            .map(|r| RuleCount {
                rule: r,
                states: rule_states(a, crate::grammar::RuleId(r)).count,
            })
            .collect(),
    }
}

impl Summary {
    pub fn render_text(&self) -> String {
        let mut out = format!(
            "{:?} {:?} automaton: {} states (+1 error), {} transitions, {} rules\n",
            self.construction, self.collection, self.states, self.transitions, self.rules
        )
        .to_lowercase();
        for rc in &self.per_rule {
            writeln!(out, "  rule {}: {} states", rc.rule, rc.states).unwrap();
        }
        out
    }

    pub fn render_json(&self) -> String {
        serde_json::to_string(self).expect("summary serializes")
    }
}
