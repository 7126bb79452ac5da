//! Table-driven shift/reduce driver.

use std::fmt;

use itertools::Itertools;
use thiserror::Error;

use crate::automaton::StateId;
use crate::grammar::{Grammar, RuleId, Segment, SymbolId, END_MARKER};
use crate::tables::{Action, ParseTable};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub terminal: SymbolId,
    pub lexeme: Option<String>,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("table has {0} conflicting cells; refusing to parse")]
    Conflicted(usize),
    #[error("token {position}: unknown terminal `{name}`")]
    UnknownTerminal { name: String, position: usize },
    #[error("token {position}: `{name}` is a nonterminal")]
    NotATerminal { name: String, position: usize },
}

/// Splits whitespace-separated terminal names into tokens. A trailing
/// `$end` is accepted but not required.
pub fn tokenize(g: &Grammar, text: &str) -> Result<Vec<Token>, ParseError> {
    text.split_whitespace()
        .enumerate()
        .map(|(position, name)| {
            let terminal = g.symbols().get(name).ok_or_else(|| ParseError::UnknownTerminal {
                name: name.to_owned(),
                position,
            })?;
            if !g.symbols().is_terminal(terminal) {
                return Err(ParseError::NotATerminal {
                    name: name.to_owned(),
                    position,
                });
            }
            Ok(Token {
                terminal,
                lexeme: Some(name.to_owned()),
                position,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseEvent {
    Shift(Token),
    Reduce {
        rule: RuleId,
        lhs: SymbolId,
        children: usize,
    },
    Accept,
    Error {
        state: StateId,
        terminal: SymbolId,
        expected: Vec<SymbolId>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseTree {
    Leaf(Token),
    Node {
        rule: RuleId,
        lhs: SymbolId,
        /// Children in input order.
        children: Vec<ParseTree>,
        /// Per permutation segment of the rule, the element indices in the
        /// order they were matched.
        permutation_order: Vec<Vec<usize>>,
    },
}

impl ParseTree {
    pub fn symbol(&self) -> SymbolId {
        match self {
            ParseTree::Leaf(t) => t.terminal,
            ParseTree::Node { lhs, .. } => *lhs,
        }
    }

    /// Leaves left to right.
    pub fn frontier(&self) -> Vec<&Token> {
        match self {
            ParseTree::Leaf(t) => vec![t],
            ParseTree::Node { children, .. } => children.iter().flat_map(ParseTree::frontier).collect(),
        }
    }

    /// S-expression rendering, e.g. `(S:1 a (T:2 b))`.
    pub fn render(&self, g: &Grammar) -> String {
        match self {
            ParseTree::Leaf(t) => g.name(t.terminal).to_owned(),
            ParseTree::Node { rule, lhs, children, .. } => {
                let mut s = format!("({}:{rule}", g.name(*lhs));
                for c in children {
                    s.push(' ');
                    s.push_str(&c.render(g));
                }
                s.push(')');
                s
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseResult {
    pub accepted: bool,
    pub events: Vec<ParseEvent>,
    pub tree: Option<ParseTree>,
}

/// The raw action set of a cell, conflicts included.
pub fn actions_at(t: &ParseTable, state: StateId, y: SymbolId) -> &[Action] {
    t.actions_at(state, y)
}

fn permutation_order(g: &Grammar, rule: RuleId, children: &[ParseTree]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut at = 0;
    for seg in g.rule(rule).rhs.segments() {
        let len = seg.symbol_len();
        if let Segment::Permutation(p) = seg {
            out.push(
                children[at..at + len]
                    .iter()
                    .filter_map(|c| p.position_of(c.symbol()))
                    .collect(),
            );
        }
        at += len;
    }
    out
}

/// Runs the LR driver. Tables with conflicts are refused.
pub fn parse(t: &ParseTable, tokens: &[Token]) -> Result<ParseResult, ParseError> {
    if !t.is_deterministic() {
        return Err(ParseError::Conflicted(t.conflicts().len()));
    }
    let g = t.grammar();
    let mut input: Vec<Token> = tokens.to_vec();
    if input.last().map(|t| t.terminal) != Some(SymbolId::END) {
        input.push(Token {
            terminal: SymbolId::END,
            lexeme: None,
            position: input.len(),
        });
    }

    let mut states: Vec<StateId> = vec![t.automaton().initial()];
    let mut trees: Vec<ParseTree> = Vec::new();
    let mut events = Vec::new();
    let mut pos = 0;
    loop {
        let state = *states.last().expect("stack never empties");
        let tok = &input[pos];
        match t.actions_at(state, tok.terminal)[0] {
            Action::Shift(next) => {
                events.push(ParseEvent::Shift(tok.clone()));
                trees.push(ParseTree::Leaf(tok.clone()));
                states.push(next);
                pos += 1;
            }
            Action::Reduce(rule) => {
                let r = g.rule(rule);
                let n = r.pop_count();
                states.truncate(states.len() - n);
                let children = trees.split_off(trees.len() - n);
                let order = permutation_order(g, rule, &children);
                trees.push(ParseTree::Node {
                    rule,
                    lhs: r.lhs,
                    children,
                    permutation_order: order,
                });
                events.push(ParseEvent::Reduce {
                    rule,
                    lhs: r.lhs,
                    children: n,
                });
                let top = *states.last().unwrap();
                let next = t.goto(top, r.lhs).expect("goto defined after a valid reduce");
                states.push(next);
            }
            Action::Accept => {
                events.push(ParseEvent::Accept);
                return Ok(ParseResult {
                    accepted: true,
                    events,
                    tree: trees.pop(),
                });
            }
            Action::Error => {
                events.push(ParseEvent::Error {
                    state,
                    terminal: tok.terminal,
                    expected: t.expected(state),
                });
                return Ok(ParseResult {
                    accepted: false,
                    events,
                    tree: None,
                });
            }
        }
    }
}

/// Display adapter for one event.
pub struct DisplayEvent<'a>(pub &'a Grammar, pub &'a ParseEvent);

impl fmt::Display for DisplayEvent<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = self.0;
        match self.1 {
            ParseEvent::Shift(t) => write!(f, "shift {}", g.name(t.terminal)),
            ParseEvent::Reduce { rule, lhs, .. } => write!(f, "reduce {rule} ({})", g.name(*lhs)),
            ParseEvent::Accept => f.write_str("accept"),
            ParseEvent::Error {
                state,
                terminal,
                expected,
            } => write!(
                f,
                "error in state {state} on {}; expected: {}",
                g.name(*terminal),
                expected.iter().map(|&y| g.name(y)).join(", ")
            ),
        }
    }
}

/// One event per line.
pub fn render_events(g: &Grammar, events: &[ParseEvent]) -> String {
    events.iter().map(|e| format!("{}\n", DisplayEvent(g, e))).collect()
}

/// Parses whitespace-separated token names.
pub fn parse_text(t: &ParseTable, text: &str) -> Result<ParseResult, ParseError> {
    let tokens = tokenize(t.grammar(), text)?;
    parse(t, &tokens)
}

pub fn end_marker_name() -> &'static str {
    END_MARKER
}
