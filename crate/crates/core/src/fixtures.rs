//! Grammars bundled with the crate for tests, examples and benchmarks.

use crate::grammar::{parse_grammar, Grammar};

/// `(name, source)` for every bundled grammar.
pub const SOURCES: &[(&str, &str)] = &[
    ("json", include_str!("../fixtures/json.g")),
    ("json_delimited", include_str!("../fixtures/json_delimited.g")),
    ("expression", include_str!("../fixtures/expression.g")),
    ("abc", include_str!("../fixtures/abc.g")),
    ("interfering", include_str!("../fixtures/interfering.g")),
    ("ambiguous", include_str!("../fixtures/ambiguous.g")),
    ("cc", include_str!("../fixtures/cc.g")),
    ("list", include_str!("../fixtures/list.g")),
    ("parens", include_str!("../fixtures/parens.g")),
    ("statements", include_str!("../fixtures/statements.g")),
    ("pointers", include_str!("../fixtures/pointers.g")),
    ("two_segments", include_str!("../fixtures/two_segments.g")),
    ("mixed", include_str!("../fixtures/mixed.g")),
];

pub fn source(name: &str) -> Option<&'static str> {
    SOURCES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn load(name: &str) -> Grammar {
    parse_grammar(source(name).unwrap_or_else(|| panic!("no fixture `{name}`")))
        .unwrap_or_else(|e| panic!("fixture `{name}`: {e}"))
}

pub fn all() -> Vec<(&'static str, Grammar)> {
    SOURCES.iter().map(|(n, _)| (*n, load(n))).collect()
}

/// The catalog grammar: permutation rules 3 (size 3) and 6 (size 6).
pub fn json() -> Grammar {
    load("json")
}

pub fn json_delimited() -> Grammar {
    load("json_delimited")
}

/// `E -> E + T | T ; T -> T * F | F ; F -> ( E ) | id`
pub fn expression() -> Grammar {
    load("expression")
}

/// `S -> << A || B || C >>` over terminals.
pub fn abc() -> Grammar {
    load("abc")
}

pub fn interfering() -> Grammar {
    load("interfering")
}

pub fn cc() -> Grammar {
    load("cc")
}

/// `S -> << A1 || ... || An >>` with fresh terminals.
pub fn flat_permutation(n: usize) -> Grammar {
    let elements: Vec<String> = (1..=n).map(|i| format!("A{i}")).collect();
    parse_grammar(&format!("S -> << {} >> ;", elements.join(" || "))).expect("well-formed")
}
