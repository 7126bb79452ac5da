//! LR parser construction for grammars with permutation phrases.

pub mod automaton;
pub mod fixtures;
pub mod grammar;
pub mod items;
pub mod oracle;
pub mod report;
pub mod runtime;
pub mod tables;

pub use automaton::{build, build_modified, build_standard, Automaton, BuildOptions, Collection, Construction, StateId};
pub use grammar::{augment, expand_grammar, parse_grammar, Grammar, GrammarError, RuleId, SymbolId};
pub use items::{next, step, Dot, Item};
pub use runtime::{parse, ParseEvent, ParseResult, ParseTree, Token};
pub use tables::{build_table, Action, ParseTable, TableKind};
