//! Context-free grammars whose right-hand sides may contain permutation
//! phrases, plus the expansion into an ordinary CFG.
//!
//! A right-hand side is a [`Phrase`]: a flat sequence of [`Segment`]s, each
//! either a single grammar symbol or a [`PermutationPhrase`]. A permutation
//! phrase is a *set* of non-empty simple phrases that may appear in any
//! order; [`expand_phrase`] enumerates the orders.

mod parse;
mod validate;

use std::collections::HashMap;
use std::fmt;

use itertools::Itertools;
use serde::Serialize;
use thiserror::Error;

pub use parse::parse_grammar;
pub use validate::{check_lr, validate, Diagnostic, DiagnosticKind};

/// Name of the reserved end-of-input terminal.
pub const END_MARKER: &str = "$end";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SymbolId(pub u32);

impl SymbolId {
    /// The end marker always occupies slot zero of every symbol table.
    pub const END: SymbolId = SymbolId(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolKind {
    Terminal,
    Nonterminal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Symbol {
    pub name: String,
    pub kind: SymbolKind,
}

#[derive(Debug, Clone)]
pub struct SymbolTable {
    symbols: Vec<Symbol>,
    by_name: HashMap<String, SymbolId>,
}

impl SymbolTable {
    pub(crate) fn new() -> Self {
        let mut table = SymbolTable {
            symbols: Vec::new(),
            by_name: HashMap::new(),
        };
        table.insert(END_MARKER, SymbolKind::Terminal);
        table
    }

    pub(crate) fn insert(&mut self, name: &str, kind: SymbolKind) -> SymbolId {
        if let Some(&id) = self.by_name.get(name) {
            return id;
        }
        let id = SymbolId(self.symbols.len() as u32);
        self.symbols.push(Symbol {
            name: name.to_owned(),
            kind,
        });
        self.by_name.insert(name.to_owned(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<SymbolId> {
        self.by_name.get(name).copied()
    }

    pub fn name(&self, id: SymbolId) -> &str {
        &self.symbols[id.index()].name
    }

    pub fn kind(&self, id: SymbolId) -> SymbolKind {
        self.symbols[id.index()].kind
    }

    pub fn is_terminal(&self, id: SymbolId) -> bool {
        self.kind(id) == SymbolKind::Terminal
    }

    pub fn is_nonterminal(&self, id: SymbolId) -> bool {
        self.kind(id) == SymbolKind::Nonterminal
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = SymbolId> + '_ {
        (0..self.symbols.len() as u32).map(SymbolId)
    }

    pub fn iter(&self) -> impl Iterator<Item = (SymbolId, &Symbol)> + '_ {
        self.symbols
            .iter()
            .enumerate()
            .map(|(i, s)| (SymbolId(i as u32), s))
    }
}

/// A plain sequence of symbols; the empty sequence is ε.
pub type SimplePhrase = Vec<SymbolId>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PhraseError {
    #[error("empty permutation phrase")]
    Empty,
    #[error("empty permutation element")]
    EmptyElement,
    #[error("duplicate permutation element `{0}`")]
    DuplicateElement(String),
}

/// A set of non-empty simple phrases matched in any order.
///
/// Elements are kept in canonical order (lexicographic by symbol names) so
/// that equal sets compare and hash equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PermutationPhrase {
    elements: Vec<SimplePhrase>,
}

impl PermutationPhrase {
    pub fn new(mut elements: Vec<SimplePhrase>, symbols: &SymbolTable) -> Result<Self, PhraseError> {
        if elements.is_empty() {
            return Err(PhraseError::Empty);
        }
        if elements.iter().any(|e| e.is_empty()) {
            return Err(PhraseError::EmptyElement);
        }
        elements.sort_by(|a, b| {
            let a = a.iter().map(|&s| symbols.name(s));
            let b = b.iter().map(|&s| symbols.name(s));
            a.cmp(b)
        });
        if let Some((a, _)) = elements.iter().tuple_windows().find(|(a, b)| a == b) {
            let name = a.iter().map(|&s| symbols.name(s)).join(" ");
            return Err(PhraseError::DuplicateElement(name));
        }
        Ok(PermutationPhrase { elements })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[SimplePhrase] {
        &self.elements
    }

    pub fn contains(&self, element: &[SymbolId]) -> bool {
        self.elements.iter().any(|e| e.as_slice() == element)
    }

    /// True when every element is a single symbol, the only shape the LR
    /// constructions accept.
    pub fn is_symbol_only(&self) -> bool {
        self.elements.iter().all(|e| e.len() == 1)
    }

    /// The symbol of element `i` when the element is a single symbol.
    pub fn symbol(&self, i: usize) -> Option<SymbolId> {
        match self.elements[i].as_slice() {
            [s] => Some(*s),
            _ => None,
        }
    }

    /// Index of the single-symbol element `y`.
    pub fn position_of(&self, y: SymbolId) -> Option<usize> {
        self.elements.iter().position(|e| e.as_slice() == [y])
    }

    pub fn symbol_len(&self) -> usize {
        self.elements.iter().map(Vec::len).sum()
    }

    pub fn union(&self, other: &PermutationPhrase, symbols: &SymbolTable) -> Result<Self, PhraseError> {
        let mut elements = self.elements.clone();
        for e in &other.elements {
            if !self.contains(e) {
                elements.push(e.clone());
            }
        }
        PermutationPhrase::new(elements, symbols)
    }

    /// `self ∖ other`; `None` when nothing is left.
    pub fn difference(&self, other: &PermutationPhrase) -> Option<Self> {
        let elements: Vec<_> = self
            .elements
            .iter()
            .filter(|e| !other.contains(e))
            .cloned()
            .collect();
        (!elements.is_empty()).then_some(PermutationPhrase { elements })
    }

    /// Sub-phrase made of the elements whose index bit is set in `mask`.
    pub fn subset(&self, mask: u64) -> Option<Self> {
        let elements: Vec<_> = self
            .elements
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, e)| e.clone())
            .collect();
        (!elements.is_empty()).then_some(PermutationPhrase { elements })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Segment {
    Symbol(SymbolId),
    Permutation(PermutationPhrase),
}

impl Segment {
    pub fn symbol_len(&self) -> usize {
        match self {
            Segment::Symbol(_) => 1,
            Segment::Permutation(p) => p.symbol_len(),
        }
    }
}

/// A right-hand side: concatenation of symbols and permutation phrases.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Phrase {
    segments: Vec<Segment>,
}

impl Phrase {
    pub fn new(segments: Vec<Segment>) -> Self {
        Phrase { segments }
    }

    pub fn epsilon() -> Self {
        Phrase::default()
    }

    pub fn from_symbols(symbols: &[SymbolId]) -> Self {
        Phrase {
            segments: symbols.iter().map(|&s| Segment::Symbol(s)).collect(),
        }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_epsilon(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn has_permutation(&self) -> bool {
        self.segments
            .iter()
            .any(|s| matches!(s, Segment::Permutation(_)))
    }

    /// Number of symbols in every member of the expansion.
    pub fn symbol_len(&self) -> usize {
        self.segments.iter().map(Segment::symbol_len).sum()
    }

    /// The symbols of a permutation-free phrase.
    pub fn as_symbols(&self) -> Option<Vec<SymbolId>> {
        self.segments
            .iter()
            .map(|s| match s {
                Segment::Symbol(y) => Some(*y),
                Segment::Permutation(_) => None,
            })
            .collect()
    }

    pub fn concat(&self, other: &Phrase) -> Phrase {
        let mut segments = self.segments.clone();
        segments.extend(other.segments.iter().cloned());
        Phrase { segments }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct RuleId(pub u32);

impl RuleId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub id: RuleId,
    pub lhs: SymbolId,
    pub rhs: Phrase,
    /// Source rules this rule stands for. A source rule lists itself; an
    /// expanded rule lists every permutation rule that enumerates to it.
    pub origins: Vec<RuleId>,
}

impl Rule {
    /// Symbols popped when reducing by this rule.
    pub fn pop_count(&self) -> usize {
        self.rhs.symbol_len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flavor {
    Cfgp,
    ExpandedCfg,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid grammar:\n{}", .0.iter().map(|d| format!("  {d}")).join("\n"))]
    Invalid(Vec<Diagnostic>),
    #[error("grammar is already augmented")]
    AlreadyAugmented,
    #[error("grammar contains permutation phrases; expand it first")]
    NotExpanded,
}

#[derive(Debug, Clone)]
pub struct Grammar {
    symbols: SymbolTable,
    rules: Vec<Rule>,
    start: SymbolId,
    flavor: Flavor,
    augmented: bool,
    by_lhs: Vec<Vec<RuleId>>,
}

impl Grammar {
    pub(crate) fn from_parts(
        symbols: SymbolTable,
        rules: Vec<Rule>,
        start: SymbolId,
        flavor: Flavor,
        augmented: bool,
    ) -> Self {
        let mut by_lhs = vec![Vec::new(); symbols.len()];
        for r in &rules {
            by_lhs[r.lhs.index()].push(r.id);
        }
        debug_assert!(rules.windows(2).all(|w| w[1].id.0 == w[0].id.0 + 1));
        Grammar {
            symbols,
            rules,
            start,
            flavor,
            augmented,
            by_lhs,
        }
    }

    pub fn symbols(&self) -> &SymbolTable {
        &self.symbols
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, id: RuleId) -> &Rule {
        &self.rules[id.index() - self.rules[0].id.index()]
    }

    pub fn rules_for(&self, lhs: SymbolId) -> &[RuleId] {
        &self.by_lhs[lhs.index()]
    }

    pub fn start(&self) -> SymbolId {
        self.start
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn is_augmented(&self) -> bool {
        self.augmented
    }

    pub fn name(&self, id: SymbolId) -> &str {
        self.symbols.name(id)
    }

    /// Terminals other than the end marker, in symbol-id order.
    pub fn terminals(&self) -> Vec<SymbolId> {
        self.symbols
            .ids()
            .filter(|&s| s != SymbolId::END && self.symbols.is_terminal(s))
            .collect()
    }

    pub fn nonterminals(&self) -> Vec<SymbolId> {
        self.symbols
            .ids()
            .filter(|&s| self.symbols.is_nonterminal(s))
            .collect()
    }

    /// Grammar symbols Σ = N ∪ T a user grammar can mention: the end marker
    /// and the augmented start symbol are excluded.
    pub fn alphabet(&self) -> Vec<SymbolId> {
        let aug = self.augmented.then(|| self.rules[0].lhs);
        self.symbols
            .ids()
            .filter(|&s| s != SymbolId::END && Some(s) != aug)
            .collect()
    }

    pub fn has_permutations(&self) -> bool {
        self.rules.iter().any(|r| r.rhs.has_permutation())
    }

    pub fn permutation_rules(&self) -> impl Iterator<Item = &Rule> + '_ {
        self.rules.iter().filter(|r| r.rhs.has_permutation())
    }

    /// Renders the grammar back into the text format, one rule per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.rules {
            if self.augmented && r.id.0 == 0 {
                continue;
            }
            out.push_str(self.name(r.lhs));
            out.push_str(" -> ");
            out.push_str(&self.render_phrase(&r.rhs));
            out.push_str(" ;\n");
        }
        out
    }

    pub fn render_phrase(&self, phrase: &Phrase) -> String {
        if phrase.is_epsilon() {
            return "%empty".to_owned();
        }
        phrase
            .segments()
            .iter()
            .map(|s| self.render_segment(s))
            .join(" ")
    }

    pub fn render_segment(&self, segment: &Segment) -> String {
        match segment {
            Segment::Symbol(y) => self.name(*y).to_owned(),
            Segment::Permutation(p) => self.render_permutation(p),
        }
    }

    pub fn render_permutation(&self, p: &PermutationPhrase) -> String {
        let inner = p
            .elements()
            .iter()
            .map(|e| e.iter().map(|&s| self.name(s)).join(" "))
            .join(" || ");
        format!("<< {inner} >>")
    }

    pub fn render_rule(&self, id: RuleId) -> String {
        let r = self.rule(id);
        format!("{} -> {}", self.name(r.lhs), self.render_phrase(&r.rhs))
    }

    /// Rules rendered with symbol names, used for structural comparison
    /// independent of symbol numbering.
    fn named_rules(&self) -> Vec<(u32, String, String)> {
        self.rules
            .iter()
            .map(|r| (r.id.0, self.name(r.lhs).to_owned(), self.render_phrase(&r.rhs)))
            .collect()
    }

    fn named_symbols(&self) -> Vec<(String, SymbolKind)> {
        let mut v: Vec<_> = self
            .symbols
            .iter()
            .map(|(_, s)| (s.name.clone(), s.kind))
            .collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }
}

impl PartialEq for Grammar {
    fn eq(&self, other: &Self) -> bool {
        self.flavor == other.flavor
            && self.augmented == other.augmented
            && self.name(self.start) == other.name(other.start)
            && self.named_symbols() == other.named_symbols()
            && self.named_rules() == other.named_rules()
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// All orders of a phrase: the cartesian concatenation of every segment's
/// permutations. Returned as a set, in lexicographic order of the canonical
/// element order.
pub fn expand_phrase(phrase: &Phrase) -> Vec<SimplePhrase> {
    expand_segments(phrase.segments())
}

pub(crate) fn expand_segments(segments: &[Segment]) -> Vec<SimplePhrase> {
    let mut acc: Vec<SimplePhrase> = vec![Vec::new()];
    for seg in segments {
        match seg {
            Segment::Symbol(y) => acc.iter_mut().for_each(|w| w.push(*y)),
            Segment::Permutation(p) => {
                let orders: Vec<SimplePhrase> = p
                    .elements()
                    .iter()
                    .permutations(p.len())
                    .map(|perm| perm.into_iter().flatten().copied().collect())
                    .collect();
                acc = acc
                    .iter()
                    .flat_map(|w| {
                        orders.iter().map(move |o| {
                            let mut v = w.clone();
                            v.extend_from_slice(o);
                            v
                        })
                    })
                    .collect();
            }
        }
    }
    // multi-symbol elements can collide (`<<A || A A>>`)
    let mut seen = std::collections::HashSet::with_capacity(acc.len());
    acc.retain(|w| seen.insert(w.clone()));
    acc
}

/// Replaces every permutation rule by its enumerated rules.
///
/// Rules are renumbered from 1 (0 stays reserved for the augmentation rule)
/// in source order; an enumerated rule produced by several source rules is
/// kept once and lists all of them in `origins`.
pub fn expand_grammar(g: &Grammar) -> Grammar {
    let mut rules: Vec<Rule> = Vec::new();
    let mut index: HashMap<(SymbolId, SimplePhrase), usize> = HashMap::new();
    let mut next_id = if g.augmented { 0 } else { 1 };
    for r in &g.rules {
        for seq in expand_phrase(&r.rhs) {
            let key = (r.lhs, seq);
            if let Some(&at) = index.get(&key) {
                let origins: &mut Vec<RuleId> = &mut rules[at].origins;
                for o in &r.origins {
                    if !origins.contains(o) {
                        origins.push(*o);
                    }
                }
                continue;
            }
            index.insert(key.clone(), rules.len());
            rules.push(Rule {
                id: RuleId(next_id),
                lhs: r.lhs,
                rhs: Phrase::from_symbols(&key.1),
                origins: r.origins.clone(),
            });
            next_id += 1;
        }
    }
    Grammar::from_parts(g.symbols.clone(), rules, g.start, Flavor::ExpandedCfg, g.augmented)
}

/// Adds `S' -> S` as rule 0 and makes `S'` the start symbol.
pub fn augment(g: &Grammar) -> Result<Grammar, GrammarError> {
    if g.augmented {
        return Err(GrammarError::AlreadyAugmented);
    }
    let mut symbols = g.symbols.clone();
    let mut name = format!("{}'", g.name(g.start));
    while symbols.get(&name).is_some() {
        name.push('\'');
    }
    let new_start = symbols.insert(&name, SymbolKind::Nonterminal);
    let mut rules = Vec::with_capacity(g.rules.len() + 1);
    rules.push(Rule {
        id: RuleId(0),
        lhs: new_start,
        rhs: Phrase::from_symbols(&[g.start]),
        origins: vec![RuleId(0)],
    });
    rules.extend(g.rules.iter().cloned());
    Ok(Grammar::from_parts(symbols, rules, new_start, g.flavor, true))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(g: &Grammar, seqs: &[SimplePhrase]) -> Vec<String> {
        seqs.iter()
            .map(|s| s.iter().map(|&y| g.name(y)).collect::<String>())
            .collect()
    }

    #[test]
    fn expand_three_symbols() {
        let g = parse_grammar("S -> << A || B || C >> ; A -> 'a' ; B -> 'b' ; C -> 'c' ;").unwrap();
        let got = names(&g, &expand_phrase(&g.rules()[0].rhs));
        assert_eq!(got, ["ABC", "ACB", "BAC", "BCA", "CAB", "CBA"]);
    }

    #[test]
    fn expand_simple_phrase_is_singleton() {
        let g = parse_grammar("X -> Y A B ;").unwrap();
        let got = names(&g, &expand_phrase(&g.rules()[0].rhs));
        assert_eq!(got, ["YAB"]);
    }

    #[test]
    fn expand_multi_symbol_element() {
        let g = parse_grammar("X -> Y << A || B || C D >> ;").unwrap();
        let mut got = names(&g, &expand_phrase(&g.rules()[0].rhs));
        got.sort();
        assert_eq!(got, ["YABCD", "YACDB", "YBACD", "YBCDA", "YCDAB", "YCDBA"]);
    }

    #[test]
    fn expand_grammar_products_and_identity() {
        let g = parse_grammar("X -> << A || B >> << C || D >> ;").unwrap();
        assert_eq!(expand_grammar(&g).rules().len(), 4);

        let plain = parse_grammar("E -> E '+' T | T ; T -> id ;").unwrap();
        let e = expand_grammar(&plain);
        assert_eq!(e.render(), plain.render());
        assert_eq!(e.rules().len(), plain.rules().len());
        assert!(e.rules().iter().all(|r| r.origins == vec![r.id]));
    }

    #[test]
    fn expand_grammar_merges_duplicate_enumerations() {
        let g = parse_grammar("S -> << a || b >> | b a ;").unwrap();
        let e = expand_grammar(&g);
        assert_eq!(e.rules().len(), 2);
        let ba = e.rules().iter().find(|r| e.render_phrase(&r.rhs) == "b a").unwrap();
        assert_eq!(ba.origins, vec![RuleId(1), RuleId(2)]);
    }

    #[test]
    fn augment_adds_rule_zero_once() {
        let g = parse_grammar("S -> a ;").unwrap();
        let a = augment(&g).unwrap();
        assert_eq!(a.rules().len(), 2);
        assert_eq!(a.rules()[0].id, RuleId(0));
        assert_eq!(a.name(a.start()), "S'");
        assert_eq!(augment(&a).unwrap_err(), GrammarError::AlreadyAugmented);
        assert_eq!(a.alphabet().len(), 2);
    }

    #[test]
    fn augment_picks_fresh_name() {
        let g = parse_grammar("S -> Sx ; Sx -> a ;").unwrap();
        let a = augment(&g).unwrap();
        assert_eq!(a.name(a.start()), "S'");
    }

    #[test]
    fn permutation_set_operations() {
        let g = parse_grammar("X -> << A || B || C >> << B || A >> ;").unwrap();
        let Segment::Permutation(abc) = &g.rules()[0].rhs.segments()[0] else { panic!() };
        let Segment::Permutation(ab) = &g.rules()[0].rhs.segments()[1] else { panic!() };
        assert_eq!(abc.len(), 3);
        let c = abc.difference(ab).unwrap();
        assert_eq!(g.render_permutation(&c), "<< C >>");
        assert!(ab.difference(abc).is_none());
        let back = ab.union(&c, g.symbols()).unwrap();
        assert_eq!(&back, abc);
        assert_eq!(g.render_permutation(ab), "<< A || B >>");
    }
}
