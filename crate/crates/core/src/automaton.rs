//! LR(0) and LR(1) automata.
//!
//! Two item semantics drive one worklist builder:
//!
//! * **modified**: items from [`crate::items`], where a permutation phrase
//!   is matched as a set through `next`/`step`;
//! * **standard**: the textbook dot-over-a-symbol-string items, valid only
//!   on permutation-free (expanded) grammars.
//!
//! States are numbered breadth-first from the initial state, visiting
//! outgoing edges in lexicographic order of symbol names, so numbering does
//! not depend on the order the worklist was drained in. The error state is
//! appended last and absorbs every transition.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;

use serde::Serialize;

use crate::grammar::{augment, check_lr, Grammar, GrammarError, RuleId, Segment, SymbolId};
use crate::items::{self, Dot, Item};
use crate::tables::{FirstFollow, FirstSet};

pub type StateId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Construction {
    Modified,
    Standard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Collection {
    Lr0,
    Lr1,
    Lalr,
}

/// Deliberate defects for testing the equivalence checker.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Entering a permutation phrase jumps straight past it.
    SkipPermutationEntry,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WorklistOrder {
    #[default]
    Fifo,
    Lifo,
    /// Pseudo-random pick from the pending states.
    Seeded(u64),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BuildOptions {
    pub order: WorklistOrder,
    #[doc(hidden)]
    pub fault: Option<Fault>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct State {
    pub id: StateId,
    pub items: Vec<Item>,
    pub is_error: bool,
}

#[derive(Debug, Clone)]
pub struct Automaton {
    grammar: Arc<Grammar>,
    construction: Construction,
    collection: Collection,
    states: Vec<State>,
    transitions: Vec<StateId>,
    width: usize,
}

impl Automaton {
    pub fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    pub fn shared_grammar(&self) -> Arc<Grammar> {
        Arc::clone(&self.grammar)
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn collection(&self) -> Collection {
        self.collection
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn state(&self, id: StateId) -> &State {
        &self.states[id]
    }

    pub fn initial(&self) -> StateId {
        0
    }

    pub fn error_state(&self) -> StateId {
        self.states.len() - 1
    }

    /// Number of states including the error state.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn transition(&self, from: StateId, y: SymbolId) -> StateId {
        self.transitions[from * self.width + y.index()]
    }

    /// Non-error transitions out of `from`, ordered by symbol id.
    pub fn edges(&self, from: StateId) -> impl Iterator<Item = (SymbolId, StateId)> + '_ {
        let err = self.error_state();
        self.transitions[from * self.width..(from + 1) * self.width]
            .iter()
            .enumerate()
            .filter(move |(_, &t)| t != err)
            .map(|(y, &t)| (SymbolId(y as u32), t))
    }

    /// Count of non-error transitions.
    pub fn transition_count(&self) -> usize {
        let err = self.error_state();
        self.transitions.iter().filter(|&&t| t != err).count()
    }

    pub fn kernel(&self, id: StateId) -> Vec<Item> {
        let g = &self.grammar;
        self.states[id]
            .items
            .iter()
            .copied()
            .filter(|i| i.is_kernel(g))
            .collect()
    }

    /// Runs the DFA over a symbol string.
    pub fn run(&self, from: StateId, word: &[SymbolId]) -> StateId {
        word.iter().fold(from, |s, &y| self.transition(s, y))
    }

    /// Looks up the non-error state whose item set is exactly `items`.
    pub fn find_state(&self, items: &[Item]) -> Option<StateId> {
        self.states.iter().position(|s| !s.is_error && s.items == items)
    }
}

/// The item algebra a construction runs on.
pub(crate) trait Semantics {
    fn grammar(&self) -> &Grammar;
    fn next(&self, item: Item, out: &mut Vec<SymbolId>);
    fn step(&self, item: Item, y: SymbolId) -> Option<Item>;
    /// FIRST of what remains after moving the dot over `y`.
    fn first_after(&self, item: Item, y: SymbolId) -> FirstSet;
}

pub(crate) struct ModifiedSemantics<'g> {
    pub g: &'g Grammar,
    pub ff: Option<FirstFollow>,
    pub fault: Option<Fault>,
}

impl Semantics for ModifiedSemantics<'_> {
    fn grammar(&self) -> &Grammar {
        self.g
    }

    fn next(&self, item: Item, out: &mut Vec<SymbolId>) {
        out.extend(items::next(self.g, item));
    }

    fn step(&self, item: Item, y: SymbolId) -> Option<Item> {
        if self.fault == Some(Fault::SkipPermutationEntry) {
            if let Dot::Top(pos) = item.dot {
                if let Some(Segment::Permutation(p)) = self.g.rule(item.rule).rhs.segments().get(pos as usize) {
                    return p.position_of(y).map(|_| Item {
                        dot: Dot::Top(pos + 1),
                        ..item
                    });
                }
            }
        }
        items::step(self.g, item, y).ok()
    }

    fn first_after(&self, item: Item, y: SymbolId) -> FirstSet {
        let ff = self.ff.as_ref().expect("LR(1) construction needs FIRST sets");
        let moved = self.step(item, y).expect("y is in next(item)");
        let (_, rest) = items::split_at_dot(self.g, moved);
        ff.first_phrase(rest.segments())
    }
}

/// Textbook items on a permutation-free grammar: `Dot::Top(k)` is the dot
/// before the k-th symbol.
pub(crate) struct TextbookSemantics<'g> {
    g: &'g Grammar,
    rhs: Vec<Vec<SymbolId>>,
    ff: Option<FirstFollow>,
}

impl<'g> TextbookSemantics<'g> {
    pub(crate) fn new(g: &'g Grammar, ff: Option<FirstFollow>) -> Result<Self, GrammarError> {
        let rhs = g
            .rules()
            .iter()
            .map(|r| r.rhs.as_symbols().ok_or(GrammarError::NotExpanded))
            .collect::<Result<_, _>>()?;
        Ok(TextbookSemantics { g, rhs, ff })
    }

    fn symbols(&self, rule: RuleId) -> &[SymbolId] {
        &self.rhs[rule.index() - self.g.rules()[0].id.index()]
    }
}

impl Semantics for TextbookSemantics<'_> {
    fn grammar(&self) -> &Grammar {
        self.g
    }

    fn next(&self, item: Item, out: &mut Vec<SymbolId>) {
        let Dot::Top(k) = item.dot else { unreachable!() };
        if let Some(&y) = self.symbols(item.rule).get(k as usize) {
            out.push(y);
        }
    }

    fn step(&self, item: Item, y: SymbolId) -> Option<Item> {
        let Dot::Top(k) = item.dot else { unreachable!() };
        (self.symbols(item.rule).get(k as usize) == Some(&y)).then_some(Item {
            dot: Dot::Top(k + 1),
            ..item
        })
    }

    fn first_after(&self, item: Item, _y: SymbolId) -> FirstSet {
        let Dot::Top(k) = item.dot else { unreachable!() };
        let ff = self.ff.as_ref().expect("LR(1) construction needs FIRST sets");
        ff.first_simple(&self.symbols(item.rule)[k as usize + 1..])
    }
}

/// Closure of an item set. Items without lookahead close LR(0)-style;
/// items with one close LR(1)-style, using FIRST of the rest of the item
/// after the nonterminal, followed by the lookahead.
pub(crate) fn close<S: Semantics>(sem: &S, kernel: &[Item]) -> Vec<Item> {
    let g = sem.grammar();
    let symbols = g.symbols();
    let mut set: HashSet<Item> = kernel.iter().copied().collect();
    let mut work: Vec<Item> = kernel.to_vec();
    let mut done_lr0: HashSet<SymbolId> = HashSet::new();
    let mut done_lr1: HashSet<(SymbolId, SymbolId)> = HashSet::new();
    let mut next = Vec::new();
    while let Some(it) = work.pop() {
        next.clear();
        sem.next(it, &mut next);
        for &b in next.iter().filter(|&&b| symbols.is_nonterminal(b)) {
            match it.lookahead {
                None => {
                    if done_lr0.insert(b) {
                        for &r in g.rules_for(b) {
                            let new = Item::start(r);
                            if set.insert(new) {
                                work.push(new);
                            }
                        }
                    }
                }
                Some(la) => {
                    let f = sem.first_after(it, b);
                    let las = f.terminals.iter().copied().chain(f.nullable.then_some(la));
                    for la in las {
                        if done_lr1.insert((b, la)) {
                            for &r in g.rules_for(b) {
                                let new = Item::start(r).with_lookahead(Some(la));
                                if set.insert(new) {
                                    work.push(new);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let mut v: Vec<Item> = set.into_iter().collect();
    v.sort_unstable();
    v
}

/// Kernels of the successors of an item set, keyed by symbol.
fn successors<S: Semantics>(sem: &S, items: &[Item]) -> HashMap<SymbolId, Vec<Item>> {
    let mut out: HashMap<SymbolId, Vec<Item>> = HashMap::new();
    let mut next = Vec::new();
    for &it in items {
        next.clear();
        sem.next(it, &mut next);
        for &y in &next {
            if let Some(j) = sem.step(it, y) {
                out.entry(y).or_default().push(j);
            }
        }
    }
    for v in out.values_mut() {
        v.sort_unstable();
        v.dedup();
    }
    out
}

struct Raw {
    states: Vec<Vec<Item>>,
    edges: Vec<Vec<(SymbolId, usize)>>,
}

struct Picker {
    order: WorklistOrder,
    rng: u64,
}

impl Picker {
    fn pick(&mut self, pending: &mut VecDeque<usize>) -> Option<usize> {
        match self.order {
            WorklistOrder::Fifo => pending.pop_front(),
            WorklistOrder::Lifo => pending.pop_back(),
            WorklistOrder::Seeded(_) => {
                if pending.is_empty() {
                    return None;
                }
                // splitmix64
                self.rng = self.rng.wrapping_add(0x9e37_79b9_7f4a_7c15);
                let mut z = self.rng;
                z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
                z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
                z ^= z >> 31;
                let i = (z % pending.len() as u64) as usize;
                pending.swap_remove_back(i)
            }
        }
    }
}

fn collect<S: Semantics>(sem: &S, start: Vec<Item>, order: WorklistOrder) -> Raw {
    // A state's closure only adds dot-at-start items and goto kernels never
    // contain them, so kernels identify states exactly as full item sets do.
    let mut index: HashMap<Vec<Item>, usize> = HashMap::new();
    let mut raw = Raw {
        states: Vec::new(),
        edges: Vec::new(),
    };
    index.insert(start.clone(), 0);
    raw.states.push(close(sem, &start));
    raw.edges.push(Vec::new());
    let mut pending = VecDeque::from([0usize]);
    let mut picker = Picker {
        order,
        rng: match order {
            WorklistOrder::Seeded(s) => s,
            _ => 0,
        },
    };
    while let Some(s) = picker.pick(&mut pending) {
        let succ = successors(sem, &raw.states[s]);
        let mut edges = Vec::with_capacity(succ.len());
        for (y, kernel) in succ {
            let t = match index.get(&kernel) {
                Some(&t) => t,
                None => {
                    let t = raw.states.len();
                    raw.states.push(close(sem, &kernel));
                    raw.edges.push(Vec::new());
                    index.insert(kernel, t);
                    pending.push_back(t);
                    t
                }
            };
            edges.push((y, t));
        }
        raw.edges[s] = edges;
    }
    raw
}

/// Breadth-first renumbering with name-ordered edges; appends the error state.
fn finish(
    grammar: Arc<Grammar>,
    construction: Construction,
    collection: Collection,
    raw: Raw,
) -> Automaton {
    let symbols = grammar.symbols();
    let mut by_name: Vec<SymbolId> = symbols.ids().collect();
    by_name.sort_by(|a, b| symbols.name(*a).cmp(symbols.name(*b)));
    let mut rank = vec![0usize; symbols.len()];
    for (i, s) in by_name.iter().enumerate() {
        rank[s.index()] = i;
    }

    let n = raw.states.len();
    let mut new_id = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::from([0usize]);
    new_id[0] = 0;
    order.push(0);
    while let Some(s) = queue.pop_front() {
        let mut edges = raw.edges[s].clone();
        edges.sort_by_key(|(y, _)| rank[y.index()]);
        for (_, t) in edges {
            if new_id[t] == usize::MAX {
                new_id[t] = order.len();
                order.push(t);
                queue.push_back(t);
            }
        }
    }
    debug_assert_eq!(order.len(), n, "every collected state is reachable");

    let width = symbols.len();
    let error = n;
    let mut transitions = vec![error; (n + 1) * width];
    let mut raw_states: Vec<Option<Vec<Item>>> = raw.states.into_iter().map(Some).collect();
    let mut states = Vec::with_capacity(n + 1);
    for (id, &old) in order.iter().enumerate() {
        for &(y, t) in &raw.edges[old] {
            transitions[id * width + y.index()] = new_id[t];
        }
        states.push(State {
            id,
            items: raw_states[old].take().unwrap(),
            is_error: false,
        });
    }
    states.push(State {
        id: error,
        items: Vec::new(),
        is_error: true,
    });
    Automaton {
        grammar,
        construction,
        collection,
        states,
        transitions,
        width,
    }
}

fn prepare(g: &Grammar, construction: Construction) -> Result<Arc<Grammar>, GrammarError> {
    match construction {
        Construction::Modified => check_lr(g)?,
        Construction::Standard => {
            if g.has_permutations() {
                return Err(GrammarError::NotExpanded);
            }
            check_lr(g)?
        }
    }
    Ok(Arc::new(if g.is_augmented() { g.clone() } else { augment(g)? }))
}

/// Builds an automaton of the given construction and collection.
pub fn build(
    g: &Grammar,
    construction: Construction,
    collection: Collection,
    options: BuildOptions,
) -> Result<Automaton, GrammarError> {
    let grammar = prepare(g, construction)?;
    let lookahead = collection != Collection::Lr0;
    let ff = lookahead.then(|| FirstFollow::compute(&grammar));
    let start = vec![Item::start(RuleId(0)).with_lookahead(lookahead.then_some(SymbolId::END))];
    let raw = match construction {
        Construction::Modified => {
            let sem = ModifiedSemantics {
                g: &grammar,
                ff,
                fault: options.fault,
            };
            collect(&sem, start, options.order)
        }
        Construction::Standard => {
            let sem = TextbookSemantics::new(&grammar, ff)?;
            collect(&sem, start, options.order)
        }
    };
    let lr1 = finish(
        Arc::clone(&grammar),
        construction,
        if lookahead { Collection::Lr1 } else { Collection::Lr0 },
        raw,
    );
    Ok(if collection == Collection::Lalr {
        merge_cores(&lr1)
    } else {
        lr1
    })
}

/// LR(0) automaton by the permutation-aware construction.
pub fn build_modified(g: &Grammar) -> Result<Automaton, GrammarError> {
    build(g, Construction::Modified, Collection::Lr0, BuildOptions::default())
}

/// Textbook LR(0) automaton; `g` must be permutation-free.
pub fn build_standard(g: &Grammar) -> Result<Automaton, GrammarError> {
    build(g, Construction::Standard, Collection::Lr0, BuildOptions::default())
}

/// LALR automaton: LR(1) states with equal LR(0) cores merged, numbered by
/// first appearance.
fn merge_cores(lr1: &Automaton) -> Automaton {
    let n = lr1.len() - 1;
    let mut core_index: HashMap<Vec<Item>, usize> = HashMap::new();
    let mut merged_of = vec![0usize; n];
    let mut items: Vec<Vec<Item>> = Vec::new();
    for s in 0..n {
        let mut core: Vec<Item> = lr1.states[s].items.iter().map(|i| i.core()).collect();
        core.dedup();
        let m = *core_index.entry(core).or_insert_with(|| {
            items.push(Vec::new());
            items.len() - 1
        });
        merged_of[s] = m;
        items[m].extend_from_slice(&lr1.states[s].items);
    }
    let mut edges = vec![Vec::new(); items.len()];
    for s in 0..n {
        let m = merged_of[s];
        if edges[m].is_empty() {
            edges[m] = lr1.edges(s).map(|(y, t)| (y, merged_of[t])).collect();
        }
    }
    for v in &mut items {
        v.sort_unstable();
        v.dedup();
    }
    let raw = Raw { states: items, edges };
    finish(lr1.shared_grammar(), lr1.construction, Collection::Lalr, raw)
}

/// LR(0) closure under the modified item semantics.
pub fn perm_closure(g: &Grammar, items: &[Item]) -> Vec<Item> {
    let sem = ModifiedSemantics { g, ff: None, fault: None };
    close(&sem, items)
}

/// Closure of the items reached from `items` on `y`; empty means the error
/// state.
pub fn perm_goto(g: &Grammar, items: &[Item], y: SymbolId) -> Vec<Item> {
    let sem = ModifiedSemantics { g, ff: None, fault: None };
    match successors(&sem, items).remove(&y) {
        Some(kernel) => close(&sem, &kernel),
        None => Vec::new(),
    }
}

/// LR(1) closure under the modified item semantics.
pub fn lr1_closure(g: &Grammar, ff: &FirstFollow, items: &[Item]) -> Vec<Item> {
    let sem = ModifiedSemantics {
        g,
        ff: Some(ff.clone()),
        fault: None,
    };
    close(&sem, items)
}
