//! Shared helpers for the integration suites.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use permlr::automaton::{perm_closure, Automaton};
use permlr::grammar::{expand_phrase, validate, Grammar, Rule, RuleId, Segment, SymbolId};
use permlr::items::{self, Item};
use permlr::oracle::Paths;
use permlr::{build_modified, parse_grammar};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TERMINALS: [&str; 6] = ["a", "b", "c", "d", "e", "f"];
const NONTERMINALS: [&str; 4] = ["S", "A", "B", "C"];

fn random_source(rng: &mut ChaCha8Rng) -> String {
    let nts = &NONTERMINALS[..rng.gen_range(1..=3)];
    let ts = &TERMINALS[..rng.gen_range(2..=6)];
    let budget = rng.gen_range(nts.len()..=8);
    let mut alts: Vec<Vec<String>> = vec![Vec::new(); nts.len()];
    let mut has_perm = false;
    for i in 0..budget {
        let lhs = if i < nts.len() { i } else { rng.gen_range(0..nts.len()) };
        if lhs > 0 && rng.gen_bool(0.1) {
            alts[lhs].push("%empty".into());
            continue;
        }
        let mut segs = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            if rng.gen_bool(0.4) {
                has_perm = true;
                let mut pool: Vec<&str> = ts.to_vec();
                pool.extend(nts.iter().skip(1).filter(|_| rng.gen_bool(0.3)));
                pool.shuffle(rng);
                let n = rng.gen_range(2..=4).min(pool.len());
                segs.push(format!("<< {} >>", pool[..n].join(" || ")));
            } else if rng.gen_bool(0.25) {
                segs.push(nts[rng.gen_range(0..nts.len())].to_owned());
            } else {
                segs.push(ts[rng.gen_range(0..ts.len())].to_owned());
            }
        }
        alts[lhs].push(segs.join(" "));
    }
    if !has_perm {
        let n = rng.gen_range(2..=ts.len().min(4));
        alts[0].push(format!("<< {} >>", ts[..n].join(" || ")));
    }
    nts.iter()
        .zip(&alts)
        .map(|(n, a)| format!("{n} -> {} ;\n", a.join(" | ")))
        .collect()
}

/// A valid CFGP with at most 6 terminals, 8 rules and permutation phrases of
/// size at most 4, drawn from `seed`.
pub fn random_cfgp(seed: u64) -> (String, Grammar) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let src = random_source(&mut rng);
        let Ok(g) = parse_grammar(&src) else { continue };
        if validate(&g).is_empty() && g.rules().len() <= 8 {
            return (src, g);
        }
    }
}

/// Textbook FIRST/FOLLOW on a permutation-free grammar.
pub struct Textbook {
    pub first: BTreeMap<SymbolId, BTreeSet<SymbolId>>,
    pub nullable: BTreeSet<SymbolId>,
    pub follow: BTreeMap<SymbolId, BTreeSet<SymbolId>>,
}

fn flat(r: &Rule) -> Vec<SymbolId> {
    r.rhs.as_symbols().expect("expanded grammar")
}

impl Textbook {
    pub fn first_of(&self, g: &Grammar, w: &[SymbolId]) -> (BTreeSet<SymbolId>, bool) {
        let mut out = BTreeSet::new();
        for &y in w {
            if g.symbols().is_terminal(y) {
                out.insert(y);
                return (out, false);
            }
            out.extend(self.first[&y].iter().copied());
            if !self.nullable.contains(&y) {
                return (out, false);
            }
        }
        (out, true)
    }

    pub fn compute(g: &Grammar) -> Self {
        let nts = g.nonterminals();
        let mut tb = Textbook {
            first: nts.iter().map(|&n| (n, BTreeSet::new())).collect(),
            nullable: BTreeSet::new(),
            follow: nts.iter().map(|&n| (n, BTreeSet::new())).collect(),
        };
        loop {
            let mut changed = false;
            for r in g.rules() {
                let (f, null) = tb.first_of(g, &flat(r));
                let set = tb.first.get_mut(&r.lhs).unwrap();
                let before = set.len();
                set.extend(f);
                changed |= set.len() != before;
                if null {
                    changed |= tb.nullable.insert(r.lhs);
                }
            }
            if !changed {
                break;
            }
        }
        tb.follow.get_mut(&g.start()).unwrap().insert(SymbolId::END);
        loop {
            let mut changed = false;
            for r in g.rules() {
                let rhs = flat(r);
                for (i, &y) in rhs.iter().enumerate() {
                    if !g.symbols().is_nonterminal(y) {
                        continue;
                    }
                    let (mut f, null) = tb.first_of(g, &rhs[i + 1..]);
                    if null {
                        f.extend(tb.follow[&r.lhs].iter().copied());
                    }
                    let set = tb.follow.get_mut(&y).unwrap();
                    let before = set.len();
                    set.extend(f);
                    changed |= set.len() != before;
                }
            }
            if !changed {
                break;
            }
        }
        tb
    }
}

/// Every item of every rule of `g`.
pub fn all_items(g: &Grammar) -> Vec<Item> {
    g.rules().iter().flat_map(items::rule_items).collect()
}

/// `step` keeps the rule for every item and every symbol in `next`.
pub fn step_preserves_rule(g: &Grammar) -> Result<(), String> {
    for i in all_items(g) {
        for y in items::next(g, i) {
            let j = items::step(g, i, y).map_err(|e| format!("{e:?}"))?;
            if j.rule != i.rule {
                return Err(format!("step changed the rule of {}", items::render_item(g, i)));
            }
        }
    }
    Ok(())
}

pub fn closure_idempotent(g: &Grammar, pick: &[usize]) -> Result<(), String> {
    let all = all_items(g);
    let mut seed: Vec<Item> = pick.iter().map(|&k| all[k % all.len()]).collect();
    seed.sort_unstable();
    seed.dedup();
    let once = perm_closure(g, &seed);
    if perm_closure(g, &once) != once {
        return Err("closure is not idempotent".into());
    }
    if !seed.iter().all(|i| once.contains(i)) {
        return Err("closure dropped a seed item".into());
    }
    Ok(())
}

/// Paths of every state are closed under non-empty suffixes, and every
/// item's state has only orders of its pre-dot phrase as length-|α| paths.
pub fn paths_properties(a: &Automaton) -> Result<(), String> {
    let g = a.grammar();
    let mut paths = Paths::new(a);
    for s in 0..a.len() {
        if a.state(s).is_error {
            continue;
        }
        let all = paths.paths(s);
        for w in &all {
            for k in 1..w.len() {
                if !all.contains(&w[k..]) {
                    return Err(format!("state {s}: suffix of a path is missing"));
                }
            }
        }
        for &i in &a.state(s).items {
            let (alpha, _) = items::split_at_dot(g, i);
            let len = alpha.symbol_len();
            let expansion: BTreeSet<Vec<SymbolId>> = expand_phrase(&alpha).into_iter().collect();
            if len > 0 && !paths.exact(s, len).is_subset(&expansion) {
                return Err(format!("state {s}: a path is not an order of the phrase before the dot"));
            }
        }
    }
    Ok(())
}

/// `|expand(ω)|` is the product of `|π|!` over the permutation segments, and
/// every expansion has the phrase's symbol length.
pub fn expansion_cardinality(g: &Grammar) -> Result<(), String> {
    for r in g.rules() {
        let expected: usize = r
            .rhs
            .segments()
            .iter()
            .map(|s| match s {
                Segment::Symbol(_) => 1,
                Segment::Permutation(p) => (1..=p.len()).product(),
            })
            .product();
        let got = expand_phrase(&r.rhs);
        if got.len() != expected {
            return Err(format!("rule {}: {} expansions, expected {expected}", r.id, got.len()));
        }
        if got.iter().any(|w| w.len() != r.rhs.symbol_len()) {
            return Err(format!("rule {}: expansion of the wrong length", r.id));
        }
    }
    Ok(())
}

pub fn modified(g: &Grammar) -> Automaton {
    build_modified(g).expect("valid grammar")
}


/// Minimum derivation height of every nonterminal, for steering random
/// derivations towards termination.
fn heights(g: &Grammar) -> Vec<usize> {
    let mut h = vec![usize::MAX; g.symbols().len()];
    for y in g.symbols().ids() {
        if g.symbols().is_terminal(y) {
            h[y.index()] = 0;
        }
    }
    loop {
        let mut changed = false;
        for r in g.rules() {
            let syms = expand_phrase(&r.rhs).swap_remove(0);
            let max = syms.iter().map(|y| h[y.index()]).max().unwrap_or(0);
            if max != usize::MAX && max + 1 < h[r.lhs.index()] {
                h[r.lhs.index()] = max + 1;
                changed = true;
            }
        }
        if !changed {
            return h;
        }
    }
}

/// A random sentence of `g`: rules picked at random, permutation phrases in a
/// random order, and the shallowest rule once `depth` runs out.
pub fn random_sentence(g: &Grammar, seed: u64, depth: usize) -> Vec<SymbolId> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = heights(g);
    let mut out = Vec::new();
    fn go(g: &Grammar, h: &[usize], rng: &mut ChaCha8Rng, y: SymbolId, depth: usize, out: &mut Vec<SymbolId>) {
        if g.symbols().is_terminal(y) {
            out.push(y);
            return;
        }
        let rules = g.rules_for(y);
        let height = |r: &RuleId| {
            expand_phrase(&g.rule(*r).rhs)[0]
                .iter()
                .map(|s| h[s.index()])
                .max()
                .unwrap_or(0)
        };
        let pick = if depth == 0 {
            *rules.iter().min_by_key(|r| height(r)).unwrap()
        } else {
            rules[rng.gen_range(0..rules.len())]
        };
        let mut orders = expand_phrase(&g.rule(pick).rhs);
        let body = orders.swap_remove(rng.gen_range(0..orders.len()));
        for s in body {
            go(g, h, rng, s, depth.saturating_sub(1), out);
        }
    }
    go(g, &h, &mut rng, g.start(), depth, &mut out);
    out
}
