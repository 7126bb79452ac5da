//! FIRST and FOLLOW over phrases that may contain permutation phrases.

use std::collections::BTreeSet;

use crate::grammar::{Grammar, Segment, SymbolId};

/// Terminals that can begin a phrase, plus whether it derives ε.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FirstSet {
    pub terminals: BTreeSet<SymbolId>,
    pub nullable: bool,
}

impl FirstSet {
    pub fn epsilon() -> Self {
        FirstSet {
            terminals: BTreeSet::new(),
            nullable: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FirstFollow {
    first: Vec<FirstSet>,
    follow: Vec<BTreeSet<SymbolId>>,
}

impl FirstFollow {
    pub fn compute(g: &Grammar) -> Self {
        let symbols = g.symbols();
        let mut ff = FirstFollow {
            first: symbols
                .ids()
                .map(|s| {
                    if symbols.is_terminal(s) {
                        FirstSet {
                            terminals: BTreeSet::from([s]),
                            nullable: false,
                        }
                    } else {
                        FirstSet::default()
                    }
                })
                .collect(),
            follow: vec![BTreeSet::new(); symbols.len()],
        };

        loop {
            let mut changed = false;
            for r in g.rules() {
                let f = ff.first_phrase(r.rhs.segments());
                let cur = &mut ff.first[r.lhs.index()];
                if f.nullable && !cur.nullable {
                    cur.nullable = true;
                    changed = true;
                }
                for t in f.terminals {
                    changed |= cur.terminals.insert(t);
                }
            }
            if !changed {
                break;
            }
        }

        ff.follow[g.start().index()].insert(SymbolId::END);
        loop {
            let mut changed = false;
            for r in g.rules() {
                let segs = r.rhs.segments();
                for (i, seg) in segs.iter().enumerate() {
                    let rest = ff.first_phrase(&segs[i + 1..]);
                    match seg {
                        Segment::Symbol(b) => {
                            if symbols.is_nonterminal(*b) {
                                changed |= ff.add_follow(*b, &rest, r.lhs);
                            }
                        }
                        Segment::Permutation(p) => {
                            for (ei, e) in p.elements().iter().enumerate() {
                                for (j, &y) in e.iter().enumerate() {
                                    if !symbols.is_nonterminal(y) {
                                        continue;
                                    }
                                    // inside a multi-symbol element
                                    let within = ff.first_simple(&e[j + 1..]);
                                    changed |= ff.add_terminals(y, &within.terminals);
                                    if !within.nullable {
                                        continue;
                                    }
                                    // any sibling may come next
                                    for (si, sib) in p.elements().iter().enumerate() {
                                        if si != ei {
                                            let f = ff.first_simple(sib);
                                            changed |= ff.add_terminals(y, &f.terminals);
                                        }
                                    }
                                    // or the element is last
                                    changed |= ff.add_follow(y, &rest, r.lhs);
                                }
                            }
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        ff
    }

    fn add_terminals(&mut self, y: SymbolId, ts: &BTreeSet<SymbolId>) -> bool {
        let set = &mut self.follow[y.index()];
        let before = set.len();
        set.extend(ts.iter().copied());
        set.len() != before
    }

    /// FOLLOW(y) ⊇ rest ∖ ε, plus FOLLOW(lhs) when rest is nullable.
    fn add_follow(&mut self, y: SymbolId, rest: &FirstSet, lhs: SymbolId) -> bool {
        let mut changed = self.add_terminals(y, &rest.terminals);
        if rest.nullable && y != lhs {
            let from = self.follow[lhs.index()].clone();
            changed |= self.add_terminals(y, &from);
        }
        changed
    }

    pub fn first_symbol(&self, y: SymbolId) -> &FirstSet {
        &self.first[y.index()]
    }

    pub fn nullable(&self, y: SymbolId) -> bool {
        self.first[y.index()].nullable
    }

    pub fn first_simple(&self, symbols: &[SymbolId]) -> FirstSet {
        let mut out = FirstSet::epsilon();
        for &y in symbols {
            let f = &self.first[y.index()];
            out.terminals.extend(f.terminals.iter().copied());
            if !f.nullable {
                out.nullable = false;
                return out;
            }
        }
        out
    }

    /// A permutation phrase begins with any element's FIRST and is nullable
    /// only when every element is.
    pub fn first_permutation(&self, elements: &[Vec<SymbolId>]) -> FirstSet {
        let mut out = FirstSet::epsilon();
        for e in elements {
            let f = self.first_simple(e);
            out.terminals.extend(f.terminals);
            out.nullable &= f.nullable;
        }
        out
    }

    pub fn first_phrase(&self, segments: &[Segment]) -> FirstSet {
        let mut out = FirstSet::epsilon();
        for seg in segments {
            let f = match seg {
                Segment::Symbol(y) => self.first[y.index()].clone(),
                Segment::Permutation(p) => self.first_permutation(p.elements()),
            };
            out.terminals.extend(f.terminals);
            if !f.nullable {
                out.nullable = false;
                return out;
            }
        }
        out
    }

    pub fn follow(&self, n: SymbolId) -> &BTreeSet<SymbolId> {
        &self.follow[n.index()]
    }
}
