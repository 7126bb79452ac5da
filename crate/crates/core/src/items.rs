//! LR(0)/LR(1) items over right-hand sides with permutation phrases.
//!
//! A dot either sits between top-level segments (level 1) or inside a
//! permutation segment (level 2). A level-2 dot records which elements have
//! been seen as a bit set over the segment's canonical element order; the
//! expected elements are the complement. Matching inside a permutation phrase
//! is therefore order-free, which is where the state savings come from.

use std::fmt;

use itertools::Itertools;
use thiserror::Error;

use crate::grammar::{Grammar, Phrase, PermutationPhrase, Rule, RuleId, Segment, SymbolId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dot {
    /// Before top-level segment `position` (`0..=segment count`).
    Top(u32),
    /// Inside permutation segment `segment`; `seen` is a non-empty proper
    /// subset of its elements.
    Inside { segment: u32, seen: u64 },
}

impl Dot {
    pub fn level(self) -> u8 {
        match self {
            Dot::Top(_) => 1,
            Dot::Inside { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Item {
    pub rule: RuleId,
    pub dot: Dot,
    pub lookahead: Option<SymbolId>,
}

impl Item {
    pub fn start(rule: RuleId) -> Item {
        Item {
            rule,
            dot: Dot::Top(0),
            lookahead: None,
        }
    }

    pub fn with_lookahead(self, lookahead: Option<SymbolId>) -> Item {
        Item { lookahead, ..self }
    }

    /// The LR(0) part of the item.
    pub fn core(self) -> Item {
        Item {
            lookahead: None,
            ..self
        }
    }

    pub fn is_complete(self, g: &Grammar) -> bool {
        self.dot == Dot::Top(g.rule(self.rule).rhs.segments().len() as u32)
    }

    /// Kernel items have the dot past the start; the augmented start item
    /// counts as kernel too.
    pub fn is_kernel(self, g: &Grammar) -> bool {
        self.dot != Dot::Top(0) || (g.is_augmented() && self.rule == RuleId(0))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepError {
    #[error("step undefined: `{symbol}` is not in next of `{item}`")]
    Undefined { item: String, symbol: String },
    #[error("step unsupported: permutation element of more than one symbol in `{item}`")]
    Unsupported { item: String },
}

fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn permutation_at(rule: &Rule, segment: u32) -> &PermutationPhrase {
    match &rule.rhs.segments()[segment as usize] {
        Segment::Permutation(p) => p,
        Segment::Symbol(_) => unreachable!("level-2 dot on a symbol segment"),
    }
}

/// All dot placements of a phrase, in segment order.
pub fn item_phrases(phrase: &Phrase) -> Vec<Dot> {
    let mut out = Vec::new();
    for (i, seg) in phrase.segments().iter().enumerate() {
        out.push(Dot::Top(i as u32));
        if let Segment::Permutation(p) = seg {
            let full = full_mask(p.len());
            out.extend((1..full).map(|seen| Dot::Inside {
                segment: i as u32,
                seen,
            }));
        }
    }
    out.push(Dot::Top(phrase.segments().len() as u32));
    out
}

/// The LR(0) items of one rule.
pub fn rule_items(rule: &Rule) -> Vec<Item> {
    item_phrases(&rule.rhs)
        .into_iter()
        .map(|dot| Item {
            rule: rule.id,
            dot,
            lookahead: None,
        })
        .collect()
}

/// Symbols that can begin some expansion of the phrase, looking only at its
/// first segment.
pub fn next_phrase(segments: &[Segment]) -> Vec<SymbolId> {
    match segments.first() {
        None => Vec::new(),
        Some(Segment::Symbol(y)) => vec![*y],
        Some(Segment::Permutation(p)) => p.elements().iter().map(|e| e[0]).collect(),
    }
}

/// `next` of the phrase after the dot.
pub fn next(g: &Grammar, item: Item) -> Vec<SymbolId> {
    let rule = g.rule(item.rule);
    match item.dot {
        Dot::Top(pos) => next_phrase(&rule.rhs.segments()[pos as usize..]),
        Dot::Inside { segment, seen } => {
            let p = permutation_at(rule, segment);
            p.elements()
                .iter()
                .enumerate()
                .filter(|(i, _)| seen >> i & 1 == 0)
                .map(|(_, e)| e[0])
                .collect()
        }
    }
}

/// Moves the dot over `y`.
pub fn step(g: &Grammar, item: Item, y: SymbolId) -> Result<Item, StepError> {
    let rule = g.rule(item.rule);
    let segments = rule.rhs.segments();
    let undefined = || StepError::Undefined {
        item: render_item(g, item),
        symbol: g.name(y).to_owned(),
    };
    let (segment, seen) = match item.dot {
        Dot::Top(pos) => match segments.get(pos as usize) {
            None => return Err(undefined()),
            Some(Segment::Symbol(s)) if *s == y => {
                return Ok(Item {
                    dot: Dot::Top(pos + 1),
                    ..item
                })
            }
            Some(Segment::Symbol(_)) => return Err(undefined()),
            Some(Segment::Permutation(_)) => (pos, 0u64),
        },
        Dot::Inside { segment, seen } => (segment, seen),
    };
    let p = permutation_at(rule, segment);
    if !p.is_symbol_only() {
        return Err(StepError::Unsupported {
            item: render_item(g, item),
        });
    }
    let i = match p.position_of(y) {
        Some(i) if seen >> i & 1 == 0 => i,
        _ => return Err(undefined()),
    };
    let seen = seen | 1 << i;
    // Exhausting the expected part (including entering a one-element
    // phrase) lands on the level-1 dot after the segment.
    let dot = if seen == full_mask(p.len()) {
        Dot::Top(segment + 1)
    } else {
        Dot::Inside { segment, seen }
    };
    Ok(Item { dot, ..item })
}

/// Symbols the rule pops on reduction.
pub fn pop_count(rule: &Rule) -> usize {
    rule.pop_count()
}

/// Number of symbols before the dot.
pub fn pre_dot_len(g: &Grammar, item: Item) -> usize {
    let segments = g.rule(item.rule).rhs.segments();
    match item.dot {
        Dot::Top(pos) => segments[..pos as usize].iter().map(Segment::symbol_len).sum(),
        Dot::Inside { segment, seen } => {
            segments[..segment as usize]
                .iter()
                .map(Segment::symbol_len)
                .sum::<usize>()
                + seen.count_ones() as usize
        }
    }
}

/// Splits the item's right-hand side at the dot into the phrase already
/// seen and the phrase still expected.
pub fn split_at_dot(g: &Grammar, item: Item) -> (Phrase, Phrase) {
    let segments = g.rule(item.rule).rhs.segments();
    match item.dot {
        Dot::Top(pos) => (
            Phrase::new(segments[..pos as usize].to_vec()),
            Phrase::new(segments[pos as usize..].to_vec()),
        ),
        Dot::Inside { segment, seen } => {
            let s = segment as usize;
            let p = permutation_at(g.rule(item.rule), segment);
            let mut before = segments[..s].to_vec();
            before.push(Segment::Permutation(p.subset(seen).expect("seen is non-empty")));
            let mut after = vec![Segment::Permutation(
                p.subset(!seen & full_mask(p.len())).expect("expected is non-empty"),
            )];
            after.extend_from_slice(&segments[s + 1..]);
            (Phrase::new(before), Phrase::new(after))
        }
    }
}

/// The expected elements of a level-2 dot.
pub fn expected(g: &Grammar, item: Item) -> Option<PermutationPhrase> {
    match item.dot {
        Dot::Top(_) => None,
        Dot::Inside { segment, seen } => {
            let p = permutation_at(g.rule(item.rule), segment);
            p.subset(!seen & full_mask(p.len()))
        }
    }
}

pub fn seen(g: &Grammar, item: Item) -> Option<PermutationPhrase> {
    match item.dot {
        Dot::Top(_) => None,
        Dot::Inside { segment, seen } => permutation_at(g.rule(item.rule), segment).subset(seen),
    }
}

fn compact_permutation(g: &Grammar, p: &PermutationPhrase) -> String {
    let inner = p
        .elements()
        .iter()
        .map(|e| e.iter().map(|&s| g.name(s)).join(" "))
        .join(" || ");
    format!("<<{inner}>>")
}

fn compact_segment(g: &Grammar, s: &Segment) -> String {
    match s {
        Segment::Symbol(y) => g.name(*y).to_owned(),
        Segment::Permutation(p) => compact_permutation(g, p),
    }
}

/// `X -> A <<C>> .(2) <<B>> D`; LR(1) items get `, a` appended.
pub fn render_item(g: &Grammar, item: Item) -> String {
    let rule = g.rule(item.rule);
    let segments = rule.rhs.segments();
    let mut parts: Vec<String> = Vec::new();
    for (i, seg) in segments.iter().enumerate() {
        match item.dot {
            Dot::Top(pos) if pos as usize == i => parts.push(".(1)".into()),
            Dot::Inside { segment, seen } if segment as usize == i => {
                let p = permutation_at(rule, segment);
                let full = full_mask(p.len());
                parts.push(compact_permutation(g, &p.subset(seen).unwrap()));
                parts.push(".(2)".into());
                parts.push(compact_permutation(g, &p.subset(!seen & full).unwrap()));
                continue;
            }
            _ => {}
        }
        parts.push(compact_segment(g, seg));
    }
    if item.dot == Dot::Top(segments.len() as u32) {
        parts.push(".(1)".into());
    }
    let mut out = format!("{} -> {}", g.name(rule.lhs), parts.join(" "));
    if let Some(la) = item.lookahead {
        out.push_str(", ");
        out.push_str(g.name(la));
    }
    out
}

/// Display adapter pairing an item with its grammar.
pub struct DisplayItem<'a>(pub &'a Grammar, pub Item);

impl fmt::Display for DisplayItem<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_item(self.0, self.1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::parse_grammar;

    fn sym(g: &Grammar, n: &str) -> SymbolId {
        g.symbols().get(n).unwrap()
    }

    fn names(g: &Grammar, ys: &[SymbolId]) -> Vec<String> {
        let mut v: Vec<_> = ys.iter().map(|&y| g.name(y).to_owned()).collect();
        v.sort();
        v
    }

    #[test]
    fn item_phrases_simple_and_permutation() {
        let g = parse_grammar("X -> A B ; Y -> << A || B >> ; Z -> << A || B || C >> ;").unwrap();
        let r = |i| &g.rules()[i];
        let render = |i: usize| -> Vec<String> {
            rule_items(r(i)).into_iter().map(|it| render_item(&g, it)).collect()
        };
        assert_eq!(render(0), ["X -> .(1) A B", "X -> A .(1) B", "X -> A B .(1)"]);
        let mut y = render(1);
        y.sort();
        assert_eq!(
            y,
            [
                "Y -> .(1) <<A || B>>",
                "Y -> <<A || B>> .(1)",
                "Y -> <<A>> .(2) <<B>>",
                "Y -> <<B>> .(2) <<A>>",
            ]
        );
        assert_eq!(item_phrases(&r(2).rhs).len(), 8);
    }

    #[test]
    fn next_of_phrases_and_items() {
        let g = parse_grammar("X -> A << B || C >> D ;").unwrap();
        assert!(next_phrase(&[]).is_empty());
        let segs = &g.rules()[0].rhs.segments()[1..];
        assert_eq!(names(&g, &next_phrase(segs)), ["B", "C"]);

        let i = Item {
            rule: RuleId(1),
            dot: Dot::Inside { segment: 1, seen: 0b10 },
            lookahead: None,
        };
        assert_eq!(render_item(&g, i), "X -> A <<C>> .(2) <<B>> D");
        assert_eq!(names(&g, &next(&g, i)), ["B"]);
    }

    #[test]
    fn step_walks_example_chain() {
        let g = parse_grammar("X -> A << B || C >> D ;").unwrap();
        let mut i = Item::start(RuleId(1));
        let mut trace = vec![render_item(&g, i)];
        for y in ["A", "C", "B", "D"] {
            i = step(&g, i, sym(&g, y)).unwrap();
            trace.push(render_item(&g, i));
        }
        assert_eq!(
            trace,
            [
                "X -> .(1) A <<B || C>> D",
                "X -> A .(1) <<B || C>> D",
                "X -> A <<C>> .(2) <<B>> D",
                "X -> A <<B || C>> .(1) D",
                "X -> A <<B || C>> D .(1)",
            ]
        );
        assert!(i.is_complete(&g));
    }

    #[test]
    fn level_marks_keep_rules_apart() {
        let g = parse_grammar("X -> << A || B >> << C || D >> | << A || B || C || D >> ;").unwrap();
        let d = sym(&g, "D");
        let r1 = Item {
            rule: RuleId(1),
            dot: Dot::Top(1),
            lookahead: None,
        };
        let j1 = step(&g, r1, d).unwrap();
        assert_eq!(render_item(&g, j1), "X -> <<A || B>> <<D>> .(2) <<C>>");
        // A, B seen inside the four-element phrase
        let r2 = Item {
            rule: RuleId(2),
            dot: Dot::Inside { segment: 0, seen: 0b0011 },
            lookahead: None,
        };
        let j2 = step(&g, r2, d).unwrap();
        assert_eq!(render_item(&g, j2), "X -> <<A || B || D>> .(2) <<C>>");
        assert_ne!(j1, j2);
    }

    #[test]
    fn step_errors() {
        let g = parse_grammar("X -> A B ; Y -> << A || B C >> ;").unwrap();
        let e = step(&g, Item::start(RuleId(1)), sym(&g, "B")).unwrap_err();
        assert!(matches!(e, StepError::Undefined { .. }));
        let e = step(&g, Item::start(RuleId(2)), sym(&g, "A")).unwrap_err();
        assert!(matches!(e, StepError::Unsupported { .. }));
    }

    #[test]
    fn singleton_permutation_steps_to_level_one() {
        let g = parse_grammar("X -> << A >> B ;").unwrap();
        let j = step(&g, Item::start(RuleId(1)), sym(&g, "A")).unwrap();
        assert_eq!(j.dot, Dot::Top(1));
    }

    #[test]
    fn lookahead_is_carried() {
        let g = parse_grammar("X -> << A || B >> ;").unwrap();
        let i = Item::start(RuleId(1)).with_lookahead(Some(SymbolId::END));
        let j = step(&g, i, sym(&g, "B")).unwrap();
        assert_eq!(j.lookahead, Some(SymbolId::END));
        assert_eq!(j.rule, i.rule);
        assert_eq!(render_item(&g, j), "X -> <<B>> .(2) <<A>>, $end");
    }

    #[test]
    fn pop_counts() {
        let g = parse_grammar("X -> Y << A || B || C >> D ; Y -> %empty ;").unwrap();
        assert_eq!(pop_count(&g.rules()[0]), 5);
        assert_eq!(pop_count(&g.rules()[1]), 0);
    }

    #[test]
    fn split_and_pre_dot_len() {
        let g = parse_grammar("X -> A << B || C || D >> E ;").unwrap();
        let i = Item {
            rule: RuleId(1),
            dot: Dot::Inside { segment: 1, seen: 0b101 },
            lookahead: None,
        };
        let (a, b) = split_at_dot(&g, i);
        assert_eq!(g.render_phrase(&a), "A << B || D >>");
        assert_eq!(g.render_phrase(&b), "<< C >> E");
        assert_eq!(pre_dot_len(&g, i), 3);
        assert_eq!(g.render_permutation(&expected(&g, i).unwrap()), "<< C >>");
        assert_eq!(g.render_permutation(&seen(&g, i).unwrap()), "<< B || D >>");
    }
}
