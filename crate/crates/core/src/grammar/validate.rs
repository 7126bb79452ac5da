use std::fmt;

use serde::Serialize;

use super::{Grammar, GrammarError, RuleId, Segment, SymbolId};

/// Largest permutation phrase the item algebra can track (seen-sets are
/// 64-bit masks).
pub const MAX_PERMUTATION: usize = 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosticKind {
    /// Element of more than one symbol. Expansion handles it, LR construction does not.
    LongPermutationElement,
    PermutationTooLarge,
    Unreachable,
    NonGenerating,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub rule: Option<RuleId>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rule {
            Some(r) => write!(f, "rule {r}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Reports everything that blocks LR construction. Duplicate permutation
/// elements cannot occur here: [`super::PermutationPhrase::new`] rejects them.
pub fn validate(g: &Grammar) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for r in g.rules() {
        for seg in r.rhs.segments() {
            let Segment::Permutation(p) = seg else { continue };
            for e in p.elements().iter().filter(|e| e.len() != 1) {
                let text = e.iter().map(|&s| g.name(s)).collect::<Vec<_>>().join(" ");
                out.push(Diagnostic {
                    kind: DiagnosticKind::LongPermutationElement,
                    rule: Some(r.id),
                    message: format!(
                        "permutation element of length {} (`{text}`): unsupported for LR construction",
                        e.len()
                    ),
                });
            }
            if p.len() > MAX_PERMUTATION {
                out.push(Diagnostic {
                    kind: DiagnosticKind::PermutationTooLarge,
                    rule: Some(r.id),
                    message: format!(
                        "permutation phrase of size {} exceeds the supported maximum of {MAX_PERMUTATION}",
                        p.len()
                    ),
                });
            }
        }
    }

    let symbols = g.symbols();
    let mut reachable = vec![false; symbols.len()];
    let mut stack = vec![g.start()];
    reachable[g.start().index()] = true;
    while let Some(x) = stack.pop() {
        for &rid in g.rules_for(x) {
            for y in rhs_symbols(g, rid) {
                if !reachable[y.index()] {
                    reachable[y.index()] = true;
                    stack.push(y);
                }
            }
        }
    }

    let mut generating: Vec<bool> = symbols.ids().map(|s| symbols.is_terminal(s)).collect();
    loop {
        let mut changed = false;
        for r in g.rules() {
            if !generating[r.lhs.index()] && rhs_symbols(g, r.id).all(|y| generating[y.index()]) {
                generating[r.lhs.index()] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    for n in g.nonterminals() {
        if !reachable[n.index()] {
            out.push(Diagnostic {
                kind: DiagnosticKind::Unreachable,
                rule: None,
                message: format!("unreachable nonterminal {}", g.name(n)),
            });
        }
        if !generating[n.index()] {
            out.push(Diagnostic {
                kind: DiagnosticKind::NonGenerating,
                rule: None,
                message: format!("non-generating nonterminal {}", g.name(n)),
            });
        }
    }
    out
}

fn rhs_symbols(g: &Grammar, rid: RuleId) -> impl Iterator<Item = SymbolId> + '_ {
    g.rule(rid).rhs.segments().iter().flat_map(|s| match s {
        Segment::Symbol(y) => vec![*y],
        Segment::Permutation(p) => p.elements().iter().flatten().copied().collect(),
    })
}

/// Gate for the automaton builders.
pub fn check_lr(g: &Grammar) -> Result<(), GrammarError> {
    let diags = validate(g);
    if diags.is_empty() {
        Ok(())
    } else {
        Err(GrammarError::Invalid(diags))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::parse_grammar;

    #[test]
    fn long_element_is_flagged() {
        let g = parse_grammar("X -> << A || B C >> ;").unwrap();
        let d = validate(&g);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiagnosticKind::LongPermutationElement);
        assert!(d[0].message.starts_with("permutation element of length 2"));
        assert!(check_lr(&g).is_err());
    }

    #[test]
    fn unreachable_and_non_generating() {
        let g = parse_grammar("S -> a ; U -> b ;").unwrap();
        let d = validate(&g);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].message, "unreachable nonterminal U");

        let g = parse_grammar("S -> a | L ; L -> L x ;").unwrap();
        let d = validate(&g);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiagnosticKind::NonGenerating);
    }

    #[test]
    fn reachability_through_permutations() {
        let g = parse_grammar("S -> << a || B >> ; B -> b ;").unwrap();
        assert!(validate(&g).is_empty());
    }

    #[test]
    fn oversized_permutation() {
        let elems: Vec<String> = (0..64).map(|i| format!("t{i}")).collect();
        let g = parse_grammar(&format!("S -> << {} >> ;", elems.join(" || "))).unwrap();
        let d = validate(&g);
        assert_eq!(d[0].kind, DiagnosticKind::PermutationTooLarge);
    }
}
