//! Reader for the grammar text format.
//!
//! ```text
//! # comment
//! catalogItem -> << id || name || addresses >> ;
//! addresses   -> addressesItem addresses | %empty ;
//! ```
//!
//! An identifier is a nonterminal iff it appears on some left-hand side.
//! `'x'` is always a terminal named `x`.

use std::collections::HashSet;

use super::{
    Flavor, Grammar, GrammarError, PermutationPhrase, Phrase, PhraseError, Rule, RuleId, Segment,
    SymbolId, SymbolKind, SymbolTable, END_MARKER,
};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Quoted(String),
    Arrow,
    Bar,
    Semi,
    Open,
    Close,
    Sep,
    Empty,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> GrammarError {
    GrammarError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn lex(text: &str) -> Result<Vec<Spanned>, GrammarError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let column = i + 1;
            let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            let mut push = |tok, width| {
                out.push(Spanned {
                    tok,
                    line: line_no,
                    column,
                });
                width
            };
            i += match c {
                '#' => break,
                c if c.is_whitespace() => 1,
                _ if two == "->" => push(Tok::Arrow, 2),
                _ if two == "<<" => push(Tok::Open, 2),
                _ if two == ">>" => push(Tok::Close, 2),
                _ if two == "||" => push(Tok::Sep, 2),
                '|' => push(Tok::Bar, 1),
                ';' => push(Tok::Semi, 1),
                '%' => {
                    let word: String = chars[i + 1..].iter().take_while(|c| is_ident_char(**c)).collect();
                    if word != "empty" {
                        return Err(syntax(line_no, column, format!("unknown directive `%{word}`")));
                    }
                    push(Tok::Empty, 1 + word.len())
                }
                '\'' => {
                    let body: String = chars[i + 1..].iter().take_while(|c| **c != '\'').collect();
                    if i + 1 + body.len() >= chars.len() {
                        return Err(syntax(line_no, column, "unterminated quoted terminal"));
                    }
                    if body.is_empty() || body.chars().any(char::is_whitespace) {
                        return Err(syntax(line_no, column, "quoted terminal must be non-empty without whitespace"));
                    }
                    if body == END_MARKER {
                        return Err(syntax(line_no, column, "`$end` is reserved"));
                    }
                    let width = body.len() + 2;
                    push(Tok::Quoted(body), width)
                }
                c if is_ident_start(c) => {
                    let word: String = chars[i..].iter().take_while(|c| is_ident_char(**c)).collect();
                    let width = word.len();
                    push(Tok::Ident(word), width)
                }
                '$' => return Err(syntax(line_no, column, "`$end` is reserved and may not appear in grammars")),
                c => return Err(syntax(line_no, column, format!("unexpected character `{c}`"))),
            };
        }
    }
    Ok(out)
}

#[derive(Debug)]
struct RawSymbol {
    name: String,
    quoted: bool,
    line: usize,
    column: usize,
}

#[derive(Debug)]
enum RawSegment {
    Symbol(RawSymbol),
    Permutation {
        elements: Vec<Vec<RawSymbol>>,
        line: usize,
        column: usize,
    },
}

#[derive(Debug)]
struct RawRule {
    lhs: RawSymbol,
    rhs: Vec<RawSegment>,
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    eof: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map(|t| (t.line, t.column)).unwrap_or(self.eof)
    }

    fn error(&self, message: impl Into<String>) -> GrammarError {
        let (line, column) = self.here();
        syntax(line, column, message)
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek().map(|t| &t.tok) == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &Tok, what: &str) -> Result<(), GrammarError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn symbol(&mut self) -> Option<RawSymbol> {
        let t = self.peek()?;
        let (name, quoted) = match &t.tok {
            Tok::Ident(s) => (s.clone(), false),
            Tok::Quoted(s) => (s.clone(), true),
            _ => return None,
        };
        let sym = RawSymbol {
            name,
            quoted,
            line: t.line,
            column: t.column,
        };
        self.pos += 1;
        Some(sym)
    }

    fn rules(&mut self) -> Result<Vec<RawRule>, GrammarError> {
        let mut rules = Vec::new();
        while self.peek().is_some() {
            let lhs = match self.symbol() {
                Some(s) if !s.quoted => s,
                _ => return Err(self.error("expected rule left-hand side")),
            };
            self.expect(&Tok::Arrow, "`->`")?;
            loop {
                let rhs = self.alternative()?;
                rules.push(RawRule {
                    lhs: RawSymbol {
                        name: lhs.name.clone(),
                        quoted: false,
                        line: lhs.line,
                        column: lhs.column,
                    },
                    rhs,
                });
                if self.eat(&Tok::Bar) {
                    continue;
                }
                self.expect(&Tok::Semi, "`|` or `;`")?;
                break;
            }
        }
        Ok(rules)
    }

    fn alternative(&mut self) -> Result<Vec<RawSegment>, GrammarError> {
        if self.eat(&Tok::Empty) {
            return Ok(Vec::new());
        }
        let mut segs = Vec::new();
        loop {
            let (line, column) = self.here();
            if let Some(s) = self.symbol() {
                segs.push(RawSegment::Symbol(s));
            } else if self.eat(&Tok::Open) {
                let mut elements = Vec::new();
                loop {
                    let mut element = Vec::new();
                    while let Some(s) = self.symbol() {
                        element.push(s);
                    }
                    if element.is_empty() {
                        return Err(if matches!(self.peek().map(|t| &t.tok), Some(Tok::Empty)) {
                            self.error("ε is not allowed inside a permutation phrase")
                        } else if elements.is_empty() && matches!(self.peek().map(|t| &t.tok), Some(Tok::Close)) {
                            self.error("empty permutation phrase")
                        } else {
                            self.error("empty permutation element")
                        });
                    }
                    elements.push(element);
                    if self.eat(&Tok::Sep) {
                        continue;
                    }
                    self.expect(&Tok::Close, "`||` or `>>`")?;
                    break;
                }
                segs.push(RawSegment::Permutation {
                    elements,
                    line,
                    column,
                });
            } else {
                break;
            }
        }
        if segs.is_empty() {
            if self.peek().map(|t| &t.tok) == Some(&Tok::Empty) {
                return Err(self.error("%empty must stand alone in an alternative"));
            }
            return Err(self.error("empty alternative (write %empty)"));
        }
        if self.peek().map(|t| &t.tok) == Some(&Tok::Empty) {
            return Err(self.error("%empty must stand alone in an alternative"));
        }
        Ok(segs)
    }
}

/// Parses grammar text into a CFGP; the first rule's left-hand side is the
/// start symbol and rules are numbered from 1 in source order.
pub fn parse_grammar(text: &str) -> Result<Grammar, GrammarError> {
    let toks = lex(text)?;
    let eof = (text.lines().count().max(1), text.lines().last().map_or(1, |l| l.len() + 1));
    let mut p = Parser { toks, pos: 0, eof };
    let raw = p.rules()?;
    if raw.is_empty() {
        return Err(syntax(1, 1, "grammar has no rules"));
    }

    let lhs_names: HashSet<&str> = raw.iter().map(|r| r.lhs.name.as_str()).collect();
    let mut symbols = SymbolTable::new();
    let mut intern = |s: &RawSymbol| -> Result<SymbolId, GrammarError> {
        let nonterminal = lhs_names.contains(s.name.as_str());
        if nonterminal && s.quoted {
            return Err(syntax(
                s.line,
                s.column,
                format!("quoted terminal `'{}'` clashes with nonterminal `{}`", s.name, s.name),
            ));
        }
        let kind = if nonterminal {
            SymbolKind::Nonterminal
        } else {
            SymbolKind::Terminal
        };
        Ok(symbols.insert(&s.name, kind))
    };

    let mut pending = Vec::with_capacity(raw.len());
    for r in &raw {
        let lhs = intern(&r.lhs)?;
        let mut segs = Vec::new();
        for seg in &r.rhs {
            match seg {
                RawSegment::Symbol(s) => segs.push(Ok(intern(s)?)),
                RawSegment::Permutation {
                    elements,
                    line,
                    column,
                } => {
                    let els = elements
                        .iter()
                        .map(|e| e.iter().map(&mut intern).collect::<Result<Vec<_>, _>>())
                        .collect::<Result<Vec<_>, _>>()?;
                    segs.push(Err((els, *line, *column)));
                }
            }
        }
        pending.push((lhs, segs));
    }

    let mut rules = Vec::with_capacity(pending.len());
    for (i, (lhs, segs)) in pending.into_iter().enumerate() {
        let mut segments = Vec::with_capacity(segs.len());
        for s in segs {
            segments.push(match s {
                Ok(y) => Segment::Symbol(y),
                Err((els, line, column)) => {
                    let p = PermutationPhrase::new(els, &symbols).map_err(|e: PhraseError| syntax(line, column, e.to_string()))?;
                    Segment::Permutation(p)
                }
            });
        }
        let id = RuleId(i as u32 + 1);
        rules.push(Rule {
            id,
            lhs,
            rhs: Phrase::new(segments),
            origins: vec![id],
        });
    }
    let start = rules[0].lhs;
    Ok(Grammar::from_parts(symbols, rules, start, Flavor::Cfgp, false))
}
