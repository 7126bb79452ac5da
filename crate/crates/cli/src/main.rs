//! `permlr`: build, inspect and compare LR parsers for grammars with
//! permutation phrases.
//!
//! Exit codes: 0 success or accept, 1 reject or mismatch, 2 grammar or input
//! error, 3 conflicted table, 4 expanded grammar over the size budget.

use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use permlr::automaton::{build, Automaton, BuildOptions, Collection, Construction, Fault};
use permlr::grammar::{check_lr, expand_grammar, parse_grammar, Grammar, GrammarError};
use permlr::oracle::{
    check_equivalence_with, complexity_bounds, expanded_size_estimate, permutation_rule_reports, EquivalenceOptions,
    EquivalenceReport, RuleStateReport, MAP_BUDGET,
};
use permlr::report::{summary, to_dot};
use permlr::runtime::{parse, render_events, tokenize, ParseEvent, ParseError};
use permlr::tables::{build_table_with, ParseTable, TableKind};

const OK: u8 = 0;
const REJECT: u8 = 1;
const BAD_INPUT: u8 = 2;
const CONFLICTED: u8 = 3;
const TOO_LARGE: u8 = 4;

/// Expanded automata above this estimate are not built by `stats`.
const STATS_BUDGET: u128 = 1_000_000;

#[derive(Parser)]
#[command(name = "permlr", version, about = "LR parsers for grammars with permutation phrases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an automaton and parse table and print a summary.
    Build(BuildArgs),
    /// Parse whitespace-separated terminal names and print the event trace.
    Parse(ParseArgs),
    /// Per-rule state counts against the closed-form bounds.
    Stats(StatsArgs),
    /// Compare the modified pipeline against the standard one on the expansion.
    Check(CheckArgs),
    /// Print the automaton as Graphviz DOT.
    Dot(DotArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableArg {
    Slr,
    Lr1,
    Lalr,
}

impl From<TableArg> for TableKind {
    fn from(t: TableArg) -> Self {
        match t {
            TableArg::Slr => TableKind::Slr,
            TableArg::Lr1 => TableKind::Lr1,
            TableArg::Lalr => TableKind::Lalr,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConstructionArg {
    Modified,
    Standard,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SingleConstruction {
    Modified,
    Standard,
}

impl From<SingleConstruction> for Construction {
    fn from(c: SingleConstruction) -> Self {
        match c {
            SingleConstruction::Modified => Construction::Modified,
            SingleConstruction::Standard => Construction::Standard,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Jsonl,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FaultArg {
    SkipPermutationEntry,
}

#[derive(Args)]
struct BuildArgs {
    grammar: PathBuf,
    #[arg(long, value_enum, default_value = "slr")]
    table: TableArg,
    #[arg(long, value_enum, default_value = "modified")]
    construction: ConstructionArg,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Exit with 3 when the table has conflicts.
    #[arg(long)]
    require_deterministic: bool,
    /// Also print the full ACTION/GOTO table.
    #[arg(long)]
    dump_table: bool,
}

#[derive(Args)]
struct ParseArgs {
    grammar: PathBuf,
    /// Token names; read from standard input when absent.
    tokens: Vec<String>,
    #[arg(long, value_enum, default_value = "slr")]
    table: TableArg,
    #[arg(long, value_enum, default_value = "modified")]
    construction: SingleConstruction,
    /// Print the parse tree after the trace.
    #[arg(long)]
    tree: bool,
}

#[derive(Args)]
struct StatsArgs {
    grammar: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct CheckArgs {
    grammar: PathBuf,
    #[arg(long, default_value_t = 8)]
    max_len: usize,
    #[arg(long, value_enum, default_value = "slr")]
    table: TableArg,
    /// Skip the state-map verification; required above the size budget.
    #[arg(long)]
    behavioral_only: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<FaultArg>,
}

#[derive(Args)]
struct DotArgs {
    grammar: PathBuf,
    #[arg(long, value_enum, default_value = "modified")]
    construction: SingleConstruction,
    #[arg(long, value_enum, default_value = "slr")]
    table: TableArg,
    #[arg(long)]
    include_error_state: bool,
}

/// An error already reported on stderr, carrying the exit code.
struct Exit(u8);

type Run = Result<u8, Exit>;

fn color() -> bool {
    std::env::var("PERMLR_COLOR").is_ok_and(|v| v == "1")
}

fn paint(text: &str, code: &str) -> String {
    if color() {
        format!("\x1b[{code}m{text}\x1b[0m")
    } else {
        text.to_owned()
    }
}

fn fail(code: u8, message: impl std::fmt::Display) -> Exit {
    eprintln!("error: {message}");
    Exit(code)
}

fn load(path: &Path) -> Result<Grammar, Exit> {
    let text = std::fs::read_to_string(path).map_err(|e| fail(BAD_INPUT, format_args!("{}: {e}", path.display())))?;
    let g = parse_grammar(&text).map_err(|e| grammar_error(path, e))?;
    check_lr(&g).map_err(|e| grammar_error(path, e))?;
    Ok(g)
}

fn grammar_error(path: &Path, e: GrammarError) -> Exit {
    fail(BAD_INPUT, format_args!("{}: {e}", path.display()))
}

fn table_for(g: &Grammar, construction: Construction, kind: TableKind, options: BuildOptions) -> Result<ParseTable, Exit> {
    let source = match construction {
        Construction::Modified => g.clone(),
        Construction::Standard => expand_grammar(g),
    };
    build_table_with(&source, construction, kind, options).map_err(|e| fail(BAD_INPUT, e))
}

fn cmd_build(args: BuildArgs) -> Run {
    let g = load(&args.grammar)?;
    let constructions: &[Construction] = match args.construction {
        ConstructionArg::Modified => &[Construction::Modified],
        ConstructionArg::Standard => &[Construction::Standard],
        ConstructionArg::Both => &[Construction::Modified, Construction::Standard],
    };
    let mut out = String::new();
    let mut conflicted = false;
    let mut tables = Vec::new();
    for &c in constructions {
        let t = table_for(&g, c, args.table.into(), BuildOptions::default())?;
        let s = summary(t.automaton());
        conflicted |= !t.is_deterministic();
        match args.format {
            Format::Text => {
                out.push_str(&s.render_text());
                let verdict = if t.is_deterministic() {
                    paint("deterministic", "32")
                } else {
                    paint(&format!("{} conflicts", t.conflicts().len()), "31")
                };
                writeln!(out, "  {} table: {verdict}", t.kind()).unwrap();
                for c in t.conflicts() {
                    writeln!(
                        out,
                        "    state {} on {}: {}",
                        c.state,
                        t.grammar().name(c.symbol),
                        c.actions.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" / ")
                    )
                    .unwrap();
                }
                if args.dump_table {
                    out.push_str(&t.dump_text());
                }
            }
            Format::Jsonl => {
                let mut v = serde_json::to_value(&s).expect("summary serializes");
                v["table"] = t.kind().to_string().into();
                v["conflicts"] = t.conflicts().len().into();
                writeln!(out, "{v}").unwrap();
                if args.dump_table {
                    out.push_str(&t.dump_jsonl());
                }
            }
        }
        tables.push(t);
    }
    if let [m, s] = tables.as_slice() {
        if args.format == Format::Text {
            writeln!(
                out,
                "modified/standard states: {} / {}",
                m.automaton().len() - 1,
                s.automaton().len() - 1
            )
            .unwrap();
        }
    }
    print!("{out}");
    Ok(if conflicted && args.require_deterministic {
        CONFLICTED
    } else {
        OK
    })
}

fn cmd_parse(args: ParseArgs) -> Run {
    let g = load(&args.grammar)?;
    let t = table_for(&g, args.construction.into(), args.table.into(), BuildOptions::default())?;
    let text = if args.tokens.is_empty() {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| fail(BAD_INPUT, format_args!("reading tokens: {e}")))?;
        s
    } else {
        args.tokens.join(" ")
    };
    let tokens = tokenize(t.grammar(), &text).map_err(|e| fail(BAD_INPUT, e))?;
    let result = match parse(&t, &tokens) {
        Ok(r) => r,
        Err(e @ ParseError::Conflicted(_)) => return Err(fail(CONFLICTED, e)),
        Err(e) => return Err(fail(BAD_INPUT, e)),
    };
    let mut out = render_events(t.grammar(), &result.events);
    if let (true, Some(tree)) = (args.tree, &result.tree) {
        writeln!(out, "{}", tree.render(t.grammar())).unwrap();
    }
    print!("{out}");
    if result.accepted {
        return Ok(OK);
    }
    if let Some(ParseEvent::Error { .. }) = result.events.last() {
        eprintln!("{}", paint("rejected", "31"));
    }
    Ok(REJECT)
}

fn build_lr0(g: &Grammar, construction: Construction) -> Result<Automaton, Exit> {
    let source = match construction {
        Construction::Modified => g.clone(),
        Construction::Standard => expand_grammar(g),
    };
    build(&source, construction, Collection::Lr0, BuildOptions::default()).map_err(|e| fail(BAD_INPUT, e))
}

fn opt(v: Option<impl ToString>) -> String {
    v.map_or_else(|| "-".to_owned(), |v| v.to_string())
}

fn stats_text(g: &Grammar, reports: &[RuleStateReport], expanded_built: bool) -> String {
    let mut out = String::new();
    if reports.is_empty() {
        out.push_str("no permutation rules\n");
        return out;
    }
    let mut six = false;
    for r in reports {
        let id = permlr::RuleId(r.rule);
        writeln!(out, "rule {}: modified {} / expanded {}", r.rule, r.modified, opt(r.expanded)).unwrap();
        writeln!(out, "  {}", g.render_rule(id)).unwrap();
        writeln!(
            out,
            "  bounds: modified <= {}, expanded >= {}; {}",
            r.bound_modified,
            opt(r.bound_expanded),
            if r.independent {
                paint("independent", "32")
            } else {
                paint("dependent", "33")
            }
        )
        .unwrap();
        if r.modified_union != r.modified || r.expanded_union != r.expanded {
            writeln!(
                out,
                "  over all start states: modified {} / expanded {}",
                r.modified_union,
                opt(r.expanded_union)
            )
            .unwrap();
        }
        for b in complexity_bounds(g, id) {
            six |= b.size == 6;
            writeln!(
                out,
                "  segment {}: n = {}, M = {}, 2^n = {}, M * sum_k n!/(n-k)! = {}, sum_(k>=1) C(n,k) = {}",
                b.segment,
                b.size,
                opt(b.multiplier),
                b.modified,
                opt(b.expanded),
                b.nonempty_subsets
            )
            .unwrap();
        }
    }
    if !expanded_built {
        out.push_str("expanded automaton not built: estimated size over budget\n");
    }
    if six {
        out.push_str("note: sum_(k=0..6) 6!/(6-k)! = 1957 (not 1975)\n");
    }
    out
}

fn cmd_stats(args: StatsArgs) -> Run {
    let g = load(&args.grammar)?;
    let a = build_lr0(&g, Construction::Modified)?;
    let small = expanded_size_estimate(&g).is_some_and(|n| n <= STATS_BUDGET);
    let ae = if small {
        Some(build_lr0(&g, Construction::Standard)?)
    } else {
        None
    };
    let reports = permutation_rule_reports(&a, ae.as_ref());
    match args.format {
        Format::Text => print!("{}", stats_text(a.grammar(), &reports, ae.is_some())),
        Format::Jsonl => {
            for r in &reports {
                let v = serde_json::json!({
                    "rule": r.rule,
                    "modified": r.modified,
                    "expanded": r.expanded,
                    "bound_modified": r.bound_modified.to_string(),
                    "bound_expanded": r.bound_expanded.map(|b| b.to_string()),
                    "independent": r.independent,
                    "modified_union": r.modified_union,
                    "expanded_union": r.expanded_union,
                });
                println!("{v}");
            }
        }
    }
    Ok(OK)
}

fn check_text(path: &Path, r: &EquivalenceReport) -> String {
    let mut out = format!("check {} ({}, max length {})\n", path.display(), r.table, r.max_len);
    writeln!(out, "  states: modified {} / standard {}", r.modified_states - 1, r.standard_states - 1).unwrap();
    writeln!(
        out,
        "  covered: {} symbol strings, {} inputs, {} configurations",
        r.words_tested, r.inputs_tested, r.configurations
    )
    .unwrap();
    writeln!(out, "  acceptance mismatches: {}", r.acceptance_mismatches).unwrap();
    writeln!(out, "  action mismatches: {}", r.action_mismatches).unwrap();
    let map = if r.map_checked { "" } else { " (not checked)" };
    writeln!(out, "  map violations: {}{map}", r.map_violations).unwrap();
    for e in &r.examples {
        writeln!(out, "  - {e}").unwrap();
    }
    let verdict = if r.is_clean() {
        paint("equivalent", "32")
    } else {
        paint("MISMATCH", "31")
    };
    writeln!(out, "result: {verdict}").unwrap();
    out
}

fn cmd_check(args: CheckArgs) -> Run {
    let g = load(&args.grammar)?;
    let estimate = expanded_size_estimate(&g);
    if !args.behavioral_only && estimate.is_none_or(|n| n >= MAP_BUDGET as u128) {
        return Err(fail(
            TOO_LARGE,
            format_args!(
                "expanded automaton estimated at {} states, over the budget of {MAP_BUDGET}; rerun with --behavioral-only",
                opt(estimate)
            ),
        ));
    }
    let opts = EquivalenceOptions {
        max_len: args.max_len,
        table: args.table.into(),
        check_map: !args.behavioral_only,
        fault: args.inject_fault.map(|FaultArg::SkipPermutationEntry| Fault::SkipPermutationEntry),
        ..Default::default()
    };
    let name = args.grammar.display().to_string();
    let r = check_equivalence_with(&g, &name, opts).map_err(|e| fail(BAD_INPUT, e))?;
    match args.format {
        Format::Text => print!("{}", check_text(&args.grammar, &r)),
        Format::Jsonl => {
            let mut v = serde_json::to_value(&r).expect("report serializes");
            v["words_tested"] = r.words_tested.to_string().into();
            v["inputs_tested"] = r.inputs_tested.to_string().into();
            println!("{v}");
        }
    }
    Ok(if r.is_clean() { OK } else { REJECT })
}

fn cmd_dot(args: DotArgs) -> Run {
    let g = load(&args.grammar)?;
    let kind: TableKind = args.table.into();
    let source = match args.construction {
        SingleConstruction::Modified => g.clone(),
        SingleConstruction::Standard => expand_grammar(&g),
    };
    let a = build(&source, args.construction.into(), kind.collection(), BuildOptions::default())
        .map_err(|e| fail(BAD_INPUT, e))?;
    print!("{}", to_dot(&a, args.include_error_state));
    Ok(OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Parse(a) => cmd_parse(a),
        Command::Stats(a) => cmd_stats(a),
        Command::Check(a) => cmd_check(a),
        Command::Dot(a) => cmd_dot(a),
    };
    ExitCode::from(result.unwrap_or_else(|Exit(code)| code))
}
