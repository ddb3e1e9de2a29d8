//! `gocta`: membership, traces, transformations and enumeration for global
//! one-counter tree automata.
//!
//! Exit codes: 0 member (or success), 1 non-member, 2 usage or input error,
//! 3 resource limit.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use gocta::automata::{parse_automaton, Fta, Gocta};
use gocta::corpus;
use gocta::decide::{counter_bound, DecideError, Decider, Method};
use gocta::grammars::{icg_to_gocta, GrammarError, Icg};
use gocta::random::{random_gocta, RandomParams};
use gocta::semantics::{
    default_node_budget, enumerate_language_with_budget, oracle_member_copy_with_budget,
    oracle_member_global_with_budget, render_copy_trace, render_global_trace, Semantics, SemanticsError,
};
use gocta::transforms::{
    behaviour_automaton, eliminate_epsilon, make_zero_accepting, normalize, TransformError,
};
use gocta::trees::{trees_up_to, Tree};

const SCHEMA: u32 = 1;

#[derive(Parser)]
#[command(name = "gocta", version, about = "Global one-counter tree automata")]
struct Cli {
    #[command(flatten)]
    config: CliConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CliConfig {
    /// Configuration budget for explicit searches [default: $GOCTA_NODE_BUDGET or 1000000]
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    budget: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

impl CliConfig {
    fn budget(&self) -> usize {
        self.budget.map_or_else(default_node_budget, |b| b as usize)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Behaviour,
    Oracle,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SemanticsArg {
    Global,
    Copy,
}

impl From<SemanticsArg> for Semantics {
    fn from(s: SemanticsArg) -> Self {
        match s {
            SemanticsArg::Global => Semantics::Global,
            SemanticsArg::Copy => Semantics::Copy,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a tree is accepted
    Member {
        /// Automaton file (`-` for stdin)
        automaton: PathBuf,
        /// Tree text, or `@path` to read it from a file
        tree: String,
        /// Defaults to `behaviour` under global semantics and `oracle` under copy
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        #[arg(long, value_enum, default_value_t = SemanticsArg::Global)]
        semantics: SemanticsArg,
        /// Counter bound; defaults to |t|·|Q'|²+1
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Print an accepting computation
    Trace {
        automaton: PathBuf,
        tree: String,
        #[arg(long, value_enum, default_value_t = SemanticsArg::Global)]
        semantics: SemanticsArg,
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Apply transformations, in the order zero-accept, normalize, behaviour, eps-free
    Transform {
        automaton: PathBuf,
        #[arg(long)]
        zero_accept: bool,
        #[arg(long)]
        normalize: bool,
        /// Build the behaviour automaton with counters up to K
        #[arg(long, value_name = "K")]
        behaviour: Option<u64>,
        #[arg(long)]
        eps_free: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// List accepted trees up to a size, in canonical order
    Enumerate {
        automaton: PathBuf,
        #[arg(long)]
        max_size: usize,
        #[arg(long, value_enum, default_value_t = SemanticsArg::Global)]
        semantics: SemanticsArg,
        /// Counter bound; defaults to max-size·|Q'|²+1
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Write the example automata as `.gta` files
    Examples {
        #[arg(long, default_value = ".")]
        dir: PathBuf,
        /// Factor of the multiplication gadget
        #[arg(long, default_value_t = 2)]
        k: i64,
    },
    /// Translate an indexed counter grammar into an automaton
    IcgConvert {
        grammar: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check an automaton file and print it back in canonical form
    Validate { automaton: PathBuf },
    /// Compare the decider with the explicit search on random automata
    Fuzz {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        count: u64,
        #[arg(long, default_value_t = 5)]
        max_size: usize,
    },
}

enum Failure {
    Usage(String),
    Resource(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Resource(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Resource(m) => m,
        }
    }
}

impl From<SemanticsError> for Failure {
    fn from(e: SemanticsError) -> Self {
        Failure::Resource(e.to_string())
    }
}

impl From<TransformError> for Failure {
    fn from(e: TransformError) -> Self {
        match e {
            TransformError::ResourceLimit { .. } => Failure::Resource(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<DecideError> for Failure {
    fn from(e: DecideError) -> Self {
        match e {
            DecideError::ResourceLimit { .. } | DecideError::Search(_) => Failure::Resource(e.to_string()),
            DecideError::Transform(t) => t.into(),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<GrammarError> for Failure {
    fn from(e: GrammarError) -> Self {
        match e {
            GrammarError::ResourceLimit { .. } => Failure::Resource(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::Usage(format!("stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_automaton(path: &Path) -> Result<Gocta, Failure> {
    parse_automaton(&read_input(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_tree(arg: &str, a: &Gocta) -> Result<Tree, Failure> {
    let text = match arg.strip_prefix('@') {
        Some(path) => read_input(Path::new(path))?,
        None => arg.to_string(),
    };
    Tree::parse_with(text.trim(), a.alphabet()).map_err(|e| Failure::Usage(format!("tree: {e}")))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn print_json(value: &impl Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("reports serialize"));
}

#[derive(Serialize)]
struct MemberJson {
    schema: u32,
    verdict: bool,
    method: String,
    semantics: String,
    bound_used: u64,
    timing_ms: f64,
    witness: Option<Vec<String>>,
}

#[derive(Serialize)]
struct EnumerateJson {
    schema: u32,
    bound_used: u64,
    trees: Vec<String>,
}

#[derive(Serialize)]
struct FuzzJson {
    schema: u32,
    seed: u64,
    automata: u64,
    trees: u64,
    accepted: u64,
    mismatches: Vec<String>,
}

/// The default bound for a tree of `size` nodes: the decider's bound.
fn default_bound(a: &Gocta, size: usize) -> Result<u64, Failure> {
    let q = Decider::new(a)?.transformed().state_count() as u64;
    (size as u64)
        .checked_mul(q * q)
        .and_then(|x| x.checked_add(1))
        .ok_or_else(|| Failure::Usage("counter bound overflows".into()))
}

fn cmd_member(
    cfg: &CliConfig,
    path: &Path,
    tree: &str,
    method: Option<MethodArg>,
    semantics: SemanticsArg,
    bound: Option<u64>,
) -> Result<bool, Failure> {
    let a = load_automaton(path)?;
    let t = load_tree(tree, &a)?;
    let method = match (method, semantics) {
        (Some(MethodArg::Behaviour), SemanticsArg::Copy) => {
            return Err(Failure::Usage("the behaviour method decides global semantics only".into()))
        }
        (Some(MethodArg::Behaviour), _) | (None, SemanticsArg::Global) => Method::Behaviour,
        _ => Method::Oracle,
    };
    let start = std::time::Instant::now();
    let decider = Decider::new(&a)?.with_budget(cfg.budget());
    let bound = match bound {
        Some(b) => b,
        None => decider.bound(&t)?,
    };
    let (verdict, witness) = match (method, semantics) {
        (Method::Behaviour, _) => (decider.decide_at(&t, bound)?.member, None),
        (Method::Oracle, SemanticsArg::Global) => {
            let w = oracle_member_global_with_budget(&a, &t, bound, cfg.budget())?;
            (w.is_some(), w.map(|w| render_global_trace(&a, &w)))
        }
        (Method::Oracle, SemanticsArg::Copy) => {
            let w = oracle_member_copy_with_budget(&a, &t, bound, cfg.budget())?;
            (w.is_some(), w.map(|w| render_copy_trace(&a, &w)))
        }
    };
    let timing = start.elapsed();
    match cfg.format {
        Format::Json => print_json(&MemberJson {
            schema: SCHEMA,
            verdict,
            method: method.to_string(),
            semantics: Semantics::from(semantics).to_string(),
            bound_used: bound,
            timing_ms: timing.as_secs_f64() * 1e3,
            witness: witness.map(|w| w.lines().map(String::from).collect()),
        }),
        Format::Text => {
            println!(
                "{} (method {method}, {} semantics, bound {bound}, {:.3} ms)",
                if verdict { "member" } else { "not a member" },
                Semantics::from(semantics),
                timing.as_secs_f64() * 1e3
            );
            if let Some(w) = witness {
                print!("{w}");
            }
        }
    }
    Ok(verdict)
}

fn cmd_trace(
    cfg: &CliConfig,
    path: &Path,
    tree: &str,
    semantics: SemanticsArg,
    bound: Option<u64>,
) -> Result<bool, Failure> {
    let a = load_automaton(path)?;
    let t = load_tree(tree, &a)?;
    let bound = match bound {
        Some(b) => b,
        None => default_bound(&a, t.size())?,
    };
    let text = match semantics {
        SemanticsArg::Global => oracle_member_global_with_budget(&a, &t, bound, cfg.budget())?
            .map(|w| render_global_trace(&a, &w)),
        SemanticsArg::Copy => oracle_member_copy_with_budget(&a, &t, bound, cfg.budget())?
            .map(|w| render_copy_trace(&a, &w)),
    };
    match text {
        Some(text) => {
            print!("{text}");
            Ok(true)
        }
        None => Ok(false),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_transform(
    path: &Path,
    zero_accept: bool,
    normalize_: bool,
    behaviour: Option<u64>,
    eps_free: bool,
    output: Option<&Path>,
) -> Result<(), Failure> {
    let mut a = load_automaton(path)?;
    if zero_accept {
        a = make_zero_accepting(&a);
    }
    if normalize_ {
        a = normalize(&a)?;
    }
    if let Some(k) = behaviour {
        a = behaviour_automaton(&a, k)?.into_gocta();
    }
    if eps_free {
        let f = Fta::new(a).map_err(|_| {
            Failure::Usage("--eps-free needs a counter-free automaton; add --behaviour K".into())
        })?;
        a = eliminate_epsilon(&f).into_gocta();
    }
    write_output(output, &a.render())
}

fn cmd_enumerate(
    cfg: &CliConfig,
    path: &Path,
    max_size: usize,
    semantics: SemanticsArg,
    bound: Option<u64>,
) -> Result<(), Failure> {
    let a = load_automaton(path)?;
    let bound = match bound {
        Some(b) => b,
        None => default_bound(&a, max_size.max(1))?,
    };
    let trees = enumerate_language_with_budget(&a, max_size, semantics.into(), bound, cfg.budget())?;
    match cfg.format {
        Format::Json => print_json(&EnumerateJson {
            schema: SCHEMA,
            bound_used: bound,
            trees: trees.iter().map(Tree::to_string).collect(),
        }),
        Format::Text => {
            for t in trees {
                println!("{t}");
            }
        }
    }
    Ok(())
}

fn cmd_examples(dir: &Path, k: i64) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
    let mut all = corpus::named_examples(k);
    all.push(("a_eq_b_as_printed", corpus::a_eq_b_as_printed()));
    for (name, a) in all {
        let path = dir.join(format!("{name}.gta"));
        write_output(Some(&path), &a.render())?;
        println!("{}", path.display());
    }
    Ok(())
}

fn cmd_icg_convert(path: &Path, output: Option<&Path>) -> Result<(), Failure> {
    let g = Icg::parse(&read_input(path)?)?;
    write_output(output, &icg_to_gocta(&g).render())
}

fn cmd_validate(path: &Path) -> Result<(), Failure> {
    let a = load_automaton(path)?;
    print!("{}", a.render());
    let _ = io::stdout().flush();
    eprintln!(
        "ok: {} states, {} transitions{}{}",
        a.state_count(),
        a.transitions().len(),
        if a.is_normalized() { ", normalized" } else { "" },
        if a.is_fta() { ", counter-free" } else { "" },
    );
    Ok(())
}

fn cmd_fuzz(cfg: &CliConfig, seed: u64, count: u64, max_size: usize) -> Result<bool, Failure> {
    let mut trees = 0;
    let mut accepted = 0;
    let mut mismatches = Vec::new();
    for i in 0..count {
        let s = seed.wrapping_add(i);
        let a = random_gocta(s, &RandomParams::default());
        let d = Decider::new(&a)?.with_budget(cfg.budget());
        for t in trees_up_to(a.alphabet(), max_size) {
            let bound = counter_bound(d.transformed(), &t)?;
            let decided = d.decide_at(&t, bound)?.member;
            let oracle = oracle_member_global_with_budget(&a, &t, bound, cfg.budget())?.is_some();
            trees += 1;
            accepted += oracle as u64;
            if decided != oracle {
                mismatches.push(format!("seed {s}: {t} decider={decided} oracle={oracle}"));
            }
        }
    }
    match cfg.format {
        Format::Json => print_json(&FuzzJson {
            schema: SCHEMA,
            seed,
            automata: count,
            trees,
            accepted,
            mismatches: mismatches.clone(),
        }),
        Format::Text => {
            println!("{count} automata, {trees} trees, {accepted} accepted, {} mismatches", mismatches.len());
            for m in &mismatches {
                println!("{m}");
            }
        }
    }
    Ok(mismatches.is_empty())
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    let cfg = &cli.config;
    let verdict = |b: bool| ExitCode::from(if b { 0 } else { 1 });
    match cli.command {
        Command::Member {
            automaton,
            tree,
            method,
            semantics,
            bound,
        } => cmd_member(cfg, &automaton, &tree, method, semantics, bound).map(verdict),
        Command::Trace {
            automaton,
            tree,
            semantics,
            bound,
        } => cmd_trace(cfg, &automaton, &tree, semantics, bound).map(verdict),
        Command::Transform {
            automaton,
            zero_accept,
            normalize,
            behaviour,
            eps_free,
            output,
        } => cmd_transform(&automaton, zero_accept, normalize, behaviour, eps_free, output.as_deref())
            .map(|_| ExitCode::SUCCESS),
        Command::Enumerate {
            automaton,
            max_size,
            semantics,
            bound,
        } => cmd_enumerate(cfg, &automaton, max_size, semantics, bound).map(|_| ExitCode::SUCCESS),
        Command::Examples { dir, k } => cmd_examples(&dir, k).map(|_| ExitCode::SUCCESS),
        Command::IcgConvert { grammar, output } => {
            cmd_icg_convert(&grammar, output.as_deref()).map(|_| ExitCode::SUCCESS)
        }
        Command::Validate { automaton } => cmd_validate(&automaton).map(|_| ExitCode::SUCCESS),
        Command::Fuzz { seed, count, max_size } => cmd_fuzz(cfg, seed, count, max_size).map(verdict),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
