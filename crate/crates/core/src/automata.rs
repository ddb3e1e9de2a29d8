//! Global one-counter tree automata: data model, validation and the
//! `.gta` text format.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::trees::{parse_term_prefix, RankedAlphabet, Symbol, TreeError};

/// Index of a state in [`Gocta::states`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Counter test performed before a transition fires.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Predicate {
    EqZero,
    GtZero,
    Top,
}

impl Predicate {
    pub fn holds(self, counter: u64) -> bool {
        match self {
            Predicate::EqZero => counter == 0,
            Predicate::GtZero => counter > 0,
            Predicate::Top => true,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Predicate::EqZero => "eq0",
            Predicate::GtZero => "gt0",
            Predicate::Top => "top",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "eq0" => Some(Predicate::EqZero),
            "gt0" => Some(Predicate::GtZero),
            "top" => Some(Predicate::Top),
            _ => None,
        }
    }
}

/// Applies instruction `z` to `counter`; `None` if the result leaves ℕ.
pub fn apply_instruction(counter: u64, z: i64) -> Option<u64> {
    counter.checked_add_signed(z)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rhs {
    Eps(StateId),
    Read(Symbol, Vec<StateId>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub source: StateId,
    pub predicate: Predicate,
    pub instruction: i64,
    pub rhs: Rhs,
}

impl Transition {
    pub fn is_eps(&self) -> bool {
        matches!(self.rhs, Rhs::Eps(_))
    }

    pub fn is_plain(&self) -> bool {
        self.predicate == Predicate::Top && self.instruction == 0
    }

    /// Counter after firing at `counter`, if the transition is enabled.
    pub fn fire(&self, counter: u64) -> Option<u64> {
        if self.predicate.holds(counter) {
            apply_instruction(counter, self.instruction)
        } else {
            None
        }
    }
}

/// A validated automaton. Transitions are kept sorted and deduplicated,
/// which fixes the order every search explores them in.
#[derive(Clone, Debug)]
pub struct Gocta {
    states: Vec<String>,
    alphabet: RankedAlphabet,
    initial: StateId,
    transitions: Vec<Transition>,
    by_source: Vec<Vec<usize>>,
    zero_accepting: bool,
}

impl PartialEq for Gocta {
    fn eq(&self, other: &Self) -> bool {
        self.states == other.states
            && self.alphabet == other.alphabet
            && self.initial == other.initial
            && self.transitions == other.transitions
    }
}

impl Eq for Gocta {}

impl Gocta {
    /// Assembles an automaton from already-resolved parts.
    pub fn from_parts(
        states: Vec<String>,
        alphabet: RankedAlphabet,
        initial: StateId,
        transitions: Vec<Transition>,
    ) -> Result<Gocta, AutomatonError> {
        let def = AutomatonDef {
            states: states.clone(),
            alphabet: alphabet.clone(),
            initial: states
                .get(initial.index())
                .cloned()
                .unwrap_or_else(|| format!("#{}", initial.0)),
            transitions: transitions
                .iter()
                .map(|t| TransitionDef::from_transition(t, &states))
                .collect(),
        };
        let diagnostics = validate(&def);
        if !diagnostics.is_empty() {
            return Err(AutomatonError::Invalid(diagnostics));
        }
        Ok(Self::assemble(states, alphabet, initial, transitions))
    }

    fn assemble(
        states: Vec<String>,
        alphabet: RankedAlphabet,
        initial: StateId,
        mut transitions: Vec<Transition>,
    ) -> Gocta {
        transitions.sort();
        transitions.dedup();
        let mut by_source = vec![Vec::new(); states.len()];
        for (i, t) in transitions.iter().enumerate() {
            by_source[t.source.index()].push(i);
        }
        Gocta {
            states,
            alphabet,
            initial,
            transitions,
            by_source,
            zero_accepting: false,
        }
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn state_ids(&self) -> impl Iterator<Item = StateId> {
        (0..self.states.len() as u32).map(StateId)
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.states[q.index()]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states
            .iter()
            .position(|s| s == name)
            .map(|i| StateId(i as u32))
    }

    pub fn alphabet(&self) -> &RankedAlphabet {
        &self.alphabet
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Transitions leaving `q`, in canonical order.
    pub fn transitions_from(&self, q: StateId) -> impl Iterator<Item = &Transition> + '_ {
        self.by_source[q.index()].iter().map(|&i| &self.transitions[i])
    }

    /// True when the automaton carries a construction-time guarantee that
    /// every successful computation ends with counter 0.
    pub fn is_certified_zero_accepting(&self) -> bool {
        self.zero_accepting
    }

    pub(crate) fn with_zero_accepting(mut self, flag: bool) -> Self {
        self.zero_accepting = flag;
        self
    }

    /// Every read is `top/0` and every instruction lies in {-1, 0, 1}.
    pub fn is_normalized(&self) -> bool {
        self.transitions.iter().all(|t| match t.rhs {
            Rhs::Read(..) => t.is_plain(),
            Rhs::Eps(_) => (-1..=1).contains(&t.instruction),
        })
    }

    /// Every transition is `top/0`: the counter is never used.
    pub fn is_fta(&self) -> bool {
        self.transitions.iter().all(Transition::is_plain)
    }

    pub fn has_eps(&self) -> bool {
        self.transitions.iter().any(Transition::is_eps)
    }

    pub fn to_def(&self) -> AutomatonDef {
        AutomatonDef {
            states: self.states.clone(),
            alphabet: self.alphabet.clone(),
            initial: self.state_name(self.initial).to_string(),
            transitions: self
                .transitions
                .iter()
                .map(|t| TransitionDef::from_transition(t, &self.states))
                .collect(),
        }
    }

    pub fn render_transition(&self, t: &Transition) -> String {
        let mut out = format!("{} ", self.state_name(t.source));
        if t.is_plain() {
            out.push_str("->");
        } else {
            out.push_str(&format!(
                "-[{}/{}]->",
                t.predicate.keyword(),
                render_instruction(t.instruction)
            ));
        }
        out.push(' ');
        match &t.rhs {
            Rhs::Eps(q) => out.push_str(self.state_name(*q)),
            Rhs::Read(s, qs) => {
                out.push_str(s.as_str());
                if !qs.is_empty() {
                    let names: Vec<&str> = qs.iter().map(|q| self.state_name(*q)).collect();
                    out.push_str(&format!("({})", names.join(",")));
                }
            }
        }
        out
    }

    /// Renders in the `.gta` format; [`parse_automaton`] reads it back.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let alpha: Vec<String> = self
            .alphabet
            .iter()
            .map(|(s, r)| format!("{s}/{r}"))
            .collect();
        out.push_str(&format!("alphabet: {}\n", alpha.join(" ")));
        out.push_str(&format!("states: {}\n", self.states.join(" ")));
        out.push_str(&format!("initial: {}\n", self.state_name(self.initial)));
        for t in &self.transitions {
            out.push_str(&format!("trans: {}\n", self.render_transition(t)));
        }
        out
    }
}

impl fmt::Display for Gocta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

pub fn render_instruction(z: i64) -> String {
    if z > 0 {
        format!("+{z}")
    } else {
        z.to_string()
    }
}

/// A [`Gocta`] in which every transition is `top/0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fta(Gocta);

impl Fta {
    pub fn new(a: Gocta) -> Result<Fta, AutomatonError> {
        if a.is_fta() {
            Ok(Fta(a))
        } else {
            Err(AutomatonError::NotFta)
        }
    }

    pub fn gocta(&self) -> &Gocta {
        &self.0
    }

    pub fn into_gocta(self) -> Gocta {
        self.0
    }
}

impl std::ops::Deref for Fta {
    type Target = Gocta;
    fn deref(&self) -> &Gocta {
        &self.0
    }
}

/// An automaton whose states are referred to by name and which may be
/// ill-formed. [`validate`] reports what is wrong with it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutomatonDef {
    pub states: Vec<String>,
    pub alphabet: RankedAlphabet,
    pub initial: String,
    pub transitions: Vec<TransitionDef>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionDef {
    pub source: String,
    pub predicate: Predicate,
    pub instruction: i64,
    pub rhs: RhsDef,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RhsDef {
    Eps(String),
    Read(String, Vec<String>),
}

impl TransitionDef {
    fn from_transition(t: &Transition, states: &[String]) -> TransitionDef {
        let name = |q: StateId| {
            states
                .get(q.index())
                .cloned()
                .unwrap_or_else(|| format!("#{}", q.0))
        };
        TransitionDef {
            source: name(t.source),
            predicate: t.predicate,
            instruction: t.instruction,
            rhs: match &t.rhs {
                Rhs::Eps(q) => RhsDef::Eps(name(*q)),
                Rhs::Read(s, qs) => RhsDef::Read(s.to_string(), qs.iter().map(|q| name(*q)).collect()),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Diagnostic {
    DuplicateState(String),
    InvalidStateName(String),
    InvalidSymbolName(String),
    UnknownInitial(String),
    UnknownState { transition: usize, state: String },
    UnknownSymbol { transition: usize, symbol: String },
    RankMismatch { transition: usize, symbol: String, expected: usize, found: usize },
    NoStates,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::DuplicateState(q) => write!(f, "state `{q}` declared twice"),
            Diagnostic::InvalidStateName(q) => write!(f, "`{q}` is not a valid state name"),
            Diagnostic::InvalidSymbolName(s) => write!(f, "`{s}` is not a valid symbol name"),
            Diagnostic::UnknownInitial(q) => write!(f, "initial state `{q}` is not declared"),
            Diagnostic::UnknownState { transition, state } => {
                write!(f, "transition {transition}: unknown state `{state}`")
            }
            Diagnostic::UnknownSymbol { transition, symbol } => {
                write!(f, "transition {transition}: unknown symbol `{symbol}`")
            }
            Diagnostic::RankMismatch {
                transition,
                symbol,
                expected,
                found,
            } => write!(
                f,
                "transition {transition}: `{symbol}` has rank {expected} but {found} states are given"
            ),
            Diagnostic::NoStates => write!(f, "no states declared"),
        }
    }
}

/// State names may not contain whitespace, parentheses or commas, may not
/// start with `#` and may not contain an arrow.
pub fn is_valid_state_name(name: &str) -> bool {
    !name.is_empty()
        && !name.starts_with('#')
        && !name.contains("->")
        && !name.contains("-[")
        && !name
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '(' | ')' | ','))
}

/// All well-formedness problems of `def`, sorted. Empty means valid.
pub fn validate(def: &AutomatonDef) -> Vec<Diagnostic> {
    let mut out = BTreeSet::new();
    if def.states.is_empty() {
        out.insert(Diagnostic::NoStates);
    }
    let mut seen = BTreeSet::new();
    for q in &def.states {
        if !seen.insert(q.as_str()) {
            out.insert(Diagnostic::DuplicateState(q.clone()));
        }
        if !is_valid_state_name(q) {
            out.insert(Diagnostic::InvalidStateName(q.clone()));
        }
    }
    for (s, _) in def.alphabet.iter() {
        if !Symbol::is_valid_name(s.as_str()) {
            out.insert(Diagnostic::InvalidSymbolName(s.to_string()));
        }
    }
    if !seen.contains(def.initial.as_str()) {
        out.insert(Diagnostic::UnknownInitial(def.initial.clone()));
    }
    for (i, t) in def.transitions.iter().enumerate() {
        let mut check_state = |q: &String| {
            if !seen.contains(q.as_str()) {
                out.insert(Diagnostic::UnknownState {
                    transition: i,
                    state: q.clone(),
                });
            }
        };
        check_state(&t.source);
        match &t.rhs {
            RhsDef::Eps(q) => check_state(q),
            RhsDef::Read(s, qs) => {
                qs.iter().for_each(&mut check_state);
                match def.alphabet.rank_of(s) {
                    None => {
                        out.insert(Diagnostic::UnknownSymbol {
                            transition: i,
                            symbol: s.clone(),
                        });
                    }
                    Some(r) if r != qs.len() => {
                        out.insert(Diagnostic::RankMismatch {
                            transition: i,
                            symbol: s.clone(),
                            expected: r,
                            found: qs.len(),
                        });
                    }
                    Some(_) => {}
                }
            }
        }
    }
    out.into_iter().collect()
}

impl AutomatonDef {
    pub fn build(&self) -> Result<Gocta, AutomatonError> {
        let diagnostics = validate(self);
        if !diagnostics.is_empty() {
            return Err(AutomatonError::Invalid(diagnostics));
        }
        let ids: HashMap<&str, StateId> = self
            .states
            .iter()
            .enumerate()
            .map(|(i, q)| (q.as_str(), StateId(i as u32)))
            .collect();
        let transitions = self
            .transitions
            .iter()
            .map(|t| Transition {
                source: ids[t.source.as_str()],
                predicate: t.predicate,
                instruction: t.instruction,
                rhs: match &t.rhs {
                    RhsDef::Eps(q) => Rhs::Eps(ids[q.as_str()]),
                    RhsDef::Read(s, qs) => Rhs::Read(
                        self.alphabet.symbol(s).expect("validated"),
                        qs.iter().map(|q| ids[q.as_str()]).collect(),
                    ),
                },
            })
            .collect();
        Ok(Gocta::assemble(
            self.states.clone(),
            self.alphabet.clone(),
            ids[self.initial.as_str()],
            transitions,
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AutomatonError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid automaton: {}", render_diagnostics(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("automaton uses its counter, so it is not a finite tree automaton")]
    NotFta,
}

fn render_diagnostics(ds: &[Diagnostic]) -> String {
    ds.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
}

/// Strips a trailing comment: a `#` token that begins after whitespace and
/// is not a `#/rank` alphabet entry.
fn split_words(rest: &str) -> Vec<&str> {
    let mut words = Vec::new();
    for w in rest.split_whitespace() {
        if w.starts_with('#') && !is_hash_rank(w) {
            break;
        }
        words.push(w);
    }
    words
}

fn is_hash_rank(w: &str) -> bool {
    w.strip_prefix("#/")
        .is_some_and(|r| !r.is_empty() && r.bytes().all(|b| b.is_ascii_digit()))
}

/// Parses the `.gta` format without validating it.
pub fn parse_automaton_def(text: &str) -> Result<AutomatonDef, AutomatonError> {
    let mut alphabet = RankedAlphabet::new();
    let mut states = Vec::new();
    let mut initial = None;
    let mut transitions = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |message: String| AutomatonError::Parse { line, message };
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, rest) = trimmed
            .split_once(':')
            .ok_or_else(|| err("expected `key: value`".into()))?;
        match key.trim() {
            "alphabet" => {
                for w in split_words(rest) {
                    let (name, rank) = w
                        .rsplit_once('/')
                        .ok_or_else(|| err(format!("expected `name/rank`, found `{w}`")))?;
                    let rank: usize = rank
                        .parse()
                        .map_err(|_| err(format!("bad rank in `{w}`")))?;
                    if alphabet.insert(Symbol::new(name), rank).is_some() {
                        return Err(err(format!("symbol `{name}` declared twice")));
                    }
                }
            }
            "states" => states.extend(split_words(rest).into_iter().map(String::from)),
            "initial" => match split_words(rest).as_slice() {
                [q] => initial = Some(q.to_string()),
                _ => return Err(err("expected exactly one initial state".into())),
            },
            "trans" => transitions.push(parse_transition_line(rest, &states, &alphabet).map_err(err)?),
            other => return Err(err(format!("unknown key `{other}`"))),
        }
    }
    Ok(AutomatonDef {
        states,
        alphabet,
        initial: initial.ok_or(AutomatonError::Parse {
            line: 0,
            message: "missing `initial:` line".into(),
        })?,
        transitions,
    })
}

/// Parses and validates the `.gta` format.
pub fn parse_automaton(text: &str) -> Result<Gocta, AutomatonError> {
    parse_automaton_def(text)?.build()
}

fn parse_transition_line(
    rest: &str,
    states: &[String],
    alphabet: &RankedAlphabet,
) -> Result<TransitionDef, String> {
    let rest = rest.trim_start();
    let source_end = rest
        .find(char::is_whitespace)
        .ok_or("expected `source arrow rhs`")?;
    let source = rest[..source_end].to_string();
    let rest = rest[source_end..].trim_start();
    let (predicate, instruction, rhs_text) = if let Some(r) = rest.strip_prefix("->") {
        (Predicate::Top, 0, r)
    } else if let Some(r) = rest.strip_prefix("-[") {
        let close = r.find("]->").ok_or("expected `]->`")?;
        let (p, z) = r[..close]
            .split_once('/')
            .ok_or("expected `predicate/instruction`")?;
        let predicate = Predicate::from_keyword(p.trim())
            .ok_or_else(|| format!("unknown predicate `{}`", p.trim()))?;
        let z = z.trim();
        let instruction: i64 = z
            .strip_prefix('+')
            .unwrap_or(z)
            .parse()
            .map_err(|_| format!("bad instruction `{z}`"))?;
        (predicate, instruction, &r[close + 3..])
    } else {
        return Err("expected `->` or `-[p/z]->`".into());
    };
    let rhs_text = rhs_text.trim_start();
    let (rhs, tail) = parse_rhs(rhs_text, states, alphabet)?;
    let tail = tail.trim();
    if !tail.is_empty() && !tail.starts_with('#') {
        return Err(format!("unexpected trailing text `{tail}`"));
    }
    Ok(TransitionDef {
        source,
        predicate,
        instruction,
        rhs,
    })
}

/// A right-hand side is a state, or `sym(q1,..,qn)`, or a bare rank-0
/// symbol. A bare name naming both a state and a symbol is rejected.
fn parse_rhs<'a>(
    text: &'a str,
    states: &[String],
    alphabet: &RankedAlphabet,
) -> Result<(RhsDef, &'a str), String> {
    let end = text
        .find(|c: char| c.is_whitespace() || c == '(')
        .unwrap_or(text.len());
    let head = &text[..end];
    if head.is_empty() {
        return Err("missing right-hand side".into());
    }
    let after = &text[end..];
    if after.starts_with('(') {
        let close = after.find(')').ok_or("unclosed `(`")?;
        let args: Vec<String> = after[1..close]
            .split(',')
            .map(|s| s.trim().to_string())
            .collect();
        if args.iter().any(String::is_empty) {
            return Err("empty state in argument list".into());
        }
        return Ok((RhsDef::Read(head.to_string(), args), &after[close + 1..]));
    }
    let is_state = states.iter().any(|q| q == head);
    let is_symbol = alphabet.contains(head);
    match (is_state, is_symbol) {
        (true, true) => Err(format!("`{head}` names both a state and a symbol")),
        (true, false) => Ok((RhsDef::Eps(head.to_string()), after)),
        (false, _) if Symbol::is_valid_name(head) => {
            // Unknown bare symbols are left for validation to report.
            let (t, tail) = parse_term_prefix(text).map_err(|e: TreeError| e.to_string())?;
            Ok((RhsDef::Read(t.label.to_string(), Vec::new()), tail))
        }
        (false, _) => Ok((RhsDef::Eps(head.to_string()), after)),
    }
}

/// Builder used by the example corpus and by tests.
pub struct GoctaBuilder {
    def: AutomatonDef,
}

impl GoctaBuilder {
    pub fn new(alphabet: &[(&str, usize)], states: &[&str], initial: &str) -> Self {
        GoctaBuilder {
            def: AutomatonDef {
                states: states.iter().map(|s| s.to_string()).collect(),
                alphabet: RankedAlphabet::from_pairs(alphabet.iter().copied()),
                initial: initial.to_string(),
                transitions: Vec::new(),
            },
        }
    }

    pub fn eps(mut self, source: &str, p: Predicate, z: i64, target: &str) -> Self {
        self.def.transitions.push(TransitionDef {
            source: source.into(),
            predicate: p,
            instruction: z,
            rhs: RhsDef::Eps(target.into()),
        });
        self
    }

    pub fn read(mut self, source: &str, p: Predicate, z: i64, symbol: &str, children: &[&str]) -> Self {
        self.def.transitions.push(TransitionDef {
            source: source.into(),
            predicate: p,
            instruction: z,
            rhs: RhsDef::Read(symbol.into(), children.iter().map(|s| s.to_string()).collect()),
        });
        self
    }

    pub fn build(self) -> Result<Gocta, AutomatonError> {
        self.def.build()
    }
}
