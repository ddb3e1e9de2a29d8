//! Indexed counter grammars, their leftmost (R-mode) derivations, and the
//! translation to a GOCTA whose trees encode derivations.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::automata::{Gocta, GoctaBuilder, Predicate};
use crate::trees::{RankedAlphabet, Symbol, Tree};

pub const START: &str = "S";
pub const DEFAULT_SEARCH_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("production {production}: {message}")]
    Malformed { production: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("derivation search visited {budget} forms without finishing")]
    ResourceLimit { budget: usize },
}

/// An index string `γ^gammas` optionally followed by `#`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Index {
    pub gammas: u64,
    pub bottom: bool,
}

impl Index {
    pub const EMPTY: Index = Index { gammas: 0, bottom: false };
    pub const BOTTOM: Index = Index { gammas: 0, bottom: true };

    pub fn gammas(n: u64) -> Index {
        Index { gammas: n, bottom: false }
    }

    pub fn is_empty(&self) -> bool {
        *self == Index::EMPTY
    }

    /// Concatenation; `None` if `self` already ends in `#`.
    pub fn append(self, tail: Index) -> Option<Index> {
        if self.bottom {
            return None;
        }
        Some(Index {
            gammas: self.gammas.checked_add(tail.gammas)?,
            bottom: tail.bottom,
        })
    }

    fn parse(s: &str) -> Option<Index> {
        let (gs, bottom) = match s.strip_suffix('#') {
            Some(rest) => (rest, true),
            None => (s, false),
        };
        gs.bytes().all(|b| b == b'g').then_some(Index {
            gammas: gs.len() as u64,
            bottom,
        })
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for _ in 0..self.gammas {
            f.write_str("g")?;
        }
        if self.bottom {
            f.write_str("#")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Item {
    Terminal(String),
    Nonterminal(String, Index),
}

impl Item {
    pub fn nt(name: &str, index: Index) -> Item {
        Item::Nonterminal(name.to_string(), index)
    }

    pub fn t(name: &str) -> Item {
        Item::Terminal(name.to_string())
    }

    pub fn is_terminal(&self) -> bool {
        matches!(self, Item::Terminal(_))
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Item::Terminal(t) => f.write_str(t),
            Item::Nonterminal(n, i) if i.is_empty() => f.write_str(n),
            Item::Nonterminal(n, i) => write!(f, "{n}[{i}]"),
        }
    }
}

/// Left-hand side of a production.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Lhs {
    Start,
    /// `A`, applicable at any counter.
    Plain(String),
    /// `A[g]`, pops one `γ`.
    Pop(String),
    /// `A[#]`, applicable only at counter 0.
    Bottom(String),
}

impl Lhs {
    pub fn nonterminal(&self) -> Option<&str> {
        match self {
            Lhs::Start => None,
            Lhs::Plain(a) | Lhs::Pop(a) | Lhs::Bottom(a) => Some(a),
        }
    }
}

impl fmt::Display for Lhs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lhs::Start => f.write_str(START),
            Lhs::Plain(a) => f.write_str(a),
            Lhs::Pop(a) => write!(f, "{a}[g]"),
            Lhs::Bottom(a) => write!(f, "{a}[#]"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Form {
    /// `S -> A#`
    S1,
    /// `S -> eps`
    S2,
    /// `A -> ..` or `A[g] -> ..`
    T1,
    /// `A[#] -> ..`
    T2,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Production {
    pub lhs: Lhs,
    pub body: Vec<Item>,
}

impl Production {
    pub fn form(&self) -> Form {
        match &self.lhs {
            Lhs::Start if self.body.is_empty() => Form::S2,
            Lhs::Start => Form::S1,
            Lhs::Plain(_) | Lhs::Pop(_) => Form::T1,
            Lhs::Bottom(_) => Form::T2,
        }
    }

    /// Number of nonterminal occurrences in the body.
    pub fn rank(&self) -> usize {
        self.body.iter().filter(|i| !i.is_terminal()).count()
    }
}

impl fmt::Display for Production {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ->", self.lhs)?;
        if self.body.is_empty() {
            return f.write_str(" eps");
        }
        for item in &self.body {
            write!(f, " {item}")?;
        }
        Ok(())
    }
}

/// The alphabet symbol naming production `i`.
pub fn production_name(i: usize) -> String {
    format!("p{i}")
}

fn production_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('p')?;
    if digits.is_empty() || (digits.len() > 1 && digits.starts_with('0')) {
        return None;
    }
    digits.parse().ok()
}

/// A validated grammar with start symbol `S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Icg {
    nonterminals: BTreeSet<String>,
    terminals: BTreeSet<String>,
    productions: Vec<Production>,
}

fn is_name(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

impl Icg {
    pub fn new(
        nonterminals: impl IntoIterator<Item = String>,
        terminals: impl IntoIterator<Item = String>,
        productions: Vec<Production>,
    ) -> Result<Icg, GrammarError> {
        let g = Icg {
            nonterminals: nonterminals.into_iter().collect(),
            terminals: terminals.into_iter().collect(),
            productions,
        };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<(), GrammarError> {
        for n in &self.nonterminals {
            if !is_name(n) || n == START || n == "eps" {
                return Err(GrammarError::Invalid(format!("bad nonterminal name {n:?}")));
            }
        }
        for t in &self.terminals {
            if !is_name(t) || t == START || t == "eps" {
                return Err(GrammarError::Invalid(format!("bad terminal name {t:?}")));
            }
            if self.nonterminals.contains(t) {
                return Err(GrammarError::Invalid(format!("{t} is both a terminal and a nonterminal")));
            }
        }
        for (i, p) in self.productions.iter().enumerate() {
            let bad = |message: &str| GrammarError::Malformed {
                production: i,
                message: message.to_string(),
            };
            if let Some(a) = p.lhs.nonterminal() {
                if !self.nonterminals.contains(a) {
                    return Err(bad(&format!("unknown nonterminal {a}")));
                }
            }
            for item in &p.body {
                match item {
                    Item::Terminal(t) if !self.terminals.contains(t) => {
                        return Err(bad(&format!("unknown terminal {t}")))
                    }
                    Item::Nonterminal(n, _) if !self.nonterminals.contains(n) => {
                        return Err(bad(&format!("unknown nonterminal {n}")))
                    }
                    _ => {}
                }
            }
            let marks: Vec<usize> = p
                .body
                .iter()
                .filter(|i| !i.is_terminal())
                .enumerate()
                .filter(|(_, i)| matches!(i, Item::Nonterminal(_, x) if x.bottom))
                .map(|(k, _)| k)
                .collect();
            match p.form() {
                Form::S2 => {}
                Form::S1 => {
                    if !matches!(p.body.as_slice(), [Item::Nonterminal(_, x)] if *x == Index::BOTTOM) {
                        return Err(bad("a start production must be S -> eps or S -> A#"));
                    }
                }
                Form::T1 => {
                    if !marks.is_empty() {
                        return Err(bad("# may not occur in the body of a production without # on its left"));
                    }
                }
                Form::T2 => {
                    if marks != [0] {
                        return Err(bad("# must occur exactly once, on the first nonterminal of the body"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn nonterminals(&self) -> &BTreeSet<String> {
        &self.nonterminals
    }

    pub fn terminals(&self) -> &BTreeSet<String> {
        &self.terminals
    }

    pub fn productions(&self) -> &[Production] {
        &self.productions
    }

    /// Reads the `.icg` format.
    ///
    /// ```text
    /// nonterminals: A B        # optional
    /// terminals: a b           # optional
    /// prod: S -> A#
    /// prod: A[g] -> a A[gg] b
    /// prod: A[#] -> eps        # rejected: # needs a nonterminal to sit on
    /// ```
    ///
    /// A bare body token is a nonterminal if it is declared, used on some
    /// left-hand side, or carries an index elsewhere; otherwise a terminal.
    pub fn parse(text: &str) -> Result<Icg, GrammarError> {
        struct Raw {
            line: usize,
            lhs: (String, Option<Index>),
            body: Vec<(String, Option<Index>)>,
        }
        let mut declared_n = BTreeSet::new();
        let mut declared_t = BTreeSet::new();
        let mut raws = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line_no = no + 1;
            let err = |message: String| GrammarError::Parse { line: line_no, message };
            let words: Vec<&str> = line
                .split_whitespace()
                .take_while(|w| !w.starts_with('#'))
                .collect();
            let Some((&head, rest)) = words.split_first() else {
                continue;
            };
            match head {
                "nonterminals:" => declared_n.extend(rest.iter().map(|s| s.to_string())),
                "terminals:" => declared_t.extend(rest.iter().map(|s| s.to_string())),
                "prod:" => {
                    let arrow = rest
                        .iter()
                        .position(|w| *w == "->")
                        .ok_or_else(|| err("expected `->`".into()))?;
                    let [lhs] = &rest[..arrow] else {
                        return Err(err("expected exactly one symbol before `->`".into()));
                    };
                    let lhs = split_token(lhs).ok_or_else(|| err(format!("bad symbol {lhs:?}")))?;
                    let body_words = &rest[arrow + 1..];
                    let body = match body_words {
                        ["eps"] | [] => Vec::new(),
                        _ => body_words
                            .iter()
                            .map(|w| split_token(w).ok_or_else(|| err(format!("bad symbol {w:?}"))))
                            .collect::<Result<_, _>>()?,
                    };
                    raws.push(Raw { line: line_no, lhs, body });
                }
                _ => return Err(err(format!("unknown directive {head:?}"))),
            }
        }
        let mut nonterminals = declared_n;
        for r in &raws {
            if r.lhs.0 != START {
                nonterminals.insert(r.lhs.0.clone());
            }
            for (n, idx) in &r.body {
                if idx.is_some() {
                    nonterminals.insert(n.clone());
                }
            }
        }
        let mut terminals = declared_t;
        let mut productions = Vec::new();
        for r in raws {
            let err = |message: String| GrammarError::Parse { line: r.line, message };
            let (name, idx) = r.lhs;
            let lhs = if name == START {
                if idx.is_some_and(|i| !i.is_empty()) {
                    return Err(err("S carries no index".into()));
                }
                Lhs::Start
            } else {
                match idx.unwrap_or(Index::EMPTY) {
                    Index::EMPTY => Lhs::Plain(name),
                    Index::BOTTOM => Lhs::Bottom(name),
                    Index { gammas: 1, bottom: false } => Lhs::Pop(name),
                    other => return Err(err(format!("left-hand index must be g, # or empty, not {other}"))),
                }
            };
            let mut body = Vec::new();
            for (n, idx) in r.body {
                if n == START {
                    return Err(err("S may not occur in a body".into()));
                }
                if n == "eps" {
                    return Err(err("eps must be the whole body".into()));
                }
                if nonterminals.contains(&n) {
                    body.push(Item::Nonterminal(n, idx.unwrap_or(Index::EMPTY)));
                } else {
                    terminals.insert(n.clone());
                    body.push(Item::Terminal(n));
                }
            }
            productions.push(Production { lhs, body });
        }
        Icg::new(nonterminals, terminals, productions)
    }

    /// Text that [`Icg::parse`] reads back to an equal grammar.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let join = |s: &BTreeSet<String>| s.iter().cloned().collect::<Vec<_>>().join(" ");
        if !self.nonterminals.is_empty() {
            out += &format!("nonterminals: {}\n", join(&self.nonterminals));
        }
        if !self.terminals.is_empty() {
            out += &format!("terminals: {}\n", join(&self.terminals));
        }
        for p in &self.productions {
            out += &format!("prod: {p}\n");
        }
        out
    }
}

impl fmt::Display for Icg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// `A`, `A#`, `A[gg#]` into name and optional index.
fn split_token(w: &str) -> Option<(String, Option<Index>)> {
    if let Some(open) = w.find('[') {
        let inner = w[open + 1..].strip_suffix(']')?;
        let name = &w[..open];
        if !is_name(name) {
            return None;
        }
        return Index::parse(inner).map(|i| (name.to_string(), Some(i)));
    }
    if let Some(name) = w.strip_suffix('#') {
        return is_name(name).then(|| (name.to_string(), Some(Index::BOTTOM)));
    }
    is_name(w).then(|| (w.to_string(), None))
}

/// A sentential form; the start symbol appears as the nonterminal `S`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SententialForm(pub Vec<Item>);

impl SententialForm {
    pub fn start() -> SententialForm {
        SententialForm(vec![Item::nt(START, Index::EMPTY)])
    }

    pub fn is_terminal(&self) -> bool {
        self.0.iter().all(Item::is_terminal)
    }

    pub fn leftmost_nonterminal(&self) -> Option<usize> {
        self.0.iter().position(|i| !i.is_terminal())
    }

    pub fn terminals(&self) -> Vec<String> {
        self.0
            .iter()
            .filter_map(|i| match i {
                Item::Terminal(t) => Some(t.clone()),
                Item::Nonterminal(..) => None,
            })
            .collect()
    }

    fn nonterminal_count(&self) -> usize {
        self.0.iter().filter(|i| !i.is_terminal()).count()
    }
}

impl fmt::Display for SententialForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("eps");
        }
        let parts: Vec<String> = self.0.iter().map(Item::to_string).collect();
        f.write_str(&parts.join(" "))
    }
}

/// Appends `delta` to the index of the first nonterminal of `body`.
pub fn r_append(body: &[Item], delta: Index) -> Result<Vec<Item>, GrammarError> {
    let mut out = body.to_vec();
    if let Some(Item::Nonterminal(n, idx)) = out.iter_mut().find(|i| !i.is_terminal()) {
        *idx = idx.append(delta).ok_or_else(|| GrammarError::Invalid(format!("{n}[{idx}] already ends in #")))?;
    }
    Ok(out)
}

/// One leftmost step with production `prod`, or `None` if it does not apply.
pub fn derive_r_step(g: &Icg, form: &SententialForm, prod: usize) -> Option<SententialForm> {
    let p = g.productions.get(prod)?;
    let at = form.leftmost_nonterminal()?;
    let Item::Nonterminal(name, idx) = &form.0[at] else {
        unreachable!()
    };
    let (w, rest) = (&form.0[..at], &form.0[at + 1..]);
    let splice = |middle: Vec<Item>| {
        let mut v = w.to_vec();
        v.extend(middle);
        Some(SententialForm(v))
    };
    match &p.lhs {
        Lhs::Start => {
            if form.0.len() != 1 || name != START {
                return None;
            }
            splice(p.body.clone())
        }
        Lhs::Plain(a) | Lhs::Pop(a) => {
            if a != name || !idx.bottom {
                return None;
            }
            let pop = matches!(p.lhs, Lhs::Pop(_)) as u64;
            let omega = Index {
                gammas: idx.gammas.checked_sub(pop)?,
                bottom: true,
            };
            let mut body = p.body.clone();
            body.extend_from_slice(rest);
            splice(r_append(&body, omega).ok()?)
        }
        Lhs::Bottom(a) => {
            if a != name || *idx != Index::BOTTOM {
                return None;
            }
            let mut body = p.body.clone();
            body.extend_from_slice(rest);
            splice(body)
        }
    }
}

/// The grammar with every terminal occurrence deleted from the bodies.
pub fn erase_terminals(g: &Icg) -> Icg {
    Icg {
        nonterminals: g.nonterminals.clone(),
        terminals: BTreeSet::new(),
        productions: g
            .productions
            .iter()
            .map(|p| Production {
                lhs: p.lhs.clone(),
                body: p.body.iter().filter(|i| !i.is_terminal()).cloned().collect(),
            })
            .collect(),
    }
}

/// A derivation from `S`: `forms[i+1]` comes from `forms[i]` by `steps[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivation {
    pub steps: Vec<usize>,
    pub forms: Vec<SententialForm>,
}

impl Derivation {
    pub fn last(&self) -> &SententialForm {
        self.forms.last().expect("a derivation holds at least S")
    }

    pub fn production_names(&self) -> Vec<String> {
        self.steps.iter().map(|&i| production_name(i)).collect()
    }

    pub fn render(&self) -> String {
        let mut out = self.forms[0].to_string();
        for (p, f) in self.steps.iter().zip(&self.forms[1..]) {
            out += &format!("\n  ={}=> {f}", production_name(*p));
        }
        out
    }
}

/// Applies the named productions in order starting from `S`.
pub fn replay(g: &Icg, names: &[String]) -> Option<Derivation> {
    let mut d = Derivation {
        steps: Vec::new(),
        forms: vec![SententialForm::start()],
    };
    for name in names {
        let i = production_index(name)?;
        let next = derive_r_step(g, d.last(), i)?;
        d.steps.push(i);
        d.forms.push(next);
    }
    Some(d)
}

fn search(
    g: &Icg,
    max_steps: usize,
    budget: usize,
    target: impl Fn(&SententialForm) -> bool,
    viable: impl Fn(&SententialForm, usize) -> bool,
) -> Result<Option<Derivation>, GrammarError> {
    let start = SententialForm::start();
    let mut parent: HashMap<SententialForm, Option<(SententialForm, usize)>> = HashMap::new();
    parent.insert(start.clone(), None);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some((form, depth)) = queue.pop_front() {
        if target(&form) {
            let mut steps = Vec::new();
            let mut forms = vec![form.clone()];
            let mut cur = form;
            while let Some(Some((prev, p))) = parent.get(&cur) {
                steps.push(*p);
                forms.push(prev.clone());
                cur = prev.clone();
            }
            steps.reverse();
            forms.reverse();
            return Ok(Some(Derivation { steps, forms }));
        }
        if depth == max_steps {
            continue;
        }
        for i in 0..g.productions.len() {
            let Some(next) = derive_r_step(g, &form, i) else {
                continue;
            };
            // Every nonterminal still needs at least one step to disappear.
            if next.nonterminal_count() > max_steps - depth - 1 && !target(&next) {
                continue;
            }
            if !viable(&next, depth + 1) || parent.contains_key(&next) {
                continue;
            }
            if parent.len() >= budget {
                return Err(GrammarError::ResourceLimit { budget });
            }
            parent.insert(next.clone(), Some((form.clone(), i)));
            queue.push_back((next, depth + 1));
        }
    }
    Ok(None)
}

/// A shortest leftmost derivation of `w` with at most `max_steps` steps.
pub fn oracle_derivable(g: &Icg, w: &[String], max_steps: usize) -> Result<Option<Derivation>, GrammarError> {
    oracle_derivable_with_budget(g, w, max_steps, DEFAULT_SEARCH_BUDGET)
}

pub fn oracle_derivable_with_budget(
    g: &Icg,
    w: &[String],
    max_steps: usize,
    budget: usize,
) -> Result<Option<Derivation>, GrammarError> {
    let target = |f: &SententialForm| f.is_terminal() && f.terminals() == w;
    let viable = |f: &SententialForm, _: usize| {
        let prefix_len = f.leftmost_nonterminal().unwrap_or(f.0.len());
        let prefix_ok = f.0[..prefix_len]
            .iter()
            .zip(w)
            .all(|(i, t)| matches!(i, Item::Terminal(x) if x == t))
            && prefix_len <= w.len();
        prefix_ok && f.terminals().len() <= w.len()
    };
    search(g, max_steps, budget, target, viable)
}

/// A shortest derivation of some terminal word within `max_steps` steps.
pub fn oracle_nonempty(g: &Icg, max_steps: usize) -> Result<Option<Derivation>, GrammarError> {
    oracle_nonempty_with_budget(g, max_steps, DEFAULT_SEARCH_BUDGET)
}

pub fn oracle_nonempty_with_budget(g: &Icg, max_steps: usize, budget: usize) -> Result<Option<Derivation>, GrammarError> {
    search(g, max_steps, budget, SententialForm::is_terminal, |_, _| true)
}

fn aux_state(name: &str, idx: Index) -> String {
    format!("[{name}^{}{}]", idx.gammas, if idx.bottom { "#" } else { "" })
}

/// The alphabet of [`icg_to_gocta`]: `p<i>` with the nonterminal count of
/// production `i` as its rank.
pub fn production_alphabet(g: &Icg) -> RankedAlphabet {
    let mut alphabet = RankedAlphabet::new();
    for (i, p) in g.productions.iter().enumerate() {
        alphabet.insert(Symbol::new(&production_name(i)), p.rank());
    }
    alphabet
}

/// The GOCTA whose accepted trees are the derivation trees of `g` with
/// terminals erased. Initial state `S`.
pub fn icg_to_gocta(g: &Icg) -> Gocta {
    let g = erase_terminals(g);
    let alphabet = production_alphabet(&g);
    let mut aux: BTreeMap<String, (String, Index)> = BTreeMap::new();
    for p in &g.productions {
        for item in &p.body {
            if let (Lhs::Plain(_) | Lhs::Pop(_) | Lhs::Bottom(_), Item::Nonterminal(n, idx)) = (&p.lhs, item) {
                aux.insert(aux_state(n, *idx), (n.clone(), *idx));
            }
        }
    }
    let mut states: Vec<String> = vec![START.to_string()];
    states.extend(g.nonterminals.iter().cloned());
    states.extend(aux.keys().cloned());
    let pairs: Vec<(&str, usize)> = alphabet.iter().map(|(s, r)| (s.as_str(), r)).collect();
    let state_refs: Vec<&str> = states.iter().map(String::as_str).collect();
    let mut b = GoctaBuilder::new(&pairs, &state_refs, START);
    for (i, p) in g.productions.iter().enumerate() {
        let sym = production_name(i);
        let (src, pred, z) = match &p.lhs {
            Lhs::Start => (START, Predicate::Top, 0),
            Lhs::Plain(a) => (a.as_str(), Predicate::Top, 0),
            Lhs::Pop(a) => (a.as_str(), Predicate::GtZero, -1),
            Lhs::Bottom(a) => (a.as_str(), Predicate::EqZero, 0),
        };
        let kids: Vec<String> = p
            .body
            .iter()
            .map(|item| match (&p.lhs, item) {
                (Lhs::Start, Item::Nonterminal(n, _)) => n.clone(),
                (_, Item::Nonterminal(n, idx)) => aux_state(n, *idx),
                (_, Item::Terminal(_)) => unreachable!("terminals were erased"),
            })
            .collect();
        let kids: Vec<&str> = kids.iter().map(String::as_str).collect();
        b = b.read(src, pred, z, &sym, &kids);
    }
    for (state, (n, idx)) in &aux {
        b = b.eps(state, Predicate::Top, idx.gammas as i64, n);
    }
    b.build().expect("the translation of a valid grammar is well formed")
}

/// Preorder label sequence of a tree over production symbols.
pub fn tree_to_production_string(t: &Tree) -> Vec<String> {
    t.preorder().into_iter().map(|s| s.to_string()).collect()
}

/// The tree over [`production_alphabet`] whose preorder is `steps`.
pub fn derivation_tree(g: &Icg, steps: &[usize]) -> Option<Tree> {
    let labels: Vec<Symbol> = steps.iter().map(|&i| Symbol::new(&production_name(i))).collect();
    Tree::from_preorder(&labels, &production_alphabet(g)).ok()
}
