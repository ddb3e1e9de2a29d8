//! Membership decision for global semantics.
//!
//! The input automaton is made 0-accepting and normalized. A tree is then
//! accepted iff the k-bounded behaviour automaton accepts it for
//! `k = |ξ|·|Q|²+1`. That automaton is never built: for a subtree `v`, a
//! state `q` and a set `S` of entry counters, [`Decider`] computes the set
//! of exit counters reachable by computations on `v` that stay within
//! `[0, k]`, which is exactly the set of `j` such that some `(q, i, j)`
//! with `i ∈ S` accepts `v`.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::automata::{Fta, Gocta, Predicate, Rhs, StateId};
use crate::semantics::{default_node_budget, oracle_member_global_with_budget, GlobalTrace, SemanticsError};
use crate::transforms::{make_zero_accepting, normalize, TransformError};
use crate::trees::{Symbol, Tree, TreeError};

/// Default cap on memo entries of a single decision.
pub const DEFAULT_MEMO_BUDGET: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecideError {
    #[error("automaton is not normalized")]
    NotNormalized,
    #[error("automaton has ε-transitions")]
    HasEpsilon,
    #[error("counter bound overflows 64 bits")]
    Overflow,
    #[error("decision needed more than {budget} memo entries")]
    ResourceLimit { budget: usize },
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Search(#[from] SemanticsError),
    #[error("tree does not fit the automaton's alphabet: {0}")]
    Alphabet(#[from] TreeError),
}

/// The counter bound for a normalized, 0-accepting automaton: a tree is
/// accepted iff it is accepted by a computation whose counter never
/// exceeds `|t|·|Q|²+1`.
pub fn counter_bound(a: &Gocta, t: &Tree) -> Result<u64, DecideError> {
    if !a.is_normalized() {
        return Err(DecideError::NotNormalized);
    }
    let q = a.state_count() as u64;
    (t.size() as u64)
        .checked_mul(q.checked_mul(q).ok_or(DecideError::Overflow)?)
        .and_then(|x| x.checked_add(1))
        .ok_or(DecideError::Overflow)
}

/// A set of naturals as sorted, disjoint, non-adjacent closed intervals.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct CounterSet {
    ranges: Vec<(u64, u64)>,
}

impl CounterSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(x: u64) -> Self {
        Self::interval(x, x)
    }

    pub fn interval(lo: u64, hi: u64) -> Self {
        if lo > hi {
            return Self::new();
        }
        CounterSet {
            ranges: vec![(lo, hi)],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    pub fn ranges(&self) -> &[(u64, u64)] {
        &self.ranges
    }

    pub fn len(&self) -> u64 {
        self.ranges.iter().map(|(lo, hi)| hi - lo + 1).sum()
    }

    pub fn min(&self) -> Option<u64> {
        self.ranges.first().map(|r| r.0)
    }

    pub fn max(&self) -> Option<u64> {
        self.ranges.last().map(|r| r.1)
    }

    pub fn contains(&self, x: u64) -> bool {
        let i = self.ranges.partition_point(|r| r.1 < x);
        self.ranges.get(i).is_some_and(|r| r.0 <= x)
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.ranges.iter().flat_map(|&(lo, hi)| lo..=hi)
    }

    pub fn insert_range(&mut self, lo: u64, hi: u64) {
        if lo > hi {
            return;
        }
        // First range that could touch [lo, hi], and the first beyond it.
        let start = self.ranges.partition_point(|r| r.1.saturating_add(1) < lo);
        let end = self
            .ranges
            .partition_point(|r| r.0 <= hi.saturating_add(1));
        if start == end {
            self.ranges.insert(start, (lo, hi));
        } else {
            let nlo = lo.min(self.ranges[start].0);
            let nhi = hi.max(self.ranges[end - 1].1);
            self.ranges.splice(start..end, [(nlo, nhi)]);
        }
    }

    pub fn insert(&mut self, x: u64) {
        self.insert_range(x, x);
    }

    pub fn union_with(&mut self, other: &CounterSet) {
        if other.ranges.len() * 4 < self.ranges.len() {
            for &(lo, hi) in &other.ranges {
                self.insert_range(lo, hi);
            }
            return;
        }
        let mut merged: Vec<(u64, u64)> = Vec::with_capacity(self.ranges.len() + other.ranges.len());
        let (mut i, mut j) = (0, 0);
        while i < self.ranges.len() || j < other.ranges.len() {
            let next = if j == other.ranges.len()
                || (i < self.ranges.len() && self.ranges[i].0 <= other.ranges[j].0)
            {
                i += 1;
                self.ranges[i - 1]
            } else {
                j += 1;
                other.ranges[j - 1]
            };
            match merged.last_mut() {
                Some(last) if last.1.saturating_add(1) >= next.0 => last.1 = last.1.max(next.1),
                _ => merged.push(next),
            }
        }
        self.ranges = merged;
    }

    /// Elements of `self` not in `other`.
    pub fn minus(&self, other: &CounterSet) -> CounterSet {
        let mut out = Vec::new();
        for &(lo, hi) in &self.ranges {
            let mut cur = lo;
            let mut j = other.ranges.partition_point(|r| r.1 < lo);
            while cur <= hi {
                match other.ranges.get(j) {
                    Some(&(olo, ohi)) if olo <= hi => {
                        if olo > cur {
                            out.push((cur, olo - 1));
                        }
                        if ohi >= hi {
                            break;
                        }
                        cur = cur.max(ohi + 1);
                        j += 1;
                    }
                    _ => {
                        out.push((cur, hi));
                        break;
                    }
                }
            }
        }
        CounterSet { ranges: out }
    }

    pub fn intersect_interval(&self, lo: u64, hi: u64) -> CounterSet {
        let mut out = Vec::new();
        let start = self.ranges.partition_point(|r| r.1 < lo);
        for &(a, b) in &self.ranges[start..] {
            if a > hi {
                break;
            }
            out.push((a.max(lo), b.min(hi)));
        }
        CounterSet { ranges: out }
    }

    fn filter(&self, p: Predicate, k: u64) -> CounterSet {
        match p {
            Predicate::EqZero => self.intersect_interval(0, 0),
            Predicate::GtZero => self.intersect_interval(1, k),
            Predicate::Top => self.intersect_interval(0, k),
        }
    }

    /// `{x + z | x ∈ self} ∩ [0, k]`.
    fn shift(&self, z: i64, k: u64) -> CounterSet {
        let mut out = Vec::with_capacity(self.ranges.len());
        for &(lo, hi) in &self.ranges {
            let nlo = (lo as i128 + z as i128).max(0);
            let nhi = (hi as i128 + z as i128).min(k as i128);
            if nlo <= nhi {
                out.push((nlo as u64, nhi as u64));
            }
        }
        CounterSet { ranges: out }
    }
}

impl fmt::Debug for CounterSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .ranges
            .iter()
            .map(|&(lo, hi)| if lo == hi { lo.to_string() } else { format!("{lo}..={hi}") })
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

impl FromIterator<u64> for CounterSet {
    fn from_iter<I: IntoIterator<Item = u64>>(iter: I) -> Self {
        let mut s = CounterSet::new();
        for x in iter {
            s.insert(x);
        }
        s
    }
}

/// Subtrees shared by structure, children before parents.
struct Arena {
    nodes: Vec<(Symbol, Vec<usize>)>,
}

impl Arena {
    fn build(t: &Tree) -> (Arena, usize) {
        let mut arena = Arena { nodes: Vec::new() };
        let mut index = HashMap::new();
        let root = arena.add(t, &mut index);
        (arena, root)
    }

    fn add(&mut self, t: &Tree, index: &mut HashMap<(Symbol, Vec<usize>), usize>) -> usize {
        let kids: Vec<usize> = t.children.iter().map(|c| self.add(c, index)).collect();
        let key = (t.label.clone(), kids);
        if let Some(&id) = index.get(&key) {
            return id;
        }
        self.nodes.push(key.clone());
        index.insert(key, self.nodes.len() - 1);
        self.nodes.len() - 1
    }
}

/// The normalized automaton indexed for the exit-set computation.
struct Tables {
    eps: Vec<Vec<(Predicate, i64, usize)>>,
    reads: Vec<HashMap<Symbol, Vec<Vec<usize>>>>,
}

impl Tables {
    fn new(a: &Gocta) -> Self {
        let n = a.state_count();
        let mut eps = vec![Vec::new(); n];
        let mut reads: Vec<HashMap<Symbol, Vec<Vec<usize>>>> = vec![HashMap::new(); n];
        for t in a.transitions() {
            let q = t.source.index();
            match &t.rhs {
                Rhs::Eps(q2) => eps[q].push((t.predicate, t.instruction, q2.index())),
                Rhs::Read(s, qs) => reads[q]
                    .entry(s.clone())
                    .or_default()
                    .push(qs.iter().map(|q| q.index()).collect()),
            }
        }
        Tables { eps, reads }
    }
}

struct Run<'a> {
    tables: &'a Tables,
    arena: Arena,
    k: u64,
    memo: HashMap<(usize, usize, CounterSet), CounterSet>,
    budget: usize,
}

impl Run<'_> {
    /// States reachable from `(q, s)` by ε-moves within `[0, k]`, each with
    /// the set of counters it is reached with.
    fn closure(&self, q: usize, s: &CounterSet) -> Vec<(usize, CounterSet)> {
        let n = self.tables.eps.len();
        let mut reach: Vec<CounterSet> = vec![CounterSet::new(); n];
        let mut pending: Vec<CounterSet> = vec![CounterSet::new(); n];
        let mut queued = vec![false; n];
        let mut touched = vec![q];
        let mut queue = VecDeque::from([q]);
        reach[q] = s.clone();
        pending[q] = s.clone();
        queued[q] = true;
        while let Some(st) = queue.pop_front() {
            queued[st] = false;
            let mut delta = std::mem::take(&mut pending[st]);
            // Unit self-loops are closed in one go.
            for &(p, z, to) in &self.tables.eps[st] {
                if to != st || z == 0 {
                    continue;
                }
                let dom = delta.filter(p, self.k);
                let acc = match (z, p) {
                    (1, Predicate::EqZero) | (-1, Predicate::EqZero) => dom.shift(z, self.k),
                    (1, _) => dom.min().map_or_else(CounterSet::new, |m| CounterSet::interval(m, self.k)),
                    (-1, _) => dom.max().map_or_else(CounterSet::new, |m| CounterSet::interval(0, m)),
                    _ => continue,
                };
                let new = acc.minus(&reach[st]);
                reach[st].union_with(&new);
                delta.union_with(&new);
            }
            for &(p, z, to) in &self.tables.eps[st] {
                let img = delta.filter(p, self.k).shift(z, self.k);
                let new = img.minus(&reach[to]);
                if new.is_empty() {
                    continue;
                }
                if reach[to].is_empty() {
                    touched.push(to);
                }
                reach[to].union_with(&new);
                pending[to].union_with(&new);
                if !queued[to] {
                    queued[to] = true;
                    queue.push_back(to);
                }
            }
        }
        touched.sort_unstable();
        touched.dedup();
        touched
            .into_iter()
            .map(|st| (st, std::mem::take(&mut reach[st])))
            .collect()
    }

    /// Exit counters of computations on `node` entered in `q` with a counter
    /// from `s`.
    fn exits(&mut self, node: usize, q: usize, s: &CounterSet) -> Result<CounterSet, DecideError> {
        let key = (node, q, s.clone());
        if let Some(r) = self.memo.get(&key) {
            return Ok(r.clone());
        }
        if self.memo.len() >= self.budget {
            return Err(DecideError::ResourceLimit { budget: self.budget });
        }
        let (label, kids) = self.arena.nodes[node].clone();
        let mut result = CounterSet::new();
        for (st, set) in self.closure(q, s) {
            let Some(rules) = self.tables.reads[st].get(&label) else {
                continue;
            };
            for rule in rules {
                if rule.len() != kids.len() {
                    continue;
                }
                let mut cur = set.clone();
                for (&child, &cq) in kids.iter().zip(rule) {
                    cur = self.exits(child, cq, &cur)?;
                    if cur.is_empty() {
                        break;
                    }
                }
                result.union_with(&cur);
            }
        }
        self.memo.insert(key, result.clone());
        Ok(result)
    }
}

/// Whether the k-bounded behaviour automaton of the normalized automaton
/// `a` accepts `t`: some computation on `t` ends with counter 0 and never
/// exceeds `k`.
pub fn behaviour_member(a: &Gocta, t: &Tree, k: u64) -> Result<bool, DecideError> {
    if !a.is_normalized() {
        return Err(DecideError::NotNormalized);
    }
    let tables = Tables::new(a);
    Ok(exit_set(&tables, a.initial().index(), t, k, DEFAULT_MEMO_BUDGET)?.0.contains(0))
}

fn exit_set(
    tables: &Tables,
    initial: usize,
    t: &Tree,
    k: u64,
    budget: usize,
) -> Result<(CounterSet, usize), DecideError> {
    let work = move || {
        let (arena, root) = Arena::build(t);
        let mut run = Run {
            tables,
            arena,
            k,
            memo: HashMap::new(),
            budget,
        };
        let exits = run.exits(root, initial, &CounterSet::singleton(0))?;
        Ok((exits, run.memo.len()))
    };
    // Deep trees recurse deeply; give them a larger stack.
    if t.height() > 2_000 {
        std::thread::scope(|s| {
            std::thread::Builder::new()
                .stack_size(1 << 30)
                .spawn_scoped(s, work)
                .expect("spawn decider thread")
                .join()
                .expect("decider thread panicked")
        })
    } else {
        work()
    }
}

/// Outcome of one membership decision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decision {
    pub member: bool,
    /// The counter bound `k` the decision was made at.
    pub bound: u64,
    /// Memo entries used.
    pub work: usize,
}

/// Decides membership for a fixed automaton, reusing its transformed form
/// across trees.
pub struct Decider {
    transformed: Gocta,
    tables: Tables,
    budget: usize,
}

impl Decider {
    pub fn new(a: &Gocta) -> Result<Decider, DecideError> {
        let transformed = if a.is_normalized() && a.is_certified_zero_accepting() {
            a.clone()
        } else {
            normalize(&make_zero_accepting(a))?
        };
        let tables = Tables::new(&transformed);
        Ok(Decider {
            transformed,
            tables,
            budget: DEFAULT_MEMO_BUDGET,
        })
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    /// The normalized, 0-accepting automaton decisions are made on.
    pub fn transformed(&self) -> &Gocta {
        &self.transformed
    }

    pub fn bound(&self, t: &Tree) -> Result<u64, DecideError> {
        counter_bound(&self.transformed, t)
    }

    pub fn decide(&self, t: &Tree) -> Result<Decision, DecideError> {
        let bound = self.bound(t)?;
        self.decide_at(t, bound)
    }

    /// Decides with an explicit counter bound instead of the default one.
    pub fn decide_at(&self, t: &Tree, bound: u64) -> Result<Decision, DecideError> {
        t.check_against(self.transformed.alphabet())?;
        let (exits, work) = exit_set(&self.tables, self.transformed.initial().index(), t, bound, self.budget)?;
        Ok(Decision {
            member: exits.contains(0),
            bound,
            work,
        })
    }

    pub fn member(&self, t: &Tree) -> Result<bool, DecideError> {
        Ok(self.decide(t)?.member)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// The implicit behaviour automaton.
    Behaviour,
    /// Explicit search over configurations of the input automaton, with
    /// counters capped at the same bound. Produces a witness trace.
    Oracle,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Behaviour => "behaviour",
            Method::Oracle => "oracle",
        })
    }
}

#[derive(Clone, Debug)]
pub struct MemberReport {
    pub verdict: bool,
    pub method: Method,
    /// `|t|·|Q'|²+1` for the transformed automaton `Q'`.
    pub bound_used: u64,
    pub timing: Duration,
    pub witness: Option<GlobalTrace>,
}

/// Whether `t` is in the language of `a` under global semantics.
pub fn member(a: &Gocta, t: &Tree) -> Result<MemberReport, DecideError> {
    member_with(a, t, Method::Behaviour)
}

pub fn member_with(a: &Gocta, t: &Tree, method: Method) -> Result<MemberReport, DecideError> {
    let start = Instant::now();
    t.check_against(a.alphabet())?;
    let d = Decider::new(a)?;
    let bound = d.bound(t)?;
    let (verdict, witness) = match method {
        Method::Behaviour => (d.decide_at(t, bound)?.member, None),
        Method::Oracle => {
            // Both transforms keep every computation's counter values within
            // the range of the computation they simulate, so the bound for
            // the transformed automaton also bounds some run of `a`.
            let w = oracle_member_global_with_budget(a, t, bound, default_node_budget())?;
            (w.is_some(), w)
        }
    };
    Ok(MemberReport {
        verdict,
        method,
        bound_used: bound,
        timing: start.elapsed(),
        witness,
    })
}

/// `|{(n1,n2,n3) ∈ [-k,k]³ : n1+n2+n3 = 0}|`, by enumeration.
pub fn balanced_triples(k: u64) -> u64 {
    let k = k as i64;
    let mut count = 0;
    for n1 in -k..=k {
        for n2 in -k..=k {
            for n3 in -k..=k {
                if n1 + n2 + n3 == 0 {
                    count += 1;
                }
            }
        }
    }
    count
}

/// Bottom-up run of an ε-free FTA.
pub fn fta_member(f: &Fta, t: &Tree) -> Result<bool, DecideError> {
    if f.has_eps() {
        return Err(DecideError::HasEpsilon);
    }
    Ok(fta_run(f, t))
}

/// Bottom-up run of an FTA that may have ε-transitions.
pub fn fta_member_closure(f: &Fta, t: &Tree) -> bool {
    fta_run(f, t)
}

fn fta_run(f: &Fta, t: &Tree) -> bool {
    let (arena, root) = Arena::build(t);
    let n = f.state_count();
    let mut eps_into: Vec<Vec<StateId>> = vec![Vec::new(); n];
    let mut reads: HashMap<&Symbol, Vec<(StateId, &[StateId])>> = HashMap::new();
    for tr in f.transitions() {
        match &tr.rhs {
            Rhs::Eps(q2) => eps_into[q2.index()].push(tr.source),
            Rhs::Read(s, qs) => reads.entry(s).or_default().push((tr.source, qs)),
        }
    }
    let mut sets: Vec<Vec<bool>> = Vec::with_capacity(arena.nodes.len());
    for (label, kids) in &arena.nodes {
        let mut here = vec![false; n];
        let mut stack = Vec::new();
        for (q, qs) in reads.get(label).map_or(&[][..], Vec::as_slice) {
            if qs.len() == kids.len()
                && qs.iter().zip(kids).all(|(q, &c)| sets[c][q.index()])
                && !here[q.index()]
            {
                here[q.index()] = true;
                stack.push(*q);
            }
        }
        while let Some(q) = stack.pop() {
            for &p in &eps_into[q.index()] {
                if !here[p.index()] {
                    here[p.index()] = true;
                    stack.push(p);
                }
            }
        }
        sets.push(here);
    }
    sets[root][f.initial().index()]
}
