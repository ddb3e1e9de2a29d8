//! Step relations of global and copy semantics, and bounded explicit-state
//! searches over them.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::automata::{Gocta, Rhs, StateId, Transition};
use crate::trees::{prefix_context, rank_sequence, Context, Position, Symbol, Tree};

pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

/// The node budget for explicit searches: `GOCTA_NODE_BUDGET` if set and
/// parseable, otherwise [`DEFAULT_NODE_BUDGET`].
pub fn default_node_budget() -> usize {
    std::env::var("GOCTA_NODE_BUDGET")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_NODE_BUDGET)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("search budget of {budget} configurations exhausted")]
    ResourceLimit { budget: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Semantics {
    Global,
    Copy,
}

/// A partial tree whose variables hold states, plus one shared counter.
/// `frontier[i]` is the state at variable `x(i+1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GlobalConfiguration {
    pub shape: Context,
    pub frontier: Vec<StateId>,
    pub counter: u64,
}

impl GlobalConfiguration {
    pub fn initial(a: &Gocta) -> Self {
        GlobalConfiguration {
            shape: Context::hole(),
            frontier: vec![a.initial()],
            counter: 0,
        }
    }

    pub fn is_final(&self) -> bool {
        self.frontier.is_empty()
    }

    pub fn tree(&self) -> Option<Tree> {
        self.shape.to_tree()
    }

    pub fn render(&self, a: &Gocta) -> String {
        self.shape
            .render_with(&|i| format!("<{}>", a.state_name(self.frontier[i])))
    }
}

fn contains_transition(a: &Gocta, t: &Transition) -> bool {
    a.transitions().binary_search(t).is_ok()
}

/// Applies `t` to the lexicographically first state of `c`.
pub fn step_global(a: &Gocta, c: &GlobalConfiguration, t: &Transition) -> Option<GlobalConfiguration> {
    let &first = c.frontier.first()?;
    if first != t.source || !contains_transition(a, t) {
        return None;
    }
    let counter = t.fire(c.counter)?;
    match &t.rhs {
        Rhs::Eps(q) => {
            let mut frontier = c.frontier.clone();
            frontier[0] = *q;
            Some(GlobalConfiguration {
                shape: c.shape.clone(),
                frontier,
                counter,
            })
        }
        Rhs::Read(sym, qs) => {
            let mut parts = Vec::with_capacity(c.frontier.len());
            parts.push(Context::shallow(sym, qs.len()));
            parts.extend((1..c.frontier.len()).map(|_| Context::hole()));
            let shape = c.shape.compose(&parts).expect("arity matches frontier");
            let mut frontier = qs.clone();
            frontier.extend_from_slice(&c.frontier[1..]);
            Some(GlobalConfiguration {
                shape,
                frontier,
                counter,
            })
        }
    }
}

/// All one-step successors, in canonical transition order.
pub fn successors_global(a: &Gocta, c: &GlobalConfiguration) -> Vec<(Transition, GlobalConfiguration)> {
    let Some(&first) = c.frontier.first() else {
        return Vec::new();
    };
    a.transitions_from(first)
        .filter_map(|t| step_global(a, c, t).map(|c2| (t.clone(), c2)))
        .collect()
}

/// A partial tree whose leaves may be `(state, counter)` pairs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CopyConfiguration {
    Id(StateId, u64),
    Node(Symbol, Vec<CopyConfiguration>),
}

impl CopyConfiguration {
    pub fn initial(a: &Gocta) -> Self {
        CopyConfiguration::Id(a.initial(), 0)
    }

    /// Positions of state leaves, in lexicographic order.
    pub fn id_positions(&self) -> Vec<Position> {
        fn go(c: &CopyConfiguration, here: Position, out: &mut Vec<Position>) {
            match c {
                CopyConfiguration::Id(..) => out.push(here),
                CopyConfiguration::Node(_, cs) => {
                    for (i, ch) in cs.iter().enumerate() {
                        go(ch, here.child(i + 1), out);
                    }
                }
            }
        }
        let mut out = Vec::new();
        go(self, Position::root(), &mut out);
        out
    }

    pub fn is_final(&self) -> bool {
        self.id_positions().is_empty()
    }

    pub fn tree(&self) -> Option<Tree> {
        match self {
            CopyConfiguration::Id(..) => None,
            CopyConfiguration::Node(s, cs) => Some(Tree {
                label: s.clone(),
                children: cs.iter().map(CopyConfiguration::tree).collect::<Option<_>>()?,
            }),
        }
    }

    pub fn max_counter(&self) -> u64 {
        match self {
            CopyConfiguration::Id(_, m) => *m,
            CopyConfiguration::Node(_, cs) => cs.iter().map(Self::max_counter).max().unwrap_or(0),
        }
    }

    fn at(&self, pos: &Position) -> Option<&CopyConfiguration> {
        let mut c = self;
        for &i in &pos.0 {
            match c {
                CopyConfiguration::Node(_, cs) => c = cs.get(i.checked_sub(1)?)?,
                CopyConfiguration::Id(..) => return None,
            }
        }
        Some(c)
    }

    fn replace(&self, pos: &[usize], with: CopyConfiguration) -> CopyConfiguration {
        match (pos.split_first(), self) {
            (None, _) => with,
            (Some((&i, rest)), CopyConfiguration::Node(s, cs)) => {
                let mut cs = cs.clone();
                cs[i - 1] = cs[i - 1].replace(rest, with);
                CopyConfiguration::Node(s.clone(), cs)
            }
            (Some(_), CopyConfiguration::Id(..)) => unreachable!("position checked by caller"),
        }
    }

    pub fn render(&self, a: &Gocta) -> String {
        match self {
            CopyConfiguration::Id(q, m) => format!("<{},{}>", a.state_name(*q), m),
            CopyConfiguration::Node(s, cs) if cs.is_empty() => s.to_string(),
            CopyConfiguration::Node(s, cs) => {
                let parts: Vec<String> = cs.iter().map(|c| c.render(a)).collect();
                format!("{}({})", s, parts.join(","))
            }
        }
    }
}

/// Applies `t` to the state leaf at `at`. A read hands the updated counter
/// to every child.
pub fn step_copy(
    a: &Gocta,
    c: &CopyConfiguration,
    t: &Transition,
    at: &Position,
) -> Option<CopyConfiguration> {
    let CopyConfiguration::Id(q, m) = c.at(at)? else {
        return None;
    };
    if *q != t.source || !contains_transition(a, t) {
        return None;
    }
    let m2 = t.fire(*m)?;
    let new = match &t.rhs {
        Rhs::Eps(q2) => CopyConfiguration::Id(*q2, m2),
        Rhs::Read(s, qs) => CopyConfiguration::Node(
            s.clone(),
            qs.iter().map(|&p| CopyConfiguration::Id(p, m2)).collect(),
        ),
    };
    Some(c.replace(&at.0, new))
}

/// Successors at every state leaf, ordered by position then transition.
pub fn successors_copy(a: &Gocta, c: &CopyConfiguration) -> Vec<(Position, Transition, CopyConfiguration)> {
    let mut out = Vec::new();
    for pos in c.id_positions() {
        let Some(CopyConfiguration::Id(q, _)) = c.at(&pos) else {
            continue;
        };
        for t in a.transitions_from(*q) {
            if let Some(c2) = step_copy(a, c, t, &pos) {
                out.push((pos.clone(), t.clone(), c2));
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step<C> {
    pub transition: Transition,
    pub at: Position,
    pub config: C,
}

/// A computation: a start configuration and the steps taken from it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace<C> {
    pub start: C,
    pub steps: Vec<Step<C>>,
}

pub type GlobalTrace = Trace<GlobalConfiguration>;
pub type CopyTrace = Trace<CopyConfiguration>;

impl<C> Trace<C> {
    pub fn configs(&self) -> impl Iterator<Item = &C> {
        std::iter::once(&self.start).chain(self.steps.iter().map(|s| &s.config))
    }

    pub fn last(&self) -> &C {
        self.steps.last().map_or(&self.start, |s| &s.config)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Largest counter value along a global trace.
pub fn maxcnt(trace: &GlobalTrace) -> u64 {
    trace.configs().map(|c| c.counter).max().unwrap_or(0)
}

/// Largest counter value held by any state leaf along a copy trace.
pub fn maxcnt_copy(trace: &CopyTrace) -> u64 {
    trace.configs().map(CopyConfiguration::max_counter).max().unwrap_or(0)
}

pub fn render_global_trace(a: &Gocta, trace: &GlobalTrace) -> String {
    let mut out = format!("{} | {} | -\n", trace.start.counter, trace.start.render(a));
    for s in &trace.steps {
        out.push_str(&format!(
            "{} | {} | {}\n",
            s.config.counter,
            s.config.render(a),
            a.render_transition(&s.transition)
        ));
    }
    out
}

pub fn render_copy_trace(a: &Gocta, trace: &CopyTrace) -> String {
    let mut out = format!("{} | {} | -\n", trace.start.max_counter(), trace.start.render(a));
    for s in &trace.steps {
        out.push_str(&format!(
            "{} | {} | {} @ {}\n",
            s.config.max_counter(),
            s.config.render(a),
            a.render_transition(&s.transition),
            s.at
        ));
    }
    out
}

/// Replays a global trace and checks it is a successful computation on `t`.
pub fn check_global_trace(a: &Gocta, t: &Tree, trace: &GlobalTrace) -> bool {
    if trace.start != GlobalConfiguration::initial(a) {
        return false;
    }
    let mut cur = trace.start.clone();
    for s in &trace.steps {
        let Some(first) = cur.shape.var_positions().into_iter().next() else {
            return false;
        };
        if s.at != first {
            return false;
        }
        match step_global(a, &cur, &s.transition) {
            Some(next) if next == s.config => cur = next,
            _ => return false,
        }
    }
    cur.tree().as_ref() == Some(t)
}

/// Replays a copy trace and checks it is a successful computation on `t`.
pub fn check_copy_trace(a: &Gocta, t: &Tree, trace: &CopyTrace) -> bool {
    if trace.start != CopyConfiguration::initial(a) {
        return false;
    }
    let mut cur = trace.start.clone();
    for s in &trace.steps {
        match step_copy(a, &cur, &s.transition, &s.at) {
            Some(next) if next == s.config => cur = next,
            _ => return false,
        }
    }
    cur.tree().as_ref() == Some(t)
}

/// Breadth-first search bookkeeping shared by the oracles.
struct Search<K> {
    index: HashMap<K, usize>,
    nodes: Vec<(K, Option<(usize, usize)>)>,
    queue: VecDeque<usize>,
    budget: usize,
}

impl<K: Clone + Eq + std::hash::Hash> Search<K> {
    fn new(start: K, budget: usize) -> Self {
        let mut s = Search {
            index: HashMap::new(),
            nodes: Vec::new(),
            queue: VecDeque::new(),
            budget,
        };
        s.index.insert(start.clone(), 0);
        s.nodes.push((start, None));
        s.queue.push_back(0);
        s
    }

    /// Records `key` as reached from `parent` by transition number `via`.
    fn visit(&mut self, key: K, parent: usize, via: usize) -> Result<Option<usize>, SemanticsError> {
        if self.index.contains_key(&key) {
            return Ok(None);
        }
        if self.nodes.len() >= self.budget {
            return Err(SemanticsError::ResourceLimit { budget: self.budget });
        }
        let id = self.nodes.len();
        self.index.insert(key.clone(), id);
        self.nodes.push((key, Some((parent, via))));
        self.queue.push_back(id);
        Ok(Some(id))
    }

    fn path(&self, mut id: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        while let Some((parent, via)) = self.nodes[id].1 {
            out.push((via, id));
            id = parent;
        }
        out.reverse();
        out
    }
}

/// Preorder labels and child counts of a tree, used to match reads.
struct Target {
    labels: Vec<Symbol>,
    ranks: Vec<usize>,
}

impl Target {
    fn new(t: &Tree) -> Self {
        Target {
            labels: t.preorder().into_iter().cloned().collect(),
            ranks: rank_sequence(t),
        }
    }

    fn matches(&self, i: usize, sym: &Symbol, rank: usize) -> bool {
        i < self.labels.len() && &self.labels[i] == sym && self.ranks[i] == rank
    }
}

/// Searches for a global computation on `t` whose counter never exceeds
/// `bound`. Returns the first one found in breadth-first order.
pub fn oracle_member_global(a: &Gocta, t: &Tree, bound: u64) -> Result<Option<GlobalTrace>, SemanticsError> {
    oracle_member_global_with_budget(a, t, bound, default_node_budget())
}

pub fn oracle_member_global_with_budget(
    a: &Gocta,
    t: &Tree,
    bound: u64,
    budget: usize,
) -> Result<Option<GlobalTrace>, SemanticsError> {
    type Key = (u32, u64, Box<[StateId]>);
    let target = Target::new(t);
    let n = target.labels.len();
    let transitions = a.transitions();
    let mut search: Search<Key> = Search::new((0, 0, Box::new([a.initial()])), budget);
    let mut goal = None;
    'outer: while let Some(id) = search.queue.pop_front() {
        let (i, m, frontier) = search.nodes[id].0.clone();
        let Some(&first) = frontier.first() else {
            continue;
        };
        for (ti, tr) in transitions.iter().enumerate() {
            if tr.source != first {
                continue;
            }
            let Some(m2) = tr.fire(m).filter(|&m2| m2 <= bound) else {
                continue;
            };
            let key: Key = match &tr.rhs {
                Rhs::Eps(q) => {
                    let mut f = frontier.clone();
                    f[0] = *q;
                    (i, m2, f)
                }
                Rhs::Read(s, qs) => {
                    if !target.matches(i as usize, s, qs.len()) {
                        continue;
                    }
                    let f: Vec<StateId> = qs.iter().chain(&frontier[1..]).copied().collect();
                    (i + 1, m2, f.into())
                }
            };
            let done = key.0 as usize == n && key.2.is_empty();
            if let Some(new) = search.visit(key, id, ti)? {
                if done {
                    goal = Some(new);
                    break 'outer;
                }
            }
        }
    }
    let Some(goal) = goal else {
        return Ok(None);
    };
    let make = |key: &Key| GlobalConfiguration {
        shape: prefix_context(t, key.0 as usize).expect("index within tree"),
        frontier: key.2.to_vec(),
        counter: key.1,
    };
    let start = make(&search.nodes[0].0);
    let mut steps = Vec::new();
    let mut prev = start.clone();
    for (via, id) in search.path(goal) {
        let config = make(&search.nodes[id].0);
        let at = prev.shape.var_positions().swap_remove(0);
        steps.push(Step {
            transition: transitions[via].clone(),
            at,
            config: config.clone(),
        });
        prev = config;
    }
    Ok(Some(Trace { start, steps }))
}

/// Searches for a copy computation on `t` in which no state leaf carries a
/// counter above `bound`, always rewriting the lexicographically first
/// state leaf.
pub fn oracle_member_copy(a: &Gocta, t: &Tree, bound: u64) -> Result<Option<CopyTrace>, SemanticsError> {
    oracle_member_copy_with_budget(a, t, bound, default_node_budget())
}

pub fn oracle_member_copy_with_budget(
    a: &Gocta,
    t: &Tree,
    bound: u64,
    budget: usize,
) -> Result<Option<CopyTrace>, SemanticsError> {
    type Key = (u32, Box<[(StateId, u64)]>);
    let target = Target::new(t);
    let n = target.labels.len();
    let transitions = a.transitions();
    let mut search: Search<Key> = Search::new((0, Box::new([(a.initial(), 0)])), budget);
    let mut goal = None;
    'outer: while let Some(id) = search.queue.pop_front() {
        let (i, frontier) = search.nodes[id].0.clone();
        let Some(&(first, m)) = frontier.first() else {
            continue;
        };
        for (ti, tr) in transitions.iter().enumerate() {
            if tr.source != first {
                continue;
            }
            let Some(m2) = tr.fire(m).filter(|&m2| m2 <= bound) else {
                continue;
            };
            let key: Key = match &tr.rhs {
                Rhs::Eps(q) => {
                    let mut f = frontier.clone();
                    f[0] = (*q, m2);
                    (i, f)
                }
                Rhs::Read(s, qs) => {
                    if !target.matches(i as usize, s, qs.len()) {
                        continue;
                    }
                    let f: Vec<(StateId, u64)> = qs
                        .iter()
                        .map(|&q| (q, m2))
                        .chain(frontier[1..].iter().copied())
                        .collect();
                    (i + 1, f.into())
                }
            };
            let done = key.0 as usize == n && key.1.is_empty();
            if let Some(new) = search.visit(key, id, ti)? {
                if done {
                    goal = Some(new);
                    break 'outer;
                }
            }
        }
    }
    let Some(goal) = goal else {
        return Ok(None);
    };
    // Rebuild explicit configurations by replaying along the path.
    let start = CopyConfiguration::initial(a);
    let mut cur = start.clone();
    let mut steps = Vec::new();
    for (via, _) in search.path(goal) {
        let at = cur.id_positions().swap_remove(0);
        let tr = &transitions[via];
        let next = step_copy(a, &cur, tr, &at).expect("path replays");
        steps.push(Step {
            transition: tr.clone(),
            at,
            config: next.clone(),
        });
        cur = next;
    }
    Ok(Some(Trace { start, steps }))
}

/// Copy-semantics membership by a search that may rewrite any state leaf.
/// Slower than [`oracle_member_copy`]; used to cross-check it.
pub fn oracle_member_copy_any_position(
    a: &Gocta,
    t: &Tree,
    bound: u64,
    budget: usize,
) -> Result<bool, SemanticsError> {
    let mut seen = std::collections::HashSet::new();
    let mut queue = VecDeque::new();
    let start = CopyConfiguration::initial(a);
    seen.insert(start.clone());
    queue.push_back(start);
    while let Some(c) = queue.pop_front() {
        if c.tree().as_ref() == Some(t) {
            return Ok(true);
        }
        for (pos, _, next) in successors_copy(a, &c) {
            let fits = match next.at(&pos) {
                Some(CopyConfiguration::Node(s, cs)) => t
                    .subtree(&pos)
                    .is_some_and(|st| &st.label == s && st.children.len() == cs.len()),
                _ => true,
            };
            if !fits || next.max_counter() > bound {
                continue;
            }
            if seen.len() >= budget {
                return Err(SemanticsError::ResourceLimit { budget });
            }
            if seen.insert(next.clone()) {
                queue.push_back(next);
            }
        }
    }
    Ok(false)
}

/// All trees of at most `max_size` nodes accepted with counters bounded by
/// `bound`, in canonical order.
pub fn enumerate_language(
    a: &Gocta,
    max_size: usize,
    semantics: Semantics,
    bound: u64,
) -> Result<BTreeSet<Tree>, SemanticsError> {
    enumerate_language_with_budget(a, max_size, semantics, bound, default_node_budget())
}

pub fn enumerate_language_with_budget(
    a: &Gocta,
    max_size: usize,
    semantics: Semantics,
    bound: u64,
    budget: usize,
) -> Result<BTreeSet<Tree>, SemanticsError> {
    // A frontier slot carries its own counter under copy semantics; under
    // global semantics only the first slot's counter is meaningful and the
    // rest are kept at 0.
    type Key = (Vec<Symbol>, Vec<(StateId, u64)>, u64);
    let mut out = BTreeSet::new();
    let start: Key = (Vec::new(), vec![(a.initial(), 0)], 0);
    let mut seen = std::collections::HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(start.clone());
    queue.push_back(start);
    while let Some((read, frontier, global)) = queue.pop_front() {
        let Some(&(first, own)) = frontier.first() else {
            out.insert(Tree::from_preorder(&read, a.alphabet()).expect("complete preorder"));
            continue;
        };
        let m = match semantics {
            Semantics::Global => global,
            Semantics::Copy => own,
        };
        for tr in a.transitions_from(first) {
            let Some(m2) = tr.fire(m).filter(|&m2| m2 <= bound) else {
                continue;
            };
            let slot_counter = match semantics {
                Semantics::Global => 0,
                Semantics::Copy => m2,
            };
            let next: Key = match &tr.rhs {
                Rhs::Eps(q) => {
                    let mut f = frontier.clone();
                    f[0] = (*q, slot_counter);
                    (read.clone(), f, m2)
                }
                Rhs::Read(s, qs) => {
                    if read.len() + frontier.len() + qs.len() > max_size {
                        continue;
                    }
                    let mut r = read.clone();
                    r.push(s.clone());
                    let f = qs
                        .iter()
                        .map(|&q| (q, slot_counter))
                        .chain(frontier[1..].iter().copied())
                        .collect();
                    (r, f, m2)
                }
            };
            let next = match semantics {
                Semantics::Global => next,
                Semantics::Copy => (next.0, next.1, 0),
            };
            if seen.contains(&next) {
                continue;
            }
            if seen.len() >= budget {
                return Err(SemanticsError::ResourceLimit { budget });
            }
            seen.insert(next.clone());
            queue.push_back(next);
        }
    }
    Ok(out)
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Semantics::Global => "global",
            Semantics::Copy => "copy",
        })
    }
}
