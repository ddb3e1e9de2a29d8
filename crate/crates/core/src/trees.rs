//! Ranked trees, contexts and lexicographic positions.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// A symbol name. Cheap to clone and compared by its string.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Whether `name` is a legal symbol name: an identifier or `#`.
    pub fn is_valid_name(name: &str) -> bool {
        if name == "#" {
            return true;
        }
        let mut chars = name.chars();
        match chars.next() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
            _ => return false,
        }
        chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

/// A finite map from symbols to ranks.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RankedAlphabet {
    ranks: BTreeMap<Symbol, usize>,
}

impl RankedAlphabet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds an alphabet from `(name, rank)` pairs. Later duplicates win.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, usize)>) -> Self {
        let mut alphabet = Self::new();
        for (name, rank) in pairs {
            alphabet.insert(Symbol::new(name), rank);
        }
        alphabet
    }

    pub fn insert(&mut self, symbol: Symbol, rank: usize) -> Option<usize> {
        self.ranks.insert(symbol, rank)
    }

    pub fn rank(&self, symbol: &Symbol) -> Option<usize> {
        self.ranks.get(symbol).copied()
    }

    pub fn rank_of(&self, name: &str) -> Option<usize> {
        self.ranks.get(name).copied()
    }

    pub fn symbol(&self, name: &str) -> Option<Symbol> {
        self.ranks.get_key_value(name).map(|(s, _)| s.clone())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.ranks.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn max_rank(&self) -> usize {
        self.ranks.values().copied().max().unwrap_or(0)
    }

    /// Symbols in name order, with their ranks.
    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, usize)> {
        self.ranks.iter().map(|(s, r)| (s, *r))
    }

    pub fn symbols_of_rank(&self, rank: usize) -> impl Iterator<Item = &Symbol> {
        self.ranks
            .iter()
            .filter(move |(_, r)| **r == rank)
            .map(|(s, _)| s)
    }
}

impl std::borrow::Borrow<str> for Symbol {
    fn borrow(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("symbol `{symbol}` has rank {expected} but was given {found} children")]
    RankMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("expected {expected} replacement contexts, got {found}")]
    ArityMismatch { expected: usize, found: usize },
}

/// A node address: the sequence of 1-based child indices from the root.
///
/// The derived ordering on the underlying vector is exactly the
/// lexicographic order on positions, with a prefix ordered first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position(pub Vec<usize>);

impl Position {
    pub fn root() -> Self {
        Position(Vec::new())
    }

    pub fn child(&self, i: usize) -> Self {
        let mut p = self.0.clone();
        p.push(i);
        Position(p)
    }

    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        let sep = if self.0.iter().all(|&i| i < 10) { "" } else { "." };
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        f.write_str(&parts.join(sep))
    }
}

/// A ranked tree. The derived ordering is used as the canonical order
/// of tree sets.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tree {
    pub label: Symbol,
    pub children: Vec<Tree>,
}

impl Tree {
    pub fn leaf(label: &str) -> Self {
        Tree {
            label: Symbol::new(label),
            children: Vec::new(),
        }
    }

    pub fn node(label: &str, children: Vec<Tree>) -> Self {
        Tree {
            label: Symbol::new(label),
            children,
        }
    }

    /// Parses the term syntax `name(child, ...)`. No alphabet check.
    pub fn parse(text: &str) -> Result<Tree, TreeError> {
        let mut p = TermParser::new(text);
        let t = p.tree()?;
        p.skip_ws();
        if p.pos < p.src.len() {
            return Err(p.error("trailing input"));
        }
        Ok(t)
    }

    /// Parses a tree and checks every symbol and rank against `alphabet`.
    pub fn parse_with(text: &str, alphabet: &RankedAlphabet) -> Result<Tree, TreeError> {
        let t = Tree::parse(text)?;
        t.check_against(alphabet)?;
        Ok(t)
    }

    pub fn check_against(&self, alphabet: &RankedAlphabet) -> Result<(), TreeError> {
        let rank = alphabet
            .rank(&self.label)
            .ok_or_else(|| TreeError::UnknownSymbol(self.label.to_string()))?;
        if rank != self.children.len() {
            return Err(TreeError::RankMismatch {
                symbol: self.label.to_string(),
                expected: rank,
                found: self.children.len(),
            });
        }
        self.children.iter().try_for_each(|c| c.check_against(alphabet))
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Tree::size).sum::<usize>()
    }

    pub fn height(&self) -> usize {
        1 + self.children.iter().map(Tree::height).max().unwrap_or(0)
    }

    /// Node labels in preorder, which is lexicographic order of positions.
    pub fn preorder(&self) -> Vec<&Symbol> {
        let mut out = Vec::with_capacity(self.size());
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            out.push(&t.label);
            stack.extend(t.children.iter().rev());
        }
        out
    }

    /// All positions in lexicographic order.
    pub fn positions(&self) -> Vec<Position> {
        fn go(t: &Tree, here: Position, out: &mut Vec<Position>) {
            out.push(here.clone());
            for (i, c) in t.children.iter().enumerate() {
                go(c, here.child(i + 1), out);
            }
        }
        let mut out = Vec::with_capacity(self.size());
        go(self, Position::root(), &mut out);
        out
    }

    pub fn subtree(&self, pos: &Position) -> Option<&Tree> {
        let mut t = self;
        for &i in &pos.0 {
            t = t.children.get(i.checked_sub(1)?)?;
        }
        Some(t)
    }

    /// Occurrences of `symbol`.
    pub fn count_symbol(&self, symbol: &str) -> usize {
        self.preorder()
            .into_iter()
            .filter(|s| s.as_str() == symbol)
            .count()
    }

    /// Rebuilds a tree from its preorder label sequence.
    pub fn from_preorder(labels: &[Symbol], alphabet: &RankedAlphabet) -> Result<Tree, TreeError> {
        fn go(
            labels: &[Symbol],
            at: &mut usize,
            alphabet: &RankedAlphabet,
        ) -> Result<Tree, TreeError> {
            let label = labels.get(*at).ok_or(TreeError::Parse {
                offset: *at,
                message: "preorder sequence ends early".into(),
            })?;
            *at += 1;
            let rank = alphabet
                .rank(label)
                .ok_or_else(|| TreeError::UnknownSymbol(label.to_string()))?;
            let mut children = Vec::with_capacity(rank);
            for _ in 0..rank {
                children.push(go(labels, at, alphabet)?);
            }
            Ok(Tree {
                label: label.clone(),
                children,
            })
        }
        let mut at = 0;
        let t = go(labels, &mut at, alphabet)?;
        if at != labels.len() {
            return Err(TreeError::Parse {
                offset: at,
                message: "preorder sequence has trailing symbols".into(),
            });
        }
        Ok(t)
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)?;
        if !self.children.is_empty() {
            f.write_str("(")?;
            for (i, c) in self.children.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{c}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl std::str::FromStr for Tree {
    type Err = TreeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Tree::parse(s)
    }
}

/// A tree with variables `x1 .. xk` at some leaves, each used once and
/// numbered left to right.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Context {
    Var(usize),
    Node(Symbol, Vec<Context>),
}

impl Context {
    /// The context `x1`.
    pub fn hole() -> Self {
        Context::Var(0)
    }

    /// `symbol(x1, .., xn)`.
    pub fn shallow(symbol: &Symbol, rank: usize) -> Self {
        Context::Node(symbol.clone(), (0..rank).map(Context::Var).collect())
    }

    pub fn var_count(&self) -> usize {
        match self {
            Context::Var(_) => 1,
            Context::Node(_, cs) => cs.iter().map(Context::var_count).sum(),
        }
    }

    /// Positions of the variables, in lexicographic order.
    pub fn var_positions(&self) -> Vec<Position> {
        fn go(c: &Context, here: Position, out: &mut Vec<Position>) {
            match c {
                Context::Var(_) => out.push(here),
                Context::Node(_, cs) => {
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

    pub fn to_tree(&self) -> Option<Tree> {
        match self {
            Context::Var(_) => None,
            Context::Node(s, cs) => Some(Tree {
                label: s.clone(),
                children: cs.iter().map(Context::to_tree).collect::<Option<_>>()?,
            }),
        }
    }

    /// Substitutes `parts[i]` for `x(i+1)` and renumbers the variables of the
    /// result left to right.
    pub fn compose(&self, parts: &[Context]) -> Result<Context, TreeError> {
        let expected = self.var_count();
        if parts.len() != expected {
            return Err(TreeError::ArityMismatch {
                expected,
                found: parts.len(),
            });
        }
        fn subst(c: &Context, parts: &[Context], next: &mut usize) -> Context {
            match c {
                Context::Var(i) => renumber(&parts[*i], next),
                Context::Node(s, cs) => {
                    Context::Node(s.clone(), cs.iter().map(|ch| subst(ch, parts, next)).collect())
                }
            }
        }
        fn renumber(c: &Context, next: &mut usize) -> Context {
            match c {
                Context::Var(_) => {
                    *next += 1;
                    Context::Var(*next - 1)
                }
                Context::Node(s, cs) => {
                    Context::Node(s.clone(), cs.iter().map(|ch| renumber(ch, next)).collect())
                }
            }
        }
        let mut next = 0;
        Ok(subst(self, parts, &mut next))
    }

    /// Renders with each variable replaced by `var(i)`.
    pub fn render_with(&self, var: &dyn Fn(usize) -> String) -> String {
        let mut out = String::new();
        fn go(c: &Context, var: &dyn Fn(usize) -> String, out: &mut String) {
            match c {
                Context::Var(i) => out.push_str(&var(*i)),
                Context::Node(s, cs) => {
                    out.push_str(s.as_str());
                    if !cs.is_empty() {
                        out.push('(');
                        for (i, ch) in cs.iter().enumerate() {
                            if i > 0 {
                                out.push(',');
                            }
                            go(ch, var, out);
                        }
                        out.push(')');
                    }
                }
            }
        }
        go(self, var, &mut out);
        out
    }
}

impl From<&Tree> for Context {
    fn from(t: &Tree) -> Self {
        Context::Node(t.label.clone(), t.children.iter().map(Context::from).collect())
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_with(&|i| format!("x{}", i + 1)))
    }
}

impl fmt::Debug for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// The context made of the `i` lexicographically first nodes of `t`, with
/// a variable at every child slot not among them.
pub fn prefix_context(t: &Tree, i: usize) -> Result<Context, TreeError> {
    let size = t.size();
    if i > size {
        return Err(TreeError::IndexOutOfRange { index: i, max: size });
    }
    fn go(t: &Tree, budget: &mut usize, next_var: &mut usize) -> Context {
        if *budget == 0 {
            *next_var += 1;
            return Context::Var(*next_var - 1);
        }
        *budget -= 1;
        Context::Node(
            t.label.clone(),
            t.children.iter().map(|c| go(c, budget, next_var)).collect(),
        )
    }
    let mut budget = i;
    let mut next_var = 0;
    Ok(go(t, &mut budget, &mut next_var))
}

/// Number of variables of `prefix_context(t, i)`.
pub fn frontier_width(t: &Tree, i: usize) -> Result<usize, TreeError> {
    let labels = t.preorder();
    if i > labels.len() {
        return Err(TreeError::IndexOutOfRange {
            index: i,
            max: labels.len(),
        });
    }
    let ranks = rank_sequence(t);
    Ok(1 + ranks[..i].iter().sum::<usize>() - i)
}

/// Every tree over `alphabet` with at most `max_size` nodes, sorted.
pub fn trees_up_to(alphabet: &RankedAlphabet, max_size: usize) -> Vec<Tree> {
    // by_size[n] holds the trees of exactly n nodes.
    let mut by_size: Vec<Vec<Tree>> = vec![Vec::new(); max_size + 1];
    for n in 1..=max_size {
        let mut out = Vec::new();
        for (sym, rank) in alphabet.iter() {
            if rank == 0 {
                if n == 1 {
                    out.push(Tree::leaf(sym.as_str()));
                }
                continue;
            }
            if n < rank + 1 {
                continue;
            }
            let mut parts: Vec<Vec<Tree>> = vec![Vec::new()];
            let mut sizes_left = vec![n - 1];
            for slot in 0..rank {
                let mut next_parts = Vec::new();
                let mut next_left = Vec::new();
                for (kids, &left) in parts.iter().zip(&sizes_left) {
                    let still = rank - slot - 1;
                    let lo = if still == 0 { left } else { 1 };
                    let hi = left.saturating_sub(still);
                    for (size, group) in by_size.iter().enumerate().take(hi + 1).skip(lo) {
                        for t in group {
                            let mut k = kids.clone();
                            k.push(t.clone());
                            next_parts.push(k);
                            next_left.push(left - size);
                        }
                    }
                }
                parts = next_parts;
                sizes_left = next_left;
            }
            out.extend(parts.into_iter().map(|children| Tree {
                label: sym.clone(),
                children,
            }));
        }
        by_size[n] = out;
    }
    let mut all: Vec<Tree> = by_size.into_iter().flatten().collect();
    all.sort();
    all
}

/// Child counts in preorder.
pub(crate) fn rank_sequence(t: &Tree) -> Vec<usize> {
    let mut out = Vec::with_capacity(t.size());
    let mut stack = vec![t];
    while let Some(n) = stack.pop() {
        out.push(n.children.len());
        stack.extend(n.children.iter().rev());
    }
    out
}

struct TermParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> TermParser<'a> {
    fn new(text: &'a str) -> Self {
        TermParser {
            src: text.as_bytes(),
            pos: 0,
        }
    }

    fn error(&self, message: &str) -> TreeError {
        TreeError::Parse {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn name(&mut self) -> Result<&'a str, TreeError> {
        self.skip_ws();
        let start = self.pos;
        match self.src.get(self.pos) {
            Some(b'#') => {
                self.pos += 1;
            }
            Some(c) if c.is_ascii_alphabetic() || *c == b'_' => {
                while self
                    .src
                    .get(self.pos)
                    .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_')
                {
                    self.pos += 1;
                }
            }
            Some(_) => return Err(self.error("expected a symbol name")),
            None => return Err(self.error("unexpected end of input")),
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice"))
    }

    fn tree(&mut self) -> Result<Tree, TreeError> {
        let name = self.name()?;
        self.skip_ws();
        let mut children = Vec::new();
        if self.src.get(self.pos) == Some(&b'(') {
            self.pos += 1;
            loop {
                children.push(self.tree()?);
                self.skip_ws();
                match self.src.get(self.pos) {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    Some(_) => return Err(self.error("expected `,` or `)`")),
                    None => return Err(self.error("unclosed `(`")),
                }
            }
        }
        Ok(Tree::node(name, children))
    }
}

/// Parses a term starting at `text` and returns it with the unparsed rest.
pub(crate) fn parse_term_prefix(text: &str) -> Result<(Tree, &str), TreeError> {
    let mut p = TermParser::new(text);
    let t = p.tree()?;
    Ok((t, &text[p.pos..]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Tree {
        Tree::parse(s).unwrap()
    }

    #[test]
    fn positions_in_lex_order() {
        let tree = t("s(a(#),#,#)");
        let rendered: Vec<String> = tree.positions().iter().map(|p| p.to_string()).collect();
        assert_eq!(rendered, ["ε", "1", "11", "2", "3"]);
        let tree = t("sigma(a(#), b(#), #)");
        let rendered: Vec<String> = tree.positions().iter().map(|p| p.to_string()).collect();
        assert_eq!(rendered, ["ε", "1", "11", "2", "21", "3"]);
    }

    #[test]
    fn prefix_contexts() {
        let tree = t("omega(sigma(#,#),#)");
        assert_eq!(prefix_context(&tree, 0).unwrap().to_string(), "x1");
        assert_eq!(prefix_context(&tree, 2).unwrap().to_string(), "omega(sigma(x1,x2),x3)");
        assert_eq!(prefix_context(&tree, 5).unwrap().to_tree().unwrap(), tree);
        assert!(matches!(
            prefix_context(&tree, 6),
            Err(TreeError::IndexOutOfRange { index: 6, max: 5 })
        ));
    }

    #[test]
    fn frontier_width_matches_context() {
        let tree = t("omega(sigma(#,#),omega(a(#),#))");
        for i in 0..=tree.size() {
            assert_eq!(
                frontier_width(&tree, i).unwrap(),
                prefix_context(&tree, i).unwrap().var_count()
            );
        }
    }

    #[test]
    fn compose_renumbers() {
        let c = t("f(#)");
        let base = Context::Node(
            Symbol::new("g"),
            vec![Context::Var(0), Context::Node(c.label.clone(), vec![Context::Var(1)])],
        );
        let parts = [Context::shallow(&Symbol::new("h"), 2), Context::hole()];
        let got = base.compose(&parts).unwrap();
        assert_eq!(got.to_string(), "g(h(x1,x2),f(x3))");
        assert!(base.compose(&parts[..1]).is_err());
    }

    #[test]
    fn parse_errors_carry_offsets() {
        match Tree::parse("s(a, ") {
            Err(TreeError::Parse { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("{other:?}"),
        }
        assert!(Tree::parse("s()").is_err());
        assert!(Tree::parse("a b").is_err());
        assert!(Tree::parse("1a").is_err());
    }

    #[test]
    fn rank_checks() {
        let sigma = RankedAlphabet::from_pairs([("s", 2), ("#", 0)]);
        assert!(Tree::parse_with("s(#,#)", &sigma).is_ok());
        assert!(matches!(
            Tree::parse_with("s(#)", &sigma),
            Err(TreeError::RankMismatch { .. })
        ));
        assert!(matches!(
            Tree::parse_with("q(#)", &sigma),
            Err(TreeError::UnknownSymbol(_))
        ));
    }

    #[test]
    fn preorder_roundtrip() {
        let sigma = RankedAlphabet::from_pairs([("s", 2), ("a", 1), ("#", 0)]);
        let tree = t("s(a(s(#,#)),#)");
        let labels: Vec<Symbol> = tree.preorder().into_iter().cloned().collect();
        assert_eq!(Tree::from_preorder(&labels, &sigma).unwrap(), tree);
        assert!(Tree::from_preorder(&labels[..3], &sigma).is_err());
    }

    #[test]
    fn counts() {
        let tree = t("sigma(a(b(a(#))),#,#)");
        assert_eq!(tree.count_symbol("a"), 2);
        assert_eq!(tree.count_symbol("b"), 1);
        assert_eq!(tree.size(), 7);
        assert_eq!(tree.height(), 5);
    }

    #[test]
    fn tree_enumeration_counts() {
        // Unary-binary trees with n nodes are counted by the Motzkin number
        // M(n-1).
        let sigma = RankedAlphabet::from_pairs([("s", 2), ("a", 1), ("#", 0)]);
        let all = trees_up_to(&sigma, 6);
        let mut per_size = [0usize; 7];
        for tree in &all {
            per_size[tree.size()] += 1;
        }
        assert_eq!(per_size, [0, 1, 1, 2, 4, 9, 21]);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        let monadic = RankedAlphabet::from_pairs([("a", 1), ("b", 1), ("#", 0)]);
        assert_eq!(trees_up_to(&monadic, 5).len(), 31);
        assert!(trees_up_to(&sigma, 0).is_empty());
    }
}
