//! Global one-counter tree automata.
//!
//! A GOCTA reads a ranked tree top-down in lexicographic order of its
//! positions while a single counter, shared by the whole computation, is
//! tested and updated. The crate provides the step relations, bounded
//! explicit-state oracles, the normal-form constructions, a membership
//! decider, and a conversion from indexed grammars with a global index.

pub mod automata;
pub mod corpus;
pub mod decide;
pub mod grammars;
pub mod random;
pub mod semantics;
pub mod transforms;
pub mod trees;

pub use automata::{parse_automaton, Gocta, Predicate, Rhs, StateId, Transition};
pub use trees::{Context, Position, RankedAlphabet, Symbol, Tree};
