//! Seeded random automata for differential testing.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automata::{Gocta, GoctaBuilder, Predicate};

/// Symbols the generator draws from; `#` is always included.
pub const SYMBOL_POOL: [(&str, usize); 4] = [("#", 0), ("e", 0), ("a", 1), ("s", 2)];

#[derive(Clone, Debug)]
pub struct RandomParams {
    pub max_states: usize,
    pub max_transitions: usize,
    pub min_instruction: i64,
    pub max_instruction: i64,
    /// Chance that a transition is an ε-transition.
    pub eps_ratio: f64,
    /// Whether predicates and instructions are drawn at all.
    pub counter: bool,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            max_states: 4,
            max_transitions: 10,
            min_instruction: -2,
            max_instruction: 2,
            eps_ratio: 0.2,
            counter: true,
        }
    }
}

impl RandomParams {
    /// Counter-free automata with ε-transitions.
    pub fn fta() -> Self {
        RandomParams {
            max_states: 4,
            max_transitions: 10,
            min_instruction: 0,
            max_instruction: 0,
            eps_ratio: 0.3,
            counter: false,
        }
    }

    /// Instructions in {-1,0,1} with reads fixed at `top/0`.
    pub fn normalized() -> Self {
        RandomParams {
            min_instruction: -1,
            max_instruction: 1,
            eps_ratio: 0.4,
            ..RandomParams::default()
        }
    }
}

/// The automaton for `seed`; the same seed always gives the same automaton.
pub fn random_gocta(seed: u64, params: &RandomParams) -> Gocta {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_states = rng.gen_range(1..=params.max_states);
    let states: Vec<String> = (0..n_states).map(|i| format!("q{i}")).collect();
    let mut alphabet = vec![SYMBOL_POOL[0]];
    alphabet.extend(SYMBOL_POOL[1..].iter().filter(|_| rng.gen_bool(0.6)));
    let n_trans = rng.gen_range(1..=params.max_transitions);
    let refs: Vec<&str> = states.iter().map(String::as_str).collect();
    let mut b = GoctaBuilder::new(&alphabet, &refs, "q0");
    let preds = [Predicate::Top, Predicate::EqZero, Predicate::GtZero];
    let normalized_reads = params.max_instruction <= 1 && params.min_instruction >= -1 && params.counter;
    for _ in 0..n_trans {
        let src = *refs.choose(&mut rng).unwrap();
        let (mut p, mut z) = if params.counter {
            (
                *preds.choose(&mut rng).unwrap(),
                rng.gen_range(params.min_instruction..=params.max_instruction),
            )
        } else {
            (Predicate::Top, 0)
        };
        if rng.gen_bool(params.eps_ratio) {
            b = b.eps(src, p, z, refs.choose(&mut rng).unwrap());
        } else {
            if normalized_reads {
                (p, z) = (Predicate::Top, 0);
            }
            let &(sym, rank) = alphabet.choose(&mut rng).unwrap();
            let kids: Vec<&str> = (0..rank).map(|_| *refs.choose(&mut rng).unwrap()).collect();
            b = b.read(src, p, z, sym, &kids);
        }
    }
    b.build().expect("generated automata are well formed")
}
