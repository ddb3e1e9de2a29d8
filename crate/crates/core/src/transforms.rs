//! Language-preserving constructions: 0-acceptance, normalization, the
//! k-bounded behaviour automaton and ε-elimination for FTA.

use std::collections::HashSet;

use thiserror::Error;

use crate::automata::{Fta, Gocta, Predicate, Rhs, StateId, Transition};

/// Longest unit-step chain [`normalize`] will emit for one instruction.
pub const MAX_CHAIN: u64 = 1 << 20;

/// Default cap on the number of transitions of an explicit behaviour
/// automaton.
pub const DEFAULT_BEHAVIOUR_CAP: u64 = 5_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("automaton is not normalized")]
    NotNormalized,
    #[error("automaton is not a finite tree automaton")]
    NotFta,
    #[error("construction would need {needed} {what}, above the limit of {limit}")]
    ResourceLimit {
        what: &'static str,
        needed: String,
        limit: u64,
    },
}

/// Allocates state names that do not clash with existing ones.
struct Namer {
    names: Vec<String>,
    taken: HashSet<String>,
}

impl Namer {
    fn new(existing: &[String]) -> Self {
        Namer {
            names: existing.to_vec(),
            taken: existing.iter().cloned().collect(),
        }
    }

    fn fresh(&mut self, base: String) -> StateId {
        let mut name = base;
        while self.taken.contains(&name) {
            name.push('\'');
        }
        self.taken.insert(name.clone());
        self.names.push(name);
        StateId(self.names.len() as u32 - 1)
    }
}

/// An equivalent automaton whose successful computations all end with
/// counter 0.
///
/// A copy `[q]` of every state follows the rightmost branch. When `[q]`
/// would read a leaf `α` it moves to `q_α` instead, which drains the
/// counter one step at a time and reads `α` only at 0. Drain states are
/// created for every symbol; only those of rank 0 get a reading rule.
pub fn make_zero_accepting(a: &Gocta) -> Gocta {
    let mut namer = Namer::new(a.states());
    let right: Vec<StateId> = a
        .state_ids()
        .map(|q| namer.fresh(format!("{}__za", a.state_name(q))))
        .collect();
    let symbols: Vec<_> = a.alphabet().iter().map(|(s, r)| (s.clone(), r)).collect();
    let drain: Vec<Vec<StateId>> = a
        .state_ids()
        .map(|q| {
            symbols
                .iter()
                .map(|(s, _)| namer.fresh(format!("{}__za_{}", a.state_name(q), s)))
                .collect()
        })
        .collect();
    let mut out: Vec<Transition> = a.transitions().to_vec();
    for t in a.transitions() {
        let source = right[t.source.index()];
        let rhs = match &t.rhs {
            Rhs::Eps(q) => Rhs::Eps(right[q.index()]),
            Rhs::Read(s, qs) if !qs.is_empty() => {
                let mut qs = qs.clone();
                let last = qs.len() - 1;
                qs[last] = right[qs[last].index()];
                Rhs::Read(s.clone(), qs)
            }
            Rhs::Read(s, _) => {
                let ai = symbols.iter().position(|(x, _)| x == s).expect("symbol in alphabet");
                Rhs::Eps(drain[t.source.index()][ai])
            }
        };
        out.push(Transition {
            source,
            predicate: t.predicate,
            instruction: t.instruction,
            rhs,
        });
    }
    for row in &drain {
        for (ai, &d) in row.iter().enumerate() {
            out.push(Transition {
                source: d,
                predicate: Predicate::GtZero,
                instruction: -1,
                rhs: Rhs::Eps(d),
            });
            let (s, rank) = &symbols[ai];
            if *rank == 0 {
                out.push(Transition {
                    source: d,
                    predicate: Predicate::EqZero,
                    instruction: 0,
                    rhs: Rhs::Read(s.clone(), Vec::new()),
                });
            }
        }
    }
    let initial = right[a.initial().index()];
    Gocta::from_parts(namer.names, a.alphabet().clone(), initial, out)
        .expect("construction preserves well-formedness")
        .with_zero_accepting(true)
}

/// An equivalent normalized automaton.
///
/// Every read that tests or changes the counter is split into an
/// ε-transition to a fresh state followed by a plain read, and every
/// instruction of magnitude above 1 into a chain of unit steps. The test
/// stays on the first step of a chain. Reads that are already `top/0` are
/// kept as they are.
pub fn normalize(a: &Gocta) -> Result<Gocta, TransformError> {
    for t in a.transitions() {
        if t.instruction.unsigned_abs() > MAX_CHAIN {
            return Err(TransformError::ResourceLimit {
                what: "unit steps for one instruction",
                needed: t.instruction.unsigned_abs().to_string(),
                limit: MAX_CHAIN,
            });
        }
    }
    let mut b = Normalizer {
        a,
        namer: Namer::new(a.states()),
        out: Vec::new(),
        made: 0,
    };
    for t in a.transitions() {
        match &t.rhs {
            Rhs::Eps(_) if t.instruction.abs() <= 1 => b.out.push(t.clone()),
            Rhs::Eps(q) => b.chain(t.source, t.predicate, t.instruction, *q),
            Rhs::Read(..) if t.is_plain() => b.out.push(t.clone()),
            Rhs::Read(..) => {
                let mid = b.fresh(t.source);
                b.chain(t.source, t.predicate, t.instruction, mid);
                b.out.push(Transition {
                    source: mid,
                    predicate: Predicate::Top,
                    instruction: 0,
                    rhs: t.rhs.clone(),
                });
            }
        }
    }
    let Normalizer { namer, out, .. } = b;
    let zero = a.is_certified_zero_accepting();
    Ok(Gocta::from_parts(namer.names, a.alphabet().clone(), a.initial(), out)
        .expect("construction preserves well-formedness")
        .with_zero_accepting(zero))
}

struct Normalizer<'a> {
    a: &'a Gocta,
    namer: Namer,
    out: Vec<Transition>,
    made: usize,
}

impl Normalizer<'_> {
    fn fresh(&mut self, source: StateId) -> StateId {
        self.made += 1;
        self.namer
            .fresh(format!("{}__nf_{}", self.a.state_name(source), self.made))
    }

    /// Emits `from -p/z-> to` as `|z|` unit steps (one step when `z` is 0).
    fn chain(&mut self, from: StateId, p: Predicate, z: i64, to: StateId) {
        let steps = z.unsigned_abs().max(1);
        let mut cur = from;
        for i in 0..steps {
            let next = if i + 1 == steps { to } else { self.fresh(from) };
            self.out.push(Transition {
                source: cur,
                predicate: if i == 0 { p } else { Predicate::Top },
                instruction: z.signum(),
                rhs: Rhs::Eps(next),
            });
            cur = next;
        }
    }
}

/// Number of transitions [`behaviour_automaton`] produces, or `None` on
/// overflow.
pub fn behaviour_transition_count(a: &Gocta, k: u64) -> Option<u128> {
    let width = k as u128 + 1;
    let mut total: u128 = 0;
    for t in a.transitions() {
        let n = match &t.rhs {
            Rhs::Read(_, qs) if qs.is_empty() => width,
            Rhs::Read(_, qs) => width.checked_pow(qs.len() as u32 + 1)?,
            Rhs::Eps(_) => {
                // Entry counters i with p(i) and 0 <= i + z <= k.
                let (lo, hi) = match t.predicate {
                    Predicate::EqZero => (0, 0),
                    Predicate::GtZero => (1, k as i128),
                    Predicate::Top => (0, k as i128),
                };
                let z = t.instruction as i128;
                let lo = lo.max(-z);
                let hi = hi.min(k as i128 - z);
                let entries = if hi >= lo { (hi - lo + 1) as u128 } else { 0 };
                entries * width
            }
        };
        total = total.checked_add(n)?;
    }
    Some(total)
}

/// The FTA whose state `q@i@j` accepts exactly the subtrees on which a
/// computation can start in `q` with counter `i`, end with counter `j`
/// and never exceed `k`.
pub fn behaviour_automaton(a: &Gocta, k: u64) -> Result<Fta, TransformError> {
    behaviour_automaton_capped(a, k, DEFAULT_BEHAVIOUR_CAP)
}

pub fn behaviour_automaton_capped(a: &Gocta, k: u64, cap: u64) -> Result<Fta, TransformError> {
    if !a.is_normalized() {
        return Err(TransformError::NotNormalized);
    }
    let width = k as u128 + 1;
    let states = (a.state_count() as u128).saturating_mul(width * width);
    let too_big = |what, needed: Option<u128>| TransformError::ResourceLimit {
        what,
        needed: needed.map_or_else(|| "more than 2^128".to_string(), |n| n.to_string()),
        limit: cap,
    };
    if states > cap as u128 || states > u32::MAX as u128 {
        return Err(too_big("states", Some(states)));
    }
    match behaviour_transition_count(a, k) {
        Some(n) if n <= cap as u128 => {}
        other => return Err(too_big("transitions", other)),
    }
    let w = k as usize + 1;
    let id = |q: StateId, i: u64, j: u64| StateId((q.index() * w * w + i as usize * w + j as usize) as u32);
    let mut names = Vec::with_capacity(states as usize);
    for q in a.state_ids() {
        for i in 0..=k {
            for j in 0..=k {
                names.push(format!("{}@{}@{}", a.state_name(q), i, j));
            }
        }
    }
    let plain = |source, rhs| Transition {
        source,
        predicate: Predicate::Top,
        instruction: 0,
        rhs,
    };
    let mut out = Vec::new();
    for t in a.transitions() {
        match &t.rhs {
            Rhs::Read(s, qs) if qs.is_empty() => {
                for i in 0..=k {
                    out.push(plain(id(t.source, i, i), Rhs::Read(s.clone(), Vec::new())));
                }
            }
            Rhs::Read(s, qs) => {
                let n = qs.len();
                let mut idx = vec![0u64; n + 1];
                loop {
                    let kids = (0..n).map(|j| id(qs[j], idx[j], idx[j + 1])).collect();
                    out.push(plain(id(t.source, idx[0], idx[n]), Rhs::Read(s.clone(), kids)));
                    let mut d = 0;
                    while d <= n && idx[d] == k {
                        idx[d] = 0;
                        d += 1;
                    }
                    if d > n {
                        break;
                    }
                    idx[d] += 1;
                }
            }
            Rhs::Eps(q2) => {
                for i in 0..=k {
                    let Some(i2) = t.fire(i).filter(|&i2| i2 <= k) else {
                        continue;
                    };
                    for j in 0..=k {
                        out.push(plain(id(t.source, i, j), Rhs::Eps(id(*q2, i2, j))));
                    }
                }
            }
        }
    }
    let g = Gocta::from_parts(names, a.alphabet().clone(), id(a.initial(), 0, 0), out)
        .expect("construction preserves well-formedness");
    Ok(Fta::new(g).expect("all transitions are top/0"))
}

/// An equivalent FTA without ε-transitions: `q` gets every read of every
/// state reachable from it by ε-moves.
pub fn eliminate_epsilon(f: &Fta) -> Fta {
    let n = f.state_count();
    let mut eps = vec![Vec::new(); n];
    for t in f.transitions() {
        if let Rhs::Eps(q2) = t.rhs {
            eps[t.source.index()].push(q2);
        }
    }
    let mut out = Vec::new();
    for q in f.state_ids() {
        let mut seen = vec![false; n];
        let mut stack = vec![q];
        seen[q.index()] = true;
        while let Some(r) = stack.pop() {
            for t in f.transitions_from(r) {
                if let Rhs::Read(..) = t.rhs {
                    out.push(Transition {
                        source: q,
                        ..t.clone()
                    });
                }
            }
            for &r2 in &eps[r.index()] {
                if !seen[r2.index()] {
                    seen[r2.index()] = true;
                    stack.push(r2);
                }
            }
        }
    }
    let g = Gocta::from_parts(f.states().to_vec(), f.alphabet().clone(), f.initial(), out)
        .expect("construction preserves well-formedness");
    Fta::new(g).expect("all transitions are top/0")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{parse_automaton, GoctaBuilder};
    use crate::corpus::{a_eq_b, multiply_k, pow2};

    #[test]
    fn zero_accepting_shape() {
        let a = pow2();
        let z = make_zero_accepting(&a);
        let q = a.state_count();
        let sigma = a.alphabet().len();
        assert_eq!(z.state_count(), 2 * q + q * sigma);
        assert_eq!(z.state_name(z.initial()), "q0__za");
        assert!(z.is_certified_zero_accepting());
        for t in a.transitions() {
            assert!(z.transitions().contains(t));
        }
    }

    #[test]
    fn a_eq_b_zero_accepting_counts() {
        let a = a_eq_b();
        let z = make_zero_accepting(&a);
        assert_eq!(z.state_count(), 2 * 7 + 7 * 4);
        // 26 originals, 26 copies, 7*4 drain loops, 7 leaf exits.
        assert_eq!(z.transitions().len(), 26 + 26 + 28 + 7);
    }

    #[test]
    fn normalize_splits_reads() {
        let a = parse_automaton(
            "alphabet: a/1 #/0\nstates: q r\ninitial: q\ntrans: q -[eq0/+1]-> a(r)\ntrans: r -> #\n",
        )
        .unwrap();
        let n = normalize(&a).unwrap();
        assert!(n.is_normalized());
        let rendered: Vec<String> = n.transitions().iter().map(|t| n.render_transition(t)).collect();
        assert!(rendered.contains(&"q -[eq0/+1]-> q__nf_1".to_string()));
        assert!(rendered.contains(&"q__nf_1 -> a(r)".to_string()));
        assert!(rendered.contains(&"r -> #".to_string()));
        assert_eq!(n.state_count(), 3);
    }

    #[test]
    fn normalize_chains_large_instructions() {
        let a = multiply_k(3);
        let n = normalize(&a).unwrap();
        assert!(n.is_normalized());
        // q -top/3-> # becomes three unit steps and a plain read.
        let q = n.state_id("q").unwrap();
        let mut cur = q;
        let mut steps = 0;
        loop {
            let ts: Vec<&Transition> = n.transitions_from(cur).collect();
            assert_eq!(ts.len(), 1);
            match ts[0].rhs {
                Rhs::Eps(next) => {
                    assert_eq!(ts[0].instruction, 1);
                    steps += 1;
                    cur = next;
                }
                Rhs::Read(..) => break,
            }
        }
        assert_eq!(steps, 3);
    }

    #[test]
    fn normalize_keeps_test_on_first_step() {
        let a = GoctaBuilder::new(&[("#", 0)], &["q", "r"], "q")
            .eps("q", Predicate::GtZero, -2, "r")
            .read("r", Predicate::Top, 0, "#", &[])
            .build()
            .unwrap();
        let n = normalize(&a).unwrap();
        let firsts: Vec<&Transition> = n.transitions_from(n.state_id("q").unwrap()).collect();
        assert_eq!(firsts.len(), 1);
        assert_eq!(firsts[0].predicate, Predicate::GtZero);
        assert_eq!(firsts[0].instruction, -1);
        let mid = match firsts[0].rhs {
            Rhs::Eps(m) => m,
            _ => unreachable!(),
        };
        let second: Vec<&Transition> = n.transitions_from(mid).collect();
        assert_eq!(second[0].predicate, Predicate::Top);
    }

    #[test]
    fn normalize_is_identity_on_normalized() {
        let a = normalize(&pow2()).unwrap();
        assert_eq!(normalize(&a).unwrap(), a);
    }

    #[test]
    fn huge_instruction_rejected() {
        let a = GoctaBuilder::new(&[("#", 0)], &["q"], "q")
            .read("q", Predicate::Top, 1 << 40, "#", &[])
            .build()
            .unwrap();
        assert!(matches!(normalize(&a), Err(TransformError::ResourceLimit { .. })));
    }

    #[test]
    fn behaviour_requires_normalized() {
        assert_eq!(behaviour_automaton(&pow2(), 2), Err(TransformError::NotNormalized));
    }

    #[test]
    fn behaviour_size_formula() {
        let a = normalize(&make_zero_accepting(&pow2())).unwrap();
        for k in 0..4 {
            let b = behaviour_automaton(&a, k).unwrap();
            let w = k as usize + 1;
            assert_eq!(b.state_count(), a.state_count() * w * w);
            assert!(b.transitions().len() <= a.transitions().len() * w.pow(3));
            assert_eq!(b.transitions().len() as u128, behaviour_transition_count(&a, k).unwrap());
            assert!(b.is_fta());
            assert_eq!(b.state_name(b.initial()), "q0__za@0@0");
        }
    }

    #[test]
    fn behaviour_cap() {
        let a = normalize(&make_zero_accepting(&a_eq_b())).unwrap();
        assert!(matches!(
            behaviour_automaton(&a, 20_000),
            Err(TransformError::ResourceLimit { .. })
        ));
    }

    #[test]
    fn size_bound_needs_a_branching_symbol() {
        // With only leaves in the alphabet an ε-rule yields (k+1)^2
        // instances, which exceeds |Δ|(k+1) once k >= 2.
        let a = GoctaBuilder::new(&[("#", 0)], &["q", "r"], "q")
            .eps("q", Predicate::Top, 0, "r")
            .read("r", Predicate::Top, 0, "#", &[])
            .build()
            .unwrap();
        let b = behaviour_automaton(&a, 3).unwrap();
        assert!(b.transitions().len() > a.transitions().len() * 4);
    }

    #[test]
    fn eliminate_epsilon_is_idempotent() {
        let a = normalize(&make_zero_accepting(&pow2())).unwrap();
        let b = behaviour_automaton(&a, 2).unwrap();
        let e = eliminate_epsilon(&b);
        assert!(!e.has_eps());
        assert_eq!(eliminate_epsilon(&e), e);
    }
}
