//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! A criterion may only fail by running out of resources, and only if it is
//! listed in `EXPECTED_INFEASIBLE`; anything else fails the run.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use gocta::automata::{Fta, Gocta, StateId};
use gocta::corpus::{a_eq_b, a_sigma_b_c, multiply_k, pow2};
use gocta::decide::{balanced_triples, counter_bound, fta_member, fta_member_closure, member, Decider};
use gocta::grammars::{
    derivation_tree, erase_terminals, icg_to_gocta, oracle_derivable, oracle_nonempty, replay,
    tree_to_production_string, Icg, SententialForm,
};
use gocta::random::{random_gocta, RandomParams};
use gocta::semantics::{
    enumerate_language, oracle_member_copy, oracle_member_global, oracle_member_global_with_budget,
    successors_global, GlobalConfiguration, Semantics,
};
use gocta::transforms::{
    behaviour_automaton, behaviour_automaton_capped, eliminate_epsilon, make_zero_accepting, normalize,
    TransformError, DEFAULT_BEHAVIOUR_CAP,
};
use gocta::trees::{trees_up_to, Context, Symbol, Tree};

const EXPECTED_INFEASIBLE: &[u32] = &[4];
const ORACLE_BUDGET: usize = 20_000_000;

enum Outcome {
    Pass(String),
    /// The check was carried out and disagreed.
    Fail(String),
    /// The check could not be carried out within resource limits.
    Infeasible(String),
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn oracle(a: &Gocta, t: &Tree, bound: u64) -> bool {
    oracle_member_global_with_budget(a, t, bound, ORACLE_BUDGET)
        .expect("oracle within budget")
        .is_some()
}

fn chain(word: &[&str]) -> Tree {
    word.iter().rev().fold(Tree::leaf("#"), |t, s| Tree::node(s, vec![t]))
}

fn monadic_ab(max_len: usize) -> Vec<Tree> {
    let mut words: Vec<Vec<&str>> = vec![vec![]];
    let mut frontier = words.clone();
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for s in ["a", "b"] {
                let mut w2 = w.clone();
                w2.push(s);
                next.push(w2);
            }
        }
        words.extend(next.iter().cloned());
        frontier = next;
    }
    words.iter().map(|w| chain(w)).collect()
}

fn criterion_1_trees() -> Vec<Tree> {
    let chains = monadic_ab(4);
    let mut out = Vec::with_capacity(chains.len().pow(3));
    for x in &chains {
        for y in &chains {
            for z in &chains {
                out.push(Tree::node("sigma", vec![x.clone(), y.clone(), z.clone()]));
            }
        }
    }
    out
}

fn criterion_1() -> Outcome {
    let trees = criterion_1_trees();
    let d = Decider::new(&a_eq_b()).unwrap();
    let mut wrong = Vec::new();
    for t in &trees {
        let expected = t.count_symbol("a") == t.count_symbol("b");
        if d.member(t).unwrap() != expected {
            wrong.push(t.to_string());
        }
    }
    check(
        trees.len() == 29_791 && wrong.is_empty(),
        format!("{} trees, {} disagreements {:?}", trees.len(), wrong.len(), &wrong[..wrong.len().min(3)]),
    )
}

fn random_corpus() -> Vec<(Gocta, Vec<Tree>)> {
    (0..200)
        .map(|seed| {
            let a = random_gocta(seed, &RandomParams::default());
            let trees = trees_up_to(a.alphabet(), 5);
            (a, trees)
        })
        .collect()
}

fn criterion_2() -> Outcome {
    let mut cases = 0;
    let mut accepted = 0;
    let mut wrong = Vec::new();
    for (seed, (a, trees)) in random_corpus().into_iter().enumerate() {
        let d = Decider::new(&a).unwrap();
        for t in &trees {
            let bound = d.bound(t).unwrap();
            let verdict = d.decide_at(t, bound).unwrap().member;
            let on_transformed = oracle(d.transformed(), t, bound);
            let on_input = oracle(&a, t, bound);
            cases += 1;
            accepted += on_transformed as usize;
            if verdict != on_transformed || verdict != on_input {
                wrong.push(format!("seed {seed} {t}"));
            }
        }
    }
    check(
        wrong.is_empty(),
        format!("200 automata, {cases} trees, {accepted} accepted, {} disagreements {:?}", wrong.len(), wrong.first()),
    )
}

fn criterion_3() -> Outcome {
    let mut subjects = vec![("a_eq_b".to_string(), normalize(&a_eq_b()).unwrap())];
    for seed in 0..10 {
        subjects.push((format!("random {seed}"), random_gocta(seed, &RandomParams::normalized())));
    }
    let mut violations = Vec::new();
    let mut checked = 0;
    for (name, a) in &subjects {
        let q = a.state_count() as u128;
        let delta = a.transitions().len() as u128;
        let maxrk = a.alphabet().max_rank() as u32;
        for k in [1u64, 2, 3, 5] {
            let b = behaviour_automaton(a, k).unwrap();
            let w = k as u128 + 1;
            let (qs, ds) = (b.state_count() as u128, b.transitions().len() as u128);
            checked += 1;
            if qs > q * w * w {
                violations.push(format!("{name} k={k}: {qs} states > {}", q * w * w));
            }
            if ds > delta * w.pow(maxrk + 1) {
                violations.push(format!(
                    "{name} k={k} maxrk={maxrk}: {ds} transitions > {}",
                    delta * w.pow(maxrk + 1)
                ));
            }
        }
    }
    check(
        violations.is_empty(),
        format!("{checked} constructions, {} violations {:?}", violations.len(), violations),
    )
}

fn criterion_4() -> Outcome {
    let a = normalize(&make_zero_accepting(&a_eq_b())).unwrap();
    let trees = trees_up_to(a.alphabet(), 5);
    let q = a.state_count();
    let mut infeasible = BTreeSet::new();
    let mut wrong = Vec::new();
    let mut built = 0;
    for t in &trees {
        let k = counter_bound(&a, t).unwrap();
        match behaviour_automaton_capped(&a, k, DEFAULT_BEHAVIOUR_CAP) {
            Ok(b) => {
                built += 1;
                if fta_member(&eliminate_epsilon(&b), t).unwrap() != oracle(&a, t, k) {
                    wrong.push(t.to_string());
                }
            }
            Err(TransformError::ResourceLimit { what, needed, .. }) => {
                infeasible.insert(format!("k={k}: {needed} {what}"));
            }
            Err(e) => panic!("{e}"),
        }
    }
    // The same comparison at counter bounds the explicit construction fits.
    let mut small = 0;
    for k in 0..=2 {
        let b = eliminate_epsilon(&behaviour_automaton(&a, k).unwrap());
        for t in &trees {
            small += 1;
            if fta_member(&b, t).unwrap() != oracle(&a, t, k) {
                wrong.push(format!("k={k} {t}"));
            }
        }
    }
    let detail = format!(
        "|Q'|={q}, {} trees, {built} explicit automata built, {} too large (e.g. {:?}); \
         explicit/oracle agreement at k<=2 on {small} cases, {} disagreements",
        trees.len(),
        trees.len() - built,
        infeasible.iter().next(),
        wrong.len()
    );
    if !wrong.is_empty() {
        Outcome::Fail(detail)
    } else if built < trees.len() {
        Outcome::Infeasible(detail)
    } else {
        Outcome::Pass(detail)
    }
}

fn criterion_5() -> Outcome {
    let mut bad = Vec::new();
    for k in 1..=3i64 {
        let a = multiply_k(k);
        let (p, q2) = (a.state_id("p").unwrap(), a.state_id("q'").unwrap());
        for c in 0..=5u64 {
            let start = GlobalConfiguration {
                shape: Context::Node(Symbol::new("omega"), vec![Context::Var(0), Context::Var(1)]),
                frontier: vec![p, q2],
                counter: c,
            };
            let ends = run_until_only(&a, start, q2);
            let expect_counter = k as u64 * c;
            let ok = !ends.is_empty()
                && ends.iter().all(|end| {
                    let Context::Node(_, kids) = &end.shape else { return false };
                    let comb = kids[0].to_tree().expect("comb is complete");
                    end.counter == expect_counter && comb.count_symbol("sigma") == c as usize
                });
            if !ok {
                bad.push(format!("k={k} c={c}"));
            }
        }
    }
    check(bad.is_empty(), format!("18 runs, {} wrong {:?}", bad.len(), bad))
}

/// All configurations reachable from `start` whose frontier is exactly
/// `[last]` (the gadget's first branch is fully read).
fn run_until_only(a: &Gocta, start: GlobalConfiguration, last: StateId) -> Vec<GlobalConfiguration> {
    let mut out = Vec::new();
    let mut stack = vec![start];
    let mut steps = 0;
    while let Some(c) = stack.pop() {
        steps += 1;
        assert!(steps < 100_000, "gadget does not terminate");
        if c.frontier == [last] {
            out.push(c);
            continue;
        }
        stack.extend(successors_global(a, &c).into_iter().map(|(_, c2)| c2));
    }
    out
}

fn criterion_6() -> Outcome {
    let a = pow2();
    // Two blocks need 1 + 3 + 1 + 5 + 1 = 11 nodes.
    let max_size = 11;
    let bound = Decider::new(&a).unwrap().transformed().state_count() as u64;
    let bound = max_size as u64 * bound * bound + 1;
    let trees = enumerate_language(&a, max_size, Semantics::Global, bound).unwrap();
    let mut by_blocks: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for t in &trees {
        by_blocks
            .entry(t.count_symbol("omega"))
            .or_default()
            .insert(t.count_symbol("sigma"));
    }
    let f1 = by_blocks.get(&1).cloned().unwrap_or_default();
    let f2 = by_blocks.get(&2).cloned().unwrap_or_default();
    // One sigma count per block count, following f(n) = 2^n - 1 and so
    // f(2) = 2 f(1) + 1.
    let (f1, f2): (Vec<usize>, Vec<usize>) = (f1.into_iter().collect(), f2.into_iter().collect());
    let ok = match (f1.as_slice(), f2.as_slice()) {
        (&[x], &[y]) => x == 1 && y == 3 && y == 2 * x + 1,
        _ => false,
    };
    check(
        ok,
        format!("sigma counts by number of omega blocks: {by_blocks:?}; f(n) = 2^n - 1"),
    )
}

fn criterion_7() -> Outcome {
    let a = a_sigma_b_c();
    let mut wrong = Vec::new();
    for i in 0..=4usize {
        for j in 0..=4usize {
            for l in 0..=4usize {
                let b = chain(&vec!["b"; j]);
                let c = chain(&vec!["c"; l]);
                let t = (0..i).fold(Tree::node("sigma", vec![b, c]), |t, _| Tree::node("a", vec![t]));
                let bound = t.size() as u64;
                let got = oracle_member_copy(&a, &t, bound).unwrap().is_some();
                if got != (i == j && j == l) {
                    wrong.push(t.to_string());
                }
            }
        }
    }
    check(wrong.is_empty(), format!("125 trees, {} wrong {:?}", wrong.len(), wrong))
}

fn criterion_8() -> Outcome {
    let mut pool: Vec<(usize, Tree)> = Vec::new();
    let mut automata = vec![a_eq_b()];
    pool.extend(criterion_1_trees().into_iter().map(|t| (0, t)));
    for (a, trees) in random_corpus() {
        automata.push(a);
        let i = automata.len() - 1;
        pool.extend(trees.into_iter().map(|t| (i, t)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let sample: Vec<&(usize, Tree)> = pool.choose_multiple(&mut rng, 1000).collect();
    let za: Vec<Gocta> = automata.iter().map(make_zero_accepting).collect();
    let nf: Vec<Gocta> = automata.iter().map(|a| normalize(a).unwrap()).collect();
    let mut wrong = Vec::new();
    let mut accepted = 0;
    for &&(i, ref t) in &sample {
        let bound = Decider::new(&automata[i]).unwrap().bound(t).unwrap();
        let base = oracle(&automata[i], t, bound);
        let w = oracle_member_global_with_budget(&za[i], t, bound, ORACLE_BUDGET).unwrap();
        let zero_final = w.as_ref().is_none_or(|w| w.last().counter == 0);
        let n = oracle(&nf[i], t, bound);
        accepted += base as usize;
        if base != w.is_some() || base != n || !zero_final || !nf[i].is_normalized() {
            wrong.push(format!("automaton {i} {t}"));
        }
    }
    check(
        wrong.is_empty(),
        format!("{} sampled (automaton, tree) pairs, {accepted} accepted, {} wrong {:?}", sample.len(), wrong.len(), wrong.first()),
    )
}

fn criterion_9() -> Outcome {
    let mut ftas = Vec::new();
    let mut seed = 0;
    while ftas.len() < 20 {
        let a = random_gocta(seed, &RandomParams::fta());
        seed += 1;
        if a.has_eps() {
            ftas.push(Fta::new(a).unwrap());
        }
    }
    let mut wrong = Vec::new();
    let mut cases = 0;
    for (n, f) in ftas.iter().enumerate() {
        let e = eliminate_epsilon(f);
        if e.has_eps() || eliminate_epsilon(&e) != e {
            wrong.push(format!("fta {n}: not idempotent"));
        }
        for t in trees_up_to(f.alphabet(), 4) {
            cases += 1;
            let before = oracle_member_global(f, &t, 0).unwrap().is_some();
            if before != fta_member(&e, &t).unwrap() || before != fta_member_closure(f, &t) {
                wrong.push(format!("fta {n} {t}"));
            }
        }
    }
    check(wrong.is_empty(), format!("20 automata, {cases} trees, {} wrong {:?}", wrong.len(), wrong.first()))
}

fn criterion_10() -> Outcome {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/grammars");
    let mut detail = String::new();
    let mut ok = true;
    for (file, expect_nonempty) in [("g_eps.icg", true), ("g_anbnc.icg", true), ("g_empty.icg", false)] {
        let g = Icg::parse(&std::fs::read_to_string(dir.join(file)).unwrap()).unwrap();
        let g0 = erase_terminals(&g);
        let a = icg_to_gocta(&g);
        let q = Decider::new(&a).unwrap().transformed().state_count() as u64;
        let trees = enumerate_language(&a, 8, Semantics::Global, 8 * q * q + 1).unwrap();
        let derivation = oracle_nonempty(&g, 20).unwrap();
        ok &= trees.is_empty() == derivation.is_none();
        ok &= derivation.is_some() == expect_nonempty;
        for t in &trees {
            match replay(&g0, &tree_to_production_string(t)) {
                Some(d) if d.last().0.is_empty() && leftmost_only(&d.forms) => {}
                _ => {
                    ok = false;
                    let _ = write!(detail, "[{t} does not replay] ");
                }
            }
        }
        // Derivations found by search map back to accepted trees.
        if let Some(d) = &derivation {
            let found = oracle_derivable(&g, &d.last().terminals(), 20).unwrap().unwrap();
            let t = derivation_tree(&g, &found.steps).unwrap();
            ok &= member(&a, &t).unwrap().verdict && leftmost_only(&found.forms);
        }
        let _ = write!(
            detail,
            "{file}: {} trees of size <= 8, derivation {}; ",
            trees.len(),
            derivation.map_or("none".to_string(), |d| format!("of {:?} in {} steps", d.last().terminals().join(""), d.steps.len()))
        );
    }
    check(ok, detail)
}

/// Consecutive forms differ only from the leftmost nonterminal on.
fn leftmost_only(forms: &[SententialForm]) -> bool {
    forms.windows(2).all(|w| {
        let at = w[0].leftmost_nonterminal().unwrap_or(w[0].0.len());
        w[1].0.len() >= at && w[0].0[..at] == w[1].0[..at]
    })
}

fn criterion_11() -> Outcome {
    let bad: Vec<u64> = (0..=30).filter(|&k| balanced_triples(k) != 3 * k * k + 3 * k + 1).collect();
    check(bad.is_empty(), format!("k = 0..30, mismatches at {bad:?}"))
}

fn criterion_12() -> Outcome {
    let a = a_eq_b();
    let d = Decider::new(&a).unwrap();
    let mut ok = true;
    let mut detail = String::new();
    for size in [50usize, 100, 200] {
        let len = size - 4;
        let word: Vec<&str> = (0..len).map(|i| if i % 2 == 0 { "a" } else { "b" }).collect();
        let t = Tree::node("sigma", vec![chain(&word), Tree::leaf("#"), Tree::leaf("#")]);
        assert_eq!(t.size(), size);
        let start = Instant::now();
        let decision = d.decide(&t).unwrap();
        let took = start.elapsed();
        ok &= decision.member && took < Duration::from_secs(60);
        let _ = write!(detail, "size {size}: {:.3}s (bound {}, {} memo entries); ", took.as_secs_f64(), decision.bound, decision.work);
    }
    check(ok, detail)
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 12] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
        (11, criterion_11),
        (12, criterion_12),
    ];
    let mut unexpected = Vec::new();
    for (n, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Outcome::Pass(d) => println!("criterion {n:>2}: PASS ({secs:.2}s) {d}"),
            Outcome::Fail(d) => {
                println!("criterion {n:>2}: FAIL ({secs:.2}s) {d}");
                unexpected.push(n);
            }
            Outcome::Infeasible(d) => {
                println!("criterion {n:>2}: FAIL ({secs:.2}s) resource limit: {d}");
                if !EXPECTED_INFEASIBLE.contains(&n) {
                    unexpected.push(n);
                }
            }
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
