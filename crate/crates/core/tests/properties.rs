use proptest::prelude::*;
use proptest::sample::Index as Pick;

use gocta::automata::{parse_automaton, Fta, Gocta, Rhs};
use gocta::decide::{behaviour_member, fta_member, Decider};
use gocta::grammars::{derive_r_step, Icg, SententialForm};
use gocta::random::{random_gocta, RandomParams};
use gocta::semantics::{
    check_global_trace, oracle_member_copy, oracle_member_copy_any_position, oracle_member_global,
};
use gocta::transforms::{behaviour_automaton, eliminate_epsilon, make_zero_accepting, normalize};
use gocta::trees::{prefix_context, trees_up_to, Context, Tree};

fn tree_strategy() -> impl Strategy<Value = Tree> {
    let leaf = prop_oneof![Just(Tree::leaf("#")), Just(Tree::leaf("e"))];
    leaf.prop_recursive(5, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|t| Tree::node("a", vec![t])),
            (inner.clone(), inner).prop_map(|(l, r)| Tree::node("s", vec![l, r])),
        ]
    })
}

/// A random automaton and one tree over its alphabet.
fn instance(params: RandomParams, max_size: usize) -> impl Strategy<Value = (Gocta, Tree)> {
    (any::<u64>(), any::<Pick>()).prop_map(move |(seed, pick)| {
        let a = random_gocta(seed, &params);
        let trees = trees_up_to(a.alphabet(), max_size);
        let t = pick.get(&trees).clone();
        (a, t)
    })
}

fn var_indices(c: &Context, out: &mut Vec<usize>) {
    match c {
        Context::Var(i) => out.push(*i),
        Context::Node(_, kids) => kids.iter().for_each(|k| var_indices(k, out)),
    }
}

const BOUND: u64 = 12;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn positions_are_lex_sorted(t in tree_strategy()) {
        let ps = t.positions();
        prop_assert_eq!(ps.len(), t.size());
        prop_assert!(ps.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn prefix_contexts_grow_at_first_variable(t in tree_strategy()) {
        for (i, label) in t.preorder().into_iter().enumerate() {
            let before = prefix_context(&t, i).unwrap();
            let rank = t.subtree(&before.var_positions()[0]).unwrap().children.len();
            let mut parts = vec![Context::shallow(label, rank)];
            parts.extend((1..before.var_count()).map(|_| Context::hole()));
            let grown = before.compose(&parts).unwrap();
            prop_assert_eq!(&grown, &prefix_context(&t, i + 1).unwrap());
            let mut idx = Vec::new();
            var_indices(&grown, &mut idx);
            prop_assert_eq!(idx, (0..grown.var_count()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn prefix_context_plus_remainders_is_the_tree(t in tree_strategy(), i in 0usize..24) {
        let i = i.min(t.size());
        let c = prefix_context(&t, i).unwrap();
        let parts: Vec<Context> = c
            .var_positions()
            .iter()
            .map(|p| Context::from(t.subtree(p).unwrap()))
            .collect();
        prop_assert_eq!(c.compose(&parts).unwrap().to_tree().unwrap(), t);
    }

    #[test]
    fn automata_render_round_trip(seed in any::<u64>()) {
        for params in [RandomParams::default(), RandomParams::fta(), RandomParams::normalized()] {
            let a = random_gocta(seed, &params);
            let b = parse_automaton(&a.render()).unwrap();
            prop_assert_eq!(b.render(), a.render());
            prop_assert_eq!(&b, &a);
            prop_assert!(!a.is_fta() || a.is_normalized());
        }
    }

    #[test]
    fn oracle_traces_replay((a, t) in instance(RandomParams::default(), 5)) {
        if let Some(trace) = oracle_member_global(&a, &t, BOUND).unwrap() {
            prop_assert!(check_global_trace(&a, &t, &trace));
            let reads = trace.steps.iter().filter(|s| matches!(s.transition.rhs, Rhs::Read(..))).count();
            prop_assert_eq!(reads, t.size());
            prop_assert!(trace.configs().all(|c| c.counter <= BOUND));
            prop_assert!(oracle_member_global(&a, &t, BOUND + 7).unwrap().is_some());
        }
    }

    #[test]
    fn copy_scheduling_is_complete((a, t) in instance(RandomParams::default(), 5)) {
        let lex = oracle_member_copy(&a, &t, BOUND).unwrap().is_some();
        prop_assert_eq!(lex, oracle_member_copy_any_position(&a, &t, BOUND, 1_000_000).unwrap());
    }

    #[test]
    fn transforms_preserve_bounded_membership((a, t) in instance(RandomParams::default(), 5)) {
        let za = make_zero_accepting(&a);
        let nf = normalize(&a).unwrap();
        let both = normalize(&za).unwrap();
        prop_assert!(nf.is_normalized() && both.is_normalized() && both.is_certified_zero_accepting());
        let base = oracle_member_global(&a, &t, BOUND).unwrap().is_some();
        let w = oracle_member_global(&za, &t, BOUND).unwrap();
        prop_assert_eq!(base, w.is_some());
        if let Some(w) = w {
            prop_assert_eq!(w.last().counter, 0);
        }
        prop_assert_eq!(base, oracle_member_global(&nf, &t, BOUND).unwrap().is_some());
    }

    #[test]
    fn behaviour_size_bounds(seed in any::<u64>(), k in 0u64..4) {
        let a = random_gocta(seed, &RandomParams::normalized());
        let maxrk = a.alphabet().max_rank() as u32;
        // With only leaves an ε-rule alone yields (k+1)² rules, above the
        // bound (see `size_bound_needs_a_branching_symbol`).
        prop_assume!(maxrk >= 1);
        let b = behaviour_automaton(&a, k).unwrap();
        let w = k as usize + 1;
        prop_assert!(b.state_count() <= a.state_count() * w * w);
        prop_assert!(b.transitions().len() <= a.transitions().len() * w.pow(maxrk + 1));
    }

    #[test]
    fn eliminate_epsilon_is_idempotent(seed in any::<u64>()) {
        let f = Fta::new(random_gocta(seed, &RandomParams::fta())).unwrap();
        let e = eliminate_epsilon(&f);
        prop_assert!(!e.has_eps());
        prop_assert_eq!(eliminate_epsilon(&e), e);
    }

    #[test]
    fn implicit_and_explicit_behaviour_agree((a, t) in instance(RandomParams::default(), 4), k in 0u64..=5) {
        let a2 = normalize(&make_zero_accepting(&a)).unwrap();
        let explicit = eliminate_epsilon(&behaviour_automaton(&a2, k).unwrap());
        prop_assert_eq!(fta_member(&explicit, &t).unwrap(), behaviour_member(&a2, &t, k).unwrap());
    }

    #[test]
    fn decider_matches_oracle((a, t) in instance(RandomParams::default(), 6)) {
        let d = Decider::new(&a).unwrap();
        let first = d.decide(&t).unwrap();
        prop_assert_eq!(&first, &d.decide(&t).unwrap());
        let oracle = oracle_member_global(d.transformed(), &t, first.bound).unwrap().is_some();
        prop_assert_eq!(first.member, oracle);
    }

    #[test]
    fn r_steps_rewrite_the_leftmost_nonterminal(choices in prop::collection::vec(any::<Pick>(), 1..20)) {
        let g = Icg::parse(include_str!("../../../fixtures/grammars/g_anbnc.icg")).unwrap();
        let mut form = SententialForm::start();
        for pick in choices {
            let next: Vec<SententialForm> = (0..g.productions().len())
                .filter_map(|p| derive_r_step(&g, &form, p))
                .collect();
            if next.is_empty() {
                break;
            }
            let chosen = pick.get(&next).clone();
            let at = form.leftmost_nonterminal().unwrap();
            prop_assert_eq!(&form.0[..at], &chosen.0[..at]);
            form = chosen;
        }
    }
}
