//! Hand-written example automata.

use crate::automata::{Gocta, GoctaBuilder, Predicate::*};

const AB: [&str; 2] = ["a", "b"];

fn other(u: &str) -> &'static str {
    if u == "a" {
        "b"
    } else {
        "a"
    }
}

fn counting_rules(mut b: GoctaBuilder, state: impl Fn(&str) -> String) -> GoctaBuilder {
    for u in AB {
        let u2 = other(u);
        let here = state(u);
        b = b
            .read(&here, Top, 1, u, &[&here])
            .read(&here, GtZero, -1, u2, &[&here])
            .read(&here, EqZero, 1, u2, &[&state(u2)]);
    }
    b
}

/// Trees `sigma(t1,t2,t3)` over monadic `a`/`b` chains with as many `a`s
/// as `b`s.
///
/// State `[u]_v` counts the surplus of `u` and guesses that its subtree
/// ends in mode `v`. The last subtree runs in `[u]_end`, whose leaf rule
/// demands counter 0, so the accepted trees are exactly the balanced ones
/// even though the final counter is otherwise unconstrained.
pub fn a_eq_b() -> Gocta {
    let states = ["q0", "[a]_a", "[a]_b", "[b]_a", "[b]_b", "[a]_end", "[b]_end"];
    let mut b = GoctaBuilder::new(&[("sigma", 3), ("a", 1), ("b", 1), ("#", 0)], &states, "q0");
    for v in AB {
        for v2 in AB {
            let kids = [format!("[a]_{v}"), format!("[{v}]_{v2}"), format!("[{v2}]_end")];
            let kids: Vec<&str> = kids.iter().map(String::as_str).collect();
            b = b.read("q0", Top, 0, "sigma", &kids);
        }
    }
    for v in AB {
        b = counting_rules(b, |u| format!("[{u}]_{v}"));
    }
    b = counting_rules(b, |u| format!("[{u}]_end"));
    for u in AB {
        b = b
            .read(&format!("[{u}]_{u}"), Top, 0, "#", &[])
            .read(&format!("[{u}]_end"), EqZero, 0, "#", &[]);
    }
    b.build().expect("a_eq_b is well formed")
}

/// The five-state a=b automaton with its leaf rules unguarded. It accepts
/// every `sigma`-rooted tree over monadic chains, because the final
/// counter is not checked.
pub fn a_eq_b_as_printed() -> Gocta {
    let states = ["q0", "[a]_a", "[a]_b", "[b]_a", "[b]_b"];
    let mut b = GoctaBuilder::new(&[("sigma", 3), ("a", 1), ("b", 1), ("#", 0)], &states, "q0");
    for v in AB {
        for v2 in AB {
            for v3 in AB {
                let kids = [format!("[a]_{v}"), format!("[{v}]_{v2}"), format!("[{v2}]_{v3}")];
                let kids: Vec<&str> = kids.iter().map(String::as_str).collect();
                b = b.read("q0", Top, 0, "sigma", &kids);
            }
        }
    }
    for v in AB {
        b = counting_rules(b, |u| format!("[{u}]_{v}"));
    }
    for u in AB {
        b = b.read(&format!("[{u}]_{u}"), Top, 0, "#", &[]);
    }
    b.build().expect("a_eq_b_as_printed is well formed")
}

/// The multiplication gadget: started as `(C[p, q'], c)` for a context `C`
/// it reaches `(C[sigma^c(..), q'], k*c)`. `q'` has no transitions.
pub fn multiply_k(k: i64) -> Gocta {
    GoctaBuilder::new(&[("omega", 2), ("sigma", 2), ("#", 0)], &["p", "q", "q'"], "p")
        .read("q", Top, k, "#", &[])
        .read("p", GtZero, -1, "sigma", &["p", "q"])
        .read("p", EqZero, 0, "#", &[])
        .build()
        .expect("multiply_k is well formed")
}

/// Each `omega` block doubles the counter; a tree with `n` blocks has
/// `2^n - 1` occurrences of `sigma`.
pub fn pow2() -> Gocta {
    GoctaBuilder::new(&[("omega", 2), ("sigma", 2), ("#", 0)], &["q", "p", "f", "q0"], "q0")
        .read("q0", Top, 1, "omega", &["p", "f"])
        .read("q", Top, 2, "#", &[])
        .read("p", GtZero, -1, "sigma", &["p", "q"])
        .read("p", EqZero, 0, "#", &[])
        .read("f", Top, 0, "omega", &["p", "f"])
        .read("f", Top, 0, "#", &[])
        .build()
        .expect("pow2 is well formed")
}

/// Under copy semantics: `a^n(sigma(b^n #, c^n #))`.
pub fn a_sigma_b_c() -> Gocta {
    GoctaBuilder::new(
        &[("sigma", 2), ("a", 1), ("b", 1), ("c", 1), ("#", 0)],
        &["q0", "q1", "q2"],
        "q0",
    )
    .read("q0", Top, 1, "a", &["q0"])
    .read("q0", Top, 0, "sigma", &["q1", "q2"])
    .read("q1", GtZero, -1, "b", &["q1"])
    .read("q2", GtZero, -1, "c", &["q2"])
    .read("q1", EqZero, 0, "#", &[])
    .read("q2", EqZero, 0, "#", &[])
    .build()
    .expect("a_sigma_b_c is well formed")
}

/// The four named examples, `multiply_k` instantiated at `k`.
pub fn named_examples(k: i64) -> Vec<(&'static str, Gocta)> {
    vec![
        ("a_eq_b", a_eq_b()),
        ("multiply_k", multiply_k(k)),
        ("pow2", pow2()),
        ("a_sigma_b_c", a_sigma_b_c()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::validate;

    #[test]
    fn all_examples_validate() {
        for (name, a) in named_examples(3) {
            assert!(validate(&a.to_def()).is_empty(), "{name}");
        }
        assert!(validate(&a_eq_b_as_printed().to_def()).is_empty());
    }

    #[test]
    fn shapes() {
        assert_eq!(a_eq_b_as_printed().state_count(), 5);
        assert_eq!(a_eq_b_as_printed().transitions().len(), 8 + 12 + 2);
        assert_eq!(a_eq_b().state_count(), 7);
        assert_eq!(a_eq_b().transitions().len(), 4 + 18 + 4);
        let p = pow2();
        let mut names: Vec<&str> = p.states().iter().map(String::as_str).collect();
        names.sort();
        assert_eq!(names, ["f", "p", "q", "q0"]);
        assert_eq!(pow2().transitions().len(), 6);
        assert_eq!(a_sigma_b_c().states(), ["q0", "q1", "q2"]);
        assert_eq!(multiply_k(2).transitions().len(), 3);
    }

    #[test]
    fn neither_is_normalized_or_fta() {
        for (_, a) in named_examples(2) {
            assert!(!a.is_normalized());
            assert!(!a.is_fta());
        }
    }
}
