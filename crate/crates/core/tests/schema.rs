mod common;

use cac_core::conditions::rules_below;
use cac_core::reduction::{RewriteSystem, Verdict};
use cac_core::schema::{cc_check, general_schema_check, multiset_compare, status_compare, Cmp, RuleOrder};
use cac_core::signature::Status;
use common::{corpus, term, v};
use proptest::prelude::*;

const FUEL: u64 = 10_000;

fn gt(a: &u8, b: &u8) -> bool {
    a > b
}
fn eq(a: &u8, b: &u8) -> bool {
    a == b
}

/// Multiset extension of a total order: compare the sorted-descending
/// sequences lexicographically.
fn mul_oracle(m: &[u8], n: &[u8]) -> std::cmp::Ordering {
    let mut a = m.to_vec();
    let mut b = n.to_vec();
    a.sort_unstable_by(|x, y| y.cmp(x));
    b.sort_unstable_by(|x, y| y.cmp(x));
    a.cmp(&b)
}

fn lex_mul_oracle(slots: &[Vec<usize>], u: &[u8], v: &[u8]) -> bool {
    for slot in slots {
        let mu: Vec<u8> = slot.iter().map(|&k| u[k - 1]).collect();
        let mv: Vec<u8> = slot.iter().map(|&k| v[k - 1]).collect();
        match mul_oracle(&mu, &mv) {
            std::cmp::Ordering::Greater => return true,
            std::cmp::Ordering::Less => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    false
}

fn mixed_status() -> Status {
    Status { slots: vec![vec![2], vec![1, 3]] }
}

#[test]
fn status_compare_examples() {
    let stat = mixed_status();
    // the second argument decides first
    assert!(status_compare(&stat, &[0, 5, 0], &[9, 4, 9], &gt, &eq).unwrap());
    assert!(!status_compare(&stat, &[9, 4, 9], &[0, 5, 0], &gt, &eq).unwrap());
    // then the multiset {u1, u3}
    assert!(status_compare(&stat, &[3, 1, 0], &[2, 1, 2], &gt, &eq).unwrap());
    assert!(!status_compare(&stat, &[3, 1, 0], &[0, 1, 3], &gt, &eq).unwrap());
    assert!(!status_compare(&stat, &[1, 2, 3], &[1, 2, 3], &gt, &eq).unwrap());

    let single = Status { slots: vec![vec![1]] };
    assert!(status_compare(&single, &[1], &[0], &gt, &eq).unwrap());
    assert!(status_compare(&single, &[1], &[], &gt, &eq).is_err());
}

#[test]
fn multiset_examples() {
    assert_eq!(multiset_compare(&[3u8], &[2, 2, 1], &gt, &eq), Cmp::Greater);
    assert_eq!(multiset_compare(&[1u8, 2], &[2, 1], &gt, &eq), Cmp::Equal);
    assert_eq!(multiset_compare(&[2u8], &[2, 2], &gt, &eq), Cmp::NotGreater);
    assert_eq!(multiset_compare::<u8>(&[], &[], &gt, &eq), Cmp::Equal);
}

#[test]
fn status_ordering_has_no_cycles_on_small_tuples() {
    let stat = mixed_status();
    let tuples: Vec<[u8; 3]> =
        (0..4).flat_map(|a| (0..4).flat_map(move |b| (0..4).map(move |c| [a, b, c]))).collect();
    let succ: Vec<Vec<usize>> = tuples
        .iter()
        .map(|u| {
            (0..tuples.len())
                .filter(|&j| status_compare(&stat, u, &tuples[j], &gt, &eq).unwrap())
                .collect()
        })
        .collect();
    // Kahn's algorithm: a cycle would leave nodes with positive in-degree.
    let mut indeg = vec![0usize; tuples.len()];
    for s in &succ {
        for &j in s {
            indeg[j] += 1;
        }
    }
    let mut queue: Vec<usize> = (0..tuples.len()).filter(|&i| indeg[i] == 0).collect();
    let mut seen = 0;
    while let Some(i) = queue.pop() {
        seen += 1;
        for &j in &succ[i] {
            indeg[j] -= 1;
            if indeg[j] == 0 {
                queue.push(j);
            }
        }
    }
    assert_eq!(seen, tuples.len());
}

proptest! {
    #[test]
    fn status_compare_matches_oracle(u in prop::array::uniform3(0u8..5), w in prop::array::uniform3(0u8..5)) {
        let stat = mixed_status();
        let got = status_compare(&stat, &u, &w, &gt, &eq).unwrap();
        prop_assert_eq!(got, lex_mul_oracle(&stat.slots, &u, &w));
    }

    #[test]
    fn status_compare_is_strict(u in prop::array::uniform3(0u8..5), w in prop::array::uniform3(0u8..5)) {
        let stat = mixed_status();
        prop_assert!(!status_compare(&stat, &u, &u, &gt, &eq).unwrap());
        let forward = status_compare(&stat, &u, &w, &gt, &eq).unwrap();
        let backward = status_compare(&stat, &w, &u, &gt, &eq).unwrap();
        prop_assert!(!(forward && backward));
    }
}

#[test]
fn limit_is_greater_than_its_instances() {
    let sys = corpus("ord");
    let rule = sys.rules.iter().find(|r| r.rhs.to_string().starts_with("lim")).unwrap();
    let order = RuleOrder { sig: &sys.sig, rule };
    let ord = term(&sys, "ord");
    let lim_f = (term(&sys, "lim f"), ord.clone());
    let f_n = (term(&sys, "f n"), ord.clone());
    assert!(order.sp_gt(&lim_f, &f_n));
    assert!(!order.acc_gt(&lim_f, &f_n));
    let lhs = vec![(v("x"), ord.clone()), lim_f];
    let call = vec![(v("x"), ord.clone()), f_n];
    assert!(order.args_gt(&lhs, &call).unwrap());
    assert!(!order.args_gt(&call, &lhs).unwrap());
}

#[test]
fn cons_is_greater_than_its_tail() {
    let sys = corpus("fixlist");
    let rule = sys.rules.iter().filter(|r| &*r.head == "app").nth(1).unwrap();
    let order = RuleOrder { sig: &sys.sig, rule };
    let cons = (term(&sys, "cons x n l"), term(&sys, "list p"));
    let tail = (v("l"), term(&sys, "list n"));
    assert!(order.acc_gt(&cons, &tail));
    let lhs = rule.typed_args(&sys.sig);
    let call = vec![
        (v("n"), term(&sys, "nat")),
        tail,
        (v("n'"), term(&sys, "nat")),
        (v("l'"), term(&sys, "list n'")),
    ];
    assert!(order.args_gt(&lhs, &call).unwrap());
}

#[test]
fn closure_examples() {
    let fixlist = corpus("fixlist");
    for r in &fixlist.rules {
        let below = rules_below(&fixlist, &r.head);
        assert_eq!(cc_check(&fixlist.sig, &below, FUEL, r), Verdict::Holds, "{}", r.label());
    }
    let ord = corpus("ord");
    for r in &ord.rules {
        let below = rules_below(&ord, &r.head);
        assert_eq!(general_schema_check(&ord.sig, &below, FUEL, r), Verdict::Holds, "{}", r.label());
    }
    let cont = corpus("cont");
    let ex = cont.rules.iter().find(|r| r.rhs.to_string() == "f ex").unwrap();
    let verdict = cc_check(&cont.sig, &rules_below(&cont, "ex"), FUEL, ex);
    assert!(verdict.fails());
    assert!(verdict.reason().contains("(symb=)"), "{verdict}");
}

#[test]
fn corpus_rules_are_in_the_schema_except_associativity() {
    let sys = corpus("corpus");
    let mut outside = Vec::new();
    for r in &sys.rules {
        let below = rules_below(&sys, &r.head);
        let v = general_schema_check(&sys.sig, &below, FUEL, r);
        if !v.holds() {
            assert!(v.reason().contains("(ii)"), "{}: {v}", r.label());
            outside.push(r.lhs.to_string());
        }
    }
    // plus is first-order and handled by the path ordering instead
    assert_eq!(outside, vec!["plus (plus x y) z".to_string()]);
}

#[test]
fn closure_is_monotone_in_the_validated_rules() {
    let sys = corpus("corpus");
    let full = sys.rewrite_system();
    let none = RewriteSystem::empty();
    for r in &sys.rules {
        for smaller in [&none, &rules_below(&sys, &r.head)] {
            if cc_check(&sys.sig, smaller, FUEL, r).holds() {
                assert_eq!(cc_check(&sys.sig, &full, FUEL, r), Verdict::Holds, "{}", r.label());
            }
        }
    }
}

#[test]
fn short_left_hand_side_is_rejected() {
    let sys = common::system(
        "symb nat : *\nsymb 0 : nat\nsymb s : nat -> nat\nsymb f : nat -> nat -> nat\n\
         status f = lex (mul x2)\nprec f > s\nrule f 0 --> s\n",
    );
    let r = &sys.rules[0];
    let order = RuleOrder { sig: &sys.sig, rule: r };
    let lhs = r.typed_args(&sys.sig);
    assert!(order.args_gt(&lhs, &lhs).is_err());
}
