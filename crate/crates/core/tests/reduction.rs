mod common;

use cac_core::reduction::{
    convertible, critical_pairs, joinable, match_algebraic, normalize, one_step_reducts, unify_all,
    weak_head_normalize, Normalizer, StepTag, Strategy, Unification, Verdict, WhnfMode,
};
use cac_core::term::{alpha_eq, substitute, Position, Var};
use common::{corpus, system, term, v};

const PEANO: &str = "
symb nat : *
symb 0 : nat
symb s : nat -> nat
symb plus : nat -> nat -> nat
prec plus > s
rule plus 0 y --> y
rule plus (s x) y --> s (plus x y)
";

#[test]
fn matching_examples() {
    let sys = system(PEANO);
    let sigma = match_algebraic(&term(&sys, "plus 0 y"), &term(&sys, "plus 0 (s 0)")).unwrap();
    assert_eq!(sigma.get(&Var::obj("y")), Some(&term(&sys, "s 0")));
    assert_eq!(sigma.len(), 1);
    assert!(match_algebraic(&term(&sys, "plus (s x) y"), &term(&sys, "plus 0 0")).is_none());

    let eq = system("symb nat : *\nsymb 0 : nat\nsymb s : nat -> nat\nsymb eq : (A:*) A -> A -> *\n");
    assert!(match_algebraic(&term(&eq, "eq A x x"), &term(&eq, "eq nat 0 (s 0)")).is_none());
    let sigma = match_algebraic(&term(&eq, "eq A x x"), &term(&eq, "eq nat (s 0) (s 0)")).unwrap();
    assert_eq!(sigma.get(&Var::obj("x")), Some(&term(&eq, "s 0")));
}

#[test]
fn matching_instantiates_the_pattern() {
    let sys = corpus("corpus");
    for (pat, t) in [
        ("app A (cons A' x l) l'", "app nat (cons nat 0 (nil nat)) (nil nat)"),
        ("times x (s y)", "times (s 0) (s (s 0))"),
        ("plus (plus x y) z", "plus (plus 0 (s 0)) 0"),
    ] {
        let (p, t) = (term(&sys, pat), term(&sys, t));
        let sigma = match_algebraic(&p, &t).unwrap();
        assert!(alpha_eq(&substitute(&p, &sigma), &t), "{pat}");
    }
}

#[test]
fn one_step_reducts_examples() {
    let sys = system(PEANO);
    let rs = sys.rewrite_system();

    let beta = term(&sys, "([x:nat] x) 0");
    let out = one_step_reducts(&rs, &beta);
    assert_eq!(out.len(), 1);
    assert_eq!(out[0].term, term(&sys, "0"));
    assert_eq!(out[0].tag, StepTag::Beta);
    assert!(out[0].pos.is_root());

    let t = term(&sys, "plus (s 0) 0");
    let out = one_step_reducts(&rs, &t);
    assert!(out
        .iter()
        .any(|r| r.pos.is_root() && matches!(r.tag, StepTag::Rule(2)) && r.term == term(&sys, "s (plus 0 0)")));

    assert!(one_step_reducts(&rs, &term(&sys, "0")).is_empty());
}

#[test]
fn normalize_examples() {
    let sys = system(PEANO);
    let rs = sys.rewrite_system();
    let res = Normalizer::new(&rs, 100).run(&term(&sys, "plus (s (s 0)) (s (s 0))"), Strategy::Innermost).unwrap();
    assert_eq!(res.term, term(&sys, "s (s (s (s 0)))"));
    assert!(res.steps <= 10);

    let arith = corpus("arith");
    let rs = arith.rewrite_system();
    let res = Normalizer::new(&rs, 100).run(&term(&arith, "plus n 0"), Strategy::Innermost).unwrap();
    assert_eq!(res.term, v("n"));
    assert_eq!(res.steps, 1);
    assert_eq!(normalize(&rs, &term(&arith, "map f nil"), 10).unwrap(), term(&arith, "nil"));
}

#[test]
fn normalize_reports_fuel_exhaustion() {
    let sys = system("symb nat : *\nsymb 0 : nat\nsymb loop : nat -> nat\nrule loop x --> loop x\n");
    let rs = sys.rewrite_system();
    let err = normalize(&rs, &term(&sys, "loop 0"), 50).unwrap_err();
    assert_eq!(err.budget, 50);
}

#[test]
fn trace_records_each_contraction() {
    let sys = system(PEANO);
    let rs = sys.rewrite_system();
    let res = Normalizer::new(&rs, 100)
        .with_trace()
        .run(&term(&sys, "plus (s 0) (s 0)"), Strategy::Innermost)
        .unwrap();
    assert_eq!(res.trace.len() as u64, res.steps);
    assert_eq!(res.trace[0].tag, StepTag::Rule(2));
    assert_eq!(res.trace[0].pos, Position::root());
    assert_eq!(res.trace[0].result, term(&sys, "s (plus 0 (s 0))"));
}

#[test]
fn weak_head_examples() {
    let sys = system(PEANO);
    let rs = sys.rewrite_system();
    let t = term(&sys, "([y:nat] y) a");
    assert_eq!(weak_head_normalize(&rs, WhnfMode::BetaOnly, &t, 10).unwrap(), v("a"));
    let stuck = term(&sys, "plus 0 y");
    assert_eq!(weak_head_normalize(&rs, WhnfMode::BetaOnly, &stuck, 10).unwrap(), stuck);
    assert_eq!(weak_head_normalize(&rs, WhnfMode::BetaRules, &stuck, 10).unwrap(), v("y"));
    let prod = term(&sys, "(x:nat) nat");
    assert_eq!(weak_head_normalize(&rs, WhnfMode::BetaRules, &prod, 10).unwrap(), prod);
}

#[test]
fn convertibility_examples() {
    let sys = corpus("fixlist");
    let rs = sys.rewrite_system();
    let four = term(&sys, "list (s (s (s (s 0))))");
    let sum = term(&sys, "list (plus (s (s 0)) (s (s 0)))");
    assert_eq!(convertible(&rs, &sum, &four, 100), Verdict::Holds);
    let nat = term(&sys, "nat");
    assert!(convertible(&rs, &nat, &term(&sys, "nat -> nat"), 100).fails());
    assert_eq!(convertible(&rs, &sum, &sum, 100), Verdict::Holds);

    let looping = system("symb nat : *\nsymb 0 : nat\nsymb loop : nat -> nat\nrule loop x --> loop x\n");
    let lrs = looping.rewrite_system();
    let t = term(&looping, "loop 0");
    assert!(matches!(convertible(&lrs, &t, &term(&looping, "0"), 20), Verdict::Undecided(_)));
}

#[test]
fn joinability_examples() {
    let sys = corpus("intquot");
    let rs = sys.rewrite_system();
    assert_eq!(joinable(&rs, &term(&sys, "s y"), &term(&sys, "s y"), 10), Verdict::Holds);
    assert!(joinable(&rs, &term(&sys, "0"), &term(&sys, "s 0"), 10).fails());

    // joinability is by rules alone: a beta redex is left untouched
    let peano = system(PEANO);
    let prs = peano.rewrite_system();
    assert!(joinable(&prs, &term(&peano, "([x:nat] x) 0"), &term(&peano, "0"), 10).fails());
}

#[test]
fn unification_examples() {
    let sys = system(PEANO);
    let rigid = |_: &str| true;
    match unify_all(&[(term(&sys, "plus x (s 0)"), term(&sys, "plus 0 y"))], &rigid) {
        Unification::Unified(s) => {
            assert_eq!(s.get(&Var::obj("x")), Some(&term(&sys, "0")));
            assert_eq!(s.get(&Var::obj("y")), Some(&term(&sys, "s 0")));
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(unify_all(&[(term(&sys, "s x"), term(&sys, "0"))], &rigid), Unification::Clash(_)));
    assert!(matches!(unify_all(&[(v("x"), term(&sys, "s x"))], &rigid), Unification::Clash(_)));
    let flexible = |f: &str| f != "plus";
    assert!(matches!(
        unify_all(&[(term(&sys, "plus x 0"), term(&sys, "plus 0 x"))], &flexible),
        Unification::Stuck(_)
    ));
}

#[test]
fn integer_quotient_critical_pairs() {
    let sys = corpus("intquot");
    let rs = sys.rewrite_system();
    let cps = critical_pairs(&rs);
    assert_eq!(cps.len(), 2);
    for cp in &cps {
        assert!(alpha_eq(&cp.left, &cp.right), "{} / {}", cp.left, cp.right);
        assert_eq!(joinable(&rs, &cp.left, &cp.right, 1000), Verdict::Holds);
    }
    let peaks: Vec<String> = cps.iter().map(|cp| cp.peak.to_string()).collect();
    assert!(peaks.iter().any(|p| p.starts_with("s (p (s ")), "{peaks:?}");
    assert!(peaks.iter().any(|p| p.starts_with("p (s (p ")), "{peaks:?}");
}

#[test]
fn no_overlap_no_pairs() {
    let sys = system("symb nat : *\nsymb 0 : nat\nsymb plus : nat -> nat -> nat\nrule plus 0 y --> y\n");
    assert!(critical_pairs(&sys.rewrite_system()).is_empty());
}

#[test]
fn corpus_critical_pairs_join() {
    let sys = corpus("corpus");
    let rs = sys.rewrite_system();
    let cps = critical_pairs(&rs);
    assert!(!cps.is_empty());
    for cp in &cps {
        assert_eq!(joinable(&rs, &cp.left, &cp.right, 1000), Verdict::Holds, "peak {}", cp.peak);
    }
    // the associativity rule of app overlaps with the nil rule
    assert!(cps.iter().any(|cp| cp.peak.to_string().starts_with("app A (app A' (nil ")));
}

#[test]
fn strategies_agree_on_corpus_terms() {
    let sys = corpus("corpus");
    let rs = sys.rewrite_system();
    for text in [
        "times (s (s 0)) (plus (s 0) (s 0))",
        "len nat (app nat (cons nat 0 (nil nat)) (cons nat (s 0) (nil nat)))",
        "sub nat (cons nat 0 (nil nat)) (cons nat (s 0) (cons nat 0 (nil nat)))",
    ] {
        let t = term(&sys, text);
        let a = Normalizer::new(&rs, 10_000).run(&t, Strategy::Innermost).unwrap();
        let b = Normalizer::new(&rs, 10_000).run(&t, Strategy::Outermost).unwrap();
        assert!(alpha_eq(&a.term, &b.term), "{text}: {} vs {}", a.term, b.term);
    }
}
