mod common;

use cac_core::reduction::Verdict;
use cac_core::rules::{accessible, s4_check, s5_check, syntactic_check, Rule, RuleContext};
use cac_core::signature::System;
use cac_core::term::{Subst, Var};
use cac_core::typing::Env;
use common::{corpus, system, term, v};

const FUEL: u64 = 10_000;

fn rule<'a>(sys: &'a System, head: &str, nth: usize) -> &'a Rule {
    sys.rules.iter().filter(|r| &*r.head == head).nth(nth).unwrap()
}

#[test]
fn syntactic_flags() {
    let sys = system(
        "symb nat : *\nsymb 0 : nat\nsymb plus : nat -> nat -> nat\n\
         symb and : * -> * -> *\nsymb xor : * -> * -> *\nprec and > xor\n\
         symb eq : (A:*) A -> A -> *\nsymb top : *\nprec eq > top\n\
         rule plus 0 y --> y\n\
         rule and P (xor Q R) --> xor (and P Q) (and P R)\n\
         rule eq A x x --> top\n",
    );
    let (v0, f0) = syntactic_check(&sys.sig, &sys.rules[0]);
    assert_eq!(v0, Verdict::Holds);
    assert!(f0.left_linear && !f0.duplicating);
    let (v1, f1) = syntactic_check(&sys.sig, &sys.rules[1]);
    assert_eq!(v1, Verdict::Holds);
    assert!(f1.left_linear && f1.duplicating);
    let (_, f2) = syntactic_check(&sys.sig, &sys.rules[2]);
    assert!(!f2.left_linear);
}

#[test]
fn syntactic_check_reports_rho_on_environment_variables() {
    let sys = corpus("arith");
    let mut r = rule(&sys, "le", 0).clone();
    r.rho = Subst::single(Var::obj("y"), term(&sys, "0"));
    let (verdict, _) = syntactic_check(&sys.sig, &r);
    assert!(verdict.reason().contains("declared in the environment"), "{verdict}");
}

#[test]
fn accessibility_examples() {
    let sys = corpus("fixlist");
    let rho = Subst::single(Var::obj("p"), term(&sys, "s n"));
    let cons = term(&sys, "cons x n l");
    let list_p = term(&sys, "list p");
    assert!(accessible(&sys.sig, &rho, &cons, &list_p, &v("x"), &term(&sys, "nat")));
    assert!(accessible(&sys.sig, &rho, &cons, &list_p, &v("l"), &term(&sys, "list n")));
    // without rho the output types disagree
    assert!(!accessible(&sys.sig, &Subst::new(), &cons, &list_p, &v("x"), &term(&sys, "nat")));

    let ord = corpus("ord");
    let lim = term(&ord, "lim f");
    assert!(accessible(&ord.sig, &Subst::new(), &lim, &term(&ord, "ord"), &v("f"), &term(&ord, "nat -> ord")));
    assert!(!accessible(&ord.sig, &Subst::new(), &lim, &term(&ord, "ord"), &v("f"), &term(&ord, "ord")));
}

#[test]
fn accessible_subterms_are_strict_and_closed() {
    use cac_core::rules::strictly_accessible;
    use cac_core::term::free_vars;
    let sys = corpus("corpus");
    for r in &sys.rules {
        for (arg, ty) in r.typed_args(&sys.sig) {
            for (u, _) in strictly_accessible(&sys.sig, &r.rho, &arg, &ty) {
                assert!(u.size() < arg.size(), "{u} in {arg}");
                assert!(free_vars(&u, None).is_subset(&free_vars(&arg, None)));
            }
        }
    }
}

#[test]
fn well_formedness_examples() {
    let sys = corpus("fixlist");
    let rs = sys.rewrite_system();
    let rc = RuleContext { sig: &sys.sig, rs: &rs, fuel: FUEL };
    let app2 = rule(&sys, "app", 1);
    assert_eq!(rc.well_formed_check(app2), Verdict::Holds);

    let mut missing = app2.clone();
    let kept: Vec<_> = missing.env.bindings().iter().filter(|(x, _)| &*x.name != "l'").cloned().collect();
    missing.env = Env::from_bindings(kept);
    assert!(rc.well_formed_check(&missing).fails());

    let arith = corpus("arith");
    let ars = arith.rewrite_system();
    let arc = RuleContext { sig: &arith.sig, rs: &ars, fuel: FUEL };
    let mut bad = rule(&arith, "le", 0).clone();
    bad.rho = Subst::single(Var::obj("y"), term(&arith, "0"));
    let verdict = arc.well_formed_check(&bad);
    assert!(verdict.fails());
    assert!(verdict.reason().contains("(iii)"), "{verdict}");
}

#[test]
fn s3_examples() {
    let sys = corpus("fixlist");
    let rs = sys.rewrite_system();
    let rc = RuleContext { sig: &sys.sig, rs: &rs, fuel: FUEL };
    let app2 = rule(&sys, "app", 1);
    assert_eq!(rc.s3_check(app2), Verdict::Holds);
    let mut bad = app2.clone();
    bad.rhs = term(&sys, "0");
    assert!(rc.s3_check(&bad).fails());
    for r in &sys.rules {
        assert_eq!(rc.s3_check(r), Verdict::Holds, "{}", r.label());
    }
}

#[test]
fn s4_examples() {
    let sys = corpus("fixlist");
    for r in &sys.rules {
        assert_eq!(s4_check(&sys.sig, r), Verdict::Holds, "{}", r.label());
    }
    let mut bad = rule(&sys, "app", 1).clone();
    let bindings: Vec<_> = bad
        .env
        .bindings()
        .iter()
        .map(|(x, t)| if &*x.name == "l" { (x.clone(), term(&sys, "list (s n)")) } else { (x.clone(), t.clone()) })
        .collect();
    bad.env = Env::from_bindings(bindings);
    let verdict = s4_check(&sys.sig, &bad);
    assert!(verdict.fails());
    assert!(verdict.reason().contains("no occurrence of l"), "{verdict}");
}

#[test]
fn s5_examples() {
    let fixlist = corpus("fixlist");
    assert_eq!(s5_check(&fixlist.sig, rule(&fixlist, "app", 1)), Verdict::Holds);
    let poly = corpus("corpus");
    assert_eq!(s5_check(&poly.sig, rule(&poly, "app", 1)), Verdict::Holds);
    for r in &poly.rules {
        assert_eq!(s5_check(&poly.sig, r), Verdict::Holds, "{}", r.label());
    }

    let free = system(
        "symb nat : *\nsymb 0 : nat\nsymb f : nat -> nat -> nat\nrule f q x --> x\n  env x : nat\n  rho q := 0\n",
    );
    assert!(matches!(s5_check(&free.sig, &free.rules[0]), Verdict::Undecided(_)));
    let assumed = system(
        "symb nat : *\nsymb 0 : nat\nsymb f : nat -> nat -> nat\nrule f q x --> x\n  env x : nat\n  rho q := 0\n  assume s5\n",
    );
    assert!(matches!(s5_check(&assumed.sig, &assumed.rules[0]), Verdict::Assumed(_)));
}

#[test]
fn default_environment_uses_derived_types() {
    let sys = corpus("corpus");
    let r = rule(&sys, "app", 1);
    let names: Vec<String> = r.env.bindings().iter().map(|(x, _)| x.name.to_string()).collect();
    assert!(!names.contains(&"A'".to_string()), "{names:?}");
    let l = r.env.lookup("l").unwrap();
    assert_eq!(l.1, term(&sys, "list A"));
}
