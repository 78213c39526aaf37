mod common;

use cac_core::signature::LoadError;
use cac_core::syntax::{parse, print_source, Decl, PrecRel};
use cac_core::term::{Term, Var};

const FILES: &[&str] =
    &["corpus", "arith", "fixlist", "ord", "intquot", "rec", "mendler", "girard", "division", "cont"];

#[test]
fn parse_print_parse_is_a_fixpoint() {
    for name in FILES {
        let text = std::fs::read_to_string(common::corpus_path(name)).unwrap();
        let first = parse(&text).unwrap();
        let printed = print_source(&first);
        let second = parse(&printed).unwrap_or_else(|e| panic!("{name}: {e}\n{printed}"));
        assert!(first.alpha_equivalent(&second), "{name}");
        assert_eq!(print_source(&second), printed, "{name}");
    }
}

#[test]
fn symbol_declaration() {
    let src = parse("symb nat : *\nsymb s : nat -> nat\n").unwrap();
    match &src.decls[1] {
        Decl::Symb { name, ty, line } => {
            assert_eq!(name, "s");
            assert_eq!(*line, 2);
            assert_eq!(*ty, Term::arrow(Term::symb("nat"), Term::symb("nat")));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn rule_declaration_with_clauses() {
    let text = "symb nat : *\nsymb 0 : nat\nsymb f : nat -> nat -> nat\n\
                rule f p x --> x\n  env x : nat\n  rho p := 0\n  assume s5\n";
    let src = parse(text).unwrap();
    let Decl::Rule(r) = &src.decls[3] else { panic!() };
    assert_eq!(r.line, 4);
    assert_eq!(r.rhs, Term::var(&Var::obj("x")));
    assert_eq!(r.env.as_ref().unwrap().len(), 1);
    assert_eq!(r.rho.as_ref().unwrap()[0].1, Term::symb("0"));
    assert_eq!(r.assume, vec!["s5".to_string()]);

    let bare = parse("symb nat : *\nsymb 0 : nat\nsymb plus : nat -> nat -> nat\nrule plus 0 y --> y\n").unwrap();
    let Decl::Rule(r) = &bare.decls[3] else { panic!() };
    assert!(r.env.is_none() && r.rho.is_none());
}

#[test]
fn other_declarations() {
    let src = parse(
        "symb list : * -> *\nmon list = {1}\nacc list = {1}\nsymb f : *\nprec f > list\nprec list = f\n\
         status f = lex (mul x2) (mul x1 x3)\n",
    )
    .unwrap();
    assert!(matches!(&src.decls[1], Decl::Mon { indices, .. } if indices == &vec![1]));
    assert!(matches!(&src.decls[2], Decl::Acc { indices, .. } if indices == &vec![1]));
    assert!(matches!(&src.decls[4], Decl::Prec { rel: PrecRel::Greater, .. }));
    assert!(matches!(&src.decls[5], Decl::Prec { rel: PrecRel::Equal, .. }));
    let Decl::Status { status, .. } = &src.decls[6] else { panic!() };
    assert_eq!(status.slots, vec![vec![2], vec![1, 3]]);
}

#[test]
fn binder_sorts_follow_annotations() {
    let src = parse("symb id : (A:*) A -> A\n").unwrap();
    let Decl::Symb { ty, .. } = &src.decls[0] else { panic!() };
    let Term::Prod(a, _, _) = ty else { panic!() };
    assert_eq!(a.sort, cac_core::term::Sort::Box);
}

#[test]
fn errors_carry_line_and_column() {
    let e = parse("symb nat : *\nsymb s : nat ->\n").unwrap_err();
    assert_eq!(e.line, 3);
    let e = parse("symb nat : *\nsymb 0 nat\n").unwrap_err();
    assert_eq!((e.line, e.col), (2, 8));
    let e = parse("symb nat : *\n  rho x := 0\n").unwrap_err();
    assert_eq!(e.line, 2);
    assert!(e.msg.contains("rho"), "{}", e.msg);
    let e = parse("symb nat : *\nsymb n@t : *\n").unwrap_err();
    assert_eq!(e.line, 2);
    assert!(e.to_string().starts_with("2:"), "{e}");
}

#[test]
fn duplicate_declarations_are_rejected() {
    let dup = cac_core::signature::load("symb nat : *\nsymb nat : *\n");
    assert!(matches!(dup, Err(LoadError::Parse(_)) | Err(LoadError::Elab(_))));
}

#[test]
fn comments_are_ignored() {
    let src = parse("# header\nsymb nat : * # trailing\n\n# end\n").unwrap();
    assert_eq!(src.decls.len(), 1);
}
