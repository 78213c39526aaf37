#![allow(dead_code)]

use std::path::PathBuf;

use cac_core::signature::{load, System};
use cac_core::syntax::parse_term;
use cac_core::term::{Term, Var};

pub fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(format!("{name}.cac"))
}

pub fn corpus(name: &str) -> System {
    let text = std::fs::read_to_string(corpus_path(name)).expect("corpus file");
    load(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn system(text: &str) -> System {
    load(text).unwrap_or_else(|e| panic!("{e}"))
}

pub fn term(sys: &System, text: &str) -> Term {
    parse_term(text, &sys.symbol_names()).unwrap_or_else(|e| panic!("{text}: {e}"))
}

pub fn sy(n: &str) -> Term {
    Term::symb(n)
}

pub fn v(n: &str) -> Term {
    Term::var(&Var::obj(n))
}
