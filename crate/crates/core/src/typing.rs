//! Syntax-directed type inference and checking modulo beta and the rewrite
//! rules, canonical and derived types, term classification and the
//! right-hand-side shape conditions.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::reduction::{convertible, normalize, weak_head_normalize, RewriteSystem, Verdict, WhnfMode};
use crate::signature::Signature;
use crate::term::{instantiate_product, subst1, Position, Sort, Term, Var};

/// Ordered typing context.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Env {
    bindings: Vec<(Var, Term)>,
}

impl Env {
    pub fn new() -> Env {
        Env::default()
    }
    pub fn from_bindings(bindings: Vec<(Var, Term)>) -> Env {
        Env { bindings }
    }
    pub fn push(&mut self, x: Var, ty: Term) {
        self.bindings.push((x, ty));
    }
    pub fn extended(&self, x: Var, ty: Term) -> Env {
        let mut e = self.clone();
        e.push(x, ty);
        e
    }
    pub fn lookup(&self, name: &str) -> Option<&(Var, Term)> {
        self.bindings.iter().rev().find(|(x, _)| &*x.name == name)
    }
    pub fn contains(&self, x: &Var) -> bool {
        self.lookup(&x.name).is_some()
    }
    pub fn bindings(&self) -> &[(Var, Term)] {
        &self.bindings
    }
    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.bindings.iter().map(|(x, _)| x)
    }
    pub fn len(&self) -> usize {
        self.bindings.len()
    }
    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }
}

impl fmt::Display for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.bindings.iter().map(|(x, t)| format!("{}:{}", x.name, t)).collect();
        write!(f, "{}", parts.join(", "))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TypeError {
    #[error("unbound variable {0}")]
    Unbound(String),
    #[error("unknown symbol {0}")]
    UnknownSymbol(String),
    #[error("the sort BOX has no type")]
    BoxHasNoType,
    #[error("{term} has type {ty}, which is not a product")]
    NotAProduct { term: String, ty: String },
    #[error("{term} has type {ty}, which is not a sort")]
    NotASort { term: String, ty: String },
    #[error("argument {arg} has type {found} but {expected} was expected")]
    DomainMismatch { arg: String, expected: String, found: String },
    #[error("{term} has type {found} but {expected} was expected")]
    Mismatch { term: String, expected: String, found: String },
    #[error("binder {var} is tagged with sort {tagged} but its type lives in {actual}")]
    SortTag { var: String, tagged: String, actual: String },
    #[error("abstraction body {0} is a kind-level type")]
    BadAbstraction(String),
    #[error("variable {0} declared twice in the environment")]
    Redeclared(String),
    #[error("arity mismatch: {0}")]
    Arity(String),
    #[error("position {0} is not of the form (1*2)+ for this term")]
    BadPosition(String),
    #[error("head of {0} is not a symbol")]
    NotSymbolHeaded(String),
    #[error("undecided conversion: {0}")]
    Undecided(String),
}

/// Inference context: signature, the rules usable in conversions, and the
/// per-conversion step budget.
#[derive(Clone, Copy)]
pub struct Typer<'a> {
    pub sig: &'a Signature,
    pub rs: &'a RewriteSystem,
    pub fuel: u64,
}

impl<'a> Typer<'a> {
    pub fn new(sig: &'a Signature, rs: &'a RewriteSystem, fuel: u64) -> Typer<'a> {
        Typer { sig, rs, fuel }
    }

    pub fn infer(&self, env: &Env, t: &Term) -> Result<Term, TypeError> {
        match t {
            Term::Sort(Sort::Star) => Ok(Term::kind_box()),
            Term::Sort(Sort::Box) => Err(TypeError::BoxHasNoType),
            Term::Var(x) => env
                .lookup(&x.name)
                .map(|(_, ty)| ty.clone())
                .ok_or_else(|| TypeError::Unbound(x.name.to_string())),
            Term::Symb(f) => self
                .sig
                .symbol(f)
                .map(|d| d.ty.clone())
                .ok_or_else(|| TypeError::UnknownSymbol(f.to_string())),
            Term::Prod(x, a, b) => {
                self.binder_sort(env, x, a)?;
                let inner = env.extended(x.clone(), a.as_ref().clone());
                let sb = self.infer(&inner, b)?;
                let s = self.as_sort(&sb).ok_or_else(|| TypeError::NotASort {
                    term: b.to_string(),
                    ty: sb.to_string(),
                })?;
                Ok(Term::Sort(s))
            }
            Term::Abs(x, a, b) => {
                self.binder_sort(env, x, a)?;
                let inner = env.extended(x.clone(), a.as_ref().clone());
                let tb = self.infer(&inner, b)?;
                if matches!(tb, Term::Sort(Sort::Box)) {
                    return Err(TypeError::BadAbstraction(b.to_string()));
                }
                let stb = self.infer(&inner, &tb)?;
                if self.as_sort(&stb).is_none() {
                    return Err(TypeError::NotASort { term: tb.to_string(), ty: stb.to_string() });
                }
                Ok(Term::Prod(x.clone(), a.clone(), Arc::new(tb)))
            }
            Term::App(f, a) => {
                let tf = self.infer(env, f)?;
                let (x, dom, cod) = self.as_product(f, &tf)?;
                let ta = self.infer(env, a)?;
                match convertible(self.rs, &dom, &ta, self.fuel) {
                    Verdict::Holds => Ok(subst1(&cod, &x, a)),
                    Verdict::Undecided(r) => Err(TypeError::Undecided(r)),
                    _ => Err(TypeError::DomainMismatch {
                        arg: a.to_string(),
                        expected: dom.to_string(),
                        found: ta.to_string(),
                    }),
                }
            }
        }
    }

    /// Checks that the annotation of binder `x` is typed by the sort `x` is tagged with.
    fn binder_sort(&self, env: &Env, x: &Var, a: &Term) -> Result<Sort, TypeError> {
        let sa = self.infer(env, a)?;
        let s = self
            .as_sort(&sa)
            .ok_or_else(|| TypeError::NotASort { term: a.to_string(), ty: sa.to_string() })?;
        if s != x.sort {
            return Err(TypeError::SortTag {
                var: x.name.to_string(),
                tagged: x.sort.to_string(),
                actual: s.to_string(),
            });
        }
        Ok(s)
    }

    pub fn as_sort(&self, ty: &Term) -> Option<Sort> {
        if let Term::Sort(s) = ty {
            return Some(*s);
        }
        match normalize(self.rs, ty, self.fuel) {
            Ok(Term::Sort(s)) => Some(s),
            _ => None,
        }
    }

    pub fn as_product(&self, f: &Term, ty: &Term) -> Result<(Var, Term, Term), TypeError> {
        if let Term::Prod(x, a, b) = ty {
            return Ok((x.clone(), a.as_ref().clone(), b.as_ref().clone()));
        }
        let w = weak_head_normalize(self.rs, WhnfMode::BetaRules, ty, self.fuel)
            .map_err(|e| TypeError::Undecided(e.to_string()))?;
        if let Term::Prod(x, a, b) = w {
            return Ok((x, a.as_ref().clone(), b.as_ref().clone()));
        }
        Err(TypeError::NotAProduct { term: f.to_string(), ty: ty.to_string() })
    }

    /// Holds iff `t` infers a type convertible to `ty`.
    pub fn check(&self, env: &Env, t: &Term, ty: &Term) -> Verdict {
        match self.infer(env, t) {
            Ok(found) => match convertible(self.rs, &found, ty, self.fuel) {
                Verdict::Holds => Verdict::Holds,
                Verdict::Fails(_) => Verdict::Fails(
                    TypeError::Mismatch { term: t.to_string(), expected: ty.to_string(), found: found.to_string() }
                        .to_string(),
                ),
                other => other,
            },
            Err(TypeError::Undecided(r)) => Verdict::Undecided(r),
            Err(e) => Verdict::Fails(e.to_string()),
        }
    }

    /// Each declared type is typed by the sort of its variable, in order.
    pub fn check_env(&self, env: &Env) -> Result<(), TypeError> {
        let mut prefix = Env::new();
        for (x, ty) in env.bindings() {
            if prefix.contains(x) {
                return Err(TypeError::Redeclared(x.name.to_string()));
            }
            self.binder_sort(&prefix, x, ty)?;
            prefix.push(x.clone(), ty.clone());
        }
        Ok(())
    }

    pub fn classify(&self, env: &Env, t: &Term) -> Result<TermClass, TypeError> {
        if matches!(t, Term::Sort(Sort::Box)) {
            return Ok(TermClass::TopSort);
        }
        let ty = self.infer(env, t)?;
        if matches!(ty, Term::Sort(Sort::Box)) {
            return Ok(TermClass::Kind);
        }
        let tty = self.infer(env, &ty)?;
        match self.as_sort(&tty) {
            Some(Sort::Box) => Ok(TermClass::Predicate),
            Some(Sort::Star) => Ok(TermClass::Object),
            None => Err(TypeError::NotASort { term: ty.to_string(), ty: tty.to_string() }),
        }
    }
}

pub fn infer(sig: &Signature, rs: &RewriteSystem, env: &Env, t: &Term, fuel: u64) -> Result<Term, TypeError> {
    Typer::new(sig, rs, fuel).infer(env, t)
}

pub fn check(sig: &Signature, rs: &RewriteSystem, env: &Env, t: &Term, ty: &Term, fuel: u64) -> Verdict {
    Typer::new(sig, rs, fuel).check(env, t, ty)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermClass {
    Kind,
    Predicate,
    Object,
    TopSort,
}

pub fn classify(sig: &Signature, rs: &RewriteSystem, env: &Env, t: &Term, fuel: u64) -> Result<TermClass, TypeError> {
    Typer::new(sig, rs, fuel).classify(env, t)
}

/// `U{x⃗ -> t⃗}` for `t = f t⃗` with `f : (x⃗:T⃗)U`.
pub fn canonical_type(sig: &Signature, t: &Term) -> Result<Term, TypeError> {
    let (h, args) = t.spine();
    let Term::Symb(f) = h else {
        return Err(TypeError::NotSymbolHeaded(t.to_string()));
    };
    let decl = sig.symbol(f).ok_or_else(|| TypeError::UnknownSymbol(f.to_string()))?;
    let args: Vec<Term> = args.into_iter().cloned().collect();
    instantiate_product(&decl.ty, &args)
        .map(|(_, u)| u)
        .ok_or_else(|| TypeError::Arity(format!("{} applied to {} arguments in {}", f, args.len(), t)))
}

/// Type of `t|p` derived from the symbol types above it, for `p` in `(1*2)+`.
pub fn derived_type(sig: &Signature, t: &Term, p: &Position) -> Result<Term, TypeError> {
    let digits = &p.0;
    let Some(k) = digits.iter().position(|&d| d == 2) else {
        return Err(TypeError::BadPosition(p.to_string()));
    };
    if digits[..k].iter().any(|&d| d != 1) {
        return Err(TypeError::BadPosition(p.to_string()));
    }
    let (h, args) = t.spine();
    let Term::Symb(f) = h else {
        return Err(TypeError::NotSymbolHeaded(t.to_string()));
    };
    let n = args.len();
    if k >= n {
        return Err(TypeError::BadPosition(p.to_string()));
    }
    let i = n - k;
    let decl = sig.symbol(f).ok_or_else(|| TypeError::UnknownSymbol(f.to_string()))?;
    let rest = Position(digits[k + 1..].to_vec());
    if rest.is_root() {
        let before: Vec<Term> = args[..i - 1].iter().map(|a| (*a).clone()).collect();
        let (_, remaining) = instantiate_product(&decl.ty, &before)
            .ok_or_else(|| TypeError::Arity(format!("{f} in {t}")))?;
        match remaining {
            Term::Prod(_, dom, _) => Ok(dom.as_ref().clone()),
            _ => Err(TypeError::Arity(format!("{} has no argument {} in {}", f, i, t))),
        }
    } else {
        derived_type(sig, args[i - 1], &rest)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Object,
    Type,
}

/// The right-hand-side conditions: no `BOX` (B), not a kind (K), no bad
/// kind subterm `[y:W]K` or `w K` (W), and for type-level rules a symbol
/// application.
pub fn rhs_shape_check(r: &Term, level: Level) -> Verdict {
    if r.contains_box() {
        return Verdict::Fails(format!("{r} contains BOX"));
    }
    if r.is_kind() {
        return Verdict::Fails(format!("{r} is a kind"));
    }
    if let Some(w) = bad_kind_subterm(r) {
        return Verdict::Fails(format!("{r} contains the bad-kind subterm {w}"));
    }
    if level == Level::Type && !is_symbol_application(r) {
        return Verdict::Fails(format!("type-level right-hand side {r} is not a symbol application"));
    }
    Verdict::Holds
}

pub fn is_symbol_application(t: &Term) -> bool {
    matches!(t.spine().0, Term::Symb(_))
}

fn bad_kind_subterm(t: &Term) -> Option<Term> {
    match t {
        Term::Abs(_, a, b) => {
            if b.is_kind() {
                return Some(t.clone());
            }
            bad_kind_subterm(a).or_else(|| bad_kind_subterm(b))
        }
        Term::App(a, b) => {
            if b.is_kind() {
                return Some(t.clone());
            }
            bad_kind_subterm(a).or_else(|| bad_kind_subterm(b))
        }
        Term::Prod(_, a, b) => bad_kind_subterm(a).or_else(|| bad_kind_subterm(b)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::load;
    use crate::syntax::parse_term;

    const NAT: &str = "symb nat : *\nsymb 0 : nat\nsymb s : nat -> nat\n";

    #[test]
    fn binder_tags_must_match_the_annotation_sort() {
        let sys = load(NAT).unwrap();
        let rs = sys.rewrite_system();
        let typer = Typer::new(&sys.sig, &rs, 100);
        let a = Var::obj("A");
        let mistagged = Term::prod(a.clone(), Term::star(), Term::var(&a));
        assert!(matches!(typer.infer(&Env::new(), &mistagged), Err(TypeError::SortTag { .. })));
        let b = Var::pred("B");
        assert_eq!(typer.infer(&Env::new(), &Term::prod(b.clone(), Term::star(), Term::var(&b))), Ok(Term::star()));
    }

    #[test]
    fn products_are_exposed_by_rewriting() {
        let sys = load(&format!("{NAT}symb F : nat -> *\nsymb f : F 0\nrule F 0 --> nat -> nat\n")).unwrap();
        let rs = sys.rewrite_system();
        let t = parse_term("f (s 0)", &sys.symbol_names()).unwrap();
        assert_eq!(Typer::new(&sys.sig, &rs, 100).infer(&Env::new(), &t), Ok(Term::symb("nat")));
        let none = RewriteSystem::empty();
        assert!(matches!(
            Typer::new(&sys.sig, &none, 100).infer(&Env::new(), &t),
            Err(TypeError::NotAProduct { .. })
        ));
    }

    #[test]
    fn environments_reject_redeclaration() {
        let sys = load(NAT).unwrap();
        let rs = sys.rewrite_system();
        let typer = Typer::new(&sys.sig, &rs, 100);
        let twice = Env::from_bindings(vec![(Var::obj("n"), Term::symb("nat")), (Var::obj("n"), Term::symb("nat"))]);
        assert!(matches!(typer.check_env(&twice), Err(TypeError::Redeclared(_))));
        let env = Env::new().extended(Var::obj("n"), Term::symb("nat"));
        assert_eq!(env.lookup("n").map(|(_, t)| t.clone()), Some(Term::symb("nat")));
        assert!(env.lookup("m").is_none());
    }

    #[test]
    fn right_hand_side_shapes() {
        let y = Var::obj("y");
        let nat = Term::symb("nat");
        assert!(rhs_shape_check(&Term::kind_box(), Level::Object).fails());
        assert!(rhs_shape_check(&Term::arrow(nat.clone(), Term::star()), Level::Type).fails());
        let bad = Term::abs(y.clone(), nat.clone(), Term::star());
        assert!(rhs_shape_check(&bad, Level::Type).reason().contains("bad-kind"));
        let p = Term::var(&Var::pred("P"));
        assert!(rhs_shape_check(&p, Level::Object).holds());
        assert!(rhs_shape_check(&p, Level::Type).fails());
        assert!(rhs_shape_check(&Term::app(Term::symb("not"), p), Level::Type).holds());
    }
}
