//! The General Schema: status orderings, the ordering on symbol arguments
//! and the computability closure of a rule.

use crate::reduction::{convertible, RewriteSystem, Verdict};
use crate::rules::{strictly_accessible, Rule, RuleContext};
use crate::signature::{Signature, Status};
use crate::term::{alpha_eq, instantiate_product, subst1, substitute, Name, Sort, Subst, Term};
use crate::typing::{canonical_type, Env, Typer};

/// Outcome of comparing two multisets or tuples.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Greater,
    Equal,
    NotGreater,
}

/// Multiset extension of `gt` with equality `eq`.
pub fn multiset_compare<T>(m: &[T], n: &[T], gt: &dyn Fn(&T, &T) -> bool, eq: &dyn Fn(&T, &T) -> bool) -> Cmp {
    let mut m_rest: Vec<&T> = m.iter().collect();
    let mut n_rest: Vec<&T> = Vec::new();
    for y in n {
        match m_rest.iter().position(|x| eq(x, y)) {
            Some(i) => {
                m_rest.remove(i);
            }
            None => n_rest.push(y),
        }
    }
    if m_rest.is_empty() && n_rest.is_empty() {
        return Cmp::Equal;
    }
    if n_rest.iter().all(|y| m_rest.iter().any(|x| gt(x, y))) && !m_rest.is_empty() {
        Cmp::Greater
    } else {
        Cmp::NotGreater
    }
}

/// `u >_stat v`: lexicographic over the status slots, multiset inside each.
pub fn status_compare<T>(
    stat: &Status,
    u: &[T],
    v: &[T],
    gt: &dyn Fn(&T, &T) -> bool,
    eq: &dyn Fn(&T, &T) -> bool,
) -> Result<bool, String> {
    let n = stat.arity();
    if u.len() < n || v.len() < n {
        return Err(format!("status {stat} needs {n} arguments, got {} and {}", u.len(), v.len()));
    }
    for slot in &stat.slots {
        let mu: Vec<&T> = slot.iter().map(|&k| &u[k - 1]).collect();
        let mv: Vec<&T> = slot.iter().map(|&k| &v[k - 1]).collect();
        match multiset_compare(&mu, &mv, &|a: &&T, b: &&T| gt(a, b), &|a: &&T, b: &&T| eq(a, b)) {
            Cmp::Greater => return Ok(true),
            Cmp::Equal => continue,
            Cmp::NotGreater => return Ok(false),
        }
    }
    Ok(false)
}

/// A term with its type.
pub type Typed = (Term, Term);

/// Orderings attached to one rule `(f l --> r, Gamma, rho)`.
pub struct RuleOrder<'a> {
    pub sig: &'a Signature,
    pub rule: &'a Rule,
}

impl<'a> RuleOrder<'a> {
    fn rho(&self) -> &Subst {
        &self.rule.rho
    }

    /// Equality of typed pairs modulo rho.
    pub fn typed_eq(&self, a: &Typed, b: &Typed) -> bool {
        let r = self.rho();
        alpha_eq(&substitute(&a.0, r), &substitute(&b.0, r)) && alpha_eq(&substitute(&a.1, r), &substitute(&b.1, r))
    }

    /// `t : T |>_rho^+ u : U`.
    pub fn acc_gt(&self, a: &Typed, b: &Typed) -> bool {
        let r = self.rho();
        let (u, uty) = (substitute(&b.0, r), substitute(&b.1, r));
        strictly_accessible(self.sig, r, &a.0, &a.1)
            .iter()
            .any(|(v, vt)| alpha_eq(&substitute(v, r), &u) && alpha_eq(&substitute(vt, r), &uty))
    }

    /// `t : T >^i_R u : U`, the strictly-positive descent.
    pub fn sp_gt(&self, a: &Typed, b: &Typed) -> bool {
        let sig = self.sig;
        let rho = self.rho();
        let (t, _) = a;
        let (u, uty) = b;
        let (th, targs) = t.spine();
        let Term::Symb(g) = th else { return false };
        let Some(gdecl) = sig.symbol(g) else { return false };
        let Some((c, _)) = sig.output_inductive(g) else { return false };
        let targs: Vec<Term> = targs.into_iter().cloned().collect();
        let Some((_, gout)) = instantiate_product(&gdecl.ty, &targs) else { return false };
        let (_, vg) = gout.spine();
        let vg: Vec<Term> = vg.into_iter().map(|v| substitute(v, rho)).collect();
        let eq = sig.equivalents(&c);
        if vg.iter().any(|v| eq.iter().any(|d| v.mentions_symbol(d))) {
            return false;
        }
        let (uh, uargs) = u.spine();
        let Term::Var(x) = uh else { return false };
        let Some((_, xty)) = self.rule.env.lookup(&x.name) else { return false };
        let uargs: Vec<Term> = uargs.into_iter().cloned().collect();
        let reached = strictly_accessible(sig, rho, &a.0, &a.1)
            .into_iter()
            .any(|(v, vt)| matches!(&v, Term::Var(y) if y == x) && alpha_eq(&substitute(&vt, rho), xty));
        if !reached {
            return false;
        }
        let Some((udoms, rest)) = instantiate_product(xty, &uargs) else { return false };
        let (rh, w) = rest.spine();
        if !matches!(rh, Term::Symb(c2) if *c2 == c) {
            return false;
        }
        if !alpha_eq(&substitute(uty, rho), &rest) {
            return false;
        }
        if udoms.iter().any(|d| eq.iter().any(|e| d.mentions_symbol(e))) {
            return false;
        }
        let w: Vec<Term> = w.into_iter().cloned().collect();
        let lhs_params = sig.predicate_args(&c, &vg);
        let rhs_params = sig.predicate_args(&c, &w);
        lhs_params.len() == rhs_params.len() && lhs_params.iter().zip(&rhs_params).all(|(p, q)| alpha_eq(p, q))
    }

    /// `l : T gamma >_R u : U delta` following the status of the rule head.
    pub fn args_gt(&self, lhs: &[Typed], call: &[Typed]) -> Result<bool, String> {
        let stat = self.sig.status(&self.rule.head);
        let sp = self.sig.strictly_positive_positions(&self.rule.head);
        let n = stat.arity();
        if lhs.len() < n {
            return Err(format!(
                "status {stat} of {} has arity {n} but the left-hand side has {} arguments",
                self.rule.head,
                lhs.len()
            ));
        }
        if call.len() < n {
            return Err(format!("call has {} arguments but the status arity is {n}", call.len()));
        }
        for (i, slot) in stat.slots.iter().enumerate() {
            let ml: Vec<Typed> = slot.iter().map(|&k| lhs[k - 1].clone()).collect();
            let mc: Vec<Typed> = slot.iter().map(|&k| call[k - 1].clone()).collect();
            let eq = |a: &Typed, b: &Typed| self.typed_eq(a, b);
            let cmp = if sp.contains_key(&(i + 1)) {
                multiset_compare(&ml, &mc, &|a, b| self.sp_gt(a, b) || self.acc_gt(a, b), &eq)
            } else {
                multiset_compare(&ml, &mc, &|a, b| self.acc_gt(a, b), &eq)
            };
            match cmp {
                Cmp::Greater => return Ok(true),
                Cmp::Equal => continue,
                Cmp::NotGreater => return Ok(false),
            }
        }
        Ok(false)
    }
}

// ---------------------------------------------------------------------------
// Computability closure

/// The judgment `Delta |-c t : T` for one rule. Variables of `Gamma` act as
/// constants smaller than the head; other left-hand-side variables are unusable.
pub struct Closure<'a> {
    pub sig: &'a Signature,
    pub rs: &'a RewriteSystem,
    pub fuel: u64,
    pub rule: &'a Rule,
    lhs_typed: Vec<Typed>,
}

impl<'a> Closure<'a> {
    pub fn new(sig: &'a Signature, rs: &'a RewriteSystem, fuel: u64, rule: &'a Rule) -> Closure<'a> {
        Closure { sig, rs, fuel, rule, lhs_typed: rule.typed_args(sig) }
    }

    fn typer(&self) -> Typer<'a> {
        Typer::new(self.sig, self.rs, self.fuel)
    }

    fn head(&self) -> &Name {
        &self.rule.head
    }

    fn conv(&self, a: &Term, b: &Term) -> Result<(), String> {
        match convertible(self.rs, a, b, self.fuel) {
            Verdict::Holds => Ok(()),
            Verdict::Undecided(r) => Err(format!("(conv) undecided: {r}")),
            _ => Err(format!("(conv) {a} and {b} are not convertible")),
        }
    }

    fn sort_of(&self, delta: &Env, t: &Term) -> Result<Sort, String> {
        let st = self.infer(delta, t)?;
        self.typer().as_sort(&st).ok_or_else(|| format!("{t} has type {st}, which is not a sort"))
    }

    pub fn infer(&self, delta: &Env, t: &Term) -> Result<Term, String> {
        match t {
            Term::Sort(Sort::Star) => Ok(Term::kind_box()),
            Term::Sort(Sort::Box) => Err("BOX has no type".into()),
            Term::Var(x) => {
                if let Some((_, ty)) = delta.lookup(&x.name) {
                    return Ok(ty.clone());
                }
                if let Some((_, ty)) = self.rule.env.lookup(&x.name) {
                    return Ok(ty.clone());
                }
                Err(format!("(var) {} is a left-hand-side variable outside Gamma", x.name))
            }
            Term::Symb(g) => self.symbol_type(g),
            Term::Prod(x, a, b) => {
                let s = self.sort_of(delta, a)?;
                if s != x.sort {
                    return Err(format!("binder {} has a type of sort {s}", x.name));
                }
                let inner = delta.extended(x.clone(), a.as_ref().clone());
                Ok(Term::Sort(self.sort_of(&inner, b)?))
            }
            Term::Abs(x, a, b) => {
                let s = self.sort_of(delta, a)?;
                if s != x.sort {
                    return Err(format!("binder {} has a type of sort {s}", x.name));
                }
                let inner = delta.extended(x.clone(), a.as_ref().clone());
                let tb = self.infer(&inner, b)?;
                if matches!(tb, Term::Sort(Sort::Box)) {
                    return Err(format!("(abs) body {b} is a kind"));
                }
                self.sort_of(&inner, &tb)?;
                Ok(Term::prod(x.clone(), a.as_ref().clone(), tb))
            }
            Term::App(fun, arg) => {
                let (h, args) = t.spine();
                if let Term::Symb(g) = h {
                    if self.sig.prec.equiv(g, self.head()) {
                        let args: Vec<Term> = args.into_iter().cloned().collect();
                        return self.symb_eq(delta, g, &args);
                    }
                }
                let tf = self.infer(delta, fun)?;
                let (x, dom, cod) = self.typer().as_product(fun, &tf).map_err(|e| e.to_string())?;
                let ta = self.infer(delta, arg)?;
                self.conv(&dom, &ta)?;
                Ok(subst1(&cod, &x, arg))
            }
        }
    }

    fn symbol_type(&self, g: &str) -> Result<Term, String> {
        let decl = self.sig.symbol(g).ok_or_else(|| format!("unknown symbol {g}"))?;
        if self.sig.prec.gt(self.head(), g) {
            Ok(decl.ty.clone())
        } else if self.sig.prec.equiv(self.head(), g) {
            Err(format!("(symb=) {g} is applied to no argument"))
        } else {
            Err(format!("(symb<) {g} is not below {}", self.head()))
        }
    }

    /// `(symb=)`: a call to a symbol equivalent to the head, with its
    /// arguments checked in the closure and smaller in `>_R`.
    fn symb_eq(&self, delta: &Env, g: &str, args: &[Term]) -> Result<Term, String> {
        let decl = self.sig.symbol(g).ok_or_else(|| format!("unknown symbol {g}"))?;
        let need = self.sig.status(g).arity().max(self.rule.args.len());
        if args.len() < need {
            return Err(format!("(symb=) {g} is applied to {} arguments but needs at least {need}", args.len()));
        }
        let mut cur = decl.ty.clone();
        let mut call: Vec<Typed> = Vec::with_capacity(args.len());
        for a in args {
            let (x, dom, cod) = match &cur {
                Term::Prod(x, d, c) => (x.clone(), d.as_ref().clone(), c.as_ref().clone()),
                _ => {
                    let (x, d, c) = self.typer().as_product(&Term::symb(g), &cur).map_err(|e| e.to_string())?;
                    (x, d, c)
                }
            };
            let ta = self.infer(delta, a)?;
            self.conv(&dom, &ta).map_err(|e| format!("argument {a} of {g}: {e}"))?;
            call.push((a.clone(), dom));
            cur = subst1(&cod, &x, a);
        }
        let order = RuleOrder { sig: self.sig, rule: self.rule };
        match order.args_gt(&self.lhs_typed, &call) {
            Ok(true) => Ok(cur),
            Ok(false) => {
                let shown: Vec<String> = args.iter().map(|a| a.to_string()).collect();
                Err(format!("(symb=) arguments ({}) of {g} are not smaller than the left-hand side", shown.join(", ")))
            }
            Err(e) => Err(format!("(symb=) {e}")),
        }
    }

    /// `|-c r : U gamma rho`.
    pub fn check_rhs(&self) -> Verdict {
        let expected = match canonical_type(self.sig, &self.rule.lhs) {
            Ok(u) => substitute(&u, &self.rule.rho),
            Err(e) => return Verdict::Fails(format!("no canonical type: {e}")),
        };
        match self.infer(&Env::new(), &self.rule.rhs) {
            Ok(found) => match convertible(self.rs, &found, &expected, self.fuel) {
                Verdict::Holds => Verdict::Holds,
                Verdict::Undecided(r) => Verdict::Undecided(r),
                _ => Verdict::Fails(format!("(conv) right-hand side has type {found}, expected {expected}")),
            },
            Err(e) if e.contains("undecided") => Verdict::Undecided(e),
            Err(e) => Verdict::Fails(e),
        }
    }
}

pub fn cc_check(sig: &Signature, rs: &RewriteSystem, fuel: u64, rule: &Rule) -> Verdict {
    Closure::new(sig, rs, fuel, rule).check_rhs()
}

/// Well-formedness together with the computability closure of the right-hand side.
pub fn general_schema_check(sig: &Signature, rs: &RewriteSystem, fuel: u64, rule: &Rule) -> Verdict {
    let ctx = RuleContext { sig, rs, fuel };
    let wf = ctx.well_formed_check(rule);
    let wf = match wf {
        Verdict::Fails(r) => Verdict::Fails(format!("not well-formed: {r}")),
        v => v,
    };
    wf.and(cc_check(sig, rs, fuel, rule))
}
