//! Rewrite rules `(l --> r, Gamma, rho)` and the per-rule checks: syntactic
//! sanity, accessibility, well-formedness and the well-typedness conditions
//! S3, S4 and S5.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::reduction::{unify_all, RewriteSystem, Unification, Verdict};
use crate::signature::{ElabError, Signature};
use crate::syntax::RuleDecl;
use crate::term::{
    alpha_eq, free_vars, instantiate_product, is_algebraic, positions, subterm_at, substitute, var_positions, Name,
    Position, Sort, Subst, Term, Var,
};
use crate::typing::{canonical_type, derived_type, Env, Typer};

#[derive(Clone, Debug)]
pub struct Rule {
    /// 1-based index in source order, printed as `rN`.
    pub id: usize,
    pub line: usize,
    pub head: Name,
    pub args: Vec<Term>,
    pub lhs: Term,
    pub rhs: Term,
    pub env: Env,
    pub rho: Subst,
    pub env_explicit: bool,
    pub assume_s5: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RuleFlags {
    pub left_linear: bool,
    pub duplicating: bool,
}

/// Replaces the sort tag of free variables according to `sorts`.
fn retag(t: &Term, sorts: &BTreeMap<Name, Sort>, bound: &mut Vec<Name>) -> Term {
    match t {
        Term::Var(x) if !bound.contains(&x.name) => match sorts.get(&x.name) {
            Some(&s) => Term::Var(Var { name: x.name.clone(), sort: s }),
            None => t.clone(),
        },
        Term::Sort(_) | Term::Symb(_) | Term::Var(_) => t.clone(),
        Term::App(a, b) => Term::app(retag(a, sorts, bound), retag(b, sorts, bound)),
        Term::Abs(x, a, b) | Term::Prod(x, a, b) => {
            let a2 = retag(a, sorts, bound);
            bound.push(x.name.clone());
            let b2 = retag(b, sorts, bound);
            bound.pop();
            if matches!(t, Term::Abs(..)) {
                Term::abs(x.clone(), a2, b2)
            } else {
                Term::prod(x.clone(), a2, b2)
            }
        }
    }
}

/// Free variables in order of first occurrence (left to right).
pub fn vars_in_order(t: &Term) -> Vec<(Var, Position)> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for p in positions(t) {
        if let Ok(Term::Var(x)) = subterm_at(t, &p) {
            if free_vars(t, None).contains(x) && seen.insert(x.name.clone()) {
                out.push((x.clone(), p));
            }
        }
    }
    out
}

fn occurrences(t: &Term) -> BTreeMap<Name, usize> {
    let mut out = BTreeMap::new();
    for x in free_vars(t, None) {
        out.insert(x.name.clone(), var_positions(t, &x).len());
    }
    out
}

impl Rule {
    pub fn elaborate(sig: &Signature, rd: &RuleDecl, id: usize) -> Result<Rule, ElabError> {
        let fail = |msg: String| ElabError { line: rd.line, msg };
        let (h, _) = rd.lhs.spine();
        let Term::Symb(head) = h else {
            return Err(fail(format!("left-hand side {} is not headed by a symbol", rd.lhs)));
        };
        let head = head.clone();

        let mut sorts: BTreeMap<Name, Sort> = BTreeMap::new();
        if let Some(env) = &rd.env {
            for (x, _) in env {
                sorts.insert(x.name.clone(), x.sort);
            }
        }
        for (x, p) in vars_in_order(&rd.lhs) {
            if sorts.contains_key(&x.name) {
                continue;
            }
            let s = match derived_type(sig, &rd.lhs, &p) {
                Ok(ty) if ty.is_kind() => Sort::Box,
                _ => Sort::Star,
            };
            sorts.insert(x.name.clone(), s);
        }
        let fix = |t: &Term| retag(t, &sorts, &mut Vec::new());
        let lhs = fix(&rd.lhs);
        let rhs = fix(&rd.rhs);
        let args: Vec<Term> = lhs.spine().1.into_iter().cloned().collect();

        let mut rho = Subst::new();
        if let Some(pairs) = &rd.rho {
            for (x, t) in pairs {
                let sort = sorts.get(&x.name).copied().unwrap_or(Sort::Star);
                rho.insert(Var { name: x.name.clone(), sort }, fix(t));
            }
        }

        let env = match &rd.env {
            Some(bindings) => Env::from_bindings(bindings.iter().map(|(x, t)| (x.clone(), fix(t))).collect()),
            None => default_env(sig, &lhs, &rho),
        };
        Ok(Rule {
            id,
            line: rd.line,
            head,
            args,
            lhs,
            rhs,
            env,
            rho,
            env_explicit: rd.env.is_some(),
            assume_s5: rd.assume.iter().any(|a| a == "s5"),
        })
    }

    pub fn label(&self) -> String {
        format!("r{}", self.id)
    }

    /// `U gamma` for `f : (x:T)U`: the canonical type of the left-hand side.
    pub fn output_type(&self, sig: &Signature) -> Option<Term> {
        canonical_type(sig, &self.lhs).ok()
    }

    /// The typed left-hand-side arguments `l_i : T_i gamma`.
    pub fn typed_args(&self, sig: &Signature) -> Vec<(Term, Term)> {
        let Some(decl) = sig.symbol(&self.head) else { return Vec::new() };
        let mut out = Vec::new();
        let mut cur = decl.ty.clone();
        for a in &self.args {
            match instantiate_product(&cur, std::slice::from_ref(a)) {
                Some((doms, rest)) => {
                    out.push((a.clone(), doms[0].clone()));
                    cur = rest;
                }
                None => break,
            }
        }
        out
    }

    pub fn flags(&self) -> RuleFlags {
        let lo = occurrences(&self.lhs);
        let ro = occurrences(&self.rhs);
        RuleFlags {
            left_linear: lo.values().all(|&n| n <= 1),
            duplicating: ro.iter().any(|(x, &n)| n > lo.get(x).copied().unwrap_or(0)),
        }
    }

    pub fn is_type_level(&self, sig: &Signature) -> bool {
        sig.is_predicate_symbol(&self.head)
    }
}

/// Left-hand-side variables outside `dom(rho)`, typed by their derived
/// types with `rho` applied, ordered so that dependencies come first.
fn default_env(sig: &Signature, lhs: &Term, rho: &Subst) -> Env {
    let mut typed: Vec<(Var, Term)> = Vec::new();
    for (x, p) in vars_in_order(lhs) {
        if rho.contains(&x) {
            continue;
        }
        if let Ok(ty) = derived_type(sig, lhs, &p) {
            typed.push((x, substitute(&ty, rho)));
        }
    }
    let mut env = Env::new();
    let mut placed: BTreeSet<Name> = BTreeSet::new();
    while !typed.is_empty() {
        let pending: BTreeSet<Name> = typed.iter().map(|(x, _)| x.name.clone()).collect();
        let ready = typed
            .iter()
            .position(|(x, t)| {
                free_vars(t, None).iter().all(|y| placed.contains(&y.name) || !pending.contains(&y.name) || y.name == x.name)
            })
            .unwrap_or(0);
        let (x, t) = typed.remove(ready);
        placed.insert(x.name.clone());
        env.push(x, t);
    }
    env
}

/// Syntactic invariants of a rule, with its linearity and duplication flags.
pub fn syntactic_check(sig: &Signature, rule: &Rule) -> (Verdict, RuleFlags) {
    let mut problems = Vec::new();
    if !is_algebraic(&rule.lhs) {
        problems.push(format!("left-hand side {} is not algebraic", rule.lhs));
    }
    let lfv = free_vars(&rule.lhs, None);
    let extra: Vec<String> =
        free_vars(&rule.rhs, None).difference(&lfv).map(|x| x.name.to_string()).collect();
    if !extra.is_empty() {
        problems.push(format!("right-hand side variables {} do not occur in the left-hand side", extra.join(", ")));
    }
    if let Some(d) = sig.symbol(&rule.head) {
        if rule.args.len() > d.arity() {
            problems.push(format!("{} is applied to {} arguments but takes {}", rule.head, rule.args.len(), d.arity()));
        }
    }
    for (x, _) in rule.rho.iter() {
        if !lfv.contains(x) {
            problems.push(format!("rho binds {}, which is not a left-hand-side variable", x.name));
        }
        if rule.env.contains(x) {
            problems.push(format!("rho binds {}, which is declared in the environment", x.name));
        }
    }
    let v = if problems.is_empty() { Verdict::Holds } else { Verdict::Fails(problems.join("; ")) };
    (v, rule.flags())
}

// ---------------------------------------------------------------------------
// Accessibility

/// Every `u : U` with `t : T |>_rho u : U`; `U` is the instantiated domain `U_j gamma`.
pub fn accessible_steps(sig: &Signature, rho: &Subst, t: &Term, ty: &Term) -> Vec<(Term, Term)> {
    let (h, args) = t.spine();
    let Term::Symb(f) = h else { return Vec::new() };
    let Some(decl) = sig.symbol(f) else { return Vec::new() };
    let Some((c, _)) = sig.output_inductive(f) else { return Vec::new() };
    if args.len() != decl.arity() {
        return Vec::new();
    }
    let args: Vec<Term> = args.into_iter().cloned().collect();
    let Some((domains, out)) = instantiate_product(&decl.ty, &args) else { return Vec::new() };
    if !alpha_eq(&substitute(ty, rho), &substitute(&out, rho)) {
        return Vec::new();
    }
    let eq = sig.equivalents(&c);
    if args.iter().any(|a| {
        let ar = substitute(a, rho);
        eq.iter().any(|d| ar.mentions_symbol(d))
    }) {
        return Vec::new();
    }
    sig.acc(f)
        .into_iter()
        .filter_map(|j| Some((args.get(j - 1)?.clone(), domains.get(j - 1)?.clone())))
        .collect()
}

/// `t : T |>_rho u : U`, comparing `U` modulo `rho`.
pub fn accessible(sig: &Signature, rho: &Subst, t: &Term, ty: &Term, u: &Term, uty: &Term) -> bool {
    let target = substitute(uty, rho);
    accessible_steps(sig, rho, t, ty)
        .iter()
        .any(|(v, vt)| alpha_eq(v, u) && alpha_eq(&substitute(vt, rho), &target))
}

/// Everything reachable from `t : T` by zero or more accessibility steps.
pub fn accessible_closure(sig: &Signature, rho: &Subst, t: &Term, ty: &Term) -> Vec<(Term, Term)> {
    let mut seen: Vec<(Term, Term)> = vec![(t.clone(), ty.clone())];
    let mut queue: VecDeque<(Term, Term)> = VecDeque::from(vec![(t.clone(), ty.clone())]);
    while let Some((u, ut)) = queue.pop_front() {
        for next in accessible_steps(sig, rho, &u, &ut) {
            if !seen.iter().any(|(a, b)| alpha_eq(a, &next.0) && alpha_eq(b, &next.1)) {
                seen.push(next.clone());
                queue.push_back(next);
            }
        }
    }
    seen
}

/// Strict closure `|>_rho^+` from `t : T`.
pub fn strictly_accessible(sig: &Signature, rho: &Subst, t: &Term, ty: &Term) -> Vec<(Term, Term)> {
    let mut out = accessible_closure(sig, rho, t, ty);
    out.remove(0);
    out
}

/// Some `l_i : T_i gamma |>*_rho x : x Gamma` (types compared modulo rho).
pub fn reaches(sig: &Signature, rule: &Rule, x: &Var, xty: &Term) -> bool {
    let target = substitute(xty, &rule.rho);
    rule.typed_args(sig).iter().any(|(l, t)| {
        accessible_closure(sig, &rule.rho, l, t)
            .iter()
            .any(|(u, ut)| matches!(u, Term::Var(y) if y == x) && alpha_eq(&substitute(ut, &rule.rho), &target))
    })
}

// ---------------------------------------------------------------------------
// Well-formedness and well-typedness

/// Typing context over the given (already validated) rules.
pub struct RuleContext<'a> {
    pub sig: &'a Signature,
    pub rs: &'a RewriteSystem,
    pub fuel: u64,
}

impl<'a> RuleContext<'a> {
    fn typer(&self) -> Typer<'a> {
        Typer::new(self.sig, self.rs, self.fuel)
    }

    fn expected_type(&self, rule: &Rule) -> Result<Term, Verdict> {
        canonical_type(self.sig, &rule.lhs)
            .map(|u| substitute(&u, &rule.rho))
            .map_err(|e| Verdict::Fails(format!("left-hand side has no canonical type: {e}")))
    }

    pub fn well_formed_check(&self, rule: &Rule) -> Verdict {
        if let Err(e) = self.typer().check_env(&rule.env) {
            return Verdict::Fails(format!("ill-formed environment: {e}"));
        }
        let expected = match self.expected_type(rule) {
            Ok(t) => t,
            Err(v) => return v,
        };
        let lrho = substitute(&rule.lhs, &rule.rho);
        let typed = match self.typer().check(&rule.env, &lrho, &expected) {
            Verdict::Fails(r) => Verdict::Fails(format!("(i) {lrho} : {expected} fails: {r}")),
            Verdict::Undecided(r) => Verdict::Undecided(format!("(i) {r}")),
            v => v,
        };
        let mut unreached = Vec::new();
        for (x, xty) in rule.env.bindings() {
            if !reaches(self.sig, rule, x, xty) {
                unreached.push(format!("(ii) {} : {} is not accessible from any argument", x.name, xty));
            }
        }
        let reach = if unreached.is_empty() { Verdict::Holds } else { Verdict::Fails(unreached.join("; ")) };
        let lfv = free_vars(&rule.lhs, None);
        let mut bad_rho = Vec::new();
        for (x, _) in rule.rho.iter() {
            if !lfv.contains(x) || rule.env.contains(x) {
                bad_rho.push(format!("(iii) {} in dom(rho) is not in FV(l) minus dom(Gamma)", x.name));
            }
        }
        let dom = if bad_rho.is_empty() { Verdict::Holds } else { Verdict::Fails(bad_rho.join("; ")) };
        Verdict::all([typed, reach, dom])
    }

    /// `Gamma |- r : U gamma rho`.
    pub fn s3_check(&self, rule: &Rule) -> Verdict {
        if let Err(e) = self.typer().check_env(&rule.env) {
            return Verdict::Fails(format!("ill-formed environment: {e}"));
        }
        let expected = match self.expected_type(rule) {
            Ok(t) => t,
            Err(v) => return v,
        };
        self.typer().check(&rule.env, &rule.rhs, &expected)
    }
}

/// Each `x` in `dom(Gamma)` has an occurrence whose derived type is `x Gamma`
/// (also accepted after applying `rho` to the derived type).
pub fn s4_check(sig: &Signature, rule: &Rule) -> Verdict {
    let mut missing = Vec::new();
    for (x, xty) in rule.env.bindings() {
        let witnessed = var_positions(&rule.lhs, x).iter().any(|p| match derived_type(sig, &rule.lhs, p) {
            Ok(d) => alpha_eq(&d, xty) || alpha_eq(&substitute(&d, &rule.rho), xty),
            Err(_) => false,
        });
        if !witnessed {
            missing.push(format!("no occurrence of {} has derived type {}", x.name, xty));
        }
    }
    if missing.is_empty() {
        Verdict::Holds
    } else {
        Verdict::Fails(missing.join("; "))
    }
}

/// Conversion constraints forced by typing the left-hand side: the canonical
/// type of every non-variable argument (recursively) against its derived type.
pub fn s5_constraints(sig: &Signature, lhs: &Term) -> Vec<(Term, Term)> {
    let mut out = Vec::new();
    for p in positions(lhs) {
        if p.is_root() || !is_spine_arg_path(&p) {
            continue;
        }
        let Ok(sub) = subterm_at(lhs, &p) else { continue };
        if matches!(sub, Term::Var(_)) {
            continue;
        }
        if let (Ok(canon), Ok(derived)) = (canonical_type(sig, sub), derived_type(sig, lhs, &p)) {
            out.push((canon, derived));
        }
    }
    out
}

/// Positions of the form `(1*2)+`.
fn is_spine_arg_path(p: &Position) -> bool {
    p.0.last() == Some(&2)
}

pub fn s5_check(sig: &Signature, rule: &Rule) -> Verdict {
    if rule.assume_s5 {
        return Verdict::Assumed("assume s5 on the rule".into());
    }
    if rule.rho.is_empty() {
        return Verdict::Holds;
    }
    let constraints = s5_constraints(sig, &rule.lhs);
    let rigid = |f: &str| sig.symbol(f).is_some_and(|d| !d.defined);
    match unify_all(&constraints, &rigid) {
        // Rigid heads clash: no instance of the left-hand side is typable.
        Unification::Clash(_) => Verdict::Holds,
        Unification::Stuck(r) => Verdict::Undecided(format!("S5: {r}")),
        Unification::Unified(theta) => {
            let mut missing = Vec::new();
            for (x, t) in rule.rho.iter() {
                let lhs = substitute(&Term::Var(x.clone()), &theta);
                let rhs = substitute(t, &theta);
                if !alpha_eq(&lhs, &rhs) {
                    missing.push(format!("{} := {} is not forced by typing", x.name, t));
                }
            }
            if missing.is_empty() {
                Verdict::Holds
            } else {
                Verdict::Undecided(format!("S5: {}", missing.join("; ")))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::{load, LoadError};

    const LISTS: &str = "symb nat : *\nsymb 0 : nat\nsymb s : nat -> nat\n\
                         symb list : * -> *\nsymb nil : (A:*) list A\nsymb cons : (A:*) A -> list A -> list A\n\
                         symb len : (A:*) list A -> nat\nprec len > s 0\n";

    #[test]
    fn variables_are_listed_by_first_occurrence() {
        let sys = load(&format!("{LISTS}rule len A (cons A' x l) --> s (len A l)\n  rho A' := A\n")).unwrap();
        let names: Vec<String> = vars_in_order(&sys.rules[0].lhs).iter().map(|(x, _)| x.name.to_string()).collect();
        assert_eq!(names, ["A", "A'", "x", "l"]);
    }

    #[test]
    fn elaboration_tags_predicate_variables() {
        let sys = load(&format!("{LISTS}rule len A (nil A') --> 0\n  rho A' := A\n")).unwrap();
        let r = &sys.rules[0];
        assert!(matches!(&r.args[0], Term::Var(a) if a.sort == Sort::Box));
        let (a_prime, image) = r.rho.iter().next().unwrap();
        assert_eq!(a_prime.sort, Sort::Box);
        assert!(matches!(image, Term::Var(a) if a.sort == Sort::Box));
        // A' is bound by rho, so only A is declared
        assert_eq!(r.env.len(), 1);
    }

    #[test]
    fn default_environments_respect_dependencies() {
        let sys = load(
            "symb nat : *\nsymb 0 : nat\nsymb vec : nat -> *\nsymb f : (n:nat) vec n -> nat\nprec f > 0\n\
             rule f n v --> 0\n",
        )
        .unwrap();
        let env = &sys.rules[0].env;
        let order: Vec<&str> = env.bindings().iter().map(|(x, _)| &*x.name).collect();
        assert_eq!(order, ["n", "v"]);
        assert_eq!(env.lookup("v").unwrap().1.to_string(), "vec n");
    }

    #[test]
    fn left_hand_sides_need_a_symbol_head() {
        let bad = load("symb nat : *\nsymb 0 : nat\nrule x 0 --> 0\n");
        assert!(matches!(bad, Err(LoadError::Elab(e)) if e.msg.contains("not headed by a symbol")));
    }

    #[test]
    fn syntactic_problems_are_collected() {
        let sys = load(&format!("{LISTS}rule len A (nil A') --> 0\n  rho A' := A\n")).unwrap();
        let mut r = sys.rules[0].clone();
        r.rhs = Term::var(&Var::obj("z"));
        r.args.push(Term::symb("0"));
        let (v, _) = syntactic_check(&sys.sig, &r);
        let why = v.reason();
        assert!(why.contains("z do not occur") && why.contains("takes 2"), "{why}");
    }
}
