//! Symbol table: declared types and sorts, precedence, statuses and the
//! inductive structure (Mon, Acc). Also elaboration of a parsed source file,
//! admissibility of the inductive structure and predicate classification.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::reduction::{RewriteSystem, Verdict};
use crate::rules::Rule;
use crate::syntax::{parse, Decl, ParseError, PrecRel, SourceFile};
use crate::term::{alpha_eq, free_vars, signed_positions, symbol_positions, var_positions, Name, Polarity, Sort, Term};
use crate::typing::{Env, Typer};

/// Fuel used while elaborating declarations (types of symbols contain no redexes in practice).
pub const ELAB_FUEL: u64 = 10_000;

#[derive(Clone, Debug)]
pub struct SymbolDecl {
    pub name: Name,
    pub ty: Term,
    /// The sort `s_f` of `ty`.
    pub sort: Sort,
    /// True iff some rule is headed by this symbol.
    pub defined: bool,
    /// Largest number of arguments in a left-hand side headed by this symbol.
    pub max_rule_arity: usize,
    pub line: usize,
}

impl SymbolDecl {
    /// Number of leading products of the type.
    pub fn arity(&self) -> usize {
        self.ty.product_prefix().0.len()
    }
    /// Predicate symbols live in `F^BOX`: their type is a kind.
    pub fn is_predicate(&self) -> bool {
        self.sort == Sort::Box
    }
}

/// A status `lex (mul x..) .. (mul x..)`; indices are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Status {
    pub slots: Vec<Vec<usize>>,
}

impl Status {
    /// Greatest argument index used.
    pub fn arity(&self) -> usize {
        self.slots.iter().flatten().copied().max().unwrap_or(0)
    }
    pub fn lex_singletons<I: IntoIterator<Item = usize>>(idx: I) -> Status {
        Status { slots: idx.into_iter().map(|i| vec![i]).collect() }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "lex")?;
        for slot in &self.slots {
            let vars: Vec<String> = slot.iter().map(|i| format!("x{i}")).collect();
            write!(f, " (mul {})", vars.join(" "))?;
        }
        Ok(())
    }
}

/// Quasi-order on symbols, stored as the reflexive-transitive closure of
/// the declared `>=` edges.
#[derive(Clone, Debug, Default)]
pub struct Precedence {
    index: BTreeMap<Name, usize>,
    ge: Vec<Vec<bool>>,
}

impl Precedence {
    pub fn new<'a, I: IntoIterator<Item = &'a Name>>(names: I) -> Precedence {
        let index: BTreeMap<Name, usize> = names.into_iter().cloned().enumerate().map(|(i, n)| (n, i)).collect();
        let n = index.len();
        let mut ge = vec![vec![false; n]; n];
        for (i, row) in ge.iter_mut().enumerate() {
            row[i] = true;
        }
        Precedence { index, ge }
    }

    /// Adds `f >= g` and recloses.
    pub fn add_ge(&mut self, f: &str, g: &str) {
        let (Some(&i), Some(&j)) = (self.index.get(f), self.index.get(g)) else { return };
        if self.ge[i][j] {
            return;
        }
        let n = self.ge.len();
        let above: Vec<usize> = (0..n).filter(|&k| self.ge[k][i]).collect();
        let below: Vec<usize> = (0..n).filter(|&k| self.ge[j][k]).collect();
        for &a in &above {
            for &b in &below {
                self.ge[a][b] = true;
            }
        }
    }

    pub fn ge(&self, f: &str, g: &str) -> bool {
        match (self.index.get(f), self.index.get(g)) {
            (Some(&i), Some(&j)) => self.ge[i][j],
            _ => f == g,
        }
    }
    pub fn gt(&self, f: &str, g: &str) -> bool {
        self.ge(f, g) && !self.ge(g, f)
    }
    pub fn equiv(&self, f: &str, g: &str) -> bool {
        self.ge(f, g) && self.ge(g, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum PredicateClass {
    Primitive,
    Basic,
    StrictlyPositive,
    General,
}

impl fmt::Display for PredicateClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PredicateClass::Primitive => "primitive",
            PredicateClass::Basic => "basic",
            PredicateClass::StrictlyPositive => "strictly positive",
            PredicateClass::General => "general",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, Debug, Default)]
pub struct Signature {
    decls: Vec<SymbolDecl>,
    index: BTreeMap<Name, usize>,
    pub prec: Precedence,
    mon: BTreeMap<Name, BTreeSet<usize>>,
    acc: BTreeMap<Name, BTreeSet<usize>>,
    status: BTreeMap<Name, Status>,
    classes: BTreeMap<Name, PredicateClass>,
}

impl Signature {
    pub fn symbol(&self, f: &str) -> Option<&SymbolDecl> {
        self.index.get(f).map(|&i| &self.decls[i])
    }
    pub fn symbols(&self) -> &[SymbolDecl] {
        &self.decls
    }
    pub fn names(&self) -> impl Iterator<Item = &Name> {
        self.decls.iter().map(|d| &d.name)
    }
    pub fn is_predicate_symbol(&self, f: &str) -> bool {
        self.symbol(f).is_some_and(|d| d.is_predicate())
    }
    pub fn is_defined(&self, f: &str) -> bool {
        self.symbol(f).is_some_and(|d| d.defined)
    }
    /// `C` in `CF^BOX`: a predicate symbol without rules.
    pub fn is_constant_predicate(&self, f: &str) -> bool {
        self.symbol(f).is_some_and(|d| d.is_predicate() && !d.defined)
    }
    /// Defined predicate symbols (`DF^BOX`).
    pub fn is_defined_predicate(&self, f: &str) -> bool {
        self.symbol(f).is_some_and(|d| d.is_predicate() && d.defined)
    }

    /// The output type `U` of `f : (x:T)U`.
    pub fn output(&self, f: &str) -> Option<Term> {
        self.symbol(f).map(|d| d.ty.product_prefix().1)
    }

    /// `(C, v)` when `f : (y:U) C v` with `C` a constant predicate.
    pub fn output_inductive(&self, f: &str) -> Option<(Name, Vec<Term>)> {
        let out = self.output(f)?;
        let (h, args) = out.spine();
        match h {
            Term::Symb(c) if self.is_constant_predicate(c) => Some((c.clone(), args.into_iter().cloned().collect())),
            _ => None,
        }
    }

    /// Object-level constant symbols whose output type is headed by `c`.
    pub fn constructors_of(&self, c: &str) -> Vec<Name> {
        self.decls
            .iter()
            .filter(|d| !d.defined && !d.is_predicate())
            .filter(|d| matches!(self.output_inductive(&d.name), Some((h, _)) if &*h == c))
            .map(|d| d.name.clone())
            .collect()
    }

    /// Monotonic arguments of a constant predicate; empty by default.
    pub fn mon(&self, f: &str) -> BTreeSet<usize> {
        if !self.is_constant_predicate(f) {
            return BTreeSet::new();
        }
        self.mon.get(f).cloned().unwrap_or_default()
    }

    /// Accessible positions. Constructors default to all their arguments;
    /// defined symbols only have the declared ones.
    pub fn acc(&self, f: &str) -> BTreeSet<usize> {
        if self.output_inductive(f).is_none() {
            return BTreeSet::new();
        }
        if let Some(s) = self.acc.get(f) {
            return s.clone();
        }
        match self.symbol(f) {
            Some(d) if !d.defined => (1..=d.arity()).collect(),
            _ => BTreeSet::new(),
        }
    }

    pub fn acc_declared(&self, f: &str) -> bool {
        self.acc.contains_key(f)
    }

    /// Declared status, or `lex (mul x_i)..` over the arguments whose type
    /// is a constant-predicate application (all arguments if there is none).
    pub fn status(&self, f: &str) -> Status {
        if let Some(s) = self.status.get(f) {
            return s.clone();
        }
        let Some(d) = self.symbol(f) else { return Status { slots: Vec::new() } };
        let (binders, _) = d.ty.product_prefix();
        let inductive: Vec<usize> = binders
            .iter()
            .enumerate()
            .filter(|(_, (_, t))| matches!(t.spine().0, Term::Symb(c) if self.is_constant_predicate(c)))
            .map(|(i, _)| i + 1)
            .collect();
        if inductive.is_empty() {
            Status::lex_singletons(1..=binders.len())
        } else {
            Status::lex_singletons(inductive)
        }
    }

    /// Domain types `T_1..T_n` of `f`, each in the scope of the previous binders.
    pub fn domains(&self, f: &str) -> Vec<Term> {
        self.symbol(f).map(|d| d.ty.product_prefix().0.into_iter().map(|(_, t)| t).collect()).unwrap_or_default()
    }

    /// `u|_C`: the arguments of `C` at predicate-sorted binder positions.
    pub fn predicate_args(&self, c: &str, args: &[Term]) -> Vec<Term> {
        let Some(d) = self.symbol(c) else { return Vec::new() };
        let (binders, _) = d.ty.product_prefix();
        binders
            .iter()
            .zip(args)
            .filter(|((x, _), _)| x.sort == Sort::Box)
            .map(|(_, a)| a.clone())
            .collect()
    }

    /// `SP(f)`: status slots (1-based) compared by strictly-positive descent,
    /// with the witness type `T_f^i`.
    pub fn strictly_positive_positions(&self, f: &str) -> BTreeMap<usize, Term> {
        let mut out = BTreeMap::new();
        let domains = self.domains(f);
        for (i, slot) in self.status(f).slots.iter().enumerate() {
            let mut witness: Option<(Name, Term, Vec<Term>)> = None;
            let mut ok = true;
            for &k in slot {
                let Some(t) = domains.get(k - 1) else {
                    ok = false;
                    break;
                };
                let (h, args) = t.spine();
                let Term::Symb(c) = h else {
                    ok = false;
                    break;
                };
                if !self.is_constant_predicate(c) {
                    ok = false;
                    break;
                }
                let args: Vec<Term> = args.into_iter().cloned().collect();
                let pa = self.predicate_args(c, &args);
                match &witness {
                    None => witness = Some((c.clone(), t.clone(), pa)),
                    Some((c0, _, pa0)) => {
                        if c0 != c || pa0.len() != pa.len() || !pa0.iter().zip(&pa).all(|(a, b)| alpha_eq(a, b)) {
                            ok = false;
                            break;
                        }
                    }
                }
            }
            if let (true, Some((c, t, _))) = (ok, witness) {
                if self.classify_predicate(&c) <= PredicateClass::StrictlyPositive {
                    out.insert(i + 1, t);
                }
            }
        }
        out
    }

    pub fn classify_predicate(&self, c: &str) -> PredicateClass {
        self.classes.get(c).copied().unwrap_or(PredicateClass::General)
    }

    /// Constant predicates equivalent to `c` in the precedence.
    pub fn equivalents(&self, c: &str) -> Vec<Name> {
        self.decls
            .iter()
            .filter(|d| self.is_constant_predicate(&d.name) && self.prec.equiv(&d.name, c))
            .map(|d| d.name.clone())
            .collect()
    }

    /// Symbols whose output is an application of a constant predicate equivalent to `c`,
    /// with that output's head.
    fn producers_of_class(&self, c: &str) -> Vec<(Name, Name)> {
        let eq: BTreeSet<Name> = self.equivalents(c).into_iter().collect();
        self.decls
            .iter()
            .filter_map(|d| match self.output_inductive(&d.name) {
                Some((h, _)) if eq.contains(&h) => Some((d.name.clone(), h)),
                _ => None,
            })
            .collect()
    }

    fn compute_classes(&mut self) {
        let preds: Vec<Name> =
            self.decls.iter().filter(|d| self.is_constant_predicate(&d.name)).map(|d| d.name.clone()).collect();
        // Process in increasing precedence so primitive-below lookups are ready.
        let mut order = preds.clone();
        order.sort_by_key(|c| preds.iter().filter(|d| self.prec.gt(c, d)).count());
        let mut classes = BTreeMap::new();
        for c in &order {
            let class = self.classify_with(c, &classes);
            classes.insert(c.clone(), class);
        }
        self.classes = classes;
    }

    fn classify_with(&self, c: &str, known: &BTreeMap<Name, PredicateClass>) -> PredicateClass {
        let mut primitive = true;
        let mut basic = true;
        let mut strictly_positive = true;
        let eq: BTreeSet<Name> = self.equivalents(c).into_iter().collect();
        for (f, d) in self.producers_of_class(c) {
            let Some(decl) = self.symbol(&f) else { continue };
            let (binders, _) = decl.ty.product_prefix();
            for j in self.acc(&f) {
                let Some((_, u)) = binders.get(j - 1) else { continue };
                let (h, _) = u.spine();
                let head_ok = match h {
                    Term::Symb(e) if self.is_constant_predicate(e) => {
                        self.prec.equiv(e, &d)
                            || (self.prec.gt(&d, e) && known.get(e) == Some(&PredicateClass::Primitive))
                    }
                    _ => false,
                };
                if !head_ok {
                    primitive = false;
                }
                let occurring: Vec<&Name> = eq.iter().filter(|e| u.mentions_symbol(e)).collect();
                if occurring.is_empty() {
                    continue;
                }
                if !matches!(h, Term::Symb(e) if eq.contains(e)) {
                    basic = false;
                }
                let (vs, out) = u.product_prefix();
                let out_ok = matches!(out.spine().0, Term::Symb(e) if eq.contains(e));
                let vs_ok = vs.iter().all(|(_, v)| eq.iter().all(|e| !v.mentions_symbol(e)));
                if !(out_ok && vs_ok) {
                    strictly_positive = false;
                }
            }
        }
        if primitive {
            PredicateClass::Primitive
        } else if basic {
            PredicateClass::Basic
        } else if strictly_positive {
            PredicateClass::StrictlyPositive
        } else {
            PredicateClass::General
        }
    }

    /// Conditions I2-I6 for every constant predicate `C`, every `f` producing
    /// `C v`, and every accessible position `j` of `f`.
    pub fn admissible_check(&self) -> Vec<AdmissibilityFinding> {
        let mut out = Vec::new();
        for decl in &self.decls {
            let f = &decl.name;
            let Some((c, v)) = self.output_inductive(f) else { continue };
            let (binders, _) = decl.ty.product_prefix();
            let mon_c = self.mon(&c);
            let mon = |g: &str| self.mon(g);
            for j in self.acc(f) {
                let Some((_, u)) = binders.get(j - 1) else { continue };
                let pos = signed_positions(u, Polarity::Pos, &mon);
                let mut iota = BTreeMap::new();
                let mut unbound = Vec::new();
                for y in free_vars(u, Some(Sort::Box)) {
                    match v.iter().position(|a| matches!(a, Term::Var(z) if *z == y)) {
                        Some(k) => {
                            iota.insert(y.name.to_string(), k + 1);
                        }
                        None => unbound.push(format!("predicate variable {} is not a parameter of {c}", y.name)),
                    }
                }

                let mut bad = Vec::new();
                for d in self.equivalents(&c) {
                    let ps = symbol_positions(u, &d);
                    if !ps.is_subset(&pos) {
                        bad.push(format!("{d} occurs at a non-positive position in {u}"));
                    }
                }
                out.push(AdmissibilityFinding::new("I3", &c, f, j, verdict_of(bad), &iota));

                let bigger: Vec<String> = self
                    .decls
                    .iter()
                    .filter(|d| self.is_constant_predicate(&d.name) && self.prec.gt(&d.name, &c))
                    .filter(|d| u.mentions_symbol(&d.name))
                    .map(|d| format!("{} is greater than {c} and occurs in {u}", d.name))
                    .collect();
                out.push(AdmissibilityFinding::new("I4", &c, f, j, verdict_of(bigger), &iota));

                let defined: Vec<String> = u
                    .symbols()
                    .into_iter()
                    .filter(|g| self.is_defined_predicate(g))
                    .map(|g| format!("defined symbol {g} occurs in {u}"))
                    .collect();
                out.push(AdmissibilityFinding::new("I5", &c, f, j, verdict_of(defined), &iota));

                out.push(AdmissibilityFinding::new("I6", &c, f, j, verdict_of(unbound), &iota));

                let mut nonmono = Vec::new();
                for y in free_vars(u, Some(Sort::Box)) {
                    if let Some(&k) = iota.get(&*y.name) {
                        if mon_c.contains(&k) && !var_positions(u, &y).is_subset(&pos) {
                            nonmono.push(format!("monotonic parameter {} occurs non-positively in {u}", y.name));
                        }
                    }
                }
                out.push(AdmissibilityFinding::new("I2", &c, f, j, verdict_of(nonmono), &iota));
            }
        }
        out
    }
}

fn verdict_of(problems: Vec<String>) -> Verdict {
    if problems.is_empty() {
        Verdict::Holds
    } else {
        Verdict::Fails(problems.join("; "))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AdmissibilityFinding {
    pub condition: &'static str,
    pub predicate: String,
    pub symbol: String,
    pub position: usize,
    pub verdict: Verdict,
    /// `iota_Y` witnesses: predicate variable to parameter index of `C`.
    pub iota: BTreeMap<String, usize>,
}

impl AdmissibilityFinding {
    fn new(
        condition: &'static str,
        c: &str,
        f: &str,
        j: usize,
        verdict: Verdict,
        iota: &BTreeMap<String, usize>,
    ) -> AdmissibilityFinding {
        AdmissibilityFinding {
            condition,
            predicate: c.to_string(),
            symbol: f.to_string(),
            position: j,
            verdict,
            iota: iota.clone(),
        }
    }
    pub fn key(&self) -> String {
        format!("A2.{}.{}.{}.{}", self.condition, self.predicate, self.symbol, self.position)
    }
}

// ---------------------------------------------------------------------------
// Elaboration

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct ElabError {
    pub line: usize,
    pub msg: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LoadError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("elaboration error at {0}")]
    Elab(#[from] ElabError),
}

/// An elaborated signature with its rules, in source order.
#[derive(Clone, Debug)]
pub struct System {
    pub sig: Signature,
    pub rules: Vec<Rule>,
    pub source: SourceFile,
}

impl System {
    pub fn rewrite_system(&self) -> RewriteSystem {
        RewriteSystem::new(self.rules.clone())
    }
    pub fn symbol_names(&self) -> BTreeSet<String> {
        self.sig.names().map(|n| n.to_string()).collect()
    }
}

pub fn load(text: &str) -> Result<System, LoadError> {
    let src = parse(text)?;
    Ok(elaborate(&src)?)
}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, ElabError> {
    Err(ElabError { line, msg: msg.into() })
}

pub fn elaborate(src: &SourceFile) -> Result<System, ElabError> {
    let mut sig = Signature::default();
    let empty = RewriteSystem::empty();

    for d in &src.decls {
        if let Decl::Symb { name, ty, line } = d {
            let typer = Typer::new(&sig, &empty, ELAB_FUEL);
            let sort = match typer.infer(&Env::new(), ty) {
                Ok(s) => match typer.as_sort(&s) {
                    Some(so) => so,
                    None => return err(*line, format!("type {ty} of {name} is not typed by a sort")),
                },
                Err(e) => return err(*line, format!("type of {name} is ill-typed: {e}")),
            };
            let n: Name = name.as_str().into();
            sig.index.insert(n.clone(), sig.decls.len());
            sig.decls.push(SymbolDecl {
                name: n,
                ty: ty.clone(),
                sort,
                defined: false,
                max_rule_arity: 0,
                line: *line,
            });
        }
    }

    for d in &src.decls {
        if let Decl::Rule(r) = d {
            let Term::Symb(f) = r.lhs.spine().0 else {
                return err(r.line, format!("left-hand side {} is not headed by a symbol", r.lhs));
            };
            let n = r.lhs.spine().1.len();
            let i = sig.index[f];
            sig.decls[i].defined = true;
            sig.decls[i].max_rule_arity = sig.decls[i].max_rule_arity.max(n);
        }
    }

    let names: Vec<Name> = sig.decls.iter().map(|d| d.name.clone()).collect();
    let mut prec = Precedence::new(&names);
    let mut strict: Vec<(Name, Name, usize)> = Vec::new();
    for d in &sig.decls {
        for g in d.ty.symbols() {
            if g != d.name {
                prec.add_ge(&d.name, &g);
                strict.push((d.name.clone(), g, d.line));
            }
        }
    }
    for d in &src.decls {
        match d {
            Decl::Prec { left, rel, right, line } => {
                for g in std::iter::once(left).chain(right) {
                    if sig.symbol(g).is_none() {
                        return err(*line, format!("unknown symbol {g} in precedence"));
                    }
                }
                for g in right {
                    prec.add_ge(left, g);
                    match rel {
                        PrecRel::Greater => strict.push((left.as_str().into(), g.as_str().into(), *line)),
                        PrecRel::Equal => prec.add_ge(g, left),
                    }
                }
            }
            Decl::Mon { name, indices, line } => {
                let Some(decl) = sig.symbol(name) else { return err(*line, format!("unknown symbol {name}")) };
                if !sig.is_constant_predicate(name) {
                    return err(*line, format!("mon declared for {name}, which is not a constant predicate"));
                }
                let (binders, _) = decl.ty.product_prefix();
                for &i in indices {
                    if i == 0 || i > binders.len() || binders[i - 1].0.sort != Sort::Box {
                        return err(*line, format!("mon index {i} of {name} is not a predicate argument"));
                    }
                }
                sig.mon.insert(name.as_str().into(), indices.iter().copied().collect());
            }
            Decl::Acc { name, indices, line } => {
                let Some(decl) = sig.symbol(name) else { return err(*line, format!("unknown symbol {name}")) };
                if sig.output_inductive(name).is_none() && !indices.is_empty() {
                    return err(*line, format!("acc declared for {name}, whose output is not a constant predicate"));
                }
                let n = decl.arity();
                if let Some(&i) = indices.iter().find(|&&i| i == 0 || i > n) {
                    return err(*line, format!("acc index {i} out of range for {name} (arity {n})"));
                }
                sig.acc.insert(name.as_str().into(), indices.iter().copied().collect());
            }
            Decl::Status { name, status, line } => {
                let Some(decl) = sig.symbol(name) else { return err(*line, format!("unknown symbol {name}")) };
                let n = decl.arity();
                if status.arity() > n {
                    return err(*line, format!("status of {name} has arity {} but {name} takes {n} arguments", status.arity()));
                }
                sig.status.insert(name.as_str().into(), status.clone());
            }
            _ => {}
        }
    }
    for (f, g, line) in &strict {
        if prec.ge(g, f) {
            return err(*line, format!("precedence cycle: {f} > {g} but {g} >= {f}"));
        }
    }
    sig.prec = prec;

    for a in &sig.decls {
        for b in &sig.decls {
            if a.name < b.name && sig.prec.equiv(&a.name, &b.name) && sig.status(&a.name) != sig.status(&b.name) {
                return err(
                    b.line,
                    format!("equivalent symbols {} and {} have different statuses", a.name, b.name),
                );
            }
        }
    }
    sig.compute_classes();

    let mut rules = Vec::new();
    for d in &src.decls {
        if let Decl::Rule(rd) = d {
            let rule = Rule::elaborate(&sig, rd, rules.len() + 1)?;
            for g in rule.rhs.symbols() {
                if !sig.prec.ge(&rule.head, &g) {
                    return err(
                        rd.line,
                        format!("rule {} is not compatible with the precedence: {} >= {g} does not hold", rule.id, rule.head),
                    );
                }
            }
            rules.push(rule);
        }
    }
    Ok(System { sig, rules, source: src.clone() })
}
