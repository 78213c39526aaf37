//! Terms of the calculus: sorts, variables, symbols, binary application,
//! abstraction and dependent product. Also positions, substitutions,
//! alpha-equivalence and signed (positive/negative) positions.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

/// Interned-ish identifier shared between terms.
pub type Name = Arc<str>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Star,
    Box,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Star => write!(f, "*"),
            Sort::Box => write!(f, "BOX"),
        }
    }
}

/// A variable together with its sort tag. Identity is the name alone: a
/// well-formed input never uses one name at two sorts.
#[derive(Clone, Debug)]
pub struct Var {
    pub name: Name,
    pub sort: Sort,
}

impl Var {
    pub fn new(name: &str, sort: Sort) -> Var {
        Var { name: Arc::from(name), sort }
    }
    pub fn obj(name: &str) -> Var {
        Var::new(name, Sort::Star)
    }
    pub fn pred(name: &str) -> Var {
        Var::new(name, Sort::Box)
    }
}

impl PartialEq for Var {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}
impl Eq for Var {}
impl Hash for Var {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.name.hash(state)
    }
}
impl PartialOrd for Var {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Var {
    fn cmp(&self, other: &Self) -> Ordering {
        self.name.cmp(&other.name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Sort(Sort),
    Var(Var),
    Symb(Name),
    App(Arc<Term>, Arc<Term>),
    Abs(Var, Arc<Term>, Arc<Term>),
    Prod(Var, Arc<Term>, Arc<Term>),
}

/// Name used for the binder of a non-dependent arrow `T -> U`.
pub const ARROW_BINDER: &str = "_";

impl Term {
    pub fn star() -> Term {
        Term::Sort(Sort::Star)
    }
    pub fn kind_box() -> Term {
        Term::Sort(Sort::Box)
    }
    pub fn var(x: &Var) -> Term {
        Term::Var(x.clone())
    }
    pub fn symb(name: &str) -> Term {
        Term::Symb(Arc::from(name))
    }
    pub fn app(t: Term, u: Term) -> Term {
        Term::App(Arc::new(t), Arc::new(u))
    }
    pub fn apps<I: IntoIterator<Item = Term>>(head: Term, args: I) -> Term {
        args.into_iter().fold(head, Term::app)
    }
    pub fn abs(x: Var, ty: Term, body: Term) -> Term {
        Term::Abs(x, Arc::new(ty), Arc::new(body))
    }
    pub fn prod(x: Var, ty: Term, body: Term) -> Term {
        Term::Prod(x, Arc::new(ty), Arc::new(body))
    }
    /// Non-dependent product `t -> u`. The binder sort follows the domain.
    pub fn arrow(t: Term, u: Term) -> Term {
        let sort = if t.is_kind() { Sort::Box } else { Sort::Star };
        Term::prod(Var::new(ARROW_BINDER, sort), t, u)
    }

    /// Spine view `h t1 .. tn` of a left-nested application.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let Term::App(f, a) = cur {
            args.push(a.as_ref());
            cur = f.as_ref();
        }
        args.reverse();
        (cur, args)
    }

    pub fn head_symbol(&self) -> Option<&Name> {
        match self.spine().0 {
            Term::Symb(f) => Some(f),
            _ => None,
        }
    }

    /// Kinds are the terms of shape `(x1:T1)..(xn:Tn) *`.
    pub fn is_kind(&self) -> bool {
        match self {
            Term::Sort(Sort::Star) => true,
            Term::Prod(_, _, body) => body.is_kind(),
            _ => false,
        }
    }

    /// Splits the leading products: `(x1:T1)..(xn:Tn) U` gives `([(x_i,T_i)], U)`.
    pub fn product_prefix(&self) -> (Vec<(Var, Term)>, Term) {
        let mut binders = Vec::new();
        let mut cur = self;
        while let Term::Prod(x, t, body) = cur {
            binders.push((x.clone(), t.as_ref().clone()));
            cur = body.as_ref();
        }
        (binders, cur.clone())
    }

    pub fn contains_box(&self) -> bool {
        match self {
            Term::Sort(s) => *s == Sort::Box,
            Term::Var(_) | Term::Symb(_) => false,
            Term::App(a, b) => a.contains_box() || b.contains_box(),
            Term::Abs(_, a, b) | Term::Prod(_, a, b) => a.contains_box() || b.contains_box(),
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::Sort(_) | Term::Var(_) | Term::Symb(_) => 1,
            Term::App(a, b) | Term::Abs(_, a, b) | Term::Prod(_, a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn symbols(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        collect_symbols(self, &mut out);
        out
    }

    pub fn mentions_symbol(&self, f: &str) -> bool {
        match self {
            Term::Symb(g) => &**g == f,
            Term::Sort(_) | Term::Var(_) => false,
            Term::App(a, b) | Term::Abs(_, a, b) | Term::Prod(_, a, b) => {
                a.mentions_symbol(f) || b.mentions_symbol(f)
            }
        }
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(x) => Some(x),
            _ => None,
        }
    }
}

fn collect_symbols(t: &Term, out: &mut BTreeSet<Name>) {
    match t {
        Term::Symb(f) => {
            out.insert(f.clone());
        }
        Term::Sort(_) | Term::Var(_) => {}
        Term::App(a, b) | Term::Abs(_, a, b) | Term::Prod(_, a, b) => {
            collect_symbols(a, out);
            collect_symbols(b, out);
        }
    }
}

// ---------------------------------------------------------------------------
// Positions

/// A Dewey position over {1,2}.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position(pub Vec<u8>);

impl Position {
    pub fn root() -> Position {
        Position(Vec::new())
    }
    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }
    pub fn child(&self, i: u8) -> Position {
        let mut v = self.0.clone();
        v.push(i);
        Position(v)
    }
    pub fn concat(&self, other: &Position) -> Position {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Position(v)
    }
    /// `1^k 2`: position of the i-th argument (1-based) of a spine with n arguments.
    pub fn spine_arg(n: usize, i: usize) -> Position {
        let mut v = vec![1u8; n - i];
        v.push(2);
        Position(v)
    }
    pub fn prefixed(prefix: &[u8], set: BTreeSet<Position>) -> BTreeSet<Position> {
        set.into_iter()
            .map(|p| {
                let mut v = prefix.to_vec();
                v.extend(p.0);
                Position(v)
            })
            .collect()
    }
    pub fn parse(s: &str) -> Option<Position> {
        if s == "root" || s.is_empty() {
            return Some(Position::root());
        }
        s.split('.')
            .map(|c| match c {
                "1" => Some(1u8),
                "2" => Some(2u8),
                _ => None,
            })
            .collect::<Option<Vec<u8>>>()
            .map(Position)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "root");
        }
        let parts: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        write!(f, "{}", parts.join("."))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TermError {
    #[error("invalid position {pos} in {term}")]
    InvalidPosition { pos: Position, term: String },
}

pub fn subterm_at<'a>(t: &'a Term, p: &Position) -> Result<&'a Term, TermError> {
    let mut cur = t;
    for &d in &p.0 {
        cur = match (cur, d) {
            (Term::App(a, _), 1) | (Term::Abs(_, a, _), 1) | (Term::Prod(_, a, _), 1) => a,
            (Term::App(_, b), 2) | (Term::Abs(_, _, b), 2) | (Term::Prod(_, _, b), 2) => b,
            _ => {
                return Err(TermError::InvalidPosition { pos: p.clone(), term: t.to_string() })
            }
        };
    }
    Ok(cur)
}

pub fn replace_at(t: &Term, p: &Position, u: Term) -> Result<Term, TermError> {
    fn go(t: &Term, path: &[u8], u: Term) -> Option<Term> {
        let Some((&d, rest)) = path.split_first() else {
            return Some(u);
        };
        match (t, d) {
            (Term::App(a, b), 1) => Some(Term::App(Arc::new(go(a, rest, u)?), b.clone())),
            (Term::App(a, b), 2) => Some(Term::App(a.clone(), Arc::new(go(b, rest, u)?))),
            (Term::Abs(x, a, b), 1) => Some(Term::Abs(x.clone(), Arc::new(go(a, rest, u)?), b.clone())),
            (Term::Abs(x, a, b), 2) => Some(Term::Abs(x.clone(), a.clone(), Arc::new(go(b, rest, u)?))),
            (Term::Prod(x, a, b), 1) => Some(Term::Prod(x.clone(), Arc::new(go(a, rest, u)?), b.clone())),
            (Term::Prod(x, a, b), 2) => Some(Term::Prod(x.clone(), a.clone(), Arc::new(go(b, rest, u)?))),
            _ => None,
        }
    }
    go(t, &p.0, u).ok_or_else(|| TermError::InvalidPosition { pos: p.clone(), term: t.to_string() })
}

/// All positions of `t`, in pre-order.
pub fn positions(t: &Term) -> Vec<Position> {
    fn go(t: &Term, cur: &mut Vec<u8>, out: &mut Vec<Position>) {
        out.push(Position(cur.clone()));
        match t {
            Term::App(a, b) | Term::Abs(_, a, b) | Term::Prod(_, a, b) => {
                cur.push(1);
                go(a, cur, out);
                cur.pop();
                cur.push(2);
                go(b, cur, out);
                cur.pop();
            }
            _ => {}
        }
    }
    let mut out = Vec::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

/// Positions where the symbol `f` occurs.
pub fn symbol_positions(t: &Term, f: &str) -> BTreeSet<Position> {
    positions(t)
        .into_iter()
        .filter(|p| matches!(subterm_at(t, p), Ok(Term::Symb(g)) if &**g == f))
        .collect()
}

/// Positions of the free occurrences of the variable `x`.
pub fn var_positions(t: &Term, x: &Var) -> BTreeSet<Position> {
    fn go(t: &Term, x: &Var, cur: &mut Vec<u8>, out: &mut BTreeSet<Position>) {
        match t {
            Term::Var(y) if y == x => {
                out.insert(Position(cur.clone()));
            }
            Term::App(a, b) => {
                cur.push(1);
                go(a, x, cur, out);
                cur.pop();
                cur.push(2);
                go(b, x, cur, out);
                cur.pop();
            }
            Term::Abs(y, a, b) | Term::Prod(y, a, b) => {
                cur.push(1);
                go(a, x, cur, out);
                cur.pop();
                if y != x {
                    cur.push(2);
                    go(b, x, cur, out);
                    cur.pop();
                }
            }
            _ => {}
        }
    }
    let mut out = BTreeSet::new();
    go(t, x, &mut Vec::new(), &mut out);
    out
}

// ---------------------------------------------------------------------------
// Free variables

pub fn free_vars(t: &Term, sort_filter: Option<Sort>) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    collect_fv(t, &mut Vec::new(), &mut out);
    if let Some(s) = sort_filter {
        out.retain(|x| x.sort == s);
    }
    out
}

fn collect_fv(t: &Term, bound: &mut Vec<Name>, out: &mut BTreeSet<Var>) {
    match t {
        Term::Var(x) => {
            if !bound.contains(&x.name) {
                out.insert(x.clone());
            }
        }
        Term::Sort(_) | Term::Symb(_) => {}
        Term::App(a, b) => {
            collect_fv(a, bound, out);
            collect_fv(b, bound, out);
        }
        Term::Abs(x, a, b) | Term::Prod(x, a, b) => {
            collect_fv(a, bound, out);
            bound.push(x.name.clone());
            collect_fv(b, bound, out);
            bound.pop();
        }
    }
}

pub fn occurs_free(x: &Var, t: &Term) -> bool {
    match t {
        Term::Var(y) => x == y,
        Term::Sort(_) | Term::Symb(_) => false,
        Term::App(a, b) => occurs_free(x, a) || occurs_free(x, b),
        Term::Abs(y, a, b) | Term::Prod(y, a, b) => occurs_free(x, a) || (x != y && occurs_free(x, b)),
    }
}

/// All variable names in `t`, free or bound.
pub fn all_var_names(t: &Term, out: &mut BTreeSet<Name>) {
    match t {
        Term::Var(x) => {
            out.insert(x.name.clone());
        }
        Term::Sort(_) | Term::Symb(_) => {}
        Term::App(a, b) => {
            all_var_names(a, out);
            all_var_names(b, out);
        }
        Term::Abs(x, a, b) | Term::Prod(x, a, b) => {
            out.insert(x.name.clone());
            all_var_names(a, out);
            all_var_names(b, out);
        }
    }
}

/// Priming `x` until the name avoids `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<Name>) -> Name {
    let mut candidate = format!("{base}'");
    while avoid.contains(candidate.as_str()) {
        candidate.push('\'');
    }
    Arc::from(candidate.as_str())
}

// ---------------------------------------------------------------------------
// Substitutions

/// Finite map from variables to terms; identity bindings are dropped.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Subst(BTreeMap<Var, Term>);

impl Subst {
    pub fn new() -> Subst {
        Subst(BTreeMap::new())
    }
    pub fn single(x: Var, t: Term) -> Subst {
        let mut s = Subst::new();
        s.insert(x, t);
        s
    }
    pub fn from_pairs<I: IntoIterator<Item = (Var, Term)>>(pairs: I) -> Subst {
        let mut s = Subst::new();
        for (x, t) in pairs {
            s.insert(x, t);
        }
        s
    }
    pub fn insert(&mut self, x: Var, t: Term) {
        if matches!(&t, Term::Var(y) if *y == x) {
            self.0.remove(&x);
        } else {
            self.0.insert(x, t);
        }
    }
    pub fn get(&self, x: &Var) -> Option<&Term> {
        self.0.get(x)
    }
    pub fn remove(&mut self, x: &Var) -> Option<Term> {
        self.0.remove(x)
    }
    pub fn contains(&self, x: &Var) -> bool {
        self.0.contains_key(x)
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn domain(&self) -> BTreeSet<Var> {
        self.0.keys().cloned().collect()
    }
    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.0.iter()
    }
    /// Variable-to-variable image, used to look up a binding by name only.
    pub fn get_by_name(&self, name: &str) -> Option<&Term> {
        self.0.iter().find(|(k, _)| &*k.name == name).map(|(_, v)| v)
    }
    /// `self` followed by `other`: x(self;other) = (x self) other.
    pub fn then(&self, other: &Subst) -> Subst {
        let mut out = Subst::new();
        for (x, t) in &self.0 {
            out.insert(x.clone(), substitute(t, other));
        }
        for (x, t) in &other.0 {
            if !self.0.contains_key(x) {
                out.insert(x.clone(), t.clone());
            }
        }
        out
    }
}

impl fmt::Display for Subst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(x, t)| format!("{} := {}", x.name, t)).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Capture-avoiding simultaneous substitution.
pub fn substitute(t: &Term, theta: &Subst) -> Term {
    if theta.is_empty() {
        return t.clone();
    }
    subst_rec(t, &theta.0)
}

fn subst_rec(t: &Term, map: &BTreeMap<Var, Term>) -> Term {
    match t {
        Term::Var(x) => map.get(x).cloned().unwrap_or_else(|| t.clone()),
        Term::Sort(_) | Term::Symb(_) => t.clone(),
        Term::App(a, b) => Term::App(Arc::new(subst_rec(a, map)), Arc::new(subst_rec(b, map))),
        Term::Abs(x, a, b) => {
            let (x2, b2) = subst_binder(x, b, map);
            Term::Abs(x2, Arc::new(subst_rec(a, map)), Arc::new(b2))
        }
        Term::Prod(x, a, b) => {
            let (x2, b2) = subst_binder(x, b, map);
            Term::Prod(x2, Arc::new(subst_rec(a, map)), Arc::new(b2))
        }
    }
}

fn subst_binder(x: &Var, body: &Term, map: &BTreeMap<Var, Term>) -> (Var, Term) {
    let body_fv = free_vars(body, None);
    let relevant: BTreeMap<Var, Term> = map
        .iter()
        .filter(|(y, _)| *y != x && body_fv.contains(*y))
        .map(|(y, t)| (y.clone(), t.clone()))
        .collect();
    if relevant.is_empty() {
        return (x.clone(), body.clone());
    }
    let mut range_fv: BTreeSet<Name> = BTreeSet::new();
    for t in relevant.values() {
        for v in free_vars(t, None) {
            range_fv.insert(v.name);
        }
    }
    if !range_fv.contains(&x.name) {
        return (x.clone(), subst_rec(body, &relevant));
    }
    let mut avoid = range_fv;
    avoid.extend(body_fv.iter().map(|v| v.name.clone()));
    avoid.extend(relevant.keys().map(|v| v.name.clone()));
    let x2 = Var { name: fresh_name(&x.name, &avoid), sort: x.sort };
    let mut inner = relevant;
    inner.insert(x.clone(), Term::Var(x2.clone()));
    (x2, subst_rec(body, &inner))
}

/// `body{x -> u}`.
pub fn subst1(body: &Term, x: &Var, u: &Term) -> Term {
    substitute(body, &Subst::single(x.clone(), u.clone()))
}

/// Instantiates a product type `(x1:T1)..(xn:Tn) U` with the given arguments.
/// Returns the instantiated domain types and the remaining type.
pub fn instantiate_product(ty: &Term, args: &[Term]) -> Option<(Vec<Term>, Term)> {
    let mut cur = ty.clone();
    let mut domains = Vec::with_capacity(args.len());
    for a in args {
        match &cur {
            Term::Prod(x, dom, body) => {
                domains.push(dom.as_ref().clone());
                cur = subst1(body, x, a);
            }
            _ => return None,
        }
    }
    Some((domains, cur))
}

// ---------------------------------------------------------------------------
// Alpha-equivalence

pub fn alpha_eq(t: &Term, u: &Term) -> bool {
    aeq(t, u, &mut Vec::new())
}

fn aeq(t: &Term, u: &Term, env: &mut Vec<(Name, Name)>) -> bool {
    match (t, u) {
        (Term::Sort(a), Term::Sort(b)) => a == b,
        (Term::Symb(f), Term::Symb(g)) => f == g,
        (Term::Var(x), Term::Var(y)) => {
            let i = env.iter().rposition(|(l, _)| *l == x.name);
            let j = env.iter().rposition(|(_, r)| *r == y.name);
            match (i, j) {
                (Some(i), Some(j)) => i == j,
                (None, None) => x.name == y.name,
                _ => false,
            }
        }
        (Term::App(a1, b1), Term::App(a2, b2)) => aeq(a1, a2, env) && aeq(b1, b2, env),
        (Term::Abs(x, a1, b1), Term::Abs(y, a2, b2)) | (Term::Prod(x, a1, b1), Term::Prod(y, a2, b2)) => {
            if x.sort != y.sort || !aeq(a1, a2, env) {
                return false;
            }
            env.push((x.name.clone(), y.name.clone()));
            let r = aeq(b1, b2, env);
            env.pop();
            r
        }
        _ => false,
    }
}

// ---------------------------------------------------------------------------
// Algebraic terms and signed positions

/// Variables and symbol-headed applications of algebraic terms only.
pub fn is_algebraic(t: &Term) -> bool {
    match t {
        Term::Var(_) => true,
        Term::Sort(_) | Term::Abs(..) | Term::Prod(..) => false,
        Term::Symb(_) | Term::App(..) => {
            let (h, args) = t.spine();
            matches!(h, Term::Symb(_)) && args.into_iter().all(is_algebraic)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Polarity {
    Pos,
    Neg,
}

impl Polarity {
    pub fn flip(self) -> Polarity {
        match self {
            Polarity::Pos => Polarity::Neg,
            Polarity::Neg => Polarity::Pos,
        }
    }
}

/// Positive or negative positions of `t` under the rule of signs, where
/// `mon(f)` yields the monotonic argument indices (1-based) of `f`.
pub fn signed_positions(t: &Term, delta: Polarity, mon: &dyn Fn(&str) -> BTreeSet<usize>) -> BTreeSet<Position> {
    let here = || {
        let mut s = BTreeSet::new();
        if delta == Polarity::Pos {
            s.insert(Position::root());
        }
        s
    };
    match t {
        Term::Sort(_) | Term::Var(_) => here(),
        Term::Prod(_, u, v) => {
            let mut out = Position::prefixed(&[1], signed_positions(u, delta.flip(), mon));
            out.extend(Position::prefixed(&[2], signed_positions(v, delta, mon)));
            out
        }
        Term::Abs(_, _, v) => Position::prefixed(&[2], signed_positions(v, delta, mon)),
        Term::Symb(_) | Term::App(..) => {
            let (h, args) = t.spine();
            match h {
                Term::Symb(f) => {
                    let n = args.len();
                    let mut out = BTreeSet::new();
                    if delta == Polarity::Pos {
                        out.insert(Position(vec![1u8; n]));
                    }
                    for i in mon(f) {
                        if i >= 1 && i <= n {
                            let prefix = Position::spine_arg(n, i).0;
                            out.extend(Position::prefixed(&prefix, signed_positions(args[i - 1], delta, mon)));
                        }
                    }
                    out
                }
                _ => match t {
                    Term::App(a, _) => Position::prefixed(&[1], signed_positions(a, delta, mon)),
                    _ => unreachable!("non-symbol spine head without application"),
                },
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Printing (ASCII concrete syntax)

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", print_term(self, 0))
    }
}

/// Precedence levels: 0 = binders and arrows, 1 = application, 2 = atom.
fn print_term(t: &Term, level: u8) -> String {
    match t {
        Term::Sort(s) => s.to_string(),
        Term::Var(x) => x.name.to_string(),
        Term::Symb(f) => f.to_string(),
        Term::App(..) => {
            let (h, args) = t.spine();
            let mut s = print_term(h, 2);
            for a in args {
                s.push(' ');
                s.push_str(&print_term(a, 2));
            }
            paren(s, level >= 2)
        }
        Term::Abs(x, a, b) => paren(format!("[{}:{}] {}", x.name, print_term(a, 0), print_term(b, 0)), level >= 1),
        Term::Prod(x, a, b) => {
            let s = if occurs_free(x, b) {
                format!("({}:{}) {}", x.name, print_term(a, 0), print_term(b, 0))
            } else {
                format!("{} -> {}", print_term(a, 1), print_term(b, 0))
            };
            paren(s, level >= 1)
        }
    }
}

fn paren(s: String, wrap: bool) -> String {
    if wrap {
        format!("({s})")
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(n: &str) -> Term {
        Term::var(&Var::obj(n))
    }

    #[test]
    fn position_parsing() {
        assert_eq!(Position::parse("root"), Some(Position::root()));
        assert_eq!(Position::parse(""), Some(Position::root()));
        assert_eq!(Position::parse("1.1.2"), Some(Position(vec![1, 1, 2])));
        assert_eq!(Position::parse("1.3"), None);
        assert_eq!(Position::parse("1..2"), None);
        assert_eq!(Position(vec![2, 1]).to_string(), "2.1");
        assert_eq!(Position::root().to_string(), "root");
    }

    #[test]
    fn spine_argument_positions() {
        let t = Term::apps(Term::symb("f"), [x("a"), x("b"), x("c")]);
        for (i, name) in ["a", "b", "c"].iter().enumerate() {
            assert_eq!(subterm_at(&t, &Position::spine_arg(3, i + 1)).unwrap(), &x(name));
        }
        assert_eq!(Position::spine_arg(1, 1), Position(vec![2]));
    }

    #[test]
    fn invalid_positions_are_errors() {
        let t = Term::app(Term::symb("s"), x("n"));
        assert!(subterm_at(&t, &Position(vec![2, 1])).is_err());
        assert!(replace_at(&t, &Position(vec![1, 1]), x("m")).is_err());
    }

    #[test]
    fn fresh_names_avoid_the_given_set() {
        let avoid: BTreeSet<Name> = ["x'", "x''"].iter().map(|s| Name::from(*s)).collect();
        assert_eq!(&*fresh_name("x", &avoid), "x'''");
        assert_eq!(&*fresh_name("y", &avoid), "y'");
    }

    #[test]
    fn identity_bindings_are_dropped() {
        let mut s = Subst::new();
        s.insert(Var::obj("x"), x("x"));
        assert!(s.is_empty());
        s.insert(Var::obj("x"), x("y"));
        assert_eq!(s.len(), 1);
        s.insert(Var::obj("x"), x("x"));
        assert!(s.is_empty());
    }

    #[test]
    fn composition_applies_left_then_right() {
        let first = Subst::single(Var::obj("x"), Term::app(Term::symb("s"), x("y")));
        let second = Subst::from_pairs([(Var::obj("y"), Term::symb("0")), (Var::obj("z"), x("w"))]);
        let both = first.then(&second);
        let t = Term::apps(Term::symb("f"), [x("x"), x("y"), x("z")]);
        assert_eq!(substitute(&t, &both), substitute(&substitute(&t, &first), &second));
    }

    #[test]
    fn product_instantiation() {
        // (A:*) A -> list A
        let a = Var::pred("A");
        let ty = Term::prod(
            a.clone(),
            Term::star(),
            Term::arrow(Term::var(&a), Term::app(Term::symb("list"), Term::var(&a))),
        );
        let (doms, out) = instantiate_product(&ty, &[Term::symb("nat"), x("n")]).unwrap();
        assert_eq!(doms, vec![Term::star(), Term::symb("nat")]);
        assert_eq!(out, Term::app(Term::symb("list"), Term::symb("nat")));
        assert!(instantiate_product(&ty, &[Term::symb("nat"), x("n"), x("m")]).is_none());
        assert!(ty.product_prefix().1.head_symbol().is_some_and(|f| &**f == "list"));
    }

    #[test]
    fn kinds_and_arrow_binders() {
        let k = Term::arrow(Term::symb("nat"), Term::star());
        assert!(k.is_kind());
        assert!(!Term::arrow(Term::symb("nat"), Term::symb("nat")).is_kind());
        let Term::Prod(b, _, _) = Term::arrow(Term::star(), Term::star()) else { panic!() };
        assert_eq!(b.sort, Sort::Box);
    }

    #[test]
    fn printing_parenthesizes_by_level() {
        let nat = Term::symb("nat");
        let arrow = Term::arrow(Term::arrow(nat.clone(), nat.clone()), nat.clone());
        assert_eq!(arrow.to_string(), "(nat -> nat) -> nat");
        let t = Term::app(Term::symb("s"), Term::app(Term::symb("s"), Term::symb("0")));
        assert_eq!(t.to_string(), "s (s 0)");
        let redex = Term::app(Term::abs(Var::obj("y"), nat.clone(), x("y")), Term::symb("0"));
        assert_eq!(redex.to_string(), "([y:nat] y) 0");
    }
}
