//! Beta-reduction and rewriting with user rules: matching, one-step reducts,
//! normalization strategies, weak-head reduction, convertibility, critical
//! pairs and joinability.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::rules::Rule;
use crate::term::{
    alpha_eq, all_var_names, fresh_name, free_vars, positions, replace_at, subst1, substitute, subterm_at, Name,
    Position, Subst, Term, Var,
};

/// Outcome of a check. `Assumed` only arises from explicit user assertions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "reason")]
pub enum Verdict {
    Holds,
    Fails(String),
    Assumed(String),
    Undecided(String),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }
    pub fn fails(&self) -> bool {
        matches!(self, Verdict::Fails(_))
    }
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Holds => "Holds",
            Verdict::Fails(_) => "Fails",
            Verdict::Assumed(_) => "Assumed",
            Verdict::Undecided(_) => "Undecided",
        }
    }
    pub fn reason(&self) -> &str {
        match self {
            Verdict::Holds => "",
            Verdict::Fails(r) | Verdict::Assumed(r) | Verdict::Undecided(r) => r,
        }
    }
    fn rank(&self) -> u8 {
        match self {
            Verdict::Holds => 0,
            Verdict::Assumed(_) => 1,
            Verdict::Undecided(_) => 2,
            Verdict::Fails(_) => 3,
        }
    }
    /// Conjunction: the worst of the two verdicts wins.
    pub fn and(self, other: Verdict) -> Verdict {
        if other.rank() > self.rank() {
            other
        } else {
            self
        }
    }
    pub fn all<I: IntoIterator<Item = Verdict>>(items: I) -> Verdict {
        items.into_iter().fold(Verdict::Holds, Verdict::and)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Holds => write!(f, "Holds"),
            other => write!(f, "{}({})", other.label(), other.reason()),
        }
    }
}

/// Ordered rule list with a head-symbol index.
#[derive(Clone, Debug, Default)]
pub struct RewriteSystem {
    rules: Vec<Rule>,
    index: BTreeMap<Name, Vec<usize>>,
}

impl RewriteSystem {
    pub fn new(rules: Vec<Rule>) -> RewriteSystem {
        let mut index: BTreeMap<Name, Vec<usize>> = BTreeMap::new();
        for (i, r) in rules.iter().enumerate() {
            index.entry(r.head.clone()).or_default().push(i);
        }
        RewriteSystem { rules, index }
    }
    pub fn empty() -> RewriteSystem {
        RewriteSystem::default()
    }
    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }
    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
    pub fn rules_for(&self, f: &str) -> impl Iterator<Item = &Rule> {
        self.index.get(f).into_iter().flatten().map(move |&i| &self.rules[i])
    }
    pub fn defines(&self, f: &str) -> bool {
        self.index.contains_key(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StepTag {
    Beta,
    Rule(usize),
}

impl fmt::Display for StepTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepTag::Beta => write!(f, "beta"),
            StepTag::Rule(id) => write!(f, "rule {id}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Reduct {
    pub term: Term,
    pub tag: StepTag,
    pub pos: Position,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Innermost,
    Outermost,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FuelExhausted {
    pub budget: u64,
}

impl fmt::Display for FuelExhausted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "fuel exhausted after {} steps", self.budget)
    }
}

/// First-order matching of an algebraic pattern. Non-linear variables must
/// be matched by alpha-equal subterms.
pub fn match_algebraic(l: &Term, t: &Term) -> Option<Subst> {
    let mut sigma = Subst::new();
    let mut bound: BTreeMap<Var, Term> = BTreeMap::new();
    if match_into(l, t, &mut bound) {
        for (x, u) in bound {
            sigma.insert(x, u);
        }
        Some(sigma)
    } else {
        None
    }
}

fn match_into(l: &Term, t: &Term, bound: &mut BTreeMap<Var, Term>) -> bool {
    match (l, t) {
        (Term::Var(x), _) => match bound.get(x) {
            Some(prev) => alpha_eq(prev, t),
            None => {
                bound.insert(x.clone(), t.clone());
                true
            }
        },
        (Term::Symb(f), Term::Symb(g)) => f == g,
        (Term::App(l1, l2), Term::App(t1, t2)) => match_into(l1, t1, bound) && match_into(l2, t2, bound),
        _ => false,
    }
}

/// Contracts `t` at its root, if possible: beta first (when enabled), then
/// the first matching rule in rule order.
pub fn contract_root(rs: &RewriteSystem, t: &Term, beta: bool) -> Option<(Term, StepTag)> {
    if beta {
        if let Term::App(f, a) = t {
            if let Term::Abs(x, _, body) = f.as_ref() {
                return Some((subst1(body, x, a), StepTag::Beta));
            }
        }
    }
    root_rule_reducts(rs, t).into_iter().next()
}

fn root_rule_reducts(rs: &RewriteSystem, t: &Term) -> Vec<(Term, StepTag)> {
    let (h, args) = t.spine();
    let Term::Symb(f) = h else {
        return Vec::new();
    };
    rs.rules_for(f)
        .filter(|r| r.args.len() == args.len())
        .filter_map(|r| match_algebraic(&r.lhs, t).map(|s| (substitute(&r.rhs, &s), StepTag::Rule(r.id))))
        .collect()
}

/// Every beta and rule contraction at every position, listed in
/// leftmost-innermost position order.
pub fn one_step_reducts(rs: &RewriteSystem, t: &Term) -> Vec<Reduct> {
    let mut out = Vec::new();
    collect_reducts(rs, t, t, &mut Vec::new(), &mut out);
    out
}

fn collect_reducts(rs: &RewriteSystem, top: &Term, t: &Term, path: &mut Vec<u8>, out: &mut Vec<Reduct>) {
    match t {
        Term::App(a, b) | Term::Abs(_, a, b) | Term::Prod(_, a, b) => {
            path.push(1);
            collect_reducts(rs, top, a, path, out);
            path.pop();
            path.push(2);
            collect_reducts(rs, top, b, path, out);
            path.pop();
        }
        _ => {}
    }
    let pos = Position(path.clone());
    let mut here = Vec::new();
    if let Term::App(f, a) = t {
        if let Term::Abs(x, _, body) = f.as_ref() {
            here.push((subst1(body, x, a), StepTag::Beta));
        }
    }
    here.extend(root_rule_reducts(rs, t));
    for (u, tag) in here {
        let term = replace_at(top, &pos, u).expect("position comes from traversal");
        out.push(Reduct { term, tag, pos: pos.clone() });
    }
}

#[derive(Clone, Debug)]
pub struct TraceStep {
    pub tag: StepTag,
    pub pos: Position,
    /// The subterm at `pos` right after the contraction.
    pub result: Term,
}

#[derive(Clone, Debug)]
pub struct Normalized {
    pub term: Term,
    pub steps: u64,
    pub trace: Vec<TraceStep>,
}

/// Normalization driver with a contraction budget.
pub struct Normalizer<'a> {
    rs: &'a RewriteSystem,
    beta: bool,
    budget: u64,
    steps: u64,
    record: bool,
    trace: Vec<TraceStep>,
}

impl<'a> Normalizer<'a> {
    pub fn new(rs: &'a RewriteSystem, fuel: u64) -> Normalizer<'a> {
        Normalizer { rs, beta: true, budget: fuel, steps: 0, record: false, trace: Vec::new() }
    }
    pub fn without_beta(mut self) -> Self {
        self.beta = false;
        self
    }
    pub fn with_trace(mut self) -> Self {
        self.record = true;
        self
    }

    pub fn run(mut self, t: &Term, strategy: Strategy) -> Result<Normalized, FuelExhausted> {
        let term = match strategy {
            Strategy::Innermost => self.innermost(t, &mut Vec::new())?,
            Strategy::Outermost => self.outermost(t)?,
        };
        Ok(Normalized { term, steps: self.steps, trace: self.trace })
    }

    fn tick(&mut self, tag: StepTag, pos: &[u8], result: &Term) -> Result<(), FuelExhausted> {
        if self.steps >= self.budget {
            return Err(FuelExhausted { budget: self.budget });
        }
        self.steps += 1;
        if self.record {
            self.trace.push(TraceStep { tag, pos: Position(pos.to_vec()), result: result.clone() });
        }
        Ok(())
    }

    fn innermost(&mut self, t: &Term, path: &mut Vec<u8>) -> Result<Term, FuelExhausted> {
        let t2 = match t {
            Term::App(a, b) => {
                path.push(1);
                let a2 = self.innermost(a, path)?;
                path.pop();
                path.push(2);
                let b2 = self.innermost(b, path)?;
                path.pop();
                Term::App(Arc::new(a2), Arc::new(b2))
            }
            Term::Abs(x, a, b) => {
                path.push(1);
                let a2 = self.innermost(a, path)?;
                path.pop();
                path.push(2);
                let b2 = self.innermost(b, path)?;
                path.pop();
                return Ok(Term::Abs(x.clone(), Arc::new(a2), Arc::new(b2)));
            }
            Term::Prod(x, a, b) => {
                path.push(1);
                let a2 = self.innermost(a, path)?;
                path.pop();
                path.push(2);
                let b2 = self.innermost(b, path)?;
                path.pop();
                return Ok(Term::Prod(x.clone(), Arc::new(a2), Arc::new(b2)));
            }
            Term::Symb(_) => t.clone(),
            Term::Sort(_) | Term::Var(_) => return Ok(t.clone()),
        };
        match contract_root(self.rs, &t2, self.beta) {
            Some((u, tag)) => {
                self.tick(tag, path, &u)?;
                self.innermost(&u, path)
            }
            None => Ok(t2),
        }
    }

    fn outermost(&mut self, t: &Term) -> Result<Term, FuelExhausted> {
        let mut cur = t.clone();
        loop {
            let mut path = Vec::new();
            match self.outer_step(&cur, &mut path) {
                Some((u, tag)) => {
                    let pos = Position(path.clone());
                    let at = subterm_at(&u, &pos).cloned().unwrap_or_else(|_| u.clone());
                    self.tick(tag, &path, &at)?;
                    cur = u;
                }
                None => return Ok(cur),
            }
        }
    }

    fn outer_step(&self, t: &Term, path: &mut Vec<u8>) -> Option<(Term, StepTag)> {
        if let Some(r) = contract_root(self.rs, t, self.beta) {
            return Some(r);
        }
        match t {
            Term::App(a, b) | Term::Abs(_, a, b) | Term::Prod(_, a, b) => {
                path.push(1);
                if let Some((a2, tag)) = self.outer_step(a, path) {
                    return Some((rebuild(t, Some(a2), None), tag));
                }
                path.pop();
                path.push(2);
                if let Some((b2, tag)) = self.outer_step(b, path) {
                    return Some((rebuild(t, None, Some(b2)), tag));
                }
                path.pop();
                None
            }
            _ => None,
        }
    }
}

fn rebuild(t: &Term, left: Option<Term>, right: Option<Term>) -> Term {
    let pick = |old: &Arc<Term>, new: Option<Term>| new.map(Arc::new).unwrap_or_else(|| old.clone());
    match t {
        Term::App(a, b) => Term::App(pick(a, left), pick(b, right)),
        Term::Abs(x, a, b) => Term::Abs(x.clone(), pick(a, left), pick(b, right)),
        Term::Prod(x, a, b) => Term::Prod(x.clone(), pick(a, left), pick(b, right)),
        _ => t.clone(),
    }
}

/// Leftmost-innermost beta-R normal form.
pub fn normalize(rs: &RewriteSystem, t: &Term, fuel: u64) -> Result<Term, FuelExhausted> {
    Normalizer::new(rs, fuel).run(t, Strategy::Innermost).map(|n| n.term)
}

/// R-only normal form (no beta).
pub fn normalize_rules_only(rs: &RewriteSystem, t: &Term, fuel: u64) -> Result<Term, FuelExhausted> {
    Normalizer::new(rs, fuel).without_beta().run(t, Strategy::Innermost).map(|n| n.term)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WhnfMode {
    BetaOnly,
    BetaRules,
}

/// Contracts head redexes under leading abstractions. With rules enabled,
/// a symbol-headed spine whose arguments block matching gets its arguments
/// normalized once before the head is retried.
pub fn weak_head_normalize(rs: &RewriteSystem, mode: WhnfMode, t: &Term, fuel: u64) -> Result<Term, FuelExhausted> {
    let mut steps = 0u64;
    whnf_rec(rs, mode, t, fuel, &mut steps)
}

fn whnf_rec(rs: &RewriteSystem, mode: WhnfMode, t: &Term, fuel: u64, steps: &mut u64) -> Result<Term, FuelExhausted> {
    if let Term::Abs(x, a, b) = t {
        let b2 = whnf_rec(rs, mode, b, fuel, steps)?;
        return Ok(Term::Abs(x.clone(), a.clone(), Arc::new(b2)));
    }
    let mut cur = t.clone();
    let mut args_normalized = false;
    loop {
        let (h, args) = cur.spine();
        let h = h.clone();
        let args: Vec<Term> = args.into_iter().cloned().collect();
        if let Term::Abs(x, _, body) = &h {
            if let Some((first, rest)) = args.split_first() {
                charge(steps, fuel)?;
                cur = Term::apps(subst1(body, x, first), rest.iter().cloned());
                args_normalized = false;
                continue;
            }
        }
        if mode == WhnfMode::BetaRules {
            if let Term::Symb(f) = &h {
                if rs.defines(f) {
                    if let Some((u, n)) = head_rule_step(rs, &h, &args) {
                        charge(steps, fuel)?;
                        cur = Term::apps(u, args[n..].iter().cloned());
                        args_normalized = false;
                        continue;
                    }
                    if !args_normalized {
                        let remaining = fuel.saturating_sub(*steps).max(1);
                        let mut normed = Vec::with_capacity(args.len());
                        for a in &args {
                            normed.push(normalize(rs, a, remaining)?);
                        }
                        cur = Term::apps(h.clone(), normed);
                        args_normalized = true;
                        continue;
                    }
                }
            }
        }
        return Ok(cur);
    }
}

fn head_rule_step(rs: &RewriteSystem, h: &Term, args: &[Term]) -> Option<(Term, usize)> {
    for n in 0..=args.len() {
        let prefix = Term::apps(h.clone(), args[..n].iter().cloned());
        if let Some((u, _)) = root_rule_reducts(rs, &prefix).into_iter().next() {
            return Some((u, n));
        }
    }
    None
}

fn charge(steps: &mut u64, fuel: u64) -> Result<(), FuelExhausted> {
    if *steps >= fuel {
        return Err(FuelExhausted { budget: fuel });
    }
    *steps += 1;
    Ok(())
}

/// Joinability through normal forms (beta and rules).
pub fn convertible(rs: &RewriteSystem, t: &Term, u: &Term, fuel: u64) -> Verdict {
    if alpha_eq(t, u) {
        return Verdict::Holds;
    }
    let nt = match normalize(rs, t, fuel) {
        Ok(n) => n,
        Err(e) => return Verdict::Undecided(format!("normalizing {t}: {e}")),
    };
    let nu = match normalize(rs, u, fuel) {
        Ok(n) => n,
        Err(e) => return Verdict::Undecided(format!("normalizing {u}: {e}")),
    };
    if alpha_eq(&nt, &nu) {
        Verdict::Holds
    } else {
        Verdict::Fails(format!("{t} and {u} have distinct normal forms {nt} and {nu}"))
    }
}

/// Joinability using the rules alone, without beta.
pub fn joinable(rs: &RewriteSystem, t: &Term, u: &Term, fuel: u64) -> Verdict {
    let nt = match normalize_rules_only(rs, t, fuel) {
        Ok(n) => n,
        Err(e) => return Verdict::Undecided(format!("normalizing {t}: {e}")),
    };
    let nu = match normalize_rules_only(rs, u, fuel) {
        Ok(n) => n,
        Err(e) => return Verdict::Undecided(format!("normalizing {u}: {e}")),
    };
    if alpha_eq(&nt, &nu) {
        Verdict::Holds
    } else {
        Verdict::Fails(format!("normal forms {nt} and {nu} differ"))
    }
}

// ---------------------------------------------------------------------------
// Unification

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Unification {
    Unified(Subst),
    Clash(String),
    /// A constraint could not be decomposed (non-injective head).
    Stuck(String),
}

/// First-order unification over applicative terms. `rigid(f)` says whether
/// an application headed by `f` may be decomposed argument-wise.
pub fn unify_all(pairs: &[(Term, Term)], rigid: &dyn Fn(&str) -> bool) -> Unification {
    let mut sigma = Subst::new();
    let mut stack: Vec<(Term, Term)> = pairs.iter().rev().cloned().collect();
    while let Some((a, b)) = stack.pop() {
        let a = substitute(&a, &sigma);
        let b = substitute(&b, &sigma);
        if alpha_eq(&a, &b) {
            continue;
        }
        match (&a, &b) {
            (Term::Var(x), t) | (t, Term::Var(x)) => {
                if free_vars(t, None).contains(x) {
                    return Unification::Clash(format!("occurs check: {} in {}", x.name, t));
                }
                let single = Subst::single(x.clone(), t.clone());
                sigma = sigma.then(&single);
                sigma.insert(x.clone(), t.clone());
            }
            _ => {
                let (ha, aa) = a.spine();
                let (hb, ab) = b.spine();
                match (ha, hb) {
                    (Term::Symb(f), Term::Symb(g)) => {
                        if !rigid(f) || !rigid(g) {
                            return Unification::Stuck(format!("cannot decompose {a} = {b}"));
                        }
                        if f != g || aa.len() != ab.len() {
                            return Unification::Clash(format!("{a} and {b} have different heads"));
                        }
                        for (x, y) in aa.into_iter().zip(ab).rev() {
                            stack.push((x.clone(), y.clone()));
                        }
                    }
                    _ => {
                        if is_first_order(&a) && is_first_order(&b) {
                            return Unification::Clash(format!("{a} and {b} do not unify"));
                        }
                        return Unification::Stuck(format!("non-algebraic constraint {a} = {b}"));
                    }
                }
            }
        }
    }
    Unification::Unified(sigma)
}

fn is_first_order(t: &Term) -> bool {
    crate::term::is_algebraic(t)
}

/// Syntactic unification of two algebraic terms.
pub fn unify(a: &Term, b: &Term) -> Option<Subst> {
    match unify_all(&[(a.clone(), b.clone())], &|_| true) {
        Unification::Unified(s) => Some(s),
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Critical pairs

#[derive(Clone, Debug)]
pub struct CriticalPair {
    pub peak: Term,
    /// Reduct by the inner rule at `pos`.
    pub left: Term,
    /// Reduct by the outer rule at the root.
    pub right: Term,
    /// (inner rule id, outer rule id)
    pub rules: (usize, usize),
    pub pos: Position,
}

/// Renames every variable of `rule` away from `avoid`.
fn rename_apart(rule: &Rule, avoid: &BTreeSet<Name>) -> (Term, Term) {
    let mut names = BTreeSet::new();
    all_var_names(&rule.lhs, &mut names);
    all_var_names(&rule.rhs, &mut names);
    let mut taken = avoid.clone();
    taken.extend(names.iter().cloned());
    let mut ren = Subst::new();
    for x in free_vars(&rule.lhs, None) {
        if avoid.contains(&x.name) {
            let n = fresh_name(&x.name, &taken);
            taken.insert(n.clone());
            ren.insert(x.clone(), Term::Var(Var { name: n, sort: x.sort }));
        }
    }
    (substitute(&rule.lhs, &ren), substitute(&rule.rhs, &ren))
}

/// All overlaps of a left-hand side into a non-variable subterm of another
/// (renamed-apart) left-hand side, except the trivial root self-overlap.
pub fn critical_pairs(rs: &RewriteSystem) -> Vec<CriticalPair> {
    critical_pairs_between(rs, &|_| true, &|_| true)
}

/// Critical pairs where the inner rule satisfies `inner` and the outer one
/// satisfies `outer`.
pub fn critical_pairs_between(
    rs: &RewriteSystem,
    inner: &dyn Fn(&Rule) -> bool,
    outer: &dyn Fn(&Rule) -> bool,
) -> Vec<CriticalPair> {
    let mut out = Vec::new();
    for r2 in rs.rules().iter().filter(|r| outer(r)) {
        let mut avoid = BTreeSet::new();
        all_var_names(&r2.lhs, &mut avoid);
        all_var_names(&r2.rhs, &mut avoid);
        for r1 in rs.rules().iter().filter(|r| inner(r)) {
            let (l1, rhs1) = rename_apart(r1, &avoid);
            for p in positions(&r2.lhs) {
                let sub = subterm_at(&r2.lhs, &p).expect("own position");
                if matches!(sub, Term::Var(_)) {
                    continue;
                }
                if p.is_root() && r1.id == r2.id {
                    continue;
                }
                let Some(sigma) = unify(&l1, sub) else { continue };
                let peak = substitute(&r2.lhs, &sigma);
                let left = replace_at(&peak, &p, substitute(&rhs1, &sigma)).expect("position of lhs");
                let right = substitute(&r2.rhs, &sigma);
                out.push(CriticalPair { peak, left, right, rules: (r1.id, r2.id), pos: p });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::load;

    fn x(n: &str) -> Term {
        Term::var(&Var::obj(n))
    }
    fn app(f: &str, args: Vec<Term>) -> Term {
        Term::apps(Term::symb(f), args)
    }

    #[test]
    fn conjunction_keeps_the_worst_verdict() {
        let a = Verdict::Assumed("a".into());
        let u = Verdict::Undecided("u".into());
        let f = Verdict::Fails("f".into());
        assert_eq!(Verdict::Holds.and(a.clone()), a);
        assert_eq!(a.clone().and(u.clone()), u);
        assert_eq!(u.clone().and(f.clone()), f);
        assert_eq!(f.clone().and(Verdict::Holds), f);
        assert_eq!(Verdict::all([]), Verdict::Holds);
        // the first of equally bad verdicts is kept
        assert_eq!(Verdict::all([Verdict::Fails("1".into()), Verdict::Fails("2".into())]).reason(), "1");
    }

    #[test]
    fn matching_is_syntactic() {
        let l = app("f", vec![x("x"), x("x")]);
        let same = app("f", vec![app("s", vec![Term::symb("0")]); 2]);
        assert_eq!(match_algebraic(&l, &same).unwrap().len(), 1);
        let differ = app("f", vec![Term::symb("0"), app("s", vec![Term::symb("0")])]);
        assert!(match_algebraic(&l, &differ).is_none());
        // symbols are never instantiated
        assert!(match_algebraic(&app("g", vec![Term::symb("0")]), &app("g", vec![x("y")])).is_none());
    }

    #[test]
    fn unification_outcomes() {
        let rigid = |_: &str| true;
        let occurs = unify_all(&[(x("x"), app("s", vec![x("x")]))], &rigid);
        assert!(matches!(occurs, Unification::Clash(m) if m.contains("occurs check")));
        let heads = unify_all(&[(app("s", vec![x("x")]), Term::symb("0"))], &rigid);
        assert!(matches!(heads, Unification::Clash(_)));
        let flexible = unify_all(&[(app("plus", vec![x("x")]), Term::symb("0"))], &|f| f != "plus");
        assert!(matches!(flexible, Unification::Stuck(_)));
        let Unification::Unified(s) =
            unify_all(&[(app("f", vec![x("x"), x("y")]), app("f", vec![x("y"), Term::symb("0")]))], &rigid)
        else {
            panic!()
        };
        assert_eq!(s.get(&Var::obj("x")), Some(&Term::symb("0")));
        assert_eq!(s.get(&Var::obj("y")), Some(&Term::symb("0")));
    }

    #[test]
    fn beta_is_tried_before_rules() {
        let sys = load("symb nat : *\nsymb 0 : nat\n").unwrap();
        let rs = sys.rewrite_system();
        let redex = Term::app(Term::abs(Var::obj("y"), Term::symb("nat"), x("y")), Term::symb("0"));
        assert_eq!(contract_root(&rs, &redex, true), Some((Term::symb("0"), StepTag::Beta)));
        assert_eq!(contract_root(&rs, &redex, false), None);
    }

    #[test]
    fn renaming_apart_avoids_taken_names() {
        let sys = load("symb nat : *\nsymb 0 : nat\nsymb f : nat -> nat -> nat\nrule f x x' --> x\n").unwrap();
        let avoid: BTreeSet<Name> = [Name::from("x")].into_iter().collect();
        let (lhs, rhs) = rename_apart(&sys.rules[0], &avoid);
        assert_eq!(lhs.to_string(), "f x'' x'");
        assert_eq!(rhs.to_string(), "x''");
    }

    #[test]
    fn whnf_modes_and_fuel() {
        let sys = load("symb nat : *\nsymb 0 : nat\nsymb s : nat -> nat\nsymb id : nat -> nat\nrule id n --> n\n")
            .unwrap();
        let rs = sys.rewrite_system();
        let t = app("id", vec![app("s", vec![Term::symb("0")])]);
        assert_eq!(weak_head_normalize(&rs, WhnfMode::BetaOnly, &t, 10).unwrap(), t);
        assert_eq!(weak_head_normalize(&rs, WhnfMode::BetaRules, &t, 10).unwrap().to_string(), "s 0");
        let deep = app("id", vec![app("id", vec![Term::symb("0")])]);
        assert_eq!(normalize(&rs, &deep, 1), Err(FuelExhausted { budget: 1 }));
        assert_eq!(normalize(&rs, &deep, 2).unwrap(), Term::symb("0"));
    }
}
