//! System-level conditions: rewrite-system classes, the A0-A4 strong
//! normalization report, the confluence pipeline and logical consistency.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::json;

use crate::reduction::{critical_pairs, critical_pairs_between, joinable, RewriteSystem, Verdict};
use crate::rules::{s4_check, s5_check, syntactic_check, Rule, RuleContext};
use crate::schema::{general_schema_check, status_compare};
use crate::signature::{PredicateClass, Signature, Status, System};
use crate::term::{
    alpha_eq, free_vars, is_algebraic, occurs_free, signed_positions, symbol_positions, Name, Polarity, Sort,
    Term,
};
use crate::typing::{rhs_shape_check, Level};

pub const DEFAULT_FUEL: u64 = 100_000;

#[derive(Clone, Debug)]
pub struct Options {
    pub fuel: u64,
    pub assume_s5: bool,
    pub assume_confluence: bool,
    pub assume_fo_termination: bool,
    pub partition: Option<(BTreeSet<String>, BTreeSet<String>)>,
    pub strict: bool,
}

impl Default for Options {
    fn default() -> Options {
        Options {
            fuel: DEFAULT_FUEL,
            assume_s5: false,
            assume_confluence: false,
            assume_fo_termination: false,
            partition: None,
            strict: false,
        }
    }
}

// ---------------------------------------------------------------------------
// Rewrite-system classes

fn report(problems: Vec<String>) -> Verdict {
    if problems.is_empty() {
        Verdict::Holds
    } else {
        Verdict::Fails(problems.join("; "))
    }
}

/// Algebraic right-hand side, and the head is a predicate symbol or
/// produces a primitive constant predicate.
pub fn first_order_rule(sig: &Signature, rule: &Rule) -> Result<(), String> {
    if !is_algebraic(&rule.rhs) {
        return Err(format!("{}: right-hand side {} is not algebraic", rule.label(), rule.rhs));
    }
    let f = &rule.head;
    if sig.is_predicate_symbol(f) {
        return Ok(());
    }
    match sig.output_inductive(f) {
        Some((c, _)) if sig.classify_predicate(&c) == PredicateClass::Primitive => Ok(()),
        Some((c, _)) => Err(format!("{f} produces {c}, which is {}", sig.classify_predicate(&c))),
        None => Err(format!("{f} does not produce a constant predicate")),
    }
}

/// Right-hand side `[x:T] g u` with `g` in `G` or a primitive constant predicate.
pub fn primitive_rule(sig: &Signature, g: &BTreeSet<Name>, rule: &Rule) -> Result<(), String> {
    let mut body = &rule.rhs;
    while let Term::Abs(_, _, b) = body {
        body = b;
    }
    match body.spine().0 {
        Term::Symb(h) if g.contains(h) => Ok(()),
        Term::Symb(h) if sig.is_constant_predicate(h) && sig.classify_predicate(h) == PredicateClass::Primitive => {
            Ok(())
        }
        _ => Err(format!("{}: right-hand side {} is not headed by a primitive symbol", rule.label(), rule.rhs)),
    }
}

/// Every predicate variable of the right-hand side is a left-hand-side
/// argument, directly or through `rho`. Returns the witnesses `x -> kappa`.
pub fn small_rule(rule: &Rule) -> Result<BTreeMap<String, usize>, String> {
    let mut witnesses = BTreeMap::new();
    for x in free_vars(&rule.rhs, Some(Sort::Box)) {
        let direct = rule.args.iter().position(|a| matches!(a, Term::Var(y) if *y == x));
        let via_rho = || {
            rule.args.iter().position(|a| match a {
                Term::Var(y) => rule.rho.get(y).is_some_and(|t| occurs_free(&x, t)),
                _ => false,
            })
        };
        match direct.or_else(via_rho) {
            Some(k) => {
                witnesses.insert(x.name.to_string(), k + 1);
            }
            None => return Err(format!("{}: {} is not a left-hand-side argument", rule.label(), x.name)),
        }
    }
    Ok(witnesses)
}

/// Symbols of `G` occur only positively in the right-hand side.
pub fn positive_rule(sig: &Signature, g: &BTreeSet<Name>, rule: &Rule) -> Result<(), String> {
    let mon = |f: &str| sig.mon(f);
    let pos = signed_positions(&rule.rhs, Polarity::Pos, &mon);
    for h in g {
        if !symbol_positions(&rule.rhs, h).is_subset(&pos) {
            return Err(format!("{}: {h} occurs non-positively in {}", rule.label(), rule.rhs));
        }
    }
    Ok(())
}

/// The predicate parameters of the head are matched injectively by
/// variables, each declared in `Gamma` or bound by `rho` under a valid S5.
pub fn safe_rule(sig: &Signature, rule: &Rule, s5: &Verdict) -> Verdict {
    let Some(decl) = sig.symbol(&rule.head) else {
        return Verdict::Fails(format!("unknown symbol {}", rule.head));
    };
    let (binders, out) = decl.ty.product_prefix();
    let mut seen: BTreeMap<Name, String> = BTreeMap::new();
    let mut problems = Vec::new();
    let mut relied_on_s5 = false;
    for (i, (x, _)) in binders.iter().enumerate() {
        let used = occurs_free(x, &out) || binders[i + 1..].iter().any(|(_, t)| occurs_free(x, t));
        if x.sort != Sort::Box || !used {
            continue;
        }
        let Some(Term::Var(y)) = rule.args.get(i) else {
            let shown = rule.args.get(i).map(|t| t.to_string()).unwrap_or_else(|| "nothing".into());
            problems.push(format!("{}: parameter {} is matched by {shown}, not a variable", rule.label(), x.name));
            continue;
        };
        if let Some(prev) = seen.insert(y.name.clone(), x.name.to_string()) {
            problems.push(format!(
                "{}: parameters {prev} and {} are both matched by {}",
                rule.label(),
                x.name,
                y.name
            ));
        }
        if rule.rho.contains(y) {
            relied_on_s5 = true;
        } else if !rule.env.bindings().iter().any(|(z, _)| z.name == y.name && z.sort == Sort::Box) {
            problems.push(format!("{}: {} is not a predicate variable of Gamma", rule.label(), y.name));
        }
    }
    if !problems.is_empty() {
        return Verdict::Fails(problems.join("; "));
    }
    if relied_on_s5 {
        return match s5 {
            Verdict::Holds => Verdict::Holds,
            Verdict::Fails(r) | Verdict::Undecided(r) => {
                Verdict::Undecided(format!("{}: parameter bound by rho and S5 is not established: {r}", rule.label()))
            }
            Verdict::Assumed(r) => Verdict::Assumed(format!("{}: relies on assumed S5: {r}", rule.label())),
        };
    }
    Verdict::Holds
}

/// No critical pair between the rules of `G` and the whole system.
pub fn simple_check(rs: &RewriteSystem, g: &BTreeSet<Name>) -> Verdict {
    let in_g = |r: &Rule| g.contains(&r.head);
    let mut cps = critical_pairs_between(rs, &in_g, &|_| true);
    cps.extend(critical_pairs_between(rs, &|_| true, &in_g));
    if cps.is_empty() {
        Verdict::Holds
    } else {
        let shown: Vec<String> = cps.iter().map(|c| format!("r{}/r{} at {}", c.rules.0, c.rules.1, c.pos)).collect();
        Verdict::Fails(format!("critical pairs {}", shown.join(", ")))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SystemFlags {
    pub first_order: Verdict,
    pub primitive: Verdict,
    pub simple: Verdict,
    pub small: Verdict,
    pub positive: Verdict,
    pub safe: Verdict,
    pub non_duplicating: Verdict,
    /// `x -> kappa_x` for every rule, keyed by rule label.
    pub small_witnesses: BTreeMap<String, BTreeMap<String, usize>>,
}

pub fn classify_system(sys: &System, g: &BTreeSet<Name>, s5: &BTreeMap<usize, Verdict>) -> SystemFlags {
    let sig = &sys.sig;
    let rules: Vec<&Rule> = sys.rules.iter().filter(|r| g.contains(&r.head)).collect();
    let collect = |f: &dyn Fn(&Rule) -> Result<(), String>| report(rules.iter().filter_map(|r| f(r).err()).collect());
    let mut small_problems = Vec::new();
    let mut small_witnesses = BTreeMap::new();
    for r in &rules {
        match small_rule(r) {
            Ok(w) => {
                small_witnesses.insert(r.label(), w);
            }
            Err(e) => small_problems.push(e),
        }
    }
    let dup: Vec<String> =
        rules.iter().filter(|r| r.flags().duplicating).map(|r| format!("{} is duplicating", r.label())).collect();
    SystemFlags {
        first_order: collect(&|r| first_order_rule(sig, r)),
        primitive: collect(&|r| primitive_rule(sig, g, r)),
        simple: simple_check(&sys.rewrite_system(), g),
        small: report(small_problems),
        positive: collect(&|r| positive_rule(sig, g, r)),
        safe: Verdict::all(rules.iter().map(|r| safe_rule(sig, r, s5.get(&r.id).unwrap_or(&Verdict::Holds)))),
        non_duplicating: report(dup),
        small_witnesses,
    }
}

// ---------------------------------------------------------------------------
// Recursive path ordering on first-order algebraic terms

/// The status of `f` extended with one final multiset slot holding the
/// arguments the status leaves out, so every argument is compared.
fn full_status(sig: &Signature, f: &str, n: usize) -> Status {
    let mut st = sig.status(f);
    let covered: BTreeSet<usize> = st.slots.iter().flatten().copied().collect();
    let rest: Vec<usize> = (1..=n).filter(|i| !covered.contains(i)).collect();
    if !rest.is_empty() {
        st.slots.push(rest);
    }
    st
}

/// `s >rpo t` with the signature's precedence and statuses.
pub fn rpo_gt(sig: &Signature, s: &Term, t: &Term) -> bool {
    let (Term::Symb(f), ss) = s.spine() else { return false };
    if let Term::Var(x) = t {
        return occurs_free(x, s);
    }
    if ss.iter().any(|si| alpha_eq(si, t) || rpo_gt(sig, si, t)) {
        return true;
    }
    let (Term::Symb(g), ts) = t.spine() else { return false };
    let dominates_args = || ts.iter().all(|tj| rpo_gt(sig, s, tj));
    if sig.prec.gt(f, g) {
        return dominates_args();
    }
    if sig.prec.equiv(f, g) && ss.len() == ts.len() {
        let st = full_status(sig, f, ss.len());
        let gt = |a: &&Term, b: &&Term| rpo_gt(sig, a, b);
        let eq = |a: &&Term, b: &&Term| alpha_eq(a, b);
        return status_compare(&st, &ss, &ts, &gt, &eq).unwrap_or(false) && dominates_args();
    }
    false
}

pub fn rpo_orients(sig: &Signature, rule: &Rule) -> Result<(), String> {
    if !is_algebraic(&rule.lhs) || !is_algebraic(&rule.rhs) {
        return Err(format!("{} is not first-order algebraic", rule.label()));
    }
    if rpo_gt(sig, &rule.lhs, &rule.rhs) {
        Ok(())
    } else {
        Err(format!("{}: {} >rpo {} does not hold", rule.label(), rule.lhs, rule.rhs))
    }
}

// ---------------------------------------------------------------------------
// F1 / Fomega partition

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PartitionSource {
    Declared,
    Inferred,
}

#[derive(Clone, Debug, Serialize)]
pub struct Partition {
    pub f1: BTreeSet<String>,
    pub fw: BTreeSet<String>,
    pub source: PartitionSource,
    /// Why each higher-order symbol is higher-order (inferred partitions only).
    pub reasons: BTreeMap<String, String>,
}

fn defined_symbols(sys: &System) -> BTreeSet<String> {
    sys.sig.symbols().iter().filter(|d| d.defined).map(|d| d.name.to_string()).collect()
}

fn rule_mentions(rule: &Rule, f: &str) -> bool {
    rule.lhs.mentions_symbol(f) || rule.rhs.mentions_symbol(f)
}

/// Least higher-order set: symbols whose rules are not first-order (or not
/// RPO-oriented), closed under use by other rules; once it is non-empty the
/// duplicating symbols join it too.
pub fn infer_partition(sys: &System, opts: &Options) -> Partition {
    let sig = &sys.sig;
    let defined = defined_symbols(sys);
    let mut reasons: BTreeMap<String, String> = BTreeMap::new();
    for f in &defined {
        for r in sys.rules.iter().filter(|r| &*r.head == f.as_str()) {
            let verdict = first_order_rule(sig, r).and_then(|_| {
                if opts.assume_fo_termination {
                    Ok(())
                } else {
                    rpo_orients(sig, r)
                }
            });
            if let Err(e) = verdict {
                reasons.entry(f.clone()).or_insert(format!("not first-order: {e}"));
            }
        }
    }
    let close = |reasons: &mut BTreeMap<String, String>| loop {
        let mut changed = false;
        for f in &defined {
            if reasons.contains_key(f) {
                continue;
            }
            let user = sys.rules.iter().filter(|r| &*r.head == f.as_str()).find_map(|r| {
                reasons.keys().find(|g| rule_mentions(r, g)).map(|g| (r.label(), g.clone()))
            });
            if let Some((label, g)) = user {
                reasons.insert(f.clone(), format!("{label} uses the higher-order symbol {g}"));
                changed = true;
            }
        }
        if !changed {
            break;
        }
    };
    close(&mut reasons);
    if !reasons.is_empty() {
        for f in &defined {
            if reasons.contains_key(f) {
                continue;
            }
            if let Some(r) = sys.rules.iter().find(|r| &*r.head == f.as_str() && r.flags().duplicating) {
                reasons.insert(f.clone(), format!("{} is duplicating and the higher-order part is non-empty", r.label()));
            }
        }
        close(&mut reasons);
    }
    let fw: BTreeSet<String> = reasons.keys().cloned().collect();
    let f1 = defined.difference(&fw).cloned().collect();
    Partition { f1, fw, source: PartitionSource::Inferred, reasons }
}

// ---------------------------------------------------------------------------
// Report

#[derive(Clone, Debug, Serialize)]
pub struct Finding {
    pub key: String,
    pub verdict: Verdict,
    pub note: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ConditionReport {
    pub findings: Vec<Finding>,
    pub partition: Option<Partition>,
    pub overall: Verdict,
}

impl ConditionReport {
    pub fn get(&self, key: &str) -> Option<&Verdict> {
        self.findings.iter().find(|f| f.key == key).map(|f| &f.verdict)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.findings.iter().map(|f| f.key.as_str())
    }

    pub fn count(&self, label: &str) -> usize {
        self.findings.iter().filter(|f| f.verdict.label() == label).count()
    }

    /// 0 all Holds, 1 some Fails (or Assumed under `strict`), 2 otherwise.
    pub fn exit_code(&self, strict: bool) -> i32 {
        match &self.overall {
            Verdict::Holds => 0,
            Verdict::Fails(_) => 1,
            Verdict::Assumed(_) if strict => 1,
            _ => 2,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let verdicts: Vec<serde_json::Value> = self
            .findings
            .iter()
            .map(|f| {
                let mut v = json!({ "key": f.key, "status": f.verdict.label() });
                if !f.verdict.holds() {
                    v["reason"] = json!(f.verdict.reason());
                }
                if let Some(n) = &f.note {
                    v["note"] = json!(n);
                }
                v
            })
            .collect();
        json!({
            "overall": { "status": self.overall.label(), "reason": self.overall.reason() },
            "partition": self.partition,
            "verdicts": verdicts,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("report values serialize")
    }

    pub fn to_text(&self) -> String {
        let width = self.findings.iter().map(|f| f.key.len()).max().unwrap_or(0);
        let mut out = String::new();
        for f in &self.findings {
            let _ = write!(out, "{:width$}  {}", f.key, f.verdict.label());
            if !f.verdict.holds() {
                let _ = write!(out, "  {}", f.verdict.reason());
            }
            if let Some(n) = &f.note {
                let _ = write!(out, "  [{n}]");
            }
            out.push('\n');
        }
        if let Some(p) = &self.partition {
            let list = |s: &BTreeSet<String>| s.iter().cloned().collect::<Vec<_>>().join(" ");
            let _ = writeln!(out, "partition ({:?}): F1 = {{{}}}  Fw = {{{}}}", p.source, list(&p.f1), list(&p.fw));
        }
        let _ = write!(out, "overall: {}", self.overall.label());
        if !self.overall.holds() {
            let _ = write!(out, "  {}", self.overall.reason());
        }
        out.push('\n');
        out
    }
}

/// Rules whose head is strictly below `f` in the precedence.
pub fn rules_below(sys: &System, f: &str) -> RewriteSystem {
    RewriteSystem::new(sys.rules.iter().filter(|r| sys.sig.prec.gt(f, &r.head)).cloned().collect())
}

struct Checker<'a> {
    sys: &'a System,
    opts: &'a Options,
    below: BTreeMap<Name, RewriteSystem>,
    s5: BTreeMap<usize, Verdict>,
    schema: BTreeMap<usize, Verdict>,
    findings: Vec<Finding>,
}

impl<'a> Checker<'a> {
    fn new(sys: &'a System, opts: &'a Options) -> Checker<'a> {
        let mut below = BTreeMap::new();
        for r in &sys.rules {
            below.entry(r.head.clone()).or_insert_with(|| rules_below(sys, &r.head));
        }
        let s5 = sys
            .rules
            .iter()
            .map(|r| {
                let v = match s5_check(&sys.sig, r) {
                    Verdict::Holds => Verdict::Holds,
                    other if opts.assume_s5 => Verdict::Assumed(format!("assumed by option: {}", other.reason())),
                    other => other,
                };
                (r.id, v)
            })
            .collect();
        let schema = sys
            .rules
            .iter()
            .map(|r| (r.id, general_schema_check(&sys.sig, &below[&r.head], opts.fuel, r)))
            .collect();
        Checker { sys, opts, below, s5, schema, findings: Vec::new() }
    }

    fn push(&mut self, key: impl Into<String>, verdict: Verdict, note: Option<String>) -> Verdict {
        self.findings.push(Finding { key: key.into(), verdict: verdict.clone(), note });
        verdict
    }

    fn a0(&mut self) -> Vec<(String, Verdict)> {
        let sig = &self.sys.sig;
        let mut shapes = Vec::new();
        for r in &self.sys.rules {
            let l = r.label();
            let (syn, _) = syntactic_check(sig, r);
            self.push(format!("A0.syntax.{l}"), syn, None);
            let ctx = RuleContext { sig, rs: &self.below[&r.head], fuel: self.opts.fuel };
            self.push(format!("A0.S3.{l}"), ctx.s3_check(r), None);
            self.push(format!("A0.S4.{l}"), s4_check(sig, r), None);
            let s5 = self.s5[&r.id].clone();
            self.push(format!("A0.S5.{l}"), s5, None);
            let level = if r.is_type_level(sig) { Level::Type } else { Level::Object };
            shapes.push((l, rhs_shape_check(&r.rhs, level)));
        }
        shapes
    }

    fn a2(&mut self) -> Verdict {
        let found = self.sys.sig.admissible_check();
        let mut all = Verdict::Holds;
        for f in found {
            all = all.and(f.verdict.clone());
            let note = if f.iota.is_empty() {
                None
            } else {
                Some(f.iota.iter().map(|(y, k)| format!("{y}->{k}")).collect::<Vec<_>>().join(" "))
            };
            self.push(f.key(), f.verdict, note);
        }
        self.push("A2", all, None)
    }

    fn a3(&mut self) -> Verdict {
        let sig = &self.sys.sig;
        let preds: Vec<Name> = sig.symbols().iter().filter(|d| d.defined && d.is_predicate()).map(|d| d.name.clone()).collect();
        let mut classes: Vec<BTreeSet<Name>> = Vec::new();
        for p in preds {
            match classes.iter_mut().find(|c| c.iter().next().is_some_and(|q| sig.prec.equiv(q, &p))) {
                Some(c) => {
                    c.insert(p);
                }
                None => classes.push(BTreeSet::from([p])),
            }
        }
        let mut all = Verdict::Holds;
        for class in classes {
            let name = class.iter().map(|n| n.to_string()).collect::<Vec<_>>().join("=");
            let flags = classify_system(self.sys, &class, &self.s5);
            let computable = Verdict::all(
                self.sys.rules.iter().filter(|r| class.contains(&r.head)).map(|r| self.schema[&r.id].clone()),
            );
            let p = flags.primitive.clone();
            let q = flags.positive.clone().and(flags.small.clone()).and(flags.simple.clone());
            let r = computable.and(flags.small.clone()).and(flags.simple.clone());
            let options = [("p", p), ("q", q), ("r", r)];
            let best = options.iter().min_by_key(|(_, v)| rank(v)).expect("three disjuncts");
            let verdict = match &best.1 {
                Verdict::Fails(_) => Verdict::Fails(
                    options.iter().map(|(n, v)| format!("({n}) {}", v.reason())).collect::<Vec<_>>().join("; "),
                ),
                v => v.clone(),
            };
            let note = (!verdict.fails()).then(|| format!("({})", best.0));
            all = all.and(verdict.clone());
            self.push(format!("A3.{name}"), verdict, note);
        }
        self.push("A3", all, None)
    }

    fn partition(&self) -> Result<Partition, String> {
        match &self.opts.partition {
            None => Ok(infer_partition(self.sys, self.opts)),
            Some((f1, fw)) => {
                let defined = defined_symbols(self.sys);
                if let Some(x) = f1.intersection(fw).next() {
                    return Err(format!("{x} is declared both first-order and higher-order"));
                }
                let union: BTreeSet<String> = f1.union(fw).cloned().collect();
                if let Some(x) = defined.difference(&union).next() {
                    return Err(format!("defined symbol {x} is in neither part"));
                }
                if let Some(x) = union.difference(&defined).next() {
                    return Err(format!("{x} is not a defined symbol"));
                }
                Ok(Partition {
                    f1: f1.clone(),
                    fw: fw.clone(),
                    source: PartitionSource::Declared,
                    reasons: BTreeMap::new(),
                })
            }
        }
    }

    fn a4(&mut self) -> (Verdict, Option<Partition>) {
        let part = match self.partition() {
            Ok(p) => p,
            Err(e) => {
                let v = self.push("A4", Verdict::Fails(format!("invalid partition: {e}")), None);
                return (v, None);
            }
        };
        let sig = &self.sys.sig;
        let in_fw = |r: &&Rule| part.fw.contains(&*r.head);
        let rw: Vec<&Rule> = self.sys.rules.iter().filter(in_fw).collect();
        let r1: Vec<&Rule> = self.sys.rules.iter().filter(|r| !in_fw(r)).collect();

        let a = Verdict::all(rw.iter().map(|r| match &self.schema[&r.id] {
            Verdict::Holds => Verdict::Holds,
            v => relabel(v, &format!("{} ({})", r.label(), r.head)),
        }));
        let b = Verdict::all(rw.iter().map(|r| safe_rule(sig, r, &self.s5[&r.id])));
        let c = report(
            r1.iter()
                .flat_map(|r| part.fw.iter().filter(|g| rule_mentions(r, g)).map(move |g| format!("{} uses {g}", r.label())))
                .collect(),
        );
        let d = report(r1.iter().filter_map(|r| first_order_rule(sig, r).err()).collect());
        let e = if rw.is_empty() {
            Verdict::Holds
        } else {
            report(r1.iter().filter(|r| r.flags().duplicating).map(|r| format!("{} is duplicating", r.label())).collect())
        };
        let f = match report(r1.iter().filter_map(|r| rpo_orients(sig, r).err()).collect()) {
            Verdict::Fails(why) if self.opts.assume_fo_termination => Verdict::Assumed(format!("fo-termination assumed: {why}")),
            v => v,
        };
        let mut all = Verdict::Holds;
        for (k, v) in [("a", a), ("b", b), ("c", c), ("d", d), ("e", e), ("f", f)] {
            all = all.and(v.clone());
            self.push(format!("A4.{k}"), v, None);
        }
        let all = match all {
            Verdict::Fails(why) if part.source == PartitionSource::Inferred => {
                let culprits: BTreeSet<String> = rw
                    .iter()
                    .filter(|r| !self.schema[&r.id].holds() || !safe_rule(sig, r, &self.s5[&r.id]).holds())
                    .map(|r| r.head.to_string())
                    .collect();
                let names = culprits.into_iter().collect::<Vec<_>>().join(", ");
                Verdict::Fails(format!("no valid F1/Fw partition: higher-order symbols {{{names}}} break it: {why}"))
            }
            v => v,
        };
        let v = self.push("A4", all, None);
        (v, Some(part))
    }

    fn a1(&mut self, upstream: &Verdict) -> Verdict {
        let rs = self.sys.rewrite_system();
        let mut undecided = Vec::new();
        for r in &self.sys.rules {
            if !r.flags().left_linear {
                undecided.push(format!("{} is not left-linear", r.label()));
            }
        }
        match upstream {
            Verdict::Holds | Verdict::Assumed(_) => {}
            _ => undecided.push("strong normalization conditions A2-A4 are not established".into()),
        }
        let pairs = critical_pairs(&rs);
        let mut joined = 0;
        for cp in &pairs {
            match joinable(&rs, &cp.left, &cp.right, self.opts.fuel) {
                Verdict::Holds => joined += 1,
                v => undecided.push(format!(
                    "critical pair of r{}/r{} at {} ({} <- {} -> {}): {}",
                    cp.rules.0,
                    cp.rules.1,
                    cp.pos,
                    cp.left,
                    cp.peak,
                    cp.right,
                    v.reason()
                )),
            }
        }
        let v = if !undecided.is_empty() {
            if self.opts.assume_confluence {
                Verdict::Assumed(format!("confluence assumed: {}", undecided.join("; ")))
            } else {
                Verdict::Undecided(undecided.join("; "))
            }
        } else if let Verdict::Assumed(r) = upstream {
            Verdict::Assumed(format!("relies on assumed termination conditions: {r}"))
        } else {
            Verdict::Holds
        };
        let local = if joined == pairs.len() { "locally confluent" } else { "local confluence not shown" };
        let note = format!("{local}: {joined} of {} critical pairs join", pairs.len());
        self.push("A1", v, Some(note))
    }
}

fn rank(v: &Verdict) -> u8 {
    match v {
        Verdict::Holds => 0,
        Verdict::Assumed(_) => 1,
        Verdict::Undecided(_) => 2,
        Verdict::Fails(_) => 3,
    }
}

fn relabel(v: &Verdict, prefix: &str) -> Verdict {
    match v {
        Verdict::Holds => Verdict::Holds,
        Verdict::Fails(r) => Verdict::Fails(format!("{prefix}: {r}")),
        Verdict::Assumed(r) => Verdict::Assumed(format!("{prefix}: {r}")),
        Verdict::Undecided(r) => Verdict::Undecided(format!("{prefix}: {r}")),
    }
}

/// Runs every check and assembles the report in a fixed key order.
pub fn full_report(sys: &System, opts: &Options) -> ConditionReport {
    let mut ck = Checker::new(sys, opts);
    let shapes = ck.a0();
    let mut a0 = std::mem::take(&mut ck.findings);
    let a2 = ck.a2();
    let a3 = ck.a3();
    let (a4, partition) = ck.a4();
    let tail = std::mem::take(&mut ck.findings);
    let a1 = ck.a1(&Verdict::all([a2, a3, a4]));
    let a1_findings = std::mem::take(&mut ck.findings);

    let shape_ok = shapes.iter().all(|(_, v)| v.holds());
    for (label, v) in shapes {
        let finding = match v {
            Verdict::Fails(why) if a1.holds() => Finding {
                key: format!("A0.shape.{label}"),
                verdict: Verdict::Holds,
                note: Some(format!("informational: {why}; beta subject reduction follows from A1")),
            },
            v => Finding { key: format!("A0.shape.{label}"), verdict: v, note: None },
        };
        a0.push(finding);
    }
    a0.sort_by_key(|f| a0_order(&f.key));
    let beta = if shape_ok || a1.holds() {
        Verdict::Holds
    } else {
        match &a1 {
            Verdict::Assumed(r) => Verdict::Assumed(format!("follows from assumed confluence: {r}")),
            _ => Verdict::Undecided("type-level right-hand sides are not symbol applications and A1 is not established".into()),
        }
    };
    a0.push(Finding { key: "A0.beta-sr".into(), verdict: beta, note: None });

    let mut findings = a0;
    findings.extend(a1_findings);
    findings.extend(tail);
    findings.extend(consistency_check(sys));
    let overall = Verdict::all(findings.iter().map(|f| f.verdict.clone()));
    ConditionReport { findings, partition, overall }
}

/// Rule-major ordering of the per-rule A0 keys.
fn a0_order(key: &str) -> (usize, usize) {
    let mut parts = key.split('.');
    let _ = parts.next();
    let kind = parts.next().unwrap_or("");
    let rule: usize = parts.next().and_then(|r| r.strip_prefix('r')).and_then(|n| n.parse().ok()).unwrap_or(0);
    let k = ["syntax", "S3", "S4", "S5", "shape"].iter().position(|s| *s == kind).unwrap_or(9);
    (rule, k)
}

// ---------------------------------------------------------------------------
// Logical consistency

#[derive(Clone, Debug, PartialEq)]
enum Pat {
    Wild,
    Con(Name, Vec<Pat>),
    /// Headed by a symbol that is not a constructor; the row covers nothing certain.
    Opaque,
}

fn to_pat(sig: &Signature, t: &Term) -> Pat {
    match t {
        Term::Var(_) => Pat::Wild,
        _ => {
            let (h, args) = t.spine();
            match h {
                Term::Symb(c) if !sig.is_defined(c) && !sig.is_predicate_symbol(c) && sig.output_inductive(c).is_some() => {
                    let arity = sig.symbol(c).map(|d| d.arity()).unwrap_or(0);
                    if args.len() != arity {
                        return Pat::Opaque;
                    }
                    Pat::Con(c.clone(), args.into_iter().map(|a| to_pat(sig, a)).collect())
                }
                _ => Pat::Opaque,
            }
        }
    }
}

/// The constant predicate whose constructors enumerate a column, when it
/// is primitive or basic.
fn column_type(sig: &Signature, ty: &Term) -> Option<Name> {
    match ty.spine().0 {
        Term::Symb(c) if sig.is_constant_predicate(c) && sig.classify_predicate(c) <= PredicateClass::Basic => {
            Some(c.clone())
        }
        _ => None,
    }
}

/// A value vector not matched by any row, if there is one (Maranget's
/// usefulness of the all-wildcard row). `Err` when a matched column has a
/// type whose closed normal forms are not known to be constructor-headed.
fn missing_case(sig: &Signature, rows: &[Vec<Pat>], types: &[Option<Name>]) -> Result<Option<Vec<String>>, String> {
    if types.is_empty() {
        return Ok(if rows.is_empty() { Some(Vec::new()) } else { None });
    }
    let heads: BTreeSet<Name> = rows
        .iter()
        .filter_map(|r| match &r[0] {
            Pat::Con(c, _) => Some(c.clone()),
            _ => None,
        })
        .collect();
    if heads.is_empty() {
        let rest: Vec<Vec<Pat>> = rows.iter().filter(|r| r[0] == Pat::Wild).map(|r| r[1..].to_vec()).collect();
        return Ok(missing_case(sig, &rest, &types[1..])?.map(|mut w| {
            w.insert(0, "_".into());
            w
        }));
    }
    let Some(c) = &types[0] else {
        return Err("constructor patterns on an argument that is not of a primitive or basic type".into());
    };
    for k in sig.constructors_of(c) {
        let doms = sig.domains(&k);
        let arity = doms.len();
        let mut sub_rows = Vec::new();
        for r in rows {
            let head: Vec<Pat> = match &r[0] {
                Pat::Con(h, ps) if *h == k => ps.clone(),
                Pat::Wild => vec![Pat::Wild; arity],
                _ => continue,
            };
            sub_rows.push(head.into_iter().chain(r[1..].iter().cloned()).collect());
        }
        let sub_types: Vec<Option<Name>> =
            doms.iter().map(|d| column_type(sig, d)).chain(types[1..].iter().cloned()).collect();
        if let Some(w) = missing_case(sig, &sub_rows, &sub_types)? {
            let (args, rest) = w.split_at(arity);
            let shown = if arity == 0 { k.to_string() } else { format!("({k} {})", args.join(" ")) };
            let mut out = vec![shown];
            out.extend(rest.iter().cloned());
            return Ok(Some(out));
        }
    }
    Ok(None)
}

/// Which clause of the consistency theorem an object symbol satisfies,
/// with the clause as a note when it does.
pub fn consistency_of(sys: &System, f: &str) -> (Verdict, Option<String>) {
    let sig = &sys.sig;
    let Some(decl) = sig.symbol(f) else { return (Verdict::Fails(format!("unknown symbol {f}")), None) };
    let (binders, out) = decl.ty.product_prefix();
    if let Some((c, _)) = sig.output_inductive(f) {
        return (Verdict::Holds, Some(format!("(1) output {c}")));
    }
    if let Some(i) = binders.iter().position(|(_, t)| alpha_eq(t, &out)) {
        return (Verdict::Holds, Some(format!("(2) output is the type of argument {}", i + 1)));
    }
    let Some((xn, _)) = binders.last() else {
        let why = format!("{f} takes no argument and its type {} is not an inductive type", decl.ty);
        return (Verdict::Fails(why), None);
    };
    if free_vars(&out, Some(Sort::Box)).contains(xn) {
        return (Verdict::Fails(format!("(3) the last argument {} occurs in the output type {out}", xn.name)), None);
    }
    let n = binders.len();
    let rows: Vec<Vec<Pat>> = sys
        .rules
        .iter()
        // A non-linear pattern only matches equal arguments, so it covers no case outright.
        .filter(|r| &*r.head == f && r.args.len() <= n && r.flags().left_linear)
        .map(|r| {
            let mut row: Vec<Pat> = r.args.iter().map(|a| to_pat(sig, a)).collect();
            row.resize(n, Pat::Wild);
            row
        })
        .filter(|row| !row.contains(&Pat::Opaque))
        .collect();
    let types: Vec<Option<Name>> = binders.iter().map(|(_, t)| column_type(sig, t)).collect();
    match missing_case(sig, &rows, &types) {
        Ok(None) => {
            let matched: BTreeSet<Name> = types.iter().flatten().cloned().collect();
            let over: Vec<String> = matched.iter().flat_map(|c| sig.constructors_of(c)).map(|k| k.to_string()).collect();
            (Verdict::Holds, Some(format!("(3) completely defined over {{{}}}", over.join(", "))))
        }
        Ok(Some(w)) => (Verdict::Fails(format!("(3) no rule applies to {f} {}", w.join(" "))), None),
        Err(e) => (Verdict::Undecided(format!("(3) {e}")), None),
    }
}

/// One finding per object symbol, keyed `consistency.f`.
pub fn consistency_check(sys: &System) -> Vec<Finding> {
    sys.sig
        .symbols()
        .iter()
        .filter(|d| d.sort == Sort::Star)
        .map(|d| {
            let (verdict, note) = consistency_of(sys, &d.name);
            Finding { key: format!("consistency.{}", d.name), verdict, note }
        })
        .collect()
}
