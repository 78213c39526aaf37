//! The `.cac` concrete syntax: lexer, parser with line/column diagnostics,
//! and a printer whose output parses back to the same declarations.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::signature::Status;
use crate::term::{alpha_eq, Sort, Term, Var, ARROW_BINDER};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrecRel {
    Greater,
    Equal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RuleDecl {
    pub lhs: Term,
    pub rhs: Term,
    pub env: Option<Vec<(Var, Term)>>,
    pub rho: Option<Vec<(Var, Term)>>,
    pub assume: Vec<String>,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Decl {
    Symb { name: String, ty: Term, line: usize },
    Rule(RuleDecl),
    Mon { name: String, indices: Vec<usize>, line: usize },
    Acc { name: String, indices: Vec<usize>, line: usize },
    Prec { left: String, rel: PrecRel, right: Vec<String>, line: usize },
    Status { name: String, status: Status, line: usize },
}

impl Decl {
    pub fn line(&self) -> usize {
        match self {
            Decl::Symb { line, .. }
            | Decl::Mon { line, .. }
            | Decl::Acc { line, .. }
            | Decl::Prec { line, .. }
            | Decl::Status { line, .. } => *line,
            Decl::Rule(r) => r.line,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SourceFile {
    pub decls: Vec<Decl>,
}

impl SourceFile {
    pub fn symbol_names(&self) -> BTreeSet<String> {
        self.decls
            .iter()
            .filter_map(|d| match d {
                Decl::Symb { name, .. } => Some(name.clone()),
                _ => None,
            })
            .collect()
    }

    /// Structural equality up to alpha-renaming of bound variables.
    pub fn alpha_equivalent(&self, other: &SourceFile) -> bool {
        if self.decls.len() != other.decls.len() {
            return false;
        }
        let pairs_eq = |a: &Option<Vec<(Var, Term)>>, b: &Option<Vec<(Var, Term)>>| match (a, b) {
            (None, None) => true,
            (Some(a), Some(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|((x, t), (y, u))| x.name == y.name && alpha_eq(t, u))
            }
            _ => false,
        };
        self.decls.iter().zip(&other.decls).all(|(a, b)| match (a, b) {
            (Decl::Symb { name: n1, ty: t1, .. }, Decl::Symb { name: n2, ty: t2, .. }) => n1 == n2 && alpha_eq(t1, t2),
            (Decl::Rule(r1), Decl::Rule(r2)) => {
                alpha_eq(&r1.lhs, &r2.lhs)
                    && alpha_eq(&r1.rhs, &r2.rhs)
                    && pairs_eq(&r1.env, &r2.env)
                    && pairs_eq(&r1.rho, &r2.rho)
                    && r1.assume == r2.assume
            }
            (Decl::Mon { name: a, indices: i, .. }, Decl::Mon { name: b, indices: j, .. })
            | (Decl::Acc { name: a, indices: i, .. }, Decl::Acc { name: b, indices: j, .. }) => a == b && i == j,
            (
                Decl::Prec { left: a, rel: r, right: x, .. },
                Decl::Prec { left: b, rel: s, right: y, .. },
            ) => a == b && r == s && x == y,
            (Decl::Status { name: a, status: s, .. }, Decl::Status { name: b, status: t, .. }) => a == b && s == t,
            _ => false,
        })
    }
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    Colon,
    Assign,
    Comma,
    Arrow,
    LongArrow,
    Star,
    Gt,
    Eq,
    Eof,
}

const KEYWORDS: &[&str] = &["symb", "rule", "env", "rho", "mon", "acc", "prec", "status", "assume"];

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let start = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        let (tok, n) = if rest.starts_with("-->") {
            (Tok::LongArrow, 3)
        } else if rest.starts_with("->") {
            (Tok::Arrow, 2)
        } else if rest.starts_with(":=") {
            (Tok::Assign, 2)
        } else {
            match c {
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                '[' => (Tok::LBrack, 1),
                ']' => (Tok::RBrack, 1),
                '{' => (Tok::LBrace, 1),
                '}' => (Tok::RBrace, 1),
                ':' => (Tok::Colon, 1),
                ',' => (Tok::Comma, 1),
                '*' => (Tok::Star, 1),
                '>' => (Tok::Gt, 1),
                '=' => (Tok::Eq, 1),
                c if is_ident_char(c) => {
                    let mut j = i;
                    while j < chars.len() && is_ident_char(chars[j]) {
                        j += 1;
                    }
                    (Tok::Ident(chars[i..j].iter().collect()), j - i)
                }
                other => {
                    return Err(ParseError { line, col, msg: format!("unexpected character '{other}'") });
                }
            }
        };
        advance(n, &mut i, &mut col);
        out.push(Token { tok, line: start.0, col: start.1 });
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parser

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    symbols: BTreeSet<String>,
    scope: Vec<(String, Sort)>,
}

fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }
    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }
    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError { line, col, msg: msg.into() })
    }
    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }
    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {what}, found {}", describe(self.peek())))
        }
    }
    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }
    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(s)
            }
            other => self.err(format!("expected {what}, found {}", describe(&other))),
        }
    }

    fn file(&mut self) -> Result<SourceFile, ParseError> {
        let mut decls = Vec::new();
        while *self.peek() != Tok::Eof {
            decls.push(self.decl()?);
        }
        Ok(SourceFile { decls })
    }

    fn decl(&mut self) -> Result<Decl, ParseError> {
        let (line, _) = self.here();
        let kw = match self.peek().clone() {
            Tok::Ident(s) if is_keyword(&s) => s,
            other => return self.err(format!("expected a declaration keyword, found {}", describe(&other))),
        };
        self.bump();
        match kw.as_str() {
            "symb" => {
                let name = self.ident("symbol name")?;
                if self.symbols.contains(&name) {
                    return self.err(format!("symbol {name} declared twice"));
                }
                self.expect(Tok::Colon, "':'")?;
                let ty = self.term()?;
                self.symbols.insert(name.clone());
                Ok(Decl::Symb { name, ty, line })
            }
            "rule" => self.rule(line).map(Decl::Rule),
            "mon" | "acc" => {
                let name = self.ident("symbol name")?;
                self.expect(Tok::Eq, "'='")?;
                self.expect(Tok::LBrace, "'{'")?;
                let mut indices = Vec::new();
                while *self.peek() != Tok::RBrace {
                    let s = self.ident("index")?;
                    let i: usize = s.parse().or_else(|_| self.err(format!("expected an index, found {s}")))?;
                    indices.push(i);
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    }
                }
                self.bump();
                if kw == "mon" {
                    Ok(Decl::Mon { name, indices, line })
                } else {
                    Ok(Decl::Acc { name, indices, line })
                }
            }
            "prec" => {
                let left = self.ident("symbol name")?;
                let rel = match self.bump() {
                    Tok::Gt => PrecRel::Greater,
                    Tok::Eq => PrecRel::Equal,
                    other => return self.err(format!("expected '>' or '=', found {}", describe(&other))),
                };
                let mut right = Vec::new();
                while let Tok::Ident(s) = self.peek().clone() {
                    if is_keyword(&s) {
                        break;
                    }
                    self.bump();
                    right.push(s);
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    }
                }
                if right.is_empty() {
                    return self.err("expected at least one symbol after the relation");
                }
                Ok(Decl::Prec { left, rel, right, line })
            }
            "status" => {
                let name = self.ident("symbol name")?;
                self.expect(Tok::Eq, "'='")?;
                if !self.at_keyword("lex") {
                    return self.err("expected 'lex'");
                }
                self.bump();
                let mut slots: Vec<Vec<usize>> = Vec::new();
                loop {
                    match self.peek().clone() {
                        Tok::LParen | Tok::RParen => {
                            self.bump();
                        }
                        Tok::Ident(s) if s == "mul" => {
                            self.bump();
                            slots.push(Vec::new());
                        }
                        Tok::Ident(s) if s.starts_with('x') && s[1..].parse::<usize>().is_ok() => {
                            let Some(slot) = slots.last_mut() else {
                                return self.err("expected 'mul' before status variables");
                            };
                            let i: usize = s[1..].parse().expect("checked");
                            if i == 0 {
                                return self.err("status indices start at x1");
                            }
                            slot.push(i);
                            self.bump();
                        }
                        _ => break,
                    }
                }
                if slots.is_empty() || slots.iter().any(|s| s.is_empty()) {
                    return self.err("a status needs at least one non-empty 'mul' group");
                }
                Ok(Decl::Status { name, status: Status { slots }, line })
            }
            "env" | "rho" | "assume" => self.err(format!("'{kw}' is only allowed after a rule")),
            _ => unreachable!("keyword list"),
        }
    }

    fn rule(&mut self, line: usize) -> Result<RuleDecl, ParseError> {
        let lhs = self.term()?;
        self.expect(Tok::LongArrow, "'-->'")?;
        let rhs = self.term()?;
        let mut env = None;
        let mut rho = None;
        let mut assume = Vec::new();
        loop {
            if self.at_keyword("env") {
                self.bump();
                let mut bindings = Vec::new();
                let saved = self.scope.len();
                loop {
                    let x = self.ident("variable name")?;
                    self.expect(Tok::Colon, "':'")?;
                    let ty = self.term()?;
                    let sort = if ty.is_kind() { Sort::Box } else { Sort::Star };
                    self.scope.push((x.clone(), sort));
                    bindings.push((Var::new(&x, sort), ty));
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
                self.scope.truncate(saved);
                env = Some(bindings);
            } else if self.at_keyword("rho") {
                self.bump();
                let mut pairs = Vec::new();
                loop {
                    let x = self.ident("variable name")?;
                    self.expect(Tok::Assign, "':='")?;
                    let t = self.term()?;
                    pairs.push((Var::new(&x, Sort::Star), t));
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
                rho = Some(pairs);
            } else if self.at_keyword("assume") {
                self.bump();
                let what = self.ident("assumption name")?;
                if what != "s5" {
                    return self.err(format!("only 's5' can be assumed per rule, found {what}"));
                }
                assume.push(what);
            } else {
                break;
            }
        }
        Ok(RuleDecl { lhs, rhs, env, rho, assume, line })
    }

    fn starts_binder(&self) -> bool {
        match self.peek() {
            Tok::LBrack => true,
            Tok::LParen => matches!(self.peek_at(1), Tok::Ident(s) if !is_keyword(s)) && *self.peek_at(2) == Tok::Colon,
            _ => false,
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        if self.starts_binder() {
            return self.binder();
        }
        let left = self.application()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let right = self.term()?;
            return Ok(Term::arrow(left, right));
        }
        Ok(left)
    }

    fn binder(&mut self) -> Result<Term, ParseError> {
        let is_abs = self.bump() == Tok::LBrack;
        let x = self.ident("bound variable")?;
        if self.symbols.contains(&x) {
            return self.err(format!("{x} is a symbol and cannot be bound"));
        }
        self.expect(Tok::Colon, "':'")?;
        let ty = self.term()?;
        self.expect(if is_abs { Tok::RBrack } else { Tok::RParen }, if is_abs { "']'" } else { "')'" })?;
        let sort = if ty.is_kind() { Sort::Box } else { Sort::Star };
        self.scope.push((x.clone(), sort));
        let body = self.term();
        self.scope.pop();
        let v = Var::new(&x, sort);
        Ok(if is_abs { Term::abs(v, ty, body?) } else { Term::prod(v, ty, body?) })
    }

    fn application(&mut self) -> Result<Term, ParseError> {
        let mut t = match self.atom()? {
            Some(a) => a,
            None => return self.err(format!("expected a term, found {}", describe(self.peek()))),
        };
        loop {
            if self.starts_binder() {
                let b = self.binder()?;
                t = Term::app(t, b);
                continue;
            }
            match self.atom()? {
                Some(a) => t = Term::app(t, a),
                None => return Ok(t),
            }
        }
    }

    fn atom(&mut self) -> Result<Option<Term>, ParseError> {
        match self.peek().clone() {
            Tok::Star => {
                self.bump();
                Ok(Some(Term::star()))
            }
            Tok::LParen if !self.starts_binder() => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(Some(t))
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                if s == ARROW_BINDER {
                    return self.err("'_' is reserved");
                }
                self.bump();
                if self.symbols.contains(&s) {
                    return Ok(Some(Term::symb(&s)));
                }
                let sort = self.scope.iter().rev().find(|(n, _)| *n == s).map(|(_, so)| *so).unwrap_or(Sort::Star);
                Ok(Some(Term::Var(Var::new(&s, sort))))
            }
            _ => Ok(None),
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("'{s}'"),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::LBrack => "'['".into(),
        Tok::RBrack => "']'".into(),
        Tok::LBrace => "'{'".into(),
        Tok::RBrace => "'}'".into(),
        Tok::Colon => "':'".into(),
        Tok::Assign => "':='".into(),
        Tok::Comma => "','".into(),
        Tok::Arrow => "'->'".into(),
        Tok::LongArrow => "'-->'".into(),
        Tok::Star => "'*'".into(),
        Tok::Gt => "'>'".into(),
        Tok::Eq => "'='".into(),
        Tok::Eof => "end of input".into(),
    }
}

pub fn parse(text: &str) -> Result<SourceFile, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, symbols: BTreeSet::new(), scope: Vec::new() };
    p.file()
}

/// Parses a standalone term in the scope of the given symbols; other names
/// are variables.
pub fn parse_term(text: &str, symbols: &BTreeSet<String>) -> Result<Term, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, symbols: symbols.clone(), scope: Vec::new() };
    let t = p.term()?;
    if *p.peek() != Tok::Eof {
        return p.err(format!("unexpected {} after term", describe(p.peek())));
    }
    Ok(t)
}

// ---------------------------------------------------------------------------
// Printer

pub fn print_status(s: &Status) -> String {
    let groups: Vec<String> = s
        .slots
        .iter()
        .map(|g| {
            let vars: Vec<String> = g.iter().map(|i| format!("x{i}")).collect();
            format!("(mul {})", vars.join(" "))
        })
        .collect();
    format!("lex {}", groups.join(" "))
}

pub fn print_source(src: &SourceFile) -> String {
    let mut out = String::new();
    for d in &src.decls {
        match d {
            Decl::Symb { name, ty, .. } => {
                let _ = writeln!(out, "symb {name} : {ty}");
            }
            Decl::Rule(r) => {
                let _ = write!(out, "rule {} --> {}", r.lhs, r.rhs);
                if let Some(env) = &r.env {
                    let parts: Vec<String> = env.iter().map(|(x, t)| format!("{} : {}", x.name, t)).collect();
                    let _ = write!(out, "\n  env {}", parts.join(", "));
                }
                if let Some(rho) = &r.rho {
                    let parts: Vec<String> = rho.iter().map(|(x, t)| format!("{} := {}", x.name, t)).collect();
                    let _ = write!(out, "\n  rho {}", parts.join(", "));
                }
                for a in &r.assume {
                    let _ = write!(out, "\n  assume {a}");
                }
                out.push('\n');
            }
            Decl::Mon { name, indices, .. } | Decl::Acc { name, indices, .. } => {
                let kw = if matches!(d, Decl::Mon { .. }) { "mon" } else { "acc" };
                let idx: Vec<String> = indices.iter().map(|i| i.to_string()).collect();
                let _ = writeln!(out, "{kw} {name} = {{{}}}", idx.join(", "));
            }
            Decl::Prec { left, rel, right, .. } => {
                let r = if *rel == PrecRel::Greater { ">" } else { "=" };
                let _ = writeln!(out, "prec {left} {r} {}", right.join(" "));
            }
            Decl::Status { name, status, .. } => {
                let _ = writeln!(out, "status {name} = {}", print_status(status));
            }
        }
    }
    out
}
