//! Concrete syntax.
//!
//! ```text
//! p(1).                                   % fact
//! q(X) :- p(X), not r(X), X != 2.         % rule with a comparison literal
//! s :- SUM{ X : p(X) } >= 3.              % set aggregate
//! t(Y) :- w(Y), COUNT{{ X : e(X, Z, Y) }} > 1.   % multiset aggregate, Z local
//! :- p(1), q(1).                          % constraint
//! COUNT{ X : gotA(X) } >= 2.              % aggregate head
//! #const_domain 0..10.                    % extra constants
//! #constants a, b.
//! ```
//!
//! Variables start with an upper-case letter or `_`; the aggregate function
//! names are recognised case-insensitively when followed by `{`. Comments run
//! from `%` to the end of the line.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::One;

use crate::ast::*;
use crate::error::Error;
use crate::unfold::weights::{WeightConstraint, WeightElement, WeightHead, WeightProgram, WeightRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

/// A positioned message; lines and columns are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub line: usize,
    pub column: usize,
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{}:{}: {}: {}", self.line, self.column, sev, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Var(String),
    Int(BigInt),
    Directive(String),
    LParen,
    RParen,
    Comma,
    Dot,
    DotDot,
    If,
    Colon,
    Bar,
    LBrace,
    RBrace,
    LLBrace,
    RRBrace,
    Rel(Relation),
    Plus,
    Minus,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Var(s) => write!(f, "`{s}`"),
            Tok::Int(v) => write!(f, "`{v}`"),
            Tok::Directive(s) => write!(f, "`#{s}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::DotDot => f.write_str("`..`"),
            Tok::If => f.write_str("`:-`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Bar => f.write_str("`|`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::LLBrace => f.write_str("`{{`"),
            Tok::RRBrace => f.write_str("`}}`"),
            Tok::Rel(r) => write!(f, "`{r}`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

fn diag(pos: Pos, message: impl Into<String>) -> ParseDiagnostic {
    ParseDiagnostic {
        line: pos.line,
        column: pos.column,
        severity: Severity::Error,
        message: message.into(),
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, ParseDiagnostic> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        let peek = chars.get(i + 1).copied();
        let take = |n: usize, tok: Tok, out: &mut Vec<(Tok, Pos)>| {
            out.push((tok, pos));
            n
        };
        let used = match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => 1,
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '(' => take(1, Tok::LParen, &mut out),
            ')' => take(1, Tok::RParen, &mut out),
            ',' => take(1, Tok::Comma, &mut out),
            '|' => take(1, Tok::Bar, &mut out),
            '+' => take(1, Tok::Plus, &mut out),
            '-' => take(1, Tok::Minus, &mut out),
            '.' if peek == Some('.') => take(2, Tok::DotDot, &mut out),
            '.' => take(1, Tok::Dot, &mut out),
            ':' if peek == Some('-') => take(2, Tok::If, &mut out),
            ':' => take(1, Tok::Colon, &mut out),
            '{' if peek == Some('{') => take(2, Tok::LLBrace, &mut out),
            '{' => take(1, Tok::LBrace, &mut out),
            '}' if peek == Some('}') => take(2, Tok::RRBrace, &mut out),
            '}' => take(1, Tok::RBrace, &mut out),
            '=' if peek == Some('=') => take(2, Tok::Rel(Relation::Eq), &mut out),
            '=' => take(1, Tok::Rel(Relation::Eq), &mut out),
            '!' if peek == Some('=') => take(2, Tok::Rel(Relation::Ne), &mut out),
            '<' if peek == Some('=') => take(2, Tok::Rel(Relation::Le), &mut out),
            '<' if peek == Some('>') => take(2, Tok::Rel(Relation::Ne), &mut out),
            '<' => take(1, Tok::Rel(Relation::Lt), &mut out),
            '>' if peek == Some('=') => take(2, Tok::Rel(Relation::Ge), &mut out),
            '>' => take(1, Tok::Rel(Relation::Gt), &mut out),
            c if c.is_ascii_digit() => {
                let start = i;
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let text: String = chars[start..j].iter().collect();
                let v: BigInt = text.parse().expect("digits");
                take(j - start, Tok::Int(v), &mut out)
            }
            c if c.is_alphabetic() || c == '_' || c == '#' => {
                let start = if c == '#' { i + 1 } else { i };
                let mut j = start;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let text: String = chars[start..j].iter().collect();
                let tok = if c == '#' {
                    if text.is_empty() {
                        return Err(diag(pos, "expected a directive name after `#`"));
                    }
                    Tok::Directive(text)
                } else if c.is_uppercase() || c == '_' {
                    Tok::Var(text)
                } else {
                    Tok::Ident(text)
                };
                take(j - i, tok, &mut out)
            }
            other => return Err(diag(pos, format!("unexpected character `{other}`"))),
        };
        i += used;
        col += used;
    }
    out.push((Tok::Eof, Pos { line, column: col }));
    Ok(out)
}

enum RawHead {
    Atom(Atom),
    Aggregate(AggregateAtom),
    Weight(WeightConstraint),
    Falsum,
}

struct RawRule {
    head: RawHead,
    pos: Vec<Atom>,
    neg: Vec<Atom>,
    aggs: Vec<AggregateAtom>,
    builtins: Vec<Builtin>,
    weights: Vec<WeightConstraint>,
    start: Pos,
}

enum BodyItem {
    Pos(Atom),
    Neg(Atom),
    Agg(AggregateAtom),
    Builtin(Builtin),
    Weight(WeightConstraint),
}

enum Statement {
    Rule(RawRule),
    Constants(Vec<Constant>),
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    weights: bool,
}

type PResult<T> = Result<T, ParseDiagnostic>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.at + n).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> PResult<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(diag(self.pos(), format!("expected {want}, found {}", self.peek())))
        }
    }

    /// Skip past the next `.` after an error.
    fn recover(&mut self) {
        loop {
            match self.bump() {
                Tok::Dot | Tok::Eof => return,
                _ => {}
            }
        }
    }

    fn at_aggregate(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) | Tok::Var(s) => {
                AggFunction::from_name(s).is_some() && matches!(self.peek_at(1), Tok::LBrace | Tok::LLBrace)
            }
            _ => false,
        }
    }

    fn statement(&mut self) -> PResult<Statement> {
        let start = self.pos();
        if let Tok::Directive(name) = self.peek().clone() {
            self.bump();
            return self.directive(&name, start).map(Statement::Constants);
        }
        let head = if *self.peek() == Tok::If {
            RawHead::Falsum
        } else {
            match self.body_item()? {
                BodyItem::Pos(a) => RawHead::Atom(a),
                BodyItem::Agg(g) => RawHead::Aggregate(g),
                BodyItem::Weight(w) => RawHead::Weight(w),
                BodyItem::Neg(_) => return Err(diag(start, "negated atom in rule head")),
                BodyItem::Builtin(_) => return Err(diag(start, "comparison in rule head")),
            }
        };
        let mut rule = RawRule {
            head,
            pos: Vec::new(),
            neg: Vec::new(),
            aggs: Vec::new(),
            builtins: Vec::new(),
            weights: Vec::new(),
            start,
        };
        match self.peek() {
            Tok::Dot => {
                if matches!(rule.head, RawHead::Falsum) {
                    unreachable!("falsum head is only chosen before `:-`");
                }
                self.bump();
                return Ok(Statement::Rule(rule));
            }
            Tok::If => {
                self.bump();
            }
            other => return Err(diag(self.pos(), format!("expected `:-` or `.`, found {other}"))),
        }
        if *self.peek() == Tok::Dot {
            self.bump();
            return Ok(Statement::Rule(rule));
        }
        loop {
            match self.body_item()? {
                BodyItem::Pos(a) => rule.pos.push(a),
                BodyItem::Neg(a) => rule.neg.push(a),
                BodyItem::Agg(g) => rule.aggs.push(g),
                BodyItem::Builtin(b) => rule.builtins.push(b),
                BodyItem::Weight(w) => rule.weights.push(w),
            }
            match self.bump() {
                Tok::Comma => continue,
                Tok::Dot => break,
                other => {
                    self.at -= 1;
                    return Err(diag(self.pos(), format!("expected `,` or `.`, found {other}")));
                }
            }
        }
        Ok(Statement::Rule(rule))
    }

    fn directive(&mut self, name: &str, start: Pos) -> PResult<Vec<Constant>> {
        let mut out = Vec::new();
        match name {
            "const_domain" | "constants" => {}
            other => return Err(diag(start, format!("unknown directive `#{other}`"))),
        }
        loop {
            let p = self.pos();
            let c = self.constant()?;
            if *self.peek() == Tok::DotDot {
                self.bump();
                let q = self.pos();
                let hi = self.constant()?;
                let (Constant::Int(lo), Constant::Int(hi)) = (c, hi) else {
                    return Err(diag(p, "a range needs integer bounds"));
                };
                if lo > hi {
                    return Err(diag(q, "empty range"));
                }
                let mut v = lo;
                while v <= hi {
                    out.push(Constant::Int(v.clone()));
                    v += BigInt::one();
                }
            } else if name == "const_domain" {
                return Err(diag(p, "expected a range `a..b`"));
            } else {
                out.push(c);
            }
            match self.bump() {
                Tok::Comma => continue,
                Tok::Dot => break,
                other => {
                    self.at -= 1;
                    return Err(diag(self.pos(), format!("expected `,` or `.`, found {other}")));
                }
            }
        }
        Ok(out)
    }

    fn constant(&mut self) -> PResult<Constant> {
        let p = self.pos();
        match self.term()? {
            Term::Const(c) => Ok(c),
            Term::Var(v) => Err(diag(p, format!("expected a constant, found variable `{}`", v.name))),
        }
    }

    fn term(&mut self) -> PResult<Term> {
        let p = self.pos();
        match self.bump() {
            Tok::Int(v) => Ok(Term::int(v)),
            Tok::Minus => match self.bump() {
                Tok::Int(v) => Ok(Term::int(-v)),
                other => Err(diag(p, format!("expected an integer after `-`, found {other}"))),
            },
            Tok::Ident(s) => Ok(Term::sym(&s)),
            Tok::Var(s) => Ok(Term::Var(Variable::global(&s))),
            other => {
                self.at -= 1;
                Err(diag(p, format!("expected a term, found {other}")))
            }
        }
    }

    fn atom(&mut self) -> PResult<Atom> {
        let p = self.pos();
        let name = match self.bump() {
            Tok::Ident(s) => s,
            other => {
                self.at -= 1;
                return Err(diag(p, format!("expected an atom, found {other}")));
            }
        };
        let mut args = Vec::new();
        if *self.peek() == Tok::LParen {
            self.bump();
            loop {
                args.push(self.term()?);
                match self.bump() {
                    Tok::Comma => continue,
                    Tok::RParen => break,
                    other => {
                        self.at -= 1;
                        return Err(diag(self.pos(), format!("expected `,` or `)`, found {other}")));
                    }
                }
            }
        }
        Ok(Atom::new(&name, args))
    }

    fn expr(&mut self) -> PResult<Expr> {
        let a = self.term()?;
        let e = match self.peek() {
            Tok::Plus => {
                self.bump();
                Expr::Add(a, self.term()?)
            }
            Tok::Minus => {
                self.bump();
                Expr::Sub(a, self.term()?)
            }
            _ => Expr::Term(a),
        };
        if matches!(self.peek(), Tok::Plus | Tok::Minus) {
            return Err(diag(self.pos(), "at most one arithmetic operator per side is supported"));
        }
        Ok(e)
    }

    /// `FUNC{ X : atom }` or `FUNC{{ X : atom }}`, without relation and guard.
    fn aggregate_set(&mut self) -> PResult<(AggFunction, IntensionalSpec)> {
        let func = match self.bump() {
            Tok::Ident(s) | Tok::Var(s) => AggFunction::from_name(&s).expect("checked by at_aggregate"),
            _ => unreachable!("checked by at_aggregate"),
        };
        let (collection, close) = match self.bump() {
            Tok::LBrace => (Collection::Set, Tok::RBrace),
            _ => (Collection::Multiset, Tok::RRBrace),
        };
        let p = self.pos();
        let collected = match self.bump() {
            Tok::Var(s) => Variable::local(&s),
            other => {
                return Err(diag(p, format!("expected the collected variable, found {other}")));
            }
        };
        match self.bump() {
            Tok::Colon | Tok::Bar => {}
            other => {
                self.at -= 1;
                return Err(diag(self.pos(), format!("expected `:`, found {other}")));
            }
        }
        let pattern = self.atom()?;
        self.expect(close)?;
        Ok((
            func,
            IntensionalSpec {
                collected,
                locals: Vec::new(),
                pattern,
                collection,
            },
        ))
    }

    fn relation(&mut self) -> PResult<Relation> {
        match self.bump() {
            Tok::Rel(r) => Ok(r),
            other => {
                self.at -= 1;
                Err(diag(self.pos(), format!("expected a comparison operator, found {other}")))
            }
        }
    }

    /// `{ lit = w, ... }` after the opening brace has been seen.
    fn weight_elements(&mut self) -> PResult<Vec<WeightElement>> {
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        if *self.peek() == Tok::RBrace {
            self.bump();
            return Ok(out);
        }
        loop {
            let negated = matches!(self.peek(), Tok::Ident(s) if s == "not")
                && matches!(self.peek_at(1), Tok::Ident(_));
            if negated {
                self.bump();
            }
            let atom = self.atom()?;
            let weight = if *self.peek() == Tok::Rel(Relation::Eq) {
                self.bump();
                self.term()?
            } else {
                Term::int(1)
            };
            out.push(WeightElement { atom, negated, weight });
            match self.bump() {
                Tok::Comma => continue,
                Tok::RBrace => break,
                other => {
                    self.at -= 1;
                    return Err(diag(self.pos(), format!("expected `,` or `}}`, found {other}")));
                }
            }
        }
        Ok(out)
    }

    fn weight_upper(&mut self) -> PResult<Option<Term>> {
        match self.peek() {
            Tok::Rel(Relation::Le) => {
                self.bump();
                Ok(Some(self.term()?))
            }
            Tok::Int(_) | Tok::Minus | Tok::Var(_) => Ok(Some(self.term()?)),
            Tok::Ident(s) if s != "not" => Ok(Some(self.term()?)),
            _ => Ok(None),
        }
    }

    fn body_item(&mut self) -> PResult<BodyItem> {
        let p = self.pos();
        if matches!(self.peek(), Tok::Ident(s) if s == "not") && matches!(self.peek_at(1), Tok::Ident(_)) {
            self.bump();
            return Ok(BodyItem::Neg(self.atom()?));
        }
        if self.at_aggregate() {
            let (function, spec) = self.aggregate_set()?;
            let relation = self.relation()?;
            let guard = self.term()?;
            return Ok(BodyItem::Agg(AggregateAtom {
                function,
                spec,
                relation,
                guard,
            }));
        }
        if self.weights && *self.peek() == Tok::LBrace {
            let elements = self.weight_elements()?;
            let upper = self.weight_upper()?;
            return Ok(BodyItem::Weight(WeightConstraint {
                lower: None,
                elements,
                upper,
            }));
        }
        if let Tok::Ident(_) = self.peek() {
            let next = self.peek_at(1);
            let is_term = matches!(next, Tok::Rel(_) | Tok::Plus | Tok::Minus)
                || (self.weights && *next == Tok::LBrace);
            if !is_term {
                return Ok(BodyItem::Pos(self.atom()?));
            }
        }
        let lhs = self.expr()?;
        if self.weights && *self.peek() == Tok::LBrace {
            let Expr::Term(lower) = lhs else {
                return Err(diag(p, "a weight constraint bound must be a single term"));
            };
            let elements = self.weight_elements()?;
            let upper = self.weight_upper()?;
            return Ok(BodyItem::Weight(WeightConstraint {
                lower: Some(lower),
                elements,
                upper,
            }));
        }
        let relation = self.relation()?;
        if self.at_aggregate() {
            let Expr::Term(guard) = lhs else {
                return Err(diag(p, "an aggregate guard must be a single term"));
            };
            let (function, spec) = self.aggregate_set()?;
            return Ok(BodyItem::Agg(AggregateAtom {
                function,
                spec,
                relation: relation.flip(),
                guard,
            }));
        }
        if self.weights && *self.peek() == Tok::LBrace {
            let Expr::Term(lower) = lhs else {
                return Err(diag(p, "a weight constraint bound must be a single term"));
            };
            if relation != Relation::Le {
                return Err(diag(p, "a weight constraint lower bound must use `<=`"));
            }
            let elements = self.weight_elements()?;
            let upper = self.weight_upper()?;
            return Ok(BodyItem::Weight(WeightConstraint {
                lower: Some(lower),
                elements,
                upper,
            }));
        }
        let rhs = self.expr()?;
        Ok(BodyItem::Builtin(Builtin { lhs, relation, rhs }))
    }
}

fn statements(src: &str, weights: bool) -> (Vec<Statement>, Vec<ParseDiagnostic>) {
    let toks = match lex(src) {
        Ok(t) => t,
        Err(d) => return (Vec::new(), alloc::vec![d]),
    };
    let mut p = Parser { toks, at: 0, weights };
    let mut out = Vec::new();
    let mut diags = Vec::new();
    while *p.peek() != Tok::Eof {
        match p.statement() {
            Ok(s) => out.push(s),
            Err(d) => {
                diags.push(d);
                p.recover();
            }
        }
    }
    (out, diags)
}

/// Assigns variable kinds, renames clashing local variables apart and checks
/// safety. The input has every variable marked global.
pub(crate) fn resolve_rule(mut rule: Rule) -> Result<Rule, String> {
    let head_agg = matches!(rule.head, Head::Aggregate(_));
    let mut outside: BTreeSet<Arc<str>> = BTreeSet::new();
    if let Head::Atom(a) = &rule.head {
        outside.extend(a.variables().map(|v| v.name.clone()));
    }
    for a in rule.pos.iter().chain(&rule.neg) {
        outside.extend(a.variables().map(|v| v.name.clone()));
    }
    for b in &rule.builtins {
        outside.extend(b.variables().map(|v| v.name.clone()));
    }

    let mut aggs: Vec<AggregateAtom> = Vec::new();
    if let Head::Aggregate(g) = &rule.head {
        aggs.push(g.clone());
    }
    aggs.append(&mut rule.aggs);
    for g in &aggs {
        outside.extend(g.guard.as_var().map(|v| v.name.clone()));
    }

    let pattern_vars: Vec<BTreeSet<Arc<str>>> = aggs
        .iter()
        .map(|g| g.spec.pattern.variables().map(|v| v.name.clone()).collect())
        .collect();

    for (k, g) in aggs.iter().enumerate() {
        let c = &g.spec.collected.name;
        if !pattern_vars[k].contains(c) {
            return Err(format!("collected variable {c} does not occur in `{}`", g.spec.pattern));
        }
        if outside.contains(c) {
            return Err(format!("collected variable {c} also occurs outside its aggregate"));
        }
        for (j, h) in aggs.iter().enumerate() {
            if j != k && pattern_vars[j].contains(c) && &h.spec.collected.name != c {
                return Err(format!(
                    "collected variable {c} also occurs as a grouping variable of another aggregate"
                ));
            }
        }
    }

    let mut used: BTreeSet<Arc<str>> = outside.clone();
    for vs in &pattern_vars {
        used.extend(vs.iter().cloned());
    }
    let mut taken_locals: BTreeSet<Arc<str>> = BTreeSet::new();
    for k in 0..aggs.len() {
        let multiset = aggs[k].spec.collection == Collection::Multiset;
        let collected = aggs[k].spec.collected.name.clone();
        let mut local_names: BTreeSet<Arc<str>> = BTreeSet::new();
        local_names.insert(collected.clone());
        for v in &pattern_vars[k] {
            if *v == collected || !multiset || outside.contains(v) {
                continue;
            }
            let elsewhere = pattern_vars
                .iter()
                .enumerate()
                .any(|(j, vs)| j != k && vs.contains(v));
            if !elsewhere {
                local_names.insert(v.clone());
            }
        }
        let mut renames: BTreeMap<Arc<str>, Arc<str>> = BTreeMap::new();
        for v in &local_names {
            if taken_locals.contains(v) {
                let mut n = 1;
                let fresh = loop {
                    let cand: Arc<str> = Arc::from(format!("{v}_{n}").as_str());
                    if !used.contains(&cand) {
                        break cand;
                    }
                    n += 1;
                };
                used.insert(fresh.clone());
                renames.insert(v.clone(), fresh);
            }
        }
        for v in &local_names {
            taken_locals.insert(renames.get(v).cloned().unwrap_or_else(|| v.clone()));
        }
        let g = &mut aggs[k];
        if let Some(r) = renames.get(&collected) {
            g.spec.collected.name = r.clone();
        }
        g.spec.collected.kind = VarKind::Local;
        let mut locals: Vec<Variable> = Vec::new();
        for t in &mut g.spec.pattern.args {
            if let Term::Var(v) = t {
                if local_names.contains(&v.name) {
                    if let Some(r) = renames.get(&v.name) {
                        v.name = r.clone();
                    }
                    v.kind = VarKind::Local;
                    if v.name != g.spec.collected.name && !locals.contains(v) {
                        locals.push(v.clone());
                    }
                } else {
                    v.kind = VarKind::Global;
                }
            }
        }
        g.spec.locals = locals;
    }

    // Safety.
    let mut safe: BTreeSet<Arc<str>> = BTreeSet::new();
    for a in &rule.pos {
        safe.extend(a.variables().map(|v| v.name.clone()));
    }
    for g in &aggs {
        safe.extend(g.global_variables().map(|v| v.name.clone()));
    }
    loop {
        let mut changed = false;
        for b in &rule.builtins {
            if b.relation != Relation::Eq {
                continue;
            }
            for (side, other) in [(&b.lhs, &b.rhs), (&b.rhs, &b.lhs)] {
                if let Expr::Term(Term::Var(v)) = side {
                    if !safe.contains(&v.name) && other.variables().all(|w| safe.contains(&w.name)) {
                        safe.insert(v.name.clone());
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut unsafe_vars: BTreeSet<Arc<str>> = BTreeSet::new();
    if let Head::Atom(a) = &rule.head {
        unsafe_vars.extend(a.variables().map(|v| v.name.clone()));
    }
    for a in &rule.neg {
        unsafe_vars.extend(a.variables().map(|v| v.name.clone()));
    }
    for b in &rule.builtins {
        unsafe_vars.extend(b.variables().map(|v| v.name.clone()));
    }
    if let Some(v) = unsafe_vars.iter().find(|v| !safe.contains(*v)) {
        return Err(format!("unsafe variable {v}"));
    }

    if head_agg {
        rule.head = Head::Aggregate(aggs.remove(0));
    }
    rule.aggs = aggs;
    Ok(rule)
}

fn finish_rule(raw: RawRule, diags: &mut Vec<ParseDiagnostic>) -> Option<Rule> {
    let head = match raw.head {
        RawHead::Atom(a) => Head::Atom(a),
        RawHead::Aggregate(g) => Head::Aggregate(g),
        RawHead::Falsum => Head::Falsum,
        RawHead::Weight(_) => unreachable!("weight heads only parse in weight mode"),
    };
    let rule = Rule {
        head,
        aggs: raw.aggs,
        pos: raw.pos,
        neg: raw.neg,
        builtins: raw.builtins,
    };
    match resolve_rule(rule) {
        Ok(r) => Some(r),
        Err(m) => {
            diags.push(diag(raw.start, m));
            None
        }
    }
}

/// Parses a program, returning the program (if there were no errors) and all
/// diagnostics.
pub fn parse_program_with_diagnostics(src: &str) -> (Option<Program>, Vec<ParseDiagnostic>) {
    let (stmts, mut diags) = statements(src, false);
    let mut program = Program::default();
    for s in stmts {
        match s {
            Statement::Constants(cs) => program.constants.extend(cs),
            Statement::Rule(raw) => {
                if let Some(r) = finish_rule(raw, &mut diags) {
                    program.rules.push(r);
                }
            }
        }
    }
    if program.rules.is_empty() && program.constants.is_empty() && diags.is_empty() {
        diags.push(diag(Pos { line: 1, column: 1 }, "empty program"));
    }
    diags.sort_by_key(|d| (d.line, d.column));
    let ok = diags.iter().all(|d| d.severity != Severity::Error);
    (ok.then_some(program), diags)
}

pub fn parse_program(src: &str) -> Result<Program, Error> {
    match parse_program_with_diagnostics(src) {
        (Some(p), _) => Ok(p),
        (None, diags) => Err(Error::Parse(diags)),
    }
}

/// Parses a single rule (with its terminating `.`).
pub fn parse_rule(src: &str) -> Result<Rule, Error> {
    let p = parse_program(src)?;
    match <[Rule; 1]>::try_from(p.rules) {
        Ok([r]) if p.constants.is_empty() => Ok(r),
        _ => Err(Error::Parse(alloc::vec![diag(Pos { line: 1, column: 1 }, "expected exactly one rule")])),
    }
}

/// Parses one ground atom such as `p(1,a)`.
pub fn parse_atom(src: &str) -> Result<Atom, Error> {
    let toks = lex(src).map_err(|d| Error::Parse(alloc::vec![d]))?;
    let mut p = Parser {
        toks,
        at: 0,
        weights: false,
    };
    let a = p.atom().map_err(|d| Error::Parse(alloc::vec![d]))?;
    if *p.peek() != Tok::Eof {
        return Err(Error::Parse(alloc::vec![diag(p.pos(), "trailing input after atom")]));
    }
    if !a.is_ground() {
        return Err(Error::NonGround(a.to_string()));
    }
    Ok(a)
}

/// Parses an interpretation written as comma/whitespace separated ground atoms,
/// optionally in braces: `{p(1), q}` or `p(1) q`.
pub fn parse_interpretation(src: &str) -> Result<Interpretation, Error> {
    let toks = lex(src).map_err(|d| Error::Parse(alloc::vec![d]))?;
    let mut p = Parser {
        toks,
        at: 0,
        weights: false,
    };
    let braced = *p.peek() == Tok::LBrace;
    if braced {
        p.bump();
    }
    let mut out = Interpretation::new();
    let err = |d| Error::Parse(alloc::vec![d]);
    loop {
        match p.peek() {
            Tok::Eof => break,
            Tok::RBrace if braced => {
                p.bump();
                if *p.peek() != Tok::Eof {
                    return Err(err(diag(p.pos(), "trailing input after `}`")));
                }
                break;
            }
            Tok::Comma | Tok::Dot => {
                p.bump();
            }
            _ => {
                let a = p.atom().map_err(err)?;
                if !a.is_ground() {
                    return Err(Error::NonGround(a.to_string()));
                }
                out.insert(a);
            }
        }
    }
    Ok(out)
}

/// Parses a program that may contain weight constraints
/// `L <= { lit = w, ... } <= U` in rule bodies.
pub fn parse_weight_program(src: &str) -> Result<WeightProgram, Error> {
    let (stmts, mut diags) = statements(src, true);
    let mut out = WeightProgram::default();
    for s in stmts {
        match s {
            Statement::Constants(cs) => out.constants.extend(cs),
            Statement::Rule(raw) => out.rules.push(WeightRule {
                head: match raw.head {
                    RawHead::Atom(a) => WeightHead::Atom(a),
                    RawHead::Falsum => WeightHead::Falsum,
                    RawHead::Weight(w) => WeightHead::Constraint(w),
                    RawHead::Aggregate(_) => {
                        diags.push(diag(raw.start, "aggregate heads are not part of the weight-constraint fragment"));
                        continue;
                    }
                },
                pos: raw.pos,
                neg: raw.neg,
                aggs: raw.aggs,
                builtins: raw.builtins,
                constraints: raw.weights,
            }),
        }
    }
    if diags.is_empty() {
        Ok(out)
    } else {
        Err(Error::Parse(diags))
    }
}

fn format_constants(out: &mut String, constants: &BTreeSet<Constant>) {
    let ints: Vec<&BigInt> = constants.iter().filter_map(Constant::as_int).collect();
    let mut singles: Vec<String> = Vec::new();
    let mut i = 0;
    while i < ints.len() {
        let mut j = i;
        while j + 1 < ints.len() && *ints[j + 1] == ints[j] + 1 {
            j += 1;
        }
        if j - i >= 2 {
            let _ = writeln!(out, "#const_domain {}..{}.", ints[i], ints[j]);
        } else {
            singles.extend(ints[i..=j].iter().map(|v| v.to_string()));
        }
        i = j + 1;
    }
    singles.extend(
        constants
            .iter()
            .filter(|c| matches!(c, Constant::Sym(_)))
            .map(|c| c.to_string()),
    );
    if !singles.is_empty() {
        let _ = writeln!(out, "#constants {}.", singles.join(", "));
    }
}

/// Canonical text of a program; parsing it yields an equal program.
pub fn format_program(program: &Program) -> String {
    let mut out = String::new();
    format_constants(&mut out, &program.constants);
    for r in &program.rules {
        let _ = writeln!(out, "{r}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rule(src: &str) -> Rule {
        parse_rule(src).unwrap_or_else(|e| panic!("{src}: {e}"))
    }

    #[test]
    fn parses_facts_rules_and_constraints() {
        let p = parse_program("p(1). q(X) :- p(X), not r(X). :- q(1), X = 1, p(X).").unwrap();
        assert_eq!(p.rules.len(), 3);
        assert_eq!(p.rules[2].head, Head::Falsum);
        assert_eq!(p.rules[1].neg.len(), 1);
    }

    #[test]
    fn empty_body_is_a_fact() {
        assert_eq!(rule("p(1) :- ."), rule("p(1)."));
    }

    #[test]
    fn flipped_aggregate_is_canonicalised() {
        assert_eq!(rule("s :- 2 <= COUNT{X : p(X)}."), rule("s :- count{X : p(X)} >= 2."));
    }

    #[test]
    fn set_grouping_variables_are_global() {
        let r = rule("q(Y) :- r(Y), SUM{X : p(X, Y)} > 1.");
        let g = &r.aggs[0];
        assert!(g.spec.locals.is_empty());
        assert_eq!(g.global_variables().count(), 1);
    }

    #[test]
    fn multiset_private_variables_are_local() {
        let r = rule("q :- SUM{{X : p(X, Y)}} > 1.");
        assert_eq!(r.aggs[0].spec.locals, alloc::vec![Variable::local("Y")]);
        assert!(r.aggs[0].is_ground());
        let r = rule("q(Y) :- r(Y), SUM{{X : p(X, Y)}} > 1.");
        assert!(r.aggs[0].spec.locals.is_empty());
    }

    #[test]
    fn clashing_collected_variables_are_renamed() {
        let r = rule("q :- SUM{X : p(X)} > 1, COUNT{X : r(X)} > 0.");
        assert_eq!(&*r.aggs[0].spec.collected.name, "X");
        assert_ne!(r.aggs[1].spec.collected.name, r.aggs[0].spec.collected.name);
        assert_eq!(rule(&format!("{r}")), r);
    }

    #[test]
    fn collected_variable_must_stay_inside() {
        assert!(parse_rule("q(X) :- p(X), SUM{X : p(X)} > 1.").is_err());
        assert!(parse_rule("q :- SUM{X : p(X)} > 1, COUNT{Y : r(Y, X)} > 0.").is_err());
    }

    #[test]
    fn unsafe_variables_are_rejected() {
        assert!(parse_rule("q(X) :- not p(X).").is_err());
        assert!(parse_rule("q(X) :- p(Y), X = Y + 1.").is_ok());
        assert!(parse_rule("q(C) :- p(Y), MIN{D : r(D)} = C.").is_ok());
    }

    #[test]
    fn diagnostics_have_positions() {
        let (p, d) = parse_program_with_diagnostics("p(1).\nq :- r(.\ns :- t.");
        assert!(p.is_none());
        assert_eq!(d.len(), 1);
        assert_eq!((d[0].line, d[0].column), (2, 8));
    }

    #[test]
    fn empty_program_is_rejected() {
        assert!(parse_program("% nothing\n").is_err());
        assert!(parse_program("#constants a.").is_ok());
    }

    #[test]
    fn format_round_trips() {
        let src = "#const_domain 0..5.\n#constants -3, z.\np(1).\nq(X) :- p(X), not r(X), X != 2.\n\
                   COUNT{X : g(X)} >= 2.\nt :- SUM{{X : e(X, Z)}} < -1.\n:- t.\nu(D) :- p(A), p(B), D = A - B.";
        let p = parse_program(src).unwrap();
        let q = parse_program(&format_program(&p)).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn weight_program_syntax() {
        let w = parse_weight_program("p(0) :- {not p(0) = 1} 0.\nq :- 1 <= {a = 2, not b = 1} <= 2.").unwrap();
        assert_eq!(w.rules.len(), 2);
        let c = &w.rules[0].constraints[0];
        assert!(c.lower.is_none());
        assert_eq!(c.upper, Some(Term::int(0)));
        assert!(c.elements[0].negated);
    }

    #[test]
    fn interpretations() {
        let i = parse_interpretation("{p(1), q}").unwrap();
        assert_eq!(i.len(), 2);
        assert_eq!(parse_interpretation("p(1) q").unwrap(), i);
        assert!(parse_interpretation("p(X)").is_err());
    }
}
