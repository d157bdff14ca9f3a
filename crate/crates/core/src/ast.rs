//! Terms, atoms, aggregate atoms, rules, programs and interpretations.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_bigint::BigInt;

use crate::aggregates;
use crate::error::{Error, Result};

/// An element of the Herbrand universe.
///
/// Integers order before symbols; integers by value, symbols lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constant {
    Int(BigInt),
    Sym(Arc<str>),
}

impl Constant {
    pub fn int(value: impl Into<BigInt>) -> Self {
        Constant::Int(value.into())
    }

    pub fn sym(name: &str) -> Self {
        Constant::Sym(Arc::from(name))
    }

    pub fn as_int(&self) -> Option<&BigInt> {
        match self {
            Constant::Int(v) => Some(v),
            Constant::Sym(_) => None,
        }
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant::Int(v) => write!(f, "{v}"),
            Constant::Sym(s) => f.write_str(s),
        }
    }
}

/// Global variables are shared by the whole rule; local variables are bound
/// inside one intensional set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarKind {
    Global,
    Local,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable {
    pub name: Arc<str>,
    pub kind: VarKind,
}

impl Variable {
    pub fn global(name: &str) -> Self {
        Variable {
            name: Arc::from(name),
            kind: VarKind::Global,
        }
    }

    pub fn local(name: &str) -> Self {
        Variable {
            name: Arc::from(name),
            kind: VarKind::Local,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(Constant),
    Var(Variable),
}

impl Term {
    pub fn int(value: impl Into<BigInt>) -> Self {
        Term::Const(Constant::int(value))
    }

    pub fn sym(name: &str) -> Self {
        Term::Const(Constant::sym(name))
    }

    pub fn as_const(&self) -> Option<&Constant> {
        match self {
            Term::Const(c) => Some(c),
            Term::Var(_) => None,
        }
    }

    pub fn as_var(&self) -> Option<&Variable> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }
}

impl From<Constant> for Term {
    fn from(c: Constant) -> Self {
        Term::Const(c)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => write!(f, "{c}"),
            Term::Var(v) => f.write_str(&v.name),
        }
    }
}

/// Predicate symbol together with its arity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Predicate {
    pub name: Arc<str>,
    pub arity: usize,
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

/// An ordinary atom `p(t1, ..., tn)`. Atoms sort by predicate name first, so
/// all atoms of one predicate are contiguous in a sorted set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: Arc<str>,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: &str, args: Vec<Term>) -> Self {
        Atom {
            predicate: Arc::from(predicate),
            args,
        }
    }

    /// Ground atom from constants.
    pub fn ground(predicate: &str, args: impl IntoIterator<Item = Constant>) -> Self {
        Atom {
            predicate: Arc::from(predicate),
            args: args.into_iter().map(Term::Const).collect(),
        }
    }

    pub fn prop(predicate: &str) -> Self {
        Atom::new(predicate, Vec::new())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn predicate_key(&self) -> Predicate {
        Predicate {
            name: self.predicate.clone(),
            arity: self.args.len(),
        }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| matches!(t, Term::Const(_)))
    }

    pub fn variables(&self) -> impl Iterator<Item = &Variable> {
        self.args.iter().filter_map(Term::as_var)
    }

    /// The arguments of a ground atom.
    pub fn constants(&self) -> Option<Vec<Constant>> {
        self.args.iter().map(|t| t.as_const().cloned()).collect()
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Collection {
    /// `{ X : p(X, Y) }`: each collected value counts once.
    Set,
    /// `{{ X : p(X, Y) }}`: one occurrence per satisfying instance of the local
    /// variables.
    Multiset,
}

/// The intensional set (or multiset) an aggregate ranges over.
///
/// `locals` lists the local variables of the pattern other than `collected`,
/// in order of first occurrence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IntensionalSpec {
    pub collected: Variable,
    pub locals: Vec<Variable>,
    pub pattern: Atom,
    pub collection: Collection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AggFunction {
    Count,
    Sum,
    Min,
    Max,
    Avg,
}

impl AggFunction {
    pub const ALL: [AggFunction; 5] = [
        AggFunction::Count,
        AggFunction::Sum,
        AggFunction::Min,
        AggFunction::Max,
        AggFunction::Avg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AggFunction::Count => "COUNT",
            AggFunction::Sum => "SUM",
            AggFunction::Min => "MIN",
            AggFunction::Max => "MAX",
            AggFunction::Avg => "AVG",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        AggFunction::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(name))
    }

    /// Whether the function needs integer arguments.
    pub fn is_numeric(self) -> bool {
        !matches!(self, AggFunction::Count)
    }
}

impl fmt::Display for AggFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Relation {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Relation {
    pub const ALL: [Relation; 6] = [
        Relation::Eq,
        Relation::Ne,
        Relation::Lt,
        Relation::Le,
        Relation::Gt,
        Relation::Ge,
    ];

    /// Whether `a REL b` holds given `a.cmp(b)`.
    pub fn holds(self, ord: Ordering) -> bool {
        match self {
            Relation::Eq => ord == Ordering::Equal,
            Relation::Ne => ord != Ordering::Equal,
            Relation::Lt => ord == Ordering::Less,
            Relation::Le => ord != Ordering::Greater,
            Relation::Gt => ord == Ordering::Greater,
            Relation::Ge => ord != Ordering::Less,
        }
    }

    /// The relation with swapped operands: `a REL b` iff `b REL.flip() a`.
    pub fn flip(self) -> Self {
        match self {
            Relation::Eq => Relation::Eq,
            Relation::Ne => Relation::Ne,
            Relation::Lt => Relation::Gt,
            Relation::Le => Relation::Ge,
            Relation::Gt => Relation::Lt,
            Relation::Ge => Relation::Le,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Ne => "!=",
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Gt => ">",
            Relation::Ge => ">=",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// `FUNC{ X : p(...) } REL guard`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AggregateAtom {
    pub function: AggFunction,
    pub spec: IntensionalSpec,
    pub relation: Relation,
    pub guard: Term,
}

impl AggregateAtom {
    /// Ground means no global variables remain; local variables are bound by
    /// the aggregate itself.
    pub fn is_ground(&self) -> bool {
        self.guard.as_const().is_some()
            && self
                .spec
                .pattern
                .variables()
                .all(|v| v.kind == VarKind::Local)
    }

    pub fn global_variables(&self) -> impl Iterator<Item = &Variable> {
        self.spec
            .pattern
            .variables()
            .chain(self.guard.as_var())
            .filter(|v| v.kind == VarKind::Global)
    }
}

impl fmt::Display for AggregateAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (open, close) = match self.spec.collection {
            Collection::Set => ("{", "}"),
            Collection::Multiset => ("{{", "}}"),
        };
        write!(
            f,
            "{}{} {} : {} {} {} {}",
            self.function,
            open,
            self.spec.collected.name,
            self.spec.pattern,
            close,
            self.relation,
            self.guard
        )
    }
}

/// Arithmetic over terms, as allowed in comparison literals.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Term(Term),
    Add(Term, Term),
    Sub(Term, Term),
}

impl Expr {
    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        let (a, b) = match self {
            Expr::Term(t) => (t, None),
            Expr::Add(a, b) | Expr::Sub(a, b) => (a, Some(b)),
        };
        core::iter::once(a).chain(b)
    }

    pub fn variables(&self) -> impl Iterator<Item = &Variable> {
        self.terms().filter_map(Term::as_var)
    }

    /// Value of a ground expression. Arithmetic on symbols yields a type error;
    /// a lone symbol evaluates to itself.
    pub fn eval(&self) -> Result<Constant> {
        let ground = |t: &Term| -> Result<Constant> {
            t.as_const()
                .cloned()
                .ok_or_else(|| Error::NonGround(t.to_string()))
        };
        let ints = |a: &Term, b: &Term| -> Result<(BigInt, BigInt)> {
            match (ground(a)?, ground(b)?) {
                (Constant::Int(x), Constant::Int(y)) => Ok((x, y)),
                _ => Err(Error::Type(format!("arithmetic on a symbol in {self}"))),
            }
        };
        match self {
            Expr::Term(t) => ground(t),
            Expr::Add(a, b) => ints(a, b).map(|(x, y)| Constant::Int(x + y)),
            Expr::Sub(a, b) => ints(a, b).map(|(x, y)| Constant::Int(x - y)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Term(t) => write!(f, "{t}"),
            Expr::Add(a, b) => write!(f, "{a} + {b}"),
            Expr::Sub(a, b) => write!(f, "{a} - {b}"),
        }
    }
}

/// A comparison literal `lhs REL rhs`. These only exist before grounding.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Builtin {
    pub lhs: Expr,
    pub relation: Relation,
    pub rhs: Expr,
}

impl Builtin {
    pub fn variables(&self) -> impl Iterator<Item = &Variable> {
        self.lhs.variables().chain(self.rhs.variables())
    }

    /// Truth value of a ground comparison. Integers and symbols compare by
    /// the constant order; `=` and `!=` work on any constants.
    pub fn eval(&self) -> Result<bool> {
        let l = self.lhs.eval()?;
        let r = self.rhs.eval()?;
        Ok(self.relation.holds(l.cmp(&r)))
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.relation, self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Head {
    Atom(Atom),
    Aggregate(AggregateAtom),
    /// The head of a constraint `:- body.`
    Falsum,
}

/// `head :- aggs, pos, not neg, builtins.`
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    pub head: Head,
    pub aggs: Vec<AggregateAtom>,
    pub pos: Vec<Atom>,
    pub neg: Vec<Atom>,
    pub builtins: Vec<Builtin>,
}

impl Rule {
    pub fn fact(atom: Atom) -> Self {
        Rule {
            head: Head::Atom(atom),
            aggs: Vec::new(),
            pos: Vec::new(),
            neg: Vec::new(),
            builtins: Vec::new(),
        }
    }

    pub fn body_is_empty(&self) -> bool {
        self.aggs.is_empty() && self.pos.is_empty() && self.neg.is_empty() && self.builtins.is_empty()
    }

    pub fn is_ground(&self) -> bool {
        let head_ground = match &self.head {
            Head::Atom(a) => a.is_ground(),
            Head::Aggregate(g) => g.is_ground(),
            Head::Falsum => true,
        };
        head_ground
            && self.builtins.is_empty()
            && self.pos.iter().chain(&self.neg).all(Atom::is_ground)
            && self.aggs.iter().all(AggregateAtom::is_ground)
    }

    /// Truth of the body in `interp`. Aggregates are evaluated over the whole
    /// interpretation.
    pub fn body_holds(&self, interp: &Interpretation) -> Result<bool> {
        if !self.builtins.is_empty() {
            return Err(Error::NonGround(format!("{self}")));
        }
        if !self.pos.iter().all(|a| interp.contains(a)) || self.neg.iter().any(|a| interp.contains(a)) {
            return Ok(false);
        }
        for g in &self.aggs {
            if !aggregates::evaluate(interp, g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn head_holds(&self, interp: &Interpretation) -> Result<bool> {
        match &self.head {
            Head::Atom(a) => Ok(interp.contains(a)),
            Head::Aggregate(g) => aggregates::evaluate(interp, g),
            Head::Falsum => Ok(false),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.head {
            Head::Atom(a) => write!(f, "{a}")?,
            Head::Aggregate(g) => write!(f, "{g}")?,
            Head::Falsum => {}
        }
        if self.body_is_empty() {
            if self.head == Head::Falsum {
                f.write_str(":-")?;
            }
            return f.write_str(".");
        }
        if self.head == Head::Falsum {
            f.write_str(":- ")?;
        } else {
            f.write_str(" :- ")?;
        }
        let mut first = true;
        let mut sep = |f: &mut fmt::Formatter<'_>| -> fmt::Result {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            Ok(())
        };
        for a in &self.pos {
            sep(f)?;
            write!(f, "{a}")?;
        }
        for a in &self.neg {
            sep(f)?;
            write!(f, "not {a}")?;
        }
        for g in &self.aggs {
            sep(f)?;
            write!(f, "{g}")?;
        }
        for b in &self.builtins {
            sep(f)?;
            write!(f, "{b}")?;
        }
        f.write_str(".")
    }
}

/// A program together with its declared constants. The Herbrand universe is
/// `constants` plus every constant occurring in the rules.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub rules: Vec<Rule>,
    pub constants: BTreeSet<Constant>,
}

impl Program {
    /// Every constant that occurs in the rules.
    pub fn textual_constants(&self) -> BTreeSet<Constant> {
        let mut out = BTreeSet::new();
        let atom = |a: &Atom, out: &mut BTreeSet<Constant>| {
            out.extend(a.args.iter().filter_map(Term::as_const).cloned());
        };
        for r in &self.rules {
            let agg = |g: &AggregateAtom, out: &mut BTreeSet<Constant>| {
                atom(&g.spec.pattern, out);
                out.extend(g.guard.as_const().cloned());
            };
            match &r.head {
                Head::Atom(a) => atom(a, &mut out),
                Head::Aggregate(g) => agg(g, &mut out),
                Head::Falsum => {}
            }
            for a in r.pos.iter().chain(&r.neg) {
                atom(a, &mut out);
            }
            for g in &r.aggs {
                agg(g, &mut out);
            }
            for b in &r.builtins {
                for t in b.lhs.terms().chain(b.rhs.terms()) {
                    out.extend(t.as_const().cloned());
                }
            }
        }
        out
    }

    /// The finite Herbrand universe F_P.
    pub fn universe(&self) -> BTreeSet<Constant> {
        let mut u = self.textual_constants();
        u.extend(self.constants.iter().cloned());
        u
    }

    /// Every predicate (with arity) occurring in the program, including the
    /// patterns of aggregate atoms.
    pub fn predicates(&self) -> BTreeSet<Predicate> {
        let mut out = BTreeSet::new();
        for r in &self.rules {
            match &r.head {
                Head::Atom(a) => {
                    out.insert(a.predicate_key());
                }
                Head::Aggregate(g) => {
                    out.insert(g.spec.pattern.predicate_key());
                }
                Head::Falsum => {}
            }
            for a in r.pos.iter().chain(&r.neg) {
                out.insert(a.predicate_key());
            }
            for g in &r.aggs {
                out.insert(g.spec.pattern.predicate_key());
            }
        }
        out
    }

    /// The Herbrand base over F_P: every ground atom of every program predicate.
    pub fn herbrand_base(&self) -> BTreeSet<Atom> {
        let universe: Vec<Constant> = self.universe().into_iter().collect();
        let mut out = BTreeSet::new();
        for p in self.predicates() {
            let mut idx = alloc::vec![0usize; p.arity];
            if p.arity > 0 && universe.is_empty() {
                continue;
            }
            loop {
                out.insert(Atom::ground(&p.name, idx.iter().map(|&i| universe[i].clone())));
                let mut k = 0;
                while k < p.arity {
                    idx[k] += 1;
                    if idx[k] < universe.len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == p.arity {
                    break;
                }
            }
        }
        out
    }

    pub fn has_aggregate_heads(&self) -> bool {
        self.rules.iter().any(|r| matches!(r.head, Head::Aggregate(_)))
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::format_program(self))
    }
}

/// A set of ground atoms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Interpretation(pub BTreeSet<Atom>);

impl Interpretation {
    pub fn new() -> Self {
        Interpretation(BTreeSet::new())
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.0.contains(atom)
    }

    pub fn insert(&mut self, atom: Atom) -> bool {
        self.0.insert(atom)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.0.iter()
    }

    pub fn is_subset(&self, other: &Interpretation) -> bool {
        self.0.is_subset(&other.0)
    }

    /// Atoms of predicate `name`, in order.
    pub fn with_predicate<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Atom> + 'a {
        let start = Atom::new(name, Vec::new());
        self.0
            .range(start..)
            .take_while(move |a| &*a.predicate == name)
    }

    /// Sorted textual atoms, the output form used for answer sets.
    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(|a| a.to_string()).collect()
    }
}

impl FromIterator<Atom> for Interpretation {
    fn from_iter<T: IntoIterator<Item = Atom>>(iter: T) -> Self {
        Interpretation(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a Interpretation {
    type Item = &'a Atom;
    type IntoIter = alloc::collections::btree_set::Iter<'a, Atom>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("}")
    }
}

/// A body literal, for evaluating a single literal against an interpretation.
#[derive(Debug, Clone, Copy)]
pub enum Literal<'a> {
    Pos(&'a Atom),
    Neg(&'a Atom),
    Agg(&'a AggregateAtom),
}

pub fn satisfies(interp: &Interpretation, lit: Literal<'_>) -> Result<bool> {
    match lit {
        Literal::Pos(a) => Ok(interp.contains(a)),
        Literal::Neg(a) => Ok(!interp.contains(a)),
        Literal::Agg(g) => aggregates::evaluate(interp, g),
    }
}

/// Whether `interp` satisfies every rule of a ground rule set.
pub fn is_model(interp: &Interpretation, rules: &[Rule]) -> Result<bool> {
    for r in rules {
        if !r.is_ground() {
            return Err(Error::NonGround(format!("{r}")));
        }
        if r.body_holds(interp)? && !r.head_holds(interp)? {
            return Ok(false);
        }
    }
    Ok(true)
}
