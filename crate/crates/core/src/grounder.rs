//! Grounding over the finite Herbrand universe, aggregate bases, and
//! predicate-level dependency analysis.
//!
//! Instantiation is driven by the set of possibly true atoms: the least set
//! closed under rules whose positive atoms are possibly true and whose
//! aggregates hold in some set of possibly true atoms. Answer sets and FLP
//! answer sets lie inside it. Rule instances with a positive atom outside the
//! set, or with an aggregate that no set of possibly true atoms satisfies, are
//! dropped: their bodies are false in every interpretation inside the set.
//!
//! Stable sets need not be supported in this sense. With
//! [`Config::relaxed_closure`] the closure ignores aggregates, which covers
//! them at the price of larger aggregate bases.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::{HashMap, HashSet};

use crate::aggregates::{self, match_pattern, Tristate};
use crate::ast::*;
use crate::config::{Config, Limits};
use crate::error::{Error, Result};

/// How the base of a ground aggregate atom is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BaseMode {
    /// Instances of the pattern that are possibly true.
    #[default]
    HeadRestricted,
    /// Every instance of the pattern over the universe (integers only for the
    /// collected variable of a numeric function).
    FullPattern,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundProgram {
    rules: Vec<Rule>,
    universe: BTreeSet<Constant>,
    possible: Interpretation,
    bases: BTreeMap<AggregateAtom, Vec<Atom>>,
    mode: BaseMode,
    relaxed: bool,
}

impl GroundProgram {
    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn universe(&self) -> &BTreeSet<Constant> {
        &self.universe
    }

    /// Atoms that can be true in some interpretation of interest.
    pub fn possible_atoms(&self) -> &Interpretation {
        &self.possible
    }

    pub fn base_mode(&self) -> BaseMode {
        self.mode
    }

    /// Whether the possibly true atoms were computed ignoring aggregates.
    pub fn relaxed_closure(&self) -> bool {
        self.relaxed
    }

    /// The base of a ground aggregate atom of this program.
    pub fn base(&self, agg: &AggregateAtom) -> Result<&[Atom]> {
        self.bases
            .get(agg)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::MissingSolutions(agg.to_string()))
    }

    /// Every ground aggregate atom with its base.
    pub fn aggregates(&self) -> impl Iterator<Item = (&AggregateAtom, &[Atom])> {
        self.bases.iter().map(|(g, b)| (g, b.as_slice()))
    }

    /// Aggregate atoms that occur in rule bodies, in order.
    pub fn body_aggregates(&self) -> BTreeSet<&AggregateAtom> {
        self.rules.iter().flat_map(|r| &r.aggs).collect()
    }

    /// Every ordinary atom occurring in a rule or an aggregate base.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        for r in &self.rules {
            if let Head::Atom(a) = &r.head {
                out.insert(a.clone());
            }
            out.extend(r.pos.iter().cloned());
            out.extend(r.neg.iter().cloned());
        }
        for b in self.bases.values() {
            out.extend(b.iter().cloned());
        }
        out
    }

    pub fn has_aggregate_heads(&self) -> bool {
        self.rules.iter().any(|r| matches!(r.head, Head::Aggregate(_)))
    }

    /// The same program with other (ground) rules; aggregate bases are kept
    /// and extended for new aggregate atoms.
    pub fn with_rules(&self, rules: Vec<Rule>) -> Result<GroundProgram> {
        let mut out = GroundProgram {
            rules,
            universe: self.universe.clone(),
            possible: self.possible.clone(),
            bases: BTreeMap::new(),
            mode: self.mode,
            relaxed: self.relaxed,
        };
        for r in &out.rules {
            if !r.is_ground() {
                return Err(Error::NonGround(format!("{r}")));
            }
        }
        let mut bases = BTreeMap::new();
        for r in &out.rules {
            let heads = match &r.head {
                Head::Aggregate(g) => Some(g),
                _ => None,
            };
            for g in r.aggs.iter().chain(heads) {
                if bases.contains_key(g) {
                    continue;
                }
                let b = match self.bases.get(g) {
                    Some(b) => b.clone(),
                    None => aggregate_base(g, &out.universe, &out.possible, out.mode)?,
                };
                bases.insert(g.clone(), b);
            }
        }
        out.bases = bases;
        Ok(out)
    }

    /// The ground rules as a program over the same universe.
    pub fn to_program(&self) -> Program {
        Program {
            rules: self.rules.clone(),
            constants: self.universe.clone(),
        }
    }
}

fn pattern_domain(agg: &AggregateAtom, var: &Variable) -> bool {
    // Numeric functions only see integers through their collected variable.
    !(agg.function.is_numeric() && var.name == agg.spec.collected.name)
}

/// Instances of the (ground) aggregate's pattern over `universe`.
fn full_pattern(agg: &AggregateAtom, universe: &BTreeSet<Constant>) -> Result<Vec<Atom>> {
    let mut vars: Vec<&Variable> = Vec::new();
    for v in agg.spec.pattern.variables() {
        if v.kind == VarKind::Global {
            return Err(Error::NonGround(agg.to_string()));
        }
        if !vars.contains(&v) {
            vars.push(v);
        }
    }
    let all: Vec<Constant> = universe.iter().cloned().collect();
    let ints: Vec<Constant> = universe.iter().filter(|c| c.as_int().is_some()).cloned().collect();
    let domains: Vec<&Vec<Constant>> = vars
        .iter()
        .map(|v| if pattern_domain(agg, v) { &all } else { &ints })
        .collect();
    let mut size: u128 = 1;
    for d in &domains {
        size = size.saturating_mul(d.len() as u128);
    }
    if size > 1_000_000 {
        return Err(Error::resource("full pattern instances", size, 1_000_000u128));
    }
    let mut out = Vec::new();
    if domains.iter().any(|d| d.is_empty()) {
        return Ok(out);
    }
    let mut idx = vec![0usize; vars.len()];
    loop {
        let args = agg
            .spec
            .pattern
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) => Term::Const(c.clone()),
                Term::Var(v) => {
                    let k = vars.iter().position(|w| *w == v).expect("collected above");
                    Term::Const(domains[k][idx[k]].clone())
                }
            })
            .collect();
        out.push(Atom {
            predicate: agg.spec.pattern.predicate.clone(),
            args,
        });
        let mut k = 0;
        while k < idx.len() {
            idx[k] += 1;
            if idx[k] < domains[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == idx.len() {
            break;
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// The base of a ground aggregate atom under the given mode.
pub fn aggregate_base(
    agg: &AggregateAtom,
    universe: &BTreeSet<Constant>,
    possible: &Interpretation,
    mode: BaseMode,
) -> Result<Vec<Atom>> {
    match mode {
        BaseMode::HeadRestricted => {
            if !agg.is_ground() {
                return Err(Error::NonGround(agg.to_string()));
            }
            Ok(possible
                .with_predicate(&agg.spec.pattern.predicate)
                .filter(|a| match_pattern(&agg.spec, a).is_some())
                .cloned()
                .collect())
        }
        BaseMode::FullPattern => full_pattern(agg, universe),
    }
}

type Tuple = Vec<Constant>;

#[derive(Default)]
struct Store {
    tuples: HashMap<Predicate, Vec<Tuple>>,
    set: HashSet<Atom>,
    index: HashMap<(Predicate, Vec<usize>), HashMap<Tuple, Vec<usize>>>,
}

impl Store {
    fn ensure_index(&mut self, pred: &Predicate, positions: &[usize]) {
        let key = (pred.clone(), positions.to_vec());
        if self.index.contains_key(&key) {
            return;
        }
        let mut idx: HashMap<Tuple, Vec<usize>> = HashMap::new();
        if let Some(ts) = self.tuples.get(pred) {
            for (i, t) in ts.iter().enumerate() {
                idx.entry(positions.iter().map(|&p| t[p].clone()).collect())
                    .or_default()
                    .push(i);
            }
        }
        self.index.insert(key, idx);
    }

    fn insert(&mut self, atom: Atom) -> bool {
        if self.set.contains(&atom) {
            return false;
        }
        let pred = atom.predicate_key();
        let tuple = atom.constants().expect("ground atom");
        let list = self.tuples.entry(pred.clone()).or_default();
        let i = list.len();
        for ((p, positions), idx) in self.index.iter_mut() {
            if *p == pred {
                idx.entry(positions.iter().map(|&k| tuple[k].clone()).collect())
                    .or_default()
                    .push(i);
            }
        }
        list.push(tuple);
        self.set.insert(atom);
        true
    }

    fn lookup(&self, pred: &Predicate, positions: &[usize], key: &[Constant]) -> &[usize] {
        self.index
            .get(&(pred.clone(), positions.to_vec()))
            .and_then(|idx| idx.get(key))
            .map_or(&[], Vec::as_slice)
    }

    fn tuple(&self, pred: &Predicate, i: usize) -> &Tuple {
        &self.tuples[pred][i]
    }
}

/// A rule prepared for instantiation.
struct Plan<'r> {
    rule: &'r Rule,
    vars: Vec<Arc<str>>,
    /// Variables that may be enumerated: `true` for the whole universe,
    /// `false` for its integers only (guard-only variables).
    free_domain: Vec<Option<bool>>,
    /// Positive atoms in join order with the positions bound on entry.
    joins: Vec<(&'r Atom, Predicate, Vec<usize>)>,
    /// Pattern positions fixed once the rule is instantiated, per body aggregate.
    agg_keys: Vec<(Predicate, Vec<usize>)>,
}

fn slot(vars: &[Arc<str>], name: &str) -> usize {
    vars.iter().position(|v| &**v == name).expect("variable registered")
}

impl<'r> Plan<'r> {
    fn new(rule: &'r Rule) -> Plan<'r> {
        let mut vars: Vec<Arc<str>> = Vec::new();
        let add = |v: &Variable, vars: &mut Vec<Arc<str>>| {
            if v.kind == VarKind::Global && !vars.contains(&v.name) {
                vars.push(v.name.clone());
            }
        };
        for a in &rule.pos {
            a.variables().for_each(|v| add(v, &mut vars));
        }
        let head_agg = match &rule.head {
            Head::Aggregate(g) => Some(g),
            _ => None,
        };
        for g in rule.aggs.iter().chain(head_agg) {
            g.global_variables().for_each(|v| add(v, &mut vars));
        }
        if let Head::Atom(a) = &rule.head {
            a.variables().for_each(|v| add(v, &mut vars));
        }
        for a in &rule.neg {
            a.variables().for_each(|v| add(v, &mut vars));
        }
        for b in &rule.builtins {
            b.variables().for_each(|v| add(v, &mut vars));
        }

        let mut free_domain: Vec<Option<bool>> = vec![None; vars.len()];
        for g in rule.aggs.iter().chain(head_agg) {
            for v in g.spec.pattern.variables().filter(|v| v.kind == VarKind::Global) {
                free_domain[slot(&vars, &v.name)] = Some(true);
            }
            if let Term::Var(v) = &g.guard {
                let s = slot(&vars, &v.name);
                if free_domain[s].is_none() {
                    free_domain[s] = Some(false);
                }
            }
        }

        let mut bound: BTreeSet<Arc<str>> = BTreeSet::new();
        let mut pending: Vec<&Atom> = rule.pos.iter().collect();
        let mut joins = Vec::new();
        while !pending.is_empty() {
            let score = |a: &Atom| {
                a.args
                    .iter()
                    .filter(|t| match t {
                        Term::Const(_) => true,
                        Term::Var(v) => bound.contains(&v.name),
                    })
                    .count() as isize
                    - a.args.len() as isize
            };
            let best = (0..pending.len())
                .max_by_key(|&i| (score(pending[i]), -(i as isize)))
                .expect("non-empty");
            let a = pending.remove(best);
            let positions: Vec<usize> = a
                .args
                .iter()
                .enumerate()
                .filter(|(_, t)| match t {
                    Term::Const(_) => true,
                    Term::Var(v) => bound.contains(&v.name),
                })
                .map(|(i, _)| i)
                .collect();
            bound.extend(a.variables().map(|v| v.name.clone()));
            joins.push((a, a.predicate_key(), positions));
        }

        let agg_keys = rule
            .aggs
            .iter()
            .map(|g| {
                let positions = g
                    .spec
                    .pattern
                    .args
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| !matches!(t, Term::Var(v) if v.kind == VarKind::Local))
                    .map(|(i, _)| i)
                    .collect();
                (g.spec.pattern.predicate_key(), positions)
            })
            .collect();

        Plan {
            rule,
            vars,
            free_domain,
            joins,
            agg_keys,
        }
    }
}

type Binding = Vec<Option<Constant>>;

fn subst_term(t: &Term, vars: &[Arc<str>], bind: &Binding) -> Term {
    match t {
        Term::Var(v) if v.kind == VarKind::Global => match &bind[slot(vars, &v.name)] {
            Some(c) => Term::Const(c.clone()),
            None => t.clone(),
        },
        _ => t.clone(),
    }
}

fn subst_atom(a: &Atom, vars: &[Arc<str>], bind: &Binding) -> Atom {
    Atom {
        predicate: a.predicate.clone(),
        args: a.args.iter().map(|t| subst_term(t, vars, bind)).collect(),
    }
}

fn subst_agg(g: &AggregateAtom, vars: &[Arc<str>], bind: &Binding) -> AggregateAtom {
    AggregateAtom {
        function: g.function,
        spec: IntensionalSpec {
            collected: g.spec.collected.clone(),
            locals: g.spec.locals.clone(),
            pattern: subst_atom(&g.spec.pattern, vars, bind),
            collection: g.spec.collection,
        },
        relation: g.relation,
        guard: subst_term(&g.guard, vars, bind),
    }
}

fn subst_expr(e: &Expr, vars: &[Arc<str>], bind: &Binding) -> Expr {
    match e {
        Expr::Term(t) => Expr::Term(subst_term(t, vars, bind)),
        Expr::Add(a, b) => Expr::Add(subst_term(a, vars, bind), subst_term(b, vars, bind)),
        Expr::Sub(a, b) => Expr::Sub(subst_term(a, vars, bind), subst_term(b, vars, bind)),
    }
}

struct Round<'a> {
    store: &'a Store,
    universe: &'a [Constant],
    ints: &'a [Constant],
    universe_set: &'a BTreeSet<Constant>,
    out: Vec<Rule>,
    max: usize,
    /// Drop instances whose aggregates no set of possibly true atoms satisfies.
    check_aggs: bool,
}

impl Round<'_> {
    fn ground(&mut self, plan: &Plan<'_>) -> Result<()> {
        let bind: Binding = vec![None; plan.vars.len()];
        let done = vec![false; plan.rule.builtins.len()];
        self.step(plan, 0, bind, done)
    }

    /// Runs every builtin that can be decided or used as an assignment.
    /// Returns `false` if one fails.
    fn builtins(&self, plan: &Plan<'_>, bind: &mut Binding, done: &mut [bool]) -> bool {
        loop {
            let mut progress = false;
            for (i, b) in plan.rule.builtins.iter().enumerate() {
                if done[i] {
                    continue;
                }
                let unbound: Vec<&Variable> = b
                    .variables()
                    .filter(|v| bind[slot(&plan.vars, &v.name)].is_none())
                    .collect();
                if unbound.is_empty() {
                    let g = Builtin {
                        lhs: subst_expr(&b.lhs, &plan.vars, bind),
                        relation: b.relation,
                        rhs: subst_expr(&b.rhs, &plan.vars, bind),
                    };
                    // Arithmetic on symbols has no value: no instance.
                    if !g.eval().unwrap_or(false) {
                        return false;
                    }
                    done[i] = true;
                    progress = true;
                    continue;
                }
                if b.relation != Relation::Eq || unbound.len() != 1 {
                    continue;
                }
                let target = unbound[0];
                for (side, other) in [(&b.lhs, &b.rhs), (&b.rhs, &b.lhs)] {
                    if matches!(side, Expr::Term(Term::Var(v)) if v.name == target.name)
                        && other.variables().all(|v| v.name != target.name)
                    {
                        let Ok(value) = subst_expr(other, &plan.vars, bind).eval() else {
                            return false;
                        };
                        if !self.universe_set.contains(&value) {
                            return false;
                        }
                        bind[slot(&plan.vars, &target.name)] = Some(value);
                        done[i] = true;
                        progress = true;
                        break;
                    }
                }
            }
            if !progress {
                return true;
            }
        }
    }

    fn step(&mut self, plan: &Plan<'_>, k: usize, mut bind: Binding, mut done: Vec<bool>) -> Result<()> {
        if !self.builtins(plan, &mut bind, &mut done) {
            return Ok(());
        }
        if k < plan.joins.len() {
            let (atom, pred, positions) = &plan.joins[k];
            let key: Vec<Constant> = positions
                .iter()
                .map(|&p| match &atom.args[p] {
                    Term::Const(c) => c.clone(),
                    Term::Var(v) => bind[slot(&plan.vars, &v.name)].clone().expect("bound on entry"),
                })
                .collect();
            for &i in self.store.lookup(pred, positions, &key) {
                let tuple = self.store.tuple(pred, i);
                let mut next = bind.clone();
                let mut ok = true;
                for (t, c) in atom.args.iter().zip(tuple) {
                    if let Term::Var(v) = t {
                        let s = slot(&plan.vars, &v.name);
                        match &next[s] {
                            Some(b) if b != c => {
                                ok = false;
                                break;
                            }
                            Some(_) => {}
                            None => next[s] = Some(c.clone()),
                        }
                    }
                }
                if ok {
                    self.step(plan, k + 1, next, done.clone())?;
                }
            }
            return Ok(());
        }
        if let Some(s) = (0..plan.vars.len()).find(|&s| bind[s].is_none() && plan.free_domain[s].is_some()) {
            let domain = if plan.free_domain[s] == Some(true) {
                self.universe
            } else {
                self.ints
            };
            for c in domain {
                let mut next = bind.clone();
                next[s] = Some(c.clone());
                self.step(plan, k, next, done.clone())?;
            }
            return Ok(());
        }
        if bind.iter().any(Option::is_none) || done.iter().any(|d| !d) {
            let v = bind
                .iter()
                .position(Option::is_none)
                .map(|s| plan.vars[s].to_string())
                .unwrap_or_default();
            return Err(Error::NonGround(format!("unsafe variable {v} in {}", plan.rule)));
        }
        self.emit(plan, &bind)
    }

    fn emit(&mut self, plan: &Plan<'_>, bind: &Binding) -> Result<()> {
        let r = plan.rule;
        let mut aggs = Vec::with_capacity(r.aggs.len());
        for (g, (pred, positions)) in r.aggs.iter().zip(&plan.agg_keys) {
            let g = subst_agg(g, &plan.vars, bind);
            let key: Vec<Constant> = positions
                .iter()
                .map(|&p| g.spec.pattern.args[p].as_const().cloned().expect("fixed position"))
                .collect();
            let values: Vec<Constant> = self
                .store
                .lookup(pred, positions, &key)
                .iter()
                .filter_map(|&i| {
                    let atom = Atom::ground(&pred.name, self.store.tuple(pred, i).iter().cloned());
                    match_pattern(&g.spec, &atom)
                })
                .collect();
            if self.check_aggs && !aggregates::possibly_satisfiable(&g, values) {
                return Ok(());
            }
            aggs.push(g);
        }
        let head = match &r.head {
            Head::Atom(a) => Head::Atom(subst_atom(a, &plan.vars, bind)),
            Head::Aggregate(g) => Head::Aggregate(subst_agg(g, &plan.vars, bind)),
            Head::Falsum => Head::Falsum,
        };
        let mut pos: Vec<Atom> = Vec::new();
        for a in &r.pos {
            let a = subst_atom(a, &plan.vars, bind);
            if !pos.contains(&a) {
                pos.push(a);
            }
        }
        let mut neg: Vec<Atom> = Vec::new();
        for a in &r.neg {
            let a = subst_atom(a, &plan.vars, bind);
            if !neg.contains(&a) {
                neg.push(a);
            }
        }
        self.out.push(Rule {
            head,
            aggs,
            pos,
            neg,
            builtins: Vec::new(),
        });
        if self.out.len() > self.max {
            return Err(Error::resource("ground rules", self.out.len() as u128, self.max as u128));
        }
        Ok(())
    }
}

/// Instantiates `program` over its universe.
pub fn ground_program(program: &Program, config: &Config) -> Result<GroundProgram> {
    let universe_set = program.universe();
    let universe: Vec<Constant> = universe_set.iter().cloned().collect();
    let ints: Vec<Constant> = universe.iter().filter(|c| c.as_int().is_some()).cloned().collect();
    let plans: Vec<Plan<'_>> = program.rules.iter().map(Plan::new).collect();

    let mut store = Store::default();
    for p in &plans {
        for (_, pred, positions) in &p.joins {
            store.ensure_index(pred, positions);
        }
        for (pred, positions) in &p.agg_keys {
            store.ensure_index(pred, positions);
        }
    }

    let round_with = |store: &Store, check_aggs: bool| -> Result<Vec<Rule>> {
        let mut round = Round {
            store,
            universe: &universe,
            ints: &ints,
            universe_set: &universe_set,
            out: Vec::new(),
            max: config.limits.max_ground_rules,
            check_aggs,
        };
        for p in &plans {
            round.ground(p)?;
        }
        Ok(round.out)
    };
    let check = !config.relaxed_closure;
    let rules = loop {
        let rules = round_with(&store, check)?;
        let mut new_atoms: Vec<Atom> = Vec::new();
        for r in &rules {
            match &r.head {
                Head::Atom(a) => {
                    if !store.set.contains(a) {
                        new_atoms.push(a.clone());
                    }
                }
                Head::Aggregate(g) => {
                    for a in full_pattern(g, &universe_set)? {
                        if !store.set.contains(&a) {
                            new_atoms.push(a);
                        }
                    }
                }
                Head::Falsum => {}
            }
        }
        if new_atoms.is_empty() {
            break rules;
        }
        for a in new_atoms {
            store.insert(a);
        }
    };
    let rules = if check { rules } else { round_with(&store, true)? };

    let mut seen: HashSet<Rule> = HashSet::new();
    let rules: Vec<Rule> = rules.into_iter().filter(|r| seen.insert(r.clone())).collect();
    let possible: Interpretation = store.set.into_iter().collect();
    let mut out = GroundProgram {
        rules: Vec::new(),
        universe: universe_set,
        possible,
        bases: BTreeMap::new(),
        mode: config.base_mode,
        relaxed: config.relaxed_closure,
    };
    out = out.with_rules(rules)?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EdgeKind {
    Positive,
    Negative,
    Aggregate,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Edge {
    pub from: Predicate,
    pub to: Predicate,
    pub kind: EdgeKind,
}

/// Predicate-level dependencies: an edge from each head predicate to every
/// predicate its body refers to. The predicate of an aggregate head is the
/// predicate of its pattern.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DependencyGraph {
    pub nodes: BTreeSet<Predicate>,
    pub edges: BTreeSet<Edge>,
}

pub fn dependency_graph(program: &Program) -> DependencyGraph {
    let mut g = DependencyGraph {
        nodes: program.predicates(),
        edges: BTreeSet::new(),
    };
    for r in &program.rules {
        let from = match &r.head {
            Head::Atom(a) => a.predicate_key(),
            Head::Aggregate(h) => h.spec.pattern.predicate_key(),
            Head::Falsum => continue,
        };
        let mut add = |to: Predicate, kind| {
            g.edges.insert(Edge {
                from: from.clone(),
                to,
                kind,
            });
        };
        for a in &r.pos {
            add(a.predicate_key(), EdgeKind::Positive);
        }
        for a in &r.neg {
            add(a.predicate_key(), EdgeKind::Negative);
        }
        for h in &r.aggs {
            add(h.spec.pattern.predicate_key(), EdgeKind::Aggregate);
        }
    }
    g
}

/// Strongly connected components, each listed after every component it
/// depends on.
pub fn components(graph: &DependencyGraph) -> Vec<Vec<Predicate>> {
    let nodes: Vec<&Predicate> = graph.nodes.iter().collect();
    let id = |p: &Predicate| nodes.binary_search(&p).expect("node");
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for e in &graph.edges {
        succ[id(&e.from)].push(id(&e.to));
    }
    let n = nodes.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut counter = 0;
    let mut out = Vec::new();
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        // Iterative Tarjan: (node, next successor position).
        let mut work: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = work.last_mut() {
            if *pos < succ[v].len() {
                let w = succ[v][*pos];
                *pos += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                work.pop();
                if let Some(&(u, _)) = work.last() {
                    low[u] = low[u].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("on stack");
                        on_stack[w] = false;
                        comp.push(nodes[w].clone());
                        if w == v {
                            break;
                        }
                    }
                    comp.sort();
                    out.push(comp);
                }
            }
        }
    }
    out
}

/// A level for each predicate such that positive dependencies never go up and
/// negative or aggregate dependencies strictly go down.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StratificationLevels {
    pub levels: BTreeMap<Predicate, usize>,
}

impl StratificationLevels {
    pub fn level(&self, p: &Predicate) -> usize {
        self.levels.get(p).copied().unwrap_or(0)
    }

    pub fn max_level(&self) -> usize {
        self.levels.values().copied().max().unwrap_or(0)
    }
}

/// Levels exist iff no cycle goes through a negative or aggregate edge.
pub fn stratification_levels(program: &Program) -> Option<StratificationLevels> {
    let graph = dependency_graph(program);
    let comps = components(&graph);
    let mut comp_of: BTreeMap<&Predicate, usize> = BTreeMap::new();
    for (i, c) in comps.iter().enumerate() {
        for p in c {
            comp_of.insert(p, i);
        }
    }
    let mut level = vec![0usize; comps.len()];
    for (i, _) in comps.iter().enumerate() {
        for e in graph.edges.iter().filter(|e| comp_of[&e.from] == i) {
            let j = comp_of[&e.to];
            let strict = e.kind != EdgeKind::Positive;
            if j == i {
                if strict {
                    return None;
                }
                continue;
            }
            level[i] = level[i].max(level[j] + usize::from(strict));
        }
    }
    let levels = comp_of.into_iter().map(|(p, i)| (p.clone(), level[i])).collect();
    Some(StratificationLevels { levels })
}

/// Predicates defined only by facts (or not defined at all).
pub fn edb_predicates(program: &Program) -> BTreeSet<Predicate> {
    let mut idb = BTreeSet::new();
    for r in &program.rules {
        match &r.head {
            Head::Atom(a) if r.body_is_empty() && a.is_ground() => {}
            Head::Atom(a) => {
                idb.insert(a.predicate_key());
            }
            Head::Aggregate(g) => {
                idb.insert(g.spec.pattern.predicate_key());
            }
            Head::Falsum => {}
        }
    }
    program.predicates().into_iter().filter(|p| !idb.contains(p)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub aggregate_free: bool,
    pub has_negation: bool,
    pub has_constraints: bool,
    pub has_aggregate_heads: bool,
    pub stratification: Option<StratificationLevels>,
    /// No negation, no aggregate heads, and every ground body aggregate is
    /// monotone once the fact-only predicates are fixed.
    pub monotone: Tristate,
}

pub fn classify(program: &Program, ground: &GroundProgram, limits: &Limits) -> Result<Classification> {
    let aggregate_free = program
        .rules
        .iter()
        .all(|r| r.aggs.is_empty() && !matches!(r.head, Head::Aggregate(_)));
    let has_negation = program.rules.iter().any(|r| !r.neg.is_empty());
    let has_constraints = program.rules.iter().any(|r| r.head == Head::Falsum);
    let has_aggregate_heads = program.has_aggregate_heads();
    let monotone = if has_negation || has_aggregate_heads {
        Tristate::No
    } else {
        let edb = edb_predicates(program);
        let facts = edb_facts(program, &edb);
        let mut verdict = Tristate::Yes;
        for g in ground.body_aggregates() {
            let base = ground.base(g)?;
            let (fixed, free): (Vec<Atom>, Vec<Atom>) =
                base.iter().cloned().partition(|a| edb.contains(&a.predicate_key()));
            let fixed: Vec<Atom> = fixed.into_iter().filter(|a| facts.contains(a)).collect();
            match aggregates::monotone_over(g, &free, &fixed, limits)? {
                Tristate::Yes => {}
                Tristate::No => {
                    verdict = Tristate::No;
                    break;
                }
                Tristate::Unknown => verdict = Tristate::Unknown,
            }
        }
        verdict
    };
    Ok(Classification {
        aggregate_free,
        has_negation,
        has_constraints,
        has_aggregate_heads,
        stratification: stratification_levels(program),
        monotone,
    })
}

/// The ground facts of the given predicates.
pub fn edb_facts(program: &Program, edb: &BTreeSet<Predicate>) -> Interpretation {
    program
        .rules
        .iter()
        .filter(|r| r.body_is_empty())
        .filter_map(|r| match &r.head {
            Head::Atom(a) if a.is_ground() && edb.contains(&a.predicate_key()) => Some(a.clone()),
            _ => None,
        })
        .collect()
}
