//! Answer sets of normal (aggregate-free) programs, least models of definite
//! programs, and minimal-model checks for ground programs with aggregates.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::aggregates;
use crate::ast::{is_model, Atom, Head, Interpretation, Rule};
use crate::config::Limits;
use crate::error::{Error, Result};

/// `head :- pos, not neg.` with `head = None` for a constraint.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NormalRule {
    pub head: Option<Atom>,
    pub pos: BTreeSet<Atom>,
    pub neg: BTreeSet<Atom>,
}

fn write_rule(f: &mut fmt::Formatter<'_>, head: Option<&Atom>, pos: &BTreeSet<Atom>, neg: &BTreeSet<Atom>) -> fmt::Result {
    if let Some(h) = head {
        write!(f, "{h}")?;
    }
    if pos.is_empty() && neg.is_empty() {
        return f.write_str(if head.is_some() { "." } else { ":-." });
    }
    f.write_str(if head.is_some() { " :- " } else { ":- " })?;
    let mut first = true;
    for a in pos {
        if !first {
            f.write_str(", ")?;
        }
        first = false;
        write!(f, "{a}")?;
    }
    for a in neg {
        if !first {
            f.write_str(", ")?;
        }
        first = false;
        write!(f, "not {a}")?;
    }
    f.write_str(".")
}

impl fmt::Display for NormalRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_rule(f, self.head.as_ref(), &self.pos, &self.neg)
    }
}

/// A normal program; rules are kept in insertion order without duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NormalProgram {
    rules: Vec<NormalRule>,
    seen: BTreeSet<NormalRule>,
}

impl NormalProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, rule: NormalRule) -> bool {
        if self.seen.insert(rule.clone()) {
            self.rules.push(rule);
            true
        } else {
            false
        }
    }

    pub fn rules(&self) -> &[NormalRule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        for r in &self.rules {
            out.extend(r.head.iter().cloned());
            out.extend(r.pos.iter().cloned());
            out.extend(r.neg.iter().cloned());
        }
        out
    }
}

impl FromIterator<NormalRule> for NormalProgram {
    fn from_iter<T: IntoIterator<Item = NormalRule>>(iter: T) -> Self {
        let mut p = NormalProgram::new();
        for r in iter {
            p.push(r);
        }
        p
    }
}

impl fmt::Display for NormalProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DefiniteRule {
    pub head: Option<Atom>,
    pub pos: BTreeSet<Atom>,
}

impl fmt::Display for DefiniteRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_rule(f, self.head.as_ref(), &self.pos, &BTreeSet::new())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DefiniteProgram {
    pub rules: Vec<DefiniteRule>,
}

impl fmt::Display for DefiniteProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

/// One application of the immediate consequence operator. The flag is set when
/// the body of some constraint holds in `interp`.
pub fn tp_step(program: &DefiniteProgram, interp: &Interpretation) -> (Interpretation, bool) {
    let mut out = Interpretation::new();
    let mut violated = false;
    for r in &program.rules {
        if r.pos.iter().all(|a| interp.contains(a)) {
            match &r.head {
                Some(h) => {
                    out.insert(h.clone());
                }
                None => violated = true,
            }
        }
    }
    (out, violated)
}

/// The least model, or `None` when a constraint body is derived.
pub fn least_model(program: &DefiniteProgram) -> Option<Interpretation> {
    let mut ids: BTreeMap<&Atom, usize> = BTreeMap::new();
    for r in &program.rules {
        for a in r.head.iter().chain(&r.pos) {
            let n = ids.len();
            ids.entry(a).or_insert(n);
        }
    }
    let mut watch: Vec<Vec<usize>> = vec![Vec::new(); ids.len()];
    let mut missing: Vec<usize> = Vec::with_capacity(program.rules.len());
    let mut queue: Vec<usize> = Vec::new();
    let mut truth = vec![false; ids.len()];
    let mut violated = false;
    let fire = |r: &DefiniteRule, truth: &mut Vec<bool>, queue: &mut Vec<usize>, violated: &mut bool| match &r.head {
        Some(h) => {
            let i = ids[h];
            if !truth[i] {
                truth[i] = true;
                queue.push(i);
            }
        }
        None => *violated = true,
    };
    for (k, r) in program.rules.iter().enumerate() {
        missing.push(r.pos.len());
        for a in &r.pos {
            watch[ids[a]].push(k);
        }
        if r.pos.is_empty() {
            fire(r, &mut truth, &mut queue, &mut violated);
        }
    }
    while let Some(i) = queue.pop() {
        for &k in &watch[i] {
            missing[k] -= 1;
            if missing[k] == 0 {
                fire(&program.rules[k], &mut truth, &mut queue, &mut violated);
            }
        }
    }
    if violated {
        return None;
    }
    Some(ids.iter().filter(|(_, &i)| truth[i]).map(|(a, _)| (*a).clone()).collect())
}

/// Removes rules whose negative body meets `model` and strips the rest.
pub fn gl_reduct(program: &NormalProgram, model: &Interpretation) -> DefiniteProgram {
    DefiniteProgram {
        rules: program
            .rules()
            .iter()
            .filter(|r| r.neg.iter().all(|a| !model.contains(a)))
            .map(|r| DefiniteRule {
                head: r.head.clone(),
                pos: r.pos.clone(),
            })
            .collect(),
    }
}

pub fn is_answer_set(program: &NormalProgram, model: &Interpretation) -> bool {
    least_model(&gl_reduct(program, model)).as_ref() == Some(model)
}

/// Index-based form of a normal program.
struct Compiled {
    atoms: Vec<Atom>,
    rules: Vec<(Option<usize>, Vec<usize>, Vec<usize>)>,
    heads_of: Vec<Vec<usize>>,
}

impl Compiled {
    fn new(program: &NormalProgram) -> Self {
        let atoms: Vec<Atom> = program.atoms().into_iter().collect();
        let id = |a: &Atom| atoms.binary_search(a).expect("collected");
        let rules: Vec<_> = program
            .rules()
            .iter()
            .map(|r| {
                (
                    r.head.as_ref().map(id),
                    r.pos.iter().map(id).collect::<Vec<_>>(),
                    r.neg.iter().map(id).collect::<Vec<_>>(),
                )
            })
            .collect();
        let mut heads_of = vec![Vec::new(); atoms.len()];
        for (k, r) in rules.iter().enumerate() {
            if let Some(h) = r.0 {
                heads_of[h].push(k);
            }
        }
        Compiled { atoms, rules, heads_of }
    }

    /// Stability of a total assignment.
    fn stable(&self, vals: &[Val]) -> bool {
        let mut truth = vec![false; self.atoms.len()];
        let mut missing: Vec<usize> = Vec::with_capacity(self.rules.len());
        let mut watch: Vec<Vec<usize>> = vec![Vec::new(); self.atoms.len()];
        let mut queue = Vec::new();
        for (k, (h, pos, neg)) in self.rules.iter().enumerate() {
            let active = neg.iter().all(|&a| vals[a] == Val::False);
            missing.push(if active { pos.len() } else { usize::MAX });
            if !active {
                continue;
            }
            for &a in pos {
                watch[a].push(k);
            }
            if pos.is_empty() {
                match h {
                    Some(h) => {
                        if !truth[*h] {
                            truth[*h] = true;
                            queue.push(*h);
                        }
                    }
                    None => return false,
                }
            }
        }
        while let Some(i) = queue.pop() {
            for &k in &watch[i] {
                missing[k] -= 1;
                if missing[k] == 0 {
                    match self.rules[k].0 {
                        Some(h) => {
                            if !truth[h] {
                                truth[h] = true;
                                queue.push(h);
                            }
                        }
                        None => return false,
                    }
                }
            }
        }
        truth
            .iter()
            .zip(vals)
            .all(|(t, v)| *t == (*v == Val::True))
    }

    fn body_state(&self, k: usize, vals: &[Val]) -> (bool, usize, Option<(usize, Val)>) {
        let (_, pos, neg) = &self.rules[k];
        let mut unknown = 0;
        let mut flip = None;
        for &a in pos {
            match vals[a] {
                Val::False => return (true, 0, None),
                Val::Unknown => {
                    unknown += 1;
                    flip = Some((a, Val::False));
                }
                Val::True => {}
            }
        }
        for &a in neg {
            match vals[a] {
                Val::True => return (true, 0, None),
                Val::Unknown => {
                    unknown += 1;
                    flip = Some((a, Val::True));
                }
                Val::False => {}
            }
        }
        (false, unknown, flip)
    }

    /// Unit propagation for answer sets: rules fire, models falsify the last
    /// open literal of a rule with false head, and atoms without a possibly
    /// applicable rule are false. Returns `false` on conflict.
    fn propagate(&self, vals: &mut [Val]) -> bool {
        loop {
            let mut changed = false;
            for k in 0..self.rules.len() {
                let (falsified, unknown, flip) = self.body_state(k, vals);
                if falsified {
                    continue;
                }
                let head = self.rules[k].0;
                let head_val = head.map_or(Val::False, |h| vals[h]);
                if unknown == 0 {
                    match (head, head_val) {
                        (None, _) | (_, Val::False) => return false,
                        (Some(h), Val::Unknown) => {
                            vals[h] = Val::True;
                            changed = true;
                        }
                        _ => {}
                    }
                } else if unknown == 1 && head_val == Val::False {
                    let (a, v) = flip.expect("one open literal");
                    vals[a] = v;
                    changed = true;
                }
            }
            for a in 0..self.atoms.len() {
                if vals[a] == Val::False {
                    continue;
                }
                let supported = self.heads_of[a].iter().any(|&k| !self.body_state(k, vals).0);
                if !supported {
                    if vals[a] == Val::True {
                        return false;
                    }
                    vals[a] = Val::False;
                    changed = true;
                }
            }
            if !changed {
                return true;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Val {
    Unknown,
    True,
    False,
}

struct Search<'a> {
    c: &'a Compiled,
    nodes: u64,
    max_nodes: u64,
    limit: Option<usize>,
    found: Vec<Interpretation>,
}

impl Search<'_> {
    fn done(&self) -> bool {
        self.limit.is_some_and(|l| self.found.len() >= l)
    }

    fn run(&mut self, mut vals: Vec<Val>) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return Err(Error::resource("search nodes", self.nodes, self.max_nodes));
        }
        if !self.c.propagate(&mut vals) {
            return Ok(());
        }
        match vals.iter().position(|v| *v == Val::Unknown) {
            None => {
                if self.c.stable(&vals) {
                    self.found.push(
                        vals.iter()
                            .zip(&self.c.atoms)
                            .filter(|(v, _)| **v == Val::True)
                            .map(|(_, a)| a.clone())
                            .collect(),
                    );
                }
                Ok(())
            }
            Some(a) => {
                for v in [Val::True, Val::False] {
                    if self.done() {
                        break;
                    }
                    let mut next = vals.clone();
                    next[a] = v;
                    self.run(next)?;
                }
                Ok(())
            }
        }
    }
}

/// Answer sets of a normal program, sorted. With a limit, the first answer
/// sets found by the (deterministic) search are returned.
pub fn enumerate_answer_sets(
    program: &NormalProgram,
    limit: Option<usize>,
    limits: &Limits,
) -> Result<Vec<Interpretation>> {
    let c = Compiled::new(program);
    let mut s = Search {
        c: &c,
        nodes: 0,
        max_nodes: limits.search_nodes,
        limit,
        found: Vec::new(),
    };
    if limit != Some(0) {
        s.run(vec![Val::Unknown; c.atoms.len()])?;
    }
    let mut found = s.found;
    found.sort();
    Ok(found)
}

/// Whether `model` is a minimal model of a set of ground rules (aggregates
/// allowed in bodies). Atoms that every model below `model` must contain are
/// fixed first; the remaining subsets are checked exhaustively.
pub fn is_minimal_model(rules: &[Rule], model: &Interpretation, limits: &Limits) -> Result<bool> {
    if !is_model(model, rules)? {
        return Ok(false);
    }
    let mut lower = Interpretation::new();
    loop {
        let mut changed = false;
        for r in rules {
            let Head::Atom(h) = &r.head else {
                continue;
            };
            if lower.contains(h) || !model.contains(h) {
                continue;
            }
            if !r.pos.iter().all(|a| lower.contains(a)) || r.neg.iter().any(|a| model.contains(a)) {
                continue;
            }
            let mut forced = true;
            for g in &r.aggs {
                let matching: Vec<Atom> = model
                    .with_predicate(&g.spec.pattern.predicate)
                    .filter(|a| aggregates::match_pattern(&g.spec, a).is_some())
                    .cloned()
                    .collect();
                let (fixed, free): (Vec<Atom>, Vec<Atom>) = matching.into_iter().partition(|a| lower.contains(a));
                if aggregates::true_on_interval(g, &fixed, &free)? != Some(true) {
                    forced = false;
                    break;
                }
            }
            if forced {
                lower.insert(h.clone());
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let free: Vec<&Atom> = model.iter().filter(|a| !lower.contains(a)).collect();
    if free.len() > limits.minimal_model {
        return Err(Error::resource(
            "undetermined atoms in minimal-model check",
            free.len() as u128,
            limits.minimal_model as u128,
        ));
    }
    let full = (1u64 << free.len()) - 1;
    for m in 0..full {
        let mut cand = lower.clone();
        for (i, a) in free.iter().enumerate() {
            if m >> i & 1 == 1 {
                cand.insert((*a).clone());
            }
        }
        if is_model(&cand, rules)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Constant;

    fn a(n: &str) -> Atom {
        Atom::prop(n)
    }

    fn rule(h: Option<&str>, pos: &[&str], neg: &[&str]) -> NormalRule {
        NormalRule {
            head: h.map(a),
            pos: pos.iter().map(|n| a(n)).collect(),
            neg: neg.iter().map(|n| a(n)).collect(),
        }
    }

    fn interp(ns: &[&str]) -> Interpretation {
        ns.iter().map(|n| a(n)).collect()
    }

    #[test]
    fn least_model_and_constraints() {
        let d = DefiniteProgram {
            rules: vec![
                DefiniteRule { head: Some(a("p")), pos: BTreeSet::new() },
                DefiniteRule { head: Some(a("q")), pos: [a("p")].into() },
                DefiniteRule { head: Some(a("r")), pos: [a("s")].into() },
            ],
        };
        assert_eq!(least_model(&d), Some(interp(&["p", "q"])));
        let mut d2 = d.clone();
        d2.rules.push(DefiniteRule { head: None, pos: [a("q")].into() });
        assert_eq!(least_model(&d2), None);
    }

    #[test]
    fn even_loop_has_two_answer_sets() {
        let p: NormalProgram = [rule(Some("p"), &[], &["q"]), rule(Some("q"), &[], &["p"])].into_iter().collect();
        let all = enumerate_answer_sets(&p, None, &Limits::default()).unwrap();
        assert_eq!(all, vec![interp(&["p"]), interp(&["q"])]);
        assert!(is_answer_set(&p, &interp(&["p"])));
        assert!(!is_answer_set(&p, &interp(&["p", "q"])));
    }

    #[test]
    fn odd_loop_has_none() {
        let p: NormalProgram = [rule(Some("p"), &[], &["p"])].into_iter().collect();
        assert!(enumerate_answer_sets(&p, None, &Limits::default()).unwrap().is_empty());
    }

    #[test]
    fn positive_loop_is_unfounded() {
        let p: NormalProgram = [rule(Some("p"), &["q"], &[]), rule(Some("q"), &["p"], &[])].into_iter().collect();
        assert_eq!(enumerate_answer_sets(&p, None, &Limits::default()).unwrap(), vec![interp(&[])]);
    }

    #[test]
    fn limit_stops_early() {
        let p: NormalProgram = [rule(Some("p"), &[], &["q"]), rule(Some("q"), &["x"], &["p"]), rule(Some("x"), &[], &[])]
            .into_iter()
            .collect();
        assert_eq!(enumerate_answer_sets(&p, Some(1), &Limits::default()).unwrap().len(), 1);
    }

    #[test]
    fn minimal_model_check() {
        let r = |src: &str| crate::parser::parse_rule(src).unwrap();
        let rules = vec![r("p(1) :- SUM{X : p(X)} >= 0."), r("p(1) :- p(-1)."), r("p(-1) :- p(1).")];
        let m: Interpretation = [Atom::ground("p", [Constant::int(1)]), Atom::ground("p", [Constant::int(-1)])]
            .into_iter()
            .collect();
        assert!(is_minimal_model(&rules, &m, &Limits::default()).unwrap());
        let big: Interpretation = m.iter().cloned().chain([Atom::ground("p", [Constant::int(2)])]).collect();
        assert!(!is_minimal_model(&rules, &big, &Limits::default()).unwrap());
    }
}
