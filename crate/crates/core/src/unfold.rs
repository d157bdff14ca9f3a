//! Unfolding of aggregate atoms into ordinary literals.
//!
//! A ground rule with aggregates becomes one normal rule per choice of a
//! solution for each of its aggregates: the chosen `p` atoms join the positive
//! body and the chosen `n` atoms join the negative body.

pub mod weights;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use crate::aggregates::{self, SolutionSet, SolutionTable};
use crate::ast::{AggregateAtom, Atom, Head, Interpretation, Rule};
use crate::config::{Limits, SolutionMode};
use crate::error::{Error, Result};
use crate::grounder::GroundProgram;
pub use crate::solver::{DefiniteProgram, DefiniteRule, NormalProgram, NormalRule};

/// Solution sets for every aggregate atom in a rule body.
pub fn solution_sets(ground: &GroundProgram, mode: SolutionMode, limits: &Limits) -> Result<SolutionTable> {
    let mut out = BTreeMap::new();
    for g in ground.body_aggregates() {
        let base = ground.base(g)?;
        let set = match mode {
            SolutionMode::Full => aggregates::all_solutions(g, base, limits)?,
            SolutionMode::Minimal => aggregates::minimal_complete_solutions(g, base, limits)?,
        };
        out.insert(g.clone(), set);
    }
    Ok(out)
}

fn product_size<'a>(sets: impl Iterator<Item = &'a SolutionSet>, limit: usize) -> Result<usize> {
    let mut n: u128 = 1;
    for s in sets {
        n = n.saturating_mul(s.len() as u128);
    }
    if n > limit as u128 {
        return Err(Error::resource("unfolded rules", n, limit as u128));
    }
    Ok(n as usize)
}

fn head_atom(rule: &Rule) -> Result<Option<Atom>> {
    match &rule.head {
        Head::Atom(a) => Ok(Some(a.clone())),
        Head::Falsum => Ok(None),
        Head::Aggregate(_) => Err(Error::AggregateHead),
    }
}

/// The unfolding of one ground rule with respect to the given solution sets.
pub fn unfold_rule(rule: &Rule, table: &SolutionTable, limits: &Limits) -> Result<Vec<NormalRule>> {
    if !rule.is_ground() {
        return Err(Error::NonGround(format!("{rule}")));
    }
    let head = head_atom(rule)?;
    let sets: Vec<&SolutionSet> = rule
        .aggs
        .iter()
        .map(|g| table.get(g).ok_or_else(|| Error::MissingSolutions(format!("{g}"))))
        .collect::<Result<_>>()?;
    let total = product_size(sets.iter().copied(), limits.max_ground_rules)?;
    let mut out = Vec::with_capacity(total);
    if total == 0 {
        return Ok(out);
    }
    let mut idx = alloc::vec![0usize; sets.len()];
    loop {
        let mut pos: BTreeSet<Atom> = rule.pos.iter().cloned().collect();
        let mut neg: BTreeSet<Atom> = rule.neg.iter().cloned().collect();
        for (s, &i) in sets.iter().zip(&idx) {
            pos.extend(s.solutions[i].p.iter().cloned());
            neg.extend(s.solutions[i].n.iter().cloned());
        }
        out.push(NormalRule {
            head: head.clone(),
            pos,
            neg,
        });
        let mut k = 0;
        while k < idx.len() {
            idx[k] += 1;
            if idx[k] < sets[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == idx.len() {
            break;
        }
    }
    Ok(out)
}

/// The unfolding of a ground program without aggregate heads.
pub fn unfold_program(ground: &GroundProgram, mode: SolutionMode, limits: &Limits) -> Result<NormalProgram> {
    if ground.has_aggregate_heads() {
        return Err(Error::AggregateHead);
    }
    let table = solution_sets(ground, mode, limits)?;
    unfold_with(ground, &table, limits)
}

/// The unfolding of a ground program with caller-supplied solution sets.
pub fn unfold_with(ground: &GroundProgram, table: &SolutionTable, limits: &Limits) -> Result<NormalProgram> {
    let mut out = NormalProgram::new();
    for r in ground.rules() {
        for n in unfold_rule(r, table, limits)? {
            out.push(n);
            if out.len() > limits.max_ground_rules {
                return Err(Error::resource(
                    "unfolded rules",
                    out.len() as u128,
                    limits.max_ground_rules as u128,
                ));
            }
        }
    }
    Ok(out)
}

/// The definite program obtained by unfolding with respect to `model`: rules
/// whose negative body meets `model`, or with an aggregate lacking solutions
/// relative to `model`, are dropped; the others get one rule per combination
/// of the positive parts of those solutions.
pub fn unfold_program_wrt(ground: &GroundProgram, model: &Interpretation, limits: &Limits) -> Result<DefiniteProgram> {
    let mut cache: BTreeMap<&AggregateAtom, Vec<BTreeSet<Atom>>> = BTreeMap::new();
    let mut out: Vec<DefiniteRule> = Vec::new();
    let mut seen: BTreeSet<DefiniteRule> = BTreeSet::new();
    for r in ground.rules() {
        if !r.is_ground() {
            return Err(Error::NonGround(format!("{r}")));
        }
        let head = head_atom(r)?;
        if r.neg.iter().any(|a| model.contains(a)) {
            continue;
        }
        let mut choices: Vec<&Vec<BTreeSet<Atom>>> = Vec::with_capacity(r.aggs.len());
        for g in &r.aggs {
            if !cache.contains_key(g) {
                let base = ground.base(g)?;
                let sols = aggregates::m_solutions(g, base, model, limits)?;
                let mut ps: Vec<BTreeSet<Atom>> = sols.solutions.into_iter().map(|s| s.p).collect();
                ps.sort();
                ps.dedup();
                cache.insert(g, ps);
            }
        }
        for g in &r.aggs {
            choices.push(&cache[g]);
        }
        if choices.iter().any(|c| c.is_empty()) {
            continue;
        }
        let mut n: u128 = 1;
        for c in &choices {
            n = n.saturating_mul(c.len() as u128);
        }
        if n + out.len() as u128 > limits.max_ground_rules as u128 {
            return Err(Error::resource(
                "unfolded rules",
                n + out.len() as u128,
                limits.max_ground_rules as u128,
            ));
        }
        let mut idx = alloc::vec![0usize; choices.len()];
        loop {
            let mut pos: BTreeSet<Atom> = r.pos.iter().cloned().collect();
            for (c, &i) in choices.iter().zip(&idx) {
                pos.extend(c[i].iter().cloned());
            }
            let d = DefiniteRule {
                head: head.clone(),
                pos,
            };
            if seen.insert(d.clone()) {
                out.push(d);
            }
            let mut k = 0;
            while k < idx.len() {
                idx[k] += 1;
                if idx[k] < choices[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == idx.len() {
                break;
            }
        }
    }
    Ok(DefiniteProgram { rules: out })
}

/// Replaces each rule with an aggregate head: by a constraint with the same
/// body when the head aggregate has no solution relative to `model`, and
/// otherwise by one rule `p :- body` for every atom `p` of the head's base
/// that is true in `model`.
pub fn head_reduct(ground: &GroundProgram, model: &Interpretation, _limits: &Limits) -> Result<GroundProgram> {
    let mut rules = Vec::with_capacity(ground.rules().len());
    for r in ground.rules() {
        let Head::Aggregate(h) = &r.head else {
            rules.push(r.clone());
            continue;
        };
        let base = ground.base(h)?;
        if !aggregates::has_m_solution(h, base, model)? {
            rules.push(Rule {
                head: Head::Falsum,
                ..r.clone()
            });
            continue;
        }
        for p in base.iter().filter(|a| model.contains(a)) {
            rules.push(Rule {
                head: Head::Atom(p.clone()),
                ..r.clone()
            });
        }
    }
    let mut seen = BTreeSet::new();
    rules.retain(|r| seen.insert(r.clone()));
    ground.with_rules(rules)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;
    use crate::grounder::ground_program;
    use crate::parser::parse_program;

    fn ground(src: &str) -> GroundProgram {
        ground_program(&parse_program(src).unwrap(), &Config::default()).unwrap()
    }

    #[test]
    fn unfolding_of_a_count_rule() {
        let g = ground("p(a) :- COUNT{X : p(X)} > 0. p(b) :- not q. q :- not p(b).");
        let n = unfold_program(&g, SolutionMode::Minimal, &Limits::default()).unwrap();
        let text: BTreeSet<alloc::string::String> = n.rules().iter().map(|r| format!("{r}")).collect();
        assert!(text.contains("p(a) :- p(a)."));
        assert!(text.contains("p(a) :- p(b)."));
        let full = unfold_program(&g, SolutionMode::Full, &Limits::default()).unwrap();
        assert_eq!(full.len(), 5 + 2);
    }

    #[test]
    fn head_reduct_replaces_aggregate_heads() {
        let g = ground("s(a). s(b). COUNT{X : g(X)} >= 1 :- s(a).");
        let m: Interpretation = crate::parser::parse_interpretation("s(a), s(b), g(b)").unwrap();
        let h = head_reduct(&g, &m, &Limits::default()).unwrap();
        assert!(!h.has_aggregate_heads());
        assert!(h.rules().iter().any(|r| format!("{r}") == "g(b) :- s(a)."));
        let m2: Interpretation = crate::parser::parse_interpretation("s(a), s(b)").unwrap();
        let h2 = head_reduct(&g, &m2, &Limits::default()).unwrap();
        assert!(h2.rules().iter().any(|r| r.head == Head::Falsum));
    }

    #[test]
    fn aggregate_heads_are_rejected_by_plain_unfolding() {
        let g = ground("s(a). COUNT{X : g(X)} >= 1 :- s(a).");
        assert_eq!(
            unfold_program(&g, SolutionMode::Minimal, &Limits::default()),
            Err(Error::AggregateHead)
        );
    }
}
