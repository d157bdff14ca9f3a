//! Answer sets of programs with aggregates, and the reference semantics they
//! are compared against.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::aggregates::{self, Tristate};
use crate::ast::{is_model, Atom, Head, Interpretation, Program, Rule};
use crate::config::{Config, Limits, SolutionMode};
use crate::error::{Error, Result};
use crate::grounder::{self, edb_facts, edb_predicates, GroundProgram};
use crate::solver::{self, least_model, DefiniteProgram, DefiniteRule};
use crate::unfold;

/// Answer sets through the unfolding into a normal program. Programs with
/// aggregate heads are handled by [`enumerate_aspa_general`].
pub fn aspa_answer_sets(
    ground: &GroundProgram,
    mode: SolutionMode,
    limit: Option<usize>,
    limits: &Limits,
) -> Result<Vec<Interpretation>> {
    if ground.has_aggregate_heads() {
        return enumerate_aspa_general(ground, limit, limits);
    }
    let normal = unfold::unfold_program(ground, mode, limits)?;
    solver::enumerate_answer_sets(&normal, limit, limits)
}

/// Checks `model` directly: head reduct, unfolding relative to `model`, and
/// comparison with the least model of the resulting definite program.
pub fn is_aspa_answer_set(ground: &GroundProgram, model: &Interpretation, limits: &Limits) -> Result<bool> {
    let reduct = unfold::head_reduct(ground, model, limits)?;
    let definite = unfold::unfold_program_wrt(&reduct, model, limits)?;
    Ok(least_model(&definite).as_ref() == Some(model))
}

/// Atoms that can belong to an answer set: rule heads and the bases of head
/// aggregates. The second component are heads of facts, which every answer
/// set contains.
fn candidate_atoms(ground: &GroundProgram) -> Result<(BTreeSet<Atom>, BTreeSet<Atom>)> {
    let mut atoms = BTreeSet::new();
    let mut facts = BTreeSet::new();
    for r in ground.rules() {
        match &r.head {
            Head::Atom(a) => {
                atoms.insert(a.clone());
                if r.body_is_empty() {
                    facts.insert(a.clone());
                }
            }
            Head::Aggregate(g) => atoms.extend(ground.base(g)?.iter().cloned()),
            Head::Falsum => {}
        }
    }
    Ok((atoms, facts))
}

fn generate_and_test(
    ground: &GroundProgram,
    limit: Option<usize>,
    limits: &Limits,
    test: &mut dyn FnMut(&Interpretation) -> Result<bool>,
) -> Result<Vec<Interpretation>> {
    let (atoms, facts) = candidate_atoms(ground)?;
    let free: Vec<&Atom> = atoms.iter().filter(|a| !facts.contains(*a)).collect();
    if free.len() > limits.candidate_base {
        return Err(Error::resource(
            "undetermined atoms in candidate enumeration",
            free.len() as u128,
            limits.candidate_base as u128,
        ));
    }
    let mut out = Vec::new();
    for m in 0..1u64 << free.len() {
        if limit.is_some_and(|l| out.len() >= l) {
            break;
        }
        let mut cand: Interpretation = facts.iter().cloned().collect();
        for (i, a) in free.iter().enumerate() {
            if m >> i & 1 == 1 {
                cand.insert((*a).clone());
            }
        }
        if test(&cand)? {
            out.push(cand);
        }
    }
    out.sort();
    Ok(out)
}

/// Answer sets by generate-and-test over the candidate atoms, using
/// [`is_aspa_answer_set`]. Works with aggregate heads.
pub fn enumerate_aspa_general(
    ground: &GroundProgram,
    limit: Option<usize>,
    limits: &Limits,
) -> Result<Vec<Interpretation>> {
    generate_and_test(ground, limit, limits, &mut |m| is_aspa_answer_set(ground, m, limits))
}

/// Rules whose body is true in `s`.
pub fn flp_reduct(ground: &GroundProgram, s: &Interpretation) -> Result<GroundProgram> {
    let mut rules = Vec::new();
    for r in ground.rules() {
        if r.body_holds(s)? {
            rules.push(r.clone());
        }
    }
    ground.with_rules(rules)
}

/// `s` is a minimal model of its FLP reduct.
pub fn is_flp_answer_set(ground: &GroundProgram, s: &Interpretation, limits: &Limits) -> Result<bool> {
    if !s.is_subset(ground.possible_atoms()) {
        return Ok(false);
    }
    let reduct = flp_reduct(ground, s)?;
    solver::is_minimal_model(reduct.rules(), s, limits)
}

pub fn enumerate_flp(ground: &GroundProgram, limit: Option<usize>, limits: &Limits) -> Result<Vec<Interpretation>> {
    generate_and_test(ground, limit, limits, &mut |m| is_flp_answer_set(ground, m, limits))
}

/// `m` is the least model of the program obtained by deleting rules with an
/// aggregate or negated literal false in `m` and then deleting all remaining
/// aggregates and negated literals.
///
/// Unless the program was ground with [`Config::relaxed_closure`], rules that
/// only fire for interpretations outside the possibly true atoms are missing,
/// so such interpretations are reported as an error.
pub fn is_stable_set(ground: &GroundProgram, m: &Interpretation) -> Result<bool> {
    if !ground.relaxed_closure() && !m.is_subset(ground.possible_atoms()) {
        return Err(Error::Uncovered(format!(
            "{m} is not covered by the grounding; ground with the relaxed closure"
        )));
    }
    let mut rules = Vec::new();
    for r in ground.rules() {
        let head = match &r.head {
            Head::Atom(a) => Some(a.clone()),
            Head::Falsum => None,
            Head::Aggregate(_) => return Err(Error::AggregateHead),
        };
        if r.neg.iter().any(|a| m.contains(a)) {
            continue;
        }
        let mut keep = true;
        for g in &r.aggs {
            if !aggregates::evaluate(m, g)? {
                keep = false;
                break;
            }
        }
        if keep {
            rules.push(DefiniteRule {
                head,
                pos: r.pos.iter().cloned().collect(),
            });
        }
    }
    Ok(least_model(&DefiniteProgram { rules }).as_ref() == Some(m))
}

/// Every atom of `m` is the head of a rule whose body is true in `m`.
pub fn is_supported(ground: &GroundProgram, m: &Interpretation) -> Result<bool> {
    let mut supported = BTreeSet::new();
    for r in ground.rules() {
        if let Head::Atom(a) = &r.head {
            if m.contains(a) && !supported.contains(a) && r.body_holds(m)? {
                supported.insert(a.clone());
            }
        }
    }
    Ok(supported.len() == m.len())
}

/// Acceptance of one interpretation under each semantics. `None` marks a
/// semantics that does not apply (aggregate heads) or exceeded a limit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub interpretation: Interpretation,
    pub model: bool,
    /// Answer set of the unfolded normal program.
    pub aspa_static: Option<bool>,
    /// Least model of the unfolding relative to the interpretation.
    pub aspa_wrt: bool,
    pub flp: Option<bool>,
    pub stable_set: Option<bool>,
}

impl Verdict {
    pub fn aspa(&self) -> bool {
        self.aspa_wrt
    }
}

fn unless_resource(r: Result<bool>) -> Result<Option<bool>> {
    match r {
        Ok(b) => Ok(Some(b)),
        Err(Error::Resource { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn verdict(ground: &GroundProgram, m: &Interpretation, config: &Config) -> Result<Verdict> {
    let limits = &config.limits;
    let heads = ground.has_aggregate_heads();
    let aspa_wrt = is_aspa_answer_set(ground, m, limits)?;
    let aspa_static = if heads {
        None
    } else {
        unless_resource(
            unfold::unfold_program(ground, config.solution_mode, limits).map(|n| solver::is_answer_set(&n, m)),
        )?
    };
    if aspa_static.is_some_and(|s| s != aspa_wrt) {
        return Err(Error::Inconsistent(format!(
            "the two answer-set checks disagree on {m}"
        )));
    }
    Ok(Verdict {
        interpretation: m.clone(),
        model: is_model(m, ground.rules())?,
        aspa_static,
        aspa_wrt,
        flp: if heads { None } else { unless_resource(is_flp_answer_set(ground, m, limits))? },
        stable_set: match is_stable_set(ground, m) {
            _ if heads => None,
            Ok(b) => Some(b),
            Err(Error::Uncovered(_)) => None,
            Err(e) => return Err(e),
        },
    })
}

fn violated_constraint(rules: &[Rule], m: &Interpretation) -> Result<Option<String>> {
    for r in rules {
        if r.head == Head::Falsum && r.body_holds(m)? {
            return Ok(Some(format!("{r}")));
        }
    }
    Ok(None)
}

/// The perfect model of an aggregate-stratified program, computed level by
/// level. A violated constraint yields [`Error::Inconsistent`].
pub fn perfect_model(program: &Program, ground: &GroundProgram) -> Result<Interpretation> {
    if program.has_aggregate_heads() || ground.has_aggregate_heads() {
        return Err(Error::AggregateHead);
    }
    let levels = grounder::stratification_levels(program).ok_or(Error::NotStratified)?;
    let mut m = Interpretation::new();
    for level in 0..=levels.max_level() {
        let rules: Vec<&Rule> = ground
            .rules()
            .iter()
            .filter(|r| matches!(&r.head, Head::Atom(a) if levels.level(&a.predicate_key()) == level))
            .collect();
        loop {
            let mut new = Vec::new();
            for r in &rules {
                if let Head::Atom(a) = &r.head {
                    if !m.contains(a) && r.body_holds(&m)? {
                        new.push(a.clone());
                    }
                }
            }
            if new.is_empty() {
                break;
            }
            for a in new {
                m.insert(a);
            }
        }
    }
    if let Some(r) = violated_constraint(ground.rules(), &m)? {
        return Err(Error::Inconsistent(format!("constraint {r} is violated")));
    }
    Ok(m)
}

/// The least fixpoint of the immediate-consequence operator that keeps the
/// fact-only predicates fixed to their facts, together with those facts.
pub fn monotone_fixpoint(program: &Program, ground: &GroundProgram, limits: &Limits) -> Result<Interpretation> {
    let class = grounder::classify(program, ground, limits)?;
    if class.monotone != Tristate::Yes {
        return Err(Error::NotMonotone);
    }
    let edb = edb_predicates(program);
    let base = edb_facts(program, &edb);
    let mut m = base.clone();
    loop {
        let mut new = Vec::new();
        for r in ground.rules() {
            if let Head::Atom(a) = &r.head {
                if !edb.contains(&a.predicate_key()) && !m.contains(a) && r.body_holds(&m)? {
                    new.push(a.clone());
                }
            }
        }
        if new.is_empty() {
            break;
        }
        for a in new {
            m.insert(a);
        }
    }
    if let Some(r) = violated_constraint(ground.rules(), &m)? {
        return Err(Error::Inconsistent(format!("constraint {r} is violated")));
    }
    Ok(m)
}

/// Answer sets under each semantics, with every broken implication listed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CrossCheckReport {
    pub aspa: Vec<Interpretation>,
    /// Present when the program is small enough for generate-and-test.
    pub flp: Option<Vec<Interpretation>>,
    pub perfect_model: Option<Interpretation>,
    pub monotone_fixpoint: Option<Interpretation>,
    /// Implications that must hold but do not.
    pub failures: Vec<String>,
    /// Expected divergences, e.g. FLP answer sets that are not answer sets here.
    pub notes: Vec<String>,
}

impl CrossCheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Computes answer sets with both solution modes and with the direct check,
/// then verifies the known relationships to the other semantics.
pub fn cross_check(program: &Program, ground: &GroundProgram, config: &Config) -> Result<CrossCheckReport> {
    let limits = &config.limits;
    let mut report = CrossCheckReport::default();
    let aspa = aspa_answer_sets(ground, config.solution_mode, None, limits)?;

    if !ground.has_aggregate_heads() {
        let other = match config.solution_mode {
            SolutionMode::Full => SolutionMode::Minimal,
            SolutionMode::Minimal => SolutionMode::Full,
        };
        match aspa_answer_sets(ground, other, None, limits) {
            Ok(alt) if alt != aspa => report
                .failures
                .push(String::from("full and minimal solution sets give different answer sets")),
            Ok(_) | Err(Error::Resource { .. }) => {}
            Err(e) => return Err(e),
        }
        match enumerate_aspa_general(ground, None, limits) {
            Ok(direct) if direct != aspa => report
                .failures
                .push(String::from("unfolding and the direct answer-set check disagree")),
            Ok(_) | Err(Error::Resource { .. }) => {}
            Err(e) => return Err(e),
        }
    }

    for m in &aspa {
        if !is_model(m, ground.rules())? {
            report.failures.push(format!("answer set {m} is not a model"));
        }
        if !ground.has_aggregate_heads() {
            if !is_supported(ground, m)? {
                report.failures.push(format!("answer set {m} is not supported"));
            }
            match solver::is_minimal_model(ground.rules(), m, limits) {
                Ok(true) | Err(Error::Resource { .. }) => {}
                Ok(false) => report.failures.push(format!("answer set {m} is not a minimal model")),
                Err(e) => return Err(e),
            }
        }
        match is_flp_answer_set(ground, m, limits) {
            Ok(true) | Err(Error::Resource { .. }) => {}
            // With aggregate heads the FLP reduct also demands minimality
            // among the head choices, so the inclusion is not expected.
            Ok(false) if ground.has_aggregate_heads() => {
                report.notes.push(format!("answer set {m} is not an FLP answer set"));
            }
            Ok(false) => report.failures.push(format!("answer set {m} is not an FLP answer set")),
            Err(e) => return Err(e),
        }
        if !ground.has_aggregate_heads() && !is_stable_set(ground, m)? {
            report.failures.push(format!("answer set {m} is not a stable set"));
        }
    }

    match enumerate_flp(ground, None, limits) {
        Ok(flp) => {
            let normal = if ground.has_aggregate_heads() {
                None
            } else {
                Some(unfold::unfold_program(ground, config.solution_mode, limits)?)
            };
            for s in &flp {
                if !aspa.contains(s) {
                    report.notes.push(format!("FLP answer set {s} is not an answer set"));
                }
                if let Some(n) = &normal {
                    let rules: Vec<Rule> = n
                        .rules()
                        .iter()
                        .map(|r| Rule {
                            head: r.head.clone().map_or(Head::Falsum, Head::Atom),
                            aggs: Vec::new(),
                            pos: r.pos.iter().cloned().collect(),
                            neg: r.neg.iter().cloned().collect(),
                            builtins: Vec::new(),
                        })
                        .collect();
                    if !solver::is_minimal_model(&rules, s, limits)? {
                        report
                            .failures
                            .push(format!("FLP answer set {s} is not a minimal model of the unfolding"));
                    }
                }
            }
            report.flp = Some(flp);
        }
        Err(Error::Resource { .. }) => {}
        Err(e) => return Err(e),
    }

    let class = grounder::classify(program, ground, limits)?;
    if class.stratification.is_some() && !class.has_aggregate_heads {
        match perfect_model(program, ground) {
            Ok(pm) => {
                if aspa != [pm.clone()] {
                    report
                        .failures
                        .push(format!("stratified program: answer sets differ from the perfect model {pm}"));
                }
                report.perfect_model = Some(pm);
            }
            Err(Error::Inconsistent(_)) => {
                if !aspa.is_empty() {
                    report
                        .failures
                        .push(String::from("stratified program with violated constraint has answer sets"));
                }
            }
            Err(e) => return Err(e),
        }
    }
    if class.monotone == Tristate::Yes && !class.has_constraints {
        let fm = monotone_fixpoint(program, ground, limits)?;
        if aspa != [fm.clone()] {
            report
                .failures
                .push(format!("monotone program: answer sets differ from the fixpoint {fm}"));
        }
        report.monotone_fixpoint = Some(fm);
    }
    report.aspa = aspa;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grounder::ground_program;
    use crate::parser::{parse_interpretation, parse_program};

    fn setup(src: &str) -> (Program, GroundProgram) {
        let p = parse_program(src).unwrap();
        let g = ground_program(&p, &Config::default()).unwrap();
        (p, g)
    }

    fn sets(v: &[&str]) -> Vec<Interpretation> {
        v.iter().map(|s| parse_interpretation(s).unwrap()).collect()
    }

    #[test]
    fn count_with_even_loop() {
        let (_, g) = setup("p(a) :- COUNT{X : p(X)} > 0. p(b) :- not q. q :- not p(b).");
        let all = aspa_answer_sets(&g, SolutionMode::Minimal, None, &Limits::default()).unwrap();
        assert_eq!(all, sets(&["p(a), p(b)", "q"]));
    }

    #[test]
    fn self_supporting_sum_is_rejected_here_but_not_by_flp() {
        let (p, g) = setup("p(1) :- SUM{X : p(X)} >= 0. p(1) :- p(-1). p(-1) :- p(1).");
        let l = Limits::default();
        assert!(aspa_answer_sets(&g, SolutionMode::Minimal, None, &l).unwrap().is_empty());
        let m = parse_interpretation("p(1), p(-1)").unwrap();
        assert!(is_flp_answer_set(&g, &m, &l).unwrap());
        assert!(!is_aspa_answer_set(&g, &m, &l).unwrap());
        let r = cross_check(&p, &g, &Config::default()).unwrap();
        assert!(r.passed(), "{:?}", r.failures);
        assert_eq!(r.notes.len(), 1);
    }

    #[test]
    fn stable_set_is_weaker() {
        let src = "p(1). p(2). p(3). p(5) :- q. q :- SUM{X : p(X)} > 10.";
        let (_, g) = setup(src);
        let m = parse_interpretation("p(1), p(2), p(3), p(5), q").unwrap();
        assert!(is_stable_set(&g, &m).is_err());
        let config = Config {
            relaxed_closure: true,
            ..Config::default()
        };
        let g = ground_program(&parse_program(src).unwrap(), &config).unwrap();
        assert!(is_stable_set(&g, &m).unwrap());
        assert!(!is_aspa_answer_set(&g, &m, &Limits::default()).unwrap());
    }

    #[test]
    fn perfect_and_monotone_models() {
        let (p, g) = setup("e(1). e(2). t :- SUM{X : e(X)} >= 3. u :- not t.");
        assert_eq!(perfect_model(&p, &g).unwrap(), parse_interpretation("e(1), e(2), t").unwrap());
        assert!(matches!(monotone_fixpoint(&p, &g, &Limits::default()), Err(Error::NotMonotone)));
        let (p, g) = setup("e(1). e(2). t :- SUM{X : e(X)} >= 3. u :- t.");
        assert_eq!(
            monotone_fixpoint(&p, &g, &Limits::default()).unwrap(),
            parse_interpretation("e(1), e(2), t, u").unwrap()
        );
    }

    #[test]
    fn aggregate_heads_by_generate_and_test() {
        let (_, g) = setup(
            "student(a). student(b). student(c). COUNT{X : gotA(X)} >= 2. :- gotA(X), not student(X).",
        );
        let all = aspa_answer_sets(&g, SolutionMode::Minimal, None, &Limits::default()).unwrap();
        assert_eq!(all.len(), 4);
        assert!(all.iter().all(|m| m.with_predicate("gotA").count() >= 2));
    }
}
