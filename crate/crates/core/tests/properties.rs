use std::collections::BTreeSet;

use proptest::prelude::*;
use proptest::sample::select;

use aspa_core::aggregates::{
    all_solutions, covers, m_solutions, minimal_complete_solutions, AggregateSolution,
};
use aspa_core::ast::{is_model, satisfies, Literal};
use aspa_core::grounder::{dependency_graph, ground_program, stratification_levels, EdgeKind};
use aspa_core::parser::{format_program, parse_atom, parse_program, parse_weight_program};
use aspa_core::semantics::{aspa_answer_sets, is_aspa_answer_set};
use aspa_core::solver::{
    enumerate_answer_sets, gl_reduct, least_model, tp_step, DefiniteProgram, DefiniteRule, NormalProgram,
    NormalRule,
};
use aspa_core::unfold::{self, weights::translate_weight_program};
use aspa_core::{AggregateAtom, Atom, BaseMode, Config, GroundProgram, Interpretation, Limits, SolutionMode};

const FUNCS: [&str; 5] = ["COUNT", "SUM", "MIN", "MAX", "AVG"];
const RELS: [&str; 6] = ["=", "!=", "<", "<=", ">", ">="];

fn limits() -> Limits {
    Limits::default()
}

fn ground(p: &aspa_core::Program) -> GroundProgram {
    ground_program(p, &Config::default()).unwrap()
}

fn atom() -> impl Strategy<Value = String> {
    prop_oneof![
        4 => select(vec![-1i64, 1, 2, 3, 5]).prop_map(|v| format!("p({v})")),
        2 => select(vec![1i64, 2]).prop_map(|v| format!("q({v})")),
        3 => select(vec!["a", "b", "c"]).prop_map(String::from),
    ]
}

fn aggregate() -> impl Strategy<Value = String> {
    (select(FUNCS.to_vec()), select(RELS.to_vec()), -1i64..=6, any::<bool>(), select(vec!["p", "q"])).prop_map(
        |(f, r, g, multi, pred)| {
            if multi {
                format!("{f}{{{{ X : {pred}(X) }}}} {r} {g}")
            } else {
                format!("{f}{{ X : {pred}(X) }} {r} {g}")
            }
        },
    )
}

fn rule(heads: bool, negation: bool) -> impl Strategy<Value = String> {
    let head = if heads {
        prop_oneof![8 => atom(), 1 => Just(String::new()), 1 => aggregate()].boxed()
    } else {
        prop_oneof![8 => atom(), 1 => Just(String::new())].boxed()
    };
    let neg = if negation { 1 } else { 0 };
    (
        head,
        prop::collection::vec(atom(), 0..=2),
        prop::collection::vec(atom(), 0..=neg),
        prop::collection::vec(aggregate(), 0..=2),
    )
        .prop_map(|(h, pos, neg, aggs)| {
            let body: Vec<String> = pos
                .into_iter()
                .chain(neg.into_iter().map(|a| format!("not {a}")))
                .chain(aggs)
                .collect();
            match (h.is_empty(), body.is_empty()) {
                (true, true) => "a.".to_string(),
                (_, true) => format!("{h}."),
                _ => format!("{h} :- {}.", body.join(", ")),
            }
        })
}

fn program_with(heads: bool, negation: bool) -> impl Strategy<Value = String> {
    prop::collection::vec(rule(heads, negation), 1..=8).prop_map(|rs| rs.join("\n"))
}

fn program() -> impl Strategy<Value = String> {
    program_with(false, true)
}

/// A ground aggregate over `n` facts, with its independent truth table.
#[derive(Debug, Clone)]
struct Agg {
    text: String,
    function: &'static str,
    relation: &'static str,
    guard: i64,
    multiset: bool,
    values: Vec<i64>,
}

fn agg_case(max: usize) -> impl Strategy<Value = Agg> {
    (
        select(FUNCS.to_vec()),
        select(RELS.to_vec()),
        -3i64..=10,
        any::<bool>(),
        prop::collection::vec(-3i64..=6, 0..=max),
    )
        .prop_map(|(function, relation, guard, multiset, mut values)| {
            if !multiset {
                values.sort();
                values.dedup();
            }
            let text = if multiset {
                format!("{function}{{{{ X : w(I, X) }}}} {relation} {guard}")
            } else {
                format!("{function}{{ X : w(X) }} {relation} {guard}")
            };
            Agg { text, function, relation, guard, multiset, values }
        })
}

impl Agg {
    fn program(&self) -> String {
        let mut s = String::new();
        for (i, v) in self.values.iter().enumerate() {
            if self.multiset {
                s.push_str(&format!("w({i}, {v}).\n"));
            } else {
                s.push_str(&format!("w({v}).\n"));
            }
        }
        // A constraint keeps the rule even when the aggregate is unsatisfiable.
        s.push_str(&format!("t :- {}.\n:- t, {}.\n", self.text, self.text));
        s
    }

    fn truth(&self, values: &[i64]) -> bool {
        let n = values.len() as i64;
        let sum: i64 = values.iter().sum();
        let cmp = |l: i64, r: i64| match self.relation {
            "=" => l == r,
            "!=" => l != r,
            "<" => l < r,
            "<=" => l <= r,
            ">" => l > r,
            _ => l >= r,
        };
        match self.function {
            "COUNT" => cmp(n, self.guard),
            "SUM" => cmp(sum, self.guard),
            "MIN" => values.iter().min().is_some_and(|&m| cmp(m, self.guard)),
            "MAX" => values.iter().max().is_some_and(|&m| cmp(m, self.guard)),
            _ => n > 0 && cmp(sum, self.guard * n),
        }
    }

    /// The ground atom, its base, and the truth of every base subset.
    fn ground(&self) -> Option<(AggregateAtom, Vec<Atom>, Vec<bool>)> {
        let g = ground(&parse_program(&self.program()).unwrap());
        let (a, base) = g.aggregates().next()?;
        let value = |a: &Atom| -> i64 { a.constants().unwrap().last().unwrap().to_string().parse().unwrap() };
        let table = (0..1u32 << base.len())
            .map(|m| {
                let vals: Vec<i64> =
                    base.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, a)| value(a)).collect();
                self.truth(&vals)
            })
            .collect();
        Some((a.clone(), base.to_vec(), table))
    }
}

fn mask(base: &[Atom], s: &BTreeSet<Atom>) -> u32 {
    base.iter().enumerate().filter(|(_, a)| s.contains(a)).fold(0, |m, (i, _)| m | 1 << i)
}

fn masks(base: &[Atom], sols: &[AggregateSolution]) -> BTreeSet<(u32, u32)> {
    sols.iter().map(|s| (mask(base, &s.p), mask(base, &s.n))).collect()
}

fn implicant(table: &[bool], n: usize, p: u32, q: u32) -> bool {
    let free = ((1u32 << n) - 1) & !p & !q;
    let mut sub = free;
    loop {
        if !table[(p | sub) as usize] {
            return false;
        }
        if sub == 0 {
            return true;
        }
        sub = (sub - 1) & free;
    }
}

/// Every cube `(p, n)` with disjoint masks.
fn cubes(n: usize) -> impl Iterator<Item = (u32, u32)> {
    let full = (1u32 << n) - 1;
    (0..=full).flat_map(move |p| (0..=full).filter(move |q| q & p == 0).map(move |q| (p, q)))
}

fn subsets(atoms: &[Atom]) -> impl Iterator<Item = Interpretation> + '_ {
    (0..1u32 << atoms.len())
        .map(move |m| atoms.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, a)| a.clone()).collect())
}

fn normal_holds(m: &Interpretation, r: &NormalRule) -> bool {
    let body = r.pos.iter().all(|a| m.contains(a)) && !r.neg.iter().any(|a| m.contains(a));
    !body || r.head.as_ref().is_some_and(|h| m.contains(h))
}

fn definite_set(p: &DefiniteProgram) -> BTreeSet<DefiniteRule> {
    p.rules.iter().cloned().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn format_then_parse_is_identity(text in program_with(true, true)) {
        let p = parse_program(&text).unwrap();
        let again = parse_program(&format_program(&p)).unwrap();
        prop_assert_eq!(&again, &p);
        let g = ground(&p);
        let gp = g.to_program();
        if !gp.rules.is_empty() {
            prop_assert_eq!(parse_program(&format_program(&gp)).unwrap(), gp);
        }
    }

    #[test]
    fn minimal_solutions_are_the_prime_implicants(case in agg_case(7)) {
        let Some((a, base, table)) = case.ground() else { return Ok(()) };
        let n = base.len();
        let got = masks(&base, &minimal_complete_solutions(&a, &base, &limits()).unwrap().solutions);
        let primes: BTreeSet<(u32, u32)> = cubes(n)
            .filter(|&(p, q)| implicant(&table, n, p, q))
            .filter(|&(p, q)| (0..n).all(|i| {
                let b = 1 << i;
                !(p & b != 0 && implicant(&table, n, p & !b, q) || q & b != 0 && implicant(&table, n, p, q & !b))
            }))
            .collect();
        prop_assert_eq!(&got, &primes, "{}", case.text);
        for m in 0..1u32 << n {
            let covered = got.iter().any(|&(p, q)| m & p == p && m & q == 0);
            prop_assert_eq!(covered, table[m as usize]);
        }
    }

    #[test]
    fn minimal_solutions_do_not_cover_each_other(case in agg_case(7)) {
        let Some((a, base, table)) = case.ground() else { return Ok(()) };
        let sols = minimal_complete_solutions(&a, &base, &limits()).unwrap().solutions;
        for s in &sols {
            for t in &sols {
                prop_assert!(s == t || !covers(s, t));
            }
        }
        let n = base.len();
        let monotone = (0..1u32 << n).all(|m| !table[m as usize] || (0..n).all(|i| table[(m | 1 << i) as usize]));
        if monotone {
            prop_assert!(sols.iter().all(|s| s.n.is_empty()));
        }
    }

    #[test]
    fn full_solutions_are_every_implicant(case in agg_case(5)) {
        let Some((a, base, table)) = case.ground() else { return Ok(()) };
        let n = base.len();
        let full = all_solutions(&a, &base, &limits()).unwrap().solutions;
        let want: BTreeSet<(u32, u32)> = cubes(n).filter(|&(p, q)| implicant(&table, n, p, q)).collect();
        prop_assert_eq!(full.len(), want.len());
        prop_assert_eq!(masks(&base, &full), want);
    }

    #[test]
    fn solutions_are_closed_under_extension(case in agg_case(5)) {
        let Some((a, base, _)) = case.ground() else { return Ok(()) };
        let full: BTreeSet<AggregateSolution> =
            all_solutions(&a, &base, &limits()).unwrap().solutions.into_iter().collect();
        for s in &full {
            for x in base.iter().filter(|x| !s.p.contains(*x) && !s.n.contains(*x)) {
                let mut up = s.clone();
                up.p.insert(x.clone());
                let mut down = s.clone();
                down.n.insert(x.clone());
                prop_assert!(full.contains(&up) && full.contains(&down));
            }
        }
    }

    #[test]
    fn m_solutions_filter_the_full_set(case in agg_case(5), pick in any::<u32>()) {
        let Some((a, base, _)) = case.ground() else { return Ok(()) };
        let m: Interpretation =
            base.iter().enumerate().filter(|(i, _)| pick >> i & 1 == 1).map(|(_, a)| a.clone()).collect();
        let got = m_solutions(&a, &base, &m, &limits()).unwrap().solutions;
        let want: Vec<AggregateSolution> = all_solutions(&a, &base, &limits())
            .unwrap()
            .solutions
            .into_iter()
            .filter(|s| s.p.iter().all(|x| m.contains(x)) && !s.n.iter().any(|x| m.contains(x)))
            .collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn least_model_is_the_least_fixpoint(
        rules in prop::collection::vec((prop::option::weighted(0.9, 0usize..6), prop::collection::btree_set(0usize..6, 0..3)), 0..10)
    ) {
        let a = |i: usize| Atom::prop(&format!("x{i}"));
        let program = DefiniteProgram {
            rules: rules.iter().map(|(h, pos)| DefiniteRule { head: h.map(a), pos: pos.iter().map(|&i| a(i)).collect() }).collect(),
        };
        let atoms: Vec<Atom> = (0..6).map(a).collect();
        let models: Vec<Interpretation> = subsets(&atoms).filter(|m| {
            let (next, violated) = tp_step(&program, m);
            !violated && next.is_subset(m)
        }).collect();
        match least_model(&program) {
            Some(lm) => {
                let (next, violated) = tp_step(&program, &lm);
                prop_assert!(!violated);
                prop_assert_eq!(&next, &lm);
                prop_assert!(models.iter().all(|m| lm.is_subset(m)));
            }
            None => prop_assert!(models.is_empty()),
        }
    }

    #[test]
    fn answer_sets_match_brute_force(
        rules in prop::collection::vec((prop::option::weighted(0.9, 0usize..7), prop::collection::btree_set(0usize..7, 0..3), prop::collection::btree_set(0usize..7, 0..2)), 1..12)
    ) {
        let a = |i: usize| Atom::prop(&format!("x{i}"));
        let mut program = NormalProgram::new();
        for (h, pos, neg) in &rules {
            program.push(NormalRule { head: h.map(a), pos: pos.iter().map(|&i| a(i)).collect(), neg: neg.iter().map(|&i| a(i)).collect() });
        }
        let atoms: Vec<Atom> = (0..7).map(a).collect();
        let want: Vec<Interpretation> = subsets(&atoms)
            .filter(|m| least_model(&gl_reduct(&program, m)).as_ref() == Some(m))
            .collect();
        let mut got = enumerate_answer_sets(&program, None, &limits()).unwrap();
        got.sort();
        let mut want = want;
        want.sort();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn reduct_of_a_definite_program_is_itself(
        rules in prop::collection::vec((prop::option::of(0usize..5), prop::collection::btree_set(0usize..5, 0..3)), 0..8),
        pick in 0u32..32,
    ) {
        let a = |i: usize| Atom::prop(&format!("x{i}"));
        let mut program = NormalProgram::new();
        for (h, pos) in &rules {
            program.push(NormalRule { head: h.map(a), pos: pos.iter().map(|&i| a(i)).collect(), neg: BTreeSet::new() });
        }
        let m: Interpretation = (0..5).filter(|i| pick >> i & 1 == 1).map(a).collect();
        let reduct = gl_reduct(&program, &m);
        let back: BTreeSet<(Option<Atom>, BTreeSet<Atom>)> = program.rules().iter().map(|r| (r.head.clone(), r.pos.clone())).collect();
        let got: BTreeSet<(Option<Atom>, BTreeSet<Atom>)> = reduct.rules.iter().map(|r| (r.head.clone(), r.pos.clone())).collect();
        prop_assert_eq!(got, back);
    }

    #[test]
    fn ordinary_atoms_are_monotone(text in atom(), small in prop::collection::vec(atom(), 0..4), extra in prop::collection::vec(atom(), 0..4)) {
        let a = parse_atom(&text).unwrap();
        let i: Interpretation = small.iter().map(|s| parse_atom(s).unwrap()).collect();
        let mut j = i.clone();
        for s in &extra {
            j.insert(parse_atom(s).unwrap());
        }
        if satisfies(&i, Literal::Pos(&a)).unwrap() {
            prop_assert!(satisfies(&j, Literal::Pos(&a)).unwrap());
        }
    }

    #[test]
    fn models_survive_dropping_rules(text in program(), drop in any::<u32>(), pick in any::<u32>()) {
        let g = ground(&parse_program(&text).unwrap());
        let atoms: Vec<Atom> = g.atoms().into_iter().collect();
        let m: Interpretation = atoms.iter().enumerate().filter(|(i, _)| pick >> (i % 32) & 1 == 1).map(|(_, a)| a.clone()).collect();
        let fewer: Vec<_> = g.rules().iter().enumerate().filter(|(i, _)| drop >> (i % 32) & 1 == 0).map(|(_, r)| r.clone()).collect();
        if is_model(&m, g.rules()).unwrap() {
            prop_assert!(is_model(&m, &fewer).unwrap());
        }
    }

    #[test]
    fn grounding_is_ground_and_stable(text in program_with(true, true)) {
        let p = parse_program(&text).unwrap();
        let g = ground(&p);
        prop_assert!(g.rules().iter().all(|r| r.is_ground()));
        let herbrand = p.herbrand_base();
        let full = ground_program(&p, &Config { base_mode: BaseMode::FullPattern, ..Config::default() }).unwrap();
        for (a, base) in g.aggregates() {
            let wide: BTreeSet<&Atom> = full.base(a).unwrap().iter().collect();
            prop_assert!(base.iter().all(|x| wide.contains(x)), "{} {:?} {:?}", a, base, wide);
            prop_assert!(wide.iter().all(|x| herbrand.contains(*x)));
        }
        let again = ground(&g.to_program());
        let before: BTreeSet<String> = g.rules().iter().map(|r| r.to_string()).collect();
        let after: BTreeSet<String> = again.rules().iter().map(|r| r.to_string()).collect();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn stratification_levels_decrease(text in program_with(false, true)) {
        let p = parse_program(&text).unwrap();
        if let Some(levels) = stratification_levels(&p) {
            for e in dependency_graph(&p).edges {
                let (from, to) = (levels.level(&e.from), levels.level(&e.to));
                match e.kind {
                    EdgeKind::Positive => prop_assert!(from >= to),
                    _ => prop_assert!(from > to, "{:?}", e),
                }
            }
        }
    }

    #[test]
    fn base_modes_give_the_same_answer_sets(text in program()) {
        let p = parse_program(&text).unwrap();
        let narrow = aspa_answer_sets(&ground(&p), SolutionMode::Minimal, None, &limits()).unwrap();
        let full = ground_program(&p, &Config { base_mode: BaseMode::FullPattern, ..Config::default() }).unwrap();
        match aspa_answer_sets(&full, SolutionMode::Minimal, None, &limits()) {
            Ok(wide) => prop_assert_eq!(narrow, wide),
            Err(aspa_core::Error::Resource { .. }) => {}
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn unfolding_preserves_models(text in program()) {
        let g = ground(&parse_program(&text).unwrap());
        let normal = unfold::unfold_program(&g, SolutionMode::Full, &limits()).unwrap();
        // Bases only hold possibly true atoms, so other atoms are left out.
        let atoms: Vec<Atom> = g.possible_atoms().iter().cloned().collect();
        prop_assume!(atoms.len() <= 10);
        for m in subsets(&atoms) {
            let unfolded = normal.rules().iter().all(|r| normal_holds(&m, r));
            prop_assert_eq!(is_model(&m, g.rules()).unwrap(), unfolded, "{}", m);
        }
    }

    #[test]
    fn relative_unfolding_sits_inside_the_reduct(text in program(), pick in any::<u32>()) {
        let g = ground(&parse_program(&text).unwrap());
        let atoms: Vec<Atom> = g.atoms().into_iter().collect();
        let m: Interpretation = atoms.iter().enumerate().filter(|(i, _)| pick >> (i % 32) & 1 == 1).map(|(_, a)| a.clone()).collect();
        let full = unfold::unfold_program(&g, SolutionMode::Full, &limits()).unwrap();
        let reduct = definite_set(&gl_reduct(&full, &m));
        let wrt = definite_set(&unfold::unfold_program_wrt(&g, &m, &limits()).unwrap());
        prop_assert!(wrt.is_subset(&reduct));
        for r in reduct.iter().filter(|r| r.pos.iter().all(|a| m.contains(a))) {
            prop_assert!(wrt.contains(r), "{} missing", r);
        }
        let relative = is_aspa_answer_set(&g, &m, &limits()).unwrap();
        prop_assert_eq!(relative, least_model(&DefiniteProgram { rules: wrt.into_iter().collect() }).as_ref() == Some(&m));
    }

    #[test]
    fn weight_translation_preserves_truth(
        lits in prop::collection::vec((any::<bool>(), 0usize..4, 0i64..4), 0..5),
        lower in prop::option::of(0i64..6),
        upper in prop::option::of(0i64..6),
        facts in 0u32..16,
    ) {
        let name = |i: usize| ["a", "b", "c", "d"][i];
        let truth: Vec<bool> = (0..4).map(|i| facts >> i & 1 == 1).collect();
        let mut text: String = (0..4).filter(|&i| truth[i]).map(|i| format!("{}.\n", name(i))).collect();
        text.push_str("z.\n");
        let elems: Vec<String> = lits.iter().map(|&(neg, i, w)| format!("{}{} = {w}", if neg { "not " } else { "" }, name(i))).collect();
        let lo = lower.map(|l| format!("{l} <= ")).unwrap_or_default();
        let hi = upper.map(|u| format!(" <= {u}")).unwrap_or_default();
        text.push_str(&format!("h :- {lo}{{{}}}{hi}.\n", elems.join(", ")));
        let weight: i64 = lits.iter().filter(|&&(neg, i, _)| truth[i] != neg).map(|&(_, _, w)| w).sum();
        let holds = lower.is_none_or(|l| l <= weight) && upper.is_none_or(|u| weight <= u);
        let translated = translate_weight_program(&parse_weight_program(&text).unwrap()).unwrap();
        let sets = aspa_answer_sets(&ground(&translated), SolutionMode::Minimal, None, &limits()).unwrap();
        prop_assert_eq!(sets.len(), 1, "{}", text);
        prop_assert_eq!(sets[0].contains(&Atom::prop("h")), holds, "{}", text);
    }
}

#[test]
fn aggregate_atoms_are_not_monotone() {
    let p = parse_program("p(1). p(2). t :- SUM{ X : p(X) } <= 1.").unwrap();
    let g = ground(&p);
    let (a, _) = g.aggregates().next().unwrap();
    let small: Interpretation = [parse_atom("p(1)").unwrap()].into_iter().collect();
    let mut big = small.clone();
    big.insert(parse_atom("p(2)").unwrap());
    assert!(satisfies(&small, Literal::Agg(a)).unwrap());
    assert!(!satisfies(&big, Literal::Agg(a)).unwrap());
}
