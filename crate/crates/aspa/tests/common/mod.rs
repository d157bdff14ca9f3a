//! Random programs, the program corpus, and brute-force oracles shared by the
//! integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use aspa::bench;
use aspa::source;
use aspa_core::grounder::ground_program;
use aspa_core::{Config, GroundProgram, Program};

pub fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn example(name: &str) -> Program {
    let path = root().join("corpus/examples").join(name);
    source::load_program(&path, source::is_weight_file(&path)).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn ground(p: &Program) -> GroundProgram {
    ground_program(p, &Config::default()).unwrap()
}

/// Named programs: the golden examples, default benchmark instances, and
/// `random` seeded random programs (half of them with aggregate heads
/// allowed).
pub fn corpus(random: usize) -> Vec<(String, Program)> {
    let mut out = Vec::new();
    for n in ["p1.aspa", "p2.aspa", "p3.aspa", "p4.aspa", "p5.aspa", "p6.aspa", "p7.aspw"] {
        out.push((n.to_string(), example(n)));
    }
    for b in bench::BENCHMARKS {
        let inst = b.instance(&b.params(&[]).unwrap());
        out.push((b.name.to_string(), aspa_core::parser::parse_program(&inst.program).unwrap()));
    }
    for seed in 0..random as u64 {
        let mut rng = rand::SeedableRng::seed_from_u64(seed);
        let text = random_program(&mut rng, &Shape { heads: seed % 2 == 1, ..Shape::default() });
        let p = aspa_core::parser::parse_program(&text).unwrap_or_else(|e| panic!("{text}\n{e}"));
        out.push((format!("random #{seed}"), p));
    }
    out
}

/// Size knobs of [`random_program`].
#[derive(Debug, Clone)]
pub struct Shape {
    pub max_rules: usize,
    /// Allow aggregate atoms in rule heads.
    pub heads: bool,
    pub negation: bool,
    pub constraints: bool,
}

impl Default for Shape {
    fn default() -> Self {
        Shape {
            max_rules: 8,
            heads: false,
            negation: true,
            constraints: true,
        }
    }
}

const FUNCS: [&str; 5] = ["COUNT", "SUM", "MIN", "MAX", "AVG"];
const RELS: [&str; 6] = ["=", "!=", "<", "<=", ">", ">="];
/// Argument values of `p`; aggregate bases have at most this many atoms.
pub const P_VALUES: [i64; 5] = [-1, 1, 2, 3, 5];
pub const Q_VALUES: [i64; 2] = [1, 2];
const PROPS: [&str; 3] = ["a", "b", "c"];

fn random_atom(rng: &mut ChaCha8Rng) -> String {
    match rng.gen_range(0..10) {
        0..=3 => format!("p({})", P_VALUES.choose(rng).unwrap()),
        4..=5 => format!("q({})", Q_VALUES.choose(rng).unwrap()),
        _ => PROPS.choose(rng).unwrap().to_string(),
    }
}

fn random_aggregate(rng: &mut ChaCha8Rng) -> String {
    let f = FUNCS.choose(rng).unwrap();
    let r = RELS.choose(rng).unwrap();
    let pred = if rng.gen_bool(0.75) { "p" } else { "q" };
    let guard = rng.gen_range(-1..=6);
    if rng.gen_bool(0.2) {
        format!("{f}{{{{ X : {pred}(X) }}}} {r} {guard}")
    } else {
        format!("{f}{{ X : {pred}(X) }} {r} {guard}")
    }
}

/// A ground program over `p/1`, `q/1` and three propositions, with at most
/// `max_rules` rules besides a few facts.
pub fn random_program(rng: &mut ChaCha8Rng, shape: &Shape) -> String {
    let mut text = String::new();
    for _ in 0..rng.gen_range(0..=2) {
        text.push_str(&format!("{}.\n", random_atom(rng)));
    }
    let rules = rng.gen_range(1..=shape.max_rules);
    for _ in 0..rules {
        let head = match rng.gen_range(0..20) {
            0..=1 if shape.constraints => String::new(),
            2 if shape.heads => random_aggregate(rng),
            _ => random_atom(rng),
        };
        let mut body = Vec::new();
        for _ in 0..rng.gen_range(0..=2) {
            body.push(random_atom(rng));
        }
        if shape.negation {
            for _ in 0..rng.gen_range(0..=1) {
                body.push(format!("not {}", random_atom(rng)));
            }
        }
        for _ in 0..rng.gen_range(0..=2) {
            body.push(random_aggregate(rng));
        }
        if head.is_empty() && body.is_empty() {
            continue;
        }
        if body.is_empty() {
            text.push_str(&format!("{head}.\n"));
        } else {
            text.push_str(&format!("{head} :- {}.\n", body.join(", ")));
        }
    }
    text
}

/// A propositional normal rule over atoms `0..n`: head (`None` for a
/// constraint), positive and negative body masks.
#[derive(Debug, Clone, Copy)]
pub struct BitRule {
    pub head: Option<usize>,
    pub pos: u32,
    pub neg: u32,
}

pub fn random_normal(rng: &mut ChaCha8Rng, atoms: usize, rules: usize) -> Vec<BitRule> {
    (0..rules)
        .map(|_| {
            let mut pick = |p: f64| (0..atoms).filter(|_| rng.gen_bool(p)).fold(0u32, |m, i| m | 1 << i);
            let pos = pick(0.12);
            let neg = pick(0.12);
            let head = if rng.gen_bool(0.08) { None } else { Some(rng.gen_range(0..atoms)) };
            BitRule { head, pos, neg }
        })
        .collect()
}

/// Least model of the reduct with respect to `m`, or `None` when a
/// constraint fires.
pub fn bit_least_model(rules: &[BitRule], m: u32) -> Option<u32> {
    let mut lm = 0u32;
    loop {
        let mut next = lm;
        for r in rules {
            if r.neg & m == 0 && r.pos & !lm == 0 {
                match r.head {
                    Some(h) => next |= 1 << h,
                    None => return None,
                }
            }
        }
        if next == lm {
            return Some(lm);
        }
        lm = next;
    }
}

/// All answer sets by checking every subset.
pub fn bit_answer_sets(rules: &[BitRule], atoms: usize) -> BTreeSet<u32> {
    (0..1u32 << atoms).filter(|&m| bit_least_model(rules, m) == Some(m)).collect()
}
