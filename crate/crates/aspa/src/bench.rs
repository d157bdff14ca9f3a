//! Generated instances of the benchmark encodings in `corpus/bench`, with
//! oracles that compute the expected answer sets directly from the instance
//! data.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use aspa_core::grounder::ground_program;
use aspa_core::parser::parse_program;
use aspa_core::{solver, unfold, Config, Interpretation};

use crate::output;
use crate::source::AppError;

/// What the oracle predicts: the answer sets restricted to `predicates`.
/// Distinct answer sets must stay distinct after the restriction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expected {
    pub predicates: Vec<&'static str>,
    pub answer_sets: BTreeSet<BTreeSet<String>>,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub program: String,
    pub expected: Expected,
}

pub type Params = BTreeMap<String, i64>;

pub struct Benchmark {
    pub name: &'static str,
    pub encoding: &'static str,
    /// Parameter names with default values; every benchmark also takes `seed`.
    pub defaults: &'static [(&'static str, i64)],
    generate: fn(&Params, &mut ChaCha8Rng) -> Instance,
}

impl Benchmark {
    /// Fills in defaults and rejects unknown parameters.
    pub fn params(&self, given: &[(String, i64)]) -> Result<Params, AppError> {
        let mut p: Params = self.defaults.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        p.insert("seed".into(), 1);
        for (k, v) in given {
            if !p.contains_key(k) {
                return Err(AppError::Usage(format!(
                    "unknown parameter `{k}` for {}; known: {}",
                    self.name,
                    p.keys().cloned().collect::<Vec<_>>().join(", ")
                )));
            }
            if *v < 0 {
                return Err(AppError::Usage(format!("parameter `{k}` must be nonnegative")));
            }
            p.insert(k.clone(), *v);
        }
        Ok(p)
    }

    pub fn instance(&self, params: &Params) -> Instance {
        let mut rng = ChaCha8Rng::seed_from_u64(params["seed"] as u64);
        let mut inst = (self.generate)(params, &mut rng);
        inst.program = format!("{}\n% instance\n{}", self.encoding, inst.program);
        inst
    }
}

pub const BENCHMARKS: &[Benchmark] = &[
    Benchmark {
        name: "company-control",
        encoding: include_str!("../../../corpus/bench/company_control.aspa"),
        defaults: &[("companies", 6)],
        generate: company_control,
    },
    Benchmark {
        name: "shortest-path",
        encoding: include_str!("../../../corpus/bench/shortest_path.aspa"),
        defaults: &[("nodes", 6)],
        generate: shortest_path,
    },
    Benchmark {
        name: "party-invitations",
        encoding: include_str!("../../../corpus/bench/party_invitations.aspa"),
        defaults: &[("people", 8)],
        generate: party_invitations,
    },
    Benchmark {
        name: "group-seating",
        encoding: include_str!("../../../corpus/bench/group_seating.aspa"),
        defaults: &[("people", 4), ("tables", 2), ("chairs", 2)],
        generate: group_seating,
    },
    Benchmark {
        name: "employee-raise",
        encoding: include_str!("../../../corpus/bench/employee_raise.aspa"),
        defaults: &[("employees", 6), ("max", 3)],
        generate: employee_raise,
    },
    Benchmark {
        name: "nm1",
        encoding: include_str!("../../../corpus/bench/nm1.aspa"),
        defaults: &[("n", 10)],
        generate: nm1,
    },
    Benchmark {
        name: "nm2",
        encoding: include_str!("../../../corpus/bench/nm2.aspa"),
        defaults: &[("n", 10)],
        generate: nm2,
    },
];

pub fn find(name: &str) -> Option<&'static Benchmark> {
    BENCHMARKS.iter().find(|b| b.name == name)
}

fn single(atoms: impl IntoIterator<Item = String>) -> BTreeSet<BTreeSet<String>> {
    BTreeSet::from([atoms.into_iter().collect()])
}

fn company_control(p: &Params, rng: &mut ChaCha8Rng) -> Instance {
    let n = p["companies"] as usize;
    // owns[y] maps owner to percentage; percentages in one company are distinct.
    let mut owns: Vec<BTreeMap<usize, i64>> = vec![BTreeMap::new(); n];
    for y in 1..n.min(3) {
        owns[y].insert(y - 1, 60);
    }
    for (y, holders) in owns.iter_mut().enumerate() {
        let mut left = 100 - holders.values().sum::<i64>();
        for _ in 0..rng.gen_range(1..=3) {
            let x = rng.gen_range(0..n);
            if x == y || holders.contains_key(&x) || left < 5 {
                continue;
            }
            let v = rng.gen_range(5..=left.min(55));
            if holders.values().any(|&w| w == v) {
                continue;
            }
            holders.insert(x, v);
            left -= v;
        }
    }
    let mut text = String::new();
    for (y, holders) in owns.iter().enumerate() {
        for (x, v) in holders {
            let _ = writeln!(text, "owns(c{}, c{}, {v}).", x + 1, y + 1);
        }
    }
    let mut control = vec![vec![false; n]; n];
    loop {
        let mut changed = false;
        for x in 0..n {
            for y in 0..n {
                if control[x][y] {
                    continue;
                }
                let mut values: BTreeSet<i64> = owns[y].get(&x).copied().into_iter().collect();
                for z in 0..n {
                    if control[x][z] {
                        values.extend(owns[y].get(&z).copied());
                    }
                }
                if values.iter().sum::<i64>() > 50 {
                    control[x][y] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let atoms = (0..n).flat_map(|x| (0..n).map(move |y| (x, y)));
    Instance {
        program: text,
        expected: Expected {
            predicates: vec!["control"],
            answer_sets: single(
                atoms
                    .filter(|&(x, y)| control[x][y])
                    .map(|(x, y)| format!("control(c{},c{})", x + 1, y + 1)),
            ),
        },
    }
}

fn shortest_path(p: &Params, rng: &mut ChaCha8Rng) -> Instance {
    let n = p["nodes"] as usize;
    let mut arcs: Vec<(usize, usize, i64)> = Vec::new();
    for i in 0..n.saturating_sub(1) {
        arcs.push((i, i + 1, rng.gen_range(1..=2)));
        for j in i + 2..n {
            if rng.gen_bool(0.3) {
                arcs.push((i, j, rng.gen_range(1..=3)));
            }
        }
    }
    // Arcs go forward, so the longest path bounds every path cost.
    let mut longest = vec![0i64; n];
    for j in 0..n {
        for &(a, b, w) in &arcs {
            if b == j {
                longest[j] = longest[j].max(longest[a] + w);
            }
        }
    }
    let bound = longest.iter().copied().max().unwrap_or(0);
    let mut text = format!("#const_domain 0..{bound}.\n");
    for &(a, b, w) in &arcs {
        let _ = writeln!(text, "arc(n{}, n{}, {w}).", a + 1, b + 1);
    }
    let mut expected = BTreeSet::new();
    for s in 0..n {
        let mut dist: Vec<Option<i64>> = vec![None; n];
        for j in s + 1..n {
            for &(a, b, w) in &arcs {
                if b != j {
                    continue;
                }
                let via = if a == s { Some(w) } else { dist[a].map(|d| d + w) };
                if let Some(v) = via {
                    dist[j] = Some(dist[j].map_or(v, |d| d.min(v)));
                }
            }
        }
        for (t, d) in dist.iter().enumerate() {
            if let Some(d) = d {
                expected.insert(format!("spath(n{},n{},{d})", s + 1, t + 1));
            }
        }
    }
    Instance {
        program: text,
        expected: Expected {
            predicates: vec!["spath"],
            answer_sets: BTreeSet::from([expected]),
        },
    }
}

fn party_invitations(p: &Params, rng: &mut ChaCha8Rng) -> Instance {
    let n = p["people"] as usize;
    let need: Vec<usize> = (0..n).map(|i| if i == 0 { 0 } else { rng.gen_range(0..=2) }).collect();
    let mut friends = vec![BTreeSet::new(); n];
    let mut text = String::new();
    for (i, k) in need.iter().enumerate() {
        let _ = writeln!(text, "requires(g{}, {k}).", i + 1);
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.35) {
                friends[i].insert(j);
                friends[j].insert(i);
                let _ = writeln!(text, "friend(g{}, g{}).", i + 1, j + 1);
            }
        }
    }
    let mut coming = vec![false; n];
    loop {
        let mut changed = false;
        for i in 0..n {
            if !coming[i] && friends[i].iter().filter(|&&j| coming[j]).count() >= need[i] {
                coming[i] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Instance {
        program: text,
        expected: Expected {
            predicates: vec!["coming"],
            answer_sets: single((0..n).filter(|&i| coming[i]).map(|i| format!("coming(g{})", i + 1))),
        },
    }
}

fn group_seating(p: &Params, rng: &mut ChaCha8Rng) -> Instance {
    let (people, tables, chairs) = (p["people"] as usize, p["tables"] as usize, p["chairs"] as usize);
    let mut text = String::new();
    for i in 1..=people {
        let _ = writeln!(text, "person(p{i}).");
    }
    for t in 1..=tables {
        let _ = writeln!(text, "table(t{t}).");
    }
    let _ = writeln!(text, "nchairs({chairs}).");
    let mut like = Vec::new();
    let mut dislike = Vec::new();
    if people >= 3 {
        let a = rng.gen_range(0..people);
        let b = (a + rng.gen_range(1..people)) % people;
        let c = (0..people).find(|&c| c != a && c != b).unwrap();
        like.push((a, b));
        dislike.push((a, c));
        let _ = writeln!(text, "like(p{}, p{}).", a + 1, b + 1);
        let _ = writeln!(text, "dislike(p{}, p{}).", a + 1, c + 1);
    }
    let mut sets = BTreeSet::new();
    let total = tables.pow(people as u32);
    for code in 0..total {
        let mut seat = Vec::with_capacity(people);
        let mut c = code;
        for _ in 0..people {
            seat.push(c % tables);
            c /= tables;
        }
        let full = (0..tables).any(|t| seat.iter().filter(|&&s| s == t).count() > chairs);
        let ok = !full
            && like.iter().all(|&(a, b)| seat[a] == seat[b])
            && dislike.iter().all(|&(a, b)| seat[a] != seat[b]);
        if ok {
            sets.insert(seat.iter().enumerate().map(|(i, t)| format!("at(p{},t{})", i + 1, t + 1)).collect());
        }
    }
    Instance {
        program: text,
        expected: Expected {
            predicates: vec!["at"],
            answer_sets: sets,
        },
    }
}

fn employee_raise(p: &Params, rng: &mut ChaCha8Rng) -> Instance {
    const HOURS: i64 = 12;
    let (n, max) = (p["employees"] as usize, p["max"] as usize);
    let mut text = format!("nHours({HOURS}).\nmaxRaised({max}).\n");
    let mut eligible = Vec::new();
    for i in 1..=n {
        let _ = writeln!(text, "empName(e{i}).");
        let mut total = 0;
        for d in 1..=3 {
            let h = rng.gen_range(2..=6);
            total += h;
            let _ = writeln!(text, "emp(e{i}, {d}, {h}).");
        }
        if total >= HOURS {
            eligible.push(i);
        }
    }
    let mut sets = BTreeSet::new();
    for mask in 0u32..1 << eligible.len() {
        if mask.count_ones() as usize <= max {
            sets.insert(
                eligible
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask >> k & 1 == 1)
                    .map(|(_, i)| format!("raised(e{i})"))
                    .collect(),
            );
        }
    }
    Instance {
        program: text,
        expected: Expected {
            predicates: vec!["raised"],
            answer_sets: sets,
        },
    }
}

fn nm_facts(n: i64, w: std::ops::RangeInclusive<i64>) -> String {
    let mut text = String::new();
    for i in 1..=n {
        let _ = writeln!(text, "r({i}).");
    }
    for k in w {
        let _ = writeln!(text, "w({k}).");
    }
    let _ = writeln!(text, "p({n}).");
    text
}

fn nm1(p: &Params, _: &mut ChaCha8Rng) -> Instance {
    let n = p["n"];
    // p(n) gives MAX = n, so q(n) holds and every p(X) follows; a/b then
    // choose freely for every X.
    let mut sets = BTreeSet::new();
    for mask in 0u64..1 << n {
        let mut s: BTreeSet<String> = (1..=n).map(|i| format!("p({i})")).collect();
        s.insert(format!("q({n})"));
        for i in 1..=n {
            let which = if mask >> (i - 1) & 1 == 1 { "a" } else { "b" };
            s.insert(format!("{which}({i})"));
        }
        sets.insert(s);
    }
    Instance {
        program: nm_facts(n, 1..=n),
        expected: Expected {
            predicates: vec!["p", "q", "a", "b"],
            answer_sets: sets,
        },
    }
}

fn nm2(p: &Params, _: &mut ChaCha8Rng) -> Instance {
    let n = p["n"];
    // MIN > 0 holds as soon as p is nonempty, so q(0) and every p(X) follow;
    // then MIN = 1 and no larger q(K) holds.
    let mut s: BTreeSet<String> = (1..=n).map(|i| format!("p({i})")).collect();
    if n > 0 {
        s.insert("q(0)".into());
    }
    Instance {
        program: nm_facts(n, 0..=n - 1),
        expected: Expected {
            predicates: vec!["p", "q"],
            answer_sets: BTreeSet::from([s]),
        },
    }
}

pub fn project(set: &Interpretation, predicates: &[&str]) -> BTreeSet<String> {
    set.iter()
        .filter(|a| predicates.contains(&&*a.predicate))
        .map(ToString::to_string)
        .collect()
}

/// Whether the computed answer sets match the oracle.
pub fn matches(expected: &Expected, sets: &[Interpretation]) -> bool {
    let got: BTreeSet<BTreeSet<String>> = sets.iter().map(|s| project(s, &expected.predicates)).collect();
    got.len() == sets.len() && got == expected.answer_sets
}

pub struct Outcome {
    pub report: output::Bench,
    pub answer_sets: Vec<Interpretation>,
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Runs the whole pipeline on a generated instance.
pub fn run(bench: &Benchmark, params: &Params, config: &Config, oracle: bool) -> Result<Outcome, AppError> {
    let t = Instant::now();
    let inst = bench.instance(params);
    let generate_ms = ms(t);
    let limits = &config.limits;
    let t = Instant::now();
    let program = parse_program(&inst.program)?;
    let ground = ground_program(&program, config)?;
    let ground_ms = ms(t);
    let t = Instant::now();
    let table = unfold::solution_sets(&ground, config.solution_mode, limits)?;
    let normal = unfold::unfold_with(&ground, &table, limits)?;
    let transform_ms = ms(t);
    let t = Instant::now();
    let sets = solver::enumerate_answer_sets(&normal, None, limits)?;
    let solve_ms = ms(t);
    let t = Instant::now();
    let verdict = if !oracle {
        "skipped"
    } else if matches(&inst.expected, &sets) {
        "pass"
    } else {
        "fail"
    };
    let oracle_ms = generate_ms + ms(t);
    Ok(Outcome {
        report: output::Bench {
            command: "bench",
            name: bench.name.to_string(),
            params: params.iter().map(|(k, v)| (k.clone(), *v)).collect(),
            ground_rules: ground.rules().len(),
            unfolded_rules: normal.len(),
            answer_sets: sets.len(),
            first: sets.first().map(Interpretation::to_strings),
            timings: output::Timings {
                ground_ms,
                transform_ms,
                solve_ms,
                oracle_ms,
            },
            oracle: verdict,
        },
        answer_sets: sets,
    })
}
