//! Aggregate evaluation and aggregate solutions.
//!
//! A solution of a ground aggregate atom over its base is a pair `<p, n>` of
//! disjoint sets of base atoms such that every interpretation containing `p`
//! and disjoint from `n` satisfies the atom. Solutions are handled as masks
//! over the base (at most 64 atoms), with exhaustive truth tables behind the
//! configured caps. MIN and MAX over integers, and COUNT when every atom adds
//! one, have closed forms.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::ast::*;
use crate::config::Limits;
use crate::error::{Error, Result};

/// The value of `FUNC(S)` for a (multi)set `S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AggregateValue {
    Int(BigInt),
    /// Exact average `num / den` with `den > 1` and the fraction reduced.
    Ratio(BigInt, BigInt),
    /// MIN, MAX and AVG of the empty set.
    Undefined,
}

impl fmt::Display for AggregateValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AggregateValue::Int(v) => write!(f, "{v}"),
            AggregateValue::Ratio(n, d) => write!(f, "{n}/{d}"),
            AggregateValue::Undefined => f.write_str("undefined"),
        }
    }
}

impl AggregateValue {
    /// `self REL guard`. Undefined values satisfy nothing, and no aggregate
    /// value compares to a symbolic guard.
    pub fn compare(&self, relation: Relation, guard: &Constant) -> bool {
        let Constant::Int(g) = guard else {
            return false;
        };
        match self {
            AggregateValue::Int(v) => relation.holds(v.cmp(g)),
            AggregateValue::Ratio(n, d) => relation.holds(n.cmp(&(g * d))),
            AggregateValue::Undefined => false,
        }
    }
}

/// The value of the collected variable if `atom` is an instance of the
/// pattern, respecting repeated variables.
pub fn match_pattern(spec: &IntensionalSpec, atom: &Atom) -> Option<Constant> {
    let pat = &spec.pattern;
    if atom.predicate != pat.predicate || atom.args.len() != pat.args.len() {
        return None;
    }
    let mut bound: Vec<(&Variable, &Constant)> = Vec::new();
    for (p, a) in pat.args.iter().zip(&atom.args) {
        let a = a.as_const()?;
        match p {
            Term::Const(c) => {
                if c != a {
                    return None;
                }
            }
            Term::Var(v) => match bound.iter().find(|(w, _)| *w == v) {
                Some((_, c)) => {
                    if *c != a {
                        return None;
                    }
                }
                None => bound.push((v, a)),
            },
        }
    }
    bound
        .into_iter()
        .find(|(v, _)| v.name == spec.collected.name)
        .map(|(_, c)| c.clone())
}

fn type_error(function: AggFunction, c: &Constant) -> Error {
    Error::Type(format!("{function} applied to non-integer value {c}"))
}

/// `FUNC` of the collected values; set aggregates ignore repeated values.
pub fn compute_value(
    function: AggFunction,
    collection: Collection,
    values: &[Constant],
) -> Result<AggregateValue> {
    let mut vals: Vec<&Constant> = values.iter().collect();
    if collection == Collection::Set {
        vals.sort();
        vals.dedup();
    }
    if function == AggFunction::Count {
        return Ok(AggregateValue::Int(BigInt::from(vals.len())));
    }
    let mut ints = Vec::with_capacity(vals.len());
    for c in vals {
        ints.push(c.as_int().ok_or_else(|| type_error(function, c))?);
    }
    Ok(match function {
        AggFunction::Count => unreachable!(),
        AggFunction::Sum => AggregateValue::Int(ints.into_iter().sum()),
        AggFunction::Min => ints
            .into_iter()
            .min()
            .map_or(AggregateValue::Undefined, |v| AggregateValue::Int(v.clone())),
        AggFunction::Max => ints
            .into_iter()
            .max()
            .map_or(AggregateValue::Undefined, |v| AggregateValue::Int(v.clone())),
        AggFunction::Avg => {
            if ints.is_empty() {
                AggregateValue::Undefined
            } else {
                let den = BigInt::from(ints.len());
                let num: BigInt = ints.into_iter().sum();
                let g = num.gcd(&den);
                let (num, den) = (num / &g, den / g);
                if den == BigInt::from(1) {
                    AggregateValue::Int(num)
                } else {
                    AggregateValue::Ratio(num, den)
                }
            }
        }
    })
}

fn ground_guard(agg: &AggregateAtom) -> Result<&Constant> {
    agg.guard
        .as_const()
        .ok_or_else(|| Error::NonGround(agg.to_string()))
}

fn require_ground(agg: &AggregateAtom) -> Result<()> {
    if agg.is_ground() {
        Ok(())
    } else {
        Err(Error::NonGround(agg.to_string()))
    }
}

/// Value of the aggregate function over the pattern instances true in `interp`.
pub fn aggregate_value(interp: &Interpretation, agg: &AggregateAtom) -> Result<AggregateValue> {
    require_ground(agg)?;
    let values: Vec<Constant> = interp
        .with_predicate(&agg.spec.pattern.predicate)
        .filter_map(|a| match_pattern(&agg.spec, a))
        .collect();
    compute_value(agg.function, agg.spec.collection, &values)
}

/// Truth of a ground aggregate atom in `interp`.
pub fn evaluate(interp: &Interpretation, agg: &AggregateAtom) -> Result<bool> {
    let v = aggregate_value(interp, agg)?;
    Ok(v.compare(agg.relation, ground_guard(agg)?))
}

/// Truth of a ground aggregate atom in `interp`, counting only atoms of `base`.
pub fn eval_aggregate(interp: &Interpretation, agg: &AggregateAtom, base: &[Atom]) -> Result<bool> {
    require_ground(agg)?;
    let values: Vec<Constant> = base
        .iter()
        .filter(|a| interp.contains(a))
        .filter_map(|a| match_pattern(&agg.spec, a))
        .collect();
    let v = compute_value(agg.function, agg.spec.collection, &values)?;
    Ok(v.compare(agg.relation, ground_guard(agg)?))
}

/// Whether the aggregate can be true for some subset of the given instance
/// values (one entry per pattern instance). Used by the grounder; the answer
/// may be `true` when the atom is in fact unsatisfiable, never the reverse.
pub(crate) fn possibly_satisfiable(agg: &AggregateAtom, mut values: Vec<Constant>) -> bool {
    let Some(Constant::Int(g)) = agg.guard.as_const() else {
        return false;
    };
    if agg.spec.collection == Collection::Set {
        values.sort();
        values.dedup();
    }
    let rel = agg.relation;
    if agg.function == AggFunction::Count {
        let k = values.len();
        return (0..=k).any(|c| rel.holds(BigInt::from(c).cmp(g)));
    }
    let Some(ints) = values.iter().map(|c| c.as_int().cloned()).collect::<Option<Vec<BigInt>>>() else {
        // A type error surfaces when the atom is evaluated.
        return true;
    };
    match agg.function {
        AggFunction::Count => unreachable!(),
        AggFunction::Min | AggFunction::Max => ints.iter().any(|v| rel.holds(v.cmp(g))),
        AggFunction::Sum => {
            if ints.len() <= 16 {
                let mut sums: BTreeSet<BigInt> = BTreeSet::new();
                sums.insert(BigInt::zero());
                for v in &ints {
                    let next: Vec<BigInt> = sums.iter().map(|s| s + v).collect();
                    sums.extend(next);
                }
                return sums.iter().any(|s| rel.holds(s.cmp(g)));
            }
            let lo: BigInt = ints.iter().filter(|v| v.sign() == num_bigint::Sign::Minus).sum();
            let hi: BigInt = ints.iter().filter(|v| v.sign() == num_bigint::Sign::Plus).sum();
            match rel {
                Relation::Eq => lo <= *g && *g <= hi,
                Relation::Ne => !(lo == hi && lo == *g),
                Relation::Lt => lo < *g,
                Relation::Le => lo <= *g,
                Relation::Gt => hi > *g,
                Relation::Ge => hi >= *g,
            }
        }
        AggFunction::Avg => {
            if ints.is_empty() {
                return false;
            }
            if ints.len() <= 12 {
                let n = ints.len();
                return (1u32..(1u32 << n)).any(|mask| {
                    let picked: Vec<Constant> = (0..n)
                        .filter(|i| mask >> i & 1 == 1)
                        .map(|i| Constant::Int(ints[i].clone()))
                        .collect();
                    compute_value(AggFunction::Avg, Collection::Multiset, &picked)
                        .map(|v| v.compare(rel, &Constant::Int(g.clone())))
                        .unwrap_or(true)
                });
            }
            let lo = ints.iter().min().expect("non-empty");
            let hi = ints.iter().max().expect("non-empty");
            match rel {
                Relation::Eq => lo <= g && g <= hi,
                Relation::Ne => !(lo == hi && lo == g),
                Relation::Lt => lo < g,
                Relation::Le => lo <= g,
                Relation::Gt => hi > g,
                Relation::Ge => hi >= g,
            }
        }
    }
}

/// Evaluates one aggregate atom on masks over a fixed list of at most 64 atoms.
struct MaskEval {
    function: AggFunction,
    relation: Relation,
    guard: Option<BigInt>,
    /// For each atom, the index of its value in `distinct` (if it matches).
    slot: Vec<Option<usize>>,
    distinct: Vec<Constant>,
    collection: Collection,
    small: Option<(Vec<i128>, i128)>,
}

impl MaskEval {
    fn new(agg: &AggregateAtom, atoms: &[Atom]) -> Result<Self> {
        require_ground(agg)?;
        assert!(atoms.len() <= 64, "mask evaluation is limited to 64 atoms");
        let mut distinct: Vec<Constant> = Vec::new();
        let mut slot = Vec::with_capacity(atoms.len());
        for a in atoms {
            match match_pattern(&agg.spec, a) {
                Some(v) => {
                    if agg.function.is_numeric() && v.as_int().is_none() {
                        return Err(type_error(agg.function, &v));
                    }
                    let i = match distinct.iter().position(|d| *d == v) {
                        Some(i) => i,
                        None => {
                            distinct.push(v);
                            distinct.len() - 1
                        }
                    };
                    slot.push(Some(i));
                }
                None => slot.push(None),
            }
        }
        let guard = ground_guard(agg)?.as_int().cloned();
        let small = match &guard {
            Some(g) if agg.function.is_numeric() => {
                let vals: Option<Vec<i128>> = distinct
                    .iter()
                    .map(|c| c.as_int().and_then(|v| v.to_i64()).map(i128::from))
                    .collect();
                match (vals, g.to_i64()) {
                    (Some(v), Some(g)) => Some((v, i128::from(g))),
                    _ => None,
                }
            }
            Some(g) => g.to_i64().map(|g| (Vec::new(), i128::from(g))),
            None => None,
        };
        Ok(MaskEval {
            function: agg.function,
            relation: agg.relation,
            guard,
            slot,
            distinct,
            collection: agg.spec.collection,
            small,
        })
    }

    fn eval(&self, mask: u64) -> bool {
        if self.guard.is_none() {
            return false;
        }
        let mut picked: Vec<usize> = Vec::new();
        let mut seen: u64 = 0;
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            if let Some(s) = self.slot[i] {
                if self.collection == Collection::Set {
                    if seen >> s & 1 == 1 {
                        continue;
                    }
                    seen |= 1 << s;
                }
                picked.push(s);
            }
        }
        if let Some((vals, g)) = &self.small {
            let count = picked.len() as i128;
            let holds = |v: i128| self.relation.holds(v.cmp(g));
            return match self.function {
                AggFunction::Count => holds(count),
                AggFunction::Sum => holds(picked.iter().map(|&s| vals[s]).sum()),
                AggFunction::Min => picked.iter().map(|&s| vals[s]).min().is_some_and(holds),
                AggFunction::Max => picked.iter().map(|&s| vals[s]).max().is_some_and(holds),
                AggFunction::Avg => {
                    count > 0
                        && self
                            .relation
                            .holds(picked.iter().map(|&s| vals[s]).sum::<i128>().cmp(&(g * count)))
                }
            };
        }
        let values: Vec<Constant> = picked.iter().map(|&s| self.distinct[s].clone()).collect();
        let guard = Constant::Int(self.guard.clone().expect("checked"));
        compute_value(self.function, Collection::Multiset, &values)
            .map(|v| v.compare(self.relation, &guard))
            .expect("types checked on construction")
    }
}

fn check_base(what: &'static str, n: usize, cap: usize) -> Result<()> {
    if n > cap || n > 63 {
        Err(Error::resource(what, n as u128, cap.min(63) as u128))
    } else {
        Ok(())
    }
}

/// Truth table of the atom over all subsets of `base`, indexed by mask.
fn truth_table(agg: &AggregateAtom, base: &[Atom], cap: usize) -> Result<Vec<bool>> {
    check_base("aggregate base for truth table", base.len(), cap)?;
    let ev = MaskEval::new(agg, base)?;
    Ok((0..1u64 << base.len()).map(|m| ev.eval(m)).collect())
}

/// For every cube over `n` variables (ternary index: digit 0 = free,
/// 1 = true, 2 = false), whether the table is true on the whole cube.
fn cube_table(table: &[bool], n: usize) -> Vec<bool> {
    let pow: Vec<usize> = (0..=n).map(|i| 3usize.pow(i as u32)).collect();
    let total = pow[n];
    let mut good = vec![false; total];
    for c in (0..total).rev() {
        let mut rest = c;
        let mut free = None;
        let mut mask = 0u64;
        for (i, p) in pow.iter().take(n).enumerate() {
            let d = rest % 3;
            rest /= 3;
            match d {
                0 => {
                    free = Some(*p);
                    break;
                }
                1 => mask |= 1 << i,
                _ => {}
            }
        }
        good[c] = match free {
            Some(p) => good[c + p] && good[c + 2 * p],
            None => table[mask as usize],
        };
    }
    good
}

fn decode_cube(mut c: usize, n: usize) -> (u64, u64) {
    let (mut p, mut q) = (0u64, 0u64);
    for i in 0..n {
        match c % 3 {
            1 => p |= 1 << i,
            2 => q |= 1 << i,
            _ => {}
        }
        c /= 3;
    }
    (p, q)
}

fn encode_cube(p: u64, q: u64, n: usize) -> usize {
    let mut c = 0usize;
    for i in (0..n).rev() {
        c = c * 3 + if p >> i & 1 == 1 { 1 } else if q >> i & 1 == 1 { 2 } else { 0 };
    }
    c
}

/// `<p, n>`: every interpretation containing `p` and avoiding `n` satisfies the
/// aggregate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AggregateSolution {
    pub p: BTreeSet<Atom>,
    pub n: BTreeSet<Atom>,
}

impl AggregateSolution {
    fn from_masks(base: &[Atom], p: u64, n: u64) -> Self {
        let pick = |m: u64| {
            base.iter()
                .enumerate()
                .filter(|(i, _)| m >> i & 1 == 1)
                .map(|(_, a)| a.clone())
                .collect()
        };
        AggregateSolution { p: pick(p), n: pick(n) }
    }
}

impl fmt::Display for AggregateSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let set = |s: &BTreeSet<Atom>, f: &mut fmt::Formatter<'_>| -> fmt::Result {
            f.write_str("{")?;
            for (i, a) in s.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str("}")
        };
        f.write_str("<")?;
        set(&self.p, f)?;
        f.write_str(", ")?;
        set(&self.n, f)?;
        f.write_str(">")
    }
}

/// `s` covers `t`: `s.p ⊆ t.p` and `s.n ⊆ t.n`.
pub fn covers(s: &AggregateSolution, t: &AggregateSolution) -> bool {
    s.p.is_subset(&t.p) && s.n.is_subset(&t.n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionKind {
    /// Every solution.
    Full,
    /// Complete, and no member covers another.
    MinimalComplete,
    /// Solutions `<p, n>` with `p ⊆ M` and `n ∩ M = ∅` for an interpretation `M`.
    Relative,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionSet {
    pub atom: AggregateAtom,
    pub base: Vec<Atom>,
    pub kind: SolutionKind,
    /// Sorted.
    pub solutions: Vec<AggregateSolution>,
}

impl SolutionSet {
    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }
}

/// Brute-force check of the solution condition.
pub fn is_solution(
    agg: &AggregateAtom,
    base: &[Atom],
    cand: &AggregateSolution,
    limits: &Limits,
) -> Result<bool> {
    if !cand.p.is_disjoint(&cand.n) || !cand.p.iter().chain(&cand.n).all(|a| base.contains(a)) {
        return Ok(false);
    }
    let free: Vec<Atom> = base
        .iter()
        .filter(|a| !cand.p.contains(*a) && !cand.n.contains(*a))
        .cloned()
        .collect();
    check_base("undecided atoms in solution check", free.len(), limits.solution_check)?;
    let fixed: Vec<Atom> = cand.p.iter().cloned().collect();
    if fixed.len() + free.len() <= 64 {
        let mut atoms = free.clone();
        atoms.extend(fixed.iter().cloned());
        let ev = MaskEval::new(agg, &atoms)?;
        let fixed_mask = ((1u128 << atoms.len()) - (1u128 << free.len())) as u64;
        return Ok((0..1u64 << free.len()).all(|m| ev.eval(m | fixed_mask)));
    }
    for m in 0..1u64 << free.len() {
        let mut interp: Interpretation = fixed.iter().cloned().collect();
        for (i, a) in free.iter().enumerate() {
            if m >> i & 1 == 1 {
                interp.insert(a.clone());
            }
        }
        if !eval_aggregate(&interp, agg, base)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Every solution of the atom over `base`.
pub fn all_solutions(agg: &AggregateAtom, base: &[Atom], limits: &Limits) -> Result<SolutionSet> {
    check_base("aggregate base for full solutions", base.len(), limits.full_solutions)?;
    let n = base.len();
    let table = truth_table(agg, base, limits.full_solutions)?;
    let good = cube_table(&table, n);
    let mut solutions: Vec<AggregateSolution> = good
        .iter()
        .enumerate()
        .filter(|(_, g)| **g)
        .map(|(c, _)| {
            let (p, q) = decode_cube(c, n);
            AggregateSolution::from_masks(base, p, q)
        })
        .collect();
    solutions.sort();
    Ok(SolutionSet {
        atom: agg.clone(),
        base: base.to_vec(),
        kind: SolutionKind::Full,
        solutions,
    })
}

/// Like [`cube_table`], but whether the table is true somewhere on the cube.
fn cube_table_any(table: &[bool], n: usize) -> Vec<bool> {
    let negated: Vec<bool> = table.iter().map(|b| !b).collect();
    cube_table(&negated, n).into_iter().map(|b| !b).collect()
}

/// Depth-first search for solutions over ternary cube codes. A state is a
/// partial assignment; it is a solution when the atom holds on all of its
/// completions, and it is abandoned when the atom holds on none of them.
struct FindState<'a> {
    all: &'a [bool],
    any: &'a [bool],
    pow: Vec<usize>,
    visited: Vec<bool>,
    found: Vec<usize>,
}

impl FindState<'_> {
    fn digit(&self, c: usize, i: usize) -> usize {
        c / self.pow[i] % 3
    }

    /// No fixed literal can be dropped.
    fn is_prime(&self, c: usize) -> bool {
        (0..self.pow.len()).all(|i| {
            let d = self.digit(c, i);
            d == 0 || !self.all[c - d * self.pow[i]]
        })
    }

    fn find(&mut self, c: usize) {
        if self.visited[c] {
            return;
        }
        self.visited[c] = true;
        if self.all[c] {
            if self.is_prime(c) {
                self.found.push(c);
            }
            return;
        }
        if !self.any[c] {
            return;
        }
        for i in 0..self.pow.len() {
            if self.digit(c, i) == 0 {
                self.find(c + self.pow[i]);
                self.find(c + 2 * self.pow[i]);
            }
        }
    }
}

/// Truth of a COUNT atom as a function of the number of true base atoms, when
/// every base atom adds exactly one to the count (multisets, or sets whose
/// base atoms carry distinct values).
fn count_profile(agg: &AggregateAtom, base: &[Atom]) -> Result<Option<Vec<bool>>> {
    if agg.function != AggFunction::Count {
        return Ok(None);
    }
    if agg.spec.collection == Collection::Set {
        let values: BTreeSet<Constant> = base.iter().filter_map(|a| match_pattern(&agg.spec, a)).collect();
        if values.len() != base.len() {
            return Ok(None);
        }
    }
    let ev = MaskEval::new(agg, base)?;
    Ok(Some((0..=base.len()).map(|k| ev.eval(if k == 0 { 0 } else { u64::MAX >> (64 - k) })).collect()))
}

/// Prime implicants of a MIN or MAX atom with integer values, without a
/// truth table. The value is decided by the extreme true atom, so each atom
/// `a` that satisfies the atom alone yields `<{a}, n>` where `n` holds the
/// atoms beyond `a` (below it for MIN, above for MAX) that do not satisfy it
/// alone. Polynomial in the base, so no base cap applies.
fn extreme_solutions(agg: &AggregateAtom, base: &[Atom]) -> Result<Option<Vec<AggregateSolution>>> {
    let below = match agg.function {
        AggFunction::Min => true,
        AggFunction::Max => false,
        _ => return Ok(None),
    };
    let mut items = Vec::with_capacity(base.len());
    for a in base {
        let Some(Constant::Int(v)) = match_pattern(&agg.spec, a) else {
            return Ok(None);
        };
        let alone: Interpretation = core::iter::once(a.clone()).collect();
        items.push((v, evaluate(&alone, agg)?, a));
    }
    let mut out = Vec::new();
    for (v, ok, a) in &items {
        if !ok {
            continue;
        }
        let n = items
            .iter()
            .filter(|(w, good, _)| !good && if below { w < v } else { w > v })
            .map(|(_, _, b)| (*b).clone())
            .collect();
        out.push(AggregateSolution {
            p: BTreeSet::from([(*a).clone()]),
            n,
        });
    }
    out.sort();
    Ok(Some(out))
}

/// Every way of choosing `k` of the positions in `from`, as masks.
fn choose(from: &[usize], k: usize, out: &mut Vec<u64>) {
    fn go(from: &[usize], k: usize, acc: u64, out: &mut Vec<u64>) {
        if k == 0 {
            out.push(acc);
            return;
        }
        for (j, &i) in from.iter().enumerate() {
            if from.len() - j < k {
                break;
            }
            go(&from[j + 1..], k - 1, acc | 1 << i, out);
        }
    }
    go(from, k, 0, out);
}

/// Prime implicants of a count profile: for each maximal run `[a, b]` of
/// true counts, `a` atoms true and `n - b` atoms false.
fn count_solutions(profile: &[bool], n: usize, limits: &Limits) -> Result<Vec<(u64, u64)>> {
    let mut out = Vec::new();
    let mut k = 0;
    while k <= n {
        if !profile[k] {
            k += 1;
            continue;
        }
        let a = k;
        while k < n && profile[k + 1] {
            k += 1;
        }
        let b = k;
        k += 1;
        let all: Vec<usize> = (0..n).collect();
        let mut trues = Vec::new();
        choose(&all, a, &mut trues);
        for t in trues {
            let rest: Vec<usize> = (0..n).filter(|i| t >> i & 1 == 0).collect();
            let mut falses = Vec::new();
            choose(&rest, n - b, &mut falses);
            if out.len() + falses.len() > limits.max_ground_rules {
                return Err(Error::resource(
                    "solutions of a COUNT atom",
                    (out.len() + falses.len()) as u128,
                    limits.max_ground_rules as u128,
                ));
            }
            out.extend(falses.into_iter().map(|f| (t, f)));
        }
    }
    Ok(out)
}

/// A complete solution set in which no solution covers another: the prime
/// implicants of the atom as a boolean function of its base.
pub fn minimal_complete_solutions(
    agg: &AggregateAtom,
    base: &[Atom],
    limits: &Limits,
) -> Result<SolutionSet> {
    if let Some(solutions) = extreme_solutions(agg, base)? {
        return Ok(SolutionSet {
            atom: agg.clone(),
            base: base.to_vec(),
            kind: SolutionKind::MinimalComplete,
            solutions,
        });
    }
    let n = base.len();
    check_base("aggregate base for minimal solutions", n, limits.minimal_solutions)?;
    let masks = match count_profile(agg, base)? {
        Some(profile) => count_solutions(&profile, n, limits)?,
        None => find_solutions(agg, base, limits)?,
    };
    let mut solutions: Vec<AggregateSolution> =
        masks.into_iter().map(|(t, f)| AggregateSolution::from_masks(base, t, f)).collect();
    solutions.sort();
    Ok(SolutionSet {
        atom: agg.clone(),
        base: base.to_vec(),
        kind: SolutionKind::MinimalComplete,
        solutions,
    })
}

/// The general search, for any aggregate function.
pub(crate) fn find_solutions(agg: &AggregateAtom, base: &[Atom], limits: &Limits) -> Result<Vec<(u64, u64)>> {
    let n = base.len();
    let table = truth_table(agg, base, limits.minimal_solutions)?;
    let all = cube_table(&table, n);
    let any = cube_table_any(&table, n);
    let mut st = FindState {
        all: &all,
        any: &any,
        pow: (0..n).map(|i| 3usize.pow(i as u32)).collect(),
        visited: vec![false; all.len()],
        found: Vec::new(),
    };
    st.find(0);
    Ok(st.found.into_iter().map(|c| decode_cube(c, n)).collect())
}

fn mask_of(base: &[Atom], interp: &Interpretation) -> u64 {
    base.iter()
        .enumerate()
        .filter(|(_, a)| interp.contains(a))
        .fold(0, |m, (i, _)| m | 1 << i)
}

/// Solutions `<p, n>` with `p ⊆ M` and `n ⊆ base ∖ M`, computed directly from
/// the truth table rather than by filtering the full solution set.
pub fn m_solutions(
    agg: &AggregateAtom,
    base: &[Atom],
    model: &Interpretation,
    limits: &Limits,
) -> Result<SolutionSet> {
    let n = base.len();
    check_base("aggregate base for M-solutions", n, limits.full_solutions)?;
    let table = truth_table(agg, base, limits.full_solutions)?;
    let good = cube_table(&table, n);
    let m = mask_of(base, model);
    let full = if n == 0 { 0 } else { u64::MAX >> (64 - n) };
    let mut solutions = Vec::new();
    for free in 0..=full {
        if free & !full != 0 {
            continue;
        }
        let p = m & !free;
        let q = full & !m & !free;
        if good[encode_cube(p, q, n)] {
            solutions.push(AggregateSolution::from_masks(base, p, q));
        }
        if free == full {
            break;
        }
    }
    solutions.sort();
    Ok(SolutionSet {
        atom: agg.clone(),
        base: base.to_vec(),
        kind: SolutionKind::Relative,
        solutions,
    })
}

/// Whether the atom has at least one solution relative to `model`. By the
/// monotonicity of cubes this is just the truth of the atom in `model ∩ base`.
pub fn has_m_solution(agg: &AggregateAtom, base: &[Atom], model: &Interpretation) -> Result<bool> {
    eval_aggregate(model, agg, base)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tristate {
    Yes,
    No,
    Unknown,
}

/// Monotonicity of the atom as a function of `free`, with `fixed_true` always
/// present. Reports `Unknown` above the configured base cap.
pub fn monotone_over(
    agg: &AggregateAtom,
    free: &[Atom],
    fixed_true: &[Atom],
    limits: &Limits,
) -> Result<Tristate> {
    if free.len() > limits.monotone_check || free.len() + fixed_true.len() > 63 {
        return Ok(Tristate::Unknown);
    }
    let mut atoms = free.to_vec();
    atoms.extend(fixed_true.iter().cloned());
    let ev = MaskEval::new(agg, &atoms)?;
    let fixed_mask = ((1u128 << atoms.len()) - (1u128 << free.len())) as u64;
    let n = free.len();
    let table: Vec<bool> = (0..1u64 << n).map(|m| ev.eval(m | fixed_mask)).collect();
    for m in 0..1usize << n {
        if table[m] {
            for i in 0..n {
                if !table[m | 1 << i] {
                    return Ok(Tristate::No);
                }
            }
        }
    }
    Ok(Tristate::Yes)
}

/// Whether `I ⊆ J ⊆ base` and `I ⊨ agg` imply `J ⊨ agg`.
pub fn is_monotone_atom(agg: &AggregateAtom, base: &[Atom], limits: &Limits) -> Result<Tristate> {
    monotone_over(agg, base, &[], limits)
}

/// Solution sets keyed by aggregate atom.
pub type SolutionTable = BTreeMap<AggregateAtom, SolutionSet>;

/// Whether the atom holds in every interpretation whose pattern instances are
/// `fixed` plus a subset of `free`; `None` when `free` is too large to check.
pub(crate) fn true_on_interval(agg: &AggregateAtom, fixed: &[Atom], free: &[Atom]) -> Result<Option<bool>> {
    if free.len() > 16 || fixed.len() + free.len() > 63 {
        return Ok(None);
    }
    let mut atoms = free.to_vec();
    atoms.extend(fixed.iter().cloned());
    let ev = MaskEval::new(agg, &atoms)?;
    let fixed_mask = ((1u128 << atoms.len()) - (1u128 << free.len())) as u64;
    Ok(Some((0..1u64 << free.len()).all(|m| ev.eval(m | fixed_mask))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_rule;

    fn agg(src: &str) -> AggregateAtom {
        parse_rule(&format!("h :- {src}.")).unwrap().aggs.remove(0)
    }

    fn p(i: i64) -> Atom {
        Atom::ground("p", [Constant::int(i)])
    }

    #[test]
    fn set_and_multiset_values() {
        let i: Interpretation = [
            Atom::ground("e", [Constant::int(1), Constant::sym("a")]),
            Atom::ground("e", [Constant::int(1), Constant::sym("b")]),
            Atom::ground("e", [Constant::int(2), Constant::sym("b")]),
        ]
        .into_iter()
        .collect();
        assert!(evaluate(&i, &agg("SUM{{X : e(X, Y)}} = 4")).unwrap());
        assert!(evaluate(&i, &agg("COUNT{{X : e(X, Y)}} = 3")).unwrap());
        let r = parse_rule("h(Y) :- w(Y), SUM{X : e(X, Y)} = 3.").unwrap();
        assert!(r.aggs[0].spec.locals.is_empty());
    }

    #[test]
    fn count_shortcut_agrees_with_search() {
        let base: Vec<Atom> = (1..=6).map(p).collect();
        let l = Limits::default();
        for rel in ["=", "!=", "<", "<=", ">", ">="] {
            for k in 0..=7 {
                let g = agg(&format!("COUNT{{X : p(X)}} {rel} {k}"));
                let profile = count_profile(&g, &base).unwrap().unwrap();
                let mut fast = count_solutions(&profile, base.len(), &l).unwrap();
                let mut slow = find_solutions(&g, &base, &l).unwrap();
                fast.sort();
                slow.sort();
                assert_eq!(fast, slow, "COUNT {rel} {k}");
            }
        }
    }

    #[test]
    fn extreme_shortcut_agrees_with_search() {
        let base: Vec<Atom> = [-2, 1, 3, 4, 7].into_iter().map(p).collect();
        let l = Limits::default();
        for f in ["MIN", "MAX"] {
            for rel in ["=", "!=", "<", "<=", ">", ">="] {
                for k in -3..=8 {
                    let g = agg(&format!("{f}{{X : p(X)}} {rel} {k}"));
                    let fast = extreme_solutions(&g, &base).unwrap().unwrap();
                    let mut slow: Vec<AggregateSolution> = find_solutions(&g, &base, &l)
                        .unwrap()
                        .into_iter()
                        .map(|(t, f)| AggregateSolution::from_masks(&base, t, f))
                        .collect();
                    slow.sort();
                    assert_eq!(fast, slow, "{f} {rel} {k}");
                }
            }
        }
    }

    #[test]
    fn empty_set_conventions() {
        let i = Interpretation::new();
        assert!(evaluate(&i, &agg("SUM{X : p(X)} = 0")).unwrap());
        assert!(evaluate(&i, &agg("COUNT{X : p(X)} = 0")).unwrap());
        assert!(!evaluate(&i, &agg("MIN{X : p(X)} >= 0")).unwrap());
        assert!(!evaluate(&i, &agg("MAX{X : p(X)} != 0")).unwrap());
        assert!(!evaluate(&i, &agg("AVG{X : p(X)} != 0")).unwrap());
    }

    #[test]
    fn average_is_exact() {
        let i: Interpretation = [p(1), p(2)].into_iter().collect();
        assert!(!evaluate(&i, &agg("AVG{X : p(X)} = 1")).unwrap());
        assert!(evaluate(&i, &agg("AVG{X : p(X)} > 1")).unwrap());
        assert!(evaluate(&i, &agg("AVG{X : p(X)} < 2")).unwrap());
    }

    #[test]
    fn numeric_functions_reject_symbols() {
        let i: Interpretation = [Atom::ground("p", [Constant::sym("a")])].into_iter().collect();
        assert!(matches!(evaluate(&i, &agg("SUM{X : p(X)} > 0")), Err(Error::Type(_))));
        assert!(evaluate(&i, &agg("COUNT{X : p(X)} > 0")).unwrap());
    }

    #[test]
    fn sum_ne_five_has_nineteen_solutions() {
        let g = agg("SUM{X : p(X)} != 5");
        let base = [p(1), p(2), p(3)];
        let all = all_solutions(&g, &base, &Limits::default()).unwrap();
        assert_eq!(all.len(), 19);
        let min = minimal_complete_solutions(&g, &base, &Limits::default()).unwrap();
        assert!(min.solutions.len() < 19);
        for s in &all.solutions {
            assert!(min.solutions.iter().any(|m| covers(m, s)));
        }
    }

    #[test]
    fn count_positive_has_five_solutions() {
        let g = agg("COUNT{X : p(X)} > 0");
        let base = [Atom::ground("p", [Constant::sym("a")]), Atom::ground("p", [Constant::sym("b")])];
        assert_eq!(all_solutions(&g, &base, &Limits::default()).unwrap().len(), 5);
        assert_eq!(
            minimal_complete_solutions(&g, &base, &Limits::default()).unwrap().len(),
            2
        );
    }

    #[test]
    fn m_solutions_match_filtered_full_set() {
        let g = agg("SUM{X : p(X)} != 5");
        let base = [p(1), p(2), p(3)];
        let l = Limits::default();
        let all = all_solutions(&g, &base, &l).unwrap();
        for m in 0..8u64 {
            let model: Interpretation = (0..3).filter(|i| m >> i & 1 == 1).map(|i| base[i].clone()).collect();
            let rel = m_solutions(&g, &base, &model, &l).unwrap();
            let want: Vec<_> = all
                .solutions
                .iter()
                .filter(|s| s.p.iter().all(|a| model.contains(a)) && s.n.iter().all(|a| !model.contains(a)))
                .cloned()
                .collect();
            assert_eq!(rel.solutions, want);
            assert_eq!(has_m_solution(&g, &base, &model).unwrap(), !want.is_empty());
        }
    }

    #[test]
    fn monotonicity() {
        let base = [p(1), p(2), p(3)];
        let l = Limits::default();
        assert_eq!(is_monotone_atom(&agg("COUNT{X : p(X)} > 1"), &base, &l).unwrap(), Tristate::Yes);
        assert_eq!(is_monotone_atom(&agg("COUNT{X : p(X)} < 2"), &base, &l).unwrap(), Tristate::No);
        assert_eq!(is_monotone_atom(&agg("SUM{X : p(X)} >= 2"), &base, &l).unwrap(), Tristate::Yes);
    }

    #[test]
    fn caps_are_reported() {
        let base: Vec<Atom> = (0..13).map(p).collect();
        let g = agg("SUM{X : p(X)} > 3");
        assert!(matches!(
            all_solutions(&g, &base, &Limits::default()),
            Err(Error::Resource { .. })
        ));
    }
}
