//! Weight constraints `L <= { l1 = w1, ..., lk = wk } <= U` and their
//! translation into SUM aggregates over auxiliary predicates.
//!
//! For a constraint with positive literals `p_i` (weights `w_i`) and negated
//! literals `not r_j` (weights `v_j`) the translation adds
//!
//! ```text
//! agg_pos_c(i, w_i) :- p_i.
//! agg_neg_c(j, v_j) :- r_j.
//! ```
//!
//! and requires `L <= SP + V - SN <= U`, where `SP` and `SN` are the multiset
//! sums of the weights collected by the two auxiliary predicates and `V` is
//! the sum of all `v_j`.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::ast::*;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightElement {
    pub atom: Atom,
    pub negated: bool,
    pub weight: Term,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightConstraint {
    pub lower: Option<Term>,
    pub elements: Vec<WeightElement>,
    pub upper: Option<Term>,
}

impl WeightConstraint {
    /// Truth of a ground constraint in `interp`.
    pub fn holds(&self, interp: &Interpretation) -> Result<bool> {
        let mut sum = BigInt::zero();
        for e in &self.elements {
            if interp.contains(&e.atom) != e.negated {
                sum += int_of(&e.weight, "weight")?;
            }
        }
        if let Some(l) = &self.lower {
            if sum < int_of(l, "bound")? {
                return Ok(false);
            }
        }
        if let Some(u) = &self.upper {
            if sum > int_of(u, "bound")? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for WeightConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = &self.lower {
            write!(f, "{l} <= ")?;
        }
        f.write_str("{")?;
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            if e.negated {
                f.write_str("not ")?;
            }
            write!(f, "{} = {}", e.atom, e.weight)?;
        }
        f.write_str("}")?;
        if let Some(u) = &self.upper {
            write!(f, " <= {u}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WeightHead {
    Atom(Atom),
    Falsum,
    Constraint(WeightConstraint),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightRule {
    pub head: WeightHead,
    pub pos: Vec<Atom>,
    pub neg: Vec<Atom>,
    pub aggs: Vec<AggregateAtom>,
    pub builtins: Vec<Builtin>,
    pub constraints: Vec<WeightConstraint>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WeightProgram {
    pub rules: Vec<WeightRule>,
    pub constants: BTreeSet<Constant>,
}

fn int_of(t: &Term, what: &str) -> Result<BigInt> {
    match t {
        Term::Const(Constant::Int(v)) => Ok(v.clone()),
        Term::Const(c) => Err(Error::Weight(format!("{what} {c} is not an integer"))),
        Term::Var(v) => Err(Error::Weight(format!("{what} {} is not ground", v.name))),
    }
}

fn fresh(used: &mut BTreeSet<String>, base: String) -> String {
    let mut name = base;
    while used.contains(&name) {
        name.push('_');
    }
    used.insert(name.clone());
    name
}

fn sum_atom(pred: &str, index_var: &str, value_var: &str, relation: Relation, guard: Term) -> AggregateAtom {
    let value = Variable::global(value_var);
    AggregateAtom {
        function: AggFunction::Sum,
        spec: IntensionalSpec {
            collected: value.clone(),
            locals: Vec::new(),
            pattern: Atom::new(pred, alloc::vec![Term::Var(Variable::global(index_var)), Term::Var(value)]),
            collection: Collection::Multiset,
        },
        relation,
        guard,
    }
}

fn rule_variables(r: &WeightRule) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let atom = |a: &Atom, out: &mut BTreeSet<String>| out.extend(a.variables().map(|v| v.name.to_string()));
    if let WeightHead::Atom(a) = &r.head {
        atom(a, &mut out);
    }
    for a in r.pos.iter().chain(&r.neg) {
        atom(a, &mut out);
    }
    for g in &r.aggs {
        atom(&g.spec.pattern, &mut out);
        out.insert(g.spec.collected.name.to_string());
        if let Term::Var(v) = &g.guard {
            out.insert(v.name.to_string());
        }
    }
    for b in &r.builtins {
        out.extend(b.variables().map(|v| v.name.to_string()));
    }
    out
}

/// Translates a program whose weight constraints occur only in rule bodies.
pub fn translate_weight_program(program: &WeightProgram) -> Result<Program> {
    let mut used_preds: BTreeSet<String> = BTreeSet::new();
    for r in &program.rules {
        if let WeightHead::Atom(a) = &r.head {
            used_preds.insert(a.predicate.to_string());
        }
        for a in r.pos.iter().chain(&r.neg) {
            used_preds.insert(a.predicate.to_string());
        }
        for g in &r.aggs {
            used_preds.insert(g.spec.pattern.predicate.to_string());
        }
        for c in &r.constraints {
            for e in &c.elements {
                used_preds.insert(e.atom.predicate.to_string());
            }
        }
    }

    let mut out = Program {
        rules: Vec::new(),
        constants: program.constants.clone(),
    };
    let mut counter = 0usize;
    'rules: for r in &program.rules {
        let head = match &r.head {
            WeightHead::Atom(a) => Head::Atom(a.clone()),
            WeightHead::Falsum => Head::Falsum,
            WeightHead::Constraint(c) => {
                return Err(Error::Weight(format!("weight constraint {c} in a rule head")));
            }
        };
        let mut rule = Rule {
            head,
            aggs: r.aggs.clone(),
            pos: r.pos.clone(),
            neg: r.neg.clone(),
            builtins: r.builtins.clone(),
        };
        let mut used_vars = rule_variables(r);
        let mut aux: Vec<Rule> = Vec::new();
        for c in &r.constraints {
            counter += 1;
            let lower = c.lower.as_ref().map(|t| int_of(t, "bound")).transpose()?;
            let upper = c.upper.as_ref().map(|t| int_of(t, "bound")).transpose()?;
            let mut pos_elems: Vec<(&Atom, BigInt)> = Vec::new();
            let mut neg_elems: Vec<(&Atom, BigInt)> = Vec::new();
            for e in &c.elements {
                if !e.atom.is_ground() {
                    return Err(Error::Weight(format!("non-ground literal {} in {c}", e.atom)));
                }
                let w = int_of(&e.weight, "weight")?;
                if w.is_negative() {
                    return Err(Error::Weight(format!("negative weight {w} in {c}")));
                }
                if e.negated {
                    neg_elems.push((&e.atom, w));
                } else {
                    pos_elems.push((&e.atom, w));
                }
            }
            let sum_w: BigInt = pos_elems.iter().map(|(_, w)| w).sum();
            let sum_v: BigInt = neg_elems.iter().map(|(_, w)| w).sum();

            if pos_elems.is_empty() && neg_elems.is_empty() {
                let zero = BigInt::zero();
                if lower.as_ref().is_some_and(|l| *l > zero) || upper.as_ref().is_some_and(|u| *u < zero) {
                    continue 'rules;
                }
                continue;
            }
            if lower.is_none() && upper.is_none() {
                continue;
            }

            let pname = fresh(&mut used_preds, format!("agg_pos_{counter}"));
            let nname = fresh(&mut used_preds, format!("agg_neg_{counter}"));
            for (i, (atom, w)) in pos_elems.iter().enumerate() {
                let mut a = Rule::fact(Atom::ground(&pname, [Constant::int(i + 1), Constant::Int(w.clone())]));
                a.pos.push((*atom).clone());
                aux.push(a);
            }
            for (j, (atom, v)) in neg_elems.iter().enumerate() {
                let mut a = Rule::fact(Atom::ground(&nname, [Constant::int(j + 1), Constant::Int(v.clone())]));
                a.pos.push((*atom).clone());
                aux.push(a);
            }
            let mut var = |base: &str| fresh(&mut used_vars, format!("{base}{counter}"));
            let int = |v: BigInt| Term::Const(Constant::Int(v));

            if neg_elems.is_empty() {
                if let Some(l) = &lower {
                    let (i, w) = (var("I"), var("W"));
                    rule.aggs.push(sum_atom(&pname, &i, &w, Relation::Ge, int(l.clone())));
                }
                if let Some(u) = &upper {
                    let (i, w) = (var("I"), var("W"));
                    rule.aggs.push(sum_atom(&pname, &i, &w, Relation::Le, int(u.clone())));
                }
            } else if pos_elems.is_empty() {
                if let Some(u) = &upper {
                    let (j, v) = (var("J"), var("V"));
                    rule.aggs.push(sum_atom(&nname, &j, &v, Relation::Ge, int(&sum_v - u)));
                }
                if let Some(l) = &lower {
                    let (j, v) = (var("J"), var("V"));
                    rule.aggs.push(sum_atom(&nname, &j, &v, Relation::Le, int(&sum_v - l)));
                }
            } else {
                let (i, w, j, v) = (var("I"), var("W"), var("J"), var("V"));
                let (sp, sn, d) = (var("SP"), var("SN"), var("D"));
                let gv = |n: &str| Term::Var(Variable::global(n));
                rule.aggs.push(sum_atom(&pname, &i, &w, Relation::Eq, gv(&sp)));
                rule.aggs.push(sum_atom(&nname, &j, &v, Relation::Eq, gv(&sn)));
                rule.builtins.push(Builtin {
                    lhs: Expr::Term(gv(&d)),
                    relation: Relation::Eq,
                    rhs: Expr::Sub(gv(&sp), gv(&sn)),
                });
                if let Some(l) = &lower {
                    rule.builtins.push(Builtin {
                        lhs: Expr::Term(gv(&d)),
                        relation: Relation::Ge,
                        rhs: Expr::Term(int(l - &sum_v)),
                    });
                }
                if let Some(u) = &upper {
                    rule.builtins.push(Builtin {
                        lhs: Expr::Term(gv(&d)),
                        relation: Relation::Le,
                        rhs: Expr::Term(int(u - &sum_v)),
                    });
                }
                let hi = if sum_w > sum_v { sum_w.clone() } else { sum_v.clone() };
                let mut x = -sum_v.clone();
                while x <= hi {
                    out.constants.insert(Constant::Int(x.clone()));
                    x += BigInt::one();
                }
            }
        }
        let rule = crate::parser::resolve_rule(rule).map_err(Error::Weight)?;
        out.rules.push(rule);
        for a in aux {
            out.rules.push(crate::parser::resolve_rule(a).map_err(Error::Weight)?);
        }
    }
    if out.rules.is_empty() && out.constants.is_empty() {
        return Err(Error::Weight(String::from("the translated program is empty")));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_weight_program;

    #[test]
    fn positive_only_constraint_uses_two_sums() {
        let w = parse_weight_program("a. b. q :- 1 <= {a = 2, b = 1} <= 2.").unwrap();
        let p = translate_weight_program(&w).unwrap();
        let q = p.rules.iter().find(|r| r.head == Head::Atom(Atom::prop("q"))).unwrap();
        assert_eq!(q.aggs.len(), 2);
        assert!(q.aggs.iter().all(|g| g.is_ground()));
        assert_eq!(p.rules.len(), 5);
    }

    #[test]
    fn mixed_constraint_uses_difference() {
        let w = parse_weight_program("a. q :- 1 <= {a = 2, not b = 1} <= 2.").unwrap();
        let p = translate_weight_program(&w).unwrap();
        let q = p.rules.iter().find(|r| r.head == Head::Atom(Atom::prop("q"))).unwrap();
        assert_eq!(q.builtins.len(), 3);
        assert!(p.constants.contains(&Constant::int(-1)));
    }

    #[test]
    fn rejected_inputs() {
        let neg = parse_weight_program("q :- {a = -1} 2.").unwrap();
        assert!(matches!(translate_weight_program(&neg), Err(Error::Weight(_))));
        let head = parse_weight_program("1 <= {a = 1} :- b.").unwrap();
        assert!(matches!(translate_weight_program(&head), Err(Error::Weight(_))));
    }

    #[test]
    fn fresh_names_avoid_clashes() {
        let w = parse_weight_program("agg_pos_1(1,1). q :- {agg_pos_1(1,1) = 1} 0.").unwrap();
        let p = translate_weight_program(&w).unwrap();
        assert!(p.rules.iter().any(|r| matches!(&r.head, Head::Atom(a) if &*a.predicate == "agg_pos_1_")));
    }
}
