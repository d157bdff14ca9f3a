//! JSON shapes printed with `--json`. They are described by
//! `schema/aspa-output.schema.json`.

use serde::Serialize;

use aspa_core::aggregates::{AggregateSolution, SolutionKind, SolutionSet};
use aspa_core::semantics::Verdict;
use aspa_core::Interpretation;

#[derive(Debug, Clone, Serialize)]
pub struct AnswerSets {
    pub command: &'static str,
    pub satisfiable: bool,
    pub count: usize,
    pub answer_sets: Vec<Vec<String>>,
}

impl AnswerSets {
    pub fn new(command: &'static str, sets: &[Interpretation]) -> Self {
        AnswerSets {
            command,
            satisfiable: !sets.is_empty(),
            count: sets.len(),
            answer_sets: sets.iter().map(Interpretation::to_strings).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Solution {
    pub p: Vec<String>,
    pub n: Vec<String>,
}

impl From<&AggregateSolution> for Solution {
    fn from(s: &AggregateSolution) -> Self {
        Solution {
            p: s.p.iter().map(ToString::to_string).collect(),
            n: s.n.iter().map(ToString::to_string).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Aggregate {
    pub index: usize,
    pub atom: String,
    pub base: Vec<String>,
    pub kind: &'static str,
    pub solutions: Vec<Solution>,
}

impl Aggregate {
    pub fn new(index: usize, set: &SolutionSet) -> Self {
        Aggregate {
            index,
            atom: set.atom.to_string(),
            base: set.base.iter().map(ToString::to_string).collect(),
            kind: kind_name(set.kind),
            solutions: set.solutions.iter().map(Solution::from).collect(),
        }
    }
}

pub fn kind_name(kind: SolutionKind) -> &'static str {
    match kind {
        SolutionKind::Full => "full",
        SolutionKind::MinimalComplete => "minimal-complete",
        SolutionKind::Relative => "relative",
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Solutions {
    pub command: &'static str,
    pub aggregates: Vec<Aggregate>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub command: &'static str,
    pub model: Vec<String>,
    pub is_model: bool,
    pub aspa: bool,
    pub aspa_unfolded: Option<bool>,
    pub flp: Option<bool>,
    pub stable_set: Option<bool>,
}

impl From<&Verdict> for Check {
    fn from(v: &Verdict) -> Self {
        Check {
            command: "check",
            model: v.interpretation.to_strings(),
            is_model: v.model,
            aspa: v.aspa_wrt,
            aspa_unfolded: v.aspa_static,
            flp: v.flp,
            stable_set: v.stable_set,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Classify {
    pub command: &'static str,
    pub aggregate_free: bool,
    pub head_aggregates: bool,
    pub negation: bool,
    pub constraints: bool,
    pub stratified: bool,
    /// `"yes"`, `"no"` or `"unknown"`.
    pub monotone: &'static str,
    pub levels: Option<Vec<(String, usize)>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub ground_ms: f64,
    pub transform_ms: f64,
    pub solve_ms: f64,
    /// Instance generation including the oracle, plus the comparison.
    pub oracle_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Bench {
    pub command: &'static str,
    pub name: String,
    pub params: Vec<(String, i64)>,
    pub ground_rules: usize,
    pub unfolded_rules: usize,
    pub answer_sets: usize,
    pub first: Option<Vec<String>>,
    pub timings: Timings,
    /// `"pass"`, `"fail"` or `"skipped"`.
    pub oracle: &'static str,
}
