use crate::grounder::BaseMode;

/// Size caps for the exhaustive parts of the pipeline.
///
/// Exceeding any of them yields [`crate::Error::Resource`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Ground rules produced by the grounder (and rules produced by unfolding).
    pub max_ground_rules: usize,
    /// Undecided atoms examined by the brute-force solution check.
    pub solution_check: usize,
    /// Base size for enumerating every aggregate solution (3^n pairs).
    pub full_solutions: usize,
    /// Base size for computing a minimal complete solution set.
    pub minimal_solutions: usize,
    /// Base size for truth tables and M-solutions.
    pub truth_table: usize,
    /// Base size above which atom monotonicity is reported as unknown.
    pub monotone_check: usize,
    /// Search nodes visited by the normal-program enumerator.
    pub search_nodes: u64,
    /// Undetermined atoms in a minimal-model check.
    pub minimal_model: usize,
    /// Undetermined atoms in generate-and-test enumeration.
    pub candidate_base: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_ground_rules: 1_000_000,
            solution_check: 20,
            full_solutions: 12,
            minimal_solutions: 16,
            truth_table: 20,
            monotone_check: 16,
            search_nodes: 1 << 24,
            minimal_model: 22,
            candidate_base: 18,
        }
    }
}

/// Which solution set is used to unfold body aggregates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolutionMode {
    /// Every solution of the atom.
    Full,
    /// A complete set in which no solution covers another.
    #[default]
    Minimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Config {
    pub base_mode: BaseMode,
    pub solution_mode: SolutionMode,
    pub limits: Limits,
    /// Close the possibly true atoms under all rules, ignoring aggregates.
    /// Answer sets (both kinds) never need this; stable sets that are not
    /// answer sets may.
    pub relaxed_closure: bool,
}
