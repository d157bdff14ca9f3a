//! Logic programs with aggregates under the unfolding semantics.
//!
//! The crate covers the whole pipeline for programs whose rule bodies (and
//! heads) may contain aggregate atoms such as `SUM{ X : p(X) } >= 3`:
//!
//! - [`parser`]: concrete syntax, diagnostics and pretty-printing,
//! - [`grounder`]: instantiation over the finite Herbrand universe, aggregate
//!   bases, dependency analysis and program classification,
//! - [`aggregates`]: aggregate evaluation and aggregate solutions (full,
//!   minimal-complete and relative to an interpretation),
//! - [`unfold`]: unfolding into normal and definite programs, the head reduct
//!   for aggregate heads, and the weight-constraint translation,
//! - [`solver`]: answer sets of aggregate-free programs,
//! - [`semantics`]: answer sets of aggregate programs plus the FLP, stable-set,
//!   perfect-model and monotone-fixpoint reference semantics.
//!
//! Everything here is `no_std` + `alloc`; file IO and the command-line driver
//! live in the `aspa` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod aggregates;
pub mod ast;
pub mod config;
pub mod error;
pub mod grounder;
pub mod parser;
pub mod semantics;
pub mod solver;
pub mod unfold;

pub use ast::{
    AggFunction, AggregateAtom, Atom, Builtin, Collection, Constant, Expr, Head, IntensionalSpec,
    Interpretation, Predicate, Program, Relation, Rule, Term, VarKind, Variable,
};
pub use config::{Config, Limits, SolutionMode};
pub use error::{Error, Result};
pub use grounder::{BaseMode, GroundProgram};
