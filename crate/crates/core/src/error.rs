use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::parser::ParseDiagnostic;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// The source text was rejected; at least one diagnostic has error severity.
    Parse(Vec<ParseDiagnostic>),
    /// An operation that needs ground input received a rule or atom with
    /// global variables.
    NonGround(String),
    /// A numeric aggregate function met a non-integer value.
    Type(String),
    /// A configured size cap was exceeded. Caps are never applied silently.
    Resource {
        what: &'static str,
        size: u128,
        limit: u128,
    },
    /// The operation is only defined for programs without aggregate heads.
    AggregateHead,
    /// A rule refers to an aggregate atom that has no solution set.
    MissingSolutions(String),
    /// The program is not aggregate-stratified.
    NotStratified,
    /// The program is not (or not provably) monotone.
    NotMonotone,
    /// A constraint is violated by the computed model.
    Inconsistent(String),
    /// An interpretation uses atoms the grounding did not keep rules for.
    Uncovered(String),
    /// A weight-constraint program outside the translatable fragment.
    Weight(String),
}

impl Error {
    pub(crate) fn resource(what: &'static str, size: impl Into<u128>, limit: impl Into<u128>) -> Self {
        Error::Resource {
            what,
            size: size.into(),
            limit: limit.into(),
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parse(diags) => {
                for (i, d) in diags.iter().enumerate() {
                    if i > 0 {
                        writeln!(f)?;
                    }
                    write!(f, "{d}")?;
                }
                Ok(())
            }
            Error::NonGround(what) => write!(f, "not ground: {what}"),
            Error::Type(msg) => write!(f, "type error: {msg}"),
            Error::Resource { what, size, limit } => {
                write!(f, "resource limit exceeded: {what} is {size}, limit is {limit}")
            }
            Error::AggregateHead => f.write_str(
                "program has aggregate atoms in rule heads; use the head-reduct based semantics",
            ),
            Error::MissingSolutions(atom) => write!(f, "no solution set for aggregate atom {atom}"),
            Error::NotStratified => f.write_str("program is not aggregate-stratified"),
            Error::NotMonotone => f.write_str("program is not known to be monotone"),
            Error::Inconsistent(msg) => write!(f, "inconsistent: {msg}"),
            Error::Uncovered(msg) => write!(f, "{msg}"),
            Error::Weight(msg) => write!(f, "weight constraint: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
