//! Loading programs and interpretations from files, and the error type of the
//! command-line layer with its exit codes.

use std::fmt;
use std::path::Path;

use aspa_core::parser::{self, ParseDiagnostic};
use aspa_core::unfold::weights::translate_weight_program;
use aspa_core::{Error, Interpretation, Program};

#[derive(Debug)]
pub enum AppError {
    Usage(String),
    Io(String),
    /// Diagnostics of one source, already rendered with the file name.
    Parse(String),
    Core(Error),
}

impl AppError {
    /// 1 for usage and input errors, 2 for exceeded caps, 3 for broken
    /// internal invariants.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) | AppError::Io(_) | AppError::Parse(_) => 1,
            AppError::Core(Error::Resource { .. }) => 2,
            AppError::Core(Error::Inconsistent(_) | Error::MissingSolutions(_) | Error::Uncovered(_)) => 3,
            AppError::Core(_) => 1,
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Usage(m) | AppError::Io(m) | AppError::Parse(m) => f.write_str(m),
            AppError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for AppError {}

impl From<Error> for AppError {
    fn from(e: Error) -> Self {
        AppError::Core(e)
    }
}

pub fn render_diagnostics(origin: &str, diags: &[ParseDiagnostic]) -> String {
    diags
        .iter()
        .map(|d| format!("{origin}:{d}"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn with_origin(origin: &str, e: Error) -> AppError {
    match e {
        Error::Parse(diags) => AppError::Parse(render_diagnostics(origin, &diags)),
        e => AppError::Core(e),
    }
}

pub fn read_text(path: &Path) -> Result<String, AppError> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s)
            .map_err(|e| AppError::Io(format!("<stdin>: {e}")))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| AppError::Io(format!("{}: {e}", path.display())))
}

pub fn is_weight_file(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "aspw")
}

/// Parses program text. Weight-constraint programs are translated into
/// aggregate programs.
pub fn parse_source(text: &str, origin: &str, weights: bool) -> Result<Program, AppError> {
    if weights {
        let w = parser::parse_weight_program(text).map_err(|e| with_origin(origin, e))?;
        Ok(translate_weight_program(&w)?)
    } else {
        parser::parse_program(text).map_err(|e| with_origin(origin, e))
    }
}

/// Reads a program; files ending in `.aspw`, or any file when `weights` is
/// set, use the weight-constraint syntax.
pub fn load_program(path: &Path, weights: bool) -> Result<Program, AppError> {
    let text = read_text(path)?;
    let origin = if path.as_os_str() == "-" {
        "<stdin>".to_string()
    } else {
        path.display().to_string()
    };
    parse_source(&text, &origin, weights || is_weight_file(path))
}

pub fn parse_model(text: &str, origin: &str) -> Result<Interpretation, AppError> {
    parser::parse_interpretation(text).map_err(|e| with_origin(origin, e))
}
