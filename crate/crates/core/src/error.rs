//! Error types for the parsing, analysis, and simulation layers.

use thiserror::Error;

/// Hard failures while parsing or linking a corpus. Everything the parser can
/// tolerate is reported as a [`crate::Diagnostic`] instead.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CorpusError {
    #[error("{unit}:{line}: syntax error: {message}")]
    Syntax {
        unit: String,
        line: u32,
        message: String,
    },
    #[error("{unit}:{line}: unresolved reference `{name}`")]
    Link {
        name: String,
        unit: String,
        line: u32,
    },
    #[error("{unit}:{line}: duplicate definition `{name}`")]
    Duplicate {
        name: String,
        unit: String,
        line: u32,
    },
}

impl CorpusError {
    pub fn syntax(unit: &str, line: u32, message: impl Into<String>) -> Self {
        CorpusError::Syntax {
            unit: unit.to_string(),
            line,
            message: message.into(),
        }
    }

    /// Line number the error points at, for positioned-error assertions.
    pub fn line(&self) -> u32 {
        match self {
            CorpusError::Syntax { line, .. }
            | CorpusError::Link { line, .. }
            | CorpusError::Duplicate { line, .. } => *line,
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum HierarchyError {
    /// An inheritance cycle, reported as the offending path `[A, B, A]`.
    #[error("inheritance cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum NativeError {
    #[error("unknown native function `{0}`")]
    UnknownFunction(String),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("call to unknown interface `{0}`")]
    UnknownInterface(String),
    #[error("app {0} is not alive; only a restart is accepted")]
    AppNotAlive(u32),
    #[error("bad policy spec `{0}`")]
    BadPolicySpec(String),
    #[error("bad attack spec `{0}`")]
    BadAttackSpec(String),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PocError {
    /// No rule can synthesize a value for this parameter; the entry needs a
    /// hand-written script.
    #[error("cannot construct parameter `{name}` of type `{ty}`")]
    UnconstructibleParam { name: String, ty: String },
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ReportError {
    #[error("unknown report format `{0}` (expected json, table, or csv)")]
    UnknownFormat(String),
}
