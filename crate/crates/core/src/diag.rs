//! Non-fatal diagnostics carried through parsing, validation, and analysis.

use serde::Serialize;
use std::fmt;

/// What a diagnostic is about. Diagnostics never abort the pipeline; they are
/// collected and surfaced in reports and by `validate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticKind {
    /// Two JNI registrations bind the same (class, method) pair.
    DuplicateJniBinding,
    /// A statement reads a variable before any definition in the method.
    UseBeforeDef,
    /// A call site's argument count disagrees with the resolved signature.
    ArityMismatch,
    /// A method declared `native` carries a non-empty body.
    NativeMethodBody,
    /// A concrete class leaves an inherited interface method unimplemented.
    MissingImplementation,
    /// An inheritance cycle (also a hard error in `build_hierarchy`).
    InheritanceCycle,
    /// A JNI registration targets a managed method not declared `native`.
    NonNativeJniTarget,
    /// A service registered from native code; skipped by entry extraction.
    NativeServiceRegistration,
    /// Points-to could not resolve a concrete type where one was required.
    UnresolvedType,
    /// An instance call on an in-corpus type with no matching method.
    DanglingCall,
    /// An implicit-edge trigger matched but no callback target resolved.
    UnresolvedImplicitCallback,
}

/// A positioned, non-fatal finding about the corpus.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Diagnostic {
    pub unit: String,
    pub line: u32,
    pub kind: DiagnosticKind,
    pub message: String,
}

impl Diagnostic {
    pub fn new(
        unit: impl Into<String>,
        line: u32,
        kind: DiagnosticKind,
        message: impl Into<String>,
    ) -> Self {
        Diagnostic {
            unit: unit.into(),
            line,
            kind,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {:?}: {}",
            self.unit, self.line, self.kind, self.message
        )
    }
}
