//! Static detection of global-reference leaks in managed/native service code,
//! plus a deterministic simulator for the resulting resource-exhaustion attacks.
//!
//! The crate is organized as a pipeline over a small two-sided intermediate
//! representation:
//!
//! * [`ir`] — corpus grammar, parser, validation, printing, class hierarchy.
//! * [`native`] — JNI registration extraction and reachability from native
//!   entry functions to the `env.NewGlobalRef` sink.
//! * [`managed`] — service entry points, depth-limited call graphs with
//!   CHA/stub/implicit-edge resolution, points-to, and collection-escape
//!   analysis.
//! * [`detect`] — combines both sides into leak findings and classifies
//!   exploitability; [`report`] renders them as JSON, table, or CSV.
//! * [`sim`] — a deterministic state machine modeling the proxy/global-ref
//!   counters, the known attacks, the defense generations, PoC synthesis,
//!   and the reference-counting guard overhead benchmark.

pub mod detect;
pub mod diag;
pub mod error;
pub mod ir;
pub mod managed;
pub mod native;
pub mod report;
pub mod sim;

pub use detect::{detect, Exploitability, LeakFinding};
pub use diag::{Diagnostic, DiagnosticKind};
pub use error::{CorpusError, HierarchyError, NativeError, PocError, ReportError, SimError};
pub use ir::config::{AnalysisConfig, MethodSig};
pub use ir::hierarchy::{build_hierarchy, ClassHierarchy};
pub use ir::parser::parse_corpus;
pub use ir::printer::print_corpus;
pub use ir::types::{MethodId, ProgramDb};
pub use ir::validate::validate;
pub use report::{render_report, Report, ReportFormat};
