//! Managed-side analysis: service entry points, depth-limited call graphs
//! with CHA/stub/implicit-edge resolution, points-to type resolution, and
//! collection-escape detection.

pub mod callgraph;
pub mod entry;
pub mod escape;
pub mod resolve;

pub use callgraph::{build_call_graph, CallEdge, CallGraph, EdgeKind};
pub use entry::{extract_entry_points, EntryKind, EntryPoint};
pub use escape::{find_escapes, ContainerKind, EscapeSite};
pub use resolve::{binder_related_types, Resolver};
