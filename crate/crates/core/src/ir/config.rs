//! Analysis configuration: depth limit, implicit control-flow edge list,
//! collection sink signatures, greylist, and Binder-like root types.
//!
//! Config files are UTF-8 with one entry per line and `#` comments:
//! implicit edges as `Trigger.sig => Callback.sig`, sinks and greylist as
//! `Fqname.method`.

use crate::ir::types::MethodId;
use std::collections::BTreeSet;
use thiserror::Error;

/// A `Class.method` signature pattern used by config sets. Same shape as
/// [`MethodId`]; kept as an alias so config call sites read as patterns.
pub type MethodSig = MethodId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisConfig {
    /// Call-graph levels explored from an entry point (entry = level 0).
    /// `usize::MAX` disables the bound.
    pub max_depth: usize,
    /// `(trigger, callback)` pairs: a call matching the trigger signature
    /// adds an edge to the callback resolved on the argument's points-to
    /// type.
    pub implicit_edges: Vec<(MethodSig, MethodSig)>,
    /// Collection-put signatures that terminate escape search.
    pub collection_sinks: BTreeSet<MethodSig>,
    /// Interfaces restricted from third-party apps but still reachable.
    pub greylist: BTreeSet<MethodSig>,
    /// Types treated as Binder-like roots for escape relatedness.
    pub binder_root_types: BTreeSet<String>,
}

pub const DEFAULT_MAX_DEPTH: usize = 4;

impl Default for AnalysisConfig {
    fn default() -> Self {
        let sinks = ["ArrayList.add", "HashSet.add", "HashMap.put", "RemoteCallbackList.register"];
        AnalysisConfig {
            max_depth: DEFAULT_MAX_DEPTH,
            implicit_edges: Vec::new(),
            collection_sinks: sinks
                .iter()
                .map(|s| MethodId::parse(s).expect("builtin sink signature"))
                .collect(),
            greylist: BTreeSet::new(),
            binder_root_types: ["IBinder"].iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("{file}:{line}: bad config entry `{entry}`: {reason}")]
    BadEntry {
        file: String,
        line: u32,
        entry: String,
        reason: String,
    },
}

fn config_lines(text: &str) -> impl Iterator<Item = (u32, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            None
        } else {
            Some((i as u32 + 1, line))
        }
    })
}

fn parse_sig(file: &str, line: u32, entry: &str) -> Result<MethodSig, ConfigError> {
    MethodId::parse(entry).ok_or_else(|| ConfigError::BadEntry {
        file: file.to_string(),
        line,
        entry: entry.to_string(),
        reason: "expected `Class.method`".to_string(),
    })
}

/// Parses an implicit-edge file: `Trigger.sig => Callback.sig` per line.
pub fn parse_edges_file(file: &str, text: &str) -> Result<Vec<(MethodSig, MethodSig)>, ConfigError> {
    let mut out = Vec::new();
    for (line, entry) in config_lines(text) {
        let (lhs, rhs) = entry.split_once("=>").ok_or_else(|| ConfigError::BadEntry {
            file: file.to_string(),
            line,
            entry: entry.to_string(),
            reason: "expected `Trigger.sig => Callback.sig`".to_string(),
        })?;
        out.push((
            parse_sig(file, line, lhs.trim())?,
            parse_sig(file, line, rhs.trim())?,
        ));
    }
    Ok(out)
}

/// Parses a signature-set file (collection sinks or greylist).
pub fn parse_sigs_file(file: &str, text: &str) -> Result<BTreeSet<MethodSig>, ConfigError> {
    let mut out = BTreeSet::new();
    for (line, entry) in config_lines(text) {
        out.insert(parse_sig(file, line, entry)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_has_standard_sinks_and_root() {
        let cfg = AnalysisConfig::default();
        assert_eq!(cfg.max_depth, 4);
        assert!(cfg.collection_sinks.contains(&MethodId::new("ArrayList", "add")));
        assert!(cfg.collection_sinks.contains(&MethodId::new("RemoteCallbackList", "register")));
        assert!(cfg.binder_root_types.contains("IBinder"));
        assert!(cfg.implicit_edges.is_empty());
    }

    #[test]
    fn edges_file_parses_pairs_and_comments() {
        let text = "# framework callbacks\nHandler.post => Runnable.run\n\n";
        let edges = parse_edges_file("edges.cfg", text).unwrap();
        assert_eq!(
            edges,
            vec![(MethodId::new("Handler", "post"), MethodId::new("Runnable", "run"))]
        );
    }

    #[test]
    fn sig_file_rejects_missing_dot() {
        let err = parse_sigs_file("greylist.cfg", "startWatchingRoutes\n").unwrap_err();
        match err {
            ConfigError::BadEntry { line, .. } => assert_eq!(line, 1),
        }
    }

    #[test]
    fn dotted_class_splits_at_last_dot() {
        let sigs = parse_sigs_file("sinks.cfg", "android.util.ArrayMap.put\n").unwrap();
        assert!(sigs.contains(&MethodId::new("android.util.ArrayMap", "put")));
    }
}
