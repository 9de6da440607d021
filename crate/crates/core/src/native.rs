//! Native-side analysis: extracts the JNI relation mapping from registration
//! tables and decides, per native function, whether the global-reference sink
//! is reachable. Reaching functions mark their bound managed methods as
//! global-reference creators.

use crate::diag::{Diagnostic, DiagnosticKind};
use crate::error::NativeError;
use crate::ir::types::{MethodId, ProgramDb, GLOBAL_REF_SINK};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// One (managed class, managed method) -> native function binding.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct JniBinding {
    pub managed_class: String,
    pub managed_method: String,
    pub native_fn: String,
}

impl JniBinding {
    pub fn managed_id(&self) -> MethodId {
        MethodId::new(&self.managed_class, &self.managed_method)
    }
}

/// An acyclic witness path from a native entry function to the sink. The
/// first frame is the entry, the last is `env.NewGlobalRef`, and each
/// consecutive pair is a call edge in the db.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NativePath {
    pub frames: Vec<String>,
}

impl NativePath {
    /// Re-checks the path against a db with no analysis state: edge validity,
    /// sink at the end, no repeated frame.
    pub fn check(&self, db: &ProgramDb) -> bool {
        if self.frames.len() < 2 || self.frames.last().map(String::as_str) != Some(GLOBAL_REF_SINK)
        {
            return false;
        }
        let mut seen = BTreeSet::new();
        for frame in &self.frames {
            if !seen.insert(frame.as_str()) {
                return false;
            }
        }
        for pair in self.frames.windows(2) {
            let Some(f) = db.native_fns.get(&pair[0]) else {
                return false;
            };
            if !f.calls.iter().any(|c| c.callee == pair[1]) {
                return false;
            }
        }
        true
    }
}

/// Flattens registration tables into bindings, in registration order.
/// A binding whose managed method is not declared `native` is suspicious but
/// still emitted, with a diagnostic.
pub fn extract_jni_bindings(db: &ProgramDb) -> (Vec<JniBinding>, Vec<Diagnostic>) {
    let mut bindings = Vec::new();
    let mut diags = Vec::new();
    for reg in &db.jni_registrations {
        for e in &reg.entries {
            let is_native = db
                .method(&MethodId::new(&reg.managed_class, &e.managed_method))
                .is_some_and(|m| m.is_native);
            if !is_native {
                diags.push(Diagnostic::new(
                    &reg.unit,
                    e.line,
                    DiagnosticKind::NonNativeJniTarget,
                    format!(
                        "`{}.{}` is registered but not declared native",
                        reg.managed_class, e.managed_method
                    ),
                ));
            }
            bindings.push(JniBinding {
                managed_class: reg.managed_class.clone(),
                managed_method: e.managed_method.clone(),
                native_fn: e.native_fn.clone(),
            });
        }
    }
    (bindings, diags)
}

/// Breadth-first search from `entry` toward the sink, resolving call lists
/// lazily: a function's callees are consulted only once the function itself
/// has been reached. Returns the shortest witness path, breaking length ties
/// by lexicographically smallest frame sequence; `None` when unreachable.
pub fn reaches_globalref(db: &ProgramDb, entry: &str) -> Result<Option<NativePath>, NativeError> {
    if !db.native_fns.contains_key(entry) {
        return Err(NativeError::UnknownFunction(entry.to_string()));
    }

    // Level-synchronized BFS carrying the lexicographically smallest path per
    // node. All paths at one level share a length, so the lexicographic
    // minimum of (best parent path + node) is the lexicographic minimum over
    // all shortest paths.
    let mut best: BTreeMap<String, Vec<String>> = BTreeMap::new();
    best.insert(entry.to_string(), vec![entry.to_string()]);
    let mut frontier: Vec<String> = vec![entry.to_string()];
    let mut sink_path: Option<Vec<String>> = None;

    while !frontier.is_empty() && sink_path.is_none() {
        let mut next: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for node in &frontier {
            let path = best[node].clone();
            let f = &db.native_fns[node];
            let mut callees: Vec<&str> = f.calls.iter().map(|c| c.callee.as_str()).collect();
            callees.sort_unstable();
            callees.dedup();
            for callee in callees {
                if callee == GLOBAL_REF_SINK {
                    let mut candidate = path.clone();
                    candidate.push(GLOBAL_REF_SINK.to_string());
                    if sink_path.as_ref().is_none_or(|cur| candidate < *cur) {
                        sink_path = Some(candidate);
                    }
                    continue;
                }
                if best.contains_key(callee) || !db.native_fns.contains_key(callee) {
                    // Visited at a shorter distance, or an opaque extern leaf.
                    continue;
                }
                let mut candidate = path.clone();
                candidate.push(callee.to_string());
                match next.get(callee) {
                    Some(cur) if *cur <= candidate => {}
                    _ => {
                        next.insert(callee.to_string(), candidate);
                    }
                }
            }
        }
        frontier = next.keys().cloned().collect();
        best.extend(next);
    }

    Ok(sink_path.map(|frames| NativePath { frames }))
}

/// Bindings whose native function reaches the sink, each with its witness,
/// ordered by managed `Class.method` name.
pub fn jgr_creating_bindings(db: &ProgramDb) -> (Vec<(JniBinding, NativePath)>, Vec<Diagnostic>) {
    let (mut bindings, diags) = extract_jni_bindings(db);
    bindings.sort_by(|a, b| a.managed_id().cmp(&b.managed_id()));
    let mut out = Vec::new();
    for b in bindings {
        if let Ok(Some(path)) = reaches_globalref(db, &b.native_fn) {
            out.push((b, path));
        }
    }
    (out, diags)
}

/// Creator bindings keyed by managed method, for the detector.
pub fn jgr_creating_map(db: &ProgramDb) -> BTreeMap<MethodId, (JniBinding, NativePath)> {
    let (list, _) = jgr_creating_bindings(db);
    list.into_iter()
        .map(|(b, p)| (b.managed_id(), (b, p)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parser::parse_corpus;

    fn db(text: &str) -> ProgramDb {
        parse_corpus(&[("t", text)]).unwrap()
    }

    #[test]
    fn alarm_init_binding_extracted() {
        let d = db(concat!(
            "managed class AlarmManagerService {\n  method init() hidden native { }\n}\n",
            "extern alarm_driver_open\n",
            "native fn android_server_AlarmManagerService_init(env) {\n  call alarm_driver_open(env)\n}\n",
            "jni_register class=AlarmManagerService { \"init\" -> android_server_AlarmManagerService_init }\n",
        ));
        let (bindings, diags) = extract_jni_bindings(&d);
        assert!(diags.is_empty());
        assert_eq!(
            bindings,
            vec![JniBinding {
                managed_class: "AlarmManagerService".into(),
                managed_method: "init".into(),
                native_fn: "android_server_AlarmManagerService_init".into(),
            }]
        );
    }

    #[test]
    fn no_registrations_no_bindings() {
        let (bindings, diags) = extract_jni_bindings(&db("extern X\n"));
        assert!(bindings.is_empty());
        assert!(diags.is_empty());
    }

    #[test]
    fn same_method_name_in_two_classes_keyed_by_class() {
        let d = db(concat!(
            "managed class AudioRecord {\n  method setup() hidden native { }\n}\n",
            "managed class JetPlayer {\n  method setup() hidden native { }\n}\n",
            "native fn rec_setup() { }\nnative fn jet_setup() { }\n",
            "jni_register class=AudioRecord { \"setup\" -> rec_setup }\n",
            "jni_register class=JetPlayer { \"setup\" -> jet_setup }\n",
        ));
        let (bindings, _) = extract_jni_bindings(&d);
        assert_eq!(bindings.len(), 2);
        assert_ne!(bindings[0].managed_class, bindings[1].managed_class);
    }

    #[test]
    fn non_native_target_diagnosed_but_emitted() {
        let d = db(concat!(
            "managed class A {\n  method m() { return }\n}\n",
            "native fn f() { }\n",
            "jni_register class=A { \"m\" -> f }\n",
        ));
        let (bindings, diags) = extract_jni_bindings(&d);
        assert_eq!(bindings.len(), 1);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].kind, DiagnosticKind::NonNativeJniTarget);
    }

    #[test]
    fn multi_hop_path_found() {
        let d = db(concat!(
            "native fn android_os_BinderProxy_linkToDeath(a) {\n  call BpBinder_linkToDeath(a)\n}\n",
            "native fn BpBinder_linkToDeath(a) {\n  call JavaDeathRecipient_create(a)\n}\n",
            "native fn JavaDeathRecipient_create(a) {\n  call env.NewGlobalRef(a)\n}\n",
        ));
        let path = reaches_globalref(&d, "android_os_BinderProxy_linkToDeath")
            .unwrap()
            .unwrap();
        assert_eq!(
            path.frames,
            vec![
                "android_os_BinderProxy_linkToDeath",
                "BpBinder_linkToDeath",
                "JavaDeathRecipient_create",
                "env.NewGlobalRef"
            ]
        );
        assert!(path.check(&d));
    }

    #[test]
    fn empty_call_list_is_absent() {
        let d = db("native fn f() { }\n");
        assert_eq!(reaches_globalref(&d, "f").unwrap(), None);
    }

    #[test]
    fn cycle_terminates_with_witness() {
        let d = db(concat!(
            "native fn f(a) {\n  call g(a)\n}\n",
            "native fn g(a) {\n  call f(a)\n  call env.NewGlobalRef(a)\n}\n",
        ));
        let path = reaches_globalref(&d, "f").unwrap().unwrap();
        assert_eq!(path.frames, vec!["f", "g", "env.NewGlobalRef"]);
    }

    #[test]
    fn unknown_entry_is_error() {
        let d = db("native fn f() { }\n");
        assert_eq!(
            reaches_globalref(&d, "missing").unwrap_err(),
            NativeError::UnknownFunction("missing".into())
        );
    }

    #[test]
    fn tie_broken_lexicographically() {
        // Two same-length routes: f -> a -> sink and f -> b -> sink.
        let d = db(concat!(
            "native fn f(x) {\n  call b_mid(x)\n  call a_mid(x)\n}\n",
            "native fn a_mid(x) {\n  call env.NewGlobalRef(x)\n}\n",
            "native fn b_mid(x) {\n  call env.NewGlobalRef(x)\n}\n",
        ));
        let path = reaches_globalref(&d, "f").unwrap().unwrap();
        assert_eq!(path.frames[1], "a_mid");
    }

    #[test]
    fn creators_sorted_by_managed_name() {
        let d = db(concat!(
            "managed class B {\n  method z() hidden native { }\n}\n",
            "managed class A {\n  method m() hidden native { }\n}\n",
            "native fn nz(a) {\n  call env.NewGlobalRef(a)\n}\n",
            "native fn nm(a) {\n  call env.NewGlobalRef(a)\n}\n",
            "native fn other() { }\n",
            "jni_register class=B { \"z\" -> nz }\n",
            "jni_register class=A { \"m\" -> nm }\n",
        ));
        let (creators, _) = jgr_creating_bindings(&d);
        let names: Vec<String> = creators.iter().map(|(b, _)| b.managed_id().to_string()).collect();
        assert_eq!(names, vec!["A.m", "B.z"]);
    }
}
