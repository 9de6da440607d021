//! Semantic lint over a linked db. Anything the parser tolerates but the db
//! invariants forbid comes out of here as a [`Diagnostic`]; the list is empty
//! exactly when every invariant holds.

use crate::diag::{Diagnostic, DiagnosticKind};
use crate::ir::hierarchy::build_hierarchy;
use crate::ir::types::*;
use std::collections::{BTreeMap, BTreeSet};

pub fn validate(db: &ProgramDb) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    jni_binding_uniqueness(db, &mut out);
    method_bodies(db, &mut out);
    inheritance(db, &mut out);
    out.sort();
    out
}

/// Each (class, method) pair may be bound by at most one registration entry.
fn jni_binding_uniqueness(db: &ProgramDb, out: &mut Vec<Diagnostic>) {
    let mut seen: BTreeMap<MethodId, &str> = BTreeMap::new();
    for reg in &db.jni_registrations {
        for e in &reg.entries {
            let key = MethodId::new(&reg.managed_class, &e.managed_method);
            if let Some(first) = seen.get(&key) {
                out.push(Diagnostic::new(
                    &reg.unit,
                    e.line,
                    DiagnosticKind::DuplicateJniBinding,
                    format!("`{key}` already bound to `{first}`"),
                ));
            } else {
                seen.insert(key, &e.native_fn);
            }
        }
    }
}

fn method_bodies(db: &ProgramDb, out: &mut Vec<Diagnostic>) {
    for class in db.managed_classes.values() {
        for m in &class.methods {
            if m.is_native && !m.body.is_empty() {
                out.push(Diagnostic::new(
                    &class.unit,
                    m.line,
                    DiagnosticKind::NativeMethodBody,
                    format!("native method `{}.{}` has a body", class.fqname, m.name),
                ));
            }
            use_before_def(class, m, out);
            arity(db, class, m, out);
        }
    }
}

fn use_before_def(class: &ManagedClass, m: &ManagedMethod, out: &mut Vec<Diagnostic>) {
    let mut defined: BTreeSet<&str> = m.params.iter().map(|p| p.name.as_str()).collect();
    defined.insert("this");
    for stmt in &m.body {
        for used in stmt.uses() {
            if !defined.contains(used) {
                out.push(Diagnostic::new(
                    &class.unit,
                    stmt.line,
                    DiagnosticKind::UseBeforeDef,
                    format!(
                        "`{used}` used before definition in `{}.{}`",
                        class.fqname, m.name
                    ),
                ));
            }
        }
        if let Some(d) = stmt.def() {
            defined.insert(d);
        }
    }
}

/// Argument count must match the resolved callee signature. Only checked when
/// the callee resolves to a single in-corpus declaration.
fn arity(db: &ProgramDb, class: &ManagedClass, m: &ManagedMethod, out: &mut Vec<Diagnostic>) {
    let types = crate::ir::link::static_var_types(db, &class.fqname, m);
    for stmt in &m.body {
        let StmtKind::Invoke {
            target,
            method,
            args,
            ..
        } = &stmt.kind
        else {
            continue;
        };
        let decl = match target {
            CallTarget::Class(c) => lookup_in_ancestors(db, c, method),
            CallTarget::Var(v) => {
                let mut found: Option<&ManagedMethod> = None;
                let mut ambiguous = false;
                for t in types.get(v.as_str()).into_iter().flatten() {
                    if let Some(decl) = lookup_in_ancestors(db, t, method) {
                        match found {
                            Some(prev) if prev.params.len() != decl.params.len() => {
                                ambiguous = true
                            }
                            _ => found = Some(decl),
                        }
                    }
                }
                if ambiguous {
                    None
                } else {
                    found
                }
            }
        };
        if let Some(decl) = decl {
            if decl.params.len() != args.len() {
                out.push(Diagnostic::new(
                    &class.unit,
                    stmt.line,
                    DiagnosticKind::ArityMismatch,
                    format!(
                        "`{method}` expects {} argument(s), got {}",
                        decl.params.len(),
                        args.len()
                    ),
                ));
            }
        }
    }
}

fn lookup_in_ancestors<'a>(
    db: &'a ProgramDb,
    class: &str,
    method: &str,
) -> Option<&'a ManagedMethod> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![class.to_string()];
    while let Some(name) = stack.pop() {
        if !seen.insert(name.clone()) {
            continue;
        }
        if let Some(c) = db.class(&name) {
            if let Some(m) = c.method(method) {
                return Some(m);
            }
            stack.extend(c.parents.iter().cloned());
        }
    }
    None
}

fn inheritance(db: &ProgramDb, out: &mut Vec<Diagnostic>) {
    match build_hierarchy(db) {
        Err(crate::error::HierarchyError::Cycle(path)) => {
            let head = path.first().cloned().unwrap_or_default();
            let site = db.class(&head);
            out.push(Diagnostic::new(
                site.map(|c| c.unit.as_str()).unwrap_or("<corpus>"),
                site.map(|c| c.line).unwrap_or(0),
                DiagnosticKind::InheritanceCycle,
                format!("inheritance cycle: {}", path.join(" -> ")),
            ));
        }
        Ok(h) => {
            // Every concrete class must provide a body for every inherited
            // interface signature.
            for class in db.managed_classes.values().filter(|c| c.is_concrete()) {
                for (iface, sig) in interface_signatures(db, class) {
                    if h.resolve_override(&class.fqname, &sig).is_none() {
                        out.push(Diagnostic::new(
                            &class.unit,
                            class.line,
                            DiagnosticKind::MissingImplementation,
                            format!(
                                "`{}` does not implement `{sig}` from `{iface}`",
                                class.fqname
                            ),
                        ));
                    }
                }
            }
        }
    }
}

fn interface_signatures(db: &ProgramDb, class: &ManagedClass) -> Vec<(String, String)> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    let mut stack = vec![class.fqname.clone()];
    while let Some(name) = stack.pop() {
        if !seen.insert(name.clone()) {
            continue;
        }
        if let Some(c) = db.class(&name) {
            if c.kind == ClassKind::Interface {
                for m in &c.methods {
                    out.push((name.clone(), m.name.clone()));
                }
            }
            stack.extend(c.parents.iter().cloned());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parser::parse_corpus;

    fn diags(text: &str) -> Vec<Diagnostic> {
        validate(&parse_corpus(&[("t", text)]).unwrap())
    }

    #[test]
    fn clean_corpus_is_clean() {
        let text = concat!(
            "extern ArrayList\n",
            "managed class A {\n",
            "  field mList: ArrayList\n",
            "  method m(x: A) public {\n    l = this.mList\n    call l.add(x)\n    return\n  }\n",
            "}\n",
        );
        assert!(diags(text).is_empty());
    }

    #[test]
    fn duplicate_jni_binding_flagged() {
        let text = concat!(
            "managed class A {\n  method m() native { }\n}\n",
            "native fn f() { }\nnative fn g() { }\n",
            "jni_register class=A { \"m\" -> f }\n",
            "jni_register class=A { \"m\" -> g }\n",
        );
        let ds = diags(text);
        assert_eq!(ds.len(), 1);
        assert_eq!(ds[0].kind, DiagnosticKind::DuplicateJniBinding);
    }

    #[test]
    fn use_before_def_flagged() {
        let text = "managed class A {\n  method m() {\n    w = v\n    return\n  }\n}\n";
        let ds = diags(text);
        assert_eq!(ds.len(), 1);
        assert_eq!(ds[0].kind, DiagnosticKind::UseBeforeDef);
        assert_eq!(ds[0].line, 3);
    }

    #[test]
    fn native_body_flagged() {
        let text = "managed class A {\n  method m() native {\n    return\n  }\n}\n";
        let ds = diags(text);
        assert!(ds.iter().any(|d| d.kind == DiagnosticKind::NativeMethodBody));
    }

    #[test]
    fn arity_mismatch_flagged() {
        let text = concat!(
            "managed class A {\n",
            "  method callee(x: A, y: A) { return }\n",
            "  method m() {\n    call this.callee(this)\n    return\n  }\n",
            "}\n",
        );
        let ds = diags(text);
        assert!(ds.iter().any(|d| d.kind == DiagnosticKind::ArityMismatch));
    }

    #[test]
    fn missing_interface_impl_flagged() {
        let text = concat!(
            "managed interface I {\n  method m();\n}\n",
            "managed class X implements I {\n}\n",
        );
        let ds = diags(text);
        assert!(ds
            .iter()
            .any(|d| d.kind == DiagnosticKind::MissingImplementation));
    }
}
