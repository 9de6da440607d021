//! Class hierarchy analysis: transitive concrete-subtype sets and the
//! override table used to resolve virtual and interface calls.

use crate::error::HierarchyError;
use crate::ir::types::{ManagedClass, MethodId, ProgramDb};
use std::collections::{BTreeMap, BTreeSet};

/// Subtype closure and override table for a linked db.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassHierarchy {
    /// type fqname -> concrete classes that are the type or extend/implement
    /// it transitively. Extern types appear as keys when something under them
    /// is declared in the corpus.
    pub subtypes: BTreeMap<String, BTreeSet<String>>,
    /// (concrete class, method name) -> class whose declaration provides the
    /// implementation: the class itself or its nearest declaring ancestor.
    pub overrides: BTreeMap<MethodId, String>,
}

impl ClassHierarchy {
    /// Concrete subtypes of `ty`, empty when nothing in the corpus is under it.
    pub fn subtypes_of(&self, ty: &str) -> BTreeSet<String> {
        self.subtypes.get(ty).cloned().unwrap_or_default()
    }

    /// Resolves `method` dispatched on concrete `class` to the declaring
    /// class, if any ancestor (or the class itself) provides it.
    pub fn resolve_override(&self, class: &str, method: &str) -> Option<&String> {
        self.overrides.get(&MethodId::new(class, method))
    }
}

/// Builds the subtype closure and override table.
///
/// Errors with the offending path on inheritance cycles. Running it twice on
/// the same db yields identical tables (pure function of the input).
pub fn build_hierarchy(db: &ProgramDb) -> Result<ClassHierarchy, HierarchyError> {
    check_cycles(db)?;

    let mut subtypes: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for class in db.managed_classes.values() {
        if !class.is_concrete() {
            continue;
        }
        for ancestor in ancestors_and_self(db, &class.fqname) {
            subtypes
                .entry(ancestor)
                .or_default()
                .insert(class.fqname.clone());
        }
    }

    let mut overrides = BTreeMap::new();
    for class in db.managed_classes.values() {
        if !class.is_concrete() {
            continue;
        }
        for method in visible_method_names(db, class) {
            if let Some(decl) = nearest_declaring_class(db, &class.fqname, &method) {
                overrides.insert(MethodId::new(&class.fqname, &method), decl);
            }
        }
    }

    Ok(ClassHierarchy { subtypes, overrides })
}

fn check_cycles(db: &ProgramDb) -> Result<(), HierarchyError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Grey,
        Black,
    }
    let mut colors: BTreeMap<&str, Color> = db
        .managed_classes
        .keys()
        .map(|k| (k.as_str(), Color::White))
        .collect();

    fn visit<'a>(
        db: &'a ProgramDb,
        node: &'a str,
        colors: &mut BTreeMap<&'a str, Color>,
        path: &mut Vec<String>,
    ) -> Result<(), HierarchyError> {
        match colors.get(node) {
            None => return Ok(()), // extern parent: opaque leaf
            Some(Color::Black) => return Ok(()),
            Some(Color::Grey) => {
                let start = path.iter().position(|p| p == node).unwrap_or(0);
                let mut cycle: Vec<String> = path[start..].to_vec();
                cycle.push(node.to_string());
                return Err(HierarchyError::Cycle(cycle));
            }
            Some(Color::White) => {}
        }
        colors.insert(node, Color::Grey);
        path.push(node.to_string());
        if let Some(c) = db.class(node) {
            for p in &c.parents {
                visit(db, p, colors, path)?;
            }
        }
        path.pop();
        colors.insert(node, Color::Black);
        Ok(())
    }

    let names: Vec<&str> = db.managed_classes.keys().map(|k| k.as_str()).collect();
    for name in names {
        let mut path = Vec::new();
        visit(db, name, &mut colors, &mut path)?;
    }
    Ok(())
}

/// The class plus every transitive parent name (including extern parents).
/// Caller has already established acyclicity.
fn ancestors_and_self(db: &ProgramDb, class: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut stack = vec![class.to_string()];
    while let Some(name) = stack.pop() {
        if !out.insert(name.clone()) {
            continue;
        }
        if let Some(c) = db.class(&name) {
            stack.extend(c.parents.iter().cloned());
        }
    }
    out
}

/// Every method name declared on the class or any ancestor (interface
/// signatures included).
fn visible_method_names(db: &ProgramDb, class: &ManagedClass) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for ancestor in ancestors_and_self(db, &class.fqname) {
        if let Some(c) = db.class(&ancestor) {
            for m in &c.methods {
                out.insert(m.name.clone());
            }
        }
    }
    out
}

/// Nearest class in parent order (depth-first, declaration order) whose
/// declaration of `method` carries an implementation. A `native` method
/// counts as implemented by its declaring class; interface signatures do not.
fn nearest_declaring_class(db: &ProgramDb, class: &str, method: &str) -> Option<String> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![class.to_string()];
    while let Some(name) = stack.pop() {
        if !seen.insert(name.clone()) {
            continue;
        }
        if let Some(c) = db.class(&name) {
            if c.is_concrete() && c.method(method).is_some() {
                return Some(name);
            }
            // Depth-first in declared parent order: push in reverse so the
            // first-declared parent is examined first.
            for p in c.parents.iter().rev() {
                stack.push(p.clone());
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parser::parse_corpus;

    fn db(text: &str) -> ProgramDb {
        parse_corpus(&[("t", text)]).unwrap()
    }

    #[test]
    fn transitive_subtypes() {
        let h = build_hierarchy(&db(
            "managed class A {\n}\nmanaged class B extends A {\n}\nmanaged class C extends B {\n}\n",
        ))
        .unwrap();
        let expect: BTreeSet<String> =
            ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
        assert_eq!(h.subtypes_of("A"), expect);
        assert_eq!(h.subtypes_of("C").len(), 1);
    }

    #[test]
    fn interface_impls_are_subtypes() {
        let h = build_hierarchy(&db(concat!(
            "managed interface I {\n  method m();\n}\n",
            "managed class X implements I {\n  method m() { }\n}\n",
            "managed class Y implements I {\n  method m() { }\n}\n",
        )))
        .unwrap();
        let expect: BTreeSet<String> = ["X", "Y"].iter().map(|s| s.to_string()).collect();
        assert_eq!(h.subtypes_of("I"), expect);
    }

    #[test]
    fn cycle_is_reported_with_path() {
        let err = build_hierarchy(&db(
            "managed class A extends B {\n}\nmanaged class B extends A {\n}\n",
        ))
        .unwrap_err();
        let HierarchyError::Cycle(path) = err;
        assert_eq!(path.len(), 3);
        assert_eq!(path.first(), path.last());
    }

    #[test]
    fn override_resolves_to_nearest_body() {
        let h = build_hierarchy(&db(concat!(
            "managed class Base {\n  method m() { return }\n  method k() { return }\n}\n",
            "managed class Mid extends Base {\n  method m() { return }\n}\n",
            "managed class Leaf extends Mid {\n}\n",
        )))
        .unwrap();
        assert_eq!(h.resolve_override("Leaf", "m"), Some(&"Mid".to_string()));
        assert_eq!(h.resolve_override("Leaf", "k"), Some(&"Base".to_string()));
        assert_eq!(h.resolve_override("Mid", "m"), Some(&"Mid".to_string()));
    }

    #[test]
    fn interface_signature_resolves_to_implementing_class() {
        let h = build_hierarchy(&db(concat!(
            "managed interface I {\n  method m();\n}\n",
            "managed class X implements I {\n  method m() { return }\n}\n",
        )))
        .unwrap();
        assert_eq!(h.resolve_override("X", "m"), Some(&"X".to_string()));
    }

    #[test]
    fn idempotent_on_same_db() {
        let text = concat!(
            "extern IBinder\n",
            "managed interface I {\n  method m();\n}\n",
            "managed class X implements I {\n  method m() { return }\n}\n",
            "managed class Y extends X {\n}\n",
        );
        let d = db(text);
        assert_eq!(build_hierarchy(&d).unwrap(), build_hierarchy(&d).unwrap());
    }

    #[test]
    fn extern_parent_collects_subtypes() {
        let h = build_hierarchy(&db(
            "extern IBinder\nmanaged class BinderProxy implements IBinder {\n}\n",
        ))
        .unwrap();
        assert!(h.subtypes_of("IBinder").contains("BinderProxy"));
    }
}
