//! Flow-insensitive type resolution.
//!
//! `points_to` chases assignment chains, `new` statements, field gets whose
//! puts are in the corpus, and one level of call-return, yielding the set of
//! concrete types a variable may hold. It is a may-over-approximation with no
//! context or flow sensitivity beyond the single return hop.
//!
//! `effective_types` backs points-to results with declared static types
//! (parameters, field declarations) so receivers and escaping arguments that
//! originate outside the corpus still resolve to their interface types.

use crate::ir::hierarchy::ClassHierarchy;
use crate::ir::static_var_types;
use crate::ir::types::*;
use std::collections::{BTreeMap, BTreeSet, HashSet};

/// How many call-return hops `points_to` may cross.
const RETURN_BUDGET: usize = 1;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Key {
    Var(MethodId, String, usize),
    Field(String, String, usize),
}

/// Shared resolution context over one immutable db.
pub struct Resolver<'a> {
    db: &'a ProgramDb,
    hierarchy: &'a ClassHierarchy,
    /// (declaring class, field) -> methods/statements that store into it.
    field_puts: BTreeMap<(String, String), Vec<(MethodId, usize)>>,
}

impl<'a> Resolver<'a> {
    pub fn new(db: &'a ProgramDb, hierarchy: &'a ClassHierarchy) -> Self {
        let mut field_puts: BTreeMap<(String, String), Vec<(MethodId, usize)>> = BTreeMap::new();
        for (mid, m) in db.methods() {
            let statics = static_var_types(db, &mid.class, m);
            for (idx, stmt) in m.body.iter().enumerate() {
                let StmtKind::FieldPut { base, field, .. } = &stmt.kind else {
                    continue;
                };
                for owner in field_owners(db, &statics, base, field) {
                    field_puts
                        .entry((owner, field.clone()))
                        .or_default()
                        .push((mid.clone(), idx));
                }
            }
        }
        Resolver {
            db,
            hierarchy,
            field_puts,
        }
    }

    pub fn db(&self) -> &ProgramDb {
        self.db
    }

    pub fn hierarchy(&self) -> &ClassHierarchy {
        self.hierarchy
    }

    /// The points-to set of `var` in `method`: concrete types only, empty
    /// when resolution fails (the unresolved signal).
    pub fn points_to(&self, method: &MethodId, var: &str) -> BTreeSet<String> {
        let mut visited = HashSet::new();
        self.resolve_var(method, var, RETURN_BUDGET, &mut visited)
    }

    /// Declared static types of `var` (parameters, `this`, field/new chains).
    pub fn static_types(&self, method: &MethodId, var: &str) -> BTreeSet<String> {
        let Some(m) = self.db.method(method) else {
            return BTreeSet::new();
        };
        static_var_types(self.db, &method.class, m)
            .remove(var)
            .unwrap_or_default()
    }

    /// Points-to set when nonempty, else declared static types. Receivers and
    /// escaping values are typed with this so parameters coming from outside
    /// the corpus keep their interface types.
    pub fn effective_types(&self, method: &MethodId, var: &str) -> BTreeSet<String> {
        let pts = self.points_to(method, var);
        if pts.is_empty() {
            self.static_types(method, var)
        } else {
            pts
        }
    }

    fn resolve_var(
        &self,
        method: &MethodId,
        var: &str,
        budget: usize,
        visited: &mut HashSet<Key>,
    ) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        if !visited.insert(Key::Var(method.clone(), var.to_string(), budget)) {
            return out;
        }
        let Some(m) = self.db.method(method) else {
            return out;
        };
        if var == "this" && self.db.class(&method.class).is_some_and(|c| c.is_concrete()) {
            out.insert(method.class.clone());
        }
        for stmt in &m.body {
            match &stmt.kind {
                StmtKind::New { dst, class } if dst == var => {
                    out.insert(class.clone());
                }
                StmtKind::Assign { dst, src } if dst == var => {
                    out.extend(self.resolve_var(method, src, budget, visited));
                }
                StmtKind::FieldGet { dst, base, field } if dst == var => {
                    let statics = static_var_types(self.db, &method.class, m);
                    for owner in field_owners(self.db, &statics, base, field) {
                        out.extend(self.resolve_field(&owner, field, budget, visited));
                    }
                }
                StmtKind::Invoke {
                    dst: Some(dst),
                    target,
                    method: callee_name,
                    ..
                } if dst == var => {
                    if budget == 0 {
                        continue;
                    }
                    for callee in self.call_targets(method, target, callee_name, budget, visited) {
                        let Some(body) = self.db.method(&callee) else {
                            continue;
                        };
                        for s in &body.body {
                            if let StmtKind::Return { src: Some(r) } = &s.kind {
                                out.extend(self.resolve_var(&callee, r, budget - 1, visited));
                            }
                        }
                    }
                }
                _ => {}
            }
        }
        out
    }

    fn resolve_field(
        &self,
        class: &str,
        field: &str,
        budget: usize,
        visited: &mut HashSet<Key>,
    ) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        if !visited.insert(Key::Field(class.to_string(), field.to_string(), budget)) {
            return out;
        }
        let Some(puts) = self.field_puts.get(&(class.to_string(), field.to_string())) else {
            return out;
        };
        for (mid, idx) in puts {
            let Some(m) = self.db.method(mid) else {
                continue;
            };
            if let StmtKind::FieldPut { src, .. } = &m.body[*idx].kind {
                out.extend(self.resolve_var(mid, src, budget, visited));
            }
        }
        out
    }

    /// Methods a call statement may land in, for return-type resolution.
    fn call_targets(
        &self,
        method: &MethodId,
        target: &CallTarget,
        callee_name: &str,
        budget: usize,
        visited: &mut HashSet<Key>,
    ) -> Vec<MethodId> {
        let mut out = BTreeSet::new();
        match target {
            CallTarget::Class(class) => {
                if let Some(decl) = nearest_class_declaring(self.db, class, callee_name) {
                    out.insert(MethodId::new(decl, callee_name));
                }
            }
            CallTarget::Var(recv) => {
                let mut rtypes = self.resolve_var(method, recv, budget, visited);
                if rtypes.is_empty() {
                    rtypes = self.static_types(method, recv);
                }
                for ty in rtypes {
                    for sub in self.hierarchy.subtypes_of(&ty) {
                        if let Some(decl) = self.hierarchy.resolve_override(&sub, callee_name) {
                            out.insert(MethodId::new(decl.clone(), callee_name));
                        }
                    }
                }
            }
        }
        out.into_iter().collect()
    }
}

/// Declaring classes of `base.field` given the base's static types.
fn field_owners(
    db: &ProgramDb,
    statics: &BTreeMap<String, BTreeSet<String>>,
    base: &FieldBase,
    field: &str,
) -> BTreeSet<String> {
    let base_types: BTreeSet<String> = match base {
        FieldBase::Class(c) => BTreeSet::from([c.clone()]),
        FieldBase::Var(v) => statics.get(v.as_str()).cloned().unwrap_or_default(),
    };
    let mut out = BTreeSet::new();
    for ty in &base_types {
        if let Some((owner, _)) = db.resolve_field(ty, field) {
            out.insert(owner.fqname.clone());
        }
    }
    out
}

/// First class in ancestor order declaring `method` (static dispatch).
pub(crate) fn nearest_class_declaring<'d>(
    db: &'d ProgramDb,
    class: &str,
    method: &str,
) -> Option<&'d str> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![class.to_string()];
    while let Some(name) = stack.pop() {
        if !seen.insert(name.clone()) {
            continue;
        }
        if let Some(c) = db.class(&name) {
            if c.is_concrete() && c.method(method).is_some() {
                return db.managed_classes.get_key_value(&name).map(|(k, _)| k.as_str());
            }
            for p in c.parents.iter().rev() {
                stack.push(p.clone());
            }
        }
    }
    None
}

/// Fixpoint of Binder-relatedness over all corpus types:
/// a type is related when it is a configured root, extends/implements a
/// related type, owns a field of a related type (transitively), or is an
/// interface with a related concrete implementation.
pub fn binder_related_types(db: &ProgramDb, hierarchy: &ClassHierarchy) -> BTreeSet<String> {
    let mut related: BTreeSet<String> = db.config.binder_root_types.clone();
    loop {
        let mut changed = false;
        for class in db.managed_classes.values() {
            if related.contains(&class.fqname) {
                continue;
            }
            let by_parent = class.parents.iter().any(|p| related.contains(p));
            let by_field = class.fields.iter().any(|f| related.contains(&f.ty));
            let by_impl = class.kind == ClassKind::Interface
                && hierarchy
                    .subtypes_of(&class.fqname)
                    .iter()
                    .any(|s| related.contains(s));
            if by_parent || by_field || by_impl {
                related.insert(class.fqname.clone());
                changed = true;
            }
        }
        if !changed {
            return related;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::hierarchy::build_hierarchy;
    use crate::ir::parser::parse_corpus;

    fn setup(text: &str) -> (ProgramDb, ClassHierarchy) {
        let db = parse_corpus(&[("t", text)]).unwrap();
        let h = build_hierarchy(&db).unwrap();
        (db, h)
    }

    #[test]
    fn direct_chain_resolves() {
        let (db, h) = setup(concat!(
            "extern ArrayList\n",
            "managed class A {\n  method m() {\n    v = new ArrayList\n    w = v\n    return w\n  }\n}\n",
        ));
        let r = Resolver::new(&db, &h);
        let got = r.points_to(&MethodId::new("A", "m"), "w");
        assert_eq!(got, BTreeSet::from(["ArrayList".to_string()]));
    }

    #[test]
    fn one_level_call_return_resolves() {
        let (db, h) = setup(concat!(
            "managed class RouteStub {\n}\n",
            "managed class F {\n  method f() {\n    v = new RouteStub\n    return v\n  }\n}\n",
            "managed class A {\n  method m() {\n    g = new F\n    v = call g.f()\n    return v\n  }\n}\n",
        ));
        let r = Resolver::new(&db, &h);
        let got = r.points_to(&MethodId::new("A", "m"), "v");
        assert_eq!(got, BTreeSet::from(["RouteStub".to_string()]));
    }

    #[test]
    fn second_return_level_is_cut_off() {
        let (db, h) = setup(concat!(
            "managed class T {\n}\n",
            "managed class G {\n  method g() {\n    v = new T\n    return v\n  }\n}\n",
            "managed class F {\n  field mG: G\n  method f() {\n    g = new G\n    v = call g.g()\n    return v\n  }\n}\n",
            "managed class A {\n  method m() {\n    f = new F\n    v = call f.f()\n    return v\n  }\n}\n",
        ));
        let r = Resolver::new(&db, &h);
        assert!(r.points_to(&MethodId::new("A", "m"), "v").is_empty());
    }

    #[test]
    fn extern_call_is_unresolved() {
        let (db, h) = setup(concat!(
            "extern Parcel\n",
            "managed class A {\n  method m(p: Parcel) {\n    v = call p.obtain()\n    return v\n  }\n}\n",
        ));
        let r = Resolver::new(&db, &h);
        assert!(r.points_to(&MethodId::new("A", "m"), "v").is_empty());
        // Effective typing falls back to nothing either: no static type for a
        // call result.
        assert!(r.effective_types(&MethodId::new("A", "m"), "v").is_empty());
    }

    #[test]
    fn field_put_sources_resolve_across_methods() {
        let (db, h) = setup(concat!(
            "managed class Token {\n}\n",
            "managed class Holder {\n  field mT: Token\n}\n",
            "managed class W {\n",
            "  method init(hld: Holder) {\n    t = new Token\n    hld.mT = t\n    return\n  }\n",
            "  method read(hld: Holder) {\n    x = hld.mT\n    return x\n  }\n",
            "}\n",
        ));
        let r = Resolver::new(&db, &h);
        let got = r.points_to(&MethodId::new("W", "read"), "x");
        assert_eq!(got, BTreeSet::from(["Token".to_string()]));
    }

    #[test]
    fn assignment_cycle_terminates() {
        let (db, h) = setup(concat!(
            "managed class A {\n  method m(seed: A) {\n    v = seed\n    w = v\n    v = w\n    return v\n  }\n}\n",
        ));
        let r = Resolver::new(&db, &h);
        assert!(r.points_to(&MethodId::new("A", "m"), "v").is_empty());
        let eff = r.effective_types(&MethodId::new("A", "m"), "v");
        assert_eq!(eff, BTreeSet::from(["A".to_string()]));
    }

    #[test]
    fn param_falls_back_to_declared_type() {
        let (db, h) = setup(concat!(
            "managed interface ICb {\n  method ping();\n}\n",
            "managed class Impl implements ICb {\n  method ping() { return }\n}\n",
            "managed class A {\n  method m(cb: ICb) {\n    return cb\n  }\n}\n",
        ));
        let r = Resolver::new(&db, &h);
        assert!(r.points_to(&MethodId::new("A", "m"), "cb").is_empty());
        assert_eq!(
            r.effective_types(&MethodId::new("A", "m"), "cb"),
            BTreeSet::from(["ICb".to_string()])
        );
    }

    #[test]
    fn binder_relatedness_via_root_parent_field_and_stub() {
        let (db, h) = setup(concat!(
            "extern IBinder\nextern String\n",
            "managed class Binder implements IBinder {\n}\n",
            "managed class DirectSub extends Binder {\n}\n",
            "managed interface ICb {\n  method onEvent();\n}\n",
            "managed class CbStub implements ICb {\n  field mBinder: IBinder\n  method onEvent() { return }\n}\n",
            "managed class Wrapper {\n  field mCb: CbStub\n}\n",
            "managed class Plain {\n  field mName: String\n}\n",
        ));
        let related = binder_related_types(&db, &h);
        for t in ["IBinder", "Binder", "DirectSub", "CbStub", "ICb", "Wrapper"] {
            assert!(related.contains(t), "{t} should be related");
        }
        assert!(!related.contains("Plain"));
        assert!(!related.contains("String"));
    }
}
