//! Post-parse linking: builds the [`ProgramDb`] tables, rejects duplicate
//! declarations and dangling references, classifies field-access bases as
//! variables or classes, and refines invoke dispatch from receiver types.

use crate::error::CorpusError;
use crate::ir::parser::RawDecl;
use crate::ir::types::*;
use std::collections::{BTreeMap, BTreeSet};

pub(crate) fn link(decls: Vec<RawDecl>) -> Result<ProgramDb, CorpusError> {
    let mut db = ProgramDb::empty();
    let mut stub_sites: BTreeMap<String, (String, u32)> = BTreeMap::new();

    // Pass 1: populate tables, catching duplicate declarations.
    for decl in decls {
        match decl {
            RawDecl::Extern { name } => {
                db.externs.insert(name);
            }
            RawDecl::Stub {
                iface,
                class,
                unit,
                line,
            } => {
                if db.stub_bindings.insert(iface.clone(), class).is_some() {
                    return Err(CorpusError::Duplicate {
                        name: format!("stub {iface}"),
                        unit,
                        line,
                    });
                }
                stub_sites.insert(iface, (unit, line));
            }
            RawDecl::Class(c) => {
                check_class_local_duplicates(&c)?;
                if db.managed_classes.contains_key(&c.fqname) {
                    return Err(CorpusError::Duplicate {
                        name: c.fqname.clone(),
                        unit: c.unit.clone(),
                        line: c.line,
                    });
                }
                db.managed_classes.insert(c.fqname.clone(), c);
            }
            RawDecl::Native(f) => {
                if db.native_fns.contains_key(&f.name) {
                    return Err(CorpusError::Duplicate {
                        name: f.name.clone(),
                        unit: f.unit.clone(),
                        line: f.line,
                    });
                }
                db.native_fns.insert(f.name.clone(), f);
            }
            RawDecl::Jni(r) => db.jni_registrations.push(r),
        }
    }

    // A name may not be both a class and an extern.
    for name in &db.externs {
        if let Some(c) = db.managed_classes.get(name) {
            return Err(CorpusError::Duplicate {
                name: name.clone(),
                unit: c.unit.clone(),
                line: c.line,
            });
        }
    }

    resolve_references(&db, &stub_sites)?;
    classify_bases(&mut db)?;
    refine_dispatch(&mut db);
    Ok(db)
}

fn check_class_local_duplicates(c: &ManagedClass) -> Result<(), CorpusError> {
    let mut names = BTreeSet::new();
    for f in &c.fields {
        if !names.insert(format!("field {}", f.name)) {
            return Err(CorpusError::Duplicate {
                name: format!("{}.{}", c.fqname, f.name),
                unit: c.unit.clone(),
                line: f.line,
            });
        }
    }
    let mut methods = BTreeSet::new();
    for m in &c.methods {
        if !methods.insert(m.name.clone()) {
            return Err(CorpusError::Duplicate {
                name: format!("{}.{}", c.fqname, m.name),
                unit: c.unit.clone(),
                line: m.line,
            });
        }
        let mut params = BTreeSet::new();
        for p in &m.params {
            if !params.insert(p.name.clone()) {
                return Err(CorpusError::Duplicate {
                    name: format!("{}.{}({})", c.fqname, m.name, p.name),
                    unit: c.unit.clone(),
                    line: m.line,
                });
            }
        }
    }
    Ok(())
}

fn resolve_references(
    db: &ProgramDb,
    stub_sites: &BTreeMap<String, (String, u32)>,
) -> Result<(), CorpusError> {
    let link_err = |name: &str, unit: &str, line: u32| CorpusError::Link {
        name: name.to_string(),
        unit: unit.to_string(),
        line,
    };

    for c in db.managed_classes.values() {
        for p in &c.parents {
            if !db.is_type_name(p) {
                return Err(link_err(p, &c.unit, c.line));
            }
        }
        for f in &c.fields {
            if !db.is_type_name(&f.ty) {
                return Err(link_err(&f.ty, &c.unit, f.line));
            }
        }
        for m in &c.methods {
            for p in &m.params {
                if !db.is_type_name(&p.ty) {
                    return Err(link_err(&p.ty, &c.unit, m.line));
                }
            }
            for stmt in &m.body {
                match &stmt.kind {
                    StmtKind::New { class, .. } => {
                        if !db.is_type_name(class) {
                            return Err(link_err(class, &c.unit, stmt.line));
                        }
                        if db.is_interface(class) {
                            return Err(CorpusError::syntax(
                                &c.unit,
                                stmt.line,
                                format!("cannot instantiate interface `{class}`"),
                            ));
                        }
                    }
                    StmtKind::Invoke {
                        target: CallTarget::Class(class),
                        ..
                    } => {
                        if !db.is_type_name(class) {
                            return Err(link_err(class, &c.unit, stmt.line));
                        }
                    }
                    _ => {}
                }
            }
        }
    }

    for (iface, class) in &db.stub_bindings {
        let (unit, line) = stub_sites
            .get(iface)
            .map(|(u, l)| (u.as_str(), *l))
            .unwrap_or(("<corpus>", 0));
        if !db.is_type_name(iface) {
            return Err(link_err(iface, unit, line));
        }
        if let Some(c) = db.class(iface) {
            if c.kind != ClassKind::Interface {
                return Err(CorpusError::syntax(
                    unit,
                    line,
                    format!("stub source `{iface}` is not an interface"),
                ));
            }
        }
        match db.class(class) {
            Some(c) if c.is_concrete() => {}
            Some(_) => {
                return Err(CorpusError::syntax(
                    unit,
                    line,
                    format!("stub target `{class}` is not a concrete class"),
                ))
            }
            None => return Err(link_err(class, unit, line)),
        }
    }

    for f in db.native_fns.values() {
        for call in &f.calls {
            let known = call.callee == GLOBAL_REF_SINK
                || db.native_fns.contains_key(&call.callee)
                || db.externs.contains(&call.callee);
            if !known {
                return Err(link_err(&call.callee, &f.unit, call.line));
            }
        }
    }

    for reg in &db.jni_registrations {
        let Some(class) = db.class(&reg.managed_class) else {
            return Err(link_err(&reg.managed_class, &reg.unit, reg.line));
        };
        for e in &reg.entries {
            if class.method(&e.managed_method).is_none() {
                return Err(link_err(
                    &format!("{}.{}", reg.managed_class, e.managed_method),
                    &reg.unit,
                    e.line,
                ));
            }
            if !db.native_fns.contains_key(&e.native_fn) {
                return Err(link_err(&e.native_fn, &reg.unit, e.line));
            }
        }
    }

    Ok(())
}

/// Variables defined anywhere in the method, plus params and `this`.
fn method_defs(m: &ManagedMethod) -> BTreeSet<String> {
    let mut defs: BTreeSet<String> = m.params.iter().map(|p| p.name.clone()).collect();
    defs.insert("this".to_string());
    for s in &m.body {
        if let Some(d) = s.def() {
            defs.insert(d.to_string());
        }
    }
    defs
}

/// Turns dot-free field-access bases that are not local variables into class
/// bases. Local definitions shadow type names. Class bases on in-corpus
/// classes must resolve the field; extern bases stay opaque.
fn classify_bases(db: &mut ProgramDb) -> Result<(), CorpusError> {
    let type_names: BTreeSet<String> = db
        .managed_classes
        .keys()
        .cloned()
        .chain(db.externs.iter().cloned())
        .collect();
    // Field lookups need an immutable view while bodies are rewritten.
    let lookup = db.clone();

    let mut errors: Option<CorpusError> = None;
    for c in db.managed_classes.values_mut() {
        let unit = c.unit.clone();
        for m in c.methods.iter_mut() {
            let defs = method_defs(m);
            for stmt in m.body.iter_mut() {
                let (base, field) = match &mut stmt.kind {
                    StmtKind::FieldGet { base, field, .. }
                    | StmtKind::FieldPut { base, field, .. } => (base, field),
                    _ => continue,
                };
                if let FieldBase::Var(name) = base {
                    if !defs.contains(name.as_str()) && type_names.contains(name.as_str()) {
                        *base = FieldBase::Class(name.clone());
                    }
                }
                if let FieldBase::Class(class) = base {
                    if !type_names.contains(class.as_str()) {
                        errors.get_or_insert(CorpusError::Link {
                            name: class.clone(),
                            unit: unit.clone(),
                            line: stmt.line,
                        });
                    } else if lookup.class(class).is_some()
                        && lookup.resolve_field(class, field).is_none()
                    {
                        errors.get_or_insert(CorpusError::Link {
                            name: format!("{class}.{field}"),
                            unit: unit.clone(),
                            line: stmt.line,
                        });
                    }
                }
            }
        }
    }
    match errors {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Marks instance invokes whose receiver statically resolves to an in-corpus
/// interface as interface dispatch.
fn refine_dispatch(db: &mut ProgramDb) {
    let lookup = db.clone();
    let mut interfaces: Vec<(MethodId, usize)> = Vec::new();
    for (mid, m) in lookup.methods() {
        let types = static_var_types(&lookup, &mid.class, m);
        for (i, stmt) in m.body.iter().enumerate() {
            if let StmtKind::Invoke {
                target: CallTarget::Var(recv),
                dispatch: Dispatch::Virtual,
                ..
            } = &stmt.kind
            {
                let is_iface = types
                    .get(recv.as_str())
                    .is_some_and(|set| set.iter().any(|t| lookup.is_interface(t)));
                if is_iface {
                    interfaces.push((mid.clone(), i));
                }
            }
        }
    }
    for (mid, i) in interfaces {
        let class = db.managed_classes.get_mut(&mid.class).expect("linked class");
        let m = class
            .methods
            .iter_mut()
            .find(|m| m.name == mid.method)
            .expect("linked method");
        if let StmtKind::Invoke { dispatch, .. } = &mut m.body[i].kind {
            *dispatch = Dispatch::Interface;
        }
    }
}

/// Flow-insensitive declared-type sets per variable: parameter declarations,
/// `this`, `new` statements, assignment chains, and field declarations reached
/// through field gets. Call results contribute nothing (signatures carry no
/// return types); points-to fills that gap during analysis.
pub fn static_var_types(
    db: &ProgramDb,
    class: &str,
    method: &ManagedMethod,
) -> BTreeMap<String, BTreeSet<String>> {
    let mut types: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    if db.class(class).is_some_and(|c| c.is_concrete()) {
        types
            .entry("this".to_string())
            .or_default()
            .insert(class.to_string());
    }
    for p in &method.params {
        types
            .entry(p.name.clone())
            .or_default()
            .insert(p.ty.clone());
    }
    // Bodies are tiny; iterate to a fixpoint over assignment copies.
    loop {
        let mut changed = false;
        for stmt in &method.body {
            let additions: Option<(String, BTreeSet<String>)> = match &stmt.kind {
                StmtKind::New { dst, class } => {
                    Some((dst.clone(), BTreeSet::from([class.clone()])))
                }
                StmtKind::Assign { dst, src } => types
                    .get(src.as_str())
                    .cloned()
                    .map(|set| (dst.clone(), set)),
                StmtKind::FieldGet { dst, base, field } => {
                    let base_types: BTreeSet<String> = match base {
                        FieldBase::Var(v) => types.get(v.as_str()).cloned().unwrap_or_default(),
                        FieldBase::Class(c) => BTreeSet::from([c.clone()]),
                    };
                    let mut out = BTreeSet::new();
                    for bt in &base_types {
                        if let Some((_, decl)) = db.resolve_field(bt, field) {
                            out.insert(decl.ty.clone());
                        }
                    }
                    if out.is_empty() {
                        None
                    } else {
                        Some((dst.clone(), out))
                    }
                }
                _ => None,
            };
            if let Some((dst, set)) = additions {
                let entry = types.entry(dst).or_default();
                for t in set {
                    changed |= entry.insert(t);
                }
            }
        }
        if !changed {
            break;
        }
    }
    types
}
