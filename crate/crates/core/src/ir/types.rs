//! Core IR data model. A [`ProgramDb`] is immutable once linked and is shared
//! read-only by every analysis.

use crate::ir::config::AnalysisConfig;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// The distinguished native callee that creates a global reference.
pub const GLOBAL_REF_SINK: &str = "env.NewGlobalRef";

/// Native callee name recognized as a service registration done from native
/// code; such services are skipped by entry extraction with a diagnostic.
pub const NATIVE_ADD_SERVICE: &str = "ServiceManager.addService";

/// Static-call receiver recognized as a system-service registration.
pub const SERVICE_MANAGER: &str = "ServiceManager";
/// Static-call receiver recognized as a service-helper registration.
pub const SERVICE_REGISTRY: &str = "SystemServiceRegistry";
/// Method on [`SERVICE_MANAGER`] that registers a system service.
pub const ADD_SERVICE: &str = "addService";
/// Method on [`SERVICE_REGISTRY`] that registers a service helper factory.
pub const REGISTER_SERVICE: &str = "registerService";
/// Factory method resolved on the helper factory class.
pub const CREATE_SERVICE: &str = "createService";

/// A `(class, method)` pair identifying a managed method in the db.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MethodId {
    pub class: String,
    pub method: String,
}

impl MethodId {
    pub fn new(class: impl Into<String>, method: impl Into<String>) -> Self {
        MethodId {
            class: class.into(),
            method: method.into(),
        }
    }

    /// Splits `a.b.C.m` at the last dot into class `a.b.C` and method `m`.
    pub fn parse(s: &str) -> Option<Self> {
        let (class, method) = s.rsplit_once('.')?;
        if class.is_empty() || method.is_empty() {
            return None;
        }
        Some(MethodId::new(class, method))
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.class, self.method)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassKind {
    Class,
    Interface,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Visibility {
    Public,
    Hidden,
    Greylist,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDecl {
    pub name: String,
    pub ty: String,
    pub is_static: bool,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: String,
}

/// Base of a field access: a local variable or a class (static access).
/// The parser records the raw token; linking classifies it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldBase {
    Var(String),
    Class(String),
}

impl FieldBase {
    pub fn name(&self) -> &str {
        match self {
            FieldBase::Var(s) | FieldBase::Class(s) => s,
        }
    }
}

/// Receiver of an invoke: `call v.m(..)` targets a variable, `scall C.m(..)`
/// targets a class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CallTarget {
    Var(String),
    Class(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Arg {
    Var(String),
    Str(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Dispatch {
    Virtual,
    Interface,
    Static,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    New {
        dst: String,
        class: String,
    },
    Assign {
        dst: String,
        src: String,
    },
    FieldGet {
        dst: String,
        base: FieldBase,
        field: String,
    },
    FieldPut {
        base: FieldBase,
        field: String,
        src: String,
    },
    Invoke {
        dst: Option<String>,
        target: CallTarget,
        method: String,
        args: Vec<Arg>,
        dispatch: Dispatch,
    },
    Return {
        src: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub line: u32,
    pub kind: StmtKind,
}

impl Stmt {
    /// Variable defined by this statement, if any.
    pub fn def(&self) -> Option<&str> {
        match &self.kind {
            StmtKind::New { dst, .. }
            | StmtKind::Assign { dst, .. }
            | StmtKind::FieldGet { dst, .. } => Some(dst),
            StmtKind::Invoke { dst, .. } => dst.as_deref(),
            _ => None,
        }
    }

    /// Variables read by this statement, in syntactic order.
    pub fn uses(&self) -> Vec<&str> {
        let mut out = Vec::new();
        match &self.kind {
            StmtKind::New { .. } => {}
            StmtKind::Assign { src, .. } => out.push(src.as_str()),
            StmtKind::FieldGet { base, .. } => {
                if let FieldBase::Var(v) = base {
                    out.push(v.as_str());
                }
            }
            StmtKind::FieldPut { base, src, .. } => {
                if let FieldBase::Var(v) = base {
                    out.push(v.as_str());
                }
                out.push(src.as_str());
            }
            StmtKind::Invoke { target, args, .. } => {
                if let CallTarget::Var(v) = target {
                    out.push(v.as_str());
                }
                for a in args {
                    if let Arg::Var(v) = a {
                        out.push(v.as_str());
                    }
                }
            }
            StmtKind::Return { src } => {
                if let Some(v) = src {
                    out.push(v.as_str());
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManagedMethod {
    pub name: String,
    pub params: Vec<Param>,
    pub visibility: Visibility,
    pub permission: Option<String>,
    pub is_native: bool,
    pub body: Vec<Stmt>,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManagedClass {
    pub fqname: String,
    pub kind: ClassKind,
    /// `extends` parent first (classes only), then `implements` entries in
    /// declared order.
    pub parents: Vec<String>,
    pub fields: Vec<FieldDecl>,
    pub methods: Vec<ManagedMethod>,
    pub unit: String,
    pub line: u32,
}

impl ManagedClass {
    pub fn method(&self, name: &str) -> Option<&ManagedMethod> {
        self.methods.iter().find(|m| m.name == name)
    }

    pub fn field(&self, name: &str) -> Option<&FieldDecl> {
        self.fields.iter().find(|f| f.name == name)
    }

    pub fn is_concrete(&self) -> bool {
        self.kind == ClassKind::Class
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NativeCall {
    pub callee: String,
    pub args: Vec<Arg>,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NativeFn {
    pub name: String,
    pub params: Vec<String>,
    pub calls: Vec<NativeCall>,
    pub unit: String,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JniEntry {
    pub managed_method: String,
    pub native_fn: String,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JniRegistration {
    pub managed_class: String,
    pub entries: Vec<JniEntry>,
    pub unit: String,
    pub line: u32,
}

/// A parsed, linked corpus. Immutable after [`crate::parse_corpus`] returns;
/// safe to share read-only across parallel analysis workers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgramDb {
    pub managed_classes: BTreeMap<String, ManagedClass>,
    pub native_fns: BTreeMap<String, NativeFn>,
    pub jni_registrations: Vec<JniRegistration>,
    /// interface fqname -> implementing (stub) class fqname
    pub stub_bindings: BTreeMap<String, String>,
    /// Opaque leaf types: resolvable as references, no members of their own.
    pub externs: BTreeSet<String>,
    pub config: AnalysisConfig,
}

impl ProgramDb {
    pub fn empty() -> Self {
        ProgramDb {
            managed_classes: BTreeMap::new(),
            native_fns: BTreeMap::new(),
            jni_registrations: Vec::new(),
            stub_bindings: BTreeMap::new(),
            externs: BTreeSet::new(),
            config: AnalysisConfig::default(),
        }
    }

    pub fn class(&self, fqname: &str) -> Option<&ManagedClass> {
        self.managed_classes.get(fqname)
    }

    pub fn method(&self, id: &MethodId) -> Option<&ManagedMethod> {
        self.class(&id.class)?.method(&id.method)
    }

    /// True if `name` names a managed class/interface or an extern type.
    pub fn is_type_name(&self, name: &str) -> bool {
        self.managed_classes.contains_key(name) || self.externs.contains(name)
    }

    pub fn is_extern(&self, name: &str) -> bool {
        self.externs.contains(name)
    }

    pub fn is_interface(&self, name: &str) -> bool {
        self.class(name).is_some_and(|c| c.kind == ClassKind::Interface)
    }

    /// Walks `class` and its ancestors for the declaration of `field`,
    /// returning the declaring class and the declaration.
    pub fn resolve_field(&self, class: &str, field: &str) -> Option<(&ManagedClass, &FieldDecl)> {
        let mut stack = vec![class.to_string()];
        let mut seen = BTreeSet::new();
        while let Some(name) = stack.pop() {
            if !seen.insert(name.clone()) {
                continue;
            }
            if let Some(c) = self.class(&name) {
                if let Some(f) = c.field(field) {
                    return Some((c, f));
                }
                stack.extend(c.parents.iter().cloned());
            }
        }
        None
    }

    pub fn methods(&self) -> impl Iterator<Item = (MethodId, &ManagedMethod)> {
        self.managed_classes.values().flat_map(|c| {
            c.methods
                .iter()
                .map(move |m| (MethodId::new(&c.fqname, &m.name), m))
        })
    }
}
