//! Canonical corpus printer. `parse(print(db))` reproduces `db` up to unit
//! names and line numbers, so printed-form equality is the structural
//! identity check used by the round-trip tests.

use crate::ir::types::*;
use std::fmt::Write;

/// Renders the whole db as one corpus unit in canonical order: externs,
/// stubs, managed declarations, native functions, JNI registrations.
pub fn print_corpus(db: &ProgramDb) -> String {
    let mut out = String::new();
    for name in &db.externs {
        writeln!(out, "extern {name}").unwrap();
    }
    for (iface, class) in &db.stub_bindings {
        writeln!(out, "stub {iface} -> {class}").unwrap();
    }
    for class in db.managed_classes.values() {
        print_class(&mut out, db, class);
    }
    for f in db.native_fns.values() {
        print_native(&mut out, f);
    }
    for reg in &db.jni_registrations {
        writeln!(out, "jni_register class={} {{", reg.managed_class).unwrap();
        for e in &reg.entries {
            writeln!(out, "  \"{}\" -> {}", escape(&e.managed_method), e.native_fn).unwrap();
        }
        writeln!(out, "}}").unwrap();
    }
    out
}

fn print_class(out: &mut String, db: &ProgramDb, class: &ManagedClass) {
    match class.kind {
        ClassKind::Interface => {
            writeln!(out, "managed interface {} {{", class.fqname).unwrap();
            for m in &class.methods {
                writeln!(out, "  method {}({});", m.name, params(&m.params)).unwrap();
            }
            writeln!(out, "}}").unwrap();
        }
        ClassKind::Class => {
            write!(out, "managed class {}", class.fqname).unwrap();
            // The merged parent list keeps [extends?, implements..] order; a
            // leading concrete class prints back as `extends`.
            let mut implemented: Vec<&str> = class.parents.iter().map(|s| s.as_str()).collect();
            if let Some(first) = class.parents.first() {
                if db.class(first).is_some_and(|c| c.is_concrete()) {
                    write!(out, " extends {first}").unwrap();
                    implemented.remove(0);
                }
            }
            if !implemented.is_empty() {
                write!(out, " implements {}", implemented.join(", ")).unwrap();
            }
            writeln!(out, " {{").unwrap();
            for f in &class.fields {
                let st = if f.is_static { " static" } else { "" };
                writeln!(out, "  field {}: {}{}", f.name, f.ty, st).unwrap();
            }
            for m in &class.methods {
                print_method(out, m);
            }
            writeln!(out, "}}").unwrap();
        }
    }
}

fn print_method(out: &mut String, m: &ManagedMethod) {
    write!(out, "  method {}({})", m.name, params(&m.params)).unwrap();
    match m.visibility {
        Visibility::Public => write!(out, " public").unwrap(),
        Visibility::Hidden => write!(out, " hidden").unwrap(),
        Visibility::Greylist => write!(out, " greylist").unwrap(),
    }
    if let Some(p) = &m.permission {
        write!(out, " permission=\"{}\"", escape(p)).unwrap();
    }
    if m.is_native {
        write!(out, " native").unwrap();
    }
    if m.body.is_empty() {
        writeln!(out, " {{ }}").unwrap();
        return;
    }
    writeln!(out, " {{").unwrap();
    for s in &m.body {
        writeln!(out, "    {}", stmt(s)).unwrap();
    }
    writeln!(out, "  }}").unwrap();
}

fn stmt(s: &Stmt) -> String {
    match &s.kind {
        StmtKind::New { dst, class } => format!("{dst} = new {class}"),
        StmtKind::Assign { dst, src } => format!("{dst} = {src}"),
        StmtKind::FieldGet { dst, base, field } => format!("{dst} = {}.{field}", base.name()),
        StmtKind::FieldPut { base, field, src } => format!("{}.{field} = {src}", base.name()),
        StmtKind::Invoke {
            dst,
            target,
            method,
            args,
            dispatch,
        } => {
            let prefix = dst
                .as_ref()
                .map(|d| format!("{d} = "))
                .unwrap_or_default();
            let keyword = if *dispatch == Dispatch::Static {
                "scall"
            } else {
                "call"
            };
            let recv = match target {
                CallTarget::Var(v) => v.clone(),
                CallTarget::Class(c) => c.clone(),
            };
            format!("{prefix}{keyword} {recv}.{method}({})", arg_list(args))
        }
        StmtKind::Return { src } => match src {
            Some(v) => format!("return {v}"),
            None => "return".to_string(),
        },
    }
}

fn print_native(out: &mut String, f: &NativeFn) {
    let plist: Vec<&str> = f.params.iter().map(|s| s.as_str()).collect();
    if f.calls.is_empty() {
        writeln!(out, "native fn {}({}) {{ }}", f.name, plist.join(", ")).unwrap();
        return;
    }
    writeln!(out, "native fn {}({}) {{", f.name, plist.join(", ")).unwrap();
    for c in &f.calls {
        writeln!(out, "  call {}({})", c.callee, arg_list(&c.args)).unwrap();
    }
    writeln!(out, "}}").unwrap();
}

fn params(ps: &[Param]) -> String {
    let parts: Vec<String> = ps.iter().map(|p| format!("{}: {}", p.name, p.ty)).collect();
    parts.join(", ")
}

fn arg_list(args: &[Arg]) -> String {
    let parts: Vec<String> = args
        .iter()
        .map(|a| match a {
            Arg::Var(v) => v.clone(),
            Arg::Str(s) => format!("\"{}\"", escape(s)),
        })
        .collect();
    parts.join(", ")
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parser::parse_corpus;

    #[test]
    fn print_parse_print_is_stable() {
        let text = concat!(
            "extern IBinder\nextern ArrayList\n",
            "managed interface ICb {\n  method asBinder();\n}\n",
            "managed class Stub implements ICb {\n",
            "  field mBinder: IBinder\n",
            "  method asBinder() public {\n    v = new Stub\n    return v\n  }\n",
            "}\n",
            "managed class Svc {\n",
            "  field mList: ArrayList static\n",
            "  method reg(cb: ICb) greylist permission=\"android.permission.X\" {\n",
            "    b = call cb.asBinder()\n",
            "    l = Svc.mList\n",
            "    call l.add(cb)\n",
            "    return\n",
            "  }\n",
            "  method nat(x: IBinder) hidden native { }\n",
            "}\n",
            "native fn n_nat(env, x) {\n  call env.NewGlobalRef(x)\n}\n",
            "jni_register class=Svc {\n  \"nat\" -> n_nat\n}\n",
        );
        let db1 = parse_corpus(&[("u", text)]).unwrap();
        let printed1 = print_corpus(&db1);
        let db2 = parse_corpus(&[("printed", &printed1)]).unwrap();
        let printed2 = print_corpus(&db2);
        assert_eq!(printed1, printed2);
    }

    #[test]
    fn string_escapes_survive() {
        let text = "managed class A {\n  method m(x: A) native { }\n}\nnative fn f() { }\njni_register class=A { \"m\" -> f }\n";
        let db = parse_corpus(&[("u", text)]).unwrap();
        let printed = print_corpus(&db);
        let db2 = parse_corpus(&[("p", &printed)]).unwrap();
        assert_eq!(db.jni_registrations[0].entries, db2.jni_registrations[0].entries);
    }
}
