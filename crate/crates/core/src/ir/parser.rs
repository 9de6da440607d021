//! Recursive-descent parser for the corpus grammar. One declaration header or
//! statement per line; `#` comments; whitespace-insensitive within a line.
//!
//! Parsing is total: every input either yields a db or a positioned
//! [`CorpusError`]. Unknown statement forms are hard errors, never skipped —
//! silently dropping a statement would corrupt reachability results.

use crate::error::CorpusError;
use crate::ir::lexer::{lex, Spanned, Tok};
use crate::ir::link;
use crate::ir::types::*;

/// Parsed top-level declarations of one unit, before linking.
#[derive(Debug)]
pub(crate) enum RawDecl {
    Extern {
        name: String,
    },
    Stub {
        iface: String,
        class: String,
        unit: String,
        line: u32,
    },
    Class(ManagedClass),
    Native(NativeFn),
    Jni(JniRegistration),
}

/// Parses and links a corpus given as `(unit name, text)` pairs.
///
/// The returned db has every cross-reference resolved in-db or declared
/// `extern`; duplicate declarations and dangling references are hard errors.
pub fn parse_corpus<S: AsRef<str>, T: AsRef<str>>(
    sources: &[(S, T)],
) -> Result<ProgramDb, CorpusError> {
    let mut decls = Vec::new();
    for (unit, text) in sources {
        let unit = unit.as_ref();
        let toks = lex(unit, text.as_ref())?;
        let mut p = Parser {
            unit,
            toks: &toks,
            pos: 0,
        };
        p.parse_unit(&mut decls)?;
    }
    link::link(decls)
}

struct Parser<'a> {
    unit: &'a str,
    toks: &'a [Spanned],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn line(&self) -> u32 {
        self.toks[self.pos].line
    }

    fn bump(&mut self) -> &Tok {
        let t = &self.toks[self.pos].tok;
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, message: impl Into<String>) -> CorpusError {
        CorpusError::syntax(self.unit, self.line(), message)
    }

    fn expect(&mut self, want: &Tok) -> Result<(), CorpusError> {
        if self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!(
                "expected {}, found {}",
                want.describe(),
                self.peek().describe()
            )))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), CorpusError> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.bump();
                Ok(())
            }
            other => Err(self.err(format!("expected `{kw}`, found {}", other.describe()))),
        }
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self, what: &str) -> Result<(String, u32), CorpusError> {
        let line = self.line();
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok((s, line))
            }
            other => Err(self.err(format!("expected {what}, found {}", other.describe()))),
        }
    }

    /// Identifier that must not contain dots (variables, method names, ...).
    fn plain_ident(&mut self, what: &str) -> Result<(String, u32), CorpusError> {
        let (s, line) = self.ident(what)?;
        if s.contains('.') {
            return Err(CorpusError::syntax(
                self.unit,
                line,
                format!("{what} must not contain `.`: `{s}`"),
            ));
        }
        Ok((s, line))
    }

    fn skip_newlines(&mut self) {
        while matches!(self.peek(), Tok::Newline) {
            self.bump();
        }
    }

    fn end_of_line(&mut self) -> Result<(), CorpusError> {
        match self.peek() {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::Eof => Ok(()),
            other => Err(self.err(format!("expected end of line, found {}", other.describe()))),
        }
    }

    fn parse_unit(&mut self, decls: &mut Vec<RawDecl>) -> Result<(), CorpusError> {
        loop {
            self.skip_newlines();
            match self.peek() {
                Tok::Eof => return Ok(()),
                Tok::Ident(kw) => match kw.as_str() {
                    "extern" => {
                        self.bump();
                        let (name, _) = self.ident("type name")?;
                        self.end_of_line()?;
                        decls.push(RawDecl::Extern { name });
                    }
                    "stub" => {
                        self.bump();
                        let (iface, line) = self.ident("interface name")?;
                        self.expect(&Tok::Arrow)?;
                        let (class, _) = self.ident("class name")?;
                        self.end_of_line()?;
                        decls.push(RawDecl::Stub {
                            iface,
                            class,
                            unit: self.unit.to_string(),
                            line,
                        });
                    }
                    "managed" => {
                        self.bump();
                        decls.push(RawDecl::Class(self.parse_managed()?));
                    }
                    "native" => {
                        self.bump();
                        decls.push(RawDecl::Native(self.parse_native()?));
                    }
                    "jni_register" => {
                        self.bump();
                        decls.push(RawDecl::Jni(self.parse_jni()?));
                    }
                    other => {
                        return Err(self.err(format!(
                            "expected a declaration (extern, managed, stub, native, jni_register), found `{other}`"
                        )))
                    }
                },
                other => {
                    return Err(self.err(format!(
                        "expected a declaration, found {}",
                        other.describe()
                    )))
                }
            }
        }
    }

    fn parse_managed(&mut self) -> Result<ManagedClass, CorpusError> {
        if self.at_kw("class") {
            self.bump();
            self.parse_class()
        } else if self.at_kw("interface") {
            self.bump();
            self.parse_interface()
        } else {
            Err(self.err("expected `class` or `interface` after `managed`"))
        }
    }

    fn parse_class(&mut self) -> Result<ManagedClass, CorpusError> {
        let (fqname, line) = self.ident("class name")?;
        let mut parents = Vec::new();
        if self.at_kw("extends") {
            self.bump();
            parents.push(self.ident("parent class name")?.0);
        }
        if self.at_kw("implements") {
            self.bump();
            loop {
                parents.push(self.ident("interface name")?.0);
                if matches!(self.peek(), Tok::Comma) {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(&Tok::LBrace)?;
        self.end_of_line()?;

        let mut fields = Vec::new();
        let mut methods = Vec::new();
        loop {
            self.skip_newlines();
            match self.peek() {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Ident(kw) if kw == "field" => {
                    self.bump();
                    let (name, fline) = self.plain_ident("field name")?;
                    self.expect(&Tok::Colon)?;
                    let (ty, _) = self.ident("field type")?;
                    let is_static = if self.at_kw("static") {
                        self.bump();
                        true
                    } else {
                        false
                    };
                    self.end_of_line()?;
                    fields.push(FieldDecl {
                        name,
                        ty,
                        is_static,
                        line: fline,
                    });
                }
                Tok::Ident(kw) if kw == "method" => {
                    self.bump();
                    methods.push(self.parse_method()?);
                }
                other => {
                    return Err(self.err(format!(
                        "expected `field`, `method`, or `}}` in class body, found {}",
                        other.describe()
                    )))
                }
            }
        }
        self.end_of_line()?;
        Ok(ManagedClass {
            fqname,
            kind: ClassKind::Class,
            parents,
            fields,
            methods,
            unit: self.unit.to_string(),
            line,
        })
    }

    fn parse_interface(&mut self) -> Result<ManagedClass, CorpusError> {
        let (fqname, line) = self.ident("interface name")?;
        self.expect(&Tok::LBrace)?;
        self.end_of_line()?;
        let mut methods = Vec::new();
        loop {
            self.skip_newlines();
            match self.peek() {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Ident(kw) if kw == "method" => {
                    self.bump();
                    let (name, mline) = self.plain_ident("method name")?;
                    let params = self.parse_params()?;
                    self.expect(&Tok::Semi)?;
                    self.end_of_line()?;
                    methods.push(ManagedMethod {
                        name,
                        params,
                        visibility: Visibility::Public,
                        permission: None,
                        is_native: false,
                        body: Vec::new(),
                        line: mline,
                    });
                }
                other => {
                    return Err(self.err(format!(
                        "expected `method` or `}}` in interface body, found {}",
                        other.describe()
                    )))
                }
            }
        }
        self.end_of_line()?;
        Ok(ManagedClass {
            fqname,
            kind: ClassKind::Interface,
            parents: Vec::new(),
            fields: Vec::new(),
            methods,
            unit: self.unit.to_string(),
            line,
        })
    }

    fn parse_params(&mut self) -> Result<Vec<Param>, CorpusError> {
        self.expect(&Tok::LParen)?;
        let mut params = Vec::new();
        if !matches!(self.peek(), Tok::RParen) {
            loop {
                let (name, _) = self.plain_ident("parameter name")?;
                self.expect(&Tok::Colon)?;
                let (ty, _) = self.ident("parameter type")?;
                params.push(Param { name, ty });
                if matches!(self.peek(), Tok::Comma) {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(&Tok::RParen)?;
        Ok(params)
    }

    fn parse_method(&mut self) -> Result<ManagedMethod, CorpusError> {
        let (name, line) = self.plain_ident("method name")?;
        let params = self.parse_params()?;
        let mut visibility = None;
        let mut permission = None;
        let mut is_native = false;
        loop {
            match self.peek() {
                Tok::Ident(kw) => match kw.as_str() {
                    "public" | "hidden" | "greylist" => {
                        if visibility.is_some() {
                            return Err(self.err("visibility given twice"));
                        }
                        visibility = Some(match kw.as_str() {
                            "public" => Visibility::Public,
                            "hidden" => Visibility::Hidden,
                            _ => Visibility::Greylist,
                        });
                        self.bump();
                    }
                    "permission" => {
                        if permission.is_some() {
                            return Err(self.err("permission given twice"));
                        }
                        self.bump();
                        self.expect(&Tok::Eq)?;
                        let value = match self.peek().clone() {
                            Tok::Ident(s) => {
                                self.bump();
                                s
                            }
                            Tok::Str(s) => {
                                self.bump();
                                s
                            }
                            other => {
                                return Err(self.err(format!(
                                    "expected permission value, found {}",
                                    other.describe()
                                )))
                            }
                        };
                        permission = Some(value);
                    }
                    "native" => {
                        if is_native {
                            return Err(self.err("`native` given twice"));
                        }
                        is_native = true;
                        self.bump();
                    }
                    _ => break,
                },
                _ => break,
            }
        }
        self.expect(&Tok::LBrace)?;
        let body = self.parse_body()?;
        self.end_of_line()?;
        Ok(ManagedMethod {
            name,
            params,
            visibility: visibility.unwrap_or(Visibility::Public),
            permission,
            is_native,
            body,
            line,
        })
    }

    fn parse_body(&mut self) -> Result<Vec<Stmt>, CorpusError> {
        let mut body = Vec::new();
        loop {
            self.skip_newlines();
            if matches!(self.peek(), Tok::RBrace) {
                self.bump();
                return Ok(body);
            }
            body.push(self.parse_stmt()?);
            match self.peek() {
                Tok::Newline => {
                    self.bump();
                }
                Tok::Eof => return Err(self.err("unterminated method body")),
                other => {
                    return Err(self.err(format!(
                        "expected end of line after statement, found {}",
                        other.describe()
                    )))
                }
            }
        }
    }

    fn parse_stmt(&mut self) -> Result<Stmt, CorpusError> {
        let line = self.line();
        let (first, _) = self.ident("statement")?;
        match first.as_str() {
            "return" => {
                let src = match self.peek().clone() {
                    Tok::Ident(v) => {
                        if v.contains('.') {
                            return Err(self.err("return value must be a local variable"));
                        }
                        self.bump();
                        Some(v)
                    }
                    _ => None,
                };
                return Ok(Stmt {
                    line,
                    kind: StmtKind::Return { src },
                });
            }
            "call" | "scall" => {
                let kind = self.parse_invoke(None, &first, line)?;
                return Ok(Stmt { line, kind });
            }
            _ => {}
        }

        if first.contains('.') {
            // `base.field = src` — field put.
            let (base, field) = split_member(&first);
            self.expect(&Tok::Eq)?;
            let (src, _) = self.plain_ident("assignment source variable")?;
            return Ok(Stmt {
                line,
                kind: StmtKind::FieldPut {
                    base: raw_base(base),
                    field,
                    src,
                },
            });
        }

        // `v = ...`
        self.expect(&Tok::Eq)?;
        let (rhs, _) = self.ident("expression")?;
        let kind = match rhs.as_str() {
            "new" => {
                let (class, _) = self.ident("class name")?;
                StmtKind::New { dst: first, class }
            }
            "call" | "scall" => self.parse_invoke(Some(first), &rhs, line)?,
            _ if rhs.contains('.') => {
                let (base, field) = split_member(&rhs);
                StmtKind::FieldGet {
                    dst: first,
                    base: raw_base(base),
                    field,
                }
            }
            _ => StmtKind::Assign {
                dst: first,
                src: rhs,
            },
        };
        Ok(Stmt { line, kind })
    }

    fn parse_invoke(
        &mut self,
        dst: Option<String>,
        keyword: &str,
        line: u32,
    ) -> Result<StmtKind, CorpusError> {
        let (target_tok, _) = self.ident("call target")?;
        let Some((base, method)) = target_tok.rsplit_once('.') else {
            return Err(CorpusError::syntax(
                self.unit,
                line,
                format!("`{keyword}` target must be `receiver.method`: `{target_tok}`"),
            ));
        };
        if base.is_empty() || method.is_empty() || method.contains('.') {
            return Err(CorpusError::syntax(
                self.unit,
                line,
                format!("malformed call target `{target_tok}`"),
            ));
        }
        let (target, dispatch) = if keyword == "scall" {
            (CallTarget::Class(base.to_string()), Dispatch::Static)
        } else {
            if base.contains('.') {
                return Err(CorpusError::syntax(
                    self.unit,
                    line,
                    format!("`call` receiver must be a local variable (use `scall` for class targets): `{base}`"),
                ));
            }
            // Linking refines Virtual to Interface from the receiver's type.
            (CallTarget::Var(base.to_string()), Dispatch::Virtual)
        };
        let args = self.parse_args()?;
        Ok(StmtKind::Invoke {
            dst,
            target,
            method: method.to_string(),
            args,
            dispatch,
        })
    }

    fn parse_args(&mut self) -> Result<Vec<Arg>, CorpusError> {
        self.expect(&Tok::LParen)?;
        let mut args = Vec::new();
        if !matches!(self.peek(), Tok::RParen) {
            loop {
                match self.peek().clone() {
                    Tok::Ident(v) => {
                        if v.contains('.') {
                            return Err(self.err(format!(
                                "argument must be a local variable or string literal: `{v}`"
                            )));
                        }
                        self.bump();
                        args.push(Arg::Var(v));
                    }
                    Tok::Str(s) => {
                        self.bump();
                        args.push(Arg::Str(s));
                    }
                    other => {
                        return Err(
                            self.err(format!("expected argument, found {}", other.describe()))
                        )
                    }
                }
                if matches!(self.peek(), Tok::Comma) {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(&Tok::RParen)?;
        Ok(args)
    }

    fn parse_native(&mut self) -> Result<NativeFn, CorpusError> {
        self.expect_kw("fn")?;
        let (name, line) = self.plain_ident("native function name")?;
        self.expect(&Tok::LParen)?;
        let mut params = Vec::new();
        if !matches!(self.peek(), Tok::RParen) {
            loop {
                params.push(self.plain_ident("parameter name")?.0);
                if matches!(self.peek(), Tok::Comma) {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        self.expect(&Tok::RParen)?;
        self.expect(&Tok::LBrace)?;
        self.end_of_line()?;
        let mut calls = Vec::new();
        loop {
            self.skip_newlines();
            match self.peek() {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Ident(kw) if kw == "call" => {
                    let cline = self.line();
                    self.bump();
                    let (callee, _) = self.ident("callee name")?;
                    let args = self.parse_args()?;
                    self.end_of_line()?;
                    calls.push(NativeCall {
                        callee,
                        args,
                        line: cline,
                    });
                }
                other => {
                    return Err(self.err(format!(
                        "expected `call` or `}}` in native body, found {}",
                        other.describe()
                    )))
                }
            }
        }
        self.end_of_line()?;
        Ok(NativeFn {
            name,
            params,
            calls,
            unit: self.unit.to_string(),
            line,
        })
    }

    fn parse_jni(&mut self) -> Result<JniRegistration, CorpusError> {
        let line = self.line();
        self.expect_kw("class")?;
        self.expect(&Tok::Eq)?;
        let (managed_class, _) = self.ident("class name")?;
        self.expect(&Tok::LBrace)?;
        let mut entries = Vec::new();
        loop {
            self.skip_newlines();
            match self.peek().clone() {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Str(managed_method) => {
                    let eline = self.line();
                    self.bump();
                    self.expect(&Tok::Arrow)?;
                    let (native_fn, _) = self.plain_ident("native function name")?;
                    entries.push(JniEntry {
                        managed_method,
                        native_fn,
                        line: eline,
                    });
                    if matches!(self.peek(), Tok::Comma) {
                        self.bump();
                    }
                }
                other => {
                    return Err(self.err(format!(
                        "expected `\"method\" -> native_fn` or `}}`, found {}",
                        other.describe()
                    )))
                }
            }
        }
        self.end_of_line()?;
        Ok(JniRegistration {
            managed_class,
            entries,
            unit: self.unit.to_string(),
            line,
        })
    }
}

fn split_member(token: &str) -> (String, String) {
    let (base, field) = token.rsplit_once('.').expect("caller checked for dot");
    (base.to_string(), field.to_string())
}

/// Dotted bases are always classes; plain ones are classified during linking.
fn raw_base(base: String) -> FieldBase {
    if base.contains('.') {
        FieldBase::Class(base)
    } else {
        FieldBase::Var(base)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const AUDIO_FIXTURE: &str = r#"
# Minimal audio service: one class, two methods, one JNI registration.
extern IAudioRoutesObserver
extern ArrayList

managed class AudioService {
  field mObservers: ArrayList
  method startWatchingRoutes(cb: IAudioRoutesObserver) public {
    call this.linkToDeath(cb)
    l = this.mObservers
    call l.add(cb)
    return
  }
  method linkToDeath(cb: IAudioRoutesObserver) hidden native { }
}

native fn android_os_BinderProxy_linkToDeath(env, obj, recipient) {
  call env.NewGlobalRef(recipient)
}

jni_register class=AudioService {
  "linkToDeath" -> android_os_BinderProxy_linkToDeath
}
"#;

    #[test]
    fn parses_audio_fixture_counts() {
        let db = parse_corpus(&[("audio", AUDIO_FIXTURE)]).unwrap();
        assert_eq!(db.managed_classes.len(), 1);
        assert_eq!(db.class("AudioService").unwrap().methods.len(), 2);
        assert_eq!(db.jni_registrations.len(), 1);
        assert_eq!(db.native_fns.len(), 1);
    }

    #[test]
    fn empty_source_list_gives_empty_db() {
        let db = parse_corpus::<&str, &str>(&[]).unwrap();
        assert!(db.managed_classes.is_empty());
        assert!(db.native_fns.is_empty());
        assert!(db.jni_registrations.is_empty());
        assert!(db.stub_bindings.is_empty());
    }

    #[test]
    fn undeclared_reference_is_link_error() {
        let text = "managed class A {\n  field f: Foo\n}\n";
        let err = parse_corpus(&[("t", text)]).unwrap_err();
        match err {
            CorpusError::Link { name, .. } => assert_eq!(name, "Foo"),
            other => panic!("expected link error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_statement_form_is_syntax_error() {
        let text = "managed class A {\n  method m() {\n    jump somewhere\n  }\n}\n";
        let err = parse_corpus(&[("t", text)]).unwrap_err();
        assert!(matches!(err, CorpusError::Syntax { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn call_receiver_must_be_variable() {
        let text = "managed class A {\n  method m() {\n    call a.b.m()\n  }\n}\n";
        let err = parse_corpus(&[("t", text)]).unwrap_err();
        assert!(matches!(err, CorpusError::Syntax { .. }), "{err:?}");
    }

    #[test]
    fn statements_parse_into_expected_kinds() {
        let text = concat!(
            "extern T\nextern Registry\n",
            "managed class A {\n",
            "  field g: T static\n",
            "  method m(p: T) {\n",
            "    v = new T\n",
            "    w = v\n",
            "    x = this.g\n",
            "    Registry.cache = w\n",
            "    r = scall A.m(p)\n",
            "    call p.notify(\"hello\", v)\n",
            "    return r\n",
            "  }\n",
            "}\n",
        );
        let db = parse_corpus(&[("t", text)]).unwrap();
        let body = &db.method(&MethodId::new("A", "m")).unwrap().body;
        assert_eq!(body.len(), 7);
        assert!(matches!(&body[0].kind, StmtKind::New { dst, class } if dst == "v" && class == "T"));
        assert!(matches!(&body[3].kind, StmtKind::FieldPut { base: FieldBase::Class(c), .. } if c == "Registry"));
        assert!(
            matches!(&body[4].kind, StmtKind::Invoke { dispatch: Dispatch::Static, target: CallTarget::Class(c), .. } if c == "A")
        );
        assert!(
            matches!(&body[5].kind, StmtKind::Invoke { args, .. } if matches!(&args[0], Arg::Str(s) if s == "hello"))
        );
    }
}
