//! Tokenizer for the corpus grammar. Line-oriented: newlines are tokens so
//! the parser can enforce one declaration/statement per line; everything else
//! is whitespace-insensitive. `#` starts a comment running to end of line.

use crate::error::CorpusError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    /// Identifier or dotted name (`foo`, `a.b.C`, `env.NewGlobalRef`).
    Ident(String),
    /// Double-quoted string literal, unescaped.
    Str(String),
    Newline,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Colon,
    Semi,
    Eq,
    /// `->`
    Arrow,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::Newline => "end of line".to_string(),
            Tok::LBrace => "`{`".to_string(),
            Tok::RBrace => "`}`".to_string(),
            Tok::LParen => "`(`".to_string(),
            Tok::RParen => "`)`".to_string(),
            Tok::Comma => "`,`".to_string(),
            Tok::Colon => "`:`".to_string(),
            Tok::Semi => "`;`".to_string(),
            Tok::Eq => "`=`".to_string(),
            Tok::Arrow => "`->`".to_string(),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Spanned {
    pub tok: Tok,
    pub line: u32,
}

fn ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '$' | '.')
}

/// Tokenizes one unit. Total: any input either tokenizes or yields a
/// positioned syntax error.
pub fn lex(unit: &str, text: &str) -> Result<Vec<Spanned>, CorpusError> {
    let mut out = Vec::new();
    let mut line: u32 = 1;
    let mut chars = text.chars().peekable();

    macro_rules! push {
        ($tok:expr) => {
            out.push(Spanned { tok: $tok, line })
        };
    }

    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                chars.next();
                push!(Tok::Newline);
                line += 1;
            }
            ' ' | '\t' | '\r' => {
                chars.next();
            }
            '#' => {
                while let Some(&c2) = chars.peek() {
                    if c2 == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('"') => break,
                        Some('\\') => match chars.next() {
                            Some('"') => s.push('"'),
                            Some('\\') => s.push('\\'),
                            Some(other) => {
                                return Err(CorpusError::syntax(
                                    unit,
                                    line,
                                    format!("unsupported escape `\\{other}` in string"),
                                ))
                            }
                            None => {
                                return Err(CorpusError::syntax(unit, line, "unterminated string"))
                            }
                        },
                        Some('\n') | None => {
                            return Err(CorpusError::syntax(unit, line, "unterminated string"))
                        }
                        Some(other) => s.push(other),
                    }
                }
                push!(Tok::Str(s));
            }
            '{' => {
                chars.next();
                push!(Tok::LBrace);
            }
            '}' => {
                chars.next();
                push!(Tok::RBrace);
            }
            '(' => {
                chars.next();
                push!(Tok::LParen);
            }
            ')' => {
                chars.next();
                push!(Tok::RParen);
            }
            ',' => {
                chars.next();
                push!(Tok::Comma);
            }
            ':' => {
                chars.next();
                push!(Tok::Colon);
            }
            ';' => {
                chars.next();
                push!(Tok::Semi);
            }
            '=' => {
                chars.next();
                push!(Tok::Eq);
            }
            '-' => {
                chars.next();
                if chars.peek() == Some(&'>') {
                    chars.next();
                    push!(Tok::Arrow);
                } else {
                    return Err(CorpusError::syntax(unit, line, "expected `->` after `-`"));
                }
            }
            c if ident_char(c) => {
                let mut s = String::new();
                while let Some(&c2) = chars.peek() {
                    if ident_char(c2) {
                        s.push(c2);
                        chars.next();
                    } else {
                        break;
                    }
                }
                push!(Tok::Ident(s));
            }
            other => {
                return Err(CorpusError::syntax(
                    unit,
                    line,
                    format!("unexpected character `{other}`"),
                ));
            }
        }
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_mixed_line() {
        let toks = lex("t", "jni_register class=Foo { \"init\" -> f_init }").unwrap();
        let kinds: Vec<&Tok> = toks.iter().map(|s| &s.tok).collect();
        assert!(matches!(kinds[0], Tok::Ident(s) if s == "jni_register"));
        assert!(kinds.contains(&&Tok::Arrow));
        assert!(kinds.iter().any(|t| matches!(t, Tok::Str(s) if s == "init")));
    }

    #[test]
    fn positions_track_lines() {
        let toks = lex("t", "a\nb\nc").unwrap();
        let lines: Vec<u32> = toks
            .iter()
            .filter(|s| matches!(s.tok, Tok::Ident(_)))
            .map(|s| s.line)
            .collect();
        assert_eq!(lines, vec![1, 2, 3]);
    }

    #[test]
    fn bad_character_is_positioned() {
        let err = lex("t", "ok\n!").unwrap_err();
        assert_eq!(err.line(), 2);
    }

    #[test]
    fn comments_are_skipped() {
        let toks = lex("t", "# all comment\nname # trailing\n").unwrap();
        let idents: Vec<&str> = toks
            .iter()
            .filter_map(|s| match &s.tok {
                Tok::Ident(i) => Some(i.as_str()),
                _ => None,
            })
            .collect();
        assert_eq!(idents, vec!["name"]);
    }
}
