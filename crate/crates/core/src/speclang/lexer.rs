use super::ast::Span;
use super::{Diagnostic, DiagnosticKind};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(String),
    /// `12.5`, kept as text so it can be read exactly.
    Decimal(String),
    Semi,
    Colon,
    Comma,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Slash,
    EqEq,
    NotEq,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(s) | Tok::Decimal(s) => format!("number `{s}`"),
            Tok::Semi => "`;`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Comma => "`,`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Slash => "`/`".into(),
            Tok::EqEq => "`==`".into(),
            Tok::NotEq => "`!=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

pub fn tokenize(text: &str) -> Result<Vec<(Tok, Span)>, Diagnostic> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1u32, 1u32);
    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else if c.is_some() {
                col += 1;
            }
            c
        }};
    }
    while let Some(&c) = chars.peek() {
        let span = Span::new(line, col);
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' {
            bump!();
            if chars.peek() == Some(&'/') {
                while chars.peek().is_some_and(|&c| c != '\n') {
                    bump!();
                }
            } else {
                out.push((Tok::Slash, span));
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while chars.peek().is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_') {
                s.push(bump!().unwrap());
            }
            out.push((Tok::Ident(s), span));
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while chars.peek().is_some_and(char::is_ascii_digit) {
                s.push(bump!().unwrap());
            }
            if chars.peek() == Some(&'.') {
                s.push(bump!().unwrap());
                if !chars.peek().is_some_and(char::is_ascii_digit) {
                    return Err(Diagnostic::new(DiagnosticKind::Lexical, span, format!("malformed number `{s}`")));
                }
                while chars.peek().is_some_and(char::is_ascii_digit) {
                    s.push(bump!().unwrap());
                }
                out.push((Tok::Decimal(s), span));
            } else {
                out.push((Tok::Int(s), span));
            }
            if chars.peek().is_some_and(|c| c.is_ascii_alphabetic() || *c == '_') {
                return Err(Diagnostic::new(DiagnosticKind::Lexical, span, "identifier cannot start with a digit"));
            }
            continue;
        }
        bump!();
        let tok = match c {
            ';' => Tok::Semi,
            ':' => Tok::Colon,
            ',' => Tok::Comma,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '=' if chars.peek() == Some(&'=') => {
                bump!();
                Tok::EqEq
            }
            '!' if chars.peek() == Some(&'=') => {
                bump!();
                Tok::NotEq
            }
            other => {
                return Err(Diagnostic::new(
                    DiagnosticKind::Lexical,
                    span,
                    format!("unexpected character {other:?}"),
                ))
            }
        };
        out.push((tok, span));
    }
    out.push((Tok::Eof, Span::new(line, col)));
    Ok(out)
}
