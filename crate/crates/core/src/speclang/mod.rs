//! The `.pct` specification language: ports, distributions, trace
//! predicates, contracts and implementations over a fixed horizon.
//!
//! The grammar is in `docs/grammar.ebnf`.

pub mod ast;
mod compose;
mod lexer;
mod lower;
mod parser;
mod printer;

use std::fmt;

use thiserror::Error;

pub use ast::{Document, Span};
pub use compose::compose_decls;
pub use lower::{denote, System};
pub use parser::{parse, KEYWORDS};
pub use printer::{expr as print_expr, print};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagnosticKind {
    Lexical,
    Syntax,
    Resolution,
    Semantic,
}

impl fmt::Display for DiagnosticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiagnosticKind::Lexical => "lexical",
            DiagnosticKind::Syntax => "syntax",
            DiagnosticKind::Resolution => "resolution",
            DiagnosticKind::Semantic => "semantic",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{}:{}: {kind} error: {message}", span.line, span.col)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub span: Span,
    pub message: String,
}

impl Diagnostic {
    pub fn new(kind: DiagnosticKind, span: Span, message: impl Into<String>) -> Self {
        Diagnostic { kind, span, message: message.into() }
    }
}

/// Parses and lowers a document.
pub fn load(text: &str) -> Result<System, Diagnostic> {
    System::from_document(parse(text)?)
}
