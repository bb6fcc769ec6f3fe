//! The circuit language: declarations of a backend, finite sets, generators,
//! eventually-constant families and comb expressions.
//!
//! ```text
//! backend finfn;
//! set B = {t, f};
//! gen not : B -> B = table { t -> f, f -> t };
//! family Bs = [; B];
//! comb flip : Bs -> Bs = lift [; not];
//! ```

use std::fmt;

pub mod ast;
mod elab;
mod lexer;
mod parser;
mod printer;

pub use elab::{elaborate, elaborate_program, Circuit};
pub use parser::parse;
pub use printer::print;

/// A source region: byte offsets plus 1-based line and column of both ends.
///
/// Spans are metadata: any two spans compare equal, so syntax trees compare
/// structurally.
#[derive(Clone, Copy, Debug, Default, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
    pub end_line: usize,
    pub end_column: usize,
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl Span {
    pub(crate) fn new(start: usize, end: usize, line: usize, column: usize) -> Span {
        Span {
            start,
            end,
            line,
            column,
            end_line: line,
            end_column: column + (end - start),
        }
    }

    /// The span from the start of `self` to the end of `other`.
    pub fn to(&self, other: &Span) -> Span {
        Span {
            end: other.end,
            end_line: other.end_line,
            end_column: other.end_column,
            ..*self
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagnosticKind {
    Syntax,
    Type,
    Unsupported,
}

/// A located error from parsing or elaboration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
    pub span: Span,
    /// Tokens that would have been accepted, for syntax errors.
    pub expected: Vec<String>,
}

impl Diagnostic {
    pub(crate) fn syntax(span: Span, message: impl Into<String>, expected: Vec<String>) -> Diagnostic {
        Diagnostic {
            kind: DiagnosticKind::Syntax,
            message: message.into(),
            span,
            expected,
        }
    }

    pub(crate) fn type_error(span: Span, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            kind: DiagnosticKind::Type,
            message: message.into(),
            span,
            expected: Vec::new(),
        }
    }

    pub(crate) fn from_error(span: Span, context: &str, e: crate::Error) -> Diagnostic {
        Diagnostic {
            kind: if e.is_unsupported() {
                DiagnosticKind::Unsupported
            } else {
                DiagnosticKind::Type
            },
            message: format!("{context}: {e}"),
            span,
            expected: Vec::new(),
        }
    }

    /// Renders the diagnostic as `file:line:column: kind error: message`.
    pub fn render(&self, file: &str) -> String {
        format!("{file}:{self}")
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            DiagnosticKind::Syntax => "syntax error",
            DiagnosticKind::Type => "type error",
            DiagnosticKind::Unsupported => "unsupported",
        };
        write!(f, "{}: {kind}: {}", self.span, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostic {}
