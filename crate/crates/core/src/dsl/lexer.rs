use std::fmt;

use super::{Diagnostic, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Number(String),
    Semi,
    Colon,
    Comma,
    Eq,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Star,
    Arrow,
    Then,
    Bar,
    Slash,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Number(s) => write!(f, "number {s}"),
            Tok::Semi => write!(f, "';'"),
            Tok::Colon => write!(f, "':'"),
            Tok::Comma => write!(f, "','"),
            Tok::Eq => write!(f, "'='"),
            Tok::LBrace => write!(f, "'{{'"),
            Tok::RBrace => write!(f, "'}}'"),
            Tok::LBracket => write!(f, "'['"),
            Tok::RBracket => write!(f, "']'"),
            Tok::LParen => write!(f, "'('"),
            Tok::RParen => write!(f, "')'"),
            Tok::Star => write!(f, "'*'"),
            Tok::Arrow => write!(f, "'->'"),
            Tok::Then => write!(f, "'>>'"),
            Tok::Bar => write!(f, "'|'"),
            Tok::Slash => write!(f, "'/'"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub fn lex(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let (mut i, mut line, mut line_start) = (0usize, 1usize, 0usize);
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let span_at = |end: usize| Span::new(start, end, line, text[line_start..start].chars().count() + 1);
        match c {
            b'\n' => {
                i += 1;
                line += 1;
                line_start = i;
                continue;
            }
            c if c.is_ascii_whitespace() => {
                i += 1;
                continue;
            }
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                continue;
            }
            b'/' if bytes.get(i + 1) == Some(&b'/') => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'') {
                    i += 1;
                }
                tokens.push(Token {
                    tok: Tok::Ident(text[start..i].to_string()),
                    span: span_at(i),
                });
                continue;
            }
            c if c.is_ascii_digit() => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                tokens.push(Token {
                    tok: Tok::Number(text[start..i].to_string()),
                    span: span_at(i),
                });
                continue;
            }
            _ => {}
        }
        let two = &text[i..(i + 2).min(text.len())];
        let (tok, len) = match (two, c) {
            ("->", _) => (Tok::Arrow, 2),
            (">>", _) => (Tok::Then, 2),
            (_, b';') => (Tok::Semi, 1),
            (_, b':') => (Tok::Colon, 1),
            (_, b',') => (Tok::Comma, 1),
            (_, b'=') => (Tok::Eq, 1),
            (_, b'{') => (Tok::LBrace, 1),
            (_, b'}') => (Tok::RBrace, 1),
            (_, b'[') => (Tok::LBracket, 1),
            (_, b']') => (Tok::RBracket, 1),
            (_, b'(') => (Tok::LParen, 1),
            (_, b')') => (Tok::RParen, 1),
            (_, b'*') => (Tok::Star, 1),
            (_, b'|') => (Tok::Bar, 1),
            (_, b'/') => (Tok::Slash, 1),
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(Diagnostic::syntax(
                    span_at(i + ch.len_utf8()),
                    format!("unexpected character {ch:?}"),
                    Vec::new(),
                ));
            }
        };
        i += len;
        tokens.push(Token { tok, span: span_at(i) });
    }
    let column = text[line_start..].chars().count() + 1;
    tokens.push(Token {
        tok: Tok::Eof,
        span: Span::new(text.len(), text.len(), line, column),
    });
    Ok(tokens)
}
