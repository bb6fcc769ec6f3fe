use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::{Diagnostic, Span};

const ITEM_KEYWORDS: [&str; 5] = ["backend", "set", "gen", "family", "comb"];
const RESERVED: [&str; 14] = [
    "backend", "set", "gen", "family", "comb", "table", "matrix", "builtin", "lift", "delay",
    "feedback", "stages", "unit", "int",
];

/// Parses a circuit program, stopping at the first syntax error.
pub fn parse(text: &str) -> Result<Program, Diagnostic> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let mut items = Vec::new();
    while p.peek() != &Tok::Eof {
        items.push(p.item()?);
    }
    Ok(Program { items })
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

fn is_ident(t: &Tok, word: &str) -> bool {
    matches!(t, Tok::Ident(s) if s == word)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> Diagnostic {
        Diagnostic::syntax(
            self.span(),
            format!("unexpected {}", self.peek()),
            expected.iter().map(|s| s.to_string()).collect(),
        )
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<Span, Diagnostic> {
        if self.peek() == &tok {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&[&tok.to_string()]))
        }
    }

    /// Expects the delimiter closing a construct opened at `opener`; a missing one is
    /// reported at the opener.
    fn close(&mut self, tok: Tok, opener: Span, what: &str) -> Result<Span, Diagnostic> {
        if self.peek() == &tok {
            Ok(self.bump().span)
        } else {
            Err(Diagnostic::syntax(
                opener,
                format!("unclosed {what}: found {} where {tok} was expected", self.peek()),
                vec![tok.to_string()],
            ))
        }
    }

    fn name(&mut self, what: &str) -> Result<Ident, Diagnostic> {
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                let span = self.bump().span;
                Ok(Ident { name: s, span })
            }
            Tok::Ident(s) => Err(Diagnostic::syntax(
                self.span(),
                format!("'{s}' is a reserved word and cannot name a {what}"),
                vec![what.to_string()],
            )),
            _ => Err(self.unexpected(&[what])),
        }
    }

    fn label(&mut self) -> Result<Ident, Diagnostic> {
        match self.peek().clone() {
            Tok::Ident(s) | Tok::Number(s) => {
                let span = self.bump().span;
                Ok(Ident { name: s, span })
            }
            _ => Err(self.unexpected(&["label"])),
        }
    }

    fn item(&mut self) -> Result<Item, Diagnostic> {
        let start = self.span();
        let word = match self.peek() {
            Tok::Ident(s) if ITEM_KEYWORDS.contains(&s.as_str()) => s.clone(),
            _ => return Err(self.unexpected(&ITEM_KEYWORDS.map(|k| format!("'{k}'")).iter().map(String::as_str).collect::<Vec<_>>())),
        };
        self.bump();
        let item = match word.as_str() {
            "backend" => {
                let backend = self.label()?;
                if backend.name.parse::<crate::backend::Backend>().is_err() {
                    return Err(Diagnostic::syntax(
                        backend.span,
                        format!("unknown backend '{}'", backend.name),
                        vec!["'finfn'".into(), "'bigfn'".into(), "'finstoch'".into()],
                    ));
                }
                Item::Backend { backend, span: start }
            }
            "set" => {
                let name = self.name("set name")?;
                self.expect(Tok::Eq)?;
                let open = self.expect(Tok::LBrace)?;
                let mut labels = vec![self.label()?];
                while self.eat(&Tok::Comma) {
                    labels.push(self.label()?);
                }
                self.close(Tok::RBrace, open, "set")?;
                Item::Set { name, labels, span: start }
            }
            "gen" => {
                let name = self.name("generator name")?;
                self.expect(Tok::Colon)?;
                let domain = self.obj()?;
                self.expect(Tok::Arrow)?;
                let codomain = self.obj()?;
                self.expect(Tok::Eq)?;
                let body = self.gen_body()?;
                Item::Gen { name, domain, codomain, body, span: start }
            }
            "family" => {
                let name = self.name("family name")?;
                self.expect(Tok::Eq)?;
                let open = self.expect(Tok::LBracket)?;
                let family = self.fam_body(open)?;
                Item::Family { name, family, span: start }
            }
            _ => {
                let name = self.name("comb name")?;
                self.expect(Tok::Colon)?;
                let inputs = self.fam_ref()?;
                self.expect(Tok::Arrow)?;
                let outputs = self.fam_ref()?;
                self.expect(Tok::Eq)?;
                let body = Box::new(self.comb_seq()?);
                Item::Comb { name, inputs, outputs, body, span: start }
            }
        };
        self.expect(Tok::Semi)?;
        let span = start.to(&self.prev_span());
        Ok(match item {
            Item::Backend { backend, .. } => Item::Backend { backend, span },
            Item::Set { name, labels, .. } => Item::Set { name, labels, span },
            Item::Gen { name, domain, codomain, body, .. } => Item::Gen { name, domain, codomain, body, span },
            Item::Family { name, family, .. } => Item::Family { name, family, span },
            Item::Comb { name, inputs, outputs, body, .. } => Item::Comb { name, inputs, outputs, body, span },
        })
    }

    fn obj(&mut self) -> Result<ObjExpr, Diagnostic> {
        let first = self.obj_atom()?;
        if self.peek() != &Tok::Star {
            return Ok(first);
        }
        let mut parts = vec![first];
        while self.eat(&Tok::Star) {
            parts.push(self.obj_atom()?);
        }
        let span = parts[0].span().to(parts.last().unwrap().span());
        Ok(ObjExpr::Tensor(parts, span))
    }

    fn obj_atom(&mut self) -> Result<ObjExpr, Diagnostic> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "unit" => Ok(ObjExpr::Unit(self.bump().span)),
            Tok::Ident(s) if s == "int" => Ok(ObjExpr::Int(self.bump().span)),
            Tok::Ident(_) => Ok(ObjExpr::Name(self.name("object")?)),
            Tok::LParen => {
                let open = self.bump().span;
                let inner = self.obj()?;
                let close = self.close(Tok::RParen, open, "parenthesis")?;
                Ok(ObjExpr::Paren(Box::new(inner), open.to(&close)))
            }
            _ => Err(self.unexpected(&["object", "'unit'", "'int'", "'('"])),
        }
    }

    fn elem(&mut self) -> Result<Elem, Diagnostic> {
        match self.peek() {
            Tok::Star => Ok(Elem::Star(self.bump().span)),
            Tok::LParen => {
                let open = self.bump().span;
                let mut parts = vec![self.elem()?];
                while self.eat(&Tok::Comma) {
                    parts.push(self.elem()?);
                }
                let close = self.close(Tok::RParen, open, "tuple")?;
                Ok(Elem::Tuple(parts, open.to(&close)))
            }
            Tok::Ident(_) | Tok::Number(_) => Ok(Elem::Label(self.label()?)),
            _ => Err(self.unexpected(&["element", "'*'", "'('"])),
        }
    }

    fn number(&mut self) -> Result<(String, Span), Diagnostic> {
        match self.peek().clone() {
            Tok::Number(s) => Ok((s, self.bump().span)),
            _ => Err(self.unexpected(&["number"])),
        }
    }

    fn gen_body(&mut self) -> Result<GenBody, Diagnostic> {
        let kw = self.span();
        match self.peek() {
            t if is_ident(t, "table") => {
                self.bump();
                let open = self.expect(Tok::LBrace)?;
                let mut rows = Vec::new();
                if self.peek() != &Tok::RBrace {
                    loop {
                        let x = self.elem()?;
                        self.expect(Tok::Arrow)?;
                        let y = self.elem()?;
                        rows.push((x, y));
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                }
                self.close(Tok::RBrace, open, "table")?;
                Ok(GenBody::Table(rows))
            }
            t if is_ident(t, "matrix") => {
                self.bump();
                let open = self.expect(Tok::LBrace)?;
                let mut rows = Vec::new();
                if self.peek() != &Tok::RBrace {
                    loop {
                        let x = self.elem()?;
                        self.expect(Tok::Arrow)?;
                        let y = self.elem()?;
                        self.expect(Tok::Colon)?;
                        let (num, s) = self.number()?;
                        self.expect(Tok::Slash)?;
                        let (den, e) = self.number()?;
                        rows.push((x, y, RationalLit { num, den, span: s.to(&e) }));
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                }
                self.close(Tok::RBrace, open, "matrix")?;
                Ok(GenBody::Matrix(rows))
            }
            t if is_ident(t, "builtin") => {
                self.bump();
                Ok(GenBody::Builtin(self.label()?))
            }
            _ => Err(Diagnostic::syntax(
                kw,
                format!("unexpected {}", self.peek()),
                vec!["'table'".into(), "'matrix'".into(), "'builtin'".into()],
            )),
        }
    }

    /// The contents of `[O₀, …; TAIL]` after the opening bracket.
    fn fam_body(&mut self, open: Span) -> Result<FamExpr, Diagnostic> {
        let mut prefix = Vec::new();
        if self.peek() != &Tok::Semi {
            prefix.push(self.obj()?);
            while self.eat(&Tok::Comma) {
                prefix.push(self.obj()?);
            }
        }
        if self.peek() != &Tok::Semi {
            return Err(self.unexpected(&["';'", "','"]));
        }
        self.bump();
        let tail = self.obj()?;
        let close = self.close(Tok::RBracket, open, "family")?;
        Ok(FamExpr { prefix, tail, span: open.to(&close) })
    }

    fn fam_ref(&mut self) -> Result<FamRef, Diagnostic> {
        match self.peek() {
            Tok::LBracket => {
                let open = self.bump().span;
                Ok(FamRef::Inline(self.fam_body(open)?))
            }
            _ => Ok(FamRef::Name(self.name("family")?)),
        }
    }

    fn morph_seq(&mut self) -> Result<MorphExpr, Diagnostic> {
        let first = self.morph_par()?;
        if self.peek() != &Tok::Then {
            return Ok(first);
        }
        let mut parts = vec![first];
        while self.eat(&Tok::Then) {
            parts.push(self.morph_par()?);
        }
        let span = parts[0].span().to(parts.last().unwrap().span());
        Ok(MorphExpr::Seq(parts, span))
    }

    fn morph_par(&mut self) -> Result<MorphExpr, Diagnostic> {
        let first = self.morph_atom()?;
        if self.peek() != &Tok::Star {
            return Ok(first);
        }
        let mut parts = vec![first];
        while self.eat(&Tok::Star) {
            parts.push(self.morph_atom()?);
        }
        let span = parts[0].span().to(parts.last().unwrap().span());
        Ok(MorphExpr::Par(parts, span))
    }

    fn morph_atom(&mut self) -> Result<MorphExpr, Diagnostic> {
        match self.peek().clone() {
            Tok::LParen => {
                let open = self.bump().span;
                let inner = self.morph_seq()?;
                let close = self.close(Tok::RParen, open, "parenthesis")?;
                Ok(MorphExpr::Paren(Box::new(inner), open.to(&close)))
            }
            Tok::Ident(s)
                if matches!(s.as_str(), "id" | "swap" | "copy" | "discard")
                    && self.peek_at(1) == &Tok::LParen =>
            {
                let kw = self.bump().span;
                let open = self.bump().span;
                let a = self.obj()?;
                let b = if s == "swap" {
                    self.expect(Tok::Comma)?;
                    Some(self.obj()?)
                } else {
                    None
                };
                let close = self.close(Tok::RParen, open, &format!("{s}(…)"))?;
                let span = kw.to(&close);
                Ok(match s.as_str() {
                    "id" => MorphExpr::Id(a, span),
                    "copy" => MorphExpr::Copy(a, span),
                    "discard" => MorphExpr::Discard(a, span),
                    _ => MorphExpr::Swap(a, b.expect("swap has two objects"), span),
                })
            }
            Tok::Ident(_) => Ok(MorphExpr::Name(self.name("generator")?)),
            _ => Err(self.unexpected(&["generator", "'id('", "'swap('", "'copy('", "'discard('", "'('"])),
        }
    }

    fn starts_comb(&self, t: &Tok) -> bool {
        match t {
            Tok::LParen => true,
            Tok::Ident(s) => !ITEM_KEYWORDS.contains(&s.as_str()),
            _ => false,
        }
    }

    fn comb_seq(&mut self) -> Result<CombExpr, Diagnostic> {
        let first = self.comb_par()?;
        let mut parts = vec![first];
        while self.peek() == &Tok::Semi && self.starts_comb(self.peek_at(1)) {
            self.bump();
            parts.push(self.comb_par()?);
        }
        if parts.len() == 1 {
            return Ok(parts.pop().unwrap());
        }
        let span = parts[0].span().to(parts.last().unwrap().span());
        Ok(CombExpr::Seq(parts, span))
    }

    fn comb_par(&mut self) -> Result<CombExpr, Diagnostic> {
        let first = self.comb_unary()?;
        if self.peek() != &Tok::Bar {
            return Ok(first);
        }
        let mut parts = vec![first];
        while self.eat(&Tok::Bar) {
            parts.push(self.comb_unary()?);
        }
        let span = parts[0].span().to(parts.last().unwrap().span());
        Ok(CombExpr::Par(parts, span))
    }

    fn comb_unary(&mut self) -> Result<CombExpr, Diagnostic> {
        let kw = self.span();
        match self.peek() {
            t if is_ident(t, "delay") => {
                self.bump();
                let inner = self.comb_unary()?;
                let span = kw.to(inner.span());
                Ok(CombExpr::Delay(Box::new(inner), span))
            }
            t if is_ident(t, "feedback") => {
                self.bump();
                if self.peek() != &Tok::LBracket {
                    return Err(self.unexpected(&["'['"]));
                }
                self.bump();
                let carrier = if matches!(self.peek(), Tok::Ident(_)) && self.peek_at(1) != &Tok::Star
                    && self.peek_at(1) != &Tok::Comma && self.peek_at(1) != &Tok::Semi
                {
                    let name = self.name("family")?;
                    self.close(Tok::RBracket, kw, "feedback carrier")?;
                    FamRef::Name(name)
                } else {
                    FamRef::Inline(self.fam_body(kw)?)
                };
                let inner = self.comb_unary()?;
                let span = kw.to(inner.span());
                Ok(CombExpr::Feedback(carrier, Box::new(inner), span))
            }
            _ => self.comb_atom(),
        }
    }

    fn comb_atom(&mut self) -> Result<CombExpr, Diagnostic> {
        let kw = self.span();
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let inner = self.comb_seq()?;
                let close = self.close(Tok::RParen, kw, "parenthesis")?;
                Ok(CombExpr::Paren(Box::new(inner), kw.to(&close)))
            }
            Tok::Ident(s) if s == "lift" => {
                self.bump();
                if self.peek() != &Tok::LBracket {
                    return Err(self.unexpected(&["'['"]));
                }
                self.bump();
                let mut prefix = Vec::new();
                if self.peek() != &Tok::Semi {
                    prefix.push(self.morph_seq()?);
                    while self.eat(&Tok::Comma) {
                        prefix.push(self.morph_seq()?);
                    }
                }
                if self.peek() != &Tok::Semi {
                    return Err(self.unexpected(&["';'", "','"]));
                }
                self.bump();
                let tail = self.morph_seq()?;
                let close = self.close(Tok::RBracket, kw, "lift")?;
                Ok(CombExpr::Lift { prefix, tail: Box::new(tail), span: kw.to(&close) })
            }
            Tok::Ident(s) if s == "stages" => {
                self.bump();
                if self.peek() != &Tok::LBrace {
                    return Err(self.unexpected(&["'{'"]));
                }
                self.bump();
                let mut entries = Vec::new();
                loop {
                    let start = self.span();
                    if is_ident(self.peek(), "tail") {
                        self.bump();
                        self.expect(Tok::LParen)?;
                        let (k, ks) = self.number()?;
                        self.expect(Tok::RParen)?;
                        let index = self.stage_index(&k, ks)?;
                        if index != entries.len() {
                            return Err(Diagnostic::syntax(
                                ks,
                                format!("tail({index}) must follow exactly the stages 0..{index}"),
                                vec![entries.len().to_string()],
                            ));
                        }
                        let tail = self.stage_rest(index, start)?;
                        self.eat(&Tok::Semi);
                        let close = self.close(Tok::RBrace, kw, "stages block")?;
                        return Ok(CombExpr::Stages {
                            entries,
                            tail: Box::new(tail),
                            span: kw.to(&close),
                        });
                    }
                    match self.peek().clone() {
                        Tok::Number(k) => {
                            let ks = self.bump().span;
                            let index = self.stage_index(&k, ks)?;
                            if index != entries.len() {
                                return Err(Diagnostic::syntax(
                                    ks,
                                    format!("stage {index} out of order"),
                                    vec![entries.len().to_string()],
                                ));
                            }
                            entries.push(self.stage_rest(index, start)?);
                            if self.peek() != &Tok::Semi {
                                return Err(self.unexpected(&["';'"]));
                            }
                            self.bump();
                        }
                        Tok::RBrace | Tok::Eof | Tok::Semi => {
                            return Err(Diagnostic::syntax(
                                kw,
                                format!("stages block without a tail entry; found {}", self.peek()),
                                vec!["'tail'".into()],
                            ))
                        }
                        _ => return Err(self.unexpected(&["stage index", "'tail'"])),
                    }
                }
            }
            Tok::Ident(_) => Ok(CombExpr::Name(self.name("comb")?)),
            _ => Err(self.unexpected(&["comb", "'lift'", "'stages'", "'delay'", "'feedback'", "'('"])),
        }
    }

    fn stage_index(&self, k: &str, span: Span) -> Result<usize, Diagnostic> {
        k.parse()
            .map_err(|_| Diagnostic::syntax(span, format!("stage index {k} is too large"), Vec::new()))
    }

    /// `: MEMORY, PIECE` after a stage index.
    fn stage_rest(&mut self, index: usize, start: Span) -> Result<StageEntry, Diagnostic> {
        self.expect(Tok::Colon)?;
        let memory = self.obj()?;
        self.expect(Tok::Comma)?;
        let piece = self.morph_seq()?;
        let span = start.to(piece.span());
        Ok(StageEntry { index, memory, piece, span })
    }
}
