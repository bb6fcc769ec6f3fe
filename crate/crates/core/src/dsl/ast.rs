use super::Span;

/// A parsed circuit program. Spans never take part in equality.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Program {
    pub items: Vec<Item>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Item {
    Backend {
        backend: Ident,
        span: Span,
    },
    Set {
        name: Ident,
        labels: Vec<Ident>,
        span: Span,
    },
    Gen {
        name: Ident,
        domain: ObjExpr,
        codomain: ObjExpr,
        body: GenBody,
        span: Span,
    },
    Family {
        name: Ident,
        family: FamExpr,
        span: Span,
    },
    Comb {
        name: Ident,
        inputs: FamRef,
        outputs: FamRef,
        body: Box<CombExpr>,
        span: Span,
    },
}

impl Item {
    pub fn span(&self) -> &Span {
        match self {
            Item::Backend { span, .. }
            | Item::Set { span, .. }
            | Item::Gen { span, .. }
            | Item::Family { span, .. }
            | Item::Comb { span, .. } => span,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ObjExpr {
    Name(Ident),
    Unit(Span),
    Int(Span),
    Tensor(Vec<ObjExpr>, Span),
    Paren(Box<ObjExpr>, Span),
}

impl ObjExpr {
    pub fn span(&self) -> &Span {
        match self {
            ObjExpr::Name(i) => &i.span,
            ObjExpr::Unit(s) | ObjExpr::Int(s) | ObjExpr::Tensor(_, s) | ObjExpr::Paren(_, s) => s,
        }
    }

    /// The top-level tensor factors, looking through one pair of parentheses.
    pub fn factors(&self) -> Vec<&ObjExpr> {
        match self {
            ObjExpr::Tensor(parts, _) => parts.iter().collect(),
            ObjExpr::Paren(inner, _) => inner.factors(),
            other => vec![other],
        }
    }
}

/// An element of a finite object: `*`, a label, or a tuple.
#[derive(Clone, Debug, PartialEq)]
pub enum Elem {
    Star(Span),
    Label(Ident),
    Tuple(Vec<Elem>, Span),
}

impl Elem {
    pub fn span(&self) -> &Span {
        match self {
            Elem::Star(s) | Elem::Tuple(_, s) => s,
            Elem::Label(i) => &i.span,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RationalLit {
    pub num: String,
    pub den: String,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GenBody {
    Table(Vec<(Elem, Elem)>),
    Matrix(Vec<(Elem, Elem, RationalLit)>),
    Builtin(Ident),
}

/// An eventually-constant family `[O₀, O₁; TAIL]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FamExpr {
    pub prefix: Vec<ObjExpr>,
    pub tail: ObjExpr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FamRef {
    Name(Ident),
    Inline(FamExpr),
}

impl FamRef {
    pub fn span(&self) -> &Span {
        match self {
            FamRef::Name(i) => &i.span,
            FamRef::Inline(f) => &f.span,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MorphExpr {
    Name(Ident),
    Id(ObjExpr, Span),
    Swap(ObjExpr, ObjExpr, Span),
    Copy(ObjExpr, Span),
    Discard(ObjExpr, Span),
    /// `a >> b`: `a` first.
    Seq(Vec<MorphExpr>, Span),
    Par(Vec<MorphExpr>, Span),
    Paren(Box<MorphExpr>, Span),
}

impl MorphExpr {
    pub fn span(&self) -> &Span {
        match self {
            MorphExpr::Name(i) => &i.span,
            MorphExpr::Id(_, s)
            | MorphExpr::Swap(_, _, s)
            | MorphExpr::Copy(_, s)
            | MorphExpr::Discard(_, s)
            | MorphExpr::Seq(_, s)
            | MorphExpr::Par(_, s)
            | MorphExpr::Paren(_, s) => s,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StageEntry {
    pub index: usize,
    pub memory: ObjExpr,
    pub piece: MorphExpr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CombExpr {
    Name(Ident),
    Lift {
        prefix: Vec<MorphExpr>,
        tail: Box<MorphExpr>,
        span: Span,
    },
    Stages {
        entries: Vec<StageEntry>,
        /// The `tail(k)` entry; its `index` is `k`.
        tail: Box<StageEntry>,
        span: Span,
    },
    /// `a ; b`: `a` first.
    Seq(Vec<CombExpr>, Span),
    Par(Vec<CombExpr>, Span),
    Delay(Box<CombExpr>, Span),
    Feedback(FamRef, Box<CombExpr>, Span),
    Paren(Box<CombExpr>, Span),
}

impl CombExpr {
    pub fn span(&self) -> &Span {
        match self {
            CombExpr::Name(i) => &i.span,
            CombExpr::Lift { span, .. }
            | CombExpr::Stages { span, .. }
            | CombExpr::Seq(_, span)
            | CombExpr::Par(_, span)
            | CombExpr::Delay(_, span)
            | CombExpr::Feedback(_, _, span)
            | CombExpr::Paren(_, span) => span,
        }
    }
}
