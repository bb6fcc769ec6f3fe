use std::borrow::Cow;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::stoch::{Kernel, Rational, Row};
use super::term::{Generator, ProbeGrid, Term};
use super::{Backend, Object};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub(crate) enum Payload {
    Table(Arc<[usize]>),
    Matrix(Arc<Kernel>),
    Term(Arc<Term>),
}

/// An arrow of one of the backend categories.
///
/// FinFn arrows are total tables over element indices, FinStoch arrows are
/// exact row-stochastic matrices, BigFn arrows are generator terms.
#[derive(Clone, Debug)]
pub struct Morphism {
    domain: Object,
    codomain: Object,
    payload: Payload,
}

fn same_backend(a: &Object, b: &Object) -> Result<Backend> {
    if a.backend() != b.backend() {
        return Err(Error::BackendMismatch {
            left: a.backend(),
            right: b.backend(),
        });
    }
    Ok(a.backend())
}

impl Morphism {
    /// A deterministic map given by a table of codomain indices, for FinFn or FinStoch.
    pub fn function(domain: Object, codomain: Object, table: Vec<usize>) -> Result<Morphism> {
        let backend = same_backend(&domain, &codomain)?;
        if backend == Backend::BigFn {
            return Err(Error::unsupported("tabulated maps", backend));
        }
        let (n, m) = (domain.table_size()?, codomain.size()?);
        if table.len() != n {
            return Err(Error::InvalidMorphism(format!(
                "table has {} entries for a domain of {n} elements",
                table.len()
            )));
        }
        if let Some(bad) = table.iter().find(|&&c| c >= m) {
            return Err(Error::InvalidMorphism(format!(
                "table entry {bad} outside a codomain of {m} elements"
            )));
        }
        let payload = match backend {
            Backend::FinFn => Payload::Table(table.into()),
            _ => Payload::Matrix(Arc::new(Kernel::dirac(&table))),
        };
        Ok(Morphism {
            domain,
            codomain,
            payload,
        })
    }

    pub fn from_fn(domain: Object, codomain: Object, f: impl Fn(usize) -> usize) -> Result<Morphism> {
        let table = (0..domain.table_size()?).map(f).collect();
        Morphism::function(domain, codomain, table)
    }

    /// A deterministic map from `(input label, output label)` pairs covering the domain.
    pub fn from_labels(domain: Object, codomain: Object, pairs: &[(&str, &str)]) -> Result<Morphism> {
        let mut table = vec![None; domain.table_size()?];
        for (x, y) in pairs {
            let i = domain
                .index_of_label(x)
                .ok_or_else(|| Error::InvalidMorphism(format!("{x} is not an element of {domain}")))?;
            let j = codomain
                .index_of_label(y)
                .ok_or_else(|| Error::InvalidMorphism(format!("{y} is not an element of {codomain}")))?;
            table[i] = Some(j);
        }
        let table = table
            .into_iter()
            .enumerate()
            .map(|(i, e)| {
                e.ok_or_else(|| {
                    Error::InvalidMorphism(format!("no image for {}", domain.element_label(i)))
                })
            })
            .collect::<Result<_>>()?;
        Morphism::function(domain, codomain, table)
    }

    /// A FinStoch kernel from raw rows of `(codomain index, weight)`.
    pub fn stochastic(domain: Object, codomain: Object, rows: Vec<Vec<(usize, Rational)>>) -> Result<Morphism> {
        let backend = same_backend(&domain, &codomain)?;
        if backend != Backend::FinStoch {
            return Err(Error::unsupported("stochastic matrices", backend));
        }
        if rows.len() != domain.table_size()? {
            return Err(Error::InvalidMorphism(format!(
                "matrix has {} rows for a domain of {} elements",
                rows.len(),
                domain.size()?
            )));
        }
        let kernel = Kernel::new(rows, codomain.size()?)?;
        Ok(Morphism {
            domain,
            codomain,
            payload: Payload::Matrix(Arc::new(kernel)),
        })
    }

    pub fn term(term: Arc<Term>) -> Morphism {
        Morphism {
            domain: Object::ints(term.inputs()),
            codomain: Object::ints(term.outputs()),
            payload: Payload::Term(term),
        }
    }

    pub fn generator(g: Generator) -> Morphism {
        Morphism::term(Arc::new(Term::gen(g)))
    }

    pub fn domain(&self) -> &Object {
        &self.domain
    }

    pub fn codomain(&self) -> &Object {
        &self.codomain
    }

    pub fn backend(&self) -> Backend {
        self.domain.backend()
    }

    pub fn table(&self) -> Option<&[usize]> {
        match &self.payload {
            Payload::Table(t) => Some(t),
            _ => None,
        }
    }

    pub fn kernel(&self) -> Option<&Kernel> {
        match &self.payload {
            Payload::Matrix(k) => Some(k),
            _ => None,
        }
    }

    pub fn as_term(&self) -> Option<&Arc<Term>> {
        match &self.payload {
            Payload::Term(t) => Some(t),
            _ => None,
        }
    }

    /// Image of a domain element under a FinFn map.
    pub fn apply(&self, index: usize) -> usize {
        match &self.payload {
            Payload::Table(t) => t[index],
            _ => panic!("apply is only defined for FinFn tables"),
        }
    }

    pub fn eval(&self, input: &[BigInt]) -> Vec<BigInt> {
        match &self.payload {
            Payload::Term(t) => t.eval(input),
            _ => panic!("eval is only defined for BigFn terms"),
        }
    }

    /// `(id_A ⊗ f) ∘ self` where `self : Z → A ⊗ B` and `f : B → C`, without
    /// materializing the identity on `A`.
    pub fn then_right(&self, f: &Morphism) -> Result<Morphism> {
        let rest = self
            .codomain
            .strip_suffix(&f.domain)
            .ok_or_else(|| Error::mismatch("then_right", &self.codomain, &f.domain))?;
        let codomain = rest.tensor(&f.codomain)?;
        if codomain.backend() != Backend::BigFn {
            codomain.size()?;
        }
        let payload = match (&self.payload, &f.payload) {
            (Payload::Table(t), Payload::Table(ft)) => {
                let (b, c) = (f.domain.size()?, f.codomain.size()?);
                Payload::Table(t.iter().map(|&x| (x / b) * c + ft[x % b]).collect())
            }
            (Payload::Matrix(k), Payload::Matrix(fk)) => {
                let (b, c) = (f.domain.size()?, f.codomain.size()?);
                Payload::Matrix(Arc::new(k.then_rows(|x| {
                    let base = (x / b) * c;
                    Cow::Owned(fk.row(x % b).iter().map(|(d, q)| (base + d, q.clone())).collect::<Row>())
                })))
            }
            (Payload::Term(_), Payload::Term(_)) => {
                return compose(&tensor(&identity(&rest), f)?, self);
            }
            _ => unreachable!("payload kinds follow the backend"),
        };
        Ok(Morphism {
            domain: self.domain.clone(),
            codomain,
            payload,
        })
    }

    /// `(f ⊗ id_B) ∘ self` where `self : Z → A ⊗ B` and `f : A → C`.
    pub fn then_left(&self, f: &Morphism) -> Result<Morphism> {
        let rest = self
            .codomain
            .strip_prefix(&f.domain)
            .ok_or_else(|| Error::mismatch("then_left", &self.codomain, &f.domain))?;
        let codomain = f.codomain.tensor(&rest)?;
        if codomain.backend() != Backend::BigFn {
            codomain.size()?;
        }
        let payload = match (&self.payload, &f.payload) {
            (Payload::Table(t), Payload::Table(ft)) => {
                let r = rest.size()?;
                Payload::Table(t.iter().map(|&x| ft[x / r] * r + x % r).collect())
            }
            (Payload::Matrix(k), Payload::Matrix(fk)) => {
                let r = rest.size()?;
                Payload::Matrix(Arc::new(k.then_rows(|x| {
                    let low = x % r;
                    Cow::Owned(fk.row(x / r).iter().map(|(d, q)| (d * r + low, q.clone())).collect::<Row>())
                })))
            }
            (Payload::Term(_), Payload::Term(_)) => {
                return compose(&tensor(f, &identity(&rest))?, self);
            }
            _ => unreachable!("payload kinds follow the backend"),
        };
        Ok(Morphism {
            domain: self.domain.clone(),
            codomain,
            payload,
        })
    }

    /// `self ∘ (f ⊗ id_A)` where `self : C ⊗ A → Z` and `f : B → C`.
    pub fn before_left(&self, f: &Morphism) -> Result<Morphism> {
        let rest = self
            .domain
            .strip_prefix(&f.codomain)
            .ok_or_else(|| Error::mismatch("before_left", &f.codomain, &self.domain))?;
        if let (Payload::Table(t), Payload::Table(ft)) = (&self.payload, &f.payload) {
            let domain = f.domain.tensor(&rest)?;
            domain.table_size()?;
            let r = rest.size()?;
            let table: Vec<usize> = ft
                .iter()
                .flat_map(|&c| (0..r).map(move |a| t[c * r + a]))
                .collect();
            return Ok(Morphism {
                domain,
                codomain: self.codomain.clone(),
                payload: Payload::Table(table.into()),
            });
        }
        compose(self, &tensor(f, &identity(&rest))?)
    }

    /// `self ∘ (id_A ⊗ f)` where `self : A ⊗ C → Z` and `f : B → C`.
    pub fn before_right(&self, f: &Morphism) -> Result<Morphism> {
        let rest = self
            .domain
            .strip_suffix(&f.codomain)
            .ok_or_else(|| Error::mismatch("before_right", &f.codomain, &self.domain))?;
        if let (Payload::Table(t), Payload::Table(ft)) = (&self.payload, &f.payload) {
            let domain = rest.tensor(&f.domain)?;
            domain.table_size()?;
            let (a, c) = (rest.size()?, f.codomain.size()?);
            let table: Vec<usize> = (0..a)
                .flat_map(|x| ft.iter().map(move |&y| t[x * c + y]))
                .collect();
            return Ok(Morphism {
                domain,
                codomain: self.codomain.clone(),
                payload: Payload::Table(table.into()),
            });
        }
        compose(self, &tensor(&identity(&rest), f)?)
    }

    /// Semantic equality; BigFn maps are compared on the probe grid.
    pub fn equals_on(&self, other: &Morphism, grid: &ProbeGrid) -> bool {
        self.difference_on(other, grid).is_none()
    }

    /// A witness of inequality: the label of a domain element (or probe point) where the maps differ,
    /// or a description of the boundary mismatch.
    pub fn difference_on(&self, other: &Morphism, grid: &ProbeGrid) -> Option<String> {
        if self.domain != other.domain || self.codomain != other.codomain {
            return Some(format!(
                "types differ: {} -> {} vs {} -> {}",
                self.domain, self.codomain, other.domain, other.codomain
            ));
        }
        match (&self.payload, &other.payload) {
            (Payload::Table(a), Payload::Table(b)) => a
                .iter()
                .zip(b.iter())
                .position(|(x, y)| x != y)
                .map(|i| self.domain.element_label(i)),
            (Payload::Matrix(a), Payload::Matrix(b)) => a
                .rows()
                .iter()
                .zip(b.rows())
                .position(|(x, y)| x != y)
                .map(|i| self.domain.element_label(i)),
            (Payload::Term(a), Payload::Term(b)) => {
                if Arc::ptr_eq(a, b) || a == b {
                    return None;
                }
                grid.points(a.inputs())
                    .into_iter()
                    .find(|p| a.eval(p) != b.eval(p))
                    .map(|p| {
                        let parts: Vec<String> = p.iter().map(ToString::to_string).collect();
                        super::object::format_tuple(&parts)
                    })
            }
            _ => Some("backends differ".into()),
        }
    }
}

impl PartialEq for Morphism {
    fn eq(&self, other: &Self) -> bool {
        self.equals_on(other, &ProbeGrid::default())
    }
}

/// `g ∘ f`.
pub fn compose(g: &Morphism, f: &Morphism) -> Result<Morphism> {
    same_backend(&f.codomain, &g.domain)?;
    if f.codomain != g.domain {
        return Err(Error::mismatch("composition", &f.codomain, &g.domain));
    }
    let payload = match (&g.payload, &f.payload) {
        (Payload::Table(gt), Payload::Table(ft)) => Payload::Table(ft.iter().map(|&x| gt[x]).collect()),
        (Payload::Matrix(gk), Payload::Matrix(fk)) => Payload::Matrix(Arc::new(Kernel::compose(gk, fk))),
        (Payload::Term(gt), Payload::Term(ft)) => Payload::Term(Term::compose(gt, ft)?),
        _ => unreachable!("payload kinds follow the backend"),
    };
    Ok(Morphism {
        domain: f.domain.clone(),
        codomain: g.codomain.clone(),
        payload,
    })
}

/// `f ⊗ g`.
pub fn tensor(f: &Morphism, g: &Morphism) -> Result<Morphism> {
    same_backend(&f.domain, &g.domain)?;
    let domain = f.domain.tensor(&g.domain)?;
    let codomain = f.codomain.tensor(&g.codomain)?;
    let payload = match (&f.payload, &g.payload) {
        (Payload::Table(ft), Payload::Table(gt)) => {
            domain.table_size()?;
            codomain.size()?;
            let m = g.codomain.size()?;
            let mut t = Vec::with_capacity(ft.len() * gt.len());
            for &a in ft.iter() {
                for &b in gt.iter() {
                    t.push(a * m + b);
                }
            }
            Payload::Table(t.into())
        }
        (Payload::Matrix(fk), Payload::Matrix(gk)) => {
            domain.table_size()?;
            codomain.size()?;
            Payload::Matrix(Arc::new(Kernel::tensor(fk, gk, g.codomain.size()?)))
        }
        (Payload::Term(ft), Payload::Term(gt)) => Payload::Term(Term::tensor(ft, gt)),
        _ => unreachable!("payload kinds follow the backend"),
    };
    Ok(Morphism {
        domain,
        codomain,
        payload,
    })
}

pub fn identity(x: &Object) -> Morphism {
    match x {
        Object::Ints { arity } => Morphism::generator(Generator::Id(*arity)),
        _ => {
            let n = x.table_size().expect("identity on an oversized object");
            Morphism::function(x.clone(), x.clone(), (0..n).collect()).expect("identity table")
        }
    }
}

/// The symmetry `X ⊗ Y → Y ⊗ X`.
pub fn swap(x: &Object, y: &Object) -> Result<Morphism> {
    if let (Object::Ints { arity: a }, Object::Ints { arity: b }) = (x, y) {
        return Ok(Morphism::generator(Generator::Swap(*a, *b)));
    }
    let domain = x.tensor(y)?;
    let codomain = y.tensor(x)?;
    let (n, m) = (x.size()?, y.size()?);
    Morphism::from_fn(domain, codomain, |i| (i % m) * n + i / m)
}

/// The diagonal `X → X ⊗ X`; only cartesian backends have one.
pub fn copy(x: &Object) -> Result<Morphism> {
    match x.backend() {
        Backend::FinStoch => Err(Error::unsupported("copy", Backend::FinStoch)),
        Backend::BigFn => Ok(Morphism::generator(Generator::Copy(x.width()))),
        Backend::FinFn => {
            let n = x.size()?;
            Morphism::from_fn(x.clone(), x.tensor(x)?, |i| i * n + i)
        }
    }
}

/// The unique map to the unit; in FinStoch this is marginalization.
pub fn discard(x: &Object) -> Result<Morphism> {
    match x.backend() {
        Backend::BigFn => Ok(Morphism::generator(Generator::Discard(x.width()))),
        b => Morphism::from_fn(x.clone(), Object::unit(b), |_| 0),
    }
}

/// Pushes a state `s : I → X` forward along `f : X → Y`.
pub fn apply_to_state(f: &Morphism, s: &Morphism) -> Result<Morphism> {
    if !s.domain.is_unit() {
        return Err(Error::mismatch("state", &s.domain, &Object::unit(s.backend())));
    }
    compose(f, s)
}

/// The pairing `⟨f, g⟩ = (f ⊗ g) ∘ copy` of two maps out of the same object (cartesian backends).
pub fn pair(f: &Morphism, g: &Morphism) -> Result<Morphism> {
    if f.domain != g.domain {
        return Err(Error::mismatch("pairing", &f.domain, &g.domain));
    }
    match (&f.payload, &g.payload) {
        (Payload::Table(ft), Payload::Table(gt)) => {
            let codomain = f.codomain.tensor(&g.codomain)?;
            codomain.size()?;
            let m = g.codomain.size()?;
            let table: Vec<usize> = ft.iter().zip(gt.iter()).map(|(a, b)| a * m + b).collect();
            Ok(Morphism {
                domain: f.domain.clone(),
                codomain,
                payload: Payload::Table(table.into()),
            })
        }
        _ => compose(&tensor(f, g)?, &copy(&f.domain)?),
    }
}

/// First and second projections `X ⊗ Y → X`, `X ⊗ Y → Y`, built from discard.
pub fn proj_left(x: &Object, y: &Object) -> Result<Morphism> {
    tensor(&identity(x), &discard(y)?)
}

pub fn proj_right(x: &Object, y: &Object) -> Result<Morphism> {
    tensor(&discard(x)?, &identity(y))
}

impl fmt::Display for Morphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.domain, self.codomain)?;
        match &self.payload {
            Payload::Table(t) => {
                let parts: Vec<String> = t
                    .iter()
                    .enumerate()
                    .map(|(i, &j)| format!("{} -> {}", self.domain.element_label(i), self.codomain.element_label(j)))
                    .collect();
                write!(f, " = table {{{}}}", parts.join(", "))
            }
            Payload::Matrix(k) => {
                let mut parts = Vec::new();
                for (i, row) in k.rows().iter().enumerate() {
                    for (j, p) in row {
                        parts.push(format!(
                            "{} -> {} : {}",
                            self.domain.element_label(i),
                            self.codomain.element_label(*j),
                            p
                        ));
                    }
                }
                write!(f, " = matrix {{{}}}", parts.join(", "))
            }
            Payload::Term(t) => write!(f, " = {t}"),
        }
    }
}

/// Exact rational in canonical JSON form: numerator and positive denominator as decimal strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalJson {
    pub num: String,
    pub den: String,
}

impl From<&Rational> for RationalJson {
    fn from(r: &Rational) -> Self {
        RationalJson {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
        }
    }
}

impl TryFrom<&RationalJson> for Rational {
    type Error = Error;

    fn try_from(r: &RationalJson) -> Result<Rational> {
        let num: BigInt = r
            .num
            .parse()
            .map_err(|_| Error::InvalidMorphism(format!("bad numerator {:?}", r.num)))?;
        let den: BigInt = r
            .den
            .parse()
            .map_err(|_| Error::InvalidMorphism(format!("bad denominator {:?}", r.den)))?;
        if den <= BigInt::from(0) {
            return Err(Error::InvalidMorphism("denominators must be positive".into()));
        }
        Ok(Rational::new(num, den))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MorphismRepr {
    backend: Backend,
    domain: Object,
    codomain: Object,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    table: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    matrix: Option<Vec<Vec<(String, RationalJson)>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    term: Option<Term>,
}

impl Serialize for Morphism {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut repr = MorphismRepr {
            backend: self.backend(),
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            table: None,
            matrix: None,
            term: None,
        };
        match &self.payload {
            Payload::Table(t) => {
                repr.table = Some(t.iter().map(|&j| self.codomain.element_label(j)).collect());
            }
            Payload::Matrix(k) => {
                repr.matrix = Some(
                    k.rows()
                        .iter()
                        .map(|row| {
                            row.iter()
                                .map(|(j, p)| (self.codomain.element_label(*j), RationalJson::from(p)))
                                .collect()
                        })
                        .collect(),
                );
            }
            Payload::Term(t) => repr.term = Some((**t).clone()),
        }
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Morphism {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = MorphismRepr::deserialize(d)?;
        let build = || -> Result<Morphism> {
            if repr.domain.backend() != repr.backend || repr.codomain.backend() != repr.backend {
                return Err(Error::InvalidMorphism("object backends disagree with the morphism".into()));
            }
            let index = |o: &Object, l: &str| {
                o.index_of_label(l)
                    .ok_or_else(|| Error::InvalidMorphism(format!("{l} is not an element of {o}")))
            };
            match (&repr.table, &repr.matrix, &repr.term) {
                (Some(t), None, None) if repr.backend == Backend::FinFn => {
                    let table = t.iter().map(|l| index(&repr.codomain, l)).collect::<Result<_>>()?;
                    Morphism::function(repr.domain.clone(), repr.codomain.clone(), table)
                }
                (None, Some(m), None) if repr.backend == Backend::FinStoch => {
                    let rows = m
                        .iter()
                        .map(|row| {
                            row.iter()
                                .map(|(l, p)| Ok((index(&repr.codomain, l)?, Rational::try_from(p)?)))
                                .collect::<Result<Vec<_>>>()
                        })
                        .collect::<Result<_>>()?;
                    Morphism::stochastic(repr.domain.clone(), repr.codomain.clone(), rows)
                }
                (None, None, Some(t)) if repr.backend == Backend::BigFn => {
                    let m = Morphism::term(Arc::new(t.clone()));
                    if m.domain != repr.domain || m.codomain != repr.codomain {
                        return Err(Error::InvalidMorphism("term arity disagrees with declared objects".into()));
                    }
                    Ok(m)
                }
                _ => Err(Error::InvalidMorphism(
                    "expected exactly one payload (table, matrix or term) matching the backend".into(),
                )),
            }
        };
        build().map_err(D::Error::custom)
    }
}
