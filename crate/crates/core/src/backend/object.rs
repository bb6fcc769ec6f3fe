use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::Backend;
use crate::error::{Error, Result};

/// Upper bound on the number of elements of a finite object, so element indices fit in `usize`.
pub const MAX_ELEMENTS: u128 = 1 << 62;

/// Upper bound on the domain size of a tabulated map or matrix.
pub const MAX_TABLE: usize = 1 << 24;

/// An atomic finite set: an ordered list of pairwise distinct labels.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct LabelSet(Arc<[String]>);

impl LabelSet {
    pub fn labels(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.0.iter().position(|l| l == label)
    }
}

impl fmt::Display for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.0.join(","))
    }
}

/// An object of one of the semantic categories.
///
/// Tensor is strict: finite objects are flat lists of atomic factors and
/// integer objects are arities, so associators and unitors are identities.
/// Elements of a finite object are numbered in lexicographic order with the
/// leftmost factor most significant.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Object {
    Finite {
        backend: Backend,
        factors: Vec<LabelSet>,
    },
    Ints {
        arity: usize,
    },
}

fn valid_label(label: &str) -> bool {
    !label.is_empty()
        && label
            .chars()
            .all(|c| !c.is_whitespace() && !matches!(c, '(' | ')' | ',' | '*' | '"'))
}

impl Object {
    pub fn unit(backend: Backend) -> Object {
        match backend {
            Backend::BigFn => Object::Ints { arity: 0 },
            b => Object::Finite {
                backend: b,
                factors: Vec::new(),
            },
        }
    }

    /// An atomic finite set. The singleton `["*"]` is the monoidal unit.
    pub fn set<I, S>(backend: Backend, labels: I) -> Result<Object>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        if backend == Backend::BigFn {
            return Err(Error::unsupported("finite sets", backend));
        }
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidObject("a set needs at least one element".into()));
        }
        if labels.len() == 1 && labels[0] == "*" {
            return Ok(Object::unit(backend));
        }
        for (i, l) in labels.iter().enumerate() {
            if !valid_label(l) {
                return Err(Error::InvalidObject(format!("bad element label {l:?}")));
            }
            if labels[..i].contains(l) {
                return Err(Error::InvalidObject(format!("duplicate element label {l:?}")));
            }
        }
        Ok(Object::Finite {
            backend,
            factors: vec![LabelSet(labels.into())],
        })
    }

    pub fn ints(arity: usize) -> Object {
        Object::Ints { arity }
    }

    pub fn backend(&self) -> Backend {
        match self {
            Object::Finite { backend, .. } => *backend,
            Object::Ints { .. } => Backend::BigFn,
        }
    }

    pub fn is_unit(&self) -> bool {
        self.width() == 0
    }

    /// Number of atomic factors (finite) or integer wires.
    pub fn width(&self) -> usize {
        match self {
            Object::Finite { factors, .. } => factors.len(),
            Object::Ints { arity } => *arity,
        }
    }

    pub fn factors(&self) -> &[LabelSet] {
        match self {
            Object::Finite { factors, .. } => factors,
            Object::Ints { .. } => &[],
        }
    }

    pub fn tensor(&self, other: &Object) -> Result<Object> {
        match (self, other) {
            (Object::Ints { arity: a }, Object::Ints { arity: b }) => Ok(Object::Ints { arity: a + b }),
            (
                Object::Finite { backend: b1, factors: f1 },
                Object::Finite { backend: b2, factors: f2 },
            ) if b1 == b2 => {
                let mut factors = f1.clone();
                factors.extend(f2.iter().cloned());
                Ok(Object::Finite {
                    backend: *b1,
                    factors,
                })
            }
            _ => Err(Error::BackendMismatch {
                left: self.backend(),
                right: other.backend(),
            }),
        }
    }

    /// Tensor of a sequence of objects; the empty sequence gives the unit.
    pub fn tensor_all<'a, I>(backend: Backend, objects: I) -> Result<Object>
    where
        I: IntoIterator<Item = &'a Object>,
    {
        objects
            .into_iter()
            .try_fold(Object::unit(backend), |acc, o| acc.tensor(o))
    }

    /// The object `R` with `prefix ⊗ R = self`, if `prefix` is a leading factor block.
    pub fn strip_prefix(&self, prefix: &Object) -> Option<Object> {
        match (self, prefix) {
            (Object::Ints { arity }, Object::Ints { arity: p }) => {
                arity.checked_sub(*p).map(|arity| Object::Ints { arity })
            }
            (Object::Finite { backend, factors }, Object::Finite { backend: pb, factors: pf })
                if backend == pb && factors.starts_with(pf) =>
            {
                Some(Object::Finite {
                    backend: *backend,
                    factors: factors[pf.len()..].to_vec(),
                })
            }
            _ => None,
        }
    }

    /// The object `L` with `L ⊗ suffix = self`, if `suffix` is a trailing factor block.
    pub fn strip_suffix(&self, suffix: &Object) -> Option<Object> {
        match (self, suffix) {
            (Object::Ints { arity }, Object::Ints { arity: s }) => {
                arity.checked_sub(*s).map(|arity| Object::Ints { arity })
            }
            (Object::Finite { backend, factors }, Object::Finite { backend: sb, factors: sf })
                if backend == sb && factors.ends_with(sf) =>
            {
                Some(Object::Finite {
                    backend: *backend,
                    factors: factors[..factors.len() - sf.len()].to_vec(),
                })
            }
            _ => None,
        }
    }

    /// Number of elements of a finite object, checked against [`MAX_TABLE`] so it can be enumerated.
    pub fn table_size(&self) -> Result<usize> {
        let n = self.size()?;
        if n > MAX_TABLE {
            return Err(Error::TooLarge(n as u128));
        }
        Ok(n)
    }

    /// Number of elements of a finite object.
    pub fn size(&self) -> Result<usize> {
        match self {
            Object::Ints { .. } => Err(Error::unsupported("element enumeration", Backend::BigFn)),
            Object::Finite { factors, .. } => {
                let mut n: u128 = 1;
                for f in factors {
                    n *= f.len() as u128;
                    if n > MAX_ELEMENTS {
                        return Err(Error::TooLarge(n));
                    }
                }
                Ok(n as usize)
            }
        }
    }

    /// Atom indices (one per factor) of the element with the given index.
    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let factors = self.factors();
        let mut atoms = vec![0; factors.len()];
        for (slot, f) in atoms.iter_mut().zip(factors).rev() {
            *slot = index % f.len();
            index /= f.len();
        }
        atoms
    }

    pub fn encode(&self, atoms: &[usize]) -> usize {
        self.factors()
            .iter()
            .zip(atoms)
            .fold(0, |acc, (f, a)| acc * f.len() + a)
    }

    pub fn element_atoms(&self, index: usize) -> Vec<&str> {
        self.decode(index)
            .into_iter()
            .zip(self.factors())
            .map(|(a, f)| f.labels()[a].as_str())
            .collect()
    }

    /// Canonical label of an element: `*` for the unit, `a` for one factor, `(a,b)` otherwise.
    pub fn element_label(&self, index: usize) -> String {
        format_tuple(&self.element_atoms(index))
    }

    pub fn index_of_atoms<S: AsRef<str>>(&self, atoms: &[S]) -> Option<usize> {
        let factors = self.factors();
        if atoms.len() != factors.len() || matches!(self, Object::Ints { .. }) {
            return None;
        }
        let mut idx = Vec::with_capacity(atoms.len());
        for (f, a) in factors.iter().zip(atoms) {
            idx.push(f.position(a.as_ref())?);
        }
        Some(self.encode(&idx))
    }

    /// Parses a canonical element label back to its index.
    pub fn index_of_label(&self, label: &str) -> Option<usize> {
        let atoms = parse_tuple(label);
        self.index_of_atoms(&atoms)
    }
}

pub(crate) fn format_tuple<S: AsRef<str>>(atoms: &[S]) -> String {
    match atoms {
        [] => "*".to_string(),
        [one] => one.as_ref().to_string(),
        many => {
            let parts: Vec<&str> = many.iter().map(AsRef::as_ref).collect();
            format!("({})", parts.join(","))
        }
    }
}

pub(crate) fn parse_tuple(label: &str) -> Vec<String> {
    let t = label.trim();
    if t == "*" {
        return Vec::new();
    }
    match t.strip_prefix('(').and_then(|s| s.strip_suffix(')')) {
        Some(inner) => inner.split(',').map(|s| s.trim().to_string()).collect(),
        None => vec![t.to_string()],
    }
}

impl fmt::Display for Object {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Object::Ints { arity: 0 } | Object::Finite { .. } if self.is_unit() => write!(f, "I"),
            Object::Ints { arity: 1 } => write!(f, "Z"),
            Object::Ints { arity } => write!(f, "Z^{arity}"),
            Object::Finite { factors, .. } => {
                let parts: Vec<String> = factors.iter().map(ToString::to_string).collect();
                write!(f, "{}", parts.join(" * "))
            }
        }
    }
}

/// Canonical JSON form: `{"backend": .., "factors": [[labels..], ..]}` or `{"backend": "bigfn", "arity": n}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectRepr {
    backend: Backend,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    factors: Option<Vec<Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    arity: Option<usize>,
}

impl Serialize for Object {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = match self {
            Object::Ints { arity } => ObjectRepr {
                backend: Backend::BigFn,
                factors: None,
                arity: Some(*arity),
            },
            Object::Finite { backend, factors } => ObjectRepr {
                backend: *backend,
                factors: Some(factors.iter().map(|f| f.labels().to_vec()).collect()),
                arity: None,
            },
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Object {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = ObjectRepr::deserialize(d)?;
        match (repr.backend, repr.factors, repr.arity) {
            (Backend::BigFn, None, Some(arity)) => Ok(Object::ints(arity)),
            (b, Some(factors), None) if b != Backend::BigFn => {
                let objs = factors
                    .into_iter()
                    .map(|f| Object::set(b, f))
                    .collect::<Result<Vec<_>>>()
                    .map_err(D::Error::custom)?;
                Object::tensor_all(b, &objs).map_err(D::Error::custom)
            }
            _ => Err(D::Error::custom("object needs factors (finite) or arity (bigfn)")),
        }
    }
}
