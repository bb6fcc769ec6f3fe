//! Computable maps on tuples of integers, built from a closed generator vocabulary.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Id(usize),
    Swap(usize, usize),
    Copy(usize),
    Discard(usize),
    Zero,
    One,
    Succ,
    Add,
}

impl Generator {
    pub fn arity(&self) -> (usize, usize) {
        match *self {
            Generator::Id(k) => (k, k),
            Generator::Swap(a, b) => (a + b, a + b),
            Generator::Copy(k) => (k, 2 * k),
            Generator::Discard(k) => (k, 0),
            Generator::Zero | Generator::One => (0, 1),
            Generator::Succ => (1, 1),
            Generator::Add => (2, 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Node {
    Gen(Generator),
    /// `Compose(after, before)`.
    Compose(Arc<Term>, Arc<Term>),
    Tensor(Arc<Term>, Arc<Term>),
}

/// A term in the generator vocabulary, closed under composition and tensor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    node: Node,
    inputs: usize,
    outputs: usize,
}

impl Term {
    pub fn gen(g: Generator) -> Term {
        let (inputs, outputs) = g.arity();
        Term {
            node: Node::Gen(g),
            inputs,
            outputs,
        }
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    fn is_identity(&self) -> bool {
        matches!(self.node, Node::Gen(Generator::Id(_)))
    }

    /// `after ∘ before`.
    pub fn compose(after: &Arc<Term>, before: &Arc<Term>) -> Result<Arc<Term>> {
        if before.outputs != after.inputs {
            return Err(Error::InvalidMorphism(format!(
                "cannot compose a map with {} outputs into one with {} inputs",
                before.outputs, after.inputs
            )));
        }
        if after.is_identity() {
            return Ok(before.clone());
        }
        if before.is_identity() {
            return Ok(after.clone());
        }
        Ok(Arc::new(Term {
            node: Node::Compose(after.clone(), before.clone()),
            inputs: before.inputs,
            outputs: after.outputs,
        }))
    }

    pub fn tensor(left: &Arc<Term>, right: &Arc<Term>) -> Arc<Term> {
        match (&left.node, &right.node) {
            (Node::Gen(Generator::Id(a)), Node::Gen(Generator::Id(b))) => {
                return Arc::new(Term::gen(Generator::Id(a + b)))
            }
            _ if left.inputs == 0 && left.outputs == 0 => return right.clone(),
            _ if right.inputs == 0 && right.outputs == 0 => return left.clone(),
            _ => {}
        }
        Arc::new(Term {
            node: Node::Tensor(left.clone(), right.clone()),
            inputs: left.inputs + right.inputs,
            outputs: left.outputs + right.outputs,
        })
    }

    pub fn eval(&self, input: &[BigInt]) -> Vec<BigInt> {
        debug_assert_eq!(input.len(), self.inputs);
        match &self.node {
            Node::Gen(g) => match *g {
                Generator::Id(_) => input.to_vec(),
                Generator::Swap(a, _) => {
                    let mut out = input[a..].to_vec();
                    out.extend_from_slice(&input[..a]);
                    out
                }
                Generator::Copy(_) => {
                    let mut out = input.to_vec();
                    out.extend_from_slice(input);
                    out
                }
                Generator::Discard(_) => Vec::new(),
                Generator::Zero => vec![BigInt::zero()],
                Generator::One => vec![BigInt::one()],
                Generator::Succ => vec![&input[0] + 1],
                Generator::Add => vec![&input[0] + &input[1]],
            },
            Node::Compose(after, before) => after.eval(&before.eval(input)),
            Node::Tensor(left, right) => {
                let (l, r) = input.split_at(left.inputs);
                let mut out = left.eval(l);
                out.extend(right.eval(r));
                out
            }
        }
    }

    fn to_repr(&self) -> TermRepr {
        match &self.node {
            Node::Gen(g) => TermRepr::Gen(*g),
            Node::Compose(after, before) => {
                TermRepr::Seq(Box::new(before.to_repr()), Box::new(after.to_repr()))
            }
            Node::Tensor(l, r) => TermRepr::Par(Box::new(l.to_repr()), Box::new(r.to_repr())),
        }
    }

    fn from_repr(repr: &TermRepr) -> Result<Arc<Term>> {
        Ok(match repr {
            TermRepr::Gen(g) => Arc::new(Term::gen(*g)),
            TermRepr::Seq(first, second) => {
                Term::compose(&Term::from_repr(second)?, &Term::from_repr(first)?)?
            }
            TermRepr::Par(l, r) => Term::tensor(&Term::from_repr(l)?, &Term::from_repr(r)?),
        })
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            Node::Gen(g) => match g {
                Generator::Id(k) => write!(f, "id{{{k}}}"),
                Generator::Swap(a, b) => write!(f, "swap{{{a},{b}}}"),
                Generator::Copy(k) => write!(f, "copy{{{k}}}"),
                Generator::Discard(k) => write!(f, "discard{{{k}}}"),
                Generator::Zero => write!(f, "zero"),
                Generator::One => write!(f, "one"),
                Generator::Succ => write!(f, "succ"),
                Generator::Add => write!(f, "add"),
            },
            Node::Compose(after, before) => write!(f, "({before} >> {after})"),
            Node::Tensor(l, r) => write!(f, "({l} * {r})"),
        }
    }
}

/// Serialized shape of a term; `seq` lists its parts in diagram order.
#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum TermRepr {
    Gen(Generator),
    Seq(Box<TermRepr>, Box<TermRepr>),
    Par(Box<TermRepr>, Box<TermRepr>),
}

impl Serialize for Term {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_repr().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Term {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = TermRepr::deserialize(d)?;
        Term::from_repr(&repr)
            .map(|t| (*t).clone())
            .map_err(D::Error::custom)
    }
}

/// The finite set of integer tuples on which BigFn maps are compared.
///
/// Equality of computable maps is undecidable; two maps are judged equal when
/// they agree on every point of the grid. The grid is exhaustive over
/// `[lo, hi]^arity` while that has at most `max_points` elements, and a seeded
/// uniform sample of `max_points` tuples otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeGrid {
    pub lo: i64,
    pub hi: i64,
    pub max_points: usize,
    pub seed: u64,
}

impl Default for ProbeGrid {
    fn default() -> Self {
        ProbeGrid {
            lo: -2,
            hi: 8,
            max_points: 20_000,
            seed: 0x5eed,
        }
    }
}

impl ProbeGrid {
    pub fn points(&self, arity: usize) -> Vec<Vec<BigInt>> {
        let width = (self.hi - self.lo + 1).max(1) as u128;
        let total = (0..arity).try_fold(1u128, |acc, _| acc.checked_mul(width));
        match total {
            Some(total) if total <= self.max_points as u128 => (0..total)
                .map(|mut code| {
                    let mut p = vec![BigInt::zero(); arity];
                    for slot in p.iter_mut().rev() {
                        *slot = BigInt::from(self.lo + (code % width) as i64);
                        code /= width;
                    }
                    p
                })
                .collect(),
            _ => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ (arity as u64).rotate_left(32));
                (0..self.max_points)
                    .map(|_| {
                        (0..arity)
                            .map(|_| BigInt::from(rng.gen_range(self.lo..=self.hi)))
                            .collect()
                    })
                    .collect()
            }
        }
    }
}
