use std::fmt;

use crate::backend::{Backend, Object};
use crate::error::{Error, Result};

/// An eventually-constant sequence of objects `X₀, X₁, …`: a finite prefix followed by
/// a tail object repeated forever.
///
/// The representation is normalized (no trailing prefix entry equals the tail), so
/// structural equality coincides with pointwise equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ObjectFamily {
    prefix: Vec<Object>,
    tail: Object,
}

impl ObjectFamily {
    pub fn new(prefix: Vec<Object>, tail: Object) -> Result<ObjectFamily> {
        if let Some(bad) = prefix.iter().find(|o| o.backend() != tail.backend()) {
            return Err(Error::BackendMismatch {
                left: bad.backend(),
                right: tail.backend(),
            });
        }
        let mut prefix = prefix;
        while prefix.last() == Some(&tail) {
            prefix.pop();
        }
        Ok(ObjectFamily { prefix, tail })
    }

    pub fn constant(object: Object) -> ObjectFamily {
        ObjectFamily {
            prefix: Vec::new(),
            tail: object,
        }
    }

    /// The monoidal unit of families: constantly the unit object.
    pub fn unit(backend: Backend) -> ObjectFamily {
        ObjectFamily::constant(Object::unit(backend))
    }

    pub fn at(&self, n: usize) -> &Object {
        self.prefix.get(n).unwrap_or(&self.tail)
    }

    pub fn prefix(&self) -> &[Object] {
        &self.prefix
    }

    pub fn tail(&self) -> &Object {
        &self.tail
    }

    pub fn backend(&self) -> Backend {
        self.tail.backend()
    }

    /// Index from which the family is constant.
    pub fn stable_from(&self) -> usize {
        self.prefix.len()
    }

    pub fn is_unit(&self) -> bool {
        self.prefix.is_empty() && self.tail.is_unit()
    }

    /// `X₀, …, X_{n}`.
    pub fn take(&self, n: usize) -> Vec<Object> {
        (0..n).map(|i| self.at(i).clone()).collect()
    }

    /// Builds a family from a function that is constant from `stable_from` on.
    pub fn tabulate(
        stable_from: usize,
        mut f: impl FnMut(usize) -> Result<Object>,
    ) -> Result<ObjectFamily> {
        let prefix = (0..stable_from).map(&mut f).collect::<Result<Vec<_>>>()?;
        let tail = f(stable_from)?;
        ObjectFamily::new(prefix, tail)
    }

    /// Pointwise tensor.
    pub fn tensor(&self, other: &ObjectFamily) -> Result<ObjectFamily> {
        let k = self.stable_from().max(other.stable_from());
        ObjectFamily::tabulate(k, |n| self.at(n).tensor(other.at(n)))
    }

    /// The causal shift: `(δX)₀ = I` and `(δX)ₙ₊₁ = Xₙ`.
    pub fn delay(&self) -> ObjectFamily {
        let mut prefix = Vec::with_capacity(self.prefix.len() + 1);
        prefix.push(Object::unit(self.backend()));
        prefix.extend(self.prefix.iter().cloned());
        ObjectFamily::new(prefix, self.tail.clone()).expect("same backend")
    }

    /// First index at which two families differ, if any.
    pub fn first_difference(&self, other: &ObjectFamily) -> Option<usize> {
        let k = self.stable_from().max(other.stable_from());
        (0..=k).find(|&n| self.at(n) != other.at(n))
    }

    /// Checks `self = other` pointwise, naming the first offending index otherwise.
    pub fn expect_equal(&self, other: &ObjectFamily, context: &str) -> Result<()> {
        match self.first_difference(other) {
            None => Ok(()),
            Some(n) => Err(Error::Boundary(format!(
                "{context}: families differ at index {n}: {} vs {}",
                self.at(n),
                other.at(n)
            ))),
        }
    }

    /// The family `A` with `self = left ⊗ A` pointwise.
    pub fn strip_left(&self, left: &ObjectFamily) -> Result<ObjectFamily> {
        let k = self.stable_from().max(left.stable_from());
        ObjectFamily::tabulate(k, |n| {
            self.at(n).strip_prefix(left.at(n)).ok_or_else(|| {
                Error::FamilyShape(format!(
                    "component {n} ({}) does not factor as {} ⊗ A",
                    self.at(n),
                    left.at(n)
                ))
            })
        })
    }
}

impl fmt::Display for ObjectFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.prefix.iter().map(ToString::to_string).collect();
        write!(f, "[{}; {}]", parts.join(", "), self.tail)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(labels: &[&str]) -> Object {
        Object::set(Backend::FinFn, labels.iter().copied()).unwrap()
    }

    #[test]
    fn normalizes_trailing_prefix() {
        let a = set(&["a", "b"]);
        let f = ObjectFamily::new(vec![a.clone(), a.clone()], a.clone()).unwrap();
        assert_eq!(f, ObjectFamily::constant(a));
    }

    #[test]
    fn delay_of_constant_and_twice() {
        let a = set(&["a", "b"]);
        let u = Object::unit(Backend::FinFn);
        let d = ObjectFamily::constant(a.clone()).delay();
        assert_eq!(d.take(3), vec![u.clone(), a.clone(), a.clone()]);
        let x = ObjectFamily::new(vec![set(&["x"]), set(&["y", "z"])], a.clone()).unwrap();
        let dd = x.delay().delay();
        assert_eq!(dd.at(2), x.at(0));
        assert_eq!(dd.at(0), &u);
        assert_eq!(ObjectFamily::unit(Backend::FinFn).delay(), ObjectFamily::unit(Backend::FinFn));
    }

    #[test]
    fn strip_left_recovers_passenger() {
        let a = set(&["a", "b"]);
        let x = ObjectFamily::new(vec![set(&["x"])], set(&["p", "q", "r"])).unwrap();
        let passenger = ObjectFamily::new(vec![a.clone()], set(&["s"])).unwrap();
        let whole = x.tensor(&passenger).unwrap();
        assert_eq!(whole.strip_left(&x).unwrap(), passenger);
        assert!(matches!(passenger.strip_left(&x), Err(Error::FamilyShape(_))));
    }
}
