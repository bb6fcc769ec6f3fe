//! Sparse row-stochastic matrices over exact rationals.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// One row: strictly increasing column indices with positive weights.
pub type Row = Vec<(usize, Rational)>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Kernel {
    rows: Vec<Row>,
}

fn collect_row(acc: BTreeMap<usize, Rational>) -> Row {
    acc.into_iter().filter(|(_, p)| !p.is_zero()).collect()
}

impl Kernel {
    /// Normalizes and validates raw rows: duplicate columns are summed, zeros dropped,
    /// and each row must be non-negative with total exactly one.
    pub fn new(raw: Vec<Vec<(usize, Rational)>>, cols: usize) -> Result<Kernel> {
        let mut rows = Vec::with_capacity(raw.len());
        for (i, r) in raw.into_iter().enumerate() {
            let mut acc = BTreeMap::new();
            for (c, p) in r {
                if c >= cols {
                    return Err(Error::InvalidMorphism(format!(
                        "row {i} names column {c} but the codomain has {cols} elements"
                    )));
                }
                if p.is_negative() {
                    return Err(Error::InvalidMorphism(format!("row {i} has a negative entry {p}")));
                }
                *acc.entry(c).or_insert_with(Rational::zero) += p;
            }
            let row = collect_row(acc);
            let total: Rational = row.iter().map(|(_, p)| p).sum();
            if !total.is_one() {
                return Err(Error::InvalidMorphism(format!("row {i} sums to {total}, not 1")));
            }
            rows.push(row);
        }
        Ok(Kernel { rows })
    }

    pub fn dirac(table: &[usize]) -> Kernel {
        Kernel {
            rows: table.iter().map(|&c| vec![(c, Rational::one())]).collect(),
        }
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &Row {
        &self.rows[i]
    }

    /// The deterministic table, if every row is a point mass.
    pub fn as_table(&self) -> Option<Vec<usize>> {
        self.rows
            .iter()
            .map(|r| match r.as_slice() {
                [(c, _)] => Some(*c),
                _ => None,
            })
            .collect()
    }

    /// `after ∘ before`: the matrix product `before · after`.
    pub fn compose(after: &Kernel, before: &Kernel) -> Kernel {
        let rows = before
            .rows
            .iter()
            .map(|r| {
                let mut acc = BTreeMap::new();
                for (mid, p) in r {
                    for (c, q) in &after.rows[*mid] {
                        *acc.entry(*c).or_insert_with(Rational::zero) += p * q;
                    }
                }
                collect_row(acc)
            })
            .collect();
        Kernel { rows }
    }

    /// Kronecker product under the left-major element order.
    pub fn tensor(left: &Kernel, right: &Kernel, right_cols: usize) -> Kernel {
        let mut rows = Vec::with_capacity(left.rows.len() * right.rows.len());
        for lr in &left.rows {
            for rr in &right.rows {
                let mut row = Vec::with_capacity(lr.len() * rr.len());
                for (a, p) in lr {
                    for (b, q) in rr {
                        row.push((a * right_cols + b, p * q));
                    }
                }
                rows.push(row);
            }
        }
        Kernel { rows }
    }

    /// Relabels and merges columns through `map`, keeping rows stochastic.
    pub fn map_columns(&self, map: impl Fn(usize) -> usize) -> Kernel {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut acc = BTreeMap::new();
                for (c, p) in r {
                    *acc.entry(map(*c)).or_insert_with(Rational::zero) += p;
                }
                collect_row(acc)
            })
            .collect();
        Kernel { rows }
    }

    /// Post-composes each column `c` with the row `next(c)`, i.e. `self` followed by a kernel
    /// given implicitly.
    pub fn then_rows<'a>(&self, next: impl Fn(usize) -> std::borrow::Cow<'a, Row>) -> Kernel {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut acc = BTreeMap::new();
                for (c, p) in r {
                    for (d, q) in next(*c).iter() {
                        *acc.entry(*d).or_insert_with(Rational::zero) += p * q;
                    }
                }
                collect_row(acc)
            })
            .collect();
        Kernel { rows }
    }
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(num.into(), den.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_stochastic_rows() {
        assert!(Kernel::new(vec![vec![(0, ratio(1, 2))]], 2).is_err());
        assert!(Kernel::new(vec![vec![(0, ratio(3, 2)), (1, ratio(-1, 2))]], 2).is_err());
        assert!(Kernel::new(vec![vec![(2, ratio(1, 1))]], 2).is_err());
    }

    #[test]
    fn normalizes_duplicates_and_zeros() {
        let k = Kernel::new(
            vec![vec![(1, ratio(1, 4)), (0, ratio(0, 1)), (1, ratio(3, 4))]],
            2,
        )
        .unwrap();
        assert_eq!(k.row(0), &vec![(1, ratio(1, 1))]);
        assert_eq!(k.as_table(), Some(vec![1]));
    }

    #[test]
    fn kronecker_layout() {
        // fair coin ⊗ Dirac at x, with x the second of two elements
        let coin = Kernel::new(vec![vec![(0, ratio(1, 2)), (1, ratio(1, 2))]], 2).unwrap();
        let dirac = Kernel::dirac(&[1]);
        let k = Kernel::tensor(&coin, &dirac, 2);
        assert_eq!(k.row(0), &vec![(1, ratio(1, 2)), (3, ratio(1, 2))]);
    }
}
