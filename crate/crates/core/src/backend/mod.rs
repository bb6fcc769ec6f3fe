//! The semantic categories combs are interpreted in.
//!
//! * `FinFn`: finite sets and total functions (cartesian).
//! * `BigFn`: tuples of arbitrary-precision integers and generator terms (cartesian).
//! * `FinStoch`: finite sets and exact row-stochastic matrices, the Kleisli category of
//!   the finite distribution monad (semicartesian: discard exists, copy does not).

mod morphism;
mod object;
pub mod stoch;
pub mod term;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use morphism::{
    apply_to_state, compose, copy, discard, identity, pair, proj_left, proj_right, swap, tensor, Morphism,
    RationalJson,
};
pub use object::{LabelSet, Object, MAX_ELEMENTS, MAX_TABLE};
pub(crate) use object::{format_tuple, parse_tuple};
pub use stoch::{ratio, Kernel, Rational};
pub use term::{Generator, ProbeGrid, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    FinFn,
    BigFn,
    FinStoch,
}

impl Backend {
    pub fn is_cartesian(self) -> bool {
        !matches!(self, Backend::FinStoch)
    }

    pub fn name(self) -> &'static str {
        match self {
            Backend::FinFn => "finfn",
            Backend::BigFn => "bigfn",
            Backend::FinStoch => "finstoch",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "finfn" => Ok(Backend::FinFn),
            "bigfn" => Ok(Backend::BigFn),
            "finstoch" => Ok(Backend::FinStoch),
            other => Err(format!("unknown backend {other:?} (expected finfn, bigfn or finstoch)")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn bool_obj(b: Backend) -> Object {
        Object::set(b, ["t", "f"]).unwrap()
    }

    fn not(b: Backend) -> Morphism {
        Morphism::from_labels(bool_obj(b), bool_obj(b), &[("t", "f"), ("f", "t")]).unwrap()
    }

    fn and() -> Morphism {
        let b = bool_obj(Backend::FinFn);
        Morphism::from_fn(b.tensor(&b).unwrap(), b, |i| if i == 0 { 0 } else { 1 }).unwrap()
    }

    #[test]
    fn not_is_an_involution() {
        let n = not(Backend::FinFn);
        assert_eq!(compose(&n, &n).unwrap(), identity(&bool_obj(Backend::FinFn)));
    }

    #[test]
    fn and_after_copy_is_identity() {
        let b = bool_obj(Backend::FinFn);
        let h = compose(&and(), &copy(&b).unwrap()).unwrap();
        assert_eq!(h.table().unwrap(), &[0, 1]);
        assert_eq!(h, identity(&b));
    }

    #[test]
    fn composition_reports_both_boundaries() {
        let b = bool_obj(Backend::FinFn);
        let err = compose(&and(), &not(Backend::FinFn)).unwrap_err();
        match err {
            crate::Error::TypeMismatch { left, right, .. } => {
                assert_eq!(left, b);
                assert_eq!(right, b.tensor(&b).unwrap());
            }
            other => panic!("unexpected {other:?}"),
        }
        let s = not(Backend::FinStoch);
        assert!(matches!(
            compose(&s, &not(Backend::FinFn)),
            Err(crate::Error::BackendMismatch { .. })
        ));
    }

    #[test]
    fn fair_coin_is_invariant_under_not() {
        let coins = Object::set(Backend::FinStoch, ["h", "t"]).unwrap();
        let unit = Object::unit(Backend::FinStoch);
        let coin = Morphism::stochastic(unit, coins.clone(), vec![vec![(0, ratio(1, 2)), (1, ratio(1, 2))]]).unwrap();
        let flip = Morphism::from_labels(coins.clone(), coins, &[("h", "t"), ("t", "h")]).unwrap();
        assert_eq!(compose(&flip, &coin).unwrap(), coin);
        assert_eq!(apply_to_state(&flip, &coin).unwrap(), coin);
    }

    #[test]
    fn coin_tensor_dirac() {
        let coins = Object::set(Backend::FinStoch, ["h", "t"]).unwrap();
        let xs = Object::set(Backend::FinStoch, ["x"]).unwrap();
        let unit = Object::unit(Backend::FinStoch);
        let coin = Morphism::stochastic(unit.clone(), coins, vec![vec![(0, ratio(1, 2)), (1, ratio(1, 2))]]).unwrap();
        let dirac = Morphism::function(unit, xs, vec![0]).unwrap();
        let both = tensor(&coin, &dirac).unwrap();
        let row = both.kernel().unwrap().row(0);
        let labels: Vec<(String, Rational)> = row
            .iter()
            .map(|(j, p)| (both.codomain().element_label(*j), p.clone()))
            .collect();
        assert_eq!(labels, vec![("(h,x)".to_string(), ratio(1, 2)), ("(t,x)".to_string(), ratio(1, 2))]);
    }

    #[test]
    fn identity_tensor_identity() {
        let b = bool_obj(Backend::FinFn);
        let bb = b.tensor(&b).unwrap();
        assert_eq!(tensor(&identity(&b), &identity(&b)).unwrap(), identity(&bb));
        assert_eq!(identity(&b).apply(0), 0);
        let u = Object::unit(Backend::FinFn);
        assert_eq!(identity(&u).table().unwrap(), &[0]);
    }

    #[test]
    fn succ_tensor_succ() {
        let succ = Morphism::generator(Generator::Succ);
        let both = tensor(&succ, &succ).unwrap();
        let out = both.eval(&[BigInt::from(3), BigInt::from(7)]);
        assert_eq!(out, vec![BigInt::from(4), BigInt::from(8)]);
    }

    #[test]
    fn swap_laws() {
        let b = bool_obj(Backend::FinFn);
        let tri = Object::set(Backend::FinFn, ["lo", "mid", "hi"]).unwrap();
        let s = swap(&b, &tri).unwrap();
        let back = swap(&tri, &b).unwrap();
        assert_eq!(compose(&back, &s).unwrap(), identity(&b.tensor(&tri).unwrap()));
        let i = s.domain().index_of_label("(t,mid)").unwrap();
        assert_eq!(s.codomain().element_label(s.apply(i)), "(mid,t)");
        let st = swap(
            &Object::set(Backend::FinStoch, ["a", "b"]).unwrap(),
            &Object::set(Backend::FinStoch, ["c", "d"]).unwrap(),
        )
        .unwrap();
        assert!(st.kernel().unwrap().as_table().is_some());
    }

    #[test]
    fn copy_and_discard() {
        let b = bool_obj(Backend::FinFn);
        let c = copy(&b).unwrap();
        assert_eq!(c.codomain().element_label(c.apply(0)), "(t,t)");
        let s = bool_obj(Backend::FinStoch);
        assert!(copy(&s).unwrap_err().is_unsupported());
        let coin = Morphism::stochastic(s.clone(), s.clone(), vec![
            vec![(0, ratio(1, 3)), (1, ratio(2, 3))],
            vec![(1, ratio(1, 1))],
        ])
        .unwrap();
        assert_eq!(compose(&discard(&s).unwrap(), &coin).unwrap(), discard(&s).unwrap());
    }

    #[test]
    fn pushforward_of_dirac_reads_off_a_row() {
        let r = Object::set(Backend::FinStoch, ["r0", "r1"]).unwrap();
        let f = Object::set(Backend::FinStoch, ["f0", "f1"]).unwrap();
        let rf = r.tensor(&f).unwrap();
        let rows: Vec<Vec<(usize, Rational)>> = (0..4)
            .map(|i| vec![(i, ratio(1, 2)), ((i + 1) % 4, ratio(1, 4)), ((i + 2) % 4, ratio(1, 4))])
            .collect();
        let k = Morphism::stochastic(rf.clone(), rf.clone(), rows).unwrap();
        let start = rf.index_of_label("(r0,f0)").unwrap();
        let dirac = Morphism::function(Object::unit(Backend::FinStoch), rf, vec![start]).unwrap();
        let pushed = apply_to_state(&k, &dirac).unwrap();
        assert_eq!(pushed.kernel().unwrap().row(0), k.kernel().unwrap().row(start));
        assert_eq!(apply_to_state(&identity(k.domain()), &dirac).unwrap(), dirac);
    }

    #[test]
    fn then_right_matches_explicit_tensor() {
        let b = bool_obj(Backend::FinFn);
        let tri = Object::set(Backend::FinFn, ["lo", "mid", "hi"]).unwrap();
        let g = Morphism::from_fn(b.clone(), b.tensor(&tri).unwrap(), |i| i * 3 + 2 - i).unwrap();
        let f = Morphism::from_fn(tri.clone(), b.clone(), |i| i % 2).unwrap();
        let fast = g.then_right(&f).unwrap();
        let slow = compose(&tensor(&identity(&b), &f).unwrap(), &g).unwrap();
        assert_eq!(fast, slow);
        let h = Morphism::from_fn(b.clone(), tri.clone(), |i| i).unwrap();
        let fast = g.then_left(&h).unwrap();
        let slow = compose(&tensor(&h, &identity(&tri)).unwrap(), &g).unwrap();
        assert_eq!(fast, slow);
    }

    #[test]
    fn before_matches_explicit_tensor() {
        let b = bool_obj(Backend::FinFn);
        let tri = Object::set(Backend::FinFn, ["lo", "mid", "hi"]).unwrap();
        let g = Morphism::from_fn(b.tensor(&tri).unwrap(), tri.clone(), |i| (i * 5 + 1) % 3).unwrap();
        let f = Morphism::from_fn(tri.clone(), b.clone(), |i| (i + 1) % 2).unwrap();
        let fast = g.before_left(&f).unwrap();
        let slow = compose(&g, &tensor(&f, &identity(&tri)).unwrap()).unwrap();
        assert_eq!(fast, slow);
        let h = Morphism::from_fn(b.clone(), tri.clone(), |i| 2 - i).unwrap();
        let fast = g.before_right(&h).unwrap();
        let slow = compose(&g, &tensor(&identity(&b), &h).unwrap()).unwrap();
        assert_eq!(fast, slow);
    }

    #[test]
    fn morphism_json_round_trip() {
        let coins = Object::set(Backend::FinStoch, ["h", "t"]).unwrap();
        let unit = Object::unit(Backend::FinStoch);
        let coin = Morphism::stochastic(unit, coins, vec![vec![(0, ratio(1, 2)), (1, ratio(1, 2))]]).unwrap();
        let json = serde_json::to_string(&coin).unwrap();
        assert_eq!(
            json,
            r#"{"backend":"finstoch","domain":{"backend":"finstoch","factors":[]},"codomain":{"backend":"finstoch","factors":[["h","t"]]},"matrix":[[["h",{"num":"1","den":"2"}],["t",{"num":"1","den":"2"}]]]}"#
        );
        let back: Morphism = serde_json::from_str(&json).unwrap();
        assert_eq!(back, coin);
        let bad = json.replace(r#""den":"2"}]]]"#, r#""den":"3"}]]]"#);
        assert!(serde_json::from_str::<Morphism>(&bad).is_err());
    }
}
