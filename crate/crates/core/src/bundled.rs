//! The two bundled circuits: the Fibonacci feedback loop over the integers and a
//! stochastic predator-prey population model, as sources and as programmatic builders.

use crate::backend::{
    compose, copy, identity, swap, tensor, Backend, Generator, Morphism, Object, Rational,
};
use crate::error::Result;
use crate::family::ObjectFamily;
use crate::feedback::feedback;
use crate::stream::{Stage, StreamComb};

pub const FIBONACCI: &str = r#"# Fibonacci numbers as a feedback loop over a pair of integers.
backend bigfn;

gen zero : unit -> int = builtin zero;
gen one : unit -> int = builtin one;
gen add : int * int -> int = builtin add;

family Units = [; unit];
family Ints = [; int];
family Pair = [; int * int];
family DelayedPair = [unit; int * int];
family PairAndInt = [; int * int * int];

# Stage 0 stores (0, 1) and emits 0; later stages turn (a, b) into (b, a + b) and emit b.
comb fibstep : DelayedPair -> PairAndInt = stages {
  0: unit, zero * one * zero;
  tail(1): unit, (id(int) * copy(int)) >> (id(int) * copy(int) * id(int))
    >> (swap(int, int) * id(int * int)) >> (id(int) * add * id(int));
};

# The same sequence with the loop unrolled into explicit memory (F(n+1), F(n)).
comb fibonacci_unrolled : Units -> Ints = stages {
  0: int * int, one * zero * zero;
  tail(1): int * int, (copy(int) * id(int)) >> (id(int) * swap(int, int))
    >> (add * id(int)) >> (id(int) * copy(int));
};

comb fibonacci : Units -> Ints = feedback [Pair] fibstep;
"#;

pub const LOTKA: &str = r#"# Rabbits and foxes at three population levels each, updated by exact rational kernels.
backend finstoch;

set R = {r0, r1, r2};
set F = {f0, f1, f2};

family Units = [; unit];
family Pop = [; R * F];
family DelayedPop = [unit; R * F];
family PopPair = [; R * F * R * F];

gen init : unit -> R * F * R * F = table { * -> (r0, f0, r0, f0) };

gen dup : R * F -> R * F * R * F = table {
  (r0, f0) -> (r0, f0, r0, f0), (r0, f1) -> (r0, f1, r0, f1), (r0, f2) -> (r0, f2, r0, f2),
  (r1, f0) -> (r1, f0, r1, f0), (r1, f1) -> (r1, f1, r1, f1), (r1, f2) -> (r1, f2, r1, f2),
  (r2, f0) -> (r2, f0, r2, f0), (r2, f1) -> (r2, f1, r2, f1), (r2, f2) -> (r2, f2, r2, f2)
};

# Rabbits grow when foxes are scarce and shrink when they are plenty.
gen p : R * F -> R = matrix {
  (r0, f0) -> r0 : 1/2, (r0, f0) -> r1 : 1/2,
  (r0, f1) -> r0 : 3/4, (r0, f1) -> r1 : 1/4,
  (r0, f2) -> r0 : 1/1,
  (r1, f0) -> r1 : 1/2, (r1, f0) -> r2 : 1/2,
  (r1, f1) -> r0 : 1/4, (r1, f1) -> r1 : 1/2, (r1, f1) -> r2 : 1/4,
  (r1, f2) -> r0 : 1/2, (r1, f2) -> r1 : 1/2,
  (r2, f0) -> r2 : 1/1,
  (r2, f1) -> r1 : 1/4, (r2, f1) -> r2 : 3/4,
  (r2, f2) -> r1 : 1/2, (r2, f2) -> r2 : 1/2
};

# Foxes starve without rabbits and multiply when rabbits abound.
gen q : R * F -> F = matrix {
  (r0, f0) -> f0 : 1/1,
  (r0, f1) -> f0 : 1/2, (r0, f1) -> f1 : 1/2,
  (r0, f2) -> f1 : 1/2, (r0, f2) -> f2 : 1/2,
  (r1, f0) -> f0 : 3/4, (r1, f0) -> f1 : 1/4,
  (r1, f1) -> f0 : 1/4, (r1, f1) -> f1 : 1/2, (r1, f1) -> f2 : 1/4,
  (r1, f2) -> f1 : 1/4, (r1, f2) -> f2 : 3/4,
  (r2, f0) -> f0 : 1/2, (r2, f0) -> f1 : 1/2,
  (r2, f1) -> f1 : 1/2, (r2, f1) -> f2 : 1/2,
  (r2, f2) -> f2 : 1/1
};

comb lotka_step : DelayedPop -> PopPair = stages {
  0: unit, init;
  tail(1): unit, dup >> (p * q) >> dup;
};

comb lotka_loop : Units -> Pop = feedback [Pop] lotka_step;

comb lotka : Units -> Pop = stages {
  0: R * F, init;
  tail(1): R * F, dup >> (p * q) >> dup;
};
"#;

/// Source text of a bundled example by name.
pub fn source(name: &str) -> Option<&'static str> {
    match name {
        "fibonacci" => Some(FIBONACCI),
        "lotka" => Some(LOTKA),
        _ => None,
    }
}

pub const NAMES: [&str; 2] = ["fibonacci", "lotka"];

fn gen(g: Generator) -> Morphism {
    Morphism::generator(g)
}

fn seq(maps: &[Morphism]) -> Result<Morphism> {
    let mut acc = maps[0].clone();
    for m in &maps[1..] {
        acc = compose(m, &acc)?;
    }
    Ok(acc)
}

fn par(maps: &[Morphism]) -> Result<Morphism> {
    let mut acc = maps[0].clone();
    for m in &maps[1..] {
        acc = tensor(&acc, m)?;
    }
    Ok(acc)
}

fn stages(
    inputs: ObjectFamily,
    outputs: ObjectFamily,
    first: Stage,
    rest: Stage,
) -> Result<StreamComb> {
    StreamComb::new(inputs, outputs, move |n| {
        Ok(if n == 0 { first.clone() } else { rest.clone() })
    })
}

/// The step comb `δ(ℤ²) → ℤ² ⊗ ℤ` fed back by [`fibonacci`].
pub fn fibonacci_step() -> Result<StreamComb> {
    let (z, unit) = (Object::ints(1), Object::ints(0));
    let idz = identity(&z);
    let start = par(&[gen(Generator::Zero), gen(Generator::One), gen(Generator::Zero)])?;
    let step = seq(&[
        par(&[idz.clone(), copy(&z)?])?,
        par(&[idz.clone(), copy(&z)?, idz.clone()])?,
        par(&[swap(&z, &z)?, identity(&Object::ints(2))])?,
        par(&[idz.clone(), gen(Generator::Add), idz])?,
    ])?;
    stages(
        ObjectFamily::new(vec![unit.clone()], Object::ints(2))?,
        ObjectFamily::constant(Object::ints(3)),
        Stage { memory: unit.clone(), piece: start },
        Stage { memory: unit, piece: step },
    )
}

/// Fibonacci numbers `0, 1, 1, 2, 3, 5, …` as the feedback of [`fibonacci_step`].
pub fn fibonacci() -> Result<StreamComb> {
    feedback(&ObjectFamily::constant(Object::ints(2)), &fibonacci_step()?)
}

/// Fibonacci numbers with explicit memory `(Fₙ₊₁, Fₙ)`.
pub fn fibonacci_unrolled() -> Result<StreamComb> {
    let z = Object::ints(1);
    let idz = identity(&z);
    let start = par(&[gen(Generator::One), gen(Generator::Zero), gen(Generator::Zero)])?;
    let step = seq(&[
        par(&[copy(&z)?, idz.clone()])?,
        par(&[idz.clone(), swap(&z, &z)?])?,
        par(&[gen(Generator::Add), idz.clone()])?,
        par(&[idz, copy(&z)?])?,
    ])?;
    stages(
        ObjectFamily::unit(Backend::BigFn),
        ObjectFamily::constant(z),
        Stage { memory: Object::ints(2), piece: start.clone() },
        Stage { memory: Object::ints(2), piece: step },
    )
}

/// The counter `0, 1, 2, …` as a feedback loop over one integer.
pub fn counter() -> Result<StreamComb> {
    let z = Object::ints(1);
    let unit = Object::ints(0);
    let start = compose(&copy(&z)?, &gen(Generator::Zero))?;
    let step = compose(&copy(&z)?, &gen(Generator::Succ))?;
    let body = stages(
        ObjectFamily::new(vec![unit.clone()], z.clone())?,
        ObjectFamily::constant(Object::ints(2)),
        Stage { memory: unit.clone(), piece: start },
        Stage { memory: unit, piece: step },
    )?;
    feedback(&ObjectFamily::constant(z), &body)
}

/// Population levels of the predator-prey model.
pub fn lotka_objects() -> Result<(Object, Object)> {
    Ok((
        Object::set(Backend::FinStoch, ["r0", "r1", "r2"])?,
        Object::set(Backend::FinStoch, ["f0", "f1", "f2"])?,
    ))
}

fn level_row(level: usize, moves: &[(i64, Rational)]) -> Vec<(usize, Rational)> {
    moves
        .iter()
        .map(|(d, p)| ((level as i64 + d).clamp(0, 2) as usize, p.clone()))
        .collect()
}

/// The rabbit and fox kernels `R ⊗ F → R` and `R ⊗ F → F`.
pub fn lotka_kernels() -> Result<(Morphism, Morphism)> {
    use crate::backend::ratio;
    let (r, f) = lotka_objects()?;
    let rf = r.tensor(&f)?;
    let grow = vec![(1, ratio(1, 2)), (0, ratio(1, 2))];
    let drift = vec![(0, ratio(1, 2)), (1, ratio(1, 4)), (-1, ratio(1, 4))];
    let shrink = vec![(-1, ratio(1, 2)), (0, ratio(1, 2))];
    let mut p_rows = Vec::new();
    let mut q_rows = Vec::new();
    for rabbits in 0..3 {
        for foxes in 0..3 {
            let p_moves = [&grow, &drift, &shrink][foxes];
            let q_moves = [&shrink, &drift, &grow][rabbits];
            p_rows.push(level_row(rabbits, p_moves));
            q_rows.push(level_row(foxes, q_moves));
        }
    }
    Ok((
        Morphism::stochastic(rf.clone(), r, p_rows)?,
        Morphism::stochastic(rf, f, q_rows)?,
    ))
}

/// The population state comb: Dirac at `(r0, f0)`, then one stochastic step per stage.
pub fn lotka() -> Result<StreamComb> {
    let (r, f) = lotka_objects()?;
    let rf = r.tensor(&f)?;
    let unit = Object::unit(Backend::FinStoch);
    let rfrf = rf.tensor(&rf)?;
    let init = Morphism::function(unit.clone(), rfrf.clone(), vec![0])?;
    let dup = Morphism::from_fn(rf.clone(), rfrf, |i| i * 9 + i)?;
    let (p, q) = lotka_kernels()?;
    let step = seq(&[dup.clone(), tensor(&p, &q)?, dup])?;
    stages(
        ObjectFamily::unit(Backend::FinStoch),
        ObjectFamily::constant(rf.clone()),
        Stage { memory: rf.clone(), piece: init },
        Stage { memory: rf, piece: step },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartesian::{causal_form, extract_state_stream, StateFamily};
    use crate::stream::behavior_equal;

    fn fib_oracle(n: usize) -> Vec<String> {
        let (mut a, mut b) = (0u64, 1u64);
        (0..n)
            .map(|_| {
                let v = a;
                (a, b) = (b, a + b);
                v.to_string()
            })
            .collect()
    }

    #[test]
    fn fibonacci_values() {
        let s = extract_state_stream(&fibonacci().unwrap(), 9).unwrap();
        assert_eq!(s, StateFamily::Values(fib_oracle(10)));
        let u = extract_state_stream(&fibonacci_unrolled().unwrap(), 9).unwrap();
        assert_eq!(u, s);
    }

    #[test]
    fn feedback_and_unrolled_agree() {
        let v = behavior_equal(&fibonacci().unwrap(), &fibonacci_unrolled().unwrap(), 12).unwrap();
        assert!(v.is_equal(), "{v}");
    }

    #[test]
    fn counter_counts() {
        let s = extract_state_stream(&counter().unwrap(), 4).unwrap();
        assert_eq!(s, StateFamily::Values(["0", "1", "2", "3", "4"].map(String::from).to_vec()));
    }

    #[test]
    fn fibonacci_truncation_outputs() {
        let cf = causal_form(&fibonacci().unwrap(), 2).unwrap();
        let values: Vec<_> = cf.maps().iter().map(|h| h.eval(&[])[0].to_string()).collect();
        assert_eq!(values, ["0", "1", "1"]);
    }

    #[test]
    fn lotka_kernels_are_stochastic_and_start_dirac() {
        let (p, q) = lotka_kernels().unwrap();
        assert_eq!(p.kernel().unwrap().rows().len(), 9);
        assert_eq!(q.kernel().unwrap().rows().len(), 9);
        let StateFamily::Distributions(ds) = extract_state_stream(&lotka().unwrap(), 0).unwrap() else {
            panic!("stochastic backend")
        };
        assert_eq!(ds[0].support.len(), 1);
        assert_eq!(ds[0].support[0].0, vec!["(r0,f0)".to_string()]);
    }
}
