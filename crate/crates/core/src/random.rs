//! Seeded generators of objects, morphisms, families and combs for law checking.

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::backend::{
    compose, identity, pair, tensor, Backend, Generator, Morphism, Object, Rational,
};
use crate::cartesian::{theta_object, CausalForm};
use crate::error::Result;
use crate::family::ObjectFamily;
use crate::finite::{FiniteComb, SlideMove};
use crate::stream::{lift_family, Stage, StreamComb};

const LABELS: [&str; 4] = ["a", "b", "c", "d"];

/// Derives an independent seed for index `n` of a stream seeded by `seed`.
pub fn child_seed(seed: u64, n: u64) -> u64 {
    let mut z = seed ^ n.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A seeded source of random instances for one backend.
#[derive(Clone, Debug)]
pub struct Gen {
    backend: Backend,
    max_set: usize,
    rng: ChaCha8Rng,
}

impl Gen {
    /// Sets have at most `max_set` elements (at most 4); BigFn objects have arity at most 2.
    pub fn new(backend: Backend, seed: u64, max_set: usize) -> Gen {
        Gen {
            backend,
            max_set: max_set.clamp(1, LABELS.len()),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn seed(&mut self) -> u64 {
        self.rng.gen()
    }

    fn child(&self, seed: u64) -> Gen {
        Gen::new(self.backend, seed, self.max_set)
    }

    pub fn object(&mut self) -> Object {
        match self.backend {
            Backend::BigFn => Object::ints(self.rng.gen_range(0..=2)),
            b => {
                if self.rng.gen_bool(0.2) {
                    Object::unit(b)
                } else {
                    let k = self.rng.gen_range(1..=self.max_set);
                    Object::set(b, LABELS[..k].iter().copied()).expect("valid labels")
                }
            }
        }
    }

    /// A non-unit object.
    pub fn proper_object(&mut self) -> Object {
        loop {
            let o = self.object();
            if !o.is_unit() {
                return o;
            }
        }
    }

    pub fn family(&mut self) -> ObjectFamily {
        let k = self.rng.gen_range(0..=2);
        let prefix = (0..k).map(|_| self.object()).collect();
        ObjectFamily::new(prefix, self.object()).expect("one backend")
    }

    pub fn morphism(&mut self, domain: &Object, codomain: &Object) -> Result<Morphism> {
        match self.backend {
            Backend::FinFn => {
                let m = codomain.size()?;
                let table = (0..domain.table_size()?).map(|_| self.rng.gen_range(0..m)).collect();
                Morphism::function(domain.clone(), codomain.clone(), table)
            }
            Backend::FinStoch => {
                let m = codomain.size()?;
                let cols: Vec<usize> = (0..m).collect();
                let rows = (0..domain.table_size()?)
                    .map(|_| {
                        let k = self.rng.gen_range(1..=m.min(2));
                        let picked: Vec<usize> = cols.choose_multiple(&mut self.rng, k).copied().collect();
                        let weights: Vec<i64> = picked.iter().map(|_| self.rng.gen_range(1..=3)).collect();
                        let total: i64 = weights.iter().sum();
                        picked
                            .into_iter()
                            .zip(weights)
                            .map(|(c, w)| (c, Rational::new(BigInt::from(w), BigInt::from(total))))
                            .collect()
                    })
                    .collect();
                Morphism::stochastic(domain.clone(), codomain.clone(), rows)
            }
            Backend::BigFn => self.term(domain.width(), codomain.width()),
        }
    }

    fn term(&mut self, inputs: usize, outputs: usize) -> Result<Morphism> {
        let gen = Morphism::generator;
        let proj = |i: usize| -> Result<Morphism> {
            tensor(
                &tensor(&gen(Generator::Discard(i)), &gen(Generator::Id(1)))?,
                &gen(Generator::Discard(inputs - i - 1)),
            )
        };
        if outputs == 0 {
            return Ok(gen(Generator::Discard(inputs)));
        }
        let mut wires = Vec::with_capacity(outputs);
        for _ in 0..outputs {
            let choice = if inputs == 0 { 3 } else { self.rng.gen_range(0..4) };
            let wire = match choice {
                0 => proj(self.rng.gen_range(0..inputs))?,
                1 => compose(&gen(Generator::Succ), &proj(self.rng.gen_range(0..inputs))?)?,
                2 => {
                    let (i, j) = (self.rng.gen_range(0..inputs), self.rng.gen_range(0..inputs));
                    compose(&gen(Generator::Add), &pair(&proj(i)?, &proj(j)?)?)?
                }
                _ => {
                    let c = if self.rng.gen_bool(0.5) { Generator::Zero } else { Generator::One };
                    compose(&gen(c), &gen(Generator::Discard(inputs)))?
                }
            };
            wires.push(wire);
        }
        let mut acc = wires[0].clone();
        for w in &wires[1..] {
            acc = pair(&acc, w)?;
        }
        Ok(acc)
    }

    fn weight(o: &Object) -> usize {
        match o {
            Object::Ints { arity } => arity + 1,
            _ => o.size().unwrap_or(usize::MAX),
        }
    }

    /// `k` families whose pointwise tensor stays within `budget` elements per stage
    /// (for BigFn: within `budget - 1` integer wires).
    pub fn families(&mut self, k: usize, budget: usize) -> Vec<ObjectFamily> {
        let draw = |g: &mut Gen| loop {
            let objs: Vec<Object> = (0..k).map(|_| g.object()).collect();
            let ok = match g.backend {
                Backend::BigFn => objs.iter().map(|o| o.width()).sum::<usize>() < budget,
                _ => objs.iter().map(Gen::weight).product::<usize>() <= budget,
            };
            if ok {
                return objs;
            }
        };
        let len = self.rng.gen_range(0..=2);
        let columns: Vec<Vec<Object>> = (0..=len).map(|_| draw(self)).collect();
        (0..k)
            .map(|i| {
                let prefix = columns[..len].iter().map(|c| c[i].clone()).collect();
                ObjectFamily::new(prefix, columns[len][i].clone()).expect("one backend")
            })
            .collect()
    }

    /// A random comb between the given families. Stage `n` depends only on the seed and `n`.
    pub fn stream_comb(&mut self, inputs: &ObjectFamily, outputs: &ObjectFamily) -> Result<StreamComb> {
        let seed = self.seed();
        let proto = self.child(0);
        let memory = move |n: usize| proto.child(child_seed(seed, 2 * n as u64)).object();
        let proto = self.child(0);
        let (xs, ys) = (inputs.clone(), outputs.clone());
        StreamComb::new(inputs.clone(), outputs.clone(), move |n| {
            let before = if n == 0 {
                Object::unit(xs.backend())
            } else {
                memory(n - 1)
            };
            let m = memory(n);
            let mut g = proto.child(child_seed(seed, 2 * n as u64 + 1));
            let piece = g.morphism(&before.tensor(xs.at(n))?, &m.tensor(ys.at(n))?)?;
            Ok(Stage { memory: m, piece })
        })
    }

    /// A random lifted family of maps `Xₙ → Yₙ`.
    pub fn lifted(&mut self, inputs: &ObjectFamily, outputs: &ObjectFamily) -> Result<StreamComb> {
        let seed = self.seed();
        let proto = self.child(0);
        let (xs, ys) = (inputs.clone(), outputs.clone());
        lift_family(inputs.clone(), outputs.clone(), move |n| {
            proto.child(child_seed(seed, n as u64)).morphism(xs.at(n), ys.at(n))
        })
    }

    /// Two combs related by one slide at memory `k`: the first has piece `k + 1` of the
    /// form `g ∘ (m ⊗ id)`, the second moves `m` into piece `k`.
    pub fn slid_stream_pair(
        &mut self,
        inputs: &ObjectFamily,
        outputs: &ObjectFamily,
        k: usize,
    ) -> Result<(StreamComb, StreamComb)> {
        let base = self.stream_comb(inputs, outputs)?;
        let mk = base.memory(k)?;
        let next = base.stage(k + 1)?;
        let mediated = self.object();
        let m = self.morphism(&mk, &mediated)?;
        let g = self.morphism(&mediated.tensor(inputs.at(k + 1))?, next.piece.codomain())?;
        let left_piece = g.before_left(&m)?;
        let right_piece = base.piece(k)?.then_left(&m)?;
        let b1 = base.clone();
        let first = StreamComb::new(inputs.clone(), outputs.clone(), move |n| {
            let mut s = b1.stage(n)?;
            if n == k + 1 {
                s.piece = left_piece.clone();
            }
            Ok(s)
        })?;
        let second = StreamComb::new(inputs.clone(), outputs.clone(), move |n| {
            let mut s = base.stage(n)?;
            if n == k {
                s = Stage {
                    memory: mediated.clone(),
                    piece: right_piece.clone(),
                };
            } else if n == k + 1 {
                s.piece = g.clone();
            }
            Ok(s)
        })?;
        Ok((first, second))
    }

    /// A random closed comb with `pieces` pieces.
    pub fn finite_comb(&mut self, pieces: usize) -> Result<FiniteComb> {
        let inputs: Vec<Object> = (0..pieces).map(|_| self.object()).collect();
        let outputs: Vec<Object> = (0..pieces).map(|_| self.object()).collect();
        let memories: Vec<Object> = (0..pieces.saturating_sub(1)).map(|_| self.object()).collect();
        let unit = Object::unit(self.backend);
        let mut fs = Vec::with_capacity(pieces);
        for i in 0..pieces {
            let before = if i == 0 { &unit } else { &memories[i - 1] };
            let after = memories.get(i).unwrap_or(&unit);
            fs.push(self.morphism(&before.tensor(&inputs[i])?, &after.tensor(&outputs[i])?)?);
        }
        FiniteComb::new(inputs, outputs, memories, fs, false)
    }

    /// A random closed comb together with a slide move that applies to it.
    pub fn finite_comb_with_slide(&mut self, pieces: usize) -> Result<(FiniteComb, SlideMove)> {
        let pieces = pieces.max(2);
        let comb = self.finite_comb(pieces)?;
        let i = self.rng.gen_range(0..pieces - 1);
        let new_memory = self.object();
        let old_memory = comb.memories()[i].clone();
        let mut fs = comb.pieces().to_vec();
        let mv = if self.rng.gen_bool(0.5) {
            let m = self.morphism(&new_memory, &old_memory)?;
            let replacement = self.morphism(
                &comb.memory_before(i).tensor(&comb.inputs()[i])?,
                &new_memory.tensor(&comb.outputs()[i])?,
            )?;
            fs[i] = replacement.then_left(&m)?;
            SlideMove::Forward {
                position: i,
                mediator: m,
                replacement,
            }
        } else {
            let m = self.morphism(&old_memory, &new_memory)?;
            let replacement = self.morphism(
                &new_memory.tensor(&comb.inputs()[i + 1])?,
                fs[i + 1].codomain(),
            )?;
            fs[i + 1] = replacement.before_left(&m)?;
            SlideMove::Backward {
                position: i,
                mediator: m,
                replacement,
            }
        };
        let comb = FiniteComb::new(
            comb.inputs().to_vec(),
            comb.outputs().to_vec(),
            comb.memories().to_vec(),
            fs,
            false,
        )?;
        Ok((comb, mv))
    }

    /// A random causal form with stages `0..=depth` between the given families.
    pub fn causal_form(&mut self, inputs: &ObjectFamily, outputs: &ObjectFamily, depth: usize) -> Result<CausalForm> {
        let xs = inputs.take(depth + 1);
        let ys = outputs.take(depth + 1);
        let maps = (0..=depth)
            .map(|n| self.morphism(&theta_object(&xs, n)?, &ys[n]))
            .collect::<Result<Vec<_>>>()?;
        CausalForm::new(xs, ys, maps)
    }

    /// All maps `X → Y` of a small FinFn instance.
    pub fn all_functions(domain: &Object, codomain: &Object) -> Result<Vec<Morphism>> {
        let (n, m) = (domain.table_size()?, codomain.size()?);
        let count = m.checked_pow(n as u32).unwrap_or(usize::MAX);
        if count > 1 << 16 {
            return Err(crate::Error::TooLarge(count as u128));
        }
        (0..count)
            .map(|mut code| {
                let table = (0..n)
                    .map(|_| {
                        let v = code % m;
                        code /= m;
                        v
                    })
                    .collect();
                Morphism::function(domain.clone(), codomain.clone(), table)
            })
            .collect()
    }

    /// A random isomorphism of an object and its inverse (FinFn, FinStoch).
    pub fn permutation(&mut self, x: &Object) -> Result<(Morphism, Morphism)> {
        if self.backend == Backend::BigFn {
            return Ok((identity(x), identity(x)));
        }
        let n = x.size()?;
        let mut p: Vec<usize> = (0..n).collect();
        p.shuffle(&mut self.rng);
        let mut inv = vec![0; n];
        for (i, &j) in p.iter().enumerate() {
            inv[j] = i;
        }
        Ok((
            Morphism::function(x.clone(), x.clone(), p)?,
            Morphism::function(x.clone(), x.clone(), inv)?,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_slides_apply() {
        for backend in [Backend::FinFn, Backend::FinStoch, Backend::BigFn] {
            let mut g = Gen::new(backend, 7, 3);
            for _ in 0..20 {
                let (c, mv) = g.finite_comb_with_slide(3).unwrap();
                c.slide(&mv).unwrap();
            }
        }
    }

    #[test]
    fn stream_combs_are_reproducible() {
        let mut g = Gen::new(Backend::FinFn, 3, 3);
        let (x, y) = (g.family(), g.family());
        let mut g1 = Gen::new(Backend::FinFn, 11, 3);
        let mut g2 = Gen::new(Backend::FinFn, 11, 3);
        let a = g1.stream_comb(&x, &y).unwrap();
        let b = g2.stream_comb(&x, &y).unwrap();
        for n in 0..5 {
            assert_eq!(a.piece(n).unwrap(), b.piece(n).unwrap());
        }
    }

    #[test]
    fn all_functions_counts() {
        let x = Object::set(Backend::FinFn, ["a", "b"]).unwrap();
        let y = Object::set(Backend::FinFn, ["a", "b", "c"]).unwrap();
        assert_eq!(Gen::all_functions(&x, &y).unwrap().len(), 9);
    }
}
