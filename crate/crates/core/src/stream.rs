use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::backend::{compose, identity as id_map, swap, tensor, Backend, Morphism, Object};
use crate::cartesian::CausalForm;
use crate::error::{Error, Result};
use crate::family::ObjectFamily;
use crate::finite::{FiniteComb, Verdict};

/// One stage of an ∞-comb: the memory `Mₙ` it leaves behind and its piece
/// `fₙ : Mₙ₋₁ ⊗ Xₙ → Mₙ ⊗ Yₙ`.
#[derive(Clone, Debug)]
pub struct Stage {
    pub memory: Object,
    pub piece: Morphism,
}

impl Stage {
    /// A stage whose memory is read off the piece's codomain, given `Yₙ`.
    pub fn from_piece(piece: Morphism, output: &Object) -> Result<Stage> {
        let memory = piece
            .codomain()
            .strip_suffix(output)
            .ok_or_else(|| Error::mismatch("stage output", piece.codomain(), output))?;
        Ok(Stage { memory, piece })
    }
}

type Producer = dyn Fn(usize) -> Result<Stage> + Send + Sync;
type Cell = Arc<OnceLock<Result<Stage>>>;

struct Inner {
    inputs: ObjectFamily,
    outputs: ObjectFamily,
    producer: Box<Producer>,
    cells: Mutex<Vec<Cell>>,
}

/// An ∞-comb given by a deterministic, memoized producer of stages.
///
/// Each stage is produced at most once and type-checked against the families and
/// the previous stage's memory; concurrent queries observe the same stage.
#[derive(Clone)]
pub struct StreamComb(Arc<Inner>);

impl StreamComb {
    pub fn new(
        inputs: ObjectFamily,
        outputs: ObjectFamily,
        producer: impl Fn(usize) -> Result<Stage> + Send + Sync + 'static,
    ) -> Result<StreamComb> {
        if inputs.backend() != outputs.backend() {
            return Err(Error::BackendMismatch {
                left: inputs.backend(),
                right: outputs.backend(),
            });
        }
        Ok(StreamComb(Arc::new(Inner {
            inputs,
            outputs,
            producer: Box::new(producer),
            cells: Mutex::new(Vec::new()),
        })))
    }

    pub fn inputs(&self) -> &ObjectFamily {
        &self.0.inputs
    }

    pub fn outputs(&self) -> &ObjectFamily {
        &self.0.outputs
    }

    pub fn backend(&self) -> Backend {
        self.0.inputs.backend()
    }

    fn cell(&self, n: usize) -> Cell {
        let mut cells = self.0.cells.lock().unwrap_or_else(|e| e.into_inner());
        while cells.len() <= n {
            cells.push(Arc::new(OnceLock::new()));
        }
        cells[n].clone()
    }

    fn produce(&self, n: usize, before: &Object) -> Result<Stage> {
        let stage = (self.0.producer)(n)?;
        let domain = before.tensor(self.0.inputs.at(n))?;
        let codomain = stage.memory.tensor(self.0.outputs.at(n))?;
        if stage.piece.domain() != &domain || stage.piece.codomain() != &codomain {
            return Err(Error::PieceTyping {
                piece: n,
                expected: format!("{domain} -> {codomain}"),
                found: format!("{} -> {}", stage.piece.domain(), stage.piece.codomain()),
            });
        }
        Ok(stage)
    }

    /// The memoized stage `n`; stages `0..n` are produced first.
    pub fn stage(&self, n: usize) -> Result<Stage> {
        let mut before = Object::unit(self.backend());
        for k in 0..=n {
            let cell = self.cell(k);
            let stage = cell.get_or_init(|| self.produce(k, &before)).clone()?;
            if k == n {
                return Ok(stage);
            }
            before = stage.memory;
        }
        unreachable!()
    }

    pub fn piece(&self, n: usize) -> Result<Morphism> {
        Ok(self.stage(n)?.piece)
    }

    pub fn memory(&self, n: usize) -> Result<Object> {
        Ok(self.stage(n)?.memory)
    }

    /// `Mₙ₋₁`, the unit for `n = 0`.
    pub fn memory_before(&self, n: usize) -> Result<Object> {
        if n == 0 {
            Ok(Object::unit(self.backend()))
        } else {
            self.memory(n - 1)
        }
    }

    /// The open comb of stages `0..=n`.
    pub fn truncate(&self, n: usize) -> Result<FiniteComb> {
        let stages = (0..=n).map(|k| self.stage(k)).collect::<Result<Vec<_>>>()?;
        FiniteComb::new(
            self.inputs().take(n + 1),
            self.outputs().take(n + 1),
            stages.iter().map(|s| s.memory.clone()).collect(),
            stages.into_iter().map(|s| s.piece).collect(),
            true,
        )
    }

    /// Behavior of stages `0..=n`: causal maps for cartesian backends, joint kernels
    /// with the memory discarded for FinStoch.
    pub fn behavior_up_to(&self, n: usize) -> Result<Behavior> {
        let comb = self.truncate(n)?;
        if self.backend().is_cartesian() {
            Ok(Behavior::Causal(comb.normal_form_cartesian()?))
        } else {
            Ok(Behavior::Joint(comb.joint_behaviors()?))
        }
    }
}

impl fmt::Debug for StreamComb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StreamComb({} -> {})", self.inputs(), self.outputs())
    }
}

/// Depth-bounded behavior of an ∞-comb.
#[derive(Clone, Debug, PartialEq)]
pub enum Behavior {
    Causal(CausalForm),
    Joint(Vec<Morphism>),
}

impl Behavior {
    pub fn maps(&self) -> &[Morphism] {
        match self {
            Behavior::Causal(cf) => cf.maps(),
            Behavior::Joint(maps) => maps,
        }
    }

    pub fn compare(&self, other: &Behavior) -> Verdict {
        Verdict::first_difference(self.maps(), other.maps())
    }
}

/// Depth-`n` behavioral equality; families must agree on stages `0..=n`.
pub fn behavior_equal(a: &StreamComb, b: &StreamComb, n: usize) -> Result<Verdict> {
    for k in 0..=n {
        if a.inputs().at(k) != b.inputs().at(k) || a.outputs().at(k) != b.outputs().at(k) {
            return Err(Error::Boundary(format!(
                "families differ at stage {k}: {} -> {} vs {} -> {}",
                a.inputs().at(k),
                a.outputs().at(k),
                b.inputs().at(k),
                b.outputs().at(k)
            )));
        }
    }
    Ok(a.behavior_up_to(n)?.compare(&b.behavior_up_to(n)?))
}

/// Sequential composition `g ∘ f`: `f` runs first and its outputs feed `g`.
///
/// The memory at stage `n` is `Mᶠₙ ⊗ Mᵍₙ`.
pub fn compose_seq(g: &StreamComb, f: &StreamComb) -> Result<StreamComb> {
    f.outputs().expect_equal(g.inputs(), "sequential composition")?;
    let (f, g) = (f.clone(), g.clone());
    StreamComb::new(f.inputs().clone(), g.outputs().clone(), move |n| {
        let (fs, gs) = (f.stage(n)?, g.stage(n)?);
        let (mf, mg) = (f.memory_before(n)?, g.memory_before(n)?);
        let piece = tensor(&swap(&mf, &mg)?, &id_map(f.inputs().at(n)))?
            .then_right(&fs.piece)?
            .then_left(&swap(&mg, &fs.memory)?)?
            .then_right(&gs.piece)?;
        Ok(Stage {
            memory: fs.memory.tensor(&gs.memory)?,
            piece,
        })
    })
}

/// Parallel composition; families and memories tensor pointwise.
pub fn tensor_par(f: &StreamComb, g: &StreamComb) -> Result<StreamComb> {
    if f.backend() != g.backend() {
        return Err(Error::BackendMismatch {
            left: f.backend(),
            right: g.backend(),
        });
    }
    let inputs = f.inputs().tensor(g.inputs())?;
    let outputs = f.outputs().tensor(g.outputs())?;
    let (f, g) = (f.clone(), g.clone());
    StreamComb::new(inputs, outputs, move |n| {
        let (fs, gs) = (f.stage(n)?, g.stage(n)?);
        let (mf, mg) = (f.memory_before(n)?, g.memory_before(n)?);
        let (x, u) = (f.inputs().at(n), g.inputs().at(n));
        let y = f.outputs().at(n);
        let before = tensor(&tensor(&id_map(&mf), &swap(&mg, x)?)?, &id_map(u))?;
        let middle = tensor(&fs.piece, &gs.piece)?;
        let after = tensor(
            &tensor(&id_map(&fs.memory), &swap(y, &gs.memory)?)?,
            &id_map(g.outputs().at(n)),
        )?;
        Ok(Stage {
            memory: fs.memory.tensor(&gs.memory)?,
            piece: compose(&after, &compose(&middle, &before)?)?,
        })
    })
}

/// The comb with unit memories whose piece `n` is `fₙ : Xₙ → Yₙ`.
pub fn lift_family(
    inputs: ObjectFamily,
    outputs: ObjectFamily,
    f: impl Fn(usize) -> Result<Morphism> + Send + Sync + 'static,
) -> Result<StreamComb> {
    let unit = Object::unit(inputs.backend());
    StreamComb::new(inputs, outputs, move |n| {
        Ok(Stage {
            memory: unit.clone(),
            piece: f(n)?,
        })
    })
}

/// Lifts an eventually-constant family of morphisms.
pub fn lift(prefix: Vec<Morphism>, tail: Morphism) -> Result<StreamComb> {
    let inputs = ObjectFamily::new(
        prefix.iter().map(|f| f.domain().clone()).collect(),
        tail.domain().clone(),
    )?;
    let outputs = ObjectFamily::new(
        prefix.iter().map(|f| f.codomain().clone()).collect(),
        tail.codomain().clone(),
    )?;
    lift_family(inputs, outputs, move |n| {
        Ok(prefix.get(n).unwrap_or(&tail).clone())
    })
}

/// The identity comb on a family.
pub fn identity(family: &ObjectFamily) -> Result<StreamComb> {
    let fam = family.clone();
    lift_family(family.clone(), family.clone(), move |n| Ok(id_map(fam.at(n))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boolean() -> Object {
        Object::set(Backend::FinFn, ["t", "f"]).unwrap()
    }

    fn not() -> Morphism {
        Morphism::from_labels(boolean(), boolean(), &[("t", "f"), ("f", "t")]).unwrap()
    }

    /// Running xor of the inputs, as a comb with Bool memory.
    fn parity() -> StreamComb {
        let b = boolean();
        let bb = b.tensor(&b).unwrap();
        let xor = Morphism::from_fn(bb.clone(), bb, move |i| {
            let v = (i / 2) ^ (i % 2);
            v * 2 + v
        })
        .unwrap();
        let first = crate::backend::copy(&b).unwrap();
        StreamComb::new(ObjectFamily::constant(b.clone()), ObjectFamily::constant(b), move |n| {
            Ok(Stage {
                memory: boolean(),
                piece: if n == 0 { first.clone() } else { xor.clone() },
            })
        })
        .unwrap()
    }

    #[test]
    fn memoized_and_typed() {
        let c = parity();
        let a = c.piece(3).unwrap();
        let b = c.piece(3).unwrap();
        assert_eq!(a, b);
        let bad = StreamComb::new(
            ObjectFamily::constant(boolean()),
            ObjectFamily::constant(boolean()),
            |_| {
                Ok(Stage {
                    memory: Object::unit(Backend::FinFn),
                    piece: crate::backend::copy(&boolean()).unwrap(),
                })
            },
        )
        .unwrap();
        assert!(matches!(bad.stage(2), Err(Error::PieceTyping { piece: 0, .. })));
    }

    #[test]
    fn truncation_is_a_projection() {
        let c = parity();
        let t5 = c.truncate(5).unwrap();
        let t4 = c.truncate(4).unwrap();
        let p = t5.prefix(4).unwrap();
        assert_eq!(p.pieces(), t4.pieces());
        assert_eq!(p.memories(), t4.memories());
    }

    #[test]
    fn lifted_identity_truncates_to_identity() {
        let c = identity(&ObjectFamily::constant(boolean())).unwrap();
        let t = c.truncate(3).unwrap();
        assert!(t.memories().iter().all(Object::is_unit));
        assert!(t.pieces().iter().all(|p| p == &id_map(&boolean())));
    }

    #[test]
    fn unit_laws_for_sequential_composition() {
        let c = parity();
        let id = identity(c.inputs()).unwrap();
        let left = compose_seq(&id, &c).unwrap();
        let right = compose_seq(&c, &id).unwrap();
        assert!(behavior_equal(&left, &c, 6).unwrap().is_equal());
        assert!(behavior_equal(&right, &c, 6).unwrap().is_equal());
    }

    #[test]
    fn composing_with_not_negates_parity() {
        let c = parity();
        let negate = lift(vec![], not()).unwrap();
        let both = compose_seq(&negate, &c).unwrap();
        let Behavior::Causal(cf) = both.behavior_up_to(3).unwrap() else {
            panic!("cartesian backend")
        };
        let h3 = &cf.maps()[3];
        for i in 0..16 {
            let ones = (0..4).filter(|k| (i >> k) & 1 == 1).count();
            assert_eq!(h3.apply(i), 1 - ones % 2);
        }
    }

    #[test]
    fn parallel_with_unit_comb() {
        let c = parity();
        let unit = identity(&ObjectFamily::unit(Backend::FinFn)).unwrap();
        let p = tensor_par(&c, &unit).unwrap();
        assert!(behavior_equal(&p, &c, 5).unwrap().is_equal());
        let q = tensor_par(&unit, &c).unwrap();
        assert!(behavior_equal(&q, &c, 5).unwrap().is_equal());
    }
}
