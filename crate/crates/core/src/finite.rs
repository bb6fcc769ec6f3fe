use std::fmt;

use serde::{Deserialize, Serialize};

use crate::backend::{
    compose, discard, identity, proj_left, proj_right, swap, tensor, Backend, Morphism, Object,
};
use crate::cartesian::CausalForm;
use crate::error::{Error, Result};

/// A representative of an `n`-comb: pieces `fᵢ : Mᵢ₋₁ ⊗ Xᵢ → Mᵢ ⊗ Yᵢ` glued along
/// declared memory objects, with `M₋₁ = I`.
///
/// A closed comb has memories `M₀ … Mₙ₋₁` and ends in the unit; an open comb also
/// exposes `Mₙ` for a further stage. Memory always sits on the left of a piece's
/// boundary.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "CombRepr", into = "CombRepr")]
pub struct FiniteComb {
    open: bool,
    inputs: Vec<Object>,
    outputs: Vec<Object>,
    memories: Vec<Object>,
    pieces: Vec<Morphism>,
}

#[derive(Serialize, Deserialize)]
struct CombRepr {
    open: bool,
    inputs: Vec<Object>,
    outputs: Vec<Object>,
    memories: Vec<Object>,
    pieces: Vec<Morphism>,
}

impl TryFrom<CombRepr> for FiniteComb {
    type Error = Error;

    fn try_from(r: CombRepr) -> Result<FiniteComb> {
        FiniteComb::new(r.inputs, r.outputs, r.memories, r.pieces, r.open)
    }
}

impl From<FiniteComb> for CombRepr {
    fn from(c: FiniteComb) -> CombRepr {
        CombRepr {
            open: c.open,
            inputs: c.inputs,
            outputs: c.outputs,
            memories: c.memories,
            pieces: c.pieces,
        }
    }
}

impl FiniteComb {
    pub fn new(
        inputs: Vec<Object>,
        outputs: Vec<Object>,
        memories: Vec<Object>,
        pieces: Vec<Morphism>,
        open: bool,
    ) -> Result<FiniteComb> {
        let n = pieces.len();
        if n == 0 {
            return Err(Error::Boundary("a comb needs at least one piece".into()));
        }
        let expected_memories = if open { n } else { n - 1 };
        if inputs.len() != n || outputs.len() != n || memories.len() != expected_memories {
            return Err(Error::Boundary(format!(
                "{n} pieces need {n} inputs, {n} outputs and {expected_memories} memories; got {}, {} and {}",
                inputs.len(),
                outputs.len(),
                memories.len()
            )));
        }
        let backend = pieces[0].backend();
        for o in inputs.iter().chain(&outputs).chain(&memories) {
            if o.backend() != backend {
                return Err(Error::BackendMismatch {
                    left: backend,
                    right: o.backend(),
                });
            }
        }
        let comb = FiniteComb {
            open,
            inputs,
            outputs,
            memories,
            pieces,
        };
        for i in 0..n {
            let domain = comb.memory_before(i).tensor(&comb.inputs[i])?;
            let codomain = comb.memory_after(i).tensor(&comb.outputs[i])?;
            let piece = &comb.pieces[i];
            if piece.domain() != &domain || piece.codomain() != &codomain {
                return Err(Error::PieceTyping {
                    piece: i,
                    expected: format!("{domain} -> {codomain}"),
                    found: format!("{} -> {}", piece.domain(), piece.codomain()),
                });
            }
        }
        Ok(comb)
    }

    /// The 0-comb of a single morphism.
    pub fn single(f: Morphism) -> FiniteComb {
        FiniteComb {
            open: false,
            inputs: vec![f.domain().clone()],
            outputs: vec![f.codomain().clone()],
            memories: Vec::new(),
            pieces: vec![f],
        }
    }

    /// The closed 1-comb `[f, g]` with `f : X₀ → M ⊗ Y₀` and `g : M ⊗ X₁ → Y₁`.
    pub fn one_comb(memory: Object, f: Morphism, g: Morphism) -> Result<FiniteComb> {
        let y0 = f.codomain().strip_prefix(&memory).ok_or_else(|| {
            Error::mismatch("first piece codomain", f.codomain(), &memory)
        })?;
        let x1 = g.domain().strip_prefix(&memory).ok_or_else(|| {
            Error::mismatch("second piece domain", g.domain(), &memory)
        })?;
        FiniteComb::new(
            vec![f.domain().clone(), x1],
            vec![y0, g.codomain().clone()],
            vec![memory],
            vec![f, g],
            false,
        )
    }

    pub fn is_open(&self) -> bool {
        self.open
    }

    /// Number of pieces, `n + 1` for an `n`-comb.
    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn backend(&self) -> Backend {
        self.pieces[0].backend()
    }

    pub fn inputs(&self) -> &[Object] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Object] {
        &self.outputs
    }

    pub fn memories(&self) -> &[Object] {
        &self.memories
    }

    pub fn pieces(&self) -> &[Morphism] {
        &self.pieces
    }

    pub fn piece(&self, i: usize) -> &Morphism {
        &self.pieces[i]
    }

    /// `Mᵢ₋₁`, the memory entering piece `i`.
    pub fn memory_before(&self, i: usize) -> Object {
        if i == 0 {
            Object::unit(self.backend())
        } else {
            self.memories[i - 1].clone()
        }
    }

    /// `Mᵢ`, the memory leaving piece `i` (the unit after the last piece of a closed comb).
    pub fn memory_after(&self, i: usize) -> Object {
        self.memories
            .get(i)
            .cloned()
            .unwrap_or_else(|| Object::unit(self.backend()))
    }

    /// The memory left open after the last piece.
    pub fn open_memory(&self) -> Object {
        self.memory_after(self.len() - 1)
    }

    /// The open comb made of the first `k + 1` pieces.
    pub fn prefix(&self, k: usize) -> Result<FiniteComb> {
        if k >= self.len() {
            return Err(Error::DepthExceeded {
                stage: k,
                depth: self.len() - 1,
            });
        }
        let mut memories: Vec<Object> = self.memories.iter().take(k + 1).cloned().collect();
        if memories.len() < k + 1 {
            memories.push(Object::unit(self.backend()));
        }
        Ok(FiniteComb {
            open: true,
            inputs: self.inputs[..=k].to_vec(),
            outputs: self.outputs[..=k].to_vec(),
            memories,
            pieces: self.pieces[..=k].to_vec(),
        })
    }

    /// Closes an open comb whose last memory is the unit.
    pub fn close(&self) -> Result<FiniteComb> {
        if !self.open {
            return Ok(self.clone());
        }
        let last = self.open_memory();
        if !last.is_unit() {
            return Err(Error::Boundary(format!(
                "cannot close a comb whose open memory is {last}"
            )));
        }
        let mut c = self.clone();
        c.open = false;
        c.memories.pop();
        Ok(c)
    }

    /// Applies a sliding move, checking the factorization it relies on.
    pub fn slide(&self, mv: &SlideMove) -> Result<FiniteComb> {
        let slide_err = |position: usize, reason: String| Error::Slide { position, reason };
        let mut c = self.clone();
        match mv {
            SlideMove::Forward {
                position,
                mediator,
                replacement,
            } => {
                let i = *position;
                self.check_position(i)?;
                let old = &self.memories[i];
                if mediator.codomain() != old {
                    return Err(slide_err(
                        i,
                        format!("mediator ends in {} but the memory is {old}", mediator.codomain()),
                    ));
                }
                let rebuilt = replacement
                    .then_left(mediator)
                    .map_err(|e| slide_err(i, e.to_string()))?;
                if &rebuilt != self.piece(i) {
                    return Err(slide_err(
                        i,
                        format!("piece {i} does not factor through the mediator"),
                    ));
                }
                c.memories[i] = mediator.domain().clone();
                c.pieces[i] = replacement.clone();
                if i + 1 < self.len() {
                    c.pieces[i + 1] = self.pieces[i + 1].before_left(mediator)?;
                }
            }
            SlideMove::Backward {
                position,
                mediator,
                replacement,
            } => {
                let i = *position;
                self.check_position(i)?;
                if i + 1 >= self.len() {
                    return Err(slide_err(i, "no piece follows this memory".into()));
                }
                let old = &self.memories[i];
                if mediator.domain() != old {
                    return Err(slide_err(
                        i,
                        format!("mediator starts at {} but the memory is {old}", mediator.domain()),
                    ));
                }
                let rebuilt = replacement
                    .before_left(mediator)
                    .map_err(|e| slide_err(i, e.to_string()))?;
                if &rebuilt != self.piece(i + 1) {
                    return Err(slide_err(
                        i,
                        format!("piece {} does not factor through the mediator", i + 1),
                    ));
                }
                c.memories[i] = mediator.codomain().clone();
                c.pieces[i] = self.pieces[i].then_left(mediator)?;
                c.pieces[i + 1] = replacement.clone();
            }
            SlideMove::Ground { mediator } => {
                if !self.open {
                    return Err(slide_err(self.len(), "only open combs have a grounded memory".into()));
                }
                let i = self.len() - 1;
                if mediator.domain() != &self.memories[i] {
                    return Err(slide_err(
                        i,
                        format!("mediator starts at {} but the memory is {}", mediator.domain(), self.memories[i]),
                    ));
                }
                c.memories[i] = mediator.codomain().clone();
                c.pieces[i] = self.pieces[i].then_left(mediator)?;
            }
        }
        Ok(c)
    }

    fn check_position(&self, i: usize) -> Result<()> {
        if i >= self.memories.len() {
            return Err(Error::Slide {
                position: i,
                reason: format!("the comb has {} memories", self.memories.len()),
            });
        }
        Ok(())
    }

    /// Fills the holes with `gᵢ : Yᵢ → Xᵢ₊₁` and returns the resulting map `X₀ → Yₙ`.
    /// An open comb's last memory is discarded.
    pub fn plug(&self, fillers: &[Morphism]) -> Result<Morphism> {
        if fillers.len() + 1 != self.len() {
            return Err(Error::Boundary(format!(
                "{} holes but {} fillers",
                self.len() - 1,
                fillers.len()
            )));
        }
        let mut h = self.pieces[0].clone();
        for (i, g) in fillers.iter().enumerate() {
            if g.domain() != &self.outputs[i] || g.codomain() != &self.inputs[i + 1] {
                return Err(Error::Boundary(format!(
                    "filler {i} has type {} -> {} but the hole is {} -> {}",
                    g.domain(),
                    g.codomain(),
                    self.outputs[i],
                    self.inputs[i + 1]
                )));
            }
            h = compose(&self.pieces[i + 1], &h.then_right(g)?)?;
        }
        h.then_left(&discard(&self.open_memory())?)
    }

    /// Cartesian 1-comb as a view/update pair.
    pub fn to_lens(&self) -> Result<Lens> {
        if !self.backend().is_cartesian() {
            return Err(Error::unsupported("lens extraction", self.backend()));
        }
        if self.open || self.len() != 2 {
            return Err(Error::Boundary("lenses come from closed 1-combs".into()));
        }
        let (f, g) = (&self.pieces[0], &self.pieces[1]);
        let (m, y0) = (&self.memories[0], &self.outputs[0]);
        let view = compose(&proj_right(m, y0)?, f)?;
        let update = g.before_left(&compose(&proj_left(m, y0)?, f)?)?;
        Ok(Lens { view, update })
    }

    /// The maps `hᵢ : X₀ ⊗ … ⊗ Xᵢ → Yᵢ` determined by a cartesian comb.
    ///
    /// Each memory is rewritten as a function of the inputs seen so far.
    pub fn normal_form_cartesian(&self) -> Result<CausalForm> {
        if !self.backend().is_cartesian() {
            return Err(Error::unsupported("cartesian normal form", self.backend()));
        }
        let mut maps = Vec::with_capacity(self.len());
        let mut memory_so_far: Option<Morphism> = None;
        for i in 0..self.len() {
            let s = match &memory_so_far {
                None => self.pieces[0].clone(),
                Some(p) => self.pieces[i].before_left(p)?,
            };
            let (m, y) = (self.memory_after(i), &self.outputs[i]);
            maps.push(compose(&proj_right(&m, y)?, &s)?);
            memory_so_far = Some(compose(&proj_left(&m, y)?, &s)?);
        }
        CausalForm::new(self.inputs.clone(), self.outputs.clone(), maps)
    }

    /// Joint behaviors `X₀ ⊗ … ⊗ Xᵢ → Y₀ ⊗ … ⊗ Yᵢ` with the memory discarded, one per stage.
    pub fn joint_behaviors(&self) -> Result<Vec<Morphism>> {
        let mut out = Vec::with_capacity(self.len());
        let mut running: Option<Morphism> = None;
        for i in 0..self.len() {
            let stepped = match &running {
                None => self.pieces[0].clone(),
                Some(k) => tensor(k, &identity(&self.inputs[i]))?.then_right(&self.pieces[i])?,
            };
            let m = self.memory_after(i);
            let k = stepped.then_right(&swap(&m, &self.outputs[i])?)?;
            out.push(k.then_right(&discard(&m)?)?);
            running = Some(k);
        }
        Ok(out)
    }

    fn check_boundaries(&self, other: &FiniteComb) -> Result<()> {
        if self.inputs != other.inputs || self.outputs != other.outputs {
            return Err(Error::Boundary(
                "the combs have different input or output families".into(),
            ));
        }
        Ok(())
    }

    /// Equality of cartesian combs by comparing normal forms table by table.
    pub fn equal_cartesian(&self, other: &FiniteComb) -> Result<Verdict> {
        self.check_boundaries(other)?;
        let a = self.normal_form_cartesian()?;
        let b = other.normal_form_cartesian()?;
        Ok(Verdict::first_difference(a.maps(), b.maps()))
    }

    /// Equality of joint behaviors with the memory discarded: exact on FinFn and
    /// FinStoch, on the probe grid for BigFn.
    pub fn behavior_equal_probe(&self, other: &FiniteComb) -> Result<Verdict> {
        self.check_boundaries(other)?;
        Ok(Verdict::first_difference(
            &self.joint_behaviors()?,
            &other.joint_behaviors()?,
        ))
    }
}

impl fmt::Display for FiniteComb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = if self.open { "open" } else { "closed" };
        writeln!(f, "{kind} {}-comb", self.len() - 1)?;
        for (i, p) in self.pieces.iter().enumerate() {
            writeln!(f, "  f{i} : {p}")?;
        }
        Ok(())
    }
}

/// A generating move of the sliding equivalence on one memory wire.
#[derive(Clone, Debug)]
pub enum SlideMove {
    /// Piece `i` is `(m ⊗ id) ∘ f′ᵢ` with `m : M′ᵢ → Mᵢ`; it becomes `f′ᵢ` and `m`
    /// moves into the next piece, which becomes `fᵢ₊₁ ∘ (m ⊗ id)`.
    Forward {
        position: usize,
        mediator: Morphism,
        replacement: Morphism,
    },
    /// Piece `i + 1` is `f′ᵢ₊₁ ∘ (m ⊗ id)` with `m : Mᵢ → M′ᵢ`; it becomes `f′ᵢ₊₁` and
    /// piece `i` becomes `(m ⊗ id) ∘ fᵢ`.
    Backward {
        position: usize,
        mediator: Morphism,
        replacement: Morphism,
    },
    /// Post-composes the open memory of an open comb with `m`.
    Ground { mediator: Morphism },
}

impl SlideMove {
    /// Moves an isomorphism `iso : Mᵢ → M′ᵢ` across memory `i`.
    pub fn by_iso(position: usize, iso: &Morphism, inverse: &Morphism, comb: &FiniteComb) -> Result<SlideMove> {
        if position + 1 < comb.len() {
            Ok(SlideMove::Backward {
                position,
                mediator: iso.clone(),
                replacement: comb.piece(position + 1).before_left(inverse)?,
            })
        } else {
            Ok(SlideMove::Ground {
                mediator: iso.clone(),
            })
        }
    }
}

/// A view/update pair `X₀ → Y₀`, `X₀ ⊗ X₁ → Y₁`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lens {
    pub view: Morphism,
    pub update: Morphism,
}

/// Outcome of a behavioral comparison.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Equal,
    Differ { stage: usize, witness: String },
}

impl Verdict {
    pub fn is_equal(&self) -> bool {
        matches!(self, Verdict::Equal)
    }

    pub(crate) fn first_difference(a: &[Morphism], b: &[Morphism]) -> Verdict {
        let grid = crate::backend::ProbeGrid::default();
        for (stage, (x, y)) in a.iter().zip(b).enumerate() {
            if let Some(witness) = x.difference_on(y, &grid) {
                return Verdict::Differ { stage, witness };
            }
        }
        if a.len() != b.len() {
            return Verdict::Differ {
                stage: a.len().min(b.len()),
                witness: "different depths".into(),
            };
        }
        Verdict::Equal
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Equal => write!(f, "equal"),
            Verdict::Differ { stage, witness } => {
                write!(f, "differ at stage {stage} on input {witness}")
            }
        }
    }
}

/// Nests `inner` into the hole of `outer`, leaving the inner hole open.
///
/// With `outer = [o₀ : A → M ⊗ B, o₁ : M ⊗ C → D]` and
/// `inner = [i₀ : B → N ⊗ P, i₁ : N ⊗ Q → C]` the result is the 1-comb
/// `[(id ⊗ i₀) ∘ o₀, o₁ ∘ (id ⊗ i₁)]` from `(A, Q)` to `(P, D)` with memory `M ⊗ N`.
pub fn nest(outer: &FiniteComb, inner: &FiniteComb) -> Result<FiniteComb> {
    for c in [outer, inner] {
        if c.open || c.len() != 2 {
            return Err(Error::Boundary("nesting takes closed 1-combs".into()));
        }
    }
    if outer.outputs[0] != inner.inputs[0] || inner.outputs[1] != outer.inputs[1] {
        return Err(Error::Boundary(format!(
            "the outer hole {} -> {} does not match the inner comb {} -> {}",
            outer.outputs[0], outer.inputs[1], inner.inputs[0], inner.outputs[1]
        )));
    }
    let m = &outer.memories[0];
    let first = outer.pieces[0].then_right(&inner.pieces[0])?;
    let second = compose(&outer.pieces[1], &tensor(&identity(m), &inner.pieces[1])?)?;
    FiniteComb::new(
        vec![outer.inputs[0].clone(), inner.inputs[1].clone()],
        vec![inner.outputs[0].clone(), outer.outputs[1].clone()],
        vec![m.tensor(&inner.memories[0])?],
        vec![first, second],
        false,
    )
}

/// Interleaves two closed 1-combs into the 3-comb with teeth `a₀, b₀, a₁, b₁`.
///
/// The memories are `Mₐ`, `Mₐ ⊗ N_b` and `N_b`.
pub fn interleave(a: &FiniteComb, b: &FiniteComb) -> Result<FiniteComb> {
    for c in [a, b] {
        if c.open || c.len() != 2 {
            return Err(Error::Boundary("interleaving takes closed 1-combs".into()));
        }
    }
    if a.backend() != b.backend() {
        return Err(Error::BackendMismatch {
            left: a.backend(),
            right: b.backend(),
        });
    }
    let (ma, nb) = (&a.memories[0], &b.memories[0]);
    let c1 = tensor(&identity(ma), &b.pieces[0])?;
    let c2 = compose(
        &tensor(&identity(nb), &a.pieces[1])?,
        &tensor(&swap(ma, nb)?, &identity(&a.inputs[1]))?,
    )?;
    FiniteComb::new(
        vec![a.inputs[0].clone(), b.inputs[0].clone(), a.inputs[1].clone(), b.inputs[1].clone()],
        vec![a.outputs[0].clone(), b.outputs[0].clone(), a.outputs[1].clone(), b.outputs[1].clone()],
        vec![ma.clone(), ma.tensor(nb)?, nb.clone()],
        vec![a.pieces[0].clone(), c1, c2, b.pieces[1].clone()],
        false,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::copy;

    fn boolean() -> Object {
        Object::set(Backend::FinFn, ["t", "f"]).unwrap()
    }

    fn bb() -> Object {
        boolean().tensor(&boolean()).unwrap()
    }

    fn not() -> Morphism {
        Morphism::from_labels(boolean(), boolean(), &[("t", "f"), ("f", "t")]).unwrap()
    }

    fn and() -> Morphism {
        Morphism::from_labels(
            bb(),
            boolean(),
            &[("(t,t)", "t"), ("(t,f)", "f"), ("(f,t)", "f"), ("(f,f)", "f")],
        )
        .unwrap()
    }

    fn or() -> Morphism {
        Morphism::from_labels(
            bb(),
            boolean(),
            &[("(t,t)", "t"), ("(t,f)", "t"), ("(f,t)", "t"), ("(f,f)", "f")],
        )
        .unwrap()
    }

    fn copy_with(g: Morphism) -> FiniteComb {
        FiniteComb::one_comb(boolean(), copy(&boolean()).unwrap(), g).unwrap()
    }

    fn const_f() -> Morphism {
        Morphism::from_labels(boolean(), boolean(), &[("t", "f"), ("f", "f")]).unwrap()
    }

    fn all_bool_maps() -> Vec<Morphism> {
        (0..4)
            .map(|k| Morphism::function(boolean(), boolean(), vec![k / 2, k % 2]).unwrap())
            .collect()
    }

    fn not_slide(c: &FiniteComb) -> FiniteComb {
        c.slide(&SlideMove::by_iso(0, &not(), &not(), c).unwrap()).unwrap()
    }

    #[test]
    fn zero_comb_and_typing() {
        let c = FiniteComb::single(not());
        assert_eq!(c.len(), 1);
        assert_eq!(c.normal_form_cartesian().unwrap().maps()[0], not());
        let tri = Object::set(Backend::FinFn, ["lo", "mid", "hi"]).unwrap();
        let emits_tri = Morphism::from_fn(boolean(), tri.tensor(&boolean()).unwrap(), |i| i).unwrap();
        let err = FiniteComb::new(
            vec![boolean(), boolean()],
            vec![boolean(), boolean()],
            vec![boolean()],
            vec![emits_tri, and()],
            false,
        )
        .unwrap_err();
        assert!(matches!(err, Error::PieceTyping { piece: 0, .. }));
    }

    #[test]
    fn plug_copy_and() {
        let c = copy_with(and());
        assert_eq!(c.plug(&[identity(&boolean())]).unwrap(), identity(&boolean()));
        assert_eq!(c.plug(&[not()]).unwrap(), const_f());
    }

    #[test]
    fn sliding_not_keeps_the_lens_and_plugs() {
        let c = copy_with(and());
        let s = not_slide(&c);
        let expected_first = crate::backend::pair(&not(), &identity(&boolean())).unwrap();
        assert_eq!(s.piece(0), &expected_first);
        assert_eq!(s.piece(1), &and().before_left(&not()).unwrap());
        for g in all_bool_maps() {
            assert_eq!(s.plug(std::slice::from_ref(&g)).unwrap(), c.plug(&[g]).unwrap());
        }
        assert_eq!(s.to_lens().unwrap(), c.to_lens().unwrap());
        assert!(c.equal_cartesian(&s).unwrap().is_equal());
        let back = not_slide(&s);
        assert_eq!(back.pieces(), c.pieces());
    }

    #[test]
    fn identity_slide_and_bad_factorization() {
        let c = copy_with(and());
        let id = identity(&boolean());
        let same = c
            .slide(&SlideMove::Forward {
                position: 0,
                mediator: id.clone(),
                replacement: c.piece(0).clone(),
            })
            .unwrap();
        assert_eq!(same.pieces(), c.pieces());
        let bad = c.slide(&SlideMove::Forward {
            position: 0,
            mediator: not(),
            replacement: c.piece(0).clone(),
        });
        assert!(matches!(bad, Err(Error::Slide { position: 0, .. })));
    }

    #[test]
    fn lens_of_copy_and() {
        let lens = copy_with(and()).to_lens().unwrap();
        assert_eq!(lens.view, identity(&boolean()));
        assert_eq!(lens.update, and());
    }

    #[test]
    fn lens_with_unit_memory() {
        let unit = Object::unit(Backend::FinFn);
        let f = not();
        let g = and();
        let c = FiniteComb::one_comb(unit, f.clone(), g.clone()).unwrap();
        let lens = c.to_lens().unwrap();
        assert_eq!(lens.view, f);
        let ignores_first = tensor(&discard(&boolean()).unwrap(), &identity(&bb())).unwrap();
        assert_eq!(lens.update, compose(&g, &ignores_first).unwrap());
    }

    #[test]
    fn normal_form_of_copy_and() {
        let nf = copy_with(and()).normal_form_cartesian().unwrap();
        assert_eq!(nf.maps()[0], identity(&boolean()));
        assert_eq!(nf.maps()[1], and());
    }

    #[test]
    fn copy_and_differs_from_copy_or_at_t_f() {
        let v = copy_with(and()).equal_cartesian(&copy_with(or())).unwrap();
        assert_eq!(
            v,
            Verdict::Differ {
                stage: 1,
                witness: "(t,f)".into()
            }
        );
    }

    #[test]
    fn nesting() {
        let outer = copy_with(or());
        let inner = copy_with(and());
        let nested = nest(&outer, &inner).unwrap();
        let direct = outer.plug(&[inner.plug(&[identity(&boolean())]).unwrap()]).unwrap();
        assert_eq!(nested.plug(&[identity(&boolean())]).unwrap(), direct);
        let unit = Object::unit(Backend::FinFn);
        let id_comb =
            FiniteComb::one_comb(unit, identity(&boolean()), identity(&boolean())).unwrap();
        let same = nest(&outer, &id_comb).unwrap();
        assert!(same.equal_cartesian(&outer).unwrap().is_equal());
    }

    #[test]
    fn interleaving_memoryless_combs() {
        let unit = Object::unit(Backend::FinFn);
        let a = FiniteComb::one_comb(unit.clone(), not(), identity(&boolean())).unwrap();
        let b = FiniteComb::one_comb(unit, identity(&boolean()), not()).unwrap();
        let c = interleave(&a, &b).unwrap();
        assert_eq!(c.len(), 4);
        assert_eq!(c.pieces(), &[not(), identity(&boolean()), identity(&boolean()), not()]);
        let fill = [not(), identity(&boolean()), not()];
        let expect = compose(&not(), &compose(&not(), &compose(&not(), &not()).unwrap()).unwrap()).unwrap();
        let expect = compose(&compose(&not(), &not()).unwrap(), &expect).unwrap();
        assert_eq!(c.plug(&fill).unwrap(), expect);
    }

    #[test]
    fn interleaving_keeps_both_memories() {
        let a = copy_with(and());
        let b = copy_with(or());
        let c = interleave(&a, &b).unwrap();
        let nf = c.normal_form_cartesian().unwrap();
        let id = identity(&boolean());
        assert_eq!(nf.maps()[0], id);
        let x0x1x2 = Object::tensor_all(Backend::FinFn, [&boolean(), &boolean(), &boolean()]).unwrap();
        let and_first_last = Morphism::from_fn(x0x1x2.clone(), boolean(), |i| {
            let (x0, x2) = (i / 4, i % 2);
            usize::from(x0 == 1 || x2 == 1)
        })
        .unwrap();
        assert_eq!(nf.maps()[2], and_first_last);
    }

    #[test]
    fn joint_behavior_matches_normal_form_pairing() {
        let c = copy_with(and());
        let j = c.joint_behaviors().unwrap();
        let nf = c.normal_form_cartesian().unwrap();
        let x0 = tensor(&identity(&boolean()), &discard(&boolean()).unwrap()).unwrap();
        let expect = crate::backend::pair(&compose(&nf.maps()[0], &x0).unwrap(), &nf.maps()[1]).unwrap();
        assert_eq!(j[1], expect);
    }

    #[test]
    fn json_round_trip_validates() {
        let c = copy_with(and());
        let json = serde_json::to_string(&c).unwrap();
        let back: FiniteComb = serde_json::from_str(&json).unwrap();
        assert_eq!(back.pieces(), c.pieces());
        let broken = json.replacen("\"memories\":[{\"backend\":\"finfn\",\"factors\":[[\"t\",\"f\"]]}]", "\"memories\":[]", 1);
        assert!(serde_json::from_str::<FiniteComb>(&broken).is_err());
    }
}
