use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::backend::{
    compose, copy, discard, identity, pair, proj_left, proj_right, swap, tensor, Backend,
    Morphism, Object, Rational, RationalJson,
};
use crate::error::{Error, Result};
use crate::family::ObjectFamily;
use crate::finite::Verdict;
use crate::stream::{Stage, StreamComb};

/// The maps `hₙ : X₀ ⊗ … ⊗ Xₙ → Yₙ` of a cartesian comb, up to a finite depth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FormRepr", into = "FormRepr")]
pub struct CausalForm {
    inputs: Vec<Object>,
    outputs: Vec<Object>,
    maps: Vec<Morphism>,
}

#[derive(Serialize, Deserialize)]
struct FormRepr {
    inputs: Vec<Object>,
    outputs: Vec<Object>,
    maps: Vec<Morphism>,
}

impl TryFrom<FormRepr> for CausalForm {
    type Error = Error;

    fn try_from(r: FormRepr) -> Result<CausalForm> {
        CausalForm::new(r.inputs, r.outputs, r.maps)
    }
}

impl From<CausalForm> for FormRepr {
    fn from(c: CausalForm) -> FormRepr {
        FormRepr {
            inputs: c.inputs,
            outputs: c.outputs,
            maps: c.maps,
        }
    }
}

impl CausalForm {
    pub fn new(inputs: Vec<Object>, outputs: Vec<Object>, maps: Vec<Morphism>) -> Result<CausalForm> {
        if maps.is_empty() || inputs.len() != maps.len() || outputs.len() != maps.len() {
            return Err(Error::Boundary(format!(
                "a causal form needs one input, output and map per stage; got {}, {} and {}",
                inputs.len(),
                outputs.len(),
                maps.len()
            )));
        }
        let backend = maps[0].backend();
        for (n, h) in maps.iter().enumerate() {
            let domain = theta_object(&inputs, n)?;
            if h.domain() != &domain || h.codomain() != &outputs[n] {
                return Err(Error::PieceTyping {
                    piece: n,
                    expected: format!("{domain} -> {}", outputs[n]),
                    found: format!("{} -> {}", h.domain(), h.codomain()),
                });
            }
            if h.backend() != backend {
                return Err(Error::BackendMismatch {
                    left: backend,
                    right: h.backend(),
                });
            }
        }
        Ok(CausalForm {
            inputs,
            outputs,
            maps,
        })
    }

    pub fn inputs(&self) -> &[Object] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Object] {
        &self.outputs
    }

    pub fn maps(&self) -> &[Morphism] {
        &self.maps
    }

    /// The last stage index.
    pub fn depth(&self) -> usize {
        self.maps.len() - 1
    }

    pub fn backend(&self) -> Backend {
        self.maps[0].backend()
    }

    /// The first `n + 1` maps.
    pub fn prefix(&self, n: usize) -> Result<CausalForm> {
        if n > self.depth() {
            return Err(Error::DepthExceeded {
                stage: n,
                depth: self.depth(),
            });
        }
        CausalForm::new(
            self.inputs[..=n].to_vec(),
            self.outputs[..=n].to_vec(),
            self.maps[..=n].to_vec(),
        )
    }

    pub fn compare(&self, other: &CausalForm) -> Verdict {
        Verdict::first_difference(&self.maps, &other.maps)
    }
}

/// `Θ(X)ₙ = X₀ ⊗ … ⊗ Xₙ`.
pub fn theta_object(xs: &[Object], n: usize) -> Result<Object> {
    let backend = xs
        .first()
        .map(Object::backend)
        .ok_or_else(|| Error::Boundary("empty family".into()))?;
    if n >= xs.len() {
        return Err(Error::DepthExceeded {
            stage: n,
            depth: xs.len().saturating_sub(1),
        });
    }
    Object::tensor_all(backend, &xs[..=n])
}

/// The components `Θ(X)₀, …, Θ(X)ₙ` of the family `Θ(X)`.
pub fn theta_family(xs: &[Object]) -> Result<Vec<Object>> {
    (0..xs.len()).map(|n| theta_object(xs, n)).collect()
}

/// The counit `εₙ : Θ(X)ₙ → Xₙ`, the last projection.
pub fn theta_counit(xs: &[Object], n: usize) -> Result<Morphism> {
    if n == 0 {
        return Ok(identity(&xs[0]));
    }
    proj_right(&theta_object(xs, n - 1)?, &xs[n])
}

/// The comultiplication `νₙ : Θ(X)ₙ → Θ(Θ(X))ₙ`, copying every prefix.
pub fn theta_comult(xs: &[Object], n: usize) -> Result<Morphism> {
    let mut nu = identity(&xs[0]);
    for k in 1..=n {
        let theta = theta_object(xs, k)?;
        let left = tensor(&nu, &discard(&xs[k])?)?;
        nu = copy(&theta)?.then_left(&left)?;
    }
    Ok(nu)
}

/// `Θ(f)ₙ = f₀ ⊗ … ⊗ fₙ` for stage maps `fₖ : Aₖ → Bₖ`.
pub fn theta_map(fs: &[Morphism], n: usize) -> Result<Morphism> {
    let mut acc = fs[0].clone();
    for f in &fs[1..=n] {
        acc = tensor(&acc, f)?;
    }
    Ok(acc)
}

/// The identity Kleisli arrow: the causal form of the counit.
pub fn kleisli_identity(xs: &[Object]) -> Result<CausalForm> {
    let maps = (0..xs.len()).map(|n| theta_counit(xs, n)).collect::<Result<Vec<_>>>()?;
    CausalForm::new(xs.to_vec(), xs.to_vec(), maps)
}

/// The maps `⟨f₀ ∘ π≤₀, …, fₙ⟩ : Θ(X)ₙ → Θ(Y)ₙ`, that is `Θ(f)ₙ ∘ νₙ`.
pub fn kleisli_extend(f: &CausalForm) -> Result<Vec<Morphism>> {
    let mut out: Vec<Morphism> = Vec::with_capacity(f.maps.len());
    for n in 0..f.maps.len() {
        let next = match out.last() {
            None => f.maps[0].clone(),
            Some(prev) => {
                let forget = proj_left(&theta_object(&f.inputs, n - 1)?, &f.inputs[n])?;
                pair(&compose(prev, &forget)?, &f.maps[n])?
            }
        };
        out.push(next);
    }
    Ok(out)
}

/// Kleisli composition `gₙ ∘ Θ(f)ₙ ∘ νₙ`.
pub fn kleisli_compose(g: &CausalForm, f: &CausalForm) -> Result<CausalForm> {
    if g.inputs != f.outputs {
        return Err(Error::Boundary(
            "the outputs of the first form are not the inputs of the second".into(),
        ));
    }
    let depth = f.maps.len().min(g.maps.len());
    let extended = kleisli_extend(f)?;
    let maps = (0..depth)
        .map(|n| compose(&g.maps[n], &extended[n]))
        .collect::<Result<Vec<_>>>()?;
    CausalForm::new(f.inputs[..depth].to_vec(), g.outputs[..depth].to_vec(), maps)
}

/// The causal form of a cartesian ∞-comb up to `depth`, computed by carrying a copy
/// of every input through the memory.
pub fn causal_form(c: &StreamComb, depth: usize) -> Result<CausalForm> {
    if !c.backend().is_cartesian() {
        return Err(Error::unsupported("causal form", c.backend()));
    }
    let inputs = c.inputs().take(depth + 1);
    let outputs = c.outputs().take(depth + 1);
    let mut maps = Vec::with_capacity(depth + 1);
    // threaded : Θₙ → Θₙ ⊗ Mₙ ⊗ Yₙ
    let mut threaded = pair(&identity(&inputs[0]), &c.piece(0)?)?;
    for n in 0..=depth {
        if n > 0 {
            let (x, m_prev) = (&inputs[n], c.memory(n - 1)?);
            let kept = threaded.then_right(&discard(&outputs[n - 1])?)?;
            threaded = tensor(&kept, &identity(x))?
                .then_right(&copy(x)?)?
                .then_right(&tensor(&swap(&m_prev, x)?, &identity(x))?)?
                .then_right(&c.piece(n)?)?;
        }
        let theta = theta_object(&inputs, n)?;
        let prefix = theta.tensor(&c.memory(n)?)?;
        maps.push(threaded.then_left(&discard(&prefix)?)?);
    }
    CausalForm::new(inputs, outputs, maps)
}

/// The ∞-comb with memory `Mₙ = X₀ ⊗ … ⊗ Xₙ` whose piece `n` stores the new input and
/// applies `hₙ`. Stages beyond the form's depth are unavailable.
pub fn from_causal_form(cf: &CausalForm) -> Result<StreamComb> {
    let fam = |objs: &[Object]| {
        let (last, init) = objs.split_last().expect("non-empty");
        ObjectFamily::new(init.to_vec(), last.clone())
    };
    let inputs = fam(&cf.inputs)?;
    let outputs = fam(&cf.outputs)?;
    let cf = cf.clone();
    StreamComb::new(inputs, outputs, move |n| {
        let h = cf.maps.get(n).ok_or(Error::DepthExceeded {
            stage: n,
            depth: cf.depth(),
        })?;
        let theta = theta_object(&cf.inputs, n)?;
        Ok(Stage {
            memory: theta.clone(),
            piece: pair(&identity(&theta), h)?,
        })
    })
}

/// A state of combs: a value stream (cartesian) or coherent joint distributions (FinStoch).
#[derive(Clone, Debug, PartialEq)]
pub enum StateFamily {
    Values(Vec<String>),
    Distributions(Vec<Distribution>),
}

/// A finitely supported distribution over tuples of stage outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    pub support: Vec<(Vec<String>, Rational)>,
}

impl Distribution {
    pub fn total(&self) -> Rational {
        self.support.iter().map(|(_, p)| p.clone()).sum()
    }

    fn as_map(&self) -> BTreeMap<Vec<String>, Rational> {
        let mut m = BTreeMap::new();
        for (k, p) in &self.support {
            *m.entry(k.clone()).or_insert_with(Rational::zero) += p;
        }
        m.retain(|_, p| !p.is_zero());
        m
    }

    /// Marginal over all but the last stage.
    pub fn drop_last(&self) -> Distribution {
        let mut m: BTreeMap<Vec<String>, Rational> = BTreeMap::new();
        for (k, p) in &self.support {
            let key = k[..k.len().saturating_sub(1)].to_vec();
            *m.entry(key).or_insert_with(Rational::zero) += p;
        }
        Distribution {
            support: m.into_iter().filter(|(_, p)| !p.is_zero()).collect(),
        }
    }
}

impl StateFamily {
    pub fn len(&self) -> usize {
        match self {
            StateFamily::Values(v) => v.len(),
            StateFamily::Distributions(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// One JSON record per stage.
    pub fn records(&self) -> Vec<serde_json::Value> {
        match self {
            StateFamily::Values(vs) => vs
                .iter()
                .enumerate()
                .map(|(n, v)| serde_json::json!({"stage": n, "value": v}))
                .collect(),
            StateFamily::Distributions(ds) => ds
                .iter()
                .enumerate()
                .map(|(n, d)| {
                    let support: Vec<serde_json::Value> = d
                        .support
                        .iter()
                        .map(|(k, p)| serde_json::json!([k, RationalJson::from(p)]))
                        .collect();
                    serde_json::json!({"stage": n, "support": support})
                })
                .collect(),
        }
    }
}

/// Splits an element index of `Y₀ ⊗ … ⊗ Yₙ` into per-stage labels.
fn stage_labels(stages: &[Object], mut index: usize) -> Result<Vec<String>> {
    let mut labels = vec![String::new(); stages.len()];
    for (k, y) in stages.iter().enumerate().rev() {
        let size = y.size()?;
        labels[k] = y.element_label(index % size);
        index /= size;
    }
    Ok(labels)
}

fn value_label(h: &Morphism) -> String {
    match h.backend() {
        Backend::BigFn => {
            let parts: Vec<String> = h.eval(&[]).iter().map(ToString::to_string).collect();
            crate::backend::format_tuple(&parts)
        }
        _ => h.codomain().element_label(h.apply(0)),
    }
}

/// The state carried by a comb from the unit family, stages `0..=depth`.
pub fn extract_state_stream(c: &StreamComb, depth: usize) -> Result<StateFamily> {
    if let Some(n) = (0..=depth).find(|&n| !c.inputs().at(n).is_unit()) {
        return Err(Error::Boundary(format!(
            "states need unit inputs, but stage {n} takes {}",
            c.inputs().at(n)
        )));
    }
    if c.backend().is_cartesian() {
        let cf = causal_form(c, depth)?;
        return Ok(StateFamily::Values(cf.maps().iter().map(value_label).collect()));
    }
    let joints = c.truncate(depth)?.joint_behaviors()?;
    let outputs = c.outputs().take(depth + 1);
    let mut out = Vec::with_capacity(joints.len());
    for (n, j) in joints.iter().enumerate() {
        let kernel = j.kernel().expect("FinStoch maps are kernels");
        let support = kernel
            .row(0)
            .iter()
            .map(|(col, p)| Ok((stage_labels(&outputs[..=n], *col)?, p.clone())))
            .collect::<Result<Vec<_>>>()?;
        out.push(Distribution { support });
    }
    Ok(StateFamily::Distributions(out))
}

/// Outcome of a coherence check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Coherence {
    Coherent,
    /// The stage whose distribution does not sum to one or does not marginalize to
    /// its predecessor.
    Violated { stage: usize, reason: String },
}

impl Coherence {
    pub fn is_coherent(&self) -> bool {
        matches!(self, Coherence::Coherent)
    }
}

impl fmt::Display for Coherence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coherence::Coherent => write!(f, "coherent"),
            Coherence::Violated { stage, reason } => write!(f, "stage {stage}: {reason}"),
        }
    }
}

/// Checks that each stage sums to one and that marginalizing stage `n + 1` over its
/// last output gives stage `n`, for `n < depth`.
pub fn check_coherence(sf: &StateFamily, depth: usize) -> Result<Coherence> {
    let StateFamily::Distributions(ds) = sf else {
        return Err(Error::Boundary("coherence is a property of distribution families".into()));
    };
    let last = depth.min(ds.len().saturating_sub(1));
    for (n, d) in ds.iter().enumerate().take(last + 1) {
        let total = d.total();
        if !total.is_one() {
            return Ok(Coherence::Violated {
                stage: n,
                reason: format!("total mass {total}"),
            });
        }
        if n > 0 && d.drop_last().as_map() != ds[n - 1].as_map() {
            return Ok(Coherence::Violated {
                stage: n,
                reason: format!("marginal differs from stage {}", n - 1),
            });
        }
    }
    Ok(Coherence::Coherent)
}
