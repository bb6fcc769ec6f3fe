//! Randomized law suites: the symmetric monoidal structure of ∞-combs, delay and
//! feedback, the cartesian characterization, the Kleisli comonad and the sliding
//! quotient, each checked exactly at a bounded depth.

use std::fmt;

use crate::backend::{compose, discard, identity, swap, tensor, Backend, Morphism, Object};
use crate::cartesian::{
    causal_form, check_coherence, extract_state_stream, from_causal_form, kleisli_compose,
    kleisli_identity, theta_comult, theta_counit, theta_family, theta_map,
};
use crate::error::Result;
use crate::family::ObjectFamily;
use crate::feedback::{delay_comb, feedback};
use crate::finite::{FiniteComb, Verdict};
use crate::random::{child_seed, Gen};
use crate::stream::{behavior_equal, compose_seq, identity as id_comb, lift_family, tensor_par, StreamComb};

/// One randomized instance: `Ok(None)` when the law holds, a description otherwise.
pub type Check = fn(&mut Gen, usize) -> Result<Option<String>>;

/// Per-stage element budget of tensored input families.
const BUDGET: usize = 3;

/// Depth at which the comonad laws are checked on raw `Θ`-objects, whose size grows
/// doubly exponentially.
pub const RAW_COMONAD_DEPTH: usize = 3;

/// Result of running one law on a number of random instances.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LawReport {
    pub law: &'static str,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for LawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            write!(f, "PASS {} ({} cases)", self.law, self.cases)
        } else {
            write!(
                f,
                "FAIL {} ({}/{} cases): {}",
                self.law,
                self.failures.len(),
                self.cases,
                self.failures[0]
            )
        }
    }
}

fn differ(v: Verdict, what: &str) -> Option<String> {
    match v {
        Verdict::Equal => None,
        d => Some(format!("{what}: {d}")),
    }
}

fn first_failure(items: impl IntoIterator<Item = Option<String>>) -> Option<String> {
    items.into_iter().flatten().next()
}

fn same(a: &StreamComb, b: &StreamComb, depth: usize, what: &str) -> Result<Option<String>> {
    Ok(differ(behavior_equal(a, b, depth)?, what))
}

/// The symmetry comb `X ⊗ U → U ⊗ X`.
pub fn symmetry(x: &ObjectFamily, u: &ObjectFamily) -> Result<StreamComb> {
    let (xs, us) = (x.clone(), u.clone());
    lift_family(x.tensor(u)?, u.tensor(x)?, move |n| swap(xs.at(n), us.at(n)))
}

pub fn seq_associativity(g: &mut Gen, depth: usize) -> Result<Option<String>> {
    let (x, y, z, w) = (g.families(1, BUDGET).remove(0), g.family(), g.family(), g.family());
    let f = g.stream_comb(&x, &y)?;
    let gg = g.stream_comb(&y, &z)?;
    let h = g.stream_comb(&z, &w)?;
    let left = compose_seq(&compose_seq(&h, &gg)?, &f)?;
    let right = compose_seq(&h, &compose_seq(&gg, &f)?)?;
    same(&left, &right, depth, "(h∘g)∘f vs h∘(g∘f)")
}

pub fn seq_unit(g: &mut Gen, depth: usize) -> Result<Option<String>> {
    let (x, y) = (g.families(1, BUDGET).remove(0), g.family());
    let f = g.stream_comb(&x, &y)?;
    let left = compose_seq(&id_comb(&y)?, &f)?;
    let right = compose_seq(&f, &id_comb(&x)?)?;
    Ok(first_failure([
        same(&left, &f, depth, "id∘f vs f")?,
        same(&right, &f, depth, "f∘id vs f")?,
    ]))
}

pub fn par_associativity(g: &mut Gen, depth: usize) -> Result<Option<String>> {
    let xs = g.families(3, BUDGET);
    let cs = xs
        .iter()
        .map(|x| {
            let y = g.family();
            g.stream_comb(x, &y)
        })
        .collect::<Result<Vec<_>>>()?;
    let left = tensor_par(&tensor_par(&cs[0], &cs[1])?, &cs[2])?;
    let right = tensor_par(&cs[0], &tensor_par(&cs[1], &cs[2])?)?;
    same(&left, &right, depth, "(f⊗g)⊗h vs f⊗(g⊗h)")
}

pub fn par_unit(g: &mut Gen, depth: usize) -> Result<Option<String>> {
    let (x, y) = (g.families(1, BUDGET).remove(0), g.family());
    let f = g.stream_comb(&x, &y)?;
    let unit = id_comb(&ObjectFamily::unit(g.backend()))?;
    Ok(first_failure([
        same(&tensor_par(&f, &unit)?, &f, depth, "f⊗I vs f")?,
        same(&tensor_par(&unit, &f)?, &f, depth, "I⊗f vs f")?,
    ]))
}

pub fn interchange(g: &mut Gen, depth: usize) -> Result<Option<String>> {
    let xu = g.families(2, BUDGET);
    let (x, u) = (&xu[0], &xu[1]);
    let (y, z, v, w) = (g.family(), g.family(), g.family(), g.family());
    let f1 = g.stream_comb(x, &y)?;
    let f2 = g.stream_comb(&y, &z)?;
    let g1 = g.stream_comb(u, &v)?;
    let g2 = g.stream_comb(&v, &w)?;
    let left = tensor_par(&compose_seq(&f2, &f1)?, &compose_seq(&g2, &g1)?)?;
    let right = compose_seq(&tensor_par(&f2, &g2)?, &tensor_par(&f1, &g1)?)?;
    same(&left, &right, depth, "(f₂∘f₁)⊗(g₂∘g₁) vs (f₂⊗g₂)∘(f₁⊗g₁)")
}

pub fn symmetry_naturality(g: &mut Gen, depth: usize) -> Result<Option<String>> {
    let xu = g.families(2, BUDGET);
    let (x, u) = (&xu[0], &xu[1]);
    let (y, v) = (g.family(), g.family());
    let f = g.stream_comb(x, &y)?;
    let h = g.stream_comb(u, &v)?;
    let left = compose_seq(&symmetry(&y, &v)?, &tensor_par(&f, &h)?)?;
    let right = compose_seq(&tensor_par(&h, &f)?, &symmetry(x, u)?)?;
    let twice = compose_seq(&symmetry(u, x)?, &symmetry(x, u)?)?;
    Ok(first_failure([
        same(&left, &right, depth, "σ∘(f⊗g) vs (g⊗f)∘σ")?,
        same(&twice, &id_comb(&x.tensor(u)?)?, depth, "σ∘σ vs id")?,
    ]))
}

pub fn lift_functoriality(g: &mut Gen, depth: usize) -> Result<Option<String>> {
    let (x, y, z) = (g.families(1, BUDGET).remove(0), g.family(), g.family());
    let f = g.lifted(&x, &y)?;
    let h = g.lifted(&y, &z)?;
    let (f2, h2) = (f.clone(), h.clone());
    let pointwise = lift_family(x.clone(), z, move |n| compose(&h2.piece(n)?, &f2.piece(n)?))?;
    let xs = x.clone();
    let lifted_id = lift_family(x.clone(), x.clone(), move |n| Ok(identity(xs.at(n))))?;
    Ok(first_failure([
        same(&pointwise, &compose_seq(&h, &f)?, depth, "lift(g∘f) vs lift g∘lift f")?,
        same(&lifted_id, &id_comb(&x)?, depth, "lift(id) vs id")?,
    ]))
}

pub fn lift_strictness(g: &mut Gen, depth: usize) -> Result<Option<String>> {
    let xu = g.families(2, BUDGET);
    let (y, v) = (g.family(), g.family());
    let f = g.lifted(&xu[0], &y)?;
    let h = g.lifted(&xu[1], &v)?;
    let (f2, h2) = (f.clone(), h.clone());
    let pointwise = lift_family(xu[0].tensor(&xu[1])?, y.tensor(&v)?, move |n| {
        tensor(&f2.piece(n)?, &h2.piece(n)?)
    })?;
    same(&pointwise, &tensor_par(&f, &h)?, depth, "lift(f⊗g) vs lift f⊗lift g")
}

pub fn delay_functoriality(g: &mut Gen, depth: usize) -> Result<Option<String>> {
    let (x, y, z) = (g.families(1, BUDGET).remove(0), g.family(), g.family());
    let f = g.stream_comb(&x, &y)?;
    let h = g.stream_comb(&y, &z)?;
    let left = delay_comb(&compose_seq(&h, &f)?)?;
    let right = compose_seq(&delay_comb(&h)?, &delay_comb(&f)?)?;
    let id_delayed = delay_comb(&id_comb(&x)?)?;
    Ok(first_failure([
        same(&left, &right, depth, "δ(g∘f) vs δg∘δf")?,
        same(&id_delayed, &id_comb(&x.delay())?, depth, "δ(id) vs id")?,
    ]))
}

/// `fbk^Y((g ⊗ id) ∘ f) = fbk^X(f ∘ (δg ⊗ id))` for `f : δY ⊗ A → X ⊗ B`, `g : X → Y`.
pub fn trace_like(g: &mut Gen, depth: usize) -> Result<Option<String>> {
    let a = g.families(1, BUDGET).remove(0);
    let (b, x, y) = (g.family(), g.family(), g.family());
    let f = g.stream_comb(&y.delay().tensor(&a)?, &x.tensor(&b)?)?;
    let gx = g.stream_comb(&x, &y)?;
    let left = feedback(&y, &compose_seq(&tensor_par(&gx, &id_comb(&b)?)?, &f)?)?;
    let after = tensor_par(&delay_comb(&gx)?, &id_comb(&a)?)?;
    let right = feedback(&x, &compose_seq(&f, &after)?)?;
    same(&left, &right, depth, "fbk((g⊗id)∘f) vs fbk(f∘(δg⊗id))")
}

/// `fbk^X((id ⊗ b) ∘ f ∘ (id ⊗ a)) = lift b ∘ fbk^X f ∘ lift a`.
pub fn feedback_naturality(g: &mut Gen, depth: usize) -> Result<Option<String>> {
    let a0 = g.families(1, BUDGET).remove(0);
    let (a, b, b1, x) = (g.family(), g.family(), g.family(), g.family());
    let f = g.stream_comb(&x.delay().tensor(&a)?, &x.tensor(&b)?)?;
    let la = g.lifted(&a0, &a)?;
    let lb = g.lifted(&b, &b1)?;
    let inner = compose_seq(
        &tensor_par(&id_comb(&x)?, &lb)?,
        &compose_seq(&f, &tensor_par(&id_comb(&x.delay())?, &la)?)?,
    )?;
    let left = feedback(&x, &inner)?;
    let right = compose_seq(&lb, &compose_seq(&feedback(&x, &f)?, &la)?)?;
    same(&left, &right, depth, "fbk((id⊗b)∘f∘(id⊗a)) vs b∘fbk f∘a")
}

/// Moving a mediator across one memory of an ∞-comb leaves its behavior unchanged.
pub fn stream_slide_invariance(g: &mut Gen, depth: usize) -> Result<Option<String>> {
    let (x, y) = (g.families(1, BUDGET).remove(0), g.family());
    let k = (g.seed() as usize) % depth.max(1);
    let (a, b) = g.slid_stream_pair(&x, &y, k)?;
    same(&a, &b, depth, &format!("slide at memory {k}"))
}

/// The stage-`i` part of a behavior ignores later inputs.
pub fn causality(g: &mut Gen, depth: usize) -> Result<Option<String>> {
    let (x, y) = (g.families(1, BUDGET).remove(0), g.family());
    let c = g.stream_comb(&x, &y)?.truncate(depth)?;
    let joints = c.joint_behaviors()?;
    let i = (g.seed() as usize) % (depth + 1);
    let backend = g.backend();
    let late_outputs = Object::tensor_all(backend, &c.outputs()[i + 1..])?;
    let late_inputs = Object::tensor_all(backend, &c.inputs()[i + 1..])?;
    let marginal = joints[depth].then_right(&discard(&late_outputs)?)?;
    let early = joints[i].before_right(&discard(&late_inputs)?)?;
    Ok(differ(
        Verdict::first_difference(&[marginal], &[early]),
        &format!("stage {i} depends on later inputs"),
    ))
}

fn plug_fillers(g: &mut Gen, comb: &FiniteComb) -> Result<Vec<Vec<Morphism>>> {
    let holes: Vec<(Object, Object)> = (0..comb.len() - 1)
        .map(|i| (comb.outputs()[i].clone(), comb.inputs()[i + 1].clone()))
        .collect();
    if g.backend() == Backend::FinFn {
        let options = holes
            .iter()
            .map(|(y, x)| Gen::all_functions(y, x))
            .collect::<Result<Vec<_>>>();
        if let Ok(options) = options {
            let total: usize = options.iter().map(Vec::len).product();
            if total <= 4096 {
                let mut tuples = vec![Vec::new()];
                for opts in &options {
                    tuples = tuples
                        .into_iter()
                        .flat_map(|t| {
                            opts.iter().map(move |o| {
                                let mut t = t.clone();
                                t.push(o.clone());
                                t
                            })
                        })
                        .collect();
                }
                return Ok(tuples);
            }
        }
    }
    (0..8)
        .map(|_| holes.iter().map(|(y, x)| g.morphism(y, x)).collect())
        .collect()
}

/// Normal forms, plugged maps (exhaustive fillers on FinFn), lenses and behaviors
/// are invariant under a random valid slide of a random finite comb.
pub fn quotient_soundness(g: &mut Gen, depth: usize) -> Result<Option<String>> {
    let pieces = 2 + (g.seed() as usize) % depth.clamp(1, 2);
    let (comb, mv) = g.finite_comb_with_slide(pieces)?;
    let slid = comb.slide(&mv)?;
    let mut failures = vec![differ(comb.behavior_equal_probe(&slid)?, "joint behavior")];
    if g.backend().is_cartesian() {
        failures.push(differ(comb.equal_cartesian(&slid)?, "normal form"));
        if comb.len() == 2 && comb.to_lens()? != slid.to_lens()? {
            failures.push(Some("lens changed".into()));
        }
    }
    for fillers in plug_fillers(g, &comb)? {
        if comb.plug(&fillers)? != slid.plug(&fillers)? {
            failures.push(Some("plugged map changed".into()));
            break;
        }
    }
    Ok(first_failure(failures))
}

/// `causalForm ∘ fromCausalForm = id` and `fromCausalForm ∘ causalForm` preserves behavior.
pub fn causal_round_trip(g: &mut Gen, depth: usize) -> Result<Option<String>> {
    let (x, y) = (g.families(1, BUDGET).remove(0), g.family());
    let cf = g.causal_form(&x, &y, depth)?;
    let back = causal_form(&from_causal_form(&cf)?, depth)?;
    let c = g.stream_comb(&x, &y)?;
    let rebuilt = from_causal_form(&causal_form(&c, depth)?)?;
    Ok(first_failure([
        differ(back.compare(&cf), "causal form after rebuilding"),
        same(&rebuilt, &c, depth, "rebuilt comb")?,
    ]))
}

/// The normal form of a truncation agrees with the causal form of the ∞-comb.
pub fn open_closed_collapse(g: &mut Gen, depth: usize) -> Result<Option<String>> {
    let (x, y) = (g.families(1, BUDGET).remove(0), g.family());
    let c = g.stream_comb(&x, &y)?;
    let cf = causal_form(&c, depth)?;
    let mut failures = Vec::new();
    for n in 0..=depth {
        let nf = c.truncate(n)?.normal_form_cartesian()?;
        failures.push(differ(nf.compare(&cf.prefix(n)?), &format!("truncation {n}")));
    }
    Ok(first_failure(failures))
}

/// Composition of combs is Kleisli composition of their causal forms.
pub fn kleisli_equivalence(g: &mut Gen, depth: usize) -> Result<Option<String>> {
    let (x, y, z) = (g.families(1, BUDGET).remove(0), g.family(), g.family());
    let f = g.stream_comb(&x, &y)?;
    let h = g.stream_comb(&y, &z)?;
    let direct = causal_form(&compose_seq(&h, &f)?, depth)?;
    let kleisli = kleisli_compose(&causal_form(&h, depth)?, &causal_form(&f, depth)?)?;
    Ok(differ(direct.compare(&kleisli), "causal form of g∘f vs Kleisli composite"))
}

/// Unit and associativity laws of Kleisli composition.
pub fn kleisli_laws(g: &mut Gen, depth: usize) -> Result<Option<String>> {
    let (x, y, z, w) = (g.families(1, BUDGET).remove(0), g.family(), g.family(), g.family());
    let f = g.causal_form(&x, &y, depth)?;
    let h = g.causal_form(&y, &z, depth)?;
    let k = g.causal_form(&z, &w, depth)?;
    let left_unit = kleisli_compose(&kleisli_identity(f.outputs())?, &f)?;
    let right_unit = kleisli_compose(&f, &kleisli_identity(f.inputs())?)?;
    let assoc_l = kleisli_compose(&kleisli_compose(&k, &h)?, &f)?;
    let assoc_r = kleisli_compose(&k, &kleisli_compose(&h, &f)?)?;
    Ok(first_failure([
        differ(left_unit.compare(&f), "ε∘f vs f"),
        differ(right_unit.compare(&f), "f∘ε vs f"),
        differ(assoc_l.compare(&assoc_r), "(k∘h)∘f vs k∘(h∘f)"),
    ]))
}

/// Counit and coassociativity laws of `(Θ, ε, ν)` on raw objects.
pub fn comonad_laws(g: &mut Gen, depth: usize) -> Result<Option<String>> {
    let n = depth.min(RAW_COMONAD_DEPTH);
    let xs = g.families(1, BUDGET).remove(0).take(n + 1);
    let theta = theta_family(&xs)?;
    let nu = theta_comult(&xs, n)?;
    let id = identity(&theta[n]);
    let counit_outer = compose(&theta_counit(&theta, n)?, &nu)?;
    let counits = (0..=n).map(|k| theta_counit(&xs, k)).collect::<Result<Vec<_>>>()?;
    let counit_inner = compose(&theta_map(&counits, n)?, &nu)?;
    let nus = (0..=n).map(|k| theta_comult(&xs, k)).collect::<Result<Vec<_>>>()?;
    let coassoc_l = compose(&theta_map(&nus, n)?, &nu)?;
    let coassoc_r = compose(&theta_comult(&theta, n)?, &nu)?;
    Ok(first_failure([
        differ(Verdict::first_difference(&[counit_outer], std::slice::from_ref(&id)), "εΘ∘ν vs id"),
        differ(Verdict::first_difference(&[counit_inner], &[id]), "Θε∘ν vs id"),
        differ(Verdict::first_difference(&[coassoc_l], &[coassoc_r]), "Θν∘ν vs νΘ∘ν"),
    ]))
}

/// State streams of random stochastic combs are coherent.
pub fn state_coherence(g: &mut Gen, depth: usize) -> Result<Option<String>> {
    let y = g.family();
    let c = g.stream_comb(&ObjectFamily::unit(g.backend()), &y)?;
    let state = extract_state_stream(&c, depth)?;
    let verdict = check_coherence(&state, depth)?;
    Ok((!verdict.is_coherent()).then(|| verdict.to_string()))
}

/// The named laws that apply to a backend.
pub fn laws_for(backend: Backend) -> Vec<(&'static str, Check)> {
    let mut laws: Vec<(&'static str, Check)> = vec![
        ("sequential associativity", seq_associativity),
        ("sequential unit", seq_unit),
        ("parallel associativity", par_associativity),
        ("parallel unit", par_unit),
        ("interchange", interchange),
        ("symmetry naturality", symmetry_naturality),
        ("lift functoriality", lift_functoriality),
        ("lift strictness", lift_strictness),
        ("delay functoriality", delay_functoriality),
        ("trace-like feedback", trace_like),
        ("feedback naturality", feedback_naturality),
        ("slide invariance of streams", stream_slide_invariance),
        ("causality", causality),
        ("quotient soundness", quotient_soundness),
    ];
    if backend.is_cartesian() {
        laws.extend([
            ("causal form round trip", causal_round_trip as Check),
            ("open and closed normal forms", open_closed_collapse),
            ("Kleisli equivalence", kleisli_equivalence),
            ("Kleisli laws", kleisli_laws),
            ("comonad laws", comonad_laws),
        ]);
    } else {
        laws.push(("state coherence", state_coherence));
    }
    laws
}

/// Runs one law on `cases` instances; case `i` is seeded from `(seed, i)`.
pub fn run_law(
    law: &'static str,
    check: Check,
    backend: Backend,
    seed: u64,
    cases: usize,
    depth: usize,
    max_set: usize,
) -> LawReport {
    let failures = (0..cases)
        .filter_map(|i| {
            let mut g = Gen::new(backend, child_seed(seed, i as u64), max_set);
            match check(&mut g, depth) {
                Ok(None) => None,
                Ok(Some(msg)) => Some(format!("case {i}: {msg}")),
                Err(e) => Some(format!("case {i}: error: {e}")),
            }
        })
        .collect();
    LawReport { law, cases, failures }
}

/// Runs every applicable law, one thread per law, reporting in a fixed order.
pub fn run_suite(backend: Backend, seed: u64, cases: usize, depth: usize) -> Vec<LawReport> {
    let laws = laws_for(backend);
    std::thread::scope(|s| {
        let handles: Vec<_> = laws
            .iter()
            .map(|&(law, check)| s.spawn(move || run_law(law, check, backend, seed, cases, depth, 3)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("law thread panicked"))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_law_passes_on_a_few_cases() {
        for backend in [Backend::FinFn, Backend::FinStoch, Backend::BigFn] {
            for report in run_suite(backend, 1, 3, 3) {
                assert!(report.passed(), "{backend}: {report}");
            }
        }
    }
}
