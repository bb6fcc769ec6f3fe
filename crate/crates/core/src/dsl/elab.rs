use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::ast::*;
use super::{Diagnostic, DiagnosticKind, Span};
use crate::backend::{
    compose, copy, discard, identity, proj_left, proj_right, swap, tensor, Backend, Generator, Morphism, Object,
    Rational,
};
use crate::family::ObjectFamily;
use crate::feedback::{delay_comb, feedback};
use crate::stream::{compose_seq, lift, tensor_par, Stage, StreamComb};

type Elab<T> = Result<T, Diagnostic>;

/// An elaborated program: its backend and its combs in declaration order.
#[derive(Clone)]
pub struct Circuit {
    backend: Backend,
    combs: Vec<(String, StreamComb)>,
}

impl Circuit {
    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn comb(&self, name: &str) -> Option<&StreamComb> {
        self.combs.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    pub fn comb_names(&self) -> Vec<&str> {
        self.combs.iter().map(|(n, _)| n.as_str()).collect()
    }

    /// The comb declared last, the default target of the command line.
    pub fn last_comb(&self) -> Option<(&str, &StreamComb)> {
        self.combs.last().map(|(n, c)| (n.as_str(), c))
    }
}

/// Elaborates every declaration, in order; later items see earlier ones.
pub fn elaborate_program(p: &Program) -> Elab<Circuit> {
    let mut env = Env {
        backend: None,
        names: HashMap::new(),
        sets: HashMap::new(),
        gens: HashMap::new(),
        families: HashMap::new(),
        combs: Vec::new(),
    };
    for item in &p.items {
        env.item(item)?;
    }
    Ok(Circuit {
        backend: env.backend(),
        combs: env.combs,
    })
}

/// Elaborates a program and returns the comb called `name`.
pub fn elaborate(p: &Program, name: &str) -> Elab<StreamComb> {
    let circuit = elaborate_program(p)?;
    circuit.comb(name).cloned().ok_or_else(|| {
        let names = circuit.comb_names().join(", ");
        Diagnostic::type_error(Span::default(), format!("no comb named '{name}' (declared: {names})"))
    })
}

struct Env {
    backend: Option<Backend>,
    names: HashMap<String, Span>,
    sets: HashMap<String, Object>,
    gens: HashMap<String, Morphism>,
    families: HashMap<String, ObjectFamily>,
    combs: Vec<(String, StreamComb)>,
}

fn unsupported(span: Span, message: impl Into<String>) -> Diagnostic {
    Diagnostic {
        kind: DiagnosticKind::Unsupported,
        message: message.into(),
        span,
        expected: Vec::new(),
    }
}

fn flatten(e: &Elem, out: &mut Vec<String>) {
    match e {
        Elem::Star(_) => {}
        Elem::Label(i) => out.push(i.name.clone()),
        Elem::Tuple(parts, _) => parts.iter().for_each(|p| flatten(p, out)),
    }
}

fn is_bare_id(m: &MorphExpr) -> bool {
    matches!(m, MorphExpr::Name(i) if i.name == "id")
}

impl Env {
    fn backend(&self) -> Backend {
        self.backend.unwrap_or(Backend::FinFn)
    }

    fn declare(&mut self, name: &Ident) -> Elab<()> {
        if let Some(prev) = self.names.get(&name.name) {
            return Err(Diagnostic::type_error(
                name.span,
                format!("'{}' is already declared at {prev}", name.name),
            ));
        }
        self.names.insert(name.name.clone(), name.span);
        Ok(())
    }

    fn item(&mut self, item: &Item) -> Elab<()> {
        match item {
            Item::Backend { backend, span } => {
                if self.backend.is_some() {
                    return Err(Diagnostic::type_error(*span, "duplicate backend declaration"));
                }
                if !self.names.is_empty() {
                    return Err(Diagnostic::type_error(*span, "the backend must be declared before anything else"));
                }
                let b: Backend = backend
                    .name
                    .parse()
                    .map_err(|e: String| Diagnostic::type_error(backend.span, e))?;
                self.backend = Some(b);
            }
            Item::Set { name, labels, span } => {
                self.declare(name)?;
                if self.backend() == Backend::BigFn {
                    return Err(unsupported(*span, "finite sets are not available on the bigfn backend"));
                }
                let labels: Vec<&str> = labels.iter().map(|l| l.name.as_str()).collect();
                let set = Object::set(self.backend(), labels)
                    .map_err(|e| Diagnostic::from_error(*span, &format!("set '{}'", name.name), e))?;
                self.sets.insert(name.name.clone(), set);
            }
            Item::Gen { name, domain, codomain, body, span } => {
                self.declare(name)?;
                let dom = self.obj(domain)?;
                let cod = self.obj(codomain)?;
                let m = self.gen_body(&name.name, dom, cod, body, *span)?;
                self.gens.insert(name.name.clone(), m);
            }
            Item::Family { name, family, .. } => {
                self.declare(name)?;
                let fam = self.fam(family)?;
                self.families.insert(name.name.clone(), fam);
            }
            Item::Comb { name, inputs, outputs, body, .. } => {
                self.declare(name)?;
                let xs = self.fam_ref(inputs)?;
                let ys = self.fam_ref(outputs)?;
                let c = self.comb(body, Some(&xs))?;
                boundary(&xs, c.inputs(), inputs.span(), &format!("inputs of comb '{}'", name.name))?;
                boundary(&ys, c.outputs(), outputs.span(), &format!("outputs of comb '{}'", name.name))?;
                self.combs.push((name.name.clone(), c));
            }
        }
        Ok(())
    }

    fn obj(&self, o: &ObjExpr) -> Elab<Object> {
        let b = self.backend();
        match o {
            ObjExpr::Unit(_) => Ok(Object::unit(b)),
            ObjExpr::Int(span) => {
                if b == Backend::BigFn {
                    Ok(Object::ints(1))
                } else {
                    Err(unsupported(*span, format!("'int' is only available on the bigfn backend, not {b}")))
                }
            }
            ObjExpr::Name(i) => self.sets.get(&i.name).cloned().ok_or_else(|| {
                Diagnostic::type_error(i.span, format!("unknown object '{}'", i.name))
            }),
            ObjExpr::Paren(inner, _) => self.obj(inner),
            ObjExpr::Tensor(parts, span) => {
                let mut acc = Object::unit(b);
                for p in parts {
                    acc = acc
                        .tensor(&self.obj(p)?)
                        .map_err(|e| Diagnostic::from_error(*span, "tensor of objects", e))?;
                }
                Ok(acc)
            }
        }
    }

    fn elem(&self, e: &Elem, obj: &Object) -> Elab<usize> {
        let mut atoms = Vec::new();
        flatten(e, &mut atoms);
        obj.index_of_atoms(&atoms).ok_or_else(|| {
            Diagnostic::type_error(*e.span(), format!("not an element of {obj}"))
        })
    }

    fn gen_body(&self, name: &str, dom: Object, cod: Object, body: &GenBody, span: Span) -> Elab<Morphism> {
        let b = self.backend();
        let context = format!("generator '{name}'");
        match body {
            GenBody::Table(rows) => {
                if b == Backend::BigFn {
                    return Err(unsupported(span, "tables are not available on the bigfn backend"));
                }
                let size = dom.size().map_err(|e| Diagnostic::from_error(span, &context, e))?;
                let mut table: Vec<Option<usize>> = vec![None; size];
                for (x, y) in rows {
                    let i = self.elem(x, &dom)?;
                    let j = self.elem(y, &cod)?;
                    if table[i].replace(j).is_some() {
                        return Err(Diagnostic::type_error(*x.span(), format!("{} is mapped twice", dom.element_label(i))));
                    }
                }
                let table = table
                    .into_iter()
                    .enumerate()
                    .map(|(i, j)| {
                        j.ok_or_else(|| {
                            Diagnostic::type_error(span, format!("{context} does not map {}", dom.element_label(i)))
                        })
                    })
                    .collect::<Elab<Vec<usize>>>()?;
                Morphism::function(dom, cod, table).map_err(|e| Diagnostic::from_error(span, &context, e))
            }
            GenBody::Matrix(rows) => {
                if b != Backend::FinStoch {
                    return Err(unsupported(span, format!("matrices are only available on the finstoch backend, not {b}")));
                }
                let size = dom.size().map_err(|e| Diagnostic::from_error(span, &context, e))?;
                let mut kernel: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); size];
                let mut totals = vec![Rational::zero(); size];
                for (x, y, r) in rows {
                    let i = self.elem(x, &dom)?;
                    let j = self.elem(y, &cod)?;
                    let p = rational(r)?;
                    if kernel[i].iter().any(|(k, _)| *k == j) {
                        return Err(Diagnostic::type_error(
                            *y.span(),
                            format!("entry {} -> {} is given twice", dom.element_label(i), cod.element_label(j)),
                        ));
                    }
                    totals[i] += p.clone();
                    kernel[i].push((j, p));
                }
                if let Some(i) = totals.iter().position(|t| !t.is_one()) {
                    return Err(Diagnostic::type_error(
                        span,
                        format!("row {} of {context} sums to {}, not 1", dom.element_label(i), totals[i]),
                    ));
                }
                Morphism::stochastic(dom, cod, kernel).map_err(|e| Diagnostic::from_error(span, &context, e))
            }
            GenBody::Builtin(which) => {
                let m = self.builtin(which, &dom)?;
                if m.domain() != &dom || m.codomain() != &cod {
                    return Err(Diagnostic::type_error(
                        span,
                        format!(
                            "builtin {} has type {} -> {}, declared {dom} -> {cod}",
                            which.name,
                            m.domain(),
                            m.codomain()
                        ),
                    ));
                }
                Ok(m)
            }
        }
    }

    fn builtin(&self, which: &Ident, dom: &Object) -> Elab<Morphism> {
        let b = self.backend();
        let span = which.span;
        let ctx = format!("builtin {}", which.name);
        let err = |e| Diagnostic::from_error(span, &ctx, e);
        let halves = || -> Elab<(Object, Object)> {
            let (left, right) = match dom {
                Object::Finite { factors, backend } if factors.len() == 2 => (
                    Object::Finite { backend: *backend, factors: vec![factors[0].clone()] },
                    Object::Finite { backend: *backend, factors: vec![factors[1].clone()] },
                ),
                Object::Ints { arity: 2 } => (Object::ints(1), Object::ints(1)),
                _ => {
                    return Err(Diagnostic::type_error(
                        span,
                        format!("{ctx} needs a domain with two factors, found {dom}"),
                    ))
                }
            };
            Ok((left, right))
        };
        let int_gen = |g: Generator| {
            if b == Backend::BigFn {
                Ok(Morphism::generator(g))
            } else {
                Err(unsupported(span, format!("{ctx} is only available on the bigfn backend, not {b}")))
            }
        };
        match which.name.as_str() {
            "id" => Ok(identity(dom)),
            "copy" => copy(dom).map_err(err),
            "discard" => discard(dom).map_err(err),
            "swap" => {
                let (l, r) = halves()?;
                swap(&l, &r).map_err(err)
            }
            "proj1" => {
                let (l, r) = halves()?;
                proj_left(&l, &r).map_err(err)
            }
            "proj2" => {
                let (l, r) = halves()?;
                proj_right(&l, &r).map_err(err)
            }
            "zero" => int_gen(Generator::Zero),
            "one" => int_gen(Generator::One),
            "succ" => int_gen(Generator::Succ),
            "add" => int_gen(Generator::Add),
            other => Err(Diagnostic::type_error(
                span,
                format!("unknown builtin '{other}' (expected id, swap, copy, discard, zero, one, succ, add, proj1 or proj2)"),
            )),
        }
    }

    fn fam(&self, f: &FamExpr) -> Elab<ObjectFamily> {
        let prefix = f.prefix.iter().map(|o| self.obj(o)).collect::<Elab<Vec<_>>>()?;
        let tail = self.obj(&f.tail)?;
        ObjectFamily::new(prefix, tail).map_err(|e| Diagnostic::from_error(f.span, "family", e))
    }

    fn fam_ref(&self, f: &FamRef) -> Elab<ObjectFamily> {
        match f {
            FamRef::Inline(f) => self.fam(f),
            FamRef::Name(i) => self.families.get(&i.name).cloned().ok_or_else(|| {
                Diagnostic::type_error(i.span, format!("unknown family '{}'", i.name))
            }),
        }
    }

    /// Elaborates a morphism; `expected` is the domain the context requires, used to
    /// type a bare `id`.
    fn morph(&self, m: &MorphExpr, expected: Option<&Object>) -> Elab<Morphism> {
        let err = |span: &Span, ctx: &str| {
            let span = *span;
            let ctx = ctx.to_string();
            move |e| Diagnostic::from_error(span, &ctx, e)
        };
        match m {
            MorphExpr::Name(i) => match self.gens.get(&i.name) {
                Some(g) => Ok(g.clone()),
                None if i.name == "id" => match expected {
                    Some(x) => Ok(identity(x)),
                    None => Err(Diagnostic::type_error(
                        i.span,
                        "cannot infer the object of 'id' here; write id(OBJ)",
                    )),
                },
                None => Err(Diagnostic::type_error(i.span, format!("unknown generator '{}'", i.name))),
            },
            MorphExpr::Id(o, _) => Ok(identity(&self.obj(o)?)),
            MorphExpr::Swap(a, c, span) => swap(&self.obj(a)?, &self.obj(c)?).map_err(err(span, "swap")),
            MorphExpr::Copy(o, span) => copy(&self.obj(o)?).map_err(err(span, "copy")),
            MorphExpr::Discard(o, span) => discard(&self.obj(o)?).map_err(err(span, "discard")),
            MorphExpr::Paren(inner, _) => self.morph(inner, expected),
            MorphExpr::Seq(parts, _) => {
                let mut acc = self.morph(&parts[0], expected)?;
                for p in &parts[1..] {
                    let next = self.morph(p, Some(acc.codomain()))?;
                    if next.domain() != acc.codomain() {
                        return Err(Diagnostic::type_error(
                            *p.span(),
                            format!("'>>' expects domain {}, found {}", acc.codomain(), next.domain()),
                        ));
                    }
                    acc = compose(&next, &acc).map_err(err(p.span(), "'>>'"))?;
                }
                Ok(acc)
            }
            MorphExpr::Par(parts, span) => {
                let bare = parts.iter().filter(|p| is_bare_id(p) && !self.gens.contains_key("id")).count();
                let typed = parts
                    .iter()
                    .map(|p| {
                        if bare == 1 && is_bare_id(p) && !self.gens.contains_key("id") {
                            Ok(None)
                        } else {
                            self.morph(p, None).map(Some)
                        }
                    })
                    .collect::<Elab<Vec<_>>>()?;
                let mut acc: Option<Morphism> = None;
                for (k, (p, m)) in parts.iter().zip(&typed).enumerate() {
                    let m = match m {
                        Some(m) => m.clone(),
                        None => identity(&self.infer_slot(&typed, k, expected, p.span())?),
                    };
                    acc = Some(match acc {
                        None => m,
                        Some(a) => tensor(&a, &m).map_err(err(span, "'*'"))?,
                    });
                }
                Ok(acc.expect("at least two factors"))
            }
        }
    }

    /// The domain left for the one untyped factor of a tensor once the others are known.
    fn infer_slot(&self, typed: &[Option<Morphism>], k: usize, expected: Option<&Object>, span: &Span) -> Elab<Object> {
        let b = self.backend();
        let fail = || Diagnostic::type_error(*span, "cannot infer the object of 'id' here; write id(OBJ)");
        let expected = expected.ok_or_else(fail)?;
        let domains = |ms: &[Option<Morphism>]| {
            Object::tensor_all(b, ms.iter().flatten().map(|m| m.domain()))
                .map_err(|e| Diagnostic::from_error(*span, "'*'", e))
        };
        let left = domains(&typed[..k])?;
        let right = domains(&typed[k + 1..])?;
        expected
            .strip_prefix(&left)
            .and_then(|rest| rest.strip_suffix(&right))
            .ok_or_else(fail)
    }

    fn comb(&self, c: &CombExpr, expected: Option<&ObjectFamily>) -> Elab<StreamComb> {
        let err = |span: &Span, ctx: &str| {
            let span = *span;
            let ctx = ctx.to_string();
            move |e| Diagnostic::from_error(span, &ctx, e)
        };
        match c {
            CombExpr::Name(i) => self
                .combs
                .iter()
                .find(|(n, _)| n == &i.name)
                .map(|(_, c)| c.clone())
                .ok_or_else(|| Diagnostic::type_error(i.span, format!("unknown comb '{}'", i.name))),
            CombExpr::Paren(inner, _) => self.comb(inner, expected),
            CombExpr::Lift { prefix, tail, span } => {
                let at = |n: usize| expected.map(|x| x.at(n));
                let prefix = prefix
                    .iter()
                    .enumerate()
                    .map(|(n, m)| self.morph(m, at(n)))
                    .collect::<Elab<Vec<_>>>()?;
                let tail = self.morph(tail, at(prefix.len()))?;
                lift(prefix, tail).map_err(err(span, "lift"))
            }
            CombExpr::Stages { entries, tail, span } => self.stages(entries, tail, *span, expected),
            CombExpr::Seq(parts, _) => {
                let mut acc = self.comb(&parts[0], expected)?;
                for p in &parts[1..] {
                    let next = self.comb(p, Some(acc.outputs()))?;
                    boundary(acc.outputs(), next.inputs(), p.span(), "';' (outputs of the left side against inputs of the right)")?;
                    acc = compose_seq(&next, &acc).map_err(err(p.span(), "';'"))?;
                }
                Ok(acc)
            }
            CombExpr::Par(parts, span) => {
                let mut acc = self.comb(&parts[0], None)?;
                for p in &parts[1..] {
                    let next = self.comb(p, None)?;
                    acc = tensor_par(&acc, &next).map_err(err(span, "'|'"))?;
                }
                Ok(acc)
            }
            CombExpr::Delay(inner, span) => {
                let inner_expected = expected
                    .filter(|x| x.at(0).is_unit())
                    .and_then(|x| {
                        let prefix = x.prefix().get(1..).unwrap_or_default().to_vec();
                        ObjectFamily::new(prefix, x.tail().clone()).ok()
                    });
                let f = self.comb(inner, inner_expected.as_ref())?;
                delay_comb(&f).map_err(err(span, "delay"))
            }
            CombExpr::Feedback(carrier, inner, span) => {
                let x = self.fam_ref(carrier)?;
                let inner_expected = expected.and_then(|a| x.delay().tensor(a).ok());
                let f = self.comb(inner, inner_expected.as_ref())?;
                feedback(&x, &f).map_err(err(span, "feedback"))
            }
        }
    }

    fn stages(
        &self,
        entries: &[StageEntry],
        tail: &StageEntry,
        span: Span,
        expected: Option<&ObjectFamily>,
    ) -> Elab<StreamComb> {
        let b = self.backend();
        let mut before = Object::unit(b);
        let mut stages = Vec::new();
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        let step = |entry: &StageEntry, before: &Object| -> Elab<(Stage, Object, Object)> {
            let memory = self.obj(&entry.memory)?;
            let want = expected.and_then(|x| before.tensor(x.at(entry.index)).ok());
            let piece = self.morph(&entry.piece, want.as_ref())?;
            let x = piece.domain().strip_prefix(before).ok_or_else(|| {
                Diagnostic::type_error(
                    *entry.piece.span(),
                    format!("stage {} piece has domain {}, which does not start with the memory {before}", entry.index, piece.domain()),
                )
            })?;
            let y = piece.codomain().strip_prefix(&memory).ok_or_else(|| {
                Diagnostic::type_error(
                    *entry.piece.span(),
                    format!("stage {} piece has codomain {}, which does not start with its memory {memory}", entry.index, piece.codomain()),
                )
            })?;
            Ok((Stage { memory, piece }, x, y))
        };
        for entry in entries {
            let (stage, x, y) = step(entry, &before)?;
            before = stage.memory.clone();
            stages.push(stage);
            xs.push(x);
            ys.push(y);
        }
        let (last, x, y) = step(tail, &before)?;
        if last.memory != before {
            return Err(Diagnostic::type_error(
                tail.span,
                format!(
                    "the tail repeats its piece, so its memory {} must equal the memory {before} it starts from",
                    last.memory
                ),
            ));
        }
        let err = |e| Diagnostic::from_error(span, "stages", e);
        let inputs = ObjectFamily::new(xs, x).map_err(err)?;
        let outputs = ObjectFamily::new(ys, y).map_err(err)?;
        StreamComb::new(inputs, outputs, move |n| Ok(stages.get(n).unwrap_or(&last).clone())).map_err(err)
    }
}

fn rational(r: &RationalLit) -> Elab<Rational> {
    let parse = |s: &str| s.parse::<BigInt>().map_err(|e| Diagnostic::type_error(r.span, format!("bad number {s}: {e}")));
    let (num, den) = (parse(&r.num)?, parse(&r.den)?);
    if den.is_zero() {
        return Err(Diagnostic::type_error(r.span, "denominator must be positive"));
    }
    Ok(Rational::new(num, den))
}

fn boundary(want: &ObjectFamily, found: &ObjectFamily, span: &Span, context: &str) -> Elab<()> {
    match want.first_difference(found) {
        None => Ok(()),
        Some(n) => Err(Diagnostic::type_error(
            *span,
            format!("{context}: expected {want}, found {found} (first difference at stage {n}: {} vs {})", want.at(n), found.at(n)),
        )),
    }
}
