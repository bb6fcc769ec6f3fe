use std::fmt::Write;

use super::ast::*;

/// Canonical source text: one item per line, minimal spacing, parentheses kept.
pub fn print(p: &Program) -> String {
    let mut out = String::new();
    for item in &p.items {
        item_text(&mut out, item);
        out.push('\n');
    }
    out
}

fn item_text(out: &mut String, item: &Item) {
    match item {
        Item::Backend { backend, .. } => {
            let _ = write!(out, "backend {};", backend.name);
        }
        Item::Set { name, labels, .. } => {
            let labels: Vec<&str> = labels.iter().map(|l| l.name.as_str()).collect();
            let _ = write!(out, "set {} = {{{}}};", name.name, labels.join(", "));
        }
        Item::Gen { name, domain, codomain, body, .. } => {
            let _ = write!(out, "gen {} : {} -> {} = ", name.name, obj(domain), obj(codomain));
            match body {
                GenBody::Table(rows) => {
                    let rows: Vec<String> = rows.iter().map(|(x, y)| format!("{} -> {}", elem(x), elem(y))).collect();
                    let _ = write!(out, "table {{{}}};", rows.join(", "));
                }
                GenBody::Matrix(rows) => {
                    let rows: Vec<String> = rows
                        .iter()
                        .map(|(x, y, r)| format!("{} -> {} : {}/{}", elem(x), elem(y), r.num, r.den))
                        .collect();
                    let _ = write!(out, "matrix {{{}}};", rows.join(", "));
                }
                GenBody::Builtin(b) => {
                    let _ = write!(out, "builtin {};", b.name);
                }
            }
        }
        Item::Family { name, family, .. } => {
            let _ = write!(out, "family {} = {};", name.name, fam(family));
        }
        Item::Comb { name, inputs, outputs, body, .. } => {
            let _ = write!(out, "comb {} : {} -> {} = {};", name.name, fam_ref(inputs), fam_ref(outputs), comb(body));
        }
    }
}

fn obj(o: &ObjExpr) -> String {
    match o {
        ObjExpr::Name(i) => i.name.clone(),
        ObjExpr::Unit(_) => "unit".into(),
        ObjExpr::Int(_) => "int".into(),
        ObjExpr::Tensor(parts, _) => parts.iter().map(obj).collect::<Vec<_>>().join(" * "),
        ObjExpr::Paren(inner, _) => format!("({})", obj(inner)),
    }
}

fn elem(e: &Elem) -> String {
    match e {
        Elem::Star(_) => "*".into(),
        Elem::Label(i) => i.name.clone(),
        Elem::Tuple(parts, _) => format!("({})", parts.iter().map(elem).collect::<Vec<_>>().join(", ")),
    }
}

fn fam(f: &FamExpr) -> String {
    let prefix: Vec<String> = f.prefix.iter().map(obj).collect();
    format!("[{}; {}]", prefix.join(", "), obj(&f.tail))
}

fn fam_ref(f: &FamRef) -> String {
    match f {
        FamRef::Name(i) => i.name.clone(),
        FamRef::Inline(f) => fam(f),
    }
}

fn morph(m: &MorphExpr) -> String {
    match m {
        MorphExpr::Name(i) => i.name.clone(),
        MorphExpr::Id(o, _) => format!("id({})", obj(o)),
        MorphExpr::Swap(a, b, _) => format!("swap({}, {})", obj(a), obj(b)),
        MorphExpr::Copy(o, _) => format!("copy({})", obj(o)),
        MorphExpr::Discard(o, _) => format!("discard({})", obj(o)),
        MorphExpr::Seq(parts, _) => parts.iter().map(morph).collect::<Vec<_>>().join(" >> "),
        MorphExpr::Par(parts, _) => parts.iter().map(morph).collect::<Vec<_>>().join(" * "),
        MorphExpr::Paren(inner, _) => format!("({})", morph(inner)),
    }
}

fn stage(s: &StageEntry) -> String {
    format!("{}, {}", obj(&s.memory), morph(&s.piece))
}

fn comb(c: &CombExpr) -> String {
    match c {
        CombExpr::Name(i) => i.name.clone(),
        CombExpr::Lift { prefix, tail, .. } => {
            let prefix: Vec<String> = prefix.iter().map(morph).collect();
            format!("lift [{}; {}]", prefix.join(", "), morph(tail))
        }
        CombExpr::Stages { entries, tail, .. } => {
            let mut s = String::from("stages {");
            for e in entries {
                let _ = write!(s, "{}: {}; ", e.index, stage(e));
            }
            let _ = write!(s, "tail({}): {}}}", tail.index, stage(tail));
            s
        }
        CombExpr::Seq(parts, _) => parts.iter().map(comb).collect::<Vec<_>>().join(" ; "),
        CombExpr::Par(parts, _) => parts.iter().map(comb).collect::<Vec<_>>().join(" | "),
        CombExpr::Delay(inner, _) => format!("delay {}", comb(inner)),
        CombExpr::Feedback(carrier, inner, _) => {
            let carrier = match carrier {
                FamRef::Name(i) => i.name.clone(),
                FamRef::Inline(f) => {
                    let inner = fam(f);
                    inner[1..inner.len() - 1].to_string()
                }
            };
            format!("feedback [{carrier}] {}", comb(inner))
        }
        CombExpr::Paren(inner, _) => format!("({})", comb(inner)),
    }
}
