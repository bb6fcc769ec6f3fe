use crate::error::{Error, Result};
use crate::family::ObjectFamily;
use crate::stream::{Stage, StreamComb};
use crate::backend::{identity, Object};

/// `(δX)₀ = I`, `(δX)ₙ₊₁ = Xₙ`.
pub fn delay_family(x: &ObjectFamily) -> ObjectFamily {
    x.delay()
}

/// The delayed comb `δf : δX → δY`: an empty first stage, then the stages of `f`.
pub fn delay_comb(f: &StreamComb) -> Result<StreamComb> {
    let unit = Object::unit(f.backend());
    let f = f.clone();
    StreamComb::new(f.inputs().delay(), f.outputs().delay(), move |n| {
        if n == 0 {
            Ok(Stage {
                memory: unit.clone(),
                piece: identity(&unit),
            })
        } else {
            f.stage(n - 1)
        }
    })
}

/// The feedback `fbk^X f : A → B` of `f : δX ⊗ A → X ⊗ B`.
///
/// Each stage keeps its `Xₙ` output in memory next to `f`'s own memory, where the
/// following stage reads it as its `(δX)ₙ₊₁` input. With memory on the left of every
/// piece, the pieces of the result are those of `f`.
pub fn feedback(carrier: &ObjectFamily, f: &StreamComb) -> Result<StreamComb> {
    let a = f
        .inputs()
        .strip_left(&carrier.delay())
        .map_err(|e| reshape(e, "input", f.inputs(), "δX ⊗ A"))?;
    let b = f
        .outputs()
        .strip_left(carrier)
        .map_err(|e| reshape(e, "output", f.outputs(), "X ⊗ B"))?;
    let (f, carrier) = (f.clone(), carrier.clone());
    StreamComb::new(a, b, move |n| {
        let stage = f.stage(n)?;
        Ok(Stage {
            memory: stage.memory.tensor(carrier.at(n))?,
            piece: stage.piece,
        })
    })
}

fn reshape(e: Error, side: &str, family: &ObjectFamily, expected: &str) -> Error {
    match e {
        Error::FamilyShape(msg) => {
            Error::FamilyShape(format!("{side} family {family} is not {expected}: {msg}"))
        }
        other => other,
    }
}
