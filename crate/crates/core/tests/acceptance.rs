//! Acceptance run: one PASS/FAIL line per criterion with its runtime.
//! Exits non-zero if any criterion fails or exceeds its time budget.

use std::time::{Duration, Instant};

use combs::backend::{copy, identity, Backend, Morphism, Object};
use combs::bundled;
use combs::cartesian::{check_coherence, extract_state_stream, StateFamily};
use combs::cli;
use combs::dsl;
use combs::finite::FiniteComb;
use combs::laws::{self, run_law, Check};
use combs::random::{child_seed, Gen};
use combs::stream::{behavior_equal, StreamComb};
use num_bigint::BigInt;
use num_traits::One;

const SEED: u64 = 0x5eed_2024;
const CASES: usize = 100;

type Outcome = Result<(), String>;
type Criterion = (&'static str, Duration, Box<dyn Fn() -> Outcome>);

fn laws(list: &[(&'static str, Check)], backend: Backend, depth: usize, max_set: usize) -> Outcome {
    let mut failures = Vec::new();
    for &(law, check) in list {
        let report = run_law(law, check, backend, SEED, CASES, depth, max_set);
        if !report.passed() {
            failures.push(report.to_string());
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(failures.join("; "))
    }
}

fn fibonacci_oracle(n: usize) -> Vec<BigInt> {
    let (mut a, mut b) = (BigInt::from(0), BigInt::from(1));
    let mut out = Vec::new();
    for _ in 0..n {
        out.push(a.clone());
        let next = &a + &b;
        a = std::mem::replace(&mut b, next);
    }
    out
}

fn fibonacci_reproduction() -> Outcome {
    let run = cli::run(["comb", "run", "fibonacci", "--depth", "9"]);
    if run.code != 0 {
        return Err(format!("exit {}: {}", run.code, run.stderr));
    }
    let records: Vec<serde_json::Value> = serde_json::from_str(&run.stdout).map_err(|e| e.to_string())?;
    let values: Vec<BigInt> = records
        .iter()
        .map(|r| r["value"].as_str().unwrap_or("?").parse::<BigInt>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    let expected = fibonacci_oracle(10);
    if values == expected {
        Ok(())
    } else {
        Err(format!("got {values:?}"))
    }
}

fn equal_to_depth(a: &StreamComb, b: &StreamComb, n: usize) -> Outcome {
    let v = behavior_equal(a, b, n).map_err(|e| e.to_string())?;
    if v.is_equal() {
        Ok(())
    } else {
        Err(v.to_string())
    }
}

fn feedback_vs_unfold() -> Outcome {
    let fb = bundled::fibonacci().map_err(|e| e.to_string())?;
    let unrolled = bundled::fibonacci_unrolled().map_err(|e| e.to_string())?;
    equal_to_depth(&fb, &unrolled, 12)?;
    let program = dsl::parse(bundled::FIBONACCI).map_err(|e| e.to_string())?;
    let circuit = dsl::elaborate_program(&program).map_err(|e| e.to_string())?;
    equal_to_depth(circuit.comb("fibonacci").unwrap(), circuit.comb("fibonacci_unrolled").unwrap(), 12)
}

fn lotka_coherence() -> Outcome {
    let program = dsl::parse(bundled::LOTKA).map_err(|e| e.to_string())?;
    let circuit = dsl::elaborate_program(&program).map_err(|e| e.to_string())?;
    for c in [bundled::lotka().map_err(|e| e.to_string())?, circuit.comb("lotka_loop").unwrap().clone()] {
        let sf = extract_state_stream(&c, 5).map_err(|e| e.to_string())?;
        let StateFamily::Distributions(ds) = &sf else {
            return Err("expected distributions".into());
        };
        if ds.len() != 6 {
            return Err(format!("{} stages", ds.len()));
        }
        if let Some(n) = ds.iter().position(|d| !d.total().is_one()) {
            return Err(format!("stage {n} sums to {}", ds[n].total()));
        }
        let coherence = check_coherence(&sf, 5).map_err(|e| e.to_string())?;
        if !coherence.is_coherent() {
            return Err(coherence.to_string());
        }
    }
    Ok(())
}

fn boolean() -> Object {
    Object::set(Backend::FinFn, ["t", "f"]).unwrap()
}

fn lens_adapter() -> Outcome {
    let b = boolean();
    let bb = b.tensor(&b).unwrap();
    let and = Morphism::from_labels(
        bb,
        b.clone(),
        &[("(t,t)", "t"), ("(t,f)", "f"), ("(f,t)", "f"), ("(f,f)", "f")],
    )
    .unwrap();
    let comb = FiniteComb::one_comb(b.clone(), copy(&b).unwrap(), and.clone()).map_err(|e| e.to_string())?;
    let lens = comb.to_lens().map_err(|e| e.to_string())?;
    if lens.view != identity(&b) || lens.update != and {
        return Err(format!("copy/AND gives view {} and update {}", lens.view, lens.update));
    }
    for i in 0..CASES {
        let mut g = Gen::new(Backend::FinFn, child_seed(SEED, i as u64), 3);
        let (c, mv) = g.finite_comb_with_slide(2).map_err(|e| e.to_string())?;
        let slid = c.slide(&mv).map_err(|e| e.to_string())?;
        if c.to_lens().map_err(|e| e.to_string())? != slid.to_lens().map_err(|e| e.to_string())? {
            return Err(format!("case {i}: lens changed under a slide"));
        }
    }
    Ok(())
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("1 Fibonacci reproduction", Duration::from_secs(1), Box::new(fibonacci_reproduction)),
        ("2 feedback equals unfolding to depth 12", Duration::from_secs(1), Box::new(feedback_vs_unfold)),
        ("3 Lotka-Volterra coherence to depth 5", Duration::from_secs(10), Box::new(lotka_coherence)),
        (
            "4 trace-like law (100 cases, depth 8)",
            Duration::from_secs(30),
            Box::new(|| laws(&[("trace-like feedback", laws::trace_like)], Backend::FinFn, 8, 3)),
        ),
        (
            "5 symmetric monoidal laws (100 cases, depth 6)",
            Duration::from_secs(60),
            Box::new(|| {
                laws(
                    &[
                        ("sequential associativity", laws::seq_associativity),
                        ("sequential unit", laws::seq_unit),
                        ("parallel associativity", laws::par_associativity),
                        ("parallel unit", laws::par_unit),
                        ("interchange", laws::interchange),
                    ],
                    Backend::FinFn,
                    6,
                    3,
                )
            }),
        ),
        (
            "6 cartesian characterization (100 cases, depth 5)",
            Duration::from_secs(30),
            Box::new(|| {
                laws(
                    &[
                        ("causal form round trip", laws::causal_round_trip),
                        ("open and closed normal forms", laws::open_closed_collapse),
                    ],
                    Backend::FinFn,
                    5,
                    3,
                )
            }),
        ),
        (
            "7 Kleisli equivalence (100 cases, depth 5)",
            Duration::from_secs(30),
            Box::new(|| {
                laws(
                    &[
                        ("comonad laws", laws::comonad_laws),
                        ("Kleisli laws", laws::kleisli_laws),
                        ("Kleisli equivalence", laws::kleisli_equivalence),
                    ],
                    Backend::FinFn,
                    5,
                    3,
                )
            }),
        ),
        (
            "8 quotient soundness (100 cases, sets of at most 2)",
            Duration::from_secs(60),
            Box::new(|| laws(&[("quotient soundness", laws::quotient_soundness)], Backend::FinFn, 3, 2)),
        ),
        ("9 lens adapter", Duration::from_secs(1), Box::new(lens_adapter)),
    ];
    let mut failed = 0;
    for (name, budget, check) in &criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let verdict = match (&result, elapsed <= *budget) {
            (Ok(()), true) => "PASS".to_string(),
            (Ok(()), false) => format!("FAIL (over the {budget:?} budget)"),
            (Err(e), _) => format!("FAIL: {e}"),
        };
        if !verdict.starts_with("PASS") {
            failed += 1;
        }
        println!("{} criterion {name} [{:.3}s]", verdict, elapsed.as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
