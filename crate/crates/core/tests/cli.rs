use std::path::PathBuf;
use std::process::Command;

use combs::cli::{run, Outcome};
use num_rational::BigRational;
use num_traits::One;
use serde_json::Value;

fn comb(args: &[&str]) -> Outcome {
    run(std::iter::once("comb").chain(args.iter().copied()))
}

fn temp_file(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("comb-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

/// A constant stream of `t`, a variant slid along `not` on its memory, and a stream
/// alternating `t, f`.
const SLID: &str = "backend finfn;
set B = {t, f};
family U = [; unit];
family Bs = [; B];
gen tt : unit -> B * B = table { * -> (t, t) };
gen ft : unit -> B * B = table { * -> (f, t) };
gen not : B -> B = table { t -> f, f -> t };
comb plain : U -> Bs = stages { 0: B, tt; tail(1): B, copy(B) };
comb slid : U -> Bs = stages { 0: B, ft; tail(1): B, copy(B) >> (id(B) * not) };
comb flips : U -> Bs = stages { 0: B, tt; tail(1): B, not >> copy(B) };
";

fn values(out: &str) -> Vec<String> {
    let records: Vec<Value> = serde_json::from_str(out).unwrap();
    records.iter().map(|r| r["value"].as_str().unwrap().to_string()).collect()
}

#[test]
fn run_fibonacci() {
    let out = comb(&["run", "fibonacci", "--depth", "9"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(values(&out.stdout), ["0", "1", "1", "2", "3", "5", "8", "13", "21", "34"]);
    assert!(out.stdout.starts_with("[\n{\"stage\":0,\"value\":\"0\"},\n"));
    assert_eq!(comb(&["run", "fibonacci", "--depth", "9"]), out);
}

#[test]
fn run_fibonacci_as_csv() {
    let out = comb(&["run", "fibonacci", "--depth", "3", "--format", "csv"]);
    assert_eq!(out.stdout, "stage,wire,value\n0,0,0\n1,0,1\n2,0,1\n3,0,2\n");
}

#[test]
fn deep_fibonacci_is_exact() {
    let out = comb(&["run", "fibonacci", "--depth", "100"]);
    assert_eq!(values(&out.stdout)[100], "354224848179261915075");
}

#[test]
fn lotka_distributions_are_coherent() {
    for depth in 0..=6 {
        let out = comb(&["run", "lotka", "--depth", &depth.to_string()]);
        assert_eq!(out.code, 0, "{}", out.stderr);
        let records: Vec<Value> = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(records.len(), depth + 1);
        for (n, r) in records.iter().enumerate() {
            assert_eq!(r["stage"], n);
            let total: BigRational = r["support"]
                .as_array()
                .unwrap()
                .iter()
                .map(|entry| {
                    assert_eq!(entry[0].as_array().unwrap().len(), n + 1);
                    let num = entry[1]["num"].as_str().unwrap().parse().unwrap();
                    let den = entry[1]["den"].as_str().unwrap().parse().unwrap();
                    BigRational::new(num, den)
                })
                .sum();
            assert!(total.is_one(), "stage {n} sums to {total}");
        }
    }
    let sf = combs::cartesian::extract_state_stream(&combs::bundled::lotka().unwrap(), 6).unwrap();
    assert!(combs::cartesian::check_coherence(&sf, 6).unwrap().is_coherent());
}

#[test]
fn lotka_has_no_csv_and_no_normal_form() {
    assert_eq!(comb(&["run", "lotka", "--format", "csv", "--depth", "2"]).code, 4);
    let out = comb(&["normalize", "lotka"]);
    assert_eq!(out.code, 4);
    assert!(out.stderr.contains("finstoch"));
}

#[test]
fn slide_perturbed_variant_is_equal() {
    let path = temp_file("slid.comb", SLID);
    let file = path.to_str().unwrap();
    let out = comb(&["eq", file, "--comb", "plain", "--comb", "slid", "--depth", "8"]);
    assert_eq!(out.code, 0, "{}{}", out.stdout, out.stderr);
    let out = comb(&["eq", file, "--comb", "plain", "--comb", "flips", "--depth", "8"]);
    assert_eq!(out.code, 3);
    assert_eq!(out.stdout.trim(), "differ at stage 1 on input *");
}

#[test]
fn eq_on_two_files_and_bundled_names() {
    let path = temp_file("fib.comb", combs::bundled::FIBONACCI);
    let out = comb(&["eq", "fibonacci", path.to_str().unwrap(), "--comb", "fibonacci", "--comb", "fibonacci_unrolled"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
}

#[test]
fn eq_on_finite_comb_json() {
    let unfolded = comb(&["unfold", "fibonacci", "--depth", "3"]);
    assert_eq!(unfolded.code, 0);
    let a = temp_file("a.json", &unfolded.stdout);
    let b = temp_file("b.json", &comb(&["unfold", "fibonacci", "--comb", "fibonacci_unrolled", "--depth", "3"]).stdout);
    let out = comb(&["eq", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let nf = comb(&["normalize", a.to_str().unwrap()]);
    assert_eq!(nf.code, 0, "{}", nf.stderr);
    let v: Value = serde_json::from_str(&nf.stdout).unwrap();
    assert_eq!(v["maps"].as_array().unwrap().len(), 4);
}

#[test]
fn unfold_lists_typed_pieces() {
    let out = comb(&["unfold", "lotka", "--depth", "2"]);
    assert_eq!(out.code, 0);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["open"], true);
    assert_eq!(v["pieces"].as_array().unwrap().len(), 3);
    assert_eq!(v["memories"].as_array().unwrap().len(), 3);
}

#[test]
fn normalize_fibonacci() {
    let out = comb(&["normalize", "fibonacci", "--depth", "2"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["maps"].as_array().unwrap().len(), 3);
}

#[test]
fn traces_of_combs_with_inputs() {
    let src = "backend finfn;
set B = {t, f};
family Bs = [; B];
gen not : B -> B = table { t -> f, f -> t };
comb n : Bs -> Bs = lift [; not];
";
    let path = temp_file("trace.comb", src);
    let out = comb(&["run", path.to_str().unwrap(), "--depth", "1"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let records: Vec<Value> = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(records.len(), 2 + 4);
    assert_eq!(records[0].to_string(), r#"{"stage":0,"inputs":["t"],"outputs":"f"}"#);
    assert_eq!(records[3].to_string(), r#"{"stage":1,"inputs":["t","f"],"outputs":"t"}"#);
    assert_eq!(comb(&["run", path.to_str().unwrap(), "--format", "csv"]).code, 4);

    let stoch = src.replace("finfn", "finstoch");
    let path = temp_file("trace-stoch.comb", &stoch);
    let out = comb(&["run", path.to_str().unwrap(), "--depth", "0"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let records: Vec<Value> = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(
        records[1].to_string(),
        r#"{"stage":0,"inputs":["f"],"joint_distribution":[[["t"],{"num":"1","den":"1"}]]}"#
    );
}

#[test]
fn exit_codes() {
    let syntax = temp_file("syntax.comb", "backend finfn;\ncomb c : A -> B = feedback [A c;\n");
    let out = comb(&["parse", syntax.to_str().unwrap()]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("syntax.comb:2:19: syntax error"), "{}", out.stderr);

    let types = temp_file("types.comb", "backend finfn;\nset B = {t};\ncomb c : X -> X = lift [; id];\n");
    assert_eq!(comb(&["run", types.to_str().unwrap()]).code, 2);
    assert_eq!(comb(&["parse", types.to_str().unwrap()]).code, 0);

    assert_eq!(comb(&["run", "/nonexistent/file.comb"]).code, 5);
    assert_eq!(comb(&["frobnicate"]).code, 5);
    assert_eq!(comb(&["run", "fibonacci", "--comb", "nope"]).code, 2);
    assert_eq!(comb(&["examples", "nope"]).code, 5);
}

#[test]
fn parse_prints_canonical_source() {
    let out = comb(&["parse", "fibonacci"]);
    assert_eq!(out.code, 0);
    let again = temp_file("canonical.comb", &out.stdout);
    assert_eq!(comb(&["parse", again.to_str().unwrap()]).stdout, out.stdout);
}

#[test]
fn examples_are_printed() {
    assert_eq!(comb(&["examples"]).stdout, "fibonacci\nlotka\n");
    assert_eq!(comb(&["examples", "lotka"]).stdout, combs::bundled::LOTKA);
}

#[test]
fn laws_pass_and_honor_the_seed_variable() {
    let exe = env!("CARGO_BIN_EXE_comb");
    let output = Command::new(exe)
        .args(["laws", "--backend", "finstoch", "--seed", "1", "--cases", "4", "--depth", "3"])
        .env("COMB_SEED", "99")
        .output()
        .unwrap();
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert_eq!(output.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("seed 99"));
    assert!(stdout.lines().filter(|l| l.starts_with("PASS")).count() > 10);
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn binary_reports_exit_status() {
    let exe = env!("CARGO_BIN_EXE_comb");
    let output = Command::new(exe).args(["normalize", "lotka"]).output().unwrap();
    assert_eq!(output.status.code(), Some(4));
    let output = Command::new(exe).args(["run", "fibonacci", "--depth", "5", "--format", "csv"]).output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert!(String::from_utf8(output.stdout).unwrap().ends_with("5,0,5\n"));
}
