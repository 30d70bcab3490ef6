use std::path::PathBuf;

use serde_json::Value;
use spectral_lift::cli::{run_with, EXIT_CONDITIONS, EXIT_INVALID, EXIT_PASS};

struct Run {
    code: i32,
    out: String,
    err: String,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_str(&self.out).unwrap_or_else(|e| panic!("{e}: {}", self.out))
    }
}

fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("spectral-lift").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn write_tmp(name: &str, text: &str) -> PathBuf {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&p, text).unwrap();
    p
}

/// n = 2, single scalar node 0.2·I at 0; φ = (0.4 + 0.3ζ², 0.04) is σ of
/// [[0.2 + 0.3ζ², 0.3ζ], [0.2ζ, 0.2]].
const SCALAR: &str = r#"{"kind":"snp","n":2,
  "nodes":[{"alpha":[0,0],"matrix":[[[0.2,0],[0,0]],[[0,0],[0.2,0]]]}],
  "phi":{"components":[[[0.4,0],[0,0],[0.3,0]],[[0.04,0]]]}}"#;

#[test]
fn check_scalar_example_passes() {
    let f = write_tmp("scalar.json", SCALAR);
    let r = run(&["check", "--input", f.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_PASS, "{}", r.out);
    let v = r.json();
    assert_eq!(v["pass"], Value::Bool(true));
    assert!(v["conditions"].as_array().unwrap().iter().any(|c| c["label"] == "node0.b1"));
}

#[test]
fn lift_rejects_violated_conditions() {
    // a linear term in φ₁ breaks the first-derivative bullet at the scalar node
    let bad = SCALAR.replace(r#"[[0.4,0],[0,0],[0.3,0]]"#, r#"[[0.4,0],[0.1,0],[0.3,0]]"#);
    let f = write_tmp("violating.json", &bad);
    let r = run(&["lift", "--input", f.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_CONDITIONS, "{}", r.out);
    let v = r.json();
    let failed: Vec<&str> = v["report"]["conditions"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == Value::Bool(false))
        .map(|c| c["label"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["node0.b1"]);
}

#[test]
fn lift_then_verify_and_report_on_stderr() {
    let f = write_tmp("scalar_lift.json", SCALAR);
    let input = f.to_str().unwrap();
    let r = run(&["lift", "--input", input, "--verbose"]);
    assert_eq!(r.code, EXIT_PASS, "{}", r.out);
    assert!(r.err.starts_with("pass"), "{}", r.err);
    let v = r.json();
    assert_eq!(v["certificate"]["pass"], Value::Bool(true));
    let map = write_tmp("scalar_map.json", &v["map"].to_string());
    let r = run(&["verify", "--input", input, "--map", map.to_str().unwrap(), "--grid-angles", "48"]);
    assert_eq!(r.code, EXIT_PASS, "{}", r.out);
    assert_eq!(r.json()["grid"]["angles"], 48);
}

#[test]
fn gen_is_byte_stable() {
    let args = ["gen", "--kind", "snp", "--n", "3", "--strata", "scalar,cyclic", "--seed", "7"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.code, EXIT_PASS);
    assert_eq!(a.out, b.out);
    // and re-ingests to the same bytes
    let f = write_tmp("gen7.json", &a.out);
    let again = spectral_lift::problem::ProblemFile::from_json(&std::fs::read_to_string(f).unwrap()).unwrap();
    let parse = |t: &str| serde_json::from_str::<Value>(t).unwrap();
    assert_eq!(parse(&again.to_json()), parse(&a.out));
}

#[test]
fn invalid_input_names_the_field() {
    let bad = SCALAR.replace(r#""alpha":[0,0]"#, r#""alpha":[0,1.5]"#);
    let f = write_tmp("bad_alpha.json", &bad);
    let r = run(&["check", "--input", f.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_INVALID);
    assert!(r.json()["error"]["message"].as_str().unwrap().contains("nodes[0].alpha"));

    let wrong_type = SCALAR.replace(r#""n":2"#, r#""n":"two""#);
    let f = write_tmp("bad_n.json", &wrong_type);
    let r = run(&["classify", "--input", f.to_str().unwrap()]);
    assert_eq!(r.code, EXIT_INVALID);
    assert!(r.json()["error"]["message"].as_str().unwrap().contains('n'));

    assert_eq!(run(&["frobnicate"]).code, EXIT_INVALID);
    let missing = run(&["check", "--input", "/nonexistent/problem.json"]);
    assert_eq!(missing.code, EXIT_INVALID);
}

#[test]
fn classify_sigma_member() {
    let f = write_tmp("scalar_cls.json", SCALAR);
    let input = f.to_str().unwrap();
    let r = run(&["classify", "--input", input]);
    assert_eq!(r.json()["matrices"][0]["result"]["class"], "scalar");
    let r = run(&["sigma", "--input", input]);
    let s = &r.json()["matrices"][0]["result"];
    assert!(s.to_string().contains("0.4"), "{s}");
    let r = run(&["member", "--input", input]);
    let v = r.json();
    assert_eq!(v["matrices"][0]["result"]["inside"], Value::Bool(true));
    assert_eq!(v["phi"]["samples"], 256);
}

/// `solve` on generated files succeeds for at least 95% of seeds per stratum.
#[test]
fn solve_on_generated_files() {
    let mixes: [(&str, &str, &str); 10] = [
        ("snp", "2", "scalar"),
        ("snp", "2", "cyclic"),
        ("snp", "3", "scalar"),
        ("snp", "3", "noncyclic"),
        ("snp", "3", "cyclic"),
        ("snp", "3", "scalar,noncyclic,cyclic"),
        ("scf", "2", "ZeroBase_Bcyclic,ZeroBase_Bscalar_n2"),
        ("scf", "3", "ZeroBase_Bcyclic,ZeroBase_Bscalar_n3,ZeroBase_Bnoncyclic_n3"),
        ("scf", "3", "AmuBase_generic,AmuBase_special"),
        ("scf", "3", "AmuBase_degenerate"),
    ];
    for (kind, n, strata) in mixes {
        let mut ok = 0;
        let seeds = 1..=200u64;
        let total = seeds.clone().count();
        for seed in seeds {
            let s = seed.to_string();
            let g = run(&["gen", "--kind", kind, "--n", n, "--strata", strata, "--seed", &s]);
            assert_eq!(g.code, EXIT_PASS, "{}", g.out);
            let f = write_tmp("solve_input.json", &g.out);
            let r = run(&["solve", "--input", f.to_str().unwrap()]);
            if r.code == EXIT_PASS {
                ok += 1;
            } else {
                // failures must be reported, never silent
                assert!(r.json()["error"]["kind"].is_string() || r.json()["certificate"].is_object());
            }
        }
        assert!(ok * 100 >= total * 95, "{kind} n={n} {strata}: {ok}/{total}");
    }
}
