//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//! Runs without the libtest harness so the lines are always printed.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectral_lift::conditions::DEFAULT_TOL;
use spectral_lift::domains::schur_cohn_stable;
use spectral_lift::generate::generate;
use spectral_lift::holo::Poly;
use spectral_lift::linalg::{
    a_mu, gateaux_sigma, mexp, mlog, roots_of_sigma, sigma, CMatrix, SymPoint, C64, ZERO,
};
use spectral_lift::phi::Phi;
use spectral_lift::phi_builder::build_phi;
use spectral_lift::probe::{bullet_labels, necessity_probe};
use spectral_lift::problem::{Problem, ProblemKind};
use spectral_lift::scf::{cf_conditions, cf_lift, prop_second_order_rhs, scf_normalize};
use spectral_lift::snp::{snp_lift_n3, SnpInstance, SnpNode};
use spectral_lift::verifier::VerifyConfig;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Statistics of a batch of generate → build φ → lift → verify runs.
#[derive(Default)]
struct RoundTrip {
    total: usize,
    passed: usize,
    failures: Vec<String>,
    max_sigma: f64,
    max_node: f64,
    max_deriv: f64,
    max_rho: f64,
    elapsed: Duration,
}

impl RoundTrip {
    fn run(&mut self, kind: ProblemKind, n: usize, strata: &[&str], seed: u64) {
        let t = Instant::now();
        self.total += 1;
        let strata: Vec<String> = strata.iter().map(|s| s.to_string()).collect();
        let cfg = VerifyConfig::default();
        let res = (|| -> Result<(), String> {
            let file = generate(kind, n, &strata, seed).map_err(|e| e.to_string())?;
            let p = file.problem().map_err(|e| e.to_string())?;
            let phi = build_phi(&p, None, seed).map_err(|e| e.to_string())?;
            let map = p.lift(&phi, DEFAULT_TOL).map_err(|e| e.to_string())?;
            let cert = p.verify(&map, &phi, &cfg);
            let get = |name: &str| cert.check(name).map_or(0.0, |c| c.max_residual);
            self.max_sigma = self.max_sigma.max(get("sigma-match"));
            self.max_node = self.max_node.max(get("node-match")).max(get("value-match"));
            self.max_deriv = self.max_deriv.max(get("derivative-match"));
            if cert.pass {
                self.max_rho = self.max_rho.max(get("spectral-radius"));
                Ok(())
            } else {
                let bad: Vec<String> = cert
                    .checks
                    .iter()
                    .filter(|c| !c.pass)
                    .map(|c| format!("{}={:.2e}", c.name, c.max_residual))
                    .collect();
                Err(bad.join(","))
            }
        })();
        match res {
            Ok(()) => self.passed += 1,
            Err(e) => self.failures.push(format!("{kind:?} n={n} {strata:?} seed {seed}: {e}")),
        }
        self.elapsed += t.elapsed();
    }

    fn summary(&self) -> String {
        let mut s = format!(
            "{}/{} pass, max sigma {:.1e}, max node {:.1e}, {:.2}s",
            self.passed,
            self.total,
            self.max_sigma,
            self.max_node,
            self.elapsed.as_secs_f64()
        );
        if let Some(f) = self.failures.first() {
            s += &format!("; first failure {f}");
        }
        s
    }

    fn all_pass(&self, sigma_tol: f64, node_tol: f64, limit: f64) -> bool {
        self.passed == self.total
            && self.max_sigma <= sigma_tol
            && self.max_node <= node_tol
            && self.elapsed.as_secs_f64() <= limit
    }
}

fn snp_n2(rt: &mut RoundTrip) -> Outcome {
    let mixes: [&[&str]; 3] = [&["scalar"], &["cyclic"], &["scalar", "cyclic"]];
    for seed in 1..=200u64 {
        rt.run(ProblemKind::Snp, 2, mixes[seed as usize % 3], seed);
    }
    outcome(rt.all_pass(1e-9, 1e-9, 10.0), rt.summary())
}

fn snp_n3(rt: &mut RoundTrip) -> Outcome {
    for seed in 1..=200u64 {
        // mostly full mixes, plus pure strata to reach every branch alone
        let strata: &[&str] = match seed % 5 {
            0 => &["scalar"],
            1 => &["noncyclic"],
            2 => &["cyclic"],
            _ => &["scalar", "noncyclic", "cyclic"],
        };
        rt.run(ProblemKind::Snp, 3, strata, seed);
    }
    outcome(rt.all_pass(1e-9, 1e-9, 30.0), rt.summary())
}

const SCF_CASES: [(&str, usize); 7] = [
    ("ZeroBase_Bcyclic", 0),
    ("ZeroBase_Bscalar_n2", 2),
    ("ZeroBase_Bscalar_n3", 3),
    ("ZeroBase_Bnoncyclic_n3", 3),
    ("AmuBase_generic", 3),
    ("AmuBase_special", 3),
    ("AmuBase_degenerate", 3),
];

fn scf_suites(rt: &mut RoundTrip) -> Outcome {
    for (case, n) in SCF_CASES {
        for seed in 1..=100u64 {
            // the cyclic-direction case exists for both dimensions
            let n = if n == 0 { 2 + (seed as usize % 2) } else { n };
            rt.run(ProblemKind::Scf, n, &[case], seed);
        }
    }
    let pass = rt.passed == rt.total
        && rt.max_node <= 1e-9
        && rt.max_deriv <= 1e-8
        && rt.elapsed.as_secs_f64() <= 30.0;
    let detail = format!("{}, max derivative {:.1e}", rt.summary(), rt.max_deriv);
    outcome(pass, detail)
}

/// Every bullet each generator can reach, keyed by case tag and label suffix.
fn expected_bullets() -> BTreeSet<String> {
    let mut s = BTreeSet::new();
    let mut add = |case: &str, labels: &[&str]| {
        for l in labels {
            s.insert(format!("{case}:{l}"));
        }
    };
    add("snp_n2", &["b1"]);
    add("snp_n3", &["b1", "b2", "b3", "nc1"]);
    add("n2/ZeroBase_Bcyclic", &["ord2.1", "b1", "b2"]);
    add("n3/ZeroBase_Bcyclic", &["ord2.1", "ord3.1", "ord3.2", "b1", "b2", "b3"]);
    add("n2/ZeroBase_Bscalar_n2", &["b1", "b2", "b3", "b4"]);
    add(
        "n3/ZeroBase_Bscalar_n3",
        &["b1", "b2", "b3", "b4a", "b4b", "b5", "b6", "b7", "b8"],
    );
    add("n3/ZeroBase_Bnoncyclic_n3", &["b1", "b2", "b3", "b4a", "b4b", "b5", "b6"]);
    add("n3/AmuBase_generic", &["b1"]);
    add("n3/AmuBase_special", &["b1"]);
    add("n3/AmuBase_degenerate", &["b1", "b2"]);
    s
}

fn bullet_key(p: &Problem, label: &str) -> String {
    match p {
        // node-indexed labels: keep only the bullet name
        Problem::Snp(_) => format!("{}:{}", p.case_tag(), label.split_once('.').map_or(label, |(_, b)| b)),
        Problem::Scf(_) => format!("n{}/{}:{}", p.n(), p.case_tag(), label),
    }
}

fn necessity() -> Outcome {
    const PER_BULLET: usize = 20;
    let t = Instant::now();
    let mut runs: Vec<(ProblemKind, usize, Vec<&str>)> = vec![
        (ProblemKind::Snp, 2, vec!["scalar", "cyclic"]),
        (ProblemKind::Snp, 3, vec!["scalar", "noncyclic", "cyclic"]),
        (ProblemKind::Scf, 2, vec!["ZeroBase_Bcyclic"]),
    ];
    runs.extend(SCF_CASES.iter().map(|&(c, n)| (ProblemKind::Scf, if n == 0 { 3 } else { n }, vec![c])));
    let mut counts: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut failures = Vec::new();
    for (kind, n, strata) in runs {
        let strata: Vec<String> = strata.iter().map(|s| s.to_string()).collect();
        let mut local: BTreeMap<String, usize> = BTreeMap::new();
        for seed in 1..=200u64 {
            if !local.is_empty() && local.values().all(|&c| c >= PER_BULLET) {
                break;
            }
            let Ok(file) = generate(kind, n, &strata, seed) else { continue };
            let Ok(p) = file.problem() else { continue };
            let Ok(phi) = build_phi(&p, None, seed) else { continue };
            for label in bullet_labels(&p).unwrap_or_default() {
                let key = bullet_key(&p, &label);
                if local.get(&key).copied().unwrap_or(0) >= PER_BULLET {
                    continue;
                }
                *local.entry(key.clone()).or_default() += 1;
                let entry = counts.entry(key.clone()).or_default();
                entry.0 += 1;
                match necessity_probe(&p, &phi, &label, 1e-3, DEFAULT_TOL) {
                    Ok(r) if r.pass => entry.1 += 1,
                    Ok(r) => failures.push(format!(
                        "{key} seed {seed}: checker {:?}, constructor {:?}{:?}",
                        r.failed, r.lift_label, r.lift_error
                    )),
                    Err(e) => failures.push(format!("{key} seed {seed}: {e}")),
                }
            }
        }
    }
    let seen: BTreeSet<String> = counts.keys().cloned().collect();
    let missing: Vec<String> = expected_bullets().difference(&seen).cloned().collect();
    let short: Vec<String> = counts
        .iter()
        .filter(|(_, &(t, _))| t < PER_BULLET)
        .map(|(k, _)| k.clone())
        .collect();
    let probes: usize = counts.values().map(|c| c.0).sum();
    let pass = failures.is_empty() && missing.is_empty() && short.is_empty();
    let mut detail = format!(
        "{} bullets x {PER_BULLET} instances, {probes} probes, {} failures, {:.2}s",
        counts.len(),
        failures.len(),
        t.elapsed().as_secs_f64()
    );
    if !missing.is_empty() {
        detail += &format!("; unreached {missing:?}");
    }
    if !short.is_empty() {
        detail += &format!("; under-sampled {short:?}");
    }
    if let Some(f) = failures.first() {
        detail += &format!("; first failure {f}");
    }
    outcome(pass, detail)
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn worked_examples() -> Outcome {
    // cyclic nilpotent node at 0 with φ ≡ 0
    let comp = CMatrix::real(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0]]);
    let inst = SnpInstance::new(vec![SnpNode { alpha: ZERO, matrix: comp }]).unwrap();
    let zero_phi = Phi::real(&[&[0.0], &[0.0], &[0.0]]);
    let map = snp_lift_n3(&inst, &zero_phi).unwrap();
    let want: [[&[f64]; 3]; 3] = [
        [&[0.0, 1.0], &[1.0], &[]],
        [&[], &[0.0, 1.0], &[1.0]],
        [&[0.0, 0.0, 0.0, -1.0], &[0.0, 0.0, -3.0], &[0.0, -2.0]],
    ];
    let mut snp_err = f64::INFINITY;
    if let (true, Some(polys)) = (map.chain.is_empty(), map.core_polynomials()) {
        snp_err = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let d = &polys[3 * i + j] - &Poly::real(want[i][j]);
                snp_err = snp_err.max(d.max_abs());
            }
        }
    }

    // A_{1/2} with direction e₁₂ and φ ≡ (1/2, 0, 0)
    let scf = scf_normalize(&a_mu(c(0.5)), &CMatrix::unit(3, 0, 1)).unwrap();
    let phi = Phi::real(&[&[0.5], &[0.0], &[0.0]]);
    let mut scf_err = f64::INFINITY;
    if let Ok(map) = cf_lift(&scf, &phi, DEFAULT_TOL) {
        let at0 = map.eval(ZERO).map_or(f64::INFINITY, |m| (m - a_mu(c(0.5))).norm_max());
        // ψ'(0) from real and imaginary central differences, whose h² errors cancel
        let h = 1e-4;
        let d = match (map.eval(c(h)), map.eval(c(-h)), map.eval(C64::new(0.0, h)), map.eval(C64::new(0.0, -h))) {
            (Ok(a), Ok(b), Ok(ci), Ok(di)) => {
                let real = (a - b).scale(c(0.5 / h));
                let imag = (ci - di).scale(C64::new(0.0, -0.5 / h));
                (real + imag).scale(c(0.5))
            }
            _ => CMatrix::scalar(3, c(f64::NAN)),
        };
        let deriv = (d - CMatrix::unit(3, 0, 1)).norm_max();
        let target = SymPoint::new(vec![c(0.5), ZERO, ZERO]);
        let sig = VerifyConfig::default()
            .grid()
            .iter()
            .map(|&z| map.eval(z).map_or(f64::INFINITY, |m| sigma(&m).max_abs_diff(&target)))
            .fold(0.0, f64::max);
        let report_ok = cf_conditions(&scf, &phi, DEFAULT_TOL).is_ok_and(|r| r.pass);
        scf_err = if report_ok { at0.max(deriv).max(sig) } else { f64::INFINITY };
    }
    outcome(
        snp_err <= 1e-12 && scf_err <= 1e-12,
        format!("cyclic-node lift coefficient error {snp_err:.1e}, A_mu example error {scf_err:.1e}"),
    )
}

fn rand_c(rng: &mut ChaCha8Rng, r: f64) -> C64 {
    C64::new(rng.gen_range(-r..r), rng.gen_range(-r..r))
}

fn rand_m(rng: &mut ChaCha8Rng, n: usize, r: f64) -> CMatrix {
    let mut m = CMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            m.set(i, j, rand_c(rng, r));
        }
    }
    m
}

fn oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    // Schur–Cohn against root radii, away from the unit circle
    let (mut compared, mut disagree) = (0, 0);
    for _ in 0..10_000 {
        let roots: Vec<C64> = (0..3)
            .map(|_| C64::from_polar(rng.gen_range(0.0..1.6), rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect();
        let p = Poly::from_roots(&roots);
        let s = SymPoint::new(vec![-p.coeff(2), p.coeff(1), -p.coeff(0)]);
        let radius = roots_of_sigma(&s).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if (radius - 1.0).abs() <= 1e-8 {
            continue;
        }
        compared += 1;
        if schur_cohn_stable(p.coeffs()) != (radius < 1.0) {
            disagree += 1;
        }
    }

    // first and second Gâteaux derivatives against centered differences
    let h = 1e-5;
    let mut worst_first: f64 = 0.0;
    let mut worst_second: f64 = 0.0;
    for k in 0..200 {
        let n = 2 + k % 2;
        let b = rand_m(&mut rng, n, 1.0);
        let a = if n == 3 { a_mu(rand_c(&mut rng, 1.0)) } else { rand_m(&mut rng, n, 1.0) };
        let (first, second) = gateaux_sigma(&a, &b).unwrap();
        let (sp, sm) = (sigma(&(a + b.scale(c(h)))), sigma(&(a - b.scale(c(h)))));
        let s0 = sigma(&a);
        for j in 0..n {
            let fd = (sp.s[j] - sm.s[j]) / (2.0 * h);
            worst_first = worst_first.max((fd - first.s[j]).norm() / first.s[j].norm().max(1.0));
        }
        if let Some(sec) = second {
            let fd = (sp.s[2] - s0.s[2] * 2.0 + sm.s[2]) / (2.0 * h * h);
            worst_second = worst_second.max((fd - sec).norm() / sec.norm().max(1.0));
        }
    }

    // exp∘log round trip
    let mut worst_log: f64 = 0.0;
    for _ in 0..200 {
        let s = CMatrix::identity(3) + rand_m(&mut rng, 3, 1.0);
        if s.condition_estimate() > 1e6 {
            continue;
        }
        let back = mexp(&mlog(&s).unwrap());
        worst_log = worst_log.max((back - s).norm_max() / s.norm_max());
    }
    let pass = disagree == 0 && worst_first <= 1e-6 && worst_second <= 1e-6 && worst_log <= 1e-10;
    outcome(
        pass,
        format!(
            "Schur-Cohn {disagree} disagreements in {compared}; derivative rel. error {worst_first:.1e} / {worst_second:.1e}; exp(log) {worst_log:.1e}"
        ),
    )
}

fn boundedness(runs: &[&RoundTrip]) -> Outcome {
    let rho = runs.iter().map(|r| r.max_rho).fold(0.0, f64::max);
    let count: usize = runs.iter().map(|r| r.passed).sum();
    outcome(rho < 1.0, format!("max spectral radius {rho:.4} over {count} passing instances"))
}

fn second_order_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let mu = rand_c(&mut rng, 1.0);
        let b = rand_m(&mut rng, 3, 1.0);
        let (_, second) = gateaux_sigma(&a_mu(mu), &b).unwrap();
        let second = second.expect("A_mu base");
        let rhs = prop_second_order_rhs(mu, &b);
        worst = worst.max((rhs - second).norm() / (1.0 + second.norm()));
    }
    outcome(worst <= 1e-10, format!("max deviation {worst:.1e} on 200 directions"))
}

fn main() {
    let (mut r1, mut r2, mut r3) = (RoundTrip::default(), RoundTrip::default(), RoundTrip::default());
    let results = [
        ("SNP n=2 round trip", snp_n2(&mut r1)),
        ("SNP n=3 round trip", snp_n3(&mut r2)),
        ("SCF suites", scf_suites(&mut r3)),
        ("necessity probes", necessity()),
        ("worked examples", worked_examples()),
        ("oracle agreements", oracles()),
        ("bounded lifts", boundedness(&[&r1, &r2, &r3])),
        ("second-order sigma_3 identity", second_order_identity()),
    ];
    let mut failed = 0;
    for (k, (name, o)) in results.iter().enumerate() {
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {} [PRIMARY] {name}: {verdict} ({})", k + 1, o.detail);
        failed += usize::from(!o.pass);
    }
    for r in [&r1, &r2, &r3] {
        for f in r.failures.iter().skip(1).take(5) {
            println!("  also failed: {f}");
        }
    }
    println!("acceptance: {}/{} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
