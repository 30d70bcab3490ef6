//! Random problem files by stratum, deterministic in the seed.
//!
//! SNP data are values of a random disc in lift-pattern form at the nodes,
//! hidden by a smooth random similarity, so instances are realizable with a
//! well-conditioned lift. All data are rescaled so that the reference disc
//! through them stays well inside the domain; rescaling preserves every class.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LiftError, Result};
use crate::holo::Poly;
use crate::linalg::{classify, mexp, mobius, spectral_radius, CMatrix, MatrixClass, C64, ZERO};
use crate::phi_builder::{grid_margin, reference_disc_image};
use crate::problem::{NodeSpec, PairSpec, Problem, ProblemConfig, ProblemFile, ProblemKind, SCHEMA_VERSION};
use crate::scf::{mobius_direction, scf_normalize, ScfCase};
use crate::snp::{SnpInstance, SnpNode};
use crate::verifier::VerifyConfig;

/// Largest eigenvalue modulus allowed for the reference disc on the grid.
pub const TARGET_RADIUS: f64 = 0.8;
const MIN_SEPARATION: f64 = 0.2;
const MAX_ALPHA: f64 = 0.6;
const ATTEMPTS: usize = 200;
const SHRINK_STEPS: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnpStratum {
    Scalar,
    Noncyclic,
    Cyclic,
}

impl FromStr for SnpStratum {
    type Err = LiftError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scalar" => Ok(SnpStratum::Scalar),
            "noncyclic" => Ok(SnpStratum::Noncyclic),
            "cyclic" => Ok(SnpStratum::Cyclic),
            _ => Err(LiftError::InvalidInput(format!(
                "strata: unknown SNP stratum {s:?} (expected scalar, noncyclic or cyclic)"
            ))),
        }
    }
}

impl FromStr for ScfCase {
    type Err = LiftError;

    fn from_str(s: &str) -> Result<Self> {
        ScfCase::ALL
            .iter()
            .copied()
            .find(|c| c.tag() == s)
            .ok_or_else(|| LiftError::InvalidInput(format!("strata: unknown SCF case {s:?}")))
    }
}

impl ScfCase {
    /// Matrix size the case lives in, `None` when both are possible.
    pub fn required_n(&self) -> Option<usize> {
        match self {
            ScfCase::ZeroBaseBcyclic | ScfCase::CyclicBaseUnsupported => None,
            ScfCase::ZeroBaseBscalarN2 => Some(2),
            _ => Some(3),
        }
    }
}

fn rand_disc(rng: &mut ChaCha8Rng, r: f64) -> C64 {
    let rho = r * rng.gen::<f64>().sqrt();
    C64::from_polar(rho, rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Random value of modulus `r` exactly.
fn rand_unit(rng: &mut ChaCha8Rng, r: f64) -> C64 {
    C64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
}

fn rand_matrix(rng: &mut ChaCha8Rng, n: usize, r: f64) -> CMatrix {
    let mut m = CMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            m.set(i, j, rand_disc(rng, r));
        }
    }
    m
}

/// Well-conditioned random basis change `I + E`.
fn rand_basis(rng: &mut ChaCha8Rng, n: usize) -> (CMatrix, CMatrix) {
    loop {
        let p = CMatrix::identity(n) + rand_matrix(rng, n, 0.4);
        if let Ok(inv) = p.inverse() {
            if p.condition_estimate() < 20.0 {
                return (p, inv);
            }
        }
    }
}

/// `P⁻¹ diag(λ, λ, μ) P` with `|λ − μ| ≥ MIN_SEPARATION`.
fn rand_noncyclic(rng: &mut ChaCha8Rng, radius: f64) -> CMatrix {
    let l = rand_disc(rng, radius);
    let m = loop {
        let m = rand_disc(rng, radius);
        if (m - l).norm() >= MIN_SEPARATION {
            break m;
        }
    };
    let (p, p_inv) = rand_basis(rng, 3);
    p_inv * CMatrix::diag(&[l, l, m]) * p
}

fn rand_cyclic(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> CMatrix {
    loop {
        let m = rand_matrix(rng, n, radius);
        if matches!(classify(&m), MatrixClass::Cyclic) {
            return m;
        }
    }
}

fn rand_poly(rng: &mut ChaCha8Rng, r: f64) -> Poly {
    Poly::new(vec![rand_disc(rng, r), rand_disc(rng, r)])
}

/// Polynomial disc in lift-pattern form whose value at each node lies in the
/// requested stratum: off-pattern entries carry the vanishing polynomials of
/// the scalar (and, for n = 3, non-cyclic) nodes, and at non-cyclic nodes the
/// lower block shares the eigenvalue of the first diagonal entry.
fn pattern_disc(rng: &mut ChaCha8Rng, n: usize, alphas: &[C64], kinds: &[SnpStratum]) -> Vec<Vec<Poly>> {
    let roots = |want: &[SnpStratum]| -> Poly {
        let zs: Vec<C64> = alphas.iter().zip(kinds).filter(|(_, k)| want.contains(k)).map(|(&a, _)| a).collect();
        Poly::from_roots(&zs)
    };
    let zs = roots(&[SnpStratum::Scalar]);
    let r = 0.3;
    let f11 = rand_poly(rng, r);
    // zero-free factor c + εζ with |ε| < |c|
    let c = rand_unit(rng, r);
    let free = Poly::new(vec![c, rand_disc(rng, 0.2 * r)]);
    if n == 2 {
        let d = rand_poly(rng, r);
        return vec![
            vec![f11.clone(), &zs * &free],
            vec![&zs * &rand_poly(rng, r), &f11 + &(&zs * &d)],
        ];
    }
    let zn = roots(&[SnpStratum::Noncyclic]);
    let zsn = &zs * &zn;
    let (d2, d3) = (rand_poly(rng, r), rand_poly(rng, r));
    let c23 = rand_unit(rng, r);
    let w = &(&d2 * &d3).scale(C64::new(1.0, 0.0) / c23) + &(&zn * &Poly::constant(rand_disc(rng, r)));
    vec![
        vec![f11.clone(), &zsn * &free, Poly::zero()],
        vec![Poly::zero(), &f11 + &(&zs * &d2), zs.scale(c23)],
        vec![&zsn * &rand_poly(rng, r), &zs * &w, &f11 + &(&zs * &d3)],
    ]
}

fn eval_grid(e: &[Vec<Poly>], z: C64) -> CMatrix {
    let n = e.len();
    let mut m = CMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            m.set(i, j, e[i][j].eval(z));
        }
    }
    m
}

fn stratum_of(class: &MatrixClass) -> SnpStratum {
    match class {
        MatrixClass::Scalar { .. } => SnpStratum::Scalar,
        MatrixClass::NonCyclicNonScalar { .. } => SnpStratum::Noncyclic,
        MatrixClass::Cyclic => SnpStratum::Cyclic,
    }
}

fn rand_alphas(rng: &mut ChaCha8Rng, k: usize) -> Vec<C64> {
    let mut out: Vec<C64> = Vec::with_capacity(k);
    while out.len() < k {
        let a = rand_disc(rng, MAX_ALPHA);
        if out.iter().all(|b| (a - *b).norm() >= MIN_SEPARATION) {
            out.push(a);
        }
    }
    out
}

/// Largest root modulus of the reference image on the default grid.
fn reference_radius(problem: &Problem) -> Option<f64> {
    let phi = reference_disc_image(problem)?;
    let r = 1.0 - grid_margin(&phi, &VerifyConfig::default().grid());
    r.is_finite().then_some(r)
}

/// Factor bringing the radius to at most [`TARGET_RADIUS`]; exact when the
/// reference disc is linear in the data, as for node matrices.
fn shrink_factor(problem: &Problem) -> Option<f64> {
    let r = reference_radius(problem)?;
    Some(if r > TARGET_RADIUS { TARGET_RADIUS / r } else { 1.0 })
}

fn base_file(kind: ProblemKind, n: usize, seed: u64) -> ProblemFile {
    ProblemFile {
        schema_version: SCHEMA_VERSION.into(),
        kind,
        n,
        nodes: None,
        pair: None,
        phi: None,
        config: ProblemConfig {
            seed: Some(seed),
            ..ProblemConfig::default()
        },
    }
}

fn check_strata<T>(strata: &[T]) -> Result<()> {
    if strata.is_empty() {
        return Err(LiftError::InvalidInput("strata: at least one stratum is required".into()));
    }
    Ok(())
}

/// SNP instance with 1–4 nodes whose classes are drawn from `strata`.
pub fn gen_snp(n: usize, strata: &[SnpStratum], seed: u64) -> Result<ProblemFile> {
    check_strata(strata)?;
    if n != 2 && n != 3 {
        return Err(LiftError::InvalidInput("n: must be 2 or 3".into()));
    }
    if n == 2 && strata.contains(&SnpStratum::Noncyclic) {
        return Err(LiftError::InvalidInput(
            "strata: noncyclic non-scalar matrices exist only for n = 3".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(1..=4);
    let alphas = rand_alphas(&mut rng, k);
    let kinds: Vec<SnpStratum> = (0..k).map(|_| strata[rng.gen_range(0..strata.len())]).collect();
    let mut mats: Vec<CMatrix> = Vec::with_capacity(k);
    for _ in 0..ATTEMPTS {
        let disc = pattern_disc(&mut rng, n, &alphas, &kinds);
        // smooth similarity exp(E₀ + ζE₁) hiding the pattern
        let (e0, e1) = (rand_matrix(&mut rng, n, 0.15), rand_matrix(&mut rng, n, 0.15));
        mats.clear();
        for &a in &alphas {
            let g = mexp(&(e0 + e1.scale(a)));
            mats.push(g.inverse()? * eval_grid(&disc, a) * g);
        }
        if mats.iter().zip(&kinds).all(|(m, &k)| stratum_of(&classify(m)) == k) {
            break;
        }
        mats.clear();
    }
    if mats.is_empty() {
        return Err(LiftError::InvalidInput("strata: no instance found for the requested mix".into()));
    }
    // bring the data into the domain before the reference disc is measured
    let rho = mats.iter().map(spectral_radius).fold(0.0, f64::max);
    if rho > 0.5 {
        for m in &mut mats {
            *m = m.scale(C64::new(0.5 / rho, 0.0));
        }
    }
    let nodes_of = |mats: &[CMatrix]| -> Vec<SnpNode> {
        alphas
            .iter()
            .zip(mats)
            .map(|(&alpha, &matrix)| SnpNode { alpha, matrix })
            .collect()
    };
    let inst = SnpInstance::new(nodes_of(&mats))?;
    let f = shrink_factor(&Problem::Snp(inst))
        .ok_or_else(|| LiftError::InvalidInput("generated nodes admit no reference disc".into()))?;
    for m in &mut mats {
        *m = m.scale(C64::new(f, 0.0));
    }
    let mut file = base_file(ProblemKind::Snp, n, seed);
    file.nodes = Some(
        nodes_of(&mats)
            .into_iter()
            .map(|nd| NodeSpec {
                alpha: nd.alpha,
                matrix: nd.matrix,
            })
            .collect(),
    );
    Ok(file)
}

/// Reduced-form direction at `A_μ` for one of the three `A_μ` cases; entries
/// on the second row and at (1,3) vanish.
fn reduced_direction(rng: &mut ChaCha8Rng, mu: C64, case: ScfCase, transposed: bool) -> CMatrix {
    let mut b = CMatrix::zeros(3);
    let entry = |rng: &mut ChaCha8Rng| loop {
        let z = rand_disc(rng, 0.4);
        if z.norm() > 0.05 {
            return z;
        }
    };
    b.set(0, 0, entry(rng));
    b.set(2, 2, entry(rng));
    match case {
        ScfCase::AmuBaseGeneric if transposed => {
            b.set(2, 0, entry(rng));
            b.set(2, 1, entry(rng));
        }
        ScfCase::AmuBaseGeneric => {
            b.set(0, 1, entry(rng));
            b.set(2, 0, entry(rng));
            b.set(2, 1, entry(rng));
        }
        ScfCase::AmuBaseSpecial => loop {
            let v = entry(rng);
            if (v + mu * b.get(0, 0)).norm() > 0.05 {
                b.set(2, 1, v);
                break;
            }
        },
        _ => b.set(2, 1, -mu * b.get(0, 0)),
    }
    b
}

/// `(A, B)` whose normalization lands in `case`.
fn scf_pair(rng: &mut ChaCha8Rng, n: usize, case: ScfCase) -> Result<(CMatrix, CMatrix)> {
    let shift = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.5) { ZERO } else { rand_disc(rng, 0.5) };
    match case {
        ScfCase::CyclicBaseUnsupported => {
            let a = rand_cyclic(rng, n, 0.3);
            Ok((a, rand_matrix(rng, n, 0.3)))
        }
        ScfCase::ZeroBaseBcyclic
        | ScfCase::ZeroBaseBscalarN2
        | ScfCase::ZeroBaseBscalarN3
        | ScfCase::ZeroBaseBnoncyclicN3 => {
            let lambda = shift(rng);
            let a = CMatrix::scalar(n, lambda);
            let base = match case {
                ScfCase::ZeroBaseBcyclic => rand_cyclic(rng, n, 0.3),
                ScfCase::ZeroBaseBnoncyclicN3 => rand_noncyclic(rng, 0.5),
                _ => loop {
                    let z = rand_disc(rng, 0.5);
                    if z.norm() > 0.05 {
                        break CMatrix::scalar(n, z);
                    }
                },
            };
            // dΦ_λ(λI)[B] = B/(1 − |λ|²)
            Ok((a, base.scale(C64::new(1.0 - lambda.norm_sqr(), 0.0))))
        }
        ScfCase::AmuBaseGeneric | ScfCase::AmuBaseSpecial | ScfCase::AmuBaseDegenerate => {
            let a = rand_noncyclic(rng, 0.5);
            let probe = scf_normalize(&a, &CMatrix::zeros(3))?;
            let mu = probe.mu.expect("non-cyclic base");
            let s = probe
                .chain
                .iter()
                .find_map(|f| match f {
                    crate::discmap::ChainFactor::Similarity { s, s_inv } => Some((*s, *s_inv)),
                    _ => None,
                })
                .expect("normalization similarity");
            let transposed = case == ScfCase::AmuBaseGeneric && rng.gen_bool(0.5);
            let b2 = reduced_direction(rng, mu, case, transposed);
            // the normalizer sets b₂ = S b₁ S⁻¹
            let b1 = s.1 * b2 * s.0;
            let b = match probe.mobius_lambda {
                Some(l) => mobius_direction(-l, &mobius(l, &a)?, &b1)?,
                None => b1,
            };
            Ok((a, b))
        }
    }
}

/// SCF instance whose normalization lands in `case`.
pub fn gen_scf(n: usize, case: ScfCase, seed: u64) -> Result<ProblemFile> {
    if n != 2 && n != 3 {
        return Err(LiftError::InvalidInput("n: must be 2 or 3".into()));
    }
    if let Some(req) = case.required_n() {
        if req != n {
            return Err(LiftError::InvalidInput(format!("strata: case {} requires n = {req}", case.tag())));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..ATTEMPTS {
        let (a, mut b) = scf_pair(&mut rng, n, case)?;
        let inst = scf_normalize(&a, &b)?;
        if inst.case != case {
            continue;
        }
        if case != ScfCase::CyclicBaseUnsupported {
            // A_μ + ζB is not homogeneous in B: shrink until the radius fits
            let mut inst = inst;
            let mut fits = false;
            for _ in 0..SHRINK_STEPS {
                match reference_radius(&Problem::Scf(inst.clone())) {
                    Some(r) if r <= TARGET_RADIUS => {
                        fits = true;
                        break;
                    }
                    Some(_) => {}
                    None => break,
                }
                b = b.scale(C64::new(0.8, 0.0));
                inst = scf_normalize(&a, &b)?;
            }
            if !fits || inst.case != case {
                continue;
            }
        }
        let mut file = base_file(ProblemKind::Scf, n, seed);
        file.pair = Some(PairSpec { a, b });
        return Ok(file);
    }
    Err(LiftError::InvalidInput(format!(
        "could not generate an instance of case {} in {ATTEMPTS} attempts",
        case.tag()
    )))
}

/// Front end used by the command line: `strata` are SNP stratum names or
/// SCF case tags; for SCF one is drawn by the seed.
pub fn generate(kind: ProblemKind, n: usize, strata: &[String], seed: u64) -> Result<ProblemFile> {
    match kind {
        ProblemKind::Snp => {
            let s: Vec<SnpStratum> = if strata.is_empty() {
                let mut all = vec![SnpStratum::Scalar, SnpStratum::Cyclic];
                if n == 3 {
                    all.push(SnpStratum::Noncyclic);
                }
                all
            } else {
                strata.iter().map(|s| s.parse()).collect::<Result<_>>()?
            };
            gen_snp(n, &s, seed)
        }
        ProblemKind::Scf => {
            let cases: Vec<ScfCase> = if strata.is_empty() {
                ScfCase::ALL
                    .iter()
                    .copied()
                    .filter(|c| *c != ScfCase::CyclicBaseUnsupported && c.required_n().is_none_or(|r| r == n))
                    .collect()
            } else {
                strata.iter().map(|s| s.parse()).collect::<Result<_>>()?
            };
            check_strata(&cases)?;
            let pick = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed).gen_range(0..cases.len());
            gen_scf(n, cases[pick], seed)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snp_strata_are_respected_and_deterministic() {
        for seed in 1..20 {
            let f = gen_snp(3, &[SnpStratum::Noncyclic], seed).unwrap();
            assert_eq!(f.to_json(), gen_snp(3, &[SnpStratum::Noncyclic], seed).unwrap().to_json());
            for nd in f.nodes.as_ref().unwrap() {
                assert!(matches!(classify(&nd.matrix), MatrixClass::NonCyclicNonScalar { .. }));
            }
            ProblemFile::from_json(&f.to_json()).unwrap().problem().unwrap();
        }
    }

    #[test]
    fn scf_cases_land_where_requested() {
        for case in ScfCase::ALL {
            let n = case.required_n().unwrap_or(3);
            for seed in 1..6 {
                let f = gen_scf(n, case, seed).unwrap();
                let p = f.problem().unwrap();
                assert_eq!(p.case_tag(), case.tag(), "seed {seed}");
            }
        }
    }

    #[test]
    fn unknown_stratum_is_rejected() {
        assert!(generate(ProblemKind::Snp, 3, &["odd".into()], 1).is_err());
        assert!(gen_snp(2, &[SnpStratum::Noncyclic], 1).is_err());
    }
}
