//! Feasible polynomial φ for a problem: the labeled conditions become linear
//! equations on the coefficients, solved in the least-norm sense and then
//! perturbed along the null space until φ lands in `G_n` on the sample grid.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domains::in_g;
use crate::error::{LiftError, Result};
use crate::holo::Poly;
use crate::linalg::{CMatrix, C64, ZERO};
use crate::phi::Phi;
use crate::problem::Problem;
use crate::verifier::VerifyConfig;

/// Singular values below this fraction of the largest count as zero.
pub const RANK_TOL: f64 = 1e-11;
pub const MAX_RETRIES: usize = 40;
/// Extra degrees above the minimum used when none is requested.
pub const DEFAULT_EXTRA_DEGREE: usize = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSystem {
    pub n: usize,
    pub degree: usize,
    pub labels: Vec<String>,
    #[serde(with = "rows_serde")]
    pub rows: Vec<Vec<C64>>,
    #[serde(with = "crate::wire::c64_vec")]
    pub rhs: Vec<C64>,
}

mod rows_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::linalg::C64;
    use crate::wire::{from_pair, to_pair, Pair};

    pub fn serialize<S: Serializer>(v: &[Vec<C64>], s: S) -> Result<S::Ok, S::Error> {
        let p: Vec<Vec<Pair>> = v.iter().map(|r| r.iter().map(|z| to_pair(*z)).collect()).collect();
        p.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<C64>>, D::Error> {
        let p = Vec::<Vec<Pair>>::deserialize(d)?;
        Ok(p.into_iter().map(|r| r.into_iter().map(from_pair).collect()).collect())
    }
}

/// Least-norm solution, rank and an orthonormal null-space basis of `M x = b`.
pub struct LinearSolution {
    pub x: Vec<C64>,
    pub rank: usize,
    pub null_space: Vec<Vec<C64>>,
    /// `‖Mx − b‖∞`.
    pub residual: f64,
}

pub fn solve_least_norm(rows: &[Vec<C64>], rhs: &[C64], cols: usize) -> Result<LinearSolution> {
    let m = rows.len();
    // pad to a square system so the SVD exposes the whole null space
    let size = m.max(cols);
    let mut a = DMatrix::<C64>::zeros(size, cols);
    let mut b = DMatrix::<C64>::zeros(size, 1);
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r.iter().enumerate() {
            a[(i, j)] = *v;
        }
        b[(i, 0)] = rhs[i];
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cut = RANK_TOL * smax.max(f64::MIN_POSITIVE);
    let rank = svd.singular_values.iter().filter(|&&s| s > cut).count();
    let x = svd
        .solve(&b, cut)
        .map_err(|e| LiftError::InvalidInput(format!("least-squares solve failed: {e}")))?;
    let v_t = svd.v_t.as_ref().expect("requested V");
    let null_space = (0..v_t.nrows())
        .filter(|&i| svd.singular_values[i] <= cut)
        .map(|i| (0..cols).map(|j| v_t[(i, j)].conj()).collect())
        .collect();
    let x: Vec<C64> = x.column(0).iter().cloned().collect();
    let res = (&a * DMatrix::from_column_slice(cols, 1, &x) - b)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    Ok(LinearSolution {
        x,
        rank,
        null_space,
        residual: res,
    })
}

fn system_at(problem: &Problem, degree: usize) -> Result<ConstraintSystem> {
    let n = problem.n();
    let list = problem.condition_list()?;
    Ok(ConstraintSystem {
        n,
        degree,
        labels: list.iter().map(|c| c.label.clone()).collect(),
        rows: list.iter().map(|c| c.row(n, degree)).collect(),
        rhs: list.iter().map(|c| c.rhs).collect(),
    })
}

fn full_rank(sys: &ConstraintSystem) -> Result<bool> {
    let cols = sys.n * (sys.degree + 1);
    if sys.rows.len() > cols {
        return Ok(false);
    }
    Ok(solve_least_norm(&sys.rows, &sys.rhs, cols)?.rank == sys.rows.len())
}

/// Smallest degree at which the conditions are independent.
pub fn min_degree(problem: &Problem) -> Result<usize> {
    let list = problem.condition_list()?;
    let cap = list.len() + list.iter().map(|c| c.max_order()).max().unwrap_or(0) + 2;
    for d in 0..=cap {
        if full_rank(&system_at(problem, d)?)? {
            return Ok(d);
        }
    }
    Err(LiftError::Infeasible {
        reason: "conditions are dependent at every degree tried".into(),
        min_degree: None,
    })
}

/// One row per condition of the matching checker, on coefficients up to `degree`.
pub fn assemble_constraints(problem: &Problem, degree: usize) -> Result<ConstraintSystem> {
    let sys = system_at(problem, degree)?;
    if !full_rank(&sys)? {
        let need = min_degree(problem).ok();
        return Err(LiftError::Infeasible {
            reason: format!(
                "{} conditions are not independent on polynomials of degree {degree}",
                sys.rows.len()
            ),
            min_degree: need,
        });
    }
    Ok(sys)
}

/// Smallest `1 − max|root|` of φ over the grid (negative when some sample
/// leaves `G_n`).
pub fn grid_margin(phi: &Phi, grid: &[C64]) -> f64 {
    grid.iter()
        .map(|&z| {
            let r = in_g(&phi.eval(z));
            if r.inside {
                r.margin
            } else {
                r.margin.min(0.0)
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// `σ` of a matrix of polynomials (row-major `n×n`), as polynomials.
pub fn sigma_of_poly_matrix(n: usize, e: &[Poly]) -> Vec<Poly> {
    let at = |i: usize, j: usize| &e[i * n + j];
    let det2 = |a: usize, b: usize| &(at(a, a) * at(b, b)) - &(at(a, b) * at(b, a));
    let tr = (0..n).fold(Poly::zero(), |acc, i| &acc + at(i, i));
    if n == 2 {
        return vec![tr, det2(0, 1)];
    }
    let s2 = &(&det2(0, 1) + &det2(0, 2)) + &det2(1, 2);
    // 2x2 minors of the bottom two rows
    let minor = |c0: usize, c1: usize| &(at(1, c0) * at(2, c1)) - &(at(1, c1) * at(2, c0));
    let det = &(&(at(0, 0) * &minor(1, 2)) - &(at(0, 1) * &minor(0, 2))) + &(at(0, 2) * &minor(0, 1));
    vec![tr, s2, det]
}

/// σ of a matrix-polynomial disc through the prescribed data: the entrywise
/// interpolant of the node matrices, or `A + ζB` at the normalized base
/// point. Any such disc satisfies every necessary condition.
pub fn reference_disc_image(problem: &Problem) -> Option<Phi> {
    let (n, entries) = match problem {
        Problem::Snp(inst) => {
            let n = inst.n;
            let alphas = inst.alphas();
            let mut e = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    let vals: Vec<C64> = inst.nodes.iter().map(|nd| nd.matrix.get(i, j)).collect();
                    e.push(Poly::interpolate(&alphas, &vals).ok()?);
                }
            }
            (n, e)
        }
        Problem::Scf(inst) => {
            let n = inst.n;
            let (a, b): (&CMatrix, &CMatrix) = (&inst.base_a, &inst.base_b);
            let mut e = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    e.push(Poly::new(vec![a.get(i, j), b.get(i, j)]));
                }
            }
            (n, e)
        }
    };
    Phi::new(sigma_of_poly_matrix(n, &entries)).ok()
}

/// The reference image when it stays in `G_n` on the grid.
pub fn reference_phi(problem: &Problem, grid: &[C64]) -> Option<Phi> {
    reference_disc_image(problem).filter(|phi| grid_margin(phi, grid) > 0.0)
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// φ passing every condition of `problem`, inside `G_n` on the grid of `cfg`.
pub fn build_phi_with(
    problem: &Problem,
    degree: Option<usize>,
    seed: u64,
    cfg: &VerifyConfig,
) -> Result<Phi> {
    let grid = cfg.grid();
    let reference = reference_phi(problem, &grid);
    let degree = match degree {
        Some(d) => d,
        None => {
            let d = min_degree(problem)? + DEFAULT_EXTRA_DEGREE;
            d.max(reference.as_ref().map_or(0, |r| r.degree()))
        }
    };
    let sys = assemble_constraints(problem, degree)?;
    let n = sys.n;
    let cols = n * (degree + 1);
    // anchor at the reference image when it fits the requested degree
    let anchor = match &reference {
        Some(r) if r.degree() <= degree => r.to_vector(degree),
        _ => vec![ZERO; cols],
    };
    let rhs: Vec<C64> = sys
        .rows
        .iter()
        .zip(&sys.rhs)
        .map(|(row, b)| b - row.iter().zip(&anchor).map(|(r, x)| r * x).sum::<C64>())
        .collect();
    let mut sol = solve_least_norm(&sys.rows, &rhs, cols)?;
    for (x, a) in sol.x.iter_mut().zip(&anchor) {
        *x += a;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dir = vec![ZERO; cols];
    for v in &sol.null_space {
        let w = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        for (d, x) in dir.iter_mut().zip(v) {
            *d += w * x;
        }
    }
    let dn = norm(&dir);
    if dn > 0.0 {
        dir.iter_mut().for_each(|d| *d /= dn);
    }
    let mut t = 0.1 * norm(&sol.x);
    let mut best = f64::NEG_INFINITY;
    for attempt in 0..=MAX_RETRIES {
        // the last attempt is the particular solution itself
        let scale = if attempt == MAX_RETRIES || dn == 0.0 { 0.0 } else { t };
        let coeffs: Vec<C64> = sol.x.iter().zip(&dir).map(|(x, d)| x + d * scale).collect();
        let phi = Phi::from_vector(n, degree, &coeffs);
        let margin = grid_margin(&phi, &grid);
        best = best.max(margin);
        if margin > 0.0 {
            return Ok(phi);
        }
        if scale == 0.0 {
            break;
        }
        t *= 0.5;
    }
    Err(LiftError::RetriesExhausted { best_margin: best })
}

/// [`build_phi_with`] on the default verification grid.
pub fn build_phi(problem: &Problem, degree: Option<usize>, seed: u64) -> Result<Phi> {
    build_phi_with(problem, degree, seed, &VerifyConfig::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;
    use crate::scf::scf_normalize;
    use crate::snp::{SnpInstance, SnpNode};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn snp(nodes: &[(C64, CMatrix)]) -> Problem {
        Problem::Snp(
            SnpInstance::new(
                nodes
                    .iter()
                    .map(|(a, m)| SnpNode {
                        alpha: *a,
                        matrix: *m,
                    })
                    .collect(),
            )
            .unwrap(),
        )
    }

    #[test]
    fn row_counts() {
        let p = snp(&[(ZERO, CMatrix::scalar(3, c(0.2)))]);
        assert_eq!(assemble_constraints(&p, 3).unwrap().rows.len(), 6);
        let comp = CMatrix::real(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[0.1, 0.0, 0.0]]);
        let p = snp(&[(ZERO, comp)]);
        assert_eq!(assemble_constraints(&p, 0).unwrap().rows.len(), 3);
    }

    #[test]
    fn degree_zero_two_nodes_infeasible() {
        let p = snp(&[
            (ZERO, CMatrix::diag(&[c(0.1), c(0.2)])),
            (c(0.5), CMatrix::diag(&[c(-0.1), c(0.3)])),
        ]);
        match assemble_constraints(&p, 0) {
            Err(LiftError::Infeasible { min_degree, .. }) => assert_eq!(min_degree, Some(1)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn homothety_is_particular_solution() {
        let inst = scf_normalize(&CMatrix::zeros(3), &CMatrix::scalar(3, c(0.25))).unwrap();
        let p = Problem::Scf(inst);
        let d = min_degree(&p).unwrap();
        let sys = assemble_constraints(&p, d).unwrap();
        let sol = solve_least_norm(&sys.rows, &sys.rhs, 3 * (d + 1)).unwrap();
        let phi = Phi::from_vector(3, d, &sol.x);
        let want = Phi::real(&[&[0.0, 0.75], &[0.0, 0.0, 0.1875], &[0.0, 0.0, 0.0, 0.015625]]);
        for j in 0..3 {
            for k in 0..=d {
                assert!((phi.components[j].coeff(k) - want.components[j].coeff(k)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn built_phi_passes_and_is_deterministic() {
        let p = snp(&[
            (ZERO, CMatrix::scalar(2, c(0.2))),
            (c(0.4), CMatrix::real(&[&[0.1, 0.1], &[0.0, -0.05]])),
        ]);
        let a = build_phi(&p, None, 7).unwrap();
        let b = build_phi(&p, None, 7).unwrap();
        assert_eq!(a, b);
        assert!(p.check(&a, 1e-10).unwrap().pass);
        assert!(grid_margin(&a, &VerifyConfig::default().grid()) > 0.0);
    }

    #[test]
    fn reference_image_meets_the_conditions() {
        let p = snp(&[
            (ZERO, CMatrix::scalar(3, c(0.1))),
            (c(0.5), CMatrix::real(&[&[0.1, 0.05, 0.0], &[0.0, 0.1, 0.0], &[0.0, 0.0, -0.05]])),
            (c(-0.5), CMatrix::real(&[&[0.0, 0.1, 0.0], &[0.0, 0.0, 0.1], &[0.05, 0.0, 0.0]])),
        ]);
        let r = reference_phi(&p, &VerifyConfig::default().grid()).unwrap();
        assert!(p.check(&r, 1e-10).unwrap().pass);
    }
}
