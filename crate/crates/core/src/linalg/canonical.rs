use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{classify, companion, sigma, CMatrix, MatrixClass, C64, ONE, ZERO};
use crate::error::{LiftError, Result};

/// Transforms with a larger `‖S‖·‖S⁻¹‖` are rejected.
pub const MAX_CONDITION: f64 = 1e8;

/// `canonical` together with an invertible `transform` S such that
/// `A = S⁻¹ · canonical · S`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalPair {
    pub class: MatrixClass,
    pub canonical: CMatrix,
    pub transform: CMatrix,
}

impl CanonicalPair {
    pub fn residual(&self, a: &CMatrix) -> f64 {
        match self.transform.inverse() {
            Ok(inv) => (inv * self.canonical * self.transform - *a).norm_max(),
            Err(_) => f64::INFINITY,
        }
    }
}

/// Target pattern for a non-cyclic non-scalar 3×3 matrix with spectrum {λ, λ, μ}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoncyclicForm {
    /// `λ ⊕ companion((t−λ)(t−μ))`, rows `(λ,0,0), (0,0,1), (0,−λμ,λ+μ)`.
    RationalBlock,
    /// Rows `(λ,0,0), (0,λ,1), (0,0,μ)`.
    UpperBlock,
}

fn unit_rows() -> Vec<[C64; 3]> {
    let r = |a: f64, b: f64, c: f64| [C64::new(a, 0.0), C64::new(b, 0.0), C64::new(c, 0.0)];
    vec![
        r(1.0, 0.0, 0.0),
        r(0.0, 1.0, 0.0),
        r(0.0, 0.0, 1.0),
        r(1.0, 1.0, 0.0),
        r(0.0, 1.0, 1.0),
        r(1.0, 0.0, 1.0),
        r(1.0, 1.0, 1.0),
        r(1.0, -1.0, 1.0),
        r(0.3, 0.8, -0.5),
        r(-0.7, 0.2, 0.6),
        [C64::new(0.4, 0.3), C64::new(-0.2, 0.9), C64::new(0.5, -0.1)],
    ]
}

/// Scales S so that det S = 1; the similarity it induces is unchanged.
fn normalize_det(s: CMatrix) -> CMatrix {
    let d = s.det();
    if d.norm() == 0.0 {
        return s;
    }
    s.scale(d.powf(-1.0 / s.dim() as f64))
}

fn pick_best(candidates: impl Iterator<Item = CMatrix>) -> Result<CMatrix> {
    let mut best: Option<(f64, CMatrix)> = None;
    for s in candidates {
        let k = s.condition_estimate();
        if k.is_finite() && best.as_ref().is_none_or(|(bk, _)| k < *bk) {
            best = Some((k, s));
        }
    }
    match best {
        Some((k, s)) if k <= MAX_CONDITION => Ok(normalize_det(s)),
        Some((k, _)) => Err(LiftError::IllConditioned(k)),
        None => Err(LiftError::IllConditioned(f64::INFINITY)),
    }
}

/// Krylov rows `w, wA, …, wAⁿ⁻¹` put A into companion form.
fn cyclic_transform(a: &CMatrix) -> Result<CMatrix> {
    let n = a.dim();
    pick_best(unit_rows().into_iter().map(|w| {
        let mut rows = vec![w];
        for k in 1..n {
            let next = a.row_times(&rows[k - 1]);
            rows.push(next);
        }
        CMatrix::from_row_vectors(n, &rows)
    }))
}

fn cross(u: &[C64; 3], v: &[C64; 3]) -> [C64; 3] {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

/// Basis of the left null space `{u : u (A − λI) = 0}` of a rank-one `A − λI`.
fn left_eigenspace(a: &CMatrix, lambda: C64) -> Vec<[C64; 3]> {
    let m = *a - CMatrix::scalar(3, lambda);
    // all columns of a rank-one matrix are parallel to the largest one
    let col = (0..3)
        .map(|j| [m.get(0, j), m.get(1, j), m.get(2, j)])
        .max_by(|x, y| {
            let nx: f64 = x.iter().map(|z| z.norm_sqr()).sum();
            let ny: f64 = y.iter().map(|z| z.norm_sqr()).sum();
            nx.partial_cmp(&ny).unwrap()
        })
        .unwrap();
    let mut basis: Vec<[C64; 3]> = (0..3)
        .map(|k| {
            let mut e = [ZERO; 3];
            e[k] = ONE;
            cross(&col, &e)
        })
        .collect();
    basis.sort_by(|x, y| {
        let nx: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        let ny: f64 = y.iter().map(|z| z.norm_sqr()).sum();
        ny.partial_cmp(&nx).unwrap()
    });
    basis.truncate(2);
    let (u1, u2) = (basis[0], basis[1]);
    let comb = |a: f64, b: f64| [u1[0] * a + u2[0] * b, u1[1] * a + u2[1] * b, u1[2] * a + u2[2] * b];
    vec![u1, u2, comb(1.0, 1.0), comb(1.0, -1.0)]
}

/// Similarity bringing a non-cyclic non-scalar 3×3 matrix with spectrum
/// `{λ, λ, μ}` to the requested pattern. Returns `(canonical, S)` with
/// `A = S⁻¹·canonical·S`.
pub fn noncyclic_transform(
    a: &CMatrix,
    lambda: C64,
    mu: C64,
    form: NoncyclicForm,
) -> Result<(CMatrix, CMatrix)> {
    let lam_i = CMatrix::scalar(3, lambda);
    let canonical = match form {
        NoncyclicForm::RationalBlock => {
            let mut c = CMatrix::zeros(3);
            c.set(0, 0, lambda);
            c.set(1, 2, ONE);
            c.set(2, 1, -lambda * mu);
            c.set(2, 2, lambda + mu);
            c
        }
        NoncyclicForm::UpperBlock => {
            let mut c = CMatrix::diag(&[lambda, lambda, mu]);
            c.set(1, 2, ONE);
            c
        }
    };
    let eig = left_eigenspace(a, lambda);
    let ws = unit_rows();
    let mut cands = Vec::new();
    for s1 in &eig {
        for w in &ws {
            let s3 = match form {
                NoncyclicForm::RationalBlock => a.row_times(w),
                NoncyclicForm::UpperBlock => (*a - lam_i).row_times(w),
            };
            cands.push(CMatrix::from_row_vectors(3, &[*s1, *w, s3]));
        }
    }
    let s = pick_best(cands.into_iter())?;
    Ok((canonical, s))
}

/// Rational canonical form: scalar matrices are left alone, cyclic matrices go
/// to the companion matrix of their characteristic polynomial, and non-cyclic
/// non-scalar 3×3 matrices go to `λ ⊕ companion((t−λ)(t−μ))`.
pub fn rational_canonical(a: &CMatrix) -> Result<CanonicalPair> {
    let class = classify(a);
    let (canonical, transform) = match class {
        MatrixClass::Scalar { .. } => (*a, CMatrix::identity(a.dim())),
        MatrixClass::Cyclic => (companion(&sigma(a)), cyclic_transform(a)?),
        MatrixClass::NonCyclicNonScalar { lambda, mu } => {
            noncyclic_transform(a, lambda, mu, NoncyclicForm::RationalBlock)?
        }
    };
    Ok(CanonicalPair {
        class,
        canonical,
        transform,
    })
}

/// Basis of `{X : AX = XA}` from the null space of `X ↦ AX − XA`.
pub fn centralizer_basis(a: &CMatrix) -> Vec<CMatrix> {
    let n = a.dim();
    let nn = n * n;
    let mut l = DMatrix::<C64>::zeros(nn, nn);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                // (AX)ᵢⱼ picks X_kj, (XA)ᵢⱼ picks X_ik
                l[(i * n + j, k * n + j)] += a.get(i, k);
                l[(i * n + j, i * n + k)] -= a.get(k, j);
            }
        }
    }
    let svd = l.svd(false, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let v_t = svd.v_t.expect("requested V");
    (0..nn)
        .filter(|&r| svd.singular_values[r] <= 1e-10 * smax.max(f64::MIN_POSITIVE))
        .map(|r| {
            let mut x = CMatrix::zeros(n);
            for c in 0..nn {
                x.set(c / n, c % n, v_t[(r, c)].conj());
            }
            x
        })
        .collect()
}

/// Among `S·Z` with `Z` commuting with `A`, the one nearest `I` in the
/// Frobenius norm; `S` itself when that choice is singular or inaccurate.
/// Every such product still satisfies `(SZ)⁻¹·M·(SZ) = A` when `S⁻¹MS = A`.
pub fn nearest_identity_transform(s: &CMatrix, a: &CMatrix) -> CMatrix {
    let n = a.dim();
    let basis = centralizer_basis(a);
    if basis.is_empty() {
        return *s;
    }
    let mut m = DMatrix::<C64>::zeros(n * n, basis.len());
    for (c, b) in basis.iter().enumerate() {
        let sb = *s * *b;
        for (r, v) in sb.entries().enumerate() {
            m[(r, c)] = v;
        }
    }
    let rhs = DMatrix::<C64>::from_iterator(n * n, 1, CMatrix::identity(n).entries());
    let Ok(coef) = m.svd(true, true).solve(&rhs, 1e-12) else {
        return *s;
    };
    let z = basis
        .iter()
        .zip(coef.iter())
        .fold(CMatrix::zeros(n), |acc, (b, c)| acc + b.scale(*c));
    // the fitted Z must itself commute and be well conditioned
    let drift = (*a * z - z * *a).norm_max() / (1.0 + a.norm_max() * z.norm_max());
    if drift > 1e-12 || z.condition_estimate() > MAX_CONDITION {
        return *s;
    }
    *s * z
}
