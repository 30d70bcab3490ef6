//! Reduction of node matrices to the sparsity patterns of the SNP lifts.
//!
//! Each reduction returns `H = S·A·S⁻¹` in pattern form with `S` kept as close
//! to the identity as the data allow, so that interpolating the node
//! similarities stays tame when the data vary slowly.

use crate::error::Result;
use crate::linalg::{
    nearest_identity_transform, noncyclic_transform, rational_canonical, CMatrix, MatrixClass,
    NoncyclicForm, C64, ONE, ZERO,
};

/// Pattern entries smaller than this (relative to `1 + ‖A‖`) count as zero.
const ENTRY_FLOOR: f64 = 1e-6;
/// Newton stopping tolerance relative to `1 + ‖A‖`.
const NEWTON_TOL: f64 = 1e-15;
const NEWTON_STEPS: usize = 60;
/// Reductions with `‖S‖·‖S⁻¹‖` above this fall back to canonical forms.
const MAX_COND: f64 = 1e4;
const SHEARS: [f64; 5] = [1.0, 0.5, -1.0, 2.0, -0.5];

#[derive(Clone, Debug, PartialEq)]
pub struct NodeReduction {
    /// Pattern-form value `S·A·S⁻¹`.
    pub h: CMatrix,
    pub s: CMatrix,
}

impl NodeReduction {
    fn identity(a: &CMatrix) -> Self {
        NodeReduction {
            h: *a,
            s: CMatrix::identity(a.dim()),
        }
    }

    fn from_s(a: &CMatrix, s: CMatrix) -> Result<Self> {
        let h = s * *a * s.inverse()?;
        Ok(NodeReduction { h, s })
    }

    pub fn is_identity(&self) -> bool {
        self.s == CMatrix::identity(self.s.dim())
    }
}

fn floor(a: &CMatrix) -> f64 {
    ENTRY_FLOOR * (1.0 + a.norm_max())
}

/// Elementary `I + t·Eᵢⱼ`.
fn elementary(n: usize, i: usize, j: usize, t: C64) -> CMatrix {
    let mut e = CMatrix::identity(n);
    e.set(i, j, t);
    e
}

/// Conjugation by the shear `I + t·Eᵢⱼ` that makes `H[i][j]` largest.
fn best_shear(r: &NodeReduction, i: usize, j: usize) -> Result<NodeReduction> {
    let n = r.h.dim();
    let mut best = r.clone();
    for t in SHEARS {
        let e = elementary(n, i, j, C64::new(t, 0.0));
        let cand = NodeReduction::from_s(&r.h, e)?;
        if cand.h.get(i, j).norm() > best.h.get(i, j).norm() {
            best = NodeReduction {
                h: cand.h,
                s: e * r.s,
            };
        }
    }
    Ok(best)
}

/// n = 2, cyclic: the full matrix is the pattern once `H₁₂ ≠ 0`.
fn reduce_cyclic_2(a: &CMatrix) -> Result<NodeReduction> {
    let r = NodeReduction::identity(a);
    if r.h.get(0, 1).norm() > floor(a) {
        return Ok(r);
    }
    best_shear(&r, 0, 1)
}

/// n = 3, cyclic: Newton on `(I + x·E₁₂)(I + y·E₃₁)` for `H₁₃ = H₂₁ = 0`;
/// the linearization is diagonal with entries `±H₂₃`.
fn newton_cyclic_3(a: &CMatrix) -> Option<NodeReduction> {
    let tol = NEWTON_TOL * (1.0 + a.norm_max());
    let mut r = NodeReduction::identity(a);
    for _ in 0..NEWTON_STEPS {
        let (h13, h21, h23) = (r.h.get(0, 2), r.h.get(1, 0), r.h.get(1, 2));
        if h13.norm() <= tol && h21.norm() <= tol {
            let mut h = r.h;
            h.set(0, 2, ZERO);
            h.set(1, 0, ZERO);
            return Some(NodeReduction { h, s: r.s });
        }
        if h23.norm() <= floor(a) {
            return None;
        }
        let step = elementary(3, 0, 1, -h13 / h23) * elementary(3, 2, 0, h21 / h23);
        let s = step * r.s;
        r = NodeReduction::from_s(a, s).ok()?;
        if !r.h.is_finite() {
            return None;
        }
    }
    None
}

fn pattern_ok_cyclic_3(r: &NodeReduction, a: &CMatrix) -> bool {
    r.h.get(0, 1).norm() > floor(a) && r.h.get(1, 2).norm() > floor(a) && r.s.condition_estimate() <= MAX_COND
}

/// Companion form balanced to the size of `A`: superdiagonal entries `‖A‖`.
fn balanced_companion(a: &CMatrix) -> Result<NodeReduction> {
    let pair = rational_canonical(a)?;
    let n = a.dim();
    let scale = if a.norm_max() > 0.0 { a.norm_max() } else { 1.0 };
    // D·C·D⁻¹ with D = diag(1, 1/s, 1/s², …) has superdiagonal s
    let d = CMatrix::diag(&(0..n).map(|k| C64::new(scale.powi(-(k as i32)), 0.0)).collect::<Vec<_>>());
    let s = nearest_identity_transform(&(d * pair.transform), a);
    NodeReduction::from_s(a, s)
}

fn reduce_cyclic_3(a: &CMatrix) -> Result<NodeReduction> {
    if let Some(r) = newton_cyclic_3(a) {
        if pattern_ok_cyclic_3(&r, a) {
            return Ok(r);
        }
    }
    balanced_companion(a)
}

/// n = 3, non-cyclic with spectrum `{λ, λ, μ}`: `H = λ ⊕ K` needs the first
/// row of `S` to be a left and the first column of `S⁻¹` a right
/// `λ`-eigenvector. Writing the rank-one `A − λI = x·yᵀ`, both eigenvectors are
/// taken nearest to `e₁` and the other rows of `S` nearest to `e₂`, `e₃`.
fn nearest_noncyclic(a: &CMatrix, lambda: C64) -> Option<NodeReduction> {
    let m = *a - CMatrix::scalar(3, lambda);
    let col = |j: usize| -> [C64; 3] { [m.get(0, j), m.get(1, j), m.get(2, j)] };
    let nsq = |v: &[C64; 3]| -> f64 { v.iter().map(|z| z.norm_sqr()).sum() };
    let x = (0..3).map(col).max_by(|p, q| nsq(p).total_cmp(&nsq(q)))?;
    let xx = nsq(&x);
    if xx <= floor(a).powi(2) {
        return None;
    }
    // yᵀ = x̄ᵀ·m / ‖x‖²
    let y: Vec<C64> = (0..3).map(|j| (0..3).map(|i| x[i].conj() * m.get(i, j)).sum::<C64>() / xx).collect();
    let yy: f64 = y.iter().map(|z| z.norm_sqr()).sum();
    // u ⟂ ȳ and v ⟂ x̄ (bilinearly), each nearest to e₁
    let u: Vec<C64> = (0..3).map(|i| if i == 0 { ONE } else { ZERO } - y[i].conj() * y[0] / yy).collect();
    let v: Vec<C64> = (0..3).map(|i| if i == 0 { ONE } else { ZERO } - x[i].conj() * x[0] / xx).collect();
    let vu: C64 = (0..3).map(|i| v[i] * u[i]).sum();
    if vu.norm() < 0.1 {
        return None;
    }
    let uu: f64 = u.iter().map(|z| z.norm_sqr()).sum();
    let mut s = CMatrix::zeros(3);
    for j in 0..3 {
        s.set(0, j, v[j] / vu);
        for k in 1..3 {
            let e = if j == k { ONE } else { ZERO };
            s.set(k, j, e - u[k] * u[j].conj() / uu);
        }
    }
    if s.condition_estimate() > MAX_COND {
        return None;
    }
    let mut r = NodeReduction::from_s(a, s).ok()?;
    for (i, j) in [(0, 1), (0, 2), (1, 0), (2, 0)] {
        r.h.set(i, j, ZERO);
    }
    r.h.set(0, 0, lambda);
    Some(r)
}

fn reduce_noncyclic_3(a: &CMatrix, lambda: C64, mu: C64) -> Result<NodeReduction> {
    if let Some(mut r) = nearest_noncyclic(a, lambda) {
        if r.h.get(1, 2).norm() <= floor(a) {
            r = best_shear(&r, 1, 2)?;
        }
        if r.h.get(1, 2).norm() > floor(a) {
            return Ok(r);
        }
    }
    // λ ⊕ companion((t−λ)(t−μ)), block superdiagonal scaled to ‖A‖
    let (_, t) = noncyclic_transform(a, lambda, mu, NoncyclicForm::RationalBlock)?;
    let scale = if a.norm_max() > 0.0 { a.norm_max() } else { 1.0 };
    let d = CMatrix::diag(&[ONE, ONE, C64::new(1.0 / scale, 0.0)]);
    NodeReduction::from_s(a, nearest_identity_transform(&(d * t), a))
}

/// Pattern value and similarity for one node. For n = 2 the pattern is any
/// matrix with `H₁₂ ≠ 0`; for n = 3 it is `H₁₃ = H₂₁ = 0` with `H₁₂, H₂₃ ≠ 0`
/// at cyclic nodes and `H = λ ⊕ K`, `K₁₂ ≠ 0`, at non-cyclic ones.
pub fn reduce_node(a: &CMatrix, class: &MatrixClass) -> Result<NodeReduction> {
    match (a.dim(), *class) {
        (_, MatrixClass::Scalar { .. }) => Ok(NodeReduction::identity(a)),
        (2, _) => reduce_cyclic_2(a),
        (_, MatrixClass::Cyclic) => reduce_cyclic_3(a),
        (_, MatrixClass::NonCyclicNonScalar { lambda, mu }) => reduce_noncyclic_3(a, lambda, mu),
    }
}
