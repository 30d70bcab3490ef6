use super::{CMatrix, SymPoint, C64, ONE};
use crate::error::{LiftError, Result};

/// `A_μ`: rows `(0,0,0), (0,0,1), (0,0,μ)`.
pub fn a_mu(mu: C64) -> CMatrix {
    let mut m = CMatrix::zeros(3);
    m.set(1, 2, ONE);
    m.set(2, 2, mu);
    m
}

/// Returns μ when `a` has the `A_μ` pattern (entrywise tolerance `tol`).
pub fn is_a_mu(a: &CMatrix, tol: f64) -> Option<C64> {
    if a.dim() != 3 {
        return None;
    }
    let mu = a.get(2, 2);
    ((*a - a_mu(mu)).norm_max() <= tol).then_some(mu)
}

/// `d/dt σ(A + tB)` at `t = 0`.
pub fn sigma_first_derivative(a: &CMatrix, b: &CMatrix) -> SymPoint {
    let tr_b = b.trace();
    let d_det = (a.adjugate() * *b).trace();
    match a.dim() {
        2 => SymPoint::new(vec![tr_b, d_det]),
        _ => {
            let d2 = a.trace() * tr_b - (*a * *b).trace();
            SymPoint::new(vec![tr_b, d2, d_det])
        }
    }
}

/// Coefficient of `t²` in `σ₃(A_μ + tB)`, i.e. half the second Gâteaux derivative.
///
/// Uses `det(A + tB) = det A + t·tr(adj(A)B) + t²·tr(A·adj(B)) + t³·det B`.
pub fn sigma3_second(a: &CMatrix, b: &CMatrix) -> Result<C64> {
    if a.dim() != 3 || b.dim() != 3 {
        return Err(LiftError::DimensionMismatch {
            expected: 3,
            got: a.dim().min(b.dim()),
        });
    }
    if is_a_mu(a, 1e-12 * (1.0 + a.norm_max())).is_none() {
        return Err(LiftError::UnsupportedBase(
            "second-order derivative of sigma_3 is only provided at A_mu".into(),
        ));
    }
    Ok((*a * b.adjugate()).trace())
}

/// First-order derivative of σ along B, plus the second-order σ₃ term when the
/// base point has the `A_μ` pattern (`None` elsewhere; call [`sigma3_second`]
/// directly to get the error).
pub fn gateaux_sigma(a: &CMatrix, b: &CMatrix) -> Result<(SymPoint, Option<C64>)> {
    if a.dim() != b.dim() {
        return Err(LiftError::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let first = sigma_first_derivative(a, b);
    let second = sigma3_second(a, b).ok();
    Ok((first, second))
}

/// Solves for X so that `B̃ = B + [A_μ, X]` has zero second row and zero (1,3)
/// entry: `X₃ⱼ = −b₂ⱼ`, `X₁₂ = b₁₃`, everything else zero.
pub fn commutator_reduce(b: &CMatrix, mu: C64) -> (CMatrix, CMatrix) {
    let mut x = CMatrix::zeros(3);
    x.set(2, 0, -b.get(1, 0));
    x.set(2, 1, -b.get(1, 1));
    x.set(2, 2, -b.get(1, 2));
    x.set(0, 1, b.get(0, 2));
    let bt = *b + a_mu(mu).commutator(&x);
    (bt, x)
}
