//! Membership in the unit disc, the symmetrized domains `G₂`, `G₃` and the
//! spectral balls.

use serde::{Deserialize, Serialize};

use crate::linalg::{roots_of_sigma, spectral_radius, CMatrix, SymPoint, C64};

/// Points whose largest root modulus is this close to 1 count as boundary.
pub const BOUNDARY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MembershipMethod {
    SchurCohn,
    SpectralRadius,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub inside: bool,
    /// `1 − max |root|`; negative outside.
    pub margin: f64,
    pub method: MembershipMethod,
    /// Set when the largest root modulus is within [`BOUNDARY_TOL`] of 1.
    pub boundary: bool,
}

/// Schur–Cohn test: all roots of `Σ aₖtᵏ` lie in the open unit disc.
///
/// One step maps `p` of degree m to `(ā_m·p − a₀·p*)/t`, where
/// `p*(t) = tᵐ·conj(p(1/t̄))`; `p` is stable iff `|a₀| < |a_m|` and the image is.
pub fn schur_cohn_stable(coeffs: &[C64]) -> bool {
    let mut p: Vec<C64> = coeffs.to_vec();
    while p.len() > 1 {
        let m = p.len() - 1;
        let (a0, am) = (p[0], p[m]);
        if a0.norm() >= am.norm() {
            return false;
        }
        let next: Vec<C64> = (1..=m)
            .map(|k| am.conj() * p[k] - a0 * p[m - k].conj())
            .collect();
        p = next;
    }
    true
}

/// Membership of `s` in `G_n`: the polynomial `tⁿ − s₁tⁿ⁻¹ + s₂tⁿ⁻² (− s₃)` has
/// all its roots in the open unit disc.
pub fn in_g(s: &SymPoint) -> MembershipReport {
    if s.s.iter().any(|z| !z.is_finite()) {
        return MembershipReport {
            inside: false,
            margin: f64::NEG_INFINITY,
            method: MembershipMethod::SchurCohn,
            boundary: false,
        };
    }
    let stable = schur_cohn_stable(&s.char_poly_ascending());
    let rmax = roots_of_sigma(s).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let margin = 1.0 - rmax;
    let boundary = margin.abs() <= BOUNDARY_TOL;
    MembershipReport {
        inside: stable && !boundary,
        margin,
        method: MembershipMethod::SchurCohn,
        boundary,
    }
}

/// `r(A) < 1`.
pub fn in_spectral_ball(a: &CMatrix) -> MembershipReport {
    let margin = 1.0 - spectral_radius(a);
    let boundary = margin.abs() <= BOUNDARY_TOL;
    MembershipReport {
        inside: margin > 0.0 && !boundary,
        margin,
        method: MembershipMethod::SpectralRadius,
        boundary,
    }
}

/// `|z| < 1`.
pub fn in_disc(z: C64) -> bool {
    z.norm() < 1.0
}

/// The Carathéodory–Fejér problem at base point 0 with direction B is
/// solvable iff `r(B) ≤ 1` (closed inequality).
pub fn cf_solvable_at_zero(b: &CMatrix) -> bool {
    spectral_radius(b) <= 1.0 + BOUNDARY_TOL
}
