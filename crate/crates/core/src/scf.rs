//! Spectral Carathéodory–Fejér: reduction of `(A, B)` to a normalized base
//! point, per-case conditions on φ, and explicit lifts.

use serde::{Deserialize, Serialize};

use crate::conditions::{ConditionKind, ConditionReport, LinearCondition, Term};
use crate::discmap::{ChainFactor, DiscMap};
use crate::domains::in_spectral_ball;
use crate::error::{LiftError, Result};
use crate::holo::{cauchy_derivatives_matrix, exact_div, HoloExpr, Poly, DEFAULT_SAMPLES};
use crate::linalg::{
    a_mu, classify, commutator_reduce, mobius, noncyclic_transform, rational_canonical, sigma,
    sigma3_second, sigma_first_derivative, CMatrix, MatrixClass, NoncyclicForm, C64, ONE, ZERO,
};
use crate::phi::Phi;

/// Relative tolerance for deciding that an entry of B vanishes.
pub const ENTRY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScfCase {
    #[serde(rename = "ZeroBase_Bcyclic")]
    ZeroBaseBcyclic,
    #[serde(rename = "ZeroBase_Bscalar_n2")]
    ZeroBaseBscalarN2,
    #[serde(rename = "ZeroBase_Bscalar_n3")]
    ZeroBaseBscalarN3,
    #[serde(rename = "ZeroBase_Bnoncyclic_n3")]
    ZeroBaseBnoncyclicN3,
    #[serde(rename = "AmuBase_generic")]
    AmuBaseGeneric,
    #[serde(rename = "AmuBase_special")]
    AmuBaseSpecial,
    #[serde(rename = "AmuBase_degenerate")]
    AmuBaseDegenerate,
    #[serde(rename = "CyclicBase_unsupported")]
    CyclicBaseUnsupported,
}

impl ScfCase {
    pub fn tag(&self) -> &'static str {
        match self {
            ScfCase::ZeroBaseBcyclic => "ZeroBase_Bcyclic",
            ScfCase::ZeroBaseBscalarN2 => "ZeroBase_Bscalar_n2",
            ScfCase::ZeroBaseBscalarN3 => "ZeroBase_Bscalar_n3",
            ScfCase::ZeroBaseBnoncyclicN3 => "ZeroBase_Bnoncyclic_n3",
            ScfCase::AmuBaseGeneric => "AmuBase_generic",
            ScfCase::AmuBaseSpecial => "AmuBase_special",
            ScfCase::AmuBaseDegenerate => "AmuBase_degenerate",
            ScfCase::CyclicBaseUnsupported => "CyclicBase_unsupported",
        }
    }

    pub const ALL: [ScfCase; 8] = [
        ScfCase::ZeroBaseBcyclic,
        ScfCase::ZeroBaseBscalarN2,
        ScfCase::ZeroBaseBscalarN3,
        ScfCase::ZeroBaseBnoncyclicN3,
        ScfCase::AmuBaseGeneric,
        ScfCase::AmuBaseSpecial,
        ScfCase::AmuBaseDegenerate,
        ScfCase::CyclicBaseUnsupported,
    ];
}

/// `(A, B)` together with the reduction to the normalized pair.
///
/// `chain` holds the factors that carry a lift of the normalized pair back to
/// the original one, in application order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScfInstance {
    pub n: usize,
    pub a: CMatrix,
    pub b: CMatrix,
    pub case: ScfCase,
    /// λ of the Möbius shift `Φ_λ`, when one was applied.
    #[serde(with = "opt_c64", default)]
    pub mobius_lambda: Option<C64>,
    /// Normalized base point (0 or `A_μ`).
    pub base_a: CMatrix,
    /// Direction at the normalized base point, before the commutator reduction.
    pub base_b: CMatrix,
    /// Direction after the commutator (and possibly transpose) reduction.
    pub reduced_b: CMatrix,
    #[serde(with = "opt_c64", default)]
    pub mu: Option<C64>,
    /// Class of `base_b` for the zero-base cases.
    pub b_class: Option<MatrixClass>,
    /// Canonical form C of `base_b` for the zero-base cyclic and non-cyclic cases.
    pub b_canonical: Option<CMatrix>,
    /// Commutator correction X (first reduction).
    pub commutator: Option<CMatrix>,
    pub transposed: bool,
    pub chain: Vec<ChainFactor>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

mod opt_c64 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::linalg::C64;
    use crate::wire::{from_pair, to_pair, Pair};

    pub fn serialize<S: Serializer>(v: &Option<C64>, s: S) -> Result<S::Ok, S::Error> {
        v.map(to_pair).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<C64>, D::Error> {
        Ok(Option::<Pair>::deserialize(d)?.map(from_pair))
    }
}

fn is_zero(x: C64, scale: f64) -> bool {
    x.norm() <= ENTRY_TOL * (1.0 + scale)
}

/// `dΦ_λ(A)[B]`, the ζ-derivative at 0 of `Φ_λ(A + ζB)` by contour quadrature.
pub fn mobius_direction(lambda: C64, a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let n = a.dim();
    let inv = (CMatrix::identity(n) - a.scale(lambda.conj())).inverse()?;
    // keeps ‖λ̄ζB(I − λ̄A)⁻¹‖ ≤ 1/2 on the contour
    let r = 0.5 / (1.0 + lambda.norm() * b.norm_1() * inv.norm_1());
    let nan = CMatrix::scalar(n, C64::new(f64::NAN, 0.0));
    let d = cauchy_derivatives_matrix(
        |z| mobius(lambda, &(*a + b.scale(z))).unwrap_or(nan),
        ZERO,
        r,
        2,
        DEFAULT_SAMPLES,
    )?;
    Ok(d[1])
}

/// Similarity with `S·A_μᵀ·S⁻¹ = A_μ`.
pub fn transpose_similarity(mu: C64) -> CMatrix {
    CMatrix::from_rows(&[
        vec![ONE, ZERO, ZERO],
        vec![ZERO, ZERO, ONE],
        vec![ZERO, ONE, mu],
    ])
    .expect("finite entries")
}

pub fn scf_normalize(a: &CMatrix, b: &CMatrix) -> Result<ScfInstance> {
    if a.dim() != b.dim() {
        return Err(LiftError::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(LiftError::InvalidInput("non-finite matrix entries".into()));
    }
    if !in_spectral_ball(a).inside {
        return Err(LiftError::InvalidInput("A has spectral radius >= 1".into()));
    }
    let n = a.dim();
    let mut inst = ScfInstance {
        n,
        a: *a,
        b: *b,
        case: ScfCase::CyclicBaseUnsupported,
        mobius_lambda: None,
        base_a: *a,
        base_b: *b,
        reduced_b: *b,
        mu: None,
        b_class: None,
        b_canonical: None,
        commutator: None,
        transposed: false,
        chain: Vec::new(),
        notes: Vec::new(),
    };
    // inverse factors in the order they are discovered; reversed at the end
    let mut undo: Vec<ChainFactor> = Vec::new();
    match classify(a) {
        MatrixClass::Cyclic => {
            inst.notes.push("cyclic base point: lifting not provided".into());
            return Ok(inst);
        }
        MatrixClass::Scalar { lambda } => {
            let mut bb = *b;
            if lambda != ZERO {
                bb = mobius_direction(lambda, a, b)?;
                inst.mobius_lambda = Some(lambda);
                undo.push(ChainFactor::Mobius { lambda });
            }
            inst.base_a = CMatrix::zeros(n);
            inst.base_b = bb;
            inst.reduced_b = bb;
            let class = classify(&bb);
            inst.b_class = Some(class);
            inst.case = match class {
                MatrixClass::Cyclic => {
                    let pair = rational_canonical(&bb)?;
                    inst.b_canonical = Some(pair.canonical);
                    undo.push(ChainFactor::similarity(pair.transform)?);
                    ScfCase::ZeroBaseBcyclic
                }
                MatrixClass::Scalar { .. } if n == 2 => ScfCase::ZeroBaseBscalarN2,
                MatrixClass::Scalar { lambda: l } => {
                    if l.norm() <= ENTRY_TOL {
                        inst.notes.push(
                            "B = 0: handled by the scalar pattern with lambda = 0, outside the stated hypothesis lambda != 0"
                                .into(),
                        );
                    }
                    ScfCase::ZeroBaseBscalarN3
                }
                MatrixClass::NonCyclicNonScalar { lambda: l, mu: m } => {
                    let (u, s) = noncyclic_transform(&bb, l, m, NoncyclicForm::UpperBlock)?;
                    inst.b_canonical = Some(u);
                    undo.push(ChainFactor::similarity(s)?);
                    ScfCase::ZeroBaseBnoncyclicN3
                }
            };
        }
        MatrixClass::NonCyclicNonScalar { lambda, mu } => {
            let (mut a1, mut b1) = (*a, *b);
            let mut mu1 = mu;
            if lambda != ZERO {
                b1 = mobius_direction(lambda, a, b)?;
                a1 = mobius(lambda, a)?;
                mu1 = (mu - lambda) / (ONE - lambda.conj() * mu);
                inst.mobius_lambda = Some(lambda);
                undo.push(ChainFactor::Mobius { lambda });
            }
            let (_, s) = noncyclic_transform(&a1, ZERO, mu1, NoncyclicForm::RationalBlock)?;
            let s_inv = s.inverse()?;
            let b2 = s * b1 * s_inv;
            undo.push(ChainFactor::Similarity { s, s_inv });
            inst.mu = Some(mu1);
            inst.base_a = a_mu(mu1);
            inst.base_b = b2;
            let scale = b2.norm_max();
            let (mut bt, x) = commutator_reduce(&b2, mu1);
            inst.commutator = Some(x);
            undo.push(ChainFactor::ExpLinear { x: -x });
            if is_zero(bt.get(0, 1), scale) && !is_zero(bt.get(2, 0), scale) {
                let st = transpose_similarity(mu1);
                let st_inv = st.inverse()?;
                let bp = st * bt.transpose() * st_inv;
                undo.push(ChainFactor::Transpose);
                undo.push(ChainFactor::Similarity { s: st, s_inv: st_inv });
                let (bt2, x2) = commutator_reduce(&bp, mu1);
                undo.push(ChainFactor::ExpLinear { x: -x2 });
                bt = bt2;
                inst.transposed = true;
            }
            inst.reduced_b = bt;
            inst.case = if !is_zero(bt.get(0, 1), scale) {
                ScfCase::AmuBaseGeneric
            } else if !is_zero(bt.get(2, 1) + mu1 * bt.get(0, 0), scale) {
                ScfCase::AmuBaseSpecial
            } else {
                ScfCase::AmuBaseDegenerate
            };
        }
    }
    undo.reverse();
    inst.chain = undo;
    Ok(inst)
}

/// Row builder for conditions at 0.
struct Rows {
    out: Vec<LinearCondition>,
}

impl Rows {
    fn push(&mut self, label: &str, kind: ConditionKind, terms: &[(usize, usize, C64)], rhs: C64) {
        self.out.push(LinearCondition {
            label: label.to_string(),
            kind,
            node: None,
            terms: terms
                .iter()
                .map(|&(j, k, w)| Term::new(j - 1, ZERO, k, w))
                .collect(),
            rhs,
        });
    }

    /// `c_k(φ_j) = rhs`.
    fn coef(&mut self, label: &str, j: usize, k: usize, rhs: C64) {
        self.push(label, ConditionKind::Bullet, &[(j, k, ONE)], rhs);
    }
}

/// The labeled conditions of the normalized case.
pub fn cf_condition_list(inst: &ScfInstance) -> Result<Vec<LinearCondition>> {
    use ConditionKind::{Hypothesis, Value};
    let n = inst.n;
    let mut r = Rows { out: Vec::new() };
    let base_sigma = sigma(&inst.base_a);
    for j in 1..=n {
        r.push(&format!("value{j}"), Value, &[(j, 0, ONE)], base_sigma.s[j - 1]);
    }
    let scalar_lambda = || match inst.b_class {
        Some(MatrixClass::Scalar { lambda }) => lambda,
        _ => ZERO,
    };
    match inst.case {
        ScfCase::CyclicBaseUnsupported => {
            return Err(LiftError::UnsupportedBase(
                "Caratheodory-Fejer lifting at a cyclic base point is not provided".into(),
            ))
        }
        ScfCase::ZeroBaseBcyclic => {
            let s = sigma(&inst.base_b);
            for j in 1..=n {
                for k in 1..j {
                    r.coef(&format!("ord{j}.{k}"), j, k, ZERO);
                }
                r.coef(&format!("b{j}"), j, j, s.s[j - 1]);
            }
        }
        ScfCase::ZeroBaseBscalarN2 => {
            let l = scalar_lambda();
            r.coef("b1", 1, 1, l * 2.0);
            r.coef("b2", 2, 1, ZERO);
            r.coef("b3", 2, 2, l * l);
            r.push("b4", ConditionKind::Bullet, &[(2, 3, ONE), (1, 2, -l)], ZERO);
        }
        ScfCase::ZeroBaseBscalarN3 => {
            let l = scalar_lambda();
            r.coef("b1", 1, 1, l * 3.0);
            r.coef("b2", 2, 1, ZERO);
            r.coef("b3", 2, 2, l * l * 3.0);
            r.coef("b4a", 3, 1, ZERO);
            r.coef("b4b", 3, 2, ZERO);
            r.coef("b5", 3, 3, l * l * l);
            r.push("b6", ConditionKind::Bullet, &[(2, 3, ONE), (1, 2, -l * 2.0)], ZERO);
            r.push("b7", ConditionKind::Bullet, &[(3, 4, ONE), (1, 2, -l * l)], ZERO);
            r.push(
                "b8",
                ConditionKind::Bullet,
                &[(3, 5, ONE), (2, 4, -l), (1, 3, l * l)],
                ZERO,
            );
        }
        ScfCase::ZeroBaseBnoncyclicN3 => {
            let Some(MatrixClass::NonCyclicNonScalar { lambda: l, mu: m }) = inst.b_class else {
                unreachable!("case implies a non-cyclic direction")
            };
            r.coef("b1", 1, 1, l * 2.0 + m);
            r.coef("b2", 2, 1, ZERO);
            r.coef("b3", 2, 2, l * l + l * m * 2.0);
            r.coef("b4a", 3, 1, ZERO);
            r.coef("b4b", 3, 2, ZERO);
            r.coef("b5", 3, 3, l * l * m);
            r.push(
                "b6",
                ConditionKind::Bullet,
                &[(3, 4, ONE), (2, 3, -l), (1, 2, l * l)],
                ZERO,
            );
        }
        ScfCase::AmuBaseGeneric | ScfCase::AmuBaseSpecial | ScfCase::AmuBaseDegenerate => {
            let d = sigma_first_derivative(&inst.base_a, &inst.base_b);
            for j in 1..=3 {
                r.push(&format!("d{j}"), Hypothesis, &[(j, 1, ONE)], d.s[j - 1]);
            }
            if inst.case == ScfCase::AmuBaseDegenerate {
                let mu = inst.mu.unwrap_or(ZERO);
                let b = &inst.reduced_b;
                let b11 = b.get(0, 0);
                r.coef("b1", 3, 2, mu * b11 * b11);
                r.push(
                    "b2",
                    ConditionKind::Bullet,
                    &[(3, 3, ONE), (2, 2, -b11)],
                    -b11 * b11 * b.get(2, 2),
                );
            } else {
                r.coef("b1", 3, 2, prop_second_order_rhs(inst.mu.unwrap_or(ZERO), &inst.base_b));
            }
        }
    }
    Ok(r.out)
}

/// `μ·det[[b₁₁,b₁₂],[b₂₁,b₂₂]] − det[[b₁₁,b₁₂],[b₃₁,b₃₂]]`: the ζ² coefficient
/// of σ₃ along any disc through `A_μ` with direction B.
pub fn prop_second_order_rhs(mu: C64, b: &CMatrix) -> C64 {
    let (b11, b12) = (b.get(0, 0), b.get(0, 1));
    mu * (b11 * b.get(1, 1) - b12 * b.get(1, 0)) - (b11 * b.get(2, 1) - b12 * b.get(2, 0))
}

pub fn cf_conditions(inst: &ScfInstance, phi: &Phi, tol: f64) -> Result<ConditionReport> {
    if phi.dim() != inst.n {
        return Err(LiftError::DimensionMismatch {
            expected: inst.n,
            got: phi.dim(),
        });
    }
    let list = cf_condition_list(inst)?;
    let mut report = ConditionReport::evaluate(inst.case.tag(), &list, phi, tol);
    report.notes = inst.notes.clone();
    Ok(report)
}

fn zeta_pow(k: usize) -> HoloExpr {
    HoloExpr::term(ONE, k)
}

fn div_zeta(e: HoloExpr, k: usize) -> Result<HoloExpr> {
    exact_div(e, zeta_pow(k), &[(ZERO, k)], "divisibility")
}

fn grid3(rows: [[HoloExpr; 3]; 3]) -> Result<DiscMap> {
    DiscMap::from_grid(rows.into_iter().map(|r| r.into_iter().collect()).collect())
}

/// Lift through the normalized case, then back along the recorded chain.
///
/// Failing conditions are reported as `NotDivisible` naming the first failing
/// bullet (or value/hypothesis row when every bullet holds).
pub fn cf_lift(inst: &ScfInstance, phi: &Phi, tol: f64) -> Result<DiscMap> {
    let report = cf_conditions(inst, phi, tol)?;
    if !report.pass {
        let bad = report
            .first_failed(ConditionKind::Bullet)
            .or_else(|| report.failed().next())
            .expect("a failing condition");
        return Err(LiftError::NotDivisible {
            point: ZERO,
            label: bad.label.clone(),
            residual: bad.residual,
        });
    }
    let n = inst.n;
    let z = HoloExpr::monomial(1);
    let c = |v: C64| HoloExpr::constant(v);
    let zero = HoloExpr::zero;
    let phi1 = phi.expr(0);
    let phi2 = phi.expr(1);
    let mut map = match inst.case {
        ScfCase::CyclicBaseUnsupported => unreachable!("rejected by cf_conditions"),
        ScfCase::ZeroBaseBcyclic => {
            if n == 2 {
                DiscMap::from_grid(vec![
                    vec![zero(), z.clone()],
                    vec![-div_zeta(phi2, 1)?, phi1],
                ])?
            } else {
                let phi3 = phi.expr(2);
                grid3([
                    [zero(), z.clone(), zero()],
                    [zero(), zero(), z.clone()],
                    [div_zeta(phi3, 2)?, -div_zeta(phi2, 1)?, phi1],
                ])?
            }
        }
        ScfCase::ZeroBaseBscalarN2 => {
            let Some(MatrixClass::Scalar { lambda: l }) = inst.b_class else {
                unreachable!("case implies a scalar direction")
            };
            let lz = c(l) * z.clone();
            let f22 = phi1 - lz.clone();
            let f21 = div_zeta(lz.clone() * f22.clone() - phi2, 2)?;
            DiscMap::from_grid(vec![vec![lz, zeta_pow(2)], vec![f21, f22]])?
        }
        ScfCase::ZeroBaseBscalarN3 => {
            let Some(MatrixClass::Scalar { lambda: l }) = inst.b_class else {
                unreachable!("case implies a scalar direction")
            };
            let phi3 = phi.expr(2);
            let a = c(l) * z.clone();
            let f33 = phi1 - a.clone() * c(C64::new(2.0, 0.0));
            // f₁₁ = f₂₂ = λζ
            let s2 = a.clone() * a.clone() + a.clone() * f33.clone() * c(C64::new(2.0, 0.0));
            let f32 = div_zeta(s2 - phi2, 2)?;
            let num31 = phi3 - a.clone() * a.clone() * f33.clone()
                + a.clone() * zeta_pow(2) * f32.clone();
            let f31 = div_zeta(num31, 4)?;
            grid3([
                [a.clone(), zeta_pow(2), zero()],
                [zero(), a, zeta_pow(2)],
                [f31, f32, f33],
            ])?
        }
        ScfCase::ZeroBaseBnoncyclicN3 => {
            let Some(MatrixClass::NonCyclicNonScalar { lambda: l, .. }) = inst.b_class else {
                unreachable!("case implies a non-cyclic direction")
            };
            let phi3 = phi.expr(2);
            let lz = c(l) * z.clone();
            let f33 = phi1.clone() - lz.clone() * c(C64::new(2.0, 0.0));
            let f32 = c(l * 2.0) * phi1.clone() - HoloExpr::term(l * l * 3.0, 1)
                - div_zeta(phi2.clone(), 1)?;
            let inner = phi2 - lz.clone() * phi1 + HoloExpr::term(l * l, 2);
            let f31 = div_zeta(phi3 - lz.clone() * inner, 3)?;
            grid3([
                [lz.clone(), zeta_pow(2), zero()],
                [zero(), lz, z.clone()],
                [f31, f32, f33],
            ])?
        }
        ScfCase::AmuBaseGeneric | ScfCase::AmuBaseSpecial | ScfCase::AmuBaseDegenerate => {
            let phi3 = phi.expr(2);
            let b = &inst.reduced_b;
            let b11 = b.get(0, 0);
            let (f11, f12, order) = match inst.case {
                ScfCase::AmuBaseGeneric => (HoloExpr::term(b11, 1), HoloExpr::term(b.get(0, 1), 1), 1),
                ScfCase::AmuBaseSpecial => {
                    let mu = inst.mu.unwrap_or(ZERO);
                    let c2 = phi.taylor(1, ZERO, 2);
                    let c3 = phi.taylor(2, ZERO, 3);
                    let cc = (b11 * (c2 - b11 * b.get(2, 2)) - c3) / (b.get(2, 1) + mu * b11);
                    (
                        HoloExpr::poly(Poly::new(vec![ZERO, b11, cc])),
                        zeta_pow(2),
                        2,
                    )
                }
                _ => (HoloExpr::term(b11, 1), zeta_pow(2), 2),
            };
            let e = HoloExpr::exp(zeta_pow(2));
            let f33 = phi1 - f11.clone();
            let f32 = e.clone() * (f11.clone() * f33.clone() - phi2);
            let f31 = exact_div(
                f11.clone() * f32.clone() + e * phi3,
                f12.clone(),
                &[(ZERO, order)],
                "divisibility",
            )?;
            grid3([
                [f11, f12, zero()],
                [zero(), zero(), HoloExpr::exp(-zeta_pow(2))],
                [f31, f32, f33],
            ])?
        }
    };
    map.chain = inst.chain.clone();
    Ok(map)
}

/// Whether the Kobayashi–Royden pseudometric of `Ω₃` vanishes at `A₀` in
/// direction B: `tr B = b₃₂ = b₁₂b₃₁ = 0`, excluding `b₁₁ ≠ 0 = b₁₂ = b₃₁`.
pub fn kappa_zero_at_a0(b: &CMatrix) -> bool {
    if b.dim() != 3 {
        return false;
    }
    let scale = b.norm_max();
    let z = |x: C64| is_zero(x, scale);
    let (b11, b12, b31) = (b.get(0, 0), b.get(0, 1), b.get(2, 0));
    let in_b1 = z(b.trace()) && z(b.get(2, 1)) && z(b12 * b31);
    let in_b2 = !z(b11) && z(b12) && z(b31);
    in_b1 && !in_b2
}

/// `σ₃''` check helper: equals [`prop_second_order_rhs`] at `A_μ`.
pub fn second_order_via_gateaux(mu: C64, b: &CMatrix) -> Result<C64> {
    sigma3_second(&a_mu(mu), b)
}
