//! Spectral Nevanlinna–Pick: node conditions and explicit lifts for n = 2, 3.

use serde::{Deserialize, Serialize};

use crate::conditions::{ConditionKind, ConditionReport, LinearCondition, Term};
use crate::discmap::{ChainFactor, DiscMap};
use crate::domains::in_spectral_ball;
use crate::error::{LiftError, Result};
use crate::holo::{exact_div, require_order, zero_free_interpolant, HoloExpr, Poly, ZERO_VALUE_TOL};
use crate::linalg::{mlog, sigma, CMatrix, MatrixClass, C64, ONE, ZERO};
use crate::pattern::{reduce_node, NodeReduction};
use crate::phi::Phi;

/// Interpolation node `ψ(alpha) = matrix`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnpNode {
    #[serde(with = "crate::wire::c64")]
    pub alpha: C64,
    pub matrix: CMatrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnpInstance {
    pub n: usize,
    pub nodes: Vec<SnpNode>,
    pub classes: Vec<MatrixClass>,
}

impl SnpInstance {
    pub fn new(nodes: Vec<SnpNode>) -> Result<Self> {
        let Some(first) = nodes.first() else {
            return Err(LiftError::InvalidInput("at least one node is required".into()));
        };
        let n = first.matrix.dim();
        for (j, node) in nodes.iter().enumerate() {
            if node.matrix.dim() != n {
                return Err(LiftError::DimensionMismatch {
                    expected: n,
                    got: node.matrix.dim(),
                });
            }
            if !(node.alpha.norm() < 1.0) {
                return Err(LiftError::InvalidInput(format!("nodes[{j}].alpha is not in the unit disc")));
            }
            if !in_spectral_ball(&node.matrix).inside {
                return Err(LiftError::InvalidInput(format!(
                    "nodes[{j}].matrix has spectral radius >= 1"
                )));
            }
            for (k, other) in nodes[..j].iter().enumerate() {
                if (other.alpha - node.alpha).norm() <= 1e-12 {
                    return Err(LiftError::InvalidInput(format!(
                        "nodes[{j}].alpha duplicates nodes[{k}].alpha"
                    )));
                }
            }
        }
        let classes = nodes.iter().map(|nd| crate::linalg::classify(&nd.matrix)).collect();
        Ok(SnpInstance { n, nodes, classes })
    }

    pub fn alphas(&self) -> Vec<C64> {
        self.nodes.iter().map(|n| n.alpha).collect()
    }

    pub fn case_tag(&self) -> String {
        format!("snp_n{}", self.n)
    }
}

fn label(j: usize, what: &str) -> String {
    format!("node{j}.{what}")
}

fn bullet(j: usize, what: &str, a: C64, terms: &[(usize, usize, C64)]) -> LinearCondition {
    LinearCondition {
        label: label(j, what),
        kind: ConditionKind::Bullet,
        node: Some(j),
        terms: terms.iter().map(|&(c, k, w)| Term::new(c, a, k, w)).collect(),
        rhs: ZERO,
    }
}

/// The full list of linear conditions: node values plus derivative bullets at
/// scalar and (n = 3) non-cyclic nodes. Cyclic nodes carry values only.
pub fn snp_condition_list(inst: &SnpInstance) -> Vec<LinearCondition> {
    let mut out = Vec::new();
    for (j, node) in inst.nodes.iter().enumerate() {
        let a = node.alpha;
        let s = sigma(&node.matrix);
        for i in 0..inst.n {
            out.push(LinearCondition {
                label: label(j, &format!("value{}", i + 1)),
                kind: ConditionKind::Value,
                node: Some(j),
                terms: vec![Term::new(i, a, 0, ONE)],
                rhs: s.s[i],
            });
        }
        match (inst.n, inst.classes[j]) {
            (2, MatrixClass::Scalar { lambda: l }) => {
                // φ₂' = λ·φ₁'
                out.push(bullet(j, "b1", a, &[(1, 1, ONE), (0, 1, -l)]));
            }
            (3, MatrixClass::Scalar { lambda: l }) => {
                // φ₂' = 2λφ₁', φ₃' = λ²φ₁', φ₃'' − λφ₂'' + λ²φ₁'' = 0
                out.push(bullet(j, "b1", a, &[(1, 1, ONE), (0, 1, -l * 2.0)]));
                out.push(bullet(j, "b2", a, &[(2, 1, ONE), (0, 1, -l * l)]));
                out.push(bullet(j, "b3", a, &[(2, 2, ONE), (1, 2, -l), (0, 2, l * l)]));
            }
            (3, MatrixClass::NonCyclicNonScalar { lambda: l, .. }) => {
                // φ₃' − λφ₂' + λ²φ₁' = 0
                out.push(bullet(j, "nc1", a, &[(2, 1, ONE), (1, 1, -l), (0, 1, l * l)]));
            }
            _ => {}
        }
    }
    out
}

pub fn snp_conditions(inst: &SnpInstance, phi: &Phi, tol: f64) -> Result<ConditionReport> {
    if phi.dim() != inst.n {
        return Err(LiftError::DimensionMismatch {
            expected: inst.n,
            got: phi.dim(),
        });
    }
    Ok(ConditionReport::evaluate(
        &inst.case_tag(),
        &snp_condition_list(inst),
        phi,
        tol,
    ))
}

/// Requires `e` to vanish at `a` to each listed order in turn, reporting the
/// first violated order under its label.
fn require_orders(e: &HoloExpr, a: C64, checks: &[(usize, String)]) -> Result<()> {
    for (k, lbl) in checks {
        require_order(e, a, *k, lbl)?;
    }
    Ok(())
}

/// `∏ (ζ − αⱼ)` over the selected nodes.
fn vanishing_poly(alphas: &[C64], nodes: &[usize]) -> Poly {
    nodes
        .iter()
        .fold(Poly::constant(ONE), |acc, &j| &acc * &Poly::new(vec![-alphas[j], ONE]))
}

/// Polynomial through `(αⱼ, vⱼ)` for the selected nodes, written as
/// `Z·u` with `Z` vanishing simply at the zero values and `u` the Lagrange
/// interpolant of the remaining quotients (`u = 1` when all values vanish).
fn interpolant(alphas: &[C64], picks: &[(usize, C64)]) -> Result<HoloExpr> {
    let (zero, rest): (Vec<_>, Vec<_>) = picks.iter().partition(|(_, v)| v.norm() <= ZERO_VALUE_TOL);
    let zero: Vec<usize> = zero.iter().map(|&&(j, _)| j).collect();
    let z = vanishing_poly(alphas, &zero);
    if rest.is_empty() {
        return Ok(z.into());
    }
    let xs: Vec<C64> = rest.iter().map(|&&(j, _)| alphas[j]).collect();
    let ys: Vec<C64> = rest.iter().map(|&&(j, v)| v / z.eval(alphas[j])).collect();
    Ok((&z * &Poly::interpolate(&xs, &ys)?).into())
}

/// Denominator vanishing simply at the `zeros` nodes and nowhere else in
/// the disc, with the given nonzero values at the other nodes.
fn denominator(alphas: &[C64], zeros: &[usize], values: &[(usize, C64)]) -> Result<HoloExpr> {
    let zs: Vec<C64> = zeros.iter().map(|&j| alphas[j]).collect();
    let xs: Vec<C64> = values.iter().map(|&(j, _)| alphas[j]).collect();
    let ys: Vec<C64> = values.iter().map(|&(_, v)| v).collect();
    zero_free_interpolant(&zs, &xs, &ys)
}

fn reductions(inst: &SnpInstance) -> Result<Vec<NodeReduction>> {
    inst.nodes
        .iter()
        .zip(&inst.classes)
        .map(|(nd, class)| reduce_node(&nd.matrix, class))
        .collect()
}

/// Appends `e^{−F}·M·e^{F}` with `e^{F(αⱼ)} = Sⱼ`, carrying the pattern value
/// `Hⱼ = Sⱼ·Aⱼ·Sⱼ⁻¹` at each node back to `Aⱼ`. Scalar nodes are fixed by every
/// similarity, so `F` interpolates only the remaining nodes.
fn push_node_conjugation(
    map: &mut DiscMap,
    alphas: &[C64],
    classes: &[MatrixClass],
    red: &[NodeReduction],
) -> Result<()> {
    let active: Vec<usize> = (0..alphas.len())
        .filter(|&j| !matches!(classes[j], MatrixClass::Scalar { .. }))
        .collect();
    if active.iter().all(|&j| red[j].is_identity()) {
        return Ok(());
    }
    let n = map.n;
    let logs: Vec<CMatrix> = active
        .iter()
        .map(|&j| if red[j].is_identity() { Ok(CMatrix::zeros(n)) } else { mlog(&red[j].s) })
        .collect::<Result<_>>()?;
    let xs: Vec<C64> = active.iter().map(|&j| alphas[j]).collect();
    let mut f = Vec::with_capacity(n * n);
    for i in 0..n {
        for k in 0..n {
            let vals: Vec<C64> = logs.iter().map(|l| l.get(i, k)).collect();
            f.push(Poly::interpolate(&xs, &vals)?);
        }
    }
    map.push(ChainFactor::ExpPoly { n, f });
    Ok(())
}

/// Lift for n = 2: `[[P, Q], [R, φ₁ − P]]` with `R = (Pφ₁ − P² − φ₂)/Q`; `Q`
/// vanishes exactly at the scalar nodes, and `P`, `Q` match the reduced node
/// values so that only the reductions need undoing.
pub fn snp_lift_n2(inst: &SnpInstance, phi: &Phi) -> Result<DiscMap> {
    if inst.n != 2 || phi.dim() != 2 {
        return Err(LiftError::DimensionMismatch {
            expected: 2,
            got: if inst.n != 2 { inst.n } else { phi.dim() },
        });
    }
    let alphas = inst.alphas();
    let red = reductions(inst)?;
    let mut p_vals = Vec::new();
    let mut q_vals = Vec::new();
    let mut scalar_nodes = Vec::new();
    for (j, (class, r)) in inst.classes.iter().zip(&red).enumerate() {
        p_vals.push((j, r.h.get(0, 0)));
        match class {
            MatrixClass::Scalar { .. } => scalar_nodes.push(j),
            _ => q_vals.push((j, r.h.get(0, 1))),
        }
    }
    let p = interpolant(&alphas, &p_vals)?;
    let q = denominator(&alphas, &scalar_nodes, &q_vals)?;
    let (phi1, phi2) = (phi.expr(0), phi.expr(1));
    let num = p.clone() * phi1.clone() - p.clone() * p.clone() - phi2;
    for &j in &scalar_nodes {
        require_orders(
            &num,
            alphas[j],
            &[(1, label(j, "value")), (2, label(j, "b1"))],
        )?;
    }
    let zeros: Vec<(C64, usize)> = scalar_nodes.iter().map(|&j| (alphas[j], 1)).collect();
    let r = exact_div(num, q.clone(), &zeros, "divisibility")?;
    let mut map = DiscMap::from_grid(vec![vec![p.clone(), q], vec![r, phi1 - p]])?;
    push_node_conjugation(&mut map, &alphas, &inst.classes, &red)?;
    Ok(map)
}

/// Lift for n = 3 with the sparsity pattern
/// `[[f₁₁, f₁₂, 0], [0, f₂₂, f₂₃], [f₃₁, f₃₂, f₃₃]]`. `f₂₃` vanishes exactly at
/// scalar nodes and `f₁₂` exactly at scalar and non-cyclic nodes; the free
/// entries match the reduced node values.
pub fn snp_lift_n3(inst: &SnpInstance, phi: &Phi) -> Result<DiscMap> {
    if inst.n != 3 || phi.dim() != 3 {
        return Err(LiftError::DimensionMismatch {
            expected: 3,
            got: if inst.n != 3 { inst.n } else { phi.dim() },
        });
    }
    let alphas = inst.alphas();
    let red = reductions(inst)?;
    let (mut v11, mut v22, mut v12, mut v23) = (vec![], vec![], vec![], vec![]);
    let (mut scalar_nodes, mut degenerate) = (vec![], vec![]);
    for (j, (class, r)) in inst.classes.iter().zip(&red).enumerate() {
        v11.push((j, r.h.get(0, 0)));
        v22.push((j, r.h.get(1, 1)));
        match class {
            MatrixClass::Scalar { .. } => {
                scalar_nodes.push(j);
                degenerate.push(j);
            }
            MatrixClass::NonCyclicNonScalar { .. } => {
                degenerate.push(j);
                v23.push((j, r.h.get(1, 2)));
            }
            MatrixClass::Cyclic => {
                v12.push((j, r.h.get(0, 1)));
                v23.push((j, r.h.get(1, 2)));
            }
        }
    }
    let f11 = interpolant(&alphas, &v11)?;
    let f22 = interpolant(&alphas, &v22)?;
    let f12 = denominator(&alphas, &degenerate, &v12)?;
    let f23 = denominator(&alphas, &scalar_nodes, &v23)?;
    let (phi1, phi2, phi3) = (phi.expr(0), phi.expr(1), phi.expr(2));
    let f33 = phi1 - f11.clone() - f22.clone();
    let g = f11.clone() * f22.clone() + f22.clone() * f33.clone() + f33.clone() * f11.clone() - phi2;
    // determinant of the pattern: f₁₂f₂₃f₃₁ = φ₃ − f₁₁f₂₂f₃₃ + f₁₁·f₂₃f₃₂
    let h = phi3 + f11.clone() * (g.clone() - f22.clone() * f33.clone());
    let mut zeros23 = Vec::new();
    let mut zeros_den = Vec::new();
    for (j, class) in inst.classes.iter().enumerate() {
        let a = alphas[j];
        match class {
            MatrixClass::Scalar { .. } => {
                require_orders(&g, a, &[(1, label(j, "value")), (2, label(j, "b1"))])?;
                require_orders(
                    &h,
                    a,
                    &[(1, label(j, "value")), (2, label(j, "b2")), (3, label(j, "b3"))],
                )?;
                zeros23.push((a, 1));
                zeros_den.push((a, 2));
            }
            MatrixClass::NonCyclicNonScalar { .. } => {
                require_orders(&h, a, &[(1, label(j, "value")), (2, label(j, "nc1"))])?;
                zeros_den.push((a, 1));
            }
            MatrixClass::Cyclic => {}
        }
    }
    let f32 = exact_div(g, f23.clone(), &zeros23, "divisibility")?;
    let f31 = exact_div(h, f12.clone() * f23.clone(), &zeros_den, "divisibility")?;
    let mut map = DiscMap::from_grid(vec![
        vec![f11, f12, HoloExpr::zero()],
        vec![HoloExpr::zero(), f22, f23],
        vec![f31, f32, f33],
    ])?;
    push_node_conjugation(&mut map, &alphas, &inst.classes, &red)?;
    Ok(map)
}

/// Dispatches on the dimension.
pub fn snp_lift(inst: &SnpInstance, phi: &Phi) -> Result<DiscMap> {
    match inst.n {
        2 => snp_lift_n2(inst, phi),
        _ => snp_lift_n3(inst, phi),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::DEFAULT_TOL;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn inst(nodes: &[(C64, CMatrix)]) -> SnpInstance {
        SnpInstance::new(
            nodes
                .iter()
                .map(|(a, m)| SnpNode {
                    alpha: *a,
                    matrix: *m,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn n2_scalar_conditions() {
        let i = inst(&[(ZERO, CMatrix::zeros(2))]);
        let ok = snp_conditions(&i, &Phi::real(&[&[0.0, 1.0], &[0.0, 0.0, 0.7]]), DEFAULT_TOL).unwrap();
        assert!(ok.pass);
        let bad = snp_conditions(&i, &Phi::real(&[&[0.0, 1.0], &[0.0, 1.0]]), DEFAULT_TOL).unwrap();
        assert!(!bad.pass);
        let b1 = bad.get("node0.b1").unwrap();
        assert!((b1.residual - 1.0).abs() < 1e-15);
    }

    #[test]
    fn n3_homothety_conditions() {
        let l = 0.3;
        let i = inst(&[(ZERO, CMatrix::scalar(3, c(l)))]);
        // φ = σ((λ + λζ)·I)
        let phi = Phi::real(&[
            &[3.0 * l, 3.0 * l],
            &[3.0 * l * l, 6.0 * l * l, 3.0 * l * l],
            &[l.powi(3), 3.0 * l.powi(3), 3.0 * l.powi(3), l.powi(3)],
        ]);
        let r = snp_conditions(&i, &phi, DEFAULT_TOL).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.conditions.len(), 6);
    }

    #[test]
    fn n2_worked_example() {
        let nil = CMatrix::real(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let i = inst(&[(ZERO, CMatrix::zeros(2)), (c(0.5), nil)]);
        let phi = Phi::real(&[&[0.0], &[0.0]]);
        let m = snp_lift_n2(&i, &phi).unwrap();
        for z in [C64::new(0.3, 0.2), c(-0.7)] {
            let w = z * (z - 0.5);
            let want = CMatrix::from_rows(&[
                vec![w, z * 2.0],
                vec![-z * (z - 0.5) * (z - 0.5) / 2.0, -w],
            ])
            .unwrap();
            assert!((m.core_eval(z) - want).norm_max() < 1e-13, "{z}");
        }
        assert!((m.eval(c(0.5)).unwrap() - nil).norm_max() < 1e-12);
        assert!(m.eval(ZERO).unwrap().norm_max() < 1e-12);
    }

    #[test]
    fn n3_cyclic_worked_example() {
        let comp = CMatrix::real(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0]]);
        let i = inst(&[(ZERO, comp)]);
        let phi = Phi::real(&[&[0.0], &[0.0], &[0.0]]);
        let m = snp_lift_n3(&i, &phi).unwrap();
        assert!(m.chain.is_empty());
        for z in [C64::new(0.3, 0.2), c(0.8)] {
            let got = m.core_eval(z);
            // with a single cyclic node at 0 the interpolants are constants
            let f = got.get(0, 0);
            let want = CMatrix::from_rows(&[
                vec![f, ONE, ZERO],
                vec![ZERO, f, ONE],
                vec![-f * f * f, -f * f * 3.0, -f * 2.0],
            ])
            .unwrap();
            assert!((got - want).norm_max() < 1e-13);
        }
    }

    #[test]
    fn n3_scalar_violation_names_bullet() {
        let l = 0.3;
        let i = inst(&[(ZERO, CMatrix::scalar(3, c(l)))]);
        let phi = Phi::real(&[
            &[3.0 * l, 3.0 * l],
            &[3.0 * l * l, 6.0 * l * l, 3.0 * l * l],
            &[l.powi(3), 3.0 * l.powi(3), 3.0 * l.powi(3) + 1e-3, l.powi(3)],
        ]);
        let r = snp_conditions(&i, &phi, DEFAULT_TOL).unwrap();
        let failed: Vec<_> = r.failed().map(|c| c.label.as_str()).collect();
        assert_eq!(failed, vec!["node0.b3"]);
        match snp_lift_n3(&i, &phi) {
            Err(LiftError::NotDivisible { label, .. }) => assert_eq!(label, "node0.b3"),
            other => panic!("{other:?}"),
        }
    }
}
