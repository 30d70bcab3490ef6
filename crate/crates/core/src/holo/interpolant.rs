use super::{HoloExpr, Poly, Singularity};
use crate::error::{LiftError, Result};
use crate::linalg::{C64, ONE};

/// Values with modulus at most this are treated as prescribed zeros.
pub const ZERO_VALUE_TOL: f64 = 1e-14;

/// Entire function `Z·exp(g)` taking `values[j]` at `nodes[j]`.
///
/// `Z` is the monic polynomial with a simple root at each zero-valued node;
/// `g` is the polynomial interpolant of `log(values[j]/Z(nodes[j]))` over the
/// other nodes. With `derivs`, `h'(nodes[j]) = derivs[j]` is imposed as well;
/// at a zero-valued node this fixes `exp(g)` there, so the derivative must be
/// nonzero to keep the zero simple.
pub fn entire_interpolant(
    nodes: &[C64],
    values: &[C64],
    derivs: Option<&[C64]>,
) -> Result<HoloExpr> {
    if nodes.len() != values.len() {
        return Err(LiftError::DimensionMismatch {
            expected: nodes.len(),
            got: values.len(),
        });
    }
    if let Some(d) = derivs {
        if d.len() != nodes.len() {
            return Err(LiftError::DimensionMismatch {
                expected: nodes.len(),
                got: d.len(),
            });
        }
    }
    if nodes.iter().chain(values).any(|z| !z.is_finite()) {
        return Err(LiftError::InvalidInput("non-finite interpolation data".into()));
    }
    let zeros: Vec<C64> = nodes
        .iter()
        .zip(values)
        .filter(|(_, v)| v.norm() <= ZERO_VALUE_TOL)
        .map(|(a, _)| *a)
        .collect();
    let z = Poly::from_roots(&zeros);
    let dz = z.derivative();
    let mut data = Vec::with_capacity(nodes.len());
    for (j, (&a, &v)) in nodes.iter().zip(values).enumerate() {
        let d = derivs.map(|d| d[j]);
        if v.norm() <= ZERO_VALUE_TOL {
            if let Some(d) = d {
                if d.norm() <= ZERO_VALUE_TOL {
                    return Err(LiftError::InvalidInput(format!(
                        "zero value with zero derivative at ({}, {})",
                        a.re, a.im
                    )));
                }
                data.push((a, vec![(d / dz.eval(a)).ln()]));
            }
        } else {
            let za = z.eval(a);
            let mut taylor = vec![(v / za).ln()];
            if let Some(d) = d {
                taylor.push(d / v - dz.eval(a) / za);
            }
            data.push((a, taylor));
        }
    }
    if zeros.len() + data.len() > 0 {
        // duplicate detection covers zero-valued nodes too
        let all: Vec<_> = nodes.iter().map(|a| (*a, vec![ONE])).collect();
        Poly::hermite(&all)?;
    }
    let g = Poly::hermite(&data)?;
    Ok(HoloExpr::poly(z) * HoloExpr::exp(HoloExpr::poly(g)))
}

/// Number of zeros of `p` in the open unit disc by the argument principle;
/// `None` when `p` comes too close to zero on the circle to decide.
fn zeros_in_unit_disc(p: &Poly) -> Option<i64> {
    const SAMPLES: usize = 1024;
    let vals: Vec<C64> = (0..=SAMPLES)
        .map(|k| p.eval(C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / SAMPLES as f64)))
        .collect();
    let top = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if vals.iter().any(|v| v.norm() <= 1e-6 * top) {
        return None;
    }
    let turn: f64 = vals.windows(2).map(|w| (w[1] / w[0]).arg()).sum();
    Some((turn / std::f64::consts::TAU).round() as i64)
}

/// Function with a simple zero at each of `zeros`, no other zero in the
/// closed unit disc, and `values[j]` (nonzero) at `nodes[j]`.
///
/// Uses `Z·u` with `u` the polynomial interpolant of `values/Z` when that has
/// no zero in the closed disc, and `Z·exp(g)` otherwise.
pub fn zero_free_interpolant(zeros: &[C64], nodes: &[C64], values: &[C64]) -> Result<HoloExpr> {
    if values.iter().any(|v| v.norm() <= ZERO_VALUE_TOL) {
        return Err(LiftError::InvalidInput("zero-free interpolation needs nonzero values".into()));
    }
    let z = Poly::from_roots(zeros);
    if nodes.is_empty() {
        return Ok(HoloExpr::poly(z));
    }
    let q: Vec<C64> = nodes.iter().zip(values).map(|(&a, &v)| v / z.eval(a)).collect();
    let u = Poly::interpolate(nodes, &q)?;
    if zeros_in_unit_disc(&u) == Some(0) {
        return Ok(HoloExpr::poly(&z * &u));
    }
    let mut all_nodes = zeros.to_vec();
    all_nodes.extend_from_slice(nodes);
    let mut all_values = vec![C64::new(0.0, 0.0); zeros.len()];
    all_values.extend_from_slice(values);
    entire_interpolant(&all_nodes, &all_values, None)
}

/// Quotient with removable singularities at the listed zeros of `den`;
/// `NotDivisible { label }` if the numerator vanishes to lower order anywhere.
pub fn exact_div(
    num: HoloExpr,
    den: HoloExpr,
    zeros: &[(C64, usize)],
    label: &str,
) -> Result<HoloExpr> {
    let sing = zeros
        .iter()
        .filter(|(_, k)| *k > 0)
        .map(|&(p, k)| Singularity::new(p, k))
        .collect();
    HoloExpr::div_labeled(num, den, sing, label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn zero_free_prefers_polynomials() {
        let h = zero_free_interpolant(&[ZERO], &[c(0.5), c(-0.5)], &[c(0.5), c(-0.6)]).unwrap();
        assert!(matches!(h, HoloExpr::Poly { .. }), "{h:?}");
        assert!((h.eval(c(-0.5)) - c(-0.6)).norm() < 1e-15);
        // u would have to change sign between the nodes: exponential form
        let h = zero_free_interpolant(&[], &[c(0.2), c(-0.2)], &[ONE, c(-1.0)]).unwrap();
        assert!(!matches!(h, HoloExpr::Poly { .. }));
        assert!((h.eval(c(-0.2)) + ONE).norm() < 1e-13);
    }

    #[test]
    fn single_zero_node() {
        let h = entire_interpolant(&[ZERO], &[ZERO], None).unwrap();
        assert!((h.eval(c(0.7)) - c(0.7)).norm() < 1e-15);
    }

    #[test]
    fn zero_and_one() {
        let h = entire_interpolant(&[ZERO, c(0.5)], &[ZERO, ONE], None).unwrap();
        for z in [c(0.5), C64::new(-0.3, 1.2)] {
            assert!((h.eval(z) - z * 2.0).norm() < 1e-14);
        }
    }

    #[test]
    fn value_then_zero() {
        let h = entire_interpolant(&[ZERO, c(0.5)], &[c(0.3), ZERO], None).unwrap();
        assert!((h.eval(ZERO) - c(0.3)).norm() < 1e-15);
        assert!(h.eval(c(0.5)).norm() < 1e-15);
        // exp(g(0)) = 0.3 / (0 − 1/2)
        let eg = h.eval(ZERO) / (ZERO - c(0.5));
        assert!((eg - c(-0.6)).norm() < 1e-15);
    }

    #[test]
    fn derivative_constraints() {
        let nodes = [ZERO, C64::new(0.2, 0.4), c(-0.5)];
        let values = [ZERO, c(2.0), C64::new(0.0, 1.0)];
        let derivs = [c(3.0), c(-1.0), C64::new(0.5, 0.5)];
        let h = entire_interpolant(&nodes, &values, Some(&derivs)).unwrap();
        for j in 0..3 {
            let jet = h.jet(nodes[j], 1).unwrap();
            assert!((jet.coeffs[0] - values[j]).norm() < 1e-13);
            assert!((jet.coeffs[1] - derivs[j]).norm() < 1e-13);
        }
    }

    #[test]
    fn duplicate_nodes_rejected() {
        assert!(entire_interpolant(&[c(0.1), c(0.1)], &[ZERO, ONE], None).is_err());
    }

    #[test]
    fn exact_division_examples() {
        let q = exact_div(
            HoloExpr::monomial(3) - HoloExpr::monomial(2),
            HoloExpr::monomial(2),
            &[(ZERO, 2)],
            "t",
        )
        .unwrap();
        assert!((q.eval(c(0.3)) - c(-0.7)).norm() < 1e-14);
        assert!((q.eval(ZERO) - c(-1.0)).norm() < 1e-14);
        let err = exact_div(HoloExpr::monomial(1), HoloExpr::monomial(2), &[(ZERO, 2)], "b7")
            .unwrap_err();
        assert!(matches!(err, LiftError::NotDivisible { ref label, .. } if label == "b7"));
    }
}
