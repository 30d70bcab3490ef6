use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{LiftError, Result};
use crate::linalg::{C64, ONE, ZERO};

/// Dense polynomial with complex coefficients in ascending degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct Poly {
    #[serde(with = "crate::wire::c64_vec")]
    coeffs: Vec<C64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.last() == Some(&ZERO) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn real(coeffs: &[f64]) -> Self {
        Poly::new(coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: C64) -> Self {
        Poly::new(vec![c])
    }

    pub fn monomial(k: usize, c: C64) -> Self {
        let mut v = vec![ZERO; k + 1];
        v[k] = c;
        Poly::new(v)
    }

    /// Monic `Π (ζ − rᵢ)`.
    pub fn from_roots(roots: &[C64]) -> Self {
        roots.iter().fold(Poly::constant(ONE), |acc, r| {
            &acc * &Poly::new(vec![-r, ONE])
        })
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Coefficient of ζᵏ (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: C64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Taylor coefficients `p⁽ᵏ⁾(a)/k!` for `k = 0..=order`.
    pub fn taylor_at(&self, a: C64, order: usize) -> Vec<C64> {
        // repeated synthetic division by (ζ − a)
        let mut work = self.coeffs.clone();
        let mut out = vec![ZERO; order + 1];
        for slot in out.iter_mut() {
            if work.is_empty() {
                break;
            }
            let mut carry = ZERO;
            for c in work.iter_mut().rev() {
                let v = *c + carry * a;
                carry = v;
                *c = v;
            }
            // work[0] now holds p(a); the rest is the quotient shifted by one
            *slot = work[0];
            work.remove(0);
        }
        out
    }

    /// Hermite interpolation. `data[i] = (node, [p(node), p'(node), p''(node)/2, …])`
    /// (Taylor coefficients). Nodes must be pairwise distinct.
    pub fn hermite(data: &[(C64, Vec<C64>)]) -> Result<Poly> {
        for (i, (a, _)) in data.iter().enumerate() {
            for (b, _) in &data[i + 1..] {
                if (a - b).norm() <= 1e-12 {
                    return Err(LiftError::InvalidInput(format!(
                        "duplicate interpolation node ({}, {})",
                        a.re, a.im
                    )));
                }
            }
        }
        let mut z = Vec::new();
        let mut owner = Vec::new();
        for (idx, (node, taylor)) in data.iter().enumerate() {
            for _ in 0..taylor.len() {
                z.push(*node);
                owner.push(idx);
            }
        }
        let m = z.len();
        if m == 0 {
            return Ok(Poly::zero());
        }
        // confluent divided differences, column by column
        let mut table: Vec<C64> = owner.iter().map(|&o| data[o].1[0]).collect();
        let mut newton = vec![table[0]];
        for level in 1..m {
            let mut next = Vec::with_capacity(m - level);
            for i in 0..m - level {
                let j = i + level;
                let v = if owner[i] == owner[j] {
                    data[owner[i]].1[level]
                } else {
                    (table[i + 1] - table[i]) / (z[j] - z[i])
                };
                next.push(v);
            }
            newton.push(next[0]);
            table = next;
        }
        let mut acc = Poly::zero();
        let mut basis = Poly::constant(ONE);
        for (k, c) in newton.iter().enumerate() {
            acc = &acc + &basis.scale(*c);
            basis = &basis * &Poly::new(vec![-z[k], ONE]);
        }
        Ok(acc)
    }

    /// Plain Lagrange interpolation through `(nodes[i], values[i])`.
    pub fn interpolate(nodes: &[C64], values: &[C64]) -> Result<Poly> {
        if nodes.len() != values.len() {
            return Err(LiftError::DimensionMismatch {
                expected: nodes.len(),
                got: values.len(),
            });
        }
        let data: Vec<_> = nodes
            .iter()
            .zip(values)
            .map(|(a, v)| (*a, vec![*v]))
            .collect();
        Poly::hermite(&data)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-ONE)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn trims_and_degree() {
        let p = Poly::new(vec![c(1.0), c(2.0), ZERO, ZERO]);
        assert_eq!(p.degree(), Some(1));
        assert_eq!(Poly::new(vec![ZERO]).degree(), None);
    }

    #[test]
    fn taylor_shift_matches_derivatives() {
        // p = 1 + 2ζ + 3ζ² + 4ζ³ at a = 0.5
        let p = Poly::real(&[1.0, 2.0, 3.0, 4.0]);
        let a = c(0.5);
        let t = p.taylor_at(a, 4);
        assert!((t[0] - p.eval(a)).norm() < 1e-14);
        assert!((t[1] - p.derivative().eval(a)).norm() < 1e-14);
        assert!((t[2] - p.derivative().derivative().eval(a) / 2.0).norm() < 1e-14);
        assert!((t[3] - c(4.0)).norm() < 1e-14);
        assert_eq!(t[4], ZERO);
    }

    #[test]
    fn hermite_reproduces_data() {
        let data = vec![
            (c(0.0), vec![c(1.0), c(-1.0), c(0.5)]),
            (C64::new(0.3, 0.4), vec![c(2.0), C64::new(0.0, 1.0)]),
            (c(-0.5), vec![c(0.25)]),
        ];
        let p = Poly::hermite(&data).unwrap();
        assert_eq!(p.degree(), Some(5));
        for (node, taylor) in &data {
            let got = p.taylor_at(*node, taylor.len() - 1);
            for (g, w) in got.iter().zip(taylor) {
                assert!((g - w).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn hermite_rejects_duplicates() {
        assert!(Poly::interpolate(&[c(0.1), c(0.1)], &[c(1.0), c(2.0)]).is_err());
    }

    #[test]
    fn from_roots_vanishes() {
        let r = [c(0.5), C64::new(0.0, -0.3)];
        let p = Poly::from_roots(&r);
        for z in r {
            assert!(p.eval(z).norm() < 1e-15);
        }
        assert_eq!(p.coeff(2), ONE);
    }
}
