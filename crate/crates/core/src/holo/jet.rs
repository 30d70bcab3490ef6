use serde::{Deserialize, Serialize};

use crate::linalg::{C64, ONE, ZERO};

/// Truncated Taylor expansion `Σ_{k≤K} aₖ (ζ − center)ᵏ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jet {
    #[serde(with = "crate::wire::c64")]
    pub center: C64,
    #[serde(with = "crate::wire::c64_vec")]
    pub coeffs: Vec<C64>,
}

impl Jet {
    pub fn new(center: C64, coeffs: Vec<C64>) -> Self {
        Jet { center, coeffs }
    }

    pub fn constant(center: C64, c: C64, order: usize) -> Self {
        let mut coeffs = vec![ZERO; order + 1];
        coeffs[0] = c;
        Jet { center, coeffs }
    }

    /// Jet of `ζ ↦ ζ` at `center`.
    pub fn variable(center: C64, order: usize) -> Self {
        let mut j = Jet::constant(center, center, order);
        if order >= 1 {
            j.coeffs[1] = ONE;
        }
        j
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn truncate(mut self, order: usize) -> Self {
        self.coeffs.truncate(order + 1);
        self
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn add(&self, rhs: &Jet) -> Jet {
        let k = self.order().min(rhs.order());
        Jet::new(
            self.center,
            (0..=k).map(|i| self.coeffs[i] + rhs.coeffs[i]).collect(),
        )
    }

    pub fn neg(&self) -> Jet {
        Jet::new(self.center, self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn sub(&self, rhs: &Jet) -> Jet {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, s: C64) -> Jet {
        Jet::new(self.center, self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, rhs: &Jet) -> Jet {
        let k = self.order().min(rhs.order());
        let coeffs = (0..=k)
            .map(|n| (0..=n).map(|i| self.coeffs[i] * rhs.coeffs[n - i]).sum())
            .collect();
        Jet::new(self.center, coeffs)
    }

    /// `exp` via `k·bₖ = Σ_{j=1..k} j·aⱼ·b_{k−j}`.
    pub fn exp(&self) -> Jet {
        let k = self.order();
        let mut b = vec![ZERO; k + 1];
        b[0] = self.coeffs[0].exp();
        for n in 1..=k {
            let s: C64 = (1..=n)
                .map(|j| self.coeffs[j] * b[n - j] * j as f64)
                .sum();
            b[n] = s / n as f64;
        }
        Jet::new(self.center, b)
    }

    /// Quotient by a jet with nonzero constant term.
    pub fn div(&self, rhs: &Jet) -> Jet {
        let k = self.order().min(rhs.order());
        let mut q = vec![ZERO; k + 1];
        for n in 0..=k {
            let s: C64 = (1..=n).map(|j| rhs.coeffs[j] * q[n - j]).sum();
            q[n] = (self.coeffs[n] - s) / rhs.coeffs[0];
        }
        Jet::new(self.center, q)
    }

    /// Drops the first `m` coefficients (division by `(ζ − center)ᵐ`).
    pub fn shift_down(&self, m: usize) -> Jet {
        Jet::new(self.center, self.coeffs[m..].to_vec())
    }

    /// Evaluates the truncated series at `center + h`.
    pub fn eval_offset(&self, h: C64) -> C64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * h + c)
    }

    /// `k!·aₖ`.
    pub fn derivative(&self, k: usize) -> C64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.coeffs[k] * fact
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn exp_of_square() {
        let z = Jet::variable(ZERO, 4);
        let e = z.mul(&z).exp();
        let want = [1.0, 0.0, 1.0, 0.0, 0.5];
        for (g, w) in e.coeffs.iter().zip(want) {
            assert!((g - c(w)).norm() < 1e-15);
        }
    }

    #[test]
    fn division_inverts_multiplication() {
        let a = Jet::new(ZERO, vec![c(1.0), c(2.0), c(-1.0), c(0.5)]);
        let b = Jet::new(ZERO, vec![c(2.0), c(0.3), c(0.0), c(1.0)]);
        let back = a.mul(&b).div(&b);
        for (g, w) in back.coeffs.iter().zip(&a.coeffs) {
            assert!((g - w).norm() < 1e-14);
        }
    }

    #[test]
    fn derivative_factorials() {
        let j = Jet::new(ZERO, vec![c(0.0), c(0.0), c(1.0)]);
        assert_eq!(j.derivative(2), c(2.0));
    }
}
