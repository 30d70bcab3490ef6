//! Polynomial analytic discs `φ = (φ₁, …, φ_n)` into the symmetrized domain.

use serde::{Deserialize, Serialize};

use crate::error::{LiftError, Result};
use crate::holo::{HoloExpr, Poly};
use crate::linalg::{SymPoint, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Phi {
    pub components: Vec<Poly>,
}

impl Phi {
    pub fn new(components: Vec<Poly>) -> Result<Self> {
        if components.len() != 2 && components.len() != 3 {
            return Err(LiftError::InvalidInput(format!(
                "phi must have 2 or 3 components, got {}",
                components.len()
            )));
        }
        if components.iter().any(|p| p.coeffs().iter().any(|c| !c.is_finite())) {
            return Err(LiftError::InvalidInput("phi has non-finite coefficients".into()));
        }
        Ok(Phi { components })
    }

    /// Components from ascending real coefficient lists.
    pub fn real(components: &[&[f64]]) -> Self {
        Phi {
            components: components.iter().map(|c| Poly::real(c)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// Largest degree among the components (0 for all-zero).
    pub fn degree(&self) -> usize {
        self.components
            .iter()
            .filter_map(|p| p.degree())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, z: C64) -> SymPoint {
        SymPoint::new(self.components.iter().map(|p| p.eval(z)).collect())
    }

    /// Taylor coefficient `φ_c⁽ᵏ⁾(a)/k!` (component index c is 0-based).
    pub fn taylor(&self, c: usize, a: C64, k: usize) -> C64 {
        self.components[c].taylor_at(a, k)[k]
    }

    pub fn max_coeff(&self) -> f64 {
        self.components.iter().map(|p| p.max_abs()).fold(0.0, f64::max)
    }

    pub fn expr(&self, c: usize) -> HoloExpr {
        HoloExpr::poly(self.components[c].clone())
    }

    /// Coefficients of all components padded to `degree + 1` and concatenated.
    pub fn to_vector(&self, degree: usize) -> Vec<C64> {
        self.components
            .iter()
            .flat_map(|p| (0..=degree).map(move |m| p.coeff(m)))
            .collect()
    }

    pub fn from_vector(n: usize, degree: usize, v: &[C64]) -> Self {
        Phi {
            components: v.chunks(degree + 1).take(n).map(|c| Poly::new(c.to_vec())).collect(),
        }
    }
}
