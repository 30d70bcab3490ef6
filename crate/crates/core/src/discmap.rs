//! Matrix-valued analytic discs: a core matrix of entire expressions followed
//! by a chain of σ-preserving conjugations (and, for the Carathéodory–Fejér
//! reduction, one Möbius automorphism of the spectral ball).

use serde::{Deserialize, Serialize};

use crate::error::{LiftError, Result};
use crate::holo::{HoloExpr, Poly};
use crate::linalg::{mexp, mobius, CMatrix, C64, ZERO};

/// One step applied to the matrix produced by the previous step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "factor", rename_all = "snake_case")]
pub enum ChainFactor {
    /// `M ↦ e^{−ζX}·M·e^{ζX}`.
    ExpLinear { x: CMatrix },
    /// `M ↦ e^{−F(ζ)}·M·e^{F(ζ)}` with F a matrix of polynomials (row-major).
    ExpPoly { n: usize, f: Vec<Poly> },
    /// `M ↦ S⁻¹·M·S`.
    Similarity { s: CMatrix, s_inv: CMatrix },
    /// `M ↦ Mᵀ`.
    Transpose,
    /// `M ↦ (M + λI)(I + λ̄M)⁻¹`, the inverse of `X ↦ (X − λI)(I − λ̄X)⁻¹`.
    Mobius {
        #[serde(with = "crate::wire::c64")]
        lambda: C64,
    },
}

impl ChainFactor {
    pub fn similarity(s: CMatrix) -> Result<Self> {
        let s_inv = s.inverse()?;
        Ok(ChainFactor::Similarity { s, s_inv })
    }

    pub fn preserves_sigma(&self) -> bool {
        !matches!(self, ChainFactor::Mobius { .. })
    }

    pub fn apply(&self, m: &CMatrix, z: C64) -> Result<CMatrix> {
        Ok(match self {
            ChainFactor::ExpLinear { x } => {
                let e = mexp(&x.scale(z));
                let ei = mexp(&x.scale(-z));
                ei * *m * e
            }
            ChainFactor::ExpPoly { n, f } => {
                let rows: Vec<Vec<C64>> = f
                    .chunks(*n)
                    .map(|r| r.iter().map(|p| p.eval(z)).collect())
                    .collect();
                let fz = CMatrix::from_rows(&rows)?;
                mexp(&-fz) * *m * mexp(&fz)
            }
            ChainFactor::Similarity { s, s_inv } => *s_inv * *m * *s,
            ChainFactor::Transpose => m.transpose(),
            ChainFactor::Mobius { lambda } => mobius(-*lambda, m)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscMap {
    pub schema_version: String,
    pub n: usize,
    /// Row-major `n×n` core entries.
    pub entries: Vec<HoloExpr>,
    pub chain: Vec<ChainFactor>,
}

impl DiscMap {
    pub fn new(n: usize, entries: Vec<HoloExpr>) -> Result<Self> {
        if entries.len() != n * n || !(n == 2 || n == 3) {
            return Err(LiftError::DimensionMismatch {
                expected: n * n,
                got: entries.len(),
            });
        }
        Ok(DiscMap {
            schema_version: "1".into(),
            n,
            entries,
            chain: Vec::new(),
        })
    }

    /// Builds a map from an `n×n` grid of expressions.
    pub fn from_grid(grid: Vec<Vec<HoloExpr>>) -> Result<Self> {
        let n = grid.len();
        DiscMap::new(n, grid.into_iter().flatten().collect())
    }

    pub fn push(&mut self, f: ChainFactor) {
        self.chain.push(f);
    }

    pub fn entry(&self, i: usize, j: usize) -> &HoloExpr {
        &self.entries[i * self.n + j]
    }

    /// Core matrix before any chain factor.
    pub fn core_eval(&self, z: C64) -> CMatrix {
        let mut m = CMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m.set(i, j, self.entry(i, j).eval(z));
            }
        }
        m
    }

    /// Full evaluation `ψ(ζ)`.
    pub fn eval(&self, z: C64) -> Result<CMatrix> {
        self.chain
            .iter()
            .try_fold(self.core_eval(z), |m, f| f.apply(&m, z))
    }

    /// Evaluation with Möbius factors skipped: the σ-equivalent map in the
    /// normalized coordinates where `σ∘ψ = φ` is checked.
    pub fn eval_base(&self, z: C64) -> Result<CMatrix> {
        self.chain
            .iter()
            .filter(|f| f.preserves_sigma())
            .try_fold(self.core_eval(z), |m, f| f.apply(&m, z))
    }

    pub fn has_mobius(&self) -> bool {
        self.chain.iter().any(|f| !f.preserves_sigma())
    }

    /// Polynomial coefficients of each core entry when every entry is a
    /// polynomial (used to compare with closed forms).
    pub fn core_polynomials(&self) -> Option<Vec<Poly>> {
        self.entries
            .iter()
            .map(|e| match e {
                HoloExpr::Constant { value } => Some(Poly::constant(*value)),
                HoloExpr::Monomial { power } => Some(Poly::monomial(*power as usize, C64::new(1.0, 0.0))),
                HoloExpr::Poly { poly } => Some(poly.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn is_zero_entry(&self, i: usize, j: usize) -> bool {
        matches!(self.entry(i, j), HoloExpr::Constant { value } if *value == ZERO)
    }
}

/// `conjugate_chain_apply`: evaluates the map at ζ.
pub fn conjugate_chain_apply(map: &DiscMap, z: C64) -> Result<CMatrix> {
    map.eval(z)
}
