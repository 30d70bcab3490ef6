//! Small dense complex matrices (2×2 and 3×3) and the characteristic-polynomial
//! map σ.

mod canonical;
mod derivative;
mod eigen;
mod expm;

pub use canonical::{
    centralizer_basis, nearest_identity_transform, noncyclic_transform, rational_canonical, CanonicalPair,
    NoncyclicForm,
};
pub use derivative::{
    a_mu, commutator_reduce, gateaux_sigma, is_a_mu, sigma3_second, sigma_first_derivative,
};
pub use eigen::{
    classify, eigenvalues, polish_roots, roots_of_sigma, spectral_radius, MatrixClass,
};
pub use expm::{mexp, mlog, mobius};

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{LiftError, Result};
use crate::wire::{from_pair, to_pair, Pair};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Square complex matrix of dimension 2 or 3, stored row-major in a fixed
/// 3×3 buffer. Entries outside the `n×n` block are always zero.
#[derive(Clone, Copy, PartialEq)]
pub struct CMatrix {
    n: usize,
    a: [[C64; 3]; 3],
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n == 2 || n == 3, "only 2x2 and 3x3 matrices are supported");
        CMatrix {
            n,
            a: [[ZERO; 3]; 3],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, ONE)
    }

    pub fn scalar(n: usize, lambda: C64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i][i] = lambda;
        }
        m
    }

    pub fn diag(d: &[C64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, v) in d.iter().enumerate() {
            m.a[i][i] = *v;
        }
        m
    }

    /// Unit matrix `e_{ij}` (zero-based indices).
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n);
        m.a[i][j] = ONE;
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if n != 2 && n != 3 {
            return Err(LiftError::InvalidInput(format!(
                "matrix must be 2x2 or 3x3, got {n} rows"
            )));
        }
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(LiftError::InvalidInput(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, v) in row.iter().enumerate() {
                if !v.re.is_finite() || !v.im.is_finite() {
                    return Err(LiftError::InvalidInput(format!(
                        "entry ({i},{j}) is not finite"
                    )));
                }
                m.a[i][j] = *v;
            }
        }
        Ok(m)
    }

    /// Real matrix from row slices; panics on bad shape (test and example helper).
    pub fn real(rows: &[&[f64]]) -> Self {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows).expect("well-formed real matrix")
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.a[i][j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        debug_assert!(i < self.n && j < self.n);
        self.a[i][j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        (0..self.n)
            .map(|i| self.a[i][..self.n].to_vec())
            .collect()
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        let mut m = *self;
        for i in 0..self.n {
            for j in 0..self.n {
                m.a[i][j] = f(self.a[i][j]);
            }
        }
        m
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|x| x * s)
    }

    pub fn transpose(&self) -> Self {
        let mut m = *self;
        for i in 0..self.n {
            for j in 0..self.n {
                m.a[i][j] = self.a[j][i];
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.a[i][i]).sum()
    }

    pub fn det(&self) -> C64 {
        let a = &self.a;
        match self.n {
            2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
            _ => {
                a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                    - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                    + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
            }
        }
    }

    /// Classical adjoint: `A · adj(A) = det(A) I`.
    pub fn adjugate(&self) -> Self {
        let a = &self.a;
        let mut m = Self::zeros(self.n);
        match self.n {
            2 => {
                m.a[0][0] = a[1][1];
                m.a[0][1] = -a[0][1];
                m.a[1][0] = -a[1][0];
                m.a[1][1] = a[0][0];
            }
            _ => {
                for i in 0..3 {
                    for j in 0..3 {
                        // cofactor of (j, i)
                        let r: Vec<usize> = (0..3).filter(|&k| k != j).collect();
                        let c: Vec<usize> = (0..3).filter(|&k| k != i).collect();
                        let minor =
                            a[r[0]][c[0]] * a[r[1]][c[1]] - a[r[0]][c[1]] * a[r[1]][c[0]];
                        m.a[i][j] = if (i + j) % 2 == 0 { minor } else { -minor };
                    }
                }
            }
        }
        m
    }

    pub fn inverse(&self) -> Result<Self> {
        let d = self.det();
        let scale = self.norm_max().max(f64::MIN_POSITIVE).powi(self.n as i32);
        if d.norm() <= 1e-14 * scale || !d.is_finite() {
            return Err(LiftError::Singular);
        }
        Ok(self.adjugate().scale(d.inv()))
    }

    pub fn norm_fro(&self) -> f64 {
        self.entries().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn norm_max(&self) -> f64 {
        self.entries().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Induced 1-norm (max column sum).
    pub fn norm_1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.a[i][j].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn entries(&self) -> impl Iterator<Item = C64> + '_ {
        (0..self.n).flat_map(move |i| (0..self.n).map(move |j| self.a[i][j]))
    }

    pub fn is_finite(&self) -> bool {
        self.entries().all(|z| z.is_finite())
    }

    /// `self·x − x·self`.
    pub fn commutator(&self, x: &CMatrix) -> Self {
        *self * *x - *x * *self
    }

    /// Left action on a row vector: `v·A`.
    pub fn row_times(&self, v: &[C64; 3]) -> [C64; 3] {
        let mut out = [ZERO; 3];
        for (j, o) in out.iter_mut().enumerate().take(self.n) {
            *o = (0..self.n).map(|i| v[i] * self.a[i][j]).sum();
        }
        out
    }

    pub fn from_row_vectors(n: usize, rows: &[[C64; 3]]) -> Self {
        let mut m = Self::zeros(n);
        for (i, r) in rows.iter().enumerate().take(n) {
            m.a[i][..n].copy_from_slice(&r[..n]);
        }
        m
    }

    /// `‖S‖_F ‖S⁻¹‖_F`, infinite for singular input.
    pub fn condition_estimate(&self) -> f64 {
        match self.inverse() {
            Ok(inv) => self.norm_fro() * inv.norm_fro(),
            Err(_) => f64::INFINITY,
        }
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix{}x{} [", self.n, self.n)?;
        for i in 0..self.n {
            write!(f, "  ")?;
            for j in 0..self.n {
                let z = self.a[i][j];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Add for CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        let mut m = self;
        for i in 0..self.n {
            for j in 0..self.n {
                m.a[i][j] += rhs.a[i][j];
            }
        }
        m
    }
}

impl Sub for CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: CMatrix) -> CMatrix {
        self + (-rhs)
    }
}

impl Neg for CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.map(|z| -z)
    }
}

impl Mul for CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.a[i][j] = (0..n).map(|k| self.a[i][k] * rhs.a[k][j]).sum();
            }
        }
        m
    }
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<Pair>> = (0..self.n)
            .map(|i| (0..self.n).map(|j| to_pair(self.a[i][j])).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<Pair>>::deserialize(d)?;
        let rows: Vec<Vec<C64>> = rows
            .into_iter()
            .map(|r| r.into_iter().map(from_pair).collect())
            .collect();
        CMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// A point `(σ₁, …, σ_n)` of `Cⁿ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SymPoint {
    #[serde(with = "crate::wire::c64_vec")]
    pub s: Vec<C64>,
}

impl SymPoint {
    pub fn new(s: Vec<C64>) -> Self {
        SymPoint { s }
    }

    pub fn dim(&self) -> usize {
        self.s.len()
    }

    /// Coefficients of `tⁿ − σ₁tⁿ⁻¹ + σ₂tⁿ⁻² − …` in ascending degree.
    pub fn char_poly_ascending(&self) -> Vec<C64> {
        let n = self.s.len();
        let mut c = vec![ZERO; n + 1];
        c[n] = ONE;
        for (j, sj) in self.s.iter().enumerate() {
            let sign = if (j + 1) % 2 == 0 { 1.0 } else { -1.0 };
            c[n - j - 1] = sj * sign;
        }
        c
    }

    pub fn max_abs_diff(&self, other: &SymPoint) -> f64 {
        self.s
            .iter()
            .zip(&other.s)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn norm_max(&self) -> f64 {
        self.s.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Signed characteristic-polynomial coefficients:
/// `det(tI − A) = Σ (−1)ʲ σⱼ(A) tⁿ⁻ʲ`.
pub fn sigma(a: &CMatrix) -> SymPoint {
    let m = &a.a;
    match a.n {
        2 => SymPoint::new(vec![a.trace(), a.det()]),
        _ => {
            let s2 = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2]
                - m[0][2] * m[2][0]
                + m[1][1] * m[2][2]
                - m[1][2] * m[2][1];
            SymPoint::new(vec![a.trace(), s2, a.det()])
        }
    }
}

/// Companion matrix with last row `(…, σ₃, −σ₂, σ₁)` and ones on the superdiagonal.
pub fn companion(s: &SymPoint) -> CMatrix {
    let n = s.dim();
    let mut m = CMatrix::zeros(n);
    for i in 0..n - 1 {
        m.set(i, i + 1, ONE);
    }
    for j in 0..n {
        // bottom-row entry in column n-1-j is (−1)^j σ_{j+1}
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        m.set(n - 1, n - 1 - j, s.s[j] * sign);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn sigma_of_zero_and_scalar() {
        assert_eq!(sigma(&CMatrix::zeros(3)).s, vec![ZERO; 3]);
        let lam = C64::new(0.3, -0.2);
        let s = sigma(&CMatrix::scalar(3, lam));
        let want = [lam * 3.0, lam * lam * 3.0, lam * lam * lam];
        for (a, b) in s.s.iter().zip(want) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn sigma_of_diag_0_0_mu() {
        let mu = c(0.7);
        let s = sigma(&CMatrix::diag(&[ZERO, ZERO, mu]));
        assert_eq!(s.s, vec![mu, ZERO, ZERO]);
    }

    #[test]
    fn companion_has_requested_sigma() {
        let s = SymPoint::new(vec![c(0.6), c(0.11), c(0.006)]);
        let back = sigma(&companion(&s));
        assert!(back.max_abs_diff(&s) < 1e-15);
        let s2 = SymPoint::new(vec![C64::new(0.1, 0.2), c(-0.3)]);
        assert!(sigma(&companion(&s2)).max_abs_diff(&s2) < 1e-15);
    }

    #[test]
    fn adjugate_and_inverse() {
        let a = CMatrix::real(&[&[2.0, 1.0, 0.0], &[0.5, 3.0, 1.0], &[1.0, 0.0, 1.0]]);
        let prod = a * a.inverse().unwrap();
        assert!((prod - CMatrix::identity(3)).norm_max() < 1e-14);
        assert_eq!(CMatrix::zeros(2).inverse(), Err(LiftError::Singular));
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(CMatrix::from_rows(&[vec![ONE]]).is_err());
        assert!(CMatrix::from_rows(&[vec![ONE, ONE], vec![ONE]]).is_err());
        assert!(CMatrix::from_rows(&[vec![ONE, C64::new(f64::NAN, 0.0)], vec![ONE, ONE]]).is_err());
    }

    #[test]
    fn char_poly_sign_convention() {
        // (t-1)(t-2)(t-3) = t^3 - 6t^2 + 11t - 6
        let s = sigma(&CMatrix::diag(&[c(1.0), c(2.0), c(3.0)]));
        let p = s.char_poly_ascending();
        let want = [c(-6.0), c(11.0), c(-6.0), c(1.0)];
        for (a, b) in p.iter().zip(want) {
            assert!((a - b).norm() < 1e-13);
        }
    }
}
