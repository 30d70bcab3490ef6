use serde::{Deserialize, Serialize};

use super::{sigma, CMatrix, SymPoint, C64, ONE, ZERO};

/// Relative tolerance for "two eigenvalues coincide" and for numerical rank.
pub const CLASS_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum MatrixClass {
    Scalar {
        #[serde(with = "crate::wire::c64")]
        lambda: C64,
    },
    /// Only for n = 3: spectrum `{λ, λ, μ}` with minimal polynomial `(t−λ)(t−μ)`.
    NonCyclicNonScalar {
        #[serde(with = "crate::wire::c64")]
        lambda: C64,
        #[serde(with = "crate::wire::c64")]
        mu: C64,
    },
    Cyclic,
}

impl MatrixClass {
    pub fn name(&self) -> &'static str {
        match self {
            MatrixClass::Scalar { .. } => "scalar",
            MatrixClass::NonCyclicNonScalar { .. } => "noncyclic",
            MatrixClass::Cyclic => "cyclic",
        }
    }
}

fn eval_poly(c: &[C64], t: C64) -> (C64, C64) {
    // value and derivative by Horner
    let mut p = ZERO;
    let mut dp = ZERO;
    for &a in c.iter().rev() {
        dp = dp * t + p;
        p = p * t + a;
    }
    (p, dp)
}

/// One guarded Newton step per root on the ascending-coefficient polynomial `c`.
pub fn polish_roots(c: &[C64], roots: &mut [C64]) {
    for r in roots.iter_mut() {
        let (p, dp) = eval_poly(c, *r);
        if dp.norm() <= f64::EPSILON * (1.0 + r.norm()) {
            continue;
        }
        let cand = *r - p / dp;
        if cand.is_finite() && eval_poly(c, cand).0.norm() < p.norm() {
            *r = cand;
        }
    }
}

fn quadratic_roots(s1: C64, s2: C64) -> [C64; 2] {
    // t² − s1 t + s2
    let disc = (s1 * s1 - s2 * 4.0).sqrt();
    // avoid cancellation: pick the larger-magnitude root first
    let q = if (s1 + disc).norm() >= (s1 - disc).norm() {
        (s1 + disc) * 0.5
    } else {
        (s1 - disc) * 0.5
    };
    if q.norm() == 0.0 {
        return [ZERO, ZERO];
    }
    [q, s2 / q]
}

fn cubic_roots(s: &SymPoint) -> [C64; 3] {
    // t³ + a t² + b t + c
    let (a, b, c) = (-s.s[0], s.s[1], -s.s[2]);
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = a * a * a * (2.0 / 27.0) - a * b / 3.0 + c;
    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let u3 = if (-q / 2.0 + disc).norm() >= (-q / 2.0 - disc).norm() {
        -q / 2.0 + disc
    } else {
        -q / 2.0 - disc
    };
    let omega = C64::new(-0.5, 3f64.sqrt() / 2.0);
    let mut out = [ZERO; 3];
    if u3.norm() == 0.0 {
        // p = q = 0: triple root
        return [-shift; 3];
    }
    let u = u3.powf(1.0 / 3.0);
    let mut w = ONE;
    for r in out.iter_mut() {
        let uk = u * w;
        *r = uk - p / (uk * 3.0) - shift;
        w *= omega;
    }
    out
}

fn sort_lex(v: &mut [C64]) {
    v.sort_by(|x, y| {
        x.re.partial_cmp(&y.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.im.partial_cmp(&y.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}

/// Roots of the monic polynomial `tⁿ − s₁tⁿ⁻¹ + s₂tⁿ⁻² (− s₃)` (n = 2, 3),
/// closed form plus one Newton polish, sorted lexicographically by (re, im).
pub fn roots_of_sigma(s: &SymPoint) -> Vec<C64> {
    let mut r: Vec<C64> = match s.dim() {
        2 => quadratic_roots(s.s[0], s.s[1]).to_vec(),
        3 => cubic_roots(s).to_vec(),
        d => panic!("unsupported dimension {d}"),
    };
    polish_roots(&s.char_poly_ascending(), &mut r);
    sort_lex(&mut r);
    r
}

/// Eigenvalues with multiplicity.
pub fn eigenvalues(a: &CMatrix) -> Vec<C64> {
    roots_of_sigma(&sigma(a))
}

pub fn spectral_radius(a: &CMatrix) -> f64 {
    eigenvalues(a).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn frob_inner(x: &CMatrix, y: &CMatrix) -> C64 {
    // <x, y> = Σ x_ij conj(y_ij)
    x.entries().zip(y.entries()).map(|(a, b)| a * b.conj()).sum()
}

/// Scalar / non-cyclic non-scalar / cyclic.
///
/// Scalar is decided by `‖A − (trA/n)I‖`. For n = 3, a non-scalar matrix is
/// non-cyclic iff `A²` lies in `span(I, A)`, i.e. its minimal polynomial is
/// quadratic; the roots of that polynomial give `{λ, μ}` and `λ` is the one
/// with `2λ + μ = tr A`.
pub fn classify(a: &CMatrix) -> MatrixClass {
    let n = a.dim();
    let scale = 1.0 + a.norm_fro();
    let m = a.trace() / n as f64;
    let a0 = *a - CMatrix::scalar(n, m);
    if a0.norm_fro() <= CLASS_TOL * scale {
        return MatrixClass::Scalar { lambda: m };
    }
    if n == 2 {
        return MatrixClass::Cyclic;
    }
    let a2 = *a * *a;
    let x = frob_inner(&a2, &a0) / frob_inner(&a0, &a0);
    let y = a2.trace() / 3.0;
    let resid = a2 - a0.scale(x) - CMatrix::identity(3).scale(y);
    if resid.norm_fro() > CLASS_TOL * scale * scale {
        return MatrixClass::Cyclic;
    }
    // A² = x A + (y − x m) I
    let y0 = y - x * m;
    let [r1, r2] = quadratic_roots(x, -y0);
    let tr = a.trace();
    let (lambda, mu) = if (r1 * 2.0 + r2 - tr).norm() <= (r2 * 2.0 + r1 - tr).norm() {
        (r1, r2)
    } else {
        (r2, r1)
    };
    MatrixClass::NonCyclicNonScalar { lambda, mu }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::companion;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn assert_multiset_eq(got: &[C64], want: &[C64], tol: f64) {
        let mut used = vec![false; want.len()];
        for g in got {
            let k = (0..want.len())
                .filter(|&k| !used[k])
                .min_by(|&i, &j| {
                    (want[i] - g).norm().partial_cmp(&(want[j] - g).norm()).unwrap()
                })
                .unwrap();
            assert!((want[k] - g).norm() < tol, "{got:?} vs {want:?}");
            used[k] = true;
        }
    }

    #[test]
    fn eigenvalues_of_diagonal() {
        let e = eigenvalues(&CMatrix::diag(&[c(0.1), c(0.2), c(0.3)]));
        assert_multiset_eq(&e, &[c(0.1), c(0.2), c(0.3)], 1e-14);
    }

    #[test]
    fn eigenvalues_of_cube_roots() {
        let comp = companion(&SymPoint::new(vec![ZERO, ZERO, c(0.125)]));
        let w = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let want = [c(0.5), w * 0.5, w * w * 0.5];
        assert_multiset_eq(&eigenvalues(&comp), &want, 1e-14);
    }

    #[test]
    fn nilpotent_has_zero_spectrum() {
        assert_eq!(eigenvalues(&CMatrix::real(&[&[0.0, 1.0], &[0.0, 0.0]])), vec![ZERO; 2]);
        assert_eq!(spectral_radius(&CMatrix::real(&[&[0.0, 4.0], &[0.0, 0.0]])), 0.0);
        assert_eq!(spectral_radius(&CMatrix::zeros(3)), 0.0);
    }

    #[test]
    fn spectral_radius_of_diag() {
        let a = CMatrix::diag(&[c(0.3), C64::new(0.0, -0.8), c(0.1)]);
        assert!((spectral_radius(&a) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn classify_examples() {
        let lam = c(0.3);
        assert_eq!(classify(&CMatrix::scalar(3, lam)), MatrixClass::Scalar { lambda: lam });
        let amu = CMatrix::real(&[&[0.0, 0.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 0.5]]);
        match classify(&amu) {
            MatrixClass::NonCyclicNonScalar { lambda, mu } => {
                assert!(lambda.norm() < 1e-12);
                assert!((mu - 0.5).norm() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        let comp = companion(&SymPoint::new(vec![c(0.2), c(0.0), c(0.0)]));
        assert_eq!(classify(&comp), MatrixClass::Cyclic);
        assert_eq!(classify(&CMatrix::real(&[&[0.0, 1.0], &[0.0, 0.0]])), MatrixClass::Cyclic);
    }

    #[test]
    fn classify_jordan_plus_block_with_equal_eigenvalues() {
        // J2(λ) ⊕ (λ) is non-cyclic with λ = μ
        let a = CMatrix::real(&[&[0.4, 1.0, 0.0], &[0.0, 0.4, 0.0], &[0.0, 0.0, 0.4]]);
        match classify(&a) {
            MatrixClass::NonCyclicNonScalar { lambda, mu } => {
                assert!((lambda - 0.4).norm() < 1e-10);
                assert!((mu - 0.4).norm() < 1e-10);
            }
            other => panic!("{other:?}"),
        }
        // J3(λ) is cyclic
        let j3 = CMatrix::real(&[&[0.4, 1.0, 0.0], &[0.0, 0.4, 1.0], &[0.0, 0.0, 0.4]]);
        assert_eq!(classify(&j3), MatrixClass::Cyclic);
    }
}
