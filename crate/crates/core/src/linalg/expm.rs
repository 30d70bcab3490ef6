use std::f64::consts::PI;

use super::{eigenvalues, CMatrix, C64};
use crate::error::{LiftError, Result};

/// `Φ_λ(X) = (X − λI)(I − λ̄X)⁻¹`.
pub fn mobius(lambda: C64, x: &CMatrix) -> Result<CMatrix> {
    let n = x.dim();
    let id = CMatrix::identity(n);
    let denom = id - x.scale(lambda.conj());
    let inv = denom.inverse()?;
    Ok((*x - id.scale(lambda)) * inv)
}

/// Matrix exponential by scaling and squaring around a truncated Taylor core.
pub fn mexp(m: &CMatrix) -> CMatrix {
    let n = m.dim();
    let norm = m.norm_1();
    let mut squarings = 0u32;
    if norm > 0.5 {
        squarings = (norm / 0.5).log2().ceil() as u32;
    }
    let scaled = m.scale(C64::new(0.5f64.powi(squarings as i32), 0.0));
    let mut term = CMatrix::identity(n);
    let mut sum = term;
    for k in 1..=20 {
        term = (term * scaled).scale(C64::new(1.0 / k as f64, 0.0));
        sum = sum + term;
        if term.norm_max() <= 1e-18 * sum.norm_max() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

fn sqrtm_db(s: &CMatrix) -> Result<CMatrix> {
    // Denman–Beavers iteration
    let half = C64::new(0.5, 0.0);
    let mut y = *s;
    let mut z = CMatrix::identity(s.dim());
    for _ in 0..100 {
        let yi = y.inverse()?;
        let zi = z.inverse()?;
        let ny = (y + zi).scale(half);
        let nz = (z + yi).scale(half);
        let delta = (ny - y).norm_max();
        y = ny;
        z = nz;
        if delta <= 1e-15 * y.norm_max() {
            break;
        }
    }
    Ok(y)
}

/// A matrix logarithm of an invertible S.
///
/// The spectrum is first rotated by a scalar `e^{−iθ}` so that no eigenvalue
/// sits near the negative real axis, then inverse scaling and squaring with
/// Denman–Beavers square roots brings the matrix close to I, where the
/// `2·atanh((M−I)(M+I)⁻¹)` series converges fast. Defective matrices are handled
/// by the same path.
pub fn mlog(s: &CMatrix) -> Result<CMatrix> {
    let n = s.dim();
    let id = CMatrix::identity(n);
    s.inverse()?;
    let eig = eigenvalues(s);
    if eig.iter().any(|e| e.norm() == 0.0) {
        return Err(LiftError::Singular);
    }
    let theta = (0..16)
        .map(|k| 2.0 * PI * k as f64 / 16.0)
        .min_by(|a, b| {
            let worst = |t: f64| {
                eig.iter()
                    .map(|e| (e * C64::from_polar(1.0, -t)).arg().abs())
                    .fold(0.0, f64::max)
            };
            worst(*a).partial_cmp(&worst(*b)).unwrap()
        })
        .unwrap();
    let mut m = s.scale(C64::from_polar(1.0, -theta));
    let mut k = 0;
    while (m - id).norm_1() > 0.25 && k < 64 {
        m = sqrtm_db(&m)?;
        k += 1;
    }
    let z = (m - id) * (m + id).inverse()?;
    let z2 = z * z;
    let mut power = z;
    let mut sum = z;
    let mut j = 1;
    loop {
        power = power * z2;
        j += 2;
        let term = power.scale(C64::new(1.0 / j as f64, 0.0));
        sum = sum + term;
        if term.norm_max() <= 1e-18 * sum.norm_max().max(1e-300) || j > 200 {
            break;
        }
    }
    let log_m = sum.scale(C64::new(2.0 * 2f64.powi(k), 0.0));
    Ok(log_m + CMatrix::scalar(n, C64::new(0.0, theta)))
}
