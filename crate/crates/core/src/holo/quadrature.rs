use std::f64::consts::PI;

use crate::error::{LiftError, Result};
use crate::linalg::{CMatrix, C64, ZERO};

pub const DEFAULT_RADIUS: f64 = 0.5;
pub const DEFAULT_SAMPLES: usize = 256;

/// Derivatives `f⁽ᵏ⁾(center)`, `k = 0..count`, of a vector-valued analytic map
/// by the trapezoid rule on the circle `|ζ − center| = radius`.
pub fn cauchy_derivatives_vec<F>(
    f: F,
    center: C64,
    radius: f64,
    count: usize,
    samples: usize,
) -> Result<Vec<Vec<C64>>>
where
    F: Fn(C64) -> Vec<C64>,
{
    if samples < 4 * count || samples == 0 {
        return Err(LiftError::InvalidInput(format!(
            "{samples} quadrature samples are too few for {count} derivatives"
        )));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(LiftError::InvalidInput(format!("bad quadrature radius {radius}")));
    }
    let mut out: Vec<Vec<C64>> = Vec::new();
    for j in 0..samples {
        let theta = 2.0 * PI * j as f64 / samples as f64;
        let v = f(center + C64::from_polar(radius, theta));
        if out.is_empty() {
            out = vec![vec![ZERO; v.len()]; count];
        }
        for (k, acc) in out.iter_mut().enumerate() {
            let rot = C64::from_polar(1.0, -(k as f64) * theta);
            for (a, x) in acc.iter_mut().zip(&v) {
                *a += x * rot;
            }
        }
    }
    let mut fact = 1.0;
    for (k, acc) in out.iter_mut().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        let s = fact / (samples as f64 * radius.powi(k as i32));
        for a in acc.iter_mut() {
            *a *= s;
        }
    }
    Ok(out)
}

/// Scalar version of [`cauchy_derivatives_vec`].
pub fn cauchy_derivatives<F>(
    f: F,
    center: C64,
    radius: f64,
    count: usize,
    samples: usize,
) -> Result<Vec<C64>>
where
    F: Fn(C64) -> C64,
{
    let v = cauchy_derivatives_vec(|z| vec![f(z)], center, radius, count, samples)?;
    Ok(v.into_iter().map(|d| d[0]).collect())
}

/// Matrix version of [`cauchy_derivatives_vec`].
pub fn cauchy_derivatives_matrix<F>(
    f: F,
    center: C64,
    radius: f64,
    count: usize,
    samples: usize,
) -> Result<Vec<CMatrix>>
where
    F: Fn(C64) -> CMatrix,
{
    let n = f(center).dim();
    let flat = |z: C64| f(z).entries().collect::<Vec<_>>();
    let v = cauchy_derivatives_vec(flat, center, radius, count, samples)?;
    v.into_iter()
        .map(|d| {
            let rows: Vec<Vec<C64>> = d.chunks(n).map(|r| r.to_vec()).collect();
            CMatrix::from_rows(&rows)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn square_second_derivative() {
        let d = cauchy_derivatives(|z| z * z, ZERO, 0.5, 3, 256).unwrap();
        assert!((d[2] - c(2.0)).norm() < 1e-12);
        assert!(d[0].norm() < 1e-12);
    }

    #[test]
    fn exp_derivatives() {
        let d = cauchy_derivatives(|z| z.exp(), ZERO, 0.5, 5, 256).unwrap();
        for x in d {
            assert!((x - c(1.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn too_few_samples() {
        assert!(cauchy_derivatives(|z| z, ZERO, 0.5, 5, 19).is_err());
    }

    #[test]
    fn matrix_derivative() {
        let b = CMatrix::real(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let d = cauchy_derivatives_matrix(|z| b.scale(z), ZERO, 0.5, 2, 64).unwrap();
        assert!((d[1] - b).norm_max() < 1e-13);
    }
}
