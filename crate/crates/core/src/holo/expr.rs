use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Jet, Poly};
use crate::error::{LiftError, Result};
use crate::linalg::{C64, ONE, ZERO};

/// Relative tolerance for "this Taylor coefficient is zero".
pub const DIV_TOL: f64 = 1e-9;

/// Default jet order cap.
pub const JET_CAP: usize = 8;

const CONTOUR_EVAL_SAMPLES: usize = 64;
const CONTOUR_JET_SAMPLES: usize = 128;

/// A zero of a denominator, with multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Singularity {
    #[serde(with = "crate::wire::c64")]
    pub point: C64,
    pub order: usize,
}

impl Singularity {
    pub fn new(point: C64, order: usize) -> Self {
        Singularity { point, order }
    }
}

/// Expression tree for a scalar function holomorphic on (at least) the unit disc.
///
/// `Div` nodes list every zero of the denominator with its order; the
/// numerator is checked to vanish to the same order when the node is built, so
/// each quotient has only removable singularities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum HoloExpr {
    Constant {
        #[serde(with = "crate::wire::c64")]
        value: C64,
    },
    Monomial {
        power: u32,
    },
    Poly {
        poly: Poly,
    },
    Exp {
        arg: Arc<HoloExpr>,
    },
    Add {
        lhs: Arc<HoloExpr>,
        rhs: Arc<HoloExpr>,
    },
    Mul {
        lhs: Arc<HoloExpr>,
        rhs: Arc<HoloExpr>,
    },
    Neg {
        arg: Arc<HoloExpr>,
    },
    Div {
        num: Arc<HoloExpr>,
        den: Arc<HoloExpr>,
        singularities: Vec<Singularity>,
    },
}

fn near(a: C64, b: C64) -> bool {
    (a - b).norm() <= 1e-13 * (1.0 + a.norm())
}

/// Contour radius around each singularity: small enough that the circle keeps
/// clear of the other listed points.
fn contour_radius(sing: &[Singularity], idx: usize) -> f64 {
    let p = sing[idx].point;
    sing.iter()
        .enumerate()
        .filter(|&(j, _)| j != idx)
        .map(|(_, s)| 0.45 * (s.point - p).norm())
        .fold(0.5, f64::min)
}

fn circle(p: C64, rho: f64, samples: usize) -> impl Iterator<Item = C64> {
    (0..samples).map(move |k| p + C64::from_polar(rho, 2.0 * PI * k as f64 / samples as f64))
}

impl HoloExpr {
    pub fn constant(c: C64) -> Self {
        HoloExpr::Constant { value: c }
    }

    pub fn zero() -> Self {
        HoloExpr::constant(ZERO)
    }

    pub fn one() -> Self {
        HoloExpr::constant(ONE)
    }

    pub fn monomial(k: u32) -> Self {
        HoloExpr::Monomial { power: k }
    }

    /// `c·ζᵏ`.
    pub fn term(c: C64, k: usize) -> Self {
        HoloExpr::poly(Poly::monomial(k, c))
    }

    pub fn poly(p: Poly) -> Self {
        match p.degree() {
            None => HoloExpr::zero(),
            Some(0) => HoloExpr::constant(p.coeff(0)),
            _ => HoloExpr::Poly { poly: p },
        }
    }

    pub fn exp(arg: HoloExpr) -> Self {
        match arg {
            HoloExpr::Constant { value } => HoloExpr::constant(value.exp()),
            arg => HoloExpr::Exp { arg: Arc::new(arg) },
        }
    }

    pub fn is_zero_constant(&self) -> bool {
        matches!(self, HoloExpr::Constant { value } if *value == ZERO)
    }

    pub fn is_one_constant(&self) -> bool {
        matches!(self, HoloExpr::Constant { value } if *value == ONE)
    }

    /// Checked quotient: for every listed singularity the denominator vanishes
    /// to exactly the given order and the numerator to at least that order.
    pub fn div(num: HoloExpr, den: HoloExpr, singularities: Vec<Singularity>) -> Result<Self> {
        HoloExpr::div_labeled(num, den, singularities, "divisibility")
    }

    /// As [`HoloExpr::div`]; a numerator order deficit is reported as
    /// `NotDivisible { label }`.
    pub fn div_labeled(
        num: HoloExpr,
        den: HoloExpr,
        singularities: Vec<Singularity>,
        label: &str,
    ) -> Result<Self> {
        for s in &singularities {
            let dj = den.jet(s.point, s.order)?;
            let dscale = 1.0 + dj.max_abs();
            if let Some(k) = (0..s.order).find(|&k| dj.coeffs[k].norm() > DIV_TOL * dscale) {
                return Err(LiftError::InvalidInput(format!(
                    "denominator does not vanish to order {} at ({}, {}); coefficient {k} is nonzero",
                    s.order, s.point.re, s.point.im
                )));
            }
            if dj.coeffs[s.order].norm() <= DIV_TOL * dscale {
                return Err(LiftError::InvalidInput(format!(
                    "denominator vanishes to order > {} at ({}, {})",
                    s.order, s.point.re, s.point.im
                )));
            }
            require_order(&num, s.point, s.order, label)?;
        }
        if singularities.is_empty() {
            if den.is_one_constant() {
                return Ok(num);
            }
            if let HoloExpr::Constant { value } = den {
                if value == ZERO {
                    return Err(LiftError::Singular);
                }
                return Ok(num * HoloExpr::constant(value.inv()));
            }
        }
        Ok(HoloExpr::Div {
            num: Arc::new(num),
            den: Arc::new(den),
            singularities,
        })
    }

    pub fn eval(&self, z: C64) -> C64 {
        match self {
            HoloExpr::Constant { value } => *value,
            HoloExpr::Monomial { power } => z.powu(*power),
            HoloExpr::Poly { poly } => poly.eval(z),
            HoloExpr::Exp { arg } => arg.eval(z).exp(),
            HoloExpr::Add { lhs, rhs } => lhs.eval(z) + rhs.eval(z),
            HoloExpr::Mul { lhs, rhs } => lhs.eval(z) * rhs.eval(z),
            HoloExpr::Neg { arg } => -arg.eval(z),
            HoloExpr::Div {
                num,
                den,
                singularities,
            } => {
                for (i, s) in singularities.iter().enumerate() {
                    let rho = contour_radius(singularities, i);
                    if (z - s.point).norm() < 0.5 * rho {
                        // Cauchy integral over a circle where the quotient is well conditioned
                        let total: C64 = circle(s.point, rho, CONTOUR_EVAL_SAMPLES)
                            .map(|w| num.eval(w) / den.eval(w) * (w - s.point) / (w - z))
                            .sum();
                        return total / CONTOUR_EVAL_SAMPLES as f64;
                    }
                }
                num.eval(z) / den.eval(z)
            }
        }
    }

    /// Taylor coefficients `f⁽ᵏ⁾(center)/k!`, `k = 0..=order`.
    pub fn jet(&self, center: C64, order: usize) -> Result<Jet> {
        Ok(match self {
            HoloExpr::Constant { value } => Jet::constant(center, *value, order),
            HoloExpr::Monomial { power } => {
                let p = Poly::monomial(*power as usize, ONE);
                Jet::new(center, p.taylor_at(center, order))
            }
            HoloExpr::Poly { poly } => Jet::new(center, poly.taylor_at(center, order)),
            HoloExpr::Exp { arg } => arg.jet(center, order)?.exp(),
            HoloExpr::Add { lhs, rhs } => lhs.jet(center, order)?.add(&rhs.jet(center, order)?),
            HoloExpr::Mul { lhs, rhs } => lhs.jet(center, order)?.mul(&rhs.jet(center, order)?),
            HoloExpr::Neg { arg } => arg.jet(center, order)?.neg(),
            HoloExpr::Div {
                num,
                den,
                singularities,
            } => {
                for (i, s) in singularities.iter().enumerate() {
                    if near(center, s.point) {
                        let m = s.order;
                        let nj = num.jet(center, order + m)?;
                        check_vanishing(&nj, m, center, "divisibility")?;
                        let dj = den.jet(center, order + m)?;
                        return Ok(nj.shift_down(m).div(&dj.shift_down(m)));
                    }
                    let rho = contour_radius(singularities, i);
                    if (center - s.point).norm() < 0.5 * rho {
                        let mut coeffs = vec![ZERO; order + 1];
                        for w in circle(s.point, rho, CONTOUR_JET_SAMPLES) {
                            let q = num.eval(w) / den.eval(w) * (w - s.point);
                            let mut denom = w - center;
                            for c in coeffs.iter_mut() {
                                *c += q / denom;
                                denom *= w - center;
                            }
                        }
                        for c in coeffs.iter_mut() {
                            *c /= CONTOUR_JET_SAMPLES as f64;
                        }
                        return Ok(Jet::new(center, coeffs));
                    }
                }
                num.jet(center, order)?.div(&den.jet(center, order)?)
            }
        })
    }

    /// `f⁽ᵏ⁾(a)`.
    pub fn derivative_at(&self, a: C64, k: usize) -> Result<C64> {
        Ok(self.jet(a, k)?.derivative(k))
    }

    /// Smallest k with a non-negligible Taylor coefficient at `a`, or
    /// `JET_CAP + 1` meaning "at least that".
    pub fn order_of_vanishing(&self, a: C64) -> Result<usize> {
        let j = self.jet(a, JET_CAP)?;
        let scale = 1.0 + j.max_abs();
        Ok((0..=JET_CAP)
            .find(|&k| j.coeffs[k].norm() > DIV_TOL * scale)
            .unwrap_or(JET_CAP + 1))
    }

    /// Structural check that the expression extends to an entire function:
    /// every denominator is a product of polynomials, constants and
    /// exponentials whose polynomial part has exactly the declared zeros.
    pub fn is_entire_on_plane(&self) -> bool {
        match self {
            HoloExpr::Constant { .. } | HoloExpr::Monomial { .. } | HoloExpr::Poly { .. } => true,
            HoloExpr::Exp { arg } | HoloExpr::Neg { arg } => arg.is_entire_on_plane(),
            HoloExpr::Add { lhs, rhs } | HoloExpr::Mul { lhs, rhs } => {
                lhs.is_entire_on_plane() && rhs.is_entire_on_plane()
            }
            HoloExpr::Div {
                num,
                den,
                singularities,
            } => {
                if !num.is_entire_on_plane() || !den.is_entire_on_plane() {
                    return false;
                }
                let Some(p) = den.polynomial_factor() else {
                    return false;
                };
                let roots: Vec<C64> = singularities
                    .iter()
                    .flat_map(|s| std::iter::repeat_n(s.point, s.order))
                    .collect();
                let Some(deg) = p.degree() else {
                    return false;
                };
                if deg != roots.len() {
                    return false;
                }
                let expect = Poly::from_roots(&roots).scale(p.coeff(deg));
                let diff = (&p - &expect).max_abs();
                diff <= 1e-10 * (1.0 + p.max_abs())
            }
        }
    }

    /// If the expression is a product of polynomials, constants and
    /// exponentials, the product of its polynomial/constant factors.
    fn polynomial_factor(&self) -> Option<Poly> {
        match self {
            HoloExpr::Constant { value } => Some(Poly::constant(*value)),
            HoloExpr::Monomial { power } => Some(Poly::monomial(*power as usize, ONE)),
            HoloExpr::Poly { poly } => Some(poly.clone()),
            HoloExpr::Exp { .. } => Some(Poly::constant(ONE)),
            HoloExpr::Neg { arg } => arg.polynomial_factor().map(|p| -&p),
            HoloExpr::Mul { lhs, rhs } => Some(&lhs.polynomial_factor()? * &rhs.polynomial_factor()?),
            _ => None,
        }
    }
}

fn check_vanishing(j: &Jet, m: usize, at: C64, label: &str) -> Result<()> {
    let scale = 1.0 + j.max_abs();
    if let Some(k) = (0..m).find(|&k| j.coeffs[k].norm() > DIV_TOL * scale) {
        return Err(LiftError::NotDivisible {
            point: at,
            label: label.to_string(),
            residual: j.coeffs[k].norm(),
        });
    }
    Ok(())
}

/// Fails with `NotDivisible { label }` unless `e` vanishes to order ≥ `k` at `a`.
pub fn require_order(e: &HoloExpr, a: C64, k: usize, label: &str) -> Result<()> {
    if k == 0 {
        return Ok(());
    }
    let j = e.jet(a, k.max(JET_CAP))?;
    check_vanishing(&j, k, a, label)
}

impl Add for HoloExpr {
    type Output = HoloExpr;
    fn add(self, rhs: HoloExpr) -> HoloExpr {
        if self.is_zero_constant() {
            return rhs;
        }
        if rhs.is_zero_constant() {
            return self;
        }
        match (&self, &rhs) {
            (HoloExpr::Constant { value: a }, HoloExpr::Constant { value: b }) => {
                HoloExpr::constant(a + b)
            }
            (HoloExpr::Poly { poly: a }, HoloExpr::Poly { poly: b }) => HoloExpr::poly(a + b),
            (HoloExpr::Poly { poly: a }, HoloExpr::Constant { value: b })
            | (HoloExpr::Constant { value: b }, HoloExpr::Poly { poly: a }) => {
                HoloExpr::poly(a + &Poly::constant(*b))
            }
            _ => HoloExpr::Add {
                lhs: Arc::new(self),
                rhs: Arc::new(rhs),
            },
        }
    }
}

impl Sub for HoloExpr {
    type Output = HoloExpr;
    fn sub(self, rhs: HoloExpr) -> HoloExpr {
        self + (-rhs)
    }
}

impl Neg for HoloExpr {
    type Output = HoloExpr;
    fn neg(self) -> HoloExpr {
        match self {
            HoloExpr::Constant { value } => HoloExpr::constant(-value),
            HoloExpr::Poly { poly } => HoloExpr::poly(-&poly),
            other => HoloExpr::Neg {
                arg: Arc::new(other),
            },
        }
    }
}

impl Mul for HoloExpr {
    type Output = HoloExpr;
    fn mul(self, rhs: HoloExpr) -> HoloExpr {
        if self.is_zero_constant() || rhs.is_zero_constant() {
            return HoloExpr::zero();
        }
        if self.is_one_constant() {
            return rhs;
        }
        if rhs.is_one_constant() {
            return self;
        }
        match (&self, &rhs) {
            (HoloExpr::Constant { value: a }, HoloExpr::Constant { value: b }) => {
                HoloExpr::constant(a * b)
            }
            (HoloExpr::Poly { poly: a }, HoloExpr::Poly { poly: b }) => HoloExpr::poly(a * b),
            (HoloExpr::Poly { poly: a }, HoloExpr::Constant { value: b })
            | (HoloExpr::Constant { value: b }, HoloExpr::Poly { poly: a }) => {
                HoloExpr::poly(a.scale(*b))
            }
            _ => HoloExpr::Mul {
                lhs: Arc::new(self),
                rhs: Arc::new(rhs),
            },
        }
    }
}

impl From<Poly> for HoloExpr {
    fn from(p: Poly) -> Self {
        HoloExpr::poly(p)
    }
}

impl From<C64> for HoloExpr {
    fn from(c: C64) -> Self {
        HoloExpr::constant(c)
    }
}
