//! Entire functions built from polynomials, `exp`, products and quotients with
//! removable singularities, with truncated-Taylor and contour calculus.

mod expr;
mod interpolant;
mod jet;
mod poly;
mod quadrature;

pub use expr::{require_order, HoloExpr, Singularity, DIV_TOL, JET_CAP};
pub use interpolant::{entire_interpolant, exact_div, zero_free_interpolant, ZERO_VALUE_TOL};
pub use jet::Jet;
pub use poly::Poly;
pub use quadrature::{
    cauchy_derivatives, cauchy_derivatives_matrix, cauchy_derivatives_vec, DEFAULT_RADIUS,
    DEFAULT_SAMPLES,
};
