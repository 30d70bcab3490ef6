//! Constructive lifting of analytic discs through the characteristic-polynomial
//! map `σ: Ω_n → G_n` for n = 2, 3.

pub mod cli;
pub mod conditions;
pub mod discmap;
pub mod domains;
pub mod error;
pub mod generate;
pub mod holo;
pub mod linalg;
pub mod pattern;
pub mod phi;
pub mod phi_builder;
pub mod probe;
pub mod problem;
pub mod scf;
pub mod snp;
pub mod verifier;
pub mod wire;

pub use error::{LiftError, Result};
