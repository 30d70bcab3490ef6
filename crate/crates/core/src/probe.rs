//! Necessity probes: perturb a feasible φ along the normal of one labeled
//! condition and confirm that both the checker and the constructor reject it
//! for that condition and no other.

use serde::{Deserialize, Serialize};

use crate::conditions::{ConditionKind, ConditionReport};
use crate::error::{LiftError, Result};
use crate::linalg::C64;
use crate::phi::Phi;
use crate::phi_builder::{min_degree, solve_least_norm};
use crate::problem::Problem;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub label: String,
    pub magnitude: f64,
    pub perturbed: Phi,
    pub report: ConditionReport,
    /// Labels the checker rejects after the perturbation.
    pub failed: Vec<String>,
    /// Label carried by the constructor's `NotDivisible`, if it raised one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lift_label: Option<String>,
    /// Any other constructor error, rendered.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lift_error: Option<String>,
    /// For magnitude 0: everything still passes. Otherwise: only `label`
    /// fails and the constructor names it.
    pub pass: bool,
}

/// Moves φ by the least-norm `δ` with `ℓ_label(δ) = magnitude` and `ℓ(δ) = 0`
/// for every other condition, then reruns checker and constructor.
pub fn necessity_probe(problem: &Problem, phi: &Phi, label: &str, magnitude: f64, tol: f64) -> Result<ProbeReport> {
    let list = problem.condition_list()?;
    let target = list
        .iter()
        .position(|c| c.label == label && c.kind == ConditionKind::Bullet)
        .ok_or_else(|| LiftError::InvalidInput(format!("label: no bullet condition named {label:?}")))?;
    let n = problem.n();
    let degree = phi.degree().max(min_degree(problem)?);
    let rows: Vec<Vec<C64>> = list.iter().map(|c| c.row(n, degree)).collect();
    let mut rhs = vec![C64::new(0.0, 0.0); rows.len()];
    rhs[target] = C64::new(magnitude, 0.0);
    let delta = solve_least_norm(&rows, &rhs, n * (degree + 1))?;
    let x: Vec<C64> = phi.to_vector(degree).iter().zip(&delta.x).map(|(a, d)| a + d).collect();
    let perturbed = Phi::from_vector(n, degree, &x);

    let report = problem.check(&perturbed, tol)?;
    let failed: Vec<String> = report.failed().map(|c| c.label.clone()).collect();
    let (lift_label, lift_error) = match problem.lift(&perturbed, tol) {
        Ok(_) => (None, None),
        Err(LiftError::NotDivisible { label, .. }) => (Some(label), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let pass = if magnitude == 0.0 {
        report.pass && lift_label.is_none() && lift_error.is_none()
    } else {
        failed == [label] && lift_label.as_deref() == Some(label)
    };
    Ok(ProbeReport {
        label: label.into(),
        magnitude,
        perturbed,
        report,
        failed,
        lift_label,
        lift_error,
        pass,
    })
}

/// Labels of every condition a probe may target.
pub fn bullet_labels(problem: &Problem) -> Result<Vec<String>> {
    Ok(problem
        .condition_list()?
        .into_iter()
        .filter(|c| c.kind == ConditionKind::Bullet)
        .map(|c| c.label)
        .collect())
}
