//! Labeled linear conditions on the Taylor data of φ, shared by the checkers,
//! the φ builder and the necessity probes.

use serde::{Deserialize, Serialize};

use crate::linalg::C64;
use crate::phi::Phi;

/// Default relative tolerance for condition residuals.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionKind {
    /// `φ(node) = σ(matrix)` (or its Taylor term of order 0 at 0).
    Value,
    /// Premise of the case dispatch (not a necessary condition).
    Hypothesis,
    /// A necessary and sufficient derivative condition.
    Bullet,
}

/// `weight · φ_component⁽ᵒʳᵈᵉʳ⁾(point)/order!`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub component: usize,
    #[serde(with = "crate::wire::c64")]
    pub point: C64,
    pub order: usize,
    #[serde(with = "crate::wire::c64")]
    pub weight: C64,
}

impl Term {
    pub fn new(component: usize, point: C64, order: usize, weight: C64) -> Self {
        Term {
            component,
            point,
            order,
            weight,
        }
    }
}

/// `Σ terms = rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearCondition {
    pub label: String,
    pub kind: ConditionKind,
    pub node: Option<usize>,
    pub terms: Vec<Term>,
    #[serde(with = "crate::wire::c64")]
    pub rhs: C64,
}

impl LinearCondition {
    pub fn lhs(&self, phi: &Phi) -> C64 {
        self.terms
            .iter()
            .map(|t| t.weight * phi.taylor(t.component, t.point, t.order))
            .sum()
    }

    /// Row of the functional on the coefficient vector of [`Phi::to_vector`].
    pub fn row(&self, n: usize, degree: usize) -> Vec<C64> {
        let mut row = vec![C64::new(0.0, 0.0); n * (degree + 1)];
        for t in &self.terms {
            // d/da_m of the k-th Taylor coefficient at p is C(m,k)·p^(m−k)
            let mut binom = 1.0;
            for m in t.order..=degree {
                if m > t.order {
                    binom = binom * m as f64 / (m - t.order) as f64;
                }
                row[t.component * (degree + 1) + m] +=
                    t.weight * binom * t.point.powu((m - t.order) as u32);
            }
        }
        row
    }

    pub fn max_order(&self) -> usize {
        self.terms.iter().map(|t| t.order).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub label: String,
    pub kind: ConditionKind,
    pub node: Option<usize>,
    #[serde(with = "crate::wire::c64")]
    pub lhs: C64,
    #[serde(with = "crate::wire::c64")]
    pub rhs: C64,
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub schema_version: String,
    /// Case tag of the problem the conditions belong to.
    pub case: String,
    pub conditions: Vec<ConditionResult>,
    /// Notes such as "outside the stated hypothesis" flags.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub pass: bool,
}

impl ConditionReport {
    pub fn evaluate(case: &str, conditions: &[LinearCondition], phi: &Phi, tol: f64) -> Self {
        let scale = phi.max_coeff();
        let results: Vec<ConditionResult> = conditions
            .iter()
            .map(|c| {
                let lhs = c.lhs(phi);
                let residual = (lhs - c.rhs).norm();
                let threshold = tol * (1.0 + scale.max(c.rhs.norm()));
                ConditionResult {
                    label: c.label.clone(),
                    kind: c.kind,
                    node: c.node,
                    lhs,
                    rhs: c.rhs,
                    residual,
                    threshold,
                    pass: residual <= threshold,
                }
            })
            .collect();
        let pass = results.iter().all(|r| r.pass);
        ConditionReport {
            schema_version: "1".into(),
            case: case.into(),
            conditions: results,
            notes: Vec::new(),
            pass,
        }
    }

    pub fn failed(&self) -> impl Iterator<Item = &ConditionResult> {
        self.conditions.iter().filter(|c| !c.pass)
    }

    pub fn get(&self, label: &str) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| c.label == label)
    }

    /// First failing condition of the given kind.
    pub fn first_failed(&self, kind: ConditionKind) -> Option<&ConditionResult> {
        self.failed().find(|c| c.kind == kind)
    }
}
