//! Problem files and the common interface over both interpolation problems.

use serde::{Deserialize, Serialize};

use crate::conditions::{ConditionReport, LinearCondition};
use crate::discmap::DiscMap;
use crate::error::{LiftError, Result};
use crate::linalg::{CMatrix, C64};
use crate::phi::Phi;
use crate::scf::{cf_condition_list, cf_conditions, cf_lift, scf_normalize, ScfInstance};
use crate::snp::{snp_condition_list, snp_conditions, snp_lift, SnpInstance, SnpNode};
use crate::verifier::{verify_scf, verify_snp, Certificate, VerifyConfig};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Snp,
    Scf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    #[serde(with = "crate::wire::c64")]
    pub alpha: C64,
    pub matrix: CMatrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSpec {
    #[serde(rename = "A")]
    pub a: CMatrix,
    #[serde(rename = "B")]
    pub b: CMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub radii: usize,
    pub angles: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ProblemConfig {
    pub fn is_empty(&self) -> bool {
        *self == ProblemConfig::default()
    }
}

/// On-disk problem description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default = "default_schema")]
    pub schema_version: String,
    pub kind: ProblemKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<NodeSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<PairSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Phi>,
    #[serde(default, skip_serializing_if = "ProblemConfig::is_empty")]
    pub config: ProblemConfig,
}

fn default_schema() -> String {
    SCHEMA_VERSION.into()
}

fn invalid(path: &str, msg: impl std::fmt::Display) -> LiftError {
    LiftError::InvalidInput(format!("{path}: {msg}"))
}

impl ProblemFile {
    /// Parses JSON; errors name the offending field path.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: ProblemFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            invalid(if path.is_empty() { "." } else { &path }, e.inner())
        })?;
        file.validate()?;
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files serialize")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid("schema_version", format!("unsupported version {:?}", self.schema_version)));
        }
        if self.n != 2 && self.n != 3 {
            return Err(invalid("n", "must be 2 or 3"));
        }
        let check_dim = |path: String, m: &CMatrix| {
            if m.dim() != self.n {
                Err(invalid(&path, format!("expected a {0}x{0} matrix", self.n)))
            } else {
                Ok(())
            }
        };
        match self.kind {
            ProblemKind::Snp => {
                if self.pair.is_some() {
                    return Err(invalid("pair", "not allowed for kind \"snp\""));
                }
                let nodes = self.nodes.as_ref().ok_or_else(|| invalid("nodes", "missing for kind \"snp\""))?;
                if nodes.is_empty() {
                    return Err(invalid("nodes", "at least one node is required"));
                }
                for (j, nd) in nodes.iter().enumerate() {
                    check_dim(format!("nodes[{j}].matrix"), &nd.matrix)?;
                    if !(nd.alpha.norm() < 1.0) {
                        return Err(invalid(&format!("nodes[{j}].alpha"), "must satisfy |alpha| < 1"));
                    }
                }
            }
            ProblemKind::Scf => {
                if self.nodes.is_some() {
                    return Err(invalid("nodes", "not allowed for kind \"scf\""));
                }
                let pair = self.pair.as_ref().ok_or_else(|| invalid("pair", "missing for kind \"scf\""))?;
                check_dim("pair.A".into(), &pair.a)?;
                check_dim("pair.B".into(), &pair.b)?;
            }
        }
        if let Some(phi) = &self.phi {
            if phi.dim() != self.n {
                return Err(invalid("phi.components", format!("expected {} components", self.n)));
            }
        }
        if let Some(t) = self.config.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(invalid("config.tol", "must be positive"));
            }
        }
        Ok(())
    }

    pub fn problem(&self) -> Result<Problem> {
        self.validate()?;
        match self.kind {
            ProblemKind::Snp => {
                let nodes = self
                    .nodes
                    .as_ref()
                    .expect("validated")
                    .iter()
                    .map(|n| SnpNode {
                        alpha: n.alpha,
                        matrix: n.matrix,
                    })
                    .collect();
                Ok(Problem::Snp(SnpInstance::new(nodes)?))
            }
            ProblemKind::Scf => {
                let p = self.pair.as_ref().expect("validated");
                Ok(Problem::Scf(scf_normalize(&p.a, &p.b)?))
            }
        }
    }
}

/// Either interpolation problem, behind one interface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Problem {
    Snp(SnpInstance),
    Scf(ScfInstance),
}

impl Problem {
    pub fn n(&self) -> usize {
        match self {
            Problem::Snp(i) => i.n,
            Problem::Scf(i) => i.n,
        }
    }

    pub fn case_tag(&self) -> String {
        match self {
            Problem::Snp(i) => i.case_tag(),
            Problem::Scf(i) => i.case.tag().to_string(),
        }
    }

    pub fn condition_list(&self) -> Result<Vec<LinearCondition>> {
        match self {
            Problem::Snp(i) => Ok(snp_condition_list(i)),
            Problem::Scf(i) => cf_condition_list(i),
        }
    }

    pub fn check(&self, phi: &Phi, tol: f64) -> Result<ConditionReport> {
        match self {
            Problem::Snp(i) => snp_conditions(i, phi, tol),
            Problem::Scf(i) => cf_conditions(i, phi, tol),
        }
    }

    pub fn lift(&self, phi: &Phi, tol: f64) -> Result<DiscMap> {
        match self {
            Problem::Snp(i) => snp_lift(i, phi),
            Problem::Scf(i) => cf_lift(i, phi, tol),
        }
    }

    pub fn verify(&self, map: &DiscMap, phi: &Phi, cfg: &VerifyConfig) -> Certificate {
        match self {
            Problem::Snp(i) => verify_snp(map, phi, i, cfg),
            Problem::Scf(i) => verify_scf(map, phi, i, cfg),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_pointer_errors() {
        let ok = r#"{"kind":"snp","n":2,"nodes":[{"alpha":[0,0],"matrix":[[[0,0],[0,0]],[[0,0],[0,0]]]}],
                     "phi":{"components":[[[0,0],[1,0]],[[0,0],[0,0],[0.5,0]]]}}"#;
        let f = ProblemFile::from_json(ok).unwrap();
        assert!(matches!(f.problem().unwrap(), Problem::Snp(_)));
        let back = ProblemFile::from_json(&f.to_json()).unwrap();
        assert_eq!(back, f);

        let bad_alpha = ok.replace(r#""alpha":[0,0]"#, r#""alpha":[1.5,0]"#);
        let e = ProblemFile::from_json(&bad_alpha).unwrap_err().to_string();
        assert!(e.contains("nodes[0].alpha"), "{e}");

        let bad_type = ok.replace(r#""alpha":[0,0]"#, r#""alpha":"x""#);
        let e = ProblemFile::from_json(&bad_type).unwrap_err().to_string();
        assert!(e.contains("nodes[0].alpha"), "{e}");

        let bad_dim = r#"{"kind":"scf","n":3,"pair":{"A":[[[0,0],[0,0]],[[0,0],[0,0]]],"B":[[[0,0],[0,0]],[[0,0],[0,0]]]}}"#;
        let e = ProblemFile::from_json(bad_dim).unwrap_err().to_string();
        assert!(e.contains("pair.A"), "{e}");
    }
}
