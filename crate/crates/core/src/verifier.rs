//! Numerical certificates for constructed lifts.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::discmap::DiscMap;
use crate::domains::in_g;
use crate::holo::{cauchy_derivatives_matrix, DEFAULT_RADIUS, DEFAULT_SAMPLES};
use crate::linalg::{sigma, spectral_radius, CMatrix, C64, ZERO};
use crate::phi::Phi;
use crate::scf::ScfInstance;
use crate::snp::SnpInstance;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Relative tolerance for value checks.
    pub tol: f64,
    /// Relative tolerance for quadrature derivative checks.
    pub deriv_tol: f64,
    pub grid_radii: usize,
    pub grid_angles: usize,
    pub min_radius: f64,
    pub max_radius: f64,
    pub quad_radius: f64,
    pub quad_samples: usize,
    /// Upper bound for `sup ‖ψ‖` on the grid.
    pub bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            tol: 1e-9,
            deriv_tol: 1e-8,
            grid_radii: 8,
            grid_angles: 32,
            min_radius: 0.1,
            max_radius: 0.95,
            quad_radius: DEFAULT_RADIUS,
            quad_samples: DEFAULT_SAMPLES,
            bound: 1e8,
            seed: None,
        }
    }
}

impl VerifyConfig {
    pub fn radii(&self) -> Vec<f64> {
        let k = self.grid_radii.max(1);
        if k == 1 {
            return vec![self.max_radius];
        }
        (0..k)
            .map(|i| self.min_radius + (self.max_radius - self.min_radius) * i as f64 / (k - 1) as f64)
            .collect()
    }

    /// Grid points `r·e^{2πik/angles}`.
    pub fn grid(&self) -> Vec<C64> {
        let mut pts = Vec::with_capacity(self.grid_radii * self.grid_angles);
        for r in self.radii() {
            for k in 0..self.grid_angles {
                let t = 2.0 * std::f64::consts::PI * k as f64 / self.grid_angles as f64;
                pts.push(C64::from_polar(r, t));
            }
        }
        pts
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub max_residual: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl CheckRecord {
    fn below(name: &str, max_residual: f64, threshold: f64) -> Self {
        CheckRecord {
            name: name.into(),
            max_residual,
            threshold,
            pass: max_residual <= threshold,
        }
    }

    fn strictly_below(name: &str, max_residual: f64, threshold: f64) -> Self {
        CheckRecord {
            name: name.into(),
            max_residual,
            threshold,
            pass: max_residual < threshold,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub radii: Vec<f64>,
    pub angles: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema_version: String,
    pub kind: String,
    pub grid: GridSpec,
    pub checks: Vec<CheckRecord>,
    pub pass: bool,
    pub config: VerifyConfig,
    pub inputs_hash: String,
}

impl Certificate {
    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Hex SHA-256 of the canonical JSON encodings of the inputs.
pub fn inputs_hash(parts: &[serde_json::Value]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p.to_string().as_bytes());
        h.update([0u8]);
    }
    hex::encode(h.finalize())
}

fn nan_to_inf(x: f64) -> f64 {
    if x.is_nan() {
        f64::INFINITY
    } else {
        x
    }
}

/// Checks shared by both problem kinds, on the sample grid.
fn grid_checks(map: &DiscMap, phi: &Phi, cfg: &VerifyConfig) -> Vec<CheckRecord> {
    let mut sigma_res: f64 = 0.0;
    let mut rho: f64 = 0.0;
    let mut sup: f64 = 0.0;
    let mut worst_root: f64 = 0.0;
    let mut phi_inside = true;
    for z in cfg.grid() {
        let want = phi.eval(z);
        let member = in_g(&want);
        phi_inside &= member.inside;
        worst_root = worst_root.max(nan_to_inf(1.0 - member.margin));
        match (map.eval_base(z), map.eval(z)) {
            (Ok(base), Ok(full)) => {
                let got = sigma(&base);
                let r = got.max_abs_diff(&want) / (1.0 + want.norm_max());
                sigma_res = sigma_res.max(nan_to_inf(r));
                rho = rho.max(nan_to_inf(spectral_radius(&full)));
                sup = sup.max(nan_to_inf(full.norm_max()));
            }
            _ => {
                sigma_res = f64::INFINITY;
                rho = f64::INFINITY;
                sup = f64::INFINITY;
            }
        }
    }
    let mut membership = CheckRecord::strictly_below("phi-membership", worst_root, 1.0);
    membership.pass &= phi_inside;
    vec![
        CheckRecord::below("sigma-match", sigma_res, cfg.tol),
        CheckRecord::strictly_below("spectral-radius", rho, 1.0),
        CheckRecord::below("boundedness", sup, cfg.bound),
        membership,
    ]
}

fn rel_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    nan_to_inf((*a - *b).norm_max() / (1.0 + b.norm_max()))
}

fn finish(kind: &str, checks: Vec<CheckRecord>, cfg: &VerifyConfig, hash: String) -> Certificate {
    let pass = checks.iter().all(|c| c.pass);
    Certificate {
        schema_version: "1".into(),
        kind: kind.into(),
        grid: GridSpec {
            radii: cfg.radii(),
            angles: cfg.grid_angles,
        },
        checks,
        pass,
        config: cfg.clone(),
        inputs_hash: hash,
    }
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}

/// Certificate for `σ∘ψ = φ` and `ψ(αⱼ) = Aⱼ`.
pub fn verify_snp(map: &DiscMap, phi: &Phi, inst: &SnpInstance, cfg: &VerifyConfig) -> Certificate {
    let mut checks = grid_checks(map, phi, cfg);
    let node_res = inst
        .nodes
        .iter()
        .map(|nd| match map.eval(nd.alpha) {
            Ok(m) => rel_diff(&m, &nd.matrix),
            Err(_) => f64::INFINITY,
        })
        .fold(0.0, f64::max);
    checks.insert(1, CheckRecord::below("node-match", node_res, cfg.tol));
    let hash = inputs_hash(&[to_value(inst), to_value(phi), to_value(map)]);
    finish("snp", checks, cfg, hash)
}

/// Certificate for `σ∘ψ = φ` (normalized coordinates), `ψ(0) = A` and
/// `ψ'(0) = B` (contour quadrature).
pub fn verify_scf(map: &DiscMap, phi: &Phi, inst: &ScfInstance, cfg: &VerifyConfig) -> Certificate {
    let mut checks = grid_checks(map, phi, cfg);
    let value_res = match map.eval(ZERO) {
        Ok(m) => rel_diff(&m, &inst.a),
        Err(_) => f64::INFINITY,
    };
    let n = inst.n;
    let nan = CMatrix::scalar(n, C64::new(f64::NAN, 0.0));
    let deriv_res = match cauchy_derivatives_matrix(
        |z| map.eval(z).unwrap_or(nan),
        ZERO,
        cfg.quad_radius,
        2,
        cfg.quad_samples,
    ) {
        Ok(d) => rel_diff(&d[1], &inst.b),
        Err(_) => f64::INFINITY,
    };
    checks.insert(1, CheckRecord::below("value-match", value_res, cfg.tol));
    checks.insert(2, CheckRecord::below("derivative-match", deriv_res, cfg.deriv_tol));
    let hash = inputs_hash(&[to_value(inst), to_value(phi), to_value(map)]);
    finish("scf", checks, cfg, hash)
}
