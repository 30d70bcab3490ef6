use proptest::prelude::*;

use spectral_lift::discmap::DiscMap;
use spectral_lift::domains::{in_g, schur_cohn_stable};
use spectral_lift::generate::generate;
use spectral_lift::holo::{HoloExpr, Poly};
use spectral_lift::linalg::{classify, eigenvalues, mexp, mlog, sigma, CMatrix, C64, ZERO};
use spectral_lift::phi::Phi;
use spectral_lift::phi_builder::sigma_of_poly_matrix;
use spectral_lift::problem::{ProblemFile, ProblemKind};
use spectral_lift::snp::{SnpInstance, SnpNode};
use spectral_lift::verifier::{verify_snp, VerifyConfig};

fn complex(r: f64) -> impl Strategy<Value = C64> {
    (-r..r, -r..r).prop_map(|(a, b)| C64::new(a, b))
}

fn matrix(n: usize, r: f64) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec(complex(r), n * n).prop_map(move |v| {
        let mut m = CMatrix::zeros(n);
        for (k, z) in v.into_iter().enumerate() {
            m.set(k / n, k % n, z);
        }
        m
    })
}

fn dim() -> impl Strategy<Value = usize> {
    2usize..=3
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sigma_is_similarity_invariant((a, p) in dim().prop_flat_map(|n| (matrix(n, 1.0), matrix(n, 0.3)))) {
        let s = CMatrix::identity(a.dim()) + p;
        prop_assume!(s.condition_estimate() < 50.0);
        let b = s.inverse().unwrap() * a * s;
        let d = sigma(&a).max_abs_diff(&sigma(&b));
        prop_assert!(d < 1e-11, "{d}");
        prop_assert_eq!(classify(&a).name(), classify(&b).name());
    }

    #[test]
    fn exp_inverts_log(s in matrix(3, 0.7).prop_map(|m| CMatrix::identity(3) + m)) {
        prop_assume!(s.condition_estimate() < 1e4);
        let back = mexp(&mlog(&s).unwrap());
        prop_assert!((back - s).norm_max() <= 1e-10 * s.norm_max());
    }

    #[test]
    fn interpolation_hits_the_data(pts in prop::collection::vec((complex(0.7), complex(1.0)), 1..6)) {
        let xs: Vec<C64> = pts.iter().map(|p| p.0).collect();
        let sep = xs.iter().enumerate().flat_map(|(i, a)| xs[i + 1..].iter().map(move |b| (a - b).norm())).fold(1.0, f64::min);
        prop_assume!(sep > 0.1);
        let ys: Vec<C64> = pts.iter().map(|p| p.1).collect();
        let p = Poly::interpolate(&xs, &ys).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            prop_assert!((p.eval(*x) - y).norm() < 1e-9);
        }
    }

    #[test]
    fn schur_cohn_matches_root_radii(roots in prop::collection::vec((0.0..1.5f64, 0.0..6.3f64), 1..4)) {
        let roots: Vec<C64> = roots.iter().map(|&(r, t)| C64::from_polar(r, t)).collect();
        let radius = roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assume!((radius - 1.0).abs() > 1e-6);
        prop_assert_eq!(schur_cohn_stable(Poly::from_roots(&roots).coeffs()), radius < 1.0);
    }

    #[test]
    fn membership_of_sigma_matches_spectrum(a in dim().prop_flat_map(|n| matrix(n, 0.8))) {
        let rho = eigenvalues(&a).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assume!((rho - 1.0).abs() > 1e-6);
        prop_assert_eq!(in_g(&sigma(&a)).inside, rho < 1.0);
    }

    /// Forward direction: φ = σ∘ψ of a polynomial ψ certifies against ψ itself.
    #[test]
    fn forward_image_certifies(coeffs in dim().prop_flat_map(|n| prop::collection::vec(matrix(n, 0.15), 2))) {
        let n = coeffs[0].dim();
        let entries: Vec<Poly> = (0..n * n)
            .map(|k| Poly::new(coeffs.iter().map(|m| m.get(k / n, k % n)).collect()))
            .collect();
        let map = DiscMap::new(n, entries.iter().cloned().map(HoloExpr::poly).collect()).unwrap();
        let phi = Phi::new(sigma_of_poly_matrix(n, &entries)).unwrap();
        let inst = SnpInstance::new(vec![SnpNode { alpha: ZERO, matrix: map.eval(ZERO).unwrap() }]).unwrap();
        let cert = verify_snp(&map, &phi, &inst, &VerifyConfig::default());
        prop_assert!(cert.check("sigma-match").unwrap().pass, "{:?}", cert.checks);
        prop_assert!(cert.check("node-match").unwrap().pass);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Generated files are deterministic and survive a JSON round trip.
    #[test]
    fn generated_files_round_trip(seed in 0u64..10_000, n in dim(), scf in any::<bool>()) {
        let (kind, strata) = if scf {
            (ProblemKind::Scf, vec![])
        } else if n == 3 {
            (ProblemKind::Snp, vec!["scalar".to_string(), "noncyclic".into(), "cyclic".into()])
        } else {
            (ProblemKind::Snp, vec!["scalar".to_string(), "cyclic".into()])
        };
        let f = generate(kind, n, &strata, seed).unwrap();
        prop_assert_eq!(&f, &generate(kind, n, &strata, seed).unwrap());
        let back = ProblemFile::from_json(&f.to_json()).unwrap();
        prop_assert_eq!(back.to_json(), f.to_json());
        prop_assert!(back.problem().is_ok());
    }
}
