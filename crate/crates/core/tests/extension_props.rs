//! Random-instance properties of partial operators and their Krein–von Neumann
//! extensions.

use krein_core::kvn::{
    characterize_extension, equals_kvn, extension_residual, is_extension, kvn_extension, kvn_range_criterion, qform_tn,
    verify_sandwich,
};
use krein_core::numerics::{is_psd, loewner_leq, range_leq, spectral_norm, Subspace};
use krein_core::partial_op::{dstar, gamma_admissible, has_bounded_psd_extension, theorem1_report};
use krein_core::shorted::schur_oracle;
use krein_core::{sampling, PartialOperatorF64, ToleranceProfileF64};
use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tol() -> ToleranceProfileF64 {
    ToleranceProfileF64::default()
}

/// Random positive partial operator; roughly one in ten is planted
/// non-extendible.
fn instance(rng: &mut ChaCha8Rng) -> (PartialOperatorF64, bool) {
    let n = rng.random_range(1..=8);
    let k = rng.random_range(0..=n);
    let degenerate = k >= 1 && k < n && rng.random_bool(0.1);
    let (dom, image) = sampling::positive_instance::<f64, _>(n, k, degenerate, rng);
    (PartialOperatorF64::new(&dom, &image, tol()).unwrap(), degenerate)
}

fn extendible_instance(rng: &mut ChaCha8Rng) -> PartialOperatorF64 {
    loop {
        let (p, degenerate) = instance(rng);
        if !degenerate {
            return p;
        }
    }
}

#[test]
fn theorem1_conditions_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut degenerate_seen = 0;
    for _ in 0..500 {
        let (p, degenerate) = instance(&mut rng);
        let r = theorem1_report(&p);
        assert!(r.all_agree, "{r:?}");
        assert_eq!(r.cond_dstar_dense, !degenerate);
        let (ok, _) = has_bounded_psd_extension(&p);
        assert_eq!(ok, r.cond_dstar_dense);
        assert_eq!(ok, dstar(&p).is_full());
        degenerate_seen += degenerate as usize;
    }
    assert!(degenerate_seen > 10);
}

#[test]
fn dstar_contains_domain() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..300 {
        let (p, _) = instance(&mut rng);
        let ds = dstar(&p);
        assert!(range_leq(p.dom_basis(), ds.basis(), &tol()));
    }
}

#[test]
fn gamma_is_minimal_and_equals_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..300 {
        let p = extendible_instance(&mut rng);
        let (_, gamma) = has_bounded_psd_extension(&p);
        let gamma = gamma.unwrap();
        let tn = kvn_extension(&p).unwrap();
        assert!((spectral_norm(&tn) - gamma).abs() <= 1e-8 * gamma.max(1.0));
        let direct = p.gram() * gamma - p.image().transpose() * p.image();
        assert!(is_psd(&direct, &tol()));
        assert!(gamma_admissible(&p, gamma));
        if gamma > 1e-6 {
            assert!(!gamma_admissible(&p, gamma * (1.0 - 1e-6)));
        }
    }
}

#[test]
fn kvn_extends_and_is_minimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..200 {
        let p = extendible_instance(&mut rng);
        let tn = kvn_extension(&p).unwrap();
        assert!(extension_residual(&tn, &p) <= 1e-8);
        assert!(is_psd(&tn, &tol()));
        let domain = p.domain();
        for _ in 0..50 {
            let s = &tn + sampling::psd_on_complement::<f64, _>(&domain, &mut rng);
            assert!(is_extension(&s, &p));
            assert!(loewner_leq(&tn, &s, &tol()));
        }
    }
}

/// Every PSD extension differs from `T_N` by a PSD matrix supported on `D^⊥`.
#[test]
fn extensions_decompose_over_the_complement() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..200 {
        let n = rng.random_range(2..=8);
        let k = rng.random_range(1..n);
        let basis = sampling::orthonormal::<f64, _>(n, k, &mut rng);
        let s0 = sampling::psd_random_rank::<f64, _>(n, &mut rng);
        let p = PartialOperatorF64::new(&basis, &(&s0 * &basis), tol()).unwrap();
        let tn = kvn_extension(&p).unwrap();
        let diff = &s0 - &tn;
        assert!(is_psd(&diff, &tol()));
        assert!(spectral_norm(&(&diff * &basis)) <= 1e-8 * spectral_norm(&s0).max(1.0));
    }
}

/// On coordinate subspaces the extension equals `S₀` minus the Schur complement
/// of any PSD extension `S₀`.
#[test]
fn kvn_matches_schur_complement_route() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..200 {
        let n = rng.random_range(1..=8);
        let k = rng.random_range(0..=n);
        let s0 = sampling::psd_random_rank::<f64, _>(n, &mut rng);
        let d = Subspace::coordinate(n, &(0..k).collect::<Vec<_>>());
        let p = PartialOperatorF64::new(d.basis(), &(&s0 * d.basis()), tol()).unwrap();
        let tn = kvn_extension(&p).unwrap();
        let oracle = &s0 - schur_oracle(&s0, k, &tol()).unwrap();
        assert!(spectral_norm(&(&tn - &oracle)) <= 1e-8 * spectral_norm(&s0).max(1.0));
    }
}

#[test]
fn quadratic_form_and_variational_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..100 {
        let p = extendible_instance(&mut rng);
        let n = p.ambient_dim();
        let tn = kvn_extension(&p).unwrap();
        let scale = spectral_norm(&tn).max(1.0);
        for _ in 0..100 {
            let g: DVector<f64> = sampling::gaussian::<f64, _>(n, 1, &mut rng).column(0).into_owned();
            let q = qform_tn(&p, &g).unwrap();
            let direct = (g.transpose() * &tn * &g)[(0, 0)];
            assert!((q - direct).abs() <= 1e-8 * scale * g.norm_squared());
            if p.dim() > 0 {
                let c: DVector<f64> = sampling::gaussian::<f64, _>(p.dim(), 1, &mut rng)
                    .column(0)
                    .into_owned();
                let th = p.apply_coords(&c);
                let h = p.dom_basis() * &c;
                let energy = th.dot(&h);
                if energy > 1e-12 {
                    let ratio = g.dot(&th).powi(2) / energy;
                    assert!(ratio <= q + 1e-8 * scale * g.norm_squared());
                }
            }
        }
    }
}

#[test]
fn characterization_matches_direct_test() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    for _ in 0..40 {
        let p = extendible_instance(&mut rng);
        let n = p.ambient_dim();
        let tn = kvn_extension(&p).unwrap();
        let domain = p.domain();
        let mut positives = 0;
        for i in 0..500 {
            let s: DMatrix<f64> = match i % 4 {
                0 => &tn + sampling::psd_on_complement::<f64, _>(&domain, &mut rng),
                1 => &tn + sampling::psd_random_rank::<f64, _>(n, &mut rng),
                2 => sampling::psd_random_rank::<f64, _>(n, &mut rng),
                _ => &tn + sampling::symmetric::<f64, _>(n, &mut rng),
            };
            let direct = is_psd(&s, &tol()) && is_extension(&s, &p);
            let via_order = characterize_extension(&s, &p).unwrap_or(false);
            assert_eq!(direct, via_order);
            positives += direct as usize;
        }
        assert!(positives >= 125);
    }
}

#[test]
fn range_criterion_singles_out_kvn() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..100 {
        let p = extendible_instance(&mut rng);
        let tn = kvn_extension(&p).unwrap();
        let domain = p.domain();
        for i in 0..20 {
            let s = if i == 0 {
                tn.clone()
            } else {
                &tn + sampling::psd_on_complement::<f64, _>(&domain, &mut rng)
            };
            assert_eq!(kvn_range_criterion(&s, &p).unwrap(), equals_kvn(&s, &tn, &tol()));
        }
    }
}

#[test]
fn sandwiched_matrices_extend() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..200 {
        let p = extendible_instance(&mut rng);
        let tn = kvn_extension(&p).unwrap();
        let r = &tn + sampling::psd_on_complement::<f64, _>(&p.domain(), &mut rng);
        let lambda: f64 = rng.random_range(0.0..=1.0);
        let s = &tn * lambda + &r * (1.0 - lambda);
        assert!(verify_sandwich(&p, &r, &s).unwrap());
    }
}
