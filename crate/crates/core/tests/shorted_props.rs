//! Shorted matrices against the Schur complement, the variational infimum and
//! the square-root range identity.

use krein_core::numerics::{is_psd, loewner_leq, range_in_subspace, spectral_norm, Subspace};
use krein_core::shorted::{
    kvn_monotone_check, schur_oracle, schur_oracle_on, short_to, shorted_monotone_floor, shorted_qform,
    shorted_qform_variational, shorted_root_range,
};
use krein_core::{kvn, sampling, PartialOperatorF64, ToleranceProfileF64};
use nalgebra::{dmatrix, DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tol() -> ToleranceProfileF64 {
    ToleranceProfileF64::default()
}

fn random_subspace(n: usize, rng: &mut ChaCha8Rng) -> Subspace<f64> {
    let k = rng.random_range(0..=n);
    Subspace::from_orthonormal(sampling::orthonormal::<f64, _>(n, k, rng), &tol()).unwrap()
}

fn vector(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    sampling::gaussian::<f64, _>(n, 1, rng).column(0).into_owned()
}

#[test]
fn coordinate_shorting_is_the_schur_complement() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..1000 {
        let n = rng.random_range(1..=8);
        let p = rng.random_range(0..=n);
        let s = sampling::psd_random_rank::<f64, _>(n, &mut rng);
        let d = Subspace::coordinate(n, &(0..p).collect::<Vec<_>>());
        let shorted = short_to(&s, &d, &tol()).unwrap().shorted;
        let oracle = schur_oracle(&s, p, &tol()).unwrap();
        assert!(spectral_norm(&(&shorted - &oracle)) <= 1e-8 * spectral_norm(&s).max(f64::MIN_POSITIVE));
    }
}

#[test]
fn rotated_schur_complement_matches_on_any_subspace() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for _ in 0..500 {
        let n = rng.random_range(1..=8);
        let s = sampling::psd_random_rank::<f64, _>(n, &mut rng);
        let d = random_subspace(n, &mut rng);
        let shorted = short_to(&s, &d, &tol()).unwrap().shorted;
        let oracle = schur_oracle_on(&s, &d, &tol()).unwrap();
        assert!(spectral_norm(&(&shorted - &oracle)) <= 1e-8 * spectral_norm(&s).max(1.0));
    }
}

#[test]
fn shorted_is_psd_below_s_and_kills_the_subspace() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..500 {
        let n = rng.random_range(1..=8);
        let s = sampling::psd_random_rank::<f64, _>(n, &mut rng);
        let d = random_subspace(n, &mut rng);
        let r = short_to(&s, &d, &tol()).unwrap();
        assert!(is_psd(&r.shorted, &tol()));
        assert!(loewner_leq(&r.shorted, &s, &tol()));
        assert!(spectral_norm(&(&r.shorted * d.basis())) <= 1e-8 * spectral_norm(&s).max(1.0));
    }
}

#[test]
fn closed_form_infimum_is_not_beaten_by_a_cloud() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..100 {
        let n = rng.random_range(1..=8);
        let s = sampling::psd_random_rank::<f64, _>(n, &mut rng);
        let d = random_subspace(n, &mut rng);
        let h = vector(n, &mut rng);
        let q = shorted_qform(&s, &d, &h, &tol()).unwrap();
        let direct = shorted_qform_variational(&s, &d, &h, &tol());
        let scale = spectral_norm(&s).max(1.0) * h.norm_squared().max(1.0);
        assert!((q - direct).abs() <= 1e-8 * scale);
        for _ in 0..1000 {
            let c = vector(d.dim(), &mut rng) * rng.random_range(0.0..3.0);
            let v = &h + d.basis() * c;
            let value = (v.transpose() * &s * &v)[(0, 0)];
            assert!(value >= q - 1e-8 * scale);
        }
    }
}

#[test]
fn root_range_identity_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for _ in 0..500 {
        let n = rng.random_range(1..=8);
        let s = sampling::psd_random_rank::<f64, _>(n, &mut rng);
        let d = random_subspace(n, &mut rng);
        let range = shorted_root_range(&s, &d, &tol()).unwrap();
        assert!(range_in_subspace(range.basis(), &d.complement(), &tol()));
    }
}

#[test]
fn shorting_dominates_psd_matrices_supported_off_the_subspace() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    for _ in 0..300 {
        let n = rng.random_range(1..=8);
        let t = sampling::psd_random_rank::<f64, _>(n, &mut rng);
        let d = random_subspace(n, &mut rng);
        // a PSD matrix below the shortening, supported on D^⊥
        let shorted = short_to(&t, &d, &tol()).unwrap().shorted;
        let s = &shorted * rng.random_range(0.0..1.0);
        assert!(shorted_monotone_floor(&s, &t, &d, &tol()).unwrap());
    }
}

#[test]
fn form_dominance_alone_does_not_order_extensions() {
    let e1 = dmatrix![1.0; 0.0];
    let ps = PartialOperatorF64::new(&e1, &e1, tol()).unwrap();
    let pt = PartialOperatorF64::new(&e1, &dmatrix![1.0; 1.0], tol()).unwrap();
    let report = kvn_monotone_check(&ps, &pt).unwrap();
    assert!(report.form_dominance);
    assert!(!report.range_inclusion);
    assert!(!report.holds());
    let sn = kvn::kvn_extension(&ps).unwrap();
    let tn = kvn::kvn_extension(&pt).unwrap();
    let diff: DMatrix<f64> = &tn - &sn;
    assert!(diff.symmetric_eigenvalues().min() < -0.6);
    assert!(!loewner_leq(&sn, &tn, &tol()));
}

/// Whenever the report holds the extensions are ordered.
#[test]
fn monotone_report_implies_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(36);
    let mut held = 0;
    for _ in 0..300 {
        let n = rng.random_range(1..=6);
        let k = rng.random_range(1..=n);
        let basis = sampling::orthonormal::<f64, _>(n, k, &mut rng);
        let s0 = sampling::psd_random_rank::<f64, _>(n, &mut rng);
        let t0 = &s0 + sampling::psd_random_rank::<f64, _>(n, &mut rng);
        let ps = PartialOperatorF64::new(&basis, &(&s0 * &basis), tol()).unwrap();
        let pt = PartialOperatorF64::new(&basis, &(&t0 * &basis), tol()).unwrap();
        let report = kvn_monotone_check(&ps, &pt).unwrap();
        let sn = kvn::kvn_extension(&ps).unwrap();
        let tn = kvn::kvn_extension(&pt).unwrap();
        assert_eq!(report.holds(), loewner_leq(&sn, &tn, &tol()));
        held += report.holds() as usize;
    }
    assert!(held > 0);
}
