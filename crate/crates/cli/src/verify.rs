//! Randomized cross-checks between independent computations.
//!
//! Each check returns `(passed, discrepancy)`. Discrepancies are relative where a
//! natural scale exists and counts of disagreements otherwise.

use krein_core::contractive::{extremal_extensions, interval_member, is_contractive_extension, uniqueness};
use krein_core::kvn::{
    characterize_extension, equals_kvn, extension_residual, is_extension, kvn_range_criterion, qform_tn,
};
use krein_core::numerics::{is_psd, spectral_norm, sqrt_psd, sym, Subspace, SymEigen};
use krein_core::partial_op::{gamma_admissible, theorem1_report};
use krein_core::psd_equation::{equation_residual, Solvability};
use krein_core::shorted::{schur_oracle_on, short_to, shorted_qform, shorted_qform_variational, shorted_root_range};
use krein_core::{
    sampling, ContractivePartialF64, Error, MatrixF64, PartialOperatorF64, ToleranceProfileF64, VectorF64,
};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Outcome = (bool, f64);

/// A generator for one named check, independent of which other checks run.
pub fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> VectorF64 {
    sampling::gaussian::<f64, _>(n, 1, rng).column(0).into_owned()
}

/// How far `b − a` is from PSD, relative to `max(‖a‖, ‖b‖, 1)`.
fn order_violation(a: &MatrixF64, b: &MatrixF64) -> f64 {
    let scale = spectral_norm(a).max(spectral_norm(b)).max(1.0);
    (-SymEigen::new(&(b - a)).min()).max(0.0) / scale
}

fn rel_diff(a: &MatrixF64, b: &MatrixF64, scale: f64) -> f64 {
    spectral_norm(&(a - b)) / scale.max(1.0)
}

/// The three extendibility conditions agree; the discrepancy counts disagreeing
/// pairs.
pub fn theorem1_equivalence(p: &PartialOperatorF64) -> Outcome {
    let r = theorem1_report(p);
    let pairs = [
        r.cond_dstar_dense != r.cond_perp_ran,
        r.cond_perp_ran != r.cond_pos_closable,
        r.cond_dstar_dense != r.cond_pos_closable,
    ];
    let bad = pairs.iter().filter(|&&x| x).count();
    (bad == 0, bad as f64)
}

/// A kernel vector `c` of the Gram matrix with `X·c ≠ 0` witnesses that no
/// extension exists.
pub fn obstruction_certificate(p: &PartialOperatorF64) -> (Outcome, Option<VectorF64>) {
    let kernel = p.gram_kernel();
    let best = kernel
        .basis()
        .column_iter()
        .map(|c| c.into_owned())
        .max_by(|a, b| (p.image() * a).norm().total_cmp(&(p.image() * b).norm()));
    let Some(c) = best else {
        return ((false, 1.0), None);
    };
    let tol = p.tol();
    let energy = (c.transpose() * p.gram() * &c)[(0, 0)].abs() / p.scale().max(1.0);
    let moved = (p.image() * &c).norm();
    let ok = energy <= tol.rank_rel && moved > tol.residual * spectral_norm(p.image()).max(1.0);
    let f = p.dom_basis() * &c;
    ((ok, energy), Some(f))
}

pub fn kvn_extends(p: &PartialOperatorF64, tn: &MatrixF64) -> Outcome {
    let r = extension_residual(tn, p);
    (r <= p.tol().residual && is_psd(tn, p.tol()), r)
}

pub fn kvn_norm_is_gamma(tn: &MatrixF64, gamma: f64, tol: &ToleranceProfileF64) -> Outcome {
    let d = (spectral_norm(tn) - gamma).abs() / gamma.max(1.0);
    (d <= tol.residual, d)
}

/// `γ` is admissible and `γ·(1 − 1e-6)` is not.
pub fn gamma_minimal(p: &PartialOperatorF64, gamma: f64) -> Outcome {
    let admissible = gamma_admissible(p, gamma);
    let tight = gamma <= 0.0 || !gamma_admissible(p, gamma * (1.0 - 1e-6));
    (admissible && tight, if admissible && tight { 0.0 } else { 1.0 })
}

/// `T_N ≤ S` for sampled PSD extensions `S = T_N + W`, `W` supported on `D^⊥`.
pub fn kvn_minimality(p: &PartialOperatorF64, tn: &MatrixF64, samples: usize, rng: &mut ChaCha8Rng) -> Outcome {
    let domain = p.domain();
    let tol = p.tol();
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for _ in 0..samples {
        let s = tn + sampling::psd_on_complement::<f64, _>(&domain, rng);
        ok &= is_extension(&s, p) && krein_core::numerics::loewner_leq(tn, &s, tol);
        worst = worst.max(order_violation(tn, &s));
    }
    (ok, worst)
}

/// `T_N = S − short(S)` for a sampled PSD extension `S`, with the shortening
/// computed as a rotated Schur complement.
pub fn kvn_schur_route(p: &PartialOperatorF64, tn: &MatrixF64, rng: &mut ChaCha8Rng) -> Outcome {
    let s = tn + sampling::psd_on_complement::<f64, _>(&p.domain(), rng);
    match schur_oracle_on(&s, &p.domain(), p.tol()) {
        Ok(schur) => {
            let d = rel_diff(tn, &(&s - schur), spectral_norm(&s));
            (d <= p.tol().residual, d)
        }
        Err(_) => (false, f64::MAX),
    }
}

/// The closed-form quadratic form matches `gᵀ·T_N·g` and dominates
/// `|⟨g, Th⟩|² / ⟨Th, h⟩` for `rayleigh_per_g` random `h` per `g`.
pub fn variational_identity(
    p: &PartialOperatorF64,
    tn: &MatrixF64,
    samples: usize,
    rayleigh_per_g: usize,
    rng: &mut ChaCha8Rng,
) -> Outcome {
    let n = p.ambient_dim();
    let scale = spectral_norm(tn).max(1.0);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let g = random_vector(n, rng);
        let g2 = g.norm_squared().max(f64::MIN_POSITIVE);
        let Ok(q) = qform_tn(p, &g) else {
            return (false, f64::MAX);
        };
        let direct = (g.transpose() * tn * &g)[(0, 0)];
        worst = worst.max((q - direct).abs() / (scale * g2));
        for _ in 0..rayleigh_per_g {
            if p.dim() == 0 {
                break;
            }
            let c = random_vector(p.dim(), rng);
            let th = p.apply_coords(&c);
            let energy = th.dot(&(p.dom_basis() * &c));
            if energy <= p.tol().rank_rel * scale * c.norm_squared() {
                continue;
            }
            let ratio = g.dot(&th).powi(2) / energy;
            worst = worst.max((ratio - q).max(0.0) / (scale * g2));
        }
    }
    (worst <= p.tol().residual, worst)
}

/// Order characterization against the direct "PSD and extends" test on
/// candidates drawn from four families; the discrepancy counts disagreements.
pub fn characterization(p: &PartialOperatorF64, tn: &MatrixF64, samples: usize, rng: &mut ChaCha8Rng) -> Outcome {
    let n = p.ambient_dim();
    let domain = p.domain();
    let tol = p.tol();
    let mut bad = 0usize;
    for i in 0..samples {
        let s = match i % 4 {
            0 => tn + sampling::psd_on_complement::<f64, _>(&domain, rng),
            1 => tn + sampling::psd_random_rank::<f64, _>(n, rng),
            2 => sampling::psd_random_rank::<f64, _>(n, rng),
            _ => tn + sampling::symmetric::<f64, _>(n, rng),
        };
        let direct = is_psd(&s, tol) && is_extension(&s, p);
        let by_order = match characterize_extension(&s, p) {
            Ok(v) => v,
            Err(Error::NotPsd { .. }) => false,
            Err(_) => return (false, f64::MAX),
        };
        bad += (direct != by_order) as usize;
    }
    (bad == 0, bad as f64)
}

/// Square-root range equality holds exactly for `S = T_N` among `T_N` and
/// sampled extensions.
pub fn range_criterion(p: &PartialOperatorF64, tn: &MatrixF64, samples: usize, rng: &mut ChaCha8Rng) -> Outcome {
    let domain = p.domain();
    let mut bad = 0usize;
    for i in 0..samples.max(1) {
        let s = if i == 0 {
            tn.clone()
        } else {
            tn + sampling::psd_on_complement::<f64, _>(&domain, rng)
        };
        match kvn_range_criterion(&s, p) {
            Ok(v) => bad += (v != equals_kvn(&s, tn, p.tol())) as usize,
            Err(_) => return (false, f64::MAX),
        }
    }
    (bad == 0, bad as f64)
}

pub fn shorted_schur(s: &MatrixF64, d: &Subspace<f64>, tol: &ToleranceProfileF64) -> Outcome {
    match (short_to(s, d, tol), schur_oracle_on(s, d, tol)) {
        (Ok(r), Ok(oracle)) => {
            let scale = spectral_norm(s);
            let diff = spectral_norm(&(&r.shorted - oracle));
            let rel = if scale > 0.0 { diff / scale } else { diff };
            (rel <= tol.residual, rel)
        }
        _ => (false, f64::MAX),
    }
}

/// The shortening is PSD, below `S`, and annihilates `D`.
pub fn shorted_bounds(s: &MatrixF64, d: &Subspace<f64>, tol: &ToleranceProfileF64) -> Outcome {
    let Ok(r) = short_to(s, d, tol) else {
        return (false, f64::MAX);
    };
    let scale = spectral_norm(s).max(1.0);
    let below_zero = (-SymEigen::new(&r.shorted).min()).max(0.0) / scale;
    let above_s = order_violation(&r.shorted, s);
    let on_d = spectral_norm(&(&r.shorted * d.basis())) / scale;
    let ok = is_psd(&r.shorted, tol) && krein_core::numerics::loewner_leq(&r.shorted, s, tol) && on_d <= tol.residual;
    (ok, below_zero.max(above_s).max(on_d))
}

/// Closed-form infimum matches `hᵀ·short·h`, and no point of a random cloud in
/// `h + D` goes below it.
pub fn shorted_variational(
    s: &MatrixF64,
    d: &Subspace<f64>,
    tol: &ToleranceProfileF64,
    samples: usize,
    cloud: usize,
    rng: &mut ChaCha8Rng,
) -> Outcome {
    let n = s.nrows();
    let s_scale = spectral_norm(s).max(1.0);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let h = random_vector(n, rng);
        let scale = s_scale * h.norm_squared().max(1.0);
        let q = match shorted_qform(s, d, &h, tol) {
            Ok(q) => q,
            Err(Error::OracleMismatch { discrepancy, .. }) => return (false, discrepancy),
            Err(_) => return (false, f64::MAX),
        };
        worst = worst.max((q - shorted_qform_variational(s, d, &h, tol)).abs() / scale);
        for _ in 0..cloud {
            let c = random_vector(d.dim(), rng) * rng.random_range(0.0..3.0);
            let v = &h + d.basis() * c;
            let value = (v.transpose() * s * &v)[(0, 0)];
            worst = worst.max((q - value).max(0.0) / scale);
        }
    }
    (worst <= tol.residual, worst)
}

pub fn root_range_identity(s: &MatrixF64, d: &Subspace<f64>, tol: &ToleranceProfileF64) -> (Outcome, Option<usize>) {
    match shorted_root_range(s, d, tol) {
        Ok(range) => ((true, 0.0), Some(range.dim())),
        Err(Error::RangeIdentityViolated { direct, intersection }) => {
            ((false, direct.abs_diff(intersection).max(1) as f64), None)
        }
        Err(_) => ((false, f64::MAX), None),
    }
}

/// `S_m ≤ S_M`, both norm-bounded extensions, and convex combinations are
/// members.
pub fn interval_endpoints(c: &ContractivePartialF64) -> Outcome {
    let iv = extremal_extensions(c);
    let mut ok = krein_core::numerics::loewner_leq(&iv.s_m, &iv.s_big_m, c.tol())
        && is_contractive_extension(&iv.s_m, c)
        && is_contractive_extension(&iv.s_big_m, c);
    for t in [0.25, 0.5, 0.75] {
        let s = &iv.s_m * (1.0 - t) + &iv.s_big_m * t;
        ok &= matches!(interval_member(&s, c), Ok(true));
    }
    (ok, order_violation(&iv.s_m, &iv.s_big_m))
}

/// Norm-bounded extensions sampled around the midpoint lie in `[S_m, S_M]`.
pub fn interval_sampling(c: &ContractivePartialF64, samples: usize, rng: &mut ChaCha8Rng) -> Outcome {
    let iv = extremal_extensions(c);
    let mid = iv.midpoint();
    let domain = c.domain();
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for _ in 0..samples {
        let s = sampling::norm_bounded_extension(&domain, &mid, rng);
        ok &= is_contractive_extension(&s, c) && matches!(interval_member(&s, c), Ok(true));
        worst = worst
            .max(order_violation(&iv.s_m, &s))
            .max(order_violation(&s, &iv.s_big_m));
    }
    (ok, worst)
}

/// Points `S_m + Δ^{1/2}·W·Δ^{1/2}` with `0 ≤ W ≤ I` of the interval are
/// norm-bounded extensions.
pub fn interval_converse(c: &ContractivePartialF64, samples: usize, rng: &mut ChaCha8Rng) -> Outcome {
    let iv = extremal_extensions(c);
    let Ok(root) = sqrt_psd(&iv.width(), c.tol()) else {
        return (false, f64::MAX);
    };
    let n = c.ambient_dim();
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let w = sampling::unit_interval_psd::<f64, _>(n, rng);
        let s = sym(&(&iv.s_m + &root * w * &root));
        ok &= is_contractive_extension(&s, c);
        let excess = (SymEigen::new(&s).abs_max() - 1.0).max(0.0);
        let residual = if c.dim() == 0 {
            0.0
        } else {
            spectral_norm(&(&s * c.dom_basis() - c.image()))
        };
        worst = worst.max(excess).max(residual);
    }
    (ok, worst)
}

pub fn uniqueness_routes(c: &ContractivePartialF64) -> Outcome {
    match uniqueness(c) {
        Ok(_) => (true, 0.0),
        Err(_) => (false, 1.0),
    }
}

pub fn equation_solution(s: &MatrixF64, a: &MatrixF64, b: &MatrixF64, tol: &ToleranceProfileF64) -> Outcome {
    let r = equation_residual(s, a, b) / spectral_norm(a).max(1.0);
    (r <= tol.residual && is_psd(s, tol), r)
}

/// The minimal solution stays below `S_N + W` for `W ≥ 0` supported on
/// `(ran A)^⊥`, each of which solves the equation too.
pub fn equation_minimal(
    s: &MatrixF64,
    a: &MatrixF64,
    b: &MatrixF64,
    tol: &ToleranceProfileF64,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Outcome {
    let ran_a = Subspace::span(a, tol);
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let other = s + sampling::psd_on_complement::<f64, _>(&ran_a, rng);
        ok &= equation_solution(&other, a, b, tol).0 && krein_core::numerics::loewner_leq(s, &other, tol);
        worst = worst.max(order_violation(s, &other));
    }
    (ok, worst)
}

/// `xᵀ·sym(BᵀA)·x ≈ 0` while `B·x` is clearly nonzero.
pub fn equation_certificate(
    report: &Solvability<f64>,
    a: &MatrixF64,
    b: &MatrixF64,
    tol: &ToleranceProfileF64,
) -> Outcome {
    let Some(x) = &report.certificate else {
        return (false, f64::MAX);
    };
    let form = sym(&(b.transpose() * a));
    let scale = (spectral_norm(a) * spectral_norm(b)).max(1.0);
    let energy = (x.transpose() * &form * x)[(0, 0)].abs() / scale;
    let moved = (b * x).norm();
    let ok = energy <= tol.rank_rel && moved > 10.0 * tol.residual * spectral_norm(b).max(1.0);
    (ok, energy)
}
