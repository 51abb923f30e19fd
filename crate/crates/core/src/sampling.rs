//! Seeded random matrices and instances with planted structure.
//!
//! Every function draws from a caller-supplied generator, so a fixed seed gives
//! a fixed stream regardless of where the call happens.

use nalgebra::DMatrix;
use rand::{Rng, RngExt};
use rand_distr::{Distribution, StandardNormal};

use crate::numerics::{spectral_norm, sym, Subspace, SymEigen};
use crate::Real;

pub fn gaussian<T: Real, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<T> {
    DMatrix::from_fn(rows, cols, |_, _| {
        let x: f64 = StandardNormal.sample(rng);
        T::from_f64_lossy(x)
    })
}

/// Random `n × k` matrix with orthonormal columns.
pub fn orthonormal<T: Real, R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> DMatrix<T> {
    assert!(k <= n, "cannot fit {k} orthonormal vectors in dimension {n}");
    if k == 0 {
        return DMatrix::zeros(n, 0);
    }
    let q = gaussian::<T, R>(n, k, rng).qr().q();
    q.columns(0, k).into_owned()
}

/// Random symmetric matrix with standard normal entries on and above the diagonal.
pub fn symmetric<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<T> {
    let g = gaussian::<T, R>(n, n, rng);
    sym(&(&g + g.transpose())) * T::from_f64_lossy(0.5f64.sqrt())
}

/// Random PSD matrix `L·Lᵀ / rank` of the given rank.
pub fn psd<T: Real, R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> DMatrix<T> {
    if rank == 0 {
        return DMatrix::zeros(n, n);
    }
    let l = gaussian::<T, R>(n, rank, rng);
    sym(&(&l * l.transpose())) * (T::one() / T::from_usize(rank).unwrap_or_else(T::one))
}

/// Random PSD matrix whose rank is drawn uniformly from `1..=n`, full rank with
/// probability one half.
pub fn psd_random_rank<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<T> {
    let rank = if n == 0 || rng.random_bool(0.5) {
        n
    } else {
        rng.random_range(1..=n)
    };
    psd(n, rank, rng)
}

/// A symmetric matrix `W` with `0 ≤ W ≤ I` and random spectrum in `[0, 1]`.
pub fn unit_interval_psd<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<T> {
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let q = orthonormal::<T, R>(n, n, rng);
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        let v: f64 = match rng.random_range(0..4) {
            0 => 0.0,
            1 => 1.0,
            _ => rng.random_range(0.0..1.0),
        };
        d[(i, i)] = T::from_f64_lossy(v);
    }
    sym(&(&q * d * q.transpose()))
}

/// `Q⊥·W·Q⊥ᵀ` for a random PSD `W` on `D^⊥`: adding it to one PSD extension gives
/// another.
pub fn psd_on_complement<T: Real, R: Rng + ?Sized>(domain: &Subspace<T>, rng: &mut R) -> DMatrix<T> {
    let perp = domain.complement();
    let m = perp.dim();
    let n = domain.ambient_dim();
    if m == 0 {
        return DMatrix::zeros(n, n);
    }
    let rank = rng.random_range(1..=m);
    let w = psd::<T, R>(m, rank, rng);
    sym(&(perp.basis() * w * perp.basis().transpose()))
}

/// A symmetric matrix of norm at most one that agrees with `center` on `domain`:
/// `center` moved along a random symmetric direction supported on `D^⊥`, by a
/// random fraction of the largest step that keeps the norm at most one.
///
/// `center` itself must have norm at most one.
pub fn norm_bounded_extension<T: Real, R: Rng + ?Sized>(
    domain: &Subspace<T>,
    center: &DMatrix<T>,
    rng: &mut R,
) -> DMatrix<T> {
    let perp = domain.complement();
    if perp.dim() == 0 {
        return center.clone();
    }
    let e = symmetric::<T, R>(perp.dim(), rng);
    let dir = sym(&(perp.basis() * e * perp.basis().transpose()));
    let half = T::from_f64_lossy(0.5);
    let (mut lo, mut hi) = (T::zero(), T::from_f64_lossy(4.0));
    for _ in 0..60 {
        let mid = (lo + hi) * half;
        if sym_norm(&(center + &dir * mid)) <= T::one() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t: f64 = rng.random_range(0.0..1.0);
    sym(&(center + dir * (lo * T::from_f64_lossy(t))))
}

/// `(dom_basis, image)` of a positive operator on a random `k`-dimensional
/// subspace of `ℝⁿ`.
///
/// Extendible instances restrict a random PSD matrix. Degenerate ones have a
/// singular Gram matrix whose kernel is mapped off the domain, which rules out
/// every positive extension; they need `k < n`.
pub fn positive_instance<T: Real, R: Rng + ?Sized>(
    n: usize,
    k: usize,
    degenerate: bool,
    rng: &mut R,
) -> (DMatrix<T>, DMatrix<T>) {
    let basis = orthonormal::<T, R>(n, k, rng);
    if !degenerate {
        let s0 = psd_random_rank::<T, R>(n, rng);
        let image = &s0 * &basis;
        return (basis, image);
    }
    assert!(k >= 1 && k < n, "a degenerate instance needs 1 <= k < n");
    // Gram of rank k-1 with unit kernel vector c
    let frame = orthonormal::<T, R>(k, k, rng);
    let c = frame.column(k - 1).into_owned();
    let l = frame.columns(0, k - 1).into_owned() * gaussian::<T, R>(k - 1, k - 1, rng);
    let gram = if k > 1 {
        sym(&(&l * l.transpose()))
    } else {
        DMatrix::zeros(1, 1)
    };
    let perp = Subspace::from_orthonormal_unchecked(basis.clone()).complement();
    let y = gaussian::<T, R>(perp.dim(), 1, rng);
    let leak = perp.basis() * y * c.transpose();
    let image = &basis * gram + leak;
    (basis, image)
}

/// `(dom_basis, image)` of a symmetric contraction on a random `k`-dimensional
/// subspace, the restriction of a random symmetric matrix scaled to norm one on
/// the subspace (`attain_norm`) or to a random norm in `[0.3, 0.9]`.
pub fn contraction_instance<T: Real, R: Rng + ?Sized>(
    n: usize,
    k: usize,
    attain_norm: bool,
    rng: &mut R,
) -> (DMatrix<T>, DMatrix<T>) {
    let basis = orthonormal::<T, R>(n, k, rng);
    let c = symmetric::<T, R>(n, rng);
    let image = &c * &basis;
    let norm = spectral_norm(&image);
    if norm == T::zero() {
        return (basis, image);
    }
    let target = if attain_norm {
        T::one()
    } else {
        T::from_f64_lossy(rng.random_range(0.3..0.9))
    };
    (basis, image * (target / norm))
}

/// `(A, B)` with `B = S₀·A` for a random PSD `S₀` (returned as the third
/// component), or a degenerate pair whose form `BᵀA` is PSD but has a kernel
/// vector that `B` does not annihilate.
pub fn equation_instance<T: Real, R: Rng + ?Sized>(
    n: usize,
    m: usize,
    degenerate: bool,
    rng: &mut R,
) -> (DMatrix<T>, DMatrix<T>, Option<DMatrix<T>>) {
    if !degenerate {
        // spectra bounded away from zero keep sym(BᵀA) resolvable at the default
        // rank cutoff; a Wishart plant occasionally is not
        let r = n.min(m);
        let a = orthonormal::<T, R>(n, r, rng)
            * spectrum::<T, R>(r, 0.5, 2.0, rng)
            * orthonormal::<T, R>(m, r, rng).transpose();
        let rank = if n == 0 || rng.random_bool(0.5) {
            n
        } else {
            rng.random_range(1..=n)
        };
        let q = orthonormal::<T, R>(n, rank, rng);
        let s0 = sym(&(&q * spectrum::<T, R>(rank, 0.1, 2.0, rng) * q.transpose()));
        let b = &s0 * &a;
        return (a, b, Some(s0));
    }
    let (dom, image) = positive_instance::<T, R>(n, m, true, rng);
    let mix = well_conditioned::<T, R>(m, rng);
    (dom * &mix, image * mix, None)
}

/// Diagonal `r × r` matrix with entries uniform in `[lo, hi)`.
fn spectrum<T: Real, R: Rng + ?Sized>(r: usize, lo: f64, hi: f64, rng: &mut R) -> DMatrix<T> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_fn(r, |_, _| {
        T::from_f64_lossy(rng.random_range(lo..hi))
    }))
}

/// Random `m × m` matrix with singular values in `[0.5, 2]`.
fn well_conditioned<T: Real, R: Rng + ?Sized>(m: usize, rng: &mut R) -> DMatrix<T> {
    let u = orthonormal::<T, R>(m, m, rng);
    let v = orthonormal::<T, R>(m, m, rng);
    u * spectrum::<T, R>(m, 0.5, 2.0, rng) * v.transpose()
}

/// Largest eigenvalue magnitude of a symmetric matrix.
pub fn sym_norm<T: Real>(m: &DMatrix<T>) -> T {
    SymEigen::new(m).abs_max()
}
