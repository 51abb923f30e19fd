//! Tolerance-aware dense linear algebra.
//!
//! Every rank, range, positivity and ordering decision made anywhere in the crate is
//! made by a function in this module, against a [`ToleranceProfile`].
//!
//! Rank cutoffs are relative: a singular value counts when it exceeds
//! `rank_rel · σ_max`. The `*_floor` variants raise the reference scale to
//! `max(σ_max, floor)`, which is how callers keep a matrix that is zero up to
//! rounding (a Gram matrix of a degenerate operator, say) from being inflated to
//! full rank by its own noise.

use nalgebra::linalg::{Cholesky, SymmetricEigen};
use nalgebra::{DMatrix, DVector};

use crate::{Error, Real, Result, ToleranceProfile};

/// Thin singular value decomposition with singular values in descending order.
#[derive(Clone, Debug)]
pub struct Svd<T: Real> {
    /// `rows × p` left singular vectors, `p = min(rows, cols)`.
    pub u: DMatrix<T>,
    pub singular_values: Vec<T>,
    /// `cols × p` right singular vectors.
    pub v: DMatrix<T>,
}

impl<T: Real> Svd<T> {
    pub fn new(m: &DMatrix<T>) -> Self {
        let (rows, cols) = m.shape();
        if rows == 0 || cols == 0 {
            return Self {
                u: DMatrix::zeros(rows, 0),
                singular_values: Vec::new(),
                v: DMatrix::zeros(cols, 0),
            };
        }
        // nalgebra's SVD occasionally returns a wrong factorization of a
        // rank-deficient input, so the decomposition is done by faer in f64
        let a = faer::Mat::<f64>::from_fn(rows, cols, |r, c| m[(r, c)].to_f64_lossy());
        let svd = a.thin_svd().expect("SVD of a finite matrix converges");
        let (fu, fs, fv) = (svd.U(), svd.S().column_vector(), svd.V());
        let mut order: Vec<usize> = (0..fs.nrows()).collect();
        order.sort_by(|&a, &b| fs[b].partial_cmp(&fs[a]).unwrap_or(std::cmp::Ordering::Equal));
        let singular_values = order.iter().map(|&i| T::from_f64_lossy(fs[i])).collect();
        let u = DMatrix::from_fn(rows, order.len(), |r, c| T::from_f64_lossy(fu[(r, order[c])]));
        let v = DMatrix::from_fn(cols, order.len(), |r, c| T::from_f64_lossy(fv[(r, order[c])]));
        Self { u, singular_values, v }
    }

    pub fn sigma_max(&self) -> T {
        self.singular_values.first().copied().unwrap_or_else(T::zero)
    }

    /// Number of singular values above `rank_rel · max(σ_max, floor)`.
    pub fn rank(&self, floor: T, tol: &ToleranceProfile<T>) -> usize {
        let cutoff = tol.rank_rel * self.sigma_max().max(floor);
        self.singular_values.iter().filter(|&&s| s > cutoff).count()
    }
}

/// Eigendecomposition of `sym(M)` with eigenvalues in ascending order.
#[derive(Clone, Debug)]
pub struct SymEigen<T: Real> {
    pub values: Vec<T>,
    /// Eigenvectors stored as columns, matching `values`.
    pub vectors: DMatrix<T>,
}

impl<T: Real> SymEigen<T> {
    pub fn new(m: &DMatrix<T>) -> Self {
        let n = m.nrows();
        if n == 0 {
            return Self {
                values: Vec::new(),
                vectors: DMatrix::zeros(0, 0),
            };
        }
        let eig = SymmetricEigen::new(sym(m));
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[a]
                .partial_cmp(&eig.eigenvalues[b])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Self { values, vectors }
    }

    pub fn min(&self) -> T {
        self.values.first().copied().unwrap_or_else(T::zero)
    }

    pub fn max(&self) -> T {
        self.values.last().copied().unwrap_or_else(T::zero)
    }

    /// Largest eigenvalue magnitude, i.e. the spectral norm of `sym(M)`.
    pub fn abs_max(&self) -> T {
        self.min().abs().max(self.max().abs())
    }

    /// Rebuild `V · diag(f(λ)) · Vᵀ`.
    pub fn map(&self, f: impl Fn(T) -> T) -> DMatrix<T> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &l) in self.values.iter().enumerate() {
            let fl = f(l);
            scaled.column_mut(j).scale_mut(fl);
        }
        let out = if n == 0 {
            DMatrix::zeros(0, 0)
        } else {
            &scaled * self.vectors.transpose()
        };
        sym(&out)
    }
}

/// A subspace of `ℝⁿ` held as an orthonormal basis (`n × r`, `r` may be zero).
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace<T: Real> {
    basis: DMatrix<T>,
}

impl<T: Real> Subspace<T> {
    /// Wrap a basis that is already orthonormal; rejects bases with
    /// `‖BᵀB − I‖ > residual`.
    pub fn from_orthonormal(basis: DMatrix<T>, tol: &ToleranceProfile<T>) -> Result<Self> {
        check_finite(&basis)?;
        let r = basis.ncols();
        if r > basis.nrows() {
            return Err(Error::ShapeMismatch(format!(
                "{r} basis vectors in dimension {}",
                basis.nrows()
            )));
        }
        let gram = basis.transpose() * &basis - DMatrix::identity(r, r);
        let defect = spectral_norm(&gram);
        if defect > tol.residual {
            return Err(Error::PreconditionViolated(format!(
                "basis is not orthonormal (defect {:e})",
                defect.to_f64_lossy()
            )));
        }
        Ok(Self { basis })
    }

    pub(crate) fn from_orthonormal_unchecked(basis: DMatrix<T>) -> Self {
        Self { basis }
    }

    /// Column span of `m`, with the relative rank cutoff.
    pub fn span(m: &DMatrix<T>, tol: &ToleranceProfile<T>) -> Self {
        range_basis_floor(m, T::zero(), tol)
    }

    pub fn zero(n: usize) -> Self {
        Self {
            basis: DMatrix::zeros(n, 0),
        }
    }

    pub fn full(n: usize) -> Self {
        Self {
            basis: DMatrix::identity(n, n),
        }
    }

    /// Span of the given standard basis vectors.
    pub fn coordinate(n: usize, indices: &[usize]) -> Self {
        let mut basis = DMatrix::zeros(n, indices.len());
        for (j, &i) in indices.iter().enumerate() {
            basis[(i, j)] = T::one();
        }
        Self { basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<T> {
        &self.basis
    }

    pub fn into_basis(self) -> DMatrix<T> {
        self.basis
    }

    /// Orthogonal projector `B·Bᵀ`.
    pub fn projector(&self) -> DMatrix<T> {
        let n = self.ambient_dim();
        if self.dim() == 0 {
            return DMatrix::zeros(n, n);
        }
        &self.basis * self.basis.transpose()
    }

    /// Orthogonal complement in the ambient space.
    pub fn complement(&self) -> Self {
        let n = self.ambient_dim();
        if self.dim() == 0 {
            return Self::full(n);
        }
        if self.dim() == n {
            return Self::zero(n);
        }
        let eig = SymEigen::new(&(DMatrix::identity(n, n) - self.projector()));
        let half = T::from_f64_lossy(0.5);
        let cols: Vec<usize> = (0..n).filter(|&j| eig.values[j] > half).collect();
        Self {
            basis: eig.vectors.select_columns(cols.iter()),
        }
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim()
    }
}

/// `(M + Mᵀ)/2`.
pub fn sym<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    let half = T::from_f64_lossy(0.5);
    (m + m.transpose()) * half
}

pub fn check_finite<T: Real>(m: &DMatrix<T>) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn spectral_norm<T: Real>(m: &DMatrix<T>) -> T {
    Svd::new(m).sigma_max()
}

pub fn vector_norm<T: Real>(v: &DVector<T>) -> T {
    v.norm()
}

/// Number of singular values `σ_i > rank_rel · σ_max`.
pub fn rank_tol<T: Real>(m: &DMatrix<T>, tol: &ToleranceProfile<T>) -> usize {
    Svd::new(m).rank(T::zero(), tol)
}

/// Orthonormal basis of `ran M`, keeping singular values above
/// `rank_rel · max(σ_max, floor)`.
pub fn range_basis_floor<T: Real>(m: &DMatrix<T>, floor: T, tol: &ToleranceProfile<T>) -> Subspace<T> {
    let svd = Svd::new(m);
    let r = svd.rank(floor, tol);
    Subspace {
        basis: svd.u.columns(0, r).into_owned(),
    }
}

/// Orthonormal basis of `ker M ⊆ ℝ^cols`, with the same cutoff as
/// [`range_basis_floor`].
pub fn null_space_floor<T: Real>(m: &DMatrix<T>, floor: T, tol: &ToleranceProfile<T>) -> Subspace<T> {
    range_basis_floor(&m.transpose(), floor, tol).complement()
}

/// Moore–Penrose pseudoinverse with the relative rank cutoff.
pub fn pinv<T: Real>(m: &DMatrix<T>, tol: &ToleranceProfile<T>) -> DMatrix<T> {
    pinv_floor(m, T::zero(), tol)
}

/// Pseudoinverse whose cutoff is `rank_rel · max(σ_max, floor)`.
pub fn pinv_floor<T: Real>(m: &DMatrix<T>, floor: T, tol: &ToleranceProfile<T>) -> DMatrix<T> {
    let (rows, cols) = m.shape();
    let svd = Svd::new(m);
    let r = svd.rank(floor, tol);
    if r == 0 {
        return DMatrix::zeros(cols, rows);
    }
    let mut v = svd.v.columns(0, r).into_owned();
    for j in 0..r {
        let inv = T::one() / svd.singular_values[j];
        v.column_mut(j).scale_mut(inv);
    }
    v * svd.u.columns(0, r).transpose()
}

/// Smallest eigenvalue of `sym(M)` together with the admissible threshold
/// `−psd_slack · max(‖M‖₂, 1)`.
pub fn psd_margin<T: Real>(m: &DMatrix<T>, tol: &ToleranceProfile<T>) -> (T, T) {
    let eig = SymEigen::new(m);
    let threshold = -(tol.psd_slack * eig.abs_max().max(T::one()));
    (eig.min(), threshold)
}

/// `λ_min(sym M) ≥ −psd_slack · max(‖M‖₂, 1)`.
///
/// The norm is taken of `sym(M)`; the two agree on the symmetric inputs used
/// throughout the crate.
pub fn is_psd<T: Real>(m: &DMatrix<T>, tol: &ToleranceProfile<T>) -> bool {
    let (min, threshold) = psd_margin(m, tol);
    min >= threshold
}

pub(crate) fn require_psd<T: Real>(m: &DMatrix<T>, tol: &ToleranceProfile<T>) -> Result<()> {
    let (min, threshold) = psd_margin(m, tol);
    if min >= threshold {
        Ok(())
    } else {
        Err(Error::NotPsd {
            min_eigenvalue: min.to_f64_lossy(),
        })
    }
}

/// Symmetric PSD square root of `sym(M)`.
///
/// Eigenvalues at or below `rank_rel · λ_max` (including negative ones within
/// the PSD slack) are set to zero before rooting, so `ran sqrt_psd(M)` agrees
/// with the range decided for `M` itself.
pub fn sqrt_psd<T: Real>(m: &DMatrix<T>, tol: &ToleranceProfile<T>) -> Result<DMatrix<T>> {
    sqrt_psd_floor(m, T::zero(), tol)
}

/// [`sqrt_psd`] with the zeroing cutoff raised to `rank_rel · max(λ_max, floor)`.
pub fn sqrt_psd_floor<T: Real>(m: &DMatrix<T>, floor: T, tol: &ToleranceProfile<T>) -> Result<DMatrix<T>> {
    let eig = SymEigen::new(m);
    let threshold = -(tol.psd_slack * eig.abs_max().max(T::one()));
    if eig.min() < threshold {
        return Err(Error::NotPsd {
            min_eigenvalue: eig.min().to_f64_lossy(),
        });
    }
    let cutoff = tol.rank_rel * eig.max().max(floor);
    Ok(eig.map(|l| if l > cutoff { l.sqrt() } else { T::zero() }))
}

/// Range of a PSD matrix (equivalently of its square root): eigenvectors with
/// `λ > rank_rel · max(λ_max, floor)`.
pub fn psd_range_floor<T: Real>(m: &DMatrix<T>, floor: T, tol: &ToleranceProfile<T>) -> Subspace<T> {
    let eig = SymEigen::new(m);
    let cutoff = tol.rank_rel * eig.max().max(floor);
    let cols: Vec<usize> = (0..eig.values.len()).filter(|&j| eig.values[j] > cutoff).collect();
    Subspace {
        basis: eig.vectors.select_columns(cols.iter()),
    }
}

/// Relative distance of `ran X` from `ran Y`: `‖(I − Y·Y⁺)·X‖₂ / max(‖X‖₂, 1)`.
pub fn range_residual<T: Real>(x: &DMatrix<T>, y: &DMatrix<T>, tol: &ToleranceProfile<T>) -> T {
    assert_eq!(x.nrows(), y.nrows(), "range test needs equal row counts");
    if x.ncols() == 0 {
        return T::zero();
    }
    let q = Subspace::span(y, tol);
    range_residual_subspace(x, &q)
}

fn range_residual_subspace<T: Real>(x: &DMatrix<T>, q: &Subspace<T>) -> T {
    let outside = if q.dim() == 0 {
        x.clone()
    } else {
        x - q.basis() * (q.basis().transpose() * x)
    };
    spectral_norm(&outside) / spectral_norm(x).max(T::one())
}

/// Douglas range-inclusion test `ran X ⊆ ran Y`.
pub fn range_leq<T: Real>(x: &DMatrix<T>, y: &DMatrix<T>, tol: &ToleranceProfile<T>) -> bool {
    range_residual(x, y, tol) <= tol.residual
}

/// `ran X ⊆ V` for a subspace given by its orthonormal basis.
pub fn range_in_subspace<T: Real>(x: &DMatrix<T>, v: &Subspace<T>, tol: &ToleranceProfile<T>) -> bool {
    x.ncols() == 0 || range_residual_subspace(x, v) <= tol.residual
}

/// Orthonormal basis of `⋂ᵢ ran Mᵢ`.
///
/// The running intersection `Q` is cut down by each further range `P`: directions
/// `Q·c` with `‖(I − P·Pᵀ)·Q·c‖ ≤ residual` survive, the same criterion that
/// [`range_leq`] applies.
///
/// # Panics
///
/// If `ms` is empty or the row counts differ.
pub fn range_intersect<T: Real>(ms: &[DMatrix<T>], tol: &ToleranceProfile<T>) -> Subspace<T> {
    let spans: Vec<Subspace<T>> = ms.iter().map(|m| Subspace::span(m, tol)).collect();
    intersect_subspaces(&spans, tol)
}

/// Intersection of subspaces already held as orthonormal bases.
pub fn intersect_subspaces<T: Real>(spaces: &[Subspace<T>], tol: &ToleranceProfile<T>) -> Subspace<T> {
    let (first, rest) = spaces.split_first().expect("at least one subspace");
    let n = first.ambient_dim();
    let mut q = first.basis.clone();
    for p in rest {
        assert_eq!(p.ambient_dim(), n, "subspaces live in different spaces");
        if q.ncols() == 0 {
            break;
        }
        let outside = if p.dim() == 0 {
            q.clone()
        } else {
            &q - p.basis() * (p.basis().transpose() * &q)
        };
        let svd = Svd::new(&outside);
        // q has at most n columns, so the thin SVD carries the full right basis.
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&j| svd.singular_values[j] <= tol.residual)
            .collect();
        q = &q * svd.v.select_columns(keep.iter());
    }
    Subspace { basis: q }
}

/// Loewner order `A ≤ B`, i.e. `B − A` PSD.
pub fn loewner_leq<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>, tol: &ToleranceProfile<T>) -> bool {
    is_psd(&(b - a), tol)
}

/// Form order `A ⪯ B` through the resolvents: `(I+B)⁻¹ ≤ (I+A)⁻¹`.
///
/// On PSD inputs this coincides with [`loewner_leq`]; both are kept so the
/// collapse can be checked.
pub fn form_order_leq<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>, tol: &ToleranceProfile<T>) -> Result<bool> {
    require_psd(a, tol)?;
    require_psd(b, tol)?;
    let ra = resolvent(a, tol);
    let rb = resolvent(b, tol);
    Ok(loewner_leq(&rb, &ra, tol))
}

fn resolvent<T: Real>(a: &DMatrix<T>, tol: &ToleranceProfile<T>) -> DMatrix<T> {
    let n = a.nrows();
    let shifted = sym(a) + DMatrix::identity(n, n);
    match Cholesky::new(shifted.clone()) {
        Some(chol) => sym(&chol.inverse()),
        None => pinv(&shifted, tol),
    }
}

/// `‖X − Y‖₂ / max(‖Y‖₂, 1)`.
pub fn relative_diff<T: Real>(x: &DMatrix<T>, y: &DMatrix<T>) -> T {
    spectral_norm(&(x - y)) / spectral_norm(y).max(T::one())
}
