//! Positive symmetric operators known only on a subspace.
//!
//! A [`PartialOperator`] stores an orthonormal basis `B` of its domain `D` and the
//! images `X = T·B`. The Gram matrix `G = sym(Bᵀ·X)` carries the energy form
//! `⟨Tf, f⟩` in the coordinates of `B`.

use nalgebra::{DMatrix, DVector};

use crate::numerics::{
    self, check_finite, intersect_subspaces, null_space_floor, pinv_floor, psd_margin, spectral_norm, sym, Subspace,
    Svd, SymEigen,
};
use crate::{Error, Real, Result, ToleranceProfile};

/// Energy form of a partial operator in the coordinates of its domain basis.
#[derive(Clone, Debug, PartialEq)]
pub struct GramForm<T: Real> {
    pub g: DMatrix<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartialOperator<T: Real> {
    dom_basis: DMatrix<T>,
    image: DMatrix<T>,
    gram: GramForm<T>,
    /// Reference scale for rank decisions on `G`.
    floor: T,
    tol: ToleranceProfile<T>,
}

/// Independently evaluated extendibility conditions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Theorem1Report {
    /// `D_*(T) = ℝⁿ`.
    pub cond_dstar_dense: bool,
    /// `D_*(T)^⊥ ∩ ran T = {0}`.
    pub cond_perp_ran: bool,
    /// `ker G ⊆ ker X`: every domain vector with zero energy is mapped to zero.
    pub cond_pos_closable: bool,
    pub all_agree: bool,
}

/// Re-express `(dom, image)` over an orthonormal basis of `ran dom`.
///
/// Returns `(B, X)` with `B = U_r` from the SVD `dom = U Σ Vᵀ` and
/// `X = image · V_r · Σ_r⁻¹`. Fails if some `c` with `dom·c = 0` has `image·c ≠ 0`.
pub(crate) fn orthonormalize<T: Real>(
    dom: &DMatrix<T>,
    image: &DMatrix<T>,
    tol: &ToleranceProfile<T>,
) -> Result<(DMatrix<T>, DMatrix<T>)> {
    if dom.shape() != image.shape() {
        return Err(Error::ShapeMismatch(format!(
            "domain basis is {}x{} but image is {}x{}",
            dom.nrows(),
            dom.ncols(),
            image.nrows(),
            image.ncols()
        )));
    }
    check_finite(dom)?;
    check_finite(image)?;
    let (n, k) = dom.shape();
    let svd = Svd::new(dom);
    let r = svd.rank(T::zero(), tol);
    let basis = svd.u.columns(0, r).into_owned();
    let mut coords = svd.v.columns(0, r).into_owned();
    for j in 0..r {
        let inv = T::one() / svd.singular_values[j];
        coords.column_mut(j).scale_mut(inv);
    }
    let new_image = if r == 0 { DMatrix::zeros(n, 0) } else { image * coords };

    if r < k {
        // complement in ℝ^k also covers k > n, where the thin SVD has fewer than k columns
        let null = Subspace::from_orthonormal_unchecked(svd.v.columns(0, r).into_owned()).complement();
        let residual = spectral_norm(&(image * null.basis()));
        if residual > tol.residual * spectral_norm(image).max(T::one()) {
            return Err(Error::InconsistentAction {
                residual: residual.to_f64_lossy(),
            });
        }
    }
    Ok((basis, new_image))
}

impl<T: Real> PartialOperator<T> {
    /// Validate and normalize a positive symmetric operator given on `span(dom_basis)`.
    ///
    /// Column `j` of `image` is the image of column `j` of `dom_basis`. The domain
    /// basis may be redundant; it is replaced by an orthonormal one and the image
    /// is carried along.
    pub fn new(dom_basis: &DMatrix<T>, image: &DMatrix<T>, tol: ToleranceProfile<T>) -> Result<Self> {
        tol.validate()?;
        let (basis, image) = orthonormalize(dom_basis, image, &tol)?;
        let raw = basis.transpose() * &image;
        let scale = spectral_norm(&image).max(T::one());
        let asymmetry = spectral_norm(&(&raw - raw.transpose()));
        if asymmetry > tol.residual * scale {
            return Err(Error::NotSymmetric {
                asymmetry: asymmetry.to_f64_lossy(),
            });
        }
        let g = sym(&raw);
        let (min, threshold) = psd_margin(&g, &tol);
        if min < threshold {
            return Err(Error::NotPositiveForm {
                min_eigenvalue: min.to_f64_lossy(),
            });
        }
        let floor = spectral_norm(&image);
        Ok(Self {
            dom_basis: basis,
            image,
            gram: GramForm { g },
            floor,
            tol,
        })
    }

    /// `S|_D` for a symmetric PSD matrix `S`, trusted without revalidation.
    pub(crate) fn restriction_unchecked(s: &DMatrix<T>, d: &Subspace<T>, tol: ToleranceProfile<T>) -> Self {
        let basis = d.basis().clone();
        let image = s * &basis;
        Self::from_parts_unchecked(basis, image, None, tol)
    }

    /// Build from an orthonormal basis and image whose form is known to be
    /// symmetric and positive. `floor` defaults to `‖image‖₂`.
    pub(crate) fn from_parts_unchecked(
        basis: DMatrix<T>,
        image: DMatrix<T>,
        floor: Option<T>,
        tol: ToleranceProfile<T>,
    ) -> Self {
        let g = sym(&(basis.transpose() * &image));
        let floor = floor.unwrap_or_else(|| spectral_norm(&image));
        Self {
            dom_basis: basis,
            image,
            gram: GramForm { g },
            floor,
            tol,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.dom_basis.nrows()
    }

    /// Dimension of the domain.
    pub fn dim(&self) -> usize {
        self.dom_basis.ncols()
    }

    /// Orthonormal basis of the domain (`n × k`).
    pub fn dom_basis(&self) -> &DMatrix<T> {
        &self.dom_basis
    }

    /// Images of the domain basis vectors (`n × k`).
    pub fn image(&self) -> &DMatrix<T> {
        &self.image
    }

    pub fn gram(&self) -> &DMatrix<T> {
        &self.gram.g
    }

    pub fn gram_form(&self) -> &GramForm<T> {
        &self.gram
    }

    pub fn tol(&self) -> &ToleranceProfile<T> {
        &self.tol
    }

    pub fn domain(&self) -> Subspace<T> {
        Subspace::from_orthonormal_unchecked(self.dom_basis.clone())
    }

    /// Scale against which `G` is judged singular.
    pub fn scale(&self) -> T {
        self.floor
    }

    /// `G⁺` with the shared cutoff.
    pub fn gram_pinv(&self) -> DMatrix<T> {
        pinv_floor(&self.gram.g, self.floor, &self.tol)
    }

    /// Orthonormal basis of `ker G` (`k × d`).
    pub fn gram_kernel(&self) -> Subspace<T> {
        null_space_floor(&self.gram.g, self.floor, &self.tol)
    }

    /// `‖X·N_G‖₂ / max(‖X‖₂, 1)`: how far zero-energy vectors are from being
    /// annihilated.
    pub fn kernel_leak(&self) -> T {
        let kernel = self.gram_kernel();
        if kernel.dim() == 0 {
            return T::zero();
        }
        spectral_norm(&(&self.image * kernel.basis())) / spectral_norm(&self.image).max(T::one())
    }

    /// `T(f)` for `f = B·c`.
    pub fn apply_coords(&self, c: &DVector<T>) -> DVector<T> {
        &self.image * c
    }

    /// `T_N = X·G⁺·Xᵀ` without checking that an extension exists.
    pub(crate) fn kvn_closed_form(&self) -> DMatrix<T> {
        let n = self.ambient_dim();
        if self.dim() == 0 {
            return DMatrix::zeros(n, n);
        }
        // X = B·G + Y with Y ⟂ D. Only the D^⊥ block Y·G⁺·Yᵀ goes through the
        // pseudoinverse; forming X·G⁺·Xᵀ directly loses ‖G‖²/λ_min(G) digits on D.
        let b = &self.dom_basis;
        let y = &self.image - b * (b.transpose() * &self.image);
        let cross = b * y.transpose();
        sym(&(b * &self.gram.g * b.transpose() + &cross + cross.transpose() + &y * self.gram_pinv() * y.transpose()))
    }
}

/// `D_*(T) = {g ∈ ℝⁿ : Xᵀ·g ∈ ran G}`.
///
/// The set of `g` for which `|⟨Th, g⟩|²` is bounded by a multiple of `⟨Th, h⟩`.
pub fn dstar<T: Real>(p: &PartialOperator<T>) -> Subspace<T> {
    let n = p.ambient_dim();
    if p.dim() == 0 {
        return Subspace::full(n);
    }
    let k = p.dim();
    let proj_ker = DMatrix::identity(k, k) - p.gram() * p.gram_pinv();
    let constraint = proj_ker * p.image().transpose();
    null_space_floor(&constraint, p.scale(), p.tol())
}

/// Whether a bounded positive extension exists, and if so the least `γ` with
/// `‖Tf‖² ≤ γ·⟨Tf, f⟩` on `D`, which is also `‖T_N‖₂`.
pub fn has_bounded_psd_extension<T: Real>(p: &PartialOperator<T>) -> (bool, Option<T>) {
    if p.kernel_leak() > p.tol().residual {
        return (false, None);
    }
    if p.dim() == 0 {
        return (true, Some(T::zero()));
    }
    let eig = SymEigen::new(p.gram());
    let cutoff = p.tol().rank_rel * eig.max().max(p.scale());
    let inv_root = eig.map(|l| if l > cutoff { T::one() / l.sqrt() } else { T::zero() });
    let xtx = p.image().transpose() * p.image();
    let gamma = SymEigen::new(&(&inv_root * xtx * &inv_root)).max().max(T::zero());
    (true, Some(gamma))
}

pub fn is_extendible<T: Real>(p: &PartialOperator<T>) -> bool {
    has_bounded_psd_extension(p).0
}

/// Evaluate the density, perpendicular-range and positive-closability conditions,
/// each by its own computation.
pub fn theorem1_report<T: Real>(p: &PartialOperator<T>) -> Theorem1Report {
    let n = p.ambient_dim();
    let ds = dstar(p);
    let cond_dstar_dense = ds.dim() == n;

    let perp = ds.complement();
    let cond_perp_ran = if p.dim() == 0 {
        true
    } else {
        let ran = Subspace::span(p.image(), p.tol());
        intersect_subspaces(&[perp, ran], p.tol()).dim() == 0
    };

    let cond_pos_closable = p.kernel_leak() <= p.tol().residual;

    Theorem1Report {
        cond_dstar_dense,
        cond_perp_ran,
        cond_pos_closable,
        all_agree: cond_dstar_dense == cond_perp_ran && cond_perp_ran == cond_pos_closable,
    }
}

/// `γ·G − XᵀX` PSD: the defining inequality of an admissible bound `γ`.
///
/// Judged scale-free: zero-energy directions must be annihilated, and on `ran G`
/// the whitened form `G^{+1/2}(γG − XᵀX)G^{+1/2}` is compared against `γ` rather
/// than against an absolute floor, so small operators are not waved through.
pub fn gamma_admissible<T: Real>(p: &PartialOperator<T>, gamma: T) -> bool {
    let xtx = p.image().transpose() * p.image();
    if gamma <= T::zero() || p.dim() == 0 {
        return numerics::is_psd(&(p.gram() * gamma - xtx), p.tol());
    }
    if p.kernel_leak() > p.tol().residual {
        return false;
    }
    let eig = SymEigen::new(p.gram());
    let cutoff = p.tol().rank_rel * eig.max().max(p.scale());
    let inv_root = eig.map(|l| if l > cutoff { T::one() / l.sqrt() } else { T::zero() });
    let whitened = &inv_root * (p.gram() * gamma - xtx) * &inv_root;
    numerics::is_psd(&(whitened / gamma), p.tol())
}
