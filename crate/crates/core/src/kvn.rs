//! The Krein–von Neumann extension `T_N`, the smallest positive self-adjoint
//! extension of a positive symmetric operator, and tests for which PSD matrices
//! extend `T` or coincide with `T_N`.
//!
//! In the coordinates of an orthonormal domain basis `B` with images `X` and
//! Gram matrix `G = BᵀX`, the extension has the closed form `T_N = X·G⁺·Xᵀ` and
//! quadratic form `gᵀ·T_N·g = vᵀ·G⁺·v` with `v = Xᵀ·g`.

use nalgebra::{DMatrix, DVector};

use crate::numerics::{is_psd, loewner_leq, range_leq, require_psd, spectral_norm, sqrt_psd, SymEigen};
use crate::partial_op::{is_extendible, PartialOperator};
use crate::{Error, Real, Result};

/// `T_N = X·G⁺·Xᵀ`.
pub fn kvn_extension<T: Real>(p: &PartialOperator<T>) -> Result<DMatrix<T>> {
    if !is_extendible(p) {
        return Err(Error::NoExtension);
    }
    Ok(p.kvn_closed_form())
}

/// `‖T_N^{1/2}·g‖²`, computed from the partial operator alone.
pub fn qform_tn<T: Real>(p: &PartialOperator<T>, g: &DVector<T>) -> Result<T> {
    if !is_extendible(p) {
        return Err(Error::NoExtension);
    }
    if p.dim() == 0 {
        return Ok(T::zero());
    }
    let v = p.image().transpose() * g;
    Ok((v.transpose() * p.gram_pinv() * &v)[(0, 0)])
}

/// `‖S·B − X‖₂ / max(‖X‖₂, 1)`.
pub fn extension_residual<T: Real>(s: &DMatrix<T>, p: &PartialOperator<T>) -> T {
    assert_eq!(s.shape(), (p.ambient_dim(), p.ambient_dim()), "candidate must be n x n");
    if p.dim() == 0 {
        return T::zero();
    }
    spectral_norm(&(s * p.dom_basis() - p.image())) / spectral_norm(p.image()).max(T::one())
}

/// `S` agrees with `T` on its domain.
pub fn is_extension<T: Real>(s: &DMatrix<T>, p: &PartialOperator<T>) -> bool {
    extension_residual(s, p) <= p.tol().residual
}

/// Decide whether a PSD `S` extends `T` through the order characterization:
/// `T_N ≤ S` and `‖S^{1/2} f‖² ≤ ⟨Tf, f⟩` for every `f` in the domain.
///
/// The second condition is checked on the whole domain at once, as
/// `λ_max(BᵀSB − G) ≤ residual · max(‖S‖₂, 1)`.
pub fn characterize_extension<T: Real>(s: &DMatrix<T>, p: &PartialOperator<T>) -> Result<bool> {
    let tol = p.tol();
    require_psd(s, tol)?;
    let tn = kvn_extension(p)?;
    if !loewner_leq(&tn, s, tol) {
        return Ok(false);
    }
    if p.dim() == 0 {
        return Ok(true);
    }
    let excess = p.dom_basis().transpose() * s * p.dom_basis() - p.gram();
    let worst = SymEigen::new(&excess).max();
    Ok(worst <= tol.residual * spectral_norm(s).max(T::one()))
}

/// `ran T_N^{1/2} = ran S^{1/2}` for a PSD extension `S`; holds exactly when `S = T_N`.
pub fn kvn_range_criterion<T: Real>(s: &DMatrix<T>, p: &PartialOperator<T>) -> Result<bool> {
    let tol = p.tol();
    require_psd(s, tol)?;
    let residual = extension_residual(s, p);
    if residual > tol.residual {
        return Err(Error::NotExtension {
            residual: residual.to_f64_lossy(),
        });
    }
    let tn = kvn_extension(p)?;
    let root_s = sqrt_psd(s, tol)?;
    let root_tn = sqrt_psd(&tn, tol)?;
    Ok(range_leq(&root_s, &root_tn, tol) && range_leq(&root_tn, &root_s, tol))
}

/// `‖S − T_N‖₂ ≤ residual · max(‖T_N‖₂, 1)`.
pub fn equals_kvn<T: Real>(s: &DMatrix<T>, tn: &DMatrix<T>, tol: &crate::ToleranceProfile<T>) -> bool {
    spectral_norm(&(s - tn)) <= tol.residual * spectral_norm(tn).max(T::one())
}

/// Any `S` with `T_N ≤ S ≤ R` for a PSD extension `R` extends `T`.
///
/// Returns whether `S` extends `T`; under the checked preconditions this is
/// always `true`.
pub fn verify_sandwich<T: Real>(p: &PartialOperator<T>, r: &DMatrix<T>, s: &DMatrix<T>) -> Result<bool> {
    let tol = p.tol();
    let tn = kvn_extension(p)?;
    if !is_psd(r, tol) || !is_extension(r, p) {
        return Err(Error::PreconditionViolated("R must be a PSD extension".into()));
    }
    if !is_psd(s, tol) {
        return Err(Error::PreconditionViolated("S must be PSD".into()));
    }
    if !loewner_leq(&tn, s, tol) || !loewner_leq(s, r, tol) {
        return Err(Error::PreconditionViolated("S must lie between T_N and R".into()));
    }
    Ok(is_extension(s, p))
}
