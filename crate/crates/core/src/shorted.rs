//! Shortening a PSD matrix to a subspace: `S − (S|_D)_N`.
//!
//! The shorted matrix is the largest PSD matrix below `S` whose range lies in `D^⊥`.
//! On coordinate subspaces it is the generalized Schur complement, which
//! [`schur_oracle`] computes by block partitioning as an independent check.

use nalgebra::{DMatrix, DVector};

use crate::numerics::{
    intersect_subspaces, is_psd, loewner_leq, pinv_floor, range_in_subspace, range_leq, require_psd, spectral_norm,
    sqrt_psd, sqrt_psd_floor, sym, Subspace,
};
use crate::partial_op::{is_extendible, PartialOperator};
use crate::{kvn, Error, Real, Result, ToleranceProfile};

#[derive(Clone, Debug, PartialEq)]
pub struct ShortedResult<T: Real> {
    /// `S − (S|_D)_N`.
    pub shorted: DMatrix<T>,
    /// `(S|_D)_N`.
    pub kvn_part: DMatrix<T>,
    pub subspace: Subspace<T>,
}

fn check_inputs<T: Real>(s: &DMatrix<T>, d: &Subspace<T>, tol: &ToleranceProfile<T>) -> Result<()> {
    if s.nrows() != s.ncols() || s.nrows() != d.ambient_dim() {
        return Err(Error::ShapeMismatch(format!(
            "matrix is {}x{}, subspace lives in dimension {}",
            s.nrows(),
            s.ncols(),
            d.ambient_dim()
        )));
    }
    crate::numerics::check_finite(s)?;
    require_psd(s, tol)
}

/// Shorten `S` to `D`.
pub fn short_to<T: Real>(s: &DMatrix<T>, d: &Subspace<T>, tol: &ToleranceProfile<T>) -> Result<ShortedResult<T>> {
    check_inputs(s, d, tol)?;
    let s = sym(s);
    // S extends S|_D, so the restriction always has a Krein–von Neumann extension.
    let restricted = PartialOperator::restriction_unchecked(&s, d, *tol);
    let kvn_part = restricted.kvn_closed_form();
    Ok(ShortedResult {
        shorted: sym(&(&s - &kvn_part)),
        kvn_part,
        subspace: d.clone(),
    })
}

/// `inf_{f ∈ D} ⟨S(f+h), f+h⟩` by the closed-form minimizer
/// `f* = B·c*`, `c* = −(BᵀSB)⁺·BᵀS·h`.
pub fn shorted_qform_variational<T: Real>(
    s: &DMatrix<T>,
    d: &Subspace<T>,
    h: &DVector<T>,
    tol: &ToleranceProfile<T>,
) -> T {
    let s = sym(s);
    let b = d.basis();
    let v = if d.dim() == 0 {
        h.clone()
    } else {
        let sb = &s * b;
        let gram = b.transpose() * &sb;
        let c = -(pinv_floor(&gram, spectral_norm(&sb), tol) * (sb.transpose() * h));
        h + b * c
    };
    (v.transpose() * &s * &v)[(0, 0)]
}

/// `‖(S − T_N)^{1/2} h‖² = hᵀ·shorted·h`, cross-checked against the variational
/// infimum.
pub fn shorted_qform<T: Real>(s: &DMatrix<T>, d: &Subspace<T>, h: &DVector<T>, tol: &ToleranceProfile<T>) -> Result<T> {
    if h.len() != d.ambient_dim() {
        return Err(Error::ShapeMismatch(format!(
            "vector of length {} for dimension {}",
            h.len(),
            d.ambient_dim()
        )));
    }
    let r = short_to(s, d, tol)?;
    let value = (h.transpose() * &r.shorted * h)[(0, 0)];
    let oracle = shorted_qform_variational(s, d, h, tol);
    let scale = spectral_norm(s) * h.norm_squared();
    let gap = (value - oracle).abs();
    if gap > tol.residual * scale {
        return Err(Error::OracleMismatch {
            check: "shorted quadratic form",
            discrepancy: (if scale > T::zero() { gap / scale } else { gap }).to_f64_lossy(),
        });
    }
    Ok(value)
}

/// `ran (S − T_N)^{1/2}`, confirmed equal to `ran S^{1/2} ∩ D^⊥`.
pub fn shorted_root_range<T: Real>(s: &DMatrix<T>, d: &Subspace<T>, tol: &ToleranceProfile<T>) -> Result<Subspace<T>> {
    let r = short_to(s, d, tol)?;
    let scale = spectral_norm(s);
    let direct = Subspace::span(&sqrt_psd_floor(&r.shorted, scale, tol)?, tol);
    let root = sqrt_psd(s, tol)?;
    let intersection = intersect_subspaces(&[Subspace::span(&root, tol), d.complement()], tol);
    let same = direct.dim() == intersection.dim()
        && range_in_subspace(direct.basis(), &intersection, tol)
        && range_in_subspace(intersection.basis(), &direct, tol);
    if !same {
        return Err(Error::RangeIdentityViolated {
            direct: direct.dim(),
            intersection: intersection.dim(),
        });
    }
    Ok(direct)
}

/// Generalized Schur complement of the leading `p × p` block, embedded as
/// `[[0, 0], [0, C − Bᵀ·A⁺·B]]`.
pub fn schur_oracle<T: Real>(s: &DMatrix<T>, p: usize, tol: &ToleranceProfile<T>) -> Result<DMatrix<T>> {
    let n = s.nrows();
    if s.ncols() != n || p > n {
        return Err(Error::ShapeMismatch(format!(
            "cannot split a {}x{} matrix at {p}",
            n,
            s.ncols()
        )));
    }
    require_psd(s, tol)?;
    let s = sym(s);
    let mut out = DMatrix::zeros(n, n);
    let m = n - p;
    if m == 0 {
        return Ok(out);
    }
    let c = s.view((p, p), (m, m)).into_owned();
    let complement = if p == 0 {
        c
    } else {
        let a = s.view((0, 0), (p, p)).into_owned();
        let b = s.view((0, p), (p, m)).into_owned();
        c - b.transpose() * pinv_floor(&a, spectral_norm(&s), tol) * b
    };
    out.view_mut((p, p), (m, m)).copy_from(&sym(&complement));
    Ok(out)
}

/// [`schur_oracle`] for an arbitrary subspace: rotate into the basis `[B, B⊥]`,
/// take the Schur complement of the leading block and rotate back.
pub fn schur_oracle_on<T: Real>(s: &DMatrix<T>, d: &Subspace<T>, tol: &ToleranceProfile<T>) -> Result<DMatrix<T>> {
    check_inputs(s, d, tol)?;
    let n = s.nrows();
    let perp = d.complement();
    let q = DMatrix::from_fn(n, n, |r, c| {
        if c < d.dim() {
            d.basis()[(r, c)]
        } else {
            perp.basis()[(r, c - d.dim())]
        }
    });
    let rotated = sym(&(q.transpose() * s * &q));
    let c = schur_oracle(&rotated, d.dim(), tol)?;
    Ok(sym(&(&q * c * q.transpose())))
}

/// With `S ≤ T` and `ran S ⊆ D^⊥`, `S` stays below the shortening of `T` to `D`.
///
/// Returns `loewner_leq(S, short_to(T, D))`, which is `true` whenever the checked
/// preconditions hold.
pub fn shorted_monotone_floor<T: Real>(
    s: &DMatrix<T>,
    t: &DMatrix<T>,
    d: &Subspace<T>,
    tol: &ToleranceProfile<T>,
) -> Result<bool> {
    if !is_psd(s, tol) || !is_psd(t, tol) {
        return Err(Error::PreconditionViolated("S and T must be PSD".into()));
    }
    if !loewner_leq(s, t, tol) {
        return Err(Error::PreconditionViolated("S must be below T".into()));
    }
    if !range_in_subspace(s, &d.complement(), tol) {
        return Err(Error::PreconditionViolated(
            "ran S must lie in the orthogonal complement of D".into(),
        ));
    }
    let r = short_to(t, d, tol)?;
    Ok(loewner_leq(s, &r.shorted, tol))
}

/// The two halves of the order comparison of Krein–von Neumann extensions on a
/// common domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MonotoneReport {
    /// `⟨S f, f⟩ ≤ ⟨T f, f⟩` on the domain.
    pub form_dominance: bool,
    /// `ran S_N^{1/2} ⊆ ran T_N^{1/2}`.
    pub range_inclusion: bool,
}

impl MonotoneReport {
    /// Both conditions together, equivalent to `S_N ≤ T_N`.
    pub fn holds(&self) -> bool {
        self.form_dominance && self.range_inclusion
    }
}

/// Compare `S_N` and `T_N` through form dominance on the domain plus range
/// inclusion of the square roots.
///
/// Form dominance alone does not order the extensions: with `S: e1 ↦ e1` and
/// `T: e1 ↦ e1 + e2`, `⟨Sf,f⟩ = ⟨Tf,f⟩` yet `T_N − S_N` is indefinite.
pub fn kvn_monotone_check<T: Real>(ps: &PartialOperator<T>, pt: &PartialOperator<T>) -> Result<MonotoneReport> {
    let tol = ps.tol();
    if ps.ambient_dim() != pt.ambient_dim()
        || ps.dim() != pt.dim()
        || !range_leq(ps.dom_basis(), pt.dom_basis(), tol)
        || !range_leq(pt.dom_basis(), ps.dom_basis(), tol)
    {
        return Err(Error::DomainMismatch);
    }
    if !is_extendible(ps) || !is_extendible(pt) {
        return Err(Error::NoExtension);
    }
    // express T in the domain coordinates used by S
    let rotation = pt.dom_basis().transpose() * ps.dom_basis();
    let t_image = pt.image() * rotation;
    let gram_t = sym(&(ps.dom_basis().transpose() * t_image));
    let form_dominance = loewner_leq(ps.gram(), &gram_t, tol);

    let sn = kvn::kvn_extension(ps)?;
    let tn = kvn::kvn_extension(pt)?;
    let range_inclusion = range_leq(&sqrt_psd(&sn, tol)?, &sqrt_psd(&tn, tol)?, tol);
    Ok(MonotoneReport {
        form_dominance,
        range_inclusion,
    })
}
