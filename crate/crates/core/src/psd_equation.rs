//! PSD solutions of `S·A = B`.
//!
//! A PSD `S` with `S·A = B` is exactly a positive extension of the partial
//! operator `A·x ↦ B·x`, so solvability is the extendibility of that operator and
//! the minimal solution is its Krein–von Neumann extension `B·(BᵀA)⁺·Bᵀ`.

use nalgebra::{DMatrix, DVector};

use crate::numerics::{check_finite, null_space_floor, pinv_floor, psd_margin, spectral_norm, sym, SymEigen};
use crate::{Error, Real, Result, ToleranceProfile};

#[derive(Clone, Debug, PartialEq)]
pub struct Solvability<T: Real> {
    /// `ker A ⊆ ker B`.
    pub well_defined: bool,
    /// `BᵀA = AᵀB`.
    pub symmetric_form: bool,
    /// `sym(BᵀA)` PSD.
    pub positive_form: bool,
    /// `ker sym(BᵀA) ⊆ ker B`.
    pub bounded_condition: bool,
    pub solvable: bool,
    /// `x` with `xᵀ·sym(BᵀA)·x ≈ 0` and `B·x ≠ 0`, present when the bounded
    /// condition fails.
    pub certificate: Option<DVector<T>>,
}

impl<T: Real> Solvability<T> {
    fn into_error(self) -> Error {
        Error::NotSolvable {
            well_defined: self.well_defined,
            symmetric_form: self.symmetric_form,
            positive_form: self.positive_form,
            bounded_condition: self.bounded_condition,
            certificate: self.certificate.map(|x| x.iter().map(|v| v.to_f64_lossy()).collect()),
        }
    }
}

fn check_shapes<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!(
            "A is {}x{} but B is {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    check_finite(a)?;
    check_finite(b)
}

/// Scale of `BᵀA`, used as the floor for its rank decisions.
fn form_scale<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    spectral_norm(a) * spectral_norm(b)
}

pub fn check_solvable<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>, tol: &ToleranceProfile<T>) -> Result<Solvability<T>> {
    check_shapes(a, b)?;
    let b_scale = spectral_norm(b).max(T::one());

    let ker_a = null_space_floor(a, T::zero(), tol);
    let well_defined = ker_a.dim() == 0 || spectral_norm(&(b * ker_a.basis())) <= tol.residual * b_scale;

    let raw = b.transpose() * a;
    let scale = form_scale(a, b);
    let symmetric_form = spectral_norm(&(&raw - raw.transpose())) <= tol.residual * scale.max(T::one());
    let form = sym(&raw);
    let (min, threshold) = psd_margin(&form, tol);
    let positive_form = min >= threshold;

    // kernel of the form from its eigenvectors, so a certificate is one of them
    let eig = SymEigen::new(&form);
    let cutoff = tol.rank_rel * eig.abs_max().max(scale);
    let mut certificate = None;
    let mut worst = T::zero();
    for (j, &l) in eig.values.iter().enumerate() {
        if l.abs() <= cutoff {
            let x = eig.vectors.column(j).into_owned();
            let bx = (b * &x).norm();
            if bx > worst {
                worst = bx;
                certificate = Some(x);
            }
        }
    }
    let bounded_condition = worst <= tol.residual * b_scale;
    if bounded_condition {
        certificate = None;
    }

    Ok(Solvability {
        well_defined,
        symmetric_form,
        positive_form,
        bounded_condition,
        solvable: well_defined && symmetric_form && positive_form && bounded_condition,
        certificate,
    })
}

/// The smallest PSD `S` with `S·A = B`: `B·sym(BᵀA)⁺·Bᵀ`.
pub fn solve_min<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>, tol: &ToleranceProfile<T>) -> Result<DMatrix<T>> {
    let report = check_solvable(a, b, tol)?;
    if !report.solvable {
        return Err(report.into_error());
    }
    let n = a.nrows();
    if a.ncols() == 0 {
        return Ok(DMatrix::zeros(n, n));
    }
    let form = sym(&(b.transpose() * a));
    let inv = pinv_floor(&form, form_scale(a, b), tol);
    Ok(sym(&(b * inv * b.transpose())))
}

/// `‖S·A − B‖₂ / max(‖B‖₂, 1)`.
pub fn equation_residual<T: Real>(s: &DMatrix<T>, a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    spectral_norm(&(s * a - b)) / spectral_norm(b).max(T::one())
}
