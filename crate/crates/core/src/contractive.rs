//! Self-adjoint contractive extensions of a symmetric contraction given on a
//! subspace.
//!
//! For `S` on `D` with `‖S‖ ≤ 1`, the operators `I ± S` are positive on `D` and
//! their Krein–von Neumann extensions give the extremal extensions
//! `S_m = (I+S)_N − I` and `S_M = I − (I−S)_N`. Every symmetric extension of norm
//! at most one lies in the operator interval `[S_m, S_M]`.

use nalgebra::{DMatrix, DVector};

use crate::numerics::{
    intersect_subspaces, loewner_leq, null_space_floor, pinv_floor, psd_margin, spectral_norm, sqrt_psd_floor, sym,
    Subspace, SymEigen,
};
use crate::partial_op::{orthonormalize, PartialOperator};
use crate::{Error, Real, Result, ToleranceProfile};

/// A symmetric contraction known on a subspace: orthonormal domain basis `B`
/// and images `X = S·B`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractivePartial<T: Real> {
    dom_basis: DMatrix<T>,
    image: DMatrix<T>,
    operator_norm_on_d: T,
    tol: ToleranceProfile<T>,
}

/// The extremal extensions together with the Krein–von Neumann extensions of
/// `I ± S` they are built from.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionInterval<T: Real> {
    pub s_m: DMatrix<T>,
    pub s_big_m: DMatrix<T>,
    /// `(I+S)_N`.
    pub plus_kvn: DMatrix<T>,
    /// `(I−S)_N`.
    pub minus_kvn: DMatrix<T>,
}

impl<T: Real> ExtensionInterval<T> {
    /// `(S_m + S_M)/2`.
    pub fn midpoint(&self) -> DMatrix<T> {
        (&self.s_m + &self.s_big_m) * T::from_f64_lossy(0.5)
    }

    /// `S_M − S_m`.
    pub fn width(&self) -> DMatrix<T> {
        sym(&(&self.s_big_m - &self.s_m))
    }
}

/// `sup {|⟨Sf, g⟩|² : ‖f‖² − ‖Sf‖² ≤ 1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Supremum<T> {
    Finite(T),
    Infinite,
}

impl<T> Supremum<T> {
    pub fn is_finite(&self) -> bool {
        matches!(self, Supremum::Finite(_))
    }
}

/// Outcome of the three uniqueness routes.
#[derive(Clone, Debug, PartialEq)]
pub struct UniquenessReport<T: Real> {
    /// `‖S_M − S_m‖₂`.
    pub gap: T,
    /// Route 1: the interval collapses to a point.
    pub interval_collapse: bool,
    /// Route 2: `ran(I−S̃)^{1/2} ∩ ran(I+S̃)^{1/2} ∩ D^⊥ = {0}`.
    pub range_route: bool,
    /// Dimension of that intersection.
    pub intersection_dim: usize,
    /// Route 3: the supremum is infinite for every nonzero `g ⊥ D`. Only
    /// evaluated when the norm is attained.
    pub sup_route: Option<bool>,
    /// Dimension of `{g ⊥ D : supremum finite}`, when route 3 ran.
    pub finite_sup_dim: Option<usize>,
    pub norm_attained: bool,
    pub unique: bool,
}

impl<T: Real> ContractivePartial<T> {
    pub fn new(dom_basis: &DMatrix<T>, image: &DMatrix<T>, tol: ToleranceProfile<T>) -> Result<Self> {
        tol.validate()?;
        let (basis, image) = orthonormalize(dom_basis, image, &tol)?;
        let raw = basis.transpose() * &image;
        let asymmetry = spectral_norm(&(&raw - raw.transpose()));
        if asymmetry > tol.residual * spectral_norm(&image).max(T::one()) {
            return Err(Error::NotSymmetric {
                asymmetry: asymmetry.to_f64_lossy(),
            });
        }
        let k = basis.ncols();
        let defect = DMatrix::identity(k, k) - image.transpose() * &image;
        let (min, threshold) = psd_margin(&defect, &tol);
        if min < threshold {
            return Err(Error::NotContraction {
                min_eigenvalue: min.to_f64_lossy(),
            });
        }
        let operator_norm_on_d = spectral_norm(&image);
        Ok(Self {
            dom_basis: basis,
            image,
            operator_norm_on_d,
            tol,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.dom_basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.dom_basis.ncols()
    }

    pub fn dom_basis(&self) -> &DMatrix<T> {
        &self.dom_basis
    }

    pub fn image(&self) -> &DMatrix<T> {
        &self.image
    }

    pub fn operator_norm_on_d(&self) -> T {
        self.operator_norm_on_d
    }

    pub fn tol(&self) -> &ToleranceProfile<T> {
        &self.tol
    }

    pub fn domain(&self) -> Subspace<T> {
        Subspace::from_orthonormal_unchecked(self.dom_basis.clone())
    }

    /// `‖S‖ = 1` within the residual tolerance.
    pub fn norm_attained(&self) -> bool {
        (self.operator_norm_on_d - T::one()).abs() <= self.tol.residual
    }

    /// `I_k − XᵀX`, the form `‖f‖² − ‖Sf‖²` in domain coordinates.
    pub fn defect_form(&self) -> DMatrix<T> {
        let k = self.dim();
        sym(&(DMatrix::identity(k, k) - self.image.transpose() * &self.image))
    }

    /// `I ± S` on `D` as a positive partial operator.
    fn shifted(&self, sign: T) -> PartialOperator<T> {
        let image = &self.dom_basis + &self.image * sign;
        PartialOperator::from_parts_unchecked(self.dom_basis.clone(), image, Some(T::one()), self.tol)
    }
}

/// `S_m = (I+S)_N − I` and `S_M = I − (I−S)_N`.
pub fn extremal_extensions<T: Real>(c: &ContractivePartial<T>) -> ExtensionInterval<T> {
    let n = c.ambient_dim();
    let id = DMatrix::<T>::identity(n, n);
    let plus_kvn = c.shifted(T::one()).kvn_closed_form();
    let minus_kvn = c.shifted(-T::one()).kvn_closed_form();
    ExtensionInterval {
        s_m: sym(&(&plus_kvn - &id)),
        s_big_m: sym(&(&id - &minus_kvn)),
        plus_kvn,
        minus_kvn,
    }
}

/// Whether `S̃` is a self-adjoint extension of norm at most one.
///
/// Decided as `S_m ≤ S̃ ≤ S_M`, and independently as "extends `S` and
/// `‖S̃‖₂ ≤ 1`"; disagreement is an error.
pub fn interval_member<T: Real>(s_tilde: &DMatrix<T>, c: &ContractivePartial<T>) -> Result<bool> {
    let n = c.ambient_dim();
    if s_tilde.shape() != (n, n) {
        return Err(Error::ShapeMismatch(format!("candidate must be {n}x{n}")));
    }
    let tol = c.tol();
    let by_norm = is_contractive_extension(s_tilde, c);
    let interval = extremal_extensions(c);
    let by_order = loewner_leq(&interval.s_m, s_tilde, tol) && loewner_leq(s_tilde, &interval.s_big_m, tol);
    if by_norm != by_order {
        return Err(Error::RouteMismatch {
            check: "interval membership",
        });
    }
    Ok(by_order)
}

/// `S̃·B = X` and `‖S̃‖₂ ≤ 1 + psd_slack`.
///
/// The norm bound is the order statement `−I ≤ S̃ ≤ I`, so it takes the PSD slack.
pub fn is_contractive_extension<T: Real>(s_tilde: &DMatrix<T>, c: &ContractivePartial<T>) -> bool {
    let tol = c.tol();
    let extends = c.dim() == 0
        || spectral_norm(&(s_tilde * c.dom_basis() - c.image()))
            <= tol.residual * spectral_norm(c.image()).max(T::one());
    extends && SymEigen::new(s_tilde).abs_max() <= T::one() + tol.psd_slack
}

/// `sup {|⟨Sf, g⟩|² : f ∈ D, ‖f‖² − ‖Sf‖² ≤ 1}`.
///
/// With `M = I − XᵀX` and `v = Xᵀg` the supremum is `vᵀM⁺v` when `v ∈ ran M`,
/// and infinite otherwise. Membership uses the shared rank cutoff:
/// `‖(I − MM⁺)·v‖ ≤ rank_rel · max(‖g‖, 1)`.
pub fn sup_qform<T: Real>(c: &ContractivePartial<T>, g: &DVector<T>) -> Supremum<T> {
    if c.dim() == 0 {
        return Supremum::Finite(T::zero());
    }
    let tol = c.tol();
    let m = c.defect_form();
    let m_pinv = pinv_floor(&m, T::one(), tol);
    let v = c.image().transpose() * g;
    let outside = &v - &m * (&m_pinv * &v);
    if outside.norm() > tol.rank_rel * g.norm().max(T::one()) {
        return Supremum::Infinite;
    }
    Supremum::Finite((v.transpose() * m_pinv * v)[(0, 0)])
}

/// `{g ∈ D^⊥ : sup finite}` as a subspace: `g ⊥ D` with `Xᵀg ∈ ran M`.
pub fn finite_sup_subspace<T: Real>(c: &ContractivePartial<T>) -> Subspace<T> {
    let perp = c.domain().complement();
    if c.dim() == 0 || perp.dim() == 0 {
        return perp;
    }
    let tol = c.tol();
    let m_kernel = null_space_floor(&c.defect_form(), T::one(), tol);
    if m_kernel.dim() == 0 {
        return perp;
    }
    let constraint = m_kernel.basis().transpose() * c.image().transpose() * perp.basis();
    let coords = null_space_floor(&constraint, T::one(), tol);
    Subspace::from_orthonormal_unchecked(perp.basis() * coords.basis())
}

/// Decide whether the norm-preserving self-adjoint extension is unique, by three
/// independent routes.
///
/// Route 1 compares `S_m` with `S_M`. Route 2 intersects the ranges of
/// `(I∓S̃)^{1/2}` with `D^⊥` for the midpoint `S̃`. Route 3 asks whether the
/// supremum of `|⟨Sf,g⟩|²` over `‖f‖² − ‖Sf‖² ≤ 1` is infinite for every
/// nonzero `g ⊥ D`; it applies only when `‖S‖ = 1` and is skipped otherwise.
pub fn uniqueness<T: Real>(c: &ContractivePartial<T>) -> Result<UniquenessReport<T>> {
    let tol = c.tol();
    let n = c.ambient_dim();
    let interval = extremal_extensions(c);
    let gap = spectral_norm(&interval.width());
    let interval_collapse = gap <= tol.residual;

    let mid = interval.midpoint();
    let id = DMatrix::<T>::identity(n, n);
    let minus_root = sqrt_psd_floor(&(&id - &mid), T::one(), tol)?;
    let plus_root = sqrt_psd_floor(&(&id + &mid), T::one(), tol)?;
    let meet = intersect_subspaces(
        &[
            Subspace::span(&minus_root, tol),
            Subspace::span(&plus_root, tol),
            c.domain().complement(),
        ],
        tol,
    );
    let range_route = meet.dim() == 0;
    if range_route != interval_collapse {
        return Err(Error::RouteMismatch {
            check: "uniqueness: interval collapse vs range intersection",
        });
    }

    let norm_attained = c.norm_attained();
    let (sup_route, finite_sup_dim) = if norm_attained {
        let finite = finite_sup_subspace(c);
        check_sup_consistency(c, &finite)?;
        let route = finite.dim() == 0;
        if route != interval_collapse {
            return Err(Error::RouteMismatch {
                check: "uniqueness: supremum test",
            });
        }
        (Some(route), Some(finite.dim()))
    } else {
        (None, None)
    };

    Ok(UniquenessReport {
        gap,
        interval_collapse,
        range_route,
        intersection_dim: meet.dim(),
        sup_route,
        finite_sup_dim,
        norm_attained,
        unique: interval_collapse,
    })
}

/// Vectors of the finite-supremum subspace must give a finite `sup_qform`, and
/// their complement inside `D^⊥` an infinite one.
fn check_sup_consistency<T: Real>(c: &ContractivePartial<T>, finite: &Subspace<T>) -> Result<()> {
    let perp = c.domain().complement();
    let finite_coords = Subspace::from_orthonormal_unchecked(perp.basis().transpose() * finite.basis());
    let infinite = Subspace::from_orthonormal_unchecked(perp.basis() * finite_coords.complement().basis());
    let finite_ok = finite
        .basis()
        .column_iter()
        .all(|g| sup_qform(c, &g.into_owned()).is_finite());
    let infinite_ok = infinite
        .basis()
        .column_iter()
        .all(|g| !sup_qform(c, &g.into_owned()).is_finite());
    if finite_ok && infinite_ok {
        Ok(())
    } else {
        Err(Error::RouteMismatch {
            check: "uniqueness: supremum per basis vector",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    fn contraction(image: DMatrix<f64>) -> ContractivePartial<f64> {
        ContractivePartial::new(&dmatrix![1.0; 0.0], &image, ToleranceProfile::default()).unwrap()
    }

    fn close(a: &DMatrix<f64>, b: &DMatrix<f64>) -> bool {
        (a - b).abs().max() < 1e-12
    }

    #[test]
    fn extremal_examples() {
        let iv = extremal_extensions(&contraction(dmatrix![1.0; 0.0]));
        assert!(close(&iv.s_m, &dmatrix![1.0, 0.0; 0.0, -1.0]));
        assert!(close(&iv.s_big_m, &dmatrix![1.0, 0.0; 0.0, 1.0]));

        let flip = dmatrix![0.0, 1.0; 1.0, 0.0];
        let iv = extremal_extensions(&contraction(dmatrix![0.0; 1.0]));
        assert!(close(&iv.s_m, &flip));
        assert!(close(&iv.s_big_m, &flip));

        let iv = extremal_extensions(&contraction(dmatrix![0.0; 0.5]));
        assert!(close(&iv.s_m, &dmatrix![0.0, 0.5; 0.5, -0.75]));
        assert!(close(&iv.s_big_m, &dmatrix![0.0, 0.5; 0.5, 0.75]));
    }

    #[test]
    fn rejects_non_contraction() {
        let r = ContractivePartial::new(&dmatrix![1.0; 0.0], &dmatrix![2.0; 0.0], ToleranceProfile::default());
        assert!(matches!(r, Err(Error::NotContraction { .. })));
        let r = ContractivePartial::new(
            &DMatrix::identity(2, 2),
            &dmatrix![0.0, 0.5; 0.0, 0.0],
            ToleranceProfile::default(),
        );
        assert!(matches!(r, Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn membership_examples() {
        let c = contraction(dmatrix![1.0; 0.0]);
        assert!(interval_member(&dmatrix![1.0, 0.0; 0.0, 0.3], &c).unwrap());
        assert!(!interval_member(&dmatrix![1.0, 0.0; 0.0, 1.5], &c).unwrap());
        assert!(interval_member(&extremal_extensions(&c).midpoint(), &c).unwrap());
        assert!(!interval_member(&dmatrix![0.5, 0.0; 0.0, 0.0], &c).unwrap());
    }

    #[test]
    fn uniqueness_examples() {
        let r = uniqueness(&contraction(dmatrix![0.0; 1.0])).unwrap();
        assert!(r.unique && r.range_route && r.sup_route == Some(true));
        let r = uniqueness(&contraction(dmatrix![1.0; 0.0])).unwrap();
        assert!(!r.unique && !r.range_route && r.sup_route == Some(false));
        let full = ContractivePartial::new(
            &DMatrix::identity(2, 2),
            &dmatrix![0.0, 1.0; 1.0, 0.0],
            ToleranceProfile::default(),
        )
        .unwrap();
        assert!(uniqueness(&full).unwrap().unique);
    }

    #[test]
    fn strict_contraction_skips_sup_route() {
        let r = uniqueness(&contraction(dmatrix![0.5; 0.0])).unwrap();
        assert!(!r.norm_attained);
        assert_eq!(r.sup_route, None);
        assert!(!r.unique);
    }

    #[test]
    fn sup_examples() {
        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        let e2 = DVector::from_vec(vec![0.0, 1.0]);
        assert_eq!(sup_qform(&contraction(dmatrix![0.0; 1.0]), &e2), Supremum::Infinite);
        match sup_qform(&contraction(dmatrix![1.0; 0.0]), &e2) {
            Supremum::Finite(v) => assert!(v.abs() < 1e-12),
            Supremum::Infinite => panic!("expected finite"),
        }
        match sup_qform(&contraction(dmatrix![0.5; 0.0]), &e1) {
            Supremum::Finite(v) => assert!((v - 1.0 / 3.0).abs() < 1e-12),
            Supremum::Infinite => panic!("expected finite"),
        }
    }

    #[test]
    fn midpoint_identity_chain() {
        let c = contraction(dmatrix![0.6; 0.8]);
        let iv = extremal_extensions(&c);
        let mid = iv.midpoint();
        let id = DMatrix::<f64>::identity(2, 2);
        let half_width = iv.width() * 0.5;
        assert!(close(&(&id - &mid - &iv.minus_kvn), &half_width));
        assert!(close(&(&id + &mid - &iv.plus_kvn), &half_width));
        assert!(close(&(&iv.s_big_m - &mid), &half_width));
    }
}
