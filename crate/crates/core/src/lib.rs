//! Extension calculus for positive symmetric operators given on a subspace of a
//! finite-dimensional real inner-product space.
//!
//! An operator is known only on a subspace `D ⊆ ℝⁿ` through a basis of `D` and the
//! images of the basis vectors. The crate decides whether positive (or contractive)
//! self-adjoint extensions to all of `ℝⁿ` exist, builds the smallest positive one
//! (the Krein–von Neumann extension), shortens PSD matrices to subspaces, builds the
//! extremal contractive extensions and decides uniqueness, and solves `S·A = B` over
//! PSD matrices `S`.
//!
//! Every rank, range, positivity and ordering decision goes through [`numerics`] and
//! a single [`ToleranceProfile`].
//!
//! All algorithms are generic over the scalar type through the [`Real`] trait; the
//! `*F64` and `*F32` aliases at the crate root name the concrete instantiations.

pub mod contractive;
pub mod error;
pub mod kvn;
pub mod numerics;
pub mod partial_op;
pub mod psd_equation;
pub mod sampling;
pub mod shorted;

use std::fmt::{Debug, Display, LowerExp};

use nalgebra::{DMatrix, DVector, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

pub use contractive::{ContractivePartial, ExtensionInterval, UniquenessReport};
pub use error::{Error, Result};
pub use numerics::Subspace;
pub use partial_op::{GramForm, PartialOperator, Theorem1Report};
pub use psd_equation::Solvability;
pub use shorted::ShortedResult;

/// Floating-point scalar usable by every algorithm in the crate.
///
/// The default tolerances are part of the scalar: a cutoff that is sensible for
/// `f64` is below the rounding floor of `f32`.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Display + LowerExp + Debug + Send + Sync {
    const DEFAULT_RANK_REL: f64;
    const DEFAULT_PSD_SLACK: f64;
    const DEFAULT_RESIDUAL: f64;

    fn from_f64_lossy(x: f64) -> Self {
        nalgebra::convert(x)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const DEFAULT_RANK_REL: f64 = 1e-10;
    const DEFAULT_PSD_SLACK: f64 = 1e-9;
    const DEFAULT_RESIDUAL: f64 = 1e-8;
}

impl Real for f32 {
    const DEFAULT_RANK_REL: f64 = 1e-5;
    const DEFAULT_PSD_SLACK: f64 = 1e-5;
    const DEFAULT_RESIDUAL: f64 = 1e-4;
}

/// Numerical decision thresholds shared by every predicate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToleranceProfile<T> {
    /// Relative singular-value cutoff for rank decisions.
    pub rank_rel: T,
    /// Allowed negative eigenvalue, relative to the spectral norm.
    pub psd_slack: T,
    /// Maximum relative residual for equality and range tests.
    pub residual: T,
}

impl<T: Real> Default for ToleranceProfile<T> {
    fn default() -> Self {
        Self {
            rank_rel: T::from_f64_lossy(T::DEFAULT_RANK_REL),
            psd_slack: T::from_f64_lossy(T::DEFAULT_PSD_SLACK),
            residual: T::from_f64_lossy(T::DEFAULT_RESIDUAL),
        }
    }
}

impl<T: Real> ToleranceProfile<T> {
    pub fn new(rank_rel: T, psd_slack: T, residual: T) -> Result<Self> {
        let tol = Self {
            rank_rel,
            psd_slack,
            residual,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rank_rel", self.rank_rel),
            ("psd_slack", self.psd_slack),
            ("residual", self.residual),
        ] {
            if !(v.is_finite() && v > T::zero()) {
                return Err(Error::InvalidTolerance(name));
            }
        }
        Ok(())
    }
}

pub type Matrix<T> = DMatrix<T>;
pub type Vector<T> = DVector<T>;

pub type MatrixF64 = Matrix<f64>;
pub type VectorF64 = Vector<f64>;
pub type ToleranceProfileF64 = ToleranceProfile<f64>;
pub type SubspaceF64 = Subspace<f64>;
pub type PartialOperatorF64 = PartialOperator<f64>;
pub type ContractivePartialF64 = ContractivePartial<f64>;
pub type ExtensionIntervalF64 = ExtensionInterval<f64>;
pub type ShortedResultF64 = ShortedResult<f64>;
pub type SolvabilityF64 = Solvability<f64>;

pub type MatrixF32 = Matrix<f32>;
pub type ToleranceProfileF32 = ToleranceProfile<f32>;
pub type SubspaceF32 = Subspace<f32>;
pub type PartialOperatorF32 = PartialOperator<f32>;
pub type ContractivePartialF32 = ContractivePartial<f32>;
