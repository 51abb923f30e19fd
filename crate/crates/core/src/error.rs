use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure modes of the extension calculus.
///
/// Discrepancies are reported as `f64` regardless of the scalar type in use.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("tolerance `{0}` must be finite and strictly positive")]
    InvalidTolerance(&'static str),
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("form on the domain is not symmetric (asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("form on the domain is not positive (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveForm { min_eigenvalue: f64 },
    #[error("inconsistent action: a null combination of domain vectors has image norm {residual:e}")]
    InconsistentAction { residual: f64 },
    #[error("operator has no positive self-adjoint extension")]
    NoExtension,
    #[error("matrix does not extend the partial operator (residual {residual:e})")]
    NotExtension { residual: f64 },
    #[error("operator is not a contraction on its domain (min eigenvalue of I - X^T X is {min_eigenvalue:e})")]
    NotContraction { min_eigenvalue: f64 },
    #[error("partial operators are defined on different subspaces")]
    DomainMismatch,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("equation S*A = B has no PSD solution")]
    NotSolvable {
        well_defined: bool,
        symmetric_form: bool,
        positive_form: bool,
        bounded_condition: bool,
        certificate: Option<Vec<f64>>,
    },
    #[error("oracle mismatch in {check}: discrepancy {discrepancy:e}")]
    OracleMismatch { check: &'static str, discrepancy: f64 },
    #[error("range identity violated: direct rank {direct}, intersection rank {intersection}")]
    RangeIdentityViolated { direct: usize, intersection: usize },
    #[error("independent routes disagree in {check}")]
    RouteMismatch { check: &'static str },
}
