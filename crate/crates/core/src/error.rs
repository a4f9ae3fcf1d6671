use thiserror::Error;

use crate::lie::Defect;

/// Errors raised by the algebra, operator and classification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("lower-triangular entry: structure constant ({i}, {j}, {k}) requires i < j")]
    LowerTriangularEntry { i: usize, j: usize, k: usize },

    #[error("index out of range: ({i}, {j}, {k}) in dimension {dim}")]
    IndexOutOfRange {
        i: usize,
        j: usize,
        k: usize,
        dim: usize,
    },

    #[error("duplicate structure constant ({i}, {j}, {k})")]
    DuplicateEntry { i: usize, j: usize, k: usize },

    #[error("gram matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("not central: residual {residual:e}")]
    NotCentral { residual: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("center element is not a unit vector (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("structural error: {0}")]
    Structural(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("Clifford relation violated for generators ({a}, {b}): defect {defect:e}")]
    CliffordRelation { a: usize, b: usize, defect: f64 },

    #[error("generator {index} is not skew-symmetric: defect {defect:e}")]
    NotSkew { index: usize, defect: f64 },

    #[error("validation failed: {}", format_defects(.0))]
    Validation(Vec<Defect>),

    #[error(
        "classification failure: bracket residual {bracket:e}, metric residual {metric:e}, \
         complex-structure residual {complex:e}"
    )]
    ClassificationFailure {
        bracket: f64,
        metric: f64,
        complex: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

fn format_defects(defects: &[Defect]) -> String {
    defects
        .iter()
        .map(|d| format!("{} = {:e}", d.kind, d.magnitude))
        .collect::<Vec<_>>()
        .join(", ")
}
