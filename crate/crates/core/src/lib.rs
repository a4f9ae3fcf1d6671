//! Construction, verification and classification of H-type metric Lie
//! algebras.
//!
//! Algebras are real, finite dimensional and carry an inner product given by
//! a Gram matrix. Complex algebras are handled in their real form together
//! with a [`ComplexStructure`]. The [`classifier`] decides whether an algebra
//! is H-type and, for complex input with a Hermitian metric, either produces
//! an explicit isometric isomorphism onto the standard complex Heisenberg
//! algebra or a witness that none exists.

pub mod classifier;
pub mod constructions;
pub mod error;
pub mod io;
pub mod kaplan;
pub mod lie;
pub mod linalg;

pub use error::{Error, Result};
pub use kaplan::{JOperator, KaplanFrame, MatrixDefect};
pub use lie::{
    ComplexStructure, Defect, DefectKind, MetricLieAlgebra, Nilpotency, Splitting,
    StructureConstant, StructuredAlgebra, Subspace, DEFAULT_TOL,
};
