//! Finite-dimensional real Lie algebras with an inner product.
//!
//! Structure constants are stored sparsely, one entry per `(i, j, k)` with
//! `i < j`, so antisymmetry of the bracket holds by construction. The Gram
//! matrix may be any symmetric positive-definite matrix; metric computations
//! happen in an orthonormal frame obtained from its Cholesky factor
//! `G = L Lᵀ`, where the coordinates `y = Lᵀ x` turn `⟨·,·⟩` into the
//! Euclidean dot product.

use std::fmt;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Default relative tolerance for rank and kernel decisions.
pub const DEFAULT_TOL: f64 = 1e-9;

/// One nonzero structure constant: `[e_i, e_j] ∋ c·e_k`, with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureConstant {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub c: f64,
}

impl StructureConstant {
    pub fn new(i: usize, j: usize, k: usize, c: f64) -> Self {
        Self { i, j, k, c }
    }
}

#[derive(Debug, Clone)]
struct OrthoFrame {
    /// Upper-triangular `Lᵀ`.
    upper: DMatrix<f64>,
}

impl OrthoFrame {
    fn new(gram: &DMatrix<f64>) -> Option<Self> {
        let sym = (gram + gram.transpose()) * 0.5;
        let chol = Cholesky::<f64, Dyn>::new(sym)?;
        Some(Self {
            upper: chol.l().transpose(),
        })
    }

    fn to_ortho(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        &self.upper * x
    }

    fn back_from_ortho(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        self.upper
            .solve_upper_triangular(y)
            .expect("Cholesky factor has a positive diagonal")
    }
}

/// A real Lie algebra given by sparse structure constants and a Gram matrix.
#[derive(Debug, Clone)]
pub struct MetricLieAlgebra {
    dim: usize,
    constants: Vec<StructureConstant>,
    /// `pairs[i * dim + j]` lists `(k, c)` for `[e_i, e_j]`, populated for `i < j`.
    pairs: Vec<Vec<(usize, f64)>>,
    gram: DMatrix<f64>,
    frame: Option<OrthoFrame>,
}

impl PartialEq for MetricLieAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.constants == other.constants && self.gram == other.gram
    }
}

impl MetricLieAlgebra {
    /// Builds an algebra, rejecting malformed structure constants.
    ///
    /// Entries are sorted by `(i, j, k)`; duplicates and entries with `i >= j`
    /// are errors, exact zeros are dropped. The Gram matrix is not required
    /// to be positive definite here (see [`validate_algebra`]), but metric
    /// operations fail with [`Error::NotPositiveDefinite`] if it is not.
    pub fn new(dim: usize, constants: Vec<StructureConstant>, gram: DMatrix<f64>) -> Result<Self> {
        if gram.nrows() != dim || gram.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: if gram.nrows() != dim {
                    gram.nrows()
                } else {
                    gram.ncols()
                },
            });
        }
        if gram.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(
                "gram matrix has non-finite entries".into(),
            ));
        }
        let mut constants: Vec<StructureConstant> =
            constants.into_iter().filter(|e| e.c != 0.0).collect();
        for e in &constants {
            if e.i >= dim || e.j >= dim || e.k >= dim {
                return Err(Error::IndexOutOfRange {
                    i: e.i,
                    j: e.j,
                    k: e.k,
                    dim,
                });
            }
            if e.i >= e.j {
                return Err(Error::LowerTriangularEntry {
                    i: e.i,
                    j: e.j,
                    k: e.k,
                });
            }
            if !e.c.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "non-finite structure constant at ({}, {}, {})",
                    e.i, e.j, e.k
                )));
            }
        }
        constants.sort_by_key(|e| (e.i, e.j, e.k));
        if let Some(w) = constants
            .windows(2)
            .find(|w| (w[0].i, w[0].j, w[0].k) == (w[1].i, w[1].j, w[1].k))
        {
            return Err(Error::DuplicateEntry {
                i: w[0].i,
                j: w[0].j,
                k: w[0].k,
            });
        }
        let mut pairs = vec![Vec::new(); dim * dim];
        for e in &constants {
            pairs[e.i * dim + e.j].push((e.k, e.c));
        }
        let frame = OrthoFrame::new(&gram);
        Ok(Self {
            dim,
            constants,
            pairs,
            gram,
            frame,
        })
    }

    /// The abelian algebra `ℝⁿ` with the given Gram matrix.
    pub fn abelian(gram: DMatrix<f64>) -> Result<Self> {
        Self::new(gram.nrows(), Vec::new(), gram)
    }

    /// The zero-dimensional algebra.
    pub fn zero() -> Self {
        Self::new(0, Vec::new(), DMatrix::zeros(0, 0)).expect("empty algebra is well formed")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn structure_constants(&self) -> &[StructureConstant] {
        &self.constants
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// Largest absolute structure constant, at least 1. Used to scale
    /// absolute residual thresholds.
    pub fn bracket_scale(&self) -> f64 {
        self.constants
            .iter()
            .fold(1.0_f64, |acc, e| acc.max(e.c.abs()))
    }

    fn check_len(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        Ok(())
    }

    /// `[x, y]` evaluated from the structure constants.
    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(x)?;
        self.check_len(y)?;
        let mut out = DVector::zeros(self.dim);
        for e in &self.constants {
            out[e.k] += e.c * (x[e.i] * y[e.j] - x[e.j] * y[e.i]);
        }
        Ok(out)
    }

    /// `[e_i, e_j]` as a sparse list of `(k, c)`.
    pub fn basis_bracket(&self, i: usize, j: usize) -> Vec<(usize, f64)> {
        use std::cmp::Ordering;
        match i.cmp(&j) {
            Ordering::Less => self.pairs[i * self.dim + j].clone(),
            Ordering::Greater => self.pairs[j * self.dim + i]
                .iter()
                .map(|&(k, c)| (k, -c))
                .collect(),
            Ordering::Equal => Vec::new(),
        }
    }

    /// Matrix of `ad_x = [x, ·]`.
    pub fn ad(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_len(x)?;
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for e in &self.constants {
            m[(e.k, e.j)] += e.c * x[e.i];
            m[(e.k, e.i)] -= e.c * x[e.j];
        }
        Ok(m)
    }

    /// `⟨x, y⟩ = xᵀ G y`.
    pub fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        x.dot(&(&self.gram * y))
    }

    pub fn norm(&self, x: &DVector<f64>) -> f64 {
        self.inner(x, x).max(0.0).sqrt()
    }

    fn frame(&self) -> Result<&OrthoFrame> {
        self.frame.as_ref().ok_or(Error::NotPositiveDefinite)
    }

    /// Orthonormalizes the columns of `vectors` under the Gram matrix (modified
    /// Gram-Schmidt with a re-orthogonalization pass, in the Cholesky frame).
    pub fn orthonormalize(&self, vectors: &DMatrix<f64>, drop_tol: f64) -> Result<DMatrix<f64>> {
        let frame = self.frame()?;
        let y = frame.to_ortho(vectors);
        let q = linalg::modified_gram_schmidt(&y, drop_tol);
        Ok(frame.back_from_ortho(&q))
    }
}

/// A subspace of the algebra, stored as basis columns in ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: DMatrix<f64>,
    orthonormal: bool,
}

impl Subspace {
    /// Subspace spanned by `vectors`; the basis is orthonormalized under the
    /// algebra's Gram matrix and dependent columns are dropped.
    pub fn spanned_by(
        algebra: &MetricLieAlgebra,
        vectors: &DMatrix<f64>,
        tol: f64,
    ) -> Result<Self> {
        if vectors.nrows() != algebra.dim() {
            return Err(Error::DimensionMismatch {
                expected: algebra.dim(),
                found: vectors.nrows(),
            });
        }
        Ok(Self {
            basis: algebra.orthonormalize(vectors, tol)?,
            orthonormal: true,
        })
    }

    /// Wraps a basis as given. `orthonormal` is recorded, not checked.
    pub fn from_basis(basis: DMatrix<f64>, orthonormal: bool) -> Self {
        Self { basis, orthonormal }
    }

    pub fn zero(ambient: usize) -> Self {
        Self {
            basis: DMatrix::zeros(ambient, 0),
            orthonormal: true,
        }
    }

    pub fn whole(algebra: &MetricLieAlgebra) -> Result<Self> {
        Self::spanned_by(
            algebra,
            &DMatrix::identity(algebra.dim(), algebra.dim()),
            DEFAULT_TOL,
        )
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn vector(&self, idx: usize) -> DVector<f64> {
        self.basis.column(idx).into_owned()
    }

    pub fn is_orthonormal(&self) -> bool {
        self.orthonormal
    }

    /// Coordinates `⟨b_a, x⟩` against an orthonormal basis.
    pub fn coordinates(&self, algebra: &MetricLieAlgebra, x: &DVector<f64>) -> DVector<f64> {
        self.basis.transpose() * (algebra.gram() * x)
    }

    /// Orthogonal projection of `x`; assumes an orthonormal basis.
    pub fn project(&self, algebra: &MetricLieAlgebra, x: &DVector<f64>) -> DVector<f64> {
        &self.basis * self.coordinates(algebra, x)
    }

    /// Gram matrix of the basis vectors.
    pub fn basis_gram(&self, algebra: &MetricLieAlgebra) -> DMatrix<f64> {
        self.basis.transpose() * algebra.gram() * &self.basis
    }
}

/// Real-linear operator realizing multiplication by `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexStructure {
    matrix: DMatrix<f64>,
}

impl ComplexStructure {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x
    }

    /// The conjugate structure `-i`.
    pub fn conjugate(&self) -> Self {
        Self {
            matrix: -&self.matrix,
        }
    }
}

/// An algebra together with an optional complex structure.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredAlgebra {
    pub algebra: MetricLieAlgebra,
    pub complex: Option<ComplexStructure>,
}

impl StructuredAlgebra {
    pub fn real(algebra: MetricLieAlgebra) -> Self {
        Self {
            algebra,
            complex: None,
        }
    }

    pub fn complex(algebra: MetricLieAlgebra, complex: ComplexStructure) -> Self {
        Self {
            algebra,
            complex: Some(complex),
        }
    }
}

/// Kind of a named validation defect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectKind {
    Jacobi,
    GramSymmetry,
    GramPositiveDefinite,
    ComplexSquare,
    BracketCompatibility,
    HermitianCompatibility,
}

impl fmt::Display for DefectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            DefectKind::Jacobi => "jacobi",
            DefectKind::GramSymmetry => "gram_symmetry",
            DefectKind::GramPositiveDefinite => "gram_positive_definite",
            DefectKind::ComplexSquare => "complex_square",
            DefectKind::BracketCompatibility => "bracket_compatibility",
            DefectKind::HermitianCompatibility => "hermitian_compatibility",
        };
        f.write_str(name)
    }
}

/// A named defect with its magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Defect {
    pub kind: DefectKind,
    pub magnitude: f64,
}

/// Raw defect measurements of the Lie-algebra and metric axioms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgebraDefects {
    /// Max over basis triples of the Euclidean norm of the Jacobi sum.
    pub jacobi: f64,
    /// `max |G_ij - G_ji|`.
    pub gram_symmetry: f64,
    /// Smallest eigenvalue of the symmetrized Gram matrix (`+inf` when empty).
    pub gram_min_eigenvalue: f64,
}

impl AlgebraDefects {
    /// Defects violating `tol`. The positive-definiteness magnitude is
    /// `tol - λ_min`, i.e. how far the smallest eigenvalue is below the bar.
    pub fn exceeding(&self, tol: f64) -> Vec<Defect> {
        let mut out = Vec::new();
        if self.jacobi > tol {
            out.push(Defect {
                kind: DefectKind::Jacobi,
                magnitude: self.jacobi,
            });
        }
        if self.gram_symmetry > tol {
            out.push(Defect {
                kind: DefectKind::GramSymmetry,
                magnitude: self.gram_symmetry,
            });
        }
        if self.gram_min_eigenvalue <= tol {
            out.push(Defect {
                kind: DefectKind::GramPositiveDefinite,
                magnitude: tol - self.gram_min_eigenvalue,
            });
        }
        out
    }
}

fn accumulate_bracket_with_basis(
    algebra: &MetricLieAlgebra,
    i: usize,
    v: &[(usize, f64)],
    coeff: f64,
    acc: &mut Vec<(usize, f64)>,
) {
    for &(l, vl) in v {
        for (k, c) in algebra.basis_bracket(i, l) {
            acc.push((k, coeff * vl * c));
        }
    }
}

fn sparse_norm(mut acc: Vec<(usize, f64)>) -> f64 {
    acc.sort_by_key(|&(k, _)| k);
    let mut total = 0.0;
    let mut iter = acc.into_iter().peekable();
    while let Some((k, mut c)) = iter.next() {
        while let Some(&(k2, c2)) = iter.peek() {
            if k2 != k {
                break;
            }
            c += c2;
            iter.next();
        }
        total += c * c;
    }
    total.sqrt()
}

/// Measures the Jacobi, symmetry and definiteness defects.
pub fn measure_algebra(algebra: &MetricLieAlgebra) -> AlgebraDefects {
    let n = algebra.dim();
    // Jacobi is trilinear and alternating, so distinct ordered triples suffice.
    let mut jacobi = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let jk = algebra.basis_bracket(j, k);
                let ki = algebra.basis_bracket(k, i);
                let ij = algebra.basis_bracket(i, j);
                if jk.is_empty() && ki.is_empty() && ij.is_empty() {
                    continue;
                }
                let mut acc = Vec::new();
                accumulate_bracket_with_basis(algebra, i, &jk, 1.0, &mut acc);
                accumulate_bracket_with_basis(algebra, j, &ki, 1.0, &mut acc);
                accumulate_bracket_with_basis(algebra, k, &ij, 1.0, &mut acc);
                jacobi = jacobi.max(sparse_norm(acc));
            }
        }
    }
    let g = algebra.gram();
    let gram_symmetry = linalg::max_abs(&(g - g.transpose()));
    let gram_min_eigenvalue = if n == 0 {
        f64::INFINITY
    } else {
        SymmetricEigen::new((g + g.transpose()) * 0.5)
            .eigenvalues
            .min()
    };
    AlgebraDefects {
        jacobi,
        gram_symmetry,
        gram_min_eigenvalue,
    }
}

/// Defects of the Lie-algebra and metric axioms exceeding `tol`; empty means valid.
pub fn validate_algebra(algebra: &MetricLieAlgebra, tol: f64) -> Vec<Defect> {
    measure_algebra(algebra).exceeding(tol)
}

/// Raw defect measurements of a complex structure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexStructureDefects {
    /// `max |(i² + I)_ab|`.
    pub square: f64,
    /// `max_{a,b} ‖[i e_a, e_b] - i [e_a, e_b]‖`.
    pub bracket: f64,
    /// `max_{a,b} |⟨i e_a, i e_b⟩ - ⟨e_a, e_b⟩|`.
    pub hermitian: f64,
}

impl ComplexStructureDefects {
    pub fn exceeding(&self, tol: f64) -> Vec<Defect> {
        [
            (DefectKind::ComplexSquare, self.square),
            (DefectKind::BracketCompatibility, self.bracket),
            (DefectKind::HermitianCompatibility, self.hermitian),
        ]
        .into_iter()
        .filter(|&(_, m)| m > tol)
        .map(|(kind, magnitude)| Defect { kind, magnitude })
        .collect()
    }
}

/// Measures the three complex-structure compatibility defects.
pub fn measure_complex_structure(
    algebra: &MetricLieAlgebra,
    complex: &ComplexStructure,
) -> Result<ComplexStructureDefects> {
    let n = algebra.dim();
    if complex.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: complex.dim(),
        });
    }
    if n % 2 == 1 {
        return Err(Error::Structural(format!(
            "odd real dimension {n} admits no complex structure"
        )));
    }
    let c = complex.matrix();
    let square = linalg::max_abs(&(c * c + DMatrix::identity(n, n)));
    // Column b of ad(i e_a) is [i e_a, e_b]; column b of i·ad(e_a) is i[e_a, e_b].
    let mut bracket = 0.0_f64;
    for a in 0..n {
        let ie_a = c.column(a).into_owned();
        let lhs = algebra.ad(&ie_a)?;
        let rhs = c * algebra.ad(&DVector::from_fn(n, |r, _| if r == a { 1.0 } else { 0.0 }))?;
        let diff = lhs - rhs;
        for col in diff.column_iter() {
            bracket = bracket.max(col.norm());
        }
    }
    let g = algebra.gram();
    let hermitian = linalg::max_abs(&(c.transpose() * g * c - g));
    Ok(ComplexStructureDefects {
        square,
        bracket,
        hermitian,
    })
}

/// Complex-structure defects exceeding `tol`.
pub fn validate_complex_structure(
    algebra: &MetricLieAlgebra,
    complex: &ComplexStructure,
    tol: f64,
) -> Result<Vec<Defect>> {
    Ok(measure_complex_structure(algebra, complex)?.exceeding(tol))
}

/// Stacked adjoint maps: column `i` holds the coordinates of every `[e_i, e_j]`.
fn stacked_adjoint(algebra: &MetricLieAlgebra) -> DMatrix<f64> {
    let n = algebra.dim();
    let mut m = DMatrix::zeros(n * n, n);
    for e in algebra.structure_constants() {
        m[(e.j * n + e.k, e.i)] += e.c;
        m[(e.i * n + e.k, e.j)] -= e.c;
    }
    m
}

/// Orthonormal basis of the center `{x : [x, e_j] = 0 ∀j}`.
///
/// Kernel membership uses singular values `≤ tol·σ_max` of the stacked
/// adjoint maps; an abelian algebra returns the whole space.
pub fn center(algebra: &MetricLieAlgebra, tol: f64) -> Result<Subspace> {
    let n = algebra.dim();
    if n == 0 {
        return Ok(Subspace::zero(0));
    }
    let kernel = linalg::null_space(&stacked_adjoint(algebra), tol);
    Subspace::spanned_by(algebra, &kernel, tol)
}

/// Orthonormal basis of `{v : ⟨v, s⟩ = 0 ∀ s ∈ S}`.
pub fn orthogonal_complement(algebra: &MetricLieAlgebra, subspace: &Subspace) -> Result<Subspace> {
    let n = algebra.dim();
    if subspace.ambient_dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: subspace.ambient_dim(),
        });
    }
    let frame = algebra.frame()?;
    if subspace.dim() == 0 {
        return Subspace::whole(algebra);
    }
    let y = frame.to_ortho(subspace.basis());
    let kernel = linalg::null_space(&y.transpose(), DEFAULT_TOL);
    let q = linalg::modified_gram_schmidt(&kernel, DEFAULT_TOL);
    Ok(Subspace::from_basis(frame.back_from_ortho(&q), true))
}

/// The center together with its orthogonal complement.
#[derive(Debug, Clone, PartialEq)]
pub struct Splitting {
    pub center: Subspace,
    pub complement: Subspace,
}

impl Splitting {
    pub fn compute(algebra: &MetricLieAlgebra, tol: f64) -> Result<Self> {
        let center = center(algebra, tol)?;
        let complement = orthogonal_complement(algebra, &center)?;
        Ok(Self { center, complement })
    }
}

/// Nilpotency classification from the lower central series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Nilpotency {
    /// Smallest `s` with `C^{s+1} = 0`.
    Step(usize),
    NotNilpotent,
}

/// Nilpotency step via the lower central series `C¹ = 𝔤`, `C^{k+1} = [𝔤, C^k]`.
///
/// Each term is spanned by brackets of basis vectors with an orthonormal basis
/// of the previous term; its dimension is the number of singular values above
/// `tol` times the largest singular value of `[𝔤, 𝔤]`.
pub fn nilpotency_step(algebra: &MetricLieAlgebra, tol: f64) -> Nilpotency {
    let n = algebra.dim();
    if n == 0 {
        return Nilpotency::Step(0);
    }
    let mut current = DMatrix::<f64>::identity(n, n);
    let mut reference: Option<f64> = None;
    let mut step = 1;
    loop {
        let k = current.ncols();
        let mut span = DMatrix::zeros(n, n * k);
        for i in 0..n {
            let ad = algebra
                .ad(&DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 }))
                .expect("basis vector has the algebra's dimension");
            span.view_mut((0, i * k), (n, k))
                .copy_from(&(ad * &current));
        }
        let scale = *reference.get_or_insert_with(|| {
            let s = linalg::sigma_max(&span);
            if s > 0.0 {
                s
            } else {
                1.0
            }
        });
        let threshold = tol * scale;
        let svd = span.svd(true, false);
        let u = svd.u.expect("requested U");
        let kept: Vec<DVector<f64>> = svd
            .singular_values
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > threshold)
            .map(|(idx, _)| u.column(idx).into_owned())
            .collect();
        if kept.is_empty() {
            return Nilpotency::Step(step);
        }
        if kept.len() >= k {
            return Nilpotency::NotNilpotent;
        }
        current = linalg::columns_to_matrix(n, &kept);
        step += 1;
    }
}
