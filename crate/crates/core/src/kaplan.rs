//! Kaplan operators `J_z` and the quantitative identities they satisfy.
//!
//! For central `z`, `J_z : 𝔳 → 𝔳` is defined by `⟨J_z u, v⟩ = ⟨z, [u, v]⟩`
//! for all `v ∈ 𝔳`. Matrices act on column coordinates in the orthonormal
//! 𝔳-basis `{u_a}` held by the [`Splitting`], so column `a` of `J_z` holds the
//! coordinates of `J_z u_a`.
//!
//! All matrix defects are Frobenius norms; the spectral norm and the operator
//! dimension ride along in [`MatrixDefect`] so callers can convert.

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lie::{ComplexStructure, MetricLieAlgebra, Splitting};
use crate::linalg;

/// The matrix of `J_z` on 𝔳, tagged with `z` and the frame it lives in.
#[derive(Debug, Clone)]
pub struct JOperator {
    pub z: DVector<f64>,
    pub matrix: DMatrix<f64>,
    pub frame: Arc<Splitting>,
}

impl JOperator {
    /// `‖M + Mᵀ‖_F`.
    pub fn skew_defect(&self) -> f64 {
        (&self.matrix + self.matrix.transpose()).norm()
    }

    /// Applies `J_z` to an ambient vector of 𝔳.
    pub fn apply(&self, algebra: &MetricLieAlgebra, x: &DVector<f64>) -> DVector<f64> {
        let v = &self.frame.complement;
        v.basis() * (&self.matrix * v.coordinates(algebra, x))
    }
}

/// A matrix defect, measured in both Frobenius and spectral norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixDefect {
    pub frobenius: f64,
    pub spectral: f64,
    /// Side length of the (square) defect matrix.
    pub dim: usize,
}

impl MatrixDefect {
    pub fn of(m: &DMatrix<f64>) -> Self {
        Self {
            frobenius: linalg::frobenius(m),
            spectral: linalg::spectral(m),
            dim: m.nrows(),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            frobenius: 0.0,
            spectral: 0.0,
            dim,
        }
    }

    /// The decision value (Frobenius).
    pub fn value(&self) -> f64 {
        self.frobenius
    }

    fn scaled(self, s: f64) -> Self {
        Self {
            frobenius: self.frobenius * s,
            spectral: self.spectral * s,
            dim: self.dim,
        }
    }
}

/// Result of [`KaplanFrame::polarized_isometry_defect`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizedDefect {
    /// `frobenius` is the norm of the whole polarization tensor; `spectral` is
    /// the largest spectral norm of a single term.
    pub defect: MatrixDefect,
    /// Center-basis indices `(a, b)`, `a <= b`, of the largest single term.
    pub pair: Option<(usize, usize)>,
}

impl PolarizedDefect {
    pub fn value(&self) -> f64 {
        self.defect.frobenius
    }
}

/// Computes Kaplan operators against a fixed center/complement splitting.
#[derive(Debug, Clone)]
pub struct KaplanFrame<'a> {
    algebra: &'a MetricLieAlgebra,
    splitting: Arc<Splitting>,
    tol: f64,
}

impl<'a> KaplanFrame<'a> {
    pub fn new(algebra: &'a MetricLieAlgebra, tol: f64) -> Result<Self> {
        let splitting = Splitting::compute(algebra, tol)?;
        Ok(Self {
            algebra,
            splitting: Arc::new(splitting),
            tol,
        })
    }

    pub fn with_splitting(
        algebra: &'a MetricLieAlgebra,
        splitting: Arc<Splitting>,
        tol: f64,
    ) -> Self {
        Self {
            algebra,
            splitting,
            tol,
        }
    }

    pub fn algebra(&self) -> &'a MetricLieAlgebra {
        self.algebra
    }

    pub fn splitting(&self) -> &Arc<Splitting> {
        &self.splitting
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn center_dim(&self) -> usize {
        self.splitting.center.dim()
    }

    pub fn complement_dim(&self) -> usize {
        self.splitting.complement.dim()
    }

    /// `Σ_a coeffs[a]·z_a` over the orthonormal center basis.
    pub fn center_vector(&self, coeffs: &[f64]) -> Result<DVector<f64>> {
        if coeffs.len() != self.center_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.center_dim(),
                found: coeffs.len(),
            });
        }
        Ok(self.splitting.center.basis() * DVector::from_column_slice(coeffs))
    }

    /// `max_j ‖[z, e_j]‖`.
    pub fn central_residual(&self, z: &DVector<f64>) -> Result<f64> {
        let ad = self.algebra.ad(z)?;
        Ok(ad.column_iter().map(|c| c.norm()).fold(0.0, f64::max))
    }

    fn check_input(&self, z: &DVector<f64>) -> Result<()> {
        if z.len() != self.algebra.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.algebra.dim(),
                found: z.len(),
            });
        }
        if self.complement_dim() == 0 {
            return Err(Error::Degenerate("trivial complement of the center".into()));
        }
        let residual = self.central_residual(z)?;
        if residual > self.tol * self.algebra.norm(z) * self.algebra.bracket_scale() {
            return Err(Error::NotCentral { residual });
        }
        Ok(())
    }

    /// `J_z` by solving the defining relation against the 𝔳-basis.
    ///
    /// For each `u_a` the functional `v ↦ ⟨z, [u_a, v]⟩ = (ad_{u_a}ᵀ G z)·v` is
    /// represented in 𝔳 by solving `Γ c = Uᵀ ad_{u_a}ᵀ G z` with `Γ` the Gram
    /// matrix of the 𝔳-basis.
    pub fn compute_j(&self, z: &DVector<f64>) -> Result<JOperator> {
        self.check_input(z)?;
        let u = self.splitting.complement.basis();
        let d = u.ncols();
        let gz = self.algebra.gram() * z;
        let gamma = self.splitting.complement.basis_gram(self.algebra);
        let chol = Cholesky::<f64, Dyn>::new(gamma)
            .ok_or_else(|| Error::Structural("complement basis is not independent".into()))?;
        let mut matrix = DMatrix::zeros(d, d);
        for a in 0..d {
            let ua = u.column(a).into_owned();
            let functional = self.algebra.ad(&ua)?.transpose() * &gz;
            let rhs = u.transpose() * functional;
            matrix.set_column(a, &chol.solve(&rhs));
        }
        Ok(JOperator {
            z: z.clone(),
            matrix,
            frame: Arc::clone(&self.splitting),
        })
    }

    /// The bilinear form `B_ab = ⟨z, [u_a, u_b]⟩`, assembled entry by entry from
    /// the structure constants. `B` is the transpose of `compute_j(z).matrix`.
    pub fn j_bilinear_form(&self, z: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_input(z)?;
        let u = self.splitting.complement.basis();
        let d = u.ncols();
        let gz = self.algebra.gram() * z;
        let mut b = DMatrix::zeros(d, d);
        for e in self.algebra.structure_constants() {
            let w = e.c * gz[e.k];
            if w == 0.0 {
                continue;
            }
            for a in 0..d {
                for c in 0..d {
                    b[(a, c)] += w * (u[(e.i, a)] * u[(e.j, c)] - u[(e.j, a)] * u[(e.i, c)]);
                }
            }
        }
        Ok(b)
    }

    /// `‖J_z J_w + J_w J_z + 2⟨z, w⟩ I‖`.
    pub fn clifford_defect(&self, z: &DVector<f64>, w: &DVector<f64>) -> Result<MatrixDefect> {
        let jz = self.compute_j(z)?.matrix;
        let jw = self.compute_j(w)?.matrix;
        let d = jz.nrows();
        let m = &jz * &jw + &jw * &jz + DMatrix::identity(d, d) * (2.0 * self.algebra.inner(z, w));
        Ok(MatrixDefect::of(&m))
    }

    /// The complex structure restricted to 𝔳, in the 𝔳-basis.
    ///
    /// Fails when `i·𝔳 ⊄ 𝔳` beyond tolerance.
    pub fn restricted_complex_structure(&self, complex: &ComplexStructure) -> Result<DMatrix<f64>> {
        let n = self.algebra.dim();
        if complex.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: complex.dim(),
            });
        }
        let v = &self.splitting.complement;
        let cu = complex.matrix() * v.basis();
        let restricted = v.basis().transpose() * self.algebra.gram() * &cu;
        let leak = &cu - v.basis() * &restricted;
        let worst = leak
            .column_iter()
            .map(|c| self.algebra.norm(&c.into_owned()))
            .fold(0.0, f64::max);
        if worst > self.tol {
            return Err(Error::Structural(format!(
                "complex structure does not preserve splitting (leak {worst:e})"
            )));
        }
        Ok(restricted)
    }

    /// `(‖J_{iz} - i∘J_z‖, ‖J_z∘i + i∘J_z‖)` on 𝔳: complex linearity in `z` and
    /// conjugate linearity in the argument.
    pub fn conjugate_linearity_defect(
        &self,
        complex: &ComplexStructure,
        z: &DVector<f64>,
    ) -> Result<(MatrixDefect, MatrixDefect)> {
        let i_v = self.restricted_complex_structure(complex)?;
        let jz = self.compute_j(z)?.matrix;
        let jiz = self.compute_j(&complex.apply(z))?.matrix;
        let in_z = MatrixDefect::of(&(&jiz - &i_v * &jz));
        let in_u = MatrixDefect::of(&(&jz * &i_v + &i_v * &jz));
        Ok((in_z, in_u))
    }

    /// `‖J_zᵀ J_z - I‖` for a unit central `z`. Non-unit input is rejected.
    pub fn isometry_defect(&self, z: &DVector<f64>) -> Result<MatrixDefect> {
        let norm = self.algebra.norm(z);
        if (norm - 1.0).abs() > self.tol {
            return Err(Error::NotUnit { norm });
        }
        let jz = self.compute_j(z)?.matrix;
        let d = jz.nrows();
        Ok(MatrixDefect::of(
            &(jz.transpose() * &jz - DMatrix::identity(d, d)),
        ))
    }

    /// `(Σ_{a,b} ‖D_ab‖²)^{1/2}` with `D_ab = ½(J_aᵀ J_b + J_bᵀ J_a) - δ_ab I`
    /// over the orthonormal center basis. `D` is the polarization of
    /// `z ↦ J_zᵀ J_z - ‖z‖² I`, so the sum is independent of the chosen basis,
    /// reduces to [`Self::isometry_defect`] for a one-dimensional center, and
    /// vanishes iff every unit central `z` gives an isometry.
    pub fn polarized_isometry_defect(&self) -> Result<PolarizedDefect> {
        let d = self.complement_dim();
        if d == 0 || self.center_dim() == 0 {
            return Ok(PolarizedDefect {
                defect: MatrixDefect::zero(d),
                pair: None,
            });
        }
        let js: Vec<DMatrix<f64>> = (0..self.center_dim())
            .map(|a| {
                self.compute_j(&self.splitting.center.vector(a))
                    .map(|j| j.matrix)
            })
            .collect::<Result<_>>()?;
        let mut total = 0.0;
        let mut worst: Option<(MatrixDefect, (usize, usize))> = None;
        for a in 0..js.len() {
            for b in a..js.len() {
                let mut m = js[a].transpose() * &js[b] + js[b].transpose() * &js[a];
                if a == b {
                    m -= DMatrix::identity(d, d) * 2.0;
                }
                let term = MatrixDefect::of(&m).scaled(0.5);
                let weight = if a == b { 1.0 } else { 2.0 };
                total += weight * term.frobenius * term.frobenius;
                if worst.is_none_or(|(w, _)| term.frobenius > w.frobenius) {
                    worst = Some((term, (a, b)));
                }
            }
        }
        let (term, pair) = worst.expect("nonempty center");
        Ok(PolarizedDefect {
            defect: MatrixDefect {
                frobenius: total.sqrt(),
                spectral: term.spectral,
                dim: d,
            },
            pair: Some(pair),
        })
    }
}

/// Polarized isometry defect of `algebra` computed on a fresh splitting.
pub fn polarized_isometry_defect(algebra: &MetricLieAlgebra, tol: f64) -> Result<PolarizedDefect> {
    KaplanFrame::new(algebra, tol)?.polarized_isometry_defect()
}
