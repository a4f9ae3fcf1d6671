//! Canonical algebras, Clifford-induced H-type algebras, direct sums and
//! basis scramblers.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::lie::{ComplexStructure, MetricLieAlgebra, StructureConstant, StructuredAlgebra};
use crate::linalg;

/// Tolerance used when checking Clifford generator invariants.
pub const CLIFFORD_TOL: f64 = 1e-12;

/// Skew-symmetric matrices `G_1..G_d` on `ℝ^m` with `G_a G_b + G_b G_a = -2δ_ab I`.
#[derive(Debug, Clone, PartialEq)]
pub struct CliffordGenerators {
    module_dim: usize,
    generators: Vec<DMatrix<f64>>,
}

impl CliffordGenerators {
    /// Checks skew-symmetry and the Clifford relations to within `tol`.
    pub fn new(generators: Vec<DMatrix<f64>>, tol: f64) -> Result<Self> {
        let module_dim = generators.first().map_or(0, |g| g.nrows());
        if generators.is_empty() {
            return Err(Error::InvalidInput(
                "at least one generator is required".into(),
            ));
        }
        for g in &generators {
            if g.nrows() != module_dim || g.ncols() != module_dim {
                return Err(Error::DimensionMismatch {
                    expected: module_dim,
                    found: g.ncols(),
                });
            }
        }
        for (index, g) in generators.iter().enumerate() {
            let defect = linalg::max_abs(&(g + g.transpose()));
            if defect > tol {
                return Err(Error::NotSkew { index, defect });
            }
        }
        let id = DMatrix::<f64>::identity(module_dim, module_dim);
        for a in 0..generators.len() {
            for b in a..generators.len() {
                let target = if a == b { -2.0 } else { 0.0 };
                let m = &generators[a] * &generators[b] + &generators[b] * &generators[a]
                    - &id * target;
                let defect = linalg::max_abs(&m);
                if defect > tol {
                    return Err(Error::CliffordRelation { a, b, defect });
                }
            }
        }
        Ok(Self {
            module_dim,
            generators,
        })
    }

    /// Generators for `d` anticommuting complex structures on `ℝ^m`, built from
    /// blocks of left multiplication by imaginary units: complex numbers
    /// (`d = 1`, `m` even), quaternions (`d ≤ 3`, `4 | m`) or octonions
    /// (`d ≤ 7`, `8 | m`).
    pub fn standard(center_dim: usize, module_dim: usize) -> Result<Self> {
        let (block, units): (usize, Vec<DMatrix<f64>>) = match center_dim {
            1 if module_dim.is_multiple_of(2) && module_dim > 0 => (2, vec![rotation()]),
            1..=3 if module_dim.is_multiple_of(4) && module_dim > 0 => (
                4,
                quaternion_left_units()
                    .into_iter()
                    .take(center_dim)
                    .collect(),
            ),
            1..=7 if module_dim.is_multiple_of(8) && module_dim > 0 => (
                8,
                octonion_left_units().into_iter().take(center_dim).collect(),
            ),
            _ => {
                return Err(Error::InvalidInput(format!(
                    "no built-in Clifford module of dimension {module_dim} for {center_dim} \
                     generators (supported: d=1 with m even, d<=3 with 4|m, d<=7 with 8|m)"
                )))
            }
        };
        let copies = module_dim / block;
        let generators = units
            .iter()
            .map(|u| {
                let mut g = DMatrix::zeros(module_dim, module_dim);
                for c in 0..copies {
                    g.view_mut((c * block, c * block), (block, block))
                        .copy_from(u);
                }
                g
            })
            .collect();
        Self::new(generators, CLIFFORD_TOL)
    }

    /// Left multiplication by `i, j, k` on `ℍ ≅ ℝ⁴` (basis `1, i, j, k`).
    pub fn quaternionic() -> Self {
        Self::new(quaternion_left_units(), CLIFFORD_TOL)
            .expect("quaternion units satisfy the relations")
    }

    pub fn center_dim(&self) -> usize {
        self.generators.len()
    }

    pub fn module_dim(&self) -> usize {
        self.module_dim
    }

    pub fn generators(&self) -> &[DMatrix<f64>] {
        &self.generators
    }
}

fn rotation() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])
}

fn from_images(dim: usize, images: &[(usize, usize, f64)]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(dim, dim);
    for &(col, row, sign) in images {
        m[(row, col)] = sign;
    }
    m
}

fn quaternion_left_units() -> Vec<DMatrix<f64>> {
    // (source, image, sign) for basis 1, i, j, k.
    vec![
        from_images(4, &[(0, 1, 1.0), (1, 0, -1.0), (2, 3, 1.0), (3, 2, -1.0)]),
        from_images(4, &[(0, 2, 1.0), (1, 3, -1.0), (2, 0, -1.0), (3, 1, 1.0)]),
        from_images(4, &[(0, 3, 1.0), (1, 2, 1.0), (2, 1, -1.0), (3, 0, -1.0)]),
    ]
}

/// Octonion product of basis units `e_a e_b = sign·e_c`.
fn octonion_product(a: usize, b: usize) -> (f64, usize) {
    const TRIPLES: [(usize, usize, usize); 7] = [
        (1, 2, 3),
        (1, 4, 5),
        (1, 7, 6),
        (2, 4, 6),
        (2, 5, 7),
        (3, 4, 7),
        (3, 6, 5),
    ];
    match (a, b) {
        (0, b) => (1.0, b),
        (a, 0) => (1.0, a),
        (a, b) if a == b => (-1.0, 0),
        _ => {
            for &(p, q, r) in &TRIPLES {
                for (x, y, z) in [(p, q, r), (q, r, p), (r, p, q)] {
                    if (a, b) == (x, y) {
                        return (1.0, z);
                    }
                    if (a, b) == (y, x) {
                        return (-1.0, z);
                    }
                }
            }
            unreachable!("every pair of distinct imaginary units lies on one line")
        }
    }
}

fn octonion_left_units() -> Vec<DMatrix<f64>> {
    (1..8)
        .map(|a| {
            let images: Vec<(usize, usize, f64)> = (0..8)
                .map(|b| {
                    let (sign, c) = octonion_product(a, b);
                    (b, c, sign)
                })
                .collect();
            from_images(8, &images)
        })
        .collect()
}

/// The complex Heisenberg algebra of complex dimension `2n + 1` in its real
/// form, with basis `(x_k, ix_k, y_k, iy_k)` for `k = 1..n` followed by
/// `(z, iz)`, identity Gram matrix and the standard complex structure.
pub fn heisenberg_complex(n: usize) -> Result<(MetricLieAlgebra, ComplexStructure)> {
    if n < 1 {
        return Err(Error::InvalidInput(
            "heisenberg_complex requires n >= 1".into(),
        ));
    }
    let dim = 4 * n + 2;
    let (z, iz) = (4 * n, 4 * n + 1);
    let mut constants = Vec::with_capacity(4 * n);
    for k in 0..n {
        let (x, ix, y, iy) = (4 * k, 4 * k + 1, 4 * k + 2, 4 * k + 3);
        constants.push(StructureConstant::new(x, y, z, 1.0));
        constants.push(StructureConstant::new(ix, y, iz, 1.0));
        constants.push(StructureConstant::new(x, iy, iz, 1.0));
        constants.push(StructureConstant::new(ix, iy, z, -1.0));
    }
    let algebra = MetricLieAlgebra::new(dim, constants, DMatrix::identity(dim, dim))?;
    Ok((algebra, standard_complex_structure(dim)))
}

/// `e_{2p} ↦ e_{2p+1}`, `e_{2p+1} ↦ -e_{2p}`.
pub fn standard_complex_structure(dim: usize) -> ComplexStructure {
    let mut m = DMatrix::zeros(dim, dim);
    for p in 0..dim / 2 {
        m[(2 * p + 1, 2 * p)] = 1.0;
        m[(2 * p, 2 * p + 1)] = -1.0;
    }
    ComplexStructure::new(m).expect("square by construction")
}

/// The real Heisenberg algebra of dimension `2n + 1`, basis
/// `(x_1, y_1, …, x_n, y_n, z)`, `[x_k, y_k] = z`, identity Gram matrix.
pub fn heisenberg_real(n: usize) -> Result<MetricLieAlgebra> {
    if n < 1 {
        return Err(Error::InvalidInput(
            "heisenberg_real requires n >= 1".into(),
        ));
    }
    let dim = 2 * n + 1;
    let constants = (0..n)
        .map(|k| StructureConstant::new(2 * k, 2 * k + 1, 2 * n, 1.0))
        .collect();
    MetricLieAlgebra::new(dim, constants, DMatrix::identity(dim, dim))
}

/// The H-type algebra induced by a Clifford module.
///
/// The basis is the module part followed by the center part. In orthonormal
/// coordinates the bracket is `⟨z_a, [u, v]⟩ = ⟨G_a u, v⟩`; when Gram matrices
/// are supplied, the result is that algebra expressed in a basis whose Gram
/// matrices are the given ones (module block `gram_module`, center block
/// `gram_center`).
pub fn from_clifford_representation(
    gens: &CliffordGenerators,
    gram_center: Option<&DMatrix<f64>>,
    gram_module: Option<&DMatrix<f64>>,
) -> Result<MetricLieAlgebra> {
    // Re-check: the fields are private, but the relations are what make the
    // result H-type.
    let gens = CliffordGenerators::new(gens.generators.clone(), CLIFFORD_TOL)?;
    let m = gens.module_dim();
    let d = gens.center_dim();
    let dim = m + d;
    let mut constants = Vec::new();
    for (a, g) in gens.generators().iter().enumerate() {
        for i in 0..m {
            for j in (i + 1)..m {
                let c = g[(j, i)];
                if c != 0.0 {
                    constants.push(StructureConstant::new(i, j, m + a, c));
                }
            }
        }
    }
    let base = MetricLieAlgebra::new(dim, constants, DMatrix::identity(dim, dim))?;
    if gram_center.is_none() && gram_module.is_none() {
        return Ok(base);
    }
    let mut change = DMatrix::<f64>::identity(dim, dim);
    for (gram, offset, size) in [(gram_module, 0, m), (gram_center, m, d)] {
        if let Some(g) = gram {
            if g.nrows() != size || g.ncols() != size {
                return Err(Error::DimensionMismatch {
                    expected: size,
                    found: g.nrows(),
                });
            }
            let chol = Cholesky::<f64, Dyn>::new((g + g.transpose()) * 0.5)
                .ok_or_else(|| Error::InvalidInput("gram block is not positive definite".into()))?;
            change
                .view_mut((offset, offset), (size, size))
                .copy_from(&chol.l().transpose());
        }
    }
    let (algebra, _) = change_basis(&base, None, &change)?;
    Ok(algebra)
}

/// Expresses the algebra in the basis given by the columns of `change`
/// (`f_i = Σ_j change[j,i] e_j`): new Gram `PᵀGP`, new structure constants
/// `P⁻¹[P e_i, P e_j]`, new complex structure `P⁻¹ C P`.
pub fn change_basis(
    algebra: &MetricLieAlgebra,
    complex: Option<&ComplexStructure>,
    change: &DMatrix<f64>,
) -> Result<(MetricLieAlgebra, Option<ComplexStructure>)> {
    let n = algebra.dim();
    if change.nrows() != n || change.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: change.nrows(),
        });
    }
    let inverse = change
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidInput("change of basis is singular".into()))?;
    let mut constants = Vec::new();
    for i in 0..n {
        let fi = change.column(i).into_owned();
        for j in (i + 1)..n {
            let fj = change.column(j).into_owned();
            let coords = &inverse * algebra.bracket(&fi, &fj)?;
            for (k, &c) in coords.iter().enumerate() {
                if c != 0.0 {
                    constants.push(StructureConstant::new(i, j, k, c));
                }
            }
        }
    }
    let gram = change.transpose() * algebra.gram() * change;
    let gram = (&gram + gram.transpose()) * 0.5;
    let new_algebra = MetricLieAlgebra::new(n, constants, gram)?;
    let new_complex = complex
        .map(|c| ComplexStructure::new(&inverse * c.matrix() * change))
        .transpose()?;
    Ok((new_algebra, new_complex))
}

/// Block-diagonal direct sum. Complex structures must be present on both
/// summands or on neither.
pub fn direct_sum(a: &StructuredAlgebra, b: &StructuredAlgebra) -> Result<StructuredAlgebra> {
    let (na, nb) = (a.algebra.dim(), b.algebra.dim());
    let n = na + nb;
    let mut constants: Vec<StructureConstant> = a.algebra.structure_constants().to_vec();
    constants.extend(
        b.algebra
            .structure_constants()
            .iter()
            .map(|e| StructureConstant::new(e.i + na, e.j + na, e.k + na, e.c)),
    );
    let block = |x: &DMatrix<f64>, y: &DMatrix<f64>| {
        let mut m = DMatrix::zeros(n, n);
        m.view_mut((0, 0), (na, na)).copy_from(x);
        m.view_mut((na, na), (nb, nb)).copy_from(y);
        m
    };
    let algebra = MetricLieAlgebra::new(n, constants, block(a.algebra.gram(), b.algebra.gram()))?;
    let complex = match (&a.complex, &b.complex) {
        (Some(ca), Some(cb)) => Some(ComplexStructure::new(block(ca.matrix(), cb.matrix()))?),
        (None, None) => None,
        _ => {
            return Err(Error::InvalidInput(
                "direct sum needs complex structures on both summands or on neither".into(),
            ))
        }
    };
    Ok(StructuredAlgebra { algebra, complex })
}

/// Output of [`scramble`].
#[derive(Debug, Clone, PartialEq)]
pub struct Scrambled {
    pub algebra: StructuredAlgebra,
    /// Columns are the new basis vectors in the original coordinates.
    pub transform: DMatrix<f64>,
}

/// Re-expresses the algebra in a random orthonormal basis.
///
/// The transform `T` satisfies `TᵀGT = G`; when a complex structure is present
/// it also commutes with it (a random Hermitian isometry). Deterministic in
/// `seed`.
pub fn scramble(input: &StructuredAlgebra, seed: u64) -> Result<Scrambled> {
    let algebra = &input.algebra;
    let n = algebra.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut random_matrix =
        |cols: usize| DMatrix::from_fn(n, cols, |_, _| StandardNormal.sample(&mut rng));
    let (source, target) = match &input.complex {
        Some(c) => (
            hermitian_frame(algebra, c, &DMatrix::identity(n, n)),
            hermitian_frame(algebra, c, &random_matrix(2 * n)),
        ),
        None => (
            algebra.orthonormalize(&DMatrix::identity(n, n), 1e-8)?,
            algebra.orthonormalize(&random_matrix(2 * n), 1e-8)?,
        ),
    };
    if source.ncols() != n || target.ncols() != n {
        return Err(Error::Structural(
            "could not build orthonormal frames for the scrambler".into(),
        ));
    }
    let transform = &target * source.transpose() * algebra.gram();
    let (scrambled, complex) = change_basis(algebra, input.complex.as_ref(), &transform)?;
    Ok(Scrambled {
        algebra: StructuredAlgebra {
            algebra: scrambled,
            complex,
        },
        transform,
    })
}

/// Complex Gram-Schmidt: from candidate columns, builds vectors `b_1, i b_1,
/// b_2, i b_2, …` orthonormal under the Gram matrix. Requires a Hermitian
/// complex structure.
fn hermitian_frame(
    algebra: &MetricLieAlgebra,
    complex: &ComplexStructure,
    candidates: &DMatrix<f64>,
) -> DMatrix<f64> {
    let n = algebra.dim();
    let mut frame: Vec<DVector<f64>> = Vec::new();
    for cand in candidates.column_iter() {
        if frame.len() >= n {
            break;
        }
        let original = algebra.norm(&cand.into_owned());
        if original == 0.0 {
            continue;
        }
        let mut v = cand.into_owned();
        for _pass in 0..2 {
            for q in &frame {
                let proj = algebra.inner(q, &v);
                v.axpy(-proj, q, 1.0);
            }
        }
        let norm = algebra.norm(&v);
        if norm <= 1e-8 * original {
            continue;
        }
        let b = v / norm;
        let mut ib = complex.apply(&b);
        // i·b is orthogonal to b exactly for a Hermitian structure; this pass
        // removes rounding.
        for q in frame.iter().chain(std::iter::once(&b)) {
            let proj = algebra.inner(q, &ib);
            ib.axpy(-proj, q, 1.0);
        }
        let ib_norm = algebra.norm(&ib);
        frame.push(b);
        frame.push(ib / ib_norm);
    }
    linalg::columns_to_matrix(n, &frame)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{validate_algebra, validate_complex_structure};

    fn e(n: usize, i: usize) -> DVector<f64> {
        DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 })
    }

    #[test]
    fn heisenberg_complex_brackets() {
        let (a, c) = heisenberg_complex(1).unwrap();
        assert_eq!(a.dim(), 6);
        // x1=0, ix1=1, y1=2, iy1=3, z=4, iz=5
        assert_eq!(a.bracket(&e(6, 0), &e(6, 2)).unwrap(), e(6, 4));
        assert_eq!(a.bracket(&e(6, 1), &e(6, 3)).unwrap(), -e(6, 4));
        assert_eq!(a.bracket(&e(6, 0), &e(6, 4)).unwrap(), DVector::zeros(6));
        assert_eq!(c.apply(&e(6, 4)), e(6, 5));
        assert_eq!(c.apply(&e(6, 5)), -e(6, 4));
        let (a2, _) = heisenberg_complex(2).unwrap();
        // [x1, y2] = 0
        assert_eq!(
            a2.bracket(&e(10, 0), &e(10, 6)).unwrap(),
            DVector::zeros(10)
        );
    }

    #[test]
    fn constructors_reject_zero() {
        assert!(heisenberg_complex(0).is_err());
        assert!(heisenberg_real(0).is_err());
    }

    #[test]
    fn conjugate_structure_is_valid() {
        let (a, c) = heisenberg_complex(1).unwrap();
        let d = validate_complex_structure(&a, &c.conjugate(), 1e-14).unwrap();
        assert!(d.is_empty(), "{d:?}");
    }

    #[test]
    fn clifford_rejects_bad_generators() {
        let not_skew = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!(matches!(
            CliffordGenerators::new(vec![not_skew], 1e-12),
            Err(Error::NotSkew { index: 0, .. })
        ));
        // Two copies of the same rotation: G G + G G = -2I ≠ 0 off the diagonal.
        assert!(matches!(
            CliffordGenerators::new(vec![rotation(), rotation()], 1e-12),
            Err(Error::CliffordRelation { a: 0, b: 1, .. })
        ));
        // Scaled rotation fails the diagonal relation.
        assert!(matches!(
            CliffordGenerators::new(vec![rotation() * 2.0], 1e-12),
            Err(Error::CliffordRelation { a: 0, b: 0, .. })
        ));
    }

    #[test]
    fn standard_generators_cover_supported_shapes() {
        for (d, m) in [(1, 2), (1, 6), (2, 4), (3, 8), (4, 8), (5, 16), (7, 8)] {
            let g = CliffordGenerators::standard(d, m).unwrap();
            assert_eq!((g.center_dim(), g.module_dim()), (d, m));
        }
        assert!(CliffordGenerators::standard(2, 2).is_err());
        assert!(CliffordGenerators::standard(8, 16).is_err());
        assert!(CliffordGenerators::standard(0, 4).is_err());
    }

    #[test]
    fn clifford_d1_matches_real_heisenberg() {
        for n in 1..=2 {
            let g = CliffordGenerators::standard(1, 2 * n).unwrap();
            let a = from_clifford_representation(&g, None, None).unwrap();
            assert_eq!(a, heisenberg_real(n).unwrap());
        }
    }

    #[test]
    fn clifford_with_weighted_grams() {
        let g = CliffordGenerators::quaternionic();
        let gm = DMatrix::from_fn(4, 4, |i, j| if i == j { 2.0 } else { 0.1 });
        let gc = DMatrix::from_fn(3, 3, |i, j| if i == j { 1.5 } else { -0.2 });
        let a = from_clifford_representation(&g, Some(&gc), Some(&gm)).unwrap();
        assert!((a.gram().view((0, 0), (4, 4)) - &gm).norm() < 1e-12);
        assert!((a.gram().view((4, 4), (3, 3)) - &gc).norm() < 1e-12);
        assert!(validate_algebra(&a, 1e-12).is_empty());
    }

    #[test]
    fn direct_sum_rejects_mixed_complex_structures() {
        let (a, c) = heisenberg_complex(1).unwrap();
        let left = StructuredAlgebra::complex(a, c);
        let right = StructuredAlgebra::real(heisenberg_real(1).unwrap());
        assert!(matches!(
            direct_sum(&left, &right),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn direct_sum_with_zero_is_identity() {
        let (a, c) = heisenberg_complex(1).unwrap();
        let left = StructuredAlgebra::complex(a, c);
        let zero = StructuredAlgebra::complex(
            MetricLieAlgebra::zero(),
            ComplexStructure::new(DMatrix::zeros(0, 0)).unwrap(),
        );
        assert_eq!(direct_sum(&left, &zero).unwrap(), left);
        assert_eq!(direct_sum(&zero, &left).unwrap(), left);
    }

    #[test]
    fn scramble_is_hermitian_isometry() {
        let (a, c) = heisenberg_complex(2).unwrap();
        let s = scramble(&StructuredAlgebra::complex(a.clone(), c.clone()), 7).unwrap();
        let t = &s.transform;
        assert!((t.transpose() * a.gram() * t - a.gram()).norm() < 1e-10);
        assert!((t * c.matrix() - c.matrix() * t).norm() < 1e-10);
        assert!(validate_algebra(&s.algebra.algebra, 1e-12).is_empty());
        let d = validate_complex_structure(
            &s.algebra.algebra,
            s.algebra.complex.as_ref().unwrap(),
            1e-12,
        )
        .unwrap();
        assert!(d.is_empty(), "{d:?}");
    }

    #[test]
    fn scramble_is_seed_deterministic() {
        let a = StructuredAlgebra::real(heisenberg_real(2).unwrap());
        let s1 = scramble(&a, 99).unwrap();
        let s2 = scramble(&a, 99).unwrap();
        assert_eq!(s1, s2);
        let s3 = scramble(&a, 100).unwrap();
        assert_ne!(s1.transform, s3.transform);
    }
}
