//! H-type verification and classification of complex H-type algebras.
//!
//! For a complex algebra with a Hermitian metric, [`classify`] either builds
//! an orthonormal basis `(x_k, ix_k, y_k, iy_k, …, z, iz)` with `y_k = J_z x_k`
//! in which the algebra has exactly the standard complex Heisenberg brackets,
//! or, when the center has complex dimension at least two, exhibits unit
//! central `z, w` with `⟨z,w⟩ = ⟨iz,w⟩ = 0` and `J_z J_w = 0`, which rules out
//! the isometry condition.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constructions::heisenberg_complex;
use crate::error::{Error, Result};
use crate::kaplan::KaplanFrame;
use crate::lie::{
    validate_algebra, validate_complex_structure, ComplexStructure, MetricLieAlgebra, Subspace,
};
use crate::linalg;

/// Default tolerance for exact constructions.
pub const EXACT_TOL: f64 = 1e-9;
/// Default tolerance for scrambled or otherwise derived inputs.
pub const DERIVED_TOL: f64 = 1e-7;
/// Upper bound on the condition number of an accepted change of basis.
pub const MAX_CONDITION: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HTypeStatus {
    HType,
    NotHType,
    /// Trivial complement of the center (abelian algebra): neither pass nor fail.
    Degenerate,
}

impl fmt::Display for HTypeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HTypeStatus::HType => "h_type",
            HTypeStatus::NotHType => "not_h_type",
            HTypeStatus::Degenerate => "degenerate",
        })
    }
}

/// Evidence attached to a failing verdict.
#[derive(Debug, Clone, PartialEq)]
pub enum VerdictWitness {
    /// `[u, v]` has a component of norm `component_norm` orthogonal to the center.
    Containment {
        u: DVector<f64>,
        v: DVector<f64>,
        component_norm: f64,
    },
    /// Unit central `z` whose `J_z` is not an isometry.
    Isometry { z: DVector<f64>, defect: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HTypeVerdict {
    pub status: HTypeStatus,
    pub bracket_containment_defect: f64,
    pub polarized_isometry_defect: f64,
    pub witness: Option<VerdictWitness>,
    pub tolerance_used: f64,
    pub center_dim: usize,
    pub complement_dim: usize,
}

/// Checks both H-type conditions: `[𝔳, 𝔳] ⊂ 𝔷` and `J_z` isometric for unit
/// central `z` (through the polarized criterion on a center basis).
pub fn verify_h_type(algebra: &MetricLieAlgebra, tol: f64) -> Result<HTypeVerdict> {
    let frame = KaplanFrame::new(algebra, tol)?;
    verify_with_frame(&frame)
}

fn containment(frame: &KaplanFrame<'_>) -> Result<(f64, Option<VerdictWitness>)> {
    let algebra = frame.algebra();
    let split = frame.splitting();
    let v = &split.complement;
    let mut worst = 0.0;
    let mut witness = None;
    for a in 0..v.dim() {
        let ua = v.vector(a);
        for b in (a + 1)..v.dim() {
            let ub = v.vector(b);
            let br = algebra.bracket(&ua, &ub)?;
            let off = &br - split.center.project(algebra, &br);
            let norm = algebra.norm(&off);
            if norm > worst {
                worst = norm;
                witness = Some(VerdictWitness::Containment {
                    u: ua.clone(),
                    v: ub,
                    component_norm: norm,
                });
            }
        }
    }
    Ok((worst, witness))
}

fn verify_with_frame(frame: &KaplanFrame<'_>) -> Result<HTypeVerdict> {
    let tol = frame.tol();
    let center_dim = frame.center_dim();
    let complement_dim = frame.complement_dim();
    let mut verdict = HTypeVerdict {
        status: HTypeStatus::Degenerate,
        bracket_containment_defect: 0.0,
        polarized_isometry_defect: 0.0,
        witness: None,
        tolerance_used: tol,
        center_dim,
        complement_dim,
    };
    if complement_dim == 0 {
        return Ok(verdict);
    }
    let (contain, contain_witness) = containment(frame)?;
    let polarized = frame.polarized_isometry_defect()?;
    verdict.bracket_containment_defect = contain;
    verdict.polarized_isometry_defect = polarized.value();
    if contain > tol {
        verdict.status = HTypeStatus::NotHType;
        verdict.witness = contain_witness;
    } else if center_dim == 0 || polarized.value() > tol {
        verdict.status = HTypeStatus::NotHType;
        if let Some((a, b)) = polarized.pair {
            verdict.witness = Some(isometry_witness(frame, a, b)?);
        }
    } else {
        verdict.status = HTypeStatus::HType;
    }
    Ok(verdict)
}

/// A unit central vector with the larger isometry defect among `z_a` (when
/// `a == b`) or `(z_a ± z_b)/√2`.
fn isometry_witness(frame: &KaplanFrame<'_>, a: usize, b: usize) -> Result<VerdictWitness> {
    let c = &frame.splitting().center;
    let candidates = if a == b {
        vec![c.vector(a)]
    } else {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        vec![
            (c.vector(a) + c.vector(b)) * s,
            (c.vector(a) - c.vector(b)) * s,
        ]
    };
    let mut best: Option<(DVector<f64>, f64)> = None;
    for z in candidates {
        let defect = frame.isometry_defect(&z)?.value();
        if best.as_ref().is_none_or(|(_, d)| defect > *d) {
            best = Some((z, defect));
        }
    }
    let (z, defect) = best.expect("at least one candidate");
    Ok(VerdictWitness::Isometry { z, defect })
}

fn check_center_invariant(frame: &KaplanFrame<'_>, complex: &ComplexStructure) -> Result<()> {
    let algebra = frame.algebra();
    if complex.dim() != algebra.dim() {
        return Err(Error::DimensionMismatch {
            expected: algebra.dim(),
            found: complex.dim(),
        });
    }
    let center = &frame.splitting().center;
    for a in 0..center.dim() {
        let iz = complex.apply(&center.vector(a));
        let leak = algebra.norm(&(&iz - center.project(algebra, &iz)));
        if leak > frame.tol() {
            return Err(Error::Structural(format!(
                "complex structure does not preserve center (leak {leak:e})"
            )));
        }
    }
    Ok(())
}

fn complex_dimension_with_frame(
    frame: &KaplanFrame<'_>,
    complex: &ComplexStructure,
) -> Result<usize> {
    check_center_invariant(frame, complex)?;
    let real = frame.center_dim();
    if real % 2 == 1 {
        return Err(Error::Structural(format!(
            "complex structure does not preserve center (odd real dimension {real})"
        )));
    }
    Ok(real / 2)
}

/// Complex dimension of the center.
pub fn center_complex_dimension(
    algebra: &MetricLieAlgebra,
    complex: &ComplexStructure,
    tol: f64,
) -> Result<usize> {
    complex_dimension_with_frame(&KaplanFrame::new(algebra, tol)?, complex)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObstructionKind {
    /// `J_z J_w` vanishes for complex-orthonormal central `z, w`: the center
    /// has complex dimension at least two, so `J_z` cannot be an isometry.
    CenterDim,
    /// No vanishing product was found; `J_z` or `J_w` fails the isometry
    /// condition directly.
    IsometryFailure,
    /// `[𝔳, 𝔳] ⊄ 𝔷`, so the operator argument does not apply.
    ContainmentFailure,
}

impl fmt::Display for ObstructionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ObstructionKind::CenterDim => "center_dim",
            ObstructionKind::IsometryFailure => "isometry_failure",
            ObstructionKind::ContainmentFailure => "containment_failure",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObstructionWitness {
    pub z: DVector<f64>,
    pub w: DVector<f64>,
    /// `‖J_z J_w‖_F`.
    pub product_norm: f64,
    /// `‖J_w J_z‖_F`.
    pub reverse_product_norm: f64,
    /// `⟨z, w⟩`.
    pub inner: f64,
    /// `⟨iz, w⟩`.
    pub complex_inner: f64,
    pub kind: ObstructionKind,
    /// `max(‖J_zᵀJ_z - I‖, ‖J_wᵀJ_w - I‖)`, attached for isometry failures.
    pub isometry_defect: Option<f64>,
}

impl ObstructionWitness {
    /// Evaluates the witness quantities for a given pair, with kind decided
    /// by `tol` (containment is not re-checked here).
    pub fn for_pair(
        frame: &KaplanFrame<'_>,
        complex: &ComplexStructure,
        z: &DVector<f64>,
        w: &DVector<f64>,
    ) -> Result<Self> {
        let algebra = frame.algebra();
        let jz = frame.compute_j(z)?.matrix;
        let jw = frame.compute_j(w)?.matrix;
        let product_norm = (&jz * &jw).norm();
        let reverse_product_norm = (&jw * &jz).norm();
        let (kind, isometry_defect) = if product_norm <= frame.tol() {
            (ObstructionKind::CenterDim, None)
        } else {
            let d = frame
                .isometry_defect(z)?
                .value()
                .max(frame.isometry_defect(w)?.value());
            (ObstructionKind::IsometryFailure, Some(d))
        };
        Ok(Self {
            z: z.clone(),
            w: w.clone(),
            product_norm,
            reverse_product_norm,
            inner: algebra.inner(z, w),
            complex_inner: algebra.inner(&complex.apply(z), w),
            kind,
            isometry_defect,
        })
    }
}

/// Weights for the diagonal test operators used to split the center.
fn test_weights(d: usize) -> Vec<Vec<f64>> {
    vec![
        (0..d).map(|a| ((a + 2) as f64).sqrt()).collect(),
        (0..d).map(|a| ((d - a + 1) as f64).ln()).collect(),
        (0..d)
            .map(|a| {
                if a % 2 == 0 {
                    1.0
                } else {
                    std::f64::consts::PI
                }
            })
            .collect(),
    ]
}

/// Searches the center for unit `z, w` with `⟨z,w⟩ = ⟨iz,w⟩ = 0` and
/// `J_z J_w = 0`.
///
/// Candidates are eigenvectors of the quadratic forms
/// `q(z) = tr(R J_zᵀ J_z)` for a few fixed diagonal `R`; when 𝔳 splits into
/// pieces on which different parts of the center act, these eigenvectors
/// separate the pieces. The pair with the smallest `‖J_z J_w‖` wins.
pub fn find_obstruction(
    algebra: &MetricLieAlgebra,
    complex: &ComplexStructure,
    tol: f64,
) -> Result<ObstructionWitness> {
    find_obstruction_with_frame(&KaplanFrame::new(algebra, tol)?, complex)
}

fn find_obstruction_with_frame(
    frame: &KaplanFrame<'_>,
    complex: &ComplexStructure,
) -> Result<ObstructionWitness> {
    let algebra = frame.algebra();
    let cdim = complex_dimension_with_frame(frame, complex)?;
    if cdim < 2 {
        return Err(Error::Precondition(format!(
            "obstruction needs center complex dimension >= 2, found {cdim}"
        )));
    }
    if frame.complement_dim() == 0 {
        return Err(Error::Degenerate("trivial complement of the center".into()));
    }
    let center = &frame.splitting().center;
    let k = center.dim();
    let js: Vec<DMatrix<f64>> = (0..k)
        .map(|a| frame.compute_j(&center.vector(a)).map(|j| j.matrix))
        .collect::<Result<_>>()?;

    let mut candidates: Vec<DVector<f64>> = (0..k).map(|a| center.vector(a)).collect();
    for weights in test_weights(frame.complement_dim()) {
        let r = DMatrix::from_diagonal(&DVector::from_vec(weights));
        let q = DMatrix::from_fn(k, k, |a, b| {
            0.5 * (&r * (js[a].transpose() * &js[b] + js[b].transpose() * &js[a])).trace()
        });
        let eig = SymmetricEigen::new(q);
        for col in eig.eigenvectors.column_iter() {
            candidates.push(center.basis() * col);
        }
    }

    let mut best: Option<ObstructionWitness> = None;
    for (ci, zc) in candidates.iter().enumerate() {
        let z = zc / algebra.norm(zc);
        let plane = Subspace::from_basis(
            linalg::columns_to_matrix(algebra.dim(), &[z.clone(), complex.apply(&z)]),
            true,
        );
        for (cj, wc) in candidates.iter().enumerate() {
            if ci == cj {
                continue;
            }
            let w = wc - plane.project(algebra, wc);
            let norm = algebra.norm(&w);
            if norm < 1e-6 {
                continue;
            }
            let witness = ObstructionWitness::for_pair(frame, complex, &z, &(w / norm))?;
            if best
                .as_ref()
                .is_none_or(|b| witness.product_norm < b.product_norm)
            {
                best = Some(witness);
            }
        }
    }
    let mut witness = best.ok_or_else(|| {
        Error::Structural("no complex-orthogonal pair found in the center".into())
    })?;
    let (contain, _) = containment(frame)?;
    if contain > frame.tol() {
        witness.kind = ObstructionKind::ContainmentFailure;
    }
    Ok(witness)
}

/// How the free choices ("any unit vector orthogonal to …") are made.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule", content = "seed")]
pub enum PivotRule {
    /// Project every coordinate vector onto the remaining space and take the
    /// longest projection (lowest index among near-ties).
    #[default]
    LargestProjection,
    /// Take the lowest-index coordinate vector whose projection is at least
    /// half as long as the longest one.
    FirstCoordinate,
    /// Project seeded Gaussian vectors.
    Random(u64),
}

impl fmt::Display for PivotRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PivotRule::LargestProjection => f.write_str("largest-projection"),
            PivotRule::FirstCoordinate => f.write_str("first-coordinate"),
            PivotRule::Random(seed) => write!(f, "random:{seed}"),
        }
    }
}

impl FromStr for PivotRule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "largest-projection" => Ok(PivotRule::LargestProjection),
            "first-coordinate" => Ok(PivotRule::FirstCoordinate),
            _ => s
                .strip_prefix("random:")
                .and_then(|seed| seed.parse().ok())
                .map(PivotRule::Random)
                .ok_or_else(|| {
                    format!(
                        "unknown pivot rule {s:?} (expected largest-projection, \
                         first-coordinate or random:SEED)"
                    )
                }),
        }
    }
}

struct Pivoter {
    rule: PivotRule,
    rng: ChaCha8Rng,
}

impl Pivoter {
    fn new(rule: PivotRule) -> Self {
        let seed = match rule {
            PivotRule::Random(seed) => seed,
            _ => 0,
        };
        Self {
            rule,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// A unit vector in `space` orthogonal to `built`.
    fn pick(
        &mut self,
        algebra: &MetricLieAlgebra,
        space: &Subspace,
        built: &[DVector<f64>],
    ) -> Result<DVector<f64>> {
        let n = algebra.dim();
        let remaining = |x: &DVector<f64>| {
            let mut p = space.project(algebra, x);
            for b in built {
                let c = algebra.inner(b, &p);
                p.axpy(-c, b, 1.0);
            }
            p
        };
        let chosen = match self.rule {
            PivotRule::Random(_) => {
                let g = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut self.rng));
                remaining(&g)
            }
            PivotRule::LargestProjection | PivotRule::FirstCoordinate => {
                let projections: Vec<(DVector<f64>, f64)> = (0..n)
                    .map(|i| {
                        let p =
                            remaining(&DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 }));
                        let norm = algebra.norm(&p);
                        (p, norm)
                    })
                    .collect();
                let longest = projections.iter().map(|(_, l)| *l).fold(0.0, f64::max);
                let bar = match self.rule {
                    PivotRule::FirstCoordinate => 0.5 * longest,
                    _ => longest * (1.0 - 1e-9),
                };
                projections
                    .into_iter()
                    .find(|(_, l)| *l >= bar && *l > 0.0)
                    .map(|(p, _)| p)
                    .unwrap_or_else(|| DVector::zeros(n))
            }
        };
        let norm = algebra.norm(&chosen);
        if norm < 1e-6 {
            return Err(Error::Structural(
                "remaining space is numerically empty".into(),
            ));
        }
        Ok(chosen / norm)
    }
}

/// The three residuals of an isometric isomorphism certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `max_{a<b} ‖φ[s_a, s_b] - [f_a, f_b]_std‖` over standard basis pairs.
    pub bracket: f64,
    /// `‖SᵀGS - I‖_F` for the basis `S = φ⁻¹`.
    pub metric: f64,
    /// `‖φ∘i - i_std∘φ‖_F`.
    pub complex: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.bracket.max(self.metric).max(self.complex)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

/// An explicit isometric isomorphism onto the standard complex Heisenberg algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationResult {
    /// Heisenberg parameter: the target is `heisenberg_complex(n)`.
    pub n: usize,
    /// Columns `(x_1, ix_1, y_1, iy_1, …, z, iz)` in input coordinates.
    pub standard_basis: DMatrix<f64>,
    /// Maps input coordinates to standard coordinates (inverse of `standard_basis`).
    pub iso_matrix: DMatrix<f64>,
    pub residuals: Residuals,
    /// Max deviation of the basis Gram matrix from `I` after each step.
    pub step_orthonormality: Vec<f64>,
    pub pivot_rule: PivotRule,
    pub tolerance_used: f64,
    pub condition_number: f64,
}

/// Builds the orthonormal basis `x_m, ix_m, y_m = J_z x_m, iy_m` step by step,
/// then `z, iz`, and checks the result against `heisenberg_complex(n)`.
pub fn build_standard_basis(
    algebra: &MetricLieAlgebra,
    complex: &ComplexStructure,
    tol: f64,
    pivot: PivotRule,
) -> Result<ClassificationResult> {
    build_with_frame(&KaplanFrame::new(algebra, tol)?, complex, pivot)
}

fn build_with_frame(
    frame: &KaplanFrame<'_>,
    complex: &ComplexStructure,
    pivot: PivotRule,
) -> Result<ClassificationResult> {
    let algebra = frame.algebra();
    let tol = frame.tol();
    let cdim = complex_dimension_with_frame(frame, complex)?;
    if cdim != 1 {
        return Err(Error::Precondition(format!(
            "standard basis needs center complex dimension 1, found {cdim}"
        )));
    }
    let split = frame.splitting();
    let dv = split.complement.dim();
    if dv == 0 || !dv.is_multiple_of(4) {
        return Err(Error::Structural(format!(
            "complement of real dimension {dv} is inconsistent with complex H-type"
        )));
    }
    let n = dv / 4;
    let mut pivoter = Pivoter::new(pivot);
    let z = pivoter.pick(algebra, &split.center, &[])?;
    let jz = frame.compute_j(&z)?;

    let mut built: Vec<DVector<f64>> = Vec::with_capacity(dv + 2);
    let mut step_orthonormality = Vec::with_capacity(n);
    for _ in 0..n {
        let x = pivoter.pick(algebra, &split.complement, &built)?;
        let y = jz.apply(algebra, &x);
        let ix = complex.apply(&x);
        let iy = complex.apply(&y);
        built.extend([x, ix, y, iy]);
        let s = linalg::columns_to_matrix(algebra.dim(), &built);
        let gram = s.transpose() * algebra.gram() * &s;
        step_orthonormality.push(linalg::max_abs(
            &(gram - DMatrix::identity(built.len(), built.len())),
        ));
    }
    let iz = complex.apply(&z);
    built.extend([z, iz]);

    let basis = linalg::columns_to_matrix(algebra.dim(), &built);
    let iso = basis
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Structural("constructed basis is singular".into()))?;
    let (std_algebra, std_complex) = heisenberg_complex(n)?;

    let dim = algebra.dim();
    let unit = |i: usize| DVector::from_fn(dim, |r, _| if r == i { 1.0 } else { 0.0 });
    let mut bracket = 0.0_f64;
    for a in 0..dim {
        for b in (a + 1)..dim {
            let lhs =
                algebra.bracket(&basis.column(a).into_owned(), &basis.column(b).into_owned())?;
            let rhs = &basis * std_algebra.bracket(&unit(a), &unit(b))?;
            bracket = bracket.max(algebra.norm(&(lhs - rhs)));
        }
    }
    let metric = (basis.transpose() * algebra.gram() * &basis - DMatrix::identity(dim, dim)).norm();
    let complex_res = (&iso * complex.matrix() - std_complex.matrix() * &iso).norm();
    let residuals = Residuals {
        bracket,
        metric,
        complex: complex_res,
    };
    let condition_number = linalg::condition_number(&iso);
    if !residuals.within(tol) || condition_number >= MAX_CONDITION {
        return Err(Error::ClassificationFailure {
            bracket: residuals.bracket,
            metric: residuals.metric,
            complex: residuals.complex,
        });
    }
    Ok(ClassificationResult {
        n,
        standard_basis: basis,
        iso_matrix: iso,
        residuals,
        step_orthonormality,
        pivot_rule: pivot,
        tolerance_used: tol,
        condition_number,
    })
}

/// Recomputes the residuals of a certificate from the algebra, its complex
/// structure and the change-of-basis matrix alone.
pub fn verify_isomorphism(
    algebra: &MetricLieAlgebra,
    complex: &ComplexStructure,
    iso_matrix: &DMatrix<f64>,
) -> Result<Residuals> {
    let dim = algebra.dim();
    if iso_matrix.nrows() != dim || iso_matrix.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: iso_matrix.nrows(),
        });
    }
    if complex.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: complex.dim(),
        });
    }
    if dim < 6 || !(dim - 2).is_multiple_of(4) {
        return Err(Error::Structural(format!(
            "dimension {dim} is not that of a complex Heisenberg algebra"
        )));
    }
    let (std_algebra, std_complex) = heisenberg_complex((dim - 2) / 4)?;
    let inverse = iso_matrix
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Structural("iso_matrix is singular".into()))?;
    let mut bracket = 0.0_f64;
    for a in 0..dim {
        let sa = inverse.column(a).into_owned();
        for b in (a + 1)..dim {
            let sb = inverse.column(b).into_owned();
            let pushed = iso_matrix * algebra.bracket(&sa, &sb)?;
            let fa = DVector::from_fn(dim, |r, _| if r == a { 1.0 } else { 0.0 });
            let fb = DVector::from_fn(dim, |r, _| if r == b { 1.0 } else { 0.0 });
            let target = std_algebra.bracket(&fa, &fb)?;
            bracket = bracket.max((pushed - target).norm());
        }
    }
    let metric =
        (inverse.transpose() * algebra.gram() * &inverse - DMatrix::identity(dim, dim)).norm();
    let complex_res = (iso_matrix * complex.matrix() - std_complex.matrix() * iso_matrix).norm();
    Ok(Residuals {
        bracket,
        metric,
        complex: complex_res,
    })
}

/// Pipeline stage at which [`classify`] failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Validate,
    ComplexStructure,
    Verify,
    CenterDimension,
    Obstruction,
    BuildBasis,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Validate => "validate",
            Stage::ComplexStructure => "complex-structure",
            Stage::Verify => "verify",
            Stage::CenterDimension => "center-dimension",
            Stage::Obstruction => "obstruction",
            Stage::BuildBasis => "build-basis",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{stage}: {source}")]
pub struct ClassifyError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, ClassifyError>;
}

impl<T> AtStage<T> for Result<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, ClassifyError> {
        self.map_err(|source| ClassifyError { stage, source })
    }
}

/// Outcome of the full classification pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum Classification {
    /// Isometrically isomorphic to `heisenberg_complex(n)`.
    Isomorphism(ClassificationResult),
    /// The verifier accepted the input but its center has complex dimension
    /// at least two; the witness quantifies the disagreement.
    Obstruction {
        verdict: HTypeVerdict,
        witness: ObstructionWitness,
    },
    /// Not H-type, degenerate, or H-type without a complex structure.
    Verdict {
        verdict: HTypeVerdict,
        diagnostic: Option<ObstructionWitness>,
        refusal: Option<String>,
    },
}

impl Classification {
    pub fn verdict(&self) -> Option<&HTypeVerdict> {
        match self {
            Classification::Isomorphism(_) => None,
            Classification::Obstruction { verdict, .. }
            | Classification::Verdict { verdict, .. } => Some(verdict),
        }
    }
}

/// Validates, verifies and, for complex H-type input, classifies.
pub fn classify(
    algebra: &MetricLieAlgebra,
    complex: Option<&ComplexStructure>,
    tol: f64,
    pivot: PivotRule,
) -> std::result::Result<Classification, ClassifyError> {
    let defects = validate_algebra(algebra, tol);
    if !defects.is_empty() {
        return Err(ClassifyError {
            stage: Stage::Validate,
            source: Error::Validation(defects),
        });
    }
    if let Some(c) = complex {
        let defects = validate_complex_structure(algebra, c, tol).at(Stage::ComplexStructure)?;
        if !defects.is_empty() {
            return Err(ClassifyError {
                stage: Stage::ComplexStructure,
                source: Error::Validation(defects),
            });
        }
    }
    let frame = KaplanFrame::new(algebra, tol).at(Stage::Verify)?;
    let verdict = verify_with_frame(&frame).at(Stage::Verify)?;
    let Some(complex) = complex else {
        let refusal = (verdict.status == HTypeStatus::HType)
            .then(|| "no complex structure supplied".to_string());
        return Ok(Classification::Verdict {
            verdict,
            diagnostic: None,
            refusal,
        });
    };
    match verdict.status {
        HTypeStatus::HType => {
            let cdim = complex_dimension_with_frame(&frame, complex).at(Stage::CenterDimension)?;
            if cdim >= 2 {
                let witness =
                    find_obstruction_with_frame(&frame, complex).at(Stage::Obstruction)?;
                Ok(Classification::Obstruction { verdict, witness })
            } else {
                let result = build_with_frame(&frame, complex, pivot).at(Stage::BuildBasis)?;
                Ok(Classification::Isomorphism(result))
            }
        }
        HTypeStatus::NotHType => {
            let diagnostic = match complex_dimension_with_frame(&frame, complex) {
                Ok(cdim) if cdim >= 2 => find_obstruction_with_frame(&frame, complex).ok(),
                _ => None,
            };
            Ok(Classification::Verdict {
                verdict,
                diagnostic,
                refusal: None,
            })
        }
        HTypeStatus::Degenerate => Ok(Classification::Verdict {
            verdict,
            diagnostic: None,
            refusal: None,
        }),
    }
}
