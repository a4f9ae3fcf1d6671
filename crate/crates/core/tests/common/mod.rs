//! Fixtures and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use htype_core::constructions::{
    direct_sum, from_clifford_representation, heisenberg_complex, heisenberg_real, scramble,
    CliffordGenerators,
};
use htype_core::{ComplexStructure, KaplanFrame, MetricLieAlgebra, StructuredAlgebra};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

pub struct Fixture {
    pub name: String,
    pub algebra: MetricLieAlgebra,
    pub complex: Option<ComplexStructure>,
    /// Whether the fixture is H-type by construction.
    pub h_type: bool,
}

fn fixture(name: &str, s: StructuredAlgebra, h_type: bool) -> Fixture {
    Fixture {
        name: name.into(),
        algebra: s.algebra,
        complex: s.complex,
        h_type,
    }
}

pub fn hc(n: usize) -> StructuredAlgebra {
    let (a, c) = heisenberg_complex(n).unwrap();
    StructuredAlgebra::complex(a, c)
}

pub fn h3c_pair() -> StructuredAlgebra {
    direct_sum(&hc(1), &hc(1)).unwrap()
}

pub fn quaternionic() -> MetricLieAlgebra {
    from_clifford_representation(&CliffordGenerators::quaternionic(), None, None).unwrap()
}

/// Every algebra the tests sweep over: H-type families, their scrambles, and
/// a few non-H-type algebras with nontrivial center and complement.
pub fn all() -> Vec<Fixture> {
    let mut out = Vec::new();
    for n in 1..=3 {
        out.push(fixture(&format!("heisenberg-complex-{n}"), hc(n), true));
        out.push(fixture(
            &format!("heisenberg-real-{n}"),
            StructuredAlgebra::real(heisenberg_real(n).unwrap()),
            true,
        ));
    }
    for (d, m) in [(1, 2), (1, 4), (3, 4), (3, 8), (7, 8)] {
        let gens = CliffordGenerators::standard(d, m).unwrap();
        out.push(fixture(
            &format!("clifford-{d}-{m}"),
            StructuredAlgebra::real(from_clifford_representation(&gens, None, None).unwrap()),
            true,
        ));
    }
    let weighted = from_clifford_representation(
        &CliffordGenerators::quaternionic(),
        Some(&DMatrix::from_diagonal(&DVector::from_vec(vec![
            1.0, 2.0, 0.5,
        ]))),
        Some(&(DMatrix::identity(4, 4) * 3.0 + DMatrix::from_element(4, 4, 0.5))),
    )
    .unwrap();
    out.push(fixture(
        "quaternionic-weighted-gram",
        StructuredAlgebra::real(weighted),
        true,
    ));
    out.push(fixture(
        "scrambled-heisenberg-complex-2",
        scramble(&hc(2), 42).unwrap().algebra,
        true,
    ));
    out.push(fixture(
        "scrambled-quaternionic",
        scramble(&StructuredAlgebra::real(quaternionic()), 7)
            .unwrap()
            .algebra,
        true,
    ));
    out.push(fixture("direct-sum-h3c-h3c", h3c_pair(), false));
    out.push(fixture(
        "scrambled-direct-sum",
        scramble(&h3c_pair(), 5).unwrap().algebra,
        false,
    ));
    out.push(fixture(
        "direct-sum-h3-quaternionic",
        direct_sum(
            &StructuredAlgebra::real(heisenberg_real(1).unwrap()),
            &StructuredAlgebra::real(quaternionic()),
        )
        .unwrap(),
        false,
    ));
    out.push(fixture(
        "stretched-heisenberg-real-2",
        StructuredAlgebra::real(stretched_h5()),
        false,
    ));
    out
}

/// Heisenberg algebra of dimension 5 with `[x_2, y_2] = 2z`: step two, but
/// `J_z` is not an isometry.
pub fn stretched_h5() -> MetricLieAlgebra {
    use htype_core::StructureConstant;
    MetricLieAlgebra::new(
        5,
        vec![
            StructureConstant::new(0, 1, 4, 1.0),
            StructureConstant::new(2, 3, 4, 2.0),
        ],
        DMatrix::identity(5, 5),
    )
    .unwrap()
}

pub fn unit(n: usize, i: usize) -> DVector<f64> {
    DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 })
}

pub fn gaussian<R: Rng>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// A random central vector, normalized when `unit` is set.
pub fn random_central<R: Rng>(frame: &KaplanFrame<'_>, rng: &mut R, unit: bool) -> DVector<f64> {
    let coeffs: Vec<f64> = (0..frame.center_dim())
        .map(|_| rng.sample(StandardNormal))
        .collect();
    let z = frame.center_vector(&coeffs).unwrap();
    if unit {
        let norm = frame.algebra().norm(&z);
        z / norm
    } else {
        z
    }
}

/// Dense bracket tensor `t[i][j][k]`, filled from the structure constants with
/// antisymmetry written out explicitly.
pub fn dense_tensor(a: &MetricLieAlgebra) -> Vec<Vec<Vec<f64>>> {
    let n = a.dim();
    let mut t = vec![vec![vec![0.0; n]; n]; n];
    for e in a.structure_constants() {
        t[e.i][e.j][e.k] += e.c;
        t[e.j][e.i][e.k] -= e.c;
    }
    t
}

pub fn dense_bracket(t: &[Vec<Vec<f64>>], x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    let n = x.len();
    let mut out = DVector::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let s = x[i] * y[j];
            if s == 0.0 {
                continue;
            }
            for k in 0..n {
                out[k] += s * t[i][j][k];
            }
        }
    }
    out
}

/// Largest Euclidean norm of the Jacobi sum over all ordered basis triples.
pub fn brute_force_jacobi(a: &MetricLieAlgebra) -> f64 {
    let n = a.dim();
    let t = dense_tensor(a);
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let (ei, ej, ek) = (unit(n, i), unit(n, j), unit(n, k));
                let s = dense_bracket(&t, &ei, &dense_bracket(&t, &ej, &ek))
                    + dense_bracket(&t, &ej, &dense_bracket(&t, &ek, &ei))
                    + dense_bracket(&t, &ek, &dense_bracket(&t, &ei, &ej));
                worst = worst.max(s.norm());
            }
        }
    }
    worst
}

/// `J_z` as an ambient `n×n` map (zero on the center), computed from the
/// defining relation by brute force: for an orthonormal 𝔳-basis `{u_a}`,
/// `J_z u_a = Σ_b ⟨z, [u_a, u_b]⟩ u_b`.
pub fn ambient_j(frame: &KaplanFrame<'_>, z: &DVector<f64>) -> DMatrix<f64> {
    let a = frame.algebra();
    let t = dense_tensor(a);
    let v = &frame.splitting().complement;
    let n = a.dim();
    let mut images = DMatrix::zeros(n, v.dim());
    for p in 0..v.dim() {
        for q in 0..v.dim() {
            let c = a.inner(z, &dense_bracket(&t, &v.vector(p), &v.vector(q)));
            let col = images.column(p) + v.vector(q) * c;
            images.set_column(p, &col);
        }
    }
    // Ambient map x ↦ Σ_p ⟨u_p, x⟩ J u_p.
    &images * v.basis().transpose() * a.gram()
}

/// The same map assembled from the library's `J_z` matrix.
pub fn ambient_from_library(frame: &KaplanFrame<'_>, z: &DVector<f64>) -> DMatrix<f64> {
    let v = &frame.splitting().complement;
    let j = frame.compute_j(z).unwrap().matrix;
    v.basis() * j * v.basis().transpose() * frame.algebra().gram()
}
