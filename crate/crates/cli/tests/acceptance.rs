//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use htype_core::classifier::{
    classify, find_obstruction, verify_h_type, verify_isomorphism, Classification, HTypeStatus,
    PivotRule, DERIVED_TOL, EXACT_TOL,
};
use htype_core::constructions::{
    direct_sum, from_clifford_representation, heisenberg_complex, heisenberg_real, scramble,
    CliffordGenerators,
};
use htype_core::{
    ComplexStructure, KaplanFrame, MetricLieAlgebra, StructureConstant, StructuredAlgebra,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn hc(n: usize) -> (MetricLieAlgebra, ComplexStructure) {
    heisenberg_complex(n).unwrap()
}

fn structured(n: usize) -> StructuredAlgebra {
    let (a, c) = hc(n);
    StructuredAlgebra::complex(a, c)
}

fn clifford(d: usize, m: usize) -> MetricLieAlgebra {
    from_clifford_representation(&CliffordGenerators::standard(d, m).unwrap(), None, None).unwrap()
}

/// Named fixtures for the sweeps, with their expected H-type status.
fn fixtures() -> Vec<(String, MetricLieAlgebra, bool)> {
    let mut out = Vec::new();
    for n in 1..=3 {
        out.push((format!("heisenberg-complex-{n}"), hc(n).0, true));
        out.push((
            format!("heisenberg-real-{n}"),
            heisenberg_real(n).unwrap(),
            true,
        ));
    }
    for (d, m) in [(1, 2), (1, 4), (3, 4), (3, 8), (7, 8)] {
        out.push((format!("clifford-{d}-{m}"), clifford(d, m), true));
    }
    out.push((
        "scrambled-heisenberg-complex-2".into(),
        scramble(&structured(2), 42).unwrap().algebra.algebra,
        true,
    ));
    let pair = direct_sum(&structured(1), &structured(1)).unwrap();
    out.push(("direct-sum-h3c-h3c".into(), pair.algebra.clone(), false));
    out.push((
        "scrambled-direct-sum".into(),
        scramble(&pair, 5).unwrap().algebra.algebra,
        false,
    ));
    let stretched = MetricLieAlgebra::new(
        5,
        vec![
            StructureConstant::new(0, 1, 4, 1.0),
            StructureConstant::new(2, 3, 4, 2.0),
        ],
        DMatrix::identity(5, 5),
    )
    .unwrap();
    out.push(("stretched-heisenberg-real-2".into(), stretched, false));
    out
}

fn random_central(frame: &KaplanFrame<'_>, rng: &mut ChaCha8Rng, unit: bool) -> DVector<f64> {
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

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn positive_classification() -> Check {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for n in 1..=4 {
        let (a, c) = hc(n);
        match classify(&a, Some(&c), EXACT_TOL, PivotRule::default()) {
            Ok(Classification::Isomorphism(r)) => {
                ensure(r.n == n, || format!("n = {n} recovered as {}", r.n))?;
                worst = worst.max(r.residuals.max());
            }
            other => return Err(format!("n = {n}: {other:?}")),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(worst < 1e-12, || format!("max residual {worst:e} >= 1e-12"))?;
    ensure(secs < 1.0, || format!("runtime {secs:.3} s >= 1 s"))?;
    Ok(format!(
        "n = 1..4 recovered, max residual {worst:e} (< 1e-12), {secs:.3} s (< 1 s)"
    ))
}

fn hidden_basis_round_trip() -> Check {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    let mut worst_check = 0.0_f64;
    for n in 1..=3 {
        for seed in 0..20 {
            let s = scramble(&structured(n), seed).unwrap().algebra;
            let c = s.complex.as_ref().unwrap();
            let r = match classify(&s.algebra, Some(c), DERIVED_TOL, PivotRule::default()) {
                Ok(Classification::Isomorphism(r)) => r,
                other => return Err(format!("n = {n}, seed {seed}: {other:?}")),
            };
            ensure(r.n == n, || {
                format!("n = {n}, seed {seed}: recovered {}", r.n)
            })?;
            worst = worst.max(r.residuals.max());
            let again =
                verify_isomorphism(&s.algebra, c, &r.iso_matrix).map_err(|e| e.to_string())?;
            worst_check = worst_check.max(again.max());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(worst < 1e-8, || format!("max residual {worst:e} >= 1e-8"))?;
    ensure(worst_check < 1e-8, || {
        format!("independent check {worst_check:e} >= 1e-8")
    })?;
    ensure(secs < 10.0, || format!("runtime {secs:.3} s >= 10 s"))?;
    Ok(format!(
        "60 scrambles, max residual {worst:e}, independent {worst_check:e} (< 1e-8), {secs:.3} s (< 10 s)"
    ))
}

fn center_dimension_obstruction() -> Check {
    let pair = direct_sum(&structured(1), &structured(1)).unwrap();
    let c = pair.complex.as_ref().unwrap();
    let a = &pair.algebra;
    let v = verify_h_type(a, EXACT_TOL).map_err(|e| e.to_string())?;
    ensure(v.status == HTypeStatus::NotHType, || {
        format!("verdict {}", v.status)
    })?;
    let w = find_obstruction(a, c, EXACT_TOL).map_err(|e| e.to_string())?;
    let unit = (a.norm(&w.z) - 1.0).abs().max((a.norm(&w.w) - 1.0).abs());
    let orth = w.inner.abs().max(w.complex_inner.abs());
    ensure(unit < 1e-10, || format!("unit defect {unit:e}"))?;
    ensure(orth < 1e-10, || format!("orthogonality defect {orth:e}"))?;
    ensure(w.product_norm < 1e-10, || {
        format!("|J_z J_w| = {:e}", w.product_norm)
    })?;
    Ok(format!(
        "not_h_type; |J_z J_w| = {:e}, max(|<z,w>|, |<iz,w>|) = {orth:e}, unit defect {unit:e} (< 1e-10)",
        w.product_norm
    ))
}

fn clifford_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut algebras: Vec<(String, MetricLieAlgebra)> = (1..=3)
        .map(|n| (format!("heisenberg-complex-{n}"), hc(n).0))
        .collect();
    algebras.push(("quaternionic".into(), clifford(3, 4)));
    let mut worst = 0.0_f64;
    let mut worst_square = 0.0_f64;
    for (name, a) in &algebras {
        let frame = KaplanFrame::new(a, EXACT_TOL).map_err(|e| e.to_string())?;
        let center = &frame.splitting().center;
        for p in 0..center.dim() {
            for q in 0..center.dim() {
                let d = frame
                    .clifford_defect(&center.vector(p), &center.vector(q))
                    .unwrap()
                    .value();
                ensure(d < 1e-12, || {
                    format!("{name}: pair ({p}, {q}) defect {d:e}")
                })?;
                worst = worst.max(d);
            }
        }
        for _ in 0..100 {
            let z = random_central(&frame, &mut rng, true);
            let j = frame.compute_j(&z).unwrap().matrix;
            let dim = j.nrows();
            let sq = (&j * &j + DMatrix::identity(dim, dim)).norm();
            ensure(sq < 1e-12, || format!("{name}: |J_z^2 + I| = {sq:e}"))?;
            worst_square = worst_square.max(sq);
        }
    }
    Ok(format!(
        "max basis-pair defect {worst:e}, max |J_z^2 + I| over unit z {worst_square:e} (< 1e-12)"
    ))
}

fn conjugate_linearity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = (0.0_f64, 0.0_f64);
    for n in 1..=3 {
        let (a, c) = hc(n);
        let frame = KaplanFrame::new(&a, EXACT_TOL).map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let z = random_central(&frame, &mut rng, false);
            let (dz, du) = frame
                .conjugate_linearity_defect(&c, &z)
                .map_err(|e| e.to_string())?;
            worst = (worst.0.max(dz.value()), worst.1.max(du.value()));
        }
    }
    ensure(worst.0 < 1e-12 && worst.1 < 1e-12, || {
        format!("defects {:e}, {:e}", worst.0, worst.1)
    })?;
    Ok(format!(
        "|J_iz - iJ_z| <= {:e}, |J_z i + iJ_z| <= {:e} (< 1e-12)",
        worst.0, worst.1
    ))
}

fn oracle_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0_f64;
    let all = fixtures();
    for (name, a, _) in &all {
        let frame = KaplanFrame::new(a, EXACT_TOL).map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let z = random_central(&frame, &mut rng, false);
            let j = frame.compute_j(&z).unwrap().matrix;
            // Column a of J holds J u_a, so its (b, a) entry is B_ab.
            let b = frame.j_bilinear_form(&z).unwrap();
            let d = (j.transpose() - b).norm();
            ensure(d < 1e-10, || format!("{name}: discrepancy {d:e}"))?;
            worst = worst.max(d);
        }
    }
    Ok(format!(
        "{} fixtures x 100 central z, max discrepancy {worst:e} (< 1e-10)",
        all.len()
    ))
}

fn sphere_sampling() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let tol = EXACT_TOL;
    let all = fixtures();
    for (name, a, expected) in &all {
        let frame = KaplanFrame::new(a, tol).map_err(|e| e.to_string())?;
        let polarized_pass = frame.polarized_isometry_defect().unwrap().value() <= tol;
        let mut sampled_pass = true;
        for _ in 0..1000 {
            let z = random_central(&frame, &mut rng, true);
            if frame.isometry_defect(&z).unwrap().value() > tol {
                sampled_pass = false;
            }
        }
        ensure(polarized_pass == sampled_pass, || {
            format!("{name}: polarized {polarized_pass}, sampled {sampled_pass}")
        })?;
        ensure(polarized_pass == *expected, || {
            format!("{name}: expected {expected}, got {polarized_pass}")
        })?;
    }
    Ok(format!(
        "{} fixtures x 1000 unit z, no disagreements",
        all.len()
    ))
}

fn remark_correspondence() -> Check {
    let mut worst_defect = 0.0_f64;
    let mut worst_rebuild = 0.0_f64;
    for (d, m) in [(1, 2), (1, 4), (3, 4)] {
        let a = clifford(d, m);
        let v = verify_h_type(&a, EXACT_TOL).map_err(|e| e.to_string())?;
        ensure(v.status == HTypeStatus::HType, || {
            format!("({d}, {m}): {}", v.status)
        })?;
        worst_defect = worst_defect
            .max(v.bracket_containment_defect)
            .max(v.polarized_isometry_defect);
        let frame = KaplanFrame::new(&a, EXACT_TOL).map_err(|e| e.to_string())?;
        let basis = frame.splitting().complement.basis().clone();
        let gens: Vec<DMatrix<f64>> = (0..d)
            .map(|k| {
                let z = DVector::from_fn(m + d, |r, _| if r == m + k { 1.0 } else { 0.0 });
                let j = frame.compute_j(&z).unwrap().matrix;
                (&basis * j * basis.transpose())
                    .view((0, 0), (m, m))
                    .into_owned()
            })
            .collect();
        let gens = CliffordGenerators::new(gens, 1e-12).map_err(|e| e.to_string())?;
        let rebuilt = from_clifford_representation(&gens, None, None).map_err(|e| e.to_string())?;
        let n = m + d;
        for i in 0..n {
            for j in (i + 1)..n {
                let ei = DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 });
                let ej = DVector::from_fn(n, |r, _| if r == j { 1.0 } else { 0.0 });
                let diff =
                    (a.bracket(&ei, &ej).unwrap() - rebuilt.bracket(&ei, &ej).unwrap()).amax();
                worst_rebuild = worst_rebuild.max(diff);
            }
        }
    }
    ensure(worst_defect < 1e-12, || {
        format!("verifier defect {worst_defect:e}")
    })?;
    ensure(worst_rebuild < 1e-12, || {
        format!("rebuilt constants differ by {worst_rebuild:e}")
    })?;
    Ok(format!(
        "d=1 (m=2,4), d=3 (m=4): defects <= {worst_defect:e}, rebuilt constants within {worst_rebuild:e} (< 1e-12)"
    ))
}

fn htype(dir: &Path, args: &[&str]) -> Result<(i32, String), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_htype"))
        .args(args)
        .current_dir(dir)
        .env_remove("HTYPE_TOL")
        .output()
        .map_err(|e| e.to_string())?;
    Ok((
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
    ))
}

fn expect_exit(dir: &Path, args: &[&str], code: i32) -> Result<String, String> {
    let (got, stdout) = htype(dir, args)?;
    ensure(got == code, || {
        format!("`htype {}` exited {got}, expected {code}", args.join(" "))
    })?;
    Ok(stdout)
}

fn cli_contract() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    expect_exit(
        d,
        &[
            "generate",
            "heisenberg-complex",
            "--n",
            "2",
            "-o",
            "h5.json",
        ],
        0,
    )?;
    let first = expect_exit(d, &["classify", "h5.json", "--json", "-o", "cert.json"], 0)?;
    let second = expect_exit(d, &["classify", "h5.json", "--json"], 0)?;
    ensure(first == second, || {
        "classify --json output differs between runs".into()
    })?;
    let cert: serde_json::Value = serde_json::from_str(&first).map_err(|e| e.to_string())?;
    ensure(
        cert["kind"] == "classification" && cert["payload"]["n"] == 2,
        || format!("unexpected certificate {}", cert["kind"]),
    )?;
    let saved = std::fs::read_to_string(d.join("cert.json")).map_err(|e| e.to_string())?;
    ensure(saved == first, || {
        "certificate file differs from --json output".into()
    })?;
    expect_exit(d, &["check-certificate", "h5.json", "cert.json"], 0)?;

    expect_exit(
        d,
        &[
            "generate",
            "heisenberg-complex",
            "--n",
            "1",
            "-o",
            "h3.json",
        ],
        0,
    )?;
    expect_exit(
        d,
        &[
            "generate",
            "direct-sum",
            "h3.json",
            "h3.json",
            "-o",
            "pair.json",
        ],
        0,
    )?;
    let verdict = expect_exit(d, &["verify", "pair.json", "--json"], 1)?;
    ensure(verdict.contains("\"status\": \"not_h_type\""), || {
        "verdict is not not_h_type".into()
    })?;
    expect_exit(d, &["classify", "pair.json"], 1)?;
    Ok("generate -> classify -> check-certificate exits 0 with byte-stable --json; direct-sum exits 1".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("positive classification", positive_classification),
        ("round trip under hidden basis", hidden_basis_round_trip),
        ("center-dimension obstruction", center_dimension_obstruction),
        ("Clifford identity", clifford_identity),
        ("conjugate linearity", conjugate_linearity),
        ("oracle equivalence", oracle_equivalence),
        ("sphere sampling vs polarization", sphere_sampling),
        ("Clifford module correspondence", remark_correspondence),
        ("CLI contract", cli_contract),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("[PASS] {} {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("[FAIL] {} {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
