//! `htype`: generate, verify, classify and scramble H-type algebras.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use htype_core::classifier::{
    classify, verify_h_type, verify_isomorphism, Classification, HTypeStatus, HTypeVerdict,
    ObstructionWitness, PivotRule, DERIVED_TOL, EXACT_TOL, MAX_CONDITION,
};
use htype_core::constructions::{
    direct_sum, from_clifford_representation, heisenberg_complex, heisenberg_real, scramble,
    CliffordGenerators,
};
use htype_core::io::{
    load_algebra, load_certificate, save_algebra, save_certificate, CertificateDocument,
    CertificatePayload, LoadedAlgebra, VerdictPayload,
};
use htype_core::{KaplanFrame, StructuredAlgebra};
use nalgebra::DVector;

const EXIT_PASS: u8 = 0;
const EXIT_NEGATIVE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "htype",
    version,
    about = "Construct, verify and classify H-type metric Lie algebras"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a standard fixture to a file.
    Generate {
        #[command(subcommand)]
        family: Family,
    },
    /// Check the H-type conditions.
    Verify {
        path: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Classify a complex H-type algebra or exhibit an obstruction.
    Classify {
        path: PathBuf,
        #[command(flatten)]
        common: Common,
        /// largest-projection, first-coordinate or random:SEED
        #[arg(long, default_value = "largest-projection")]
        pivot: PivotRule,
        /// Write the certificate here.
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Apply a seeded random isometric change of basis.
    Scramble {
        path: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Re-check a certificate against an algebra.
    CheckCertificate {
        algebra: PathBuf,
        certificate: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    tol: Option<f64>,
    /// Print a certificate document as JSON.
    #[arg(long)]
    json: bool,
    /// Skip Jacobi, metric and complex-structure validation on load.
    #[arg(long)]
    no_validate: bool,
}

#[derive(Subcommand)]
enum Family {
    HeisenbergComplex {
        #[arg(long)]
        n: usize,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    HeisenbergReal {
        #[arg(long)]
        n: usize,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    Clifford {
        #[arg(long)]
        center_dim: usize,
        #[arg(long)]
        module_dim: usize,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    DirectSum {
        a: PathBuf,
        b: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<u8, Failure>;

fn env_tol() -> Result<Option<f64>, Failure> {
    match std::env::var("HTYPE_TOL") {
        Ok(s) => s
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|t| t.is_finite() && *t > 0.0)
            .map(Some)
            .ok_or_else(|| Failure(format!("HTYPE_TOL is not a positive decimal: {s:?}"))),
        Err(_) => Ok(None),
    }
}

/// Flag, then environment, then a default chosen by the file's provenance.
fn resolve_tol(
    flag: Option<f64>,
    metadata: Option<&BTreeMap<String, String>>,
) -> Result<f64, Failure> {
    if let Some(t) = flag {
        if !(t.is_finite() && t > 0.0) {
            return Err(Failure(format!("--tol must be positive, got {t}")));
        }
        return Ok(t);
    }
    if let Some(t) = env_tol()? {
        return Ok(t);
    }
    let derived = metadata
        .and_then(|m| m.get("provenance"))
        .is_some_and(|p| p == "scramble");
    Ok(if derived { DERIVED_TOL } else { EXACT_TOL })
}

/// Loads without validation, resolves the tolerance, then validates.
fn load(path: &Path, flag: Option<f64>, validate: bool) -> Result<(LoadedAlgebra, f64), Failure> {
    let raw = load_algebra(path, None)?;
    let tol = resolve_tol(flag, Some(&raw.metadata))?;
    let loaded = if validate {
        load_algebra(path, Some(tol))?
    } else {
        raw
    };
    Ok((loaded, tol))
}

fn metadata(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

fn generate(family: Family) -> Outcome {
    let (structured, meta, output) = match family {
        Family::HeisenbergComplex { n, output } => {
            let (a, c) = heisenberg_complex(n)?;
            (
                StructuredAlgebra::complex(a, c),
                metadata(&[
                    ("name", format!("heisenberg-complex-{n}")),
                    ("provenance", "generate".into()),
                ]),
                output,
            )
        }
        Family::HeisenbergReal { n, output } => (
            StructuredAlgebra::real(heisenberg_real(n)?),
            metadata(&[
                ("name", format!("heisenberg-real-{n}")),
                ("provenance", "generate".into()),
            ]),
            output,
        ),
        Family::Clifford {
            center_dim,
            module_dim,
            output,
        } => {
            let gens = CliffordGenerators::standard(center_dim, module_dim)?;
            (
                StructuredAlgebra::real(from_clifford_representation(&gens, None, None)?),
                metadata(&[
                    ("name", format!("clifford-{center_dim}-{module_dim}")),
                    ("provenance", "generate".into()),
                ]),
                output,
            )
        }
        Family::DirectSum { a, b, output } => {
            let (la, _) = load(&a, None, true)?;
            let (lb, _) = load(&b, None, true)?;
            let name = |l: &LoadedAlgebra, p: &Path| {
                l.metadata.get("name").cloned().unwrap_or_else(|| {
                    p.file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_default()
                })
            };
            let sum = direct_sum(
                &StructuredAlgebra {
                    algebra: la.algebra.clone(),
                    complex: la.complex.clone(),
                },
                &StructuredAlgebra {
                    algebra: lb.algebra.clone(),
                    complex: lb.complex.clone(),
                },
            )?;
            (
                sum,
                metadata(&[
                    ("name", format!("{}+{}", name(&la, &a), name(&lb, &b))),
                    ("provenance", "direct-sum".into()),
                ]),
                output,
            )
        }
    };
    save_algebra(
        &structured.algebra,
        structured.complex.as_ref(),
        &meta,
        &output,
    )?;
    println!(
        "wrote {} (dim {})",
        output.display(),
        structured.algebra.dim()
    );
    Ok(EXIT_PASS)
}

fn status_exit(status: HTypeStatus) -> u8 {
    match status {
        HTypeStatus::HType => EXIT_PASS,
        HTypeStatus::NotHType | HTypeStatus::Degenerate => EXIT_NEGATIVE,
    }
}

fn print_verdict(v: &HTypeVerdict) {
    println!("status: {}", v.status);
    println!("center dimension: {}", v.center_dim);
    println!("complement dimension: {}", v.complement_dim);
    println!(
        "bracket containment defect: {:e}",
        v.bracket_containment_defect
    );
    println!(
        "polarized isometry defect: {:e}",
        v.polarized_isometry_defect
    );
    println!("tolerance: {:e}", v.tolerance_used);
}

fn print_witness(w: &ObstructionWitness) {
    println!("obstruction kind: {}", w.kind);
    println!("|J_z J_w|: {:e}", w.product_norm);
    println!("<z,w>: {:e}", w.inner);
    println!("<iz,w>: {:e}", w.complex_inner);
    if let Some(d) = w.isometry_defect {
        println!("isometry defect: {d:e}");
    }
}

fn verify(path: &Path, common: &Common) -> Outcome {
    let (loaded, tol) = load(path, common.tol, !common.no_validate)?;
    let verdict = verify_h_type(&loaded.algebra, tol)?;
    if common.json {
        let cert = CertificateDocument::new(
            CertificatePayload::Verdict(VerdictPayload::from_verdict(&verdict)),
            tol,
        );
        print!("{}", cert.to_json());
    } else {
        print_verdict(&verdict);
    }
    Ok(status_exit(verdict.status))
}

fn run_classify(path: &Path, common: &Common, pivot: PivotRule, output: Option<&Path>) -> Outcome {
    let (loaded, tol) = load(path, common.tol, !common.no_validate)?;
    let result = classify(&loaded.algebra, loaded.complex.as_ref(), tol, pivot)?;
    let cert = CertificateDocument::from_classification(&result, tol);
    if let Some(out) = output {
        save_certificate(&cert, out)?;
    }
    if common.json {
        print!("{}", cert.to_json());
    }
    let code = match &result {
        Classification::Isomorphism(r) => {
            if !common.json {
                println!("isometrically isomorphic to heisenberg-complex-{}", r.n);
                println!("pivot rule: {}", r.pivot_rule);
                println!("bracket residual: {:e}", r.residuals.bracket);
                println!("metric residual: {:e}", r.residuals.metric);
                println!("complex residual: {:e}", r.residuals.complex);
                println!("condition number: {:e}", r.condition_number);
            }
            EXIT_PASS
        }
        Classification::Obstruction { verdict, witness } => {
            if !common.json {
                println!(
                    "inconsistency: verifier accepted but the center has complex dimension >= 2"
                );
                print_verdict(verdict);
                print_witness(witness);
            }
            EXIT_NEGATIVE
        }
        Classification::Verdict {
            verdict,
            diagnostic,
            refusal,
        } => {
            if !common.json {
                print_verdict(verdict);
                if let Some(w) = diagnostic {
                    print_witness(w);
                }
                if let Some(r) = refusal {
                    println!("classification refused: {r}");
                }
            }
            status_exit(verdict.status)
        }
    };
    Ok(code)
}

fn run_scramble(path: &Path, seed: u64, output: &Path) -> Outcome {
    let (loaded, _) = load(path, None, true)?;
    let input = StructuredAlgebra {
        algebra: loaded.algebra,
        complex: loaded.complex,
    };
    let scrambled = scramble(&input, seed)?;
    let mut meta = loaded.metadata;
    meta.insert("provenance".into(), "scramble".into());
    meta.insert("seed".into(), seed.to_string());
    save_algebra(
        &scrambled.algebra.algebra,
        scrambled.algebra.complex.as_ref(),
        &meta,
        output,
    )?;
    println!("wrote {} (seed {seed})", output.display());
    Ok(EXIT_PASS)
}

fn report(name: &str, recomputed: f64, attached: f64, tol: f64) -> bool {
    let ok = recomputed <= tol;
    println!(
        "{name}: recomputed {recomputed:e}, certificate {attached:e} [{}]",
        if ok { "ok" } else { "FAIL" }
    );
    ok
}

fn check_certificate(algebra: &Path, certificate: &Path, flag: Option<f64>) -> Outcome {
    let cert = load_certificate(certificate)?;
    let tol = match flag {
        Some(_) => resolve_tol(flag, None)?,
        None => env_tol()?.unwrap_or(cert.tolerance_used),
    };
    let (loaded, _) = load(algebra, Some(tol), true)?;
    println!("certificate kind: {}", cert.kind());
    let ok = match &cert.body {
        CertificatePayload::Classification(p) => {
            let complex = loaded
                .complex
                .as_ref()
                .ok_or_else(|| Failure("algebra has no complex structure".into()))?;
            let iso = p.iso_matrix()?;
            let r = verify_isomorphism(&loaded.algebra, complex, &iso)?;
            let cond = htype_core::linalg::condition_number(&iso);
            let mut ok = report("bracket residual", r.bracket, p.residuals.bracket, tol);
            ok &= report("metric residual", r.metric, p.residuals.metric, tol);
            ok &= report("complex residual", r.complex, p.residuals.complex, tol);
            let cond_ok = cond < MAX_CONDITION;
            println!(
                "condition number: {cond:e} [{}]",
                if cond_ok { "ok" } else { "FAIL" }
            );
            ok && cond_ok
        }
        CertificatePayload::Obstruction { witness, .. } => {
            let complex = loaded
                .complex
                .as_ref()
                .ok_or_else(|| Failure("algebra has no complex structure".into()))?;
            let frame = KaplanFrame::new(&loaded.algebra, tol)?;
            let z = DVector::from_vec(witness.z.clone());
            let w = DVector::from_vec(witness.w.clone());
            let again = ObstructionWitness::for_pair(&frame, complex, &z, &w)?;
            let mut ok = report("|J_z J_w|", again.product_norm, witness.product_norm, tol);
            ok &= report("|<z,w>|", again.inner.abs(), witness.inner.abs(), tol);
            ok &= report(
                "|<iz,w>|",
                again.complex_inner.abs(),
                witness.complex_inner.abs(),
                tol,
            );
            let unit = (loaded.algebra.norm(&z) - 1.0)
                .abs()
                .max((loaded.algebra.norm(&w) - 1.0).abs());
            ok &= report("unit defect", unit, 0.0, tol);
            ok
        }
        CertificatePayload::Verdict(p) => {
            let v = verify_h_type(&loaded.algebra, tol)?;
            println!("status: recomputed {}, certificate {}", v.status, p.status);
            v.status == p.status
        }
    };
    println!(
        "{}",
        if ok {
            "certificate accepted"
        } else {
            "certificate rejected"
        }
    );
    Ok(if ok { EXIT_PASS } else { EXIT_NEGATIVE })
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Generate { family } => generate(family),
        Command::Verify { path, common } => verify(&path, &common),
        Command::Classify {
            path,
            common,
            pivot,
            output,
        } => run_classify(&path, &common, pivot, output.as_deref()),
        Command::Scramble { path, seed, output } => run_scramble(&path, seed, &output),
        Command::CheckCertificate {
            algebra,
            certificate,
            tol,
        } => check_certificate(&algebra, &certificate, tol),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
