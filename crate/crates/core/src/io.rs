//! JSON documents for algebras and classification certificates.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{
    Classification, ClassificationResult, HTypeStatus, HTypeVerdict, ObstructionKind,
    ObstructionWitness, Residuals, VerdictWitness,
};
use crate::error::Error;
use crate::lie::{
    validate_algebra, validate_complex_structure, ComplexStructure, MetricLieAlgebra,
    StructureConstant,
};

pub const ALGEBRA_FORMAT: &str = "htype-algebra/v1";
pub const CERTIFICATE_FORMAT: &str = "htype-certificate/v1";
pub const TOOL_VERSION: &str = concat!("htype ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Algebra(#[from] Error),
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        IoError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

pub type IoResult<T> = std::result::Result<T, IoError>;

fn to_row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

fn from_row_major(dim: usize, data: &[f64], what: &str) -> IoResult<DMatrix<f64>> {
    if data.len() != dim * dim {
        return Err(IoError::Format(format!(
            "{what} has {} entries, expected {}",
            data.len(),
            dim * dim
        )));
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(IoError::Format(format!("{what} has a non-finite entry")));
    }
    Ok(DMatrix::from_row_slice(dim, dim, data))
}

fn to_vec(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

/// On-disk algebra: sparse structure constants plus dense metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraDocument {
    pub format_tag: String,
    pub dim: usize,
    pub structure_constants: Vec<StructureConstant>,
    pub gram: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub complex_structure: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

/// An algebra as loaded from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedAlgebra {
    pub algebra: MetricLieAlgebra,
    pub complex: Option<ComplexStructure>,
    pub metadata: BTreeMap<String, String>,
}

impl AlgebraDocument {
    pub fn new(
        algebra: &MetricLieAlgebra,
        complex: Option<&ComplexStructure>,
        metadata: BTreeMap<String, String>,
    ) -> Self {
        Self {
            format_tag: ALGEBRA_FORMAT.to_string(),
            dim: algebra.dim(),
            structure_constants: algebra.structure_constants().to_vec(),
            gram: to_row_major(algebra.gram()),
            complex_structure: complex.map(|c| to_row_major(c.matrix())),
            metadata,
        }
    }

    pub fn from_json(text: &str) -> IoResult<Self> {
        let doc: Self = serde_json::from_str(text)?;
        if doc.format_tag != ALGEBRA_FORMAT {
            return Err(IoError::Format(format!(
                "unexpected format_tag {:?}, expected {ALGEBRA_FORMAT:?}",
                doc.format_tag
            )));
        }
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("algebra documents serialize");
        s.push('\n');
        s
    }

    /// Builds the typed algebra. With `validate_tol`, Jacobi, metric and
    /// complex-structure defects above the tolerance are rejected.
    pub fn into_algebra(self, validate_tol: Option<f64>) -> IoResult<LoadedAlgebra> {
        let gram = from_row_major(self.dim, &self.gram, "gram")?;
        let algebra = MetricLieAlgebra::new(self.dim, self.structure_constants, gram)?;
        let complex = self
            .complex_structure
            .map(|c| {
                from_row_major(self.dim, &c, "complex_structure")
                    .and_then(|m| Ok(ComplexStructure::new(m)?))
            })
            .transpose()?;
        if let Some(tol) = validate_tol {
            let defects = validate_algebra(&algebra, tol);
            if !defects.is_empty() {
                return Err(Error::Validation(defects).into());
            }
            if let Some(c) = &complex {
                let defects = validate_complex_structure(&algebra, c, tol)?;
                if !defects.is_empty() {
                    return Err(Error::Validation(defects).into());
                }
            }
        }
        Ok(LoadedAlgebra {
            algebra,
            complex,
            metadata: self.metadata,
        })
    }
}

/// Reads an algebra file; `validate_tol = None` skips defect validation.
pub fn load_algebra(path: &Path, validate_tol: Option<f64>) -> IoResult<LoadedAlgebra> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.into(),
        source,
    })?;
    AlgebraDocument::from_json(&text)?.into_algebra(validate_tol)
}

pub fn save_algebra(
    algebra: &MetricLieAlgebra,
    complex: Option<&ComplexStructure>,
    metadata: &BTreeMap<String, String>,
    path: &Path,
) -> IoResult<()> {
    let doc = AlgebraDocument::new(algebra, complex, metadata.clone());
    fs::write(path, doc.to_json()).map_err(|source| IoError::Write {
        path: path.into(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationPayload {
    pub n: usize,
    pub pivot_rule: String,
    /// Basis vectors `(x_1, ix_1, y_1, iy_1, …, z, iz)` in input coordinates.
    pub standard_basis: Vec<Vec<f64>>,
    /// Row-major change of basis onto standard coordinates.
    pub iso_matrix: Vec<f64>,
    pub residuals: Residuals,
    pub condition_number: f64,
    pub step_orthonormality: Vec<f64>,
}

impl ClassificationPayload {
    pub fn from_result(r: &ClassificationResult) -> Self {
        Self {
            n: r.n,
            pivot_rule: r.pivot_rule.to_string(),
            standard_basis: r
                .standard_basis
                .column_iter()
                .map(|c| c.iter().copied().collect())
                .collect(),
            iso_matrix: to_row_major(&r.iso_matrix),
            residuals: r.residuals,
            condition_number: r.condition_number,
            step_orthonormality: r.step_orthonormality.clone(),
        }
    }

    pub fn iso_matrix(&self) -> IoResult<DMatrix<f64>> {
        from_row_major(4 * self.n + 2, &self.iso_matrix, "iso_matrix")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstructionPayload {
    pub z: Vec<f64>,
    pub w: Vec<f64>,
    pub product_norm: f64,
    pub reverse_product_norm: f64,
    pub inner: f64,
    pub complex_inner: f64,
    pub kind: ObstructionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isometry_defect: Option<f64>,
}

impl ObstructionPayload {
    pub fn from_witness(w: &ObstructionWitness) -> Self {
        Self {
            z: to_vec(&w.z),
            w: to_vec(&w.w),
            product_norm: w.product_norm,
            reverse_product_norm: w.reverse_product_norm,
            inner: w.inner,
            complex_inner: w.complex_inner,
            kind: w.kind,
            isometry_defect: w.isometry_defect,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WitnessPayload {
    Containment {
        u: Vec<f64>,
        v: Vec<f64>,
        component_norm: f64,
    },
    Isometry {
        z: Vec<f64>,
        defect: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictPayload {
    pub status: HTypeStatus,
    pub bracket_containment_defect: f64,
    pub polarized_isometry_defect: f64,
    pub center_dim: usize,
    pub complement_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessPayload>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obstruction: Option<ObstructionPayload>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refusal: Option<String>,
}

impl VerdictPayload {
    pub fn from_verdict(v: &HTypeVerdict) -> Self {
        Self {
            status: v.status,
            bracket_containment_defect: v.bracket_containment_defect,
            polarized_isometry_defect: v.polarized_isometry_defect,
            center_dim: v.center_dim,
            complement_dim: v.complement_dim,
            witness: v.witness.as_ref().map(|w| match w {
                VerdictWitness::Containment {
                    u,
                    v,
                    component_norm,
                } => WitnessPayload::Containment {
                    u: to_vec(u),
                    v: to_vec(v),
                    component_norm: *component_norm,
                },
                VerdictWitness::Isometry { z, defect } => WitnessPayload::Isometry {
                    z: to_vec(z),
                    defect: *defect,
                },
            }),
            obstruction: None,
            refusal: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum CertificatePayload {
    Classification(ClassificationPayload),
    /// Verifier accepted but the center is too large; carries the verdict too.
    Obstruction {
        witness: ObstructionPayload,
        verdict: VerdictPayload,
    },
    Verdict(VerdictPayload),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateDocument {
    pub format_tag: String,
    #[serde(flatten)]
    pub body: CertificatePayload,
    pub tolerance_used: f64,
    pub tool_version: String,
}

impl CertificateDocument {
    pub fn new(body: CertificatePayload, tolerance_used: f64) -> Self {
        Self {
            format_tag: CERTIFICATE_FORMAT.to_string(),
            body,
            tolerance_used,
            tool_version: TOOL_VERSION.to_string(),
        }
    }

    pub fn from_classification(c: &Classification, tol: f64) -> Self {
        let body = match c {
            Classification::Isomorphism(r) => {
                CertificatePayload::Classification(ClassificationPayload::from_result(r))
            }
            Classification::Obstruction { verdict, witness } => CertificatePayload::Obstruction {
                witness: ObstructionPayload::from_witness(witness),
                verdict: VerdictPayload::from_verdict(verdict),
            },
            Classification::Verdict {
                verdict,
                diagnostic,
                refusal,
            } => {
                let mut p = VerdictPayload::from_verdict(verdict);
                p.obstruction = diagnostic.as_ref().map(ObstructionPayload::from_witness);
                p.refusal = refusal.clone();
                CertificatePayload::Verdict(p)
            }
        };
        Self::new(body, tol)
    }

    pub fn kind(&self) -> &'static str {
        match self.body {
            CertificatePayload::Classification(_) => "classification",
            CertificatePayload::Obstruction { .. } => "obstruction",
            CertificatePayload::Verdict(_) => "verdict",
        }
    }

    pub fn from_json(text: &str) -> IoResult<Self> {
        let doc: Self = serde_json::from_str(text)?;
        if doc.format_tag != CERTIFICATE_FORMAT {
            return Err(IoError::Format(format!(
                "unexpected format_tag {:?}, expected {CERTIFICATE_FORMAT:?}",
                doc.format_tag
            )));
        }
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("certificates serialize");
        s.push('\n');
        s
    }
}

pub fn load_certificate(path: &Path) -> IoResult<CertificateDocument> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.into(),
        source,
    })?;
    CertificateDocument::from_json(&text)
}

pub fn save_certificate(cert: &CertificateDocument, path: &Path) -> IoResult<()> {
    fs::write(path, cert.to_json()).map_err(|source| IoError::Write {
        path: path.into(),
        source,
    })
}
