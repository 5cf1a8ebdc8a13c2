//! Witness files: measurements (basis vectors for projective settings, full
//! matrices otherwise), a sparse coefficient list and the provenance block,
//! all complex numbers as `[re, im]` pairs.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Coefficient, Family, Provenance, WitnessSpec};
use crate::error::{Error, Result};
use crate::qlinalg::HwCoefficients;
use crate::states::{
    matrix_from_json, matrix_to_json, vector_from_json, vector_to_json, JsonComplex, JsonMatrix,
    Ket, Povm,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementFile {
    pub labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<JsonComplex>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elements: Option<Vec<JsonMatrix>>,
}

impl From<&Povm> for MeasurementFile {
    fn from(p: &Povm) -> Self {
        MeasurementFile {
            labels: p.labels().to_vec(),
            basis: p
                .basis()
                .map(|b| b.iter().map(|v| vector_to_json(v)).collect()),
            elements: match p.basis() {
                Some(_) => None,
                None => Some(p.elements().iter().map(matrix_to_json).collect()),
            },
        }
    }
}

impl TryFrom<MeasurementFile> for Povm {
    type Error = Error;

    fn try_from(m: MeasurementFile) -> Result<Self> {
        match (m.basis, m.elements) {
            (Some(b), None) => {
                Povm::from_basis(b.iter().map(|v| vector_from_json(v)).collect(), m.labels)
            }
            (None, Some(e)) => Povm::new(
                e.iter().map(matrix_from_json).collect::<Result<_>>()?,
                m.labels,
            ),
            _ => Err(Error::Parse(
                "measurement needs exactly one of \"basis\" or \"elements\"".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "UPPERCASE", deny_unknown_fields)]
pub enum ProvenanceFile {
    Npt {
        u: JsonMatrix,
        v: JsonMatrix,
        alpha: Vec<f64>,
        eta: Ket,
        min_eigenvalue: f64,
    },
    Ccn {
        u_prime: JsonMatrix,
        v_prime: JsonMatrix,
    },
    Universal {
        w: JsonMatrix,
        lambda: Vec<JsonComplex>,
        generators: Vec<(usize, usize)>,
        gamma_residual: f64,
        reality_residue: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessFile {
    pub family: Family,
    pub d: usize,
    pub sohs_bound: f64,
    pub bob_outcomes: usize,
    pub marginal: f64,
    pub alice_measurements: Vec<MeasurementFile>,
    pub coefficients: Vec<Coefficient>,
    pub provenance: ProvenanceFile,
}

impl From<&WitnessSpec> for WitnessFile {
    fn from(spec: &WitnessSpec) -> Self {
        let alice_measurements = spec.alice().iter().map(MeasurementFile::from).collect();
        let provenance = match spec.provenance() {
            Provenance::Npt {
                u,
                v,
                alpha,
                eta,
                min_eigenvalue,
            } => ProvenanceFile::Npt {
                u: matrix_to_json(u),
                v: matrix_to_json(v),
                alpha: alpha.clone(),
                eta: eta.clone(),
                min_eigenvalue: *min_eigenvalue,
            },
            Provenance::Ccn { u_prime, v_prime } => ProvenanceFile::Ccn {
                u_prime: matrix_to_json(u_prime),
                v_prime: matrix_to_json(v_prime),
            },
            Provenance::Universal {
                w,
                lambda,
                generators,
                gamma_residual,
                reality_residue,
            } => ProvenanceFile::Universal {
                w: matrix_to_json(w),
                lambda: vector_to_json(&lambda.table),
                generators: generators.clone(),
                gamma_residual: *gamma_residual,
                reality_residue: *reality_residue,
            },
        };
        WitnessFile {
            family: spec.family(),
            d: spec.d(),
            sohs_bound: spec.sohs_bound(),
            bob_outcomes: spec.bob_outcomes(),
            marginal: spec.marginal(),
            alice_measurements,
            coefficients: spec.sparse_coefficients(),
            provenance,
        }
    }
}

impl TryFrom<WitnessFile> for WitnessSpec {
    type Error = Error;

    fn try_from(file: WitnessFile) -> Result<Self> {
        let mut alice = Vec::with_capacity(file.alice_measurements.len());
        for m in file.alice_measurements {
            alice.push(Povm::try_from(m)?);
        }
        let mut table: Vec<Vec<Vec<f64>>> = alice
            .iter()
            .map(|p| vec![vec![0.0; file.bob_outcomes]; p.len()])
            .collect();
        for c in &file.coefficients {
            let slot = table
                .get_mut(c.x)
                .and_then(|t| t.get_mut(c.a))
                .and_then(|t| t.get_mut(c.b))
                .ok_or_else(|| {
                    Error::ShapeMismatch(format!(
                        "coefficient index ({}, {}, {}) out of range",
                        c.x, c.a, c.b
                    ))
                })?;
            *slot = c.c;
        }
        let provenance = match file.provenance {
            ProvenanceFile::Npt {
                u,
                v,
                alpha,
                eta,
                min_eigenvalue,
            } => Provenance::Npt {
                u: matrix_from_json(&u)?,
                v: matrix_from_json(&v)?,
                alpha,
                eta,
                min_eigenvalue,
            },
            ProvenanceFile::Ccn { u_prime, v_prime } => Provenance::Ccn {
                u_prime: matrix_from_json(&u_prime)?,
                v_prime: matrix_from_json(&v_prime)?,
            },
            ProvenanceFile::Universal {
                w,
                lambda,
                generators,
                gamma_residual,
                reality_residue,
            } => {
                let w = matrix_from_json(&w)?;
                Provenance::Universal {
                    lambda: HwCoefficients {
                        d: w.rows(),
                        table: vector_from_json(&lambda),
                    },
                    w,
                    generators,
                    gamma_residual,
                    reality_residue,
                }
            }
        };
        let matches = matches!(
            (&provenance, file.family),
            (Provenance::Npt { .. }, Family::Npt)
                | (Provenance::Ccn { .. }, Family::Ccn)
                | (Provenance::Universal { .. }, Family::Universal)
        );
        if !matches {
            return Err(Error::FamilyMismatch(format!(
                "{} witness with provenance of another family",
                file.family
            )));
        }
        WitnessSpec::new(
            file.family,
            file.d,
            alice,
            file.bob_outcomes,
            table,
            file.marginal,
            file.sohs_bound,
            provenance,
        )
    }
}

pub fn save_witness(spec: &WitnessSpec, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string(&WitnessFile::from(spec))?;
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn load_witness(path: impl AsRef<Path>) -> Result<WitnessSpec> {
    let path = path.as_ref();
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let file: WitnessFile = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    WitnessSpec::try_from(file)
}
