//! JSON state files: `{"dims":[dA,dB],"matrix":[[[re,im],...],...]}` for
//! density matrices and `{"dims":[dA,dB],"vector":[[re,im],...]}` for kets.
//! Doubles are written in shortest round-trip form, so save/load is lossless.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DensityMatrix, Ket};
use crate::error::{Error, Result};
use crate::qlinalg::{CMatrix, C64};

pub type JsonComplex = [f64; 2];
pub type JsonMatrix = Vec<Vec<JsonComplex>>;

pub fn matrix_to_json(m: &CMatrix) -> JsonMatrix {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

pub fn matrix_from_json(rows: &JsonMatrix) -> Result<CMatrix> {
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Parse("ragged matrix rows".into()));
    }
    let data = rows
        .iter()
        .flat_map(|r| r.iter().map(|&[re, im]| C64::new(re, im)))
        .collect();
    CMatrix::from_vec(n, cols, data)
}

pub fn vector_to_json(v: &[C64]) -> Vec<JsonComplex> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn vector_from_json(v: &[JsonComplex]) -> Vec<C64> {
    v.iter().map(|&[re, im]| C64::new(re, im)).collect()
}

/// On-disk operator or state. Exactly one of `matrix` / `vector` is present.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorFile {
    pub dims: [usize; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<JsonComplex>>,
}

fn read_file(path: &Path) -> Result<OperatorFile> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Loads and validates a density matrix; ket files become pure states.
pub fn load_state(path: impl AsRef<Path>) -> Result<DensityMatrix> {
    let file = read_file(path.as_ref())?;
    let dims = (file.dims[0], file.dims[1]);
    match (&file.matrix, &file.vector) {
        (Some(m), None) => DensityMatrix::new(matrix_from_json(m)?, dims),
        (None, Some(v)) => Ok(Ket::new(vector_from_json(v), dims)?.density()),
        _ => Err(Error::Parse(
            "state file needs exactly one of \"matrix\" or \"vector\"".into(),
        )),
    }
}

/// Loads an arbitrary square operator (witness, unitary) without state checks.
pub fn load_operator(path: impl AsRef<Path>) -> Result<(CMatrix, (usize, usize))> {
    let file = read_file(path.as_ref())?;
    let dims = (file.dims[0], file.dims[1]);
    let Some(m) = &file.matrix else {
        return Err(Error::Parse(
            "operator file needs a \"matrix\" field".into(),
        ));
    };
    let m = matrix_from_json(m)?;
    if !m.is_square() || m.rows() != dims.0 * dims.1 {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator with dims {:?}",
            m.rows(),
            m.cols(),
            dims
        )));
    }
    Ok((m, dims))
}

fn write_file(file: &OperatorFile, path: &Path) -> Result<()> {
    let text = serde_json::to_string(file)?;
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn save_state(state: &DensityMatrix, path: impl AsRef<Path>) -> Result<()> {
    save_operator(state.matrix(), state.dims(), path)
}

pub fn save_operator(m: &CMatrix, dims: (usize, usize), path: impl AsRef<Path>) -> Result<()> {
    write_file(
        &OperatorFile {
            dims: [dims.0, dims.1],
            matrix: Some(matrix_to_json(m)),
            vector: None,
        },
        path.as_ref(),
    )
}

pub fn save_ket(ket: &Ket, path: impl AsRef<Path>) -> Result<()> {
    let (a, b) = ket.dims();
    write_file(
        &OperatorFile {
            dims: [a, b],
            matrix: None,
            vector: Some(vector_to_json(ket.amplitudes())),
        },
        path.as_ref(),
    )
}

impl Serialize for Ket {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (a, b) = self.dims();
        OperatorFile {
            dims: [a, b],
            matrix: None,
            vector: Some(vector_to_json(self.amplitudes())),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Ket {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = OperatorFile::deserialize(d)?;
        let v = file
            .vector
            .ok_or_else(|| serde::de::Error::missing_field("vector"))?;
        Ket::new(vector_from_json(&v), (file.dims[0], file.dims[1]))
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{max_entangled, random_density, seeded_rng};

    #[test]
    fn round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("rho.json");
        let rho = random_density((2, 3), &mut seeded_rng(4));
        save_state(&rho, &p).unwrap();
        let back = load_state(&p).unwrap();
        assert!(back.matrix().max_abs_diff(rho.matrix()) <= 1e-15);
        assert_eq!(back.dims(), (2, 3));
    }

    #[test]
    fn ket_file_loads_as_pure_state() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("phi.json");
        save_ket(&max_entangled(3), &p).unwrap();
        let rho = load_state(&p).unwrap();
        assert!(rho.matrix().max_abs_diff(&max_entangled(3).projector()) < 1e-15);
    }

    #[test]
    fn trace_violation_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.json");
        save_operator(&CMatrix::identity(4).scale_re(0.225), (2, 2), &p).unwrap();
        let err = load_state(&p).unwrap_err();
        assert!(
            matches!(err, Error::InvalidState { check: "trace", .. }),
            "{err}"
        );
        assert!(err.to_string().contains("trace"));
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("junk.json");
        fs::write(&p, "{\"dims\": [2, 2], \"matrix\": [[1, 2]").unwrap();
        assert!(matches!(load_state(&p), Err(Error::Parse(_))));
    }

    #[test]
    fn mismatched_dims_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("dims.json");
        save_operator(&CMatrix::identity(6).scale_re(1.0 / 6.0), (2, 2), &p).unwrap();
        assert!(load_state(&p).is_err());
        save_operator(&CMatrix::identity(6).scale_re(1.0 / 6.0), (2, 3), &p).unwrap();
        assert!(load_state(&p).is_ok());
    }
}
