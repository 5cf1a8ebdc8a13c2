use super::matrix::{fix_phase, vec_norm, CMatrix, C64};
use super::ops::realign;
use super::svd::svd;
use crate::error::{Error, Result};

/// Operator Schmidt coefficients below this are treated as exact zeros.
pub const OPERATOR_RANK_TOL: f64 = 1e-12;

/// `psi = sum_i coefficients[i] * left[i] (x) right[i]`.
#[derive(Debug, Clone)]
pub struct SchmidtResult {
    /// Nonnegative, descending; `min(dA, dB)` entries.
    pub coefficients: Vec<f64>,
    /// Orthonormal basis of `C^dA` (completed past the Schmidt rank).
    pub left: Vec<Vec<C64>>,
    /// Orthonormal basis of `C^dB` (completed past the Schmidt rank).
    pub right: Vec<Vec<C64>>,
}

impl SchmidtResult {
    pub fn reconstruct(&self) -> Vec<C64> {
        let da = self.left[0].len();
        let db = self.right[0].len();
        let mut out = vec![C64::new(0.0, 0.0); da * db];
        for ((a, e), f) in self.coefficients.iter().zip(&self.left).zip(&self.right) {
            for i in 0..da {
                for j in 0..db {
                    out[i * db + j] += e[i] * f[j] * a;
                }
            }
        }
        out
    }
}

/// Schmidt decomposition of a unit bipartite vector. Left vectors carry the
/// canonical phase; right vectors absorb whatever phase remains.
pub fn schmidt(psi: &[C64], (da, db): (usize, usize)) -> Result<SchmidtResult> {
    if psi.len() != da * db {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} on {da} x {db}",
            psi.len()
        )));
    }
    let norm = vec_norm(psi);
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidState {
            check: "norm",
            magnitude: (norm - 1.0).abs(),
        });
    }
    let m = CMatrix::from_fn(da, db, |i, j| psi[i * db + j]);
    let dec = svd(&m)?;
    let mut left = dec.u;
    let mut right: Vec<Vec<C64>> = dec
        .v
        .iter()
        .map(|v| v.iter().map(|z| z.conj()).collect())
        .collect();
    for (e, f) in left.iter_mut().zip(right.iter_mut()) {
        let phase = fix_phase(e);
        let back = phase.conj();
        f.iter_mut().for_each(|z| *z *= back);
    }
    let k = da.min(db);
    // complete the longer side so both are full bases
    let left = super::eig::complete_basis(left, da);
    let right = super::eig::complete_basis(right, db);
    Ok(SchmidtResult {
        coefficients: dec.singular_values.into_iter().take(k).collect(),
        left,
        right,
    })
}

/// `rho = sum_i coefficients[i] * left[i] (x) right[i]` with Hilbert-Schmidt
/// orthonormal operator families. The factors are not hermitized.
#[derive(Debug, Clone)]
pub struct OperatorSchmidt {
    /// Nonzero coefficients only, descending.
    pub coefficients: Vec<f64>,
    pub left: Vec<CMatrix>,
    pub right: Vec<CMatrix>,
    /// Sum of all singular values of the realigned matrix.
    pub trace_norm: f64,
}

impl OperatorSchmidt {
    pub fn reconstruct(&self) -> CMatrix {
        let da = self.left.first().map_or(1, CMatrix::rows);
        let db = self.right.first().map_or(1, CMatrix::rows);
        let mut out = CMatrix::zeros(da * db, da * db);
        for ((l, f), g) in self.coefficients.iter().zip(&self.left).zip(&self.right) {
            out = &out + &super::ops::kron(f, g).scale_re(*l);
        }
        out
    }
}

pub fn operator_schmidt(rho: &CMatrix, dims: (usize, usize)) -> Result<OperatorSchmidt> {
    let (da, db) = dims;
    let r = realign(rho, dims)?;
    let dec = svd(&r)?;
    let trace_norm = dec.singular_values.iter().sum();
    let mut coefficients = Vec::new();
    let mut left = Vec::new();
    let mut right = Vec::new();
    for ((s, u), v) in dec.singular_values.iter().zip(&dec.u).zip(&dec.v) {
        if *s <= OPERATOR_RANK_TOL {
            continue;
        }
        coefficients.push(*s);
        left.push(CMatrix::from_fn(da, da, |i, k| u[i * da + k]));
        right.push(CMatrix::from_fn(db, db, |j, l| v[j * db + l].conj()));
    }
    Ok(OperatorSchmidt {
        coefficients,
        left,
        right,
        trace_norm,
    })
}
