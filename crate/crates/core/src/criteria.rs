//! Separability criteria: partial transpose (PPT) with the negative-eigenvector
//! witness, computable cross norm / realignment (CCN), and a checker for the
//! aligned operator-Schmidt form used by the CCN steering witness.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qlinalg::{
    hermitian_eig, kron, partial_transpose, realign, svd, CMatrix, Subsystem, C64, ONE,
};
use crate::states::{DensityMatrix, Ket};
use crate::tol;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PptReport {
    pub min_eigenvalue: f64,
    /// Eigenvector of `rho^{T_A}` at the minimal eigenvalue.
    pub eta: Ket,
    pub is_npt: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcnReport {
    pub coefficient_sum: f64,
    /// All singular values of the realigned matrix, descending.
    pub coefficients: Vec<f64>,
    pub violates: bool,
}

/// Smallest eigenpair of the partial transpose on `A`. Degenerate minima are
/// resolved by the eigensolver's canonical basis.
pub fn ppt_test(rho: &DensityMatrix) -> PptReport {
    let pt = partial_transpose(rho.matrix(), rho.dims(), Subsystem::A)
        .expect("dims validated at construction");
    let eig = hermitian_eig(&pt).expect("partial transpose of a Hermitian matrix is Hermitian");
    let min_eigenvalue = eig.eigenvalues[0];
    let eta = Ket::normalized(eig.eigenvectors[0].clone(), rho.dims())
        .expect("eigenvectors are unit vectors");
    PptReport {
        min_eigenvalue,
        eta,
        is_npt: min_eigenvalue < -tol::PPT,
    }
}

/// `W = (|eta><eta|)^{T_A}`; `Tr(W sigma) >= 0` on separable `sigma`.
pub fn npt_entanglement_witness(rho: &DensityMatrix) -> Result<CMatrix> {
    let report = ppt_test(rho);
    if !report.is_npt {
        return Err(Error::StateIsPpt(report.min_eigenvalue));
    }
    Ok(witness_from_eta(&report.eta))
}

pub(crate) fn witness_from_eta(eta: &Ket) -> CMatrix {
    partial_transpose(&eta.projector(), eta.dims(), Subsystem::A)
        .expect("ket dims are consistent")
        .hermitian_part()
}

/// Trace norm of the realigned matrix, i.e. the sum of operator Schmidt
/// coefficients.
pub fn ccn_test(rho: &DensityMatrix) -> CcnReport {
    let r = realign(rho.matrix(), rho.dims()).expect("dims validated at construction");
    let coefficients = svd(&r).expect("finite input").singular_values;
    let coefficient_sum = coefficients.iter().sum();
    CcnReport {
        coefficient_sum,
        violates: coefficient_sum > 1.0 + tol::CCN,
        coefficients,
    }
}

/// Element of the Hermitian operator basis `{J_m, J+_mn, J-_mn}` on `C^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum JLabel {
    Diag { m: usize },
    Plus { m: usize, n: usize },
    Minus { m: usize, n: usize },
}

impl std::fmt::Display for JLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            JLabel::Diag { m } => write!(f, "J_{m}"),
            JLabel::Plus { m, n } => write!(f, "J+_{m}{n}"),
            JLabel::Minus { m, n } => write!(f, "J-_{m}{n}"),
        }
    }
}

/// The basis in canonical order: all `J_m`, then `J+_mn`, then `J-_mn`, with
/// `m < n` lexicographic.
pub fn j_labels(d: usize) -> Vec<JLabel> {
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|m| (m + 1..d).map(move |n| (m, n)))
        .collect();
    (0..d)
        .map(|m| JLabel::Diag { m })
        .chain(pairs.iter().map(|&(m, n)| JLabel::Plus { m, n }))
        .chain(pairs.iter().map(|&(m, n)| JLabel::Minus { m, n }))
        .collect()
}

pub fn j_matrix(d: usize, label: JLabel) -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = CMatrix::zeros(d, d);
    match label {
        JLabel::Diag { m } => out[(m, m)] = ONE,
        JLabel::Plus { m, n } => {
            out[(m, n)] = C64::new(h, 0.0);
            out[(n, m)] = C64::new(h, 0.0);
        }
        JLabel::Minus { m, n } => {
            // (|m><n| - |n><m|) / (i sqrt 2)
            out[(m, n)] = C64::new(0.0, -h);
            out[(n, m)] = C64::new(0.0, h);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedEntry {
    pub label: JLabel,
    pub lambda: f64,
}

/// Coefficients of `(U (x) V) rho (U (x) V)^dagger` in the aligned form
/// `sum lambda_p J_p (x) J_p^T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedForm {
    pub entries: Vec<AlignedEntry>,
}

impl AlignedForm {
    pub fn lambda_sum(&self) -> f64 {
        self.entries.iter().map(|e| e.lambda).sum()
    }
}

/// Checks that `rho` is in aligned form after local conjugation by `U (x) V`.
pub fn verify_ccn_aligned(rho: &DensityMatrix, u: &CMatrix, v: &CMatrix) -> Result<AlignedForm> {
    let (da, db) = rho.dims();
    if da != db {
        return Err(Error::DimensionMismatch(format!(
            "aligned form needs equal local dimensions, got {da} x {db}"
        )));
    }
    u.ensure_unitary(tol::UNITARY)?;
    v.ensure_unitary(tol::UNITARY)?;
    let d = da;
    let rotated = rho.local_conjugate(u, v)?;
    let labels = j_labels(d);
    let mats: Vec<CMatrix> = labels.iter().map(|&l| j_matrix(d, l)).collect();
    let mut entries = Vec::with_capacity(labels.len());
    for (p, (lp, jp)) in labels.iter().zip(&mats).enumerate() {
        for (q, jq) in mats.iter().enumerate() {
            let t = kron(jp, jq).trace_product(rotated.matrix());
            if p != q {
                if t.norm() > tol::ALIGNED_FORM {
                    return Err(Error::OffFormCoefficient {
                        row: lp.to_string(),
                        col: labels[q].to_string(),
                        magnitude: t.norm(),
                    });
                }
                continue;
            }
            if t.im.abs() > tol::ALIGNED_FORM {
                return Err(Error::ComplexCoefficients(t.im.abs()));
            }
            // J-^T = -J-, so its aligned coefficient carries a sign flip
            let lambda = match lp {
                JLabel::Minus { .. } => -t.re,
                _ => t.re,
            };
            if lambda < -tol::ALIGNED_FORM {
                return Err(Error::NegativeCoefficient {
                    label: lp.to_string(),
                    value: lambda,
                });
            }
            entries.push(AlignedEntry { label: *lp, lambda });
        }
    }
    Ok(AlignedForm { entries })
}

/// `sum lambda_p J_p (x) J_p^T`.
pub fn rebuild_aligned(d: usize, form: &AlignedForm) -> CMatrix {
    let mut out = CMatrix::zeros(d * d, d * d);
    for e in &form.entries {
        let j = j_matrix(d, e.label);
        out = &out + &kron(&j, &j.transpose()).scale_re(e.lambda);
    }
    out
}
