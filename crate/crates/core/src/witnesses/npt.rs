use super::{Family, Provenance, WitnessSpec};
use crate::criteria::ppt_test;
use crate::error::{Error, Result};
use crate::qlinalg::{kron, schmidt, CMatrix, C64, ZERO};
use crate::states::{DensityMatrix, Povm};

/// Rows are `<e_i|`, so the matrix sends `e_i` to `|i>`.
fn basis_change(vectors: &[Vec<C64>]) -> CMatrix {
    let d = vectors.len();
    CMatrix::from_fn(d, d, |i, k| vectors[i][k].conj())
}

/// Outcome vectors on `C^d (x) C^d`: `|mm>` for each `m`, then
/// `(|mn> + |nm>)/sqrt 2`, then `(|mn> - |nm>)/sqrt 2`, `m < n` lexicographic.
pub(crate) fn symmetric_basis(d: usize) -> (Vec<Vec<C64>>, Vec<String>) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|m| (m + 1..d).map(move |n| (m, n)))
        .collect();
    let mut vectors = Vec::with_capacity(d * d);
    let mut labels = Vec::with_capacity(d * d);
    for m in 0..d {
        let mut v = vec![ZERO; d * d];
        v[m * d + m] = C64::new(1.0, 0.0);
        vectors.push(v);
        labels.push(format!("{m}"));
    }
    for sign in [1.0, -1.0] {
        for &(m, n) in &pairs {
            let mut v = vec![ZERO; d * d];
            v[m * d + n] = C64::new(h, 0.0);
            v[n * d + m] = C64::new(sign * h, 0.0);
            vectors.push(v);
            labels.push(format!("{}{m}{n}", if sign > 0.0 { '+' } else { '-' }));
        }
    }
    (vectors, labels)
}

/// Witness for an NPT state built from the most negative eigenvector `eta` of
/// its partial transpose. Alice's symmetric-basis measurement is rotated by
/// `conj(U)` on her first system, so the product-state functional is
/// `-<eta|(rho_1^T (x) rho_2)|eta> <= 0` and the ideal value is
/// `-Tr(W rho) / d^2` with `W = (|eta><eta|)^{T_A}`.
pub fn build_npt_witness(rho: &DensityMatrix) -> Result<WitnessSpec> {
    let (da, db) = rho.dims();
    if da != db {
        return Err(Error::DimensionMismatch(format!(
            "NPT swap-steering witness needs equal local dimensions, got {da} x {db}"
        )));
    }
    let d = da;
    let report = ppt_test(rho);
    if !report.is_npt {
        return Err(Error::StateIsPpt(report.min_eigenvalue));
    }
    let sch = schmidt(report.eta.amplitudes(), (d, d))?;
    let u = basis_change(&sch.left);
    let v = basis_change(&sch.right);
    let alpha = sch.coefficients.clone();

    let (vectors, labels) = symmetric_basis(d);
    let rotation = kron(&u.conj(), &CMatrix::identity(d));
    let alice = Povm::from_basis(vectors, labels)?.conjugated(&rotation);

    let mut rows = vec![vec![0.0, 0.0]; d * d];
    let mut k = 0;
    for a in alpha.iter().take(d) {
        rows[k][0] = -a * a;
        k += 1;
    }
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|m| (m + 1..d).map(move |n| (m, n)))
        .collect();
    for &(m, n) in &pairs {
        rows[k][0] = -alpha[m] * alpha[n];
        k += 1;
    }
    for &(m, n) in &pairs {
        rows[k][0] = alpha[m] * alpha[n];
        k += 1;
    }

    WitnessSpec::new(
        Family::Npt,
        d,
        vec![alice],
        2,
        vec![rows],
        0.0,
        0.0,
        Provenance::Npt {
            u,
            v,
            alpha,
            eta: report.eta,
            min_eigenvalue: report.min_eigenvalue,
        },
    )
}
