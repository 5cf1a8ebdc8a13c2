//! Validated quantum states and measurements, plus the fixed families used by
//! the witnesses: maximally entangled states, the qudit Bell basis, isotropic
//! and Werner noise models.

mod io;
mod random;

pub use io::{
    load_operator, load_state, matrix_from_json, matrix_to_json, save_ket, save_operator,
    save_state, vector_from_json, vector_to_json, JsonComplex, JsonMatrix, OperatorFile,
};
pub use random::{
    random_density, random_density_with_rank, random_local_pure, random_povm, random_pure,
    random_separable, random_unitary, seeded_rng, StateRng,
};

use crate::error::{Error, Result};
use crate::qlinalg::{
    clock, hermitian_eig, inner, kron, kron_vec, partial_trace, shift, vec_norm, CMatrix,
    Subsystem, C64, ZERO,
};
use crate::tol;

pub use crate::qlinalg::{clock as gen_pauli_z, shift as gen_pauli_x};

/// Unit vector on `C^dA (x) C^dB`. Single systems use `dims = (d, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket {
    amplitudes: Vec<C64>,
    dims: (usize, usize),
}

impl Ket {
    pub fn new(amplitudes: Vec<C64>, dims: (usize, usize)) -> Result<Self> {
        if amplitudes.len() != dims.0 * dims.1 {
            return Err(Error::DimensionMismatch(format!(
                "ket of length {} with dims {:?}",
                amplitudes.len(),
                dims
            )));
        }
        let norm = vec_norm(&amplitudes);
        if (norm - 1.0).abs() > tol::KET_NORM {
            return Err(Error::InvalidState {
                check: "norm",
                magnitude: (norm - 1.0).abs(),
            });
        }
        Ok(Self { amplitudes, dims })
    }

    /// Normalizes before validating.
    pub fn normalized(mut amplitudes: Vec<C64>, dims: (usize, usize)) -> Result<Self> {
        let norm = vec_norm(&amplitudes);
        if norm == 0.0 {
            return Err(Error::InvalidState {
                check: "norm",
                magnitude: 1.0,
            });
        }
        amplitudes.iter_mut().for_each(|z| *z /= norm);
        Self::new(amplitudes, dims)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn projector(&self) -> CMatrix {
        CMatrix::projector(&self.amplitudes)
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: self.projector(),
            dims: self.dims,
        }
    }

    pub fn overlap(&self, other: &Ket) -> C64 {
        inner(&self.amplitudes, &other.amplitudes)
    }

    pub fn tensor(&self, other: &Ket) -> Ket {
        Ket {
            amplitudes: kron_vec(&self.amplitudes, &other.amplitudes),
            dims: (self.dim(), other.dim()),
        }
    }
}

/// Hermitian, positive semidefinite, unit-trace operator on `C^dA (x) C^dB`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    dims: (usize, usize),
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix, dims: (usize, usize)) -> Result<Self> {
        let n = dims.0 * dims.1;
        if !matrix.is_square() || matrix.rows() != n {
            return Err(Error::InvalidState {
                check: "shape",
                magnitude: matrix.rows().abs_diff(n).max(matrix.cols().abs_diff(n)) as f64,
            });
        }
        let defect = matrix.hermiticity_defect();
        if defect > tol::HERMITIAN {
            return Err(Error::InvalidState {
                check: "hermiticity",
                magnitude: defect,
            });
        }
        let tr = matrix.trace();
        let tr_err = (tr - C64::new(1.0, 0.0)).norm();
        if tr_err > tol::TRACE {
            return Err(Error::InvalidState {
                check: "trace",
                magnitude: tr_err,
            });
        }
        let matrix = matrix.hermitian_part();
        let min = hermitian_eig(&matrix)?.eigenvalues[0];
        if min < -tol::PSD {
            return Err(Error::InvalidState {
                check: "positivity",
                magnitude: -min,
            });
        }
        Ok(Self { matrix, dims })
    }

    /// Skips the positivity eigensolve; callers guarantee the construction is PSD.
    pub(crate) fn from_trusted(matrix: CMatrix, dims: (usize, usize)) -> Self {
        debug_assert!(matrix.rows() == dims.0 * dims.1);
        Self {
            matrix: matrix.hermitian_part(),
            dims,
        }
    }

    pub fn maximally_mixed(dims: (usize, usize)) -> Self {
        let n = dims.0 * dims.1;
        Self::from_trusted(CMatrix::identity(n).scale_re(1.0 / n as f64), dims)
    }

    pub fn product(a: &DensityMatrix, b: &DensityMatrix) -> Self {
        Self::from_trusted(
            kron(&a.matrix, &b.matrix),
            (a.matrix.rows(), b.matrix.rows()),
        )
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn reduced(&self, keep: Subsystem) -> CMatrix {
        let traced = match keep {
            Subsystem::A => Subsystem::B,
            Subsystem::B => Subsystem::A,
        };
        partial_trace(&self.matrix, self.dims, traced).expect("dims validated at construction")
    }

    /// `(U (x) V) rho (U (x) V)^dagger`.
    pub fn local_conjugate(&self, u: &CMatrix, v: &CMatrix) -> Result<Self> {
        if u.rows() != self.dims.0 || v.rows() != self.dims.1 {
            return Err(Error::DimensionMismatch(format!(
                "local unitaries of size {} and {} on dims {:?}",
                u.rows(),
                v.rows(),
                self.dims
            )));
        }
        Ok(Self::from_trusted(
            self.matrix.conjugate_by(&kron(u, v)),
            self.dims,
        ))
    }

    /// `Re Tr(op * rho)`.
    pub fn expectation(&self, op: &CMatrix) -> f64 {
        op.trace_product(&self.matrix).re
    }

    /// Convex combination `t * self + (1 - t) * other`.
    pub fn mix(&self, other: &DensityMatrix, t: f64) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(
                "mixing states of different dims".into(),
            ));
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::ParameterOutOfRange(format!("mixing weight {t}")));
        }
        Ok(Self::from_trusted(
            &self.matrix.scale_re(t) + &other.matrix.scale_re(1.0 - t),
            self.dims,
        ))
    }
}

/// Positive operator-valued measure. Projective measurements keep their basis
/// vectors so expectation values on pure states avoid matrix products.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<CMatrix>,
    labels: Vec<String>,
    basis: Option<Vec<Vec<C64>>>,
}

impl Povm {
    pub fn new(elements: Vec<CMatrix>, labels: Vec<String>) -> Result<Self> {
        let dim = Self::check_shape(&elements, &labels)?;
        let mut sum = CMatrix::zeros(dim, dim);
        for (k, e) in elements.iter().enumerate() {
            let min = hermitian_eig(e)
                .map_err(|_| Error::InvalidPovm(format!("element {k} is not Hermitian")))?
                .eigenvalues[0];
            if min < -tol::POVM {
                return Err(Error::InvalidPovm(format!(
                    "element {k} has eigenvalue {min:e}"
                )));
            }
            sum = &sum + e;
        }
        let defect = sum.max_abs_diff(&CMatrix::identity(dim));
        if defect > tol::POVM {
            return Err(Error::InvalidPovm(format!(
                "elements sum to identity only within {defect:e}"
            )));
        }
        Ok(Self {
            elements: elements.into_iter().map(|e| e.hermitian_part()).collect(),
            labels,
            basis: None,
        })
    }

    /// Rank-one projective measurement onto an orthonormal basis.
    pub fn from_basis(vectors: Vec<Vec<C64>>, labels: Vec<String>) -> Result<Self> {
        let dim = vectors.first().map_or(0, Vec::len);
        if vectors.len() != dim || vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidPovm(format!(
                "{} vectors do not form a basis of C^{dim}",
                vectors.len()
            )));
        }
        for i in 0..dim {
            for j in i..dim {
                let want = if i == j { 1.0 } else { 0.0 };
                let err = (inner(&vectors[i], &vectors[j]) - C64::new(want, 0.0)).norm();
                if err > tol::POVM {
                    return Err(Error::InvalidPovm(format!(
                        "basis vectors {i}, {j} fail orthonormality by {err:e}"
                    )));
                }
            }
        }
        let elements: Vec<CMatrix> = vectors.iter().map(|v| CMatrix::projector(v)).collect();
        Self::check_shape(&elements, &labels)?;
        Ok(Self {
            elements,
            labels,
            basis: Some(vectors),
        })
    }

    fn check_shape(elements: &[CMatrix], labels: &[String]) -> Result<usize> {
        let Some(first) = elements.first() else {
            return Err(Error::InvalidPovm("no elements".into()));
        };
        let dim = first.rows();
        if elements.iter().any(|e| !e.is_square() || e.rows() != dim) {
            return Err(Error::InvalidPovm("elements of inconsistent shape".into()));
        }
        if labels.len() != elements.len() {
            return Err(Error::InvalidPovm(format!(
                "{} labels for {} elements",
                labels.len(),
                elements.len()
            )));
        }
        Ok(dim)
    }

    /// Two-outcome measurement `{E, I - E}`.
    pub fn binary(effect: CMatrix) -> Result<Self> {
        let n = effect.rows();
        let rest = &CMatrix::identity(n) - &effect;
        Self::new(vec![effect, rest], vec!["0".into(), "1".into()])
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn basis(&self) -> Option<&[Vec<C64>]> {
        self.basis.as_deref()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }

    /// `W^dagger E W` for every element, keeping the basis when present.
    pub fn conjugated(&self, w: &CMatrix) -> Self {
        let wd = w.adjoint();
        match &self.basis {
            Some(b) => {
                let rotated: Vec<Vec<C64>> = b.iter().map(|v| wd.mul_vec(v)).collect();
                Self {
                    elements: rotated.iter().map(|v| CMatrix::projector(v)).collect(),
                    labels: self.labels.clone(),
                    basis: Some(rotated),
                }
            }
            None => Self {
                elements: self
                    .elements
                    .iter()
                    .map(|e| (&(&wd * e) * w).hermitian_part())
                    .collect(),
                labels: self.labels.clone(),
                basis: None,
            },
        }
    }

    /// Outcome probabilities on a pure state.
    pub fn probabilities_pure(&self, psi: &[C64]) -> Vec<f64> {
        match &self.basis {
            Some(b) => b.iter().map(|v| inner(v, psi).norm_sqr()).collect(),
            None => self.elements.iter().map(|e| e.expectation(psi)).collect(),
        }
    }

    /// Max-abs deviation of `sum_k E_k` from the identity.
    pub fn completeness_defect(&self) -> f64 {
        let n = self.dim();
        let mut sum = CMatrix::zeros(n, n);
        for e in &self.elements {
            sum = &sum + e;
        }
        sum.max_abs_diff(&CMatrix::identity(n))
    }
}

/// `|phi+_d> = (1/sqrt d) sum_i |ii>`.
pub fn max_entangled(d: usize) -> Ket {
    assert!(d >= 2, "max_entangled needs d >= 2");
    let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut v = vec![ZERO; d * d];
    for i in 0..d {
        v[i * d + i] = amp;
    }
    Ket {
        amplitudes: v,
        dims: (d, d),
    }
}

/// `|phi_{l1 l2}> = (X^l2 Z^l1 (x) I) |phi+_d>`, ordered by `l1 * d + l2`.
pub fn bell_basis(d: usize) -> Vec<Ket> {
    let phi = max_entangled(d);
    let x = shift(d);
    let z = clock(d);
    let id = CMatrix::identity(d);
    let mut out = Vec::with_capacity(d * d);
    for l1 in 0..d {
        for l2 in 0..d {
            let r = &x.pow(l2) * &z.pow(l1);
            let op = kron(&r, &id);
            out.push(Ket {
                amplitudes: op.mul_vec(phi.amplitudes()),
                dims: (d, d),
            });
        }
    }
    out
}

pub fn bell_label(d: usize, index: usize) -> String {
    format!("{}{}", index / d, index % d)
}

/// `v |phi+_d><phi+_d| + (1 - v) I / d^2`.
pub fn isotropic(d: usize, v: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&v) || d < 2 {
        return Err(Error::ParameterOutOfRange(format!(
            "isotropic state needs d >= 2 and 0 <= v <= 1, got d = {d}, v = {v}"
        )));
    }
    let n = d * d;
    let m = &max_entangled(d).projector().scale_re(v)
        + &CMatrix::identity(n).scale_re((1.0 - v) / n as f64);
    Ok(DensityMatrix::from_trusted(m, (d, d)))
}

/// Two-qubit Werner state `p |psi-><psi-| + (1 - p) I / 4`.
pub fn werner_qubit(p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::ParameterOutOfRange(format!(
            "Werner parameter must lie in [0, 1], got {p}"
        )));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let singlet = [ZERO, C64::new(h, 0.0), C64::new(-h, 0.0), ZERO];
    let m =
        &CMatrix::projector(&singlet).scale_re(p) + &CMatrix::identity(4).scale_re((1.0 - p) / 4.0);
    Ok(DensityMatrix::from_trusted(m, (2, 2)))
}

/// `v |phi+><phi+| + (1 - v) sum_m q_m |mm><mm|`: stays in the aligned
/// realignment form with nonnegative coefficients for any `v`, `q`.
pub fn correlated_mixture(d: usize, v: f64, weights: &[f64]) -> Result<DensityMatrix> {
    if weights.len() != d || weights.iter().any(|&w| w < 0.0) {
        return Err(Error::ParameterOutOfRange(
            "need d nonnegative diagonal weights".into(),
        ));
    }
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::ParameterOutOfRange(format!("visibility {v}")));
    }
    let total: f64 = weights.iter().sum();
    let mut m = max_entangled(d).projector().scale_re(v);
    for (k, w) in weights.iter().enumerate() {
        m[(k * d + k, k * d + k)] += C64::new((1.0 - v) * w / total, 0.0);
    }
    DensityMatrix::new(m, (d, d))
}
