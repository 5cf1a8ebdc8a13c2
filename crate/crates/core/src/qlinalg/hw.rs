//! Clock and shift matrices and the Heisenberg-Weyl operator basis
//! `B_ij = w^(ij(D-1)/2) X^i Z^j`, `w = exp(2 pi i / D)`, with
//! `Z = sum_k w^k |k><k|` and `X = sum_k |k+1><k|`. Tables are indexed
//! `[i * D + j]`.

use std::f64::consts::PI;

use super::matrix::{CMatrix, C64, ZERO};
use crate::error::{Error, Result};

pub fn omega(d: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * PI / d as f64)
}

/// `w^(num / den)` for `w = exp(2 pi i / d)`, reducing the numerator first.
fn omega_frac(d: usize, num: i64, den: i64) -> C64 {
    let period = (d as i64) * den;
    let r = num.rem_euclid(period);
    C64::from_polar(1.0, 2.0 * PI * r as f64 / period as f64)
}

/// Shift `X_d |k> = |k+1 mod d>`.
pub fn shift(d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| {
        if i == (j + 1) % d {
            C64::new(1.0, 0.0)
        } else {
            ZERO
        }
    })
}

/// Clock `Z_d |k> = w^k |k>`.
pub fn clock(d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            omega_frac(d, i as i64, 1)
        } else {
            ZERO
        }
    })
}

/// `X^i Z^j` times an extra phase `w^(phase_num / 2)`, built entrywise.
fn weyl(d: usize, i: usize, j: usize, phase_num: i64) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    for k in 0..d {
        // X^i Z^j |k> = w^(jk) |k + i>
        m[((k + i) % d, k)] = omega_frac(d, 2 * (j * k) as i64 + phase_num, 2);
    }
    m
}

fn phase_numerator(d: usize, i: usize, j: usize) -> i64 {
    (i * j) as i64 * (d as i64 - 1)
}

/// `B_ij` for `i, j` in `0..d`.
pub fn hw_element(d: usize, i: usize, j: usize) -> CMatrix {
    weyl(d, i % d, j % d, phase_numerator(d, i % d, j % d))
}

pub fn hw_basis(d: usize) -> Vec<CMatrix> {
    assert!(d >= 2, "Heisenberg-Weyl basis needs d >= 2");
    (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| hw_element(d, i, j))
        .collect()
}

/// Coefficients `lambda_ij` of an operator in the Heisenberg-Weyl basis.
#[derive(Debug, Clone, PartialEq)]
pub struct HwCoefficients {
    pub d: usize,
    /// Row-major `[i * d + j]`.
    pub table: Vec<C64>,
}

impl HwCoefficients {
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.table[(i % self.d) * self.d + j % self.d]
    }
}

/// `lambda_ij = Tr(B_ij^dagger w) / D`.
pub fn hw_expand(w: &CMatrix) -> Result<HwCoefficients> {
    if !w.is_square() || w.rows() < 2 {
        return Err(Error::DimensionMismatch(format!(
            "Heisenberg-Weyl expansion of a {}x{} matrix",
            w.rows(),
            w.cols()
        )));
    }
    let d = w.rows();
    let mut table = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let pn = phase_numerator(d, i, j);
            let mut acc = ZERO;
            for k in 0..d {
                let b = omega_frac(d, 2 * (j * k) as i64 + pn, 2);
                acc += b.conj() * w[((k + i) % d, k)];
            }
            table.push(acc / d as f64);
        }
    }
    Ok(HwCoefficients { d, table })
}

pub fn hw_reconstruct(coeffs: &HwCoefficients) -> CMatrix {
    let d = coeffs.d;
    let mut out = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let l = coeffs.table[i * d + j];
            if l == ZERO {
                continue;
            }
            let pn = phase_numerator(d, i, j);
            for k in 0..d {
                out[((k + i) % d, k)] += l * omega_frac(d, 2 * (j * k) as i64 + pn, 2);
            }
        }
    }
    out
}

/// Adjoint partner: `B_ij^dagger = kappa * B_i'j'` with `(i', j') = (-i, -j) mod D`.
/// A Hermitian operator therefore satisfies `lambda_i'j' = kappa * conj(lambda_ij)`.
pub fn hw_adjoint_partner(d: usize, i: usize, j: usize) -> ((usize, usize), C64) {
    let (i, j) = (i % d, j % d);
    let (ip, jp) = ((d - i) % d, (d - j) % d);
    let dd = d as i64;
    // B_ij^dagger = w^(ij(3-D)/2) X^i' Z^j'
    let num = (i * j) as i64 * (3 - dd) - (ip * jp) as i64 * (dd - 1);
    ((ip, jp), omega_frac(d, num, 2))
}

/// Largest violation of the Hermiticity relation over a coefficient table.
pub fn hermiticity_residual(coeffs: &HwCoefficients) -> f64 {
    let d = coeffs.d;
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let ((ip, jp), kappa) = hw_adjoint_partner(d, i, j);
            worst = worst.max((coeffs.get(ip, jp) - kappa * coeffs.get(i, j).conj()).norm());
        }
    }
    worst
}

/// Additive order of the label `(i, j)` in `Z_D x Z_D`.
pub fn label_order(d: usize, i: usize, j: usize) -> usize {
    (1..=d)
        .find(|&k| (k * i).is_multiple_of(d) && (k * j).is_multiple_of(d))
        .unwrap_or(d)
}
