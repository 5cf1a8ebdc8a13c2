//! Tensor-product bookkeeping: Kronecker products, partial trace and transpose,
//! and subsystem permutations. Composite indices always put the first factor
//! on the slow index, so `(i, j)` on `A (x) B` is `i * dim(B) + j`.

use serde::{Deserialize, Serialize};

use super::matrix::CMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (br, bc) = (b.rows(), b.cols());
    CMatrix::from_fn(a.rows() * br, a.cols() * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all(factors: &[&CMatrix]) -> CMatrix {
    factors
        .iter()
        .fold(CMatrix::identity(1), |acc, f| kron(&acc, f))
}

fn check_bipartite(m: &CMatrix, (da, db): (usize, usize)) -> Result<()> {
    if !m.is_square() || m.rows() != da * db {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator does not act on {da} x {db}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

pub fn partial_transpose(m: &CMatrix, dims: (usize, usize), sys: Subsystem) -> Result<CMatrix> {
    check_bipartite(m, dims)?;
    let (da, db) = dims;
    let mut out = CMatrix::zeros(da * db, da * db);
    for i in 0..da {
        for j in 0..db {
            for k in 0..da {
                for l in 0..db {
                    let v = m[(i * db + j, k * db + l)];
                    let (r, c) = match sys {
                        Subsystem::A => (k * db + j, i * db + l),
                        Subsystem::B => (i * db + l, k * db + j),
                    };
                    out[(r, c)] = v;
                }
            }
        }
    }
    Ok(out)
}

/// Traces out `sys`, returning the reduced operator on the other subsystem.
pub fn partial_trace(m: &CMatrix, dims: (usize, usize), sys: Subsystem) -> Result<CMatrix> {
    check_bipartite(m, dims)?;
    let (da, db) = dims;
    Ok(match sys {
        Subsystem::B => CMatrix::from_fn(da, da, |i, k| {
            (0..db).map(|j| m[(i * db + j, k * db + j)]).sum()
        }),
        Subsystem::A => CMatrix::from_fn(db, db, |j, l| {
            (0..da).map(|i| m[(i * db + j, i * db + l)]).sum()
        }),
    })
}

/// Decomposes a composite index into per-subsystem digits (first subsystem slow).
fn digits(mut idx: usize, dims: &[usize], out: &mut [usize]) {
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = idx % d;
        idx /= d;
    }
}

/// Maps every composite index of the source layout to its index in the
/// permuted layout. Output position `p` holds source subsystem `perm[p]`.
fn permutation_map(dims: &[usize], perm: &[usize]) -> Result<Vec<usize>> {
    let n = dims.len();
    let mut seen = vec![false; n];
    if perm.len() != n
        || perm
            .iter()
            .any(|&p| p >= n || std::mem::replace(&mut seen[p], true))
    {
        return Err(Error::DimensionMismatch(format!(
            "{perm:?} is not a permutation of {n} subsystems"
        )));
    }
    let total: usize = dims.iter().product();
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut digs = vec![0; n];
    let mut map = Vec::with_capacity(total);
    for idx in 0..total {
        digits(idx, dims, &mut digs);
        let mut out = 0;
        for (p, &src) in perm.iter().enumerate() {
            out = out * new_dims[p] + digs[src];
        }
        map.push(out);
    }
    Ok(map)
}

/// Reorders the tensor factors of an operator on `dims[0] (x) dims[1] (x) ...`.
pub fn permute_subsystems(m: &CMatrix, dims: &[usize], perm: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if !m.is_square() || m.rows() != total {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator does not act on dims {dims:?}",
            m.rows(),
            m.cols()
        )));
    }
    let map = permutation_map(dims, perm)?;
    let mut out = CMatrix::zeros(total, total);
    for (i, &pi) in map.iter().enumerate() {
        for (j, &pj) in map.iter().enumerate() {
            out[(pi, pj)] = m[(i, j)];
        }
    }
    Ok(out)
}

/// Inverse permutation of `perm`.
pub fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (p, &src) in perm.iter().enumerate() {
        inv[src] = p;
    }
    inv
}

/// Realignment `R(m)[(i,k),(j,l)] = m[(i,j),(k,l)]`, a `dA^2 x dB^2` matrix.
pub fn realign(m: &CMatrix, dims: (usize, usize)) -> Result<CMatrix> {
    check_bipartite(m, dims)?;
    let (da, db) = dims;
    let mut out = CMatrix::zeros(da * da, db * db);
    for i in 0..da {
        for j in 0..db {
            for k in 0..da {
                for l in 0..db {
                    out[(i * da + k, j * db + l)] = m[(i * db + j, k * db + l)];
                }
            }
        }
    }
    Ok(out)
}

/// Embeds a local operator on one subsystem as `op (x) I` or `I (x) op`.
pub fn local(op: &CMatrix, other_dim: usize, sys: Subsystem) -> CMatrix {
    let id = CMatrix::identity(other_dim);
    match sys {
        Subsystem::A => kron(op, &id),
        Subsystem::B => kron(&id, op),
    }
}

#[cfg(test)]
mod tests {
    use super::super::matrix::{C64, ONE, ZERO};
    use super::*;

    fn pauli_x() -> CMatrix {
        CMatrix::from_vec(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap()
    }

    fn pauli_z() -> CMatrix {
        CMatrix::from_real_diag(&[1.0, -1.0])
    }

    #[test]
    fn identity_kron_identity() {
        let i2 = CMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), CMatrix::identity(4));
    }

    #[test]
    fn z_kron_x_block_structure() {
        let k = kron(&pauli_z(), &pauli_x());
        let x = pauli_x();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(k[(i, j)], x[(i, j)]);
                assert_eq!(k[(i + 2, j + 2)], -x[(i, j)]);
                assert_eq!(k[(i, j + 2)], ZERO);
                assert_eq!(k[(i + 2, j)], ZERO);
            }
        }
    }

    #[test]
    fn partial_ops_reject_wrong_dims() {
        let m = CMatrix::identity(6);
        assert!(partial_transpose(&m, (2, 2), Subsystem::A).is_err());
        assert!(partial_trace(&m, (4, 2), Subsystem::B).is_err());
        assert!(partial_trace(&m, (2, 3), Subsystem::B).is_ok());
    }

    #[test]
    fn permutation_probe() {
        // operator on 2 (x) 3 (x) 2 with distinct entries
        let m = CMatrix::from_fn(12, 12, |i, j| C64::new(i as f64, j as f64));
        let p = permute_subsystems(&m, &[2, 3, 2], &[2, 0, 1]).unwrap();
        // source digits (a,b,c) -> target digits (c,a,b)
        let src = |a: usize, b: usize, c: usize| a * 6 + b * 2 + c;
        let dst = |a: usize, b: usize, c: usize| c * 6 + a * 3 + b;
        assert_eq!(
            p[(dst(1, 2, 0), dst(0, 1, 1))],
            m[(src(1, 2, 0), src(0, 1, 1))]
        );
        let back = permute_subsystems(&p, &[2, 2, 3], &invert_permutation(&[2, 0, 1])).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn bad_permutation_is_rejected() {
        let m = CMatrix::identity(4);
        assert!(permute_subsystems(&m, &[2, 2], &[0, 0]).is_err());
    }
}
