//! Cyclic Jacobi eigensolver for complex Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` and then applies
//! a real Givens rotation, so the working matrix stays Hermitian throughout.
//! Output is canonical: eigenvalues ascend, every eigenvector has its first
//! component of magnitude above `1e-8` real positive, and eigenvectors inside a
//! degenerate cluster are re-derived by Gram-Schmidt on the projected standard
//! basis, which makes them independent of the rotation order.

use super::matrix::{fix_phase, inner, vec_norm, CMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};
use crate::tol;

pub const MAX_SWEEPS: usize = 100;
pub const OFF_DIAGONAL_TOL: f64 = 1e-13;
pub const DEGENERACY_GAP: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct HermEig {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` belongs to `eigenvalues[k]`.
    pub eigenvectors: Vec<Vec<C64>>,
}

impl HermEig {
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.eigenvalues.len();
        let mut out = CMatrix::zeros(n, n);
        for (lam, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            for i in 0..n {
                let vi = v[i] * lam;
                for j in 0..n {
                    out[(i, j)] += vi * v[j].conj();
                }
            }
        }
        out
    }

    pub fn min(&self) -> (f64, &[C64]) {
        (self.eigenvalues[0], &self.eigenvectors[0])
    }

    pub fn max(&self) -> (f64, &[C64]) {
        let k = self.eigenvalues.len() - 1;
        (self.eigenvalues[k], &self.eigenvectors[k])
    }
}

fn off_diagonal_mass(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

pub fn hermitian_eig(m: &CMatrix) -> Result<HermEig> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let defect = m.hermiticity_defect();
    if defect > tol::HERMITIAN {
        return Err(Error::NotHermitian(defect));
    }
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = CMatrix::identity(n);
    let threshold = OFF_DIAGONAL_TOL * a.frobenius_norm().max(1.0);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_mass(&a) < threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged {
        let off = off_diagonal_mass(&a);
        if off >= threshold {
            return Err(Error::NonConvergence {
                sweeps: MAX_SWEEPS,
                off,
            });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| a[(k, k)].re).collect();
    let mut eigenvectors: Vec<Vec<C64>> = order.iter().map(|&k| v.column(k)).collect();

    canonicalize_clusters(&eigenvalues, &mut eigenvectors);
    Ok(HermEig {
        eigenvalues,
        eigenvectors,
    })
}

/// One complex Jacobi rotation zeroing `a[p][q]`; accumulates into `v`.
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let e = apq / mag;
    let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
    let t = if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = a.rows();
    let ec = e.conj();

    // A <- A G, with G = [[c, s], [-s e*, c e*]] on columns (p, q)
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * ec * s;
        a[(k, q)] = akp * s + akq * ec * c;
    }
    // A <- G^dagger A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * e * s;
        a[(q, k)] = apk * s + aqk * e * c;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * ec * s;
        v[(k, q)] = vkp * s + vkq * ec * c;
    }
}

fn canonicalize_clusters(values: &[f64], vectors: &mut [Vec<C64>]) {
    let n = values.len();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] < DEGENERACY_GAP {
            end += 1;
        }
        if end - start > 1 {
            let basis = canonical_span_basis(&vectors[start..end]);
            for (slot, b) in vectors[start..end].iter_mut().zip(basis) {
                *slot = b;
            }
        }
        start = end;
    }
    for v in vectors.iter_mut() {
        fix_phase(v);
    }
}

/// Canonical orthonormal basis of `span(cluster)`: projects the standard basis
/// vectors in index order and keeps the Gram-Schmidt survivors.
pub fn canonical_span_basis(cluster: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let k = cluster.len();
    let n = cluster[0].len();
    let mut out: Vec<Vec<C64>> = Vec::with_capacity(k);
    for i in 0..n {
        if out.len() == k {
            break;
        }
        // P e_i = sum_c q_c conj(q_c[i])
        let mut w = vec![ZERO; n];
        for q in cluster {
            let coef = q[i].conj();
            for (wj, qj) in w.iter_mut().zip(q) {
                *wj += qj * coef;
            }
        }
        for _ in 0..2 {
            for b in &out {
                let proj = inner(b, &w);
                for (wj, bj) in w.iter_mut().zip(b) {
                    *wj -= bj * proj;
                }
            }
        }
        let norm = vec_norm(&w);
        if norm > 1e-6 {
            w.iter_mut().for_each(|z| *z /= norm);
            out.push(w);
        }
    }
    out
}

/// Extends an orthonormal set to an orthonormal basis of `C^dim` by
/// Gram-Schmidt on the standard basis in index order.
pub fn complete_basis(mut vectors: Vec<Vec<C64>>, dim: usize) -> Vec<Vec<C64>> {
    for i in 0..dim {
        if vectors.len() >= dim {
            break;
        }
        let mut w = vec![ZERO; dim];
        w[i] = ONE;
        for _ in 0..2 {
            for b in &vectors {
                let proj = inner(b, &w);
                for (wj, bj) in w.iter_mut().zip(b) {
                    *wj -= bj * proj;
                }
            }
        }
        let norm = vec_norm(&w);
        if norm > 1e-6 {
            w.iter_mut().for_each(|z| *z /= norm);
            vectors.push(w);
        }
    }
    vectors
}

/// Eigenpairs of a unitary, sorted by eigenvalue argument in `[0, 2pi)`.
///
/// Diagonalizes the Hermitian combination `cos(t) Re U + sin(t) Im U`, which
/// shares the eigenvectors of `U`; the angle is chosen so that distinct
/// eigenvalues of `U` map to distinct real eigenvalues.
pub fn unitary_eig(u: &CMatrix) -> Result<Vec<(C64, Vec<C64>)>> {
    let n = u.rows();
    let ud = u.adjoint();
    for angle in [0.329_741_7, 0.577_215_665, 1.234_567_89] {
        let (ca, sa) = (f64::cos(angle), f64::sin(angle));
        let h = CMatrix::from_fn(n, n, |i, j| {
            let re_part = (u[(i, j)] + ud[(i, j)]) * 0.5;
            let im_part = (u[(i, j)] - ud[(i, j)]) * C64::new(0.0, -0.5);
            re_part * ca + im_part * sa
        });
        let eig = hermitian_eig(&h)?;
        let mut pairs = Vec::with_capacity(n);
        let mut worst: f64 = 0.0;
        for v in eig.eigenvectors {
            let uv = u.mul_vec(&v);
            let mu = inner(&v, &uv);
            let resid = uv
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - b * mu).norm())
                .fold(0.0, f64::max);
            worst = worst.max(resid);
            pairs.push((mu, v));
        }
        if worst < 1e-9 {
            pairs.sort_by(|a, b| {
                let arg = |z: C64| z.arg().rem_euclid(std::f64::consts::TAU);
                arg(a.0).total_cmp(&arg(b.0))
            });
            return Ok(pairs);
        }
    }
    Err(Error::NonConvergence {
        sweeps: MAX_SWEEPS,
        off: f64::NAN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = CMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        g.hermitian_part()
    }

    #[test]
    fn diagonal_input_sorted() {
        let e = hermitian_eig(&CMatrix::from_real_diag(&[3.0, 1.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 3.0]);
    }

    #[test]
    fn pauli_x_eigenvectors() {
        let x = CMatrix::from_vec(2, 2, vec![ZERO, ONE, ONE, ZERO]).unwrap();
        let e = hermitian_eig(&x).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((e.eigenvectors[0][0] - C64::new(h, 0.0)).norm() < 1e-12);
        assert!((e.eigenvectors[0][1] - C64::new(-h, 0.0)).norm() < 1e-12);
        assert!((e.eigenvectors[1][1] - C64::new(h, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn random_16_reconstructs() {
        let m = random_hermitian(16, 7);
        let e = hermitian_eig(&m).unwrap();
        assert!(e.reconstruct().max_abs_diff(&m) < 1e-10);
        for i in 0..16 {
            for j in 0..16 {
                let ip = inner(&e.eigenvectors[i], &e.eigenvectors[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - C64::new(want, 0.0)).norm() < 1e-10);
            }
        }
        assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_vec(2, 2, vec![ZERO, ONE, ZERO, ZERO]).unwrap();
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn degenerate_cluster_depends_only_on_subspace() {
        // two matrices sharing a 3-dimensional eigenspace but with different
        // spectra take different Jacobi paths; canonical vectors must agree
        let q = hermitian_eig(&random_hermitian(4, 11)).unwrap();
        let qm = CMatrix::from_columns(&q.eigenvectors);
        let m1 = CMatrix::from_real_diag(&[2.0, 2.0, 2.0, -1.0]).conjugate_by(&qm);
        let m2 = CMatrix::from_real_diag(&[0.5, 0.5, 0.5, 4.0]).conjugate_by(&qm);
        let e1 = hermitian_eig(&m1).unwrap();
        let e2 = hermitian_eig(&m2).unwrap();
        for k in 0..3 {
            for i in 0..4 {
                assert!((e1.eigenvectors[k + 1][i] - e2.eigenvectors[k][i]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn unitary_eig_of_clock() {
        let n = 5;
        let w = C64::from_polar(1.0, std::f64::consts::TAU / n as f64);
        let z = CMatrix::from_fn(n, n, |i, j| if i == j { w.powu(i as u32) } else { ZERO });
        let pairs = unitary_eig(&z).unwrap();
        for (a, (mu, v)) in pairs.iter().enumerate() {
            assert!((mu - w.powu(a as u32)).norm() < 1e-10);
            assert!((v[a].norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn complete_basis_fills_dimension() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let b = complete_basis(vec![vec![C64::new(h, 0.0), C64::new(h, 0.0), ZERO]], 3);
        assert_eq!(b.len(), 3);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((inner(&b[i], &b[j]).re - want).abs() < 1e-12);
            }
        }
    }
}
