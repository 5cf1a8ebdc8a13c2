//! One-sided (Hestenes) Jacobi SVD. Column pairs of the working matrix are
//! rotated until mutually orthogonal; singular values are the final column
//! norms. Small singular values come out with absolute accuracy near machine
//! epsilon, which the realignment criterion relies on.

use super::eig::{complete_basis, MAX_SWEEPS};
use super::matrix::{inner, CMatrix, C64, ZERO};
use crate::error::{Error, Result};

/// Column pairs count as orthogonal below `rows * eps` relative overlap.
const ORTHOGONALITY_EPS: f64 = f64::EPSILON;
/// Singular values at or below this (relative to the largest) get completed
/// singular vectors rather than normalized residue.
const RANK_TOL: f64 = 1e-13;

/// Thin SVD `A = sum_k s_k u_k v_k^dagger` with `k = min(rows, cols)`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// Descending, nonnegative.
    pub singular_values: Vec<f64>,
    pub u: Vec<Vec<C64>>,
    pub v: Vec<Vec<C64>>,
}

impl Svd {
    pub fn reconstruct(&self) -> CMatrix {
        let m = self.u.first().map_or(0, Vec::len);
        let n = self.v.first().map_or(0, Vec::len);
        let mut out = CMatrix::zeros(m, n);
        for ((s, u), v) in self.singular_values.iter().zip(&self.u).zip(&self.v) {
            for i in 0..m {
                let ui = u[i] * s;
                for j in 0..n {
                    out[(i, j)] += ui * v[j].conj();
                }
            }
        }
        out
    }
}

pub fn svd(a: &CMatrix) -> Result<Svd> {
    if a.rows() < a.cols() {
        let t = svd_tall(&a.adjoint())?;
        return Ok(Svd {
            singular_values: t.singular_values,
            u: t.v,
            v: t.u,
        });
    }
    svd_tall(a)
}

fn svd_tall(a: &CMatrix) -> Result<Svd> {
    let (m, n) = (a.rows(), a.cols());
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| a.column(j)).collect();
    let mut vcols: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mut e = vec![ZERO; n];
            e[j] = C64::new(1.0, 0.0);
            e
        })
        .collect();

    let ortho_tol = ORTHOGONALITY_EPS * m.max(1) as f64;
    let scale: f64 = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>())
        .fold(0.0, f64::max);
    // columns below this squared norm are rounding residue
    let negligible = scale * f64::EPSILON * f64::EPSILON;
    let mut converged = n < 2;
    let mut worst = 0.0_f64;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        worst = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma = inner(&cols[p], &cols[q]);
                let g = gamma.norm();
                if g == 0.0
                    || alpha.min(beta) <= negligible
                    || g <= ortho_tol * (alpha * beta).sqrt()
                {
                    continue;
                }
                worst = worst.max(g / (alpha * beta).sqrt());
                rotated = true;
                let ec = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut cols, p, q, c, s, ec);
                rotate_pair(&mut vcols, p, q, c, s, ec);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            sweeps: MAX_SWEEPS,
            off: worst,
        });
    }

    let norms: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]).then(i.cmp(&j)));
    let smax = norms.iter().cloned().fold(0.0, f64::max);
    let cutoff = RANK_TOL * smax.max(f64::MIN_POSITIVE);

    let mut singular_values = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for &k in &order {
        singular_values.push(norms[k]);
        v.push(vcols[k].clone());
        if norms[k] > cutoff {
            u.push(cols[k].iter().map(|z| z / norms[k]).collect());
        }
    }
    let u = complete_basis(u, m);
    Ok(Svd {
        singular_values,
        u: u.into_iter().take(n).collect(),
        v,
    })
}

fn rotate_pair(cols: &mut [Vec<C64>], p: usize, q: usize, c: f64, s: f64, ec: C64) {
    let (left, right) = cols.split_at_mut(q);
    let (cp, cq) = (&mut left[p], &mut right[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let yt = *y * ec;
        let nx = *x * c - yt * s;
        let ny = *x * s + yt * c;
        *x = nx;
        *y = ny;
    }
}
