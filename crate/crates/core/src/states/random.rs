//! Seeded sampling of states, unitaries and measurements.
//!
//! All samplers draw from a caller-owned [`StateRng`], which is ChaCha8
//! seeded through `SeedableRng::seed_from_u64`. The ChaCha stream is specified
//! independently of platform and word size, so a seed pins the output bytes.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::{DensityMatrix, Ket, Povm};
use crate::error::Result;
use crate::qlinalg::{complete_basis, hermitian_eig, kron_vec, CMatrix, C64};

pub type StateRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> StateRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-random unit vector in `C^d`.
pub fn random_local_pure<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<C64> {
    let mut v: Vec<C64> = (0..d).map(|_| gaussian(rng)).collect();
    crate::qlinalg::normalize(&mut v);
    v
}

/// Haar-random pure state on `C^dA (x) C^dB`.
pub fn random_pure<R: Rng + ?Sized>(dims: (usize, usize), rng: &mut R) -> Ket {
    Ket::normalized(random_local_pure(dims.0 * dims.1, rng), dims)
        .expect("Gaussian vectors are nonzero almost surely")
}

/// Full-rank Ginibre state `G G^dagger / Tr(G G^dagger)`.
pub fn random_density<R: Rng + ?Sized>(dims: (usize, usize), rng: &mut R) -> DensityMatrix {
    random_density_with_rank(dims, dims.0 * dims.1, rng)
}

pub fn random_density_with_rank<R: Rng + ?Sized>(
    dims: (usize, usize),
    rank: usize,
    rng: &mut R,
) -> DensityMatrix {
    let n = dims.0 * dims.1;
    let g = ginibre(n, rank.max(1), rng);
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::from_trusted(m.scale_re(1.0 / tr), dims)
}

/// Convex mixture of `k_terms` random pure product states with flat Dirichlet
/// weights; `None` uses `2 * dA * dB` terms.
pub fn random_separable<R: Rng + ?Sized>(
    dims: (usize, usize),
    k_terms: Option<usize>,
    rng: &mut R,
) -> DensityMatrix {
    let k = k_terms.unwrap_or(2 * dims.0 * dims.1).max(1);
    let weights: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = weights.iter().sum();
    let n = dims.0 * dims.1;
    let mut m = CMatrix::zeros(n, n);
    for w in weights {
        let a = random_local_pure(dims.0, rng);
        let b = random_local_pure(dims.1, rng);
        let prod = kron_vec(&a, &b);
        m = &m + &CMatrix::projector(&prod).scale_re(w / total);
    }
    DensityMatrix::from_trusted(m, dims)
}

/// Haar-random unitary: Gram-Schmidt on Ginibre columns.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(d, d, rng);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut w = g.column(j);
        for _ in 0..2 {
            for b in &cols {
                let proj = crate::qlinalg::inner(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= bi * proj;
                }
            }
        }
        crate::qlinalg::normalize(&mut w);
        cols.push(w);
    }
    let cols = complete_basis(cols, d);
    CMatrix::from_columns(&cols)
}

/// Random full-rank POVM: `S^{-1/2} A_k S^{-1/2}` with Wishart `A_k`.
pub fn random_povm<R: Rng + ?Sized>(dim: usize, outcomes: usize, rng: &mut R) -> Result<Povm> {
    let raw: Vec<CMatrix> = (0..outcomes)
        .map(|_| {
            let g = ginibre(dim, dim, rng);
            &g * &g.adjoint()
        })
        .collect();
    let mut sum = CMatrix::zeros(dim, dim);
    for a in &raw {
        sum = &sum + a;
    }
    let eig = hermitian_eig(&sum)?;
    let mut inv_sqrt = CMatrix::zeros(dim, dim);
    for (lam, v) in eig.eigenvalues.iter().zip(&eig.eigenvectors) {
        let p = CMatrix::projector(v).scale_re(1.0 / lam.sqrt());
        inv_sqrt = &inv_sqrt + &p;
    }
    let mut elements: Vec<CMatrix> = raw
        .iter()
        .map(|a| (&(&inv_sqrt * a) * &inv_sqrt).hermitian_part())
        .collect();
    // push the rounding residue into the last element
    let mut total = CMatrix::zeros(dim, dim);
    for e in &elements[..outcomes - 1] {
        total = &total + e;
    }
    let last = &CMatrix::identity(dim) - &total;
    elements[outcomes - 1] = last.hermitian_part();
    let labels = (0..outcomes).map(|k| k.to_string()).collect();
    Povm::new(elements, labels)
}
