use super::{Family, Provenance, WitnessSpec};
use crate::error::{Error, Result};
use crate::qlinalg::{kron, CMatrix};
use crate::states::{bell_basis, bell_label, Povm};
use crate::tol;

/// Witness for states in aligned form after `U' (x) V'`: Alice performs the
/// rotated Bell measurement and the witness sums the matching outcomes
/// `p(l, l)`. Bounded by `1/d` under separable hidden-state models.
pub fn build_ccn_witness(d: usize, u_prime: &CMatrix, v_prime: &CMatrix) -> Result<WitnessSpec> {
    if d < 2 {
        return Err(Error::ParameterOutOfRange(format!(
            "CCN witness needs d >= 2, got {d}"
        )));
    }
    for m in [u_prime, v_prime] {
        if !m.is_square() || m.rows() != d {
            return Err(Error::DimensionMismatch(format!(
                "local unitary of size {}x{} for d = {d}",
                m.rows(),
                m.cols()
            )));
        }
        m.ensure_unitary(tol::UNITARY)?;
    }
    let n = d * d;
    let vectors = bell_basis(d)
        .into_iter()
        .map(|k| k.amplitudes().to_vec())
        .collect();
    let labels = (0..n).map(|k| bell_label(d, k)).collect();
    let rotation = kron(u_prime, &CMatrix::identity(d));
    let alice = Povm::from_basis(vectors, labels)?.conjugated(&rotation);
    let rows = (0..n)
        .map(|a| (0..n).map(|b| if a == b { 1.0 } else { 0.0 }).collect())
        .collect();
    WitnessSpec::new(
        Family::Ccn,
        d,
        vec![alice],
        n,
        vec![rows],
        0.0,
        1.0 / d as f64,
        Provenance::Ccn {
            u_prime: u_prime.clone(),
            v_prime: v_prime.clone(),
        },
    )
}
