use serde::{Deserialize, Serialize};

use super::{reality_residue, Family, Provenance, WitnessSpec};
use crate::error::{Error, Result};
use crate::qlinalg::{
    hw_element, hw_expand, hw_reconstruct, label_order, omega, unitary_eig, CMatrix,
    HwCoefficients, C64, ZERO,
};
use crate::states::Povm;
use crate::tol;

/// Labels of order `D` in `Z_D x Z_D`, one per cyclic subgroup, picked
/// greedily in lexicographic order, plus the index of the generator whose
/// subgroup first contains each label (`None` for `(0, 0)`).
pub fn universal_generators(big_d: usize) -> (Vec<(usize, usize)>, Vec<Option<usize>>) {
    let mut gens = Vec::new();
    let mut owner: Vec<Option<usize>> = vec![None; big_d * big_d];
    for i in 0..big_d {
        for j in 0..big_d {
            if label_order(big_d, i, j) != big_d || owner[i * big_d + j].is_some() {
                continue;
            }
            let g = gens.len();
            gens.push((i, j));
            for k in 1..big_d {
                let l = ((k * i) % big_d) * big_d + (k * j) % big_d;
                if owner[l].is_none() {
                    owner[l] = Some(g);
                }
            }
        }
    }
    debug_assert!(owner.iter().skip(1).all(Option::is_some));
    (gens, owner)
}

/// Witness for any entangled state detected by the Hermitian operator `W` on
/// `C^d (x) C^d`. Alice measures the eigenbasis of one Heisenberg-Weyl
/// element per cyclic subgroup of labels; every other element is diagonal in
/// one of these bases, so `W = lambda_00 I + sum_g W_g` with `W_g` diagonal in
/// setting `g`, and `c(g, a) = -<v_ga|W_g|v_ga>` makes the product-state
/// functional equal `-Tr(W sigma)`.
pub fn build_universal_witness(w: &CMatrix, d: usize) -> Result<WitnessSpec> {
    let big = d * d;
    if d < 2 || !w.is_square() || w.rows() != big {
        return Err(Error::DimensionMismatch(format!(
            "universal witness for d = {d} needs a {big}x{big} operator, got {}x{}",
            w.rows(),
            w.cols()
        )));
    }
    let defect = w.hermiticity_defect();
    if defect > tol::HERMITIAN {
        return Err(Error::NotHermitian(defect));
    }
    let w = w.hermitian_part();
    let lambda = hw_expand(&w)?;
    let (gens, owner) = universal_generators(big);

    let mut alice = Vec::with_capacity(gens.len());
    let mut table = Vec::with_capacity(gens.len());
    let mut raw: Vec<C64> = vec![lambda.table[0]];
    for (g, &(gi, gj)) in gens.iter().enumerate() {
        let mut part = HwCoefficients {
            d: big,
            table: vec![ZERO; big * big],
        };
        for (l, o) in owner.iter().enumerate() {
            if *o == Some(g) {
                part.table[l] = lambda.table[l];
            }
        }
        let w_g = hw_reconstruct(&part);
        let pairs = unitary_eig(&hw_element(big, gi, gj))?;
        let mut rows = Vec::with_capacity(big);
        let mut vectors = Vec::with_capacity(big);
        for (_, v) in pairs {
            let c = -w_g.sandwich(&v, &v);
            raw.push(c);
            rows.push(vec![c.re, 0.0]);
            vectors.push(v);
        }
        let labels = (0..big).map(|a| a.to_string()).collect();
        alice.push(Povm::from_basis(vectors, labels)?);
        table.push(rows);
    }
    let reality = reality_residue(raw);
    if reality > tol::COEFFICIENT_REALITY {
        return Err(Error::ComplexCoefficients(reality));
    }
    let marginal = -lambda.table[0].re;

    let provisional = WitnessSpec::new(
        Family::Universal,
        d,
        alice,
        2,
        table,
        marginal,
        0.0,
        Provenance::Universal {
            w: w.clone(),
            lambda: lambda.clone(),
            generators: gens.clone(),
            gamma_residual: f64::NAN,
            reality_residue: reality,
        },
    )?;
    let gamma = gamma_identity_residual(&provisional, &w);
    if gamma.is_nan() || gamma >= tol::GAMMA_IDENTITY {
        return Err(Error::IdentityVerification(gamma));
    }
    let mut spec = provisional;
    spec.provenance = Provenance::Universal {
        w,
        lambda,
        generators: gens,
        gamma_residual: gamma,
        reality_residue: reality,
    };
    Ok(spec)
}

/// `max_L |Tr(B_L^dagger (c00 I + sum c(x,a,0) M^a_x + W))|` over the full
/// Heisenberg-Weyl operator basis; zero iff the product-state functional is
/// `-Tr(W sigma)` for every unit-trace `sigma`.
pub fn gamma_identity_residual(spec: &WitnessSpec, w: &CMatrix) -> f64 {
    let n = w.rows();
    let mut total = &spec.outcome_operator(0) + w;
    for k in 0..n {
        total[(k, k)] += C64::new(spec.marginal(), 0.0);
    }
    hw_residual(&total)
}

fn hw_residual(m: &CMatrix) -> f64 {
    let n = m.rows();
    match hw_expand(m) {
        Ok(c) => c.table.iter().map(|z| z.norm()).fold(0.0, f64::max) * n as f64,
        Err(_) => f64::INFINITY,
    }
}

/// Diagnostics for the `d^2 + 1` observable family `{Z, w^(k(D-1)/2) X Z^k}`
/// with coefficients `c(a, 01) = -sum_j lambda_{0,j} w^(aj)` and
/// `c(a, 1k) = -sum_j lambda_{k, kj mod D} w^(aj)`, `D = d^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatMapReport {
    pub settings: usize,
    /// Identity residual over the Heisenberg-Weyl basis using real parts.
    pub gamma_residual: f64,
    pub imaginary_residue: f64,
    /// Largest distance of an observable eigenvalue from its nearest `w^a`.
    pub eigenvalue_mismatch: f64,
}

pub fn compat_map_report(w: &CMatrix, d: usize) -> Result<CompatMapReport> {
    let big = d * d;
    if !w.is_square() || w.rows() != big {
        return Err(Error::DimensionMismatch(format!(
            "compatibility map for d = {d} needs a {big}x{big} operator"
        )));
    }
    let lambda = hw_expand(&w.hermitian_part())?;
    let om = omega(big);
    let mut total = w.hermitian_part();
    for k in 0..big {
        total[(k, k)] -= lambda.table[0];
    }
    let mut imaginary: f64 = lambda.table[0].im.abs();
    let mut mismatch: f64 = 0.0;
    // setting 01 is Z = B_{0,1}; settings 1k are B_{1,k}
    let settings: Vec<Option<usize>> = std::iter::once(None).chain((0..big).map(Some)).collect();
    for s in &settings {
        let obs = match s {
            None => hw_element(big, 0, 1),
            Some(k) => hw_element(big, 1, *k),
        };
        let index = |j: usize| match s {
            None => (0, j),
            Some(k) => (*k, (k * j) % big),
        };
        for (mu, v) in unitary_eig(&obs)? {
            let turns =
                mu.arg().rem_euclid(std::f64::consts::TAU) * big as f64 / std::f64::consts::TAU;
            let a = (turns.round() as usize) % big;
            mismatch = mismatch.max((mu - om.powu(a as u32)).norm());
            let mut c = ZERO;
            for j in 1..big {
                let (p, q) = index(j);
                c -= lambda.get(p, q) * om.powu((a * j) as u32);
            }
            imaginary = imaginary.max(c.im.abs());
            let p = CMatrix::projector(&v).scale_re(c.re);
            total = &total + &p;
        }
    }
    Ok(CompatMapReport {
        settings: settings.len(),
        gamma_residual: hw_residual(&total),
        imaginary_residue: imaginary,
        eigenvalue_mismatch: mismatch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::npt_entanglement_witness;
    use crate::qlinalg::kron_vec;
    use crate::states::{max_entangled, random_density, random_local_pure, seeded_rng};

    #[test]
    fn generator_counts_follow_cyclic_subgroups() {
        for (d, want) in [(2, 6), (3, 12), (4, 24), (5, 30), (6, 72)] {
            let (gens, owner) = universal_generators(d * d);
            assert_eq!(gens.len(), want, "d = {d}");
            assert!(owner[0].is_none());
            assert!(owner[1..].iter().all(Option::is_some));
        }
    }

    #[test]
    fn identity_witness() {
        let spec = build_universal_witness(&CMatrix::identity(4), 2).unwrap();
        assert!((spec.marginal() + 1.0).abs() < 1e-15);
        assert!(spec
            .table()
            .iter()
            .flatten()
            .flatten()
            .all(|c| c.abs() < 1e-14));
        assert_eq!(spec.sohs_bound(), 0.0);
    }

    #[test]
    fn phi_plus_npt_witness_builds() {
        let w = npt_entanglement_witness(&max_entangled(2).density()).unwrap();
        let spec = build_universal_witness(&w, 2).unwrap();
        let Provenance::Universal {
            gamma_residual,
            reality_residue,
            ..
        } = spec.provenance()
        else {
            unreachable!()
        };
        assert!(*gamma_residual < 1e-8);
        assert!(*reality_residue < 1e-9);
        for x in 0..spec.settings() {
            assert!(spec.alice()[x].completeness_defect() < 1e-10);
        }
    }

    #[test]
    fn gamma_identity_on_product_states() {
        let mut rng = seeded_rng(31);
        for d in [2, 3] {
            let w = loop {
                if let Ok(w) = npt_entanglement_witness(&random_density((d, d), &mut rng)) {
                    break w;
                }
            };
            let spec = build_universal_witness(&w, d).unwrap();
            for _ in 0..20 {
                let psi = kron_vec(
                    &random_local_pure(d, &mut rng),
                    &random_local_pure(d, &mut rng),
                );
                let mut gamma = spec.marginal();
                for (x, povm) in spec.alice().iter().enumerate() {
                    for (a, p) in povm.probabilities_pure(&psi).into_iter().enumerate() {
                        gamma += spec.coefficient(x, a, 0) * p;
                    }
                }
                assert!((gamma + w.expectation(&psi)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = CMatrix::identity(4);
        m[(0, 1)] = C64::new(0.5, 0.0);
        assert!(matches!(
            build_universal_witness(&m, 2),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn compat_map_reports_residual() {
        let w = npt_entanglement_witness(&max_entangled(2).density()).unwrap();
        let r = compat_map_report(&w, 2).unwrap();
        assert_eq!(r.settings, 5);
        assert!(r.gamma_residual.is_finite());
        // W = I: setting k = 0 reads lambda_{0,0} at every j, leaving
        // -sum_{j>=1} X^j, whose residual is exactly D
        let r = compat_map_report(&CMatrix::identity(9), 3).unwrap();
        assert!((r.gamma_residual - 9.0).abs() < 1e-9, "{r:?}");
        assert!(r.eigenvalue_mismatch < 1e-12);
    }
}
