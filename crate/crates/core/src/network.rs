//! Two-source network without inputs for Bob: `S1 -> A1 B1`, `S2 -> A2 B2`.
//! Alice measures `A1 A2` with one of several POVMs, Bob measures `B1 B2` once.
//! All joint operators use the ordering `A1 A2 (x) B1 B2`.

use serde::Serialize;

use crate::criteria::witness_from_eta;
use crate::error::{Error, Result};
use crate::qlinalg::{hermitian_eig, kron, permute_subsystems, CMatrix, C64, ZERO};
use crate::states::{bell_basis, bell_label, max_entangled, DensityMatrix, OperatorFile, Povm};
use crate::tol;
use crate::witnesses::{eval_witness, CorrelationTable, MeasurementFile, Provenance, WitnessSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    rho1: DensityMatrix,
    rho2: DensityMatrix,
    alice: Vec<Povm>,
    bob: Povm,
}

impl Scenario {
    pub fn new(
        rho1: DensityMatrix,
        rho2: DensityMatrix,
        alice: Vec<Povm>,
        bob: Povm,
    ) -> Result<Self> {
        let (a1, b1) = rho1.dims();
        let (a2, b2) = rho2.dims();
        if let Some(p) = alice.iter().find(|p| p.dim() != a1 * a2) {
            return Err(Error::DimensionMismatch(format!(
                "Alice POVM on dimension {} but A1 A2 has dimension {}",
                p.dim(),
                a1 * a2
            )));
        }
        if bob.dim() != b1 * b2 {
            return Err(Error::DimensionMismatch(format!(
                "Bob POVM on dimension {} but B1 B2 has dimension {}",
                bob.dim(),
                b1 * b2
            )));
        }
        if alice.is_empty() {
            return Err(Error::InvalidPovm(
                "Alice needs at least one setting".into(),
            ));
        }
        Ok(Self {
            rho1,
            rho2,
            alice,
            bob,
        })
    }

    pub fn rho1(&self) -> &DensityMatrix {
        &self.rho1
    }

    pub fn rho2(&self) -> &DensityMatrix {
        &self.rho2
    }

    pub fn alice(&self) -> &[Povm] {
        &self.alice
    }

    pub fn bob(&self) -> &Povm {
        &self.bob
    }
}

#[derive(Serialize)]
struct ScenarioFile {
    rho1: OperatorFile,
    rho2: OperatorFile,
    alice: Vec<MeasurementFile>,
    bob: MeasurementFile,
}

impl Serialize for Scenario {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let op = |r: &DensityMatrix| OperatorFile {
            dims: [r.dims().0, r.dims().1],
            matrix: Some(crate::states::matrix_to_json(r.matrix())),
            vector: None,
        };
        ScenarioFile {
            rho1: op(&self.rho1),
            rho2: op(&self.rho2),
            alice: self.alice.iter().map(MeasurementFile::from).collect(),
            bob: MeasurementFile::from(&self.bob),
        }
        .serialize(s)
    }
}

/// `rho1 (x) rho2` reordered from `A1 B1 A2 B2` to `A1 A2 B1 B2`.
pub fn permute_to_scenario(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<CMatrix> {
    let (a1, b1) = rho1.dims();
    let (a2, b2) = rho2.dims();
    let joint = kron(rho1.matrix(), rho2.matrix());
    permute_subsystems(&joint, &[a1, b1, a2, b2], &[0, 2, 1, 3])
}

/// Unnormalized Alice state `Tr_{B1 B2}[(I (x) N) rho_perm]` without forming
/// the joint operator.
fn conditional_state(rho1: &DensityMatrix, rho2: &DensityMatrix, n: &CMatrix) -> CMatrix {
    let (a1, b1) = rho1.dims();
    let (a2, b2) = rho2.dims();
    let r1 = rho1.matrix();
    let r2 = rho2.matrix();
    let nb = b1 * b2;
    // y[(x1, x1'), b2', b2] = sum_{b1, b1'} N[(b1' b2'), (b1 b2)] r1[(x1 b1), (x1' b1')]
    let mut y = vec![ZERO; a1 * a1 * b2 * b2];
    for x1 in 0..a1 {
        for x1p in 0..a1 {
            for q1 in 0..b1 {
                for q1p in 0..b1 {
                    let r = r1[(x1 * b1 + q1, x1p * b1 + q1p)];
                    if r == ZERO {
                        continue;
                    }
                    for q2p in 0..b2 {
                        let row = q1p * b2 + q2p;
                        let base = ((x1 * a1 + x1p) * b2 + q2p) * b2;
                        for q2 in 0..b2 {
                            y[base + q2] += n[(row, q1 * b2 + q2)] * r;
                        }
                    }
                }
            }
        }
    }
    debug_assert_eq!(n.rows(), nb);
    let na = a1 * a2;
    let mut out = CMatrix::zeros(na, na);
    for x1 in 0..a1 {
        for x1p in 0..a1 {
            let yb = &y[(x1 * a1 + x1p) * b2 * b2..(x1 * a1 + x1p + 1) * b2 * b2];
            for x2 in 0..a2 {
                for x2p in 0..a2 {
                    let mut acc = ZERO;
                    for q2p in 0..b2 {
                        for q2 in 0..b2 {
                            acc += yb[q2p * b2 + q2] * r2[(x2 * b2 + q2, x2p * b2 + q2p)];
                        }
                    }
                    out[(x1 * a2 + x2, x1p * a2 + x2p)] = acc;
                }
            }
        }
    }
    out
}

fn clip(p: f64) -> f64 {
    if p.abs() < tol::PROBABILITY_DUST {
        0.0
    } else {
        p
    }
}

fn alice_probabilities(povm: &Povm, sigma: &CMatrix) -> Vec<f64> {
    match povm.basis() {
        Some(b) => b.iter().map(|v| sigma.sandwich(v, v).re).collect(),
        None => povm
            .elements()
            .iter()
            .map(|e| e.trace_product(sigma).re)
            .collect(),
    }
}

/// Born-rule table `p(a, b | x) = Tr[(M^a_x (x) N^b) rho_perm]` and Bob's marginal.
pub fn correlations(s: &Scenario) -> CorrelationTable {
    let nb = s.bob.len();
    let mut probabilities: Vec<Vec<Vec<f64>>> = s
        .alice
        .iter()
        .map(|p| vec![vec![0.0; nb]; p.len()])
        .collect();
    let mut bob_marginal = vec![0.0; nb];
    for (b, n) in s.bob.elements().iter().enumerate() {
        let sigma = conditional_state(&s.rho1, &s.rho2, n);
        bob_marginal[b] = clip(sigma.trace().re);
        for (x, povm) in s.alice.iter().enumerate() {
            for (a, p) in alice_probabilities(povm, &sigma).into_iter().enumerate() {
                probabilities[x][a][b] = clip(p);
            }
        }
    }
    CorrelationTable {
        probabilities,
        bob_marginal,
    }
}

/// Alice's normalized state after Bob obtains the outcome with effect `N`,
/// and the probability of that outcome.
pub fn swap_postselect(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    bob_element: &CMatrix,
) -> Result<(DensityMatrix, f64)> {
    let nb = rho1.dims().1 * rho2.dims().1;
    if !bob_element.is_square() || bob_element.rows() != nb {
        return Err(Error::DimensionMismatch(format!(
            "Bob effect of size {} on B1 B2 of dimension {nb}",
            bob_element.rows()
        )));
    }
    let eig = hermitian_eig(bob_element)
        .map_err(|_| Error::InvalidPovm("Bob effect is not Hermitian".into()))?;
    let (lo, hi) = (eig.eigenvalues[0], eig.eigenvalues[nb - 1]);
    if lo < -tol::POVM || hi > 1.0 + tol::POVM {
        return Err(Error::InvalidPovm(format!(
            "Bob effect spectrum [{lo:e}, {hi:e}] outside [0, 1]"
        )));
    }
    let sigma = conditional_state(rho1, rho2, bob_element);
    let prob = sigma.trace().re;
    if prob < tol::NULL_EVENT {
        return Err(Error::NullPostselection(prob));
    }
    let state =
        DensityMatrix::from_trusted(sigma.scale_re(1.0 / prob), (rho1.dims().0, rho2.dims().0));
    Ok((state, prob.min(1.0)))
}

/// Bob's measurement in the ideal strategy of a witness: the (rotated)
/// `|phi+_d>` projector for NPT and UNIVERSAL, the rotated conjugate Bell
/// basis for CCN.
pub fn ideal_bob(spec: &WitnessSpec) -> Result<Povm> {
    let d = spec.d();
    let phi = max_entangled(d);
    let id = CMatrix::identity(d);
    match spec.provenance() {
        Provenance::Npt { v, .. } => {
            let rot = kron(v, &id);
            Povm::binary(phi.projector().conjugate_by(&rot.adjoint()))
        }
        Provenance::Ccn { v_prime, .. } => {
            let vectors = bell_basis(d)
                .iter()
                .map(|k| k.amplitudes().iter().map(C64::conj).collect())
                .collect();
            let labels = (0..d * d).map(|k| bell_label(d, k)).collect();
            Ok(Povm::from_basis(vectors, labels)?.conjugated(&kron(v_prime, &id)))
        }
        Provenance::Universal { .. } => Povm::binary(phi.projector()),
    }
}

/// Scenario realizing the quantum value of a witness on source state `rho`
/// (second source `|phi+_d>`), with the closed-form value it should produce.
pub fn ideal_strategy(spec: &WitnessSpec, rho: &DensityMatrix) -> Result<(Scenario, f64)> {
    let d = spec.d();
    if rho.dims() != (d, d) {
        return Err(Error::DimensionMismatch(format!(
            "{} witness for d = {d} applied to a {:?} state",
            spec.family(),
            rho.dims()
        )));
    }
    let phi = max_entangled(d);
    let dd = (d * d) as f64;
    let predicted = match spec.provenance() {
        Provenance::Npt { eta, .. } => {
            let value = rho.expectation(&witness_from_eta(eta));
            if value >= -tol::PPT {
                return Err(Error::FamilyMismatch(format!(
                    "NPT witness is not violated by this state (Tr(W rho) = {value:e})"
                )));
            }
            -value / dd
        }
        Provenance::Ccn { u_prime, v_prime } => rho
            .local_conjugate(u_prime, v_prime)?
            .expectation(&phi.projector()),
        Provenance::Universal { w, .. } => -rho.expectation(w) / dd,
    };
    let bob = ideal_bob(spec)?;
    let scenario = Scenario::new(rho.clone(), phi.density(), spec.alice().to_vec(), bob)?;
    Ok((scenario, predicted))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SourceSlot {
    First,
    Second,
}

/// Witness value with `sep` in the given source slot and `other` in the
/// remaining one.
pub fn separable_source_check(
    spec: &WitnessSpec,
    sep: &DensityMatrix,
    which: SourceSlot,
    other: &DensityMatrix,
    bob: &Povm,
) -> Result<f64> {
    if bob.len() != spec.bob_outcomes() {
        return Err(Error::ShapeMismatch(format!(
            "Bob POVM with {} outcomes for a witness expecting {}",
            bob.len(),
            spec.bob_outcomes()
        )));
    }
    let (rho1, rho2) = match which {
        SourceSlot::First => (sep.clone(), other.clone()),
        SourceSlot::Second => (other.clone(), sep.clone()),
    };
    let s = Scenario::new(rho1, rho2, spec.alice().to_vec(), bob.clone())?;
    eval_witness(spec, &correlations(&s))
}

/// Evaluates a witness on a scenario.
pub fn simulate(spec: &WitnessSpec, s: &Scenario) -> Result<(CorrelationTable, f64)> {
    let table = correlations(s);
    let value = eval_witness(spec, &table)?;
    Ok((table, value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::{npt_entanglement_witness, ppt_test};
    use crate::qlinalg::partial_trace;
    use crate::qlinalg::Subsystem;
    use crate::states::{
        correlated_mixture, isotropic, random_density, random_povm, random_separable,
        random_unitary, seeded_rng,
    };
    use crate::witnesses::{build_ccn_witness, build_npt_witness, build_universal_witness};
    use rand::Rng;

    #[test]
    fn permutation_index_probes() {
        let mut rng = seeded_rng(1);
        let r1 = random_density((2, 2), &mut rng);
        let r2 = random_density((2, 2), &mut rng);
        let p = permute_to_scenario(&r1, &r2).unwrap();
        let joint = kron(r1.matrix(), r2.matrix());
        for _ in 0..10 {
            let idx: Vec<usize> = (0..8).map(|_| rng.random_range(0..2)).collect();
            let (a1, a2, b1, b2) = (idx[0], idx[1], idx[2], idx[3]);
            let (c1, c2, e1, e2) = (idx[4], idx[5], idx[6], idx[7]);
            let row = ((a1 * 2 + a2) * 2 + b1) * 2 + b2;
            let col = ((c1 * 2 + c2) * 2 + e1) * 2 + e2;
            let src_row = ((a1 * 2 + b1) * 2 + a2) * 2 + b2;
            let src_col = ((c1 * 2 + e1) * 2 + c2) * 2 + e2;
            assert_eq!(p[(row, col)], joint[(src_row, src_col)]);
        }
        assert!((p.trace() - C64::new(1.0, 0.0)).norm() < 1e-14);
        let back = permute_subsystems(&p, &[2, 2, 2, 2], &[0, 2, 1, 3]).unwrap();
        assert!(back.max_abs_diff(&joint) < 1e-14);
        // A1 A2 marginal is rho1_A (x) rho2_A
        let alice = partial_trace(&p, (4, 4), Subsystem::B).unwrap();
        let want = kron(&r1.reduced(Subsystem::A), &r2.reduced(Subsystem::A));
        assert!(alice.max_abs_diff(&want) < 1e-14);
    }

    #[test]
    fn conditional_state_matches_dense_contraction() {
        let mut rng = seeded_rng(2);
        for (a1, b1, a2, b2) in [(2, 2, 2, 2), (2, 3, 3, 2), (3, 2, 2, 3)] {
            let r1 = random_density((a1, b1), &mut rng);
            let r2 = random_density((a2, b2), &mut rng);
            let n = random_povm(b1 * b2, 2, &mut rng).unwrap().elements()[0].clone();
            let p = permute_to_scenario(&r1, &r2).unwrap();
            let dense = &kron(&CMatrix::identity(a1 * a2), &n) * &p;
            let want = partial_trace(&dense, (a1 * a2, b1 * b2), Subsystem::B).unwrap();
            let got = conditional_state(&r1, &r2, &n);
            assert!(got.max_abs_diff(&want) < 1e-13);
        }
    }

    #[test]
    fn white_noise_factorizes() {
        let mut rng = seeded_rng(3);
        let w = DensityMatrix::maximally_mixed((2, 2));
        let alice = random_povm(4, 3, &mut rng).unwrap();
        let bob = random_povm(4, 2, &mut rng).unwrap();
        let s = Scenario::new(w.clone(), w, vec![alice.clone()], bob.clone()).unwrap();
        let t = correlations(&s);
        t.validate().unwrap();
        for (a, m) in alice.elements().iter().enumerate() {
            for (b, n) in bob.elements().iter().enumerate() {
                let want = m.trace().re * n.trace().re / 16.0;
                assert!((t.probabilities[0][a][b] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn swap_phi_plus_teleports() {
        for d in 2..5 {
            let phi = max_entangled(d);
            let (state, prob) =
                swap_postselect(&phi.density(), &phi.density(), &phi.projector()).unwrap();
            assert!((prob - 1.0 / (d * d) as f64).abs() < 1e-14);
            assert!(state.matrix().max_abs_diff(&phi.projector()) < 1e-13);
        }
    }

    #[test]
    fn postselection_decomposes_alice_marginal() {
        let mut rng = seeded_rng(4);
        let r1 = random_density((2, 2), &mut rng);
        let r2 = random_density((2, 2), &mut rng);
        let mut total = CMatrix::zeros(4, 4);
        let mut probs = 0.0;
        for k in bell_basis(2) {
            let (s, p) = swap_postselect(&r1, &r2, &k.projector()).unwrap();
            total = &total + &s.matrix().scale_re(p);
            probs += p;
        }
        assert!((probs - 1.0).abs() < 1e-12);
        let want = kron(&r1.reduced(Subsystem::A), &r2.reduced(Subsystem::A));
        assert!(total.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn null_postselection_is_an_error() {
        let mut z = vec![ZERO; 4];
        z[0] = C64::new(1.0, 0.0);
        let zero = crate::states::Ket::new(z, (2, 2)).unwrap().density();
        let mut n = CMatrix::zeros(4, 4);
        n[(1, 1)] = C64::new(1.0, 0.0);
        n[(2, 2)] = C64::new(1.0, 0.0);
        // |00> (x) |00> has no weight on B1 B2 = |01>, |10>
        assert!(matches!(
            swap_postselect(&zero, &zero, &n),
            Err(Error::NullPostselection(_))
        ));
    }

    #[test]
    fn separable_source_gives_ppt_alice_state() {
        let mut rng = seeded_rng(5);
        for _ in 0..20 {
            let sep = random_separable((3, 3), None, &mut rng);
            let other = random_density((3, 3), &mut rng);
            let bob = random_povm(9, 2, &mut rng).unwrap();
            let (s, _) = swap_postselect(&sep, &other, &bob.elements()[0]).unwrap();
            assert!(ppt_test(&s).min_eigenvalue >= -1e-9);
        }
    }

    #[test]
    fn npt_ideal_on_phi_plus_qubit() {
        let rho = max_entangled(2).density();
        let spec = build_npt_witness(&rho).unwrap();
        let (s, predicted) = ideal_strategy(&spec, &rho).unwrap();
        assert!((predicted - 0.125).abs() < 1e-12);
        let (t, value) = simulate(&spec, &s).unwrap();
        t.validate().unwrap();
        assert!((value - predicted).abs() < 1e-10);
    }

    #[test]
    fn npt_ideal_on_random_states() {
        let mut rng = seeded_rng(6);
        for d in [2, 3] {
            let mut done = 0;
            while done < 5 {
                let rho = random_density((d, d), &mut rng);
                let Ok(spec) = build_npt_witness(&rho) else {
                    continue;
                };
                done += 1;
                let (s, predicted) = ideal_strategy(&spec, &rho).unwrap();
                let min = ppt_test(&rho).min_eigenvalue;
                assert!((predicted + min / (d * d) as f64).abs() < 1e-12);
                let (_, value) = simulate(&spec, &s).unwrap();
                assert!(
                    (value - predicted).abs() < 1e-9,
                    "d={d}: {value} vs {predicted}"
                );
            }
        }
    }

    #[test]
    fn ccn_ideal_phi_plus() {
        for d in 2..5 {
            let id = CMatrix::identity(d);
            let spec = build_ccn_witness(d, &id, &id).unwrap();
            let (s, predicted) = ideal_strategy(&spec, &max_entangled(d).density()).unwrap();
            assert!((predicted - 1.0).abs() < 1e-12);
            let (t, value) = simulate(&spec, &s).unwrap();
            t.validate().unwrap();
            assert!((value - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn ccn_ideal_with_local_unitaries() {
        let mut rng = seeded_rng(7);
        for d in [2, 3] {
            let weights: Vec<f64> = (0..d).map(|k| 1.0 + k as f64).collect();
            let aligned = correlated_mixture(d, 0.7, &weights).unwrap();
            let u = random_unitary(d, &mut rng);
            let v = random_unitary(d, &mut rng);
            // rho = (U (x) V)^dagger aligned (U (x) V), so U' = U, V' = V realign it
            let rho = aligned.local_conjugate(&u.adjoint(), &v.adjoint()).unwrap();
            let spec = build_ccn_witness(d, &u, &v).unwrap();
            let (s, predicted) = ideal_strategy(&spec, &rho).unwrap();
            let want = aligned.expectation(&max_entangled(d).projector());
            assert!((predicted - want).abs() < 1e-12);
            let (_, value) = simulate(&spec, &s).unwrap();
            assert!((value - predicted).abs() < 1e-10, "{value} vs {predicted}");
        }
    }

    #[test]
    fn ccn_isotropic_response_is_affine() {
        for d in [2, 3] {
            let id = CMatrix::identity(d);
            let spec = build_ccn_witness(d, &id, &id).unwrap();
            for k in 0..=5 {
                let v = k as f64 / 5.0;
                let rho = isotropic(d, v).unwrap();
                let (s, _) = ideal_strategy(&spec, &rho).unwrap();
                let (_, value) = simulate(&spec, &s).unwrap();
                let want = v + (1.0 - v) / (d * d) as f64;
                assert!((value - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn universal_ideal_matches_closed_form() {
        let mut rng = seeded_rng(8);
        for d in [2, 3] {
            let rho = loop {
                let r = random_density((d, d), &mut rng);
                if ppt_test(&r).is_npt {
                    break r;
                }
            };
            let w = npt_entanglement_witness(&rho).unwrap();
            let spec = build_universal_witness(&w, d).unwrap();
            let (s, predicted) = ideal_strategy(&spec, &rho).unwrap();
            assert!(predicted > 0.0);
            let (t, value) = simulate(&spec, &s).unwrap();
            assert!((t.bob_marginal[0] - 1.0 / (d * d) as f64).abs() < 1e-12);
            assert!((value - predicted).abs() < 1e-9);
        }
    }

    #[test]
    fn ccn_separable_first_source() {
        let mut rng = seeded_rng(9);
        let id = CMatrix::identity(2);
        let spec = build_ccn_witness(2, &id, &id).unwrap();
        let phi = max_entangled(2);
        let bell: Vec<Vec<C64>> = bell_basis(2)
            .iter()
            .map(|k| k.amplitudes().iter().map(C64::conj).collect())
            .collect();
        let labels = (0..4).map(|k| bell_label(2, k)).collect();
        let bob = Povm::from_basis(bell, labels).unwrap();
        for _ in 0..20 {
            let sep = random_separable((2, 2), None, &mut rng);
            let v = separable_source_check(&spec, &sep, SourceSlot::First, &phi.density(), &bob)
                .unwrap();
            assert!(v <= 0.5 + 1e-9);
        }
        let white = DensityMatrix::maximally_mixed((2, 2));
        let v = separable_source_check(&spec, &white, SourceSlot::First, &white, &bob).unwrap();
        assert!((v - 0.25).abs() < 1e-14);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let r = max_entangled(2).density();
        let alice = Povm::binary(CMatrix::from_real_diag(&[1.0; 9]).scale_re(0.5)).unwrap();
        let bob = Povm::binary(CMatrix::identity(4).scale_re(0.5)).unwrap();
        assert!(matches!(
            Scenario::new(r.clone(), r, vec![alice], bob),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
