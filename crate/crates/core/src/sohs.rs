//! Bounds under separable outcome-independent hidden-state (SOHS) models.
//!
//! The functional is linear in each hidden state and in Bob's response, so
//! its maximum is attained by pure product states `psi1 (x) psi2` and a
//! deterministic Bob outcome `b*`:
//! `value = c00 [b* = 0] + <psi1 psi2| C_{b*} |psi1 psi2>` with
//! `C_b = sum_{x,a} c(x,a,b) M^a_x`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::Scenario;
use crate::qlinalg::{hermitian_eig, kron_vec, CMatrix, C64, ZERO};
use crate::states::{bell_label, random_local_pure, DensityMatrix, JsonComplex, Povm};
use crate::witnesses::{Family, Provenance, WitnessSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductStrategy {
    #[serde(with = "ket_json")]
    pub psi1: Vec<C64>,
    #[serde(with = "ket_json")]
    pub psi2: Vec<C64>,
    pub bob_response: usize,
}

mod ket_json {
    use super::{JsonComplex, C64};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        crate::states::vector_to_json(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let raw = Vec::<JsonComplex>::deserialize(d)?;
        Ok(crate::states::vector_from_json(&raw))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub value: f64,
    pub strategy: ProductStrategy,
    pub restarts_used: usize,
    /// Iterations of the restart that produced `value`.
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each iteration of the winning restart.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeesawOptions {
    pub restarts: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Restrict Bob to one outcome instead of maximizing over all of them.
    pub fixed_outcome: Option<usize>,
}

impl Default for SeesawOptions {
    fn default() -> Self {
        Self {
            restarts: 32,
            tol: 1e-10,
            max_iter: 500,
            seed: 0,
            fixed_outcome: None,
        }
    }
}

/// The objective in the form the optimizers use.
struct Objective {
    d: usize,
    marginal: f64,
    ops: Vec<CMatrix>,
}

impl Objective {
    fn new(spec: &WitnessSpec) -> Self {
        Self {
            d: spec.d(),
            marginal: spec.marginal(),
            ops: (0..spec.bob_outcomes())
                .map(|b| spec.outcome_operator(b))
                .collect(),
        }
    }

    fn offset(&self, b: usize) -> f64 {
        if b == 0 {
            self.marginal
        } else {
            0.0
        }
    }

    fn value(&self, psi1: &[C64], psi2: &[C64], b: usize) -> f64 {
        self.offset(b) + self.ops[b].expectation(&kron_vec(psi1, psi2))
    }

    /// `sum_{i i'} conj(p1_i) C[(i j), (i' j')] p1_i'` (`first = true`) or the
    /// analogous contraction over the second factor.
    fn reduced(&self, b: usize, fixed: &[C64], first_fixed: bool) -> CMatrix {
        let d = self.d;
        let c = &self.ops[b];
        CMatrix::from_fn(d, d, |r, s| {
            let mut acc = ZERO;
            for i in 0..d {
                for ip in 0..d {
                    let (row, col) = if first_fixed {
                        (i * d + r, ip * d + s)
                    } else {
                        (r * d + i, s * d + ip)
                    };
                    acc += fixed[i].conj() * c[(row, col)] * fixed[ip];
                }
            }
            acc
        })
    }

    fn best_outcome(&self, psi1: &[C64], psi2: &[C64], allowed: &[usize]) -> (usize, f64) {
        let mut best = (allowed[0], f64::NEG_INFINITY);
        for &b in allowed {
            let v = self.value(psi1, psi2, b);
            if v > best.1 {
                best = (b, v);
            }
        }
        best
    }
}

fn top_eigenvector(m: &CMatrix) -> Vec<C64> {
    let eig = hermitian_eig(&m.hermitian_part()).expect("reduced operators are Hermitian");
    eig.eigenvectors.last().cloned().expect("nonempty")
}

/// `c00 [b* = 0] + sum_{x,a} c(x, a, b*) <psi1 psi2| M^a_x |psi1 psi2>`.
pub fn sohs_value(spec: &WitnessSpec, strat: &ProductStrategy) -> Result<f64> {
    let d = spec.d();
    if strat.psi1.len() != d || strat.psi2.len() != d {
        return Err(Error::ShapeMismatch(format!(
            "hidden states of length {} and {} for d = {d}",
            strat.psi1.len(),
            strat.psi2.len()
        )));
    }
    if strat.bob_response >= spec.bob_outcomes() {
        return Err(Error::ShapeMismatch(format!(
            "Bob response {} with {} outcomes",
            strat.bob_response,
            spec.bob_outcomes()
        )));
    }
    let psi = kron_vec(&strat.psi1, &strat.psi2);
    let b = strat.bob_response;
    let mut value = if b == 0 { spec.marginal() } else { 0.0 };
    for (x, povm) in spec.alice().iter().enumerate() {
        for (a, p) in povm.probabilities_pure(&psi).into_iter().enumerate() {
            value += spec.coefficient(x, a, b) * p;
        }
    }
    Ok(value)
}

struct RestartOutcome {
    value: f64,
    strategy: ProductStrategy,
    iterations: usize,
    converged: bool,
    history: Vec<f64>,
}

fn run_restart(
    obj: &Objective,
    allowed: &[usize],
    opts: &SeesawOptions,
    index: usize,
) -> RestartOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(index as u64);
    let d = obj.d;
    let mut psi1 = random_local_pure(d, &mut rng);
    let mut psi2 = random_local_pure(d, &mut rng);
    let (mut b, mut value) = obj.best_outcome(&psi1, &psi2, allowed);
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        psi1 = top_eigenvector(&obj.reduced(b, &psi2, false));
        psi2 = top_eigenvector(&obj.reduced(b, &psi1, true));
        let (nb, nv) = obj.best_outcome(&psi1, &psi2, allowed);
        let gain = nv - value;
        // the exact block updates cannot decrease the objective; guard rounding
        let accepted = nv.max(value);
        history.push(accepted);
        if nv >= value {
            b = nb;
        }
        value = accepted;
        if gain < opts.tol {
            converged = true;
            break;
        }
    }
    RestartOutcome {
        value,
        strategy: ProductStrategy {
            psi1,
            psi2,
            bob_response: b,
        },
        iterations,
        converged,
        history,
    }
}

/// Alternating maximization with seeded Haar restarts. Each restart owns the
/// ChaCha stream `(seed, restart index)`; the best restart wins, ties going to
/// the lowest index, so the result does not depend on scheduling.
pub fn seesaw_bound(spec: &WitnessSpec, opts: &SeesawOptions) -> Result<BoundResult> {
    if opts.restarts == 0 {
        return Err(Error::ParameterOutOfRange(
            "restarts must be at least 1".into(),
        ));
    }
    let allowed: Vec<usize> = match opts.fixed_outcome {
        Some(b) if b >= spec.bob_outcomes() => {
            return Err(Error::ParameterOutOfRange(format!(
                "Bob outcome {b} with {} outcomes",
                spec.bob_outcomes()
            )))
        }
        Some(b) => vec![b],
        None => (0..spec.bob_outcomes()).collect(),
    };
    let obj = Objective::new(spec);
    let outcomes: Vec<RestartOutcome> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| run_restart(&obj, &allowed, opts, r))
        .collect();
    let best = outcomes
        .into_iter()
        .reduce(|a, b| if b.value > a.value { b } else { a })
        .expect("at least one restart");
    Ok(BoundResult {
        value: best.value,
        strategy: best.strategy,
        restarts_used: opts.restarts,
        iterations: best.iterations,
        converged: best.converged,
        history: best.history,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub value: f64,
    pub strategy: ProductStrategy,
    pub points_per_system: usize,
}

fn grid_states(d: usize, res: usize) -> Result<Vec<Vec<C64>>> {
    use std::f64::consts::{FRAC_PI_2, PI, TAU};
    let polar = |k: usize, top: f64| top * k as f64 / (res - 1) as f64;
    let phase = |k: usize| C64::from_polar(1.0, TAU * k as f64 / res as f64);
    match d {
        2 => {
            let mut out = Vec::with_capacity(res * res);
            for i in 0..res {
                let t = polar(i, PI);
                for j in 0..res {
                    out.push(vec![
                        C64::new((t / 2.0).cos(), 0.0),
                        phase(j) * (t / 2.0).sin(),
                    ]);
                }
            }
            Ok(out)
        }
        3 => {
            let mut out = Vec::with_capacity(res.pow(4));
            for i in 0..res {
                let a = polar(i, FRAC_PI_2);
                for j in 0..res {
                    let b = polar(j, FRAC_PI_2);
                    for k in 0..res {
                        for l in 0..res {
                            out.push(vec![
                                C64::new(a.cos(), 0.0),
                                phase(k) * (a.sin() * b.cos()),
                                phase(l) * (a.sin() * b.sin()),
                            ]);
                        }
                    }
                }
            }
            Ok(out)
        }
        _ => Err(Error::GridDimension(d)),
    }
}

/// Exhaustive scan over a grid of pure product states and all Bob outcomes:
/// Bloch angles for `d = 2`, nested hypersphere angles with two phases for
/// `d = 3`. Larger `d` is refused.
pub fn grid_bound(spec: &WitnessSpec, resolution: usize) -> Result<GridResult> {
    let d = spec.d();
    if d > 3 {
        return Err(Error::GridDimension(d));
    }
    if resolution < 8 {
        return Err(Error::ParameterOutOfRange(format!(
            "grid resolution must be at least 8, got {resolution}"
        )));
    }
    let states = grid_states(d, resolution)?;
    let obj = Objective::new(spec);
    let nb = obj.ops.len();
    let best = states
        .par_iter()
        .enumerate()
        .map(|(i1, p1)| {
            let mut best = (f64::NEG_INFINITY, i1, 0usize, 0usize);
            for b in 0..nb {
                let k = obj.reduced(b, p1, true);
                let off = obj.offset(b);
                for (i2, p2) in states.iter().enumerate() {
                    let v = off + k.expectation(p2);
                    if v > best.0 {
                        best = (v, i1, i2, b);
                    }
                }
            }
            best
        })
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX, usize::MAX, usize::MAX),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && (b.1, b.3, b.2) < (a.1, a.3, a.2)) {
                    b
                } else {
                    a
                }
            },
        );
    Ok(GridResult {
        value: best.0,
        strategy: ProductStrategy {
            psi1: states[best.1].clone(),
            psi2: states[best.2].clone(),
            bob_response: best.3,
        },
        points_per_system: states.len(),
    })
}

/// Classically correlated sources `(1/d) sum_k |kk><kk|` (first source
/// rotated by `U'^dagger` on `A1`) with Bob measuring the product basis and
/// reporting the Bell label `(0, k - l mod d)` for outcome `|kl>`. Reaches the
/// CCN bound `1/d` exactly.
pub fn saturating_ccn_scenario(spec: &WitnessSpec) -> Result<Scenario> {
    let Provenance::Ccn { u_prime, .. } = spec.provenance() else {
        return Err(Error::FamilyMismatch(format!(
            "saturating strategy exists for CCN witnesses, got {}",
            spec.family()
        )));
    };
    debug_assert_eq!(spec.family(), Family::Ccn);
    let d = spec.d();
    let n = d * d;
    let mut diag = vec![0.0; n];
    for k in 0..d {
        diag[k * d + k] = 1.0 / d as f64;
    }
    let classical = CMatrix::from_real_diag(&diag);
    let rot = crate::qlinalg::kron(u_prime, &CMatrix::identity(d));
    let rho1 = DensityMatrix::new(classical.conjugate_by(&rot.adjoint()), (d, d))?;
    let rho2 = DensityMatrix::new(classical, (d, d))?;
    let mut elements = vec![vec![0.0; n]; n];
    for k in 0..d {
        for l in 0..d {
            let outcome = (k + d - l) % d;
            elements[outcome][k * d + l] = 1.0;
        }
    }
    let bob = Povm::new(
        elements
            .iter()
            .map(|e| CMatrix::from_real_diag(e))
            .collect(),
        (0..n).map(|k| bell_label(d, k)).collect(),
    )?;
    Scenario::new(rho1, rho2, spec.alice().to_vec(), bob)
}

/// Random product strategy, for property tests and spot checks.
pub fn random_strategy<R: Rng + ?Sized>(
    d: usize,
    bob_outcomes: usize,
    rng: &mut R,
) -> ProductStrategy {
    ProductStrategy {
        psi1: random_local_pure(d, rng),
        psi2: random_local_pure(d, rng),
        bob_response: rng.random_range(0..bob_outcomes),
    }
}
