//! Swap-steering witnesses as explicit coefficient tables over Alice's and
//! Bob's outcomes, together with their bounds under separable hidden-state
//! models, and evaluation on correlation tables.

mod ccn;
mod io;
mod npt;
mod universal;

pub use ccn::build_ccn_witness;
pub use io::{load_witness, save_witness, MeasurementFile, ProvenanceFile, WitnessFile};
pub use npt::build_npt_witness;
pub use universal::{
    build_universal_witness, compat_map_report, gamma_identity_residual, universal_generators,
    CompatMapReport,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qlinalg::{CMatrix, HwCoefficients};
use crate::states::{Ket, Povm};
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Family {
    Npt,
    Ccn,
    Universal,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Npt => "NPT",
            Family::Ccn => "CCN",
            Family::Universal => "UNIVERSAL",
        })
    }
}

/// Operators used to build a witness, kept so ideal strategies can be
/// reconstructed from a spec alone.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Npt {
        /// Maps the left Schmidt vectors of `eta` onto the computational basis.
        u: CMatrix,
        /// Maps the right Schmidt vectors of `eta` onto the computational basis.
        v: CMatrix,
        alpha: Vec<f64>,
        eta: Ket,
        min_eigenvalue: f64,
    },
    Ccn {
        u_prime: CMatrix,
        v_prime: CMatrix,
    },
    Universal {
        w: CMatrix,
        lambda: HwCoefficients,
        /// Heisenberg-Weyl label generating each measurement setting.
        generators: Vec<(usize, usize)>,
        gamma_residual: f64,
        reality_residue: f64,
    },
}

/// One nonzero entry `c(x, a, b)` of a coefficient table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub x: usize,
    pub a: usize,
    pub b: usize,
    pub c: f64,
}

/// `S = c00 p_B(0) + sum_{x,a,b} c(x,a,b) p(a,b|x)` with its SOHS bound.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessSpec {
    family: Family,
    d: usize,
    alice: Vec<Povm>,
    bob_outcomes: usize,
    /// Dense `[x][a][b]`.
    table: Vec<Vec<Vec<f64>>>,
    marginal: f64,
    sohs_bound: f64,
    provenance: Provenance,
}

impl WitnessSpec {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        family: Family,
        d: usize,
        alice: Vec<Povm>,
        bob_outcomes: usize,
        table: Vec<Vec<Vec<f64>>>,
        marginal: f64,
        sohs_bound: f64,
        provenance: Provenance,
    ) -> Result<Self> {
        if table.len() != alice.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficient settings for {} measurements",
                table.len(),
                alice.len()
            )));
        }
        for (x, (rows, povm)) in table.iter().zip(&alice).enumerate() {
            if povm.dim() != d * d {
                return Err(Error::DimensionMismatch(format!(
                    "setting {x} acts on dimension {}, expected {}",
                    povm.dim(),
                    d * d
                )));
            }
            if rows.len() != povm.len() || rows.iter().any(|r| r.len() != bob_outcomes) {
                return Err(Error::ShapeMismatch(format!(
                    "coefficient block for setting {x} does not match {} x {bob_outcomes}",
                    povm.len()
                )));
            }
        }
        Ok(Self {
            family,
            d,
            alice,
            bob_outcomes,
            table,
            marginal,
            sohs_bound,
            provenance,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn alice(&self) -> &[Povm] {
        &self.alice
    }

    pub fn settings(&self) -> usize {
        self.alice.len()
    }

    pub fn alice_outcomes(&self, x: usize) -> usize {
        self.alice[x].len()
    }

    pub fn bob_outcomes(&self) -> usize {
        self.bob_outcomes
    }

    pub fn coefficient(&self, x: usize, a: usize, b: usize) -> f64 {
        self.table[x][a][b]
    }

    pub fn table(&self) -> &[Vec<Vec<f64>>] {
        &self.table
    }

    /// Coefficient of Bob's marginal `p_B(0)`.
    pub fn marginal(&self) -> f64 {
        self.marginal
    }

    pub fn sohs_bound(&self) -> f64 {
        self.sohs_bound
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Nonzero coefficients in `(x, a, b)` order.
    pub fn sparse_coefficients(&self) -> Vec<Coefficient> {
        let mut out = Vec::new();
        for (x, rows) in self.table.iter().enumerate() {
            for (a, row) in rows.iter().enumerate() {
                for (b, &c) in row.iter().enumerate() {
                    if c != 0.0 {
                        out.push(Coefficient { x, a, b, c });
                    }
                }
            }
        }
        out
    }

    /// `C_b = sum_{x,a} c(x,a,b) M^a_x` on Alice's `C^d (x) C^d`.
    pub fn outcome_operator(&self, b: usize) -> CMatrix {
        let n = self.d * self.d;
        let mut out = CMatrix::zeros(n, n);
        for (rows, povm) in self.table.iter().zip(&self.alice) {
            for (row, e) in rows.iter().zip(povm.elements()) {
                if row[b] != 0.0 {
                    out = &out + &e.scale_re(row[b]);
                }
            }
        }
        out
    }

    /// A copy with every coefficient (and the marginal) multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.table
            .iter_mut()
            .flatten()
            .flatten()
            .for_each(|c| *c *= s);
        out.marginal *= s;
        out.sohs_bound *= s;
        out
    }
}

/// `p(a, b | x)` per Alice setting, with Bob's marginal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTable {
    /// `[x][a][b]`.
    pub probabilities: Vec<Vec<Vec<f64>>>,
    pub bob_marginal: Vec<f64>,
}

impl CorrelationTable {
    pub fn settings(&self) -> usize {
        self.probabilities.len()
    }

    pub fn alice_outcomes(&self, x: usize) -> usize {
        self.probabilities[x].len()
    }

    pub fn bob_outcomes(&self) -> usize {
        self.bob_marginal.len()
    }

    /// Nonnegativity, per-setting normalization, and agreement of every
    /// setting's Bob marginal with `bob_marginal`. Returns the worst defect.
    pub fn validate(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (x, block) in self.probabilities.iter().enumerate() {
            let mut total = 0.0;
            let mut marg = vec![0.0; self.bob_outcomes()];
            for row in block {
                if row.len() != self.bob_outcomes() {
                    return Err(Error::ShapeMismatch(format!("ragged block at setting {x}")));
                }
                for (b, &p) in row.iter().enumerate() {
                    if p < -tol::PROBABILITY_DUST {
                        return Err(Error::ParameterOutOfRange(format!(
                            "negative probability {p:e} at setting {x}"
                        )));
                    }
                    total += p;
                    marg[b] += p;
                }
            }
            worst = worst.max((total - 1.0).abs());
            for (m, want) in marg.iter().zip(&self.bob_marginal) {
                worst = worst.max((m - want).abs());
            }
        }
        if worst > tol::TRACE {
            return Err(Error::ParameterOutOfRange(format!(
                "correlation table inconsistent by {worst:e}"
            )));
        }
        Ok(worst)
    }

    /// `t * self + (1 - t) * other`.
    pub fn mix(&self, other: &Self, t: f64) -> Result<Self> {
        if !same_shape(self, other) {
            return Err(Error::ShapeMismatch("tables of different shapes".into()));
        }
        let blend = |p: f64, q: f64| t * p + (1.0 - t) * q;
        Ok(Self {
            probabilities: self
                .probabilities
                .iter()
                .zip(&other.probabilities)
                .map(|(bx, cx)| {
                    bx.iter()
                        .zip(cx)
                        .map(|(r, s)| r.iter().zip(s).map(|(&p, &q)| blend(p, q)).collect())
                        .collect()
                })
                .collect(),
            bob_marginal: self
                .bob_marginal
                .iter()
                .zip(&other.bob_marginal)
                .map(|(&p, &q)| blend(p, q))
                .collect(),
        })
    }
}

fn same_shape(a: &CorrelationTable, b: &CorrelationTable) -> bool {
    a.bob_outcomes() == b.bob_outcomes()
        && a.settings() == b.settings()
        && (0..a.settings()).all(|x| a.alice_outcomes(x) == b.alice_outcomes(x))
}

/// `c00 p_B(0) + sum c(x,a,b) p(a,b|x)`.
pub fn eval_witness(spec: &WitnessSpec, corr: &CorrelationTable) -> Result<f64> {
    if corr.settings() != spec.settings() || corr.bob_outcomes() != spec.bob_outcomes() {
        return Err(Error::ShapeMismatch(format!(
            "table has {} settings x {} Bob outcomes, witness needs {} x {}",
            corr.settings(),
            corr.bob_outcomes(),
            spec.settings(),
            spec.bob_outcomes()
        )));
    }
    let mut value = spec.marginal() * corr.bob_marginal[0];
    for (x, (cx, px)) in spec.table.iter().zip(&corr.probabilities).enumerate() {
        if cx.len() != px.len() {
            return Err(Error::ShapeMismatch(format!(
                "setting {x}: table has {} Alice outcomes, witness needs {}",
                px.len(),
                cx.len()
            )));
        }
        for (cr, pr) in cx.iter().zip(px) {
            for (c, p) in cr.iter().zip(pr) {
                value += c * p;
            }
        }
    }
    Ok(value)
}

/// Largest imaginary part in a list of nominally real coefficients.
pub(crate) fn reality_residue(values: impl IntoIterator<Item = crate::qlinalg::C64>) -> f64 {
    values.into_iter().map(|z| z.im.abs()).fold(0.0, f64::max)
}
