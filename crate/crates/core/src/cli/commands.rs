use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::ValueEnum;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::RunReport;
use crate::criteria::{ccn_test, npt_entanglement_witness, ppt_test, verify_ccn_aligned};
use crate::error::{Error, Result};
use crate::network::{ideal_bob, ideal_strategy, simulate, Scenario};
use crate::qlinalg::CMatrix;
use crate::sohs::{grid_bound, seesaw_bound, SeesawOptions};
use crate::states::{isotropic, load_operator, load_state, max_entangled, DensityMatrix};
use crate::tol;
use crate::witnesses::{
    build_ccn_witness, build_npt_witness, build_universal_witness, compat_map_report, load_witness,
    save_witness, WitnessSpec,
};

/// Largest local dimension accepted by scans.
pub const DMAX_GUARD: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BoundMethod {
    Seesaw,
    Grid,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WitnessInput {
    Npt {
        state: PathBuf,
    },
    Ccn {
        d: usize,
        u_prime: Option<PathBuf>,
        v_prime: Option<PathBuf>,
        state: Option<PathBuf>,
    },
    Universal {
        w: Option<PathBuf>,
        state: Option<PathBuf>,
        compat_map: bool,
    },
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

pub fn cmd_check(state: &Path, seed: u64) -> Result<RunReport> {
    let t0 = Instant::now();
    let rho = load_state(state)?;
    let results = json!({
        "dims": [rho.dims().0, rho.dims().1],
        "ppt": ppt_test(&rho),
        "ccn": ccn_test(&rho),
    });
    Ok(RunReport::new(
        "check",
        json!({ "state": path_str(state) }),
        results,
        seed,
        t0,
    ))
}

fn load_local_unitary(path: Option<&Path>, d: usize) -> Result<CMatrix> {
    let Some(path) = path else {
        return Ok(CMatrix::identity(d));
    };
    let (m, _) = load_operator(path)?;
    if m.rows() != d {
        return Err(Error::DimensionMismatch(format!(
            "{}: {}x{} unitary for d = {d}",
            path.display(),
            m.rows(),
            m.cols()
        )));
    }
    Ok(m)
}

fn summary(spec: &WitnessSpec) -> serde_json::Value {
    json!({
        "family": spec.family(),
        "d": spec.d(),
        "settings": spec.settings(),
        "bob_outcomes": spec.bob_outcomes(),
        "sohs_bound": spec.sohs_bound(),
    })
}

pub fn cmd_witness(input: &WitnessInput, out: &Path, seed: u64) -> Result<RunReport> {
    let t0 = Instant::now();
    let (spec, inputs, extra) = match input {
        WitnessInput::Npt { state } => {
            let rho = load_state(state)?;
            let spec = build_npt_witness(&rho)?;
            let (_, predicted) = ideal_strategy(&spec, &rho)?;
            (
                spec,
                json!({ "family": "NPT", "state": path_str(state) }),
                json!({ "predicted_value": predicted }),
            )
        }
        WitnessInput::Ccn {
            d,
            u_prime,
            v_prime,
            state,
        } => {
            let d = *d;
            if d < 2 {
                return Err(Error::ParameterOutOfRange(format!(
                    "d must be at least 2, got {d}"
                )));
            }
            let u = load_local_unitary(u_prime.as_deref(), d)?;
            let v = load_local_unitary(v_prime.as_deref(), d)?;
            let spec = build_ccn_witness(d, &u, &v)?;
            let extra = match state {
                Some(path) => {
                    let rho = load_state(path)?;
                    let aligned = verify_ccn_aligned(&rho, &u, &v)?;
                    let (_, predicted) = ideal_strategy(&spec, &rho)?;
                    json!({
                        "predicted_value": predicted,
                        "aligned_lambda_sum": aligned.lambda_sum(),
                        "aligned_form": aligned,
                    })
                }
                None => {
                    let target = max_entangled(d)
                        .density()
                        .local_conjugate(&u.adjoint(), &v.adjoint())?;
                    let (_, predicted) = ideal_strategy(&spec, &target)?;
                    json!({ "predicted_value": predicted, "predicted_for": "aligned phi+" })
                }
            };
            let inputs = json!({
                "family": "CCN",
                "d": d,
                "u_prime": u_prime.as_deref().map(path_str),
                "v_prime": v_prime.as_deref().map(path_str),
                "state": state.as_deref().map(path_str),
            });
            (spec, inputs, extra)
        }
        WitnessInput::Universal {
            w,
            state,
            compat_map,
        } => {
            let rho = state.as_deref().map(load_state).transpose()?;
            let (w_op, d) = match (w, &rho) {
                (Some(path), _) => {
                    let (m, dims) = load_operator(path)?;
                    if dims.0 != dims.1 {
                        return Err(Error::DimensionMismatch(format!(
                            "universal witness needs equal local dimensions, got {dims:?}"
                        )));
                    }
                    (m, dims.0)
                }
                (None, Some(rho)) => (npt_entanglement_witness(rho)?, rho.dims().0),
                (None, None) => {
                    return Err(Error::ParameterOutOfRange(
                        "universal witness needs --w or --state".into(),
                    ))
                }
            };
            let spec = build_universal_witness(&w_op, d)?;
            let mut extra = serde_json::Map::new();
            if let Some(rho) = &rho {
                if w.is_none() || rho.dims() == (d, d) {
                    let (_, predicted) = ideal_strategy(&spec, rho)?;
                    extra.insert("predicted_value".into(), json!(predicted));
                }
            }
            if *compat_map {
                extra.insert("compat_map".into(), json!(compat_map_report(&w_op, d)?));
            }
            if let crate::witnesses::Provenance::Universal {
                gamma_residual,
                reality_residue,
                ..
            } = spec.provenance()
            {
                extra.insert("gamma_residual".into(), json!(gamma_residual));
                extra.insert("reality_residue".into(), json!(reality_residue));
            }
            let inputs = json!({
                "family": "UNIVERSAL",
                "w": w.as_deref().map(path_str),
                "state": state.as_deref().map(path_str),
                "compat_map": compat_map,
            });
            (spec, inputs, serde_json::Value::Object(extra))
        }
    };
    save_witness(&spec, out)?;
    let mut results = summary(&spec);
    if let (Some(r), serde_json::Value::Object(e)) = (results.as_object_mut(), extra) {
        r.extend(e);
        r.insert("witness_path".into(), json!(path_str(out)));
    }
    Ok(RunReport::new("witness", inputs, results, seed, t0))
}

pub fn cmd_simulate(
    spec_path: &Path,
    rho1_path: &Path,
    rho2_path: Option<&Path>,
    ideal: bool,
    seed: u64,
) -> Result<RunReport> {
    let t0 = Instant::now();
    let spec = load_witness(spec_path)?;
    let rho1 = load_state(rho1_path)?;
    let mut predicted = None;
    let scenario = if ideal {
        if rho2_path.is_some() {
            return Err(Error::ParameterOutOfRange(
                "--ideal fixes the second source to |phi+_d>".into(),
            ));
        }
        let (s, p) = ideal_strategy(&spec, &rho1)?;
        predicted = Some(p);
        s
    } else {
        let rho2 = match rho2_path {
            Some(p) => load_state(p)?,
            None => max_entangled(spec.d()).density(),
        };
        Scenario::new(rho1, rho2, spec.alice().to_vec(), ideal_bob(&spec)?)?
    };
    let (table, value) = simulate(&spec, &scenario)?;
    let results = json!({
        "family": spec.family(),
        "value": value,
        "sohs_bound": spec.sohs_bound(),
        "violation": value > spec.sohs_bound() + tol::VIOLATION,
        "predicted_value": predicted,
        "correlations": table,
    });
    let inputs = json!({
        "spec": path_str(spec_path),
        "rho1": path_str(rho1_path),
        "rho2": rho2_path.map(path_str),
        "ideal": ideal,
    });
    Ok(RunReport::new("simulate", inputs, results, seed, t0))
}

pub fn cmd_bound(
    spec_path: &Path,
    method: BoundMethod,
    restarts: usize,
    resolution: usize,
    outcome: Option<usize>,
    seed: u64,
) -> Result<RunReport> {
    let t0 = Instant::now();
    let spec = load_witness(spec_path)?;
    let (value, numeric) = match method {
        BoundMethod::Seesaw => {
            let opts = SeesawOptions {
                restarts,
                seed,
                fixed_outcome: outcome,
                ..SeesawOptions::default()
            };
            let r = seesaw_bound(&spec, &opts)?;
            (r.value, serde_json::to_value(&r)?)
        }
        BoundMethod::Grid => {
            if outcome.is_some() {
                return Err(Error::ParameterOutOfRange(
                    "--outcome applies to the see-saw method only".into(),
                ));
            }
            let r = grid_bound(&spec, resolution)?;
            (r.value, serde_json::to_value(&r)?)
        }
    };
    let results = json!({
        "family": spec.family(),
        "method": method,
        "value": value,
        "analytic_bound": spec.sohs_bound(),
        "discrepancy": value > spec.sohs_bound() + tol::BOUND_DISCREPANCY,
        "result": numeric,
    });
    let inputs = json!({
        "spec": path_str(spec_path),
        "method": method,
        "restarts": restarts,
        "resolution": resolution,
        "outcome": outcome,
    });
    Ok(RunReport::new("bound", inputs, results, seed, t0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub d: usize,
    pub quantum_value: f64,
    pub sohs_bound: f64,
    pub ratio: f64,
}

fn ccn_identity(d: usize) -> Result<WitnessSpec> {
    let id = CMatrix::identity(d);
    build_ccn_witness(d, &id, &id)
}

fn guard_dimension(d: usize) -> Result<()> {
    if d > DMAX_GUARD {
        return Err(Error::ResourceGuard(format!(
            "d = {d} exceeds the limit of {DMAX_GUARD} (composite operators of size d^4)"
        )));
    }
    if d < 2 {
        return Err(Error::ParameterOutOfRange(format!(
            "d must be at least 2, got {d}"
        )));
    }
    Ok(())
}

/// CCN witness on `|phi+_d>` with its ideal strategy, `d = 2..=dmax`.
pub fn gap_scan_rows(dmax: usize) -> Result<Vec<GapRow>> {
    guard_dimension(dmax)?;
    (2..=dmax)
        .into_par_iter()
        .map(|d| {
            let spec = ccn_identity(d)?;
            let (scenario, _) = ideal_strategy(&spec, &max_entangled(d).density())?;
            let (_, q) = simulate(&spec, &scenario)?;
            Ok(GapRow {
                d,
                quantum_value: q,
                sohs_bound: spec.sohs_bound(),
                ratio: q / spec.sohs_bound(),
            })
        })
        .collect()
}

pub fn cmd_gap_scan(dmax: usize, seed: u64) -> Result<RunReport> {
    let t0 = Instant::now();
    let rows = gap_scan_rows(dmax)?;
    Ok(RunReport::new(
        "gap-scan",
        json!({ "dmax": dmax }),
        json!({ "rows": rows }),
        seed,
        t0,
    ))
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn gap_csv(rows: &[GapRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["d", "quantum_value", "sohs_bound", "ratio"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.d.to_string(),
            fmt17(r.quantum_value),
            fmt17(r.sohs_bound),
            fmt17(r.ratio),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessPoint {
    pub visibility: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessScan {
    pub d: usize,
    pub sohs_bound: f64,
    pub sweep: Vec<RobustnessPoint>,
    /// Visibility at which the simulated value crosses the bound.
    pub critical_visibility: f64,
    pub closed_form: f64,
}

/// Sweeps the isotropic visibility of the first source under the ideal CCN
/// strategy and bisects the crossing with `1/d`.
pub fn robustness_scan(d: usize, steps: usize) -> Result<RobustnessScan> {
    guard_dimension(d)?;
    if steps < 2 {
        return Err(Error::ParameterOutOfRange(format!(
            "need at least 2 sweep steps, got {steps}"
        )));
    }
    let spec = ccn_identity(d)?;
    let bob = ideal_bob(&spec)?;
    let phi = max_entangled(d).density();
    let value_at = |v: f64| -> Result<f64> {
        let rho: DensityMatrix = isotropic(d, v)?;
        let s = Scenario::new(rho, phi.clone(), spec.alice().to_vec(), bob.clone())?;
        Ok(simulate(&spec, &s)?.1)
    };
    let sweep = (0..steps)
        .map(|k| {
            let v = k as f64 / (steps - 1) as f64;
            Ok(RobustnessPoint {
                visibility: v,
                value: value_at(v)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let bound = spec.sohs_bound();
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if value_at(mid)? > bound {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(RobustnessScan {
        d,
        sohs_bound: bound,
        sweep,
        critical_visibility: 0.5 * (lo + hi),
        closed_form: 1.0 / (d as f64 + 1.0),
    })
}

pub fn cmd_robustness(d: usize, steps: usize, seed: u64) -> Result<RunReport> {
    let t0 = Instant::now();
    let scan = robustness_scan(d, steps)?;
    Ok(RunReport::new(
        "robustness",
        json!({ "family": "CCN", "d": d, "steps": steps }),
        serde_json::to_value(&scan)?,
        seed,
        t0,
    ))
}

pub(crate) fn robustness_csv(scan: &RobustnessScan) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["visibility", "value"]).map_err(csv_err)?;
    for p in &scan.sweep {
        w.write_record([fmt17(p.visibility), fmt17(p.value)])
            .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}
