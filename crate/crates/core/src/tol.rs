//! Absolute tolerances shared by validators and reports.

/// Max-abs of `m - m^dagger`.
pub const HERMITIAN: f64 = 1e-9;
/// Smallest admissible eigenvalue is `-PSD`.
pub const PSD: f64 = 1e-9;
pub const TRACE: f64 = 1e-9;
pub const KET_NORM: f64 = 1e-9;
/// `is_npt` iff the smallest partial-transpose eigenvalue is below `-PPT`.
pub const PPT: f64 = 1e-9;
/// CCN violation iff the coefficient sum exceeds `1 + CCN`.
pub const CCN: f64 = 1e-9;
pub const UNITARY: f64 = 1e-9;
pub const POVM: f64 = 1e-9;
/// Largest tolerated imaginary part of a witness coefficient.
pub const COEFFICIENT_REALITY: f64 = 1e-9;
/// Largest tolerated residual of the universal-witness operator identity.
pub const GAMMA_IDENTITY: f64 = 1e-8;
/// Aligned-form coefficients off the allowed pattern must vanish below this.
pub const ALIGNED_FORM: f64 = 1e-9;
/// Post-selection events below this probability are rejected.
pub const NULL_EVENT: f64 = 1e-12;
/// Probabilities with magnitude below this are clipped to zero.
pub const PROBABILITY_DUST: f64 = 1e-14;
/// A witness value counts as a violation when it exceeds the bound by more than this.
pub const VIOLATION: f64 = 1e-9;
/// Numeric bound exceeding the analytic one by more than this is flagged.
pub const BOUND_DISCREPANCY: f64 = 1e-6;
