//! Centralized numeric tolerances.

/// Absolute tolerance for floating comparisons unless an operation states
/// otherwise.
pub const ABS: f64 = 1e-12;

/// Tolerance for gauge-fidelity checks at solver-produced parameters.
pub const GAUGE: f64 = 1e-10;

/// Tolerance for agreement between simulator probabilities and closed forms.
pub const FORMULA: f64 = 1e-10;

/// Tolerance for regressions against published 4-decimal reference values.
pub const TABLE: f64 = 1e-3;

/// Residual bound for certified polynomial roots.
pub const ROOT_RESIDUAL: f64 = 1e-12;
