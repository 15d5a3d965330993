//! Numerical tolerances shared by the checks, the CLI and the test suites.

/// Operator comparisons after a full circuit simulation.
pub const OPERATOR: f64 = 1e-10;

/// Statevector norm drift.
pub const NORM: f64 = 1e-12;

/// Exact dyadic probabilities compared against simulated ones.
pub const PROBABILITY: f64 = 1e-12;

/// Final target state of a repeat-until-success run against `R_theta_star`.
pub const FINAL_STATE: f64 = 1e-9;

/// Residual weight on internal ancillas that still counts as restored.
pub const ANCILLA_RESIDUAL: f64 = 1e-12;

/// Outcomes below this probability are treated as impossible.
pub const NEGLIGIBLE_PROBABILITY: f64 = 1e-14;
