//! Repeat-until-success synthesis of single-qubit z-rotations over the
//! Clifford+Toffoli gate set.
//!
//! A rotation `R_theta = diag(1, e^{i theta})` with accuracy `epsilon` is
//! compiled into `n = 1 + ceil(log2(1/epsilon))` control ancillas and an
//! integer `k`. The attempt circuit puts the controls in uniform
//! superposition, runs a `>= k` comparator into the target, applies `S`,
//! and runs the comparator again. Measuring all controls as zero means the
//! target received `R_theta_star`, `|theta - theta_star| <= epsilon`, which
//! happens with probability above one half; any other outcome applied `Z`,
//! which is undone before retrying.
//!
//! * [`synthesis`]: parameter selection and exact probabilities.
//! * [`circuit`]: the explicit gate array, resource counts and text/JSON export.
//! * [`sim`]: dense statevector simulation and conditional-operator extraction.
//! * [`verify`]: operator checks on the simulated circuit.
//! * [`rus`]: the repeat-until-success loop and Monte Carlo statistics.
//! * [`cli`]: the `rotsynth` command line.

pub mod circuit;
pub mod cli;
pub mod error;
pub mod expr;
pub mod rus;
pub mod sim;
pub mod synthesis;
pub mod tolerance;
pub mod verify;

pub use circuit::{
    build_comparator, build_ge_k_test, build_rotation_circuit, build_rus_circuit, export_circuit,
    parse_circuit, resources, Circuit, Control, Direction, Format, Gate, GateKind, Polarity,
    Registers, ResourceReport,
};
pub use error::{Error, Result};
pub use rus::{monte_carlo, MonteCarloConfig, MonteCarloReport, RunStats, RusRunner};
pub use sim::{
    conditional_operators, equal_up_to_global_phase, oracle_ge_k, ConditionalOperator, Mat2,
    Outcome, StateVector,
};
pub use synthesis::{
    choose_parameters, distance_bound, expected_repetitions, is_exact, reduce_angle,
    success_probability, synthesize, theta_star_of, Dyadic, Fraction, RotationSpec,
    SynthesisParams,
};
pub use verify::{verify_circuit, VerificationReport};
