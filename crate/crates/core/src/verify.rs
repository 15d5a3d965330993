//! Simulation-backed checks that a rotation circuit does what its
//! parameters promise: the all-zero outcome applies `e^{iv} R_theta_star`
//! with the exact phase `v = arg(k + i(2^n - k))`, every other outcome
//! applies `Z` up to a phase of `-pi/4` or `3pi/4`, and the outcome
//! probabilities match the exact dyadic values.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::sim::{conditional_operators_with_cap, global_phase_between, ConditionalOperator, Mat2};
use crate::synthesis::{Fraction, SynthesisParams};
use crate::tolerance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub outcome: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub passed: bool,
    pub n: u32,
    pub k: u64,
    pub theta_star: f64,
    /// `v`, the exact global phase expected on the success branch.
    pub global_phase: f64,
    pub expected_success: Fraction,
    pub expected_success_probability: f64,
    pub measured_success_probability: f64,
    pub measured_failure_probability: f64,
    pub outcomes_checked: usize,
    /// Largest `||M_0 - e^{iv} R_theta_star||_F` seen.
    pub success_operator_error: f64,
    /// Largest distance of a failure-branch operator from `Z` up to phase.
    pub failure_operator_error: f64,
    pub failures: Vec<Failure>,
}

/// `e^{iv} diag(1, e^{i theta_star})`; the identity path has no phase.
pub fn expected_success_operator(params: &SynthesisParams) -> Mat2 {
    if params.is_identity() {
        return Mat2::identity();
    }
    Mat2::rz(params.theta_star).scale(Complex64::from_polar(1.0, params.global_phase()))
}

/// Checks `circuit` against `params`. Construction bugs detected by the
/// simulator are reported as failures, not errors.
pub fn verify_circuit(
    circuit: &Circuit,
    params: &SynthesisParams,
    max_qubits: usize,
) -> Result<VerificationReport> {
    let mut report = VerificationReport {
        passed: false,
        n: params.n,
        k: params.k,
        theta_star: params.theta_star,
        global_phase: if params.is_identity() {
            0.0
        } else {
            params.global_phase()
        },
        expected_success: if params.is_identity() {
            Fraction { num: 1, den: 1 }
        } else {
            params.success_fraction()
        },
        expected_success_probability: 0.0,
        measured_success_probability: 0.0,
        measured_failure_probability: 0.0,
        outcomes_checked: 0,
        success_operator_error: 0.0,
        failure_operator_error: 0.0,
        failures: Vec::new(),
    };
    report.expected_success_probability = report.expected_success.to_f64();

    let ops = match conditional_operators_with_cap(circuit, max_qubits) {
        Ok(ops) => ops,
        Err(Error::ConstructionBug { outcome, residual }) => {
            report.failures.push(Failure {
                outcome,
                reason: format!("internal ancillas not restored (residual {residual:e})"),
            });
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    report.outcomes_checked = ops.len();

    let expected = expected_success_operator(params);
    for op in &ops {
        check_operator(op, &expected, &mut report);
    }
    if !ops.iter().any(|op| op.outcome.is_zero()) {
        report.failures.push(Failure {
            outcome: "0".into(),
            reason: "all-zero outcome never occurs".into(),
        });
    }

    let p_err = (report.measured_success_probability - report.expected_success_probability).abs();
    if p_err > tolerance::PROBABILITY {
        report.failures.push(Failure {
            outcome: zero_label(circuit),
            reason: format!(
                "success probability {} differs from exact {} by {p_err:e}",
                report.measured_success_probability, report.expected_success
            ),
        });
    }
    let expected_fail = 1.0 - report.expected_success_probability;
    if (report.measured_failure_probability - expected_fail).abs() > tolerance::OPERATOR {
        report.failures.push(Failure {
            outcome: "nonzero".into(),
            reason: format!(
                "failure probability {} differs from {}",
                report.measured_failure_probability, expected_fail
            ),
        });
    }
    report.passed = report.failures.is_empty();
    Ok(report)
}

fn zero_label(circuit: &Circuit) -> String {
    crate::sim::Outcome {
        bits: 0,
        width: circuit.registers.controls as u32,
    }
    .to_string()
}

fn check_operator(op: &ConditionalOperator, expected: &Mat2, report: &mut VerificationReport) {
    let label = op.outcome.to_string();
    if op.input_dependence > tolerance::PROBABILITY {
        report.failures.push(Failure {
            outcome: label.clone(),
            reason: format!(
                "outcome probability depends on the target input (spread {:e})",
                op.input_dependence
            ),
        });
    }
    if op.outcome.is_zero() {
        report.measured_success_probability += op.probability;
        let err = op.matrix.minus(*expected).frobenius();
        report.success_operator_error = report.success_operator_error.max(err);
        if err > tolerance::OPERATOR {
            report.failures.push(Failure {
                outcome: label,
                reason: format!("success operator off e^(iv) R_theta* by {err:e}"),
            });
        }
        return;
    }

    report.measured_failure_probability += op.probability;
    let Some((lambda, err)) = global_phase_between(&op.matrix, &Mat2::z()) else {
        return;
    };
    report.failure_operator_error = report.failure_operator_error.max(err);
    if err > tolerance::OPERATOR {
        report.failures.push(Failure {
            outcome: label,
            reason: format!("failure operator not proportional to Z (residual {err:e})"),
        });
        return;
    }
    let phase = lambda.arg();
    let near = |target: f64| {
        let d = (phase - target).rem_euclid(2.0 * PI);
        d.min(2.0 * PI - d) < 1e-8
    };
    if !near(-FRAC_PI_4) && !near(3.0 * FRAC_PI_4) {
        report.failures.push(Failure {
            outcome: label,
            reason: format!("failure branch global phase {phase} not in {{-pi/4, 3pi/4}}"),
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::build_rotation_circuit;
    use crate::sim::DEFAULT_MAX_QUBITS;
    use crate::synthesis::synthesize;

    fn verify(theta: f64, eps: f64) -> VerificationReport {
        let p = synthesize(theta, eps).unwrap();
        let c = build_rotation_circuit(&p).unwrap();
        verify_circuit(&c, &p, DEFAULT_MAX_QUBITS).unwrap()
    }

    #[test]
    fn t_gate_passes() {
        let r = verify(FRAC_PI_4, 1e-2);
        assert!(r.passed, "{:?}", r.failures);
        assert!((r.measured_success_probability - 19193.0 / 32768.0).abs() < 1e-12);
    }

    #[test]
    fn special_paths_pass() {
        for theta in [
            0.0,
            std::f64::consts::FRAC_PI_2,
            -std::f64::consts::FRAC_PI_2,
        ] {
            let r = verify(theta, 1e-3);
            assert!(r.passed, "theta={theta}: {:?}", r.failures);
        }
    }

    #[test]
    fn corrupted_polarity_fails_with_outcome() {
        let p = synthesize(2.0 * 0.5f64.atan(), 0.5).unwrap();
        let c = build_rotation_circuit(&p).unwrap();
        let gate = c.first_controlled_gate().unwrap();
        let bad = c.with_flipped_polarity(gate, 0).unwrap();
        let r = verify_circuit(&bad, &p, DEFAULT_MAX_QUBITS).unwrap();
        assert!(!r.passed);
        assert!(!r.failures.is_empty());
        assert!(r.failures.iter().all(|f| !f.outcome.is_empty()));
    }

    #[test]
    fn corrupted_carry_reports_dirty_ancilla() {
        let p = synthesize(FRAC_PI_4, 1e-2).unwrap();
        let c = build_rotation_circuit(&p).unwrap();
        let gate = c.first_controlled_gate().unwrap();
        let r = verify_circuit(
            &c.with_flipped_polarity(gate, 1).unwrap(),
            &p,
            DEFAULT_MAX_QUBITS,
        )
        .unwrap();
        assert!(!r.passed);
        assert!(r.failures[0].reason.contains("ancillas"));
    }
}
